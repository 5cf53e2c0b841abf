//! Monte-Carlo atomic beam: Poisson arrivals on the injection plane,
//! effusive speeds, ballistic flight through the square interaction slab.
//!
//! Time is in units of κ⁻¹, lengths in metres, velocities in metres per κ⁻¹.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};

use crate::model::{derive, ModeGeometry, PhysicalParameters};

/// A classical beam atom.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub id: u64,
    pub birth_time: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
}

impl Atom {
    pub fn speed(&self) -> f64 {
        self.velocity.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Position after a further `dt` of free flight.
    pub fn position_after(&self, dt: f64) -> [f64; 3] {
        let [x, y, z] = self.position;
        let [vx, vy, vz] = self.velocity;
        [x + vx * dt, y + vy * dt, z + vz * dt]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BeamEventKind {
    Spawn,
    Exit,
}

/// Entry of the optional beam event log.
#[derive(Clone, Debug, PartialEq)]
pub struct BeamEvent {
    pub time: f64,
    pub kind: BeamEventKind,
    pub id: u64,
    pub position: [f64; 3],
    pub speed: f64,
    pub tilt: f64,
}

/// Draw a beam speed from P(v)dv = 2u³e^{−u²}du, u = 2v/(√π v̄_oven).
///
/// s = u² is Gamma(2, 1) distributed, i.e. the sum of two unit exponentials.
pub fn sample_speed<R: Rng + ?Sized>(rng: &mut R, v_oven: f64) -> f64 {
    let e1: f64 = Exp1.sample(rng);
    let e2: f64 = Exp1.sample(rng);
    (e1 + e2).sqrt() * std::f64::consts::PI.sqrt() * v_oven / 2.0
}

/// Speed of an atom found inside the volume of a stationary beam (density
/// weighted, ∝ u²e^{−u²}: s = u² is Gamma(3/2, 1)).
fn sample_resident_speed<R: Rng + ?Sized>(rng: &mut R, v_oven: f64) -> f64 {
    let gamma = Gamma::new(1.5, 1.0).expect("valid shape");
    let s: f64 = gamma.sample(rng);
    s.sqrt() * std::f64::consts::PI.sqrt() * v_oven / 2.0
}

/// Atoms currently inside the interaction slab and the stream that feeds it.
#[derive(Clone, Debug)]
pub struct BeamState {
    pub atoms: Vec<Atom>,
    pub rng: ChaCha8Rng,
    pub geom: ModeGeometry,
    /// Injection rate over the whole entry plane, per κ⁻¹.
    pub rate: f64,
    pub tilt: f64,
    /// Mean oven speed, metres per κ⁻¹.
    pub v_oven: f64,
    pub time: f64,
    next_id: u64,
    log: Option<Vec<BeamEvent>>,
}

impl BeamState {
    /// Beam for `params`, with an empty interaction volume at time zero.
    ///
    /// The source rate R counts atoms crossing a strip 2w0 wide; the entry
    /// plane is 2w0√|ln F| wide, so the injection rate is R√|ln F|.
    pub fn new(params: &PhysicalParameters, rng: ChaCha8Rng) -> Self {
        let d = derive(params);
        let geom = params.geometry();
        let rate = d.rate_r * (geom.half_span / geom.w0) / params.kappa;
        BeamState {
            atoms: Vec::new(),
            rng,
            geom,
            rate,
            tilt: params.tilt,
            v_oven: d.v_oven / params.kappa,
            time: 0.0,
            next_id: 0,
            log: None,
        }
    }

    pub fn enable_log(&mut self) {
        self.log.get_or_insert_with(Vec::new);
    }

    pub fn take_log(&mut self) -> Vec<BeamEvent> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn half_span(&self) -> f64 {
        self.geom.half_span
    }

    /// Long-run mean occupation: arrival rate times the mean transit time
    /// 2h·E[1/(v cosθ)], where the flux-weighted E[1/v] equals 1/v̄_oven.
    pub fn expected_occupation(&self) -> f64 {
        self.rate * 2.0 * self.half_span() / (self.v_oven * self.tilt.cos())
    }

    fn new_atom(&mut self, birth_time: f64, x: f64, speed: f64) -> Atom {
        let h = self.half_span();
        let y = self.rng.random_range(-h..=h);
        let z0 = self.rng.random_range(-self.geom.lambda / 4.0..=self.geom.lambda / 4.0);
        let (s, c) = self.tilt.sin_cos();
        let velocity = [speed * c, 0.0, speed * s];
        let id = self.next_id;
        self.next_id += 1;
        // z drifts by tanθ per unit of x travelled
        let z = z0 + (x + h) * s / c;
        Atom { id, birth_time, position: [x, y, z], velocity }
    }

    fn record(&mut self, kind: BeamEventKind, atom: &Atom, time: f64) {
        let tilt = self.tilt;
        if let Some(log) = self.log.as_mut() {
            log.push(BeamEvent {
                time,
                kind,
                id: atom.id,
                position: atom.position,
                speed: atom.speed(),
                tilt,
            });
        }
    }

    /// Fill the slab with a sample of the stationary occupation: Poisson
    /// count, uniform positions, density-weighted speeds.
    pub fn prefill(&mut self) -> Vec<Atom> {
        let mean = self.expected_occupation();
        let n = if mean > 0.0 {
            Poisson::new(mean).expect("finite mean").sample(&mut self.rng) as usize
        } else {
            0
        };
        let h = self.half_span();
        let mut added = Vec::with_capacity(n);
        for _ in 0..n {
            let x = self.rng.random_range(-h..=h);
            let v = sample_resident_speed(&mut self.rng, self.v_oven);
            let birth = self.time - (x + h) / (v * self.tilt.cos());
            let atom = self.new_atom(birth, x, v);
            self.record(BeamEventKind::Spawn, &atom, self.time);
            added.push(atom);
        }
        self.atoms.extend(added.iter().cloned());
        added
    }

    /// Ballistic update of every atom by `dt`; advances the beam clock.
    pub fn advance(&mut self, dt: f64) {
        for atom in &mut self.atoms {
            atom.position = atom.position_after(dt);
        }
        self.time += dt;
    }

    /// Create the atoms that arrived during the interval (time − dt, time]:
    /// Poisson(R·dt) arrivals at uniform times, each advanced from its birth
    /// to the current time. Returns the new atoms (also appended to the state).
    pub fn spawn(&mut self, dt: f64) -> Vec<Atom> {
        let mean = self.rate * dt;
        if mean <= 0.0 {
            return Vec::new();
        }
        let n = Poisson::new(mean).expect("finite mean").sample(&mut self.rng) as usize;
        let h = self.half_span();
        let mut added = Vec::with_capacity(n);
        for _ in 0..n {
            let age = self.rng.random_range(0.0..dt);
            let v = sample_speed(&mut self.rng, self.v_oven);
            let birth = self.time - age;
            let mut atom = self.new_atom(birth, -h, v);
            atom.position = atom.position_after(age);
            self.record(BeamEventKind::Spawn, &atom, birth);
            added.push(atom);
        }
        added.sort_by(|a, b| a.birth_time.total_cmp(&b.birth_time));
        self.atoms.extend(added.iter().cloned());
        added
    }

    /// Remove and return the atoms past the exit plane, ordered by the time
    /// they crossed it.
    pub fn collect_exits(&mut self) -> Vec<Atom> {
        let h = self.half_span();
        let mut exited = Vec::new();
        let mut i = 0;
        while i < self.atoms.len() {
            if self.atoms[i].position[0] > h {
                exited.push(self.atoms.swap_remove(i));
            } else {
                i += 1;
            }
        }
        let now = self.time;
        let crossing = |a: &Atom| now - (a.position[0] - h) / a.velocity[0];
        exited.sort_by(|a, b| crossing(a).total_cmp(&crossing(b)));
        for atom in &exited {
            let t = crossing(atom);
            self.record(BeamEventKind::Exit, atom, t);
        }
        exited
    }

    /// advance + spawn + collect_exits.
    pub fn step(&mut self, dt: f64) -> (Vec<Atom>, Vec<Atom>) {
        self.advance(dt);
        let spawned = self.spawn(dt);
        let exited = self.collect_exits();
        (spawned, exited)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn beam(tilt: f64) -> BeamState {
        let p = PhysicalParameters { tilt, ..PhysicalParameters::set1() };
        BeamState::new(&p, ChaCha8Rng::seed_from_u64(7))
    }

    #[test]
    fn zero_rate_spawns_nothing() {
        let mut b = beam(0.0);
        b.rate = 0.0;
        assert!(b.spawn(1.0).is_empty());
        assert!(b.spawn(0.0).is_empty());
    }

    #[test]
    fn zero_dt_advance_is_identity() {
        let mut b = beam(0.01);
        b.prefill();
        let before = b.atoms.clone();
        b.advance(0.0);
        assert_eq!(before, b.atoms);
    }

    #[test]
    fn atom_crosses_slab_in_expected_time() {
        let mut b = beam(0.0);
        let h = b.half_span();
        let vx = 0.37 * b.v_oven;
        b.atoms.push(Atom { id: 99, birth_time: 0.0, position: [-h, 0.0, 0.0], velocity: [vx, 0.0, 0.0] });
        b.advance(2.0 * h / vx);
        assert!((b.atoms[0].position[0] - h).abs() < 1e-15);
        b.advance(1e-9);
        let gone = b.collect_exits();
        assert_eq!(gone.len(), 1);
        assert!(b.atoms.is_empty());
    }

    #[test]
    fn empty_state_has_no_exits() {
        assert!(beam(0.0).collect_exits().is_empty());
    }

    #[test]
    fn birth_invariants() {
        let mut b = beam(0.015);
        let h = b.half_span();
        b.rate = 1000.0;
        b.time = 1.0;
        for atom in b.spawn(1e-6) {
            assert!(atom.position[1].abs() <= h);
            let back = atom.position_after(-(b.time - atom.birth_time));
            assert!((back[0] + h).abs() < 1e-12);
            assert!(back[2].abs() <= b.geom.lambda / 4.0 + 1e-15);
            assert!((atom.velocity[2] / atom.velocity[0] - 0.015f64.tan()).abs() < 1e-12);
        }
    }

    #[test]
    fn ids_are_unique() {
        let mut b = beam(0.0);
        let mut seen = std::collections::HashSet::new();
        for a in b.prefill() {
            assert!(seen.insert(a.id));
        }
        for _ in 0..100 {
            let (spawned, _) = b.step(0.05);
            for a in spawned {
                assert!(seen.insert(a.id));
            }
        }
    }
}
