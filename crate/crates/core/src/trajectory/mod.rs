//! Quantum-trajectory propagation of the conditional state of the cavity
//! mode and the beam atoms, with stochastic and enforced jumps.

mod dynamics;
mod estimator;
mod runs;

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::beam::{Atom, BeamState};
use crate::error::{invalid, Error, Result};
use crate::model::{coupling, derive, ModeGeometry, PhysicalParameters, Truncation};
use crate::state::TruncatedState;

pub use dynamics::{derivative, Drift, Rk4};
pub use estimator::{G2Accumulator, G2Estimate};
pub use runs::{run_g2, run_g2_with, run_semiclassical, AtomSetup, G2Run, SemiclassicalSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    FullQuantum,
    Semiclassical,
    SemiclassicalAdiabatic,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::FullQuantum => "full-quantum",
            Mode::Semiclassical => "semiclassical",
            Mode::SemiclassicalAdiabatic => "semiclassical-adiabatic",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full-quantum" => Ok(Mode::FullQuantum),
            "semiclassical" => Ok(Mode::Semiclassical),
            "semiclassical-adiabatic" => Ok(Mode::SemiclassicalAdiabatic),
            other => Err(invalid("mode", format!("unknown mode `{other}`"))),
        }
    }
}

/// Cap on accepted jumps within a trailing time window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Veto {
    pub max_jumps: usize,
    /// Window length, κ⁻¹.
    pub window: f64,
}

/// Numerical settings of a trajectory run. All times in units of κ⁻¹.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryConfig {
    pub dt: f64,
    /// Interval between enforced cavity jumps.
    pub sample_spacing: f64,
    /// Post-jump window excluded from the denominator samples.
    pub exclusion_window: f64,
    /// Initial time discarded by every trajectory.
    pub warmup: f64,
    /// Total simulated time, shared out between the trajectories.
    pub duration: f64,
    pub tau_max: f64,
    pub tau_points: usize,
    pub veto: Option<Veto>,
    pub seed: u64,
    pub mode: Mode,
    /// Number of independent trajectories the duration is split into.
    pub trajectories: usize,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub min_samples: usize,
    /// Hard cap on the number of atoms held in the state.
    pub max_atoms: usize,
    /// Start each trajectory with a stationary beam sample instead of an
    /// empty interaction volume.
    pub prefill: bool,
    /// Sampling interval of semiclassical photon-number series.
    pub series_interval: f64,
}

impl TrajectoryConfig {
    /// Defaults scaled to the rates of `params`.
    pub fn for_params(params: &PhysicalParameters) -> Self {
        let r = params.scaled();
        let d = derive(params);
        let recovery = 2.0 / (1.0 + r.gamma / 2.0);
        let fast = 1.0 + r.gamma / 2.0 + r.g_max * params.n_eff_bar.sqrt();
        let mut dt = 0.1 / fast;
        if let Some(t) = d.quarter_wave_time {
            dt = dt.min(t * params.kappa / 50.0);
        }
        let tau_max = 6.0;
        let exclusion_window = 10.0 * recovery;
        TrajectoryConfig {
            dt,
            sample_spacing: 50.0_f64.max(tau_max + exclusion_window + 1.0),
            exclusion_window,
            warmup: 20.0,
            duration: 5.0e4,
            tau_max,
            tau_points: 200,
            veto: None,
            seed: 1,
            mode: Mode::FullQuantum,
            trajectories: 1,
            workers: 1,
            min_samples: 1,
            max_atoms: match params.truncation {
                Truncation::ThreeQuanta => 400,
                _ => 4000,
            },
            prefill: true,
            series_interval: 0.05,
        }
    }

    /// Veto defaults: two accepted jumps per 1κ⁻¹ (strong atomic damping)
    /// or per 3κ⁻¹ (weak).
    pub fn default_veto(params: &PhysicalParameters) -> Veto {
        let window = if params.gamma > 2.0 * params.kappa { 1.0 } else { 3.0 };
        Veto { max_jumps: 2, window }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("dt", "must be positive"));
        }
        if !(self.tau_max > 0.0) || self.tau_points < 2 {
            return Err(invalid("tau_max", "need tau_max > 0 and at least two tau points"));
        }
        if !(self.exclusion_window >= 0.0) || !(self.warmup >= 0.0) || !(self.duration > 0.0) {
            return Err(invalid("duration", "times must be non-negative, duration positive"));
        }
        if !(self.sample_spacing > self.tau_max + self.exclusion_window) {
            return Err(invalid(
                "sample_spacing",
                format!(
                    "{} must exceed tau_max + exclusion_window = {}",
                    self.sample_spacing,
                    self.tau_max + self.exclusion_window
                ),
            ));
        }
        if let Some(v) = self.veto {
            if v.max_jumps < 1 || !(v.window > 0.0) {
                return Err(invalid("veto", "max_jumps must be at least 1 and window positive"));
            }
        }
        if self.trajectories == 0 {
            return Err(invalid("trajectories", "must be at least 1"));
        }
        if !(self.series_interval > 0.0) {
            return Err(invalid("series_interval", "must be positive"));
        }
        Ok(())
    }

    /// Time grid used by the integrator: the τ-grid spacing, the integer
    /// number of steps per τ point and the adjusted step.
    pub fn grid(&self) -> (f64, usize, f64) {
        let dtau = self.tau_max / (self.tau_points - 1) as f64;
        let per = (dtau / self.dt).ceil().max(1.0) as usize;
        (dtau, per, dtau / per as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JumpKind {
    Forwards,
    /// Spontaneous emission by the atom with this id.
    Side(u64),
    Enforced,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpEvent {
    pub time: f64,
    pub kind: JumpKind,
    pub vetoed: bool,
}

/// Where the atoms come from.
#[derive(Clone, Debug)]
enum Source {
    Beam(BeamState),
    /// A fixed set of atoms in free flight that never leaves.
    Fixed(Vec<Atom>),
}

impl Source {
    fn atoms(&self) -> &[Atom] {
        match self {
            Source::Beam(b) => &b.atoms,
            Source::Fixed(a) => a,
        }
    }
}

/// A single quantum trajectory: conditional state, atom source and jump record.
#[derive(Clone, Debug)]
pub struct Trajectory {
    state: TruncatedState,
    source: Source,
    geom: ModeGeometry,
    g_max: f64,
    gamma: f64,
    drift: Drift,
    rk: Rk4,
    couplings: Vec<Complex64>,
    rng: ChaCha8Rng,
    time: f64,
    veto: Option<Veto>,
    accepted: VecDeque<f64>,
    log: Option<Vec<JumpEvent>>,
    max_atoms: usize,
    jumps: bool,
}

/// Independent random streams for trajectory `index`: (beam, quantum).
pub fn streams(seed: u64, index: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let mut beam = ChaCha8Rng::seed_from_u64(seed);
    beam.set_stream(2 * index);
    let mut quantum = ChaCha8Rng::seed_from_u64(seed);
    quantum.set_stream(2 * index + 1);
    (beam, quantum)
}

impl Trajectory {
    /// Vacuum state fed by a thermal beam. With `prefill` the interaction
    /// volume starts with a stationary sample of atoms.
    pub fn with_beam(
        params: &PhysicalParameters,
        cfg: &TrajectoryConfig,
        index: u64,
        truncation: Truncation,
    ) -> Result<Self> {
        let (beam_rng, rng) = streams(cfg.seed, index);
        let mut beam = BeamState::new(params, beam_rng);
        let prefilled = if cfg.prefill { beam.prefill() } else { Vec::new() };
        let mut t = Self::build(params, cfg, Source::Beam(beam), rng, truncation);
        for atom in prefilled {
            t.admit(atom.id)?;
        }
        Ok(t)
    }

    /// Vacuum state with a fixed set of atoms that never leave.
    pub fn with_atoms(
        params: &PhysicalParameters,
        cfg: &TrajectoryConfig,
        index: u64,
        truncation: Truncation,
        atoms: Vec<Atom>,
    ) -> Result<Self> {
        let (_, rng) = streams(cfg.seed, index);
        let ids: Vec<u64> = atoms.iter().map(|a| a.id).collect();
        let mut t = Self::build(params, cfg, Source::Fixed(atoms), rng, truncation);
        for id in ids {
            t.admit(id)?;
        }
        Ok(t)
    }

    fn build(
        params: &PhysicalParameters,
        cfg: &TrajectoryConfig,
        source: Source,
        rng: ChaCha8Rng,
        truncation: Truncation,
    ) -> Self {
        let r = params.scaled();
        Trajectory {
            state: TruncatedState::vacuum(truncation),
            source,
            geom: params.geometry(),
            g_max: r.g_max,
            gamma: r.gamma,
            drift: Drift::new(r.drive, r.gamma, r.delta_c, r.delta_a),
            rk: Rk4::new(),
            couplings: Vec::new(),
            rng,
            time: 0.0,
            veto: cfg.veto,
            accepted: VecDeque::new(),
            log: None,
            max_atoms: cfg.max_atoms,
            jumps: true,
        }
    }

    fn admit(&mut self, id: u64) -> Result<()> {
        self.state.add_atom(id)?;
        let count = self.state.atom_count();
        if count > self.max_atoms {
            return Err(Error::AtomCap { count, cap: self.max_atoms });
        }
        Ok(())
    }

    /// Record every jump (including vetoed ones) from now on.
    pub fn enable_log(&mut self) {
        self.log.get_or_insert_with(Vec::new);
    }

    pub fn take_log(&mut self) -> Vec<JumpEvent> {
        self.log.as_mut().map(std::mem::take).unwrap_or_default()
    }

    /// Switch stochastic jumps off (pure non-Hermitian evolution).
    pub fn disable_jumps(&mut self) {
        self.jumps = false;
    }

    pub fn enable_beam_log(&mut self) {
        if let Source::Beam(b) = &mut self.source {
            b.enable_log();
        }
    }

    pub fn take_beam_log(&mut self) -> Vec<crate::beam::BeamEvent> {
        match &mut self.source {
            Source::Beam(b) => b.take_log(),
            Source::Fixed(_) => Vec::new(),
        }
    }

    pub fn state(&self) -> &TruncatedState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut TruncatedState {
        &mut self.state
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn atoms(&self) -> &[Atom] {
        self.source.atoms()
    }

    pub fn photon_number(&self) -> f64 {
        self.state.photon_number()
    }

    /// Couplings (units of κ) of every registered atom after a further
    /// flight time `ahead`, in state-slot order.
    pub fn couplings_at(&self, ahead: f64) -> Vec<Complex64> {
        let mut g = vec![Complex64::new(0.0, 0.0); self.state.atom_count()];
        for atom in self.source.atoms() {
            if let Some(slot) = self.state.slot_of(atom.id) {
                g[slot] = coupling(atom.position_after(ahead), &self.geom, self.g_max);
            }
        }
        g
    }

    /// Σ|g_j|²/γ over the current atoms: the instantaneous 2C/2.
    pub fn cooperativity(&self) -> f64 {
        let g_max = self.g_max;
        self.source
            .atoms()
            .iter()
            .map(|a| coupling(a.position, &self.geom, g_max).norm_sqr())
            .sum::<f64>()
            / self.gamma
    }

    fn push_log(&mut self, event: JumpEvent) {
        if let Some(log) = self.log.as_mut() {
            log.push(event);
        }
    }

    fn note_accepted(&mut self) {
        if self.veto.is_some() {
            self.accepted.push_back(self.time);
        }
    }

    /// Apply a cavity jump at the current time, outside the stochastic record.
    pub fn enforce_jump(&mut self) -> Result<()> {
        self.state.apply_cavity_jump()?;
        self.note_accepted();
        self.push_log(JumpEvent { time: self.time, kind: JumpKind::Enforced, vetoed: false });
        Ok(())
    }

    /// Advance the atoms only (no quantum evolution).
    pub fn advance_atoms(&mut self, dt: f64) -> Result<()> {
        match &mut self.source {
            Source::Beam(beam) => {
                let (spawned, exited) = beam.step(dt);
                for atom in spawned {
                    self.admit(atom.id)?;
                }
                for atom in exited {
                    self.state.remove_atom(atom.id, &mut self.rng)?;
                }
            }
            Source::Fixed(atoms) => {
                for a in atoms.iter_mut() {
                    a.position = a.position_after(dt);
                }
            }
        }
        self.time += dt;
        Ok(())
    }

    /// One integration step: RK4 with midpoint couplings, beam update,
    /// renormalization and the stochastic jumps of this step.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        self.couplings = self.couplings_at(0.5 * dt);
        let layout = self.state.layout();
        let couplings = std::mem::take(&mut self.couplings);
        self.rk.step(&layout, self.state.amplitudes_mut(), &couplings, &self.drift, dt)?;
        self.couplings = couplings;
        self.advance_atoms(dt)?;
        self.state.renormalize()?;
        if self.jumps {
            self.stochastic_jumps(dt)?;
        }
        Ok(())
    }

    fn stochastic_jumps(&mut self, dt: f64) -> Result<()> {
        let e = self.state.expectations()?;
        let p_forwards = 2.0 * e.photon_number * dt;
        let p_side: Vec<f64> = e.atom_excitation.iter().map(|x| self.gamma * x * dt).collect();
        let total = p_forwards + p_side.iter().sum::<f64>();
        if total >= 1.0 {
            return Err(Error::StepTooLarge(total));
        }
        if self.rng.random::<f64>() < p_forwards {
            self.state.apply_cavity_jump()?;
            self.note_accepted();
            self.push_log(JumpEvent { time: self.time, kind: JumpKind::Forwards, vetoed: false });
            return Ok(());
        }
        let ids: Vec<u64> = self.state.ids().to_vec();
        for (slot, p) in p_side.into_iter().enumerate() {
            if self.rng.random::<f64>() >= p {
                continue;
            }
            let id = ids[slot];
            let kind = JumpKind::Side(id);
            if self.vetoed() {
                self.push_log(JumpEvent { time: self.time, kind, vetoed: true });
                continue;
            }
            match self.state.apply_atom_jump(slot) {
                Ok(()) => {
                    self.note_accepted();
                    self.push_log(JumpEvent { time: self.time, kind, vetoed: false });
                }
                // an earlier jump in the same step may have emptied this atom
                Err(Error::NoExcitation(_)) => {}
                Err(e) => return Err(e),
            }
        }
        Ok(())
    }

    fn vetoed(&mut self) -> bool {
        let Some(v) = self.veto else { return false };
        while self.accepted.front().is_some_and(|&t| t < self.time - v.window) {
            self.accepted.pop_front();
        }
        self.accepted.len() >= v.max_jumps
    }
}
