//! Ensemble drivers: enforced-jump g²(τ) and semiclassical photon series.

use rayon::prelude::*;

use super::{G2Accumulator, G2Estimate, JumpEvent, Mode, Trajectory, TrajectoryConfig};
use crate::beam::Atom;
use crate::error::{invalid, Error, Result};
use crate::model::{PhysicalParameters, Truncation};
use crate::state::TruncatedState;

/// Atom supply of a run.
#[derive(Clone, Debug, PartialEq)]
pub enum AtomSetup {
    /// Thermal beam built from the parameters.
    Beam,
    /// Fixed atoms (possibly moving) that stay for the whole run.
    Fixed(Vec<Atom>),
}

#[derive(Clone, Debug)]
pub struct G2Run {
    pub estimate: G2Estimate,
    pub accumulator: G2Accumulator,
    /// Jump record of every trajectory, tagged by trajectory index.
    pub jumps: Vec<(usize, JumpEvent)>,
    /// Mean number of atoms in the state, sampled on the τ-grid clock.
    pub mean_atoms: f64,
    /// Conditional state of the first trajectory at the end of the run.
    pub final_state: Option<TruncatedState>,
}

/// Photon-number expectation sampled at a fixed interval (κ⁻¹).
#[derive(Clone, Debug, PartialEq)]
pub struct SemiclassicalSeries {
    pub interval: f64,
    /// Time of the first sample.
    pub start: f64,
    pub values: Vec<f64>,
    pub atom_counts: Vec<usize>,
}

impl SemiclassicalSeries {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |i| self.start + i as f64 * self.interval)
    }
}

/// Enforced-jump g²(τ) for atoms supplied by the thermal beam.
pub fn run_g2(params: &PhysicalParameters, cfg: &TrajectoryConfig) -> Result<G2Run> {
    run_g2_with(params, cfg, &AtomSetup::Beam)
}

pub fn run_g2_with(params: &PhysicalParameters, cfg: &TrajectoryConfig, setup: &AtomSetup) -> Result<G2Run> {
    params.validate()?;
    cfg.validate()?;
    if cfg.mode != Mode::FullQuantum {
        return Err(invalid("mode", "g2 runs need the full-quantum mode"));
    }
    if params.truncation == Truncation::OneQuantum {
        return Err(invalid("truncation", "g2 runs need at least two quanta"));
    }
    let results: Vec<Result<Shard>> = in_pool(cfg.workers, || {
        (0..cfg.trajectories).into_par_iter().map(|i| g2_shard(params, cfg, setup, i)).collect()
    })?;
    let (dtau, _, _) = cfg.grid();
    let tau: Vec<f64> = (0..cfg.tau_points).map(|i| i as f64 * dtau).collect();
    let mut acc = G2Accumulator::new(tau);
    let mut jumps = Vec::new();
    let mut final_state = None;
    let (mut atom_sum, mut atom_n) = (0.0, 0usize);
    for (i, r) in results.into_iter().enumerate() {
        let shard = r?;
        acc.merge(&shard.acc);
        jumps.extend(shard.jumps.into_iter().map(|e| (i, e)));
        atom_sum += shard.atom_sum;
        atom_n += shard.atom_n;
        if i == 0 {
            final_state = Some(shard.state);
        }
    }
    if acc.samples() < cfg.min_samples.max(1) {
        return Err(Error::TooFewSamples { got: acc.samples(), need: cfg.min_samples.max(1) });
    }
    Ok(G2Run {
        estimate: acc.finalize(params.kappa),
        accumulator: acc,
        jumps,
        mean_atoms: if atom_n > 0 { atom_sum / atom_n as f64 } else { 0.0 },
        final_state,
    })
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid("workers", e.to_string()))?;
    Ok(pool.install(f))
}

struct Shard {
    acc: G2Accumulator,
    jumps: Vec<JumpEvent>,
    atom_sum: f64,
    atom_n: usize,
    state: TruncatedState,
}

fn g2_shard(params: &PhysicalParameters, cfg: &TrajectoryConfig, setup: &AtomSetup, index: usize) -> Result<Shard> {
    let mut traj = match setup {
        AtomSetup::Beam => Trajectory::with_beam(params, cfg, index as u64, params.truncation)?,
        AtomSetup::Fixed(atoms) => {
            Trajectory::with_atoms(params, cfg, index as u64, params.truncation, atoms.clone())?
        }
    };
    traj.enable_log();
    let (dtau, per, dt) = cfg.grid();
    let steps = |t: f64| (t / dt).round() as usize;
    let spacing = steps(cfg.sample_spacing);
    let exclusion = (cfg.exclusion_window / dt).ceil() as usize;
    let cycles = (cfg.duration / cfg.trajectories as f64 / cfg.sample_spacing).floor() as usize;
    let points = cfg.tau_points;
    debug_assert!((points - 1) * per <= spacing);

    for _ in 0..steps(cfg.warmup) {
        traj.step(dt)?;
    }
    let tau: Vec<f64> = (0..points).map(|i| i as f64 * dtau).collect();
    let mut acc = G2Accumulator::new(tau);
    let mut x = vec![0.0; points];
    let (mut atom_sum, mut atom_n) = (0.0, 0usize);
    for _ in 0..cycles {
        x.fill(0.0);
        let n0 = traj.photon_number();
        if n0 > 0.0 {
            traj.enforce_jump()?;
            x[0] = n0 * traj.photon_number();
        }
        let (mut d_sum, mut d_n) = (0.0, 0usize);
        for s in 1..=spacing {
            traj.step(dt)?;
            if s % per != 0 {
                continue;
            }
            let n = traj.photon_number();
            let i = s / per;
            if i < points {
                x[i] = n0 * n;
            }
            if s >= exclusion {
                d_sum += n;
                d_n += 1;
            }
            atom_sum += traj.state().atom_count() as f64;
            atom_n += 1;
        }
        if d_n == 0 {
            return Err(invalid("exclusion_window", "leaves no denominator samples"));
        }
        acc.push(&x, d_sum / d_n as f64);
    }
    let jumps = traj.take_log();
    Ok(Shard { acc, jumps, atom_sum, atom_n, state: traj.state().clone() })
}

/// Photon-number series of a jump-free one-quantum trajectory, or of the
/// adiabatic formula (ℰ/κ)²/(1+2C(t))² evaluated along the beam.
pub fn run_semiclassical(params: &PhysicalParameters, cfg: &TrajectoryConfig) -> Result<SemiclassicalSeries> {
    run_semiclassical_with(params, cfg, &AtomSetup::Beam)
}

pub fn run_semiclassical_with(
    params: &PhysicalParameters,
    cfg: &TrajectoryConfig,
    setup: &AtomSetup,
) -> Result<SemiclassicalSeries> {
    params.validate()?;
    cfg.validate()?;
    if cfg.mode == Mode::FullQuantum {
        return Err(invalid("mode", "semiclassical series need a semiclassical mode"));
    }
    let mut traj = match setup {
        AtomSetup::Beam => Trajectory::with_beam(params, cfg, 0, Truncation::OneQuantum)?,
        AtomSetup::Fixed(atoms) => Trajectory::with_atoms(params, cfg, 0, Truncation::OneQuantum, atoms.clone())?,
    };
    traj.disable_jumps();
    let per = (cfg.series_interval / cfg.dt).ceil().max(1.0) as usize;
    let dt = cfg.series_interval / per as f64;
    let drive = params.scaled().drive;
    let adiabatic = cfg.mode == Mode::SemiclassicalAdiabatic;
    let sample = |t: &Trajectory| {
        if adiabatic {
            drive * drive / (1.0 + 2.0 * t.cooperativity()).powi(2)
        } else {
            t.photon_number()
        }
    };
    let advance = |t: &mut Trajectory| if adiabatic { t.advance_atoms(dt) } else { t.step(dt) };
    let warm = (cfg.warmup / cfg.series_interval).round() as usize;
    for _ in 0..warm * per {
        advance(&mut traj)?;
    }
    let count = (cfg.duration / cfg.series_interval).floor() as usize;
    let mut values = Vec::with_capacity(count);
    let mut atom_counts = Vec::with_capacity(count);
    let start = traj.time();
    for k in 0..count {
        if k > 0 {
            for _ in 0..per {
                advance(&mut traj)?;
            }
        }
        values.push(sample(&traj));
        atom_counts.push(traj.atoms().len());
    }
    Ok(SemiclassicalSeries { interval: cfg.series_interval, start, values, atom_counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PhysicalParameters {
        let p = PhysicalParameters::set1();
        PhysicalParameters { drive: 1e-2 * p.kappa, ..p }
    }

    // a truncated coherent state changes under a jump at O((ℰ/κ)²)
    const TRUNCATION: f64 = 1e-3;

    #[test]
    fn empty_cavity_is_coherent() {
        let p = params();
        let cfg = TrajectoryConfig { duration: 2000.0, sample_spacing: 20.0, exclusion_window: 5.0, tau_max: 4.0, tau_points: 21, ..TrajectoryConfig::for_params(&p) };
        let run = run_g2_with(&p, &cfg, &AtomSetup::Fixed(vec![])).unwrap();
        for g in &run.estimate.g2 {
            assert!((g - 1.0).abs() < TRUNCATION, "{g}");
        }
        assert_eq!(run.estimate.samples, 100);
    }

    #[test]
    fn rejects_wrong_mode_and_truncation() {
        let p = params();
        let cfg = TrajectoryConfig { mode: Mode::Semiclassical, ..TrajectoryConfig::for_params(&p) };
        assert!(run_g2(&p, &cfg).is_err());
        let q = PhysicalParameters { truncation: Truncation::OneQuantum, ..p.clone() };
        assert!(run_g2(&q, &TrajectoryConfig::for_params(&q)).is_err());
        assert!(run_semiclassical(&p, &TrajectoryConfig::for_params(&p)).is_err());
    }

    #[test]
    fn too_few_samples() {
        let p = params();
        let cfg = TrajectoryConfig { duration: 10.0, ..TrajectoryConfig::for_params(&p) };
        assert!(matches!(run_g2_with(&p, &cfg, &AtomSetup::Fixed(vec![])), Err(Error::TooFewSamples { .. })));
    }

    #[test]
    fn adiabatic_without_atoms_is_constant() {
        let p = params();
        let cfg = TrajectoryConfig { mode: Mode::SemiclassicalAdiabatic, duration: 10.0, ..TrajectoryConfig::for_params(&p) };
        let s = run_semiclassical_with(&p, &cfg, &AtomSetup::Fixed(vec![])).unwrap();
        assert_eq!(s.values.len(), 200);
        assert!(s.values.iter().all(|&v| (v - 1e-4).abs() < 1e-18));
    }

    #[test]
    fn static_configuration_modes_agree() {
        let p = params();
        let atoms = vec![
            Atom { id: 0, birth_time: 0.0, position: [1e-5, 0.0, 3e-8], velocity: [0.0; 3] },
            Atom { id: 1, birth_time: 0.0, position: [-2e-5, 1e-5, 1.1e-7], velocity: [0.0; 3] },
        ];
        let base = TrajectoryConfig { warmup: 30.0, duration: 1.0, ..TrajectoryConfig::for_params(&p) };
        let full = run_semiclassical_with(&p, &TrajectoryConfig { mode: Mode::Semiclassical, ..base.clone() }, &AtomSetup::Fixed(atoms.clone())).unwrap();
        let adi = run_semiclassical_with(&p, &TrajectoryConfig { mode: Mode::SemiclassicalAdiabatic, ..base }, &AtomSetup::Fixed(atoms)).unwrap();
        let (a, b) = (full.values[0], adi.values[0]);
        assert!((a - b).abs() / b < 1e-3, "{a} vs {b}");
    }
}
