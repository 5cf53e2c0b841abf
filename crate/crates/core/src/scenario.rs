//! Built-in cross-checks of the trajectory engine against independent
//! references (dense master equation, closed forms).

use std::fmt;
use std::str::FromStr;

use crate::analytics::{g2_fixed, AtomConfiguration, G2Curve};
use crate::beam::Atom;
use crate::error::{invalid, Error, Result};
use crate::model::{CavityKind, PhysicalParameters};
use crate::oracle::dense_g2;
use crate::trajectory::{run_g2_with, AtomSetup, G2Estimate, TrajectoryConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    EmptyCavity,
    OneAtom,
    TwoAtom,
    RingCompensationToy,
}

impl Scenario {
    pub const ALL: [Scenario; 4] =
        [Scenario::EmptyCavity, Scenario::OneAtom, Scenario::TwoAtom, Scenario::RingCompensationToy];
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::EmptyCavity => "empty-cavity",
            Scenario::OneAtom => "one-atom",
            Scenario::TwoAtom => "two-atom",
            Scenario::RingCompensationToy => "ring-compensation-toy",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scenario::ALL
            .into_iter()
            .find(|x| x.to_string() == s)
            .ok_or_else(|| invalid("scenario", format!("unknown scenario `{s}`")))
    }
}

/// Relative tolerance for the fixed-atom comparisons.
pub const TOLERANCE: f64 = 0.05;
/// Drive strength ℰ/κ used by every scenario.
pub const WEAK_DRIVE: f64 = 1e-3;
/// Lag span of the comparison, κ⁻¹.
pub const TAU_MAX: f64 = 4.0;

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub scenario: Scenario,
    pub trajectory: G2Estimate,
    /// Dense master-equation curve (or the exact value for an empty cavity).
    pub reference: G2Curve,
    /// Closed-form stationary-atom curve, where one applies.
    pub analytic: Option<G2Curve>,
    /// max |traj − ref|/ref over the lag grid.
    pub max_rel_dev: f64,
    /// Same deviation against the closed form.
    pub analytic_rel_dev: Option<f64>,
    /// Largest deviation in units of the trajectory standard error.
    pub max_sigma: f64,
    pub passed: bool,
}

fn stationary(id: u64, position: [f64; 3]) -> Atom {
    Atom { id, birth_time: 0.0, position, velocity: [0.0; 3] }
}

/// Set 1 rates at a weak drive.
pub fn scenario_params() -> PhysicalParameters {
    let p = PhysicalParameters::set1();
    PhysicalParameters { drive: WEAK_DRIVE * p.kappa, ..p }
}

/// Trajectory settings: fixed atoms, `samples` enforced jumps, lags on
/// [0, 4]κ⁻¹ at 0.1κ⁻¹.
pub fn scenario_config(params: &PhysicalParameters, samples: usize, seed: u64) -> TrajectoryConfig {
    let base = TrajectoryConfig::for_params(params);
    let spacing = 10.0;
    TrajectoryConfig {
        dt: 0.01,
        tau_max: TAU_MAX,
        tau_points: 41,
        exclusion_window: 5.0,
        sample_spacing: spacing,
        warmup: 20.0,
        duration: spacing * samples as f64,
        seed,
        prefill: false,
        min_samples: samples,
        ..base
    }
}

fn rel_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs()).fold(0.0, f64::max)
}

/// Run `scenario` with `samples` enforced-jump cycles.
pub fn run_scenario(scenario: Scenario, samples: usize, seed: u64) -> Result<OracleReport> {
    let mut params = scenario_params();
    let lambda = params.lambda;
    let w0 = params.w0;
    let atoms = match scenario {
        Scenario::EmptyCavity => vec![],
        Scenario::OneAtom => vec![stationary(0, [0.0; 3])],
        Scenario::TwoAtom => vec![stationary(0, [0.0; 3]), stationary(1, [0.3 * w0, 0.0, lambda / 10.0])],
        Scenario::RingCompensationToy => {
            params.cavity_kind = CavityKind::Ring;
            vec![stationary(0, [0.0; 3])]
        }
    };
    let cfg = scenario_config(&params, samples, seed);
    let config = AtomConfiguration::from_positions(atoms.iter().map(|a| a.position).collect(), &params);

    // The toy moves the atom along the ring axis with Doppler shift
    // kv = 0.916κ and compensates with an equal atomic detuning.
    let (traj_params, traj_atoms) = if scenario == Scenario::RingCompensationToy {
        let shift = 0.916;
        let v = shift / params.geometry().wavenumber();
        let moving = vec![Atom { velocity: [0.0, 0.0, v], ..atoms[0].clone() }];
        (PhysicalParameters { delta_a: shift * params.kappa, ..params.clone() }, moving)
    } else {
        (params.clone(), atoms)
    };
    let run = run_g2_with(&traj_params, &cfg, &AtomSetup::Fixed(traj_atoms))?;
    let est = run.estimate;
    let tau = est.tau_kappa.clone();

    let (reference, analytic) = match scenario {
        Scenario::EmptyCavity => (G2Curve::new(&tau, params.kappa, vec![1.0; tau.len()]), None),
        _ => {
            let cutoff = 3;
            let dense = dense_g2(&config, cutoff, &params, &tau)?;
            (dense, Some(g2_fixed(&config, &params, &tau)))
        }
    };
    let max_rel_dev = rel_dev(&est.g2, &reference.values);
    let analytic_rel_dev = analytic.as_ref().map(|a| rel_dev(&est.g2, &a.values));
    let max_sigma = est
        .g2
        .iter()
        .zip(&reference.values)
        .zip(&est.stderr)
        .map(|((x, y), s)| if *s > 0.0 { (x - y).abs() / s } else if x == y { 0.0 } else { f64::INFINITY })
        .fold(0.0, f64::max);
    let passed = match scenario {
        // the two-quanta coherent state is exact only to O((ℰ/κ)²)
        Scenario::EmptyCavity => max_sigma <= 3.0 || max_rel_dev < 10.0 * WEAK_DRIVE * WEAK_DRIVE,
        _ => max_rel_dev < TOLERANCE,
    };
    Ok(OracleReport { scenario, trajectory: est, reference, analytic, max_rel_dev, analytic_rel_dev, max_sigma, passed })
}
