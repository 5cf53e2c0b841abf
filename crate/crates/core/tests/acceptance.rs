//! End-to-end acceptance gates. Each test prints one `criterion N: PASS|FAIL`
//! line (bypassing the harness capture) before asserting.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::Command;

use cqed_beam::analytics::{
    g2_fixed, g2_ideal, g2_mc_average, sample_configuration, scattering_diagnostics, tau_grid, AtomConfiguration,
    Scheme,
};
use cqed_beam::beam::{sample_speed, BeamState};
use cqed_beam::model::{derive, mean_speeds};
use cqed_beam::scenario::{run_scenario, Scenario};
use cqed_beam::state::TruncatedState;
use cqed_beam::trajectory::{
    run_g2, run_semiclassical, Drift, G2Accumulator, G2Estimate, Mode, Rk4, Trajectory, TrajectoryConfig,
};
use cqed_beam::{CavityKind, PhysicalParameters, Truncation};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// Pinned tolerances.
const DERIVED_TOL: f64 = 0.02;
const SPEED_TOL: f64 = 0.005;
const LIMIT_TOL: f64 = 1e-6;
const ANTINODE_TOL: f64 = 1e-12;
const KS_MAX: f64 = 0.002;
const LITTLE_TOL: f64 = 0.01;
const ORACLE_TOL: f64 = 0.05;
const ORACLE_SAMPLES: usize = 10_000;
const NORM_TOL: f64 = 1e-6;
const QUASI_STATIC_TOL: f64 = 0.05;
const TILT_SIGMAS: f64 = 3.0;

fn report(n: u32, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("criterion {n}: {verdict}  {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} failed: {detail}");
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[test]
fn criterion_01_derived_constants() {
    let cases = [
        ("set1", PhysicalParameters::set1(), 4.6, 1.2, 94e-9, 274.5, 323.4, 1.2e-2),
        ("set2", PhysicalParameters::set2(), 5.6, 4.0, 29e-9, 326.4, 384.5, 4.7e-3),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, p, two_c1, scale, decay, v_oven, v_beam, bound) in cases {
        let d = derive(&p);
        let (vo, vb) = mean_speeds(p.temperature, p.mass);
        let empty = AtomConfiguration::from_positions(vec![], &p);
        let w = scattering_diagnostics(&empty, &p).weak_field_bound;
        let checks = [
            ("2C1", 2.0 * d.c1, two_c1, DERIVED_TOL),
            ("2C1xi/(1+xi)", d.antibunch_scale, scale, DERIVED_TOL),
            ("decay", d.decay_time, decay, DERIVED_TOL),
            ("v_oven", vo, v_oven, SPEED_TOL),
            ("v_beam", vb, v_beam, SPEED_TOL),
            ("weak-field bound", w, bound, DERIVED_TOL),
        ];
        for (label, got, want, tol) in checks {
            let ok = rel(got, want) <= tol;
            pass &= ok;
            if !ok {
                detail.push(format!("{name} {label} = {got:.4e} vs {want:.4e} (rel {:.3})", rel(got, want)));
            }
        }
    }
    let summary = if detail.is_empty() { "all derived constants within tolerance".to_string() } else { detail.join("; ") };
    report(1, pass, &summary);
}

#[test]
fn criterion_02_analytic_limits() {
    let tau = tau_grid(20.0, 2001);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut min, mut late, mut antinode) = (f64::INFINITY, 0.0f64, 0.0f64);
    for base in [PhysicalParameters::set1(), PhysicalParameters::set2()] {
        for n in [1.0, 3.0, base.n_eff_bar, 40.0] {
            let p = PhysicalParameters { n_eff_bar: n, ..base.clone() };
            let ideal = g2_ideal(&p, &tau);
            min = ideal.values.iter().copied().fold(min, f64::min);
            late = late.max((g2_ideal(&p, &[50.0]).values[0] - 1.0).abs());
            let nodes = AtomConfiguration::antinodes(n as usize, &p);
            let fixed = g2_fixed(&nodes, &p, &tau);
            for (a, b) in fixed.values.iter().zip(&ideal.values) {
                antinode = antinode.max((a - b).abs());
            }
            for _ in 0..200 {
                let c = sample_configuration(&p, &mut rng);
                min = g2_fixed(&c, &p, &tau).values.iter().copied().fold(min, f64::min);
                late = late.max((g2_fixed(&c, &p, &[50.0]).values[0] - 1.0).abs());
            }
        }
    }
    let pass = min >= 0.0 && late < LIMIT_TOL && antinode <= ANTINODE_TOL;
    report(2, pass, &format!("min g2 {min:.3e}, max |g2(50)-1| {late:.3e}, antinode deviation {antinode:.3e}"));
}

#[test]
fn criterion_03_averaging_inequality() {
    let tau = [0.0, 100.0];
    let mut pass = true;
    let mut worst = f64::INFINITY;
    for (k, base) in [PhysicalParameters::set1(), PhysicalParameters::set2()].into_iter().enumerate() {
        for n in [3.0, base.n_eff_bar] {
            let p = PhysicalParameters { n_eff_bar: n, ..base.clone() };
            let mut rng = ChaCha8Rng::seed_from_u64(30 + k as u64);
            let naive = g2_mc_average(&p, Scheme::Naive, 10_000, &tau, &mut rng).unwrap();
            let weighted = g2_mc_average(&p, Scheme::Weighted, 10_000, &tau, &mut rng).unwrap();
            pass &= weighted.limit >= 1.0 && weighted.limit >= naive.limit;
            worst = worst.min(weighted.limit - naive.limit);
        }
    }
    report(3, pass, &format!("smallest weighted - naive limit {worst:.4}"));
}

#[test]
fn criterion_04_beam_statistics() {
    let v_oven = 274.5;
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let mut v: Vec<f64> = (0..1_000_000).map(|_| sample_speed(&mut rng, v_oven)).collect();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let ks = v
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let u = 2.0 * x / (std::f64::consts::PI.sqrt() * v_oven);
            let f = 1.0 - (1.0 + u * u) * (-u * u).exp();
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);

    let p = PhysicalParameters::set1();
    let mut beam = BeamState::new(&p, ChaCha8Rng::seed_from_u64(41));
    beam.prefill();
    let steps = 400_000;
    let mut sum = 0.0;
    let mut z_fixed = true;
    for _ in 0..steps {
        let before: HashMap<u64, f64> = beam.atoms.iter().map(|a| (a.id, a.position[2])).collect();
        beam.step(0.5);
        for a in &beam.atoms {
            if let Some(&z) = before.get(&a.id) {
                z_fixed &= a.position[2] == z;
            }
        }
        sum += beam.atoms.len() as f64;
    }
    let mean = sum / steps as f64;
    let expected = beam.expected_occupation();
    let pass = ks < KS_MAX && rel(mean, expected) < LITTLE_TOL && z_fixed;
    report(
        4,
        pass,
        &format!("KS {ks:.5}, occupation {mean:.2} vs {expected:.2} ({:.4}), z constant: {z_fixed}", rel(mean, expected)),
    );
}

#[test]
fn criterion_05_oracle_equivalence() {
    let mut pass = true;
    let mut detail = Vec::new();
    for s in [Scenario::OneAtom, Scenario::TwoAtom] {
        let r = run_scenario(s, ORACLE_SAMPLES, 5).unwrap();
        let analytic = r.analytic_rel_dev.unwrap_or(f64::INFINITY);
        pass &= r.trajectory.samples >= ORACLE_SAMPLES && r.max_rel_dev < ORACLE_TOL && analytic < ORACLE_TOL;
        detail.push(format!(
            "{s}: {} samples, vs dense {:.4}, vs closed form {:.4}",
            r.trajectory.samples, r.max_rel_dev, analytic
        ));
    }
    report(5, pass, &detail.join("; "));
}

#[test]
fn criterion_06_norm_decay_law() {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let mut worst = 0.0f64;
    for trial in 0..300 {
        let truncation = [Truncation::OneQuantum, Truncation::TwoQuanta, Truncation::ThreeQuanta][trial % 3];
        let atoms = rng.random_range(0..8);
        let mut s = TruncatedState::vacuum(truncation);
        for id in 0..atoms {
            s.add_atom(id).unwrap();
        }
        for c in s.amplitudes_mut() {
            *c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
        s.renormalize().unwrap();
        let g: Vec<Complex64> =
            (0..atoms).map(|_| Complex64::new(rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0))).collect();
        let gamma = rng.random_range(0.1..8.0);
        let drift = Drift::new(rng.random_range(0.0..0.3), gamma, rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let e = s.expectations().unwrap();
        let rate = 2.0 * e.photon_number + gamma * e.total_excitation();
        let h = 1e-4;
        let log_norm = |dt: f64| {
            let mut amps = s.amplitudes().to_vec();
            Rk4::new().step(&s.layout(), &mut amps, &g, &drift, dt).unwrap();
            amps.iter().map(|c| c.norm_sqr()).sum::<f64>().ln()
        };
        let decrement = -(log_norm(h) - log_norm(-h)) / 2.0;
        worst = worst.max(rel(decrement, rate * h));
    }
    report(6, worst < NORM_TOL, &format!("max relative deviation {worst:.2e} over 300 random states"));
}

/// Enforced-jump cycles on a slow beam; alongside each trajectory sample the
/// stationary-atom prediction for the configuration present at the jump.
fn quasi_static_shard(p: &PhysicalParameters, cfg: &TrajectoryConfig, index: u64, cycles: usize) -> (G2Accumulator, G2Accumulator) {
    let (dtau, per, dt) = cfg.grid();
    let tau: Vec<f64> = (0..cfg.tau_points).map(|i| i as f64 * dtau).collect();
    let spacing = (cfg.sample_spacing / dt).round() as usize;
    let exclusion = (cfg.exclusion_window / dt).ceil() as usize;
    let mut traj = Trajectory::with_beam(p, cfg, index, p.truncation).unwrap();
    for _ in 0..(cfg.warmup / dt).round() as usize {
        traj.step(dt).unwrap();
    }
    let mut sim = G2Accumulator::new(tau.clone());
    let mut stat = G2Accumulator::new(tau.clone());
    let mut x = vec![0.0; tau.len()];
    for _ in 0..cycles {
        let config = AtomConfiguration::from_couplings(vec![], traj.couplings_at(0.0), p);
        let n_ss = config.photon_number(p);
        let curve = g2_fixed(&config, p, &tau);
        let xs: Vec<f64> = curve.values.iter().map(|g| n_ss * n_ss * g).collect();
        stat.push(&xs, n_ss);

        let n0 = traj.photon_number();
        traj.enforce_jump().unwrap();
        x.fill(0.0);
        x[0] = n0 * traj.photon_number();
        let (mut d, mut k) = (0.0, 0);
        for s in 1..=spacing {
            traj.step(dt).unwrap();
            if s % per == 0 && s / per < tau.len() {
                x[s / per] = n0 * traj.photon_number();
            }
            if s % per == 0 && s >= exclusion {
                d += traj.photon_number();
                k += 1;
            }
        }
        sim.push(&x, d / k as f64);
    }
    (sim, stat)
}

#[test]
fn criterion_07_quasi_static_consistency() {
    let base = PhysicalParameters::set2();
    let p = PhysicalParameters { n_eff_bar: 3.0, speed_scale: 0.01, tilt: 0.0, ..base };
    let cfg = TrajectoryConfig {
        tau_max: 4.0,
        tau_points: 21,
        exclusion_window: 6.0,
        sample_spacing: 11.0,
        warmup: 10.0,
        seed: 7,
        ..TrajectoryConfig::for_params(&p)
    };
    // Each trajectory starts from a fresh stationary beam, so the number of
    // independent configurations equals the number of trajectories.
    let (trajectories, cycles) = (16_000u64, 1usize);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers()).build().unwrap();
    let shards: Vec<(G2Accumulator, G2Accumulator)> = pool.install(|| {
        use rayon::prelude::*;
        (0..trajectories).into_par_iter().map(|i| quasi_static_shard(&p, &cfg, i, cycles)).collect()
    });
    let (dtau, _, _) = cfg.grid();
    let tau: Vec<f64> = (0..cfg.tau_points).map(|i| i as f64 * dtau).collect();
    let mut sim = G2Accumulator::new(tau.clone());
    let mut stat = G2Accumulator::new(tau.clone());
    for (a, b) in &shards {
        sim.merge(a);
        stat.merge(b);
    }
    let sim: G2Estimate = sim.finalize(p.kappa);
    let stat: G2Estimate = stat.finalize(p.kappa);
    let worst = sim.g2.iter().zip(&stat.g2).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);

    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let independent = g2_mc_average(&p, Scheme::Weighted, 200_000, &tau, &mut rng).unwrap();
    let spread = sim.g2.iter().zip(&independent.curve.values).map(|(a, b)| rel(*a, *b)).fold(0.0, f64::max);
    report(
        7,
        spread < QUASI_STATIC_TOL && worst < QUASI_STATIC_TOL,
        &format!(
            "{} samples: g2(0) {:.4} vs weighted stationary average {:.4}, max deviation {spread:.4}; \
             same-configuration average g2(0) {:.4}, max deviation {worst:.4}; \
             control-variate g2(0) {:.4}",
            sim.samples,
            sim.g2[0],
            independent.curve.values[0],
            stat.g2[0],
            sim.g2[0] - stat.g2[0] + independent.curve.values[0]
        ),
    );
}

fn g2_zero(p: &PhysicalParameters, samples: usize, seed: u64) -> (f64, f64) {
    let recovery = 2.0 / (1.0 + p.scaled().gamma / 2.0);
    let exclusion = 6.0 * recovery;
    let spacing = exclusion + 1.0;
    let trajectories = 8;
    let cfg = TrajectoryConfig {
        tau_max: 0.5,
        tau_points: 2,
        exclusion_window: exclusion,
        sample_spacing: spacing,
        warmup: 10.0,
        duration: spacing * samples as f64,
        trajectories,
        workers: workers(),
        seed,
        ..TrajectoryConfig::for_params(p)
    };
    let run = run_g2(p, &cfg).unwrap();
    (run.estimate.g2[0], run.estimate.stderr[0])
}

const TILT_SAMPLES: usize = 1000;

#[test]
fn criterion_08_tilt_degradation() {
    let base = PhysicalParameters::set1();
    let p = PhysicalParameters { n_eff_bar: 5.0, ..base };
    let tilts = [0.0, 5.0, 10.0, 17.0];
    let points: Vec<(f64, f64)> = tilts
        .iter()
        .map(|&t| g2_zero(&PhysicalParameters { tilt: t * 1e-3, ..p.clone() }, TILT_SAMPLES, 80))
        .collect();
    let mut pass = true;
    for w in points.windows(2) {
        let ((a, sa), (b, sb)) = (w[0], w[1]);
        pass &= (b - 1.0).abs() < (a - 1.0).abs();
        pass &= (a - b).abs() >= TILT_SIGMAS * (sa * sa + sb * sb).sqrt();
    }
    let listing: Vec<String> =
        tilts.iter().zip(&points).map(|(t, (g, s))| format!("{t} mrad {g:.3}±{s:.3}")).collect();
    report(8, pass, &listing.join(", "));
}

#[test]
fn criterion_09_ring_compensation() {
    let base = PhysicalParameters::set2();
    let p = PhysicalParameters { n_eff_bar: 3.0, ..base };
    let tilt = 17.3e-3;
    let detuning = 0.916 * p.kappa;
    let run = |kind: CavityKind, tilt: f64, delta_a: f64, seed: u64| {
        g2_zero(&PhysicalParameters { cavity_kind: kind, tilt, delta_a, ..p.clone() }, TILT_SAMPLES, seed)
    };
    let ring_aligned = run(CavityKind::Ring, 0.0, 0.0, 90);
    let ring_tilted = run(CavityKind::Ring, tilt, 0.0, 91);
    let ring_comp = run(CavityKind::Ring, tilt, detuning, 92);
    let sw_aligned = run(CavityKind::StandingWave, 0.0, 0.0, 93);
    let sw_tilted = run(CavityKind::StandingWave, tilt, 0.0, 94);
    let sw_comp = run(CavityKind::StandingWave, tilt, detuning, 95);

    let ring_ok = (ring_comp.0 - ring_aligned.0).abs() < (ring_tilted.0 - ring_aligned.0).abs();
    let sw_ok = (sw_comp.0 - sw_aligned.0).abs() >= (sw_tilted.0 - sw_aligned.0).abs();
    let f = |(g, s): (f64, f64)| format!("{g:.3}±{s:.3}");
    report(
        9,
        ring_ok && sw_ok,
        &format!(
            "ring: aligned {}, tilted {}, compensated {}; standing wave: aligned {}, tilted {}, detuned {}",
            f(ring_aligned),
            f(ring_tilted),
            f(ring_comp),
            f(sw_aligned),
            f(sw_tilted),
            f(sw_comp)
        ),
    );
}

fn files_equal(a: &Path, b: &Path, names: &[&str]) -> bool {
    names.iter().all(|n| fs::read(a.join(n)).ok().is_some_and(|x| Some(x) == fs::read(b.join(n)).ok()))
}

#[test]
fn criterion_10_determinism() {
    let p = PhysicalParameters::set2().with_density_scale(0.2);
    let cfg = TrajectoryConfig {
        tau_max: 2.0,
        tau_points: 11,
        duration: 200.0,
        exclusion_window: 6.0,
        sample_spacing: 10.0,
        seed: 100,
        ..TrajectoryConfig::for_params(&p)
    };
    let a = run_g2(&p, &cfg).unwrap();
    let b = run_g2(&p, &cfg).unwrap();
    let same_lib = a.estimate == b.estimate && a.jumps == b.jumps && a.final_state == b.final_state;
    let sc_cfg = TrajectoryConfig { mode: Mode::Semiclassical, duration: 100.0, ..cfg.clone() };
    let same_series = run_semiclassical(&p, &sc_cfg).unwrap().values == run_semiclassical(&p, &sc_cfg).unwrap().values;

    let dir = tempfile::tempdir().unwrap();
    let (one, two, three) = (dir.path().join("one"), dir.path().join("two"), dir.path().join("three"));
    let exe = env!("CARGO_BIN_EXE_cqed-beam");
    let args = ["simulate", "--preset", "set2", "--scale", "0.2", "--duration", "150", "--tau-max", "2", "--tau-points", "11", "--seed", "9"];
    let ok = |c: &mut Command| c.status().map(|s| s.success()).unwrap_or(false);
    let mut ran = ok(Command::new(exe).args(args).arg("--out").arg(&one));
    ran &= ok(Command::new(exe).args(args).arg("--out").arg(&two));
    ran &= ok(Command::new(exe).args(["simulate", "--manifest"]).arg(one.join("manifest.txt")).arg("--out").arg(&three));
    let outputs = ["g2.csv", "jumps.csv", "state.csv", "manifest.txt"];
    let same_cli = ran && files_equal(&one, &two, &outputs);
    let replay = ran && files_equal(&one, &three, &outputs);
    report(
        10,
        same_lib && same_series && same_cli && replay,
        &format!("library rerun identical: {same_lib}, series identical: {same_series}, cli rerun identical: {same_cli}, manifest replay identical: {replay}"),
    );
}
