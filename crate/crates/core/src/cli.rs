//! Command-line front end: `analytic`, `simulate` and `oracle-check`.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analytics::{
    correlation_time, g2_fixed, g2_ideal, g2_mc_average, g2_semiclassical, photon_histogram, sample_configuration,
    tau_grid, Scheme,
};
use crate::beam::BeamState;
use crate::error::{invalid, Error, Result};
use crate::io::{self, parse_entries, Manifest, RunConfig};
use crate::model::{CavityKind, Truncation};
use crate::scenario::{run_scenario, Scenario};
use crate::trajectory::{run_g2, run_semiclassical, streams, Mode, TrajectoryConfig};

#[derive(Debug, Parser)]
#[command(name = "cqed-beam", version, about = "Photon statistics of a cavity driven through a thermal atomic beam")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form and Monte-Carlo stationary-atom g²(τ).
    Analytic(AnalyticArgs),
    /// Quantum-trajectory or beam simulation.
    Simulate(SimulateArgs),
    /// Compare the trajectory engine with an independent reference.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Built-in parameter set (set1, set2).
    #[arg(long, conflicts_with_all = ["config", "manifest"])]
    pub preset: Option<String>,
    /// key=value configuration file.
    #[arg(long, conflicts_with = "manifest")]
    pub config: Option<PathBuf>,
    /// Replay the settings recorded in a run manifest.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Multiply N̄_eff and the sample budget by this factor.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Formula {
    Ideal,
    Fixed,
    McNaive,
    McWeighted,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum)]
    pub formula: Option<Formula>,
    /// Lag span, κ⁻¹.
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub tau_points: Option<usize>,
    /// Configurations in a Monte-Carlo average.
    #[arg(long)]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Task {
    G2,
    Semiclassical,
    SemiclassicalAdiabatic,
    BeamStats,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, value_enum)]
    pub mode: Option<Task>,
    #[arg(long)]
    pub tilt_mrad: Option<f64>,
    #[arg(long)]
    pub truncation: Option<Truncation>,
    #[arg(long)]
    pub cavity: Option<CavityKind>,
    /// Total simulated time, κ⁻¹.
    #[arg(long)]
    pub duration: Option<f64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub trajectories: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub tau_points: Option<usize>,
    /// Uniform factor on every atomic speed.
    #[arg(long)]
    pub speed_scale: Option<f64>,
    /// Atomic detuning Δ_a/κ.
    #[arg(long)]
    pub delta_a_kappa: Option<f64>,
    /// Cavity detuning Δ_c/κ.
    #[arg(long)]
    pub delta_c_kappa: Option<f64>,
    /// Set Δ_a to the mean Doppler shift k·v̄_oven·sinθ.
    #[arg(long)]
    pub compensate: bool,
    /// Cap accepted jumps with the default veto.
    #[arg(long)]
    pub veto: bool,
    /// Histogram bins for semiclassical series.
    #[arg(long)]
    pub bins: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub scenario: Scenario,
    /// Enforced-jump samples.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Analytic(a) => analytic(a),
        Command::Simulate(s) => simulate(s),
        Command::OracleCheck(o) => oracle_check(o),
    }
}

const ANALYTIC_EXTRA: &[&str] = &["command", "formula", "samples"];
const SIMULATE_EXTRA: &[&str] = &["command", "task", "bins"];

fn load(src: &SourceArgs, extra: &[&str]) -> Result<(RunConfig, BTreeMap<String, String>)> {
    if let Some(path) = &src.manifest {
        let m = Manifest::parse(&fs::read_to_string(path)?)?;
        return RunConfig::from_entries(&m.settings(), extra);
    }
    if let Some(path) = &src.config {
        return RunConfig::from_entries(&parse_entries(&fs::read_to_string(path)?)?, extra);
    }
    let name = src.preset.as_deref().unwrap_or("set1");
    Ok((RunConfig::from_preset(name)?, BTreeMap::new()))
}

fn apply_scale(cfg: &mut RunConfig, scale: Option<f64>) -> Result<()> {
    if let Some(f) = scale {
        if !(f > 0.0 && f.is_finite()) {
            return Err(invalid("scale", "must be positive"));
        }
        cfg.params = cfg.params.with_density_scale(f);
        cfg.trajectory.duration *= f;
    }
    Ok(())
}

fn extra_parse<T: std::str::FromStr>(extra: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    extra
        .get(key)
        .map(|v| v.parse().map_err(|_| Error::Config { line: 0, reason: format!("bad value for `{key}`: {v}") }))
        .transpose()
}

fn write_out(dir: &Path, name: &str, bytes: &[u8], manifest: &mut Manifest) -> Result<()> {
    fs::write(dir.join(name), bytes)?;
    manifest.push_output(name, bytes);
    Ok(())
}

fn analytic(a: AnalyticArgs) -> Result<i32> {
    let (mut cfg, extra) = load(&a.source, ANALYTIC_EXTRA)?;
    apply_scale(&mut cfg, a.source.scale)?;
    if let Some(s) = a.source.seed {
        cfg.trajectory.seed = s;
    }
    if let Some(t) = a.tau_max {
        cfg.trajectory.tau_max = t;
    }
    if let Some(n) = a.tau_points {
        cfg.trajectory.tau_points = n;
    }
    cfg.trajectory.validate()?;
    let formula = match (a.formula, extra.get("formula")) {
        (Some(f), _) => f,
        (None, Some(v)) => Formula::from_str(v, false).map_err(|e| invalid("formula", e))?,
        (None, None) => Formula::Ideal,
    };
    let samples = match a.samples {
        Some(n) => n,
        None => extra_parse(&extra, "samples")?.unwrap_or(10_000),
    };
    let p = &cfg.params;
    let tau = tau_grid(cfg.trajectory.tau_max, cfg.trajectory.tau_points);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.trajectory.seed);
    let (curve, n, summary) = match formula {
        Formula::Ideal => {
            let c = g2_ideal(p, &tau);
            let s = format!("g2(0) = {:.6}", c.values[0]);
            (c, 1, s)
        }
        Formula::Fixed => {
            let config = sample_configuration(p, &mut rng);
            let c = g2_fixed(&config, p, &tau);
            let s = format!("{} atoms, C = {:.4}, g2(0) = {:.6}", config.len(), config.c_sum, c.values[0]);
            (c, 1, s)
        }
        Formula::McNaive | Formula::McWeighted => {
            let scheme = if formula == Formula::McNaive { Scheme::Naive } else { Scheme::Weighted };
            let avg = g2_mc_average(p, scheme, samples, &tau, &mut rng)?;
            let s = format!(
                "{} configurations, mean atoms {:.2}, g2(0) = {:.6}, g2(inf) = {:.6}",
                samples, avg.mean_atoms, avg.curve.values[0], avg.limit
            );
            (avg.curve, samples, s)
        }
    };
    fs::create_dir_all(&a.source.out)?;
    let mut manifest = Manifest::new("analytic");
    manifest.push("formula", formula.to_possible_value().expect("named").get_name());
    manifest.push("samples", samples);
    manifest.push_config(&cfg);
    let mut buf = Vec::new();
    io::write_g2_curve(&mut buf, &curve, n)?;
    write_out(&a.source.out, "g2.csv", &buf, &mut manifest)?;
    fs::write(a.source.out.join("manifest.txt"), manifest.render())?;
    println!("{summary}");
    Ok(0)
}

fn simulate(s: SimulateArgs) -> Result<i32> {
    let (mut cfg, extra) = load(&s.source, SIMULATE_EXTRA)?;
    apply_scale(&mut cfg, s.source.scale)?;
    let p = &mut cfg.params;
    if let Some(m) = s.tilt_mrad {
        p.tilt = m * 1e-3;
    }
    if let Some(q) = s.truncation {
        p.truncation = q;
    }
    if let Some(k) = s.cavity {
        p.cavity_kind = k;
    }
    if let Some(f) = s.speed_scale {
        p.speed_scale = f;
    }
    if let Some(d) = s.delta_a_kappa {
        p.delta_a = d * p.kappa;
    }
    if let Some(d) = s.delta_c_kappa {
        p.delta_c = d * p.kappa;
    }
    if s.compensate {
        p.delta_a = p.doppler_compensation();
    }
    p.validate()?;
    let t = &mut cfg.trajectory;
    if s.tilt_mrad.is_some() || s.speed_scale.is_some() || s.source.scale.is_some() {
        // keep the step consistent with the new transit times
        t.dt = t.dt.min(TrajectoryConfig::for_params(&cfg.params).dt);
    }
    if let Some(x) = s.source.seed {
        t.seed = x;
    }
    if let Some(x) = s.duration {
        t.duration = x;
    }
    if let Some(x) = s.workers {
        t.workers = x;
    }
    if let Some(x) = s.trajectories {
        t.trajectories = x;
    }
    if let Some(x) = s.dt {
        t.dt = x;
    }
    if let Some(x) = s.tau_max {
        t.tau_max = x;
        t.sample_spacing = t.sample_spacing.max(x + t.exclusion_window + 1.0);
    }
    if let Some(x) = s.tau_points {
        t.tau_points = x;
    }
    if s.veto {
        t.veto = Some(TrajectoryConfig::default_veto(&cfg.params));
    }
    let task = match (s.mode, extra.get("task")) {
        (Some(m), _) => m,
        (None, Some(v)) => Task::from_str(v, false).map_err(|e| invalid("task", e))?,
        (None, None) => Task::G2,
    };
    let bins = match s.bins {
        Some(b) => b,
        None => extra_parse(&extra, "bins")?.unwrap_or(50),
    };
    cfg.trajectory.mode = match task {
        Task::G2 | Task::BeamStats => Mode::FullQuantum,
        Task::Semiclassical => Mode::Semiclassical,
        Task::SemiclassicalAdiabatic => Mode::SemiclassicalAdiabatic,
    };
    cfg.trajectory.validate()?;

    let out = &s.source.out;
    fs::create_dir_all(out)?;
    let mut manifest = Manifest::new("simulate");
    manifest.push("task", task.to_possible_value().expect("named").get_name());
    manifest.push("bins", bins);
    manifest.push_config(&cfg);
    let (p, t) = (&cfg.params, &cfg.trajectory);
    match task {
        Task::G2 => {
            let run = run_g2(p, t)?;
            let mut buf = Vec::new();
            io::write_g2_estimate(&mut buf, &run.estimate)?;
            write_out(out, "g2.csv", &buf, &mut manifest)?;
            buf.clear();
            io::write_jump_log(&mut buf, &run.jumps)?;
            write_out(out, "jumps.csv", &buf, &mut manifest)?;
            if let Some(state) = &run.final_state {
                buf.clear();
                state.dump_csv(&mut buf)?;
                write_out(out, "state.csv", &buf, &mut manifest)?;
            }
            println!(
                "{} samples, mean atoms {:.1}, g2(0) = {:.4} ± {:.4}",
                run.estimate.samples, run.mean_atoms, run.estimate.g2[0], run.estimate.stderr[0]
            );
        }
        Task::Semiclassical | Task::SemiclassicalAdiabatic => {
            let series = run_semiclassical(p, t)?;
            let mut buf = Vec::new();
            io::write_series(&mut buf, &series)?;
            write_out(out, "series.csv", &buf, &mut manifest)?;
            let hist = photon_histogram(&series.values, bins)?;
            buf.clear();
            io::write_histogram(&mut buf, &hist)?;
            write_out(out, "hist.csv", &buf, &mut manifest)?;
            let tau = tau_grid(t.tau_max, t.tau_points);
            let curve = g2_semiclassical(&series, &tau, p.kappa)?;
            buf.clear();
            io::write_g2_curve(&mut buf, &curve, series.values.len())?;
            write_out(out, "g2.csv", &buf, &mut manifest)?;
            let corr = correlation_time(&series).map(|c| c / p.kappa * 1e9).unwrap_or(f64::NAN);
            println!(
                "{} samples, mean n = {:.4e}, relative variance {:.4}, correlation time {:.1} ns",
                series.values.len(),
                hist.mean,
                hist.relative_variance,
                corr
            );
        }
        Task::BeamStats => {
            let (rng, _) = streams(t.seed, 0);
            let mut beam = BeamState::new(p, rng);
            beam.enable_log();
            if t.prefill {
                beam.prefill();
            }
            let steps = (t.duration / t.dt).round() as usize;
            let stride = ((t.series_interval / t.dt).round() as usize).max(1);
            let mut occ = String::from("t_kappa,atoms\n");
            let (mut sum, mut n) = (0.0, 0usize);
            for k in 1..=steps {
                beam.step(t.dt);
                if k % stride == 0 {
                    occ.push_str(&format!("{},{}\n", beam.time, beam.atoms.len()));
                    sum += beam.atoms.len() as f64;
                    n += 1;
                }
            }
            let mut buf = Vec::new();
            io::write_beam_log(&mut buf, &beam.take_log())?;
            write_out(out, "beam.csv", &buf, &mut manifest)?;
            write_out(out, "occupancy.csv", occ.as_bytes(), &mut manifest)?;
            let mean = if n > 0 { sum / n as f64 } else { 0.0 };
            println!("mean atoms {:.3}, Little's-law prediction {:.3}", mean, beam.expected_occupation());
        }
    }
    fs::write(out.join("manifest.txt"), manifest.render())?;
    Ok(0)
}

fn oracle_check(o: OracleArgs) -> Result<i32> {
    let report = run_scenario(o.scenario, o.samples, o.seed)?;
    fs::create_dir_all(&o.out)?;
    let mut manifest = Manifest::new("oracle-check");
    manifest.push("scenario", o.scenario);
    manifest.push("samples", o.samples);
    manifest.push("seed", o.seed);
    let mut buf = Vec::new();
    io::write_g2_estimate(&mut buf, &report.trajectory)?;
    write_out(&o.out, "trajectory.csv", &buf, &mut manifest)?;
    buf.clear();
    io::write_g2_curve(&mut buf, &report.reference, 1)?;
    write_out(&o.out, "reference.csv", &buf, &mut manifest)?;
    if let Some(a) = &report.analytic {
        buf.clear();
        io::write_g2_curve(&mut buf, a, 1)?;
        write_out(&o.out, "analytic.csv", &buf, &mut manifest)?;
    }
    manifest.push("max_rel_dev", report.max_rel_dev);
    manifest.push("passed", report.passed);
    fs::write(o.out.join("manifest.txt"), manifest.render())?;
    println!(
        "{}: max relative deviation {:.3e} ({} sigma) -> {}",
        o.scenario,
        report.max_rel_dev,
        if report.max_sigma.is_finite() { format!("{:.1}", report.max_sigma) } else { "n/a".into() },
        if report.passed { "pass" } else { "FAIL" }
    );
    Ok(if report.passed { 0 } else { 1 })
}
