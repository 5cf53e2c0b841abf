//! Configuration files, CSV writers and run manifests.
//!
//! Configuration is flat `key=value` text; `#` starts a comment. Keys are
//! the field names of [`PhysicalParameters`] and [`TrajectoryConfig`] (SI
//! units for physical quantities, κ⁻¹ for times), plus `preset`, which is
//! applied before any other key regardless of its position.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use sha2::{Digest, Sha256};

use crate::analytics::{G2Curve, Histogram};
use crate::beam::{BeamEvent, BeamEventKind};
use crate::error::{Error, Result};
use crate::model::PhysicalParameters;
use crate::trajectory::{G2Estimate, JumpEvent, JumpKind, SemiclassicalSeries, TrajectoryConfig, Veto};

pub const TOOL_NAME: &str = "cqed-beam";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One `key=value` line.
#[derive(Clone, Debug, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config { line: i + 1, reason: format!("expected key=value, got `{line}`") });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config { line: i + 1, reason: "empty key".into() });
        }
        if out.iter().any(|e: &Entry| e.key == key) {
            return Err(Error::Config { line: i + 1, reason: format!("duplicate key `{key}`") });
        }
        out.push(Entry { line: i + 1, key: key.to_string(), value: value.trim().to_string() });
    }
    Ok(out)
}

/// Physical and numerical settings of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub params: PhysicalParameters,
    pub trajectory: TrajectoryConfig,
}

const PHYSICAL_KEYS: &[&str] = &[
    "kappa", "gamma", "g_max", "w0", "lambda", "n_eff_bar", "temperature", "mass", "drive", "tilt", "cutoff",
    "cavity_kind", "delta_c", "delta_a", "truncation", "speed_scale",
];

const TRAJECTORY_KEYS: &[&str] = &[
    "dt", "sample_spacing", "exclusion_window", "warmup", "duration", "tau_max", "tau_points", "veto_max_jumps",
    "veto_window", "seed", "mode", "trajectories", "workers", "min_samples", "max_atoms", "prefill",
    "series_interval",
];

fn parse<T: std::str::FromStr>(e: &Entry) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    e.value
        .parse()
        .map_err(|err| Error::Config { line: e.line, reason: format!("`{}`: {err}", e.key) })
}

impl RunConfig {
    pub fn from_preset(name: &str) -> Result<Self> {
        let params = PhysicalParameters::preset(name)?;
        let trajectory = TrajectoryConfig::for_params(&params);
        Ok(RunConfig { preset: Some(name.to_string()), params, trajectory })
    }

    /// Build from entries. Keys listed in `extra` are not interpreted and
    /// are returned; any other unknown key is an error.
    pub fn from_entries(entries: &[Entry], extra: &[&str]) -> Result<(Self, BTreeMap<String, String>)> {
        let preset = entries.iter().find(|e| e.key == "preset");
        let mut params = match preset {
            Some(e) => PhysicalParameters::preset(&e.value)?,
            None => PhysicalParameters::set1(),
        };
        let mut rest = BTreeMap::new();
        for e in entries {
            match e.key.as_str() {
                "preset" => {}
                "kappa" => params.kappa = parse(e)?,
                "gamma" => params.gamma = parse(e)?,
                "g_max" => params.g_max = parse(e)?,
                "w0" => params.w0 = parse(e)?,
                "lambda" => params.lambda = parse(e)?,
                "n_eff_bar" => params.n_eff_bar = parse(e)?,
                "temperature" => params.temperature = parse(e)?,
                "mass" => params.mass = parse(e)?,
                "drive" => params.drive = parse(e)?,
                "tilt" => params.tilt = parse(e)?,
                "cutoff" => params.cutoff = parse(e)?,
                "cavity_kind" => params.cavity_kind = parse(e)?,
                "delta_c" => params.delta_c = parse(e)?,
                "delta_a" => params.delta_a = parse(e)?,
                "truncation" => params.truncation = parse(e)?,
                "speed_scale" => params.speed_scale = parse(e)?,
                k if TRAJECTORY_KEYS.contains(&k) => {}
                k if extra.contains(&k) => {
                    rest.insert(k.to_string(), e.value.clone());
                }
                k => return Err(Error::Config { line: e.line, reason: format!("unknown key `{k}`") }),
            }
        }
        params.validate()?;
        let mut t = TrajectoryConfig::for_params(&params);
        let (mut veto_max, mut veto_window) = (None, None);
        for e in entries {
            match e.key.as_str() {
                "dt" => t.dt = parse(e)?,
                "sample_spacing" => t.sample_spacing = parse(e)?,
                "exclusion_window" => t.exclusion_window = parse(e)?,
                "warmup" => t.warmup = parse(e)?,
                "duration" => t.duration = parse(e)?,
                "tau_max" => t.tau_max = parse(e)?,
                "tau_points" => t.tau_points = parse(e)?,
                "veto_max_jumps" => veto_max = Some(parse::<usize>(e)?),
                "veto_window" => veto_window = Some(parse::<f64>(e)?),
                "seed" => t.seed = parse(e)?,
                "mode" => t.mode = parse(e)?,
                "trajectories" => t.trajectories = parse(e)?,
                "workers" => t.workers = parse(e)?,
                "min_samples" => t.min_samples = parse(e)?,
                "max_atoms" => t.max_atoms = parse(e)?,
                "prefill" => t.prefill = parse(e)?,
                "series_interval" => t.series_interval = parse(e)?,
                _ => {}
            }
        }
        t.veto = match (veto_max, veto_window) {
            (None, None) => None,
            (Some(0), _) => None,
            (m, w) => {
                let d = TrajectoryConfig::default_veto(&params);
                Some(Veto { max_jumps: m.unwrap_or(d.max_jumps), window: w.unwrap_or(d.window) })
            }
        };
        t.validate()?;
        let preset = preset.map(|e| e.value.clone());
        Ok((RunConfig { preset, params, trajectory: t }, rest))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(Self::from_entries(&parse_entries(text)?, &[])?.0)
    }

    /// Every setting as `key=value` lines. Floats use the shortest exact
    /// representation, so parsing the output gives back identical values.
    pub fn to_entries(&self) -> Vec<(String, String)> {
        let p = &self.params;
        let t = &self.trajectory;
        let mut v: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, val: String| v.push((k.to_string(), val));
        if let Some(name) = &self.preset {
            put("preset", name.clone());
        }
        for (k, x) in [
            ("kappa", p.kappa),
            ("gamma", p.gamma),
            ("g_max", p.g_max),
            ("w0", p.w0),
            ("lambda", p.lambda),
            ("n_eff_bar", p.n_eff_bar),
            ("temperature", p.temperature),
            ("mass", p.mass),
            ("drive", p.drive),
            ("tilt", p.tilt),
            ("cutoff", p.cutoff),
            ("delta_c", p.delta_c),
            ("delta_a", p.delta_a),
            ("speed_scale", p.speed_scale),
        ] {
            put(k, format!("{x:?}"));
        }
        put("cavity_kind", p.cavity_kind.to_string());
        put("truncation", p.truncation.to_string());
        for (k, x) in [
            ("dt", t.dt),
            ("sample_spacing", t.sample_spacing),
            ("exclusion_window", t.exclusion_window),
            ("warmup", t.warmup),
            ("duration", t.duration),
            ("tau_max", t.tau_max),
            ("series_interval", t.series_interval),
        ] {
            put(k, format!("{x:?}"));
        }
        put("tau_points", t.tau_points.to_string());
        match t.veto {
            Some(veto) => {
                put("veto_max_jumps", veto.max_jumps.to_string());
                put("veto_window", format!("{:?}", veto.window));
            }
            None => put("veto_max_jumps", "0".into()),
        }
        put("seed", t.seed.to_string());
        put("mode", t.mode.to_string());
        put("trajectories", t.trajectories.to_string());
        put("workers", t.workers.to_string());
        put("min_samples", t.min_samples.to_string());
        put("max_atoms", t.max_atoms.to_string());
        put("prefill", t.prefill.to_string());
        v
    }
}

pub fn is_config_key(key: &str) -> bool {
    key == "preset" || PHYSICAL_KEYS.contains(&key) || TRAJECTORY_KEYS.contains(&key)
}

/// Run record: tool, version, every input setting, hashes of the outputs
/// and a hash over all of it.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<(String, String)>,
}

pub const MANIFEST_META: &[&str] = &["tool", "version", "content_hash"];

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Manifest::default();
        m.push("tool", TOOL_NAME);
        m.push("version", TOOL_VERSION);
        m.push("command", command);
        m
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn push_config(&mut self, config: &RunConfig) {
        self.entries.extend(config.to_entries());
    }

    /// Record the SHA-256 of an output file under `output.<name>`.
    pub fn push_output(&mut self, name: &str, bytes: &[u8]) {
        self.push(&format!("output.{name}"), hex_digest(bytes));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn body(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            if k != "content_hash" {
                let _ = writeln!(s, "{k}={v}");
            }
        }
        s
    }

    pub fn content_hash(&self) -> String {
        hex_digest(self.body().as_bytes())
    }

    pub fn render(&self) -> String {
        let mut s = self.body();
        let _ = writeln!(s, "content_hash={}", self.content_hash());
        s
    }

    /// Parse a rendered manifest and check its content hash.
    pub fn parse(text: &str) -> Result<Self> {
        let entries = parse_entries(text)?;
        let m = Manifest { entries: entries.iter().map(|e| (e.key.clone(), e.value.clone())).collect() };
        match m.get("content_hash") {
            Some(h) if h == m.content_hash() => Ok(m),
            Some(_) => Err(Error::Config { line: 0, reason: "manifest content hash does not match".into() }),
            None => Err(Error::Config { line: 0, reason: "manifest has no content hash".into() }),
        }
    }

    /// Entries that are run settings (everything except metadata and
    /// output hashes), in file order.
    pub fn settings(&self) -> Vec<Entry> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, (k, _))| !MANIFEST_META.contains(&k.as_str()) && !k.starts_with("output."))
            .map(|(i, (k, v))| Entry { line: i + 1, key: k.clone(), value: v.clone() })
            .collect()
    }
}

pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_g2_estimate<W: Write>(mut out: W, est: &G2Estimate) -> std::io::Result<()> {
    writeln!(out, "tau_kappa,tau_ns,g2,stderr,n")?;
    for i in 0..est.g2.len() {
        writeln!(out, "{},{},{},{},{}", est.tau_kappa[i], est.tau_ns[i], est.g2[i], est.stderr[i], est.samples)?;
    }
    Ok(())
}

/// Analytic curves share the g2.csv schema, with zero error and `n` the
/// number of configurations behind the curve.
pub fn write_g2_curve<W: Write>(mut out: W, curve: &G2Curve, n: usize) -> std::io::Result<()> {
    writeln!(out, "tau_kappa,tau_ns,g2,stderr,n")?;
    for i in 0..curve.values.len() {
        writeln!(out, "{},{},{},0,{}", curve.tau_kappa[i], curve.tau_ns[i], curve.values[i], n)?;
    }
    Ok(())
}

pub fn write_series<W: Write>(mut out: W, series: &SemiclassicalSeries) -> std::io::Result<()> {
    writeln!(out, "t_kappa,photon_number")?;
    for (t, v) in series.times().zip(&series.values) {
        writeln!(out, "{t},{v}")?;
    }
    Ok(())
}

pub fn write_histogram<W: Write>(mut out: W, h: &Histogram) -> std::io::Result<()> {
    writeln!(out, "bin_lo,bin_hi,prob")?;
    for i in 0..h.prob.len() {
        writeln!(out, "{},{},{}", h.bin_lo[i], h.bin_hi[i], h.prob[i])?;
    }
    Ok(())
}

pub fn write_beam_log<W: Write>(mut out: W, events: &[BeamEvent]) -> std::io::Result<()> {
    writeln!(out, "time,event,id,x,y,z,v,θ")?;
    for e in events {
        let kind = match e.kind {
            BeamEventKind::Spawn => "spawn",
            BeamEventKind::Exit => "exit",
        };
        let [x, y, z] = e.position;
        writeln!(out, "{},{kind},{},{x},{y},{z},{},{}", e.time, e.id, e.speed, e.tilt)?;
    }
    Ok(())
}

pub fn write_jump_log<W: Write>(mut out: W, jumps: &[(usize, JumpEvent)]) -> std::io::Result<()> {
    writeln!(out, "trajectory,time,kind,atom,vetoed")?;
    for (traj, j) in jumps {
        let (kind, atom) = match j.kind {
            JumpKind::Forwards => ("forwards", String::new()),
            JumpKind::Side(id) => ("side", id.to_string()),
            JumpKind::Enforced => ("enforced", String::new()),
        };
        writeln!(out, "{traj},{},{kind},{atom},{}", j.time, j.vetoed)?;
    }
    Ok(())
}
