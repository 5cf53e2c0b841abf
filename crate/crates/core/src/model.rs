//! Physical parameter sets, derived constants, mode geometry and the
//! position-dependent dipole coupling.
//!
//! Everything here is in SI units. The numeric engine works in units where
//! the cavity field halfwidth is one; [`PhysicalParameters::scaled`] does the
//! conversion.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::constants::{mass_for_wavelength, BOLTZMANN};
use crate::error::{invalid, Error, Result};

/// Standing-wave (Fabry-Perot) or travelling-wave (ring) cavity mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CavityKind {
    StandingWave,
    Ring,
}

impl fmt::Display for CavityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CavityKind::StandingWave => "standing-wave",
            CavityKind::Ring => "ring",
        })
    }
}

impl FromStr for CavityKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "standing-wave" | "standing" => Ok(CavityKind::StandingWave),
            "ring" => Ok(CavityKind::Ring),
            other => Err(format!("unknown cavity kind `{other}`")),
        }
    }
}

/// Maximum number of excitation quanta kept in the state expansion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Truncation {
    OneQuantum = 1,
    TwoQuanta = 2,
    ThreeQuanta = 3,
}

impl Truncation {
    pub fn level(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Truncation::OneQuantum => "one-quantum",
            Truncation::TwoQuanta => "two-quanta",
            Truncation::ThreeQuanta => "three-quanta",
        })
    }
}

impl FromStr for Truncation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "one-quantum" | "1" => Ok(Truncation::OneQuantum),
            "two-quanta" | "2" => Ok(Truncation::TwoQuanta),
            "three-quanta" | "3" => Ok(Truncation::ThreeQuanta),
            other => Err(format!("unknown truncation `{other}`")),
        }
    }
}

/// Experiment constants plus the knobs the simulation exposes.
///
/// Rates are angular (rad/s), lengths in metres.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalParameters {
    /// Cavity field halfwidth κ.
    pub kappa: f64,
    /// Atomic linewidth γ (spontaneous emission rate).
    pub gamma: f64,
    /// Peak dipole coupling constant.
    pub g_max: f64,
    /// Mode waist.
    pub w0: f64,
    /// Wavelength.
    pub lambda: f64,
    /// Effective atom number N̄_eff.
    pub n_eff_bar: f64,
    /// Oven temperature, K.
    pub temperature: f64,
    /// Atomic mass, kg.
    pub mass: f64,
    /// Driving field amplitude ℰ.
    pub drive: f64,
    /// Beam tilt away from perpendicular to the cavity axis, rad.
    pub tilt: f64,
    /// Interaction-volume cutoff F.
    pub cutoff: f64,
    pub cavity_kind: CavityKind,
    /// Cavity detuning from the drive.
    pub delta_c: f64,
    /// Atomic detuning from the drive.
    pub delta_a: f64,
    pub truncation: Truncation,
    /// Uniform factor applied to every atomic speed (and to the source rate,
    /// so the beam density is unchanged). 1 for a thermal beam.
    pub speed_scale: f64,
}

impl PhysicalParameters {
    /// Parameter set 1: caesium at 852 nm.
    pub fn set1() -> Self {
        let kappa = 2.0 * PI * 0.9e6;
        let lambda = 852e-9;
        PhysicalParameters {
            kappa,
            gamma: 5.56 * kappa,
            g_max: 3.56 * kappa,
            w0: 50e-6,
            lambda,
            n_eff_bar: 18.0,
            temperature: 473.0,
            mass: mass_for_wavelength(lambda).expect("caesium"),
            drive: 2.5e-2 * kappa,
            tilt: 0.0,
            cutoff: 0.01,
            cavity_kind: CavityKind::StandingWave,
            delta_c: 0.0,
            delta_a: 0.0,
            truncation: Truncation::TwoQuanta,
            speed_scale: 1.0,
        }
    }

    /// Parameter set 2: rubidium at 780 nm.
    pub fn set2() -> Self {
        let kappa = 2.0 * PI * 7.9e6;
        let lambda = 780e-9;
        PhysicalParameters {
            kappa,
            gamma: 0.77 * kappa,
            g_max: 1.47 * kappa,
            w0: 21.5e-6,
            lambda,
            n_eff_bar: 13.0,
            temperature: 430.0,
            mass: mass_for_wavelength(lambda).expect("rubidium"),
            drive: 2.5e-2 * kappa,
            tilt: 0.0,
            cutoff: 0.01,
            cavity_kind: CavityKind::StandingWave,
            delta_c: 0.0,
            delta_a: 0.0,
            truncation: Truncation::TwoQuanta,
            speed_scale: 1.0,
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "set1" => Ok(Self::set1()),
            "set2" => Ok(Self::set2()),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("g_max", self.g_max),
            ("w0", self.w0),
            ("lambda", self.lambda),
            ("n_eff_bar", self.n_eff_bar),
            ("T", self.temperature),
            ("M", self.mass),
            ("speed_scale", self.speed_scale),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(invalid(name, format!("must be positive, got {value}")));
            }
        }
        if !(self.cutoff > 0.0 && self.cutoff < 1.0) {
            return Err(invalid("F", format!("must lie in (0, 1), got {}", self.cutoff)));
        }
        if !(self.drive.is_finite() && self.drive >= 0.0) {
            return Err(invalid("drive", format!("must be non-negative, got {}", self.drive)));
        }
        if !(self.tilt.abs() < PI / 2.0) {
            return Err(invalid("tilt", format!("|tilt| must be below pi/2, got {}", self.tilt)));
        }
        if !self.delta_c.is_finite() || !self.delta_a.is_finite() {
            return Err(invalid("delta", "detunings must be finite"));
        }
        Ok(())
    }

    pub fn geometry(&self) -> ModeGeometry {
        ModeGeometry::new(self.w0, self.lambda, self.cutoff, self.cavity_kind)
    }

    /// Rates in units of κ, as used by the numeric engine.
    pub fn scaled(&self) -> ScaledRates {
        ScaledRates {
            gamma: self.gamma / self.kappa,
            g_max: self.g_max / self.kappa,
            drive: self.drive / self.kappa,
            delta_c: self.delta_c / self.kappa,
            delta_a: self.delta_a / self.kappa,
        }
    }

    /// Copy with N̄_eff multiplied by `factor`; every derived rate follows.
    pub fn with_density_scale(&self, factor: f64) -> Self {
        PhysicalParameters { n_eff_bar: self.n_eff_bar * factor, ..self.clone() }
    }

    /// Mean-Doppler-shift compensating detuning k·v̄_oven·sinθ (rad/s).
    pub fn doppler_compensation(&self) -> f64 {
        let (v_oven, _) = mean_speeds(self.temperature, self.mass);
        2.0 * PI / self.lambda * v_oven * self.speed_scale * self.tilt.sin()
    }
}

/// Coupling, drive and detunings divided by κ. Time is measured in κ⁻¹.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledRates {
    pub gamma: f64,
    pub g_max: f64,
    pub drive: f64,
    pub delta_c: f64,
    pub delta_a: f64,
}

impl ScaledRates {
    /// Single-atom cooperativity g²_max/κγ.
    pub fn c1(&self) -> f64 {
        self.g_max * self.g_max / self.gamma
    }

    /// Vacuum Rabi oscillation decay rate ½(κ+γ/2), in units of κ.
    pub fn ringdown_rate(&self) -> f64 {
        0.5 * (1.0 + self.gamma / 2.0)
    }
}

/// Quantities derived from a parameter set.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedQuantities {
    /// ξ = 2κ/γ.
    pub xi: f64,
    /// C₁ = g²_max/κγ.
    pub c1: f64,
    /// 2C = 2N̄_eff C₁.
    pub two_c: f64,
    /// 2C₁ξ/(1+ξ), the size of the antibunching effect.
    pub antibunch_scale: f64,
    /// |Ω| in rad/s; see `overdamped` for the sign of Ω².
    pub omega_rabi: f64,
    /// Ω² < 0: the vacuum Rabi oscillation is overdamped.
    pub overdamped: bool,
    /// 2(κ+γ/2)⁻¹, s.
    pub decay_time: f64,
    pub v_oven: f64,
    pub v_beam: f64,
    /// Source rate R, 1/s.
    pub rate_r: f64,
    /// w0/v̄_oven, s.
    pub transit_time: f64,
    /// λ/(4 v̄_oven sinθ), s. Absent for an aligned beam.
    pub quarter_wave_time: Option<f64>,
}

pub fn derive(params: &PhysicalParameters) -> DerivedQuantities {
    let PhysicalParameters { kappa, gamma, g_max, .. } = *params;
    let xi = 2.0 * kappa / gamma;
    let c1 = g_max * g_max / (kappa * gamma);
    let two_c = 2.0 * params.n_eff_bar * c1;
    let omega_sq = params.n_eff_bar * g_max * g_max - 0.25 * (kappa - gamma / 2.0).powi(2);
    let (v_oven, v_beam) = mean_speeds(params.temperature, params.mass);
    let (v_oven, v_beam) = (v_oven * params.speed_scale, v_beam * params.speed_scale);
    let quarter_wave_time = if params.tilt == 0.0 {
        None
    } else {
        Some(params.lambda / (4.0 * v_oven * params.tilt.sin().abs()))
    };
    DerivedQuantities {
        xi,
        c1,
        two_c,
        antibunch_scale: 2.0 * c1 * xi / (1.0 + xi),
        omega_rabi: omega_sq.abs().sqrt(),
        overdamped: omega_sq < 0.0,
        decay_time: 2.0 / (kappa + gamma / 2.0),
        v_oven,
        v_beam,
        rate_r: source_rate(params.n_eff_bar, v_beam, params.w0),
        transit_time: params.w0 / v_oven,
        quarter_wave_time,
    }
}

/// Mean speed inside the oven and mean speed in the effusive beam, m/s.
pub fn mean_speeds(temperature: f64, mass: f64) -> (f64, f64) {
    let v_beam = (9.0 * PI * BOLTZMANN * temperature / (8.0 * mass)).sqrt();
    (8.0 / (3.0 * PI) * v_beam, v_beam)
}

/// Average escape rate R = 64 N̄_eff v̄_beam / 3π² w0.
pub fn source_rate(n_eff_bar: f64, v_beam: f64, w0: f64) -> f64 {
    64.0 * n_eff_bar * v_beam / (3.0 * PI * PI * w0)
}

/// Atomic density ϱ = 4 N̄_eff / π w0² l for a beam of width `l`.
pub fn beam_density(n_eff_bar: f64, w0: f64, l: f64) -> f64 {
    4.0 * n_eff_bar / (PI * w0 * w0 * l)
}

/// N̄^F_eff / N̄_eff for interaction-volume cutoff F.
pub fn effective_fraction(cutoff: f64) -> f64 {
    let f = cutoff.clamp(0.0, 1.0);
    2.0 / PI * ((1.0 - 2.0 * f * f) * f.acos() + f * (1.0 - f * f).sqrt())
}

/// TEM₀₀ mode geometry and the square interaction slab around it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeGeometry {
    pub w0: f64,
    pub lambda: f64,
    /// w0·√|ln F|: half side of the interaction slab.
    pub half_span: f64,
    pub kind: CavityKind,
}

impl ModeGeometry {
    pub fn new(w0: f64, lambda: f64, cutoff: f64, kind: CavityKind) -> Self {
        ModeGeometry { w0, lambda, half_span: w0 * cutoff.ln().abs().sqrt(), kind }
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.lambda
    }
}

/// Dipole coupling at `position` (x, y transverse; z along the cavity axis).
pub fn coupling(position: [f64; 3], geom: &ModeGeometry, g_max: f64) -> Complex64 {
    let [x, y, z] = position;
    let envelope = (-(x * x + y * y) / (geom.w0 * geom.w0)).exp();
    let kz = geom.wavenumber() * z;
    match geom.kind {
        CavityKind::StandingWave => Complex64::new(g_max * kz.cos() * envelope, 0.0),
        CavityKind::Ring => Complex64::from_polar(g_max / 2f64.sqrt() * envelope, kz),
    }
}
