//! Closed-form weak-field results for stationary atoms, Monte-Carlo
//! configuration averages and estimators on photon-number series.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{invalid, Error, Result};
use crate::model::{coupling, CavityKind, PhysicalParameters};
use crate::trajectory::SemiclassicalSeries;

/// A fixed set of atoms and the couplings they see.
#[derive(Clone, Debug, PartialEq)]
pub struct AtomConfiguration {
    pub positions: Vec<[f64; 3]>,
    /// Couplings in units of κ.
    pub couplings: Vec<Complex64>,
    /// Σ_j C₁ⱼ with C₁ⱼ = |g_j|²/κγ.
    pub c_sum: f64,
    /// Σ_j |g_j|²/g²_max.
    pub n_eff: f64,
}

impl AtomConfiguration {
    pub fn from_positions(positions: Vec<[f64; 3]>, params: &PhysicalParameters) -> Self {
        let r = params.scaled();
        let geom = params.geometry();
        let couplings: Vec<Complex64> = positions.iter().map(|&p| coupling(p, &geom, r.g_max)).collect();
        Self::from_couplings(positions, couplings, params)
    }

    /// Configuration with explicit couplings (units of κ).
    pub fn from_couplings(positions: Vec<[f64; 3]>, couplings: Vec<Complex64>, params: &PhysicalParameters) -> Self {
        let r = params.scaled();
        let sq: f64 = couplings.iter().map(|g| g.norm_sqr()).sum();
        AtomConfiguration { positions, couplings, c_sum: sq / r.gamma, n_eff: sq / (r.g_max * r.g_max) }
    }

    /// `n` atoms on the cavity axis at antinodes, z = jλ/2.
    pub fn antinodes(n: usize, params: &PhysicalParameters) -> Self {
        let positions = (0..n).map(|j| [0.0, 0.0, j as f64 * params.lambda / 2.0]).collect();
        Self::from_positions(positions, params)
    }

    pub fn len(&self) -> usize {
        self.couplings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.couplings.is_empty()
    }

    /// Weak-field intracavity photon number (ℰ/κ)²/(1+2C)².
    pub fn photon_number(&self, params: &PhysicalParameters) -> f64 {
        let e = params.scaled().drive;
        e * e / (1.0 + 2.0 * self.c_sum).powi(2)
    }
}

/// g²(τ) on a lag grid, with the lag in κ⁻¹ and in ns.
#[derive(Clone, Debug, PartialEq)]
pub struct G2Curve {
    pub tau_kappa: Vec<f64>,
    pub tau_ns: Vec<f64>,
    pub values: Vec<f64>,
}

impl G2Curve {
    pub fn new(tau_kappa: &[f64], kappa: f64, values: Vec<f64>) -> Self {
        G2Curve {
            tau_kappa: tau_kappa.to_vec(),
            tau_ns: tau_kappa.iter().map(|t| t / kappa * 1e9).collect(),
            values,
        }
    }
}

/// `points` equally spaced lags on [0, tau_max].
pub fn tau_grid(tau_max: f64, points: usize) -> Vec<f64> {
    assert!(points >= 2, "a lag grid needs two points");
    (0..points).map(|i| tau_max * i as f64 / (points - 1) as f64).collect()
}

/// e^{−rτ}[cos Ωτ + (r/Ω) sin Ωτ] with Ω² = `omega_sq`, continued to
/// cosh/sinh when Ω² < 0.
fn ringing(tau: f64, rate: f64, omega_sq: f64) -> f64 {
    let damp = (-rate * tau).exp();
    if omega_sq > 0.0 {
        let w = omega_sq.sqrt();
        damp * ((w * tau).cos() + rate / w * (w * tau).sin())
    } else if omega_sq < 0.0 {
        let w = (-omega_sq).sqrt();
        damp * ((w * tau).cosh() + rate / w * (w * tau).sinh())
    } else {
        damp * (1.0 + rate * tau)
    }
}

fn curve(params: &PhysicalParameters, tau: &[f64], amplitude: f64, n_eff: f64) -> G2Curve {
    let r = params.scaled();
    let rate = r.ringdown_rate();
    let omega_sq = n_eff * r.g_max * r.g_max - 0.25 * (1.0 - r.gamma / 2.0).powi(2);
    let values = tau
        .iter()
        .map(|&t| {
            let v = 1.0 - amplitude * ringing(t, rate, omega_sq);
            v * v
        })
        .collect();
    G2Curve::new(tau, params.kappa, values)
}

/// Ideal coupling: N̄_eff atoms all at g_max.
pub fn g2_ideal(params: &PhysicalParameters, tau: &[f64]) -> G2Curve {
    let r = params.scaled();
    let xi = 2.0 / r.gamma;
    let c1 = r.c1();
    let two_c = 2.0 * params.n_eff_bar * c1;
    let scale = 2.0 * c1 * xi / (1.0 + xi);
    let amplitude = scale * two_c / (1.0 + two_c - scale);
    curve(params, tau, amplitude, params.n_eff_bar)
}

/// Oscillation amplitude for a fixed configuration.
pub fn fixed_amplitude(config: &AtomConfiguration, params: &PhysicalParameters) -> f64 {
    if config.is_empty() {
        return 0.0;
    }
    let r = params.scaled();
    let xi = 2.0 / r.gamma;
    let c = config.c_sum;
    let s: f64 = config
        .couplings
        .iter()
        .map(|g| {
            let c1j = g.norm_sqr() / r.gamma;
            2.0 * c1j / (1.0 + xi * (1.0 + c) - 2.0 * xi * c1j)
        })
        .sum();
    ((1.0 + xi * (1.0 + c)) * s - 2.0 * c) / (1.0 + (1.0 + xi / 2.0) * s)
}

/// Stationary atoms at arbitrary positions.
pub fn g2_fixed(config: &AtomConfiguration, params: &PhysicalParameters, tau: &[f64]) -> G2Curve {
    curve(params, tau, fixed_amplitude(config, params), config.n_eff)
}

/// Draw atoms in the cylindrical interaction volume: Poisson count at the
/// beam density, uniform transverse positions within w0√|ln F|, uniform
/// axial position over a wavelength, keeping atoms with |g| ≥ F·|g|_peak.
pub fn sample_configuration<R: Rng + ?Sized>(params: &PhysicalParameters, rng: &mut R) -> AtomConfiguration {
    let geom = params.geometry();
    let h = geom.half_span;
    let mean = 4.0 * params.n_eff_bar * (h / params.w0).powi(2);
    let n = if mean > 0.0 { Poisson::new(mean).expect("finite mean").sample(rng) as usize } else { 0 };
    let peak = match params.cavity_kind {
        CavityKind::StandingWave => 1.0,
        CavityKind::Ring => std::f64::consts::FRAC_1_SQRT_2,
    };
    let mut positions = Vec::with_capacity(n);
    for _ in 0..n {
        let rho = h * rng.random::<f64>().sqrt();
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let z = rng.random_range(0.0..params.lambda);
        let p = [rho * phi.cos(), rho * phi.sin(), z];
        if coupling(p, &geom, 1.0).norm() >= params.cutoff * peak {
            positions.push(p);
        }
    }
    AtomConfiguration::from_positions(positions, params)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Plain average of the fixed-configuration curves.
    Naive,
    /// Average weighted by the squared photon number of each configuration.
    Weighted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct McAverage {
    pub curve: G2Curve,
    /// τ→∞ limit of the averaged curve.
    pub limit: f64,
    pub mean_photon_number: f64,
    pub mean_atoms: f64,
    pub samples: usize,
}

/// Monte-Carlo average over stationary configurations.
pub fn g2_mc_average<R: Rng + ?Sized>(
    params: &PhysicalParameters,
    scheme: Scheme,
    n_samples: usize,
    tau: &[f64],
    rng: &mut R,
) -> Result<McAverage> {
    if n_samples == 0 {
        return Err(invalid("samples", "need at least one configuration"));
    }
    let mut num = vec![0.0; tau.len()];
    let (mut sum_n, mut sum_nn, mut atoms) = (0.0, 0.0, 0.0);
    for _ in 0..n_samples {
        let config = sample_configuration(params, rng);
        let g2 = g2_fixed(&config, params, tau);
        let n = config.photon_number(params);
        let w = match scheme {
            Scheme::Naive => 1.0,
            Scheme::Weighted => n * n,
        };
        for (acc, v) in num.iter_mut().zip(&g2.values) {
            *acc += w * v;
        }
        sum_n += n;
        sum_nn += n * n;
        atoms += config.len() as f64;
    }
    let k = n_samples as f64;
    let mean_n = sum_n / k;
    let (norm, limit) = match scheme {
        Scheme::Naive => (k, 1.0),
        Scheme::Weighted => (k * mean_n * mean_n, sum_nn / k / (mean_n * mean_n)),
    };
    let values = num.iter().map(|v| v / norm).collect();
    Ok(McAverage {
        curve: G2Curve::new(tau, params.kappa, values),
        limit,
        mean_photon_number: mean_n,
        mean_atoms: atoms / k,
        samples: n_samples,
    })
}

fn lag_samples(series: &SemiclassicalSeries, tau: f64) -> usize {
    (tau / series.interval).round() as usize
}

/// ⟨n(t)n(t+τ)⟩/⟨n⟩² from a sampled series; τ is rounded to whole samples.
pub fn g2_semiclassical(series: &SemiclassicalSeries, tau: &[f64], kappa: f64) -> Result<G2Curve> {
    let x = &series.values;
    if x.is_empty() {
        return Err(Error::EmptySeries);
    }
    let max_lag = tau.iter().map(|&t| lag_samples(series, t)).max().unwrap_or(0);
    if max_lag >= x.len() {
        return Err(Error::SeriesTooShort { len: x.len(), lag: max_lag });
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let values = tau
        .iter()
        .map(|&t| {
            let lag = lag_samples(series, t);
            let m = x.len() - lag;
            let c: f64 = (0..m).map(|i| x[i] * x[i + lag]).sum::<f64>() / m as f64;
            c / (mean * mean)
        })
        .collect();
    Ok(G2Curve::new(tau, kappa, values))
}

/// First lag (κ⁻¹, linearly interpolated) where the normalized
/// autocovariance of the series drops below 1/e.
pub fn correlation_time(series: &SemiclassicalSeries) -> Result<f64> {
    let x = &series.values;
    if x.len() < 2 {
        return Err(Error::EmptySeries);
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let dev: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let cov = |lag: usize| -> f64 {
        let m = dev.len() - lag;
        (0..m).map(|i| dev[i] * dev[i + lag]).sum::<f64>() / m as f64
    };
    let c0 = cov(0);
    if c0 <= 0.0 {
        return Err(invalid("series", "has no fluctuations"));
    }
    let target = (-1.0f64).exp();
    let mut prev = 1.0;
    for lag in 1..dev.len() / 2 {
        let c = cov(lag) / c0;
        if c < target {
            let frac = (prev - target) / (prev - c);
            return Ok((lag as f64 - 1.0 + frac) * series.interval);
        }
        prev = c;
    }
    Err(Error::SeriesTooShort { len: x.len(), lag: x.len() / 2 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub bin_lo: Vec<f64>,
    pub bin_hi: Vec<f64>,
    pub prob: Vec<f64>,
    pub mean: f64,
    /// Variance divided by the squared mean.
    pub relative_variance: f64,
}

/// Normalized histogram over the range of the series.
pub fn photon_histogram(series: &[f64], bins: usize) -> Result<Histogram> {
    if bins < 2 {
        return Err(invalid("bins", "need at least two bins"));
    }
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    let lo = series.iter().copied().fold(f64::INFINITY, f64::min);
    let mut hi = series.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo {
        hi = lo + lo.abs().max(f64::MIN_POSITIVE) * 1e-9;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in series {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let k = series.len() as f64;
    let mean = series.iter().sum::<f64>() / k;
    let var = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
    Ok(Histogram {
        bin_lo: (0..bins).map(|i| lo + i as f64 * width).collect(),
        bin_hi: (0..bins).map(|i| lo + (i + 1) as f64 * width).collect(),
        prob: counts.iter().map(|&c| c as f64 / k).collect(),
        mean,
        relative_variance: if mean != 0.0 { var / (mean * mean) } else { 0.0 },
    })
}

/// Photon scattering rates (1/s) for a configuration and the drive limit
/// on the intracavity photon number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringRates {
    pub forwards: f64,
    pub side: f64,
    /// side / forwards = 2C.
    pub ratio: f64,
    /// (1+γ/2κ)/(8 N̄_eff g²_max/κγ).
    pub weak_field_bound: f64,
}

pub fn scattering_diagnostics(config: &AtomConfiguration, params: &PhysicalParameters) -> ScatteringRates {
    let r = params.scaled();
    let forwards = 2.0 * params.kappa * config.photon_number(params);
    let ratio = 2.0 * config.c_sum;
    ScatteringRates {
        forwards,
        side: ratio * forwards,
        ratio,
        weak_field_bound: (1.0 + r.gamma / 2.0) / (8.0 * params.n_eff_bar * r.c1()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ideal_zero_lag_matches_closed_form() {
        let p = PhysicalParameters::set1();
        let r = p.scaled();
        let two_c = 2.0 * 18.0 * r.c1();
        let s = 2.0 * r.c1() * (2.0 / r.gamma) / (1.0 + 2.0 / r.gamma);
        let want = (1.0 - s * two_c / (1.0 + two_c - s)).powi(2);
        let got = g2_ideal(&p, &[0.0]).values[0];
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn empty_configuration_is_flat() {
        let p = PhysicalParameters::set1();
        let c = AtomConfiguration::from_positions(vec![], &p);
        assert!(g2_fixed(&c, &p, &tau_grid(5.0, 11)).values.iter().all(|&v| v == 1.0));
        let s = scattering_diagnostics(&c, &p);
        assert_eq!(s.ratio, 0.0);
        assert!((s.forwards - 2.0 * p.kappa * 2.5e-2f64.powi(2)).abs() / s.forwards < 1e-12);
    }

    #[test]
    fn overdamped_curve_is_finite() {
        let p = PhysicalParameters { g_max: 0.1 * PhysicalParameters::set1().kappa, n_eff_bar: 1.0, ..PhysicalParameters::set1() };
        let c = g2_ideal(&p, &tau_grid(10.0, 101));
        assert!(c.values.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!((c.values[100] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn single_weighted_sample_equals_fixed_curve() {
        let p = PhysicalParameters::set2().with_density_scale(0.2);
        let tau = tau_grid(4.0, 9);
        let avg = g2_mc_average(&p, Scheme::Weighted, 1, &tau, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let config = sample_configuration(&p, &mut ChaCha8Rng::seed_from_u64(3));
        let fixed = g2_fixed(&config, &p, &tau);
        for (a, b) in avg.curve.values.iter().zip(&fixed.values) {
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
        assert_eq!(avg.limit, 1.0);
    }

    #[test]
    fn semiclassical_of_constant_series_is_one() {
        let s = SemiclassicalSeries { interval: 0.1, start: 0.0, values: vec![2.0; 100], atom_counts: vec![] };
        let c = g2_semiclassical(&s, &[0.0, 0.5, 1.0], 1.0).unwrap();
        assert!(c.values.iter().all(|&v| (v - 1.0).abs() < 1e-15));
        assert!(matches!(g2_semiclassical(&s, &[20.0], 1.0), Err(Error::SeriesTooShort { .. })));
    }

    #[test]
    fn histogram_of_constant_series_has_one_bin() {
        let h = photon_histogram(&[0.3; 50], 10).unwrap();
        assert_eq!(h.prob.iter().filter(|&&p| p > 0.0).count(), 1);
        assert!(h.relative_variance < 1e-20);
        assert!(photon_histogram(&[], 10).is_err());
        assert!(photon_histogram(&[1.0], 1).is_err());
    }

    #[test]
    fn histogram_moments() {
        let h = photon_histogram(&[1.0, 3.0], 4).unwrap();
        assert_eq!(h.mean, 2.0);
        assert!((h.relative_variance - 0.25).abs() < 1e-15);
        assert_eq!(h.prob, vec![0.5, 0.0, 0.0, 0.5]);
    }
}
