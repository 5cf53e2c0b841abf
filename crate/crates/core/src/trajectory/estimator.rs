//! Ratio-of-averages estimator for g²(τ) from enforced-jump cycles.

/// Running sums over enforced-jump cycles. Each cycle k contributes the
/// numerator x_k(τ) = n(t_k)·n(t_k+τ) on the τ grid and the mean d_k of its
/// photon-number samples taken outside the post-jump exclusion window.
///
/// Only sums are stored, so `merge` is associative and commutative up to
/// floating-point rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct G2Accumulator {
    /// Lag grid, κ⁻¹.
    pub tau: Vec<f64>,
    sum_x: Vec<f64>,
    sum_xx: Vec<f64>,
    sum_xd: Vec<f64>,
    sum_d: f64,
    sum_dd: f64,
    samples: usize,
}

/// g²(τ) with delta-method standard errors.
#[derive(Clone, Debug, PartialEq)]
pub struct G2Estimate {
    pub tau_kappa: Vec<f64>,
    pub tau_ns: Vec<f64>,
    pub g2: Vec<f64>,
    pub stderr: Vec<f64>,
    pub samples: usize,
}

impl G2Accumulator {
    pub fn new(tau: Vec<f64>) -> Self {
        let n = tau.len();
        G2Accumulator {
            tau,
            sum_x: vec![0.0; n],
            sum_xx: vec![0.0; n],
            sum_xd: vec![0.0; n],
            sum_d: 0.0,
            sum_dd: 0.0,
            samples: 0,
        }
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Add one cycle.
    pub fn push(&mut self, x: &[f64], d: f64) {
        assert_eq!(x.len(), self.tau.len(), "numerator must cover the tau grid");
        for i in 0..x.len() {
            self.sum_x[i] += x[i];
            self.sum_xx[i] += x[i] * x[i];
            self.sum_xd[i] += x[i] * d;
        }
        self.sum_d += d;
        self.sum_dd += d * d;
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &G2Accumulator) {
        assert_eq!(self.tau, other.tau, "accumulators must share the tau grid");
        for i in 0..self.tau.len() {
            self.sum_x[i] += other.sum_x[i];
            self.sum_xx[i] += other.sum_xx[i];
            self.sum_xd[i] += other.sum_xd[i];
        }
        self.sum_d += other.sum_d;
        self.sum_dd += other.sum_dd;
        self.samples += other.samples;
    }

    /// g²(τ) = x̄(τ)/d̄², with var(g²)/g⁴ ≈ var x̄/x̄² + 4 var d̄/d̄² − 4 cov/(x̄d̄).
    /// `kappa` (rad/s) converts the lag axis to nanoseconds.
    pub fn finalize(&self, kappa: f64) -> G2Estimate {
        let k = self.samples as f64;
        let d = self.sum_d / k;
        let var_d = sample_var(self.sum_dd, self.sum_d, self.samples);
        let mut g2 = Vec::with_capacity(self.tau.len());
        let mut stderr = Vec::with_capacity(self.tau.len());
        for i in 0..self.tau.len() {
            let x = self.sum_x[i] / k;
            let g = x / (d * d);
            let var_x = sample_var(self.sum_xx[i], self.sum_x[i], self.samples);
            let cov = if self.samples > 1 {
                (self.sum_xd[i] - self.sum_x[i] * self.sum_d / k) / (k - 1.0)
            } else {
                0.0
            };
            let rel = if x != 0.0 {
                (var_x / (x * x) + 4.0 * var_d / (d * d) - 4.0 * cov / (x * d)) / k
            } else {
                var_x / (d * d * d * d) / k
            };
            g2.push(g);
            stderr.push(if x != 0.0 { g.abs() * rel.max(0.0).sqrt() } else { rel.max(0.0).sqrt() });
        }
        G2Estimate {
            tau_kappa: self.tau.clone(),
            tau_ns: self.tau.iter().map(|t| t / kappa * 1e9).collect(),
            g2,
            stderr,
            samples: self.samples,
        }
    }
}

fn sample_var(sum_sq: f64, sum: f64, n: usize) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let k = n as f64;
    ((sum_sq - sum * sum / k) / (k - 1.0)).max(0.0)
}
