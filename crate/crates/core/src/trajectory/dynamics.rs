//! Non-Hermitian drift of the truncated state and its RK4 integrator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::state::Layout;

/// Constant coefficients of the non-Hermitian Hamiltonian, in units of κ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drift {
    /// Driving amplitude ℰ/κ.
    pub drive: f64,
    /// Photon damping plus detuning: 1 + iΔ_c/κ.
    pub photon: Complex64,
    /// Atomic damping plus detuning: γ/2κ + iΔ_a/κ.
    pub atom: Complex64,
}

impl Drift {
    pub fn new(drive: f64, gamma: f64, delta_c: f64, delta_a: f64) -> Self {
        Drift {
            drive,
            photon: Complex64::new(1.0, delta_c),
            atom: Complex64::new(gamma / 2.0, delta_a),
        }
    }
}

/// d|ψ⟩/dt for the state `amps` with per-slot couplings `g` (units of κ).
///
/// Implements ℰ(a† − a) + Σ_j (g_j a†σ_j₋ − g_j* a σ_j₊) − (κ + iΔ_c) a†a
/// − (γ/2 + iΔ_a) Σ_j σ_j₊σ_j₋ restricted to the truncated basis.
pub fn derivative(
    layout: &Layout,
    amps: &[Complex64],
    g: &[Complex64],
    drift: &Drift,
    out: &mut [Complex64],
) -> Result<()> {
    let n_atoms = layout.atoms;
    if g.len() != n_atoms {
        return Err(Error::MissingCoupling { expected: n_atoms, got: g.len() });
    }
    debug_assert_eq!(amps.len(), layout.len());
    debug_assert_eq!(out.len(), layout.len());
    let q = layout.quanta();

    // damping, detuning and drive act within each atom subset
    for (n, m) in layout.sectors() {
        let off = layout.offset(n, m);
        let len = layout.sector_len(m);
        let diag = -(drift.photon * n as f64 + drift.atom * m as f64);
        let up = (layout.has_sector(n + 1, m)).then(|| layout.offset(n + 1, m));
        let down = (n > 0).then(|| layout.offset(n - 1, m));
        let sq_n = (n as f64).sqrt() * drift.drive;
        let sq_n1 = ((n + 1) as f64).sqrt() * drift.drive;
        for i in 0..len {
            let mut d = diag * amps[off + i];
            if let Some(lo) = down {
                d += amps[lo + i] * sq_n;
            }
            if let Some(hi) = up {
                d -= amps[hi + i] * sq_n1;
            }
            out[off + i] = d;
        }
    }

    // atom-field exchange between A = (p, m+1) and B = (p+1, m)
    for m in 0..q.min(3) {
        for p in 0..q - m {
            if !layout.has_sector(p, m + 1) {
                continue;
            }
            let a = layout.offset(p, m + 1);
            let b = layout.offset(p + 1, m);
            let s = ((p + 1) as f64).sqrt();
            exchange(n_atoms, m + 1, a, b, s, amps, g, out);
        }
    }
    Ok(())
}

/// For every subset T of size `size` in sector A and each j in T:
/// B[T∖j] += s·g_j·A[T] and A[T] −= s·g_j*·B[T∖j].
#[allow(clippy::too_many_arguments)]
#[inline]
fn exchange(
    n: usize,
    size: usize,
    a: usize,
    b: usize,
    s: f64,
    amps: &[Complex64],
    g: &[Complex64],
    out: &mut [Complex64],
) {
    match size {
        1 => {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                acc += g[j] * amps[a + j];
                out[a + j] -= g[j].conj() * amps[b] * s;
            }
            out[b] += acc * s;
        }
        2 => {
            let len = n * n.saturating_sub(1) / 2;
            let (lo, hi) = out.split_at_mut(a);
            let out_b = &mut lo[b..b + n];
            let out_a = &mut hi[..len];
            let amp_a = &amps[a..a + len];
            let amp_b = &amps[b..b + n];
            let g = &g[..n];
            let mut row = 0;
            for k in 0..n {
                let gk = g[k] * s;
                let gkc = gk.conj();
                let bk = amp_b[k];
                let ta = &amp_a[row..row + k];
                let oa = &mut out_a[row..row + k];
                let mut acc_k = Complex64::new(0.0, 0.0);
                for j in 0..k {
                    let t = ta[j];
                    let gj = g[j] * s;
                    // remove j -> {k}; remove k -> {j}
                    acc_k += gj * t;
                    out_b[j] += gk * t;
                    oa[j] -= gj.conj() * bk + gkc * amp_b[j];
                }
                out_b[k] += acc_k;
                row += k;
            }
        }
        3 => {
            let mut idx = a;
            for l in 0..n {
                let gl = g[l] * s;
                for k in 0..l {
                    let gk = g[k] * s;
                    let kl = b + l * (l - 1) / 2 + k;
                    for j in 0..k {
                        let gj = g[j] * s;
                        let jl = b + l * (l - 1) / 2 + j;
                        let jk = b + k * (k - 1) / 2 + j;
                        let t = amps[idx];
                        out[kl] += gj * t;
                        out[jl] += gk * t;
                        out[jk] += gl * t;
                        out[idx] -= gj.conj() * amps[kl] + gk.conj() * amps[jl] + gl.conj() * amps[jk];
                        idx += 1;
                    }
                }
            }
        }
        _ => unreachable!(),
    }
}

/// Reusable buffers for classical fourth-order Runge-Kutta steps.
#[derive(Clone, Debug, Default)]
pub struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
}

impl Rk4 {
    pub fn new() -> Self {
        Self::default()
    }

    /// Advance `amps` by `dt` with couplings held fixed over the step.
    pub fn step(
        &mut self,
        layout: &Layout,
        amps: &mut [Complex64],
        g: &[Complex64],
        drift: &Drift,
        dt: f64,
    ) -> Result<()> {
        let len = amps.len();
        for buf in [&mut self.k1, &mut self.k2, &mut self.k3, &mut self.k4, &mut self.tmp] {
            buf.resize(len, Complex64::new(0.0, 0.0));
        }
        derivative(layout, amps, g, drift, &mut self.k1)?;
        axpy(&mut self.tmp, amps, &self.k1, 0.5 * dt);
        derivative(layout, &self.tmp, g, drift, &mut self.k2)?;
        axpy(&mut self.tmp, amps, &self.k2, 0.5 * dt);
        derivative(layout, &self.tmp, g, drift, &mut self.k3)?;
        axpy(&mut self.tmp, amps, &self.k3, dt);
        derivative(layout, &self.tmp, g, drift, &mut self.k4)?;
        let h6 = dt / 6.0;
        for i in 0..len {
            amps[i] += (self.k1[i] + (self.k2[i] + self.k3[i]) * 2.0 + self.k4[i]) * h6;
        }
        Ok(())
    }
}

#[inline]
fn axpy(out: &mut [Complex64], y: &[Complex64], k: &[Complex64], h: f64) {
    for ((o, y), k) in out.iter_mut().zip(y).zip(k) {
        *o = y + k * h;
    }
}
