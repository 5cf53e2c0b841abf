//! Brute-force reference: the master equation for a few fixed atoms,
//! integrated on dense matrices over a Fock space with a small cutoff.
//!
//! Deliberately shares nothing with the trajectory kernels.

use num_complex::Complex64;

use crate::analytics::{AtomConfiguration, G2Curve};
use crate::error::{Error, Result};
use crate::model::PhysicalParameters;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Largest supported Hilbert-space dimension.
pub const MAX_DIM: usize = 64;
const STEP: f64 = 0.005;
const MAX_TIME: f64 = 5000.0;

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![ZERO; dim * dim] }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.dim + j]
    }

    fn add(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.dim + j] += v;
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Sparse operator used only for the collapse channels: (row, col, value).
type Triplets = Vec<(usize, usize, Complex64)>;

/// Master-equation generator for a fixed configuration.
#[derive(Clone, Debug)]
pub struct Liouvillian {
    dim: usize,
    cutoff: usize,
    atoms: usize,
    /// −iH − ½ΣC†C.
    m: Matrix,
    collapse: Vec<Triplets>,
}

impl Liouvillian {
    pub fn new(config: &AtomConfiguration, fock_cutoff: usize, params: &PhysicalParameters) -> Result<Self> {
        let atoms = config.len();
        if atoms > 3 {
            return Err(Error::Oracle(format!("at most 3 atoms are supported, got {atoms}")));
        }
        if fock_cutoff == 0 || fock_cutoff > 4 {
            return Err(Error::Oracle(format!("Fock cutoff must lie in 1..=4, got {fock_cutoff}")));
        }
        let dim = (fock_cutoff + 1) << atoms;
        if dim > MAX_DIM {
            return Err(Error::Oracle(format!("dimension {dim} exceeds {MAX_DIM}")));
        }
        let r = params.scaled();
        let g = &config.couplings;
        let states = 1usize << atoms;
        let idx = |n: usize, b: usize| n * states + b;
        let mut m = Matrix::zeros(dim);
        let mut collapse: Vec<Triplets> = vec![Vec::new(); atoms + 1];
        for n in 0..=fock_cutoff {
            for b in 0..states {
                let col = idx(n, b);
                let excited = b.count_ones() as f64;
                let diag = -(Complex64::new(1.0, r.delta_c) * n as f64 + Complex64::new(r.gamma / 2.0, r.delta_a) * excited);
                m.add(col, col, diag);
                if n < fock_cutoff {
                    m.add(idx(n + 1, b), col, Complex64::new(r.drive * ((n + 1) as f64).sqrt(), 0.0));
                }
                if n > 0 {
                    m.add(idx(n - 1, b), col, Complex64::new(-r.drive * (n as f64).sqrt(), 0.0));
                    collapse[0].push((idx(n - 1, b), col, Complex64::new((2.0 * n as f64).sqrt(), 0.0)));
                }
                for j in 0..atoms {
                    let bit = 1 << j;
                    if b & bit != 0 {
                        if n < fock_cutoff {
                            m.add(idx(n + 1, b ^ bit), col, g[j] * ((n + 1) as f64).sqrt());
                        }
                        collapse[j + 1].push((idx(n, b ^ bit), col, Complex64::new(r.gamma.sqrt(), 0.0)));
                    } else if n > 0 {
                        m.add(idx(n - 1, b | bit), col, -g[j].conj() * (n as f64).sqrt());
                    }
                }
            }
        }
        Ok(Liouvillian { dim, cutoff: fock_cutoff, atoms, m, collapse })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// dρ/dt = Mρ + ρM† + Σ CρC†.
    pub fn apply(&self, rho: &Matrix, out: &mut Matrix) {
        let d = self.dim;
        out.data.fill(ZERO);
        for i in 0..d {
            for k in 0..d {
                let mik = self.m.get(i, k);
                if mik == ZERO {
                    continue;
                }
                let conj = mik.conj();
                for j in 0..d {
                    // (Mρ)_ij and (ρM†)_ji
                    out.data[i * d + j] += mik * rho.data[k * d + j];
                    out.data[j * d + i] += rho.data[j * d + k] * conj;
                }
            }
        }
        for c in &self.collapse {
            for &(i, j, a) in c {
                for &(k, l, b) in c {
                    out.data[i * d + k] += a * rho.data[j * d + l] * b.conj();
                }
            }
        }
    }

    fn rk4(&self, rho: &mut Matrix, dt: f64, work: &mut [Matrix; 5]) {
        let [k1, k2, k3, k4, tmp] = work;
        self.apply(rho, k1);
        combine(tmp, rho, k1, 0.5 * dt);
        self.apply(tmp, k2);
        combine(tmp, rho, k2, 0.5 * dt);
        self.apply(tmp, k3);
        combine(tmp, rho, k3, dt);
        self.apply(tmp, k4);
        for i in 0..rho.data.len() {
            rho.data[i] += (k1.data[i] + (k2.data[i] + k3.data[i]) * 2.0 + k4.data[i]) * (dt / 6.0);
        }
    }

    fn workspace(&self) -> [Matrix; 5] {
        std::array::from_fn(|_| Matrix::zeros(self.dim))
    }

    /// Tr[(a†)^k a^k ρ].
    pub fn factorial_moment(&self, rho: &Matrix, k: usize) -> f64 {
        let states = 1usize << self.atoms;
        let mut total = 0.0;
        for n in k..=self.cutoff {
            let weight: f64 = (0..k).map(|i| (n - i) as f64).product();
            for b in 0..states {
                let i = n * states + b;
                total += weight * rho.get(i, i).re;
            }
        }
        total
    }

    /// aρa†.
    fn jump(&self, rho: &Matrix) -> Matrix {
        let d = self.dim;
        let states = 1usize << self.atoms;
        let mut out = Matrix::zeros(d);
        for n in 1..=self.cutoff {
            for m in 1..=self.cutoff {
                let s = ((n * m) as f64).sqrt();
                for b in 0..states {
                    for c in 0..states {
                        let v = rho.get(n * states + b, m * states + c) * s;
                        out.add((n - 1) * states + b, (m - 1) * states + c, v);
                    }
                }
            }
        }
        out
    }
}

fn combine(out: &mut Matrix, y: &Matrix, k: &Matrix, h: f64) {
    for ((o, y), k) in out.data.iter_mut().zip(&y.data).zip(&k.data) {
        *o = y + k * h;
    }
}

/// Stationary density matrix together with its generator.
#[derive(Clone, Debug)]
pub struct DenseSteadyState {
    pub rho: Matrix,
    pub liouvillian: Liouvillian,
    /// Integration time used, κ⁻¹.
    pub time: f64,
}

impl DenseSteadyState {
    pub fn photon_number(&self) -> f64 {
        self.liouvillian.factorial_moment(&self.rho, 1)
    }
}

/// Integrate from the vacuum until the state stops changing: ‖dρ/dt‖ below
/// 1e-12 and the first two photon moments stable to a relative 1e-11.
pub fn dense_steady_state(
    config: &AtomConfiguration,
    fock_cutoff: usize,
    params: &PhysicalParameters,
) -> Result<DenseSteadyState> {
    let l = Liouvillian::new(config, fock_cutoff, params)?;
    let mut rho = Matrix::zeros(l.dim);
    rho.data[0] = Complex64::new(1.0, 0.0);
    let mut work = l.workspace();
    let per_chunk = (1.0 / STEP).round() as usize;
    let mut prev = (l.factorial_moment(&rho, 1), l.factorial_moment(&rho, 2));
    let mut time = 0.0;
    let mut deriv = Matrix::zeros(l.dim);
    while time < MAX_TIME {
        for _ in 0..per_chunk {
            l.rk4(&mut rho, STEP, &mut work);
        }
        time += per_chunk as f64 * STEP;
        let now = (l.factorial_moment(&rho, 1), l.factorial_moment(&rho, 2));
        let stable = |a: f64, b: f64| (a - b).abs() <= 1e-11 * b.abs() || b == 0.0 && a == 0.0;
        l.apply(&rho, &mut deriv);
        if time >= 10.0 && deriv.max_abs() < 1e-12 && stable(prev.0, now.0) && stable(prev.1, now.1) {
            return Ok(DenseSteadyState { rho, liouvillian: l, time });
        }
        prev = now;
    }
    Err(Error::Oracle(format!("no steady state within {MAX_TIME} κ⁻¹")))
}

/// g²(τ) = Tr[a†a e^{Lτ}(aρa†)]/⟨a†a⟩², propagating the normalized
/// conditional state aρa†/Tr(aρa†).
pub fn dense_g2(
    config: &AtomConfiguration,
    fock_cutoff: usize,
    params: &PhysicalParameters,
    tau: &[f64],
) -> Result<G2Curve> {
    let ss = dense_steady_state(config, fock_cutoff, params)?;
    let l = &ss.liouvillian;
    let n = ss.photon_number();
    if n <= 0.0 {
        return Err(Error::Oracle("no photons in the steady state".into()));
    }
    let mut cond = l.jump(&ss.rho);
    let norm = cond.trace().re;
    cond.scale(1.0 / norm);
    let mut work = l.workspace();
    let mut t = 0.0;
    let mut values = Vec::with_capacity(tau.len());
    for &target in tau {
        if target < t {
            return Err(Error::Oracle("lag grid must be non-decreasing".into()));
        }
        let steps = ((target - t) / STEP).ceil() as usize;
        if steps > 0 {
            let h = (target - t) / steps as f64;
            for _ in 0..steps {
                l.rk4(&mut cond, h, &mut work);
            }
        }
        t = target;
        values.push(l.factorial_moment(&cond, 1) * norm / (n * n));
    }
    Ok(G2Curve::new(tau, params.kappa, values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weak(params: PhysicalParameters, ratio: f64) -> PhysicalParameters {
        PhysicalParameters { drive: ratio * params.kappa, ..params }
    }

    #[test]
    fn empty_cavity_is_coherent() {
        let p = weak(PhysicalParameters::set1(), 0.1);
        let c = AtomConfiguration::from_positions(vec![], &p);
        let ss = dense_steady_state(&c, 4, &p).unwrap();
        assert!((ss.photon_number() - 0.01).abs() < 1e-6);
        assert!((ss.rho.trace().re - 1.0).abs() < 1e-12);
        let g2 = dense_g2(&c, 4, &p, &[0.0, 1.0]).unwrap();
        for v in g2.values {
            assert!((v - 1.0).abs() < 1e-3, "{v}");
        }
    }

    #[test]
    fn state_is_hermitian_and_positive() {
        let p = weak(PhysicalParameters::set2(), 0.05);
        let c = AtomConfiguration::antinodes(2, &p);
        let ss = dense_steady_state(&c, 3, &p).unwrap();
        let d = ss.rho.dim;
        for i in 0..d {
            assert!(ss.rho.get(i, i).re > -1e-10);
            for j in 0..d {
                assert!((ss.rho.get(i, j) - ss.rho.get(j, i).conj()).norm() < 1e-12);
                assert!(ss.rho.get(i, j).norm_sqr() <= ss.rho.get(i, i).re * ss.rho.get(j, j).re + 1e-10);
            }
        }
    }

    #[test]
    fn dimension_caps() {
        let p = PhysicalParameters::set1();
        let four = AtomConfiguration::antinodes(4, &p);
        assert!(Liouvillian::new(&four, 1, &p).is_err());
        let three = AtomConfiguration::antinodes(3, &p);
        assert_eq!(Liouvillian::new(&three, 4, &p).unwrap().dim(), 40);
        assert!(Liouvillian::new(&three, 5, &p).is_err());
        assert!(Liouvillian::new(&three, 0, &p).is_err());
    }
}
