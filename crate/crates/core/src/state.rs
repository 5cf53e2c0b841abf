//! Conditional state in a truncated, dynamically sized many-atom basis.
//!
//! Basis states |n, S⟩ carry n cavity photons and the set S of excited
//! atoms, with n + |S| no larger than the truncation level. Amplitudes of
//! equal (n, |S|) form a *sector*; all sectors live in one flat buffer so the
//! integrator can treat the state as a plain vector. Within a sector, atom
//! subsets are stored in colex order (index of {j<k} is k(k−1)/2 + j), which
//! makes adding an atom an append.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Truncation;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn binomial(n: usize, m: usize) -> usize {
    match m {
        0 => 1,
        1 => n,
        2 => n * n.saturating_sub(1) / 2,
        3 => n * n.saturating_sub(1) * n.saturating_sub(2) / 6,
        _ => unreachable!("at most three excited atoms"),
    }
}

/// Colex rank of a sorted subset.
#[inline]
pub(crate) fn subset_index(s: &[usize]) -> usize {
    match *s {
        [] => 0,
        [j] => j,
        [j, k] => k * (k - 1) / 2 + j,
        [j, k, l] => l * (l - 1) * (l - 2) / 6 + k * (k - 1) / 2 + j,
        _ => unreachable!("at most three excited atoms"),
    }
}

/// Call `f(index, subset)` for every m-subset of 0..n in colex order.
fn for_each_subset(n: usize, m: usize, mut f: impl FnMut(usize, &[usize])) {
    let mut idx = 0;
    match m {
        0 => f(0, &[]),
        1 => (0..n).for_each(|j| f(j, &[j])),
        2 => {
            for k in 0..n {
                for j in 0..k {
                    f(idx, &[j, k]);
                    idx += 1;
                }
            }
        }
        3 => {
            for l in 0..n {
                for k in 0..l {
                    for j in 0..k {
                        f(idx, &[j, k, l]);
                        idx += 1;
                    }
                }
            }
        }
        _ => unreachable!("at most three excited atoms"),
    }
}

/// Sector offsets for a given atom number and truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub atoms: usize,
    pub truncation: Truncation,
}

impl Layout {
    pub fn new(atoms: usize, truncation: Truncation) -> Self {
        Layout { atoms, truncation }
    }

    pub fn quanta(&self) -> usize {
        self.truncation.level()
    }

    /// Sectors (photons, excited atoms) in storage order.
    pub fn sectors(&self) -> impl Iterator<Item = (usize, usize)> {
        let q = self.quanta();
        (0..=q.min(3)).flat_map(move |m| (0..=q - m).map(move |n| (n, m)))
    }

    pub fn has_sector(&self, n: usize, m: usize) -> bool {
        m <= 3 && n + m <= self.quanta()
    }

    pub fn sector_len(&self, m: usize) -> usize {
        binomial(self.atoms, m)
    }

    /// Start of sector (n, m) in the flat buffer.
    pub fn offset(&self, n: usize, m: usize) -> usize {
        debug_assert!(self.has_sector(n, m));
        let q = self.quanta();
        let mut off = 0;
        for mm in 0..m {
            off += (q - mm + 1) * binomial(self.atoms, mm);
        }
        off + n * binomial(self.atoms, m)
    }

    pub fn len(&self) -> usize {
        let q = self.quanta();
        (0..=q.min(3)).map(|m| (q - m + 1) * binomial(self.atoms, m)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, n: usize, subset: &[usize]) -> usize {
        self.offset(n, subset.len()) + subset_index(subset)
    }
}

/// Conditional expectation values of a (possibly unnormalized) state.
#[derive(Clone, Debug, PartialEq)]
pub struct Expectations {
    /// ⟨a†a⟩.
    pub photon_number: f64,
    /// ⟨σ₊σ₋⟩ for each slot.
    pub atom_excitation: Vec<f64>,
}

impl Expectations {
    pub fn total_excitation(&self) -> f64 {
        self.atom_excitation.iter().sum()
    }
}

/// Truncated conditional state over the atoms currently registered.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedState {
    layout: Layout,
    amps: Vec<Complex64>,
    ids: Vec<u64>,
    slots: HashMap<u64, usize>,
}

impl TruncatedState {
    /// |00⟩ with no atoms.
    pub fn vacuum(truncation: Truncation) -> Self {
        let layout = Layout::new(0, truncation);
        let mut amps = vec![ZERO; layout.len()];
        amps[0] = Complex64::new(1.0, 0.0);
        TruncatedState { layout, amps, ids: Vec::new(), slots: HashMap::new() }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn truncation(&self) -> Truncation {
        self.layout.truncation
    }

    pub fn atom_count(&self) -> usize {
        self.ids.len()
    }

    /// Atom ids in slot order.
    pub fn ids(&self) -> &[u64] {
        &self.ids
    }

    pub fn slot_of(&self, id: u64) -> Option<usize> {
        self.slots.get(&id).copied()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    /// Amplitude of |n, S⟩ for slots `subset` (sorted ascending).
    pub fn amplitude(&self, photons: usize, subset: &[usize]) -> Complex64 {
        if !self.layout.has_sector(photons, subset.len()) {
            return ZERO;
        }
        self.amps[self.layout.index(photons, subset)]
    }

    pub fn set_amplitude(&mut self, photons: usize, subset: &[usize], value: Complex64) {
        let i = self.layout.index(photons, subset);
        self.amps[i] = value;
    }

    pub fn sector(&self, photons: usize, excited: usize) -> &[Complex64] {
        let off = self.layout.offset(photons, excited);
        &self.amps[off..off + self.layout.sector_len(excited)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Scale to unit norm. Fails on a zero (or non-finite) norm.
    pub fn renormalize(&mut self) -> Result<()> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::ZeroNorm);
        }
        let s = 1.0 / n2.sqrt();
        self.amps.iter_mut().for_each(|c| *c *= s);
        Ok(())
    }

    /// Rebuild the buffer for `atoms` slots, filling each new amplitude from
    /// `source(photons, subset)`.
    fn rebuild(&mut self, atoms: usize, mut source: impl FnMut(usize, &[usize]) -> Complex64) {
        let layout = Layout::new(atoms, self.layout.truncation);
        let mut amps = vec![ZERO; layout.len()];
        for (n, m) in layout.sectors() {
            let off = layout.offset(n, m);
            for_each_subset(atoms, m, |i, s| amps[off + i] = source(n, s));
        }
        self.layout = layout;
        self.amps = amps;
    }

    /// Register a new atom in its ground state.
    ///
    /// Subsets are ranked in colex order, so the subsets that avoid the new
    /// (highest) slot keep their ranks: each sector is copied as a block and
    /// the remainder left at zero.
    pub fn add_atom(&mut self, id: u64) -> Result<()> {
        if self.slots.contains_key(&id) {
            return Err(Error::DuplicateAtom(id));
        }
        let n_old = self.ids.len();
        let layout = Layout::new(n_old + 1, self.layout.truncation);
        let mut amps = vec![ZERO; layout.len()];
        for (n, m) in self.layout.sectors() {
            let src = self.layout.offset(n, m);
            let len = self.layout.sector_len(m);
            let dst = layout.offset(n, m);
            amps[dst..dst + len].copy_from_slice(&self.amps[src..src + len]);
        }
        self.layout = layout;
        self.amps = amps;
        self.slots.insert(id, n_old);
        self.ids.push(id);
        Ok(())
    }

    /// Probability that the atom in `slot` is excited.
    pub fn excitation_probability(&self, slot: usize) -> f64 {
        let mut p = 0.0;
        for (n, m) in self.layout.sectors().filter(|&(_, m)| m > 0) {
            let sec = self.sector(n, m);
            for_each_subset(self.atom_count(), m, |i, s| {
                if s.contains(&slot) {
                    p += sec[i].norm_sqr();
                }
            });
        }
        p / self.norm_sqr()
    }

    /// Disentangle and drop an atom, projecting it onto its excited state
    /// with its excitation probability (drawn from `rng`), else onto ground.
    /// Returns whether the excited branch was taken.
    pub fn remove_atom<R: Rng + ?Sized>(&mut self, id: u64, rng: &mut R) -> Result<bool> {
        let r: f64 = rng.random();
        self.remove_atom_with(id, r)
    }

    /// [`Self::remove_atom`] with an explicit uniform variate `r` in [0, 1).
    pub fn remove_atom_with(&mut self, id: u64, r: f64) -> Result<bool> {
        let slot = self.slot_of(id).ok_or(Error::UnknownAtom(id))?;
        let p_exc = self.excitation_probability(slot);
        if p_exc > 1.0 + 1e-9 || !p_exc.is_finite() {
            return Err(Error::CorruptedState(p_exc));
        }
        let excited = r < p_exc;
        let last = self.atom_count() - 1;
        let layout = Layout::new(last, self.layout.truncation);
        let mut amps = vec![ZERO; layout.len()];
        // keep the old subsets on the chosen branch of `slot`, drop `slot`
        // from them and move the old last slot into its place
        for (n, m) in self.layout.sectors() {
            if excited && m == 0 {
                continue;
            }
            let keep_m = if excited { m - 1 } else { m };
            if !layout.has_sector(n, keep_m) {
                continue;
            }
            let src = self.layout.offset(n, m);
            let dst = layout.offset(n, keep_m);
            let old = &self.amps;
            for_each_subset(last + 1, m, |i, sub| {
                if sub.contains(&slot) != excited {
                    return;
                }
                let mut buf = [0usize; 3];
                let mut len = 0;
                for &j in sub {
                    if j != slot {
                        buf[len] = if j == last { slot } else { j };
                        len += 1;
                    }
                }
                let kept = &mut buf[..len];
                kept.sort_unstable();
                amps[dst + subset_index(kept)] = old[src + i];
            });
        }
        self.layout = layout;
        self.amps = amps;
        self.slots.remove(&id);
        self.ids.swap_remove(slot);
        if slot < self.ids.len() {
            self.slots.insert(self.ids[slot], slot);
        }
        self.renormalize()?;
        Ok(excited)
    }

    pub fn expectations(&self) -> Result<Expectations> {
        let norm = self.norm_sqr();
        if !(norm > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let mut photons = 0.0;
        let mut exc = vec![0.0; self.atom_count()];
        for (n, m) in self.layout.sectors() {
            let sec = self.sector(n, m);
            if n > 0 {
                photons += n as f64 * sec.iter().map(|c| c.norm_sqr()).sum::<f64>();
            }
            if m > 0 {
                for_each_subset(self.atom_count(), m, |i, s| {
                    let p = sec[i].norm_sqr();
                    for &j in s {
                        exc[j] += p;
                    }
                });
            }
        }
        exc.iter_mut().for_each(|e| *e /= norm);
        Ok(Expectations { photon_number: photons / norm, atom_excitation: exc })
    }

    /// ⟨a†a⟩ alone, cheaper than [`Self::expectations`].
    pub fn photon_number(&self) -> f64 {
        let mut photons = 0.0;
        let mut norm = 0.0;
        for (n, m) in self.layout.sectors() {
            let s: f64 = self.sector(n, m).iter().map(|c| c.norm_sqr()).sum();
            photons += n as f64 * s;
            norm += s;
        }
        photons / norm
    }

    /// Apply the cavity annihilation operator and renormalize.
    pub fn apply_cavity_jump(&mut self) -> Result<()> {
        let q = self.layout.quanta();
        let has_photon = self
            .layout
            .sectors()
            .filter(|&(n, _)| n > 0)
            .any(|(n, m)| self.sector(n, m).iter().any(|c| c.norm_sqr() > 0.0));
        if !has_photon {
            return Err(Error::NoPhoton);
        }
        let old = self.clone();
        self.rebuild(self.atom_count(), |n, s| {
            if n + 1 + s.len() > q {
                ZERO
            } else {
                old.amplitude(n + 1, s) * ((n + 1) as f64).sqrt()
            }
        });
        self.renormalize()
    }

    /// Apply σ₋ of the atom in `slot` and renormalize.
    pub fn apply_atom_jump(&mut self, slot: usize) -> Result<()> {
        if slot >= self.atom_count() {
            return Err(Error::UnknownAtom(slot as u64));
        }
        if self.excitation_probability(slot) <= 0.0 {
            return Err(Error::NoExcitation(self.ids[slot]));
        }
        let q = self.layout.quanta();
        let old = self.clone();
        self.rebuild(self.atom_count(), |n, s| {
            if s.contains(&slot) || n + s.len() + 1 > q {
                return ZERO;
            }
            let mut buf = [0usize; 4];
            buf[..s.len()].copy_from_slice(s);
            buf[s.len()] = slot;
            let sub = &mut buf[..s.len() + 1];
            sub.sort_unstable();
            old.amplitude(n, sub)
        });
        self.renormalize()
    }

    /// Write the non-zero amplitudes as CSV rows `sector,indices,re,im`.
    ///
    /// `sector` is the photon number followed by the excited-atom count
    /// (e.g. `1j`, `0jk`); `indices` lists the excited atom ids joined by `:`.
    pub fn dump_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "sector,indices,re,im")?;
        for (n, m) in self.layout.sectors() {
            let sec = self.sector(n, m);
            let label = format!("{n}{}", ["0", "j", "jk", "jkl"][m]);
            let mut rows = Vec::new();
            for_each_subset(self.atom_count(), m, |i, s| {
                if sec[i] != ZERO {
                    let ids: Vec<String> = s.iter().map(|&j| self.ids[j].to_string()).collect();
                    rows.push(format!("{label},{},{:e},{:e}", ids.join(":"), sec[i].re, sec[i].im));
                }
            });
            for row in rows {
                writeln!(out, "{row}")?;
            }
        }
        Ok(())
    }
}
