use std::collections::HashMap;

use cqed_beam::state::TruncatedState;
use cqed_beam::Truncation;
use num_complex::Complex64;
use proptest::prelude::*;

type Key = (usize, Vec<u64>);
type Dense = HashMap<Key, Complex64>;

fn subsets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, m, cur, out);
            cur.pop();
        }
    }
    rec(0, n, m, &mut cur, &mut out);
    out
}

fn to_dense(s: &TruncatedState) -> Dense {
    let q = s.truncation().level();
    let ids = s.ids();
    let mut map = HashMap::new();
    for m in 0..=q.min(ids.len()) {
        for n in 0..=q - m {
            for sub in subsets(ids.len(), m) {
                let mut key: Vec<u64> = sub.iter().map(|&j| ids[j]).collect();
                key.sort_unstable();
                map.insert((n, key), s.amplitude(n, &sub));
            }
        }
    }
    map
}

fn normalize(d: &mut Dense) {
    let n: f64 = d.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    d.values_mut().for_each(|c| *c /= n);
}

fn assert_close(a: &Dense, b: &Dense) {
    for (k, v) in a {
        let w = b.get(k).copied().unwrap_or_default();
        assert!((v - w).norm() < 1e-12, "{k:?}: {v} vs {w}");
    }
    for (k, w) in b {
        if !a.contains_key(k) {
            assert!(w.norm() < 1e-12, "{k:?} missing");
        }
    }
}

#[derive(Clone, Debug)]
enum Op {
    Add,
    Remove(usize, f64),
    CavityJump,
    AtomJump(usize),
}

fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => Just(Op::Add),
        2 => (any::<usize>(), 0.0f64..1.0).prop_map(|(i, r)| Op::Remove(i, r)),
        1 => Just(Op::CavityJump),
        1 => any::<usize>().prop_map(Op::AtomJump),
    ]
}

fn truncation() -> impl Strategy<Value = Truncation> {
    prop_oneof![Just(Truncation::OneQuantum), Just(Truncation::TwoQuanta), Just(Truncation::ThreeQuanta)]
}

/// Fill every amplitude with a value derived from the key.
fn scramble(s: &mut TruncatedState, seed: u64) {
    for (i, c) in s.amplitudes_mut().iter_mut().enumerate() {
        let x = (i as u64 + 1).wrapping_mul(seed | 1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        let re = ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
        let im = (((x >> 3) % 1000) as f64 / 1000.0) - 0.5;
        *c = Complex64::new(re, im);
    }
    s.renormalize().unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_dense_reference(t in truncation(), ops in prop::collection::vec(op(), 1..40), seed in any::<u64>()) {
        let mut s = TruncatedState::vacuum(t);
        let mut next = 0u64;
        for _ in 0..3 {
            s.add_atom(next).unwrap();
            next += 1;
        }
        scramble(&mut s, seed);
        let mut d = to_dense(&s);
        for op in ops {
            match op {
                Op::Add => {
                    s.add_atom(next).unwrap();
                    next += 1;
                }
                Op::Remove(i, r) => {
                    if s.atom_count() == 0 {
                        continue;
                    }
                    let id = s.ids()[i % s.atom_count()];
                    let p: f64 = d.iter().filter(|(k, _)| k.1.contains(&id)).map(|(_, c)| c.norm_sqr()).sum();
                    let excited = s.remove_atom_with(id, r).unwrap();
                    prop_assert_eq!(excited, r < p);
                    d = d
                        .into_iter()
                        .filter(|(k, _)| k.1.contains(&id) == excited)
                        .map(|((n, ids), c)| ((n, ids.into_iter().filter(|&j| j != id).collect()), c))
                        .collect();
                    normalize(&mut d);
                }
                Op::CavityJump => {
                    if s.photon_number() == 0.0 {
                        prop_assert!(s.apply_cavity_jump().is_err());
                        continue;
                    }
                    s.apply_cavity_jump().unwrap();
                    let q = t.level();
                    d = d
                        .iter()
                        .filter(|((n, _), _)| *n > 0)
                        .map(|((n, ids), c)| ((n - 1, ids.clone()), c * (*n as f64).sqrt()))
                        .filter(|((n, ids), _)| n + ids.len() < q)
                        .collect();
                    normalize(&mut d);
                }
                Op::AtomJump(i) => {
                    if s.atom_count() == 0 {
                        continue;
                    }
                    let slot = i % s.atom_count();
                    let id = s.ids()[slot];
                    if s.excitation_probability(slot) == 0.0 {
                        prop_assert!(s.apply_atom_jump(slot).is_err());
                        continue;
                    }
                    s.apply_atom_jump(slot).unwrap();
                    let q = t.level();
                    d = d
                        .iter()
                        .filter(|((_, ids), _)| ids.contains(&id))
                        .map(|((n, ids), c)| ((*n, ids.iter().copied().filter(|&j| j != id).collect::<Vec<_>>()), *c))
                        .filter(|((n, ids), _)| n + ids.len() < q)
                        .collect();
                    normalize(&mut d);
                }
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
            assert_close(&to_dense(&s), &d);
        }
    }

    #[test]
    fn removal_branches_average_to_partial_trace(atoms in 1usize..7, pick in any::<usize>(), seed in any::<u64>()) {
        let mut s = TruncatedState::vacuum(Truncation::ThreeQuanta);
        for id in 0..atoms as u64 {
            s.add_atom(id).unwrap();
        }
        scramble(&mut s, seed);
        let id = s.ids()[pick % atoms];
        let full = to_dense(&s);

        // reduced density matrix over the other atoms and the field
        let mut reduced: HashMap<(Key, Key), Complex64> = HashMap::new();
        let strip = |k: &Key| (k.0, k.1.iter().copied().filter(|&j| j != id).collect::<Vec<_>>());
        for (ka, a) in &full {
            for (kb, b) in &full {
                if ka.1.contains(&id) == kb.1.contains(&id) {
                    *reduced.entry((strip(ka), strip(kb))).or_default() += a * b.conj();
                }
            }
        }

        let p = s.excitation_probability(s.slot_of(id).unwrap());
        let mut mixed: HashMap<(Key, Key), Complex64> = HashMap::new();
        for (r, w) in [(0.0, p), (0.999_999_999, 1.0 - p)] {
            if w == 0.0 {
                continue;
            }
            let mut branch = s.clone();
            branch.remove_atom_with(id, r).unwrap();
            let d = to_dense(&branch);
            for (ka, a) in &d {
                for (kb, b) in &d {
                    *mixed.entry((ka.clone(), kb.clone())).or_default() += w * a * b.conj();
                }
            }
        }
        for (k, v) in &reduced {
            let w = mixed.get(k).copied().unwrap_or_default();
            prop_assert!((v - w).norm() < 1e-12, "{:?}: {} vs {}", k, v, w);
        }
    }

    #[test]
    fn add_then_remove_ground_is_identity(atoms in 0usize..6, seed in any::<u64>()) {
        let mut s = TruncatedState::vacuum(Truncation::TwoQuanta);
        for id in 0..atoms as u64 {
            s.add_atom(id).unwrap();
        }
        if atoms > 0 {
            scramble(&mut s, seed);
        }
        let before = to_dense(&s);
        s.add_atom(99).unwrap();
        prop_assert!(!s.remove_atom_with(99, 0.5).unwrap());
        assert_close(&to_dense(&s), &before);
    }
}
