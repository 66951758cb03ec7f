//! Canonical forms of chirotopes under relabeling, reorientation and global sign.
//!
//! The canonical string lists basis signs in colexicographic order of r-subsets, so the
//! prefix fixed by the first `k` new labels is exactly the set of bases inside them. That
//! makes branch-and-bound over label assignments possible: a partial labeling whose prefix
//! already exceeds the best complete string is abandoned. Reorientation signs and the
//! global sign are chosen greedily, position by position, by Gaussian elimination over
//! GF(2); `+` is preferred, then `-`, then `0`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chirotope::Subsets;
use crate::error::{Error, Result};
use crate::faces::{mutations, MutationCertificate};
use crate::om::OrientedMatroid;
use crate::sign::{Sign, SignVector};

#[derive(Copy, Clone, Debug)]
pub struct CanonicalOptions {
    /// Largest ground set on which the full search runs.
    pub max_exact_n: usize,
}

impl Default for CanonicalOptions {
    fn default() -> Self {
        CanonicalOptions { max_exact_n: 9 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CanonicalForm {
    /// `"r n:signs"` when exact, otherwise `"r n~invariants"`.
    pub key: String,
    pub exact: bool,
}

pub fn canonical_form(om: &OrientedMatroid) -> Result<CanonicalForm> {
    canonical_form_with(om, CanonicalOptions::default(), None)
}

/// Canonical form, reusing already computed mutation certificates when given.
pub fn canonical_form_with(
    om: &OrientedMatroid,
    opts: CanonicalOptions,
    certs: Option<&[MutationCertificate]>,
) -> Result<CanonicalForm> {
    let chi = om.require_chirotope()?;
    let (n, r) = (om.n(), om.rank());
    let owned;
    let certs = match certs {
        Some(c) => c,
        None => {
            owned = mutations(om);
            &owned
        }
    };
    let colors = refined_colors(om, certs);
    if n > opts.max_exact_n {
        let mut sig: Vec<u32> = colors.clone();
        sig.sort();
        let body: Vec<String> = sig.iter().map(|c| c.to_string()).collect();
        return Ok(CanonicalForm {
            key: format!("{r} {n}~{}|{}", body.join("."), certs.len()),
            exact: false,
        });
    }
    let mut table = vec![Sign::Zero; 1 << n];
    for (b, &s) in Subsets::new(n, r).zip(chi.signs()) {
        table[b.iter().fold(0usize, |m, &e| m | 1 << e)] = s;
    }
    let mut class_at: Vec<u32> = colors.clone();
    class_at.sort();
    let positions = (0..n)
        .map(|k| {
            let mut subs: Vec<u64> = Subsets::new(k, r - 1)
                .map(|s| s.iter().fold(1u64 << k, |m, &e| m | 1 << e))
                .collect();
            // numeric order on equal-size masks is colex order
            subs.sort();
            subs
        })
        .collect();
    let mut search = Search {
        n,
        table,
        colors,
        class_at,
        positions,
        best: None,
    };
    search.dfs(&mut Vec::with_capacity(n), 0, &mut Vec::new(), &mut Vec::new());
    let best = search.best.expect("at least one labeling is admissible");
    Ok(CanonicalForm { key: format!("{r} {n}:{}", String::from_utf8(best).expect("ascii")), exact: true })
}

/// Stable element colors from iterated refinement over two reorientation-invariant pair
/// weights: the number of mutations containing both elements, and the smaller of the
/// numbers of cocircuits on which the pair agrees or disagrees.
fn refined_colors(om: &OrientedMatroid, certs: &[MutationCertificate]) -> Vec<u32> {
    let n = om.n();
    let mut weight = vec![vec![(0u32, 0u32); n]; n];
    let half: Vec<SignVector> = om.cocircuits().iter().filter(|x| x.normalized() == **x).copied().collect();
    for e in 0..n {
        for f in 0..n {
            if e == f {
                continue;
            }
            let (mut agree, mut disagree) = (0u32, 0u32);
            for x in &half {
                match (x.get(e), x.get(f)) {
                    (Sign::Zero, _) | (_, Sign::Zero) => {}
                    (a, b) if a == b => agree += 1,
                    _ => disagree += 1,
                }
            }
            let together = certs.iter().filter(|c| c.contains(e) && c.contains(f)).count() as u32;
            weight[e][f] = (together, agree.min(disagree));
        }
    }
    let own: Vec<u32> = (0..n).map(|e| certs.iter().filter(|c| c.contains(e)).count() as u32).collect();
    let mut colors = relabel_keys(&own);
    loop {
        let keys: Vec<(u32, Vec<(u32, (u32, u32))>)> = (0..n)
            .map(|e| {
                let mut nb: Vec<(u32, (u32, u32))> =
                    (0..n).filter(|&f| f != e).map(|f| (colors[f], weight[e][f])).collect();
                nb.sort();
                (colors[e], nb)
            })
            .collect();
        let next = relabel_keys(&keys);
        let classes = |c: &[u32]| c.iter().collect::<std::collections::BTreeSet<_>>().len();
        if classes(&next) == classes(&colors) {
            return next;
        }
        colors = next;
    }
}

fn relabel_keys<K: Ord + Clone>(keys: &[K]) -> Vec<u32> {
    let ranks: BTreeMap<K, u32> = {
        let mut sorted: Vec<K> = keys.to_vec();
        sorted.sort();
        sorted.dedup();
        sorted.into_iter().enumerate().map(|(i, k)| (k, i as u32)).collect()
    };
    keys.iter().map(|k| ranks[k]).collect()
}

struct Search {
    n: usize,
    /// Basis sign indexed by the bitmask of the (original) sorted subset.
    table: Vec<Sign>,
    colors: Vec<u32>,
    /// Color the element receiving new label `k` must have.
    class_at: Vec<u32>,
    /// Masks over new labels whose largest label is `k`, in colex order.
    positions: Vec<Vec<u64>>,
    best: Option<Vec<u8>>,
}

impl Search {
    fn dfs(&mut self, perm: &mut Vec<usize>, used: u64, rows: &mut Vec<(u64, bool)>, prefix: &mut Vec<u8>) {
        let k = perm.len();
        if k == self.n {
            if self.best.as_ref().is_none_or(|b| prefix.as_slice() < b.as_slice()) {
                self.best = Some(prefix.clone());
            }
            return;
        }
        for e in 0..self.n {
            if used >> e & 1 == 1 || self.colors[e] != self.class_at[k] {
                continue;
            }
            perm.push(e);
            let (rows_len, prefix_len) = (rows.len(), prefix.len());
            for i in 0..self.positions[k].len() {
                let b = self.positions[k][i];
                let c = self.position_char(perm, b, rows);
                prefix.push(c);
            }
            let keep = match &self.best {
                Some(best) => prefix.as_slice() <= &best[..prefix.len()],
                None => true,
            };
            if keep {
                self.dfs(perm, used | 1 << e, rows, prefix);
            }
            rows.truncate(rows_len);
            prefix.truncate(prefix_len);
            perm.pop();
        }
    }

    fn position_char(&self, perm: &[usize], b: u64, rows: &mut Vec<(u64, bool)>) -> u8 {
        let mut tuple = [0usize; 64];
        let mut len = 0;
        let mut old_mask = 0usize;
        let mut bits = b;
        while bits != 0 {
            let label = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            tuple[len] = perm[label];
            old_mask |= 1 << perm[label];
            len += 1;
        }
        let s = self.table[old_mask];
        if s == Sign::Zero {
            return b'0';
        }
        let mut inversions = 0;
        for i in 0..len {
            for j in i + 1..len {
                if tuple[i] > tuple[j] {
                    inversions += 1;
                }
            }
        }
        let negative = (s == Sign::Minus) ^ (inversions % 2 == 1);
        // variables: one sign per new label, plus the global sign at bit n
        let mut form = b | 1 << self.n;
        let mut value = false;
        for &(row, rhs) in rows.iter() {
            let pivot = row & row.wrapping_neg();
            if form & pivot != 0 {
                form ^= row;
                value ^= rhs;
            }
        }
        let bit = if form == 0 {
            negative ^ value
        } else {
            // choose the free form's value so this position reads '+'
            rows.push((form, negative ^ value));
            false
        };
        if bit {
            b'-'
        } else {
            b'+'
        }
    }
}

/// Whether two oriented matroids are equal up to relabeling and reorientation.
pub fn isomorphic(a: &OrientedMatroid, b: &OrientedMatroid) -> Result<bool> {
    if (a.n(), a.rank()) != (b.n(), b.rank()) {
        return Ok(false);
    }
    let (ka, kb) = (canonical_form(a)?, canonical_form(b)?);
    if !ka.exact || !kb.exact {
        return Err(Error::Precondition("ground set too large for an exact comparison".into()));
    }
    Ok(ka == kb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chirotope::Chirotope;
    use crate::faces::flip;
    use crate::sign::ElementSet;
    use crate::IntConfig;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cyclic(r: usize, n: usize) -> OrientedMatroid {
        let rows = (1..=n as i128).map(|t| (0..r as u32).map(|k| t.pow(k)).collect()).collect();
        OrientedMatroid::from_points(&IntConfig::new(r, rows).unwrap()).unwrap()
    }

    fn random_uniform(rng: &mut ChaCha8Rng, r: usize, n: usize) -> OrientedMatroid {
        loop {
            let rows = (0..n).map(|_| (0..r).map(|_| rng.gen_range(-9i128..=9)).collect()).collect();
            if let Ok(cfg) = IntConfig::new(r, rows) {
                let om = OrientedMatroid::from_points(&cfg).unwrap();
                if om.is_uniform() {
                    return om;
                }
            }
        }
    }

    /// Minimum by exhaustion over every color-respecting permutation, every reorientation
    /// and both global signs, strings in colex order.
    fn brute_force_key(om: &OrientedMatroid) -> String {
        let (n, r) = (om.n(), om.rank());
        let chi = om.chirotope().unwrap();
        let colors = refined_colors(om, &mutations(om));
        let mut sorted = colors.clone();
        sorted.sort();
        let mut colex: Vec<Vec<usize>> = Subsets::new(n, r).collect();
        colex.sort_by_key(|s| s.iter().fold(0u64, |m, &e| m | 1 << e));
        let mut best: Option<String> = None;
        let mut perm: Vec<usize> = (0..n).collect();
        permutations(&mut perm, 0, &mut |p| {
            if (0..n).any(|k| colors[p[k]] != sorted[k]) {
                return;
            }
            for re in 0u64..(1 << n) {
                for global in [Sign::Plus, Sign::Minus] {
                    let s: String = colex
                        .iter()
                        .map(|b| {
                            let tuple: Vec<usize> = b.iter().map(|&l| p[l]).collect();
                            let flips = b.iter().filter(|&&l| re >> l & 1 == 1).count();
                            (global * Sign::parity(flips) * chi.eval(&tuple)).to_char()
                        })
                        .collect();
                    if best.as_ref().is_none_or(|b| s < *b) {
                        best = Some(s);
                    }
                }
            }
        });
        format!("{r} {n}:{}", best.unwrap())
    }

    fn permutations(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
        if k == p.len() {
            visit(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permutations(p, k + 1, visit);
            p.swap(k, i);
        }
    }

    #[test]
    fn matches_exhaustive_minimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cases = [cyclic(2, 4), cyclic(3, 5), cyclic(3, 6), random_uniform(&mut rng, 3, 6), random_uniform(&mut rng, 2, 5)];
        for om in cases {
            assert_eq!(canonical_form(&om).unwrap().key, brute_force_key(&om));
        }
    }

    #[test]
    fn orbit_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for (r, n) in [(3, 7), (4, 8), (4, 9)] {
            let om = random_uniform(&mut rng, r, n);
            let key = canonical_form(&om).unwrap();
            assert!(key.exact);
            for _ in 0..3 {
                let mut perm: Vec<usize> = (0..n).collect();
                perm.shuffle(&mut rng);
                let a = ElementSet(rng.gen_range(0..1u64 << n));
                let moved = om.relabel(&perm).reorient(a);
                assert_eq!(canonical_form(&moved).unwrap(), key);
            }
        }
    }

    #[test]
    fn cyclic_polytope_key_is_a_fixed_point() {
        let om = cyclic(4, 8);
        let key = canonical_form(&om).unwrap();
        let (head, body) = key.key.split_once(':').unwrap();
        assert_eq!(head, "4 8");
        // re-read the string as a colex-ordered chirotope and canonicalize again
        let mut colex: Vec<Vec<usize>> = Subsets::new(8, 4).collect();
        colex.sort_by_key(|s| s.iter().fold(0u64, |m, &e| m | 1 << e));
        let mut signs = vec![Sign::Zero; 70];
        let probe = om.chirotope().unwrap();
        for (b, c) in colex.iter().zip(body.chars()) {
            signs[probe.index_of(b)] = Sign::from_char(c).unwrap();
        }
        let again = OrientedMatroid::from_chirotope(Chirotope::new(4, 8, signs).unwrap()).unwrap();
        assert_eq!(canonical_form(&again).unwrap(), key);
    }

    #[test]
    fn cyclic_polytope_mutants_share_one_class() {
        let om = cyclic(4, 8);
        let certs = mutations(&om);
        let keys: std::collections::BTreeSet<String> =
            certs.iter().map(|c| canonical_form(&flip(&om, c).unwrap()).unwrap().key).collect();
        // the alternating matroid is symmetric under its dihedral-like action, so all its
        // mutants are isomorphic
        assert_eq!(keys.len(), 1);
        assert_ne!(keys.iter().next().unwrap(), &canonical_form(&om).unwrap().key);
    }

    #[test]
    fn large_ground_sets_are_flagged() {
        let om = cyclic(3, 10);
        let key = canonical_form(&om).unwrap();
        assert!(!key.exact);
        assert!(isomorphic(&om, &om).is_err());
    }
}
