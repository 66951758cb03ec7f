//! Chirotopes stored as one sign per lexicographically ordered r-subset.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sign::{ElementSet, Sign};

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Sorted `k`-subsets of `0..n` in lexicographic order.
pub struct Subsets {
    n: usize,
    cur: Option<Vec<usize>>,
}

impl Subsets {
    pub fn new(n: usize, k: usize) -> Subsets {
        let cur = if k <= n { Some((0..k).collect()) } else { None };
        Subsets { n, cur }
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.cur.take()?;
        let k = out.len();
        let mut next = out.clone();
        let mut i = k;
        while i > 0 {
            i -= 1;
            if next[i] < self.n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                self.cur = Some(next);
                return Some(out);
            }
        }
        Some(out)
    }
}

/// Sign of the permutation that sorts `elems`, or `Zero` on a repeated entry.
pub fn sort_sign(elems: &mut [usize]) -> Sign {
    let mut s = Sign::Plus;
    for i in 1..elems.len() {
        let mut j = i;
        while j > 0 && elems[j - 1] > elems[j] {
            elems.swap(j - 1, j);
            s = -s;
            j -= 1;
        }
        if j > 0 && elems[j - 1] == elems[j] {
            return Sign::Zero;
        }
    }
    s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: String,
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn from_violations(violations: Vec<Violation>) -> ValidationReport {
        ValidationReport { ok: violations.is_empty(), violations }
    }

    pub(crate) fn push(&mut self, axiom: &str, witness: String) {
        self.violations.push(Violation { axiom: axiom.to_string(), witness });
        self.ok = false;
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Chirotope {
    rank: usize,
    n: usize,
    signs: Vec<Sign>,
}

impl Chirotope {
    pub fn new(rank: usize, n: usize, signs: Vec<Sign>) -> Result<Chirotope> {
        if rank == 0 || rank > n {
            return Err(Error::InvalidChirotope(format!("rank {rank} on {n} elements")));
        }
        if n > crate::sign::MAX_ELEMENTS {
            return Err(Error::InvalidChirotope(format!("{n} elements exceeds the supported maximum")));
        }
        let expected = binomial(n, rank);
        if signs.len() != expected {
            return Err(Error::InvalidChirotope(format!("expected {expected} basis signs, found {}", signs.len())));
        }
        Ok(Chirotope { rank, n, signs })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    /// Lexicographic position of a sorted r-subset.
    pub fn index_of(&self, sorted: &[usize]) -> usize {
        let (n, k) = (self.n, sorted.len());
        let colex: usize = sorted.iter().enumerate().map(|(i, &a)| binomial(n - 1 - a, k - i)).sum();
        binomial(n, k) - 1 - colex
    }

    pub fn basis_sign(&self, b: ElementSet) -> Sign {
        self.signs[self.index_of(&b.to_vec())]
    }

    /// `χ` on an ordered tuple, extended alternatingly.
    pub fn eval(&self, tuple: &[usize]) -> Sign {
        debug_assert_eq!(tuple.len(), self.rank);
        let mut t = tuple.to_vec();
        let s = sort_sign(&mut t);
        if s.is_zero() {
            return Sign::Zero;
        }
        s * self.signs[self.index_of(&t)]
    }

    pub fn is_uniform(&self) -> bool {
        self.signs.iter().all(|s| !s.is_zero())
    }

    pub fn is_basis(&self, b: ElementSet) -> bool {
        b.len() == self.rank && !self.basis_sign(b).is_zero()
    }

    pub fn bases(&self) -> impl Iterator<Item = ElementSet> + '_ {
        Subsets::new(self.n, self.rank)
            .zip(self.signs.iter())
            .filter(|(_, s)| !s.is_zero())
            .map(|(b, _)| ElementSet::from_elements(b))
    }

    pub fn negate_basis(&self, b: ElementSet) -> Chirotope {
        let mut out = self.clone();
        let i = self.index_of(&b.to_vec());
        out.signs[i] = -out.signs[i];
        out
    }

    pub fn negated(&self) -> Chirotope {
        Chirotope { rank: self.rank, n: self.n, signs: self.signs.iter().map(|&s| -s).collect() }
    }

    /// `χ(B)` multiplied by `(-1)^{|B ∩ A|}`.
    pub fn reorient(&self, a: ElementSet) -> Chirotope {
        let signs = Subsets::new(self.n, self.rank)
            .zip(&self.signs)
            .map(|(b, &s)| s * Sign::parity(b.iter().filter(|&&e| a.contains(e)).count()))
            .collect();
        Chirotope { rank: self.rank, n: self.n, signs }
    }

    /// Relabels element `e` as `perm[e]`.
    pub fn relabel(&self, perm: &[usize]) -> Chirotope {
        let mut signs = vec![Sign::Zero; self.signs.len()];
        for (b, &s) in Subsets::new(self.n, self.rank).zip(&self.signs) {
            let mut img: Vec<usize> = b.iter().map(|&e| perm[e]).collect();
            let p = sort_sign(&mut img);
            signs[self.index_of(&img)] = p * s;
        }
        Chirotope { rank: self.rank, n: self.n, signs }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport { ok: true, violations: Vec::new() };
        if self.signs.iter().all(|s| s.is_zero()) {
            report.push("nonzero", "every basis sign is 0".into());
            return report;
        }
        if self.rank >= 2 {
            self.check_grassmann_plucker(&mut report);
        }
        if !self.is_uniform() {
            self.check_basis_exchange(&mut report);
        }
        report
    }

    fn check_grassmann_plucker(&self, report: &mut ValidationReport) {
        let r = self.rank;
        let mut buf = vec![0usize; r];
        for lambda in Subsets::new(self.n, r - 2) {
            let rest: Vec<usize> = (0..self.n).filter(|e| !lambda.contains(e)).collect();
            buf[..r - 2].copy_from_slice(&lambda);
            let mut chi = |x: usize, y: usize| {
                buf[r - 2] = x;
                buf[r - 1] = y;
                self.eval(&buf)
            };
            for q in Subsets::new(rest.len(), 4) {
                let (a, b, c, d) = (rest[q[0]], rest[q[1]], rest[q[2]], rest[q[3]]);
                let terms = [chi(a, b) * chi(c, d), -(chi(a, c) * chi(b, d)), chi(a, d) * chi(b, c)];
                let has_plus = terms.contains(&Sign::Plus);
                let has_minus = terms.contains(&Sign::Minus);
                if has_plus != has_minus {
                    report.push("grassmann-plucker", format!("lambda={lambda:?} tuple=({a},{b},{c},{d})"));
                }
            }
        }
    }

    fn check_basis_exchange(&self, report: &mut ValidationReport) {
        let bases: Vec<ElementSet> = self.bases().collect();
        for &b1 in &bases {
            for &b2 in &bases {
                for x in b1.difference(b2).iter() {
                    let ok = b2
                        .difference(b1)
                        .iter()
                        .any(|y| !self.basis_sign(b1.without(x).with(y)).is_zero());
                    if !ok {
                        report.push("basis-exchange", format!("{b1:?} {b2:?} element {x}"));
                        return;
                    }
                }
            }
        }
    }

    /// Parses the two-line `.chi` format.
    pub fn parse(text: &str) -> Result<Chirotope> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty chirotope file".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header token {t:?}"))))
            .collect::<Result<_>>()?;
        let [r, n] = nums[..] else {
            return Err(Error::Parse(format!("header must be \"r n\", found {header:?}")));
        };
        let body: String = lines.collect();
        let signs = body
            .chars()
            .map(|c| Sign::from_char(c).ok_or_else(|| Error::Parse(format!("bad sign character {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if (1..=n).contains(&r) && n <= crate::sign::MAX_ELEMENTS && signs.len() != binomial(n, r) {
            return Err(Error::Parse(format!("expected {} basis signs, found {}", binomial(n, r), signs.len())));
        }
        Chirotope::new(r, n, signs)
    }

    pub fn sign_string(&self) -> String {
        self.signs.iter().map(|s| s.to_char()).collect()
    }
}

impl fmt::Display for Chirotope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rank, self.n)?;
        writeln!(f, "{}", self.sign_string())
    }
}

impl fmt::Debug for Chirotope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Chirotope(r={}, n={}, {})", self.rank, self.n, self.sign_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::chirotope_from_points;
    use crate::IntConfig;

    fn chi(r: usize, n: usize, s: &str) -> Chirotope {
        Chirotope::parse(&format!("{r} {n}\n{s}")).unwrap()
    }

    #[test]
    fn subsets_are_lexicographic_and_indexed() {
        let c = chi(3, 6, &"+".repeat(20));
        for (i, s) in Subsets::new(6, 3).enumerate() {
            assert_eq!(c.index_of(&s), i);
        }
        assert_eq!(Subsets::new(5, 2).count(), 10);
        assert_eq!(Subsets::new(4, 0).collect::<Vec<_>>(), vec![Vec::<usize>::new()]);
        assert_eq!(Subsets::new(2, 3).count(), 0);
    }

    #[test]
    fn alternating_evaluation() {
        let c = chi(2, 3, "+++");
        assert_eq!(c.eval(&[0, 1]), Sign::Plus);
        assert_eq!(c.eval(&[1, 0]), Sign::Minus);
        assert_eq!(c.eval(&[2, 2]), Sign::Zero);
    }

    #[test]
    fn points_on_a_line() {
        let cfg = IntConfig::new(2, vec![vec![1, 1], vec![1, 2], vec![1, 3]]).unwrap();
        assert_eq!(chirotope_from_points(&cfg).unwrap().sign_string(), "+++");
        let cfg = IntConfig::new(2, vec![vec![1, 1], vec![1, 1], vec![1, 3]]).unwrap();
        let c = chirotope_from_points(&cfg).unwrap();
        assert_eq!(c.sign_string(), "0++");
        assert!(!c.is_uniform());
    }

    #[test]
    fn moment_curve_is_alternating() {
        let rows = (1..=8i128).map(|t| vec![1, t, t * t, t * t * t]).collect();
        let c = chirotope_from_points(&IntConfig::new(4, rows).unwrap()).unwrap();
        assert_eq!(c.signs().len(), 70);
        assert!(c.signs().iter().all(|&s| s == Sign::Plus));
        assert!(c.validate().ok);
    }

    /// All rank-2 sign patterns on 4 elements that arise from vectors at distinct
    /// angles (multiples of 15 degrees), collected by brute force.
    fn realizable_rank2_patterns() -> std::collections::BTreeSet<String> {
        let dirs: Vec<(f64, f64)> = (0..24)
            .map(|k| {
                let t = k as f64 * std::f64::consts::PI / 12.0;
                (t.cos(), t.sin())
            })
            .collect();
        let mut out = std::collections::BTreeSet::new();
        for a in 0..24 {
            for b in 0..24 {
                for c in 0..24 {
                    for d in 0..24 {
                        let v = [dirs[a], dirs[b], dirs[c], dirs[d]];
                        let mut s = String::new();
                        let mut degenerate = false;
                        for p in Subsets::new(4, 2) {
                            let det = v[p[0]].0 * v[p[1]].1 - v[p[0]].1 * v[p[1]].0;
                            if det.abs() < 1e-9 {
                                degenerate = true;
                            }
                            s.push(if det > 0.0 { '+' } else { '-' });
                        }
                        if !degenerate {
                            out.insert(s);
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn grassmann_plucker_matches_rank2_realizability() {
        // In rank 2 every uniform chirotope is realizable, so the validator must accept
        // exactly the realized patterns.
        let realized = realizable_rank2_patterns();
        for bits in 0..64u32 {
            let s: String = (0..6).map(|i| if bits >> i & 1 == 1 { '-' } else { '+' }).collect();
            let ok = chi(2, 4, &s).validate().ok;
            assert_eq!(ok, realized.contains(&s), "pattern {s}");
        }
    }

    #[test]
    fn violating_pattern_is_witnessed() {
        // order 01 02 03 12 13 23; only 13 negative
        let report = chi(2, 4, "++++-+").validate();
        assert!(!report.ok);
        assert_eq!(report.violations[0].axiom, "grassmann-plucker");
        assert!(report.violations[0].witness.contains("(0,1,2,3)"));
    }

    #[test]
    fn zero_map_is_rejected() {
        let report = chi(2, 3, "000").validate();
        assert!(!report.ok);
        assert_eq!(report.violations[0].axiom, "nonzero");
    }

    #[test]
    fn non_matroid_support_is_rejected() {
        // bases {01, 23} only: exchange fails
        let report = chi(2, 4, "+0000+").validate();
        assert!(report.violations.iter().any(|v| v.axiom == "basis-exchange"));
    }

    #[test]
    fn relabel_and_reorient_preserve_validity() {
        let rows = (1..=6i128).map(|t| vec![1, t, t * t]).collect();
        let c = chirotope_from_points(&IntConfig::new(3, rows).unwrap()).unwrap();
        let p = c.relabel(&[3, 0, 5, 1, 4, 2]);
        assert!(p.validate().ok);
        assert_eq!(p.eval(&[3, 0, 5]), c.eval(&[0, 1, 2]));
        let q = c.reorient(ElementSet::from_elements([1, 4]));
        assert!(q.validate().ok);
        assert_eq!(q.eval(&[0, 1, 2]), -c.eval(&[0, 1, 2]));
        assert_eq!(q.eval(&[1, 3, 4]), c.eval(&[1, 3, 4]));
    }
}
