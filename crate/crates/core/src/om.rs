//! Oriented matroids represented by their cocircuit sets, with an optional chirotope.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chirotope::{binomial, sort_sign, Chirotope, Subsets, ValidationReport};
use crate::error::{Error, Result};
use crate::geometry::{chirotope_from_points, PointConfig, Scalar};
use crate::sign::{ElementSet, Sign, SignVector};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    FromPoints,
    FromChirotope,
    FromFile,
    Derived,
}

#[derive(Clone, Debug)]
pub struct OrientedMatroid {
    n: usize,
    rank: usize,
    cocircuits: Vec<SignVector>,
    chirotope: Option<Chirotope>,
    provenance: Provenance,
    labels: Option<Vec<String>>,
    hyperplanes: Vec<ElementSet>,
    by_zero: HashMap<ElementSet, SignVector>,
    uniform: bool,
}

impl PartialEq for OrientedMatroid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.rank == other.rank && self.cocircuits == other.cocircuits
    }
}

impl Eq for OrientedMatroid {}

/// Cocircuits read off a chirotope: `C_e = χ(e, A)` for every independent sorted (r-1)-set `A`.
pub fn cocircuits_from_chirotope(chi: &Chirotope) -> Vec<SignVector> {
    let (r, n) = (chi.rank(), chi.n());
    let mut out = BTreeSet::new();
    let mut tuple = vec![0usize; r];
    for a in Subsets::new(n, r - 1) {
        tuple[1..].copy_from_slice(&a);
        let mut c = SignVector::zero(n);
        for e in 0..n {
            tuple[0] = e;
            c.set(e, chi.eval(&tuple));
        }
        if !c.is_zero() {
            out.insert(c);
            out.insert(-c);
        }
    }
    out.into_iter().collect()
}

/// Exhaustive check of the cocircuit axioms: no zero vector, closure under negation,
/// incomparable supports and elimination.
pub fn validate_cocircuit_axioms(n: usize, cocircuits: &[SignVector]) -> ValidationReport {
    const MAX_WITNESSES: usize = 20;
    let mut report = ValidationReport { ok: true, violations: Vec::new() };
    if let Some(x) = cocircuits.iter().find(|x| x.len() != n) {
        report.push("length", format!("{x} has length {}, expected {n}", x.len()));
        return report;
    }
    let set: BTreeSet<SignVector> = cocircuits.iter().copied().collect();
    for x in &set {
        if x.is_zero() {
            report.push("C0", format!("{x}"));
        }
        if !set.contains(&-*x) {
            report.push("C1", format!("{x} without {}", -*x));
        }
    }
    let list: Vec<SignVector> = set.iter().copied().collect();
    for x in &list {
        for y in &list {
            if x != y && *x != -*y && x.support().is_subset(y.support()) {
                report.push("C2", format!("supp {x} within supp {y}"));
            }
        }
    }
    let elim: Vec<String> = list
        .par_iter()
        .flat_map_iter(|x| {
            let mut found = Vec::new();
            for y in &list {
                if *x == -*y {
                    continue;
                }
                let (pos, neg) = (x.positive().union(y.positive()), x.negative().union(y.negative()));
                for e in x.separation_unchecked(y).iter() {
                    let ok = list.iter().any(|z| {
                        z.get(e) == Sign::Zero && z.positive().is_subset(pos) && z.negative().is_subset(neg)
                    });
                    if !ok {
                        found.push(format!("X={x} Y={y} e={e}"));
                    }
                }
            }
            found
        })
        .collect();
    for w in elim.into_iter().take(MAX_WITNESSES) {
        report.push("C3", w);
    }
    report.violations.truncate(MAX_WITNESSES);
    report
}

impl OrientedMatroid {
    /// Validates `chi` and builds the oriented matroid it encodes.
    pub fn from_chirotope(chi: Chirotope) -> Result<Self> {
        let report = chi.validate();
        if !report.ok {
            return Err(Error::InvalidChirotope(report.violations[0].witness.clone()));
        }
        Ok(Self::from_valid_chirotope(chi, Provenance::FromChirotope))
    }

    pub(crate) fn from_valid_chirotope(chi: Chirotope, provenance: Provenance) -> Self {
        let cocircuits = cocircuits_from_chirotope(&chi);
        let (n, rank) = (chi.n(), chi.rank());
        let mut om = Self::assemble(n, cocircuits, provenance);
        debug_assert_eq!(om.rank, rank);
        om.rank = rank;
        om.uniform = chi.is_uniform();
        om.chirotope = Some(chi);
        om
    }

    pub fn from_points<T: Scalar>(config: &PointConfig<T>) -> Result<Self> {
        let chi = chirotope_from_points(config)?;
        Ok(Self::from_valid_chirotope(chi, Provenance::FromPoints))
    }

    /// Builds an oriented matroid from a negation-closed cocircuit set. The full axiom
    /// check is left to [`OrientedMatroid::validate`].
    pub fn from_cocircuits(n: usize, cocircuits: Vec<SignVector>, provenance: Provenance) -> Result<Self> {
        if let Some(x) = cocircuits.iter().find(|x| x.len() != n) {
            return Err(Error::LengthMismatch { left: x.len(), right: n });
        }
        let set: BTreeSet<SignVector> = cocircuits.into_iter().collect();
        if set.is_empty() {
            return Err(Error::InvalidCocircuits("empty cocircuit set".into()));
        }
        if set.iter().any(|x| x.is_zero()) {
            return Err(Error::InvalidCocircuits("zero vector among cocircuits".into()));
        }
        if let Some(x) = set.iter().find(|x| !set.contains(&-**x)) {
            return Err(Error::InvalidCocircuits(format!("{x} present without its negative")));
        }
        Ok(Self::assemble(n, set.into_iter().collect(), provenance))
    }

    fn assemble(n: usize, cocircuits: Vec<SignVector>, provenance: Provenance) -> Self {
        let mut by_zero = HashMap::new();
        for x in &cocircuits {
            by_zero.entry(x.zero_set()).or_insert_with(|| x.normalized());
        }
        let mut hyperplanes: Vec<ElementSet> = by_zero.keys().copied().collect();
        hyperplanes.sort();
        let mut om = OrientedMatroid {
            n,
            rank: 0,
            cocircuits,
            chirotope: None,
            provenance,
            labels: None,
            hyperplanes,
            by_zero,
            uniform: false,
        };
        om.rank = om.subset_rank(ElementSet::full(n));
        om.uniform = om.rank >= 1
            && om.hyperplanes.len() == binomial(n, om.rank - 1)
            && om.hyperplanes.iter().all(|h| h.len() == om.rank - 1);
        om
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn ground(&self) -> ElementSet {
        ElementSet::full(self.n)
    }

    pub fn cocircuits(&self) -> &[SignVector] {
        &self.cocircuits
    }

    pub fn chirotope(&self) -> Option<&Chirotope> {
        self.chirotope.as_ref()
    }

    pub fn require_chirotope(&self) -> Result<&Chirotope> {
        self.chirotope.as_ref().ok_or(Error::NoChirotope)
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn with_labels(mut self, labels: Option<Vec<String>>) -> Self {
        self.labels = labels.filter(|l| l.len() == self.n);
        self
    }

    pub fn label(&self, e: usize) -> String {
        match &self.labels {
            Some(l) => l[e].clone(),
            None => e.to_string(),
        }
    }

    /// Zero sets of the cocircuits, sorted.
    pub fn hyperplanes(&self) -> &[ElementSet] {
        &self.hyperplanes
    }

    /// The cocircuit with zero set `h` whose first nonzero entry is `+`.
    pub fn cocircuit_on(&self, h: ElementSet) -> Option<SignVector> {
        self.by_zero.get(&h).copied()
    }

    pub fn is_uniform(&self) -> bool {
        self.uniform
    }

    pub fn is_cocircuit(&self, x: &SignVector) -> bool {
        self.cocircuits.binary_search(x).is_ok()
    }

    /// Intersection of the hyperplanes containing `a`.
    pub fn closure(&self, a: ElementSet) -> ElementSet {
        self.hyperplanes
            .iter()
            .filter(|h| a.is_subset(**h))
            .fold(self.ground(), |acc, h| acc.intersection(*h))
    }

    pub fn subset_rank(&self, a: ElementSet) -> usize {
        if self.uniform {
            return a.len().min(self.rank);
        }
        let mut indep = ElementSet::EMPTY;
        let mut cl = self.closure(indep);
        for e in a.iter() {
            if !cl.contains(e) {
                indep.insert(e);
                cl = self.closure(indep);
            }
        }
        indep.len()
    }

    pub fn is_independent(&self, a: ElementSet) -> bool {
        self.subset_rank(a) == a.len()
    }

    pub fn is_basis(&self, b: ElementSet) -> bool {
        b.len() == self.rank && self.is_independent(b)
    }

    pub fn loops(&self) -> ElementSet {
        self.closure(ElementSet::EMPTY)
    }

    pub fn is_loop(&self, e: usize) -> bool {
        self.loops().contains(e)
    }

    pub fn is_coloop(&self, e: usize) -> bool {
        self.by_zero.contains_key(&self.ground().without(e))
    }

    pub fn validate(&self) -> ValidationReport {
        let mut report = validate_cocircuit_axioms(self.n, &self.cocircuits);
        if let Some(chi) = &self.chirotope {
            let chi_report = chi.validate();
            report.violations.extend(chi_report.violations);
            if cocircuits_from_chirotope(chi) != self.cocircuits {
                report.push("consistency", "chirotope and cocircuit set disagree".into());
            }
            report.ok = report.violations.is_empty();
        }
        report
    }

    pub fn check_element(&self, e: usize) -> Result<()> {
        if e >= self.n {
            return Err(Error::ElementOutOfRange(e));
        }
        Ok(())
    }

    /// Negates the coordinates in `a`.
    pub fn reorient(&self, a: ElementSet) -> Self {
        let cocircuits = self.cocircuits.iter().map(|x| x.reorient(a)).collect();
        self.rebuild(cocircuits, self.chirotope.as_ref().map(|c| c.reorient(a)))
    }

    /// Relabels element `e` as `perm[e]`.
    pub fn relabel(&self, perm: &[usize]) -> Self {
        let cocircuits = self.cocircuits.iter().map(|x| x.permute(perm)).collect();
        let mut out = self.rebuild(cocircuits, self.chirotope.as_ref().map(|c| c.relabel(perm)));
        if let Some(l) = &self.labels {
            let mut nl = l.clone();
            for e in 0..self.n {
                nl[perm[e]] = l[e].clone();
            }
            out.labels = Some(nl);
        }
        out
    }

    /// Same ground set and rank, new cocircuits.
    fn rebuild(&self, mut cocircuits: Vec<SignVector>, chirotope: Option<Chirotope>) -> Self {
        cocircuits.sort();
        let mut out = Self::assemble(self.n, cocircuits, self.provenance);
        out.chirotope = chirotope;
        out.labels = self.labels.clone();
        out
    }

    pub fn dual(&self) -> Result<Self> {
        if self.rank == self.n {
            return Err(Error::Precondition("dual of a free oriented matroid has rank 0".into()));
        }
        let out = match &self.chirotope {
            Some(chi) => Self::from_valid_chirotope(dual_chirotope(chi), Provenance::Derived),
            None => Self::assemble(self.n, self.circuits(), Provenance::Derived),
        };
        Ok(out.with_labels(self.labels.clone()))
    }

    /// Signed circuits, found as the support-minimal sign vectors orthogonal to every cocircuit.
    pub fn circuits(&self) -> Vec<SignVector> {
        let mut out = BTreeSet::new();
        for mask in 1u64..(1u64 << self.n) {
            let s = ElementSet(mask);
            if s.len() > self.rank + 1 || self.subset_rank(s) != s.len() - 1 {
                continue;
            }
            if s.iter().any(|e| self.subset_rank(s.without(e)) != s.len() - 1) {
                continue;
            }
            let elems = s.to_vec();
            for bits in 0u64..(1u64 << (elems.len() - 1)) {
                let mut x = SignVector::zero(self.n);
                for (i, &e) in elems.iter().enumerate() {
                    let minus = i > 0 && bits >> (i - 1) & 1 == 1;
                    x.set(e, if minus { Sign::Minus } else { Sign::Plus });
                }
                if self.cocircuits.iter().all(|y| orthogonal(&x, y)) {
                    out.insert(x);
                    out.insert(-x);
                }
            }
        }
        out.into_iter().collect()
    }

    /// Deletes `delete` and contracts `contract`; survivors keep their relative order.
    pub fn minor(&self, delete: ElementSet, contract: ElementSet) -> Result<Self> {
        if !delete.intersection(contract).is_empty() {
            return Err(Error::Precondition("deletion and contraction sets overlap".into()));
        }
        let ground = self.ground();
        if !delete.union(contract).is_subset(ground) {
            return Err(Error::ElementOutOfRange(delete.union(contract).difference(ground).min().unwrap_or(0)));
        }
        let keep = ground.difference(delete).difference(contract);
        if keep.is_empty() {
            return Err(Error::EmptyMinor);
        }
        let chirotope = self.chirotope.as_ref().and_then(|chi| self.minor_chirotope(chi, delete, contract));
        let out = match chirotope {
            Some(chi) => Self::from_valid_chirotope(chi, Provenance::Derived),
            None => {
                let cocircuits = self.minor_cocircuits(delete, contract);
                if cocircuits.is_empty() {
                    return Err(Error::Precondition("minor has rank 0".into()));
                }
                Self::assemble(keep.len(), cocircuits, Provenance::Derived)
            }
        };
        let labels = self.labels.as_ref().map(|l| keep.iter().map(|e| l[e].clone()).collect());
        Ok(out.with_labels(labels))
    }

    pub fn delete(&self, e: usize) -> Result<Self> {
        self.minor(ElementSet::singleton(e), ElementSet::EMPTY)
    }

    pub fn contract(&self, e: usize) -> Result<Self> {
        self.minor(ElementSet::EMPTY, ElementSet::singleton(e))
    }

    /// Minor computed on the cocircuit side only.
    pub fn minor_cocircuits(&self, delete: ElementSet, contract: ElementSet) -> Vec<SignVector> {
        let keep = self.ground().difference(delete).difference(contract);
        let restricted: BTreeSet<SignVector> = self
            .cocircuits
            .iter()
            .filter(|x| x.support().intersection(contract).is_empty())
            .map(|x| x.restrict(keep))
            .filter(|x| !x.is_zero())
            .collect();
        restricted
            .iter()
            .filter(|x| !restricted.iter().any(|y| y.support() != x.support() && y.support().is_subset(x.support())))
            .copied()
            .collect()
    }

    fn minor_chirotope(&self, chi: &Chirotope, delete: ElementSet, contract: ElementSet) -> Option<Chirotope> {
        let mut basis = Vec::new();
        let mut indep = ElementSet::EMPTY;
        for e in contract.iter() {
            if self.is_independent(indep.with(e)) {
                indep.insert(e);
                basis.push(e);
            }
        }
        let rank = self.rank - basis.len();
        let keep = self.ground().difference(delete).difference(contract);
        if rank == 0 || self.subset_rank(keep.union(indep)) != self.rank {
            return None;
        }
        let kept = keep.to_vec();
        let mut tuple = vec![0usize; self.rank];
        tuple[rank..].copy_from_slice(&basis);
        let signs = Subsets::new(kept.len(), rank)
            .map(|lambda| {
                for (i, &j) in lambda.iter().enumerate() {
                    tuple[i] = kept[j];
                }
                chi.eval(&tuple)
            })
            .collect();
        let minor = Chirotope::new(rank, kept.len(), signs).ok()?;
        if minor.signs().iter().all(|s| s.is_zero()) {
            return None;
        }
        Some(minor)
    }

    /// Disjoint union; elements of `other` follow those of `self`.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        let n = self.n + other.n;
        if n > crate::sign::MAX_ELEMENTS {
            return Err(Error::Precondition(format!("direct sum has {n} elements")));
        }
        let mut cocircuits: Vec<SignVector> = self.cocircuits.iter().map(|x| x.embed(n, 0)).collect();
        cocircuits.extend(other.cocircuits.iter().map(|x| x.embed(n, self.n)));
        cocircuits.sort();
        let labels = match (&self.labels, &other.labels) {
            (None, None) => None,
            _ => Some((0..self.n).map(|e| self.label(e)).chain((0..other.n).map(|e| other.label(e))).collect()),
        };
        Ok(Self::assemble(n, cocircuits, Provenance::Derived).with_labels(labels))
    }

    /// True iff `e` is not a loop and lies in no hyperplane spanned by the other elements.
    pub fn is_general_position(&self, e: usize) -> Result<bool> {
        self.check_element(e)?;
        if self.is_loop(e) {
            return Ok(false);
        }
        Ok(self
            .hyperplanes
            .iter()
            .filter(|h| h.contains(e))
            .all(|h| self.subset_rank(h.without(e)) < self.rank - 1))
    }

    /// Elements whose sign relation to `f` is constant over all cocircuits supported on both.
    /// Pairs that are never simultaneously nonzero are not reported.
    pub fn inseparable_partners(&self, f: usize) -> Result<Vec<(usize, Inseparability)>> {
        self.check_element(f)?;
        if self.is_loop(f) {
            return Err(Error::Precondition(format!("element {f} is a loop")));
        }
        let mut out = Vec::new();
        for g in (0..self.n).filter(|&g| g != f) {
            let (mut same, mut opposite) = (false, false);
            for x in &self.cocircuits {
                match (x.get(f), x.get(g)) {
                    (Sign::Zero, _) | (_, Sign::Zero) => {}
                    (a, b) if a == b => same = true,
                    _ => opposite = true,
                }
            }
            match (same, opposite) {
                (true, false) => out.push((g, Inseparability::Contravariant)),
                (false, true) => out.push((g, Inseparability::Covariant)),
                _ => {}
            }
        }
        Ok(out)
    }

    /// Searches for a `U(2,4)` minor, optionally required to contain `through`.
    pub fn exists_u24_minor(&self, through: Option<usize>) -> Result<bool> {
        if let Some(e) = through {
            self.check_element(e)?;
        }
        if self.rank < 2 || self.n < 4 {
            return Ok(false);
        }
        for s in Subsets::new(self.n, 4) {
            let s_set = ElementSet::from_elements(s.iter().copied());
            if through.is_some_and(|e| !s_set.contains(e)) {
                continue;
            }
            let rest = self.ground().difference(s_set).to_vec();
            for k in 0..=(self.rank - 2).min(rest.len()) {
                for c in Subsets::new(rest.len(), k) {
                    let c_set = ElementSet::from_elements(c.iter().map(|&i| rest[i]));
                    if !self.is_independent(c_set) || self.subset_rank(c_set.union(s_set)) != k + 2 {
                        continue;
                    }
                    let pairs_free = Subsets::new(4, 2)
                        .all(|p| self.subset_rank(c_set.with(s[p[0]]).with(s[p[1]])) == k + 2);
                    if pairs_free {
                        return Ok(true);
                    }
                }
            }
        }
        Ok(false)
    }

    /// Recovers a chirotope (up to global sign) from the cocircuits by walking basis exchanges.
    pub fn chirotope_from_cocircuits(&self) -> Result<Chirotope> {
        let (n, r) = (self.n, self.rank);
        let len = binomial(n, r);
        let mut signs: Vec<Option<Sign>> = vec![None; len];
        let probe = Chirotope::new(r, n, vec![Sign::Zero; len])?;
        let mut start = ElementSet::EMPTY;
        for e in 0..n {
            if self.is_independent(start.with(e)) {
                start.insert(e);
            }
        }
        signs[probe.index_of(&start.to_vec())] = Some(Sign::Plus);
        let mut queue = VecDeque::from([start]);
        while let Some(b) = queue.pop_front() {
            let chi_b = signs[probe.index_of(&b.to_vec())].expect("queued bases are signed");
            for out_e in b.iter() {
                let a = b.without(out_e);
                let h = self.closure(a);
                let c = self.cocircuit_on(h).ok_or_else(|| {
                    Error::InvalidCocircuits(format!("{a:?} does not span a cocircuit hyperplane"))
                })?;
                let mut tuple: Vec<usize> = std::iter::once(out_e).chain(a.iter()).collect();
                let chi_out = sort_sign(&mut tuple.clone()) * chi_b;
                for in_e in (0..n).filter(|&e| !h.contains(e)) {
                    if in_e == out_e {
                        continue;
                    }
                    let chi_in = chi_out * c.get(out_e) * c.get(in_e);
                    tuple[0] = in_e;
                    let mut sorted = tuple.clone();
                    let s = sort_sign(&mut sorted) * chi_in;
                    let idx = probe.index_of(&sorted);
                    match signs[idx] {
                        None => {
                            signs[idx] = Some(s);
                            queue.push_back(ElementSet::from_elements(sorted));
                        }
                        Some(prev) if prev != s => {
                            return Err(Error::InvalidCocircuits(format!(
                                "inconsistent basis orientation at {:?}",
                                ElementSet::from_elements(sorted)
                            )))
                        }
                        _ => {}
                    }
                }
            }
        }
        let chi = Chirotope::new(r, n, signs.into_iter().map(|s| s.unwrap_or(Sign::Zero)).collect())?;
        if cocircuits_from_chirotope(&chi) != self.cocircuits {
            return Err(Error::InvalidCocircuits("cocircuits are not those of any chirotope".into()));
        }
        Ok(chi)
    }

    /// Attaches a chirotope recovered from the cocircuits when none is present.
    pub fn with_recovered_chirotope(mut self) -> Result<Self> {
        if self.chirotope.is_none() {
            let chi = self.chirotope_from_cocircuits()?;
            self.uniform = chi.is_uniform();
            self.chirotope = Some(chi);
        }
        Ok(self)
    }

    pub fn without_chirotope(mut self) -> Self {
        self.chirotope = None;
        self
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inseparability {
    /// Cocircuit signs on the pair always agree.
    Contravariant,
    /// Cocircuit signs on the pair are always opposite.
    Covariant,
}

pub fn orthogonal(x: &SignVector, y: &SignVector) -> bool {
    let same = x.positive().intersection(y.positive()).union(x.negative().intersection(y.negative()));
    let opposite = x.separation_unchecked(y);
    same.is_empty() == opposite.is_empty()
}

/// `χ*(E∖B) = sign(B, E∖B) · χ(B)`.
pub fn dual_chirotope(chi: &Chirotope) -> Chirotope {
    let (n, r) = (chi.n(), chi.rank());
    let signs = Subsets::new(n, n - r)
        .map(|comp| {
            let b: Vec<usize> = (0..n).filter(|e| !comp.contains(e)).collect();
            let mut perm: Vec<usize> = b.iter().chain(comp.iter()).copied().collect();
            let s = sort_sign(&mut perm);
            s * chi.eval(&b)
        })
        .collect();
    Chirotope::new(n - r, n, signs).expect("dual has the right shape")
}
