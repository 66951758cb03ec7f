//! Topes, simplicial topes and mutations.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chirotope::{Chirotope, Subsets};
use crate::error::{Error, Result};
use crate::om::{OrientedMatroid, Provenance};
use crate::sign::{ElementSet, Sign, SignVector};

/// All topes, as the full-support members of the composition closure of the cocircuits.
pub fn topes(om: &OrientedMatroid) -> Vec<SignVector> {
    let live = om.ground().difference(om.loops());
    let cocircuits = om.cocircuits();
    let mut seen: BTreeSet<SignVector> = cocircuits.iter().copied().collect();
    let mut frontier: Vec<SignVector> = cocircuits.to_vec();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for x in &frontier {
            if x.support() == live {
                continue;
            }
            for c in cocircuits {
                let y = x.compose_unchecked(c);
                if y != *x && seen.insert(y) {
                    next.push(y);
                }
            }
        }
        frontier = next;
    }
    seen.into_iter().filter(|x| x.support() == live).collect()
}

/// Cocircuits `X` with `X <= t`.
pub fn adjacent_cocircuits(om: &OrientedMatroid, t: &SignVector) -> Vec<SignVector> {
    om.cocircuits().iter().filter(|x| x.conforms_to(t)).copied().collect()
}

/// A full-support sign vector is a tope iff its adjacent cocircuits compose back to it.
pub fn is_tope(om: &OrientedMatroid, t: &SignVector) -> bool {
    if t.len() != om.n() || t.support() != om.ground().difference(om.loops()) {
        return false;
    }
    let composed = adjacent_cocircuits(om, t)
        .iter()
        .fold(SignVector::zero(om.n()), |acc, x| acc.compose_unchecked(x));
    composed == *t
}

pub fn is_simplicial_tope(om: &OrientedMatroid, t: &SignVector) -> Result<bool> {
    if !is_tope(om, t) {
        return Err(Error::NotATope(t.to_string()));
    }
    Ok(adjacent_cocircuits(om, t).len() == om.rank())
}

/// A basis whose base cocircuits become pairwise conformal after choosing signs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MutationCertificate {
    pub basis: ElementSet,
    /// `(b, X)` with `z(X) = cl(B∖b)`, in increasing order of `b`.
    pub base_cocircuits: Vec<(usize, SignVector)>,
    pub tope: SignVector,
}

impl MutationCertificate {
    pub fn elements(&self) -> Vec<usize> {
        self.basis.to_vec()
    }

    /// The cocircuits of the tope pair: the base cocircuits and their negatives.
    pub fn cocircuits(&self) -> Vec<SignVector> {
        let mut out: Vec<SignVector> =
            self.base_cocircuits.iter().flat_map(|&(_, x)| [x, -x]).collect();
        out.sort();
        out
    }

    pub fn contains(&self, e: usize) -> bool {
        self.basis.contains(e)
    }

    /// The base cocircuit at `b`.
    pub fn cocircuit_at(&self, b: usize) -> Option<SignVector> {
        self.base_cocircuits.iter().find(|(e, _)| *e == b).map(|&(_, x)| x)
    }

    /// The same certificate in the frame of the antipodal tope.
    pub fn antipodal(&self) -> MutationCertificate {
        MutationCertificate {
            basis: self.basis,
            base_cocircuits: self.base_cocircuits.iter().map(|&(b, x)| (b, -x)).collect(),
            tope: -self.tope,
        }
    }

    /// The frame whose tope has sign `s` at `e`.
    pub fn oriented(&self, e: usize, s: Sign) -> MutationCertificate {
        if self.tope.get(e) == s {
            self.clone()
        } else {
            self.antipodal()
        }
    }
}

/// Base cocircuit `c*(b, B)`, signed so that its `b` entry is `+`.
pub fn base_cocircuit(om: &OrientedMatroid, basis: ElementSet, b: usize) -> Result<SignVector> {
    let h = om.closure(basis.without(b));
    let x = om.cocircuit_on(h).ok_or(Error::NotABasis(basis))?;
    Ok(if x.get(b) == Sign::Minus { -x } else { x })
}

pub fn mutation_from_basis(om: &OrientedMatroid, basis: ElementSet) -> Result<Option<MutationCertificate>> {
    if !basis.is_subset(om.ground()) || !om.is_basis(basis) {
        return Err(Error::NotABasis(basis));
    }
    let elems = basis.to_vec();
    let base: Vec<SignVector> =
        elems.iter().map(|&b| base_cocircuit(om, basis, b)).collect::<Result<_>>()?;
    let mut chosen: Vec<SignVector> = Vec::with_capacity(base.len());
    if !assign_signs(&base, &mut chosen) {
        return Ok(None);
    }
    let tope = chosen.iter().fold(SignVector::zero(om.n()), |acc, x| acc.compose_unchecked(x));
    Ok(Some(MutationCertificate { basis, base_cocircuits: elems.into_iter().zip(chosen).collect(), tope }))
}

/// Backtracking over signs; the first vector keeps its given sign.
fn assign_signs(base: &[SignVector], chosen: &mut Vec<SignVector>) -> bool {
    let i = chosen.len();
    if i == base.len() {
        return true;
    }
    let options: &[SignVector] = if i == 0 { &[base[0]] } else { &[base[i], -base[i]] };
    for &x in options {
        if chosen.iter().all(|y| y.conformal_unchecked(&x)) {
            chosen.push(x);
            if assign_signs(base, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// All bases, in lexicographic order.
pub fn bases(om: &OrientedMatroid) -> Vec<ElementSet> {
    match om.chirotope() {
        Some(chi) => chi.bases().collect(),
        None => Subsets::new(om.n(), om.rank())
            .map(ElementSet::from_elements)
            .filter(|&b| om.is_independent(b))
            .collect(),
    }
}

/// Every mutation, one certificate per basis, in lexicographic basis order.
pub fn mutations(om: &OrientedMatroid) -> Vec<MutationCertificate> {
    bases(om)
        .par_iter()
        .filter_map(|&b| mutation_from_basis(om, b).expect("enumerated bases are bases"))
        .collect()
}

/// Number of certificates whose basis contains each element.
pub fn adjacency_table(n: usize, certs: &[MutationCertificate]) -> Vec<usize> {
    let mut table = vec![0; n];
    for c in certs {
        for e in c.basis.iter() {
            table[e] += 1;
        }
    }
    table
}

pub fn adjacent_mutation_count(om: &OrientedMatroid, e: usize) -> Result<usize> {
    om.check_element(e)?;
    Ok(mutations(om).iter().filter(|c| c.contains(e)).count())
}

/// Minimum adjacency count over elements that are neither loops nor coloops.
pub fn l_statistic(om: &OrientedMatroid, table: &[usize]) -> Option<usize> {
    (0..om.n()).filter(|&e| !om.is_loop(e) && !om.is_coloop(e)).map(|e| table[e]).min()
}

/// Whether negating `χ(B)` yields a chirotope.
pub fn flip_validates(chi: &Chirotope, basis: ElementSet) -> bool {
    chi.is_basis(basis) && chi.negate_basis(basis).validate().ok
}

/// The mutant obtained by negating the chirotope on the certificate's basis.
pub fn flip(om: &OrientedMatroid, cert: &MutationCertificate) -> Result<OrientedMatroid> {
    let chi = om.require_chirotope()?;
    if !om.is_uniform() {
        return Err(Error::NotUniform);
    }
    match mutation_from_basis(om, cert.basis)? {
        Some(fresh) if fresh.tope == cert.tope || fresh.tope == -cert.tope => {}
        _ => return Err(Error::StaleCertificate(cert.basis)),
    }
    let flipped = chi.negate_basis(cert.basis);
    let report = flipped.validate();
    if !report.ok {
        return Err(Error::InvalidChirotope(report.violations[0].witness.clone()));
    }
    let labels = om.labels().map(|l| l.to_vec());
    Ok(OrientedMatroid::from_valid_chirotope(flipped, Provenance::Derived).with_labels(labels))
}

pub fn flip_basis(om: &OrientedMatroid, basis: ElementSet) -> Result<OrientedMatroid> {
    let cert = mutation_from_basis(om, basis)?.ok_or(Error::StaleCertificate(basis))?;
    flip(om, &cert)
}
