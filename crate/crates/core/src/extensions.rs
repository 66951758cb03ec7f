//! Single-element extensions: lexicographic extensions by chirotope and by localization,
//! perturbation, and the constructions that combine extensions with mutation flips.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::chirotope::{Chirotope, Subsets};
use crate::error::{Error, Result};
use crate::faces::{adjacent_cocircuits, flip_basis, is_tope, mutation_from_basis, mutations, MutationCertificate};
use crate::om::{Inseparability, OrientedMatroid, Provenance};
use crate::programs::{is_euclidean_om, Program, ProgramVerdict};
use crate::sign::{ElementSet, Sign, SignVector};

/// The signed priority list `[e_1^α_1, …, e_k^α_k]` of a lexicographic extension.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LexExtensionSpec {
    entries: Vec<(usize, Sign)>,
}

impl LexExtensionSpec {
    pub fn new(entries: Vec<(usize, Sign)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidSpec("empty specification".into()));
        }
        let mut seen = ElementSet::default();
        for &(e, a) in &entries {
            if a == Sign::Zero {
                return Err(Error::InvalidSpec(format!("element {e} has sign 0")));
            }
            if seen.contains(e) {
                return Err(Error::InvalidSpec(format!("element {e} repeated")));
            }
            seen.insert(e);
        }
        Ok(LexExtensionSpec { entries })
    }

    /// All signs `+`.
    pub fn positive(elements: &[usize]) -> Result<Self> {
        Self::new(elements.iter().map(|&e| (e, Sign::Plus)).collect())
    }

    pub fn entries(&self) -> &[(usize, Sign)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn head(&self) -> usize {
        self.entries[0].0
    }

    pub fn elements(&self) -> ElementSet {
        self.entries.iter().map(|&(e, _)| e).collect()
    }

    /// `σ(X) = α_i X_{e_i}` for the first `i` with `X_{e_i} ≠ 0`.
    pub fn localize(&self, x: &SignVector) -> Sign {
        self.entries
            .iter()
            .map(|&(e, a)| a * x.get(e))
            .find(|s| *s != Sign::Zero)
            .unwrap_or(Sign::Zero)
    }

    pub fn check(&self, om: &OrientedMatroid) -> Result<()> {
        for &(e, _) in &self.entries {
            om.check_element(e)?;
        }
        if self.len() > om.rank() {
            return Err(Error::InvalidSpec(format!("{} entries exceed rank {}", self.len(), om.rank())));
        }
        if !om.is_independent(self.elements()) {
            return Err(Error::InvalidSpec(format!("elements of {self} are dependent")));
        }
        Ok(())
    }
}

impl fmt::Display for LexExtensionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|&(e, a)| format!("{e}:{}", a.to_char())).collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for LexExtensionSpec {
    type Err = Error;

    /// Parses `"f:+,g:-,3:-"` with numeric elements.
    fn from_str(s: &str) -> Result<Self> {
        let entries = s
            .split(',')
            .map(|part| {
                let (e, a) = part
                    .trim()
                    .split_once(':')
                    .ok_or_else(|| Error::Parse(format!("expected element:sign, found {part:?}")))?;
                let e: usize = e.trim().parse().map_err(|_| Error::Parse(format!("bad element {e:?}")))?;
                let mut chars = a.trim().chars();
                let sign = match (chars.next().and_then(Sign::from_char), chars.next()) {
                    (Some(s), None) if s != Sign::Zero => s,
                    _ => return Err(Error::Parse(format!("bad sign {a:?}"))),
                };
                Ok((e, sign))
            })
            .collect::<Result<Vec<_>>>()?;
        LexExtensionSpec::new(entries)
    }
}

impl Serialize for LexExtensionSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for LexExtensionSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

fn extended_labels(om: &OrientedMatroid, name: String) -> Option<Vec<String>> {
    om.labels().map(|l| {
        let mut l = l.to_vec();
        l.push(name);
        l
    })
}

/// The extension `O ∪ p` (with `p` appended) of a localization `σ` on the cocircuits.
///
/// Old cocircuits get `X_p = σ(X)`. New cocircuits with `p = 0` sit on the edges of the
/// cocircuit graph whose endpoints have opposite `σ`; each such edge `X ∘ Y` yields one.
pub fn extend_by_localization(om: &OrientedMatroid, sigma: &dyn Fn(&SignVector) -> Sign) -> Result<OrientedMatroid> {
    let r = om.rank();
    let values: Vec<(SignVector, Sign)> = om.cocircuits().iter().map(|x| (*x, sigma(x))).collect();
    for (x, s) in &values {
        if sigma(&-*x) != -*s {
            return Err(Error::InvalidSpec(format!("localization is not odd at {x}")));
        }
    }
    let mut out: BTreeSet<SignVector> = values.iter().map(|(x, s)| x.extend(*s)).collect();
    let plus: Vec<&SignVector> = values.iter().filter(|v| v.1 == Sign::Plus).map(|v| &v.0).collect();
    let minus: Vec<&SignVector> = values.iter().filter(|v| v.1 == Sign::Minus).map(|v| &v.0).collect();
    for x in &plus {
        for y in &minus {
            if **x != -**y
                && x.conformal_unchecked(y)
                && om.subset_rank(x.zero_set().intersection(y.zero_set())) + 2 == r
            {
                out.insert(x.compose_unchecked(y).extend(Sign::Zero));
            }
        }
    }
    let ext = OrientedMatroid::from_cocircuits(om.n() + 1, out.into_iter().collect(), Provenance::Derived)?;
    if ext.rank() != r {
        return Err(Error::InvalidCocircuits(format!("extension has rank {} instead of {r}", ext.rank())));
    }
    Ok(ext.with_labels(extended_labels(om, format!("p{}", om.n()))))
}

pub fn lex_extend_localization(om: &OrientedMatroid, spec: &LexExtensionSpec) -> Result<OrientedMatroid> {
    spec.check(om)?;
    let ext = extend_by_localization(om, &|x| spec.localize(x))?;
    Ok(ext.with_labels(extended_labels(om, format!("{}'", om.label(spec.head())))))
}

/// `χ'(λ, p)` is the first nonzero `α_i χ(λ, e_i)`; requires a full-length spec.
pub fn lex_extend_chirotope(om: &OrientedMatroid, spec: &LexExtensionSpec) -> Result<OrientedMatroid> {
    spec.check(om)?;
    let chi = om.require_chirotope()?;
    let (n, r) = (om.n(), om.rank());
    if spec.len() != r {
        return Err(Error::InvalidSpec(format!("the chirotope path needs {r} entries, found {}", spec.len())));
    }
    let mut tuple = Vec::with_capacity(r);
    let signs: Vec<Sign> = Subsets::new(n + 1, r)
        .map(|b| {
            if *b.last().expect("rank is positive") != n {
                return chi.eval(&b);
            }
            spec.entries
                .iter()
                .map(|&(e, a)| {
                    tuple.clear();
                    tuple.extend_from_slice(&b[..r - 1]);
                    tuple.push(e);
                    a * chi.eval(&tuple)
                })
                .find(|s| *s != Sign::Zero)
                .unwrap_or(Sign::Zero)
        })
        .collect();
    let ext = OrientedMatroid::from_valid_chirotope(Chirotope::new(r, n + 1, signs)?, Provenance::Derived);
    Ok(ext.with_labels(extended_labels(om, format!("{}'", om.label(spec.head())))))
}

/// The chirotope path when a chirotope is known and the spec is full, else localization.
pub fn lex_extend(om: &OrientedMatroid, spec: &LexExtensionSpec) -> Result<OrientedMatroid> {
    if om.chirotope().is_some() && spec.len() == om.rank() {
        lex_extend_chirotope(om, spec)
    } else {
        lex_extend_localization(om, spec)
    }
}

/// `O ∖ e` together with the localization of `e` on its cocircuits.
pub fn localization_of(om_ext: &OrientedMatroid, e: usize) -> Result<(OrientedMatroid, HashMap<SignVector, Sign>)> {
    om_ext.check_element(e)?;
    let base = om_ext.delete(e)?;
    let rest = om_ext.ground().without(e);
    let mut sigma = HashMap::new();
    for z in om_ext.cocircuits() {
        let x = z.restrict(rest);
        if base.is_cocircuit(&x) {
            sigma.insert(x, z.get(e));
        }
    }
    if sigma.len() != base.cocircuits().len() {
        return Err(Error::Verification("some cocircuit of the deletion has no lift".into()));
    }
    Ok((base, sigma))
}

/// Rebuilds `O ∪ e` after setting the localization of `x` (a cocircuit of `om_ext` that
/// survives deleting `e`) to `value`, and of `-x` to `-value`.
pub fn relocalize(om_ext: &OrientedMatroid, e: usize, x: &SignVector, value: Sign) -> Result<OrientedMatroid> {
    let (base, mut sigma) = localization_of(om_ext, e)?;
    let rest = om_ext.ground().without(e);
    let key = x.restrict(rest);
    if !om_ext.is_cocircuit(x) || !sigma.contains_key(&key) {
        return Err(Error::Precondition(format!("{x} is not a cocircuit surviving the deletion of {e}")));
    }
    sigma.insert(key, value);
    sigma.insert(-key, -value);
    let ext = extend_by_localization(&base, &|y| sigma[y])?;
    let report = ext.validate();
    if !report.ok {
        return Err(Error::InvalidCocircuits(format!(
            "relocalized extension violates {}: {}",
            report.violations[0].axiom, report.violations[0].witness
        )));
    }
    // move the new element back to position e
    let last = om_ext.n() - 1;
    let perm: Vec<usize> = (0..=last).map(|j| if j == last { e } else if j < e { j } else { j + 1 }).collect();
    Ok(ext.relabel(&perm).with_labels(om_ext.labels().map(<[String]>::to_vec)))
}

/// Moves `e` off the vertex `x`: `X_e` becomes `-` and `(-X)_e` becomes `+`.
pub fn perturb_extension(om_ext: &OrientedMatroid, x: &SignVector, e: usize) -> Result<OrientedMatroid> {
    om_ext.check_element(e)?;
    if x.get(e) != Sign::Zero {
        return Err(Error::Precondition(format!("{x} does not vanish on {e}")));
    }
    relocalize(om_ext, e, x, Sign::Minus)
}

fn pair_alpha(om: &OrientedMatroid, f: usize, f2: usize) -> Result<Sign> {
    match om.inseparable_partners(f)?.into_iter().find(|&(g, _)| g == f2) {
        Some((_, Inseparability::Contravariant)) => Ok(Sign::Plus),
        Some((_, Inseparability::Covariant)) => Ok(Sign::Minus),
        None => Err(Error::Precondition(format!("{f} and {f2} are not inseparable"))),
    }
}

/// The neighbour `Y` of `X` across the inseparable pair `(f, f2)`.
pub fn corresponding_cocircuit(om: &OrientedMatroid, x: &SignVector, f: usize, f2: usize) -> Result<SignVector> {
    om.check_element(f)?;
    om.check_element(f2)?;
    if f == f2 || !om.is_cocircuit(x) {
        return Err(Error::Precondition("need a cocircuit and two distinct elements".into()));
    }
    if !om.is_general_position(f)? || !om.is_general_position(f2)? {
        return Err(Error::Precondition(format!("{f} and {f2} must both be in general position")));
    }
    let alpha = pair_alpha(om, f, f2)?;
    let (a, b) = match (x.get(f), x.get(f2)) {
        (s, Sign::Zero) if s != Sign::Zero => (f, f2),
        (Sign::Zero, s) if s != Sign::Zero => (f2, f),
        _ => return Err(Error::Precondition(format!("{x} must vanish on exactly one of {f}, {f2}"))),
    };
    let rest = om.ground().without(f).without(f2);
    let y = om
        .cocircuits()
        .iter()
        .find(|y| y.get(a) == Sign::Zero && y.get(b) != Sign::Zero && y.restrict(rest) == x.restrict(rest))
        .copied()
        .ok_or_else(|| Error::Verification(format!("no corresponding cocircuit for {x}")))?;
    if x.get(a) != -(alpha * y.get(b)) {
        return Err(Error::Verification(format!("{x} and {y} break the sign relation")));
    }
    Ok(y)
}

fn swap_perm(n: usize, a: usize, b: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.swap(a, b);
    p
}

fn same_after_swap(a: &OrientedMatroid, b: &OrientedMatroid, x: usize, y: usize) -> bool {
    a.relabel(&swap_perm(a.n(), x, y)).cocircuits() == b.cocircuits()
}

/// Whether `O[f^α1, e_2^α2, …]` and `O[f^α1, e_2^-α2, …]` are exchanged by swapping `f`
/// and `f'`, composed with reorienting both when `α1 = -`.
pub fn swap_isomorphism_check(om: &OrientedMatroid, spec: &LexExtensionSpec) -> Result<bool> {
    if !om.is_uniform() {
        return Err(Error::NotUniform);
    }
    let f = spec.head();
    om.check_element(f)?;
    if !om.is_general_position(f)? {
        return Err(Error::Precondition(format!("{f} is not in general position")));
    }
    let mut other = spec.entries.clone();
    for entry in other.iter_mut().skip(1) {
        entry.1 = -entry.1;
    }
    let o2 = lex_extend(om, spec)?;
    let o3 = lex_extend(om, &LexExtensionSpec::new(other)?)?;
    let p = om.n();
    let mut image = o3.relabel(&swap_perm(p + 1, f, p));
    if spec.entries[0].1 == Sign::Minus {
        image = image.reorient(ElementSet::from_elements([f, p]));
    }
    Ok(image.cocircuits() == o2.cocircuits())
}

#[derive(Clone, Debug)]
pub struct Creation {
    pub extended: OrientedMatroid,
    pub certificate: MutationCertificate,
}

/// For `[f^+, e_1^+, …, e_{r-1}^+]`, certifies the mutation `{f, f', e_1, …, e_{r-2}}`.
pub fn creation_check(om: &OrientedMatroid, spec: &LexExtensionSpec) -> Result<Creation> {
    if !om.is_uniform() {
        return Err(Error::NotUniform);
    }
    if spec.len() != om.rank() || spec.entries.iter().any(|&(_, a)| a != Sign::Plus) {
        return Err(Error::InvalidSpec(format!("expected {} positive entries, found {spec}", om.rank())));
    }
    let extended = lex_extend(om, spec)?;
    let basis: ElementSet = spec.entries[..om.rank() - 1].iter().map(|&(e, _)| e).chain([om.n()]).collect();
    let certificate = mutation_from_basis(&extended, basis)?
        .ok_or_else(|| Error::Verification(format!("{:?} is not a mutation of the extension", basis.to_vec())))?;
    Ok(Creation { extended, certificate })
}

/// Bases of mutations of `om` avoiding `f` that are no longer mutations of `ext`.
pub fn lost_non_adjacent_mutations(om: &OrientedMatroid, ext: &OrientedMatroid, f: usize) -> Result<Vec<ElementSet>> {
    let mut lost = Vec::new();
    for cert in mutations(om).iter().filter(|c| !c.contains(f)) {
        if mutation_from_basis(ext, cert.basis)?.is_none() {
            lost.push(cert.basis);
        }
    }
    Ok(lost)
}

/// Reorientation making the certificate's tope positive, and the reoriented matroid.
fn positive_frame(om: &OrientedMatroid, cert: &MutationCertificate) -> Result<(ElementSet, OrientedMatroid)> {
    let fresh = mutation_from_basis(om, cert.basis)?.ok_or(Error::StaleCertificate(cert.basis))?;
    if fresh.tope != cert.tope && fresh.tope != -cert.tope {
        return Err(Error::StaleCertificate(cert.basis));
    }
    let a = cert.tope.negative();
    Ok((a, om.reorient(a)))
}

#[derive(Clone, Debug, Serialize)]
pub struct Destruction {
    /// Reorientation applied before extending and undone afterwards.
    pub reorientation: ElementSet,
    #[serde(skip)]
    pub extended: OrientedMatroid,
    pub new_mutation: MutationCertificate,
    /// The old mutation's tope, on the side `p = -`.
    pub old_tope: SignVector,
    pub old_tope_adjacent: usize,
    /// Mutations adjacent to `f` but not `f'`, whose `f`-cocircuit has `f = +` and all of
    /// whose cocircuits have `g = +` (in the positive frame).
    pub stray_mutations: Vec<ElementSet>,
}

/// Extends by `[f^+, g^-, …]` in the frame where the mutation's tope is positive and checks
/// that `(M ∖ f) ∪ f'` becomes a mutation while the old tope stops being simplicial.
pub fn destruction_check(om: &OrientedMatroid, cert: &MutationCertificate, spec: &LexExtensionSpec) -> Result<Destruction> {
    if !om.is_uniform() {
        return Err(Error::NotUniform);
    }
    let entries = spec.entries();
    let (f, g) = match entries {
        [(f, Sign::Plus), (g, Sign::Minus), ..] => (*f, *g),
        _ => return Err(Error::InvalidSpec(format!("expected [f:+, g:-, …], found {spec}"))),
    };
    if !cert.contains(f) || cert.contains(g) {
        return Err(Error::Precondition(format!("need f = {f} in the mutation and g = {g} outside it")));
    }
    let (a, om_pos) = positive_frame(om, cert)?;
    let ext = lex_extend(&om_pos, spec)?;
    let p = om.n();
    let basis = cert.basis.without(f).with(p);
    let moved = mutation_from_basis(&ext, basis)?
        .ok_or_else(|| Error::Verification(format!("{:?} is not a mutation of the extension", basis.to_vec())))?;
    let old_tope = SignVector::from_parts(p + 1, ElementSet::full(p), ElementSet::singleton(p));
    if !is_tope(&ext, &old_tope) {
        return Err(Error::Verification("the old tope does not survive on the p = - side".into()));
    }
    let old_tope_adjacent = adjacent_cocircuits(&ext, &old_tope).len();
    let stray_mutations = mutations(&ext)
        .into_iter()
        .filter(|c| c.contains(f) && !c.contains(p))
        .filter(|c| {
            let c = c.oriented(f, Sign::Plus);
            c.cocircuits().iter().filter(|x| x.conforms_to(&c.tope)).all(|x| x.get(g) == Sign::Plus)
        })
        .map(|c| c.basis)
        .collect();
    let extended = ext.reorient(a);
    let new_mutation = mutation_from_basis(&extended, moved.basis)?.expect("reorientation keeps mutations");
    Ok(Destruction {
        reorientation: a,
        extended,
        new_mutation,
        old_tope: old_tope.reorient(a),
        old_tope_adjacent,
        stray_mutations,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct CommuteReport {
    pub isomorphic: bool,
    /// `M` and `M'` are mutations of both final matroids.
    pub mutations_present: bool,
}

/// Compares `O_{f',M'}` with `O_{M,f',M'}` under the exchange of `f` and `f'`.
///
/// `tail` lists `(e_3, α_3), …`; the second construction uses the negated signs.
pub fn flip_lex_commute_check(
    om: &OrientedMatroid,
    cert: &MutationCertificate,
    f: usize,
    g: usize,
    tail: &[(usize, Sign)],
) -> Result<CommuteReport> {
    if !om.is_uniform() {
        return Err(Error::NotUniform);
    }
    if !cert.contains(f) || cert.contains(g) {
        return Err(Error::Precondition(format!("need f = {f} in the mutation and g = {g} outside it")));
    }
    let (_, om_pos) = positive_frame(om, cert)?;
    let p = om.n();
    let m = cert.basis;
    let m2 = m.without(f).with(p);
    let spec = |sg: Sign, flip_tail: bool| {
        let mut entries = vec![(f, Sign::Plus), (g, sg)];
        entries.extend(tail.iter().map(|&(e, a)| (e, if flip_tail { -a } else { a })));
        LexExtensionSpec::new(entries)
    };
    let first = flip_basis(&lex_extend(&om_pos, &spec(Sign::Minus, false)?)?, m2)?;
    let flipped = flip_basis(&om_pos, m)?;
    let second = flip_basis(&lex_extend(&flipped, &spec(Sign::Plus, true)?)?, m2)?;
    let mut mutations_present = true;
    for o in [&first, &second] {
        for b in [m, m2] {
            mutations_present &= mutation_from_basis(o, b)?.is_some();
        }
    }
    Ok(CommuteReport { isomorphic: same_after_swap(&second, &first, f, p), mutations_present })
}

#[derive(Clone, Debug, Serialize)]
pub struct MandelConstruction {
    pub mutation: ElementSet,
    pub f: usize,
    pub g: usize,
    pub reorientation: ElementSet,
    /// The extension spec, in the positive frame of the mutation.
    pub spec: LexExtensionSpec,
    #[serde(skip)]
    pub extended: OrientedMatroid,
    /// Index of the new element `f'`.
    pub witness: usize,
    /// `(O', e, f')` for every `e`: all Euclidean.
    pub target_programs: Vec<ProgramVerdict>,
    /// `(O', f', e)` for every `e`, the orientation of the Mandel property.
    pub infinity_programs: Vec<ProgramVerdict>,
}

impl MandelConstruction {
    pub fn infinity_role_euclidean(&self) -> bool {
        self.infinity_programs.iter().all(|v| v.euclidean)
    }
}

/// Builds `O[f^+, g^-, e_3^-, …, e_r^-]`, flips `(f', e_2, …, e_r)` and verifies that every
/// `(O', e, f')` is Euclidean and that deleting `f'` gives back `om`.
///
/// `e_2` is the smallest element of the mutation other than `f`.
pub fn mandel_from_euclidean_mutant(
    om: &OrientedMatroid,
    cert: &MutationCertificate,
    f: usize,
    g: usize,
) -> Result<MandelConstruction> {
    if !om.is_uniform() {
        return Err(Error::NotUniform);
    }
    if !cert.contains(f) || cert.contains(g) {
        return Err(Error::Precondition(format!("need f = {f} in the mutation and g = {g} outside it")));
    }
    let (a, om_pos) = positive_frame(om, cert)?;
    if !is_euclidean_om(&flip_basis(om, cert.basis)?) {
        return Err(Error::Precondition("the mutant is not Euclidean".into()));
    }
    if !is_euclidean_om(&om.contract(f)?) {
        return Err(Error::Precondition(format!("the contraction by {f} is not Euclidean")));
    }
    let rest: Vec<usize> = cert.basis.without(f).iter().collect();
    let mut entries = vec![(f, Sign::Plus), (g, Sign::Minus)];
    entries.extend(rest[1..].iter().map(|&e| (e, Sign::Minus)));
    let spec = LexExtensionSpec::new(entries)?;
    let p = om.n();
    let extended = flip_basis(&lex_extend(&om_pos, &spec)?, cert.basis.without(f).with(p))?.reorient(a);
    if extended.delete(p)?.cocircuits() != om.cocircuits() {
        return Err(Error::Verification("deleting the new element does not recover the input".into()));
    }
    let graph = crate::programs::infinity_graph(&extended, p)?;
    let mut target_programs = Vec::with_capacity(p);
    let mut infinity_programs = Vec::with_capacity(p);
    for e in 0..p {
        let euclidean = Program::new(&extended, e, p)?.is_euclidean().euclidean;
        if !euclidean {
            return Err(Error::Verification(format!("program (O', {e}, {p}) has a directed cycle")));
        }
        target_programs.push(ProgramVerdict { g: e, f: p, euclidean });
        infinity_programs.push(ProgramVerdict { g: p, f: e, euclidean: graph.directed(e).verdict().euclidean });
    }
    Ok(MandelConstruction {
        mutation: cert.basis,
        f,
        g,
        reorientation: a,
        spec,
        extended,
        witness: p,
        target_programs,
        infinity_programs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::faces::flip;
    use crate::programs::{euclidean_all, Program};
    use crate::geometry::realizable_extend_through;
    use crate::IntConfig;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w3() -> OrientedMatroid {
        OrientedMatroid::from_chirotope(Chirotope::parse("2 3\n+++").unwrap()).unwrap()
    }

    fn sv(s: &str) -> SignVector {
        s.parse().unwrap()
    }

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

    fn spec(s: &str) -> LexExtensionSpec {
        s.parse().unwrap()
    }

    #[test]
    fn spec_parsing() {
        let s = spec("0:+, 3:-,2:+");
        assert_eq!(s.entries(), &[(0, Sign::Plus), (3, Sign::Minus), (2, Sign::Plus)]);
        assert_eq!(s.to_string(), "0:+,3:-,2:+");
        assert!("0:+,0:-".parse::<LexExtensionSpec>().is_err());
        assert!("0:0".parse::<LexExtensionSpec>().is_err());
        assert!("0+".parse::<LexExtensionSpec>().is_err());
        assert_eq!(s.localize(&sv("0-0+")), Sign::Minus);
        assert_eq!(s.localize(&sv("0+00")), Sign::Zero);
    }

    #[test]
    fn w3_lex_extension() {
        // a point just past element 0 towards element 1 on the line
        let ext = lex_extend(&w3(), &spec("0:+,1:+")).unwrap();
        assert_eq!((ext.rank(), ext.n(), ext.cocircuits().len()), (2, 4, 8));
        for x in ["+--0", "+0-+", "0---", "++0+"] {
            assert!(ext.is_cocircuit(&sv(x)), "{x}");
        }
        // realization oracle: points on the moment curve t = 1, 2, 3 and t = 1 + 1/100
        let pts = IntConfig::new(2, vec![vec![100, 100], vec![100, 200], vec![100, 300], vec![100, 101]]).unwrap();
        assert_eq!(OrientedMatroid::from_points(&pts).unwrap().cocircuits(), ext.cocircuits());
    }

    #[test]
    fn chirotope_and_localization_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (r, n) in [(2, 5), (3, 6), (3, 7), (4, 7), (4, 8)] {
            let om = random_uniform(&mut rng, r, n);
            for _ in 0..4 {
                let mut elems: Vec<usize> = (0..n).collect();
                rand::seq::SliceRandom::shuffle(&mut elems[..], &mut rng);
                let entries = elems[..r].iter().map(|&e| (e, if rng.gen() { Sign::Plus } else { Sign::Minus })).collect();
                let s = LexExtensionSpec::new(entries).unwrap();
                let a = lex_extend_chirotope(&om, &s).unwrap();
                let b = lex_extend_localization(&om, &s).unwrap();
                assert_eq!(a.cocircuits(), b.cocircuits(), "{s}");
                assert!(b.validate().ok);
                assert!(a.chirotope().unwrap().validate().ok);
            }
        }
    }

    #[test]
    fn lex_extension_geometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let om = random_uniform(&mut rng, 3, 6);
        let count = 2 * crate::chirotope::binomial(7, 2);
        for s in ["0:+,1:+,2:+", "0:-,1:+,2:-", "4:+,2:-,5:+"] {
            let s = spec(s);
            let ext = lex_extend(&om, &s).unwrap();
            assert!(ext.is_uniform() && ext.is_general_position(6).unwrap());
            assert_eq!(ext.cocircuits().len(), count);
            let expected = if s.entries()[0].1 == Sign::Plus { Inseparability::Contravariant } else { Inseparability::Covariant };
            assert!(ext.inseparable_partners(s.head()).unwrap().contains(&(6, expected)));
            assert_eq!(ext.delete(6).unwrap().cocircuits(), om.cocircuits());
        }
        // a realizable general-position extension has the same number of cocircuits
        let pts = IntConfig::new(3, vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![1, 1, 1], vec![1, 2, 4], vec![1, 3, 9]]).unwrap();
        let base = OrientedMatroid::from_points(&pts).unwrap();
        let mut more = pts.rows().to_vec();
        more.push(vec![2, -7, 5]);
        let other = OrientedMatroid::from_points(&IntConfig::new(3, more).unwrap()).unwrap();
        assert!(other.is_general_position(6).unwrap());
        let lex = lex_extend(&base, &spec("3:+,0:-,1:+")).unwrap();
        assert_eq!(lex.cocircuits().len(), other.cocircuits().len());
    }

    #[test]
    fn short_specs_use_localization() {
        let om = cyclic(3, 6);
        assert!(lex_extend_chirotope(&om, &spec("0:+,1:+")).is_err());
        let ext = lex_extend(&om, &spec("0:+,1:+")).unwrap();
        assert!(ext.validate().ok);
        // the new element lies on the line through 0 and 1
        assert!(!ext.is_general_position(6).unwrap());
        assert!(lex_extend(&om, &spec("0:+,1:+,2:+,3:+")).is_err());
        let dependent = cyclic(3, 5).direct_sum(&w3()).unwrap();
        assert!(lex_extend(&dependent, &spec("5:+,6:+,7:+")).is_err());
    }

    #[test]
    fn corresponding_cocircuits() {
        let ext = lex_extend(&w3(), &spec("0:+,1:+")).unwrap();
        let x = sv("+--0");
        let y = corresponding_cocircuit(&ext, &x, 0, 3).unwrap();
        assert_eq!(y, sv("0---"));
        assert_eq!(corresponding_cocircuit(&ext, &y, 0, 3).unwrap(), x);
        assert!(corresponding_cocircuit(&ext, &sv("++0+"), 0, 3).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let om = random_uniform(&mut rng, 4, 7);
        for s in ["2:+,0:+,5:-,6:+", "2:-,0:-,5:+,6:-", "1:-,4:+,3:+,0:-"] {
            let s = spec(s);
            let (f, a1) = (s.head(), s.entries()[0].1);
            let ext = lex_extend(&om, &s).unwrap();
            for x in ext.cocircuits() {
                if x.get(7) == Sign::Zero && x.get(f) != Sign::Zero {
                    // the sign of the first nonzero later entry, weighted by its own α
                    let (ai, xi) = s.entries()[1..].iter().map(|&(e, a)| (a, x.get(e))).find(|p| p.1 != Sign::Zero).unwrap();
                    assert_eq!(x.get(f), -(a1 * ai * xi));
                }
                if (x.get(7) == Sign::Zero) != (x.get(f) == Sign::Zero) {
                    let y = corresponding_cocircuit(&ext, x, f, 7).unwrap();
                    assert_eq!(corresponding_cocircuit(&ext, &y, f, 7).unwrap(), *x);
                }
            }
        }
    }

    #[test]
    fn swap_isomorphism() {
        assert!(swap_isomorphism_check(&w3(), &spec("0:+,1:+")).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let om = random_uniform(&mut rng, 3, 6);
        for s in ["0:+,1:+,2:+", "3:-,1:+,5:-", "5:+,4:-,0:-", "2:-,1:-,3:-"] {
            assert!(swap_isomorphism_check(&om, &spec(s)).unwrap(), "{s}");
        }
        let sum = w3().direct_sum(&w3()).unwrap().with_recovered_chirotope().unwrap();
        assert!(swap_isomorphism_check(&sum, &spec("0:+,3:+")).is_err());
    }

    #[test]
    fn creation() {
        let c = creation_check(&w3(), &spec("0:+,1:+")).unwrap();
        assert_eq!(c.certificate.basis, ElementSet::from_elements([0, 3]));
        let om = cyclic(4, 8);
        let c = creation_check(&om, &spec("2:+,4:+,5:+,7:+")).unwrap();
        assert_eq!(c.certificate.basis, ElementSet::from_elements([2, 4, 5, 8]));
        assert!(lost_non_adjacent_mutations(&om, &c.extended, 2).unwrap().is_empty());
        assert!(creation_check(&om, &spec("2:+,4:-,5:+,7:+")).is_err());
    }

    #[test]
    fn destruction() {
        let om = cyclic(4, 8);
        let cert = mutation_from_basis(&om, ElementSet::from_elements([0, 1, 2, 3])).unwrap().unwrap();
        let d = destruction_check(&om, &cert, &spec("0:+,5:-,6:+,7:+")).unwrap();
        assert_eq!(d.new_mutation.basis, ElementSet::from_elements([1, 2, 3, 8]));
        // the old tope keeps its r - 1 walls through f and gains r - 1 on the new element
        assert_eq!(d.old_tope_adjacent, 6);
        assert!(d.stray_mutations.is_empty());
        // mutations avoiding f' keep a constant f'-sign
        for c in mutations(&d.extended).iter().filter(|c| !c.contains(8)) {
            let signs: BTreeSet<Sign> = c.cocircuits().iter().filter(|x| x.conforms_to(&c.tope)).map(|x| x.get(8)).collect();
            assert_eq!(signs.len(), 1);
        }
        assert!(destruction_check(&om, &cert, &spec("0:+,1:-,6:+,7:+")).is_err());
        // rank 2: the new point cuts the arc of {0, 1}; both pieces are arcs again
        let cert = mutation_from_basis(&w3(), ElementSet::from_elements([0, 1])).unwrap().unwrap();
        let d = destruction_check(&w3(), &cert, &spec("0:+,2:-")).unwrap();
        assert_eq!(d.new_mutation.basis, ElementSet::from_elements([1, 3]));
        assert_eq!(d.old_tope_adjacent, 2);
        assert!(is_tope(&d.extended, &d.old_tope.with(3, Sign::Plus)));
    }

    #[test]
    fn perturbation_round_trip() {
        let cfg = IntConfig::new(4, (1..=7i128).map(|t| vec![1, t, t * t, t * t * t]).collect()).unwrap();
        let om = OrientedMatroid::from_points(&cfg).unwrap();
        let cert = mutation_from_basis(&om, ElementSet::from_elements([0, 1, 2, 3])).unwrap().unwrap();
        let on_tope = |b: SignVector| if b.conforms_to(&cert.tope) { b } else { -b };
        let x = on_tope(cert.cocircuit_at(0).unwrap());
        let others: Vec<SignVector> = (1..4).map(|b| on_tope(cert.cocircuit_at(b).unwrap())).collect();
        let rational = cfg.map(|v| BigRational::from_integer(BigInt::from(*v)));
        // a realizable point on the hyperplane of x whose side is the same at the other base cocircuits
        let ext = (0..200u64)
            .find_map(|seed| {
                let through = realizable_extend_through(&rational, &[x.zero_set()], seed).unwrap();
                let ext = OrientedMatroid::from_points(&through.config).unwrap();
                let lift = |y: &SignVector| ext.cocircuits().iter().find(|z| z.restrict(om.ground()) == *y).unwrap().get(7);
                let signs: BTreeSet<Sign> = others.iter().map(lift).collect();
                match signs.into_iter().collect::<Vec<_>>()[..] {
                    [s] => Some(if s == Sign::Minus { ext.reorient(ElementSet::singleton(7)) } else { ext }),
                    _ => None,
                }
            })
            .expect("some seed places the point suitably");
        let xe = x.extend(Sign::Zero);
        assert!(ext.is_cocircuit(&xe));
        let perturbed = perturb_extension(&ext, &xe, 7).unwrap();
        assert!(perturbed.is_cocircuit(&x.extend(Sign::Minus)));
        assert!(perturbed.validate().ok);
        let back = relocalize(&perturbed, 7, &x.extend(Sign::Minus), Sign::Zero).unwrap();
        assert_eq!(back.cocircuits(), ext.cocircuits());
        assert!(perturb_extension(&ext, &x.extend(Sign::Plus), 7).is_err());
    }

    #[test]
    fn flip_and_extension_commute() {
        let om = cyclic(4, 8);
        let cert = mutation_from_basis(&om, ElementSet::from_elements([0, 1, 2, 3])).unwrap().unwrap();
        for tail in [vec![(2, Sign::Minus), (3, Sign::Minus)], vec![(6, Sign::Plus), (1, Sign::Minus)]] {
            let rep = flip_lex_commute_check(&om, &cert, 0, 5, &tail).unwrap();
            assert!(rep.isomorphic && rep.mutations_present);
        }
        let w = w3();
        let cert = mutation_from_basis(&w, ElementSet::from_elements([0, 1])).unwrap().unwrap();
        let rep = flip_lex_commute_check(&w, &cert, 0, 2, &[]).unwrap();
        assert!(rep.isomorphic && rep.mutations_present);
    }

    #[test]
    fn mandel_pipeline_on_a_euclidean_input() {
        let om = cyclic(4, 8);
        let certs = mutations(&om);
        let cert = certs.iter().find(|c| is_euclidean_om(&flip(&om, c).unwrap())).unwrap();
        let f = cert.basis.min().unwrap();
        let g = (0..8).find(|&e| !cert.contains(e)).unwrap();
        let m = mandel_from_euclidean_mutant(&om, cert, f, g).unwrap();
        assert_eq!(m.target_programs.len(), 8);
        assert!(m.target_programs.iter().all(|v| v.euclidean));
        assert_eq!(m.extended.delete(8).unwrap().cocircuits(), om.cocircuits());
        assert!(euclidean_all(&om).iter().all(|v| v.euclidean));
        assert!(Program::new(&m.extended, 0, 8).unwrap().is_euclidean().euclidean);
    }
}
