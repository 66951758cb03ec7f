//! Classification of oriented matroids along the chain
//! all ⊇ Las Vergnas ⊇ Mandel ⊇ Euclidean ⊇ realizable, and the mutation graph.

use std::collections::{BTreeMap, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::canonical::{canonical_form_with, CanonicalOptions};
use crate::error::{Error, Result};
use crate::extensions::{lex_extend, mandel_from_euclidean_mutant, LexExtensionSpec};
use crate::faces::{adjacency_table, flip, l_statistic, mutations, MutationCertificate};
use crate::om::{OrientedMatroid, Provenance};
use crate::programs::{euclidean_all, infinity_graph, ProgramVerdict};
use crate::sign::{ElementSet, Sign};

/// Every element that is neither a loop nor a coloop lies in some mutation.
pub fn is_las_vergnas(om: &OrientedMatroid) -> bool {
    let table = adjacency_table(om.n(), &mutations(om));
    las_vergnas_from(om, &table)
}

fn las_vergnas_from(om: &OrientedMatroid, table: &[usize]) -> bool {
    (0..om.n()).filter(|&e| !om.is_loop(e) && !om.is_coloop(e)).all(|e| table[e] >= 1)
}

/// Whether `p` is in general position, not a coloop, and every `(ext, p, f)` is Euclidean.
pub fn certifies_mandel(ext: &OrientedMatroid, p: usize) -> Result<bool> {
    if ext.is_coloop(p) || !ext.is_general_position(p)? {
        return Ok(false);
    }
    let graph = infinity_graph(ext, p)?;
    Ok((0..ext.n()).filter(|&f| f != p && !ext.is_loop(f) && !ext.is_coloop(f)).all(|f| graph.directed(f).verdict().euclidean))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MandelWitness {
    /// A lexicographic extension certified directly.
    Lexicographic { spec: LexExtensionSpec },
    /// A lexicographic extension followed by a flip, built from a Euclidean mutant.
    MutantConstruction {
        mutation: ElementSet,
        f: usize,
        g: usize,
        reorientation: ElementSet,
        spec: LexExtensionSpec,
        /// Whether `(O', f', e)` is Euclidean for every `e` as well as `(O', e, f')`.
        infinity_role_euclidean: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MandelStatus {
    Witnessed,
    /// No witness within budget; not a disproof.
    Undetermined,
    NotSearched,
}

#[derive(Clone, Debug, Default)]
pub struct MandelSearch {
    pub witness: Option<MandelWitness>,
    /// Candidates tried.
    pub tried: usize,
}

/// Fast path over Euclidean mutants first, then lexicographic specs in order.
pub fn mandel_witness_search(om: &OrientedMatroid, budget: usize) -> Result<MandelSearch> {
    let mut search = MandelSearch::default();
    let (n, r) = (om.n(), om.rank());
    if budget == 0 {
        return Ok(search);
    }
    let certs = mutations(om);
    if om.is_uniform() && !euclidean_all(om).iter().all(|v| v.euclidean) {
        for cert in &certs {
            let Ok(mutant) = flip(om, cert) else { continue };
            if !euclidean_all(&mutant).iter().all(|v| v.euclidean) {
                continue;
            }
            for f in cert.basis.iter() {
                for g in (0..n).filter(|&g| !cert.contains(g)) {
                    if search.tried == budget {
                        return Ok(search);
                    }
                    search.tried += 1;
                    if let Ok(m) = mandel_from_euclidean_mutant(om, cert, f, g) {
                        search.witness = Some(MandelWitness::MutantConstruction {
                            mutation: m.mutation,
                            f,
                            g,
                            reorientation: m.reorientation,
                            spec: m.spec.clone(),
                            infinity_role_euclidean: m.infinity_role_euclidean(),
                        });
                        return Ok(search);
                    }
                }
            }
        }
    }
    let mut found = None;
    ordered_independent(om, r, &mut Vec::new(), &mut |tuple| {
        for signs in 0u32..(1 << r) {
            if search.tried == budget {
                return false;
            }
            search.tried += 1;
            let entries = tuple
                .iter()
                .enumerate()
                .map(|(i, &e)| (e, if signs >> i & 1 == 1 { Sign::Minus } else { Sign::Plus }))
                .collect();
            let spec = LexExtensionSpec::new(entries).expect("distinct elements");
            let ok = lex_extend(om, &spec).and_then(|ext| certifies_mandel(&ext, n)).unwrap_or(false);
            if ok {
                found = Some(spec);
                return false;
            }
        }
        true
    });
    search.witness = found.map(|spec| MandelWitness::Lexicographic { spec });
    Ok(search)
}

/// Ordered independent `k`-tuples in lexicographic order; `visit` returns false to stop.
fn ordered_independent(om: &OrientedMatroid, k: usize, prefix: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    if prefix.len() == k {
        return visit(prefix);
    }
    for e in 0..om.n() {
        if prefix.contains(&e) {
            continue;
        }
        prefix.push(e);
        let go = !om.is_independent(prefix.iter().copied().collect()) || ordered_independent(om, k, prefix, visit);
        prefix.pop();
        if !go {
            return false;
        }
    }
    true
}

/// The extension a witness describes, with the new element last.
pub fn witness_extension(om: &OrientedMatroid, w: &MandelWitness) -> Result<OrientedMatroid> {
    match w {
        MandelWitness::Lexicographic { spec } => lex_extend(om, spec),
        MandelWitness::MutantConstruction { mutation, f, g, .. } => {
            let cert = crate::faces::mutation_from_basis(om, *mutation)?.ok_or(Error::StaleCertificate(*mutation))?;
            Ok(mandel_from_euclidean_mutant(om, &cert, *f, *g)?.extended)
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    /// Candidate budget for the Mandel search; 0 skips it.
    pub mandel_budget: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { mandel_budget: 2000 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub n: usize,
    pub rank: usize,
    pub uniform: bool,
    pub realizable_by_construction: bool,
    pub euclidean_all_programs: bool,
    pub totally_non_euclidean: bool,
    pub las_vergnas: bool,
    pub mandel_status: MandelStatus,
    pub mandel_witness: Option<MandelWitness>,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub adjacency: Vec<usize>,
    pub mutation_count: usize,
    pub non_euclidean_programs: Vec<(usize, usize)>,
}

impl ClassificationReport {
    /// Implications of the chain that are decidable from the report.
    pub fn chain_violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.realizable_by_construction && !self.euclidean_all_programs {
            out.push("realizable but not Euclidean");
        }
        if self.mandel_witness.is_some() && !self.las_vergnas {
            out.push("Mandel witness but not Las Vergnas");
        }
        if self.totally_non_euclidean && self.euclidean_all_programs {
            out.push("totally non-Euclidean yet Euclidean");
        }
        out
    }
}

pub fn classify(om: &OrientedMatroid, opts: ClassifyOptions) -> Result<ClassificationReport> {
    let certs = mutations(om);
    let adjacency = adjacency_table(om.n(), &certs);
    let verdicts = euclidean_all(om);
    let euclidean = verdicts.iter().all(|v| v.euclidean);
    let totally = !verdicts.is_empty() && verdicts.iter().all(|v| !v.euclidean);
    let las_vergnas = las_vergnas_from(om, &adjacency);
    let (mandel_status, mandel_witness) = if opts.mandel_budget == 0 {
        (MandelStatus::NotSearched, None)
    } else {
        match mandel_witness_search(om, opts.mandel_budget)?.witness {
            Some(w) => (MandelStatus::Witnessed, Some(w)),
            None => (MandelStatus::Undetermined, None),
        }
    };
    Ok(ClassificationReport {
        n: om.n(),
        rank: om.rank(),
        uniform: om.is_uniform(),
        realizable_by_construction: om.provenance() == Provenance::FromPoints,
        euclidean_all_programs: euclidean,
        totally_non_euclidean: totally,
        las_vergnas,
        mandel_status,
        mandel_witness,
        l: l_statistic(om, &adjacency),
        adjacency,
        mutation_count: certs.len(),
        non_euclidean_programs: verdicts.iter().filter(|v| !v.euclidean).map(|v| (v.g, v.f)).collect(),
    })
}

/// Per-node flags computed during a mutation-graph search.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NodeSummary {
    pub euclidean_all_programs: bool,
    pub euclidean_programs: usize,
    pub programs: usize,
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub mutation_count: usize,
}

impl NodeSummary {
    pub fn of(om: &OrientedMatroid, certs: &[MutationCertificate]) -> NodeSummary {
        let verdicts = euclidean_all(om);
        Self::from_parts(om, certs, &verdicts)
    }

    fn from_parts(om: &OrientedMatroid, certs: &[MutationCertificate], verdicts: &[ProgramVerdict]) -> NodeSummary {
        let euclidean_programs = verdicts.iter().filter(|v| v.euclidean).count();
        NodeSummary {
            euclidean_all_programs: euclidean_programs == verdicts.len(),
            euclidean_programs,
            programs: verdicts.len(),
            l: l_statistic(om, &adjacency_table(om.n(), certs)),
            mutation_count: certs.len(),
        }
    }

    pub fn totally_non_euclidean(&self) -> bool {
        self.programs > 0 && self.euclidean_programs == 0
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MutationGraphNode {
    pub key: String,
    /// Basis signs of a representative, in lexicographic order.
    pub representative: String,
    pub depth: usize,
    pub summary: Option<NodeSummary>,
    /// Indices of neighbouring nodes that were discovered.
    pub edges: Vec<usize>,
    /// Neighbour classes beyond the explored budget.
    pub unexplored: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MutationGraph {
    pub rank: usize,
    pub n: usize,
    pub nodes: Vec<MutationGraphNode>,
    /// Every discovered node was expanded and no neighbour was left out.
    pub closed: bool,
    /// Some canonical key was an invariant hash rather than exact.
    pub inexact_keys: bool,
    #[serde(skip)]
    pub representatives: Vec<OrientedMatroid>,
}

impl MutationGraph {
    pub fn index_of(&self, key: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n.key == key)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct BfsOptions {
    pub max_nodes: usize,
    pub max_depth: usize,
    pub summarize: bool,
    pub canonical: CanonicalOptions,
}

impl Default for BfsOptions {
    fn default() -> Self {
        BfsOptions { max_nodes: usize::MAX, max_depth: usize::MAX, summarize: false, canonical: CanonicalOptions::default() }
    }
}

struct Expansion {
    neighbors: Vec<(String, bool, OrientedMatroid, Vec<MutationCertificate>)>,
}

/// Breadth-first search over mutation flips, deduplicated by canonical form.
///
/// Frontier expansion runs in parallel; insertion is sequential in frontier order, so
/// node numbering is deterministic.
pub fn mutation_graph_bfs(seed: &OrientedMatroid, opts: BfsOptions) -> Result<MutationGraph> {
    if !seed.is_uniform() {
        return Err(Error::NotUniform);
    }
    seed.require_chirotope()?;
    let seed_certs = mutations(seed);
    let seed_key = canonical_form_with(seed, opts.canonical, Some(&seed_certs))?;
    let mut inexact = !seed_key.exact;
    let mut index: HashMap<String, usize> = HashMap::from([(seed_key.key.clone(), 0)]);
    let mut nodes = vec![MutationGraphNode {
        key: seed_key.key,
        representative: seed.require_chirotope()?.sign_string(),
        depth: 0,
        summary: None,
        edges: Vec::new(),
        unexplored: 0,
    }];
    let mut reps = vec![seed.clone()];
    let mut certs_of: Vec<Option<Vec<MutationCertificate>>> = vec![Some(seed_certs)];
    let mut frontier = vec![0usize];
    let mut closed = true;
    while !frontier.is_empty() {
        let expansions: Vec<Result<Expansion>> = frontier
            .par_iter()
            .map(|&u| {
                let om = &reps[u];
                let certs = certs_of[u].as_ref().expect("frontier nodes keep certificates");
                let mut neighbors = Vec::with_capacity(certs.len());
                for c in certs {
                    let mutant = flip(om, c)?;
                    let mc = mutations(&mutant);
                    let key = canonical_form_with(&mutant, opts.canonical, Some(&mc))?;
                    neighbors.push((key.key, key.exact, mutant, mc));
                }
                Ok(Expansion { neighbors })
            })
            .collect();
        let mut next = Vec::new();
        for (&u, exp) in frontier.iter().zip(expansions) {
            let exp = exp?;
            certs_of[u] = None;
            let depth = nodes[u].depth;
            for (key, exact, mutant, mc) in exp.neighbors {
                inexact |= !exact;
                let v = match index.get(&key) {
                    Some(&v) => Some(v),
                    None if nodes.len() < opts.max_nodes && depth < opts.max_depth => {
                        let v = nodes.len();
                        index.insert(key.clone(), v);
                        nodes.push(MutationGraphNode {
                            key,
                            representative: mutant.require_chirotope()?.sign_string(),
                            depth: depth + 1,
                            summary: None,
                            edges: Vec::new(),
                            unexplored: 0,
                        });
                        reps.push(mutant);
                        certs_of.push(Some(mc));
                        next.push(v);
                        Some(v)
                    }
                    None => None,
                };
                match v {
                    Some(v) => {
                        for (a, b) in [(u, v), (v, u)] {
                            if !nodes[a].edges.contains(&b) {
                                nodes[a].edges.push(b);
                            }
                        }
                    }
                    None => {
                        nodes[u].unexplored += 1;
                        closed = false;
                    }
                }
            }
        }
        frontier = next;
    }
    if certs_of.iter().any(Option::is_some) {
        closed = false;
    }
    for node in nodes.iter_mut() {
        node.edges.sort();
    }
    if opts.summarize {
        let summaries: Vec<NodeSummary> = reps.par_iter().map(|om| NodeSummary::of(om, &mutations(om))).collect();
        for (node, s) in nodes.iter_mut().zip(summaries) {
            node.summary = Some(s);
        }
    }
    Ok(MutationGraph { rank: seed.rank(), n: seed.n(), nodes, closed, inexact_keys: inexact, representatives: reps })
}

/// Flip distance to the nearest matroid all of whose programs are Euclidean.
pub fn flip_distance_to_euclidean(om: &OrientedMatroid, radius: usize) -> Result<Option<usize>> {
    if !om.is_uniform() {
        return Err(Error::NotUniform);
    }
    let opts = CanonicalOptions::default();
    let mut seen = std::collections::HashSet::new();
    let certs = mutations(om);
    seen.insert(canonical_form_with(om, opts, Some(&certs))?.key);
    let mut queue = VecDeque::from([(om.clone(), certs, 0usize)]);
    while let Some((cur, certs, d)) = queue.pop_front() {
        if euclidean_all(&cur).iter().all(|v| v.euclidean) {
            return Ok(Some(d));
        }
        if d == radius {
            continue;
        }
        for c in &certs {
            let mutant = flip(&cur, c)?;
            let mc = mutations(&mutant);
            if seen.insert(canonical_form_with(&mutant, opts, Some(&mc))?.key) {
                queue.push_back((mutant, mc, d + 1));
            }
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub class: String,
    pub rank: usize,
    pub count: usize,
    pub min_l: Option<usize>,
    pub max_l: Option<usize>,
}

/// Minimum and maximum `L` per rank and class flag.
pub fn summary_table(reports: &[ClassificationReport]) -> Vec<SummaryRow> {
    let mut rows: BTreeMap<(usize, &'static str), (usize, Option<usize>, Option<usize>)> = BTreeMap::new();
    for rep in reports {
        let mut classes = vec!["all"];
        if rep.las_vergnas {
            classes.push("las-vergnas");
        }
        if rep.mandel_witness.is_some() {
            classes.push("mandel-witnessed");
        }
        if rep.euclidean_all_programs {
            classes.push("euclidean");
        } else {
            classes.push("non-euclidean");
        }
        if rep.realizable_by_construction {
            classes.push("realizable");
        }
        for c in classes {
            let entry = rows.entry((rep.rank, c)).or_insert((0, None, None));
            entry.0 += 1;
            if let Some(l) = rep.l {
                entry.1 = Some(entry.1.map_or(l, |m: usize| m.min(l)));
                entry.2 = Some(entry.2.map_or(l, |m: usize| m.max(l)));
            }
        }
    }
    rows.into_iter()
        .map(|((rank, class), (count, min_l, max_l))| SummaryRow { class: class.into(), rank, count, min_l, max_l })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chirotope::Chirotope;
    use crate::IntConfig;

    fn w3() -> OrientedMatroid {
        OrientedMatroid::from_chirotope(Chirotope::parse("2 3\n+++").unwrap()).unwrap()
    }

    fn cyclic(r: usize, n: usize) -> OrientedMatroid {
        let rows = (1..=n as i128).map(|t| (0..r as u32).map(|k| t.pow(k)).collect()).collect();
        OrientedMatroid::from_points(&IntConfig::new(r, rows).unwrap()).unwrap()
    }

    #[test]
    fn las_vergnas_basics() {
        assert!(is_las_vergnas(&w3()));
        assert!(is_las_vergnas(&cyclic(3, 6)));
        let rep = classify(&cyclic(3, 6), ClassifyOptions::default()).unwrap();
        assert!(rep.realizable_by_construction && rep.euclidean_all_programs && rep.las_vergnas);
        assert_eq!(rep.l, Some(3));
        assert!(rep.chain_violations().is_empty());
    }

    #[test]
    fn euclidean_inputs_are_witnessed_by_the_first_candidate() {
        let s = mandel_witness_search(&cyclic(3, 6), 10).unwrap();
        assert_eq!(s.tried, 1);
        match s.witness.unwrap() {
            MandelWitness::Lexicographic { spec } => assert_eq!(spec.to_string(), "0:+,1:+,2:+"),
            other => panic!("unexpected {other:?}"),
        }
        let none = mandel_witness_search(&cyclic(3, 6), 0).unwrap();
        assert!(none.witness.is_none());
        let rep = classify(&cyclic(3, 6), ClassifyOptions { mandel_budget: 0 }).unwrap();
        assert_eq!(rep.mandel_status, MandelStatus::NotSearched);
    }

    #[test]
    fn w3_closes_in_one_class() {
        // all eight sign maps on three elements in rank 2 are reorientations of one another
        let g = mutation_graph_bfs(&w3(), BfsOptions::default()).unwrap();
        assert!(g.closed);
        assert_eq!(g.nodes.len(), 1);
        assert_eq!(g.nodes[0].edges, vec![0]);
    }

    #[test]
    fn bfs_edges_are_symmetric_and_deterministic() {
        let opts = BfsOptions { max_nodes: 40, summarize: true, ..Default::default() };
        let a = mutation_graph_bfs(&cyclic(3, 7), opts).unwrap();
        let b = mutation_graph_bfs(&cyclic(3, 7), opts).unwrap();
        assert_eq!(a.nodes.iter().map(|n| &n.key).collect::<Vec<_>>(), b.nodes.iter().map(|n| &n.key).collect::<Vec<_>>());
        for (u, node) in a.nodes.iter().enumerate() {
            for &v in &node.edges {
                assert!(a.nodes[v].edges.contains(&u));
            }
            let s = node.summary.as_ref().unwrap();
            assert!(s.euclidean_all_programs);
            assert!(s.l.unwrap() >= 3);
        }
    }

    #[test]
    fn flip_distance_zero_for_euclidean() {
        assert_eq!(flip_distance_to_euclidean(&cyclic(4, 7), 2).unwrap(), Some(0));
    }

    #[test]
    fn summary_rows() {
        let reps: Vec<ClassificationReport> = [cyclic(3, 6), cyclic(3, 7), cyclic(4, 7)]
            .iter()
            .map(|om| classify(om, ClassifyOptions { mandel_budget: 0 }).unwrap())
            .collect();
        let rows = summary_table(&reps);
        let realizable3 = rows.iter().find(|r| r.rank == 3 && r.class == "realizable").unwrap();
        assert_eq!((realizable3.count, realizable3.min_l), (2, Some(3)));
        let euclid4 = rows.iter().find(|r| r.rank == 4 && r.class == "euclidean").unwrap();
        assert!(euclid4.min_l.unwrap() >= 3);
    }
}
