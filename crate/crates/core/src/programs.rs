//! Oriented matroid programs `(O, g, f)`: cocircuit graphs, edge directions and
//! directed cycles.

use std::collections::{BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::MutationCertificate;
use crate::om::OrientedMatroid;
use crate::sign::{ElementSet, Sign, SignVector};

/// The elimination `El(X, Y, e)`: the cocircuit vanishing on `e` and on `z(X) ∩ z(Y)`,
/// signed to agree with `X ∘ Y` away from `sep(X, Y)`.
pub fn eliminate(om: &OrientedMatroid, x: &SignVector, y: &SignVector, e: usize) -> Result<SignVector> {
    om.check_element(e)?;
    if x.len() != om.n() || y.len() != om.n() {
        return Err(Error::LengthMismatch { left: x.len(), right: om.n() });
    }
    let sep = x.separation_unchecked(y);
    if !sep.contains(e) {
        return Err(Error::NotSeparating(e));
    }
    let coline = x.zero_set().intersection(y.zero_set());
    if om.subset_rank(coline) + 2 != om.rank() {
        return Err(Error::NotComodular);
    }
    let z = om.cocircuit_on(om.closure(coline.with(e))).ok_or(Error::EliminationFailed)?;
    let target = x.compose_unchecked(y);
    let off = om.ground().difference(sep);
    for cand in [z, -z] {
        if cand.restrict(off).conforms_to(&target.restrict(off)) {
            return Ok(cand);
        }
    }
    Err(Error::EliminationFailed)
}

/// Conformal cocircuits whose zero sets meet in a flat of rank `r - 2`.
pub fn is_edge(om: &OrientedMatroid, x: &SignVector, y: &SignVector) -> bool {
    x != y
        && x.conformal_unchecked(y)
        && om.subset_rank(x.zero_set().intersection(y.zero_set())) + 2 == om.rank()
}

#[derive(Copy, Clone, Debug)]
pub struct Program<'a> {
    pub om: &'a OrientedMatroid,
    pub g: usize,
    pub f: usize,
}

impl<'a> Program<'a> {
    pub fn new(om: &'a OrientedMatroid, g: usize, f: usize) -> Result<Self> {
        om.check_element(g)?;
        om.check_element(f)?;
        if g == f {
            return Err(Error::InvalidProgram("g and f coincide".into()));
        }
        if om.is_loop(g) {
            return Err(Error::InvalidProgram(format!("g = {g} is a loop")));
        }
        if om.is_coloop(f) {
            return Err(Error::InvalidProgram(format!("f = {f} is a coloop")));
        }
        Ok(Program { om, g, f })
    }

    /// Direction of the edge `{x, y}`: `Z_f` for `Z = El(-x, y, g)`; `+` means `x -> y`.
    pub fn edge_direction(&self, x: &SignVector, y: &SignVector) -> Result<Sign> {
        if x.get(self.g) != Sign::Plus || y.get(self.g) != Sign::Plus || !is_edge(self.om, x, y) {
            return Err(Error::NotAnEdge);
        }
        Ok(eliminate(self.om, &-*x, y, self.g)?.get(self.f))
    }

    pub fn graph(&self) -> CocircuitGraph {
        infinity_graph(self.om, self.g).expect("program was validated").directed(self.f)
    }

    pub fn is_euclidean(&self) -> Verdict {
        self.graph().verdict()
    }
}

/// The undirected cocircuit graph at infinity `g`, shared by every target `f`.
#[derive(Clone, Debug)]
pub struct InfinityGraph {
    pub g: usize,
    pub vertices: Vec<SignVector>,
    /// `(a, b, Z)` with `a < b` and `Z = El(-X_a, X_b, g)`.
    pub edges: Vec<(usize, usize, SignVector)>,
}

pub fn infinity_graph(om: &OrientedMatroid, g: usize) -> Result<InfinityGraph> {
    om.check_element(g)?;
    let vertices: Vec<SignVector> = om.cocircuits().iter().filter(|x| x.get(g) == Sign::Plus).copied().collect();
    let edges: Vec<(usize, usize, SignVector)> = (0..vertices.len())
        .into_par_iter()
        .flat_map_iter(|a| {
            let vertices = &vertices;
            (a + 1..vertices.len()).filter_map(move |b| {
                let (x, y) = (&vertices[a], &vertices[b]);
                if !is_edge(om, x, y) {
                    return None;
                }
                let z = eliminate(om, &-*x, y, g).expect("edges are comodular and separated by g");
                Some((a, b, z))
            })
        })
        .collect();
    Ok(InfinityGraph { g, vertices, edges })
}

impl InfinityGraph {
    pub fn directed(&self, f: usize) -> CocircuitGraph {
        let edges = self.edges.iter().map(|&(a, b, z)| DirectedEdge { a, b, direction: z.get(f), z }).collect();
        CocircuitGraph { g: self.g, f, vertices: self.vertices.clone(), edges }
    }

    pub fn index_of(&self, x: &SignVector) -> Option<usize> {
        self.vertices.binary_search(x).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedEdge {
    pub a: usize,
    pub b: usize,
    /// `+` for `a -> b`, `-` for `b -> a`, `0` undirected.
    pub direction: Sign,
    pub z: SignVector,
}

#[derive(Clone, Debug)]
pub struct CocircuitGraph {
    pub g: usize,
    pub f: usize,
    pub vertices: Vec<SignVector>,
    pub edges: Vec<DirectedEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedCycleWitness {
    pub cocircuits: Vec<SignVector>,
    /// `Z_i = El(-X_i, X_{i+1}, g)`, each with `Z_f = +`.
    pub directions: Vec<SignVector>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Verdict {
    pub euclidean: bool,
    pub witness: Option<DirectedCycleWitness>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Component {
    pub members: Vec<SignVector>,
    pub isolated: bool,
}

impl CocircuitGraph {
    /// Vertices with `X_f = s`.
    pub fn vertices_with_f(&self, s: Sign) -> Vec<SignVector> {
        self.vertices.iter().filter(|x| x.get(self.f) == s).copied().collect()
    }

    /// Successor lists along strictly directed edges, with the direction cocircuit.
    fn successors(&self) -> Vec<Vec<(usize, SignVector)>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for e in &self.edges {
            match e.direction {
                Sign::Plus => out[e.a].push((e.b, e.z)),
                Sign::Minus => out[e.b].push((e.a, -e.z)),
                Sign::Zero => {}
            }
        }
        out
    }

    /// Strongly connected components of the strictly directed graph, each sorted, listed
    /// by their smallest vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut graph = DiGraph::<(), ()>::with_capacity(self.vertices.len(), self.edges.len());
        for _ in &self.vertices {
            graph.add_node(());
        }
        for (a, succ) in self.successors().iter().enumerate() {
            for &(b, _) in succ {
                graph.add_edge(NodeIndex::new(a), NodeIndex::new(b), ());
            }
        }
        let mut comps: Vec<Vec<usize>> = tarjan_scc(&graph)
            .into_iter()
            .map(|c| {
                let mut v: Vec<usize> = c.into_iter().map(|i| i.index()).collect();
                v.sort();
                v
            })
            .collect();
        comps.sort();
        comps
    }

    pub fn very_strong_components(&self) -> Vec<Component> {
        self.components()
            .into_iter()
            .map(|c| Component { isolated: c.len() == 1, members: c.iter().map(|&i| self.vertices[i]).collect() })
            .collect()
    }

    pub fn verdict(&self) -> Verdict {
        let comps = self.components();
        match comps.iter().find(|c| c.len() > 1) {
            None => Verdict { euclidean: true, witness: None },
            Some(comp) => Verdict { euclidean: false, witness: Some(self.shortest_cycle(comp)) },
        }
    }

    /// Shortest directed cycle through the smallest vertex of `comp`.
    fn shortest_cycle(&self, comp: &[usize]) -> DirectedCycleWitness {
        let succ = self.successors();
        let inside: BTreeSet<usize> = comp.iter().copied().collect();
        let start = comp[0];
        let mut parent: Vec<Option<(usize, SignVector)>> = vec![None; self.vertices.len()];
        let mut queue = VecDeque::from([start]);
        let mut seen = vec![false; self.vertices.len()];
        seen[start] = true;
        let mut last = None;
        'bfs: while let Some(v) = queue.pop_front() {
            for &(w, z) in &succ[v] {
                if w == start {
                    last = Some((v, z));
                    break 'bfs;
                }
                if inside.contains(&w) && !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, z));
                    queue.push_back(w);
                }
            }
        }
        let (mut v, closing) = last.expect("a nontrivial component contains a cycle through each vertex");
        let mut cocircuits = vec![self.vertices[v]];
        let mut directions = vec![closing];
        while v != start {
            let (p, z) = parent[v].expect("bfs tree");
            cocircuits.push(self.vertices[p]);
            directions.push(z);
            v = p;
        }
        // directions[i] belongs to the edge leaving cocircuits[i]
        cocircuits.reverse();
        directions.reverse();
        DirectedCycleWitness { cocircuits, directions }
    }
}

/// Checks that consecutive cocircuits (cyclically) form strictly forward edges.
pub fn verify_cycle(p: &Program, w: &DirectedCycleWitness) -> Result<()> {
    let k = w.cocircuits.len();
    if k < 3 || w.directions.len() != k {
        return Err(Error::Verification(format!("cycle of length {k}")));
    }
    for i in 0..k {
        let (x, y) = (&w.cocircuits[i], &w.cocircuits[(i + 1) % k]);
        if p.edge_direction(x, y)? != Sign::Plus {
            return Err(Error::Verification(format!("edge {x} -> {y} is not directed forward")));
        }
        if eliminate(p.om, &-*x, y, p.g)? != w.directions[i] {
            return Err(Error::Verification(format!("wrong direction cocircuit on {x} -> {y}")));
        }
    }
    Ok(())
}

/// Strictly directed chords `(i, j, d)` between cycle positions that are not consecutive.
pub fn chords(p: &Program, w: &DirectedCycleWitness) -> Vec<(usize, usize, Sign)> {
    let k = w.cocircuits.len();
    let mut out = Vec::new();
    for i in 0..k {
        for j in i + 2..k {
            if i == 0 && j == k - 1 {
                continue;
            }
            if let Ok(d) = p.edge_direction(&w.cocircuits[i], &w.cocircuits[j]) {
                out.push((i, j, d));
            }
        }
    }
    out
}

/// Shortcuts strictly directed chords until none is left.
pub fn reduce_cycle_chordless(p: &Program, w: &DirectedCycleWitness) -> Result<DirectedCycleWitness> {
    verify_cycle(p, w)?;
    let mut cycle = w.cocircuits.clone();
    loop {
        let k = cycle.len();
        let current = DirectedCycleWitness { cocircuits: cycle.clone(), directions: vec![SignVector::zero(0); k] };
        let Some(&(i, j, d)) = chords(p, &current).iter().find(|c| c.2 != Sign::Zero) else {
            break;
        };
        cycle = if d == Sign::Plus {
            // X_i -> X_j, then onward to X_i
            std::iter::once(cycle[i]).chain((j..k).chain(0..i).map(|t| cycle[t])).collect()
        } else {
            // X_i -> ... -> X_j, then back along the chord
            cycle[i..=j].to_vec()
        };
    }
    let k = cycle.len();
    let directions = (0..k)
        .map(|i| eliminate(p.om, &-cycle[i], &cycle[(i + 1) % k], p.g))
        .collect::<Result<Vec<_>>>()?;
    let out = DirectedCycleWitness { cocircuits: cycle, directions };
    verify_cycle(p, &out)?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementCycleReport {
    pub element: usize,
    /// Every cycle cocircuit vanishes on the element.
    pub all_zero: bool,
    /// The element has one constant nonzero sign along the cycle.
    pub constant_sign: Option<Sign>,
    /// Signs along the cycle stay within `{s, 0}`, both values occurring.
    pub half_open: Option<Sign>,
    /// The element lies in the zero set of some cycle edge.
    pub on_edge: bool,
    /// Both nonzero signs occur on the cycle.
    pub both_signs: bool,
}

/// Per-element sign statistics of a directed cycle.
pub fn analyze_cycle(p: &Program, w: &DirectedCycleWitness) -> Vec<ElementCycleReport> {
    let k = w.cocircuits.len();
    let edge_zero = (0..k)
        .map(|i| w.cocircuits[i].zero_set().intersection(w.cocircuits[(i + 1) % k].zero_set()))
        .fold(ElementSet::EMPTY, |acc, z| acc.union(z));
    (0..p.om.n())
        .map(|e| {
            let signs: BTreeSet<Sign> = w.cocircuits.iter().map(|x| x.get(e)).collect();
            let has = |s| signs.contains(&s);
            let constant_sign = match signs.len() {
                1 if !has(Sign::Zero) => signs.iter().next().copied(),
                _ => None,
            };
            let half_open = match (has(Sign::Plus), has(Sign::Zero), has(Sign::Minus)) {
                (true, true, false) => Some(Sign::Plus),
                (false, true, true) => Some(Sign::Minus),
                _ => None,
            };
            ElementCycleReport {
                element: e,
                all_zero: signs.len() == 1 && has(Sign::Zero),
                constant_sign,
                half_open,
                on_edge: edge_zero.contains(e),
                both_signs: has(Sign::Plus) && has(Sign::Minus),
            }
        })
        .collect()
}

/// Whether all cycle cocircuits lie on one of the given simplicial topes (or its antipode).
pub fn cycle_on_one_simplicial_tope(w: &DirectedCycleWitness, certs: &[MutationCertificate]) -> bool {
    certs
        .iter()
        .flat_map(|c| [c.tope, -c.tope])
        .any(|t| w.cocircuits.iter().all(|x| x.conforms_to(&t)))
}

/// Topes containing every cycle cocircuit whose adjacent cocircuits all occur on the cycle.
pub fn cycle_exhausting_tope(om: &OrientedMatroid, w: &DirectedCycleWitness, topes: &[SignVector]) -> Option<SignVector> {
    let on_cycle: BTreeSet<SignVector> = w.cocircuits.iter().copied().collect();
    topes.iter().copied().find(|t| {
        w.cocircuits.iter().all(|x| x.conforms_to(t))
            && om.cocircuits().iter().filter(|x| x.conforms_to(t)).all(|x| on_cycle.contains(x))
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramVerdict {
    pub g: usize,
    pub f: usize,
    pub euclidean: bool,
}

/// Valid ordered pairs `(g, f)` of distinct elements.
pub fn valid_programs(om: &OrientedMatroid) -> Vec<(usize, usize)> {
    let loops = om.loops();
    let coloops: ElementSet = (0..om.n()).filter(|&e| om.is_coloop(e)).collect();
    (0..om.n())
        .filter(|&g| !loops.contains(g))
        .flat_map(|g| (0..om.n()).filter(move |&f| f != g && !coloops.contains(f)).map(move |f| (g, f)))
        .collect()
}

/// Verdicts for every valid program, ordered by `(g, f)`.
pub fn euclidean_all(om: &OrientedMatroid) -> Vec<ProgramVerdict> {
    let pairs = valid_programs(om);
    let gs: BTreeSet<usize> = pairs.iter().map(|p| p.0).collect();
    gs.into_par_iter()
        .flat_map_iter(|g| {
            let graph = infinity_graph(om, g).expect("g in range");
            pairs
                .iter()
                .filter(|p| p.0 == g)
                .map(|&(g, f)| ProgramVerdict { g, f, euclidean: graph.directed(f).verdict().euclidean })
                .collect::<Vec<_>>()
        })
        .collect()
}

pub fn is_euclidean_om(om: &OrientedMatroid) -> bool {
    euclidean_all(om).iter().all(|v| v.euclidean)
}

/// True iff no valid program is Euclidean. Stops at the first Euclidean one.
pub fn is_totally_non_euclidean(om: &OrientedMatroid) -> bool {
    let pairs = valid_programs(om);
    !pairs.is_empty()
        && !pairs.par_iter().any(|&(g, f)| Program { om, g, f }.is_euclidean().euclidean)
}

/// Some Euclidean program, if any exists.
pub fn first_euclidean_program(om: &OrientedMatroid) -> Option<(usize, usize)> {
    valid_programs(om).into_iter().find(|&(g, f)| Program { om, g, f }.is_euclidean().euclidean)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chirotope::Chirotope;
    use crate::IntConfig;

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

    #[test]
    fn elimination_in_w3() {
        let om = w3();
        assert_eq!(eliminate(&om, &sv("-0+"), &sv("++0"), 0).unwrap(), sv("0++"));
        assert!(matches!(eliminate(&om, &sv("+0-"), &sv("-0+"), 0), Err(Error::NotComodular)));
        assert!(matches!(eliminate(&om, &sv("-0+"), &sv("++0"), 1), Err(Error::NotSeparating(1))));
    }

    /// Brute-force elimination: scan the cocircuit list for admissible `Z`.
    fn eliminations_by_scan(om: &OrientedMatroid, x: &SignVector, y: &SignVector, e: usize) -> Vec<SignVector> {
        let sep = x.separation(y).unwrap();
        om.cocircuits()
            .iter()
            .filter(|z| {
                z.get(e) == Sign::Zero
                    && (0..om.n()).all(|h| {
                        let zh = z.get(h);
                        zh == Sign::Zero || zh == x.get(h) || zh == y.get(h)
                    })
                    && (0..om.n()).filter(|h| !sep.contains(*h)).all(|h| {
                        z.get(h) == Sign::Zero || z.get(h) == x.compose(y).unwrap().get(h)
                    })
                    && x.zero_set().intersection(y.zero_set()).is_subset(z.zero_set())
            })
            .copied()
            .collect()
    }

    #[test]
    fn elimination_is_unique_for_comodular_pairs() {
        let om = cyclic(4, 8);
        let cocircuits = om.cocircuits();
        let mut checked = 0;
        for x in cocircuits {
            for y in cocircuits {
                if x.zero_set().intersection(y.zero_set()).len() != 2 {
                    continue;
                }
                for e in x.separation(y).unwrap().iter() {
                    let scan = eliminations_by_scan(&om, x, y, e);
                    assert_eq!(scan.len(), 1);
                    assert_eq!(eliminate(&om, x, y, e).unwrap(), scan[0]);
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn w3_program() {
        let om = w3();
        let p = Program::new(&om, 0, 1).unwrap();
        assert_eq!(p.edge_direction(&sv("+0-"), &sv("++0")).unwrap(), Sign::Plus);
        assert_eq!(p.edge_direction(&sv("++0"), &sv("+0-")).unwrap(), Sign::Minus);
        let graph = p.graph();
        assert_eq!(graph.vertices.len(), 2);
        assert_eq!(graph.edges.len(), 1);
        assert_eq!(graph.edges[0].z, sv("0++"));
        assert!(p.is_euclidean().euclidean);
        assert!(Program::new(&om, 0, 0).is_err());
    }

    #[test]
    fn cyclic_programs() {
        let om = cyclic(4, 8);
        let p = Program::new(&om, 0, 1).unwrap();
        let graph = p.graph();
        // cocircuits whose zero set (three elements) avoids g
        assert_eq!(graph.vertices.len(), crate::chirotope::binomial(7, 3));
        assert!(!graph.vertices_with_f(Sign::Plus).is_empty());
        for e in &graph.edges {
            let (x, y) = (graph.vertices[e.a], graph.vertices[e.b]);
            assert_eq!(x.zero_set().intersection(y.zero_set()).len(), 2);
            assert_eq!(p.edge_direction(&y, &x).unwrap(), -e.direction);
        }
        assert!(is_euclidean_om(&om));
        assert!(!is_totally_non_euclidean(&om));
        let comps = graph.very_strong_components();
        assert!(comps.iter().all(|c| c.isolated));
    }

    #[test]
    fn rank3_and_realizable_programs_are_euclidean() {
        let rows = vec![vec![3, 1, 4], vec![1, -5, 8], vec![2, 6, -5], vec![-3, 5, 8], vec![9, 7, 9], vec![3, -2, 3], vec![1, 1, 1]];
        let om = OrientedMatroid::from_points(&IntConfig::new(3, rows).unwrap()).unwrap();
        assert!(euclidean_all(&om).iter().all(|v| v.euclidean));
        let sum = w3().direct_sum(&w3()).unwrap();
        assert!(is_euclidean_om(&sum));
    }
}
