//! Vector configurations over an ordered scalar type.
//!
//! Everything here is generic over [`Scalar`]: integer types and rationals give exact
//! signs, floats give signs up to rounding. The crate root exposes aliases for the
//! common choices.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::chirotope::{Chirotope, Subsets};
use crate::error::{Error, Result};
use crate::sign::{ElementSet, Sign, SignVector};

/// Ordered ring elements with exact (or at least consistent) division by a known factor.
pub trait Scalar: Clone + Debug + Num + Signed + PartialOrd {}

impl<T: Clone + Debug + Num + Signed + PartialOrd> Scalar for T {}

/// Scalars with a true division.
pub trait Field: Scalar + FromPrimitive {}

impl<T> Field for Ratio<T>
where
    T: Clone + Debug + num_integer::Integer + Signed + FromPrimitive,
    Ratio<T>: FromPrimitive,
{
}
impl Field for f64 {}
impl Field for f32 {}

/// Determinant by fraction-free elimination. Exact for integral domains.
pub fn determinant<T: Scalar>(rows: &[&[T]]) -> T {
    let n = rows.len();
    let mut m: Vec<Vec<T>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut negate = false;
    let mut prev = T::one();
    for k in 0..n {
        let Some(p) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return T::zero();
        };
        if p != k {
            m.swap(p, k);
            negate = !negate;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = m[i][j].clone() * m[k][k].clone() - m[i][k].clone() * m[k][j].clone();
                m[i][j] = v / prev.clone();
            }
            m[i][k] = T::zero();
        }
        prev = m[k][k].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

pub fn determinant_sign<T: Scalar>(rows: &[&[T]]) -> Sign {
    Sign::of(&determinant(rows))
}

/// Rank of a rectangular matrix by fraction-free elimination.
pub fn matrix_rank<T: Scalar>(rows: &[&[T]]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut m: Vec<Vec<T>> = rows.iter().map(|r| r.to_vec()).collect();
    let mut prev = T::one();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, rank);
        for i in rank + 1..m.len() {
            for j in c + 1..cols {
                let v = m[i][j].clone() * m[rank][c].clone() - m[i][c].clone() * m[rank][j].clone();
                m[i][j] = v / prev.clone();
            }
            m[i][c] = T::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Basis of the right nullspace `{x : M x = 0}` over a field.
pub fn nullspace<T: Field>(rows: &[Vec<T>], cols: usize) -> Vec<Vec<T>> {
    let mut m: Vec<Vec<T>> = rows.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(p, r);
        let inv = T::one() / m[r][c].clone();
        for j in 0..cols {
            m[r][j] = m[r][j].clone() * inv.clone();
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    m[i][j] = m[i][j].clone() - f.clone() * m[r][j].clone();
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![T::zero(); cols];
            v[fc] = T::one();
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = -m[i][fc].clone();
            }
            v
        })
        .collect()
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

/// `n` vectors in dimension `rank`, one row per ground-set element.
#[derive(Clone, Debug, PartialEq)]
pub struct PointConfig<T> {
    rank: usize,
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> PointConfig<T> {
    pub fn new(rank: usize, rows: Vec<Vec<T>>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::RankDeficient { expected: 1, found: 0 });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != rank) {
            return Err(Error::Parse(format!("row of length {} in a rank-{rank} configuration", bad.len())));
        }
        let cfg = PointConfig { rank, rows };
        let found = cfg.matrix_rank();
        if found < rank {
            return Err(Error::RankDeficient { expected: rank, found });
        }
        Ok(cfg)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn row(&self, e: usize) -> &[T] {
        &self.rows[e]
    }

    pub fn matrix_rank(&self) -> usize {
        let refs: Vec<&[T]> = self.rows.iter().map(|r| r.as_slice()).collect();
        matrix_rank(&refs)
    }

    pub fn subset_rank(&self, a: ElementSet) -> usize {
        let refs: Vec<&[T]> = a.iter().map(|e| self.rows[e].as_slice()).collect();
        matrix_rank(&refs)
    }

    /// Sign of the determinant of the rows `elems`, in the given order.
    pub fn det_sign(&self, elems: &[usize]) -> Sign {
        let refs: Vec<&[T]> = elems.iter().map(|&e| self.rows[e].as_slice()).collect();
        determinant_sign(&refs)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> PointConfig<U> {
        PointConfig { rank: self.rank, rows: self.rows.iter().map(|r| r.iter().map(&f).collect()).collect() }
    }
}

/// Points `(1, t, t², …)` for `t = 1..=n`; the alternating (cyclic polytope) configuration.
pub fn moment_curve(rank: usize, n: usize) -> PointConfig<i128> {
    assert!(n >= rank, "need at least {rank} points");
    let rows = (1..=n as i128).map(|t| (0..rank as u32).map(|k| t.pow(k)).collect()).collect();
    PointConfig { rank, rows }
}

/// Basis orientations of a vector configuration.
pub fn chirotope_from_points<T: Scalar>(config: &PointConfig<T>) -> Result<Chirotope> {
    let (r, n) = (config.rank(), config.n());
    if n < r {
        return Err(Error::RankDeficient { expected: r, found: n });
    }
    let signs = Subsets::new(n, r).map(|b| config.det_sign(&b)).collect();
    Chirotope::new(r, n, signs)
}

/// Cocircuits computed straight from the geometry: for every independent (r-1)-set,
/// the normal of the hyperplane it spans is found by elimination and each vector is
/// classified by the sign of its inner product with that normal.
pub fn hyperplane_cocircuits<T: Field>(config: &PointConfig<T>) -> Vec<SignVector> {
    let (r, n) = (config.rank(), config.n());
    let mut out = std::collections::BTreeSet::new();
    for a in Subsets::new(n, r - 1) {
        let rows: Vec<Vec<T>> = a.iter().map(|&e| config.row(e).to_vec()).collect();
        let ns = nullspace(&rows, r);
        if ns.len() != 1 {
            continue;
        }
        let normal = &ns[0];
        let signs: Vec<Sign> = (0..n).map(|e| Sign::of(&dot(config.row(e), normal))).collect();
        let x = SignVector::from_signs(&signs);
        out.insert(x);
        out.insert(-x);
    }
    out.into_iter().collect()
}

/// A configuration extended by one vector, with the seed and number of draws it took.
#[derive(Clone, Debug)]
pub struct ThroughExtension<T> {
    pub config: PointConfig<T>,
    pub seed: u64,
    pub attempts: usize,
}

/// Appends one vector lying on every target hyperplane (given by cocircuit zero sets) and
/// otherwise generic. Coefficients are random rationals whose denominators grow with the
/// attempt count; draws that create an unintended vanishing determinant are rejected.
pub fn realizable_extend_through<T: Field>(
    config: &PointConfig<T>,
    targets: &[ElementSet],
    seed: u64,
) -> Result<ThroughExtension<T>> {
    let (r, n) = (config.rank(), config.n());
    if targets.len() > r.saturating_sub(1) {
        return Err(Error::Precondition(format!("at most {} target hyperplanes in rank {r}", r - 1)));
    }
    let mut normals = Vec::new();
    for &t in targets {
        if t.iter().any(|e| e >= n) {
            return Err(Error::ElementOutOfRange(t.iter().max().unwrap_or(0)));
        }
        let rows: Vec<Vec<T>> = t.iter().map(|e| config.row(e).to_vec()).collect();
        let ns = nullspace(&rows, r);
        if ns.len() != 1 {
            return Err(Error::Precondition(format!("{t:?} does not span a hyperplane")));
        }
        normals.push(ns[0].clone());
    }
    let basis = if normals.is_empty() {
        (0..r)
            .map(|i| (0..r).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect()
    } else {
        nullspace(&normals, r)
    };
    if basis.is_empty() {
        return Err(Error::EmptyIntersection);
    }

    let on_target = |a: &[usize]| {
        normals.iter().any(|c| a.iter().all(|&e| dot(config.row(e), c).is_zero()))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=10_000usize {
        let bound = 4 + attempt as i64;
        let v: Vec<T> = basis.iter().fold(vec![T::zero(); r], |acc, b| {
            let num = T::from_i64(rng.gen_range(-bound..=bound)).expect("small integer");
            let den = T::from_i64(rng.gen_range(1..=bound)).expect("small integer");
            let c = num / den;
            acc.iter().zip(b).map(|(x, y)| x.clone() + c.clone() * y.clone()).collect()
        });
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        let mut rows = config.rows().to_vec();
        rows.push(v);
        let candidate = PointConfig { rank: r, rows };
        let generic = Subsets::new(n, r - 1).all(|a| {
            let mut elems = a.clone();
            elems.push(n);
            candidate.det_sign(&elems) != Sign::Zero
                || on_target(&a)
                || config.subset_rank(ElementSet::from_elements(a.iter().copied())) < r - 1
        });
        if generic {
            return Ok(ThroughExtension { config: candidate, seed, attempts: attempt });
        }
    }
    Err(Error::Verification("no generic extension found within 10000 draws".into()))
}
