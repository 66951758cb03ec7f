//! Signs, packed sign vectors and element sets.
//!
//! Ground-set elements are dense indices `0..n` with `n <= 64`. A [`SignVector`]
//! stores its positive and negative parts as two bitmasks, so composition,
//! separation and conformality are a handful of word operations.

use std::fmt;
use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ground set the packed representation supports.
pub const MAX_ELEMENTS: usize = 64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Zero,
    Plus,
}

impl Sign {
    pub fn from_char(c: char) -> Option<Sign> {
        match c {
            '+' => Some(Sign::Plus),
            '-' => Some(Sign::Minus),
            '0' => Some(Sign::Zero),
            _ => None,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
            Sign::Zero => '0',
        }
    }

    pub fn from_i32(v: i32) -> Sign {
        match v.signum() {
            1 => Sign::Plus,
            -1 => Sign::Minus,
            _ => Sign::Zero,
        }
    }

    pub fn to_i32(self) -> i32 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
            Sign::Zero => 0,
        }
    }

    pub fn of<T: num_traits::Signed>(x: &T) -> Sign {
        if x.is_positive() {
            Sign::Plus
        } else if x.is_negative() {
            Sign::Minus
        } else {
            Sign::Zero
        }
    }

    pub fn is_zero(self) -> bool {
        self == Sign::Zero
    }

    /// `(-1)^k` as a sign.
    pub fn parity(k: usize) -> Sign {
        if k % 2 == 0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
            Sign::Zero => Sign::Zero,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_i32(self.to_i32() * rhs.to_i32())
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A subset of the ground set, stored as a bitmask.
#[derive(Copy, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementSet(pub u64);

impl ElementSet {
    pub const EMPTY: ElementSet = ElementSet(0);

    pub fn full(n: usize) -> ElementSet {
        if n >= 64 {
            ElementSet(u64::MAX)
        } else {
            ElementSet((1u64 << n) - 1)
        }
    }

    pub fn singleton(e: usize) -> ElementSet {
        ElementSet(1u64 << e)
    }

    pub fn from_elements<I: IntoIterator<Item = usize>>(it: I) -> ElementSet {
        ElementSet(it.into_iter().fold(0u64, |m, e| m | (1u64 << e)))
    }

    pub fn contains(self, e: usize) -> bool {
        self.0 >> e & 1 == 1
    }

    pub fn insert(&mut self, e: usize) {
        self.0 |= 1u64 << e;
    }

    pub fn remove(&mut self, e: usize) {
        self.0 &= !(1u64 << e);
    }

    pub fn with(self, e: usize) -> ElementSet {
        ElementSet(self.0 | (1u64 << e))
    }

    pub fn without(self, e: usize) -> ElementSet {
        ElementSet(self.0 & !(1u64 << e))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 | other.0)
    }

    pub fn intersection(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 & other.0)
    }

    pub fn difference(self, other: ElementSet) -> ElementSet {
        ElementSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: ElementSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let e = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(e)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn min(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }
}

impl fmt::Debug for ElementSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for ElementSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for ElementSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let elems = Vec::<usize>::deserialize(d)?;
        if let Some(&e) = elems.iter().find(|&&e| e >= MAX_ELEMENTS) {
            return Err(serde::de::Error::custom(format!("element {e} out of range")));
        }
        Ok(ElementSet::from_elements(elems))
    }
}

impl FromIterator<usize> for ElementSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        ElementSet::from_elements(iter)
    }
}

/// A `{+,0,-}` assignment to the ground set.
#[derive(Copy, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector {
    len: u8,
    pos: u64,
    neg: u64,
}

impl SignVector {
    pub fn zero(len: usize) -> SignVector {
        assert!(len <= MAX_ELEMENTS, "ground set too large");
        SignVector { len: len as u8, pos: 0, neg: 0 }
    }

    /// Builds a vector from its positive and negative parts. The parts must be disjoint.
    pub fn from_parts(len: usize, pos: ElementSet, neg: ElementSet) -> SignVector {
        debug_assert!(pos.intersection(neg).is_empty());
        debug_assert!(pos.union(neg).is_subset(ElementSet::full(len)));
        SignVector { len: len as u8, pos: pos.0, neg: neg.0 }
    }

    pub fn from_signs(signs: &[Sign]) -> SignVector {
        let mut v = SignVector::zero(signs.len());
        for (e, &s) in signs.iter().enumerate() {
            v.set(e, s);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, e: usize) -> Sign {
        if self.pos >> e & 1 == 1 {
            Sign::Plus
        } else if self.neg >> e & 1 == 1 {
            Sign::Minus
        } else {
            Sign::Zero
        }
    }

    pub fn set(&mut self, e: usize, s: Sign) {
        debug_assert!(e < self.len());
        let bit = 1u64 << e;
        self.pos &= !bit;
        self.neg &= !bit;
        match s {
            Sign::Plus => self.pos |= bit,
            Sign::Minus => self.neg |= bit,
            Sign::Zero => {}
        }
    }

    pub fn with(mut self, e: usize, s: Sign) -> SignVector {
        self.set(e, s);
        self
    }

    pub fn positive(&self) -> ElementSet {
        ElementSet(self.pos)
    }

    pub fn negative(&self) -> ElementSet {
        ElementSet(self.neg)
    }

    pub fn support(&self) -> ElementSet {
        ElementSet(self.pos | self.neg)
    }

    /// The zero set `z(X)`.
    pub fn zero_set(&self) -> ElementSet {
        ElementSet::full(self.len()).difference(self.support())
    }

    pub fn is_zero(&self) -> bool {
        self.pos | self.neg == 0
    }

    pub fn signs(&self) -> Vec<Sign> {
        (0..self.len()).map(|e| self.get(e)).collect()
    }

    fn check_len(&self, other: &SignVector) -> Result<()> {
        if self.len != other.len {
            return Err(Error::LengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(())
    }

    /// `X ∘ Y`: takes `X_e` where nonzero, else `Y_e`.
    pub fn compose(&self, other: &SignVector) -> Result<SignVector> {
        self.check_len(other)?;
        Ok(self.compose_unchecked(other))
    }

    pub(crate) fn compose_unchecked(&self, other: &SignVector) -> SignVector {
        let free = !(self.pos | self.neg);
        SignVector {
            len: self.len,
            pos: self.pos | (other.pos & free),
            neg: self.neg | (other.neg & free),
        }
    }

    /// `sep(X, Y) = {e : X_e = -Y_e != 0}`.
    pub fn separation(&self, other: &SignVector) -> Result<ElementSet> {
        self.check_len(other)?;
        Ok(self.separation_unchecked(other))
    }

    pub(crate) fn separation_unchecked(&self, other: &SignVector) -> ElementSet {
        ElementSet((self.pos & other.neg) | (self.neg & other.pos))
    }

    pub fn conformal(&self, other: &SignVector) -> Result<bool> {
        Ok(self.separation(other)?.is_empty())
    }

    pub(crate) fn conformal_unchecked(&self, other: &SignVector) -> bool {
        self.separation_unchecked(other).is_empty()
    }

    /// `X <= Y` in the face order: `X_e ∈ {0, Y_e}` for every `e`.
    pub fn conforms_to(&self, other: &SignVector) -> bool {
        self.pos & !other.pos == 0 && self.neg & !other.neg == 0
    }

    /// Negates the coordinates in `a`.
    pub fn reorient(&self, a: ElementSet) -> SignVector {
        let m = a.0;
        SignVector {
            len: self.len,
            pos: (self.pos & !m) | (self.neg & m),
            neg: (self.neg & !m) | (self.pos & m),
        }
    }

    /// Swaps the coordinates `a` and `b`.
    pub fn swap(&self, a: usize, b: usize) -> SignVector {
        let (sa, sb) = (self.get(a), self.get(b));
        self.with(a, sb).with(b, sa)
    }

    /// Restriction to the elements of `keep`, relabelled densely in increasing order.
    pub fn restrict(&self, keep: ElementSet) -> SignVector {
        let mut out = SignVector::zero(keep.len());
        for (i, e) in keep.iter().enumerate() {
            out.set(i, self.get(e));
        }
        out
    }

    /// Appends one coordinate at the end.
    pub fn extend(&self, s: Sign) -> SignVector {
        let mut out = SignVector { len: self.len + 1, pos: self.pos, neg: self.neg };
        out.set(self.len(), s);
        out
    }

    /// Pads with zeros to length `len`, placing the current entries at `offset`.
    pub fn embed(&self, len: usize, offset: usize) -> SignVector {
        SignVector { len: len as u8, pos: self.pos << offset, neg: self.neg << offset }
    }

    /// Applies `perm`: entry `e` moves to position `perm[e]`.
    pub fn permute(&self, perm: &[usize]) -> SignVector {
        let mut out = SignVector::zero(self.len());
        for e in 0..self.len() {
            out.set(perm[e], self.get(e));
        }
        out
    }

    /// Representative of `{X, -X}` whose first nonzero entry is `+`.
    pub fn normalized(&self) -> SignVector {
        match self.support().min() {
            Some(e) if self.get(e) == Sign::Minus => -*self,
            _ => *self,
        }
    }
}

impl Neg for SignVector {
    type Output = SignVector;
    fn neg(self) -> SignVector {
        SignVector { len: self.len, pos: self.neg, neg: self.pos }
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in 0..self.len() {
            write!(f, "{}", self.get(e).to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl std::str::FromStr for SignVector {
    type Err = Error;
    fn from_str(s: &str) -> Result<SignVector> {
        let signs = s
            .trim()
            .chars()
            .map(|c| Sign::from_char(c).ok_or_else(|| Error::Parse(format!("bad sign character {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if signs.len() > MAX_ELEMENTS {
            return Err(Error::Parse(format!("sign vector longer than {MAX_ELEMENTS}")));
        }
        Ok(SignVector::from_signs(&signs))
    }
}

impl Serialize for SignVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SignVector {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv(s: &str) -> SignVector {
        s.parse().unwrap()
    }

    #[test]
    fn compose_examples() {
        assert_eq!(sv("+0-").compose(&sv("0--")).unwrap(), sv("+--"));
        assert_eq!(sv("+0-").compose(&sv("000")).unwrap(), sv("+0-"));
        assert_eq!(sv("0+").compose(&sv("--")).unwrap(), sv("-+"));
        assert!(matches!(sv("+0").compose(&sv("+00")), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn separation_examples() {
        assert_eq!(sv("+0-").separation(&sv("-0-")).unwrap(), ElementSet::singleton(0));
        assert!(sv("+-0").separation(&sv("+-0")).unwrap().is_empty());
        assert!(sv("+0-").separation(&sv("++0")).unwrap().is_empty());
        assert!(sv("+").separation(&sv("+0")).is_err());
    }

    #[test]
    fn conformal_examples() {
        assert!(sv("+0-").conformal(&sv("++0")).unwrap());
        let x = sv("+-0+");
        assert!(!x.conformal(&-x).unwrap());
        assert!(sv("0--").conformal(&sv("+0-")).unwrap());
        assert!(sv("0").conformal(&sv("00")).is_err());
    }

    #[test]
    fn sign_arithmetic() {
        for a in [Sign::Plus, Sign::Zero, Sign::Minus] {
            assert_eq!(-(-a), a);
            for b in [Sign::Plus, Sign::Zero, Sign::Minus] {
                assert_eq!(a * b, b * a);
                for c in [Sign::Plus, Sign::Zero, Sign::Minus] {
                    assert_eq!((a * b) * c, a * (b * c));
                }
            }
        }
    }

    #[test]
    fn element_set_iteration() {
        let s = ElementSet::from_elements([5, 1, 9]);
        assert_eq!(s.to_vec(), vec![1, 5, 9]);
        assert_eq!(s.len(), 3);
        assert_eq!(s.without(5).to_vec(), vec![1, 9]);
    }

    fn arb_pair() -> impl Strategy<Value = (SignVector, SignVector, SignVector)> {
        (1usize..12).prop_flat_map(|n| {
            let v = prop::collection::vec(prop_oneof![Just(Sign::Plus), Just(Sign::Zero), Just(Sign::Minus)], n);
            (v.clone(), v.clone(), v).prop_map(|(a, b, c)| {
                (SignVector::from_signs(&a), SignVector::from_signs(&b), SignVector::from_signs(&c))
            })
        })
    }

    proptest! {
        #[test]
        fn sign_vector_laws((x, y, z) in arb_pair()) {
            prop_assert_eq!(-(-x), x);
            prop_assert_eq!(x.separation(&y).unwrap(), y.separation(&x).unwrap());
            prop_assert!(x.separation(&-y).unwrap().intersection(x.separation(&y).unwrap()).is_empty());
            let xy = x.compose(&y).unwrap();
            prop_assert_eq!(xy.compose(&z).unwrap(), x.compose(&y.compose(&z).unwrap()).unwrap());
            prop_assert_eq!(xy == y.compose(&x).unwrap(), x.separation(&y).unwrap().is_empty());
            prop_assert_eq!(xy.zero_set(), x.zero_set().intersection(y.zero_set()));
            prop_assert_eq!(x.zero_set().union(x.support()), ElementSet::full(x.len()));
            prop_assert_eq!(x.to_string().parse::<SignVector>().unwrap(), x);
        }
    }
}
