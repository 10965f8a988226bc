//! Addressing of the dyadic tree.
//!
//! A [`MultiIndex`] is a finite 0/1 word; it names the dyadic interval
//! [`DyadicInterval`] obtained by reading the word as a binary position, and
//! the Haar function with natural number `n = 2^|α| + position`. Words with
//! exactly `d - 1` ones are in bijection with [`GapVector`]s of length `d`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};

/// Longest supported multi-index; positions fit in a machine word.
pub const MAX_INDEX_LEN: usize = 62;

/// A word over {0,1}, most significant letter first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex {
    len: u8,
    bits: u64,
}

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex { len: 0, bits: 0 };

    pub fn empty() -> Self {
        Self::EMPTY
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        check_len(bits.len())?;
        let mut out = Self::EMPTY;
        for &b in bits {
            if b > 1 {
                return Err(Error::Invalid(format!("multi-index letter {b} is not 0 or 1")));
            }
            out.bits = (out.bits << 1) | u64::from(b);
            out.len += 1;
        }
        Ok(out)
    }

    /// The index of length `len` whose binary position is `position`.
    pub fn from_position(len: usize, position: u64) -> Result<Self> {
        check_len(len)?;
        if len < 64 && position >> len != 0 {
            return Err(Error::Invalid(format!("position {position} does not fit in {len} bits")));
        }
        Ok(Self { len: len as u8, bits: position })
    }

    /// `0_k`, the word of `k` zeros.
    pub fn zeros(k: usize) -> Result<Self> {
        Self::from_position(k, 0)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Letter `ν`, 1-based as in `α = (α_1, …, α_k)`.
    pub fn bit(&self, nu: usize) -> u8 {
        assert!(nu >= 1 && nu <= self.len(), "letter {nu} out of range");
        ((self.bits >> (self.len() - nu)) & 1) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (1..=self.len()).map(|nu| self.bit(nu)).collect()
    }

    /// `j = Σ α_ν 2^{|α|-ν}`.
    pub fn position(&self) -> u64 {
        self.bits
    }

    pub fn ones(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn push(&self, b: u8) -> Result<Self> {
        check_len(self.len() + 1)?;
        Ok(Self { len: self.len + 1, bits: (self.bits << 1) | u64::from(b & 1) })
    }

    /// Prepends a letter: the index of `V_b V^α`.
    pub fn prepend(&self, b: u8) -> Result<Self> {
        check_len(self.len() + 1)?;
        Ok(Self { len: self.len + 1, bits: self.bits | (u64::from(b & 1) << self.len) })
    }

    pub fn concat(&self, other: &MultiIndex) -> Result<Self> {
        check_len(self.len() + other.len())?;
        Ok(Self { len: self.len + other.len, bits: (self.bits << other.len) | other.bits })
    }

    /// Appends `k` zeros: the index of `V^α V_0^k`.
    pub fn append_zeros(&self, k: usize) -> Result<Self> {
        check_len(self.len() + k)?;
        Ok(Self { len: self.len + k as u8, bits: self.bits << k })
    }

    /// Drops the last `k` letters.
    pub fn truncate_end(&self, k: usize) -> Self {
        let k = k.min(self.len());
        Self { len: self.len - k as u8, bits: self.bits >> k }
    }

    /// First `k` letters.
    pub fn prefix(&self, k: usize) -> Self {
        self.truncate_end(self.len().saturating_sub(k))
    }

    /// True when `self` is a prefix of `other`, i.e. `I_other ⊆ I_self`.
    pub fn is_prefix_of(&self, other: &MultiIndex) -> bool {
        self.len <= other.len && other.bits >> (other.len - self.len) == self.bits
    }

    /// Number of trailing zeros, capped at the length.
    pub fn trailing_zeros(&self) -> usize {
        if self.bits == 0 {
            self.len()
        } else {
            (self.bits.trailing_zeros() as usize).min(self.len())
        }
    }

    /// Number of leading zeros, capped at the length.
    pub fn leading_zeros(&self) -> usize {
        if self.bits == 0 {
            self.len()
        } else {
            self.len() - (64 - self.bits.leading_zeros() as usize)
        }
    }

    /// Every index of length `k`, in increasing position order.
    pub fn all_of_length(k: usize) -> Result<Vec<MultiIndex>> {
        check_len(k)?;
        if k > 24 {
            return Err(Error::Capacity { what: "enumerated multi-index length", got: k, max: 24 });
        }
        Ok((0..1u64 << k).map(|j| Self { len: k as u8, bits: j }).collect())
    }

    /// All indices with `|α| <= max_len`, shortest first.
    pub fn all_up_to(max_len: usize) -> Result<Vec<MultiIndex>> {
        let mut out = Vec::new();
        for k in 0..=max_len {
            out.extend(Self::all_of_length(k)?);
        }
        Ok(out)
    }

    /// Position left-aligned in 62 bits; with the length it gives a
    /// lexicographic order where every subtree is a contiguous range.
    fn left_aligned(&self) -> u64 {
        self.bits << (MAX_INDEX_LEN - self.len())
    }

    /// Smallest index after the whole subtree rooted at `self` in the map
    /// order; `None` when the subtree runs to the end of the tree.
    pub(crate) fn subtree_upper(&self) -> Option<MultiIndex> {
        let v = self.left_aligned() + (1u64 << (MAX_INDEX_LEN - self.len()));
        if v >= 1u64 << MAX_INDEX_LEN {
            return None;
        }
        let tz = (v.trailing_zeros() as usize).min(MAX_INDEX_LEN);
        Some(Self { len: (MAX_INDEX_LEN - tz) as u8, bits: v >> tz })
    }

    fn sort_key(&self) -> (u64, u8) {
        (self.left_aligned(), self.len)
    }
}

fn check_len(len: usize) -> Result<()> {
    if len > MAX_INDEX_LEN {
        Err(Error::Capacity { what: "multi-index length", got: len, max: MAX_INDEX_LEN })
    } else {
        Ok(())
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for nu in 1..=self.len() {
            if nu > 1 {
                write!(f, ",")?;
            }
            write!(f, "{}", self.bit(nu))?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `n ↦ α` with `n = 2^{|α|} + Σ α_ν 2^{|α|-ν}`.
pub fn index_to_multi(n: u64) -> Result<MultiIndex> {
    if n == 0 {
        return Err(Error::ZeroIndex);
    }
    let len = 63 - n.leading_zeros() as usize;
    MultiIndex::from_position(len, n - (1u64 << len))
}

pub fn multi_to_index(alpha: &MultiIndex) -> u64 {
    (1u64 << alpha.len()) + alpha.position()
}

/// The half-open dyadic interval `(j/2^k, (j+1)/2^k]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DyadicInterval {
    pub level: u32,
    pub position: u64,
}

impl DyadicInterval {
    pub fn left(&self) -> BigRational {
        BigRational::new(BigInt::from(self.position), BigInt::from(1u8) << self.level)
    }

    pub fn right(&self) -> BigRational {
        BigRational::new(BigInt::from(self.position + 1), BigInt::from(1u8) << self.level)
    }

    pub fn length(&self) -> BigRational {
        BigRational::new(BigInt::from(1u8), BigInt::from(1u8) << self.level)
    }

    /// Membership with the left endpoint excluded and the right one included.
    pub fn contains_point(&self, t: &BigRational) -> bool {
        *t > self.left() && *t <= self.right()
    }

    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.level >= self.level && other.position >> (other.level - self.level) == self.position
    }

    /// Exact endpoint comparison.
    pub fn is_disjoint(&self, other: &DyadicInterval) -> bool {
        self.right() <= other.left() || other.right() <= self.left()
    }
}

pub fn interval_of(alpha: &MultiIndex) -> DyadicInterval {
    DyadicInterval { level: alpha.len() as u32, position: alpha.position() }
}

/// Number of ones in the binary expansion: `n ∈ N_d`.
pub fn chaos_order(n: u64) -> Result<usize> {
    if n == 0 {
        return Err(Error::ZeroIndex);
    }
    Ok(n.count_ones() as usize)
}

/// Gaps `(k_1, …, k_d)` between the ones of `n = 2^{i_1} + … + 2^{i_d}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GapVector {
    gaps: Vec<u32>,
}

impl GapVector {
    pub fn new(gaps: Vec<u32>) -> Result<Self> {
        if gaps.is_empty() {
            return Err(Error::Invalid("gap vector needs d >= 1 entries".into()));
        }
        let len: usize = gaps.iter().map(|&k| k as usize).sum::<usize>() + gaps.len() - 1;
        check_len(len)?;
        Ok(Self { gaps })
    }

    pub fn order(&self) -> usize {
        self.gaps.len()
    }

    pub fn gaps(&self) -> &[u32] {
        &self.gaps
    }

    /// `(0_{k_1}, 1, 0_{k_2}, 1, …, 1, 0_{k_d})`.
    pub fn to_multi(&self) -> MultiIndex {
        let mut alpha = MultiIndex::EMPTY;
        for (i, &k) in self.gaps.iter().enumerate() {
            if i > 0 {
                alpha = alpha.push(1).expect("length checked at construction");
            }
            alpha = alpha.append_zeros(k as usize).expect("length checked at construction");
        }
        alpha
    }

    pub fn from_multi(alpha: &MultiIndex) -> Self {
        let mut gaps = vec![0u32];
        for b in alpha.bits() {
            if b == 1 {
                gaps.push(0);
            } else {
                *gaps.last_mut().unwrap() += 1;
            }
        }
        Self { gaps }
    }

    /// Exponents `i_1 > … > i_d` from the triangular system.
    pub fn exponents(&self) -> Vec<u32> {
        let d = self.gaps.len();
        let mut out = vec![0u32; d];
        let mut acc = 0u32;
        for j in (0..d).rev() {
            acc += self.gaps[j];
            out[j] = acc + (d - 1 - j) as u32;
        }
        out
    }
}

pub fn nd_to_gaps(n: u64) -> Result<GapVector> {
    Ok(GapVector::from_multi(&index_to_multi(n)?))
}

pub fn gaps_to_nd(g: &GapVector) -> u64 {
    g.exponents().iter().map(|&i| 1u64 << i).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(bits: &[u8]) -> MultiIndex {
        MultiIndex::from_bits(bits).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn numbering_examples() {
        assert_eq!(index_to_multi(1).unwrap(), MultiIndex::empty());
        assert_eq!(index_to_multi(5).unwrap(), mi(&[0, 1]));
        assert_eq!(index_to_multi(6).unwrap(), mi(&[1, 0]));
        assert_eq!(index_to_multi(0), Err(Error::ZeroIndex));
        assert_eq!(multi_to_index(&MultiIndex::empty()), 1);
        assert_eq!(multi_to_index(&mi(&[0, 1])), 5);
        assert_eq!(multi_to_index(&mi(&[1, 0, 1])), 13);
    }

    #[test]
    fn round_trip_first_million() {
        for n in 1..=(1u64 << 20) {
            assert_eq!(multi_to_index(&index_to_multi(n).unwrap()), n);
        }
        let n = (1u64 << 30) + 12345;
        assert_eq!(multi_to_index(&index_to_multi(n).unwrap()), n);
    }

    #[test]
    fn interval_examples() {
        let i = interval_of(&MultiIndex::empty());
        assert_eq!((i.left(), i.right()), (q(0, 1), q(1, 1)));
        let i = interval_of(&mi(&[1, 0]));
        assert_eq!((i.left(), i.right()), (q(1, 2), q(3, 4)));
        let i = interval_of(&mi(&[0, 0, 1]));
        assert_eq!((i.left(), i.right()), (q(1, 8), q(2, 8)));
        assert_eq!(i.length(), q(1, 8));
    }

    #[test]
    fn half_open_membership() {
        let left = interval_of(&mi(&[0]));
        let right = interval_of(&mi(&[1]));
        assert!(left.contains_point(&q(1, 2)));
        assert!(!right.contains_point(&q(1, 2)));
        assert!(!left.contains_point(&q(0, 1)));
        assert!(right.contains_point(&q(1, 1)));
    }

    #[test]
    fn chaos_order_examples() {
        assert_eq!(chaos_order(1).unwrap(), 1);
        assert_eq!(chaos_order(6).unwrap(), 2);
        assert!(chaos_order(0).is_err());
        for n in 1..200u64 {
            for k in 0..=10 {
                assert_eq!(chaos_order(n << k).unwrap(), chaos_order(n).unwrap());
            }
        }
    }

    #[test]
    fn gap_examples() {
        let g = nd_to_gaps(6).unwrap();
        assert_eq!(g.gaps(), &[0, 1]);
        assert_eq!(g.exponents(), vec![2, 1]);
        for k in 0..20 {
            assert_eq!(nd_to_gaps(1 << k).unwrap().gaps(), &[k]);
        }
        let g = GapVector::new(vec![1, 0, 2]).unwrap();
        assert_eq!(g.exponents(), vec![5, 3, 2]);
        assert_eq!(gaps_to_nd(&g), 44);
        assert_eq!(nd_to_gaps(44).unwrap(), g);
    }

    #[test]
    fn gaps_and_multi_agree() {
        for n in 1..4096u64 {
            let g = nd_to_gaps(n).unwrap();
            assert_eq!(g.order(), chaos_order(n).unwrap());
            assert_eq!(gaps_to_nd(&g), n);
            assert_eq!(g.to_multi(), index_to_multi(n).unwrap());
        }
    }

    #[test]
    fn capacity_is_enforced() {
        assert!(MultiIndex::zeros(62).is_ok());
        assert!(matches!(MultiIndex::zeros(63), Err(Error::Capacity { .. })));
        let long = MultiIndex::zeros(62).unwrap();
        assert!(long.push(0).is_err());
        assert!(long.concat(&mi(&[1])).is_err());
    }

    #[test]
    fn concat_identities() {
        let a = mi(&[1, 0]);
        let b = mi(&[0, 1, 1]);
        let c = mi(&[1]);
        assert_eq!(a.concat(&MultiIndex::empty()).unwrap(), a);
        assert_eq!(a.concat(&b).unwrap().concat(&c).unwrap(), a.concat(&b.concat(&c).unwrap()).unwrap());
        assert_eq!(a.concat(&b).unwrap().bits(), vec![1, 0, 0, 1, 1]);
        assert_eq!(b.prepend(1).unwrap(), mi(&[1, 0, 1, 1]));
        assert_eq!(b.leading_zeros(), 1);
        assert_eq!(a.trailing_zeros(), 1);
        assert_eq!(MultiIndex::zeros(3).unwrap().trailing_zeros(), 3);
    }

    #[test]
    fn ordering_keeps_subtrees_contiguous() {
        let mut all = MultiIndex::all_up_to(6).unwrap();
        all.sort();
        let root = mi(&[0, 1]);
        let members: Vec<usize> =
            all.iter().enumerate().filter(|(_, b)| root.is_prefix_of(b)).map(|(i, _)| i).collect();
        let (lo, hi) = (members[0], *members.last().unwrap());
        assert_eq!(hi - lo + 1, members.len());
        assert_eq!(all[lo], root);
    }
}
