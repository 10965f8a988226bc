use std::collections::btree_map;
use std::collections::BTreeMap;
use std::ops::Bound;

use num_complex::Complex64;
use num_traits::Zero;

use super::{check_level, DyadicStep};
use crate::dyadic::MultiIndex;
use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// Sparse Haar expansion `x = Σ ξ_α V^α h`.
///
/// Zero coefficients are never stored. Iteration order is depth-first
/// (a node, then its left subtree, then its right subtree).
#[derive(Clone, Debug, PartialEq)]
pub struct HaarCoeffMap<S> {
    map: BTreeMap<MultiIndex, S>,
}

impl<S: Scalar> Default for HaarCoeffMap<S> {
    fn default() -> Self {
        Self::new()
    }
}

impl<S: Scalar> HaarCoeffMap<S> {
    pub fn new() -> Self {
        Self { map: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, alpha: &MultiIndex) -> Option<&S> {
        self.map.get(alpha)
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> S {
        self.map.get(alpha).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> btree_map::Iter<'_, MultiIndex, S> {
        self.map.iter()
    }

    /// Adds `v` to the coefficient at `alpha`, dropping it if it cancels.
    pub fn add_at(&mut self, alpha: MultiIndex, v: S) {
        if v.is_zero() {
            return;
        }
        match self.map.entry(alpha) {
            btree_map::Entry::Vacant(e) => {
                e.insert(v);
            }
            btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + v;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// Length of the longest stored index, `None` when empty.
    pub fn max_len(&self) -> Option<usize> {
        self.map.keys().map(|a| a.len()).max()
    }

    /// Entries in the subtree rooted at `alpha` (including `alpha`).
    pub fn subtree(&self, alpha: &MultiIndex) -> impl Iterator<Item = (&MultiIndex, &S)> {
        let upper = match alpha.subtree_upper() {
            Some(u) => Bound::Excluded(u),
            None => Bound::Unbounded,
        };
        self.map.range((Bound::Included(*alpha), upper))
    }

    fn has_subtree(&self, alpha: &MultiIndex) -> bool {
        self.subtree(alpha).next().is_some()
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::new();
        for (a, v) in &self.map {
            out.add_at(*a, v.clone() * s.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, v) in &other.map {
            out.add_at(*a, v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (a, v) in &other.map {
            out.add_at(*a, -v.clone());
        }
        out
    }

    /// Coefficients of `V_b x`.
    pub fn dilate(&self, b: u8) -> Result<Self> {
        let mut out = Self::new();
        for (a, v) in &self.map {
            out.map.insert(a.prepend(b)?, v.clone());
        }
        Ok(out)
    }

    /// Dense step function; `level` must exceed every stored index length.
    pub fn to_step(&self, level: u32) -> Result<DyadicStep<S>> {
        check_level(level)?;
        if let Some(k) = self.max_len() {
            if k as u32 >= level {
                return Err(Error::IndexTooDeep { len: k, level });
            }
        }
        let mut values = vec![S::zero(); 1usize << level];
        for (a, v) in &self.map {
            let width = 1usize << (level as usize - a.len());
            let start = a.position() as usize * width;
            let half = width / 2;
            for x in &mut values[start..start + half] {
                *x = x.clone() + v.clone();
            }
            for x in &mut values[start + half..start + width] {
                *x = x.clone() - v.clone();
            }
        }
        DyadicStep::new(level, values)
    }

    /// Smallest level at which [`to_step`](Self::to_step) succeeds.
    pub fn natural_level(&self) -> u32 {
        self.max_len().map_or(0, |k| k as u32 + 1)
    }

    /// `‖x‖² = Σ |ξ_α|² 2^{-|α|}`.
    pub fn l2_norm_sqr(&self) -> S::Real {
        self.map.iter().fold(S::Real::zero(), |acc, (a, v)| {
            acc + v.norm_sqr_real() * S::Real::pow2(-(a.len() as i32))
        })
    }

    /// Bilinear pairing `(x, y)` of two expansions.
    pub fn inner(&self, other: &Self) -> S {
        let (small, big) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        small.map.iter().fold(S::zero(), |acc, (a, v)| match big.map.get(a) {
            Some(w) => acc + v.clone() * w.clone() * S::pow2(-(a.len() as i32)),
            None => acc,
        })
    }

    /// Sesquilinear pairing `∫ x conj(y)`.
    pub fn inner_sesq(&self, other: &Self) -> S {
        self.map.iter().fold(S::zero(), |acc, (a, v)| match other.map.get(a) {
            Some(w) => acc + v.clone() * w.conj() * S::pow2(-(a.len() as i32)),
            None => acc,
        })
    }

    /// Visits the cells on which the expansion is constant, passing the cell
    /// index and the value there. Cost is proportional to the number of
    /// stored coefficients times the depth.
    pub fn for_each_cell(&self, mut f: impl FnMut(&MultiIndex, Complex64)) {
        self.walk(&MultiIndex::empty(), Complex64::new(0.0, 0.0), &mut f);
    }

    fn walk(&self, node: &MultiIndex, acc: Complex64, f: &mut impl FnMut(&MultiIndex, Complex64)) {
        if !self.has_subtree(node) {
            f(node, acc);
            return;
        }
        let xi = self.map.get(node).map_or(Complex64::new(0.0, 0.0), |v| v.to_c64());
        // a stored index at the 62-bit limit cannot have children
        match (node.push(0), node.push(1)) {
            (Ok(l), Ok(r)) => {
                self.walk(&l, acc + xi, f);
                self.walk(&r, acc - xi, f);
            }
            _ => f(node, acc),
        }
    }

    /// `‖x‖_p` computed from the sparse expansion in floating point.
    pub fn lp_norm_f64(&self, p: f64) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            let mut m: f64 = 0.0;
            self.for_each_cell(|_, v| m = m.max(v.norm()));
            return Ok(m);
        }
        if p.is_nan() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let mut s = 0.0;
        self.for_each_cell(|a, v| {
            let n = v.norm();
            if n > 0.0 {
                s += n.powf(p) * (-(a.len() as f64)).exp2();
            }
        });
        Ok(s.powf(1.0 / p))
    }
}

impl<S: Scalar> FromIterator<(MultiIndex, S)> for HaarCoeffMap<S> {
    fn from_iter<I: IntoIterator<Item = (MultiIndex, S)>>(iter: I) -> Self {
        let mut out = Self::new();
        for (a, v) in iter {
            out.add_at(a, v);
        }
        out
    }
}

/// Per-level partial sums `sums[k][j] = Σ_{cells of I_{k,j}} x`.
pub(super) fn sum_pyramid<S: Scalar>(x: &DyadicStep<S>) -> Vec<Vec<S>> {
    let m = x.level() as usize;
    let mut levels = vec![Vec::new(); m + 1];
    levels[m] = x.values().to_vec();
    for k in (0..m).rev() {
        levels[k] = levels[k + 1].chunks(2).map(|p| p[0].clone() + p[1].clone()).collect();
    }
    levels
}

/// True when the mean is zero (exactly, or within tolerance in float mode).
pub(super) fn check_zero_mean<S: Scalar>(x: &DyadicStep<S>) -> Result<()> {
    let mu = x.mean();
    let ok = if S::EXACT {
        mu.is_zero()
    } else {
        let scale = x.values().iter().map(|v| v.abs_f64()).fold(1.0, f64::max);
        mu.abs_f64() <= crate::scalar::FLOAT_TOLERANCE * scale
    };
    if ok {
        Ok(())
    } else {
        Err(Error::NonzeroMean(mu.render()))
    }
}

/// Haar coefficients `ξ_α = 2^{|α|} (x, V^α h)` of a mean-zero step function.
pub fn fourier_haar<S: Scalar>(x: &DyadicStep<S>) -> Result<HaarCoeffMap<S>> {
    check_zero_mean(x)?;
    let m = x.level() as usize;
    let sums = sum_pyramid(x);
    let mut out = HaarCoeffMap::new();
    for k in 0..m {
        let scale = S::pow2(-((m - k) as i32));
        for (j, pair) in sums[k + 1].chunks(2).enumerate() {
            let d = pair[0].clone() - pair[1].clone();
            if !d.is_zero() {
                out.map.insert(MultiIndex::from_position(k, j as u64)?, d * scale.clone());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{inner, l2_norm_sqr};
    use super::*;
    use crate::dyadic::{index_to_multi, multi_to_index};
    use crate::scalar::Exact;

    fn step(level: u32, v: &[(i64, i64)]) -> DyadicStep<Exact> {
        DyadicStep::new(level, v.iter().map(|&(n, d)| Exact::from_ratio(n, d)).collect()).unwrap()
    }

    #[test]
    fn haar_function_has_single_coefficient() {
        for n in 1..32u64 {
            let h = DyadicStep::<Exact>::haar(n, 6).unwrap();
            let c = fourier_haar(&h).unwrap();
            assert_eq!(c.len(), 1);
            let (a, v) = c.iter().next().unwrap();
            assert_eq!(multi_to_index(a), n);
            assert_eq!(*v, Exact::from_i64(1));
        }
    }

    #[test]
    fn coefficient_matches_definition() {
        let x = step(3, &[(1, 2), (-3, 1), (2, 3), (0, 1), (5, 1), (-1, 7), (1, 1), (3, 11)]);
        let x = x.sub(&DyadicStep::constant(0, x.mean()).unwrap()).unwrap();
        let c = fourier_haar(&x).unwrap();
        for n in 1..8u64 {
            let alpha = index_to_multi(n).unwrap();
            let h = DyadicStep::<Exact>::haar(n, 3).unwrap();
            let direct = inner(&x, &h) * Exact::pow2(alpha.len() as i32);
            assert_eq!(c.coeff(&alpha), direct);
        }
        assert_eq!(c.to_step(3).unwrap(), x);
        assert_eq!(c.l2_norm_sqr(), l2_norm_sqr(&x));
    }

    #[test]
    fn rejects_nonzero_mean() {
        let x = step(1, &[(1, 1), (0, 1)]);
        assert!(matches!(fourier_haar(&x), Err(Error::NonzeroMean(_))));
        let f = DyadicStep::new(1, vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0 + 1e-15, 0.0)]).unwrap();
        assert!(fourier_haar(&f).is_ok());
    }

    #[test]
    fn subtree_ranges() {
        let c: HaarCoeffMap<Exact> = (1..64u64).map(|n| (index_to_multi(n).unwrap(), Exact::from_i64(n as i64))).collect();
        let root = MultiIndex::from_bits(&[1, 0]).unwrap();
        let got: Vec<u64> = c.subtree(&root).map(|(a, _)| multi_to_index(a)).collect();
        let mut want: Vec<u64> = (1..64u64).filter(|&n| root.is_prefix_of(&index_to_multi(n).unwrap())).collect();
        want.sort_by_key(|&n| index_to_multi(n).unwrap());
        assert_eq!(got, want);
        assert_eq!(got.len(), 1 + 2 + 4 + 8);
    }

    #[test]
    fn sparse_lp_matches_dense() {
        let c: HaarCoeffMap<Exact> = [(1u64, (1, 2)), (2, (-1, 3)), (5, (2, 1)), (13, (1, 5))]
            .iter()
            .map(|&(n, (a, b))| (index_to_multi(n).unwrap(), Exact::from_ratio(a, b)))
            .collect();
        let x = c.to_step(c.natural_level()).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            let dense: f64 = x.values().iter().map(|v| v.abs_f64().powf(p)).sum::<f64>() * (-(x.level() as f64)).exp2();
            let sparse = c.lp_norm_f64(p).unwrap();
            assert!((sparse - dense.powf(1.0 / p)).abs() < 1e-12);
        }
        let sup = x.values().iter().map(|v| v.abs_f64()).fold(0.0, f64::max);
        assert!((c.lp_norm_f64(f64::INFINITY).unwrap() - sup).abs() < 1e-12);
        assert!(c.lp_norm_f64(0.5).is_err());
    }

    #[test]
    fn deep_indices_stay_sparse() {
        let deep = MultiIndex::zeros(50).unwrap();
        let c: HaarCoeffMap<Exact> = [(deep, Exact::from_i64(1))].into_iter().collect();
        assert!(c.to_step(20).is_err());
        assert!((c.lp_norm_f64(2.0).unwrap() - (-50.0f64 / 2.0).exp2()).abs() < 1e-20);
        assert_eq!(c.l2_norm_sqr(), <Exact as Scalar>::Real::pow2(-50));
    }
}
