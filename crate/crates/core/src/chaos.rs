//! First-order Haar chaoses `f = Σ c_k h_{2^k}` and the operators built from them.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::dyadic::{index_to_multi, multi_to_index, GapVector, MultiIndex};
use crate::error::{Error, Result};
use crate::report::NormReport;
use crate::scalar::{Real, Scalar, FLOAT_TOLERANCE};
use crate::stepfn::{fourier_haar, DyadicStep, HaarCoeffMap, LpExponent};

/// Where a coefficient sequence came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    /// Finite symbol; every coefficient past the stored ones is zero.
    Polynomial,
    Geometric,
    Binomial { theta: f64, p: f64 },
    Counterexample { p: f64 },
    Taylor,
    User,
}

impl Provenance {
    pub fn tag(&self) -> String {
        match self {
            Self::Polynomial => "polynomial".into(),
            Self::Geometric => "geometric".into(),
            Self::Binomial { theta, .. } => format!("binomial-{theta}"),
            Self::Counterexample { .. } => "counterexample".into(),
            Self::Taylor => "taylor".into(),
            Self::User => "user".into(),
        }
    }
}

/// A chaos-1 function through its coefficients `c_k = 2^k (f, h_{2^k})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Chaos1<S> {
    coeffs: Vec<S>,
    provenance: Provenance,
}

impl<S: Scalar> Chaos1<S> {
    pub fn new(coeffs: Vec<S>, provenance: Provenance) -> Self {
        Self { coeffs, provenance }
    }

    pub fn polynomial(mut coeffs: Vec<S>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs, provenance: Provenance::Polynomial }
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn is_polynomial(&self) -> bool {
        self.provenance == Provenance::Polynomial
    }

    /// Number of stored coefficients.
    pub fn stored(&self) -> usize {
        self.coeffs.len()
    }

    /// `c_k`, or an error when it is beyond the stored depth of a non-polynomial symbol.
    pub fn coeff(&self, k: usize) -> Result<S> {
        match self.coeffs.get(k) {
            Some(c) => Ok(c.clone()),
            None if self.is_polynomial() => Ok(S::zero()),
            None => Err(Error::InsufficientDualDepth { need: k + 1, have: self.coeffs.len() }),
        }
    }

    /// `c_0, …, c_{n-1}`.
    pub fn first(&self, n: usize) -> Result<Vec<S>> {
        (0..n).map(|k| self.coeff(k)).collect()
    }

    /// Number of coefficients that matter for a truncation at `depth`.
    fn effective(&self, depth: usize) -> usize {
        if self.is_polynomial() {
            depth.min(self.coeffs.len())
        } else {
            depth
        }
    }
}

/// `f(1/2^k) = −c_k + Σ_{j<k} c_j` for `k = 0..=k_max`.
pub fn values_from_coeffs<S: Scalar>(c: &Chaos1<S>, k_max: usize) -> Result<Vec<S>> {
    let mut acc = S::zero();
    let mut out = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let ck = c.coeff(k)?;
        out.push(acc.clone() - ck.clone());
        acc = acc + ck;
    }
    Ok(out)
}

/// Inverse of [`values_from_coeffs`].
pub fn coeffs_from_values<S: Scalar>(values: &[S]) -> Chaos1<S> {
    let mut acc = S::zero();
    let mut coeffs = Vec::with_capacity(values.len());
    for v in values {
        let ck = acc.clone() - v.clone();
        acc = acc + ck.clone();
        coeffs.push(ck);
    }
    Chaos1::new(coeffs, Provenance::User)
}

/// Haar coefficients of the truncation `Σ_{k<m} c_k h_{2^k}`.
pub fn truncate_coeffs<S: Scalar>(c: &Chaos1<S>, m: usize) -> Result<HaarCoeffMap<S>> {
    let mut out = HaarCoeffMap::new();
    for k in 0..c.effective(m) {
        out.add_at(MultiIndex::zeros(k)?, c.coeff(k)?);
    }
    Ok(out)
}

/// `Σ_{k<m} c_k h_{2^k}` as a level-`m` step function.
pub fn truncate_to_step<S: Scalar>(c: &Chaos1<S>, m: u32) -> Result<DyadicStep<S>> {
    if m == 0 {
        return Err(Error::Invalid("truncation level must be at least 1".into()));
    }
    truncate_coeffs(c, m as usize)?.to_step(m)
}

/// Coefficients `d_0, …, d_n` of the dual function, `ĝ = 1/f̂`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCoeffs<S> {
    coeffs: Vec<S>,
}

impl<S: Scalar> DualCoeffs<S> {
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn to_chaos(&self) -> Chaos1<S> {
        Chaos1::new(self.coeffs.clone(), Provenance::User)
    }

    fn need(&self, k: usize) -> Result<&S> {
        self.coeffs.get(k).ok_or(Error::InsufficientDualDepth { need: k + 1, have: self.coeffs.len() })
    }
}

/// Solves `c_0 d_0 = 1`, `Σ_{j≤k} c_{k−j} d_j = 0` for `k = 1..=n`.
pub fn dual_coeffs<S: Scalar>(c: &Chaos1<S>, n: usize) -> Result<DualCoeffs<S>> {
    let c0 = c.coeff(0)?;
    if c0.is_zero() {
        return Err(Error::SymbolVanishesAtOrigin);
    }
    let cs = c.first(n + 1)?;
    let inv = S::one() / c0;
    let mut d: Vec<S> = Vec::with_capacity(n + 1);
    d.push(inv.clone());
    for k in 1..=n {
        let mut s = S::zero();
        for j in 0..k {
            if !cs[k - j].is_zero() {
                s = s + cs[k - j].clone() * d[j].clone();
            }
        }
        d.push(-(s * inv.clone()));
    }
    Ok(DualCoeffs { coeffs: d })
}

/// Cauchy product of two sequences truncated at `n + 1` terms.
pub fn cauchy_product<S: Scalar>(a: &[S], b: &[S], n: usize) -> Vec<S> {
    (0..=n)
        .map(|k| {
            (0..=k).fold(S::zero(), |acc, j| match (a.get(k - j), b.get(j)) {
                (Some(x), Some(y)) => acc + x.clone() * y.clone(),
                _ => acc,
            })
        })
        .collect()
}

/// Haar coefficients of `g^α = Σ_{j ≤ k_s} d_j 2^{|α|−j} V^{α minus j trailing zeros} h`.
pub fn biorthogonal_g_coeffs<S: Scalar>(alpha: &MultiIndex, dual: &DualCoeffs<S>) -> Result<HaarCoeffMap<S>> {
    let ks = alpha.trailing_zeros();
    dual.need(ks)?;
    let len = alpha.len() as i32;
    let mut out = HaarCoeffMap::new();
    for j in 0..=ks {
        out.add_at(alpha.truncate_end(j), dual.coeffs[j].clone() * S::pow2(len - j as i32));
    }
    Ok(out)
}

/// `g^α` as a step function at the given level.
pub fn biorthogonal_g<S: Scalar>(alpha: &MultiIndex, dual: &DualCoeffs<S>, level: u32) -> Result<DyadicStep<S>> {
    if (level as usize) < alpha.len() + 1 {
        return Err(Error::Capacity { what: "g^α needs level", got: alpha.len() + 1, max: level as usize });
    }
    biorthogonal_g_coeffs(alpha, dual)?.to_step(level)
}

/// `(x, g^α) = Σ_{j ≤ k_s} d_j ξ_{α minus j trailing zeros}`, read off the Haar
/// coefficients of `x`.
pub fn pair_with_g<S: Scalar>(x: &HaarCoeffMap<S>, alpha: &MultiIndex, dual: &DualCoeffs<S>) -> Result<S> {
    let ks = alpha.trailing_zeros();
    dual.need(ks)?;
    let mut acc = S::zero();
    for j in 0..=ks {
        if let Some(xi) = x.get(&alpha.truncate_end(j)) {
            acc = acc + dual.coeffs[j].clone() * xi.clone();
        }
    }
    Ok(acc)
}

/// `f_β = V^β f_depth`, the affine copy of the truncated chaos on `I_β`.
pub fn affine_element<S: Scalar>(c: &Chaos1<S>, beta: &MultiIndex, depth: u32) -> Result<DyadicStep<S>> {
    truncate_to_step(c, depth)?.apply_multi(beta)
}

/// Haar coefficients of `T_f x = Σ_α ξ_α V^α f_depth`.
pub fn apply_tf_coeffs<S: Scalar>(c: &Chaos1<S>, x: &HaarCoeffMap<S>, depth: usize) -> Result<HaarCoeffMap<S>> {
    let cs = c.first(c.effective(depth))?;
    let mut out = HaarCoeffMap::new();
    for (alpha, xi) in x.iter() {
        for (k, ck) in cs.iter().enumerate() {
            if !ck.is_zero() {
                out.add_at(alpha.append_zeros(k)?, xi.clone() * ck.clone());
            }
        }
    }
    Ok(out)
}

/// `T_f x` as a step function, built term by term from `V^α f_depth`.
pub fn apply_tf<S: Scalar>(c: &Chaos1<S>, x: &HaarCoeffMap<S>, depth: u32) -> Result<DyadicStep<S>> {
    let f = truncate_to_step(c, depth)?;
    let level = x.max_len().unwrap_or(0) as u32 + depth;
    let mut values = DyadicStep::<S>::zero(level)?.into_values();
    for (alpha, xi) in x.iter() {
        let width = 1usize << (level as usize - alpha.len());
        let rep = width >> depth;
        let start = alpha.position() as usize * width;
        for (i, v) in f.values().iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let add = v.clone() * xi.clone();
            for cell in &mut values[start + i * rep..start + (i + 1) * rep] {
                *cell = cell.clone() + add.clone();
            }
        }
    }
    DyadicStep::new(level, values)
}

/// Hilbert-space adjoint: the coefficient at `β` is `Σ_j conj(c_j) η_{β 0_j} / 2^j`.
pub fn apply_tf_adjoint<S: Scalar>(c: &Chaos1<S>, y: &HaarCoeffMap<S>, depth: usize) -> Result<HaarCoeffMap<S>> {
    let cs = c.first(c.effective(depth))?;
    let mut out = HaarCoeffMap::new();
    for (gamma, eta) in y.iter() {
        let top = gamma.trailing_zeros().min(cs.len().saturating_sub(1));
        if cs.is_empty() {
            break;
        }
        for j in 0..=top {
            if !cs[j].is_zero() {
                out.add_at(gamma.truncate_end(j), cs[j].conj() * eta.clone() * S::pow2(-(j as i32)));
            }
        }
    }
    Ok(out)
}

/// [`apply_tf_adjoint`] on a step function.
pub fn apply_tf_adjoint_step<S: Scalar>(c: &Chaos1<S>, y: &DyadicStep<S>, depth: usize) -> Result<DyadicStep<S>> {
    let coeffs = apply_tf_adjoint(c, &fourier_haar(y)?, depth)?;
    coeffs.to_step(y.level())
}

/// Truncation of the special function
/// `x_0 = Σ_s Σ V_0^{k_1} V_1 … V_1 V_0^{k_s} h` with `k_1, …, k_{s−1} < n`, `k_s = n`.
#[derive(Clone, Debug, PartialEq)]
pub struct X0<S> {
    pub n: usize,
    pub max_len: usize,
    /// Included indices, ordered by length then position.
    pub terms: Vec<MultiIndex>,
    /// Number of blocks `s` for which every term fits under the cap.
    pub s_max: usize,
    pub coeffs: HaarCoeffMap<S>,
}

pub fn x0_construct<S: Scalar>(n: usize, max_len: usize) -> Result<X0<S>> {
    if n == 0 {
        return Err(Error::Invalid("x0 needs n ≥ 1".into()));
    }
    if max_len > crate::dyadic::MAX_INDEX_LEN {
        return Err(Error::Capacity { what: "x0 cap", got: max_len, max: crate::dyadic::MAX_INDEX_LEN });
    }
    let mut terms = Vec::new();
    // prefixes 0^{k_1} 1 … 0^{k_{s-1}} 1 with every k < n
    let mut frontier = vec![MultiIndex::empty()];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for p in frontier {
            if p.len() + n <= max_len {
                terms.push(p.append_zeros(n)?);
            }
            for k in 0..n {
                if p.len() + k + 1 + n <= max_len {
                    next.push(p.append_zeros(k)?.push(1)?);
                }
            }
        }
        frontier = next;
    }
    terms.sort_by_key(|a| (a.len(), a.position()));
    let coeffs = terms.iter().map(|a| (*a, S::one())).collect();
    Ok(X0 { n, max_len, terms, s_max: max_len / n, coeffs })
}

impl<S: Scalar> X0<S> {
    /// Exact pairwise disjointness of the supports of the included terms.
    pub fn supports_disjoint(&self) -> bool {
        let mut iv: Vec<_> = self.terms.iter().map(crate::dyadic::interval_of).collect();
        iv.sort_by(|a, b| a.left().cmp(&b.left()).then(b.level.cmp(&a.level)));
        iv.windows(2).all(|w| w[0].right() <= w[1].left())
    }

    /// Total length of the included supports, exactly.
    pub fn support_measure(&self) -> S::Real {
        self.terms.iter().fold(S::Real::zero(), |a, t| a + S::Real::pow2(-(t.len() as i32)))
    }

    /// `Σ_{j≤n} |c_j|² / 2^j`, the limit of `‖T_f^* x_0‖²`.
    pub fn energy_limit(&self, c: &Chaos1<S>) -> Result<S::Real> {
        (0..=self.n).try_fold(S::Real::zero(), |a, j| {
            Ok(a + c.coeff(j)?.norm_sqr_real() * S::Real::pow2(-(j as i32)))
        })
    }

    /// `(1 − 2^{-n})^{s_max} Σ_{j≤n} |c_j|²/2^j`, bounding the truncation defect.
    pub fn defect_bound(&self, c: &Chaos1<S>) -> Result<f64> {
        let q = 1.0 - (-(self.n as f64)).exp2();
        Ok(q.powi(self.s_max as i32) * self.energy_limit(c)?.to_f64())
    }

    /// `‖T_f^* x_0‖²` for this truncation, exact in exact mode.
    pub fn adjoint_energy(&self, c: &Chaos1<S>) -> Result<S::Real> {
        Ok(apply_tf_adjoint(c, &self.coeffs, self.n + 1)?.l2_norm_sqr())
    }
}

/// Smallest cap for which the defect bound of `x_0` is below `tol`.
pub fn x0_cap_for_defect<S: Scalar>(n: usize, c: &Chaos1<S>, tol: f64) -> Result<usize> {
    let probe = X0::<S> { n, max_len: 0, terms: Vec::new(), s_max: 0, coeffs: HaarCoeffMap::new() };
    let total = probe.energy_limit(c)?.to_f64();
    let q = 1.0 - (-(n as f64)).exp2();
    let mut s = 0usize;
    while q.powi(s as i32) * total >= tol {
        s += 1;
        if s * n > crate::dyadic::MAX_INDEX_LEN {
            return Err(Error::Capacity { what: "x0 cap", got: s * n, max: crate::dyadic::MAX_INDEX_LEN });
        }
    }
    Ok(s * n)
}

/// Haar coefficients of `W^α f = Σ_{|β|=|α|} (−1)^{(α,β)} V^β f_depth`.
pub fn walsh_affine_coeffs<S: Scalar>(alpha: &MultiIndex, c: &Chaos1<S>, depth: usize) -> Result<HaarCoeffMap<S>> {
    if alpha.len() > 12 {
        return Err(Error::Capacity { what: "Walsh index length", got: alpha.len(), max: 12 });
    }
    let f = truncate_coeffs(c, depth)?;
    let mut out = HaarCoeffMap::new();
    for beta in MultiIndex::all_of_length(alpha.len())? {
        let sign = if (alpha.position() & beta.position()).count_ones().is_multiple_of(2) { S::one() } else { -S::one() };
        for (g, v) in f.iter() {
            out.add_at(beta.concat(g)?, sign.clone() * v.clone());
        }
    }
    Ok(out)
}

pub fn walsh_affine<S: Scalar>(alpha: &MultiIndex, c: &Chaos1<S>, depth: u32) -> Result<DyadicStep<S>> {
    walsh_affine_coeffs(alpha, c, depth as usize)?.to_step(alpha.len() as u32 + depth)
}

/// A Haar chaos of order `d`: coefficients `ξ_{k_1, …, k_d}` over gap vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct ChaosD<S> {
    d: usize,
    coeffs: BTreeMap<GapVector, S>,
}

impl<S: Scalar> ChaosD<S> {
    pub fn new(d: usize) -> Self {
        Self { d, coeffs: BTreeMap::new() }
    }

    pub fn order(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &BTreeMap<GapVector, S> {
        &self.coeffs
    }

    pub fn insert(&mut self, gaps: GapVector, v: S) -> Result<()> {
        if gaps.order() != self.d {
            return Err(Error::Invalid(format!("gap vector of order {} in chaos of order {}", gaps.order(), self.d)));
        }
        if v.is_zero() {
            self.coeffs.remove(&gaps);
        } else {
            self.coeffs.insert(gaps, v);
        }
        Ok(())
    }

    pub fn to_haar(&self) -> HaarCoeffMap<S> {
        self.coeffs.iter().map(|(g, v)| (g.to_multi(), v.clone())).collect()
    }

    pub fn to_step(&self, level: u32) -> Result<DyadicStep<S>> {
        self.to_haar().to_step(level)
    }

    pub fn l2_norm_sqr(&self) -> S::Real {
        self.to_haar().l2_norm_sqr()
    }

    /// Groups Haar coefficients by chaos order, ascending; empty orders are skipped.
    pub fn split(x: &HaarCoeffMap<S>) -> Vec<ChaosD<S>> {
        let mut by_order: BTreeMap<usize, ChaosD<S>> = BTreeMap::new();
        for (alpha, v) in x.iter() {
            let g = GapVector::from_multi(alpha);
            by_order.entry(g.order()).or_insert_with(|| ChaosD::new(g.order())).coeffs.insert(g, v.clone());
        }
        by_order.into_values().collect()
    }
}

/// Splits a mean-zero step function into its Haar chaoses.
pub fn decompose_chaoses<S: Scalar>(x: &DyadicStep<S>) -> Result<Vec<ChaosD<S>>> {
    Ok(ChaosD::split(&fourier_haar(x)?))
}

/// Errors of the partial sums of `Σ_d Σ_{n∈N_d} (x, g^n) f_n`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ReconstructionReport {
    pub n_max: u64,
    pub depth: usize,
    pub terms: usize,
    pub ordering: String,
    /// `(p, ‖x − partial sum‖_p)`.
    pub errors: Vec<(f64, f64)>,
    /// Exact squared L² error in exact mode.
    pub l2_error_sqr_exact: Option<String>,
}

/// Partial sum over `n ≤ n_max` of the expansion in the affine system, summed
/// by chaos order then by `n`. Returns the Haar coefficients of the partial sum.
pub fn reconstruct_in_chaoses<S: Scalar>(
    c: &Chaos1<S>,
    x: &DyadicStep<S>,
    n_max: u64,
    depth: usize,
    p_list: &[LpExponent],
) -> Result<(HaarCoeffMap<S>, ReconstructionReport)> {
    let xi = fourier_haar(x)?;
    let max_len = 63 - n_max.max(1).leading_zeros() as usize;
    let dual = dual_coeffs(c, max_len)?;
    let mut indices: Vec<u64> = (1..=n_max).collect();
    indices.sort_by_key(|&n| (n.count_ones(), n));
    let mut coeff_sum = HaarCoeffMap::new();
    for &n in &indices {
        let alpha = index_to_multi(n)?;
        let a = pair_with_g(&xi, &alpha, &dual)?;
        if !a.is_zero() {
            let mut term = HaarCoeffMap::new();
            term.add_at(alpha, a);
            coeff_sum = coeff_sum.add(&apply_tf_coeffs(c, &term, depth)?);
        }
    }
    let diff = xi.sub(&coeff_sum);
    let mut errors = Vec::with_capacity(p_list.len());
    for p in p_list {
        let e = match p {
            LpExponent::Finite(pp) if *pp == 2.0 => diff.l2_norm_sqr().to_f64().sqrt(),
            _ => diff.lp_norm_f64(p.as_f64())?,
        };
        errors.push((p.as_f64(), e));
    }
    let report = ReconstructionReport {
        n_max,
        depth,
        terms: indices.len(),
        ordering: "chaos order ascending, then n ascending".into(),
        errors,
        l2_error_sqr_exact: S::EXACT.then(|| diff.l2_norm_sqr().render()),
    };
    Ok((coeff_sum, report))
}

/// Squared BMO norm of the level-`m` truncation:
/// `max_{i<m} Σ_{j<m−i} |c_{i+j}|² 2^{-j}`.
pub fn bmo_chaos1_sqr<S: Scalar>(c: &Chaos1<S>, m: usize) -> Result<S::Real> {
    let sq: Vec<S::Real> = c.first(m)?.iter().map(|v| v.norm_sqr_real()).collect();
    let mut best = S::Real::zero();
    // tail sums t_i = |c_i|² + t_{i+1}/2, computed from the end
    let mut t = S::Real::zero();
    let half = S::Real::pow2(-1);
    for i in (0..m).rev() {
        t = sq[i].clone() + t * half.clone();
        if t > best {
            best = t.clone();
        }
    }
    Ok(best)
}

pub fn bmo_chaos1<S: Scalar>(c: &Chaos1<S>, m: usize) -> Result<NormReport> {
    let sq = bmo_chaos1_sqr(c, m)?;
    let mut r = NormReport::new(sq.to_f64().sqrt(), "chaos-1 closed form", S::EXACT)
        .with_exact(sq.render())
        .with_param("exact_power", 2)
        .with_param("level", m);
    if !S::EXACT {
        r = r.with_tolerance(FLOAT_TOLERANCE);
    }
    Ok(r)
}

/// Index `n` of the affine element `f_n = V^α f`.
pub fn affine_index(alpha: &MultiIndex) -> u64 {
    multi_to_index(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use crate::stepfn::{bmo_norm_sqr, inner, inner_sesq, l2_norm_sqr};
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> Exact {
        Exact::from_ratio(n, d)
    }

    fn poly(c: &[(i64, i64)]) -> Chaos1<Exact> {
        Chaos1::polynomial(c.iter().map(|&(n, d)| q(n, d)).collect())
    }

    fn mi(bits: &[u8]) -> MultiIndex {
        MultiIndex::from_bits(bits).unwrap()
    }

    #[test]
    fn values_coefficients_examples() {
        let h = poly(&[(1, 1)]);
        assert_eq!(values_from_coeffs(&h, 3).unwrap(), vec![q(-1, 1), q(1, 1), q(1, 1), q(1, 1)]);
        let f = poly(&[(1, 1), (-1, 3)]);
        assert_eq!(values_from_coeffs(&f, 3).unwrap(), vec![q(-1, 1), q(4, 3), q(2, 3), q(2, 3)]);
        let back = coeffs_from_values(&values_from_coeffs(&f, 6).unwrap());
        assert_eq!(back.coeffs(), &[q(1, 1), q(-1, 3), q(0, 1), q(0, 1), q(0, 1), q(0, 1), q(0, 1)]);
    }

    #[test]
    fn values_match_point_evaluation() {
        let f = poly(&[(2, 1), (-1, 3), (5, 7), (1, 2)]);
        let x = truncate_to_step(&f, 6).unwrap();
        let v = values_from_coeffs(&f, 5).unwrap();
        for (k, vk) in v.iter().enumerate() {
            let t = BigRational::new(1.into(), num_bigint::BigInt::from(1u64 << k));
            assert_eq!(&x.eval(&t).unwrap(), vk, "k = {k}");
        }
    }

    #[test]
    fn truncation_examples() {
        let f = poly(&[(1, 1), (-1, 2)]);
        let h = DyadicStep::<Exact>::haar(1, 2).unwrap();
        let h2 = DyadicStep::<Exact>::haar(2, 2).unwrap();
        assert_eq!(truncate_to_step(&f, 2).unwrap(), h.sub(&h2.scale(&q(1, 2))).unwrap());
        assert_eq!(truncate_to_step(&poly(&[(1, 1)]), 1).unwrap(), DyadicStep::haar(1, 1).unwrap());
        let x = truncate_to_step(&f, 5).unwrap();
        assert_eq!(x.mean(), q(0, 1));
        assert_eq!(l2_norm_sqr(&x), BigRational::new(9.into(), 8.into()));
    }

    #[test]
    fn dual_examples() {
        assert_eq!(dual_coeffs(&poly(&[(1, 1)]), 3).unwrap().coeffs(), &[q(1, 1), q(0, 1), q(0, 1), q(0, 1)]);
        let d = dual_coeffs(&poly(&[(1, 1), (-1, 3)]), 4).unwrap();
        assert_eq!(d.coeffs(), &[q(1, 1), q(1, 3), q(1, 9), q(1, 27), q(1, 81)]);
        let d = dual_coeffs(&poly(&[(2, 1), (1, 1)]), 2).unwrap();
        assert_eq!(d.coeffs(), &[q(1, 2), q(-1, 4), q(1, 8)]);
        assert_eq!(dual_coeffs(&poly(&[(0, 1), (1, 1)]), 2), Err(Error::SymbolVanishesAtOrigin));
        let geo = Chaos1::new(vec![q(1, 1), q(1, 2)], Provenance::Geometric);
        assert!(matches!(dual_coeffs(&geo, 5), Err(Error::InsufficientDualDepth { .. })));
    }

    #[test]
    fn dual_involution() {
        let c = poly(&[(3, 2), (-1, 5), (2, 7), (0, 1), (1, 3)]);
        let d = dual_coeffs(&c, 20).unwrap();
        let dd = dual_coeffs(&d.to_chaos(), 20).unwrap();
        let mut expect = c.first(21).unwrap();
        expect.truncate(21);
        assert_eq!(dd.coeffs(), &expect[..]);
        let prod = cauchy_product(&c.first(21).unwrap(), d.coeffs(), 20);
        assert_eq!(prod[0], q(1, 1));
        assert!(prod[1..].iter().all(|v| v.is_zero()));
    }

    #[test]
    fn g_examples() {
        let a = q(1, 3);
        let c = Chaos1::polynomial(vec![q(1, 1), -a.clone()]);
        let d = dual_coeffs(&c, 8).unwrap();
        let h = DyadicStep::<Exact>::haar(1, 3).unwrap();
        assert_eq!(biorthogonal_g(&MultiIndex::empty(), &d, 3).unwrap(), h);
        let g0 = biorthogonal_g(&mi(&[0]), &d, 3).unwrap();
        let expect = DyadicStep::haar(2, 3).unwrap().scale(&q(2, 1)).add(&h.scale(&a)).unwrap();
        assert_eq!(g0, expect);
        let short = dual_coeffs(&c, 1).unwrap();
        assert!(matches!(biorthogonal_g(&mi(&[0, 0, 0]), &short, 5), Err(Error::InsufficientDualDepth { need: 4, have: 2 })));
    }

    #[test]
    fn biorthogonality_small() {
        let c = poly(&[(1, 1), (-1, 2), (1, 4)]);
        let d = dual_coeffs(&c, 4).unwrap();
        let all = MultiIndex::all_up_to(3).unwrap();
        for a in &all {
            let g = biorthogonal_g(a, &d, a.len() as u32 + 1).unwrap();
            let gc = biorthogonal_g_coeffs(a, &d).unwrap();
            for b in &all {
                let f = affine_element(&c, b, 3).unwrap();
                let expect = if a == b { q(1, 1) } else { q(0, 1) };
                assert_eq!(inner(&f, &g), expect, "α = {a}, β = {b}");
                let fc = fourier_haar(&f).unwrap();
                assert_eq!(pair_with_g(&fc, a, &d).unwrap(), inner(&f, &g));
                assert_eq!(fc.inner(&gc), expect);
            }
        }
    }

    #[test]
    fn tf_identity_and_definition() {
        let one = poly(&[(1, 1)]);
        let x: HaarCoeffMap<Exact> = [(mi(&[1, 0]), q(2, 3)), (mi(&[]), q(-1, 1))].into_iter().collect();
        assert_eq!(apply_tf_coeffs(&one, &x, 5).unwrap(), x);
        let c = poly(&[(1, 1), (2, 5), (-1, 3)]);
        let h: HaarCoeffMap<Exact> = [(MultiIndex::empty(), q(1, 1))].into_iter().collect();
        assert!(apply_tf(&c, &h, 4).unwrap().same_function(&truncate_to_step(&c, 4).unwrap()));
        let dense = apply_tf(&c, &x, 3).unwrap();
        let sparse = apply_tf_coeffs(&c, &x, 3).unwrap();
        assert_eq!(sparse.to_step(dense.level()).unwrap(), dense);
    }

    #[test]
    fn tf_commutes_with_dilations() {
        let c = poly(&[(1, 2), (-2, 3), (1, 1)]);
        let x: HaarCoeffMap<Exact> = [(mi(&[0, 1]), q(3, 1)), (mi(&[1]), q(-1, 7))].into_iter().collect();
        for b in [0, 1] {
            let lhs = apply_tf(&c, &x.dilate(b).unwrap(), 4).unwrap();
            let rhs = apply_tf(&c, &x, 4).unwrap().dilate(b).unwrap();
            assert!(lhs.same_function(&rhs));
        }
    }

    #[test]
    fn adjoint_consistency() {
        let c = Chaos1::polynomial(vec![q(1, 1), Exact::parse_scalar("1/2-1/3i").unwrap(), q(-2, 5)]);
        let x: HaarCoeffMap<Exact> =
            [(mi(&[0, 1]), q(3, 1)), (mi(&[]), Exact::parse_scalar("2i").unwrap()), (mi(&[1, 1, 0]), q(1, 5))]
                .into_iter()
                .collect();
        let y: HaarCoeffMap<Exact> = [(mi(&[0, 1, 0]), q(1, 1)), (mi(&[0, 1, 0, 0]), Exact::parse_scalar("1-i").unwrap()), (mi(&[1, 1, 0, 0]), q(2, 3)), (mi(&[0]), q(5, 1))]
            .into_iter()
            .collect();
        let lhs = apply_tf_coeffs(&c, &x, 3).unwrap().inner_sesq(&y);
        let rhs = x.inner_sesq(&apply_tf_adjoint(&c, &y, 3).unwrap());
        assert_eq!(lhs, rhs);
        assert_eq!(apply_tf_adjoint(&poly(&[(1, 1)]), &y, 5).unwrap(), y);
        let ys = y.to_step(6).unwrap();
        let xs = x.to_step(6).unwrap();
        let tx = apply_tf(&c, &x, 3).unwrap();
        assert_eq!(inner_sesq(&tx, &ys), inner_sesq(&xs, &apply_tf_adjoint_step(&c, &ys, 3).unwrap()));
    }

    #[test]
    fn x0_terms_for_n1() {
        let x0 = x0_construct::<Exact>(1, 4).unwrap();
        let want: Vec<MultiIndex> = vec![mi(&[0]), mi(&[1, 0]), mi(&[1, 1, 0]), mi(&[1, 1, 1, 0])];
        assert_eq!(x0.terms, want);
        assert!(x0.supports_disjoint());
        assert_eq!(x0.s_max, 4);
    }

    #[test]
    fn x0_disjoint_and_energy() {
        for n in 1..=4 {
            let x0 = x0_construct::<Exact>(n, 16).unwrap();
            assert!(x0.supports_disjoint(), "n = {n}");
            let m = x0.support_measure();
            assert!(m < BigRational::from_integer(1.into()));
        }
        let c = poly(&[(1, 1), (-1, 2)]);
        let mut prev = BigRational::zero();
        for cap in [4, 8, 12, 16] {
            let x0 = x0_construct::<Exact>(1, cap).unwrap();
            let e = x0.adjoint_energy(&c).unwrap();
            let limit = x0.energy_limit(&c).unwrap();
            assert_eq!(limit, BigRational::new(9.into(), 8.into()));
            assert!(e > prev && e <= limit);
            assert!((limit.to_f64() - e.to_f64()) <= x0.defect_bound(&c).unwrap() + 1e-15);
            prev = e;
        }
        assert_eq!(x0_cap_for_defect(1, &c, 1e-6).unwrap(), 21);
    }

    #[test]
    fn x0_detects_overlap() {
        let mut x0 = x0_construct::<Exact>(2, 6).unwrap();
        x0.terms.push(mi(&[0]));
        assert!(!x0.supports_disjoint());
    }

    #[test]
    fn walsh_examples() {
        let h = poly(&[(1, 1)]);
        assert_eq!(walsh_affine(&MultiIndex::empty(), &h, 1).unwrap(), DyadicStep::haar(1, 1).unwrap());
        let w0 = walsh_affine(&mi(&[0]), &h, 1).unwrap();
        assert_eq!(w0, DyadicStep::haar(2, 2).unwrap().add(&DyadicStep::haar(3, 2).unwrap()).unwrap());
        for k in 0..=3 {
            let all = MultiIndex::all_of_length(k).unwrap();
            for a in &all {
                for b in &all {
                    let v = inner(&walsh_affine(a, &h, 1).unwrap(), &walsh_affine(b, &h, 1).unwrap());
                    assert_eq!(v, if a == b { q(1, 1) } else { q(0, 1) });
                }
            }
        }
    }

    #[test]
    fn chaos_decomposition() {
        let h6 = DyadicStep::<Exact>::haar(6, 4).unwrap();
        let parts = decompose_chaoses(&h6).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].order(), 2);
        let x = DyadicStep::<Exact>::haar(2, 3).unwrap().add(&DyadicStep::haar(3, 3).unwrap()).unwrap();
        let parts = decompose_chaoses(&x).unwrap();
        assert_eq!(parts.iter().map(|p| p.order()).collect::<Vec<_>>(), vec![1, 2]);
        let total: BigRational = parts.iter().map(|p| p.l2_norm_sqr()).sum();
        assert_eq!(total, l2_norm_sqr(&x));
        let mut sum = DyadicStep::zero(3).unwrap();
        for p in &parts {
            sum = sum.add(&p.to_step(3).unwrap()).unwrap();
        }
        assert_eq!(sum, x);
    }

    #[test]
    fn reconstruction_identity_symbol() {
        let x = truncate_to_step(&poly(&[(1, 1), (2, 3), (-1, 5)]), 4).unwrap();
        let x = x.add(&DyadicStep::haar(11, 4).unwrap()).unwrap();
        let (sum, rep) = reconstruct_in_chaoses(&poly(&[(1, 1)]), &x, 16, 4, &[LpExponent::Finite(2.0)]).unwrap();
        assert_eq!(sum.to_step(4).unwrap(), x);
        assert_eq!(rep.errors[0].1, 0.0);
        assert_eq!(rep.l2_error_sqr_exact.as_deref(), Some("0"));
    }

    #[test]
    fn reconstruction_converges_for_h2() {
        let c = poly(&[(1, 1), (-1, 3)]);
        let x = DyadicStep::<Exact>::haar(2, 6).unwrap();
        let mut prev = f64::INFINITY;
        for k in [2u32, 4, 6, 8] {
            let (_, rep) = reconstruct_in_chaoses(&c, &x, 1 << k, 40, &[LpExponent::Finite(2.0)]).unwrap();
            let e = rep.errors[0].1;
            // the partial sum telescopes to h_2 − a^k h_{2^{k+1}}
            let expect = (1.0f64 / 3.0).powi(k as i32) * (-((k + 1) as f64) / 2.0).exp2();
            assert!((e - expect).abs() < 1e-15, "k = {k}: {e} vs {expect}");
            assert!(e <= prev);
            prev = e;
        }
    }

    #[test]
    fn bmo_closed_form() {
        let a = q(3, 4);
        let c = Chaos1::polynomial(vec![q(1, 1), -a.clone()]);
        let sq = bmo_chaos1_sqr(&c, 2).unwrap();
        let ar = a.re();
        let expect = {
            let first = BigRational::from_integer(1.into()) + ar.clone() * ar.clone() / BigRational::from_integer(2.into());
            let second = ar.clone() * ar;
            if first > second { first } else { second }
        };
        assert_eq!(sq, expect);
        assert_eq!(bmo_chaos1(&poly(&[(1, 1)]), 1).unwrap().value, 1.0);
        let c = poly(&[(1, 5), (-3, 1), (2, 7), (9, 4), (-1, 1)]);
        for m in 1..=6 {
            assert_eq!(bmo_chaos1_sqr(&c, m).unwrap(), bmo_norm_sqr(&truncate_to_step(&c, m as u32).unwrap()).unwrap());
        }
    }
}
