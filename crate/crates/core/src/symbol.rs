//! Power-series symbols `f̂(z) = Σ c_k z^k`: ring operations, norms on disks,
//! Toeplitz multiplier norms, roots and the standard example symbols.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chaos::{values_from_coeffs, Chaos1, ChaosD, Provenance};
use crate::error::{Error, Result};
use crate::report::NormReport;
use crate::scalar::{Real, Scalar};
use crate::stepfn::LpExponent;

/// What is known about the coefficients past the stored ones.
#[derive(Clone, Debug, PartialEq)]
pub enum Tail {
    /// All further coefficients vanish.
    Zero,
    /// `|a_k| ≤ scale · (k+1)^{-power} · radius^{-k}` for every unstored `k`.
    Decay { radius: f64, scale: f64, power: f64 },
    Unknown,
}

/// Truncated power series. Coefficients are stored as `a_k · unit^k` so that
/// series with radius of convergence far from 1 stay in floating-point range.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries<S> {
    coeffs: Vec<S>,
    unit: f64,
    tail: Tail,
}

impl<S: Scalar> PowerSeries<S> {
    /// A polynomial.
    pub fn polynomial(coeffs: Vec<S>) -> Self {
        Self { coeffs, unit: 1.0, tail: Tail::Zero }
    }

    pub fn new(coeffs: Vec<S>, tail: Tail) -> Self {
        Self { coeffs, unit: 1.0, tail }
    }

    /// Series whose stored coefficients are `a_k · unit^k`.
    pub fn scaled(coeffs: Vec<S>, unit: f64, tail: Tail) -> Self {
        Self { coeffs, unit, tail }
    }

    pub fn from_chaos(c: &Chaos1<S>) -> Self {
        let tail = if c.is_polynomial() { Tail::Zero } else { Tail::Unknown };
        Self::new(c.coeffs().to_vec(), tail)
    }

    /// Stored coefficients (`a_k · unit^k`).
    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    pub fn unit(&self) -> f64 {
        self.unit
    }

    pub fn tail(&self) -> &Tail {
        &self.tail
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn same_unit(&self, other: &Self) -> Result<()> {
        if self.unit != other.unit {
            return Err(Error::Invalid(format!("series scaled by {} and {} cannot be combined", self.unit, other.unit)));
        }
        Ok(())
    }

    fn get(&self, k: usize) -> S {
        self.coeffs.get(k).cloned().unwrap_or_else(S::zero)
    }

    /// Coefficient `k` in the scaled variable, failing past the stored depth
    /// unless the tail is known to vanish.
    fn need(&self, k: usize) -> Result<S> {
        match self.coeffs.get(k) {
            Some(v) => Ok(v.clone()),
            None if self.tail == Tail::Zero => Ok(S::zero()),
            None => Err(Error::InsufficientDualDepth { need: k + 1, have: self.coeffs.len() }),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_unit(other)?;
        let n = self.len().max(other.len());
        let coeffs = (0..n).map(|k| self.get(k) + other.get(k)).collect();
        let tail = if self.tail == Tail::Zero && other.tail == Tail::Zero { Tail::Zero } else { Tail::Unknown };
        Ok(Self { coeffs, unit: self.unit, tail })
    }

    /// Product through degree `n`.
    pub fn mul_trunc(&self, other: &Self, n: usize) -> Result<Self> {
        self.same_unit(other)?;
        let a: Vec<S> = (0..=n).map(|k| self.need(k)).collect::<Result<_>>()?;
        let b: Vec<S> = (0..=n).map(|k| other.need(k)).collect::<Result<_>>()?;
        let coeffs = crate::chaos::cauchy_product(&a, &b, n);
        let tail = if self.tail == Tail::Zero && other.tail == Tail::Zero && self.len() + other.len() <= n + 2 {
            Tail::Zero
        } else {
            Tail::Unknown
        };
        Ok(Self { coeffs, unit: self.unit, tail })
    }

    /// `1/u` through degree `n`; requires `a_0 ≠ 0`.
    pub fn reciprocal(&self, n: usize) -> Result<Self> {
        let a0 = self.need(0)?;
        if a0.is_zero() {
            return Err(Error::SymbolVanishesAtOrigin);
        }
        let a: Vec<S> = (0..=n).map(|k| self.need(k)).collect::<Result<_>>()?;
        let inv = S::one() / a0;
        let mut d = vec![inv.clone()];
        for k in 1..=n {
            let s = (1..=k).fold(S::zero(), |acc, j| if a[j].is_zero() { acc } else { acc + a[j].clone() * d[k - j].clone() });
            d.push(-(s * inv.clone()));
        }
        Ok(Self { coeffs: d, unit: self.unit, tail: Tail::Unknown })
    }

    /// `u(v(z))` through degree `n`; requires `v(0) = 0`. Both series must share the unit 1.
    pub fn compose(&self, inner: &Self, n: usize) -> Result<Self> {
        if self.unit != 1.0 || inner.unit != 1.0 {
            return Err(Error::Invalid("composition needs unscaled series".into()));
        }
        if !inner.need(0)?.is_zero() {
            return Err(Error::Invalid("inner series must vanish at 0".into()));
        }
        // Horner in the ring of truncated series
        let mut acc = Self::polynomial(vec![S::zero()]);
        for k in (0..self.len().min(n + 1)).rev() {
            acc = acc.mul_trunc(inner, n)?;
            acc.coeffs[0] = acc.coeffs[0].clone() + self.coeffs[k].clone();
        }
        acc.tail = Tail::Unknown;
        acc.coeffs.truncate(n + 1);
        Ok(acc)
    }

    /// `exp(u)` through degree `n` for `u(0) = 0`, via `k E_k = Σ_j j u_j E_{k−j}`.
    pub fn exp(&self, n: usize) -> Result<Self> {
        if !self.need(0)?.is_zero() {
            return Err(Error::Invalid("exp needs a series vanishing at 0; factor out the constant".into()));
        }
        let u: Vec<S> = (0..=n).map(|k| self.need(k)).collect::<Result<_>>()?;
        let mut e = vec![S::one()];
        for k in 1..=n {
            let s = (1..=k).fold(S::zero(), |acc, j| {
                if u[j].is_zero() {
                    acc
                } else {
                    acc + S::from_i64(j as i64) * u[j].clone() * e[k - j].clone()
                }
            });
            e.push(s / S::from_i64(k as i64));
        }
        Ok(Self { coeffs: e, unit: self.unit, tail: Tail::Unknown })
    }

    /// `|a_k| R^k` for the stored coefficients, in floating point.
    pub fn scaled_moduli(&self, radius: f64) -> Vec<f64> {
        self.scaled_at(radius).iter().map(|b| b.norm()).collect()
    }

    /// `a_k R^k` for the stored coefficients.
    pub fn scaled_at(&self, radius: f64) -> Vec<Complex64> {
        let ratio = radius / self.unit;
        let mut w = 1.0;
        self.coeffs
            .iter()
            .map(|c| {
                let v = c.to_c64() * w;
                w *= ratio;
                v
            })
            .collect()
    }

    /// Truncated sum `Σ_{k≤n} a_k z^k`.
    pub fn eval(&self, z: Complex64, n: usize) -> Complex64 {
        let w = z / self.unit;
        let top = n.min(self.len().saturating_sub(1));
        let mut acc = Complex64::zero();
        for k in (0..=top).rev() {
            acc = acc * w + self.coeffs[k].to_c64();
        }
        acc
    }

    /// Bound on `Σ_{k≥start} |a_k| R^k` for the unstored part plus stored
    /// coefficients from `start` on. `None` when no bound is known.
    pub fn tail_bound(&self, radius: f64, start: usize) -> Option<f64> {
        let stored: f64 = self.scaled_moduli(radius).iter().skip(start).sum();
        let first = self.len().max(start);
        let rest = match self.tail {
            Tail::Zero => 0.0,
            Tail::Unknown => return None,
            Tail::Decay { radius: r0, scale, power } => {
                let q = radius / r0;
                if q < 1.0 {
                    scale * q.powi(first as i32) / (1.0 - q)
                } else if q == 1.0 && power > 1.0 {
                    scale * (first as f64).powf(1.0 - power) / (power - 1.0)
                } else {
                    return None;
                }
            }
        };
        Some(stored + rest)
    }
}

/// `(Σ_{k≤N} (|a_k| R^k)^p)^{1/p}`: a lower bound of the `A_p⁺(𝔻_R)` norm.
pub fn ap_norm<S: Scalar>(u: &PowerSeries<S>, p: LpExponent, radius: f64, n: usize) -> Result<NormReport> {
    if n >= u.len() && u.tail != Tail::Zero {
        return Err(Error::InsufficientDualDepth { need: n + 1, have: u.len() });
    }
    let b: Vec<f64> = u.scaled_moduli(radius).into_iter().take(n + 1).collect();
    let value = match p {
        LpExponent::Infinity => b.iter().copied().fold(0.0, f64::max),
        LpExponent::Finite(pp) => b.iter().map(|x| x.powf(pp)).sum::<f64>().powf(1.0 / pp),
    };
    let upper = u.tail_bound(radius, n + 1).map(|t| value + t);
    let mut r = NormReport::new(value, "truncated coefficient sum", S::EXACT)
        .with_bounds(Some(value), upper)
        .with_param("N", n)
        .with_param("R", radius)
        .with_param("p", p.to_string());
    if S::EXACT && p == LpExponent::Finite(2.0) && (radius - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15 {
        r = r.with_exact(ap2_dyadic_sqr(u, n)?.render()).with_param("exact_power", 2);
    }
    Ok(r)
}

/// `Σ_{k≤N} |a_k|² 2^{-k}`, exact in exact mode.
pub fn ap2_dyadic_sqr<S: Scalar>(u: &PowerSeries<S>, n: usize) -> Result<S::Real> {
    if u.unit != 1.0 {
        return Err(Error::Invalid("exact A₂ norm needs an unscaled series".into()));
    }
    (0..=n).try_fold(S::Real::zero(), |acc, k| Ok(acc + u.need(k)?.norm_sqr_real() * S::Real::pow2(-(k as i32))))
}

/// Largest modulus of the truncated series on `|z| = R` over equispaced samples.
/// The certified upper bound adds the sampling error `(π/n) Σ k|a_k|R^k` and the tail.
pub fn hinf_boundary<S: Scalar>(u: &PowerSeries<S>, radius: f64, n_samples: usize, n: usize) -> Result<NormReport> {
    if n_samples < 64 {
        return Err(Error::Invalid(format!("need at least 64 boundary samples, got {n_samples}")));
    }
    let b: Vec<Complex64> = u.scaled_at(radius).into_iter().take(n + 1).collect();
    let (max, theta) = boundary_max(&b, n_samples);
    let slope: f64 = b.iter().enumerate().map(|(k, v)| k as f64 * v.norm()).sum();
    let tail = u.tail_bound(radius, n + 1);
    let upper = tail.map(|t| max + PI / n_samples as f64 * slope + t);
    let lower = tail.map(|t| (max - t).max(0.0));
    Ok(NormReport::new(max, "boundary sampling", S::EXACT)
        .with_bounds(lower, upper)
        .with_tolerance(1e-12)
        .with_param("N", n)
        .with_param("R", radius)
        .with_param("samples", n_samples)
        .with_param("argmax_theta", theta))
}

/// Max of `|Σ b_k e^{ikθ}|` over `θ_j = 2πj/n` and the maximizing angle.
pub fn boundary_max(b: &[Complex64], n_samples: usize) -> (f64, f64) {
    let mut best = (0.0, 0.0);
    for j in 0..n_samples {
        let theta = 2.0 * PI * j as f64 / n_samples as f64;
        let z = Complex64::from_polar(1.0, theta);
        let v = b.iter().rev().fold(Complex64::zero(), |acc, c| acc * z + c).norm();
        if v > best.0 {
            best = (v, theta);
        }
    }
    best
}

/// Lower-triangular Toeplitz matrix `L_{ij} = b_{i−j}` acting on length-`N` vectors.
struct Toeplitz<'a> {
    b: &'a [Complex64],
    nonzero: Vec<usize>,
}

impl<'a> Toeplitz<'a> {
    fn new(b: &'a [Complex64]) -> Self {
        let nonzero = (0..b.len()).filter(|&j| b[j] != Complex64::zero()).collect();
        Self { b, nonzero }
    }

    fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        let mut y = vec![Complex64::zero(); n];
        for &j in &self.nonzero {
            if j >= n {
                break;
            }
            let bj = self.b[j];
            for k in j..n {
                y[k] += bj * x[k - j];
            }
        }
        y
    }

    fn apply_adjoint(&self, w: &[Complex64]) -> Vec<Complex64> {
        let n = w.len();
        let mut z = vec![Complex64::zero(); n];
        for &j in &self.nonzero {
            if j >= n {
                break;
            }
            let bj = self.b[j].conj();
            for i in 0..n - j {
                z[i] += bj * w[i + j];
            }
        }
        z
    }
}

fn l2(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// `e^{−ikθ} sin(π(k+1)/(N+1))`: close to the top singular vector when the
/// symbol peaks at `e^{iθ}`.
fn windowed_start(n: usize, theta: f64) -> Vec<Complex64> {
    (0..n)
        .map(|k| Complex64::from_polar((PI * (k + 1) as f64 / (n + 1) as f64).sin(), -(k as f64) * theta))
        .collect()
}

/// Largest singular value of the `N × N` lower-triangular Toeplitz section
/// with first column `b`, by power iteration on `LᴴL`. Returns the Rayleigh
/// quotient (a lower bound) and the final vector.
pub fn toeplitz_section_norm(b: &[Complex64], n: usize, start: Option<&[Complex64]>, max_iter: usize) -> (f64, Vec<Complex64>) {
    let op = Toeplitz::new(&b[..b.len().min(n)]);
    let mut x: Vec<Complex64> = match start {
        Some(s) => {
            let mut v = s.to_vec();
            v.resize(n, Complex64::zero());
            v
        }
        None => {
            let theta = boundary_max(&b[..b.len().min(n)], 1024).1;
            windowed_start(n, theta)
        }
    };
    let nx = l2(&x);
    if nx == 0.0 {
        x = windowed_start(n, 0.0);
    }
    let nx = l2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut best = 0.0f64;
    let mut best_x = x.clone();
    for _ in 0..max_iter {
        let y = op.apply(&x);
        let sigma = l2(&y);
        if sigma > best {
            let gain = sigma - best;
            best = sigma;
            best_x = x.clone();
            if gain <= 1e-13 * sigma {
                break;
            }
        } else {
            break;
        }
        let z = op.apply_adjoint(&y);
        let nz = l2(&z);
        if nz == 0.0 {
            break;
        }
        x = z.into_iter().map(|v| v / nz).collect();
    }
    (best, best_x)
}

fn lp_vec(x: &[Complex64], p: f64) -> f64 {
    x.iter().map(|v| v.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `|v|^{r−1} sgn v` componentwise.
fn duality_map(x: &[Complex64], r: f64) -> Vec<Complex64> {
    x.iter()
        .map(|v| {
            let m = v.norm();
            if m == 0.0 {
                Complex64::zero()
            } else {
                v / m * m.powf(r - 1.0)
            }
        })
        .collect()
}

/// Boyd's ascent for `‖L‖_{p→p}` from one start vector; every iterate's ratio is a valid lower bound.
fn boyd_ascent(op: &Toeplitz<'_>, mut x: Vec<Complex64>, p: f64, iters: usize) -> f64 {
    let q = p / (p - 1.0);
    let mut best = 0.0f64;
    for _ in 0..iters {
        let nx = lp_vec(&x, p);
        if nx == 0.0 {
            break;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let y = op.apply(&x);
        let ratio = lp_vec(&y, p);
        if ratio <= best * (1.0 + 1e-12) {
            best = best.max(ratio);
            break;
        }
        best = ratio;
        let z = op.apply_adjoint(&duality_map(&y, p));
        x = duality_map(&z, q);
    }
    best
}

/// Norm of the weighted convolution `(ξ_k) ↦ (Σ_{j≤k} ξ_{k−j} c_j)` on `ℓ^p(2^{-k})`,
/// via the `N × N` Toeplitz section with entries `b_j = c_j R^j`.
///
/// For `p = 2` the value is the largest singular value of the section. For other
/// `p` the report is an interval: the best test-vector ratio and `Σ|b_j|` plus tail.
pub fn multiplier_norm<S: Scalar>(c: &PowerSeries<S>, p: LpExponent, radius: f64, n: usize) -> Result<NormReport> {
    if n == 0 {
        return Err(Error::Invalid("section size must be positive".into()));
    }
    let b: Vec<Complex64> = c.scaled_at(radius).into_iter().take(n).collect();
    let young = b.iter().map(|v| v.norm()).sum::<f64>();
    let tail = c.tail_bound(radius, n);
    let upper_young = tail.map(|t| young + t);
    let report = match p {
        LpExponent::Finite(pp) if pp == 2.0 => {
            let (sigma, _) = toeplitz_section_norm(&b, n, None, 3000);
            let hinf = hinf_boundary(c, radius, 4096, c.len().saturating_sub(1).max(1))?;
            let upper = match (hinf.certified_upper, upper_young) {
                (Some(h), Some(y)) => Some(h.min(y)),
                (h, y) => h.or(y),
            };
            NormReport::new(sigma, "toeplitz section power iteration", S::EXACT).with_bounds(Some(sigma), upper)
        }
        LpExponent::Finite(1.0) | LpExponent::Infinity => {
            NormReport::new(young, "column sum", S::EXACT).with_bounds(Some(young), upper_young)
        }
        LpExponent::Finite(pp) => {
            let op = Toeplitz::new(&b);
            let theta = boundary_max(&b, 1024).1;
            let mut starts: Vec<Vec<Complex64>> = Vec::new();
            let mut e0 = vec![Complex64::zero(); n];
            e0[0] = Complex64::new(1.0, 0.0);
            starts.push(e0);
            starts.push(windowed_start(n, theta));
            for r in [0.9, 0.99, 0.999] {
                starts.push((0..n).map(|k| Complex64::from_polar(f64::powi(r, k as i32), -(k as f64) * theta)).collect());
            }
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            for _ in 0..3 {
                starts.push((0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect());
            }
            let lower = starts.into_iter().map(|s| boyd_ascent(&op, s, pp, 60)).fold(0.0, f64::max);
            NormReport::new(lower, "boyd ascent lower bound; young upper bound", S::EXACT)
                .with_bounds(Some(lower), upper_young)
                .with_param("interval", true)
        }
    };
    Ok(report.with_param("N", n).with_param("R", radius).with_param("p", p.to_string()).with_tolerance(1e-10))
}

/// Section norms for increasing `N`, each warm-started from the previous vector
/// so the sequence is non-decreasing.
pub fn multiplier_norm_trend<S: Scalar>(c: &PowerSeries<S>, radius: f64, sizes: &[usize]) -> Vec<(usize, f64)> {
    let b_all = c.scaled_at(radius);
    let mut prev: Option<Vec<Complex64>> = None;
    let mut last = 0.0f64;
    let mut out = Vec::new();
    for &n in sizes {
        let b: Vec<Complex64> = b_all.iter().copied().take(n).collect();
        let (mut s, x) = toeplitz_section_norm(&b, n, prev.as_deref(), 500);
        let (fresh, y) = toeplitz_section_norm(&b, n, None, 500);
        let v = if fresh > s {
            s = fresh;
            y
        } else {
            x
        };
        // a padded section vector is admissible, so the value never drops
        last = last.max(s);
        out.push((n, last));
        prev = Some(v);
    }
    out
}

/// Coefficientwise check of `(1 − z) ǧ(z) = (2z − 1) f̂(z)` through degree `N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValueRelationReport {
    pub holds: bool,
    pub degree: usize,
    pub first_failure: Option<usize>,
}

pub fn check_value_relation<S: Scalar>(c: &Chaos1<S>, n: usize) -> Result<ValueRelationReport> {
    let v = values_from_coeffs(c, n)?;
    let cs = c.first(n + 1)?;
    let mut first_failure = None;
    for k in 0..=n {
        let lhs = if k == 0 { v[0].clone() } else { v[k].clone() - v[k - 1].clone() };
        let rhs = if k == 0 { -cs[0].clone() } else { S::from_i64(2) * cs[k - 1].clone() - cs[k].clone() };
        if !crate::scalar::approx_eq(&lhs, &rhs, 1e-12) {
            first_failure = Some(k);
            break;
        }
    }
    Ok(ValueRelationReport { holds: first_failure.is_none(), degree: n, first_failure })
}

/// Variation of the values `f(1/2^k)` against `Σ|c_k|`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BvReport {
    /// `Σ_{k≤N} |2c_k − c_{k+1}|`.
    pub bv_sum: f64,
    /// `Σ_{k≤N} |c_k|`.
    pub a1_sum: f64,
    pub ratio: f64,
    /// `|2c_k − c_{k+1}| ≤ 2|c_k| + |c_{k+1}|` for every `k ≤ N`.
    pub upper_ok: bool,
    /// `|c_k| ≤ Σ_{k≤j≤N} 2^{k−j−1}|2c_j − c_{j+1}| + 2^{k−N−1}|c_{N+1}|` for every `k ≤ N`.
    pub lower_ok: bool,
}

pub fn bv_report<S: Scalar>(c: &Chaos1<S>, n: usize) -> Result<BvReport> {
    let cs: Vec<f64> = c.first(n + 2)?.iter().map(|v| v.abs_f64()).collect();
    let cc = c.first(n + 2)?;
    let diffs: Vec<f64> = (0..=n).map(|k| (S::from_i64(2) * cc[k].clone() - cc[k + 1].clone()).abs_f64()).collect();
    let bv_sum: f64 = diffs.iter().sum();
    let a1_sum: f64 = cs[..=n].iter().sum();
    let slack = 1e-12;
    let upper_ok = (0..=n).all(|k| diffs[k] <= (2.0 * cs[k] + cs[k + 1]) * (1.0 + slack) + slack);
    let mut lower_ok = true;
    // suffix sums s_k = |d_k|/2 + s_{k+1}/2, seeded with the remainder term
    let mut s = cs[n + 1];
    for k in (0..=n).rev() {
        s = (diffs[k] + s) / 2.0;
        if cs[k] > s * (1.0 + slack) + slack {
            lower_ok = false;
        }
    }
    Ok(BvReport { bv_sum, a1_sum, ratio: if a1_sum > 0.0 { bv_sum / a1_sum } else { f64::NAN }, upper_ok, lower_ok })
}

/// All roots of a polynomial and the one of least modulus.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RootsReport {
    pub roots: Vec<Complex64>,
    pub min_modulus: Option<Complex64>,
    /// Largest `|p(z)| / Σ|a_k||z|^k` over the refined roots.
    pub max_relative_residual: f64,
}

fn relative_residual(a: &[Complex64], z: Complex64) -> f64 {
    let mut val = Complex64::zero();
    let mut scale = 0.0;
    for c in a.iter().rev() {
        val = val * z + c;
        scale = scale * z.norm() + c.norm();
    }
    if scale == 0.0 {
        0.0
    } else {
        val.norm() / scale
    }
}

fn arg_0_2pi(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Roots via companion-matrix eigenvalues followed by three Newton steps.
pub fn roots_min_modulus(coeffs: &[Complex64]) -> Result<RootsReport> {
    let top = coeffs.iter().rposition(|c| *c != Complex64::zero()).ok_or(Error::ZeroPolynomial)?;
    let a = &coeffs[..=top];
    let zeros_at_origin = a.iter().position(|c| *c != Complex64::zero()).unwrap_or(0);
    let reduced = &a[zeros_at_origin..];
    let deg = reduced.len() - 1;
    let mut roots = vec![Complex64::zero(); zeros_at_origin];
    if deg > 0 {
        let lead = reduced[deg];
        let mut m = nalgebra::DMatrix::<Complex64>::zeros(deg, deg);
        for j in 0..deg {
            m[(0, j)] = -reduced[deg - 1 - j] / lead;
        }
        for i in 1..deg {
            m[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        let eig = nalgebra::linalg::Schur::new(m)
            .eigenvalues()
            .ok_or_else(|| Error::Invalid("companion eigenvalue iteration failed".into()))?;
        for mut z in eig.iter().copied() {
            for _ in 0..3 {
                let (mut p, mut dp) = (Complex64::zero(), Complex64::zero());
                for c in reduced.iter().rev() {
                    dp = dp * z + p;
                    p = p * z + c;
                }
                if dp.norm() == 0.0 {
                    break;
                }
                let step = p / dp;
                if !step.is_finite() {
                    break;
                }
                z -= step;
            }
            roots.push(z);
        }
    }
    let max_relative_residual = roots.iter().map(|z| relative_residual(a, *z)).fold(0.0, f64::max);
    roots.sort_by(|x, y| x.norm().total_cmp(&y.norm()).then(arg_0_2pi(*x).total_cmp(&arg_0_2pi(*y))));
    let min_modulus = roots.first().map(|first| {
        let m = first.norm();
        let tol = 1e-12 * m.max(1e-300);
        *roots
            .iter()
            .filter(|z| (z.norm() - m).abs() <= tol)
            .min_by(|x, y| arg_0_2pi(**x).total_cmp(&arg_0_2pi(**y)))
            .unwrap_or(first)
    });
    Ok(RootsReport { roots, min_modulus, max_relative_residual })
}

/// A number given either as a JSON string (exact decimal or `p/q`) or a JSON number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumText {
    Text(String),
    Number(serde_json::Number),
}

impl NumText {
    pub fn as_text(&self) -> String {
        match self {
            Self::Text(s) => s.clone(),
            Self::Number(n) => n.to_string(),
        }
    }
}

/// Symbol description as read from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SymbolSpec {
    Polynomial { coeffs: Vec<NumText> },
    /// `c_k = (−a)^k`, i.e. `f̂(z) = 1/(1 + a z)`.
    Geometric { a: NumText },
    /// `(1 − 2^{1/p} z)^θ`.
    Binomial { theta: f64, p: f64 },
    /// `exp((1 + 2^{1/p} z)/(1 − 2^{1/p} z))`.
    Counterexample { p: f64 },
    /// Leading Taylor coefficients of a series with unknown tail.
    Taylor { coeffs: Vec<NumText> },
}

impl SymbolSpec {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json)
            .map_err(|e| Error::Parse(format!("symbol JSON at line {} column {}: {e}", e.line(), e.column())))
    }

    pub fn is_float_only(&self) -> bool {
        matches!(self, Self::Binomial { .. } | Self::Counterexample { .. })
    }
}

/// A symbol both as chaos coefficients and as a (possibly scaled) series.
#[derive(Clone, Debug, PartialEq)]
pub struct Symbol<S> {
    pub chaos: Chaos1<S>,
    pub series: PowerSeries<S>,
    pub warnings: Vec<String>,
}

fn parse_coeffs<S: Scalar>(cs: &[NumText]) -> Result<Vec<S>> {
    if cs.is_empty() {
        return Err(Error::Parse("coefficient list is empty".into()));
    }
    cs.iter().map(|c| S::parse_scalar(&c.as_text())).collect()
}

/// Default truncation for series symbols.
pub const DEFAULT_SERIES_TERMS: usize = 2048;

/// Builds a symbol with `n` stored coefficients for the series kinds.
pub fn make_symbol<S: Scalar>(spec: &SymbolSpec, n: usize) -> Result<Symbol<S>> {
    let mut warnings = Vec::new();
    if S::EXACT && spec.is_float_only() {
        return Err(Error::FloatOnly(format!("{} symbols have irrational coefficients; use --mode float", kind_name(spec))));
    }
    let n = n.max(1);
    let sym = match spec {
        SymbolSpec::Polynomial { coeffs } => {
            let c = Chaos1::polynomial(parse_coeffs(coeffs)?);
            Symbol { series: PowerSeries::polynomial(c.coeffs().to_vec()), chaos: c, warnings }
        }
        SymbolSpec::Taylor { coeffs } => {
            let c = Chaos1::new(parse_coeffs(coeffs)?, Provenance::Taylor);
            Symbol { series: PowerSeries::new(c.coeffs().to_vec(), Tail::Unknown), chaos: c, warnings }
        }
        SymbolSpec::Geometric { a } => {
            let a: S = S::parse_scalar(&a.as_text())?;
            let mut cs = Vec::with_capacity(n);
            let mut pw = S::one();
            for _ in 0..n {
                cs.push(pw.clone());
                pw = pw * (-a.clone());
            }
            let r = a.abs_f64();
            let tail = if r == 0.0 { Tail::Zero } else { Tail::Decay { radius: 1.0 / r, scale: 1.0, power: 0.0 } };
            let c = Chaos1::new(cs, Provenance::Geometric);
            Symbol { series: PowerSeries::new(c.coeffs().to_vec(), tail), chaos: c, warnings }
        }
        SymbolSpec::Binomial { theta, p } => {
            check_p(*p)?;
            if !(*theta > 0.0 && *theta < 1.0 - 1.0 / p) {
                warnings.push(format!("theta = {theta} is outside (0, 1 - 1/p) = (0, {})", 1.0 - 1.0 / p));
            }
            let unit = (-1.0 / p).exp2();
            let e = binomial_unit_coeffs(*theta, n);
            scaled_symbol(e, unit, Provenance::Binomial { theta: *theta, p: *p }, warnings)
        }
        SymbolSpec::Counterexample { p } => {
            check_p(*p)?;
            let unit = (-1.0 / p).exp2();
            // (1+u)/(1−u) = 1 + 2Σ_{k≥1} u^k, so the series is e · exp(2u/(1−u))
            let mut g = vec![2.0; n];
            g[0] = 0.0;
            let e: Vec<f64> = PowerSeries::<Complex64>::new(g.into_iter().map(|v| Complex64::new(v, 0.0)).collect(), Tail::Unknown)
                .exp(n - 1)?
                .coeffs()
                .iter()
                .map(|v| v.re * std::f64::consts::E)
                .collect();
            scaled_symbol(e, unit, Provenance::Counterexample { p: *p }, warnings)
        }
    };
    Ok(sym)
}

fn kind_name(spec: &SymbolSpec) -> &'static str {
    match spec {
        SymbolSpec::Polynomial { .. } => "polynomial",
        SymbolSpec::Geometric { .. } => "geometric",
        SymbolSpec::Binomial { .. } => "binomial",
        SymbolSpec::Counterexample { .. } => "counterexample",
        SymbolSpec::Taylor { .. } => "taylor",
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// Coefficients of `(1 − w)^θ` in `w`.
pub fn binomial_unit_coeffs(theta: f64, n: usize) -> Vec<f64> {
    let mut e = Vec::with_capacity(n);
    let mut cur = 1.0;
    for k in 0..n {
        e.push(cur);
        cur *= (k as f64 - theta) / (k as f64 + 1.0);
    }
    e
}

fn scaled_symbol<S: Scalar>(e: Vec<f64>, unit: f64, prov: Provenance, warnings: Vec<String>) -> Symbol<S> {
    let stored: Vec<S> = e.iter().map(|v| S::from_c64(Complex64::new(*v, 0.0)).expect("float scalar")).collect();
    // unscaled coefficients are kept only while they fit in a double
    let raw: Vec<S> = e
        .iter()
        .enumerate()
        .map_while(|(k, v)| S::from_c64(Complex64::new(v * unit.powi(-(k as i32)), 0.0)))
        .collect();
    Symbol { chaos: Chaos1::new(raw, prov), series: PowerSeries::scaled(stored, unit, Tail::Unknown), warnings }
}

/// A `d`-variate polynomial `Σ ξ_{k_1…k_d} z_1^{k_1} ⋯ z_d^{k_d}`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiSeries<S> {
    pub vars: usize,
    pub coeffs: BTreeMap<Vec<u32>, S>,
}

impl<S: Scalar> MultiSeries<S> {
    /// The symbol `x̂` of a chaos of order `d`.
    pub fn from_chaos(x: &ChaosD<S>) -> Self {
        let coeffs = x.coeffs().iter().map(|(g, v)| (g.gaps().to_vec(), v.clone())).collect();
        Self { vars: x.order(), coeffs }
    }

    /// `x̂(z_1, …, z_d) · f̂(z_d)` for a polynomial `f̂`.
    pub fn mul_last(&self, f: &[S]) -> Self {
        let mut coeffs: BTreeMap<Vec<u32>, S> = BTreeMap::new();
        for (k, v) in &self.coeffs {
            for (j, c) in f.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                let mut key = k.clone();
                if let Some(last) = key.last_mut() {
                    *last += j as u32;
                }
                let e = coeffs.entry(key).or_insert_with(S::zero);
                *e = e.clone() + v.clone() * c.clone();
            }
        }
        coeffs.retain(|_, v| !v.is_zero());
        Self { vars: self.vars, coeffs }
    }
}
