use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use super::coeffs::{check_zero_mean, fourier_haar, sum_pyramid};
use super::DyadicStep;
use crate::dyadic::MultiIndex;
use crate::error::{Error, Result};
use crate::report::NormReport;
use crate::scalar::{Real, Scalar, FLOAT_TOLERANCE};

/// Exponent of an `L^p` norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(Self::Infinity)
        } else if p >= 1.0 {
            Ok(Self::Finite(p))
        } else {
            Err(Error::InvalidExponent(p))
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Self::Finite(p) => *p,
            Self::Infinity => f64::INFINITY,
        }
    }

    /// `Some(p)` when `p` is an even positive integer.
    fn even_integer(&self) -> Option<u32> {
        match self {
            Self::Finite(p) if p.fract() == 0.0 && *p <= 64.0 && (*p as u32).is_multiple_of(2) => Some(*p as u32),
            _ => None,
        }
    }
}

impl FromStr for LpExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Self::Infinity),
            t => Self::new(t.parse::<f64>().map_err(|e| Error::Parse(format!("exponent {s:?}: {e}")))?),
        }
    }
}

impl fmt::Display for LpExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(p) => write!(f, "{p}"),
            Self::Infinity => write!(f, "inf"),
        }
    }
}

/// `‖x‖_{L^p}`. For even integer `p` in exact mode the `p`-th power is
/// also reported as an exact rational.
pub fn lp_norm<S: Scalar>(x: &DyadicStep<S>, p: LpExponent) -> Result<NormReport> {
    let m = x.level();
    let report = match p {
        LpExponent::Infinity => {
            let sup = x.values().iter().map(|v| v.abs_f64()).fold(0.0, f64::max);
            let mut r = NormReport::new(sup, "direct sup", S::EXACT);
            if S::EXACT {
                let sq = x.values().iter().map(|v| v.norm_sqr_real()).fold(S::Real::zero(), |a, b| if b > a { b } else { a });
                r = r.with_exact(sq.render()).with_param("exact_power", 2);
            }
            r
        }
        LpExponent::Finite(pp) => {
            let sum: f64 = x.values().iter().map(|v| v.abs_f64().powf(pp)).sum();
            let value = (sum * (-(m as f64)).exp2()).powf(1.0 / pp);
            let mut r = NormReport::new(value, "direct", S::EXACT);
            match p.even_integer() {
                Some(k) if S::EXACT => {
                    let mut acc = S::Real::zero();
                    for v in x.values() {
                        let sq = v.norm_sqr_real();
                        let mut pw = S::Real::one();
                        for _ in 0..k / 2 {
                            pw = pw * sq.clone();
                        }
                        acc = acc + pw;
                    }
                    let exact = acc * S::Real::pow2(-(m as i32));
                    r = r.with_exact(exact.render()).with_param("exact_power", k);
                }
                _ => r = r.with_tolerance(FLOAT_TOLERANCE),
            }
            r
        }
    };
    Ok(report.with_param("level", m).with_param("p", p.to_string()))
}

/// Squared oscillations `‖2^k V^{α*} x‖²` for every `|α| = k < level`,
/// indexed `[k][position]`.
fn oscillation_pyramid<S: Scalar>(x: &DyadicStep<S>) -> Vec<Vec<S::Real>> {
    let m = x.level() as usize;
    let sums = sum_pyramid(x);
    let sq = DyadicStep::new(m as u32, x.values().iter().map(|v| S::from_real(v.norm_sqr_real())).collect())
        .expect("same level");
    let sq_sums = sum_pyramid(&sq);
    (0..m)
        .map(|k| {
            let a = S::Real::pow2(-((m - k) as i32));
            let a2 = a.clone() * a.clone();
            sums[k]
                .iter()
                .zip(&sq_sums[k])
                .map(|(s1, s2)| s2.re() * a.clone() - s1.norm_sqr_real() * a2.clone())
                .collect()
        })
        .collect()
}

fn max_real<R: Real>(it: impl Iterator<Item = R>) -> R {
    it.fold(R::zero(), |a, b| if b > a { b } else { a })
}

/// `‖x‖²_{BMO}`: exact in exact mode.
pub fn bmo_norm_sqr<S: Scalar>(x: &DyadicStep<S>) -> Result<S::Real> {
    check_zero_mean(x)?;
    Ok(max_real(oscillation_pyramid(x).into_iter().flatten()))
}

/// `‖x‖_{BMO} = sup_α ‖2^{|α|} V^{α*} x‖_{L²}`; the squared value is reported exactly.
pub fn bmo_norm<S: Scalar>(x: &DyadicStep<S>) -> Result<NormReport> {
    let sq = bmo_norm_sqr(x)?;
    let mut r = NormReport::new(sq.to_f64().sqrt(), "oscillation pyramid", S::EXACT)
        .with_param("level", x.level())
        .with_param("exact_power", 2)
        .with_exact(sq.render());
    if !S::EXACT {
        r = r.with_tolerance(FLOAT_TOLERANCE);
    }
    Ok(r)
}

/// A non-negative step function stored through its exact squares.
#[derive(Clone, Debug, PartialEq)]
pub struct SquaredStep<R> {
    level: u32,
    squared: Vec<R>,
}

/// `x^♯(t) = sup_{I_α ∋ t} ‖2^{|α|} V^{α*} x‖`.
pub type SharpFunction<R> = SquaredStep<R>;

/// `Px(t) = (Σ_k |ξ(t_1, …, t_k)|²)^{1/2}`.
pub type PaleyFunction<R> = SquaredStep<R>;

impl<R: Real> SquaredStep<R> {
    pub fn level(&self) -> u32 {
        self.level
    }

    /// Exact squared values, one per cell.
    pub fn squared(&self) -> &[R] {
        &self.squared
    }

    pub fn max_squared(&self) -> R {
        max_real(self.squared.iter().cloned())
    }

    /// Cell values (square roots) in floating point.
    pub fn values_f64(&self) -> Vec<f64> {
        self.squared.iter().map(|v| v.to_f64().sqrt()).collect()
    }

    pub fn to_step(&self) -> DyadicStep<num_complex::Complex64> {
        let v = self.values_f64().into_iter().map(|r| num_complex::Complex64::new(r, 0.0)).collect();
        DyadicStep::new(self.level, v).expect("level already validated")
    }

    /// `∫` of the square-root function, in floating point.
    pub fn integral_f64(&self) -> f64 {
        self.values_f64().iter().sum::<f64>() * (-(self.level as f64)).exp2()
    }
}

pub fn sharp<S: Scalar>(x: &DyadicStep<S>) -> Result<SharpFunction<S::Real>> {
    check_zero_mean(x)?;
    let m = x.level();
    let osc = oscillation_pyramid(x);
    let squared = (0..1usize << m)
        .map(|j| max_real((0..m as usize).map(|k| osc[k][j >> (m as usize - k)].clone())))
        .collect();
    Ok(SquaredStep { level: m, squared })
}

pub fn paley<S: Scalar>(x: &DyadicStep<S>) -> Result<PaleyFunction<S::Real>> {
    let m = x.level();
    let xi = fourier_haar(x)?;
    // running path sums, top-down
    let mut level_sums = vec![S::Real::zero()];
    for k in 0..m as usize {
        let mut next = Vec::with_capacity(level_sums.len() * 2);
        for (j, acc) in level_sums.iter().enumerate() {
            let c = xi.get(&MultiIndex::from_position(k, j as u64)?).map_or(S::Real::zero(), |v| v.norm_sqr_real());
            let s = acc.clone() + c;
            next.push(s.clone());
            next.push(s);
        }
        level_sums = next;
    }
    Ok(SquaredStep { level: m, squared: level_sums })
}

/// `‖Px‖_{L¹}`, the Paley form of the dyadic `H¹` norm.
pub fn h1_norm<S: Scalar>(x: &DyadicStep<S>) -> Result<NormReport> {
    let p = paley(x)?;
    Ok(NormReport::new(p.integral_f64(), "paley function", S::EXACT)
        .with_tolerance(FLOAT_TOLERANCE)
        .with_param("level", x.level())
        .with_param("atomic_norm", "not computed"))
}

/// `Q x`: the average of `x` on each `(2^{-k-1}, 2^{-k}]` for `k < level`;
/// the last cell `(0, 2^{-level}]` is left as is.
pub fn project_chaos1<S: Scalar>(x: &DyadicStep<S>) -> DyadicStep<S> {
    let m = x.level() as usize;
    let mut values = x.values().to_vec();
    for k in 0..m {
        let lo = 1usize << (m - k - 1);
        let hi = 1usize << (m - k);
        let sum = values[lo..hi].iter().fold(S::zero(), |a, v| a + v.clone());
        let avg = sum * S::pow2(-((m - k - 1) as i32));
        for v in &mut values[lo..hi] {
            *v = avg.clone();
        }
    }
    DyadicStep::new(m as u32, values).expect("same level")
}

#[cfg(test)]
mod tests {
    use super::super::{inner, l2_norm_sqr};
    use super::*;
    use crate::dyadic::index_to_multi;
    use crate::scalar::Exact;
    use num_rational::BigRational;

    type R = BigRational;

    fn q(n: i64, d: i64) -> R {
        R::from_ratio(n, d)
    }

    fn haar(n: u64, level: u32) -> DyadicStep<Exact> {
        DyadicStep::haar(n, level).unwrap()
    }

    fn mean_zero(level: u32, seed: u64) -> DyadicStep<Exact> {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) % 19) as i64 - 9
        };
        let v: Vec<Exact> = (0..1usize << level)
            .map(|_| {
                let (a, b, d) = (next(), next(), next().abs() + 1);
                Exact::new(q(a, d), q(b, 3))
            })
            .collect();
        let x = DyadicStep::new(level, v).unwrap();
        x.sub(&DyadicStep::constant(0, x.mean()).unwrap()).unwrap()
    }

    #[test]
    fn lp_examples() {
        let h = haar(1, 1);
        for p in [1.0, 1.5, 2.0, 3.0, 4.0, f64::INFINITY] {
            assert_eq!(lp_norm(&h, LpExponent::new(p).unwrap()).unwrap().value, 1.0);
        }
        let h2 = haar(2, 2);
        assert_eq!(lp_norm(&h2, LpExponent::Finite(2.0)).unwrap().exact.as_deref(), Some("1/2"));
        assert_eq!(lp_norm(&h2, LpExponent::Finite(4.0)).unwrap().exact.as_deref(), Some("1/2"));
        assert!(lp_norm(&h2, LpExponent::Finite(3.0)).unwrap().exact.is_none());
        assert!(LpExponent::new(0.5).is_err());
        assert_eq!("inf".parse::<LpExponent>().unwrap(), LpExponent::Infinity);
    }

    #[test]
    fn bmo_of_haar_functions_is_one() {
        for n in 1..=64u64 {
            let len = index_to_multi(n).unwrap().len() as u32;
            assert_eq!(bmo_norm_sqr(&haar(n, len + 2)).unwrap(), q(1, 1), "n = {n}");
        }
        assert_eq!(bmo_norm(&haar(1, 1)).unwrap().value, 1.0);
    }

    #[test]
    fn bmo_matches_adjoint_definition() {
        for seed in 0..5 {
            let x = mean_zero(4, seed);
            let brute = MultiIndex::all_up_to(3)
                .unwrap()
                .iter()
                .map(|a| l2_norm_sqr(&x.adjoint_scaled(a).unwrap()))
                .fold(q(0, 1), |a, b| if b > a { b } else { a });
            assert_eq!(bmo_norm_sqr(&x).unwrap(), brute);
        }
    }

    #[test]
    fn sharp_examples() {
        let s = sharp(&haar(1, 3)).unwrap();
        assert!(s.squared().iter().all(|v| *v == q(1, 1)));
        let z = sharp(&DyadicStep::<Exact>::zero(3).unwrap()).unwrap();
        assert!(z.squared().iter().all(|v| *v == q(0, 1)));
        for seed in 0..10 {
            let x = mean_zero(5, seed);
            assert_eq!(sharp(&x).unwrap().max_squared(), bmo_norm_sqr(&x).unwrap());
        }
    }

    #[test]
    fn paley_examples() {
        let p = paley(&haar(1, 1)).unwrap();
        assert_eq!(p.squared(), &[q(1, 1), q(1, 1)]);
        assert_eq!(h1_norm(&haar(1, 1)).unwrap().value, 1.0);
        for n in 1..32u64 {
            let h = haar(n, 6);
            let l1 = lp_norm(&h, LpExponent::Finite(1.0)).unwrap().value;
            assert!((h1_norm(&h).unwrap().value - l1).abs() < 1e-15);
        }
    }

    #[test]
    fn paley_chaos1_closed_form() {
        let c = [q(1, 1), q(-1, 2), q(2, 3), q(1, 5)];
        let m = c.len();
        let mut x = DyadicStep::<Exact>::zero(m as u32 + 1).unwrap();
        for (k, ck) in c.iter().enumerate() {
            x = x.add(&haar(1 << k, m as u32 + 1).scale(&Exact::from_real(ck.clone()))).unwrap();
        }
        let mut expect = 0.0;
        let mut acc = 0.0;
        for (k, ck) in c.iter().enumerate() {
            acc += ck.to_f64().powi(2);
            expect += (-(k as f64) - 1.0).exp2() * acc.sqrt();
        }
        expect += (-(m as f64)).exp2() * acc.sqrt();
        assert!((h1_norm(&x).unwrap().value - expect).abs() < 1e-14);
    }

    #[test]
    fn averaging_projection() {
        let h2 = haar(2, 4);
        assert!(project_chaos1(&h2).same_function(&h2));
        assert!(project_chaos1(&haar(3, 4)).is_zero());
        for seed in 0..5 {
            let x = mean_zero(5, seed);
            let qx = project_chaos1(&x);
            assert_eq!(project_chaos1(&qx), qx);
            assert_eq!(qx.mean(), x.mean());
        }
    }

    #[test]
    fn refinement_invariance() {
        let x = mean_zero(3, 7);
        let y = x.refine(6).unwrap();
        assert_eq!(bmo_norm_sqr(&x).unwrap(), bmo_norm_sqr(&y).unwrap());
        assert_eq!(l2_norm_sqr(&x), l2_norm_sqr(&y));
        assert_eq!(inner(&x, &x), inner(&y, &x));
        assert!((h1_norm(&x).unwrap().value - h1_norm(&y).unwrap().value).abs() < 1e-12);
    }
}
