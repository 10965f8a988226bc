//! Dyadic step functions and the Haar multishift.
//!
//! A [`DyadicStep`] of level `m` stores its values on the `2^m` cells
//! `(j/2^m, (j+1)/2^m]`. All operations are exact in exact mode.

mod coeffs;
mod norms;

pub use coeffs::{fourier_haar, HaarCoeffMap};
pub use norms::{
    bmo_norm, bmo_norm_sqr, h1_norm, lp_norm, paley, project_chaos1, sharp, LpExponent, PaleyFunction,
    SharpFunction,
};

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::dyadic::{index_to_multi, MultiIndex};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Finest level a dense step function may have.
pub const MAX_STEP_LEVEL: u32 = 26;

fn check_level(level: u32) -> Result<()> {
    if level > MAX_STEP_LEVEL {
        return Err(Error::Capacity { what: "step function level", got: level as usize, max: MAX_STEP_LEVEL as usize });
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct DyadicStep<S> {
    level: u32,
    values: Vec<S>,
}

impl<S: Scalar> DyadicStep<S> {
    pub fn new(level: u32, values: Vec<S>) -> Result<Self> {
        check_level(level)?;
        if values.len() != 1usize << level {
            return Err(Error::Invalid(format!(
                "level {level} needs {} values, got {}",
                1usize << level,
                values.len()
            )));
        }
        Ok(Self { level, values })
    }

    pub fn zero(level: u32) -> Result<Self> {
        Self::constant(level, S::zero())
    }

    pub fn constant(level: u32, v: S) -> Result<Self> {
        check_level(level)?;
        Ok(Self { level, values: vec![v; 1usize << level] })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    /// Value on cell `j` of the finer grid of level `m >= self.level()`.
    pub fn cell(&self, m: u32, j: usize) -> &S {
        &self.values[j >> (m - self.level)]
    }

    /// Point evaluation with the `(a, b]` convention; `t` must lie in `(0, 1]`.
    pub fn eval(&self, t: &BigRational) -> Result<S> {
        let zero = BigRational::zero();
        if *t <= zero || *t > BigRational::from_integer(1.into()) {
            return Err(Error::Invalid(format!("point {t} outside (0, 1]")));
        }
        let scaled = t * BigRational::from_integer(num_bigint::BigInt::from(1u8) << self.level);
        let j = scaled.ceil().to_integer().to_usize().unwrap_or(1) - 1;
        Ok(self.values[j].clone())
    }

    /// Same function represented at level `m >= level`.
    pub fn refine(&self, m: u32) -> Result<Self> {
        if m < self.level {
            return Err(Error::Invalid(format!("cannot refine level {} down to {m}", self.level)));
        }
        check_level(m)?;
        let rep = 1usize << (m - self.level);
        let mut values = Vec::with_capacity(1usize << m);
        for v in &self.values {
            values.extend(std::iter::repeat_n(v.clone(), rep));
        }
        Ok(Self { level: m, values })
    }

    /// Lowest-level representation of the same function.
    pub fn coarsen(&self) -> Self {
        let mut cur = self.clone();
        while cur.level > 0 && cur.values.chunks(2).all(|p| p[0] == p[1]) {
            cur = Self { level: cur.level - 1, values: cur.values.chunks(2).map(|p| p[0].clone()).collect() };
        }
        cur
    }

    pub fn mean(&self) -> S {
        let sum = self.values.iter().fold(S::zero(), |acc, v| acc + v.clone());
        sum * S::pow2(-(self.level as i32))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    fn zip_with(&self, other: &Self, op: impl Fn(&S, &S) -> S) -> Result<Self> {
        let m = self.level.max(other.level);
        check_level(m)?;
        let values = (0..1usize << m).map(|j| op(self.cell(m, j), other.cell(m, j))).collect();
        Ok(Self { level: m, values })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn scale(&self, s: &S) -> Self {
        Self { level: self.level, values: self.values.iter().map(|v| v.clone() * s.clone()).collect() }
    }

    /// True when both represent the same function (levels may differ).
    pub fn same_function(&self, other: &Self) -> bool {
        let m = self.level.max(other.level);
        (0..1usize << m).all(|j| self.cell(m, j) == other.cell(m, j))
    }

    /// `h_n = V^α h` at the given level.
    pub fn haar(n: u64, level: u32) -> Result<Self> {
        let alpha = index_to_multi(n)?;
        let need = alpha.len() as u32 + 1;
        if level < need {
            return Err(Error::Capacity { what: "Haar function needs level", got: need as usize, max: level as usize });
        }
        check_level(level)?;
        let mut values = vec![S::zero(); 1usize << level];
        let width = 1usize << (level as usize - alpha.len());
        let start = alpha.position() as usize * width;
        for (i, v) in values[start..start + width].iter_mut().enumerate() {
            *v = if i < width / 2 { S::one() } else { -S::one() };
        }
        Ok(Self { level, values })
    }

    /// `V_b x`: squeeze onto the left (`b = 0`) or right (`b = 1`) half.
    pub fn dilate(&self, b: u8) -> Result<Self> {
        check_level(self.level + 1)?;
        let n = self.values.len();
        let mut values = vec![S::zero(); 2 * n];
        let offset = if b == 0 { 0 } else { n };
        values[offset..offset + n].clone_from_slice(&self.values);
        Ok(Self { level: self.level + 1, values })
    }

    /// `V^α x = V_{α_1} … V_{α_k} x`.
    pub fn apply_multi(&self, alpha: &MultiIndex) -> Result<Self> {
        let k = alpha.len() as u32;
        check_level(self.level + k)?;
        let n = self.values.len();
        let mut values = vec![S::zero(); n << k];
        let start = alpha.position() as usize * n;
        values[start..start + n].clone_from_slice(&self.values);
        Ok(Self { level: self.level + k, values })
    }

    /// Restriction of `x` to `I_α`, stretched back onto `(0, 1]`.
    pub fn restrict(&self, alpha: &MultiIndex) -> Result<Self> {
        let k = alpha.len() as u32;
        if k > self.level {
            return Err(Error::IndexTooDeep { len: alpha.len(), level: self.level });
        }
        let width = 1usize << (self.level - k);
        let start = alpha.position() as usize * width;
        Ok(Self { level: self.level - k, values: self.values[start..start + width].to_vec() })
    }

    /// `2^{|α|} V^{α*} x`: the restriction to `I_α` stretched to `(0, 1]`,
    /// minus its mean.
    pub fn adjoint_scaled(&self, alpha: &MultiIndex) -> Result<Self> {
        let r = self.restrict(alpha)?;
        let mu = r.mean();
        Ok(Self { level: r.level, values: r.values.into_iter().map(|v| v - mu.clone()).collect() })
    }

    /// The unscaled adjoint `V^{α*} x`.
    pub fn adjoint(&self, alpha: &MultiIndex) -> Result<Self> {
        Ok(self.adjoint_scaled(alpha)?.scale(&S::pow2(-(alpha.len() as i32))))
    }
}

/// The bilinear pairing `(x, y) = ∫ x y` (no conjugation).
#[derive(serde::Deserialize, serde::Serialize)]
#[serde(deny_unknown_fields)]
struct StepJson {
    level: u32,
    values: Vec<serde_json::Value>,
}

impl<S: Scalar> DyadicStep<S> {
    /// Parses `{"level": m, "values": [...]}`; values are strings such as
    /// `"1/3"`, `"1/2-1/4i"` or `"0.125"`, or plain JSON numbers.
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: StepJson = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let values = raw
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let t = match v {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Number(n) => n.to_string(),
                    other => return Err(Error::Parse(format!("value {i}: expected string or number, got {other}"))),
                };
                S::parse_scalar(&t).map_err(|e| Error::Parse(format!("value {i}: {e}")))
            })
            .collect::<Result<Vec<S>>>()?;
        Self::new(raw.level, values)
    }

    pub fn to_json(&self) -> String {
        let raw = StepJson {
            level: self.level,
            values: self.values.iter().map(|v| serde_json::Value::String(v.render())).collect(),
        };
        serde_json::to_string(&raw).expect("step json")
    }
}

pub fn inner<S: Scalar>(x: &DyadicStep<S>, y: &DyadicStep<S>) -> S {
    pair(x, y, |b| b.clone())
}

/// Sesquilinear pairing `∫ x conj(y)`.
pub fn inner_sesq<S: Scalar>(x: &DyadicStep<S>, y: &DyadicStep<S>) -> S {
    pair(x, y, |b| b.conj())
}

fn pair<S: Scalar>(x: &DyadicStep<S>, y: &DyadicStep<S>, g: impl Fn(&S) -> S) -> S {
    let m = x.level.max(y.level);
    let mut acc = S::zero();
    for j in 0..1usize << m {
        let a = x.cell(m, j);
        if a.is_zero() {
            continue;
        }
        let b = y.cell(m, j);
        if b.is_zero() {
            continue;
        }
        acc = acc + a.clone() * g(b);
    }
    acc * S::pow2(-(m as i32))
}

/// `‖x‖²_{L²}`, exact in exact mode.
pub fn l2_norm_sqr<S: Scalar>(x: &DyadicStep<S>) -> S::Real {
    let sum = x.values.iter().fold(S::Real::zero(), |acc, v| acc + v.norm_sqr_real());
    sum * <S::Real as crate::scalar::Real>::pow2(-(x.level as i32))
}
