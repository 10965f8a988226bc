//! Scalar fields used by every computation.
//!
//! A computation runs either in exact mode, over complex numbers with
//! arbitrary-precision rational parts ([`Exact`]), or in float mode over
//! [`Complex64`]. Generic code is written against [`Scalar`]; the real part
//! type is exposed as [`Scalar::Real`] so squared moduli stay exact.

use std::fmt::Debug;
use std::ops::Neg;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact complex rational scalar.
pub type Exact = Complex<BigRational>;
/// Float complex scalar.
pub type Float = Complex64;

/// Relative tolerance documented for float-mode reports.
pub const FLOAT_TOLERANCE: f64 = 1e-12;

/// Real coefficient field: [`BigRational`] or `f64`.
pub trait Real: Clone + Debug + PartialOrd + Num + Neg<Output = Self> + Send + Sync + 'static {
    const EXACT: bool;

    /// Exact conversion where possible; `None` for non-finite input.
    fn from_f64(x: f64) -> Option<Self>;
    fn to_f64(&self) -> f64;
    fn from_ratio(num: i64, den: i64) -> Self;
    /// `2^k` for any integer `k`.
    fn pow2(k: i32) -> Self;
    fn abs_val(&self) -> Self;
    /// Parses `"p/q"`, an integer, or a decimal literal (`"-0.25"`, `"1e-3"`).
    fn parse_real(s: &str) -> Result<Self>;
    fn render(&self) -> String;
}

impl Real for BigRational {
    const EXACT: bool = true;

    fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x)
    }

    fn to_f64(&self) -> f64 {
        ratio_to_f64(self)
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn pow2(k: i32) -> Self {
        let p = BigInt::one() << k.unsigned_abs();
        if k >= 0 {
            BigRational::from_integer(p)
        } else {
            BigRational::new(BigInt::one(), p)
        }
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn parse_real(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.contains('/') {
            let (n, d) = t
                .split_once('/')
                .ok_or_else(|| Error::Parse(format!("bad rational {s:?}")))?;
            let n = BigInt::from_str(n.trim()).map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
            let d = BigInt::from_str(d.trim()).map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
            if d.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            return Ok(BigRational::new(n, d));
        }
        parse_decimal_exact(t)
    }

    fn render(&self) -> String {
        self.to_string()
    }
}

impl Real for f64 {
    const EXACT: bool = false;

    fn from_f64(x: f64) -> Option<Self> {
        x.is_finite().then_some(x)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }

    fn pow2(k: i32) -> Self {
        2f64.powi(k)
    }

    fn abs_val(&self) -> Self {
        self.abs()
    }

    fn parse_real(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.contains('/') {
            let q = BigRational::parse_real(t)?;
            return Ok(ratio_to_f64(&q));
        }
        let x: f64 = t.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
        if !x.is_finite() {
            return Err(Error::Parse(format!("non-finite number {s:?}")));
        }
        Ok(x)
    }

    fn render(&self) -> String {
        format_f64(*self)
    }
}

/// Fixed 17-significant-digit rendering, stable across runs.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.16e}")
}

fn ratio_to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // huge numerator/denominator: shift both into range first
    let nb = q.numer().bits() as i64;
    let db = q.denom().bits() as i64;
    let shift = nb.max(db) - 900;
    let n = (q.numer() >> shift.max(0) as usize).to_f64().unwrap_or(f64::NAN);
    let d = (q.denom() >> shift.max(0) as usize).to_f64().unwrap_or(f64::NAN);
    n / d
}

fn parse_decimal_exact(t: &str) -> Result<BigRational> {
    let err = || Error::Parse(format!("bad number {t:?}"));
    if t.is_empty() {
        return Err(err());
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = t[i + 1..].parse().map_err(|_| err())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (neg, body) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err());
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut n = BigInt::from_str(if digits.is_empty() { "0" } else { &digits }).map_err(|_| err())?;
    if neg {
        n = -n;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let p = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * p)
    } else {
        BigRational::new(n, p)
    })
}

/// Complex scalar over a [`Real`] field.
pub trait Scalar: Clone + Debug + PartialEq + Num + Neg<Output = Self> + Send + Sync + 'static {
    type Real: Real;
    const EXACT: bool;

    fn from_real(r: Self::Real) -> Self;
    fn from_parts(re: Self::Real, im: Self::Real) -> Self;
    fn from_i64(n: i64) -> Self {
        Self::from_real(Self::Real::from_ratio(n, 1))
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_real(Self::Real::from_ratio(num, den))
    }
    fn from_c64(z: Complex64) -> Option<Self>;
    fn pow2(k: i32) -> Self {
        Self::from_real(Self::Real::pow2(k))
    }
    fn re(&self) -> Self::Real;
    fn im(&self) -> Self::Real;
    fn conj(&self) -> Self;
    /// `|z|^2`, exact in exact mode.
    fn norm_sqr_real(&self) -> Self::Real;
    fn to_c64(&self) -> Complex64;
    fn abs_f64(&self) -> f64 {
        self.to_c64().norm()
    }
    fn scale_real(&self, r: &Self::Real) -> Self;
    /// Parses `"p/q"`, `"p/q+r/s i"`, `"a-b i"`, `"2i"` or decimal forms.
    fn parse_scalar(s: &str) -> Result<Self>;
    fn render(&self) -> String;
}

impl<R: Real> Scalar for Complex<R> {
    type Real = R;
    const EXACT: bool = R::EXACT;

    fn from_real(r: R) -> Self {
        Complex::new(r, R::zero())
    }

    fn from_parts(re: R, im: R) -> Self {
        Complex::new(re, im)
    }

    fn from_c64(z: Complex64) -> Option<Self> {
        Some(Complex::new(R::from_f64(z.re)?, R::from_f64(z.im)?))
    }

    fn re(&self) -> R {
        self.re.clone()
    }

    fn im(&self) -> R {
        self.im.clone()
    }

    fn conj(&self) -> Self {
        Complex::new(self.re.clone(), -self.im.clone())
    }

    fn norm_sqr_real(&self) -> R {
        self.re.clone() * self.re.clone() + self.im.clone() * self.im.clone()
    }

    fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }

    fn scale_real(&self, r: &R) -> Self {
        Complex::new(self.re.clone() * r.clone(), self.im.clone() * r.clone())
    }

    fn parse_scalar(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(Error::Parse("empty scalar".into()));
        }
        let Some(body) = t.strip_suffix('i') else {
            return Ok(Complex::new(R::parse_real(&t)?, R::zero()));
        };
        // split at the last sign that is not the leading one and not an exponent sign
        let bytes = body.as_bytes();
        let mut split = None;
        for i in (1..bytes.len()).rev() {
            if (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'/') {
                split = Some(i);
                break;
            }
        }
        let (re_txt, im_txt) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("", body),
        };
        let im = match im_txt {
            "" | "+" => R::one(),
            "-" => -R::one(),
            other => R::parse_real(other.strip_prefix('+').unwrap_or(other))?,
        };
        let re = if re_txt.is_empty() { R::zero() } else { R::parse_real(re_txt)? };
        Ok(Complex::new(re, im))
    }

    fn render(&self) -> String {
        let re = self.re.render();
        if self.im.is_zero() {
            return re;
        }
        let neg = self.im < R::zero();
        let mag = self.im.abs_val().render();
        let sign = if neg { '-' } else { '+' };
        if self.re.is_zero() {
            return format!("{}{mag}i", if neg { "-" } else { "" });
        }
        format!("{re}{sign}{mag}i")
    }
}

/// Parses a real number as the scalar type's real part.
pub fn parse_real<S: Scalar>(s: &str) -> Result<S::Real> {
    S::Real::parse_real(s)
}

/// Scalars equal within the documented float tolerance (exact equality in exact mode).
pub fn approx_eq<S: Scalar>(a: &S, b: &S, rel_tol: f64) -> bool {
    if S::EXACT {
        return a == b;
    }
    let (x, y) = (a.to_c64(), b.to_c64());
    (x - y).norm() <= rel_tol * (1.0 + x.norm().max(y.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::from_ratio(n, d)
    }

    #[test]
    fn parse_rationals_and_decimals_exactly() {
        assert_eq!(BigRational::parse_real("-1/2").unwrap(), q(-1, 2));
        assert_eq!(BigRational::parse_real("0.25").unwrap(), q(1, 4));
        assert_eq!(BigRational::parse_real("-1.5e-1").unwrap(), q(-3, 20));
        assert_eq!(BigRational::parse_real("12").unwrap(), q(12, 1));
        assert!(BigRational::parse_real("1//2").is_err());
        assert!(BigRational::parse_real("1/0").is_err());
        assert!(BigRational::parse_real("abc").is_err());
    }

    #[test]
    fn parse_complex_forms() {
        let z = Exact::parse_scalar("1/2+3/4 i").unwrap();
        assert_eq!(z, Complex::new(q(1, 2), q(3, 4)));
        let z = Exact::parse_scalar("-1/3-2i").unwrap();
        assert_eq!(z, Complex::new(q(-1, 3), q(-2, 1)));
        let z = Exact::parse_scalar("i").unwrap();
        assert_eq!(z, Complex::new(q(0, 1), q(1, 1)));
        let z = Exact::parse_scalar("-i").unwrap();
        assert_eq!(z, Complex::new(q(0, 1), q(-1, 1)));
        let z = Float::parse_scalar("1e-2-2e+1i").unwrap();
        assert_eq!(z, Complex64::new(0.01, -20.0));
        assert!(Exact::parse_scalar("1//2").is_err());
    }

    #[test]
    fn render_round_trips() {
        for s in ["1/3", "-2", "1/2+3/4i", "-1/3-2i", "5i", "-7/9i"] {
            let z = Exact::parse_scalar(s).unwrap();
            assert_eq!(Exact::parse_scalar(&z.render()).unwrap(), z, "{s}");
        }
    }

    #[test]
    fn pow2_both_signs() {
        assert_eq!(BigRational::pow2(-3), q(1, 8));
        assert_eq!(BigRational::pow2(4), q(16, 1));
        assert_eq!(<f64 as Real>::pow2(-2), 0.25);
    }

    #[test]
    fn huge_rational_to_f64() {
        let big = BigRational::pow2(2000) / BigRational::pow2(1999);
        assert_eq!(Real::to_f64(&big), 2.0);
        let r = BigRational::new(BigInt::one() << 1500usize, (BigInt::one() << 1500usize) * BigInt::from(3));
        assert!((Real::to_f64(&r) - 1.0 / 3.0).abs() < 1e-15);
    }
}
