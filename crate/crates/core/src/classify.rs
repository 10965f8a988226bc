//! Spectra of `T_f` and basis verdicts for the affine system generated by a symbol.

use std::collections::HashMap;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::chaos::Chaos1;
use crate::error::{Error, Result};
use crate::report::NormReport;
use crate::scalar::Scalar;
use crate::stepfn::LpExponent;
use crate::symbol::{boundary_max, multiplier_norm, roots_min_modulus, toeplitz_section_norm, PowerSeries, Tail};

/// `R_p = 2^{-1/max(p, 2)}`, kept as the exponent `e` with `R_p = 2^{-1/e}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalRadius {
    pub exponent: f64,
    pub value: f64,
}

impl fmt::Display for CriticalRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^(-1/{})", self.exponent)
    }
}

pub fn critical_radius(p: f64) -> Result<CriticalRadius> {
    if p.is_nan() || p <= 1.0 || p.is_infinite() {
        return Err(Error::InvalidExponent(p));
    }
    let exponent = p.max(2.0);
    Ok(CriticalRadius { exponent, value: (-1.0 / exponent).exp2() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CloudSource {
    Boundary,
    Interior,
}

impl CloudSource {
    fn as_str(&self) -> &'static str {
        match self {
            Self::Boundary => "boundary",
            Self::Interior => "interior",
        }
    }
}

/// Images `f̂(z)` of sample points `|z| ≤ R_p`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumCloud {
    pub points: Vec<(Complex64, CloudSource)>,
    pub radius_used: f64,
    pub p: f64,
    /// Bound on the truncation error of each point, when known.
    pub tail_bound: Option<f64>,
}

/// Sampling density of a cloud: `resolution` is the largest spacing between
/// neighbouring sample points in the `z`-disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CloudGrid {
    pub resolution: f64,
    pub boundary_samples: usize,
}

impl Default for CloudGrid {
    fn default() -> Self {
        Self { resolution: 0.01, boundary_samples: 2048 }
    }
}

pub fn spectrum_cloud<S: Scalar>(u: &PowerSeries<S>, p: f64, grid: CloudGrid) -> Result<SpectrumCloud> {
    if grid.resolution.is_nan() || grid.resolution <= 0.0 {
        return Err(Error::Invalid(format!("cloud resolution must be positive, got {}", grid.resolution)));
    }
    let r = critical_radius(p)?.value;
    let n = u.len().saturating_sub(1);
    let mut points = Vec::new();
    for j in 0..grid.boundary_samples.max(8) {
        let z = Complex64::from_polar(r, 2.0 * PI * j as f64 / grid.boundary_samples.max(8) as f64);
        points.push((u.eval(z, n), CloudSource::Boundary));
    }
    let rings = (r / grid.resolution).ceil() as usize;
    points.push((u.eval(Complex64::new(0.0, 0.0), n), CloudSource::Interior));
    for i in 1..rings {
        let rho = r * i as f64 / rings as f64;
        let spokes = ((2.0 * PI * rho / grid.resolution).ceil() as usize).max(8);
        for j in 0..spokes {
            let z = Complex64::from_polar(rho, 2.0 * PI * j as f64 / spokes as f64);
            points.push((u.eval(z, n), CloudSource::Interior));
        }
    }
    Ok(SpectrumCloud { points, radius_used: r, p, tail_bound: u.tail_bound(r, u.len()) })
}

impl SpectrumCloud {
    /// CSV with columns `re,im,source`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im,source\n");
        for (z, s) in &self.points {
            out.push_str(&format!("{},{},{}\n", z.re, z.im, s.as_str()));
        }
        out
    }

    /// Largest distance from a target point to its nearest cloud point.
    pub fn coverage_gap(&self, targets: &[Complex64], cell: f64) -> f64 {
        let key = |z: Complex64| ((z.re / cell).floor() as i64, (z.im / cell).floor() as i64);
        let mut buckets: HashMap<(i64, i64), Vec<Complex64>> = HashMap::new();
        for (z, _) in &self.points {
            buckets.entry(key(*z)).or_default().push(*z);
        }
        let mut worst = 0.0f64;
        for t in targets {
            let (kx, ky) = key(*t);
            let mut best = f64::INFINITY;
            let mut ring = 0i64;
            // widen the search until a hit is provably the nearest
            loop {
                for dx in -ring..=ring {
                    for dy in -ring..=ring {
                        if dx.abs() != ring && dy.abs() != ring {
                            continue;
                        }
                        if let Some(b) = buckets.get(&(kx + dx, ky + dy)) {
                            for z in b {
                                best = best.min((z - t).norm());
                            }
                        }
                    }
                }
                if best <= ring as f64 * cell || ring > 1_000 {
                    break;
                }
                ring += 1;
            }
            worst = worst.max(best);
        }
        worst
    }
}

/// `σ_max(M_N^n)^{1/n}` for `n = 1..=n_max`, where `M_N` is the `N × N`
/// Toeplitz section at `R = 2^{-1/2}`.
pub fn spectral_radius_estimate<S: Scalar>(u: &PowerSeries<S>, n: usize, n_max: usize) -> Vec<(usize, f64)> {
    let b: Vec<Complex64> = u.scaled_at(FRAC_1_SQRT_2).into_iter().take(n).collect();
    let mut pw = b.clone();
    let mut out = Vec::with_capacity(n_max);
    let mut warm: Option<Vec<Complex64>> = None;
    for k in 1..=n_max {
        if k > 1 {
            pw = convolve_trunc(&pw, &b, n);
        }
        let (s, v) = toeplitz_section_norm(&pw, n, warm.as_deref(), 400);
        let (s2, v2) = toeplitz_section_norm(&pw, n, None, 400);
        let (s, v) = if s2 > s { (s2, v2) } else { (s, v) };
        out.push((k, s.powf(1.0 / k as f64)));
        warm = Some(v);
    }
    out
}

fn convolve_trunc(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n.min(a.len() + b.len() - 1)];
    for (i, x) in a.iter().enumerate() {
        if *x == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j >= out.len() {
                break;
            }
            out[i + j] += x * y;
        }
    }
    out
}

/// The four polynomial cases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseTag {
    A,
    B,
    C,
    D,
}

/// `p_0` as a real number or `+∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum P0 {
    Finite(f64),
    Infinite,
}

impl Serialize for P0 {
    fn serialize<Z: Serializer>(&self, s: Z) -> std::result::Result<Z::Ok, Z::Error> {
        match self {
            Self::Finite(v) => s.serialize_f64(*v),
            Self::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PVerdict {
    pub p: f64,
    pub is_basis: bool,
    pub is_equivalent: bool,
    pub evidence: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassificationReport {
    /// Smallest-modulus zero as `[re, im]`; absent for a nonzero constant.
    pub z0: Option<[f64; 2]>,
    pub z0_modulus: f64,
    pub p0: P0,
    pub case_tag: CaseTag,
    pub boundary_ambiguous: bool,
    pub per_p: Vec<PVerdict>,
}

/// Tolerance on `|z_0|` near a case boundary.
pub const CASE_BOUNDARY_TOL: f64 = 1e-9;

/// Default exponents for per-`p` reports.
pub const DEFAULT_P_GRID: [f64; 6] = [1.25, 1.5, 2.0, 3.0, 4.0, 8.0];

pub fn classify_polynomial<S: Scalar>(c: &Chaos1<S>, p_list: &[f64]) -> Result<ClassificationReport> {
    if !c.is_polynomial() {
        return Err(Error::Invalid("classification needs a polynomial symbol".into()));
    }
    for &p in p_list {
        critical_radius(p)?;
    }
    let coeffs: Vec<Complex64> = c.coeffs().iter().map(|v| v.to_c64()).collect();
    let roots = roots_min_modulus(&coeffs)?;
    let z0 = roots.min_modulus;
    let raw = z0.map_or(f64::INFINITY, |z| z.norm());
    let mut m = raw;
    let mut boundary_ambiguous = false;
    for edge in [0.5, FRAC_1_SQRT_2, 1.0] {
        if (raw - edge).abs() <= CASE_BOUNDARY_TOL {
            m = edge;
            boundary_ambiguous = true;
        }
    }
    let (case_tag, p0) = if m <= 0.5 {
        (CaseTag::A, if m > 0.0 { P0::Finite(-1.0 / m.log2()) } else { P0::Finite(0.0) })
    } else if m <= FRAC_1_SQRT_2 {
        (CaseTag::B, P0::Finite(if m == FRAC_1_SQRT_2 { 2.0 } else { -1.0 / m.log2() }))
    } else if m < 1.0 {
        (CaseTag::C, P0::Finite(-1.0 / m.log2()))
    } else {
        (CaseTag::D, P0::Infinite)
    };
    let per_p = p_list
        .iter()
        .map(|&p| {
            let mut evidence = Vec::new();
            if boundary_ambiguous {
                evidence.push("boundary-ambiguous".to_string());
            }
            let below = match p0 {
                P0::Infinite => Some(true),
                P0::Finite(q) if (p - q).abs() <= CASE_BOUNDARY_TOL * q.max(1.0) => None,
                P0::Finite(q) => Some(p < q),
            };
            let (is_basis, is_equivalent) = match (case_tag, below) {
                (CaseTag::A, _) => {
                    evidence.push("case a: no basis for any p".into());
                    (false, false)
                }
                (_, None) => {
                    evidence.push("endpoint p = p0: basis only for p < p0".into());
                    (false, false)
                }
                (CaseTag::B, Some(true)) => {
                    evidence.push("case b: basis for p < p0, not equivalent".into());
                    (true, false)
                }
                (CaseTag::C, Some(true)) => {
                    evidence.push("case c: basis for p < p0, equivalent".into());
                    (true, true)
                }
                (CaseTag::D, _) => {
                    evidence.push("case d: basis for every p, equivalent".into());
                    (true, true)
                }
                (_, Some(false)) => {
                    evidence.push("p > p0: no basis".into());
                    (false, false)
                }
            };
            PVerdict { p, is_basis, is_equivalent, evidence }
        })
        .collect();
    Ok(ClassificationReport {
        z0: z0.map(|z| [z.re, z.im]),
        z0_modulus: raw,
        p0,
        case_tag,
        boundary_ambiguous,
        per_p,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictLevel {
    CertifiedNegative,
    NumericNegative,
    NumericPositive,
    Inconclusive,
}

/// Whether `T_f` is an isomorphism of `L^p` (so the affine system is a basis
/// equivalent to the Haar system), with the evidence used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub p: f64,
    pub level: VerdictLevel,
    pub radius: f64,
    /// `min |f̂|` on the test circle.
    pub lower_modulus: Option<f64>,
    /// `max |f̂|` on the test circle.
    pub upper_modulus: Option<f64>,
    pub min_root_modulus: Option<f64>,
    /// Boundary max of the truncated `1/f̂` at `N` over that at `N/8`.
    pub inverse_growth_ratio: Option<f64>,
    pub multiplier: Option<NormReport>,
    pub inverse_multiplier: Option<NormReport>,
    pub evidence: Vec<String>,
}

/// Growth ratio above which `1/f̂` is flagged as unbounded on the test disk.
pub const INVERSE_GROWTH_THRESHOLD: f64 = 1.25;

fn boundary_min_max(b: &[Complex64], samples: usize) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for j in 0..samples {
        let z = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / samples as f64);
        let v = b.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c).norm();
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

pub fn theorem_verdict<S: Scalar>(u: &PowerSeries<S>, p: f64) -> Result<Verdict> {
    critical_radius(p)?;
    let radius = if p <= 2.0 { FRAC_1_SQRT_2 } else { (-1.0 / p).exp2() };
    let mut v = Verdict {
        p,
        level: VerdictLevel::Inconclusive,
        radius,
        lower_modulus: None,
        upper_modulus: None,
        min_root_modulus: None,
        inverse_growth_ratio: None,
        multiplier: None,
        inverse_multiplier: None,
        evidence: Vec::new(),
    };
    if u.is_empty() || u.coeffs()[0].is_zero() {
        v.level = VerdictLevel::CertifiedNegative;
        v.evidence.push("symbol vanishes at the origin".into());
        return Ok(v);
    }
    let b = u.scaled_at(radius);
    let (lo, hi) = boundary_min_max(&b, 4096);
    v.lower_modulus = Some(lo);
    v.upper_modulus = Some(hi);
    if *u.tail() == Tail::Zero {
        let coeffs: Vec<Complex64> = u.coeffs().iter().map(|c| c.to_c64()).collect();
        let unscaled: Vec<Complex64> =
            coeffs.iter().enumerate().map(|(k, c)| c * u.unit().powi(-(k as i32))).collect();
        let roots = roots_min_modulus(&unscaled)?;
        let m = roots.min_modulus.map_or(f64::INFINITY, |z| z.norm());
        v.min_root_modulus = roots.min_modulus.map(|z| z.norm());
        if (m - radius).abs() <= CASE_BOUNDARY_TOL {
            v.evidence.push(format!("zero of modulus {m} on the test circle within tolerance"));
            return Ok(v);
        }
        if m < radius {
            v.level = VerdictLevel::CertifiedNegative;
            v.evidence.push(format!("zero of modulus {m} inside the closed disk of radius {radius}"));
            return Ok(v);
        }
        v.evidence.push(format!("no zeros in the closed disk of radius {radius}; A = {lo}, B = {hi}"));
        if p > 2.0 {
            v.multiplier = Some(multiplier_norm(u, LpExponent::Finite(p), radius, 256)?);
            let inv = u.reciprocal(1023)?;
            v.inverse_multiplier = Some(multiplier_norm(&inv, LpExponent::Finite(p), radius, 256)?);
            v.evidence.push("multiplier intervals are evidential for p > 2".into());
        }
        v.level = VerdictLevel::NumericPositive;
        return Ok(v);
    }
    // series symbols: screen zeros through the boundary minimum and flag an
    // unbounded inverse through growth of its truncated boundary maximum
    let n = u.len().saturating_sub(1);
    if n < 16 {
        v.evidence.push("too few coefficients for a series verdict".into());
        return Ok(v);
    }
    let inv = u.reciprocal(n)?;
    let ib = inv.scaled_at(radius);
    let full = boundary_max(&ib, 4096).0;
    let short = boundary_max(&ib[..=n / 8], 4096).0;
    let ratio = full / short;
    v.inverse_growth_ratio = Some(ratio);
    if ratio > INVERSE_GROWTH_THRESHOLD {
        v.level = VerdictLevel::NumericNegative;
        v.evidence.push(format!("1/f unbounded on the disk (heuristic): truncated boundary max grows by {ratio} from N/8 to N"));
        return Ok(v);
    }
    if p > 2.0 {
        v.multiplier = Some(multiplier_norm(u, LpExponent::Finite(p), radius, n.min(512) + 1)?);
        v.inverse_multiplier = Some(multiplier_norm(&inv, LpExponent::Finite(p), radius, n.min(512) + 1)?);
    }
    if lo > 0.0 && hi.is_finite() {
        v.level = VerdictLevel::NumericPositive;
        v.evidence.push(format!("truncated boundary moduli in [{lo}, {hi}]; inverse growth ratio {ratio}"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use crate::symbol::{make_symbol, SymbolSpec};

    fn fpoly(c: &[f64]) -> PowerSeries<Complex64> {
        PowerSeries::polynomial(c.iter().map(|v| Complex64::new(*v, 0.0)).collect())
    }

    fn fchaos(c: &[f64]) -> Chaos1<Complex64> {
        Chaos1::polynomial(c.iter().map(|v| Complex64::new(*v, 0.0)).collect())
    }

    #[test]
    fn critical_radius_examples() {
        assert_eq!(critical_radius(2.0).unwrap().value, FRAC_1_SQRT_2);
        assert_eq!(critical_radius(4.0).unwrap().value, (-0.25f64).exp2());
        assert_eq!(critical_radius(1.5).unwrap().value, FRAC_1_SQRT_2);
        assert_eq!(critical_radius(2.0).unwrap().to_string(), "2^(-1/2)");
        assert!(critical_radius(1.0).is_err());
        let below = critical_radius(2.0 - 1e-12).unwrap().value;
        let above = critical_radius(2.0 + 1e-12).unwrap().value;
        assert!((below - above).abs() < 1e-12);
    }

    #[test]
    fn cloud_examples() {
        let one = spectrum_cloud(&fpoly(&[1.0]), 2.0, CloudGrid::default()).unwrap();
        assert!(one.points.iter().all(|(z, _)| (z - 1.0).norm() == 0.0));
        let a = 0.5;
        let c = spectrum_cloud(&fpoly(&[1.0, -a]), 2.0, CloudGrid { resolution: 0.05, boundary_samples: 256 }).unwrap();
        let r = a * FRAC_1_SQRT_2;
        assert!(c.points.iter().all(|(z, _)| (z - 1.0).norm() <= r + 1e-12));
        assert!(c.points.iter().filter(|(_, s)| *s == CloudSource::Boundary).all(|(z, _)| ((z - 1.0).norm() - r).abs() < 1e-12));
        let csv = c.to_csv();
        assert!(csv.starts_with("re,im,source\n"));
        assert!(csv.contains(",boundary\n") && csv.contains(",interior\n"));
    }

    #[test]
    fn cloud_grows_with_p() {
        let u = fpoly(&[1.0, -0.5, 0.25]);
        let g = CloudGrid { resolution: 0.02, boundary_samples: 512 };
        let c2 = spectrum_cloud(&u, 2.0, g).unwrap();
        let c4 = spectrum_cloud(&u, 4.0, g).unwrap();
        let c8 = spectrum_cloud(&u, 8.0, g).unwrap();
        let pts = |c: &SpectrumCloud| c.points.iter().map(|(z, _)| *z).collect::<Vec<_>>();
        assert!(c4.coverage_gap(&pts(&c2), 0.05) < 0.03);
        assert!(c8.coverage_gap(&pts(&c4), 0.05) < 0.03);
    }

    #[test]
    fn spectral_radius_small() {
        let est = spectral_radius_estimate(&fpoly(&[1.0]), 32, 4);
        assert!(est.iter().all(|(_, v)| (v - 1.0).abs() < 1e-12));
        let est = spectral_radius_estimate(&fpoly(&[0.0, 1.0]), 128, 3);
        assert!((est[0].1 - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn classify_examples() {
        let p = DEFAULT_P_GRID;
        let a = classify_polynomial(&fchaos(&[1.0, -2.0]), &p).unwrap();
        assert_eq!(a.case_tag, CaseTag::A);
        assert!(a.per_p.iter().all(|v| !v.is_basis && !v.is_equivalent));
        let c = classify_polynomial(&fchaos(&[1.0, -(1.0f64 / 3.0).exp2()]), &p).unwrap();
        assert_eq!(c.case_tag, CaseTag::C);
        assert!(matches!(c.p0, P0::Finite(q) if (q - 3.0).abs() < 1e-9));
        for v in &c.per_p {
            assert_eq!(v.is_basis, v.p < 3.0 - 1e-6, "p = {}", v.p);
            assert_eq!(v.is_equivalent, v.is_basis);
        }
        let d = classify_polynomial(&fchaos(&[1.0, -1.0]), &p).unwrap();
        assert_eq!(d.case_tag, CaseTag::D);
        assert_eq!(d.p0, P0::Infinite);
        assert!(d.per_p.iter().all(|v| v.is_basis && v.is_equivalent));
        assert!(classify_polynomial(&fchaos(&[0.0]), &p).is_err());
        assert!(classify_polynomial(&fchaos(&[1.0, 1.0]), &[1.0]).is_err());
        let json = serde_json::to_string(&d).unwrap();
        assert!(json.contains("\"case_tag\":\"d\"") && json.contains("\"p0\":\"inf\""));
    }

    #[test]
    fn classification_is_scale_invariant() {
        for c in [[1.0, -2.0], [1.0, -1.5], [1.0, -1.2], [2.0, 1.0], [1.0, 0.3]] {
            let a = classify_polynomial(&fchaos(&c), &DEFAULT_P_GRID).unwrap();
            let b = classify_polynomial(&fchaos(&[-7.5 * c[0], -7.5 * c[1]]), &DEFAULT_P_GRID).unwrap();
            assert_eq!(a.case_tag, b.case_tag);
            assert_eq!(a.per_p, b.per_p);
        }
    }

    #[test]
    fn verdict_examples() {
        let u = PowerSeries::polynomial(vec![Exact::from_i64(1), Exact::from_ratio(-1, 3)]);
        let v = theorem_verdict(&u, 2.0).unwrap();
        assert_eq!(v.level, VerdictLevel::NumericPositive);
        let s = 1.0 / (3.0 * 2f64.sqrt());
        assert!((v.lower_modulus.unwrap() - (1.0 - s)).abs() < 1e-12);
        assert!((v.upper_modulus.unwrap() - (1.0 + s)).abs() < 1e-12);
        for p in [1.5, 2.0, 4.0] {
            assert_eq!(theorem_verdict(&fpoly(&[0.0, 1.0]), p).unwrap().level, VerdictLevel::CertifiedNegative);
        }
        assert_eq!(theorem_verdict(&fpoly(&[1.0, -2.0]), 2.0).unwrap().level, VerdictLevel::CertifiedNegative);
        let v4 = theorem_verdict(&fpoly(&[1.0, -0.5]), 4.0).unwrap();
        assert_eq!(v4.level, VerdictLevel::NumericPositive);
        assert!(v4.inverse_multiplier.is_some());
    }

    #[test]
    fn binomial_verdict_is_negative() {
        let b = make_symbol::<Complex64>(&SymbolSpec::Binomial { theta: 0.25, p: 2.0 }, 2048).unwrap();
        let v = theorem_verdict(&b.series, 2.0).unwrap();
        assert_eq!(v.level, VerdictLevel::NumericNegative);
        assert!(v.inverse_growth_ratio.unwrap() > INVERSE_GROWTH_THRESHOLD);
        let g = make_symbol::<Complex64>(&SymbolSpec::Geometric { a: crate::symbol::NumText::Text("0.5".into()) }, 512).unwrap();
        assert_eq!(theorem_verdict(&g.series, 2.0).unwrap().level, VerdictLevel::NumericPositive);
    }

    #[test]
    fn verdict_coherent_with_classification() {
        for c in [[1.0, -0.5], [1.0, -0.9], [1.0, -1.3], [1.0, -1.6], [1.0, -2.5], [1.0, 0.2]] {
            let v = theorem_verdict(&fpoly(&c), 2.0).unwrap();
            let r = classify_polynomial(&fchaos(&c), &[2.0]).unwrap();
            if v.level == VerdictLevel::NumericPositive {
                let ok = r.case_tag == CaseTag::D || (r.case_tag == CaseTag::C && matches!(r.p0, P0::Finite(q) if q > 2.0));
                assert!(ok, "{c:?}");
            }
        }
    }
}
