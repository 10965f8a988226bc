//! Self-verification suites: each runs a family of identities and records
//! one check per identity.

use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use serde::Serialize;
use serde_json::{json, Value};

use crate::chaos::{
    apply_tf_coeffs, dual_coeffs, pair_with_g, truncate_to_step, walsh_affine_coeffs, x0_cap_for_defect,
    x0_construct, Chaos1, ChaosD,
};
use crate::dyadic::MultiIndex;
use crate::error::{Error, Result};
use crate::sample;
use crate::scalar::{approx_eq, Real, Scalar};
use crate::stepfn::{fourier_haar, l2_norm_sqr, HaarCoeffMap};
use crate::symbol::{check_value_relation, MultiSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Biorthogonal,
    H1Identity,
    ValueRelation,
    Walsh,
    Parseval,
    Commutation,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Self::Biorthogonal, Self::H1Identity, Self::ValueRelation, Self::Walsh, Self::Parseval, Self::Commutation];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Biorthogonal => "biorthogonal",
            Self::H1Identity => "h1-identity",
            Self::ValueRelation => "value-relation",
            Self::Walsh => "walsh",
            Self::Parseval => "parseval",
            Self::Commutation => "commutation",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: Value,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub mode: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Largest multi-index length for biorthogonal and Walsh checks.
    pub levels: usize,
    pub samples: usize,
    pub seed: u64,
    /// `n` of the special function `x_0`.
    pub n: usize,
    /// Cap on `|α|` in `x_0`; chosen from `tolerance` when absent.
    pub cap: Option<usize>,
    pub tolerance: f64,
    /// Degree through which coefficient identities are checked.
    pub degree: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { levels: 6, samples: 50, seed: sample::DEFAULT_SEED, n: 1, cap: None, tolerance: 1e-6, degree: 64 }
    }
}

fn mode<S: Scalar>() -> &'static str {
    if S::EXACT {
        "exact"
    } else {
        "float"
    }
}

fn same<S: Scalar>(a: &S, b: &S) -> bool {
    approx_eq(a, b, crate::scalar::FLOAT_TOLERANCE)
}

/// Runs a suite. `symbol` replaces the suite's default or random symbols where it applies.
pub fn run_suite<S: Scalar>(suite: Suite, symbol: Option<&Chaos1<S>>, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Biorthogonal => biorthogonal(symbol, cfg)?,
        Suite::H1Identity => h1_identity(symbol, cfg)?,
        Suite::ValueRelation => value_relation(symbol, cfg)?,
        Suite::Walsh => walsh(symbol, cfg)?,
        Suite::Parseval => parseval(symbol, cfg)?,
        Suite::Commutation => commutation(symbol, cfg)?,
    };
    Ok(SuiteReport { suite, mode: mode::<S>(), passed: checks.iter().all(|c| c.passed), checks })
}

fn default_or<S: Scalar>(symbol: Option<&Chaos1<S>>, num: i64, den: i64) -> Chaos1<S> {
    symbol.cloned().unwrap_or_else(|| Chaos1::polynomial(vec![S::one(), S::from_ratio(num, den)]))
}

fn random_symbols<S: Scalar>(symbol: Option<&Chaos1<S>>, cfg: &VerifyConfig, max_deg: usize) -> Vec<Chaos1<S>> {
    match symbol {
        Some(c) => vec![c.clone()],
        None => {
            let mut rng = sample::rng(cfg.seed);
            (0..cfg.samples).map(|_| sample::polynomial(&mut rng, max_deg, true)).collect()
        }
    }
}

/// `(f_β, g^α) = δ_{αβ}` for all `|α|, |β| ≤ levels`.
fn biorthogonal<S: Scalar>(symbol: Option<&Chaos1<S>>, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let c = default_or(symbol, -1, 3);
    let l = cfg.levels;
    let dual = dual_coeffs(&c, l)?;
    let all = MultiIndex::all_up_to(l)?;
    let mut failures = Vec::new();
    for beta in &all {
        let unit: HaarCoeffMap<S> = [(*beta, S::one())].into_iter().collect();
        let f = apply_tf_coeffs(&c, &unit, l + 1 - beta.len())?;
        for alpha in &all {
            let v = pair_with_g(&f, alpha, &dual)?;
            let want = if alpha == beta { S::one() } else { S::zero() };
            if !same(&v, &want) {
                failures.push(json!({"alpha": alpha.to_string(), "beta": beta.to_string(), "value": v.render()}));
            }
        }
    }
    Ok(vec![Check {
        name: format!("(f_beta, g^alpha) = delta for |alpha|, |beta| <= {l}"),
        passed: failures.is_empty(),
        detail: json!({"pairs": all.len() * all.len(), "failures": failures.into_iter().take(10).collect::<Vec<_>>()}),
    }])
}

/// `‖T_f* x_0‖² → Σ_{j ≤ n} |c_j|² 2^{-j}` with disjoint `x_0` terms.
fn h1_identity<S: Scalar>(symbol: Option<&Chaos1<S>>, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let c = default_or(symbol, -1, 2);
    let cap = match cfg.cap {
        Some(v) => v,
        None => x0_cap_for_defect(cfg.n, &c, cfg.tolerance)?,
    };
    let x0 = x0_construct::<S>(cfg.n, cap)?;
    let energy = x0.adjoint_energy(&c)?;
    let limit = x0.energy_limit(&c)?;
    let defect = x0.defect_bound(&c)?;
    let gap = limit.to_f64() - energy.to_f64();
    Ok(vec![
        Check {
            name: "x0 terms pairwise disjoint".into(),
            passed: x0.supports_disjoint(),
            detail: json!({"terms": x0.terms.len(), "n": cfg.n, "cap": cap}),
        },
        Check {
            name: "energy within defect bound of the limit".into(),
            passed: gap >= -crate::scalar::FLOAT_TOLERANCE && gap <= defect + crate::scalar::FLOAT_TOLERANCE,
            detail: json!({"energy": energy.render(), "limit": limit.render(), "defect_bound": defect}),
        },
        Check {
            name: format!("energy within {} of the limit", cfg.tolerance),
            passed: gap.abs() <= cfg.tolerance,
            detail: json!({"energy": energy.to_f64(), "limit": limit.to_f64(), "gap": gap}),
        },
    ])
}

/// `(1 − z) ǧ = (2z − 1) f̂` coefficientwise.
fn value_relation<S: Scalar>(symbol: Option<&Chaos1<S>>, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    random_symbols(symbol, cfg, 8)
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let r = check_value_relation(c, cfg.degree)?;
            Ok(Check {
                name: format!("symbol {i}: value relation through degree {}", cfg.degree),
                passed: r.holds,
                detail: json!({"coeffs": c.coeffs().iter().map(|v| v.render()).collect::<Vec<_>>(), "first_failure": r.first_failure}),
            })
        })
        .collect()
}

/// `(W^α f, W^β f) = δ_{αβ} ‖f‖²` for `|α| = |β| ≤ levels`.
fn walsh<S: Scalar>(symbol: Option<&Chaos1<S>>, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let c = symbol.cloned().unwrap_or_else(|| Chaos1::polynomial(vec![S::one()]));
    let depth = c.stored().max(1);
    let norm = S::from_real(l2_norm_sqr(&truncate_to_step(&c, depth as u32)?));
    let mut out = Vec::new();
    for k in 0..=cfg.levels {
        let all = MultiIndex::all_of_length(k)?;
        let w: Vec<HaarCoeffMap<S>> = all.iter().map(|a| walsh_affine_coeffs(a, &c, depth)).collect::<Result<_>>()?;
        let mut bad = 0usize;
        for (i, wa) in w.iter().enumerate() {
            for (j, wb) in w.iter().enumerate() {
                let want = if i == j { norm.clone() } else { S::zero() };
                if !same(&wa.inner(wb), &want) {
                    bad += 1;
                }
            }
        }
        out.push(Check {
            name: format!("Walsh orthogonality at length {k}"),
            passed: bad == 0,
            detail: json!({"pairs": w.len() * w.len(), "failures": bad, "norm_sqr": norm.render()}),
        });
    }
    Ok(out)
}

/// `‖truncate(f, m)‖² = Σ_{k<m} |c_k|² 2^{-k}` and Parseval for random steps.
fn parseval<S: Scalar>(symbol: Option<&Chaos1<S>>, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (i, c) in random_symbols(symbol, cfg, 12).iter().enumerate() {
        let mut bad = Vec::new();
        for m in 1..=12usize {
            let lhs = l2_norm_sqr(&truncate_to_step(c, m as u32)?);
            let rhs = c
                .first(m)?
                .iter()
                .enumerate()
                .fold(S::Real::zero(), |a, (k, v)| a + v.norm_sqr_real() * S::Real::pow2(-(k as i32)));
            if !same(&S::from_real(lhs), &S::from_real(rhs)) {
                bad.push(m);
            }
        }
        out.push(Check { name: format!("symbol {i}: truncation energy for m <= 12"), passed: bad.is_empty(), detail: json!({"failed_m": bad}) });
    }
    let mut rng = sample::rng(cfg.seed ^ 1);
    let mut bad = 0usize;
    for _ in 0..cfg.samples {
        let x = sample::step::<S>(&mut rng, 5, true, true)?;
        if !same(&S::from_real(l2_norm_sqr(&x)), &S::from_real(fourier_haar(&x)?.l2_norm_sqr())) {
            bad += 1;
        }
    }
    out.push(Check { name: "Parseval on random mean-zero steps".into(), passed: bad == 0, detail: json!({"samples": cfg.samples, "failures": bad}) });
    Ok(out)
}

/// `T_f V_b x = V_b T_f x` and the symbol identity `(T_f x)^ = x̂ · f̂(z_d)`.
fn commutation<S: Scalar>(symbol: Option<&Chaos1<S>>, cfg: &VerifyConfig) -> Result<Vec<Check>> {
    let mut rng = sample::rng(cfg.seed ^ 2);
    let fixed = symbol.filter(|c| c.is_polynomial()).cloned();
    let (mut comm_bad, mut sym_bad) = (0usize, 0usize);
    for i in 0..cfg.samples {
        let c = fixed.clone().unwrap_or_else(|| sample::polynomial(&mut rng, 4, true));
        let depth = c.coeffs().len();
        let x = sample::haar_polynomial::<S>(&mut rng, 5, 6, true)?;
        let tx = apply_tf_coeffs(&c, &x, depth)?;
        for b in [0u8, 1] {
            if apply_tf_coeffs(&c, &x.dilate(b)?, depth)? != tx.dilate(b)? {
                comm_bad += 1;
            }
        }
        let d = 1 + i % 3;
        let xd = sample::chaos_d::<S>(&mut rng, d, 4, 5, true)?;
        let y = apply_tf_coeffs(&c, &xd.to_haar(), depth)?;
        let parts = ChaosD::split(&y);
        let lhs = match parts.as_slice() {
            [] => MultiSeries { vars: d, coeffs: Default::default() },
            [one] if one.order() == d => MultiSeries::from_chaos(one),
            _ => {
                sym_bad += 1;
                continue;
            }
        };
        if lhs != MultiSeries::from_chaos(&xd).mul_last(c.coeffs()) {
            sym_bad += 1;
        }
    }
    Ok(vec![
        Check { name: "T_f commutes with V_0, V_1".into(), passed: comm_bad == 0, detail: json!({"samples": cfg.samples, "failures": comm_bad}) },
        Check { name: "symbol of T_f x is x^ times f^(z_d)".into(), passed: sym_bad == 0, detail: json!({"samples": cfg.samples, "failures": sym_bad}) },
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Exact, Float};
    use num_traits::One;

    fn small() -> VerifyConfig {
        VerifyConfig { levels: 3, samples: 5, degree: 16, ..Default::default() }
    }

    #[test]
    fn all_suites_pass_exact() {
        for s in Suite::ALL {
            let r = run_suite::<Exact>(s, None, &small()).unwrap();
            assert!(r.passed, "{s}: {:?}", r.checks);
        }
    }

    #[test]
    fn all_suites_pass_float() {
        for s in Suite::ALL {
            let r = run_suite::<Float>(s, None, &small()).unwrap();
            assert!(r.passed, "{s}: {:?}", r.checks);
        }
    }

    #[test]
    fn biorthogonality_fails_for_wrong_dual() {
        // the pairing uses the dual of the supplied symbol, so break it by
        // pairing f_β of one symbol against g^α of another
        let c = Chaos1::polynomial(vec![Exact::one(), Exact::from_ratio(-1, 2)]);
        let other = Chaos1::polynomial(vec![Exact::one(), Exact::from_ratio(1, 5)]);
        let dual = dual_coeffs(&other, 3).unwrap();
        let unit: HaarCoeffMap<Exact> = [(MultiIndex::empty(), Exact::one())].into_iter().collect();
        let f = apply_tf_coeffs(&c, &unit, 4).unwrap();
        let a = MultiIndex::from_bits(&[0]).unwrap();
        assert_ne!(pair_with_g(&f, &a, &dual).unwrap(), Exact::zero());
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn h1_identity_cap_40() {
        let cfg = VerifyConfig { cap: Some(40), ..Default::default() };
        let r = run_suite::<Exact>(Suite::H1Identity, None, &cfg).unwrap();
        assert!(r.passed, "{:?}", r.checks);
    }
}
