//! The `haar` command line.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::chaos::{apply_tf, apply_tf_adjoint_step, dual_coeffs, reconstruct_in_chaoses, values_from_coeffs};
use crate::classify::{classify_polynomial, critical_radius, spectral_radius_estimate, spectrum_cloud, theorem_verdict, CloudGrid, DEFAULT_P_GRID};
use crate::error::{Error, Result};
use crate::sample::DEFAULT_SEED;
use crate::scalar::{Exact, Float, Scalar};
use crate::stepfn::{bmo_norm, fourier_haar, h1_norm, lp_norm, paley, sharp, DyadicStep, LpExponent, SharpFunction};
use crate::symbol::{ap_norm, hinf_boundary, make_symbol, multiplier_norm, Symbol, SymbolSpec, DEFAULT_SERIES_TERMS};
use crate::verify::{run_suite, Suite, SuiteReport, VerifyConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum NormKind {
    Lp,
    Bmo,
    H1,
    Sharp,
    Paley,
}

#[derive(Debug, Parser)]
#[command(name = "haar", version, about = "Haar multishift calculus: chaos symbols, affine systems and basis tests")]
pub struct Cli {
    #[arg(long, global = true, value_enum, default_value = "exact")]
    pub mode: Mode,
    /// Truncation depth of the symbol (number of coefficients used).
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Series / section size N.
    #[arg(long, global = true)]
    pub trunc: Option<usize>,
    /// Sample count for randomized suites.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Comma-separated exponents; `inf` allowed where meaningful.
    #[arg(long, global = true, value_delimiter = ',')]
    pub p: Vec<String>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Symbol JSON, e.g. {"kind":"polynomial","coeffs":["1","-1/2"]}.
    #[arg(long, global = true, conflicts_with = "symbol_file")]
    pub symbol: Option<String>,
    #[arg(long, global = true)]
    pub symbol_file: Option<PathBuf>,
    /// Step-function JSON {"level": m, "values": [...]}.
    #[arg(long, global = true, conflicts_with = "step_file")]
    pub step: Option<String>,
    #[arg(long, global = true)]
    pub step_file: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Table of k, c_k and f(1/2^k).
    Expand {
        #[arg(long, default_value_t = 8)]
        k: usize,
    },
    /// Dual coefficients d_0..=d_k.
    Dual {
        #[arg(long, default_value_t = 8)]
        k: usize,
    },
    /// Run a verification suite; exits nonzero on failure.
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        #[arg(long)]
        levels: Option<usize>,
        /// `n` of the special function x0 (h1-identity).
        #[arg(long)]
        n: Option<usize>,
        /// Cap on |α| in x0 (h1-identity).
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        degree: Option<usize>,
    },
    /// Norms of a step function.
    Norm {
        #[arg(long, value_enum, default_value = "lp")]
        kind: NormKind,
    },
    /// Multiplier and boundary norms of a symbol at the critical radius.
    Opnorm,
    /// Spectrum cloud CSV, or spectral radius estimates.
    Spectrum {
        #[arg(long, default_value_t = 0.01)]
        resolution: f64,
        #[arg(long, default_value_t = 2048)]
        boundary_samples: usize,
        /// Report σ_max(M_N^n)^{1/n} for n = 1..=this instead of a cloud.
        #[arg(long)]
        radius_estimate: Option<usize>,
    },
    /// Basis classification and per-p verdicts.
    Classify,
    /// Apply T_f (or its adjoint) to a step function.
    Apply {
        #[arg(long)]
        adjoint: bool,
    },
    /// Partial sums of the expansion in the affine system.
    Reconstruct {
        #[arg(long = "n-max", value_delimiter = ',', default_values_t = [16u64, 64, 256, 1024])]
        n_max: Vec<u64>,
    },
    /// Run every verification suite with defaults.
    Selftest,
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Flags shared by every command.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub depth: Option<usize>,
    pub trunc: Option<usize>,
    pub samples: Option<usize>,
    pub p_list: Vec<LpExponent>,
    pub seed: u64,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<Self> {
        let p_list = cli.p.iter().map(|s| s.parse::<LpExponent>()).collect::<Result<Vec<_>>>()?;
        Ok(Self { mode: cli.mode, depth: cli.depth, trunc: cli.trunc, samples: cli.samples, p_list, seed: cli.seed, out: cli.out.clone() })
    }

    fn finite_p(&self, default: &[f64]) -> Result<Vec<f64>> {
        if self.p_list.is_empty() {
            return Ok(default.to_vec());
        }
        self.p_list
            .iter()
            .map(|p| match p {
                LpExponent::Finite(v) => Ok(*v),
                LpExponent::Infinity => Err(Error::Invalid("p = inf is not allowed for this command".into())),
            })
            .collect()
    }
}

/// Result of one invocation: the text to emit and whether checks passed.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub success: bool,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Self { output, success: true }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I) -> Result<Outcome>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| Error::Parse(e.to_string()))?;
    run(&cli)
}

/// Runs a parsed command. With `--out` the output is written to that file
/// and the returned text is empty.
pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = RunConfig::from_cli(cli)?;
    let mut outcome = match cfg.mode {
        Mode::Exact => dispatch::<Exact>(cli, &cfg)?,
        Mode::Float => dispatch::<Float>(cli, &cfg)?,
    };
    if let Some(path) = &cfg.out {
        fs::write(path, &outcome.output).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))?;
        outcome.output.clear();
    }
    Ok(outcome)
}

fn read_input(inline: &Option<String>, file: &Option<PathBuf>, what: &str) -> Result<String> {
    match (inline, file) {
        (Some(s), None) => Ok(s.clone()),
        (None, Some(path)) => fs::read_to_string(path).map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display()))),
        (Some(_), Some(_)) => Err(Error::Invalid(format!("give --{what} or --{what}-file, not both"))),
        (None, None) => Err(Error::Invalid(format!("missing --{what} or --{what}-file"))),
    }
}

fn load_symbol<S: Scalar>(cli: &Cli, cfg: &RunConfig) -> Result<Symbol<S>> {
    let spec = SymbolSpec::parse(&read_input(&cli.symbol, &cli.symbol_file, "symbol")?)?;
    make_symbol(&spec, cfg.trunc.unwrap_or(DEFAULT_SERIES_TERMS))
}

fn load_symbol_opt<S: Scalar>(cli: &Cli, cfg: &RunConfig) -> Result<Option<Symbol<S>>> {
    if cli.symbol.is_none() && cli.symbol_file.is_none() {
        return Ok(None);
    }
    load_symbol(cli, cfg).map(Some)
}

fn load_step<S: Scalar>(cli: &Cli) -> Result<DyadicStep<S>> {
    DyadicStep::from_json(&read_input(&cli.step, &cli.step_file, "step")?)
}

fn to_json(v: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

fn dispatch<S: Scalar>(cli: &Cli, cfg: &RunConfig) -> Result<Outcome> {
    match &cli.command {
        Command::Expand { k } => {
            let sym = load_symbol::<S>(cli, cfg)?;
            let values = values_from_coeffs(&sym.chaos, *k)?;
            let coeffs = sym.chaos.first(*k + 1)?;
            let mut out = String::from("k,c_k,value\n");
            for (i, (c, v)) in coeffs.iter().zip(&values).enumerate() {
                out.push_str(&format!("{i},{},{}\n", c.render(), v.render()));
            }
            Ok(Outcome::ok(out))
        }
        Command::Dual { k } => {
            let sym = load_symbol::<S>(cli, cfg)?;
            let d = dual_coeffs(&sym.chaos, *k)?;
            let mut out = String::from("k,d_k\n");
            for (i, v) in d.coeffs().iter().enumerate() {
                out.push_str(&format!("{i},{}\n", v.render()));
            }
            Ok(Outcome::ok(out))
        }
        Command::Verify { suite, levels, n, cap, tol, degree } => {
            let sym = load_symbol_opt::<S>(cli, cfg)?;
            let defaults = VerifyConfig::default();
            let vc = VerifyConfig {
                levels: levels.or(cfg.depth).unwrap_or(defaults.levels),
                samples: cfg.samples.unwrap_or(defaults.samples),
                seed: cfg.seed,
                n: n.unwrap_or(defaults.n),
                cap: *cap,
                tolerance: tol.unwrap_or(defaults.tolerance),
                degree: degree.unwrap_or(defaults.degree),
            };
            let r = run_suite(*suite, sym.as_ref().map(|s| &s.chaos), &vc)?;
            Ok(Outcome { success: r.passed, output: to_json(&r) })
        }
        Command::Selftest => {
            let defaults = VerifyConfig::default();
            let vc = VerifyConfig { levels: 5, samples: cfg.samples.unwrap_or(20), seed: cfg.seed, ..defaults };
            let reports: Vec<SuiteReport> = Suite::ALL.iter().map(|s| run_suite::<S>(*s, None, &vc)).collect::<Result<_>>()?;
            let success = reports.iter().all(|r| r.passed);
            let summary: Vec<_> = reports.iter().map(|r| json!({"suite": r.suite, "passed": r.passed, "checks": r.checks.len()})).collect();
            Ok(Outcome { success, output: to_json(&json!({"passed": success, "suites": summary, "reports": reports})) })
        }
        Command::Norm { kind } => {
            let x = load_step::<S>(cli)?;
            let out = match kind {
                NormKind::Lp => {
                    let ps = if cfg.p_list.is_empty() { vec![LpExponent::Finite(2.0)] } else { cfg.p_list.clone() };
                    let reports = ps
                        .iter()
                        .map(|p| {
                            if S::EXACT && matches!(p, LpExponent::Finite(v) if !(v.fract() == 0.0 && (*v as i64) % 2 == 0)) {
                                return Err(Error::FloatOnly(format!("L^{p} norm has no exact form; use --mode float")));
                            }
                            lp_norm(&x, *p)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    to_json(&reports)
                }
                NormKind::Bmo => to_json(&bmo_norm(&x)?),
                NormKind::H1 => to_json(&h1_norm(&x)?),
                NormKind::Sharp => squared_json(&sharp(&x)?),
                NormKind::Paley => squared_json(&paley(&x)?),
            };
            Ok(Outcome::ok(out))
        }
        Command::Opnorm => {
            let sym = load_symbol::<S>(cli, cfg)?;
            let n = cfg.trunc.unwrap_or(512);
            let p = cfg.finite_p(&[2.0])?[0];
            let r = critical_radius(p)?;
            let lp = LpExponent::new(p)?;
            let report = json!({
                "p": p,
                "radius": r.value,
                "radius_expr": r.to_string(),
                "multiplier": multiplier_norm(&sym.series, lp, r.value, n)?,
                "hinf_boundary": hinf_boundary(&sym.series, r.value, 4096, n)?,
                "ap_norm": ap_norm(&sym.series, lp, r.value, n)?,
                "warnings": sym.warnings,
            });
            Ok(Outcome::ok(to_json(&report)))
        }
        Command::Spectrum { resolution, boundary_samples, radius_estimate } => {
            let sym = load_symbol::<S>(cli, cfg)?;
            let p = cfg.finite_p(&[2.0])?[0];
            if let Some(n_max) = radius_estimate {
                let n = cfg.trunc.unwrap_or(256);
                let est = spectral_radius_estimate(&sym.series, n, *n_max);
                let rows: Vec<_> = est.iter().map(|(k, v)| json!({"n": k, "estimate": v})).collect();
                return Ok(Outcome::ok(to_json(&json!({"section": n, "estimates": rows}))));
            }
            let cloud = spectrum_cloud(&sym.series, p, CloudGrid { resolution: *resolution, boundary_samples: *boundary_samples })?;
            Ok(Outcome::ok(cloud.to_csv()))
        }
        Command::Classify => {
            let sym = load_symbol::<S>(cli, cfg)?;
            let ps = cfg.finite_p(&DEFAULT_P_GRID)?;
            let classification = if sym.chaos.is_polynomial() { Some(classify_polynomial(&sym.chaos, &ps)?) } else { None };
            let verdicts = ps.iter().map(|p| theorem_verdict(&sym.series, *p)).collect::<Result<Vec<_>>>()?;
            Ok(Outcome::ok(to_json(&json!({"classification": classification, "verdicts": verdicts, "warnings": sym.warnings}))))
        }
        Command::Apply { adjoint } => {
            let sym = load_symbol::<S>(cli, cfg)?;
            let x = load_step::<S>(cli)?;
            let depth = cfg.depth.unwrap_or_else(|| if sym.chaos.is_polynomial() { sym.chaos.coeffs().len() } else { 8 });
            let y = if *adjoint {
                apply_tf_adjoint_step(&sym.chaos, &x, depth)?
            } else {
                apply_tf(&sym.chaos, &fourier_haar(&x)?, depth as u32)?
            };
            Ok(Outcome::ok(format!("{}\n", y.to_json())))
        }
        Command::Reconstruct { n_max } => {
            let sym = load_symbol::<S>(cli, cfg)?;
            let x = load_step::<S>(cli)?;
            let depth = cfg.depth.unwrap_or(40);
            let ps = if cfg.p_list.is_empty() { vec![LpExponent::Finite(2.0)] } else { cfg.p_list.clone() };
            let reports = n_max
                .iter()
                .map(|n| reconstruct_in_chaoses(&sym.chaos, &x, *n, depth, &ps).map(|r| r.1))
                .collect::<Result<Vec<_>>>()?;
            Ok(Outcome::ok(to_json(&reports)))
        }
    }
}

fn squared_json<R: crate::scalar::Real>(s: &SharpFunction<R>) -> String {
    to_json(&json!({
        "level": s.level(),
        "squared": s.squared().iter().map(|v| v.render()).collect::<Vec<_>>(),
        "max": s.max_squared().to_f64().sqrt(),
        "max_squared": s.max_squared().render(),
    }))
}
