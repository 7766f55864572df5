//! The command-line surface as a library: each subcommand is a function from
//! options to a printable result, so the binary is only argument parsing.

use std::fmt::Write as _;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::blackbox::{blackbox_sps_test, lowdeg_bw_test, BlackboxError, Outcome, TestConfig, Witness};
use crate::circuit::{
    classify_plus_regular, classify_sps, parse, parse_over, serialize, Circuit, ParseError,
};
use crate::field::{FieldError, PrimeField};
use crate::gen::{generate, GenConfig, GroundTruth};
use crate::oracle::{expand, Budget, OracleError};
use crate::pistar::PistarConfig;
use crate::regular::{pit_plus_regular, RegularConfig};
use crate::slp::WordComparer;

/// Largest matrix dimension the low-degree test will use.
pub const MAX_LOWDEG_DIM: usize = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("invalid field: {0}")]
    Field(#[from] FieldError),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("no applicable algorithm: {0}")]
    NoAlgorithm(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Field(_) | CliError::Io { .. } => 2,
            CliError::NoAlgorithm(_) | CliError::Budget(_) => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Auto,
    PlusRegular,
    Sps,
    Lowdeg,
    Oracle,
}

#[derive(Debug, Clone)]
pub struct CheckOptions {
    pub mode: Mode,
    /// Overrides the file's `field` header.
    pub prime: Option<u64>,
    pub seed: u64,
    /// Trials per randomized test; derived from `error` when absent.
    pub trials: Option<usize>,
    /// Target error for randomized tests.
    pub error: Option<f64>,
    pub c_const: u64,
    pub max_expand: usize,
    pub max_degree: u64,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Auto,
            prime: None,
            seed: 0,
            trials: None,
            error: None,
            c_const: PistarConfig::default().c_const,
            max_expand: Budget::default().max_terms,
            max_degree: Budget::default().max_degree,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResultKind {
    Zero,
    Nonzero,
    ProbablyZero,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub class: String,
    pub algorithm: String,
    pub result: ResultKind,
    /// Error bound of a probabilistic answer.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    /// For the white-box test: false when independence was decided by
    /// fingerprints rather than full word comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
    pub timing_ms: f64,
    pub seed: u64,
}

impl Verdict {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdicts serialize")
    }
}

pub fn read_file(path: &str) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_string(),
        message: e.to_string(),
    })
}

pub fn load(text: &str, prime: Option<u64>) -> Result<Circuit, CliError> {
    Ok(match prime {
        Some(p) => parse_over(text, PrimeField::new(p)?)?,
        None => parse(text)?,
    })
}

fn trials_for(opts: &CheckOptions, per_trial: f64) -> usize {
    match (opts.trials, opts.error) {
        (Some(t), _) => t,
        (None, Some(eps)) if per_trial > 0.0 && per_trial < 1.0 && eps > 0.0 => {
            (eps.ln() / per_trial.ln()).ceil().max(1.0) as usize
        }
        _ => 10,
    }
}

fn from_outcome(class: &str, algorithm: &str, out: Outcome, seed: u64) -> Verdict {
    let (result, epsilon, witness) = match out {
        Outcome::NonZero { witness } => (ResultKind::Nonzero, None, Some(witness)),
        Outcome::ProbablyZero { epsilon } => (ResultKind::ProbablyZero, Some(epsilon), None),
    };
    Verdict {
        class: class.into(),
        algorithm: algorithm.into(),
        result,
        epsilon,
        witness,
        exact: None,
        timing_ms: 0.0,
        seed,
    }
}

fn exact_verdict(class: &str, algorithm: &str, zero: bool, seed: u64) -> Verdict {
    Verdict {
        class: class.into(),
        algorithm: algorithm.into(),
        result: if zero { ResultKind::Zero } else { ResultKind::Nonzero },
        epsilon: None,
        witness: None,
        exact: None,
        timing_ms: 0.0,
        seed,
    }
}

/// Why one algorithm did not apply.
type Attempt = Result<Verdict, String>;

fn try_plus_regular(c: &Circuit, opts: &CheckOptions) -> Attempt {
    let layering = classify_plus_regular(c).map_err(|r| format!("plus-regular: {r}"))?;
    let cfg = RegularConfig {
        pistar: PistarConfig {
            c_const: opts.c_const,
            comparer: WordComparer::default(),
            fingerprint_seed: Some(opts.seed),
            ..PistarConfig::default()
        },
    };
    match pit_plus_regular(c, &cfg) {
        Ok(r) => {
            let mut v = exact_verdict(
                &format!("plus-regular ({} layers)", layering.num_layers()),
                "plus-regular",
                r.is_zero,
                opts.seed,
            );
            v.exact = Some(r.exact);
            if !r.exact {
                v.epsilon = Some(WordComparer::default().epsilon());
            }
            Ok(v)
        }
        Err(e) => Err(format!("plus-regular: {e}")),
    }
}

fn try_sps(c: &Circuit, opts: &CheckOptions) -> Attempt {
    let view = classify_sps(c).map_err(|r| format!("sps: {r}"))?;
    let s = view.fan_in().max(1);
    let d = view.max_degree();
    let p = c.field().modulus() as f64;
    let per_trial = d.to_f64().map_or(1.0, |d| 2.0 * d / p);
    let cfg = TestConfig {
        trials: trials_for(opts, per_trial),
        seed: opts.seed,
    };
    let class = format!("sps (s={s}, D={d})");
    match blackbox_sps_test(c, s, &d, &cfg) {
        Ok(out) => Ok(from_outcome(&class, "sps-blackbox", out, opts.seed)),
        Err(e) => Err(format!("sps: {e}")),
    }
}

fn try_lowdeg(c: &Circuit, opts: &CheckOptions) -> Attempt {
    let d = c.degree();
    let dim = ((&d + 2u32) / 2u32).to_usize().filter(|&k| k <= MAX_LOWDEG_DIM);
    let Some(dim) = dim else {
        return Err(format!("lowdeg: degree {d} needs matrices larger than {MAX_LOWDEG_DIM}x{MAX_LOWDEG_DIM}"));
    };
    let dim = dim.max(1);
    let per_trial = (2 * dim - 1) as f64 / c.field().modulus() as f64;
    let cfg = TestConfig {
        trials: trials_for(opts, per_trial),
        seed: opts.seed,
    };
    match lowdeg_bw_test(c, dim, &cfg) {
        Ok(out) => Ok(from_outcome(&format!("general (degree {d})"), "lowdeg", out, opts.seed)),
        Err(BlackboxError::FieldTooSmall { p, needed }) => {
            Err(format!("lowdeg: field F_{p} too small, need p > {needed}"))
        }
        Err(e) => Err(format!("lowdeg: {e}")),
    }
}

fn try_oracle(c: &Circuit, opts: &CheckOptions) -> Attempt {
    let budget = Budget {
        max_terms: opts.max_expand,
        max_degree: opts.max_degree,
    };
    match expand(c, budget) {
        Ok(f) => Ok(exact_verdict(
            &format!("general (degree {})", c.degree()),
            "oracle",
            f.is_zero(),
            opts.seed,
        )),
        Err(e) => Err(format!("oracle: {e}")),
    }
}

/// Decides whether the circuit in `text` is zero.
pub fn check(text: &str, opts: &CheckOptions) -> Result<Verdict, CliError> {
    let c = load(text, opts.prime)?;
    check_circuit(&c, opts)
}

pub fn check_circuit(c: &Circuit, opts: &CheckOptions) -> Result<Verdict, CliError> {
    let start = Instant::now();
    let attempt = match opts.mode {
        Mode::PlusRegular => try_plus_regular(c, opts),
        Mode::Sps => try_sps(c, opts),
        Mode::Lowdeg => try_lowdeg(c, opts),
        Mode::Oracle => try_oracle(c, opts),
        Mode::Auto => {
            let mut reasons = Vec::new();
            let mut found = None;
            for f in [try_plus_regular, try_sps, try_lowdeg, try_oracle] {
                match f(c, opts) {
                    Ok(v) => {
                        found = Some(v);
                        break;
                    }
                    Err(why) => reasons.push(why),
                }
            }
            found.ok_or_else(|| reasons.join("; "))
        }
    };
    match attempt {
        Ok(mut v) => {
            v.timing_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(v)
        }
        Err(why) if opts.mode == Mode::Oracle => Err(CliError::Budget(why)),
        Err(why) => Err(CliError::NoAlgorithm(why)),
    }
}

/// What the classifiers say about a circuit.
#[derive(Debug, Clone, Serialize)]
pub struct ClassReport {
    pub plus_regular: Option<PlusRegularInfo>,
    pub sps: Option<SpsInfo>,
    /// Reasons for every class that was rejected.
    pub rejections: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PlusRegularInfo {
    pub layers: usize,
    pub layer_degrees: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpsInfo {
    pub s: usize,
    pub degree: String,
    pub homogeneous: bool,
}

impl ClassReport {
    pub fn of(c: &Circuit) -> Self {
        let mut rejections = Vec::new();
        let plus_regular = match classify_plus_regular(c) {
            Ok(l) => Some(PlusRegularInfo {
                layers: l.num_layers(),
                layer_degrees: l.layer_degrees().iter().map(BigUint::to_string).collect(),
            }),
            Err(r) => {
                rejections.push(r.to_string());
                None
            }
        };
        let sps = match classify_sps(c) {
            Ok(v) => Some(SpsInfo {
                s: v.fan_in(),
                degree: v.max_degree().to_string(),
                homogeneous: v.homogeneous,
            }),
            Err(r) => {
                rejections.push(r.to_string());
                None
            }
        };
        Self {
            plus_regular,
            sps,
            rejections,
        }
    }

    /// One-line summary, e.g. `sps, s=2, D=2; also plus-regular, 2 layers`.
    pub fn summary(&self) -> String {
        let pr = self.plus_regular.as_ref().map(|p| {
            let degrees = p.layer_degrees.join(", ");
            format!("plus-regular, {} layers (degrees {degrees})", p.layers)
        });
        let sps = self.sps.as_ref().map(|s| {
            let h = if s.homogeneous { "" } else { ", inhomogeneous top" };
            format!("sps, s={}, D={}{h}", s.s, s.degree)
        });
        match (sps, pr) {
            (Some(s), Some(p)) => format!("{s}; also {p}"),
            (Some(s), None) => s,
            (None, Some(p)) => p,
            (None, None) => {
                let mut out = String::from("neither: ");
                let mut seen = Vec::new();
                for r in &self.rejections {
                    if !seen.contains(r) {
                        seen.push(r.clone());
                    }
                }
                out.push_str(&seen.join("; "));
                out
            }
        }
    }
}

pub fn classify(text: &str, prime: Option<u64>) -> Result<ClassReport, CliError> {
    Ok(ClassReport::of(&load(text, prime)?))
}

/// The expanded polynomial, one `coeff: word` line per term.
pub fn expand_dump(text: &str, prime: Option<u64>, budget: Budget) -> Result<String, CliError> {
    let c = load(text, prime)?;
    let f = expand(&c, budget).map_err(|e: OracleError| CliError::Budget(e.to_string()))?;
    Ok(f.dump())
}

/// A generated circuit file and its sidecar record.
pub fn gen(cfg: &GenConfig) -> (String, String) {
    let g = generate(cfg);
    let mut truth: GroundTruth = g.truth;
    if truth.is_zero.is_none() {
        truth.is_zero = expand(&g.circuit, Budget::default()).ok().map(|f| f.is_zero());
    }
    let mut text = String::new();
    let _ = writeln!(
        text,
        "# generated: class {:?}, seed {}, n {}, degree {}, fan-in {}",
        cfg.class, cfg.seed, cfg.n, cfg.degree, cfg.fan_in
    );
    text.push_str(&serialize(&g.circuit));
    (text, serde_json::to_string(&truth).expect("sidecar serializes"))
}
