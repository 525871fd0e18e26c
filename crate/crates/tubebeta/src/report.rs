//! Run configuration, verification rows, and the CSV/JSON writers.
//!
//! A *run* evaluates a list of parameter sets: for each set the left-hand
//! side is estimated by Monte-Carlo and compared against all three
//! closed-form variants. Results are emitted as one row per set, in config
//! order, either as CSV (one line per row, wall time in the last column) or
//! as JSON split into a `payload` tree — byte-identical across runs with the
//! same config and seed — and a `timing` tree holding everything that is
//! allowed to differ between runs.
//!
//! # Config format
//!
//! Line-based `key = value` with `#` comments. Top-level keys (`budget`,
//! `seed`, `workers`) come first; each `[set]` header starts one parameter
//! set. Imaginary parts are optional (`lambda1_im = 0.5`), `label` and
//! `expect_reject` likewise:
//!
//! ```text
//! budget = 1000000
//! seed = 42
//!
//! [set]
//! label = anchor-n1
//! n = 1
//! lambda1 = 2
//! lambda2 = 2
//! sigma1 = 3
//! sigma2 = 3
//! tau1 = 2
//! tau2 = 2
//!
//! [set]
//! label = rejected-on-purpose
//! n = 2
//! lambda1 = 1        # violates Re(lambda1) > (n+1)/2
//! lambda2 = 4
//! sigma1 = 4
//! sigma2 = 4
//! tau1 = 3
//! tau2 = 3
//! expect_reject = true
//! ```

use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::closed_form::{rhs, VariantOffset};
use crate::domain::BetaParams;
use crate::engine::mc::{mc_lhs, SamplerConfig};
use crate::error::{Error, Result};

/// Agreement threshold in standard errors: a variant "matches" when the
/// estimate sits within this many standard errors of it.
pub const Z_THRESHOLD: f64 = 3.0;

pub const DEFAULT_BUDGET: u64 = 10_000_000;
pub const DEFAULT_WORKERS: u32 = 8;

// --- configuration -----------------------------------------------------------

/// One parameter set from a config file.
#[derive(Debug, Clone)]
pub struct ParamSet {
    pub label: String,
    pub params: BetaParams,
    /// The set is *supposed* to fail parameter validation (negative-control
    /// rows in a verification config).
    pub expect_reject: bool,
}

/// Parsed run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub budget: u64,
    pub seed: u64,
    /// Only set when the config file carries a `workers` key; the caller
    /// resolves the final value (flag > environment > config > default).
    pub workers: Option<u32>,
    pub sets: Vec<ParamSet>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            seed: 0,
            workers: None,
            sets: Vec::new(),
        }
    }
}

#[derive(Debug, Default)]
struct SetBuilder {
    start_line: usize,
    label: Option<String>,
    n: Option<u32>,
    re: [Option<f64>; 6],
    im: [f64; 6],
    expect_reject: bool,
}

const PARAM_KEYS: [&str; 6] = ["lambda1", "lambda2", "sigma1", "sigma2", "tau1", "tau2"];

impl SetBuilder {
    fn finish(self, index: usize) -> Result<ParamSet> {
        let fail = |message: String| Error::Config {
            line: self.start_line,
            message,
        };
        let n = self
            .n
            .ok_or_else(|| fail("set is missing the required key `n`".into()))?;
        let mut c = [Complex64::new(0.0, 0.0); 6];
        for (k, key) in PARAM_KEYS.iter().enumerate() {
            let re = self.re[k]
                .ok_or_else(|| fail(format!("set is missing the required key `{key}`")))?;
            c[k] = Complex64::new(re, self.im[k]);
        }
        let params = BetaParams::new(n, c[0], c[1], c[2], c[3], c[4], c[5])
            .map_err(|e| fail(e.to_string()))?;
        Ok(ParamSet {
            label: self
                .label
                .unwrap_or_else(|| format!("set-{}", index + 1)),
            params,
            expect_reject: self.expect_reject,
        })
    }
}

fn parse_number<T: std::str::FromStr>(value: &str, key: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| Error::Config {
        line,
        message: format!("cannot parse `{value}` as a number for key `{key}`"),
    })
}

fn parse_bool(value: &str, key: &str, line: usize) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config {
            line,
            message: format!("cannot parse `{value}` as true/false for key `{key}`"),
        }),
    }
}

/// Parses the line-based config format. Errors carry the 1-based line number.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut current: Option<SetBuilder> = None;
    let flush = |b: Option<SetBuilder>, sets: &mut Vec<ParamSet>| -> Result<()> {
        if let Some(b) = b {
            let set = b.finish(sets.len())?;
            sets.push(set);
        }
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(cut) => &raw[..cut],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line == "[set]" {
            flush(current.take(), &mut cfg.sets)?;
            current = Some(SetBuilder {
                start_line: line_no,
                ..SetBuilder::default()
            });
            continue;
        }
        if line.starts_with('[') {
            return Err(Error::Config {
                line: line_no,
                message: format!("unknown section `{line}` (only [set] is recognized)"),
            });
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());

        match &mut current {
            None => match key {
                "budget" => cfg.budget = parse_number(value, key, line_no)?,
                "seed" => cfg.seed = parse_number(value, key, line_no)?,
                "workers" => cfg.workers = Some(parse_number(value, key, line_no)?),
                _ => {
                    return Err(Error::Config {
                        line: line_no,
                        message: format!(
                            "unknown top-level key `{key}` (parameters go inside a [set] block)"
                        ),
                    })
                }
            },
            Some(b) => match key {
                "label" => b.label = Some(value.to_string()),
                "n" => b.n = Some(parse_number(value, key, line_no)?),
                "expect_reject" => b.expect_reject = parse_bool(value, key, line_no)?,
                _ => {
                    let (stem, imaginary) = match key.strip_suffix("_im") {
                        Some(stem) => (stem, true),
                        None => (key, false),
                    };
                    let Some(k) = PARAM_KEYS.iter().position(|p| *p == stem) else {
                        return Err(Error::Config {
                            line: line_no,
                            message: format!("unknown set key `{key}`"),
                        });
                    };
                    let x: f64 = parse_number(value, key, line_no)?;
                    if imaginary {
                        b.im[k] = x;
                    } else {
                        b.re[k] = Some(x);
                    }
                }
            },
        }
    }
    flush(current.take(), &mut cfg.sets)?;

    if cfg.sets.is_empty() {
        return Err(Error::Config {
            line: text.lines().count(),
            message: "config defines no [set] blocks".into(),
        });
    }
    if cfg.budget < 2 {
        return Err(Error::Config {
            line: 1,
            message: format!("budget must be at least 2, got {}", cfg.budget),
        });
    }
    Ok(cfg)
}

// --- rows ----------------------------------------------------------------------

/// One verification result. Everything here is deterministic for a fixed
/// `(config, seed, workers)`; wall time is excluded from serialization and
/// reported through the timing channel instead.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationRow {
    pub label: String,
    pub n: u32,
    pub lambda1_re: f64,
    pub lambda1_im: f64,
    pub lambda2_re: f64,
    pub lambda2_im: f64,
    pub sigma1_re: f64,
    pub sigma1_im: f64,
    pub sigma2_re: f64,
    pub sigma2_im: f64,
    pub tau1_re: f64,
    pub tau1_im: f64,
    pub tau2_re: f64,
    pub tau2_im: f64,
    pub expect_reject: bool,
    pub rejected: bool,
    /// Empty for accepted rows; the full error text (named inequalities or
    /// pole) for rejected ones.
    pub reject_reason: String,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub lhs_stderr: f64,
    pub rhs_plus_re: f64,
    pub rhs_plus_im: f64,
    pub rhs_zero_re: f64,
    pub rhs_zero_im: f64,
    pub rhs_minus_re: f64,
    pub rhs_minus_im: f64,
    pub z_plus: f64,
    pub z_zero: f64,
    pub z_minus: f64,
    /// `+n`, `0`, `-n` when exactly one variant sits within
    /// [`Z_THRESHOLD`]; `ambiguous` when several do; `none` otherwise.
    pub matched_variant: String,
    pub weight_ratio: f64,
    pub flagged: bool,
    pub nonfinite_samples: u64,
    pub n_samples: u64,
    pub seed: u64,
    #[serde(skip)]
    pub wall_time_s: f64,
}

impl VerificationRow {
    fn empty(set: &ParamSet, seed: u64) -> Self {
        let p = &set.params;
        Self {
            label: set.label.clone(),
            n: p.n,
            lambda1_re: p.lambda1.re,
            lambda1_im: p.lambda1.im,
            lambda2_re: p.lambda2.re,
            lambda2_im: p.lambda2.im,
            sigma1_re: p.sigma1.re,
            sigma1_im: p.sigma1.im,
            sigma2_re: p.sigma2.re,
            sigma2_im: p.sigma2.im,
            tau1_re: p.tau1.re,
            tau1_im: p.tau1.im,
            tau2_re: p.tau2.re,
            tau2_im: p.tau2.im,
            expect_reject: set.expect_reject,
            rejected: false,
            reject_reason: String::new(),
            lhs_re: 0.0,
            lhs_im: 0.0,
            lhs_stderr: 0.0,
            rhs_plus_re: 0.0,
            rhs_plus_im: 0.0,
            rhs_zero_re: 0.0,
            rhs_zero_im: 0.0,
            rhs_minus_re: 0.0,
            rhs_minus_im: 0.0,
            z_plus: 0.0,
            z_zero: 0.0,
            z_minus: 0.0,
            matched_variant: "none".into(),
            weight_ratio: 0.0,
            flagged: false,
            nonfinite_samples: 0,
            n_samples: 0,
            seed,
            wall_time_s: 0.0,
        }
    }
}

/// Resolved run settings after the workers-precedence chain.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RunSettings {
    pub budget: u64,
    pub seed: u64,
    pub workers: u32,
}

/// All rows of one run plus the settings that produced them.
#[derive(Debug, Clone)]
pub struct VerificationReport {
    pub settings: RunSettings,
    pub rows: Vec<VerificationRow>,
    pub total_wall_time_s: f64,
}

/// Aggregate verdict of a run, in priority order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    /// Every accepted row matched the zero-offset closed form within
    /// [`Z_THRESHOLD`] and every expected rejection happened.
    AllVerified,
    /// At least one accepted row disagreed with the zero-offset closed form,
    /// or a set marked `expect_reject` was accepted.
    Mismatch,
    /// At least one set was rejected that was not marked `expect_reject`.
    UnexpectedInvalid,
}

impl VerificationReport {
    pub fn outcome(&self) -> RunOutcome {
        if self
            .rows
            .iter()
            .any(|row| row.rejected && !row.expect_reject)
        {
            return RunOutcome::UnexpectedInvalid;
        }
        let mismatch = self.rows.iter().any(|row| {
            (!row.rejected && row.expect_reject)
                || (!row.rejected && row.z_zero > Z_THRESHOLD)
        });
        if mismatch {
            RunOutcome::Mismatch
        } else {
            RunOutcome::AllVerified
        }
    }
}

/// Runs every set of a config against the Monte-Carlo engine and all three
/// closed-form variants.
pub fn run_sets(sets: &[ParamSet], settings: &RunSettings) -> Result<VerificationReport> {
    let run_started = Instant::now();
    let mut rows = Vec::with_capacity(sets.len());
    for set in sets {
        let row_started = Instant::now();
        let mut row = VerificationRow::empty(set, settings.seed);
        let cfg = SamplerConfig {
            budget: settings.budget,
            seed: settings.seed,
            workers: settings.workers,
            proposal: None,
        };
        match evaluate_set(&set.params, &cfg) {
            Ok(eval) => {
                row.lhs_re = eval.mean.re;
                row.lhs_im = eval.mean.im;
                row.lhs_stderr = eval.std_error;
                [row.rhs_plus_re, row.rhs_plus_im] = [eval.rhs[0].re, eval.rhs[0].im];
                [row.rhs_zero_re, row.rhs_zero_im] = [eval.rhs[1].re, eval.rhs[1].im];
                [row.rhs_minus_re, row.rhs_minus_im] = [eval.rhs[2].re, eval.rhs[2].im];
                [row.z_plus, row.z_zero, row.z_minus] = eval.z;
                row.matched_variant = eval.matched.to_string();
                row.weight_ratio = eval.weight_ratio;
                row.flagged = eval.flagged;
                row.nonfinite_samples = eval.nonfinite_samples;
                row.n_samples = eval.n_samples;
            }
            Err(
                err @ (Error::InvalidParams { .. }
                | Error::GammaPole { .. }
                | Error::Parameter { .. }),
            ) => {
                row.rejected = true;
                row.reject_reason = err.to_string().replace('\n', "; ");
            }
            // Engine misconfiguration is a caller error, not a property of
            // the parameter set — it must not masquerade as a rejection.
            Err(other) => return Err(other),
        }
        row.wall_time_s = row_started.elapsed().as_secs_f64();
        rows.push(row);
    }
    Ok(VerificationReport {
        settings: *settings,
        rows,
        total_wall_time_s: run_started.elapsed().as_secs_f64(),
    })
}

struct SetEvaluation {
    mean: Complex64,
    std_error: f64,
    rhs: [Complex64; 3],
    z: [f64; 3],
    matched: &'static str,
    weight_ratio: f64,
    flagged: bool,
    nonfinite_samples: u64,
    n_samples: u64,
}

fn evaluate_set(params: &BetaParams, cfg: &SamplerConfig) -> Result<SetEvaluation> {
    let est = mc_lhs(params, cfg)?;
    let mut rhs_vals = [Complex64::new(0.0, 0.0); 3];
    let mut z = [0.0f64; 3];
    for (k, variant) in VariantOffset::ALL.iter().enumerate() {
        rhs_vals[k] = rhs(params, *variant)?;
        z[k] = est.z_score(rhs_vals[k]);
    }
    let within: Vec<usize> = (0..3).filter(|&k| z[k] <= Z_THRESHOLD).collect();
    let matched = match within.as_slice() {
        [k] => VariantOffset::ALL[*k].label(),
        [] => "none",
        _ => "ambiguous",
    };
    Ok(SetEvaluation {
        mean: est.mean,
        std_error: est.std_error,
        rhs: rhs_vals,
        z,
        matched,
        weight_ratio: est.weight_ratio,
        flagged: est.flagged,
        nonfinite_samples: est.nonfinite_samples,
        n_samples: est.n_samples,
    })
}

// --- writers ---------------------------------------------------------------------

pub const CSV_HEADER: &str = "label,n,lambda1_re,lambda1_im,lambda2_re,lambda2_im,\
sigma1_re,sigma1_im,sigma2_re,sigma2_im,tau1_re,tau1_im,tau2_re,tau2_im,\
expect_reject,rejected,reject_reason,lhs_re,lhs_im,lhs_stderr,\
rhs_plus_re,rhs_plus_im,rhs_zero_re,rhs_zero_im,rhs_minus_re,rhs_minus_im,\
z_plus,z_zero,z_minus,matched_variant,weight_ratio,flagged,nonfinite_samples,\
n_samples,seed,wall_time_s";

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// CSV, one line per row, wall time in the last column.
pub fn write_csv<W: Write + ?Sized>(
    report: &VerificationReport,
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in &report.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_escape(&r.label),
            r.n,
            r.lambda1_re,
            r.lambda1_im,
            r.lambda2_re,
            r.lambda2_im,
            r.sigma1_re,
            r.sigma1_im,
            r.sigma2_re,
            r.sigma2_im,
            r.tau1_re,
            r.tau1_im,
            r.tau2_re,
            r.tau2_im,
            r.expect_reject,
            r.rejected,
            csv_escape(&r.reject_reason),
            r.lhs_re,
            r.lhs_im,
            r.lhs_stderr,
            r.rhs_plus_re,
            r.rhs_plus_im,
            r.rhs_zero_re,
            r.rhs_zero_im,
            r.rhs_minus_re,
            r.rhs_minus_im,
            r.z_plus,
            r.z_zero,
            r.z_minus,
            r.matched_variant,
            r.weight_ratio,
            r.flagged,
            r.nonfinite_samples,
            r.n_samples,
            r.seed,
            r.wall_time_s,
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct JsonPayload<'a> {
    budget: u64,
    seed: u64,
    workers: u32,
    rows: &'a [VerificationRow],
}

#[derive(Serialize)]
struct JsonRowTiming<'a> {
    label: &'a str,
    seconds: f64,
}

#[derive(Serialize)]
struct JsonTiming<'a> {
    total_s: f64,
    rows: Vec<JsonRowTiming<'a>>,
}

#[derive(Serialize)]
struct JsonDoc<'a> {
    payload: JsonPayload<'a>,
    timing: JsonTiming<'a>,
}

/// JSON with the reproducible content under `payload` and wall times under
/// `timing`. For a fixed `(config, seed, workers)` the serialized `payload`
/// subtree is byte-identical across runs.
pub fn write_json<W: Write + ?Sized>(
    report: &VerificationReport,
    out: &mut W,
) -> std::io::Result<()> {
    let doc = JsonDoc {
        payload: JsonPayload {
            budget: report.settings.budget,
            seed: report.settings.seed,
            workers: report.settings.workers,
            rows: &report.rows,
        },
        timing: JsonTiming {
            total_s: report.total_wall_time_s,
            rows: report
                .rows
                .iter()
                .map(|r| JsonRowTiming {
                    label: &r.label,
                    seconds: r.wall_time_s,
                })
                .collect(),
        },
    };
    let text = serde_json::to_string_pretty(&doc).map_err(std::io::Error::other)?;
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")
}
