//! Command-line interface.
//!
//! Exit codes, used consistently by every subcommand:
//!
//! | code | meaning                                                    |
//! |------|------------------------------------------------------------|
//! | 0    | everything verified / evaluated                            |
//! | 2    | numerical mismatch (identity, variant, or stage check)     |
//! | 3    | invalid parameters (convergence conditions, gamma poles)   |
//! | 4    | unusable invocation or config (flags, file, worker count)  |
//!
//! Worker-count precedence for `verify`: `--workers` flag, then the
//! `TUBEBETA_WORKERS` environment variable, then the config file's `workers`
//! key, then the default of 8.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use crate::closed_form::{breakdown, factor_j, VariantOffset};
use crate::domain::{validate_params, BetaParams};
use crate::engine::quad::{quad_aux, quad_j_reduced};
use crate::engine::steps::{
    verify_step_with_mode, JacobianMode, ReductionStep, STEP_TOLERANCE,
};
use crate::error::Error;
use crate::report::{
    parse_config, run_sets, write_csv, write_json, RunOutcome, RunSettings, DEFAULT_WORKERS,
};
use crate::special::aux_closed_form;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 2;
pub const EXIT_INVALID_PARAMS: i32 = 3;
pub const EXIT_BAD_CONFIG: i32 = 4;

/// Verifier for the tube-domain beta-integral identity.
#[derive(Debug, Parser)]
#[command(name = "tubebeta", version, about)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the closed form (both gamma factors and their product).
    Rhs(RhsArgs),
    /// Run a config of parameter sets: Monte-Carlo left side against all
    /// three closed-form variants, emitting CSV or JSON rows.
    Verify(VerifyArgs),
    /// Adjudicate the three binary-power variants of the second factor
    /// against deterministic quadrature, per rank.
    Discrepancy(DiscrepancyArgs),
    /// Check each reduction stage pointwise on random samples.
    Steps(StepsArgs),
    /// Evaluate the auxiliary 2D integral by quadrature and compare with its
    /// closed form.
    Aux(AuxArgs),
}

/// Parses `re` or `re,im` into a complex number.
fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = match s.split_once(',') {
        Some((re, im)) => (re, im),
        None => (s, "0"),
    };
    let parse = |part: &str| -> Result<f64, String> {
        part.trim()
            .parse()
            .map_err(|_| format!("`{part}` is not a number (expected `re` or `re,im`)"))
    };
    Ok(Complex64::new(parse(re)?, parse(im)?))
}

fn parse_variant(s: &str) -> Result<VariantOffset, String> {
    VariantOffset::parse(s).ok_or_else(|| format!("`{s}` is not one of +n, 0, -n"))
}

#[derive(Debug, Args)]
struct ParamArgs {
    /// Rank parameter (number of z coordinates plus one).
    #[arg(long)]
    n: u32,
    #[arg(long, value_parser = parse_complex, value_name = "RE[,IM]")]
    lambda1: Complex64,
    #[arg(long, value_parser = parse_complex, value_name = "RE[,IM]")]
    lambda2: Complex64,
    #[arg(long, value_parser = parse_complex, value_name = "RE[,IM]")]
    sigma1: Complex64,
    #[arg(long, value_parser = parse_complex, value_name = "RE[,IM]")]
    sigma2: Complex64,
    #[arg(long, value_parser = parse_complex, value_name = "RE[,IM]")]
    tau1: Complex64,
    #[arg(long, value_parser = parse_complex, value_name = "RE[,IM]")]
    tau2: Complex64,
}

impl ParamArgs {
    fn build(&self) -> Result<BetaParams, Error> {
        BetaParams::new(
            self.n,
            self.lambda1,
            self.lambda2,
            self.sigma1,
            self.sigma2,
            self.tau1,
            self.tau2,
        )
    }
}

#[derive(Debug, Args)]
struct RhsArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Binary-power variant of the second factor.
    #[arg(long, default_value = "0", value_parser = parse_variant)]
    variant: VariantOffset,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Config file (see the crate README for the format).
    #[arg(long)]
    config: PathBuf,
    /// Output format.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Overrides the config file's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config file's sample budget.
    #[arg(long)]
    budget: Option<u64>,
    /// Overrides the worker count (highest precedence).
    #[arg(long)]
    workers: Option<u32>,
}

#[derive(Debug, Args)]
struct DiscrepancyArgs {
    /// Ranks to adjudicate at (comma-separated).
    #[arg(
        long = "n-list",
        default_value = "1,2,3",
        value_delimiter = ',',
        value_parser = clap::value_parser!(u32).range(1..)
    )]
    n_list: Vec<u32>,
    /// Quadrature tolerance.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Second-block exponent `lambda2` (defaults to n+1 per rank).
    #[arg(long, value_parser = parse_complex, value_name = "RE[,IM]")]
    lambda2: Option<Complex64>,
    /// Second-block exponent `sigma2` (defaults to n+2 per rank).
    #[arg(long, value_parser = parse_complex, value_name = "RE[,IM]")]
    sigma2: Option<Complex64>,
    /// Second-block exponent `tau2` (defaults to n+1 per rank).
    #[arg(long, value_parser = parse_complex, value_name = "RE[,IM]")]
    tau2: Option<Complex64>,
}

#[derive(Debug, Args)]
struct StepsArgs {
    /// Ranks to check (comma-separated).
    #[arg(
        long = "n-list",
        default_value = "1,2,3",
        value_delimiter = ',',
        value_parser = clap::value_parser!(u32).range(1..)
    )]
    n_list: Vec<u32>,
    /// Samples per stage.
    #[arg(long, default_value_t = 1000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace the whitening volume factor by 1 (negative control; the
    /// whitening stage must then FAIL for every rank >= 2).
    #[arg(long)]
    fault_unit_jacobian: bool,
}

#[derive(Debug, Args)]
struct AuxArgs {
    #[arg(long, value_parser = parse_complex, value_name = "RE[,IM]")]
    alpha: Complex64,
    #[arg(long, value_parser = parse_complex, value_name = "RE[,IM]")]
    beta: Complex64,
    #[arg(long, value_parser = parse_complex, value_name = "RE[,IM]")]
    gamma: Complex64,
    /// Agreement tolerance (relative to max(1, |closed form|)).
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::SamplerConfig { .. } => EXIT_BAD_CONFIG,
        Error::QuadTolerance { .. } => EXIT_MISMATCH,
        Error::BranchGuard { .. }
        | Error::ZeroBase
        | Error::GammaPole { .. }
        | Error::Convergence { .. }
        | Error::OutsideDomain { .. }
        | Error::InvalidParams { .. }
        | Error::Parameter { .. } => EXIT_INVALID_PARAMS,
    }
}

fn fail(err: &Error) -> i32 {
    eprintln!("error: {err}");
    exit_code_for(err)
}

/// Parses `std::env::args` and runs; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // clap prints its own message (help/version go to stdout and are
            // not errors; everything else is an unusable invocation).
            let benign = matches!(
                err.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = err.print();
            return if benign { EXIT_OK } else { EXIT_BAD_CONFIG };
        }
    };
    match cli.command {
        Command::Rhs(args) => cmd_rhs(&args),
        Command::Verify(args) => cmd_verify(&args),
        Command::Discrepancy(args) => cmd_discrepancy(&args),
        Command::Steps(args) => cmd_steps(&args),
        Command::Aux(args) => cmd_aux(&args),
    }
}

fn fmt_c(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{} - {}i", z.re, -z.im)
    } else {
        format!("{} + {}i", z.re, z.im)
    }
}

fn cmd_rhs(args: &RhsArgs) -> i32 {
    let params = match args.params.build() {
        Ok(p) => p,
        Err(err) => return fail(&err),
    };
    let report = validate_params(&params);
    for c in &report.conditions {
        println!(
            "[{}] {:45} margin {:+.6e}",
            if c.holds { "PASS" } else { "FAIL" },
            c.inequality,
            c.margin
        );
    }
    let b = match breakdown(&params, args.variant) {
        Ok(b) => b,
        Err(err) => return fail(&err),
    };
    println!("variant          {}", b.variant);
    println!("factor I         {}", fmt_c(b.factor_i));
    println!(
        "  = 2^({}) * pi * G({}) G({}) / [G({}) G({})]",
        fmt_c(b.binary_exponent_i),
        fmt_c(b.gamma_numerator_i[0]),
        fmt_c(b.gamma_numerator_i[1]),
        fmt_c(b.gamma_denominator_i[0]),
        fmt_c(b.gamma_denominator_i[1]),
    );
    println!("factor J         {}", fmt_c(b.factor_j));
    println!(
        "  = 2^({}) * pi^{} * G({}) G({}) / [G({}) G({})]",
        fmt_c(b.binary_exponent_j),
        params.n,
        fmt_c(b.gamma_numerator_j[0]),
        fmt_c(b.gamma_numerator_j[1]),
        fmt_c(b.gamma_denominator_j[0]),
        fmt_c(b.gamma_denominator_j[1]),
    );
    println!("rhs              {}", fmt_c(b.value));
    EXIT_OK
}

fn resolve_workers(flag: Option<u32>, from_config: Option<u32>) -> Result<u32, Error> {
    if let Some(w) = flag {
        return Ok(w);
    }
    if let Ok(raw) = std::env::var("TUBEBETA_WORKERS") {
        return raw.trim().parse().map_err(|_| Error::Config {
            line: 0,
            message: format!("TUBEBETA_WORKERS = `{raw}` is not a valid worker count"),
        });
    }
    Ok(from_config.unwrap_or(DEFAULT_WORKERS))
}

fn cmd_verify(args: &VerifyArgs) -> i32 {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(err) => {
            eprintln!("error: cannot read {}: {err}", args.config.display());
            return EXIT_BAD_CONFIG;
        }
    };
    let config = match parse_config(&text) {
        Ok(config) => config,
        Err(err) => return fail(&err),
    };
    let workers = match resolve_workers(args.workers, config.workers) {
        Ok(w) => w,
        Err(err) => return fail(&err),
    };
    let settings = RunSettings {
        budget: args.budget.unwrap_or(config.budget),
        seed: args.seed.unwrap_or(config.seed),
        workers,
    };
    if settings.budget == 0 {
        // An explicit `--budget 0` restores the config default.
        return fail(&Error::Config {
            line: 0,
            message: "budget must be positive".into(),
        });
    }
    let report = match run_sets(&config.sets, &settings) {
        Ok(report) => report,
        Err(err) => return fail(&err),
    };

    for row in &report.rows {
        if row.rejected {
            eprintln!(
                "{:24} rejected ({}): {}",
                row.label,
                if row.expect_reject {
                    "expected"
                } else {
                    "UNEXPECTED"
                },
                row.reject_reason
            );
        } else {
            eprintln!(
                "{:24} lhs = {} ± {:.3e}  z(+n)={:8.2} z(0)={:8.2} z(-n)={:8.2}  matched={}{}",
                row.label,
                fmt_c(Complex64::new(row.lhs_re, row.lhs_im)),
                row.lhs_stderr,
                row.z_plus,
                row.z_zero,
                row.z_minus,
                row.matched_variant,
                if row.flagged { "  [weight-flagged]" } else { "" }
            );
        }
    }

    let write_result = match &args.output {
        Some(path) => std::fs::File::create(path)
            .map(|f| Box::new(f) as Box<dyn Write>)
            .and_then(|mut w| emit(&report, &args.format, &mut w)),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            emit(&report, &args.format, &mut lock)
        }
    };
    if let Err(err) = write_result {
        eprintln!("error: cannot write output: {err}");
        return EXIT_BAD_CONFIG;
    }

    match report.outcome() {
        RunOutcome::AllVerified => EXIT_OK,
        RunOutcome::Mismatch => EXIT_MISMATCH,
        RunOutcome::UnexpectedInvalid => EXIT_INVALID_PARAMS,
    }
}

fn emit(
    report: &crate::report::VerificationReport,
    format: &str,
    out: &mut dyn Write,
) -> std::io::Result<()> {
    match format {
        "json" => write_json(report, out),
        _ => write_csv(report, out),
    }
}

fn cmd_discrepancy(args: &DiscrepancyArgs) -> i32 {
    // Rel-error thresholds for the adjudication: the winning variant must
    // reproduce the quadrature value to 1e-4 while every other variant is
    // off by at least 0.4 (the variants differ by factors of 2^n >= 2).
    const ACCEPT: f64 = 1e-4;
    const REJECT: f64 = 0.4;

    let mut all_selected = Vec::new();
    for &n in &args.n_list {
        let nf = n as f64;
        let lambda2 = args.lambda2.unwrap_or(Complex64::new(nf + 1.0, 0.0));
        let sigma2 = args.sigma2.unwrap_or(Complex64::new(nf + 2.0, 0.0));
        let tau2 = args.tau2.unwrap_or(Complex64::new(nf + 1.0, 0.0));
        // The first-block exponents are irrelevant to the second factor;
        // fill them with anything structurally valid.
        let filler = Complex64::new(nf + 2.0, 0.0);
        let params = match BetaParams::new(n, filler, lambda2, filler, sigma2, filler, tau2)
        {
            Ok(p) => p,
            Err(err) => return fail(&err),
        };
        let quad = match quad_j_reduced(&params, args.tol) {
            Ok(q) => q,
            Err(err) => return fail(&err),
        };
        print!(
            "n={n}: quadrature J = {} (err est {:.1e}, {} evals)",
            fmt_c(quad.value),
            quad.error_estimate,
            quad.evaluations
        );

        let mut candidates = Vec::new();
        let mut rels = Vec::new();
        for variant in VariantOffset::ALL {
            let closed = match factor_j(&params, variant) {
                Ok(v) => v,
                Err(err) => {
                    println!();
                    return fail(&err);
                }
            };
            let rel = (quad.value - closed).norm() / closed.norm().max(1e-300);
            rels.push((variant, rel));
            if rel <= ACCEPT {
                candidates.push(variant);
            }
        }
        for (variant, rel) in &rels {
            print!("  [{variant}] rel {rel:.3e}");
        }
        let decided = match candidates.as_slice() {
            [only] if rels
                .iter()
                .filter(|(v, _)| v != only)
                .all(|(_, rel)| *rel >= REJECT) =>
            {
                Some(*only)
            }
            _ => None,
        };
        match decided {
            Some(v) => println!("  -> selected {v}"),
            None => println!("  -> NO unique variant selected"),
        }
        all_selected.push(decided);
    }

    match all_selected.as_slice() {
        [] => EXIT_BAD_CONFIG,
        [first, rest @ ..] if first.is_some() && rest.iter().all(|s| s == first) => {
            println!(
                "all ranks select the binary-power variant `{}`",
                first.unwrap()
            );
            EXIT_OK
        }
        _ => {
            println!("variant adjudication FAILED: no single variant fits every rank");
            EXIT_MISMATCH
        }
    }
}

fn cmd_steps(args: &StepsArgs) -> i32 {
    let mode = if args.fault_unit_jacobian {
        JacobianMode::UnitFault
    } else {
        JacobianMode::Analytic
    };
    let mut all_pass = true;
    for &n in &args.n_list {
        let nf = n as f64;
        // A canonical complex parameter set per rank: comfortably inside the
        // convergence region, imaginary parts exercising the full bi-power
        // arithmetic.
        let params = match BetaParams::new(
            n,
            Complex64::new(nf + 1.0, 0.0),
            Complex64::new(nf + 1.0, 0.0),
            Complex64::new(nf + 2.0, 0.4),
            Complex64::new(nf + 2.0, -0.3),
            Complex64::new(nf + 1.0, -0.25),
            Complex64::new(nf + 1.0, 0.35),
        ) {
            Ok(p) => p,
            Err(err) => return fail(&err),
        };
        for step in ReductionStep::ALL {
            match verify_step_with_mode(step, &params, args.samples, args.seed, mode) {
                Ok(check) => {
                    println!("n={n} {check}");
                    all_pass &= check.pass;
                }
                Err(err) => return fail(&err),
            }
        }
    }
    if args.fault_unit_jacobian {
        println!(
            "negative control: whitening above must FAIL for every rank >= 2 \
             (tolerance {STEP_TOLERANCE:.1e})"
        );
    }
    if all_pass {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    }
}

fn cmd_aux(args: &AuxArgs) -> i32 {
    let closed = match aux_closed_form(args.alpha, args.beta, args.gamma) {
        Ok(v) => v,
        Err(err) => return fail(&err),
    };
    let quad = match quad_aux(args.alpha, args.beta, args.gamma, args.tol * 0.1) {
        Ok(q) => q,
        Err(err) => return fail(&err),
    };
    let rel = (quad.value - closed).norm() / closed.norm().max(1.0);
    println!("closed form   {}", fmt_c(closed));
    println!(
        "quadrature    {} (err est {:.1e}, {} evals)",
        fmt_c(quad.value),
        quad.error_estimate,
        quad.evaluations
    );
    println!("difference    {rel:.3e} (tolerance {:.1e})", args.tol);
    if rel <= args.tol {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_argument_parsing() {
        assert_eq!(parse_complex("2").unwrap(), Complex64::new(2.0, 0.0));
        assert_eq!(
            parse_complex("2.5,-0.75").unwrap(),
            Complex64::new(2.5, -0.75)
        );
        assert_eq!(
            parse_complex(" 1 , 2 ").unwrap(),
            Complex64::new(1.0, 2.0)
        );
        assert!(parse_complex("x").is_err());
        assert!(parse_complex("1,y").is_err());
    }

    #[test]
    fn rank_list_parsing() {
        let cli = Cli::try_parse_from(["tubebeta", "steps", "--n-list", "2,3"]).unwrap();
        match cli.command {
            Command::Steps(args) => assert_eq!(args.n_list, vec![2, 3]),
            other => panic!("parsed into {other:?}"),
        }
        let cli = Cli::try_parse_from(["tubebeta", "discrepancy"]).unwrap();
        match cli.command {
            Command::Discrepancy(args) => assert_eq!(args.n_list, vec![1, 2, 3]),
            other => panic!("parsed into {other:?}"),
        }
        assert!(Cli::try_parse_from(["tubebeta", "steps", "--n-list", "0"]).is_err());
        assert!(Cli::try_parse_from(["tubebeta", "steps", "--n-list", "a"]).is_err());
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(
            exit_code_for(&Error::Config {
                line: 1,
                message: "x".into()
            }),
            EXIT_BAD_CONFIG
        );
        assert_eq!(
            exit_code_for(&Error::GammaPole {
                argument: Complex64::new(-1.0, 0.0),
                context: "test",
            }),
            EXIT_INVALID_PARAMS
        );
        assert_eq!(
            exit_code_for(&Error::QuadTolerance {
                tol: 1e-9,
                error_estimate: 1e-3,
                evaluations: 10,
            }),
            EXIT_MISMATCH
        );
    }
}
