//! `anticonc`: bound evaluation, diagonal validation, Monte Carlo verification,
//! dimension sweeps and size-distortion scenarios from the command line.
//!
//! Exit status is 0 on success or PASS, 1 when a check or verdict fails, and 2 on
//! usage, parse or parameter errors.

mod output;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anticonc::bounds::{BoundKind, BoundQuery, BoundResult, GmmBound, GmmBranch};
use anticonc::config::{parse_json, DiagonalSpec, FactorModelSpec, MarginalSpec, ScenarioSpec};
use anticonc::diagonals::{ConvexityReport, Lemma1Report, PsiReport, LEMMA1_TOLERANCE};
use anticonc::inference::{factor_model_scenario, size_distortion_bound, DistortionTerm, FactorCheck, FACTOR_X_GRID};
use anticonc::montecarlo::{
    estimate_concentration, sample_max_via_diagonal, verify_bound, EstimateResult, SampleConfig, Verdict, DEFAULT_K_SIGMA,
    DEFAULT_N,
};
use anticonc::{Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::output::Real;

#[derive(Debug, Parser)]
#[command(name = "anticonc", version, about = "Pointwise anti-concentration bounds for maxima")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; each subcommand accepts a subset.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Master seed for Monte Carlo runs.
    #[arg(long, global = true, env = "ANTICONC_SEED", default_value_t = 42)]
    seed: u64,

    /// Worker threads for Monte Carlo runs; results depend on (seed, workers).
    #[arg(long, global = true, default_value_t = 4)]
    workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one bound for a marginal, dimension, location and window.
    Bound(BoundArgs),
    /// Validate a diagonal section.
    Diagonal(DiagonalArgs),
    /// Compare a bound with a Monte Carlo estimate.
    Verify(VerifyArgs),
    /// Verify bounds over grids of dimensions, locations and windows.
    Sweep(SweepArgs),
    /// Size-distortion scenario or factor-model comparison.
    Infer(InferArgs),
}

#[derive(Debug, Args)]
struct BoundArgs {
    /// thm1-upper, thm1-lower, thm2, nazarov, closed-form or gmm.
    #[arg(long, value_parser = parse_kind)]
    kind: BoundKind,
    /// Marginal as inline JSON or a path to a JSON file.
    #[arg(long)]
    marginal: String,
    #[arg(long)]
    d: usize,
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    #[arg(long)]
    eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Check {
    Lemma1,
    Convexity,
    Psi,
}

#[derive(Debug, Args)]
struct DiagonalArgs {
    /// Diagonal as inline JSON or a path to a JSON file.
    #[arg(long)]
    spec: String,
    #[arg(long, value_enum, default_value_t = Check::Lemma1)]
    check: Check,
    /// Number of grid intervals.
    #[arg(long, default_value_t = 10_000)]
    grid: usize,
    /// Defaults to 1e-9 for lemma1 and 1e-9·d for convexity.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Debug, Args)]
struct SamplingArgs {
    #[arg(long, default_value_t = DEFAULT_N)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_K_SIGMA)]
    k_sigma: f64,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long)]
    diagonal: String,
    #[arg(long)]
    marginal: String,
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_parser = parse_kind)]
    bound_kind: BoundKind,
    /// Replace the computed bound value, e.g. to run a negative control.
    #[arg(long, allow_negative_numbers = true)]
    override_bound: Option<f64>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    diagonal: String,
    #[arg(long)]
    marginal: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    x_grid: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<f64>,
    /// Dimensions to sweep; defaults to the diagonal's own.
    #[arg(long, value_delimiter = ',')]
    d_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_kind, default_value = "thm1-upper")]
    bound_kind: Vec<BoundKind>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

#[derive(Debug, Args)]
struct InferArgs {
    /// Scenario JSON: diagonal, marginal, alpha, coupling, epsilon_grid, optional mode.
    #[arg(long, conflicts_with = "factor_model", required_unless_present = "factor_model")]
    scenario: Option<String>,
    /// Factor-model JSON: p, sigma, d, epsilon, optional x_grid.
    #[arg(long)]
    factor_model: Option<String>,
    /// Also write the per-epsilon breakdown of a scenario as CSV.
    #[arg(long)]
    breakdown_csv: Option<PathBuf>,
    #[command(flatten)]
    sampling: SamplingArgs,
}

fn parse_kind(s: &str) -> std::result::Result<BoundKind, String> {
    s.parse::<BoundKind>().map_err(|e| e.to_string())
}

/// Inline JSON when the argument starts with `{` or `[`, otherwise a file path.
fn json_arg<S: serde::de::DeserializeOwned>(what: &str, arg: &str) -> Result<S> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return parse_json(what, trimmed);
    }
    let text =
        fs::read_to_string(arg).map_err(|e| Error::Usage(format!("{what}: cannot read file `{arg}`: {e}")))?;
    parse_json(what, &text)
}

struct Report {
    body: String,
    passed: bool,
}

fn json_report<S: Serialize>(value: &S, passed: bool) -> Result<Report> {
    let body = output::to_json(value).map_err(|e| Error::Numeric(format!("serialization failed: {e}")))?;
    Ok(Report { body, passed })
}

fn csv_report(header: &[&str], rows: &[Vec<String>], passed: bool) -> Result<Report> {
    let body = output::to_csv(header, rows).map_err(|e| Error::Numeric(format!("csv output failed: {e}")))?;
    Ok(Report { body, passed })
}

fn format_for(cli: &Cli, allowed: &[Format], default: Format, subcommand: &str) -> Result<Format> {
    let format = cli.format.unwrap_or(default);
    if allowed.contains(&format) {
        Ok(format)
    } else {
        Err(Error::Usage(format!("`{subcommand}` does not support --format {format:?}").to_lowercase()))
    }
}

fn sample_config(cli: &Cli, sampling: &SamplingArgs) -> Result<SampleConfig> {
    if !(sampling.k_sigma > 0.0) {
        return Err(Error::Usage(format!("--k-sigma must be > 0, got {}", sampling.k_sigma)));
    }
    SampleConfig::new(sampling.n, cli.seed, cli.workers)
}

#[derive(Serialize)]
struct QueryEcho<'a> {
    marginal: &'a MarginalSpec,
    d: usize,
    x: Real,
    eps: Real,
}

#[derive(Serialize)]
struct BoundOutput<'a> {
    kind: BoundKind,
    #[serde(flatten)]
    result: BoundResult<f64>,
    query: QueryEcho<'a>,
}

fn run_bound(cli: &Cli, args: &BoundArgs) -> Result<Report> {
    let format = format_for(cli, &[Format::Json, Format::Csv], Format::Json, "bound")?;
    let spec: MarginalSpec = json_arg("marginal", &args.marginal)?;
    let query = BoundQuery::new(args.x, args.eps, args.d, spec.build()?)?;
    let result = args.kind.evaluate(&query)?;
    match format {
        Format::Json => json_report(
            &BoundOutput {
                kind: args.kind,
                result,
                query: QueryEcho {
                    marginal: &spec,
                    d: args.d,
                    x: Real(args.x),
                    eps: Real(args.eps),
                },
            },
            true,
        ),
        Format::Csv => csv_report(
            &["kind", "d", "x", "eps", "value", "regime", "formula_id", "side"],
            &[vec![
                args.kind.to_string(),
                args.d.to_string(),
                output::real(args.x),
                output::real(args.eps),
                output::real(result.value),
                enum_name(&result.regime),
                enum_name(&result.formula_id),
                enum_name(&result.side),
            ]],
            true,
        ),
    }
}

/// The serde name of a unit enum variant.
fn enum_name<S: Serialize>(v: &S) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(str::to_string))
        .unwrap_or_default()
}

#[derive(Serialize)]
#[serde(tag = "check", rename_all = "snake_case")]
enum DiagonalOutput<'a> {
    Lemma1 {
        diagonal: &'a DiagonalSpec,
        passed: bool,
        report: Lemma1Report<f64>,
    },
    Convexity {
        diagonal: &'a DiagonalSpec,
        passed: bool,
        convex_by_construction: Option<bool>,
        report: ConvexityReport<f64>,
    },
    Psi {
        diagonal: &'a DiagonalSpec,
        passed: bool,
        report: PsiReport<f64>,
    },
}

fn run_diagonal(cli: &Cli, args: &DiagonalArgs) -> Result<Report> {
    format_for(cli, &[Format::Json], Format::Json, "diagonal")?;
    let spec: DiagonalSpec = json_arg("spec", &args.spec)?;
    let diag = spec.build()?;
    let out = match args.check {
        Check::Lemma1 => {
            let tol = args.tolerance.unwrap_or(LEMMA1_TOLERANCE);
            let report = diag.validate_lemma1_with_tolerance(args.grid, tol)?;
            DiagonalOutput::Lemma1 {
                diagonal: &spec,
                passed: report.passed,
                report,
            }
        }
        Check::Convexity => {
            let tol = args.tolerance.unwrap_or(1e-9 * diag.dim() as f64);
            let report = diag.check_convexity(args.grid, tol)?;
            DiagonalOutput::Convexity {
                diagonal: &spec,
                passed: report.convex,
                convex_by_construction: diag.is_convex_by_construction(),
                report,
            }
        }
        Check::Psi => {
            let generator = spec
                .generator()?
                .ok_or_else(|| Error::Usage("--check psi needs an archimedean diagonal".into()))?;
            let report = generator.psi_monotonicity_check(diag.dim(), args.grid)?;
            DiagonalOutput::Psi {
                diagonal: &spec,
                passed: report.non_increasing,
                report,
            }
        }
    };
    let passed = match &out {
        DiagonalOutput::Lemma1 { passed, .. }
        | DiagonalOutput::Convexity { passed, .. }
        | DiagonalOutput::Psi { passed, .. } => *passed,
    };
    json_report(&out, passed)
}

fn bound_for(kind: BoundKind, query: &BoundQuery<f64>, override_value: Option<f64>) -> Result<BoundResult<f64>> {
    let computed = kind.evaluate(query)?;
    Ok(match override_value {
        Some(v) => BoundResult::manual(v, computed.formula_id, computed.side),
        None => computed,
    })
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    diagonal: &'a DiagonalSpec,
    marginal: &'a MarginalSpec,
    d: usize,
    x: Real,
    eps: Real,
    kind: BoundKind,
    overridden: bool,
    bound: BoundResult<f64>,
    estimate: EstimateResult,
    verdict: Verdict,
}

fn run_verify(cli: &Cli, args: &VerifyArgs) -> Result<Report> {
    format_for(cli, &[Format::Json], Format::Json, "verify")?;
    let cfg = sample_config(cli, &args.sampling)?;
    let diag_spec: DiagonalSpec = json_arg("diagonal", &args.diagonal)?;
    let marg_spec: MarginalSpec = json_arg("marginal", &args.marginal)?;
    let (diag, marginal) = (diag_spec.build()?, marg_spec.build()?);
    let query = BoundQuery::new(args.x, args.eps, diag.dim(), marginal.clone())?;
    let bound = bound_for(args.bound_kind, &query, args.override_bound)?;
    let samples = sample_max_via_diagonal(&diag, &marginal, &cfg)?;
    let estimate = estimate_concentration(&samples, args.x, args.eps)?;
    let verdict = verify_bound(&bound, &estimate, args.sampling.k_sigma);
    json_report(
        &VerifyOutput {
            diagonal: &diag_spec,
            marginal: &marg_spec,
            d: diag.dim(),
            x: Real(args.x),
            eps: Real(args.eps),
            kind: args.bound_kind,
            overridden: args.override_bound.is_some(),
            bound,
            estimate,
            verdict,
        },
        verdict.pass,
    )
}

#[derive(Serialize)]
struct SweepRow {
    d: usize,
    x: Real,
    eps: Real,
    kind: BoundKind,
    bound: f64,
    p_hat: f64,
    stderr: f64,
    verdict: &'static str,
}

fn verdict_label(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn run_sweep(cli: &Cli, args: &SweepArgs) -> Result<Report> {
    let format = format_for(cli, &[Format::Json, Format::Csv], Format::Csv, "sweep")?;
    let cfg = sample_config(cli, &args.sampling)?;
    let diag_spec: DiagonalSpec = json_arg("diagonal", &args.diagonal)?;
    let marginal = json_arg::<MarginalSpec>("marginal", &args.marginal)?.build()?;
    let dims = if args.d_list.is_empty() {
        vec![diag_spec.dim()]
    } else {
        args.d_list.clone()
    };
    let mut rows = Vec::new();
    for &d in &dims {
        let diag = diag_spec.with_dim(d).build()?;
        let samples = sample_max_via_diagonal(&diag, &marginal, &cfg)?;
        for &x in &args.x_grid {
            for &eps in &args.eps {
                let estimate = estimate_concentration(&samples, x, eps)?;
                let query = BoundQuery::new(x, eps, d, marginal.clone())?;
                for &kind in &args.bound_kind {
                    let bound = kind.evaluate(&query)?;
                    let verdict = verify_bound(&bound, &estimate, args.sampling.k_sigma);
                    rows.push(SweepRow {
                        d,
                        x: Real(x),
                        eps: Real(eps),
                        kind,
                        bound: bound.value,
                        p_hat: estimate.p_hat,
                        stderr: estimate.stderr,
                        verdict: verdict_label(verdict.pass),
                    });
                }
            }
        }
    }
    let passed = rows.iter().all(|r| r.verdict == "PASS");
    match format {
        Format::Json => json_report(&rows, passed),
        Format::Csv => {
            let cells: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    vec![
                        r.d.to_string(),
                        output::real(r.x.0),
                        output::real(r.eps.0),
                        r.kind.to_string(),
                        output::real(r.bound),
                        output::real(r.p_hat),
                        output::real(r.stderr),
                        r.verdict.to_string(),
                    ]
                })
                .collect();
            csv_report(
                &["d", "x", "eps", "kind", "bound", "p_hat", "stderr", "verdict"],
                &cells,
                passed,
            )
        }
    }
}

#[derive(Serialize)]
struct ScenarioOutput<'a> {
    scenario: &'a ScenarioSpec,
    #[serde(flatten)]
    report: anticonc::inference::SizeDistortionReport<f64>,
}

#[derive(Serialize)]
struct FactorOutput<'a> {
    input: &'a FactorModelSpec,
    gmm: GmmBound<f64>,
    conditioning_value: f64,
    active: GmmBranch,
    all_pass: bool,
    checks: Vec<FactorCheck>,
    config: SampleConfig,
}

fn breakdown_rows(terms: &[DistortionTerm<f64>]) -> Vec<Vec<String>> {
    terms
        .iter()
        .map(|t| {
            [t.epsilon, t.coupling_p, t.left, t.right, t.total]
                .into_iter()
                .map(output::real)
                .collect()
        })
        .collect()
}

const BREAKDOWN_HEADER: [&str; 5] = ["epsilon", "coupling_p", "left", "right", "total"];

fn run_infer(cli: &Cli, args: &InferArgs) -> Result<Report> {
    let format = format_for(cli, &[Format::Json, Format::Csv], Format::Json, "infer")?;
    if let Some(arg) = &args.scenario {
        let spec: ScenarioSpec = json_arg("scenario", arg)?;
        let report = size_distortion_bound(&spec.build()?, spec.mode)?;
        let rows = breakdown_rows(&report.breakdown);
        if let Some(path) = &args.breakdown_csv {
            let text = csv_report(&BREAKDOWN_HEADER, &rows, true)?.body;
            write_file(path, &text)?;
        }
        return match format {
            Format::Json => json_report(&ScenarioOutput { scenario: &spec, report }, true),
            Format::Csv => csv_report(&BREAKDOWN_HEADER, &rows, true),
        };
    }
    let arg = args.factor_model.as_deref().expect("clap requires one input");
    let spec: FactorModelSpec = json_arg("factor_model", arg)?;
    if args.breakdown_csv.is_some() {
        return Err(Error::Usage("--breakdown-csv applies to --scenario only".into()));
    }
    let cfg = sample_config(cli, &args.sampling)?;
    let grid = spec.x_grid.clone().unwrap_or_else(|| FACTOR_X_GRID.to_vec());
    let r = factor_model_scenario(&spec.p, &spec.sigma, spec.d, spec.epsilon, &grid, &cfg, args.sampling.k_sigma)?;
    match format {
        Format::Json => json_report(
            &FactorOutput {
                input: &spec,
                gmm: r.gmm,
                conditioning_value: r.conditioning_value,
                active: r.active,
                all_pass: r.all_pass,
                checks: r.checks.clone(),
                config: cfg,
            },
            r.all_pass,
        ),
        Format::Csv => {
            let rows: Vec<Vec<String>> = r
                .checks
                .iter()
                .map(|c| {
                    vec![
                        spec.d.to_string(),
                        output::real(c.x),
                        output::real(spec.epsilon),
                        "gmm".to_string(),
                        output::real(c.verdict.bound),
                        output::real(c.estimate.p_hat),
                        output::real(c.estimate.stderr),
                        verdict_label(c.verdict.pass).to_string(),
                    ]
                })
                .collect();
            csv_report(
                &["d", "x", "eps", "kind", "bound", "p_hat", "stderr", "verdict"],
                &rows,
                r.all_pass,
            )
        }
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Usage(format!("cannot write `{}`: {e}", path.display())))
}

fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Bound(a) => run_bound(cli, a),
        Command::Diagonal(a) => run_diagonal(cli, a),
        Command::Verify(a) => run_verify(cli, a),
        Command::Sweep(a) => run_sweep(cli, a),
        Command::Infer(a) => run_infer(cli, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let written = match &cli.out {
        Some(path) => write_file(path, &report.body),
        None => {
            print!("{}", report.body);
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
