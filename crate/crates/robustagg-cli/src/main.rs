//! Command-line front end for the aggregation library.
//!
//! Subcommands cover pointwise aggregation, per-profile regret evaluation,
//! worst-case searches, parameter sweeps, certificate verification, and
//! one-shot recomputation of the headline result tables and sensitivity
//! curves. Every run that produces an output file also writes a
//! `<file>.manifest.json` recording the fully resolved configuration, so the
//! artifact can be regenerated bit-for-bit.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 certificate verification
//! failure, 3 infeasible search domain.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use robustagg::{
    build_known_marginal_certificate, build_unknown_state_certificate, build_xor_certificate,
    expected_regret, lower_bound_gap_report, param_grid, sweep_alpha, worst_case_regret,
    AggregatorSpec, BinaryCIEnvironment, BoundLadder, CertificateError, FieldCheck,
    MixtureCertificate, MuPolicy, SearchConfig, SearchDomain, SearchError, UpperBounds,
};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFICATION: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

/// Decimal places used for regret values in rendered tables and curves.
const TABLE_DECIMALS: usize = 6;

/// Significant digits printed by `aggregate`.
const FORECAST_DIGITS: i32 = 12;

// ---------------------------------------------------------------------------
// Error plumbing
// ---------------------------------------------------------------------------

/// A user-facing failure carrying the process exit code.
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: message.into() }
    }

    fn verification(message: impl Into<String>) -> Self {
        CliError { code: EXIT_VERIFICATION, message: message.into() }
    }
}

/// Search failures keep their exit-code split: an infeasible spec/domain pair
/// is reported distinctly from configuration mistakes.
fn search_error(err: SearchError) -> CliError {
    match err {
        SearchError::InfeasibleDomain { .. } => {
            CliError { code: EXIT_INFEASIBLE, message: err.to_string() }
        }
        other => CliError::usage(other.to_string()),
    }
}

// ---------------------------------------------------------------------------
// Argument grammar
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "robustagg",
    version,
    about = "Worst-case regret analysis for two-expert forecast aggregation",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Aggregate two forecasts with a rule and print the result.
    Aggregate(AggregateArgs),
    /// Evaluate a rule's expected regret on one environment, per profile.
    Regret(RegretArgs),
    /// Search a domain for the environment maximizing a rule's regret.
    #[command(name = "worst-case")]
    WorstCase(WorstCaseArgs),
    /// Sweep the one-parameter logit rule across a grid of alpha values.
    Sweep(SweepArgs),
    /// Re-derive and check the lower-bound certificates.
    Certify(CertifyArgs),
    /// Recompute a headline result table or sensitivity curve.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct AggregateArgs {
    /// Aggregator as inline JSON or a path to a JSON file.
    #[arg(long)]
    spec: String,
    /// Expert 1's forecast, in [0, 1].
    x1: f64,
    /// Expert 2's forecast, in [0, 1].
    x2: f64,
}

#[derive(Args)]
struct RegretArgs {
    /// Aggregator as inline JSON or a path to a JSON file.
    #[arg(long)]
    spec: String,
    /// Environment JSON file (seven-parameter conditionally independent form).
    #[arg(long)]
    env: PathBuf,
    /// Report encoding.
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Write the report here instead of stdout; a manifest lands beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WorstCaseArgs {
    /// Aggregator as inline JSON or a path to a JSON file.
    #[arg(long)]
    spec: String,
    /// Which environment parameters the adversary controls.
    #[arg(long, value_enum)]
    domain: DomainArg,
    #[command(flatten)]
    search: SearchFlags,
    /// Result encoding (search results are JSON only).
    #[arg(long, value_enum, default_value_t = FormatArg::Json)]
    format: FormatArg,
    /// Write the result here instead of stdout; a manifest lands beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Which environment parameters the adversary controls.
    #[arg(long, value_enum)]
    domain: DomainArg,
    /// Rule family to sweep; only the one-parameter logit family qualifies.
    #[arg(long, value_enum, default_value_t = FamilyArg::LogOdds)]
    family: FamilyArg,
    /// Alpha grid spacing over [0, 1]; both endpoints are always included.
    #[arg(long)]
    grid: f64,
    #[command(flatten)]
    search: SearchFlags,
    /// Output encoding.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Write the sweep here instead of stdout; a manifest lands beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CertifyArgs {
    /// Which certificates to check.
    #[arg(long, value_enum, default_value_t = WhichArg::All)]
    which: WhichArg,
    /// Per-field verification tolerance.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Emit JSON instead of the text report.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Write the report here instead of stdout; a manifest lands beside it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("target").required(true).args(["table", "figure"])))]
struct ReproduceArgs {
    /// Result table: 1 bound ladder, 2 unknown-state comparison,
    /// 4 known-binary-state comparison, 6 known-marginal comparison.
    #[arg(long)]
    table: Option<u8>,
    /// Sensitivity curve: 1 unknown-state, 2 known-binary-state.
    #[arg(long)]
    figure: Option<u8>,
    #[command(flatten)]
    search: SearchFlags,
    /// Artifact encoding.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Artifact path; defaults to table<N>.<ext> or figure<N>.<ext>.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Search tuning shared by every command that runs the two-stage search.
#[derive(Args, Clone)]
struct SearchFlags {
    /// Stage-1 simplex starts.
    #[arg(long)]
    starts: Option<usize>,
    /// Stage-2 grid spacing.
    #[arg(long)]
    refine_step: Option<f64>,
    /// Stage-2 scan radius per coordinate.
    #[arg(long)]
    refine_radius: Option<f64>,
    /// Start-point sampler seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for stage-1 starts; defaults to ROBUSTAGG_JOBS, then
    /// all cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Halve the number of starts for a quick smoke run.
    #[arg(long)]
    fast: bool,
}

impl SearchFlags {
    fn resolve(&self) -> Result<SearchConfig, CliError> {
        let mut config = SearchConfig::default();
        if let Some(n) = self.starts {
            config.n_starts = n;
        }
        if let Some(step) = self.refine_step {
            config.refine_step = step;
        }
        if let Some(radius) = self.refine_radius {
            config.refine_radius = radius;
        }
        if let Some(seed) = self.seed {
            config.rng_seed = seed;
        }
        match self.jobs {
            Some(jobs) => config.n_workers = jobs,
            None => {
                if let Ok(raw) = std::env::var("ROBUSTAGG_JOBS") {
                    config.n_workers = raw.trim().parse().map_err(|_| {
                        CliError::usage(format!(
                            "ROBUSTAGG_JOBS must be a positive integer, got {raw:?}"
                        ))
                    })?;
                }
            }
        }
        if self.fast {
            config.n_starts = (config.n_starts / 2).max(1);
        }
        Ok(config)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum DomainArg {
    /// All seven environment parameters free.
    Unknown,
    /// States pinned to 0 and 1.
    #[value(name = "known01")]
    Known01,
    /// All parameters free, with the prior mean visible to the rule.
    #[value(name = "known_marginal", alias = "known-marginal")]
    KnownMarginal,
}

impl From<DomainArg> for SearchDomain {
    fn from(arg: DomainArg) -> SearchDomain {
        match arg {
            DomainArg::Unknown => SearchDomain::UnknownState,
            DomainArg::Known01 => SearchDomain::KnownZeroOne,
            DomainArg::KnownMarginal => SearchDomain::KnownMarginalMean,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Md,
}

impl FormatArg {
    fn name(self) -> &'static str {
        match self {
            FormatArg::Json => "json",
            FormatArg::Csv => "csv",
            FormatArg::Md => "md",
        }
    }

    fn extension(self) -> &'static str {
        self.name()
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    /// One-parameter logit rule.
    #[value(name = "log_odds", alias = "log-odds")]
    LogOdds,
    /// Two-parameter logit rule with a prior-mean correction.
    #[value(name = "gen_log_odds", alias = "generalized")]
    GenLogOdds,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum WhichArg {
    /// Unknown-state mixture certificate.
    Unknown,
    /// Known-marginal mixture certificate.
    #[value(name = "known_marginal", alias = "known-marginal")]
    KnownMarginal,
    /// Parity joint structure where no aggregator beats 1/4.
    Xor,
    /// Everything above.
    All,
}

impl WhichArg {
    fn name(self) -> &'static str {
        match self {
            WhichArg::Unknown => "unknown",
            WhichArg::KnownMarginal => "known_marginal",
            WhichArg::Xor => "xor",
            WhichArg::All => "all",
        }
    }
}

// ---------------------------------------------------------------------------
// Shared helpers
// ---------------------------------------------------------------------------

/// Parse `--spec`: inline JSON when the value starts with `{`, otherwise a
/// path to a JSON file. The parsed rule is validated before use.
fn parse_spec(raw: &str) -> Result<AggregatorSpec, CliError> {
    let trimmed = raw.trim();
    let text = if trimmed.starts_with('{') {
        trimmed.to_string()
    } else {
        fs::read_to_string(trimmed)
            .map_err(|err| CliError::usage(format!("cannot read spec file {trimmed}: {err}")))?
    };
    let spec: AggregatorSpec = serde_json::from_str(&text)
        .map_err(|err| CliError::usage(format!("malformed aggregator spec: {err}")))?;
    spec.validate().map_err(|err| CliError::usage(format!("invalid aggregator spec: {err}")))?;
    Ok(spec)
}

/// Load and validate an environment file.
fn parse_env_file(path: &Path) -> Result<BinaryCIEnvironment, CliError> {
    let text = fs::read_to_string(path).map_err(|err| {
        CliError::usage(format!("cannot read environment file {}: {err}", path.display()))
    })?;
    serde_json::from_str(&text)
        .map_err(|err| CliError::usage(format!("invalid environment: {err}")))
}

fn to_json_pretty<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|err| CliError::usage(format!("serialization failed: {err}")))?;
    text.push('\n');
    Ok(text)
}

/// Render `value` with the given number of significant digits, in plain
/// decimal notation (forecasts live in [0, 1], so no exponent is needed).
fn format_significant(value: f64, digits: i32) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    if value == 0.0 {
        return format!("{:.*}", digits as usize, 0.0);
    }
    let magnitude = value.abs().log10().floor() as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    format!("{value:.decimals$}")
}

fn format_table_value(value: f64) -> String {
    format!("{:.*}", TABLE_DECIMALS, value)
}

/// Failure marker safe to embed in a CSV cell.
fn failure_marker(err: &SearchError) -> String {
    format!("FAILED({})", err.to_string().replace(',', ";"))
}

/// The run record written beside every output file: enough to rerun the
/// command and regenerate the artifact bit-for-bit.
#[derive(Serialize)]
struct RunManifest {
    command: String,
    config: serde_json::Value,
    rng_seed: u64,
    artifacts: Vec<String>,
    duration_seconds: f64,
    library_version: String,
}

fn manifest_path(out: &Path) -> PathBuf {
    PathBuf::from(format!("{}.manifest.json", out.display()))
}

fn write_manifest(
    command: &str,
    config: serde_json::Value,
    rng_seed: u64,
    out: &Path,
    started: Instant,
) -> Result<(), CliError> {
    let manifest = RunManifest {
        command: command.to_string(),
        config,
        rng_seed,
        artifacts: vec![out.display().to_string()],
        duration_seconds: started.elapsed().as_secs_f64(),
        library_version: robustagg::VERSION.to_string(),
    };
    let path = manifest_path(out);
    fs::write(&path, to_json_pretty(&manifest)?)
        .map_err(|err| CliError::usage(format!("cannot write {}: {err}", path.display())))?;
    Ok(())
}

/// Deliver `content` to `--out` (plus a manifest) or to stdout.
fn finish_output(
    command: &str,
    config: serde_json::Value,
    rng_seed: u64,
    out: Option<&Path>,
    content: &str,
    started: Instant,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            fs::write(path, content).map_err(|err| {
                CliError::usage(format!("cannot write {}: {err}", path.display()))
            })?;
            write_manifest(command, config, rng_seed, path, started)?;
            eprintln!("wrote {} (+ manifest)", path.display());
        }
        None => print!("{content}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// aggregate
// ---------------------------------------------------------------------------

fn cmd_aggregate(args: AggregateArgs) -> Result<(), CliError> {
    let spec = parse_spec(&args.spec)?;
    for (name, x) in [("x1", args.x1), ("x2", args.x2)] {
        if !(0.0..=1.0).contains(&x) {
            return Err(CliError::usage(format!("{name} = {x} is outside [0, 1]")));
        }
    }
    println!("{}", format_significant(spec.aggregate(args.x1, args.x2), FORECAST_DIGITS));
    Ok(())
}

// ---------------------------------------------------------------------------
// regret
// ---------------------------------------------------------------------------

fn cmd_regret(args: RegretArgs) -> Result<(), CliError> {
    let started = Instant::now();
    let spec = parse_spec(&args.spec)?;
    let env = parse_env_file(&args.env)?;
    let report = expected_regret(&spec, &env);
    let content = match args.format {
        FormatArg::Json => to_json_pretty(&report)?,
        FormatArg::Csv => report.to_csv(),
        FormatArg::Md => {
            return Err(CliError::usage("regret reports support json or csv, not md"))
        }
    };
    eprintln!("expected regret {}", format_table_value(report.total));
    let config = json!({
        "spec": spec,
        "env": args.env.display().to_string(),
        "format": args.format.name(),
        "out": args.out.as_ref().map(|p| p.display().to_string()),
    });
    finish_output("regret", config, 0, args.out.as_deref(), &content, started)
}

// ---------------------------------------------------------------------------
// worst-case
// ---------------------------------------------------------------------------

fn cmd_worst_case(args: WorstCaseArgs) -> Result<(), CliError> {
    let started = Instant::now();
    if args.format != FormatArg::Json {
        return Err(CliError::usage("worst-case emits json only"));
    }
    let spec = parse_spec(&args.spec)?;
    let domain: SearchDomain = args.domain.into();
    let config = args.search.resolve()?;
    let result = worst_case_regret(&spec, domain, &config).map_err(search_error)?;
    eprintln!(
        "worst-case regret {} ({} starts, seed {})",
        format_table_value(result.value),
        config.n_starts,
        config.rng_seed
    );
    let content = to_json_pretty(&result)?;
    let manifest_config = json!({
        "spec": spec,
        "domain": domain,
        "search": config,
        "format": args.format.name(),
        "out": args.out.as_ref().map(|p| p.display().to_string()),
    });
    finish_output(
        "worst-case",
        manifest_config,
        config.rng_seed,
        args.out.as_deref(),
        &content,
        started,
    )
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn cmd_sweep(args: SweepArgs) -> Result<(), CliError> {
    let started = Instant::now();
    if args.family == FamilyArg::GenLogOdds {
        return Err(CliError::usage(
            "sweep varies a single parameter; the generalized family has two \
             (use worst-case with explicit parameters instead)",
        ));
    }
    if !(args.grid > 0.0 && args.grid <= 1.0) {
        return Err(CliError::usage(format!(
            "grid step must lie in (0, 1], got {}",
            args.grid
        )));
    }
    let domain: SearchDomain = args.domain.into();
    let config = args.search.resolve()?;
    let alphas = param_grid(0.0, 1.0, args.grid);
    if alphas.is_empty() {
        return Err(CliError::usage("alpha grid is empty"));
    }
    let points = sweep_alpha(domain, &alphas, &config).map_err(search_error)?;
    for point in &points {
        eprintln!("alpha {} -> {}", point.alpha, format_table_value(point.worst_case_regret));
    }
    let content = match args.format {
        FormatArg::Csv => {
            let mut text = String::from("alpha,worst_case_regret\n");
            for point in &points {
                let _ = writeln!(text, "{},{}", point.alpha, point.worst_case_regret);
            }
            text
        }
        FormatArg::Json => to_json_pretty(&points)?,
        FormatArg::Md => {
            let mut text = String::from("| alpha | worst_case_regret |\n| --- | --- |\n");
            for point in &points {
                let _ = writeln!(text, "| {} | {} |", point.alpha, point.worst_case_regret);
            }
            text
        }
    };
    let manifest_config = json!({
        "domain": domain,
        "family": "log_odds",
        "grid": args.grid,
        "search": config,
        "format": args.format.name(),
        "out": args.out.as_ref().map(|p| p.display().to_string()),
    });
    finish_output("sweep", manifest_config, config.rng_seed, args.out.as_deref(), &content, started)
}

// ---------------------------------------------------------------------------
// certify
// ---------------------------------------------------------------------------

/// Outcome of checking one certificate, rendered as text or JSON.
#[derive(Serialize)]
struct CertifyOutcome {
    name: String,
    passed: bool,
    value: f64,
    expression: String,
    checks: Vec<FieldCheck>,
}

/// Rules thrown at the parity structure; none may beat the 1/4 floor.
fn parity_battery() -> Vec<AggregatorSpec> {
    vec![
        AggregatorSpec::SimpleAverage,
        AggregatorSpec::AveragePrior { mu_policy: MuPolicy::ArithmeticMean },
        AggregatorSpec::AveragePrior { mu_policy: MuPolicy::Known(0.5) },
        AggregatorSpec::HeuristicPrior,
        AggregatorSpec::Kww { lambda: 0.8, mu_policy: MuPolicy::ArithmeticMean },
        AggregatorSpec::Kww { lambda: 1.0, mu_policy: MuPolicy::Known(0.5) },
        AggregatorSpec::LogOdds { alpha: 0.585 },
        AggregatorSpec::LogOdds { alpha: 0.5168 },
        AggregatorSpec::GenLogOdds { alpha: 0.656089, gamma: 0.498268, mu: 0.5 },
        AggregatorSpec::PrecisionWeighted,
        AggregatorSpec::Constant { c: 0.5 },
        AggregatorSpec::FollowExpert2,
    ]
}

fn check_mixture_certificate(
    name: &str,
    cert: &MixtureCertificate,
    tol: f64,
) -> Result<CertifyOutcome, CliError> {
    let checks = match robustagg::verify_certificate(cert, tol) {
        Ok(report) => report.checks,
        Err(CertificateError::CertificateMismatch { report, .. }) => report.checks,
        Err(other) => return Err(CliError::verification(other.to_string())),
    };
    let passed = checks.iter().all(|c| c.passed);
    Ok(CertifyOutcome {
        name: name.to_string(),
        passed,
        value: cert.closed_form_value.value,
        expression: cert.closed_form_value.expression.clone(),
        checks,
    })
}

fn check_parity_certificate(tol: f64) -> CertifyOutcome {
    let structure = build_xor_certificate();
    let floor = structure.expected_regret(&AggregatorSpec::Constant { c: 0.5 });
    let exact = FieldCheck {
        field: "constant_half_floor".to_string(),
        max_deviation: (floor - 0.25).abs(),
        tolerance: 0.0,
        passed: floor == 0.25,
    };
    let min_battery = parity_battery()
        .iter()
        .map(|spec| structure.expected_regret(spec))
        .fold(f64::INFINITY, f64::min);
    let shortfall = (0.25 - min_battery).max(0.0);
    let battery = FieldCheck {
        field: "rule_battery_floor".to_string(),
        max_deviation: shortfall,
        tolerance: tol,
        passed: min_battery >= 0.25 - tol,
    };
    let passed = exact.passed && battery.passed;
    CertifyOutcome {
        name: "parity_joint".to_string(),
        passed,
        value: floor,
        expression: "1/4".to_string(),
        checks: vec![exact, battery],
    }
}

fn render_certify_text(outcomes: &[CertifyOutcome]) -> String {
    let mut text = String::new();
    for outcome in outcomes {
        let verdict = if outcome.passed { "PASS" } else { "FAIL" };
        let value = if outcome.name == "parity_joint" {
            // The parity floor is exact in binary floating point.
            format!("{}", outcome.value)
        } else {
            format_table_value(outcome.value)
        };
        let _ = writeln!(
            text,
            "{}: {}  value {} = {}",
            outcome.name, verdict, outcome.expression, value
        );
        for check in &outcome.checks {
            let _ = writeln!(
                text,
                "  {:<22} max deviation {:9.2e}  tol {:8.1e}  {}",
                check.field,
                check.max_deviation,
                check.tolerance,
                if check.passed { "ok" } else { "FAIL" }
            );
        }
    }
    text
}

fn cmd_certify(args: CertifyArgs) -> Result<(), CliError> {
    let started = Instant::now();
    if !(args.tol > 0.0) {
        return Err(CliError::usage(format!("tolerance must be positive, got {}", args.tol)));
    }
    let mut outcomes = Vec::new();
    if matches!(args.which, WhichArg::Unknown | WhichArg::All) {
        outcomes.push(check_mixture_certificate(
            "unknown_state",
            &build_unknown_state_certificate(),
            args.tol,
        )?);
    }
    if matches!(args.which, WhichArg::KnownMarginal | WhichArg::All) {
        outcomes.push(check_mixture_certificate(
            "known_marginal_mean",
            &build_known_marginal_certificate(),
            args.tol,
        )?);
    }
    if matches!(args.which, WhichArg::Xor | WhichArg::All) {
        outcomes.push(check_parity_certificate(args.tol));
    }

    let content = match args.format {
        None => render_certify_text(&outcomes),
        Some(FormatArg::Json) => to_json_pretty(&outcomes)?,
        Some(other) => {
            return Err(CliError::usage(format!(
                "certify reports support json or text, not {}",
                other.name()
            )))
        }
    };
    let manifest_config = json!({
        "which": args.which.name(),
        "tol": args.tol,
        "format": args.format.map(FormatArg::name),
        "out": args.out.as_ref().map(|p| p.display().to_string()),
    });
    finish_output("certify", manifest_config, 0, args.out.as_deref(), &content, started)?;

    let failed: Vec<&str> =
        outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::verification(format!(
            "certificate verification failed: {}",
            failed.join(", ")
        )))
    }
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

/// Alpha grid tabulating the unknown-state sensitivity curve.
const SENSITIVITY_ALPHAS_UNKNOWN: [f64; 27] = [
    0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.53, 0.55, 0.57, 0.58,
    0.585, 0.59, 0.60, 0.63, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 1.0,
];

/// Alpha grid tabulating the known-binary-state sensitivity curve.
const SENSITIVITY_ALPHAS_KNOWN01: [f64; 28] = [
    0.0, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.48, 0.50, 0.51, 0.516, 0.517,
    0.518, 0.52, 0.53, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 1.0,
];

struct ComparisonRow {
    aggregator: &'static str,
    parameter: &'static str,
    spec: AggregatorSpec,
}

/// The comparison-table compositions. Rows that are bare citations of other
/// work (with no formula to run) are omitted; every row here is computed.
fn comparison_rows(table: u8) -> (SearchDomain, Vec<ComparisonRow>) {
    match table {
        2 => (
            SearchDomain::UnknownState,
            vec![
                ComparisonRow {
                    aggregator: "simple_average",
                    parameter: "-",
                    spec: AggregatorSpec::SimpleAverage,
                },
                ComparisonRow {
                    aggregator: "average_prior",
                    parameter: "mu_hat=(x1+x2)/2",
                    spec: AggregatorSpec::AveragePrior { mu_policy: MuPolicy::ArithmeticMean },
                },
                ComparisonRow {
                    aggregator: "heuristic_prior",
                    parameter: "mu_hat=0.49(x1+x2)+0.02*I(x1+x2>1)",
                    spec: AggregatorSpec::HeuristicPrior,
                },
                ComparisonRow {
                    aggregator: "product_rule",
                    parameter: "lambda=0.8 mu_hat=(x1+x2)/2",
                    spec: AggregatorSpec::Kww { lambda: 0.8, mu_policy: MuPolicy::ArithmeticMean },
                },
                ComparisonRow {
                    aggregator: "log_odds",
                    parameter: "alpha=0.585",
                    spec: AggregatorSpec::LogOdds { alpha: 0.585 },
                },
            ],
        ),
        4 => (
            SearchDomain::KnownZeroOne,
            vec![
                ComparisonRow {
                    aggregator: "simple_average",
                    parameter: "-",
                    spec: AggregatorSpec::SimpleAverage,
                },
                ComparisonRow {
                    aggregator: "average_prior",
                    parameter: "mu_hat=(x1+x2)/2",
                    spec: AggregatorSpec::AveragePrior { mu_policy: MuPolicy::ArithmeticMean },
                },
                ComparisonRow {
                    aggregator: "heuristic_prior",
                    parameter: "mu_hat=0.49(x1+x2)+0.02*I(x1+x2>1)",
                    spec: AggregatorSpec::HeuristicPrior,
                },
                ComparisonRow {
                    aggregator: "product_rule",
                    parameter: "lambda=1 mu_hat=(x1+x2)/2",
                    spec: AggregatorSpec::Kww { lambda: 1.0, mu_policy: MuPolicy::ArithmeticMean },
                },
                ComparisonRow {
                    aggregator: "log_odds",
                    parameter: "alpha=0.5168",
                    spec: AggregatorSpec::LogOdds { alpha: 0.5168 },
                },
            ],
        ),
        6 => (
            SearchDomain::KnownMarginalMean,
            vec![
                ComparisonRow {
                    aggregator: "prior_mean",
                    parameter: "mu_hat=mu",
                    spec: AggregatorSpec::GenLogOdds { alpha: 0.0, gamma: -1.0, mu: 0.5 },
                },
                ComparisonRow {
                    aggregator: "standard_bayesian",
                    parameter: "mu_hat=mu",
                    spec: AggregatorSpec::AveragePrior { mu_policy: MuPolicy::Known(0.5) },
                },
                ComparisonRow {
                    aggregator: "product_rule",
                    parameter: "lambda=0.8 mu_hat=mu",
                    spec: AggregatorSpec::Kww { lambda: 0.8, mu_policy: MuPolicy::Known(0.5) },
                },
                ComparisonRow {
                    aggregator: "gen_log_odds",
                    parameter: "alpha=0.656089 gamma=0.498268 mu_hat=mu",
                    spec: AggregatorSpec::GenLogOdds {
                        alpha: 0.656089,
                        gamma: 0.498268,
                        mu: 0.5,
                    },
                },
            ],
        ),
        _ => unreachable!("validated before dispatch"),
    }
}

/// Incrementally written artifact: rows are flushed as they are computed, so
/// a failed search still leaves the finished rows (plus a marker) on disk.
struct ArtifactSink {
    file: fs::File,
    path: PathBuf,
}

impl ArtifactSink {
    fn create(path: &Path) -> Result<ArtifactSink, CliError> {
        let file = fs::File::create(path).map_err(|err| {
            CliError::usage(format!("cannot write {}: {err}", path.display()))
        })?;
        Ok(ArtifactSink { file, path: path.to_path_buf() })
    }

    fn line(&mut self, line: &str) -> Result<(), CliError> {
        writeln!(self.file, "{line}").and_then(|()| self.file.flush()).map_err(|err| {
            CliError::usage(format!("cannot write {}: {err}", self.path.display()))
        })
    }
}

/// One failed row: the marker written into the artifact plus the error to
/// propagate once the remaining rows have run.
struct RowFailure {
    error: CliError,
}

fn run_comparison_table(
    table: u8,
    format: FormatArg,
    sink: &mut ArtifactSink,
    config: &SearchConfig,
) -> Result<Vec<RowFailure>, CliError> {
    let (domain, rows) = comparison_rows(table);
    match format {
        FormatArg::Csv => sink.line("aggregator,parameter,worst_case_regret")?,
        FormatArg::Md => {
            sink.line("| aggregator | parameter | worst_case_regret |")?;
            sink.line("| --- | --- | --- |")?;
        }
        FormatArg::Json => unreachable!("rejected before dispatch"),
    }
    let mut failures = Vec::new();
    for row in rows {
        let cell = match worst_case_regret(&row.spec, domain, config) {
            Ok(result) => format_table_value(result.value),
            Err(err) => {
                let marker = failure_marker(&err);
                failures.push(RowFailure { error: search_error(err) });
                marker
            }
        };
        eprintln!("{} {} -> {}", row.aggregator, row.parameter, cell);
        match format {
            FormatArg::Csv => sink.line(&format!("{},{},{}", row.aggregator, row.parameter, cell))?,
            FormatArg::Md => {
                sink.line(&format!("| {} | {} | {} |", row.aggregator, row.parameter, cell))?
            }
            FormatArg::Json => unreachable!(),
        }
    }
    Ok(failures)
}

fn bound_source_name(source: robustagg::BoundSource) -> &'static str {
    match source {
        robustagg::BoundSource::Certificate => "certificate",
        robustagg::BoundSource::Reference => "reference",
        robustagg::BoundSource::Search => "search",
    }
}

fn render_bound_ladder(ladder: &BoundLadder, format: FormatArg, sink: &mut ArtifactSink) -> Result<(), CliError> {
    match format {
        FormatArg::Csv => {
            sink.line("setting,lower_bound,lower_expression,lower_source,upper_bound,upper_source")?;
            for row in &ladder.rows {
                sink.line(&format!(
                    "{},{},{},{},{},{}",
                    row.setting,
                    format_table_value(row.lower_bound.value),
                    row.lower_bound.expression,
                    bound_source_name(row.lower_source),
                    format_table_value(row.upper_bound),
                    bound_source_name(row.upper_source),
                ))?;
            }
            sink.line(&format!(
                "# separation: {} (the unknown-state floor exceeds the known-binary-state ceiling)",
                ladder.separation
            ))?;
        }
        FormatArg::Md => {
            sink.line("| setting | lower bound | expression | source | upper bound | source |")?;
            sink.line("| --- | --- | --- | --- | --- | --- |")?;
            for row in &ladder.rows {
                sink.line(&format!(
                    "| {} | {} | {} | {} | {} | {} |",
                    row.setting,
                    format_table_value(row.lower_bound.value),
                    row.lower_bound.expression,
                    bound_source_name(row.lower_source),
                    format_table_value(row.upper_bound),
                    bound_source_name(row.upper_source),
                ))?;
            }
            sink.line("")?;
            sink.line(&format!(
                "Separation: {} (the unknown-state floor exceeds the known-binary-state ceiling).",
                ladder.separation
            ))?;
        }
        FormatArg::Json => unreachable!("rejected before dispatch"),
    }
    Ok(())
}

fn run_bound_ladder(
    format: FormatArg,
    sink: &mut ArtifactSink,
    config: &SearchConfig,
) -> Result<Vec<RowFailure>, CliError> {
    let searches: [(&str, AggregatorSpec, SearchDomain); 3] = [
        ("unknown_state", AggregatorSpec::LogOdds { alpha: 0.585 }, SearchDomain::UnknownState),
        ("known_zero_one", AggregatorSpec::LogOdds { alpha: 0.5168 }, SearchDomain::KnownZeroOne),
        (
            "known_marginal_mean",
            AggregatorSpec::GenLogOdds { alpha: 0.656089, gamma: 0.498268, mu: 0.5 },
            SearchDomain::KnownMarginalMean,
        ),
    ];
    let mut values = Vec::new();
    let mut failures = Vec::new();
    for (setting, spec, domain) in searches {
        match worst_case_regret(&spec, domain, config) {
            Ok(result) => {
                eprintln!("{setting} upper bound {}", format_table_value(result.value));
                values.push(result.value);
            }
            Err(err) => {
                sink.line(&format!("{} at {setting}", failure_marker(&err)))?;
                failures.push(RowFailure { error: search_error(err) });
            }
        }
    }
    if !failures.is_empty() {
        return Ok(failures);
    }
    let upper_bounds = UpperBounds {
        unknown_state: values[0],
        known_zero_one: values[1],
        known_marginal_mean: values[2],
    };
    let ladder = lower_bound_gap_report(&upper_bounds)
        .map_err(|err| CliError::verification(err.to_string()))?;
    render_bound_ladder(&ladder, format, sink)?;
    Ok(Vec::new())
}

fn run_sensitivity_curve(
    figure: u8,
    format: FormatArg,
    sink: &mut ArtifactSink,
    config: &SearchConfig,
) -> Result<Vec<RowFailure>, CliError> {
    let (domain, alphas): (SearchDomain, &[f64]) = match figure {
        1 => (SearchDomain::UnknownState, &SENSITIVITY_ALPHAS_UNKNOWN),
        2 => (SearchDomain::KnownZeroOne, &SENSITIVITY_ALPHAS_KNOWN01),
        _ => unreachable!("validated before dispatch"),
    };
    match format {
        FormatArg::Csv => sink.line("alpha,worst_case_regret")?,
        FormatArg::Md => {
            sink.line("| alpha | worst_case_regret |")?;
            sink.line("| --- | --- |")?;
        }
        FormatArg::Json => unreachable!("rejected before dispatch"),
    }
    let mut failures = Vec::new();
    for &alpha in alphas {
        let cell = match worst_case_regret(&AggregatorSpec::LogOdds { alpha }, domain, config) {
            Ok(result) => format_table_value(result.value),
            Err(err) => {
                let marker = failure_marker(&err);
                failures.push(RowFailure { error: search_error(err) });
                marker
            }
        };
        eprintln!("alpha {alpha} -> {cell}");
        match format {
            FormatArg::Csv => sink.line(&format!("{alpha},{cell}"))?,
            FormatArg::Md => sink.line(&format!("| {alpha} | {cell} |"))?,
            FormatArg::Json => unreachable!(),
        }
    }
    Ok(failures)
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<(), CliError> {
    let started = Instant::now();
    if args.format == FormatArg::Json {
        return Err(CliError::usage("reproduction artifacts are csv or md"));
    }
    match (args.table, args.figure) {
        (Some(t), None) if ![1, 2, 4, 6].contains(&t) => {
            return Err(CliError::usage(format!("no such table: {t} (expected 1, 2, 4, or 6)")))
        }
        (None, Some(f)) if ![1, 2].contains(&f) => {
            return Err(CliError::usage(format!("no such figure: {f} (expected 1 or 2)")))
        }
        _ => {}
    }
    let config = args.search.resolve()?;
    let out = args.out.clone().unwrap_or_else(|| {
        let stem = match (args.table, args.figure) {
            (Some(t), None) => format!("table{t}"),
            (None, Some(f)) => format!("figure{f}"),
            _ => unreachable!("clap group guarantees exactly one target"),
        };
        PathBuf::from(format!("{stem}.{}", args.format.extension()))
    });

    let mut sink = ArtifactSink::create(&out)?;
    let failures = match (args.table, args.figure) {
        (Some(1), None) => run_bound_ladder(args.format, &mut sink, &config)?,
        (Some(t), None) => run_comparison_table(t, args.format, &mut sink, &config)?,
        (None, Some(f)) => run_sensitivity_curve(f, args.format, &mut sink, &config)?,
        _ => unreachable!("clap group guarantees exactly one target"),
    };

    let manifest_config = json!({
        "table": args.table,
        "figure": args.figure,
        "search": config,
        "format": args.format.name(),
        "out": out.display().to_string(),
    });
    write_manifest("reproduce", manifest_config, config.rng_seed, &out, started)?;
    eprintln!("wrote {} (+ manifest)", out.display());

    match failures.into_iter().next() {
        None => Ok(()),
        Some(failure) => Err(CliError {
            code: failure.error.code,
            message: format!("{} (partial results flushed to {})", failure.error.message, out.display()),
        }),
    }
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Aggregate(args) => cmd_aggregate(args),
        Command::Regret(args) => cmd_regret(args),
        Command::WorstCase(args) => cmd_worst_case(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Certify(args) => cmd_certify(args),
        Command::Reproduce(args) => cmd_reproduce(args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version render on stdout and exit 0; everything
            // else is a usage error.
            let code = if err.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message);
            ExitCode::from(err.code)
        }
    }
}
