//! `ordloc` command line: point estimates, simulated and exact risk
//! tables, paired-data analysis, and the verification battery.
//!
//! Every output opens with a two-line comment header (`# ordloc ...` and
//! `# config: {json}`) holding the fully resolved [`RunConfig`]; JSON
//! outputs carry the same object under `config`.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numeric failure,
//! 3 verification failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ordloc::data::{self, PairedDataset, Summary};
use ordloc::estimators::{
    blee, bz_absolute, bz_absolute_shift, bz_squared, default_t_grid, isotonic, restricted_mle,
    PsiEstimator, RightTail,
};
use ordloc::model::{normal_density, Loss, LossKind, NormalLocationModel};
use ordloc::risk::{dominance_report, exact_report, DEFAULT_EXACT_TOL, DEFAULT_REPLICATIONS};
use ordloc::verify::{self, VerifyConfig};
use serde_json::json;

pub use config::{body, BrokenLoss, Format, LambdaGrid, LossArg, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_VERIFY_TOL: f64 = 1e-6;
/// Plug-in values used by `analyze` when none are given.
pub const DEFAULT_PLUGIN_SIGMA2: f64 = 0.418;
pub const DEFAULT_PLUGIN_RHO: f64 = 0.626;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] ordloc::Error),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{failed} verification check(s) failed")]
    Verification { failed: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Verification { .. } => EXIT_VERIFY,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ordloc",
    version,
    about = "Estimation of ordered location parameters (θ1 ≤ θ2)"
)]
pub struct Cli {
    /// Worker threads for parallel stages (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point estimates for one observation (x1, x2).
    Estimate(EstimateArgs),
    /// Monte Carlo risk table over a λ grid.
    Simulate(GridArgs),
    /// Quadrature risk table over a λ grid.
    Exact(GridArgs),
    /// Summary statistics and estimates for a paired CSV file.
    Analyze(AnalyzeArgs),
    /// Numeric verification battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Common standard deviation σ.
    #[arg(long, conflicts_with = "sigma2")]
    pub sigma: Option<f64>,
    /// Common variance σ².
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Correlation ρ in (-1, 1).
    #[arg(long, allow_hyphen_values = true)]
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub x1: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub x2: f64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Loss for the boundary estimator; both when omitted.
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    /// Comma list from blee, mle, bz, isotonic:<alpha>.
    #[arg(long, default_value = "blee,mle,bz")]
    pub estimators: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value_t = LossArg::Squared)]
    pub loss: LossArg,
    /// Comma list from blee, mle, bz, isotonic:<alpha>.
    #[arg(long, default_value = "blee,mle,bz")]
    pub estimators: String,
    /// Default 0.
    #[arg(long)]
    pub lambda_min: Option<f64>,
    /// Default 3τ.
    #[arg(long)]
    pub lambda_max: Option<f64>,
    /// Default τ/8.
    #[arg(long)]
    pub lambda_step: Option<f64>,
    /// Replications per grid point (simulate).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Absolute quadrature tolerance (exact).
    #[arg(long)]
    pub tol: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// CSV with header group,x1,x2.
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Restrict to one loss; both when omitted.
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    /// Agreement tolerance between closed forms and root solves.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Reduced grids.
    #[arg(long)]
    pub quick: bool,
    /// Add a loss that violates the loss assumptions to the battery.
    #[arg(long, value_enum)]
    pub inject_loss: Option<BrokenLoss>,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Parses `args` (program name first), runs the command, and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli) {
        Ok(out) => emit(&out, stdout, stderr, EXIT_OK),
        Err((CliError::Verification { failed }, Some(out))) => {
            let code = emit(&out, stdout, stderr, EXIT_VERIFY);
            let _ = writeln!(stderr, "error: {failed} verification check(s) failed");
            code
        }
        Err((e, _)) => {
            let _ = writeln!(stderr, "error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                let _ = writeln!(stderr, "  caused by: {s}");
                src = s.source();
            }
            e.exit_code()
        }
    }
}

/// A finished run: the resolved config and the rendered output.
#[derive(Debug, Clone)]
pub struct Output {
    pub config: RunConfig,
    pub text: String,
}

fn emit(out: &Output, stdout: &mut dyn Write, stderr: &mut dyn Write, code: i32) -> i32 {
    let res = match &out.config.output {
        Some(path) => std::fs::write(path, &out.text),
        None => stdout.write_all(out.text.as_bytes()),
    };
    match res {
        Ok(()) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: cannot write output: {e}");
            EXIT_USAGE
        }
    }
}

type Failure = (CliError, Option<Box<Output>>);

fn execute(cli: Cli) -> Result<Output, Failure> {
    let threads = cli.threads;
    let job = move || match cli.command {
        Command::Estimate(a) => cmd_estimate(&a).map_err(|e| (e, None)),
        Command::Simulate(a) => cmd_grid(&a, "simulate").map_err(|e| (e, None)),
        Command::Exact(a) => cmd_grid(&a, "exact").map_err(|e| (e, None)),
        Command::Analyze(a) => cmd_analyze(&a).map_err(|e| (e, None)),
        Command::Verify(a) => cmd_verify(&a),
    };
    match threads {
        None => job(),
        Some(0) => Err((CliError::Usage("--threads must be at least 1".into()), None)),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| {
                    (
                        CliError::Usage(format!("cannot start {n} threads: {e}")),
                        None,
                    )
                })?;
            pool.install(job)
        }
    }
}

fn resolve_model(
    m: &ModelArgs,
    default_sigma: f64,
    default_rho: f64,
) -> Result<NormalLocationModel, CliError> {
    let rho = m.rho.unwrap_or(default_rho);
    let model = match (m.sigma, m.sigma2) {
        (Some(s), _) => NormalLocationModel::new(s, rho),
        (None, Some(v)) => NormalLocationModel::from_variance(v, rho),
        (None, None) => NormalLocationModel::new(default_sigma, rho),
    };
    model.map_err(|e| CliError::Usage(e.to_string()))
}

fn resolve_format(
    f: Option<Format>,
    default: Format,
    allowed: &[Format],
    command: &str,
) -> Result<Format, CliError> {
    let f = f.unwrap_or(default);
    if !allowed.contains(&f) {
        let names: Vec<String> = allowed.iter().map(Format::to_string).collect();
        return Err(CliError::Usage(format!(
            "{command} writes {}, not {f}",
            names.join(" or ")
        )));
    }
    Ok(f)
}

fn split_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(String::from)
        .collect()
}

/// Builds the named estimators; `bz` follows `loss`.
pub fn build_estimators(
    names: &[String],
    model: NormalLocationModel,
    loss: LossKind,
) -> Result<Vec<PsiEstimator>, CliError> {
    if names.is_empty() {
        return Err(CliError::Usage("the estimator list is empty".into()));
    }
    let mut out: Vec<PsiEstimator> = Vec::with_capacity(names.len());
    for name in names {
        let e = match name.as_str() {
            "blee" => blee(),
            "mle" => restricted_mle(),
            "bz" => match loss {
                LossKind::Absolute => {
                    bz_absolute(model).tabulate(&default_t_grid(model.tau()), RightTail::Zero)?
                }
                _ => bz_squared(model),
            },
            other => match other.strip_prefix("isotonic:") {
                Some(a) => {
                    let alpha: f64 = a.parse().map_err(|_| {
                        CliError::Usage(format!("bad alpha in estimator `{other}`"))
                    })?;
                    isotonic(alpha).map_err(|e| CliError::Usage(e.to_string()))?
                }
                None => {
                    return Err(CliError::Usage(format!(
                        "unknown estimator `{other}` (expected blee, mle, bz, isotonic:<alpha>)"
                    )))
                }
            },
        };
        if out.iter().any(|x| x.name() == e.name()) {
            return Err(CliError::Usage(format!("estimator `{name}` listed twice")));
        }
        out.push(e);
    }
    Ok(out)
}

/// Up to six decimals, trailing zeros dropped.
pub fn fmt_num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn fmt_pair((a, b): (f64, f64)) -> String {
    format!("({}, {})", fmt_num(a), fmt_num(b))
}

struct Labeled {
    label: String,
    pair: (f64, f64),
}

/// `bz` under both losses when `loss` is `None`.
fn point_estimates(
    names: &[String],
    model: NormalLocationModel,
    loss: Option<LossArg>,
    x1: f64,
    x2: f64,
) -> Result<Vec<Labeled>, CliError> {
    let mut out = Vec::new();
    for name in names {
        if name == "bz" {
            let losses = match loss {
                Some(l) => vec![l],
                None => vec![LossArg::Squared, LossArg::Absolute],
            };
            for l in losses {
                let pair = match l {
                    LossArg::Squared => bz_squared(model).estimate(x1, x2),
                    LossArg::Absolute => {
                        let c = bz_absolute_shift(model, x2 - x1)?;
                        (x1 - c, x2 + c)
                    }
                };
                out.push(Labeled {
                    label: format!("bz-{l}"),
                    pair,
                });
            }
        } else {
            let e =
                build_estimators(std::slice::from_ref(name), model, LossKind::Squared)?.remove(0);
            out.push(Labeled {
                label: e.name().to_string(),
                pair: e.estimate(x1, x2),
            });
        }
    }
    Ok(out)
}

fn estimates_csv(rows: &[Labeled]) -> String {
    let mut s = String::from("estimator,theta1,theta2\n");
    for r in rows {
        s.push_str(&format!("{},{},{}\n", r.label, r.pair.0, r.pair.1));
    }
    s
}

fn estimates_json(rows: &[Labeled]) -> serde_json::Value {
    rows.iter()
        .map(|r| json!({"estimator": r.label, "theta1": r.pair.0, "theta2": r.pair.1}))
        .collect()
}

fn cmd_estimate(a: &EstimateArgs) -> Result<Output, CliError> {
    if !(a.x1.is_finite() && a.x2.is_finite()) {
        return Err(CliError::Usage("--x1 and --x2 must be finite".into()));
    }
    let model = resolve_model(&a.model, 1.0, 0.0)?;
    let names = split_list(&a.estimators);
    let format = resolve_format(
        a.out.format,
        Format::Text,
        &[Format::Text, Format::Csv, Format::Json],
        "estimate",
    )?;
    let config = RunConfig {
        command: "estimate".into(),
        sigma: model.sigma(),
        rho: model.rho(),
        loss: a.loss,
        estimators: names.clone(),
        lambda: None,
        n: None,
        seed: None,
        x1: Some(a.x1),
        x2: Some(a.x2),
        input: None,
        output: a.out.output.clone(),
        format,
        tol: None,
        quick: false,
        inject_loss: None,
    };
    if names.is_empty() {
        return Err(CliError::Usage("the estimator list is empty".into()));
    }
    let rows = point_estimates(&names, model, a.loss, a.x1, a.x2)?;
    let text = match format {
        Format::Json => pretty(json!({"config": config, "estimates": estimates_json(&rows)})),
        Format::Csv => config.header() + &estimates_csv(&rows),
        Format::Text => {
            let mut s = config.header();
            for r in &rows {
                s.push_str(&format!("{:<16}{}\n", r.label, fmt_pair(r.pair)));
            }
            s
        }
    };
    Ok(Output { config, text })
}

fn pretty(v: serde_json::Value) -> String {
    serde_json::to_string_pretty(&v).expect("json renders") + "\n"
}

fn cmd_grid(a: &GridArgs, command: &str) -> Result<Output, CliError> {
    let simulate = command == "simulate";
    let model = resolve_model(&a.model, 1.0, 0.0)?;
    let tau = model.tau();
    let grid = LambdaGrid {
        min: a.lambda_min.unwrap_or(0.0),
        max: a.lambda_max.unwrap_or(3.0 * tau),
        step: a.lambda_step.unwrap_or(tau / 8.0),
    };
    let lambdas = grid.points()?;
    let names = split_list(&a.estimators);
    let format = resolve_format(
        a.out.format,
        Format::Csv,
        &[Format::Csv, Format::Json],
        command,
    )?;
    let n = if simulate {
        Some(a.n.unwrap_or(DEFAULT_REPLICATIONS))
    } else {
        None
    };
    if let Some(n) = n {
        if n < 2 {
            return Err(CliError::Usage(format!("--n must be at least 2, got {n}")));
        }
    }
    let tol = if simulate {
        None
    } else {
        Some(a.tol.unwrap_or(DEFAULT_EXACT_TOL))
    };
    if let Some(t) = tol {
        if !(t > 0.0) {
            return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
        }
    }
    let config = RunConfig {
        command: command.into(),
        sigma: model.sigma(),
        rho: model.rho(),
        loss: Some(a.loss),
        estimators: names.clone(),
        lambda: Some(grid),
        n,
        seed: if simulate {
            Some(a.seed.unwrap_or(DEFAULT_SEED))
        } else {
            None
        },
        x1: None,
        x2: None,
        input: None,
        output: a.out.output.clone(),
        format,
        tol,
        quick: false,
        inject_loss: None,
    };
    let estimators = build_estimators(&names, model, a.loss.kind())?;
    let loss = Loss::from_kind(a.loss.kind())?;

    let text = if simulate {
        let rows = dominance_report(
            model,
            &estimators,
            &loss,
            &lambdas,
            n.unwrap(),
            config.seed.unwrap(),
        )?;
        match format {
            Format::Json => pretty(json!({"config": config, "rows": rows.iter().map(|r| json!({
                "lambda": r.risk.lambda, "estimator": r.estimator, "loss": r.risk.loss, "risk": r.risk.mean,
                "std_error": r.risk.std_error, "n": r.risk.n, "seed": r.risk.seed,
            })).collect::<Vec<_>>()})),
            _ => {
                let mut s = config.header();
                s.push_str("lambda,estimator,loss,risk,std_error,n,seed\n");
                for r in &rows {
                    s.push_str(&format!(
                        "{},{},{},{},{},{},{}\n",
                        r.risk.lambda,
                        r.estimator,
                        r.risk.loss,
                        r.risk.mean,
                        r.risk.std_error,
                        r.risk.n,
                        r.risk.seed
                    ));
                }
                s
            }
        }
    } else {
        let density = normal_density(model);
        let rows = exact_report(&density, &estimators, &loss, &lambdas, tol.unwrap())?;
        match format {
            Format::Json => pretty(
                json!({"config": config, "rows": rows.iter().map(|(l, e, r)| json!({
                "lambda": l, "estimator": e, "loss": loss.name(), "risk": r,
            })).collect::<Vec<_>>()}),
            ),
            _ => {
                let mut s = config.header();
                s.push_str("lambda,estimator,loss,risk\n");
                for (l, e, r) in &rows {
                    s.push_str(&format!("{l},{e},{},{r}\n", loss.name()));
                }
                s
            }
        }
    };
    Ok(Output { config, text })
}

/// Published estimates for the bundled 13-child sample at the default plug-ins.
const PUBLISHED_TABLE2: [(&str, (f64, f64)); 3] = [
    ("mle", (22.86, 22.86)),
    ("bz-squared", (22.77, 22.96)),
    ("bz-absolute", (22.71, 23.03)),
];

fn published_reference(
    ds: &PairedDataset,
    model: NormalLocationModel,
) -> Option<&'static [(&'static str, (f64, f64))]> {
    let default = (model.sigma() - DEFAULT_PLUGIN_SIGMA2.sqrt()).abs() < 1e-12
        && model.rho() == DEFAULT_PLUGIN_RHO;
    (default && ds.rows == data::table2().rows).then_some(&PUBLISHED_TABLE2[..])
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<Output, CliError> {
    let model = resolve_model(&a.model, DEFAULT_PLUGIN_SIGMA2.sqrt(), DEFAULT_PLUGIN_RHO)?;
    let format = resolve_format(
        a.out.format,
        Format::Text,
        &[Format::Text, Format::Csv, Format::Json],
        "analyze",
    )?;
    let config = RunConfig {
        command: "analyze".into(),
        sigma: model.sigma(),
        rho: model.rho(),
        loss: None,
        estimators: Vec::new(),
        lambda: None,
        n: None,
        seed: None,
        x1: None,
        x2: None,
        input: Some(a.input.clone()),
        output: a.out.output.clone(),
        format,
        tol: None,
        quick: false,
        inject_loss: None,
    };
    let ds = data::load_csv(&a.input)?;
    let summary = data::summarize(&ds)?;
    let names: Vec<String> = ["blee", "mle", "bz"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = point_estimates(&names, model, None, summary.mean1, summary.mean2)?;
    let reference = published_reference(&ds, model);
    let text = match format {
        Format::Json => {
            let mut v =
                json!({"config": config, "summary": summary, "estimates": estimates_json(&rows)});
            if let Some(r) = reference {
                v["published"] = r
                    .iter()
                    .map(|(l, p)| json!({"estimator": l, "theta1": p.0, "theta2": p.1}))
                    .collect();
            }
            pretty(v)
        }
        Format::Csv => {
            let mut s = config.header();
            s.push_str(&format!(
                "# summary: {}\n",
                serde_json::to_string(&summary).expect("summary serializes")
            ));
            s + &estimates_csv(&rows)
        }
        Format::Text => config.header() + &analyze_text(&summary, model, &rows, reference),
    };
    Ok(Output { config, text })
}

fn analyze_text(
    s: &Summary,
    model: NormalLocationModel,
    rows: &[Labeled],
    reference: Option<&[(&str, (f64, f64))]>,
) -> String {
    let mut out = String::new();
    let mut line = |k: &str, v: String| out.push_str(&format!("{k:<16}{v}\n"));
    line("n", s.n.to_string());
    line("means", fmt_pair((s.mean1, s.mean2)));
    line("variances", fmt_pair((s.var1, s.var2)));
    line("pooled variance", fmt_num(s.pooled_variance));
    line(
        "correlation",
        s.correlation
            .map_or_else(|| "undefined (constant column)".into(), fmt_num),
    );
    line(
        "plug-in",
        format!(
            "sigma2 = {}, rho = {}, tau = {}",
            fmt_num(model.sigma() * model.sigma()),
            fmt_num(model.rho()),
            fmt_num(model.tau())
        ),
    );
    for r in rows {
        let mut v = fmt_pair(r.pair);
        if let Some((_, p)) = reference.and_then(|refs| refs.iter().find(|(l, _)| *l == r.label)) {
            let diff = (r.pair.0 - p.0).abs().max((r.pair.1 - p.1).abs());
            v.push_str(&format!(
                "  published {}, max |diff| {}",
                fmt_pair(*p),
                fmt_num(diff)
            ));
        }
        line(&r.label, v);
    }
    out
}

fn cmd_verify(a: &VerifyArgs) -> Result<Output, Failure> {
    let inner = || -> Result<(RunConfig, verify::VerifyReport), CliError> {
        let model = resolve_model(&a.model, 1.0, 0.0)?;
        let format = resolve_format(
            a.out.format,
            Format::Text,
            &[Format::Text, Format::Json],
            "verify",
        )?;
        let tol = a.tol.unwrap_or(DEFAULT_VERIFY_TOL);
        if !(tol > 0.0) {
            return Err(CliError::Usage(format!(
                "--tol must be positive, got {tol}"
            )));
        }
        let config = RunConfig {
            command: "verify".into(),
            sigma: model.sigma(),
            rho: model.rho(),
            loss: a.loss,
            estimators: Vec::new(),
            lambda: None,
            n: None,
            seed: None,
            x1: None,
            x2: None,
            input: None,
            output: a.out.output.clone(),
            format,
            tol: Some(tol),
            quick: a.quick,
            inject_loss: a.inject_loss,
        };
        let mut vc = VerifyConfig::new(model);
        vc.quick = a.quick;
        vc.tol = tol;
        if let Some(l) = a.loss {
            vc.losses = vec![Loss::from_kind(l.kind())?];
        }
        vc.injected_loss = a.inject_loss.map(|b| match b {
            BrokenLoss::Odd => Loss::custom("odd", |t| t, |_| 1.0),
        });
        Ok((config, verify::run(&vc)?))
    };
    let (config, report) = inner().map_err(|e| (e, None))?;
    let text = match config.format {
        Format::Json => {
            pretty(json!({"config": config, "passed": report.passed(), "checks": report.lines}))
        }
        _ => {
            let mut s = config.header();
            for l in &report.lines {
                s.push_str(&format!(
                    "{}  {}: {}\n",
                    if l.passed { "PASS" } else { "FAIL" },
                    l.name,
                    l.detail
                ));
            }
            let failed = report.lines.iter().filter(|l| !l.passed).count();
            s.push_str(&format!(
                "# {} checks, {failed} failed\n",
                report.lines.len()
            ));
            s
        }
    };
    let failed = report.lines.iter().filter(|l| !l.passed).count();
    let out = Output { config, text };
    if failed > 0 {
        Err((CliError::Verification { failed }, Some(Box::new(out))))
    } else {
        Ok(out)
    }
}
