use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mixbound::analysis::analyze;
use mixbound::bounds::{
    auxiliary_rosenthal_bound, bernstein_threshold, crude_variance_bound, poisson_variance_bound, rosenthal_bound,
    BoundBreakdown,
};
use mixbound::montecarlo::{certify, CertifyConfig};
use mixbound::{ChainFamily, ChainModel};
use serde::Serialize;

use crate::error::{CliError, EXIT_OK, EXIT_VIOLATION};
use crate::report::{report_rows, rows_to_csv, write_atomic, ReportRow};
use crate::spec_file::{parse_chain_spec, ChainSpecFile};

#[derive(Debug, Parser)]
#[command(name = "mixbound", version, about = "Moment and deviation bounds for finite Markov chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Mixing time, stationary law, asymptotic variance and Poisson solution.
    Analyze(AnalyzeArgs),
    /// Checks every bound against Monte-Carlo estimates and writes a CSV report.
    Certify(CertifyArgs),
    /// Evaluates the bounds for given p, n, tau and sigma.
    Bound(BoundArgs),
    /// Writes a chain spec file for a built-in family.
    Generate(GenerateArgs),
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct ChainSource {
    /// Chain spec file (TOML).
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Built-in family, e.g. `two_state(0.3,0.3)` or `random_doeblin(10,0.5)`.
    #[arg(long)]
    pub family: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub source: ChainSource,
    /// Seed for random families.
    #[arg(long, default_value_t = 0)]
    pub chain_seed: u64,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub source: ChainSource,
    #[arg(long, default_value_t = 0)]
    pub chain_seed: u64,
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 8.0])]
    pub p_list: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [10, 100, 1000])]
    pub n_list: Vec<usize>,
    /// Replications per moment estimate.
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    /// Replications for the tail-frequency rows.
    #[arg(long, default_value_t = 10_000)]
    pub tail_reps: usize,
    #[arg(long, env = "MIXBOUND_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Confidence levels; `e^-2` is accepted literally.
    #[arg(long, value_delimiter = ',', default_values = ["e^-2", "0.01"], value_parser = parse_delta)]
    pub delta_list: Vec<f64>,
    /// CSV report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full JSON report path.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Start state of the non-stationary rows.
    #[arg(long, default_value_t = 0)]
    pub start_state: usize,
    /// Skip the non-stationary rows.
    #[arg(long)]
    pub stationary_only: bool,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub p: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub tau: usize,
    #[arg(long)]
    pub sigma: f64,
    /// Also evaluate the deviation threshold at this confidence level.
    #[arg(long, value_parser = parse_delta)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long, default_value_t = 0)]
    pub chain_seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_delta(s: &str) -> Result<f64, String> {
    match s.trim() {
        "e^-2" => Ok((-2.0f64).exp()),
        t => t.parse().map_err(|_| format!("`{t}` is not a number")),
    }
}

/// What a command printed and the status it exits with.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub code: i32,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { stdout, code: EXIT_OK }
    }
}

pub fn load_chain(source: &ChainSource, chain_seed: u64) -> Result<(String, ChainModel), CliError> {
    match (&source.spec, &source.family) {
        (Some(path), _) => parse_chain_spec(path),
        (None, Some(expr)) => {
            let family: ChainFamily = expr.parse()?;
            Ok((family.to_string(), family.generate(chain_seed)?))
        }
        (None, None) => Err(CliError::Usage("one of --spec or --family is required".into())),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Analyze(args) => run_analyze(args),
        Command::Certify(args) => run_certify(args),
        Command::Bound(args) => run_bound(args),
        Command::Generate(args) => run_generate(args),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn list(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(" ")
}

pub fn run_analyze(args: &AnalyzeArgs) -> Result<Outcome, CliError> {
    let (name, model) = load_chain(&args.source, args.chain_seed)?;
    let a = analyze(&model)?;
    if args.json {
        #[derive(Serialize)]
        struct Named<'a> {
            chain: &'a str,
            #[serde(flatten)]
            analysis: &'a mixbound::analysis::ChainAnalysis,
        }
        return Ok(Outcome::ok(json(&Named {
            chain: &name,
            analysis: &a,
        })));
    }
    let mut out = String::new();
    writeln!(out, "chain             {name}").unwrap();
    writeln!(out, "states            {}", a.size).unwrap();
    writeln!(out, "mixing time       {}", a.tau).unwrap();
    writeln!(out, "stationary        {}", list(&a.stationary)).unwrap();
    writeln!(out, "dobrushin 1..tau  {}", list(&a.dobrushin)).unwrap();
    writeln!(out, "sigma^2 series    {:.10}", a.sigma2_series).unwrap();
    writeln!(out, "sigma^2 poisson   {:.10}", a.sigma2_poisson).unwrap();
    writeln!(out, "poisson solution  {}", list(&a.poisson_solution)).unwrap();
    writeln!(
        out,
        "sup |g|           {:.6} (cap {:.6}, residual {:.2e}, route gap {:.2e})",
        a.poisson_sup_norm, a.poisson_sup_norm_cap, a.poisson_residual, a.poisson_route_gap
    )
    .unwrap();
    Ok(Outcome::ok(out))
}

#[derive(Serialize)]
struct FullReport<'a> {
    chain: &'a str,
    tau: usize,
    sigma: f64,
    config: &'a CertifyConfig,
    all_hold: bool,
    rows: &'a [ReportRow],
}

pub fn certify_config(args: &CertifyArgs) -> CertifyConfig {
    CertifyConfig {
        p_list: args.p_list.clone(),
        n_list: args.n_list.clone(),
        replications: args.reps,
        tail_replications: args.tail_reps,
        seed: args.seed,
        delta_list: args.delta_list.clone(),
        start_state: (!args.stationary_only).then_some(args.start_state),
        threads: args.threads,
    }
}

pub fn run_certify(args: &CertifyArgs) -> Result<Outcome, CliError> {
    let config = certify_config(args);
    config.validate()?;
    let (name, model) = load_chain(&args.source, args.chain_seed)?;
    let report = certify(&model, &config)?;
    let rows = report_rows(&name, &report);
    let csv = rows_to_csv(&rows)?;
    if let Some(path) = &args.json {
        let full = FullReport {
            chain: &name,
            tau: report.tau,
            sigma: report.sigma,
            config: &config,
            all_hold: report.all_hold(),
            rows: &rows,
        };
        write_atomic(path, json(&full).as_bytes())?;
    }
    let stdout = match &args.out {
        Some(path) => {
            write_atomic(path, &csv)?;
            let failed = rows.iter().filter(|r| !r.holds).count();
            format!("{}: {} rows, {failed} failed, written to {}\n", name, rows.len(), path.display())
        }
        None => String::from_utf8(csv).expect("csv is utf-8"),
    };
    Ok(Outcome {
        stdout,
        code: if report.all_hold() { EXIT_OK } else { EXIT_VIOLATION },
    })
}

#[derive(Serialize)]
struct BoundReport {
    rosenthal_stationary: BoundBreakdown,
    rosenthal_start: BoundBreakdown,
    auxiliary_rosenthal: BoundBreakdown,
    crude_variance: f64,
    poisson_variance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    deviation: Option<mixbound::bounds::BernsteinThreshold>,
}

pub fn run_bound(args: &BoundArgs) -> Result<Outcome, CliError> {
    if args.n == 0 || args.tau == 0 {
        return Err(CliError::Usage("n and tau must be at least 1".into()));
    }
    let report = BoundReport {
        rosenthal_stationary: rosenthal_bound(args.p, args.n, args.tau, args.sigma, true)?,
        rosenthal_start: rosenthal_bound(args.p, args.n, args.tau, args.sigma, false)?,
        auxiliary_rosenthal: auxiliary_rosenthal_bound(args.p, args.n, args.tau)?,
        crude_variance: crude_variance_bound(args.n, args.tau),
        poisson_variance: poisson_variance_bound(args.n, args.tau, args.sigma),
        deviation: args
            .delta
            .map(|d| bernstein_threshold(d, args.n, args.tau, args.sigma))
            .transpose()?,
    };
    if args.json {
        return Ok(Outcome::ok(json(&report)));
    }
    let mut out = String::new();
    let mut breakdown = |label: &str, b: &BoundBreakdown| {
        writeln!(out, "{label:<22}{:.6e}", b.total).unwrap();
        for t in &b.terms {
            writeln!(out, "  {:<20}{:.6e}", t.name, t.value).unwrap();
        }
    };
    breakdown("rosenthal (pi)", &report.rosenthal_stationary);
    breakdown("rosenthal (start)", &report.rosenthal_start);
    breakdown("auxiliary rosenthal", &report.auxiliary_rosenthal);
    writeln!(out, "{:<22}{:.6e}", "crude variance", report.crude_variance).unwrap();
    writeln!(out, "{:<22}{:.6e}", "poisson variance", report.poisson_variance).unwrap();
    if let Some(d) = &report.deviation {
        writeln!(out, "{:<22}{:.6e}", "deviation threshold", d.conservative).unwrap();
        writeln!(out, "  {:<20}{:.6e}", "literal reading", d.literal.total).unwrap();
    }
    if report.rosenthal_stationary.n_below_tau() {
        writeln!(out, "note: n < tau, the bounds are evaluated outside their usual range").unwrap();
    }
    Ok(Outcome::ok(out))
}

pub fn run_generate(args: &GenerateArgs) -> Result<Outcome, CliError> {
    let family: ChainFamily = args.family.parse()?;
    let model = family.generate(args.chain_seed)?;
    let text = ChainSpecFile::from_model(family.to_string(), &model).to_toml();
    match &args.out {
        Some(path) => {
            write_atomic(path, text.as_bytes())?;
            Ok(Outcome::ok(format!("wrote {}\n", path.display())))
        }
        None => Ok(Outcome::ok(text)),
    }
}
