//! `dualstat`: evaluate dual distributions, build intervals, check the
//! duality identities and run Monte Carlo reconstructions.
//!
//! Exit codes: 0 success, 1 a requested statistical gate failed, 2 usage or
//! domain error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use dualstat::distributions::{
    beta_pdf, dual_gamma_cdf, dual_gamma_pdf, gamma_pdf, neg_binomial_pmf, normal_pdf, poisson_cdf, poisson_pmf,
    BetaModel, GammaModel, NegBinomialModel, NormalModel, PoissonModel,
};
use dualstat::identities;
use dualstat::intervals::{normal_interval, poisson_interval, ConfidenceInterval, Policy};
use dualstat::reconstruct::{
    draw_accepted, ModelLaw, ReconstructionConfig, ReconstructionResult, DEFAULT_ACCEPT_WINDOW, DEFAULT_BINS,
    DEFAULT_NORMAL_HALF_WIDTH,
};
use dualstat::special::reg_lower_inc_gamma;
use serde_json::{json, Value};

use output::{Envelope, Status};

/// Residual tolerance for `verify`.
const IDENTITY_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "dualstat", version, about = "Statistically dual distributions")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Suppress the summary line on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Confidence interval for a Poisson rate or a Normal mean.
    #[command(subcommand)]
    Interval(IntervalCmd),
    /// Evaluate a duality identity and report its residual.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Monte Carlo reconstruction of the parameter law.
    #[command(subcommand)]
    Reconstruct(ReconstructCmd),
    /// Evaluate a single density, mass or cdf.
    #[command(subcommand)]
    Eval(EvalCmd),
}

#[derive(Subcommand)]
enum IntervalCmd {
    Poisson {
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 0.90)]
        level: f64,
        #[arg(long, default_value = "central", value_parser = parse_policy)]
        policy: Policy,
    },
    Normal {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        sigma: f64,
        #[arg(long, default_value_t = 0.90)]
        level: f64,
        #[arg(long, default_value = "central", value_parser = parse_policy)]
        policy: Policy,
    },
}

fn parse_policy(s: &str) -> Result<Policy, String> {
    s.parse().map_err(|e: dualstat::Error| e.to_string())
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Poisson sums against dual Gamma integrals, counts n < m.
    Eq5 {
        #[arg(long)]
        mu1: f64,
        #[arg(long)]
        mu2: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
    },
    /// Normal integral over the mean against the integral over the observable.
    Eq8 {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        sigma: f64,
    },
    /// Beta cdf against the negative binomial cdf.
    Eq11 {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
    },
    /// Poisson tail, dual Gamma mass and Poisson head sum to one.
    Eq12 {
        #[arg(long)]
        mu1: f64,
        #[arg(long)]
        mu2: f64,
        #[arg(long)]
        n: u64,
    },
    /// Normal tails and dual mass sum to one.
    Eq17 {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        sigma: f64,
    },
    /// Shifted Normal tails and dual mass sum to one (c, d >= 0).
    Eq18 {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        sigma: f64,
    },
    /// Random tuples of every identity.
    Sweep {
        #[arg(long, default_value_t = 10_000)]
        count: usize,
        #[command(flatten)]
        seed: SeedArg,
    },
}

#[derive(Args)]
struct SeedArg {
    /// Falls back to DUALSTAT_SEED.
    #[arg(long, env = "DUALSTAT_SEED")]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 100_000)]
    accepted: u64,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Write the histogram CSV here.
    #[arg(long)]
    hist_out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum ReconstructCmd {
    Poisson {
        #[arg(long)]
        n: u64,
        /// Upper end of the flat rate proposal; defaults to n + 10√(n+1) + 25.
        #[arg(long)]
        mu_max: Option<f64>,
        /// Test against a unit-rate Gamma of this shape instead of n + 1.
        #[arg(long)]
        test_shape: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    Normal {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        sigma: f64,
        /// Proposal half-width in units of sigma.
        #[arg(long, default_value_t = DEFAULT_NORMAL_HALF_WIDTH)]
        half_width: f64,
        /// Acceptance half-window in units of sigma.
        #[arg(long, default_value_t = DEFAULT_ACCEPT_WINDOW)]
        window: f64,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Subcommand)]
enum EvalCmd {
    /// f(n; mu) = mu^n e^-mu / n!
    PoissonPmf {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        mu: f64,
    },
    /// P(i <= n | mu)
    PoissonCdf {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        mu: f64,
    },
    /// Dual Gamma density at mu given count n, or a Gamma density with --shape.
    GammaPdf(GammaArgs),
    /// Dual Gamma cdf at mu given count n, or a Gamma cdf with --shape.
    GammaCdf(GammaArgs),
    /// Normal density at x with mean and sigma.
    NormalPdf {
        #[arg(long)]
        x: f64,
        #[arg(long, default_value_t = 0.0)]
        mean: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma: f64,
    },
    /// Negative binomial mass C(n+k, k) p^(n+1) (1-p)^k.
    NegbinPmf {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        p: f64,
    },
    /// Beta density (n+m+1)!/(n! m!) x^n (1-x)^m.
    BetaPdf {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
    },
}

#[derive(Args)]
struct GammaArgs {
    #[arg(long, visible_alias = "x")]
    mu: f64,
    #[arg(long, conflicts_with = "shape", required_unless_present = "shape")]
    n: Option<u64>,
    #[arg(long)]
    shape: Option<f64>,
    /// Rate parameter, with --shape only.
    #[arg(long, default_value_t = 1.0, requires = "shape")]
    scale: f64,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Lib(dualstat::Error),
    Io(String),
}

impl From<dualstat::Error> for CliError {
    fn from(e: dualstat::Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) => f.write_str(m),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

type CmdResult = Result<(Envelope, String), CliError>;

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

fn require_seed(seed: &SeedArg) -> Result<u64, CliError> {
    seed.seed.ok_or_else(|| CliError::Usage("a seed is required: pass --seed or set DUALSTAT_SEED".into()))
}

fn interval_summary(ci: &ConfidenceInterval) -> String {
    format!("[{}, {}] {} level {} achieved {}", ci.lower, ci.upper, ci.policy, ci.level, ci.achieved)
}

fn cmd_interval(cmd: IntervalCmd) -> CmdResult {
    let (name, inputs, ci) = match cmd {
        IntervalCmd::Poisson { n, level, policy } => {
            ("interval poisson", json!({"n": n, "level": level, "policy": policy}), poisson_interval(n, level, policy)?)
        }
        IntervalCmd::Normal { x, sigma, level, policy } => (
            "interval normal",
            json!({"x": x, "sigma": sigma, "level": level, "policy": policy}),
            normal_interval(x, sigma, level, policy)?,
        ),
    };
    let summary = interval_summary(&ci);
    Ok((Envelope::new(name, inputs, to_value(&ci), Status::Ok), summary))
}

fn cmd_verify(cmd: VerifyCmd) -> CmdResult {
    let (name, inputs, report) = match cmd {
        VerifyCmd::Eq5 { mu1, mu2, n, m } => (
            "verify eq5",
            json!({"mu1": mu1, "mu2": mu2, "n": n, "m": m}),
            identities::poisson_gamma_exchange(mu1, mu2, n, m)?,
        ),
        VerifyCmd::Eq8 { b, c, d, sigma } => (
            "verify eq8",
            json!({"b": b, "c": c, "d": d, "sigma": sigma}),
            identities::normal_self_dual(b, c, d, sigma)?,
        ),
        VerifyCmd::Eq11 { p, n, m } => {
            ("verify eq11", json!({"p": p, "n": n, "m": m}), identities::neg_binomial_beta(p, n, m)?)
        }
        VerifyCmd::Eq12 { mu1, mu2, n } => {
            ("verify eq12", json!({"mu1": mu1, "mu2": mu2, "n": n}), identities::poisson_coverage(mu1, mu2, n)?)
        }
        VerifyCmd::Eq17 { x, c, d, sigma } => (
            "verify eq17",
            json!({"x": x, "c": c, "d": d, "sigma": sigma}),
            identities::normal_partition(x, c, d, sigma)?,
        ),
        VerifyCmd::Eq18 { x, c, d, sigma } => (
            "verify eq18",
            json!({"x": x, "c": c, "d": d, "sigma": sigma}),
            identities::normal_shifted_partition(x, c, d, sigma)?,
        ),
        VerifyCmd::Sweep { count, seed } => {
            let seed = require_seed(&seed)?;
            let outcomes = identities::identity_sweep(count, seed)?;
            let ok = outcomes.iter().all(|o| o.max_abs_residual <= IDENTITY_TOL);
            let worst = outcomes.iter().map(|o| o.max_abs_residual).fold(0.0, f64::max);
            let summary = format!("{count} tuples per identity, largest |residual| {worst:e}");
            let env = Envelope::new(
                "verify sweep",
                json!({"count": count, "seed": seed}),
                to_value(&outcomes),
                Status::from_gate(ok),
            );
            return Ok((env, summary));
        }
    };
    let summary = format!("{} residual {:e}", report.identity_id, report.residual);
    let status = Status::from_gate(report.within(IDENTITY_TOL));
    Ok((Envelope::new(name, inputs, to_value(&report), status), summary))
}

fn run_reconstruction(
    name: &str,
    config: ReconstructionConfig,
    law: Option<ModelLaw>,
    hist_out: Option<PathBuf>,
    extra_inputs: Value,
) -> CmdResult {
    let samples = draw_accepted(&config)?;
    let result: ReconstructionResult = match law {
        Some(law) => samples.evaluate_against(law)?,
        None => samples.evaluate()?,
    };
    if let Some(path) = &hist_out {
        fs::write(path, result.histogram.to_csv())
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    }
    let mut inputs = to_value(&config);
    if let (Value::Object(map), Value::Object(extra)) = (&mut inputs, extra_inputs) {
        map.extend(extra);
    }
    let summary = format!(
        "D = {:.6} vs threshold {:.6} ({}), {} accepted in {} trials",
        result.ks_statistic,
        result.ks_threshold,
        if result.pass { "pass" } else { "fail" },
        result.accepted,
        result.trials
    );
    let status = Status::from_gate(result.pass);
    Ok((Envelope::new(name, inputs, to_value(&result), status), summary))
}

fn apply_run(config: ReconstructionConfig, run: &RunArgs) -> ReconstructionConfig {
    config.with_bins(run.bins).with_workers(run.workers)
}

fn cmd_reconstruct(cmd: ReconstructCmd) -> CmdResult {
    match cmd {
        ReconstructCmd::Poisson { n, mu_max, test_shape, run } => {
            let seed = require_seed(&run.seed)?;
            let mut config = apply_run(ReconstructionConfig::poisson(n, run.accepted, seed), &run);
            if let Some(mu_max) = mu_max {
                config = config.with_support_bound(mu_max);
            }
            let law = test_shape.map(|shape| ModelLaw::Gamma { shape, truncate_at: config.support_bound });
            let extra = json!({"test_shape": test_shape});
            run_reconstruction("reconstruct poisson", config, law, run.hist_out, extra)
        }
        ReconstructCmd::Normal { x, sigma, half_width, window, run } => {
            let seed = require_seed(&run.seed)?;
            let config = apply_run(ReconstructionConfig::normal(x, sigma, run.accepted, seed), &run)
                .with_support_bound(half_width)
                .with_accept_window(window);
            run_reconstruction("reconstruct normal", config, None, run.hist_out, json!({}))
        }
    }
}

fn gamma_model(args: &GammaArgs) -> Result<GammaModel, CliError> {
    match args.shape {
        Some(shape) => Ok(GammaModel::new(args.scale, shape)?),
        None => Ok(GammaModel::dual_of_count(args.n.unwrap_or(0))),
    }
}

fn gamma_inputs(args: &GammaArgs) -> Value {
    match args.shape {
        Some(shape) => json!({"x": args.mu, "shape": shape, "scale": args.scale}),
        None => json!({"mu": args.mu, "n": args.n}),
    }
}

fn cmd_eval(cmd: EvalCmd) -> CmdResult {
    let (name, inputs, value) = match cmd {
        EvalCmd::PoissonPmf { n, mu } => {
            ("eval poisson-pmf", json!({"n": n, "mu": mu}), poisson_pmf(n, &PoissonModel::new(mu)?))
        }
        EvalCmd::PoissonCdf { n, mu } => {
            ("eval poisson-cdf", json!({"n": n, "mu": mu}), poisson_cdf(n, &PoissonModel::new(mu)?))
        }
        EvalCmd::GammaPdf(args) => {
            let value = match (args.shape, args.n) {
                (None, Some(n)) => dual_gamma_pdf(args.mu, n)?,
                _ => gamma_pdf(args.mu, &gamma_model(&args)?)?,
            };
            ("eval gamma-pdf", gamma_inputs(&args), value)
        }
        EvalCmd::GammaCdf(args) => {
            let value = match (args.shape, args.n) {
                (None, Some(n)) => dual_gamma_cdf(args.mu, n)?,
                _ => {
                    let model = gamma_model(&args)?;
                    if !(args.mu >= 0.0) {
                        return Err(dualstat::Error::Domain(format!("x must be >= 0, got {}", args.mu)).into());
                    }
                    reg_lower_inc_gamma(model.shape(), model.scale() * args.mu)?
                }
            };
            ("eval gamma-cdf", gamma_inputs(&args), value)
        }
        EvalCmd::NormalPdf { x, mean, sigma } => (
            "eval normal-pdf",
            json!({"x": x, "mean": mean, "sigma": sigma}),
            normal_pdf(x, &NormalModel::new(mean, sigma)?),
        ),
        EvalCmd::NegbinPmf { k, n, p } => {
            ("eval negbin-pmf", json!({"k": k, "n": n, "p": p}), neg_binomial_pmf(k, &NegBinomialModel::new(n, p)?))
        }
        EvalCmd::BetaPdf { x, n, m } => {
            ("eval beta-pdf", json!({"x": x, "n": n, "m": m}), beta_pdf(x, &BetaModel::new(n, m))?)
        }
    };
    let summary = value.to_string();
    Ok((Envelope::new(name, inputs, json!(value), Status::Ok), summary))
}

/// Lets `--x -3.5` parse as a value at every level of the command tree.
fn command_tree() -> clap::Command {
    fn walk(cmd: clap::Command) -> clap::Command {
        cmd.allow_negative_numbers(true).mut_subcommands(walk)
    }
    walk(Cli::command())
}

fn main() -> ExitCode {
    let cli = Cli::from_arg_matches(&command_tree().get_matches()).unwrap_or_else(|e| e.exit());
    let outcome = match cli.command {
        Command::Interval(c) => cmd_interval(c),
        Command::Verify(c) => cmd_verify(c),
        Command::Reconstruct(c) => cmd_reconstruct(c),
        Command::Eval(c) => cmd_eval(c),
    };
    match outcome {
        Ok((envelope, summary)) => {
            let text = match cli.format {
                Format::Json => output::to_json(&envelope),
                Format::Csv => output::to_csv(&envelope),
            };
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            if !cli.quiet {
                let status = serde_json::to_value(envelope.status).unwrap_or_default();
                eprintln!("{}: {} [{}]", envelope.command, summary, status.as_str().unwrap_or(""));
            }
            ExitCode::from(envelope.status.exit_code() as u8)
        }
        Err(err) => {
            let kind = match &err {
                CliError::Usage(_) => "usage",
                CliError::Lib(dualstat::Error::Config(_)) => "config",
                CliError::Lib(dualstat::Error::Runtime(_)) => "runtime",
                CliError::Lib(_) => "domain",
                CliError::Io(_) => "io",
            };
            eprintln!("error ({kind}): {err}");
            ExitCode::from(2)
        }
    }
}
