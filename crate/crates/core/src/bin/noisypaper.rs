use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use noisypaper::analysis::{capacity_summary, sweep, sweep_values, write_csv, SweepParam};
use noisypaper::copula::{build_fgm, parse_marginal, verify_fgm};
use noisypaper::model::{new_channel, ChannelParams};
use noisypaper::typicality::self_interference_demo;
use noisypaper::verify::{self, Suite, VerifyOptions};
use noisypaper::Error;

#[derive(Debug, Parser)]
#[command(name = "noisypaper", version, about = "Gaussian channel capacity with correlated two-sided state information")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Capacity, lower bound, optimal alpha and minors for one channel
    Capacity(ModelArgs),
    /// CSV sweep of one parameter
    Sweep(SweepArgs),
    /// Run a self-check suite and print a JSON report
    Verify(VerifyArgs),
    /// Build and sample a copula with a prescribed correlation
    Copula(CopulaArgs),
    /// Typicality statistic when the input copies the transmitter state
    DemoSelfInterference(DemoArgs),
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// JSON file with channel parameters; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q1: Option<f64>,
    #[arg(long)]
    q2: Option<f64>,
    #[arg(long)]
    n: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho_xs1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho_xs2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho_xz: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho_s1s2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho_s1z: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    rho_s2z: Option<f64>,
    /// Assert X -> (S1,S2) -> Z and derive rho_xz from it
    #[arg(long)]
    markov: bool,
}

impl ModelArgs {
    fn params(&self) -> Result<ChannelParams, Error> {
        let base = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
                serde_json::from_str::<ChannelParams>(&text)
                    .map_err(|e| Error::Input(format!("{}: {e}", path.display())))?
            }
            None => ChannelParams::default(),
        };
        let flags = ChannelParams {
            p: self.p,
            q1: self.q1,
            q2: self.q2,
            n: self.n,
            rho_xs1: self.rho_xs1,
            rho_xs2: self.rho_xs2,
            rho_xz: self.rho_xz,
            rho_s1s2: self.rho_s1s2,
            rho_s1z: self.rho_s1z,
            rho_s2z: self.rho_s2z,
            markov_noise: self.markov.then_some(true),
        };
        Ok(base.overlay(&flags))
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// rho_xs1, rho_s1z, rho_s2z, rho_s1s2, snr_db or mi_s1z
    #[arg(long)]
    param: String,
    #[arg(long, allow_hyphen_values = true)]
    from: f64,
    #[arg(long, allow_hyphen_values = true)]
    to: f64,
    #[arg(long, default_value_t = 101)]
    steps: usize,
    /// Write CSV here instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// minors, rates, mc, copula, typicality or all
    suite: Suite,
    /// Random models for the minors and rates suites
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Random alpha values per model in the minors suite
    #[arg(long, default_value_t = 5)]
    alphas: usize,
    /// Sample size for the simulation suites
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, env = "NOISYPAPER_SEED", default_value_t = 0)]
    seed: u64,
    /// Marginal for the copula suite
    #[arg(long, default_value = "uniform")]
    marginal: String,
    #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
    rho: f64,
}

#[derive(Debug, Args)]
struct CopulaArgs {
    /// Marginal of X: uniform(a,b), normal(mu,sigma), exponential(lambda) or table:<file.csv>
    #[arg(long, default_value = "uniform")]
    x: String,
    /// Marginal of S; defaults to the marginal of X
    #[arg(long)]
    s: Option<String>,
    /// Target correlation coefficient
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    /// Samples drawn for the check; 0 skips sampling
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, env = "NOISYPAPER_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    q1: f64,
    #[arg(long, env = "NOISYPAPER_SEED", default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Usage(Error),
    Verification,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

// A closed pipe (e.g. `| head`) is not an error worth reporting.
fn emit(bytes: &[u8]) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(bytes).and_then(|_| out.flush());
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Input(e.to_string()))?;
    text.push('\n');
    emit(text.as_bytes());
    Ok(())
}

fn cmd_capacity(args: &ModelArgs) -> Result<(), Failure> {
    let model = new_channel(&args.params()?)?;
    print_json(&capacity_summary(&model))
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let param: SweepParam = args.param.parse()?;
    let base = args.model.params()?;
    let values = sweep_values(args.from, args.to, args.steps)?;
    let rows = sweep(&base, param, &values)?;
    let csv = write_csv(param, &rows);
    match &args.output {
        Some(path) => std::fs::write(path, csv).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?,
        None => emit(csv.as_bytes()),
    }
    Ok(())
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let opts = VerifyOptions {
        trials: args.trials,
        n: args.n,
        seed: args.seed,
        marginal: parse_marginal(&args.marginal)?,
        rho: args.rho,
        alphas_per_model: args.alphas,
    };
    let reports = verify::run(args.suite, &opts)?;
    for r in &reports {
        let failed = r.checks.iter().filter(|c| !c.pass).count();
        eprintln!(
            "{:<11} {} ({} checks, {failed} failed, max error {:.3e})",
            r.suite,
            if r.pass { "pass" } else { "FAIL" },
            r.checks.len(),
            r.max_error
        );
    }
    print_json(&reports)?;
    if reports.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

#[derive(Serialize)]
struct CopulaOutput {
    marginal_x: String,
    marginal_s: String,
    a_x: f64,
    a_s: f64,
    sigma_x: f64,
    sigma_s: f64,
    rho_target: f64,
    rho_param: f64,
    max_correlation: f64,
    check: Option<noisypaper::copula::FgmReport>,
}

fn cmd_copula(args: &CopulaArgs) -> Result<(), Failure> {
    let x = parse_marginal(&args.x)?;
    let s = match &args.s {
        Some(s) => parse_marginal(s)?,
        None => x.clone(),
    };
    let spec = build_fgm(x, s, args.rho)?;
    let check = if args.n > 0 {
        Some(verify_fgm(&spec, args.n, args.seed)?)
    } else {
        None
    };
    let pass = check.as_ref().is_none_or(|c| c.pass);
    print_json(&CopulaOutput {
        marginal_x: spec.x.name(),
        marginal_s: spec.s.name(),
        a_x: spec.a_x,
        a_s: spec.a_s,
        sigma_x: spec.sigma_x,
        sigma_s: spec.sigma_s,
        rho_target: spec.rho_target,
        rho_param: spec.rho_param,
        max_correlation: spec.max_correlation(),
        check,
    })?;
    if pass {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

fn cmd_demo(args: &DemoArgs) -> Result<(), Failure> {
    print_json(&self_interference_demo(args.n, args.q1, args.seed)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Command::Capacity(a) => cmd_capacity(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Copula(a) => cmd_copula(a),
        Command::DemoSelfInterference(a) => cmd_demo(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(2)
        }
    }
}
