use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use obscost_cli::{run, with_defaults, CliError, RunConfig, PROFILE_ENV};

#[derive(Parser)]
#[command(name = "obscost", version, about = "Observability constants and KdV boundary-flux experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    params: Params,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sobolev table, and flow constants and covering numbers when a length is given.
    Constants,
    /// Spectral radius certificate gamma(L, K1).
    Gamma,
    /// Flux threshold epsilon_0 from the backward recursion.
    Epsilon,
    /// Full constant chain at one length.
    Cost,
    /// Distance to the critical length set.
    Critical,
    /// Evolve the discrete semigroup and report the energy balance.
    Simulate,
    /// Discrete observability Gramian.
    Gramian,
    /// Flux-invisible invariant subspace.
    #[command(name = "subspace-m")]
    SubspaceM,
    /// Flow-based Gram-Schmidt construction.
    Gramschmidt,
    /// Re-check a gamma certificate at higher precision.
    Verify,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::Gamma => "gamma",
            Command::Epsilon => "epsilon",
            Command::Cost => "cost",
            Command::Critical => "critical",
            Command::Simulate => "simulate",
            Command::Gramian => "gramian",
            Command::SubspaceM => "subspace-m",
            Command::Gramschmidt => "gramschmidt",
            Command::Verify => "verify",
        }
    }
}

#[derive(Args)]
struct Params {
    /// `key = value` file applied before the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    length: Option<String>,
    #[arg(long, global = true)]
    k: Option<String>,
    #[arg(long, global = true)]
    k1: Option<String>,
    #[arg(long, global = true)]
    gamma: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    time: Option<String>,
    #[arg(long, global = true)]
    dt: Option<String>,
    #[arg(long, global = true)]
    nodes: Option<String>,
    /// `trapezoidal` or `implicit-euler`.
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// `filtered-sine` or `nodal`.
    #[arg(long, global = true)]
    basis: Option<String>,
    /// `sine:<n>`, `rough:<seed>` or `subspace`.
    #[arg(long, global = true)]
    initial: Option<String>,
    #[arg(long, global = true)]
    modes: Option<String>,
    #[arg(long, global = true)]
    restrict_tol: Option<String>,
    #[arg(long, global = true)]
    t1: Option<String>,
    #[arg(long, global = true)]
    delta: Option<String>,
    #[arg(long, global = true)]
    level_cap: Option<String>,
    /// `default`, `unit` or `custom:v0,...,v7`.
    #[arg(long, global = true)]
    lambda_profile: Option<String>,
    /// Replace E^1_3 in the Sobolev table.
    #[arg(long, global = true)]
    stub_e13: Option<String>,
    /// Replace the covering number B.
    #[arg(long, global = true)]
    b_override: Option<String>,
    #[arg(long, global = true)]
    exact_threshold: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<String>,
    /// Trajectory trace for `simulate`.
    #[arg(long, global = true)]
    csv: Option<String>,
}

impl Params {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("lambda_profile", &self.lambda_profile),
            ("length", &self.length),
            ("k", &self.k),
            ("k1", &self.k1),
            ("gamma", &self.gamma),
            ("tol", &self.tol),
            ("time", &self.time),
            ("dt", &self.dt),
            ("nodes", &self.nodes),
            ("scheme", &self.scheme),
            ("basis", &self.basis),
            ("initial", &self.initial),
            ("modes", &self.modes),
            ("restrict_tol", &self.restrict_tol),
            ("t1", &self.t1),
            ("delta", &self.delta),
            ("level_cap", &self.level_cap),
            ("stub_e13", &self.stub_e13),
            ("b_override", &self.b_override),
            ("exact_threshold", &self.exact_threshold),
            ("output", &self.output),
            ("csv", &self.csv),
        ]
    }
}

fn config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::new(cli.command.name());
    if let Some(path) = &cli.params.config {
        cfg.apply_file(path)?;
        cfg.command = cli.command.name().to_string();
    }
    if let Ok(profile) = std::env::var(PROFILE_ENV) {
        cfg.set("lambda_profile", &profile, PROFILE_ENV)?;
    }
    for (key, value) in cli.params.pairs() {
        if let Some(v) = value {
            cfg.set(key, v, &format!("--{}", key.replace('_', "-")))?;
        }
    }
    Ok(with_defaults(cfg))
}

fn main_inner(cli: &Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.params.jobs {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }
    let cfg = config(cli)?;
    let outcome = run(&cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, &outcome.report)?,
        None => print!("{}", outcome.report),
    }
    outcome.failure.map_or(Ok(()), Err)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
