mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{parse_coeffs, RunConfig};
use report::{finish, CliError, Output};

#[derive(Parser, Debug)]
#[command(name = "betalab", version, about = "Numerics for one-cut β-ensembles")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for JSON reports and CSV tables.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Potential coefficients, constant term first, e.g. "0,0,0.5".
    #[arg(long, global = true, allow_hyphen_values = true)]
    coeffs: Option<String>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Contour distance from the cut.
    #[arg(long, global = true)]
    d: Option<f64>,
    /// Confinement margin of the sampler.
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Test function coefficients, constant term first.
    #[arg(long, global = true, allow_hyphen_values = true)]
    f: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Support, density and the validity checks for the potential.
    Equilibrium {
        #[arg(long)]
        table_points: Option<usize>,
    },
    /// First-order correction to the mean of a linear statistic.
    Correction {
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Expansion of log Q_{n,β} (with the exact value for n ≤ 4).
    Logq,
    /// Metropolis sampling with linear-statistic and loop-equation estimates.
    Sample {
        #[arg(long)]
        chains: Option<usize>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        burnin: Option<usize>,
        #[arg(long)]
        thin: Option<usize>,
        /// Also write every stored configuration to samples.csv.
        #[arg(long)]
        save_samples: bool,
    },
    /// Matrix kernel entries at (λ, μ) pairs.
    Kernel {
        /// CSV with columns lambda,mu.
        #[arg(long)]
        points: Option<PathBuf>,
    },
    /// Rescaled kernel against the sine-kernel limit.
    Universality {
        #[arg(long, allow_hyphen_values = true)]
        lambda0: Option<f64>,
        #[arg(long)]
        grid_size: Option<usize>,
        #[arg(long)]
        grid_half_width: Option<f64>,
    },
    /// Invariant suite; `check stojanovic` runs the n ∈ {2, 4} identity.
    Check {
        #[arg(value_parser = ["stojanovic"])]
        which: Option<String>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Equilibrium { .. } => "equilibrium",
            Command::Correction { .. } => "correction",
            Command::Logq => "logq",
            Command::Sample { .. } => "sample",
            Command::Kernel { .. } => "kernel",
            Command::Universality { .. } => "universality",
            Command::Check { which: Some(_) } => "check_stojanovic",
            Command::Check { which: None } => "check",
        }
    }
}

fn merge(cli: &Cli) -> Result<RunConfig, CliError> {
    let c = &cli.common;
    let mut cfg = RunConfig::load(c.config.as_deref())?;
    cfg.command = Some(cli.command.name().to_string());
    if let Some(s) = &c.coeffs {
        cfg.coeffs = parse_coeffs(s)?;
    }
    if let Some(s) = &c.f {
        cfg.f = parse_coeffs(s)?;
    }
    cfg.n = c.n.unwrap_or(cfg.n);
    cfg.beta = c.beta.unwrap_or(cfg.beta);
    cfg.d = c.d.or(cfg.d);
    cfg.epsilon = c.epsilon.unwrap_or(cfg.epsilon);
    cfg.seed = c.seed.unwrap_or(cfg.seed);
    match &cli.command {
        Command::Equilibrium { table_points } => cfg.table_points = table_points.unwrap_or(cfg.table_points),
        Command::Correction { nodes } => cfg.nodes = nodes.or(cfg.nodes),
        Command::Sample { chains, steps, burnin, thin, save_samples } => {
            cfg.chains = chains.unwrap_or(cfg.chains);
            cfg.steps = steps.unwrap_or(cfg.steps);
            cfg.burnin = burnin.or(cfg.burnin);
            cfg.thin = thin.unwrap_or(cfg.thin);
            cfg.save_samples |= save_samples;
        }
        Command::Kernel { points } => cfg.points = points.clone().or(cfg.points.take()),
        Command::Universality { lambda0, grid_size, grid_half_width } => {
            cfg.lambda0 = lambda0.unwrap_or(cfg.lambda0);
            cfg.grid_size = grid_size.unwrap_or(cfg.grid_size);
            cfg.grid_half_width = grid_half_width.unwrap_or(cfg.grid_half_width);
        }
        Command::Logq | Command::Check { .. } => {}
    }
    Ok(cfg)
}

fn run(cli: &Cli, cfg: &RunConfig, out: Option<&Output>) -> Result<serde_json::Value, CliError> {
    match &cli.command {
        Command::Equilibrium { .. } => commands::equilibrium(cfg, out),
        Command::Correction { .. } => commands::correction(cfg),
        Command::Logq => commands::logq(cfg),
        Command::Sample { .. } => commands::sample(cfg, out),
        Command::Kernel { .. } => commands::kernel(cfg, out),
        Command::Universality { .. } => commands::universality(cfg, out),
        Command::Check { which: Some(_) } => commands::check_stojanovic(cfg),
        Command::Check { which: None } => commands::check(cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("betalab: {e}");
            return ExitCode::from(1);
        }
    }
    let mut cfg = RunConfig { command: Some(cli.command.name().to_string()), ..RunConfig::default() };
    let merged = merge(&cli);
    let outcome = match merged {
        Ok(c) => {
            cfg = c;
            Output::new(&cli.common.out).and_then(|out| {
                let r = run(&cli, &cfg, Some(&out));
                Ok((out, r))
            })
        }
        Err(e) => Err(e),
    };
    let code = match outcome {
        Ok((out, r)) => finish(Some(&out), &cfg, &r),
        Err(e) => finish(None, &cfg, &Err(e)),
    };
    ExitCode::from(code as u8)
}
