use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gremk_cli::{
    cmd_classify, cmd_env, cmd_simulate, cmd_verify, parse_checks, CliError, Outcome, RunConfig, EXIT_CHECK_FAILED,
    EXIT_OK,
};

#[derive(Parser)]
#[command(name = "gremk", version, about = "GREM-like K process simulator and verification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Base seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for replica-parallel work.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an environment and write it to <out>/environment.txt.
    Env {
        #[command(flatten)]
        common: Common,
    },
    /// Simulate a trajectory and its clocks in a stored environment.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Environment file written by `gremk env`.
        #[arg(long)]
        env: Option<PathBuf>,
        /// Physical time horizon.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Run verification suites and write a report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Comma-separated suites, or `all`.
        #[arg(long)]
        checks: Option<String>,
    },
    /// Classify a gap family as trivial, nontrivial or uncovered.
    Classify {
        #[command(flatten)]
        common: Common,
        /// e.g. "geometric-gap r=0.5", "double-exponential-gap", "harmonic-gap".
        #[arg(long)]
        family: Option<String>,
        /// Number of terms K in the partial-sum traces.
        #[arg(long)]
        horizon: Option<usize>,
    },
}

fn base_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(o) = &common.out {
        cfg.out = o.clone();
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Env { common } => {
            let cfg = base_config(&common)?;
            cfg.validate()?;
            cmd_env(&cfg)
        }
        Command::Simulate { common, env, horizon } => {
            let mut cfg = base_config(&common)?;
            if env.is_some() {
                cfg.env = env;
            }
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            cfg.validate()?;
            cmd_simulate(&cfg)
        }
        Command::Verify { common, checks } => {
            let mut cfg = base_config(&common)?;
            if let Some(c) = checks {
                cfg.checks = parse_checks(&c)?;
            }
            cfg.validate()?;
            cmd_verify(&cfg)
        }
        Command::Classify { common, family, horizon } => {
            let mut cfg = base_config(&common)?;
            if family.is_some() {
                cfg.family = family;
            }
            if let Some(h) = horizon {
                cfg.classify_horizon = h;
            }
            cfg.validate()?;
            cmd_classify(&cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                eprintln!("wrote {}", f.display());
            }
            ExitCode::from(if outcome.failed { EXIT_CHECK_FAILED } else { EXIT_OK } as u8)
        }
        Err(e) => {
            eprintln!("gremk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
