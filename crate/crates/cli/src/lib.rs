//! Batch runner for the numerical experiments in `szego_core`: TOML configs,
//! deterministic JSON/CSV result files and a fast invariant suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

pub use commands::{run, Outcome};
pub use config::{CommandKind, ExperimentConfig, FieldKind};
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(name = "szego", version, about = "Szegő projection experiments on the Heisenberg group and the sphere")]
pub struct Cli {
    /// TOML experiment config; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Result directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Debug, Subcommand)]
pub enum Cmd {
    /// Project a sampled field and report norms, idempotence and CR defect.
    Project {
        #[arg(long, value_enum)]
        field: Option<FieldKind>,
        /// Exponents for the Rayleigh quotients.
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
    },
    /// Variational lower bound for the L^p norm at p and its conjugate.
    NormBound {
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Gamma-ratio reference bound.
    Liu {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
    },
    /// Sphere-to-Heisenberg rescaling experiment on the reference bump.
    Transplant {
        #[arg(long, value_delimiter = ',')]
        lambdas: Vec<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        p: Vec<f64>,
    },
    /// Fast invariant suite; exit status 0 iff every check passes.
    Verify,
    /// Run config files (each names its own command), in parallel.
    Run {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
}

/// Sizes the global thread pool from `SZEGO_THREADS`, if set.
pub fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("SZEGO_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| CliError::ConfigParse(format!("SZEGO_THREADS = {v:?} is not a thread count")))?;
        // a second initialisation (tests) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Folds command-line flags into a config.
pub fn resolve(cli: &Cli) -> Result<Vec<ExperimentConfig>, CliError> {
    let base = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let mut cfgs = match &cli.command {
        Cmd::Run { configs } => configs.iter().map(|p| ExperimentConfig::load(p)).collect::<Result<Vec<_>, _>>()?,
        _ => vec![base],
    };
    for cfg in &mut cfgs {
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        if let Some(o) = &cli.out {
            cfg.output = Some(o.clone());
        }
        let (kind, ps) = match &cli.command {
            Cmd::Project { field, p } => {
                if let Some(f) = field {
                    cfg.field = *f;
                }
                (Some(CommandKind::Project), p)
            }
            Cmd::NormBound { p, budget } => {
                if let Some(b) = budget {
                    cfg.budget = *b;
                }
                (Some(CommandKind::NormBound), p)
            }
            Cmd::Liu { n, p } => {
                if let Some(n) = n {
                    cfg.n = *n;
                }
                (Some(CommandKind::Liu), p)
            }
            Cmd::Transplant { lambdas, theta, p } => {
                if !lambdas.is_empty() {
                    cfg.lambdas = lambdas.clone();
                }
                if let Some(t) = theta {
                    cfg.theta = *t;
                }
                (Some(CommandKind::Transplant), p)
            }
            Cmd::Verify => (Some(CommandKind::Verify), &Vec::new()),
            Cmd::Run { .. } => (None, &Vec::new()),
        };
        if let Some(k) = kind {
            cfg.command = Some(k);
        }
        if !ps.is_empty() {
            cfg.exponents = ps.clone();
        }
    }
    if cli.out.is_some() && cfgs.len() > 1 {
        return Err(CliError::ConfigParse("--out cannot be shared by several configs".into()));
    }
    Ok(cfgs)
}

/// Exit status: 0 success, 1 failed checks, 2 config error, 3 numerical or
/// output error.
pub fn exit_code(r: &Result<Outcome, CliError>) -> i32 {
    match r {
        Ok(o) if o.success => 0,
        Ok(_) => 1,
        Err(CliError::ConfigParse(_)) => 2,
        Err(_) => 3,
    }
}

/// Parses arguments, runs every config and prints the summaries.
pub fn main_with(cli: Cli) -> i32 {
    if let Err(e) = init_threads() {
        eprintln!("error: {e}");
        return 2;
    }
    let cfgs = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&Err(e));
        }
    };
    let results: Vec<Result<Outcome, CliError>> = if cfgs.len() == 1 {
        vec![run(&cfgs[0])]
    } else {
        cfgs.par_iter().map(run).collect()
    };
    let mut code = 0;
    for (cfg, r) in cfgs.iter().zip(&results) {
        let tag = cfg.command.map(|c| c.name()).unwrap_or("?");
        match r {
            Ok(o) => {
                for l in &o.lines {
                    println!("{l}");
                }
                if let Ok(dir) = cfg.output_dir() {
                    eprintln!("{tag}: wrote {} file(s) to {}", o.files.len() + 1, dir.display());
                }
            }
            Err(e) => eprintln!("error: {tag}: {e}"),
        }
        code = code.max(exit_code(r));
    }
    code
}
