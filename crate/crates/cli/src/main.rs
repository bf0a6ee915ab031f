mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Overrides, RunConfig};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numerical(landau_core::Error),
    Output(String),
}

impl From<landau_core::Error> for CliError {
    fn from(e: landau_core::Error) -> Self {
        if e.is_input_error() {
            CliError::Config(e.to_string())
        } else {
            CliError::Numerical(e)
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(e) => write!(f, "numerical failure: {e}"),
            CliError::Output(m) => write!(f, "cannot write output: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) | CliError::Output(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "landau", version, about = "Landau-level reduction of periodic magnetic Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Split the field into B_c and gauge potentials.
    Decompose(Common),
    /// Band sweep over the xi grid: bands, band measures and lambda_m.
    Spectrum(Common),
    /// Reconstruct one generalized eigenfunction.
    Eigfun {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, allow_hyphen_values = true)]
        k: Option<i32>,
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<f64>,
    },
    /// Reduction log, diophantine report and Morse check.
    Diagnostics(Common),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    eps0: Option<f64>,
    #[arg(long)]
    eps1: Option<f64>,
    #[arg(long)]
    mmax: Option<usize>,
    #[arg(long)]
    nwindow: Option<usize>,
    #[arg(long)]
    xigrid: Option<usize>,
    /// Highest protected level.
    #[arg(long)]
    seedlevel: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::load(&self.config)?;
        cfg.apply(&Overrides {
            out: self.out.clone(),
            workers: self.workers,
            eps0: self.eps0,
            eps1: self.eps1,
            m_max: self.mmax,
            n_window: self.nwindow,
            xi_points: self.xigrid,
            m_protect: self.seedlevel,
        });
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (common, name) = match &cli.command {
        Command::Decompose(c) => (c, "decompose"),
        Command::Spectrum(c) => (c, "spectrum"),
        Command::Eigfun { common, .. } => (common, "eigfun"),
        Command::Diagnostics(c) => (c, "diagnostics"),
    };
    let mut cfg = common.resolve()?;
    if let Command::Eigfun { m, k, xi, .. } = &cli.command {
        cfg.eigfun.m = m.unwrap_or(cfg.eigfun.m);
        cfg.eigfun.k = k.unwrap_or(cfg.eigfun.k);
        cfg.eigfun.xi = xi.unwrap_or(cfg.eigfun.xi);
    }
    // a second initialization attempt in the same process is harmless
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build_global();

    let out = match name {
        "decompose" => commands::decompose(&cfg)?,
        "spectrum" => commands::spectrum(&cfg)?,
        "eigfun" => {
            let (out, s) = commands::eigfun(&cfg)?;
            println!("lambda {:.16e}", s.lambda);
            println!("residual {:.16e}", s.residual);
            out
        }
        _ => commands::diagnostics(&cfg)?,
    };
    for p in &out.written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("landau: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
