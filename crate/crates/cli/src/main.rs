mod artifacts;
mod stages;
mod sweeps;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use gelfand_core::experiment::{ExperimentConfig, ForwardRoute};
use std::path::{Path, PathBuf};

/// Zero-energy Gel'fand-Calderon reconstruction experiments.
#[derive(Debug, Parser)]
#[command(name = "gelfand", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// TOML experiment config; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts and reports.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Noise seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Forward solver (overrides the config).
    #[arg(long, global = true, value_enum)]
    forward: Option<Route>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Route {
    Radial,
    Fd,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// DtN maps of v and of the zero background.
    Forward {
        /// Pick the truncation degree for this rho.
        #[arg(long, default_value_t = 3.0)]
        rho: f64,
        /// Explicit truncation degree.
        #[arg(long)]
        degree: Option<usize>,
        /// Operator-norm noise added to the DtN map of v.
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
    },
    /// Scattering data on the boundary ring from the stored DtN maps.
    Scatter {
        #[arg(long)]
        rho: f64,
    },
    /// D-bar solve from the stored ring slice.
    Dbar,
    /// Band-limited inversion of the stored estimates and error report.
    Reconstruct,
    /// Naive and effectivized errors over the configured rho list.
    SweepRho,
    /// Reconstruction error against noise level.
    SweepNoise,
    /// Evaluates the c6 constant and the q identity.
    VerifyConstants {
        #[arg(long, default_value_t = gelfand_core::constants::C6_DEFAULT_R_MAX)]
        r_max: f64,
    },
}

fn load_config(g: &Global) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = match &g.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = g.seed {
        cfg.noise.seed = seed;
    }
    if let Some(route) = g.forward {
        cfg.forward = match route {
            Route::Radial => ForwardRoute::Radial,
            Route::Fd => ForwardRoute::Fd,
        };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn save_config(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    std::fs::write(out.join("config.toml"), toml::to_string(cfg)?)?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if cli.global.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    let cfg = load_config(&cli.global)?;
    let out = &cli.global.out;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    save_config(&cfg, out)?;
    match cli.command {
        Command::Forward { rho, degree, delta } => stages::forward(&cfg, out, degree.unwrap_or(cfg.degree_for(rho)), delta),
        Command::Scatter { rho } => stages::scatter(&cfg, out, rho),
        Command::Dbar => stages::dbar(&cfg, out),
        Command::Reconstruct => stages::reconstruct(&cfg, out),
        Command::SweepRho => sweeps::rho(&cfg, out),
        Command::SweepNoise => sweeps::noise(&cfg, out),
        Command::VerifyConstants { r_max } => stages::verify_constants(out, r_max),
    }
}
