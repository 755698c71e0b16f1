// Copyright 2026 lindsym Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line driver: argument parsing, configuration, subcommands and
//! exit codes. The binary in `main.rs` only wires these together.

pub mod commands;
pub mod config;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

pub use config::{RunConfig, SectorChoice, SweepParam};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("sweep failed at every point; first error: {0}")]
    SweepFailed(Box<CliError>),

    #[error(transparent)]
    Core(#[from] lindsym::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use lindsym::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Verification(_) => 5,
            CliError::SweepFailed(inner) => inner.exit_code(),
            CliError::Core(e) => match e {
                E::InvalidLattice(_)
                | E::InvalidArgument(_)
                | E::InvalidModel(_)
                | E::ResourceLimit(_)
                | E::SiteOutOfRange { .. } => 2,
                E::Convergence { .. } | E::LinearAlgebra(_) => 3,
                E::Reducible(_) | E::NoSteadyState(_) => 4,
                _ => 1,
            },
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "lindsym", version, about = "Symmetry-reduced Lindblad steady states")]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the dimensions of the invariant subspace and its even sector.
    Dims,
    /// Solve for the steady state and write its coefficient spectrum.
    Steady,
    /// Susceptibility over a range of one coupling.
    Sweep(SweepArgs),
    /// Susceptibility tensor at a single parameter point.
    Susceptibility,
    /// Group, symmetry, parity and brute-force consistency checks.
    Verify,
    /// Write the orbit basis and the reduced generator.
    BasisDump,
}

#[derive(Debug, Default, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub param: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub start: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub stop: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub step: Option<f64>,
}

/// Flags that override values from the configuration file.
#[derive(Debug, Default, Args)]
pub struct Overrides {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Lattice shape such as `2x3` or `6`; `dims` accepts a comma-separated list.
    #[arg(long, global = true)]
    pub lattice: Option<String>,
    /// Bond convention: `unique` or `double`.
    #[arg(long, global = true)]
    pub bonds: Option<String>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub jx: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub jy: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub jz: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub hx: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub hy: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub sector: Option<SectorChoice>,
    /// Field step of the susceptibility.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed of the random test matrices used by `verify`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Cross-check `dims` by enumerating orbits.
    #[arg(long, global = true)]
    pub enumerate: bool,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        fn set<T: Clone>(dst: &mut T, src: &Option<T>) {
            if let Some(v) = src {
                *dst = v.clone();
            }
        }
        set(&mut cfg.lattice.shape, &self.lattice);
        set(&mut cfg.lattice.bonds, &self.bonds);
        set(&mut cfg.model.jx, &self.jx);
        set(&mut cfg.model.jy, &self.jy);
        set(&mut cfg.model.jz, &self.jz);
        set(&mut cfg.model.gamma, &self.gamma);
        set(&mut cfg.field.hx, &self.hx);
        set(&mut cfg.field.hy, &self.hy);
        set(&mut cfg.solver.sector, &self.sector);
        set(&mut cfg.solver.delta, &self.delta);
        set(&mut cfg.output.dir, &self.out);
        set(&mut cfg.output.threads, &self.threads);
        set(&mut cfg.output.seed, &self.seed);
    }
}

impl SweepArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(p) = &self.param {
            cfg.sweep.param = p.clone();
        }
        if let Some(v) = self.start {
            cfg.sweep.start = v;
        }
        if let Some(v) = self.stop {
            cfg.sweep.stop = v;
        }
        if let Some(v) = self.step {
            cfg.sweep.step = v;
        }
    }
}

/// Configuration after merging the file (if any) with command-line flags.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.overrides.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    if let Command::Sweep(args) = &cli.command {
        args.apply(&mut cfg);
    }
    Ok(cfg)
}

/// Runs `cli`, writing the human-readable report to `stdout`.
pub fn run(cli: &Cli, cfg: &RunConfig, stdout: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Dims => commands::dims(cfg, cli.overrides.enumerate, stdout),
        Command::Steady => commands::steady(cfg, stdout),
        Command::Sweep(_) => commands::sweep(cfg, stdout),
        Command::Susceptibility => commands::susceptibility(cfg, stdout),
        Command::Verify => commands::verify(cfg, stdout),
        Command::BasisDump => commands::basis_dump(cfg, stdout),
    }
}
