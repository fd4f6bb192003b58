//! `dentlab`: run dentability experiments on JSON point clouds.
//!
//! Exit codes: 0 success, 2 invalid input or arguments, 3 capacity exceeded
//! or output not writable. `DENTLAB_THREADS` caps the worker pool.

mod commands;
mod config;
mod emit;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use config::{Emit, ModeArg, Resolver};
use emit::OutputError;

#[derive(Parser)]
#[command(name = "dentlab", version, about = "Dentability experiments on finite point clouds")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

/// Options shared by every subcommand. Each may also come from the JSON
/// config file under its snake_case name; flags win.
#[derive(Args, Clone, Debug)]
pub struct Common {
    /// JSON object of parameter defaults
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub emit: Option<Emit>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub sep_tol: Option<f64>,
    #[arg(long, global = true)]
    pub osc_tol: Option<f64>,
    /// Candidate budget for randomized searches
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    #[arg(long, global = true)]
    pub max_points_plane: Option<usize>,
    #[arg(long, global = true)]
    pub max_points_scalar: Option<usize>,
    #[arg(long, global = true)]
    pub max_points_general: Option<usize>,
    #[arg(long, global = true)]
    pub max_cliques: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Full derivation and the index Dz(f, eps)
    DentIndex(DentArgs),
    /// One derivation stage plus a small-slice search
    Derive(DeriveArgs),
    /// Strongly slicing density scan, or a slicing profile with --direction
    SsScan(ScanArgs),
    /// Envelope error curve and convex split checks
    DcApprox(DcApproxArgs),
    /// Renorming function and its midpoint drop inequality
    RenormCheck(RenormArgs),
    /// Standard clouds and trees in the JSON cloud format
    GenExample(GenArgs),
    /// Martingale construction on a cloud or a tree
    Martingale(MartingaleArgs),
    /// Simultaneous small slice for several maps on one cloud
    EquiSlice(EquiArgs),
}

#[derive(Args)]
pub struct DentArgs {
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Point ids to start from (default: all)
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<String>>,
}

#[derive(Args)]
pub struct DeriveArgs {
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<String>>,
}

#[derive(Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub input: Option<String>,
    /// Largest allowed |u - y*|
    #[arg(long)]
    pub eps: Option<f64>,
    /// Oscillation to reach (default: eps)
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub dirs: Option<usize>,
    /// Report the slicing profile of this functional instead
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub direction: Option<Vec<f64>>,
}

#[derive(Args)]
pub struct DcApproxArgs {
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<u32>>,
    /// Mesh of the split-check grid (default: diameter / 64, Halton in d >= 3)
    #[arg(long)]
    pub grid_mesh: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Args)]
pub struct RenormArgs {
    #[arg(long)]
    pub input: Option<String>,
    /// Number of dyadic scales
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Multiply the stored sample values of F by this factor
    #[arg(long)]
    pub fault_scale: Option<f64>,
}

#[derive(Args)]
pub struct GenArgs {
    /// grid, simplex, ball or square
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub tree_depth: Option<usize>,
    #[arg(long)]
    pub tree_eps: Option<f64>,
    #[arg(long)]
    pub branching: Option<usize>,
    /// default, identity or norm-one
    #[arg(long)]
    pub map: Option<String>,
}

#[derive(Args)]
pub struct MartingaleArgs {
    #[arg(long)]
    pub input: Option<String>,
    #[arg(long)]
    pub tree_depth: Option<usize>,
    #[arg(long)]
    pub tree_eps: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub depth: Option<usize>,
}

#[derive(Args)]
pub struct EquiArgs {
    /// Map files on a common cloud; repeat the flag
    #[arg(long)]
    pub input: Option<Vec<String>>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub subset: Option<Vec<String>>,
}

fn threads() -> Result<()> {
    if let Ok(v) = std::env::var("DENTLAB_THREADS") {
        let n: usize = v.parse().ok().filter(|&n| n > 0).context("DENTLAB_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    threads()?;
    let c = &cli.common;
    match cli.command {
        Command::DentIndex(a) => dispatch("dent-index", c, |r| commands::dent_index(a, r)),
        Command::Derive(a) => dispatch("derive", c, |r| commands::derive(a, r)),
        Command::SsScan(a) => dispatch("ss-scan", c, |r| commands::ss_scan(a, r)),
        Command::DcApprox(a) => dispatch("dc-approx", c, |r| commands::dc_approx(a, r)),
        Command::RenormCheck(a) => dispatch("renorm-check", c, |r| commands::renorm_check(a, r)),
        Command::GenExample(a) => dispatch("gen-example", c, |r| commands::gen_example(a, r)),
        Command::Martingale(a) => dispatch("martingale", c, |r| commands::martingale(a, r)),
        Command::EquiSlice(a) => dispatch("equi-slice", c, |r| commands::equi(a, r)),
    }
}

fn dispatch(name: &str, common: &Common, f: impl FnOnce(&mut Resolver) -> Result<emit::Output>) -> Result<()> {
    let mut r = Resolver::new(name, common)?;
    let out = f(&mut r)?;
    emit::write(&out, &r.config)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<OutputError>().is_some() {
        return 3;
    }
    match e.downcast_ref::<dentlab_core::Error>() {
        Some(dentlab_core::Error::Capacity(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
