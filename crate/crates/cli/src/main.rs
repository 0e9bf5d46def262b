mod commands;

use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use terracini_core::lab::Experiment;

/// Condition numbers, orbit distances and decompositions of tensor rank
/// decompositions.
#[derive(Debug, Parser)]
#[command(name = "terracini", version)]
pub struct Cli {
    /// Cap on worker threads.
    #[arg(long, global = true, env = "TERRACINI_THREADS")]
    pub threads: Option<usize>,

    /// Stopping tolerance of the per-pair scaling search in `distance`.
    #[arg(long, global = true, value_parser = positive)]
    pub distance_tol: Option<f64>,

    /// Print diagnostics on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Random decomposition with seeded factor entries.
    Gen(GenArgs),
    /// Condition report of a decomposition.
    Cond(CondArgs),
    /// Terracini's matrix of a decomposition.
    Terracini(MatrixArgs),
    /// Kernel basis of Terracini's matrix.
    Kernel(MatrixArgs),
    /// Distance between two decompositions modulo scaling and permutation.
    Distance(DistanceArgs),
    /// Iterated scaling along a kernel direction.
    Isl(IslArgs),
    /// Direct decomposition of an order-3 tensor.
    Gevd(GevdArgs),
    /// Kruskal ranks of the factor matrices.
    Kruskal(KruskalArgs),
    /// Seeded experiment; writes CSV rows.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Comma separated dimensions.
    #[arg(long, value_delimiter = ',', required = true)]
    pub dims: Vec<usize>,
    #[arg(long)]
    pub rank: usize,
    #[arg(long)]
    pub seed: u64,
    /// Uniform entries on [0, 1) instead of standard normal.
    #[arg(long)]
    pub uniform: bool,
    /// Also write the generated tensor here.
    #[arg(long)]
    pub tensor: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CondArgs {
    pub input: PathBuf,
    /// Evaluate at the given representative without norm balancing.
    #[arg(long)]
    pub unbalanced: bool,
    /// Report as singular when ς_N ≤ tol·ς_1.
    #[arg(long, value_parser = positive)]
    pub svd_tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct MatrixArgs {
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistanceArgs {
    pub a: PathBuf,
    pub b: PathBuf,
}

#[derive(Debug, Args)]
pub struct IslArgs {
    pub input: PathBuf,
    /// Norm of the kernel perturbation.
    #[arg(long, value_parser = positive)]
    pub nabla_norm: f64,
    /// Kernel column index, or `random:<seed>` for a random combination.
    #[arg(long, default_value = "0")]
    pub kernel_dir: commands::KernelDir,
    /// Write the ‖∇‖ trace as CSV.
    #[arg(long)]
    pub trace_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GevdArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub rank: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KruskalArgs {
    pub input: PathBuf,
    #[arg(long, value_parser = positive)]
    pub kruskal_tol: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(value_parser = parse_experiment)]
    pub name: Experiment,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub s_min: Option<u32>,
    #[arg(long)]
    pub s_max: Option<u32>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ExperimentArgs {
    pub fn range(&self) -> Option<RangeInclusive<u32>> {
        if self.s_min.is_none() && self.s_max.is_none() {
            return None;
        }
        let def = self.name.default_range();
        Some(self.s_min.unwrap_or(*def.start())..=self.s_max.unwrap_or(*def.end()))
    }
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("expected a positive number, got {s}"))
    }
}

fn parse_experiment(s: &str) -> Result<Experiment, String> {
    s.parse().map_err(|e| {
        let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
        format!("{e}; expected one of {}", names.join(", "))
    })
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
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(status) => ExitCode::from(status as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status() as u8)
        }
    }
}
