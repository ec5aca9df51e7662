//! Command-line surface for the quantum-walk search simulator. Each
//! subcommand runs one experiment, writes machine-readable outputs (CSV,
//! JSON, optional SVG) into the output directory, and finishes with a
//! manifest listing every file it produced.

mod config;
mod emit;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ctqw", version, about = "Quantum-walk spatial search on the 2D grid")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run one search and emit its time series and result summary
    Search(SearchArgs),
    /// Sweep grid sizes and optionally fit a scaling law to the times
    Sweep(SweepArgs),
    /// Sweep the rescaling strength c at fixed grid size
    SweepC(SweepCArgs),
    /// Integrate the two-level reduced model instead of the full lattice
    Reduced(ReducedArgs),
    /// Evaluate the self-consistent overlap ansatz on a time grid
    Ansatz(AnsatzArgs),
    /// Sweep grid sizes and emit the peak width per size
    Peakwidth(PeakwidthArgs),
}

/// Flags shared by every subcommand.
#[derive(Args)]
pub struct CommonArgs {
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Flat key=value config file; explicit flags take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args)]
pub struct SearchArgs {
    /// Grid side length (even, at least 4)
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// linear | nonlinear
    #[arg(long)]
    pub mode: Option<String>,
    /// Nonlinearity strength: a number, or auto for ln(N)/pi
    #[arg(long)]
    pub g: Option<String>,
    /// Rescaling strength: a number, auto, half-inverse-E, or inverse-E
    #[arg(long)]
    pub c: Option<String>,
    /// Integrator time step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Evolution horizon: a number, or auto for 3pi/(2E)
    #[arg(long = "t-max")]
    pub t_max: Option<String>,
    /// Marked vertex as wx,wy,ax,ay (cell and in-cell offset), or auto
    #[arg(long)]
    pub marked: Option<String>,
    /// Time-series output format: csv | json | both
    #[arg(long)]
    pub format: Option<String>,
    /// Also render the overlap probability as an SVG plot
    #[arg(long)]
    pub svg: bool,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct SweepArgs {
    /// Comma-separated grid sides, e.g. 10,14,20
    #[arg(long = "L-list")]
    pub l_list: Option<String>,
    /// linear | nonlinear
    #[arg(long)]
    pub mode: Option<String>,
    /// Fit model: sqrt_NlogN | quarter_power | inverse_log | custom:<gamma>
    #[arg(long)]
    pub fit: Option<String>,
    /// Worker threads (default: available parallelism; 1 is bitwise stable)
    #[arg(long)]
    pub workers: Option<usize>,
    /// Integrator time step
    #[arg(long)]
    pub dt: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct SweepCArgs {
    /// Grid side length
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Comma-separated rescaling strengths, e.g. 0,2,5.52,11,20
    #[arg(long = "c-list")]
    pub c_list: Option<String>,
    /// Worker threads
    #[arg(long)]
    pub workers: Option<usize>,
    /// Integrator time step
    #[arg(long)]
    pub dt: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct ReducedArgs {
    /// Grid side length (sets N = L^2)
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Nonlinearity strength: a number, or auto for ln(N)/pi
    #[arg(long)]
    pub g: Option<String>,
    /// Rescaling strength: a number, auto, half-inverse-E, or inverse-E
    #[arg(long)]
    pub c: Option<String>,
    /// Integrator time step
    #[arg(long)]
    pub dt: Option<f64>,
    /// Integration horizon: a number, or auto
    #[arg(long = "t-max")]
    pub t_max: Option<String>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct AnsatzArgs {
    /// Overlap amplitude shape constant
    #[arg(long = "A")]
    pub amplitude: Option<f64>,
    /// Slow-phase shape constant
    #[arg(long = "C0")]
    pub c0: Option<f64>,
    /// Feedback-phase shape constant
    #[arg(long = "C1")]
    pub c1: Option<f64>,
    /// End of the time grid: a number, or auto
    #[arg(long = "t-max")]
    pub t_max: Option<String>,
    /// Grid side length (sets N = L^2)
    #[arg(long = "L")]
    pub l: Option<usize>,
    /// Nonlinearity strength: a number, or auto
    #[arg(long)]
    pub g: Option<String>,
    /// Rescaling strength: a number, auto, half-inverse-E, or inverse-E
    #[arg(long)]
    pub c: Option<String>,
    /// Time-grid spacing
    #[arg(long)]
    pub dt: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args)]
pub struct PeakwidthArgs {
    /// Comma-separated grid sides
    #[arg(long = "L-list")]
    pub l_list: Option<String>,
    /// Coupling rule per size: sqrt (g, c ~ sqrt N) | log (g = ln N/pi)
    #[arg(long)]
    pub rule: Option<String>,
    /// Fit model for the widths: custom:<gamma> and friends
    #[arg(long)]
    pub fit: Option<String>,
    /// Worker threads
    #[arg(long)]
    pub workers: Option<usize>,
    /// Integrator time step (default 0.002 under sqrt, 0.01 under log)
    #[arg(long)]
    pub dt: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn main() {
    // clap handles usage errors itself with exit code 2
    let cli = Cli::parse();
    if let Err(err) = run::dispatch(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
