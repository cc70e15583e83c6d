//! `aerolink` — aerosol link simulator command line.
//!
//! Exit codes: 0 success, 2 usage or configuration error, 1 runtime error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use aerolink_cli::CliError;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "aerolink",
    version,
    about = "Breath-aerosol communication link simulator",
    long_about = "Simulates aerosol dispersion channels (analytic Gaussian puff/plume, \
                  stochastic particles, finite differences) and the receiver chain \
                  (sampler, biosensor, threshold detector) for breath-borne links."
)]
pub struct Cli {
    /// Output directory (default: $AEROLINK_OUT_DIR, else the current directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Master random seed. When absent a time-derived seed is chosen and logged.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads for internal parallelism (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Print the effective configuration as JSON and exit without running.
    #[arg(long, global = true)]
    pub dump_config: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Transient puff snapshots of an instantaneous release.
    Puff(PuffArgs),
    /// Steady-state plume field of a continuous release.
    Plume(PlumeArgs),
    /// Random-walk particle run binned against the analytic puff.
    Lagrangian(LagrangianArgs),
    /// Explicit finite-difference run compared with the analytic puff.
    Euler(EulerArgs),
    /// One threshold detection with exact error probabilities.
    Detect(DetectArgs),
    /// Receiver operating characteristic sweep.
    Roc(RocArgs),
    /// End-to-end scenario from a JSON description.
    Scenario(ScenarioArgs),
    /// Analytic / particle / grid three-way field comparison.
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
pub struct PuffArgs {
    /// Released particle count Q.
    #[arg(long, visible_alias = "Q")]
    pub q: f64,
    /// Wind speed along +x, m/s.
    #[arg(long)]
    pub u: f64,
    /// Eddy diffusivity, m²/s.
    #[arg(long, visible_alias = "K")]
    pub k: f64,
    /// Source height H, m.
    #[arg(long, default_value_t = aerolink_core::medium::DEFAULT_SOURCE_HEIGHT_M)]
    pub height: f64,
    /// Mirror the source at the ground plane.
    #[arg(long)]
    pub reflect: bool,
    /// Snapshot times, comma-separated seconds (each > 0).
    #[arg(long, value_delimiter = ',', required = true)]
    pub times: Vec<f64>,
    /// Sampling plane: "z=H" or "z=<meters>".
    #[arg(long, default_value = "z=H")]
    pub plane: String,
    /// Grid extents, m (auto-sized to the puff support when omitted).
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub y_min: Option<f64>,
    #[arg(long)]
    pub y_max: Option<f64>,
    /// Cell width, m.
    #[arg(long, default_value_t = 0.005)]
    pub dx: f64,
    /// Also write an 8-bit grayscale PGM heatmap per snapshot.
    #[arg(long)]
    pub pgm: bool,
    /// Probe point "x,y,z" for an impulse-response time series.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    pub probe: Option<Vec<f64>>,
    /// Probe series step, s.
    #[arg(long, default_value_t = 0.01)]
    pub probe_dt: f64,
    /// Probe series end time, s.
    #[arg(long, default_value_t = 3.0)]
    pub probe_t_end: f64,
}

#[derive(Args, Debug)]
pub struct PlumeArgs {
    /// Release rate Q̇, particles/s.
    #[arg(long)]
    pub qdot: f64,
    #[arg(long)]
    pub u: f64,
    #[arg(long, visible_alias = "K")]
    pub k: f64,
    #[arg(long, default_value_t = aerolink_core::medium::DEFAULT_SOURCE_HEIGHT_M)]
    pub height: f64,
    #[arg(long)]
    pub reflect: bool,
    /// Sampling plane: "z=H" or "z=<meters>".
    #[arg(long, default_value = "z=H")]
    pub plane: String,
    /// Downwind extent of the grid, m (cells start one step downwind).
    #[arg(long, default_value_t = 3.0)]
    pub x_max: f64,
    #[arg(long)]
    pub y_min: Option<f64>,
    #[arg(long)]
    pub y_max: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    pub dx: f64,
    #[arg(long)]
    pub pgm: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryArg {
    None,
    Reflect,
    Absorb,
}

/// Accepts plain integers and scientific notation ("1e6").
fn parse_count(s: &str) -> Result<usize, String> {
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 => Ok(v as usize),
        _ => Err(format!("`{s}` is not a particle count")),
    }
}

#[derive(Args, Debug)]
pub struct LagrangianArgs {
    /// Tracked particle count N.
    #[arg(long, value_parser = parse_count)]
    pub n: usize,
    /// Step length, s.
    #[arg(long, default_value_t = 0.001)]
    pub dt: f64,
    /// Simulated span, s.
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, visible_alias = "Q")]
    pub q: f64,
    #[arg(long)]
    pub u: f64,
    #[arg(long, visible_alias = "K")]
    pub k: f64,
    #[arg(long, default_value_t = aerolink_core::medium::DEFAULT_SOURCE_HEIGHT_M)]
    pub height: f64,
    /// Ground handling for particles crossing z = 0.
    #[arg(long, value_enum, default_value_t = BoundaryArg::None)]
    pub boundary: BoundaryArg,
    /// Concentration bin width, m.
    #[arg(long, default_value_t = 0.02)]
    pub bin: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverBoundaryArg {
    Open,
    Reflect,
    Closed,
}

#[derive(Args, Debug)]
pub struct EulerArgs {
    #[arg(long, visible_alias = "Q")]
    pub q: f64,
    #[arg(long)]
    pub u: f64,
    #[arg(long, visible_alias = "K")]
    pub k: f64,
    #[arg(long, default_value_t = aerolink_core::medium::DEFAULT_SOURCE_HEIGHT_M)]
    pub height: f64,
    /// Grid spacing, m.
    #[arg(long)]
    pub dx: f64,
    /// Time step, s (defaults to 0.9x the stability limit; validated).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Analytic warm-start time, s (the impulse itself is never stepped).
    #[arg(long, default_value_t = 0.01)]
    pub t0: f64,
    #[arg(long)]
    pub t_end: f64,
    #[arg(long, value_enum, default_value_t = SolverBoundaryArg::Open)]
    pub boundary: SolverBoundaryArg,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum NoiseArg {
    Poisson,
    Gaussian,
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    /// Background expected count.
    #[arg(long)]
    pub lambda0: f64,
    /// Signal-present expected count (must exceed lambda0).
    #[arg(long)]
    pub lambda1: f64,
    /// Fixed decision threshold.
    #[arg(long, conflicts_with = "target_pfa")]
    pub tau: Option<f64>,
    /// Choose the smallest threshold meeting this false-alarm target.
    #[arg(long)]
    pub target_pfa: Option<f64>,
    /// Observed count/statistic; drawn from the signal-present model when omitted.
    #[arg(long)]
    pub observation: Option<f64>,
    #[arg(long, value_enum, default_value_t = NoiseArg::Poisson)]
    pub noise: NoiseArg,
    #[arg(long, default_value_t = 1.0)]
    pub gain: f64,
    /// Gaussian noise standard deviation.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
}

#[derive(Args, Debug)]
pub struct RocArgs {
    #[arg(long)]
    pub lambda0: f64,
    #[arg(long)]
    pub lambda1: f64,
    #[arg(long, value_enum, default_value_t = NoiseArg::Poisson)]
    pub noise: NoiseArg,
    #[arg(long, default_value_t = 1.0)]
    pub gain: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Explicit thresholds (comma separated); defaults to a full sweep.
    #[arg(long, value_delimiter = ',')]
    pub taus: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
pub struct ScenarioArgs {
    /// Scenario description file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Override the file's sync offset, s.
    #[arg(long)]
    pub sync_offset: Option<f64>,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long, visible_alias = "Q", default_value_t = 40_000.0)]
    pub q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub u: f64,
    #[arg(long, visible_alias = "K", default_value_t = 0.03)]
    pub k: f64,
    #[arg(long, default_value_t = aerolink_core::medium::DEFAULT_SOURCE_HEIGHT_M)]
    pub height: f64,
    /// Analytic warm-start time for the grid solver, s.
    #[arg(long, default_value_t = 0.05)]
    pub t0: f64,
    /// Comparison time, s.
    #[arg(long, default_value_t = 0.2)]
    pub t_end: f64,
    /// Particle count for the stochastic leg.
    #[arg(long, default_value_t = 200_000, value_parser = parse_count)]
    pub n: usize,
    /// Particle step, s.
    #[arg(long, default_value_t = 0.001)]
    pub lagrangian_dt: f64,
    /// Grid-solver spacing, m.
    #[arg(long, default_value_t = 0.005)]
    pub euler_dx: f64,
    /// Comparison bin width, m (must be a multiple of euler-dx).
    #[arg(long, default_value_t = 0.02)]
    pub bin: f64,
    /// Compare only cells with analytic value at least this fraction of peak.
    #[arg(long, default_value_t = 0.01)]
    pub mask: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Ignore "already built": tests may run several commands in-process.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
