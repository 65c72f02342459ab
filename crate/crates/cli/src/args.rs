use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Dispersion relations for surface waves on vertically sheared currents.
#[derive(Parser, Debug)]
#[command(name = "wavepath", version, about)]
pub struct Cli {
    /// Worker threads for independent sub-tasks (0 = all cores)
    #[arg(long, global = true, env = "WAVEPATH_JOBS", default_value_t = 0)]
    pub jobs: usize,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = OutFormat::Csv)]
    pub format: OutFormat,

    /// Write results here instead of standard output
    #[arg(short, long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Toggle {
    Auto,
    On,
    Off,
}

#[derive(Args, Debug, Clone)]
pub struct ProfileArgs {
    /// Built-in profile: UT, quiescent, linear, polynomial, CR
    #[arg(long, default_value = "UT", conflicts_with = "profile_file")]
    pub profile: String,

    /// Profile specification JSON file (overrides --profile)
    #[arg(long)]
    pub profile_file: Option<PathBuf>,

    /// Parameter override for a built-in profile, e.g. `gamma=0.5` (repeatable)
    #[arg(long = "param", value_name = "NAME=VALUE")]
    pub params: Vec<String>,

    /// Froude number squared (overrides the profile's value)
    #[arg(long = "F2")]
    pub f2: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct GridArgs {
    /// Collocation order N_z
    #[arg(long = "Nz", default_value_t = 64)]
    pub n_z: usize,

    /// Water depth of the collocation grid
    #[arg(long, default_value_t = 1.0)]
    pub depth: f64,
}

#[derive(Args, Debug, Clone)]
pub struct TolArgs {
    /// Local error tolerance of the path integrator
    #[arg(long, default_value_t = 1e-11)]
    pub tol: f64,
}

#[derive(Args, Debug, Clone)]
pub struct DepthArgs {
    /// Truncation tolerance δ (default: machine epsilon)
    #[arg(long, default_value_t = f64::EPSILON)]
    pub delta: f64,

    #[arg(long, default_value_t = 0.3)]
    pub c_min: f64,

    #[arg(long, default_value_t = 0.8)]
    pub c_max: f64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Phase velocity c at given wavenumbers (collocation, one solve per k)
    SolveForward {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Wavenumbers (comma separated)
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<f64>,
        /// Direction of the wave vector in radians
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Include eigenvectors in JSON output
        #[arg(long)]
        eigvec: bool,
        /// Save the first solution as a seed record
        #[arg(long)]
        export_seed: Option<PathBuf>,
    },
    /// Wavenumber k for given phase velocities
    SolveBackward {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        c: Vec<f64>,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long)]
        eigvec: bool,
    },
    /// Dispersion curve c(k) by radial path following
    Path {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        k_min: f64,
        #[arg(long)]
        k_max: f64,
        /// Seed wavenumber (default: geometric midpoint)
        #[arg(long)]
        k_seed: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Evaluate the dense output at this many evenly spaced k (default: control points)
        #[arg(long)]
        query: Option<usize>,
        /// Space query points logarithmically
        #[arg(long)]
        log_spacing: bool,
        /// Integrate in ln k (auto: when the interval spans more than two decades)
        #[arg(long, value_enum, default_value_t = Toggle::Auto)]
        log_k: Toggle,
        /// Seed record to start from instead of a collocation solve
        #[arg(long)]
        seed: Option<PathBuf>,
    },
    /// Dispersion curve c(θ) at fixed k by angular path following
    PathAngular {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        k0: f64,
        #[arg(long, default_value_t = 0.0)]
        theta_min: f64,
        #[arg(long, default_value_t = std::f64::consts::TAU)]
        theta_max: f64,
        #[arg(long)]
        query: Option<usize>,
    },
    /// Precompute a polar field for scattered (k, θ) queries
    GridBuild {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        tol: TolArgs,
        #[arg(long)]
        k_min: f64,
        #[arg(long)]
        k_max: f64,
        /// Number of log-spaced radii
        #[arg(long, default_value_t = 64)]
        nk: usize,
        /// Number of equispaced angles over a full turn
        #[arg(long, default_value_t = 64)]
        ntheta: usize,
        /// Nominal radius of the angular path (default: geometric midpoint)
        #[arg(long)]
        k0: Option<f64>,
        /// Field container to write
        #[arg(long)]
        field: PathBuf,
    },
    /// Query a saved polar field
    GridQuery {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        k: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        theta: Vec<f64>,
    },
    /// Large-k dispersion curve with depth truncation and blending
    AdaptivePath {
        #[command(flatten)]
        profile: ProfileArgs,
        /// Collocation order N_z
        #[arg(long = "Nz", default_value_t = 64)]
        n_z: usize,
        #[command(flatten)]
        tol: TolArgs,
        #[command(flatten)]
        depth: DepthArgs,
        #[arg(long)]
        k_min: f64,
        #[arg(long)]
        k_max: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long)]
        query: Option<usize>,
        #[arg(long, value_enum, default_value_t = Toggle::Auto)]
        log_k: Toggle,
        /// Write the depth plan as JSON
        #[arg(long)]
        plan_out: Option<PathBuf>,
    },
    /// Chebyshev coefficients of the eigenvector and the resolution verdict
    Convergence {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Truncate the grid at the effective depth for this δ
        #[arg(long)]
        delta: Option<f64>,
    },
    /// Backward errors and condition numbers over a k sweep
    Stability {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 0.1)]
        k_min: f64,
        #[arg(long, default_value_t = 20.0)]
        k_max: f64,
        #[arg(long, default_value_t = 20)]
        nk: usize,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
    },
    /// Timing table: collocation against path following
    Bench {
        #[command(flatten)]
        profile: ProfileArgs,
        #[arg(long, default_value_t = 0.2)]
        k_min: f64,
        #[arg(long, default_value_t = 20.0)]
        k_max: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [10usize, 30, 100, 300])]
        nq: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [1e-4, 1e-7])]
        targets: Vec<f64>,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
    },
    /// Velocity and pressure amplitudes through the depth
    FlowField {
        #[command(flatten)]
        profile: ProfileArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
    },
}
