use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "htype",
    version,
    about = "Heat kernels, log-Sobolev potentials and DLS constants on H-type groups",
    long_about = "Every command prints one JSON document on stdout (inputs, outputs with \
                  error estimates, and a run manifest). Exit codes: 0 success, 2 invalid \
                  input, 3 numerical or certification failure, 4 verification failure."
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "HTYPE_WORKERS")]
    #[serde(skip)]
    pub workers: Option<usize>,

    /// Relative tolerance of the adaptive kernel quadrature.
    #[arg(long = "tol-quad", global = true, default_value_t = 1e-12)]
    pub tol_quad: f64,

    /// Acceptance threshold on root residuals (geodesic parameters).
    #[arg(long = "tol-root", global = true, default_value_t = 1e-12)]
    pub tol_root: f64,

    /// Grid nodes per axis for the minimisation of W.
    #[arg(long, global = true, default_value_t = 200)]
    pub grid: usize,

    /// Also write the command's table as CSV to this path.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub csv: Option<PathBuf>,

    /// Record wall-clock time in the manifest (output is then no longer
    /// byte-identical across runs).
    #[arg(long, global = true)]
    #[serde(skip)]
    pub timing: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Dims {
    /// Half the horizontal dimension.
    #[arg(long)]
    pub n: usize,
    /// Centre dimension.
    #[arg(long)]
    pub m: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RouteArg {
    Auto,
    Radial,
    Contour,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    /// Defective log-Sobolev inequality for the heat measure p_t.
    Dls,
    /// Euclidean-type log-Sobolev inequality for Haar measure.
    LogForm,
    /// Log-Sobolev inequality for exp(-d^2/2) dmu.
    DistanceLsi,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    /// The versioned verification family.
    Standard,
    /// Ground-state transported translates (stress family).
    Transported,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Heat kernel p_t and its radial derivatives on a grid of profiles.
    Kernel(KernelArgs),
    /// Sub-Riemannian distance from the identity.
    Distance(DistanceArgs),
    /// The potential W_{t,C}, pointwise or along a ray.
    Potential(PotentialArgs),
    /// Global minimum of W_{1,theta}.
    MinW(MinWArgs),
    /// Certified defect eta of DLS(theta, eta).
    Eta(EtaArgs),
    /// Closed-form constants.
    Constants(ConstantsArgs),
    /// Concentration bounds from the Herbst argument.
    Herbst(HerbstArgs),
    /// Inequality margins on a test-function family.
    Verify(VerifyArgs),
    /// Monte Carlo horizontal Brownian motion.
    Sample(SampleArgs),
    /// Anisotropic Heisenberg group quantities.
    Aniso(AnisoArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dims: Dims,
    /// R = |x|^2 / 4 (comma-separated list).
    #[arg(long = "R", value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
    /// |z| (comma-separated list).
    #[arg(long, value_delimiter = ',', required = true)]
    pub z: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Order of the derivative in R.
    #[arg(long, default_value_t = 0)]
    pub k1: u32,
    /// Order of the derivative in |z|.
    #[arg(long, default_value_t = 0)]
    pub k2: u32,
    #[arg(long, value_enum, default_value_t = RouteArg::Auto)]
    pub route: RouteArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DistanceArgs {
    #[arg(long = "R", value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PotentialArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dims: Dims,
    /// The constant C (comma-separated list).
    #[arg(long = "C", value_delimiter = ',', required = true)]
    pub c: Vec<f64>,
    #[arg(long = "R", value_delimiter = ',')]
    pub r: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub z: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Tabulate W_{1,C} along the ray |z| = omega R and classify it.
    #[arg(long)]
    pub probe: bool,
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long = "r-min", default_value_t = 25.0)]
    pub r_min: f64,
    #[arg(long = "r-max", default_value_t = 400.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 12)]
    pub points: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MinWArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dims: Dims,
    #[arg(long)]
    pub theta: f64,
    /// Initial search box extent in R (default depends on theta).
    #[arg(long = "r-box")]
    pub r_box: Option<f64>,
    /// Initial search box extent in |z|.
    #[arg(long = "z-box")]
    pub z_box: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EtaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dims: Dims,
    #[arg(long)]
    pub theta: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConstantsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dims: Dims,
    /// Gradient weight of the Haar log-Sobolev constant.
    #[arg(long, default_value_t = 2.0)]
    pub tau: f64,
    /// Also integrate c = int exp(-d^2/2) dmu (concrete models only).
    #[arg(long = "gaussian-like")]
    pub gaussian_like: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HerbstArgs {
    #[arg(long)]
    pub eta: f64,
    #[arg(long)]
    pub theta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// K(1) = log int e^g dmu_t.
    #[arg(long)]
    pub k1: f64,
    /// Tail radii (comma-separated list).
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dims: Dims,
    #[arg(long, value_enum, default_value_t = Inequality::Dls)]
    pub inequality: Inequality,
    /// Gradient weight (default 5 for dls, 2 for distance-lsi).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Defect (default: certified eta for dls, K_{n,m} for distance-lsi).
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, value_enum, default_value_t = FamilyArg::Standard)]
    pub family: FamilyArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dims: Dims,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Time steps per path (default max(64, 512 t)).
    #[arg(long)]
    pub steps: Option<usize>,
    /// Fernique exponent.
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    /// Tail radii of g = min(d, cap).
    #[arg(long, value_delimiter = ',', default_value = "4,5,6")]
    pub radii: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub cap: f64,
    /// DLS weight for the Herbst columns (needs --eta as well).
    #[arg(long, requires = "eta")]
    pub theta: Option<f64>,
    #[arg(long, requires = "theta")]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AnisoArgs {
    /// Block frequencies, strictly increasing.
    #[arg(long, value_delimiter = ',', required = true)]
    pub alphas: Vec<f64>,
    /// Block multiplicities.
    #[arg(long = "mult", value_delimiter = ',', required = true)]
    pub multiplicities: Vec<usize>,
    /// Block norms |P_j(x)|.
    #[arg(long, value_delimiter = ',', required = true)]
    pub norms: Vec<f64>,
    #[arg(long)]
    pub z: f64,
    #[arg(long, default_value_t = 1.0)]
    pub t: f64,
    /// Check the expansion along the balanced ray |z| = omega R.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Values of R on the ray.
    #[arg(long = "ray-r", value_delimiter = ',', default_value = "25,50,100,200")]
    pub ray_r: Vec<f64>,
}
