//! `surfscale` command-line front end.

mod run;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "surfscale", version, about = "Surface-order statistics of Poisson samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a Poisson or binomial sample from a scene.
    Sample(SampleArgs),
    /// Voronoi diagram of a sample, as JSON or SVG.
    Voronoi(VoronoiArgs),
    /// Voronoi reconstruction volume and symmetric difference.
    EstimateVolume(VolumeArgs),
    /// Corrected perimeter (or weighted boundary integral) of a planar scene.
    EstimateSurface(SurfaceArgs),
    /// Maximal points of the sample inside the scene region.
    Maximal(MaximalArgs),
    /// Voronoi navigation path along a curve.
    Navigate(NavigateArgs),
    /// Limit constants: half-space Monte Carlo or closed forms.
    Constants(ConstantsArgs),
    /// Log-log scaling of mean and variance along a level grid.
    VerifyScaling(ExperimentArgs),
    /// Kolmogorov distance to the normal law along a level grid.
    VerifyClt(ExperimentArgs),
    /// Variance gap between coupled binomial and Poissonized input.
    CompareBinomial(CompareArgs),
}

#[derive(Args, Clone)]
struct SampleSource {
    /// Scene name, e.g. disk:0.25, triangle-pareto, sphere:0.3.
    #[arg(long, default_value = "disk")]
    scene: String,
    /// Poisson intensity λ.
    #[arg(long)]
    lambda: Option<f64>,
    /// Binomial sample size (instead of --lambda).
    #[arg(long, conflicts_with = "lambda")]
    n: Option<u64>,
    /// Read points from a CSV file instead of sampling.
    #[arg(long, conflicts_with_all = ["lambda", "n"])]
    input: Option<PathBuf>,
    /// Master seed (required when sampling).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Boundary {
    Clip,
    Torus,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    src: SampleSource,
    /// Output file (`.bin` for the binary format, CSV otherwise); stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DiagramFormat {
    Json,
    Svg,
}

#[derive(Args)]
struct VoronoiArgs {
    #[command(flatten)]
    src: SampleSource,
    #[arg(long, value_enum, default_value = "clip")]
    boundary: Boundary,
    #[arg(long, value_enum, default_value = "json")]
    format: DiagramFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VolumeArgs {
    #[command(flatten)]
    src: SampleSource,
    #[arg(long, value_enum, default_value = "clip")]
    boundary: Boundary,
    /// Monte Carlo probes per site where cells cannot be clipped exactly.
    #[arg(long, default_value_t = 256)]
    probes_per_site: usize,
    /// Per-point ν⁻ scores as CSV.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Weight {
    One,
    X1,
}

#[derive(Args)]
struct SurfaceArgs {
    #[command(flatten)]
    src: SampleSource,
    #[arg(long, value_enum, default_value = "clip")]
    boundary: Boundary,
    /// Weight function f in ∫ f dH¹.
    #[arg(long, value_enum, default_value = "one")]
    weight: Weight,
    /// Correction constant; the frozen μ(α,1) fixture when absent.
    #[arg(long)]
    correction: Option<f64>,
    /// Per-point α scores as CSV.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MaximalArgs {
    #[command(flatten)]
    src: SampleSource,
    /// Per-point ζ scores as CSV.
    #[arg(long)]
    scores: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NavigateArgs {
    #[command(flatten)]
    src: SampleSource,
    /// diagonal, segment:x0,y0,x1,y1 or circle:cx,cy,r.
    #[arg(long, default_value = "diagonal")]
    curve: String,
    /// Bisection tolerance in the curve parameter.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum ConstantKind {
    /// μ(ξ, d−1) or, with --scene, μ(ξ, ∂A).
    Mu,
    /// ν(ξ, d−1).
    Nu,
    /// σ²(ξ, ∂A); needs --scene.
    Sigma2,
}

#[derive(Args)]
struct ConstantsArgs {
    /// Half-space score: alpha, zeta, nu-minus, nu-plus, slab[:w], with optional ^2.
    #[arg(long, default_value = "alpha")]
    xi: String,
    /// Dimension of the boundary (d − 1).
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, value_enum, default_value = "mu")]
    kind: ConstantKind,
    /// Integrate over the boundary of this scene.
    #[arg(long)]
    scene: Option<String>,
    /// Closed form for ζ on a graph scene (no simulation).
    #[arg(long, requires = "scene")]
    closed_form: bool,
    /// Intensity of the half-space process.
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    /// Outward normal, comma separated.
    #[arg(long, value_delimiter = ',')]
    normal: Option<Vec<f64>>,
    /// Replicates per height.
    #[arg(long)]
    reps: Option<usize>,
    /// Pair budget for ν.
    #[arg(long)]
    pairs: Option<usize>,
    /// Quadrature resolution over the boundary.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Recompute every shipped fixture and write them to this path.
    #[arg(long, conflicts_with_all = ["scene", "closed_form"])]
    freeze: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct ExperimentArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scene: Option<String>,
    /// volume, symdiff, perimeter, perimeter-x1, maximal, or a score name.
    #[arg(long)]
    statistic: Option<String>,
    /// a:b (doubling from a to b), a:b:factor, or a comma list.
    #[arg(long)]
    levels: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    boundary: Option<Boundary>,
    /// Input process: poisson or binomial.
    #[arg(long)]
    input: Option<String>,
    #[arg(long)]
    probes_per_site: Option<usize>,
    /// Worker threads (default: all available); results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory for the raw table, report and plots.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bootstrap resamples.
    #[arg(long, default_value_t = 1000)]
    resamples: usize,
    /// Target exponent of the mean (default: the statistic's surface-order exponent).
    #[arg(long, allow_hyphen_values = true)]
    mean_target: Option<f64>,
    /// Target exponent of the variance.
    #[arg(long, allow_hyphen_values = true)]
    variance_target: Option<f64>,
    /// Allowed slope deviation.
    #[arg(long, default_value_t = 0.1)]
    tolerance: f64,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Force the Poisson count to n (the gap is then zero).
    #[arg(long)]
    equal_counts: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 1 })
        }
    }
}
