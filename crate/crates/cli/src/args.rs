use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use swarmcalc::urn::DEFAULT_HISTOGRAM_REPLICATES;

#[derive(Parser, Debug, Serialize)]
#[command(
    name = "swarmcalc",
    version,
    about = "Swarm performance fits and urn-model collective decisions"
)]
pub struct Cli {
    /// Run replicate batches on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
    /// Where to write the run manifest (defaults next to the outputs).
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Simulate the urn: trajectory, final-state histogram and revision log.
    Simulate(SimulateArgs),
    /// Markov-chain analysis of the urn.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Least-squares fits of performance, switching-time and growth curves.
    #[command(subcommand)]
    Fit(FitCommand),
    /// Estimate the feedback profile from a revision log.
    Estimate(EstimateArgs),
    /// Density-classification scenario with windowed feedback estimates.
    ScenarioDc(ScenarioArgs),
    /// Re-run a manifest and check that every output is byte-identical.
    Replay(ReplayArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ProfileKind {
    Sine,
    #[value(alias = "quadratic")]
    Quad,
    Rational,
    #[value(name = "table-file", alias = "table")]
    TableFile,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ProfileArgs {
    #[arg(long, value_enum, default_value_t = ProfileKind::Sine)]
    pub profile: ProfileKind,
    /// Feedback intensity of the sine and quadratic profiles.
    #[arg(long)]
    pub phi: Option<f64>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    /// CurveFile of `(s, P(s))` for `--profile table-file`.
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// `constant:C` or `sine:C1,C2`.
    #[arg(long, default_value = "constant:1")]
    pub payoff: String,
    /// Urn size.
    #[arg(long)]
    pub n: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long, default_value_t = 2000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_HISTOGRAM_REPLICATES)]
    pub replicates: usize,
    /// Initial blue count; replicates alternate between n/2 and n/2+1 by default.
    #[arg(long)]
    pub b0: Option<usize>,
    /// Histogram over `LO:STEP:HI` intensities instead of `--phi` alone.
    #[arg(long)]
    pub phi_scan: Option<String>,
    /// Record every this many steps of the trajectory.
    #[arg(long, default_value_t = 1)]
    pub stride: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum AnalyzeCommand {
    SteadyState(SteadyArgs),
    Splitting(SplittingArgs),
    Mfpt(MfptArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SteadyMethod {
    Power,
    DetailedBalance,
}

#[derive(Args, Debug, Serialize)]
pub struct SteadyArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long, value_enum, default_value_t = SteadyMethod::Power)]
    pub method: SteadyMethod,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SplittingMethod {
    /// First-step analysis.
    Exact,
    /// Integral of the inverse stationary density.
    Formula,
}

#[derive(Args, Debug, Serialize)]
pub struct SplittingArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long)]
    pub a: usize,
    #[arg(long)]
    pub b: usize,
    #[arg(long, value_enum, default_value_t = SplittingMethod::Exact)]
    pub method: SplittingMethod,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct MfptArgs {
    #[command(flatten)]
    pub profile: ProfileArgs,
    #[arg(long)]
    pub target: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FitCommon {
    /// CurveFile with columns x,y[,yerr].
    #[arg(long)]
    pub data: PathBuf,
    /// `unit`, `yerr` (1/yerr^2), `relative` (1/y^2) or a CurveFile whose y column holds the weights.
    #[arg(long)]
    pub weights: Option<String>,
    /// Hold parameters: `--fix name=value [name=value ...]`.
    #[arg(long, num_args = 1.., value_name = "NAME=VALUE")]
    pub fix: Vec<String>,
    /// Start values: `--init name=value [name=value ...]`.
    #[arg(long, num_args = 1.., value_name = "NAME=VALUE")]
    pub init: Vec<String>,
    /// Fitted curve at the data abscissae.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Print the fit in the appendix table layout.
    #[arg(long)]
    pub gnuplot_table: bool,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum FitCommand {
    Performance(FitCommon),
    Staged(StagedArgs),
    Narrow(NarrowArgs),
    SwitchTimes(FitCommon),
    FeedbackGrowth(GrowthArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct StagedArgs {
    #[command(flatten)]
    pub common: FitCommon,
    /// Performance of the non-cooperating swarm, for the interference fit.
    #[arg(long)]
    pub random_data: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct NarrowArgs {
    #[command(flatten)]
    pub common: FitCommon,
    /// `LO:HI` interval of x values used.
    #[arg(long)]
    pub range: String,
}

#[derive(Args, Debug, Serialize)]
pub struct GrowthArgs {
    #[command(flatten)]
    pub common: FitCommon,
    #[arg(long, default_value_t = 700.0)]
    pub zero_below: f64,
    #[arg(long, default_value_t = 3000.0)]
    pub double_from: f64,
    #[arg(long, default_value_t = 2.0)]
    pub late_weight: f64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FamilyArg {
    Sine,
    #[value(alias = "quadratic")]
    Quad,
    Rational,
}

#[derive(Args, Debug, Serialize)]
pub struct EstimateArgs {
    /// LogFile with columns s,r_b,r_r,visits[,window].
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long, value_enum, default_value_t = FamilyArg::Sine)]
    pub family: FamilyArg,
    /// Urn size; inferred from the s grid when absent.
    #[arg(long)]
    pub n: Option<usize>,
    /// Half-width around s = 0.5 excluded from the fit (default 1.5/n).
    #[arg(long)]
    pub pole_mask: Option<f64>,
    #[arg(long)]
    pub predict_steady_state: bool,
    /// Payoff used for the prediction.
    #[arg(long, default_value = "constant:1")]
    pub payoff: String,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NoiseArg {
    Drop,
    Misread,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightingArg {
    Uniform,
    Counts,
}

#[derive(Args, Debug, Serialize)]
pub struct ScenarioArgs {
    #[arg(long, default_value_t = 64)]
    pub agents: usize,
    #[arg(long, default_value_t = 10_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub recognition: f64,
    /// `uniform:WIDTH`, `doubling:FIRST` or `explicit:E1,E2,...`.
    #[arg(long, default_value = "uniform:1000")]
    pub windows: String,
    #[arg(long, value_enum, default_value_t = NoiseArg::Drop)]
    pub noise: NoiseArg,
    /// Random observations each agent starts with.
    #[arg(long, default_value_t = 0)]
    pub primed_memory: usize,
    /// `well-mixed` or `grid:WxH:RADIUS`.
    #[arg(long, default_value = "well-mixed")]
    pub mixing: String,
    /// Initial red fraction.
    #[arg(long, default_value_t = 0.5)]
    pub s0: f64,
    /// Runs merged into the window logs.
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// `LO:HI:K`: run i starts from LO + (HI - LO) (i mod K) / (K - 1).
    #[arg(long)]
    pub s0_spread: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub stride: u64,
    /// States with fewer revisions in a window are left out of its fit.
    #[arg(long, default_value_t = 10)]
    pub min_samples: u64,
    #[arg(long, value_enum, default_value_t = WeightingArg::Uniform)]
    pub weighting: WeightingArg,
    /// Fit phi(t) = a - exp(b t) to the windowed estimates.
    #[arg(long)]
    pub growth_fit: bool,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
