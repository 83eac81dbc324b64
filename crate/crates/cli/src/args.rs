use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cyclerisk::behavior::KernelKind;
use cyclerisk::risk::Criterion;

#[derive(Debug, Parser)]
#[command(name = "cyclerisk", version, about = "Cyclist route risk and transport-mode analysis")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// TOML pipeline configuration
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 1 runs sequentially, 0 uses every core
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, global = true, value_parser = parse_criterion)]
    pub criterion: Option<Criterion>,
    /// Override any config key, e.g. `--set vision.lk.window=21`
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Print the resolved config and inputs, then stop
    #[arg(long, global = true)]
    pub dry_run: bool,
    /// More log output (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    s.parse().map_err(|e: cyclerisk::Error| e.to_string())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full risk and behavior analysis of one ride directory
    Analyze(AnalyzeArgs),
    /// Build a risk training set from labelled descriptor files
    TrainRisk(TrainRiskArgs),
    /// Train the transport-mode model on labelled rides
    TrainBehavior(TrainBehaviorArgs),
    /// Label the windows and segments of a sensor log
    ClassifyBehavior(ClassifyBehaviorArgs),
    /// Generate a synthetic flow scene or labelled risk set
    GenScene(GenSceneArgs),
    /// Generate a synthetic ride directory
    GenRide(GenRideArgs),
    /// Confusion matrices and loss tables
    #[command(subcommand)]
    Eval(EvalCommand),
}

#[derive(Debug, Args, Default)]
pub struct FoeFlags {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub angle_thresh: Option<f64>,
    #[arg(long = "foe-M")]
    pub foe_m: Option<u64>,
    #[arg(long)]
    pub foe_tau: Option<f64>,
}

#[derive(Debug, Args, Default)]
pub struct RiskFlags {
    /// Neighbours voting in risk retrieval
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub cross_factor: Option<f64>,
    /// TOML file with `base` and `row` gamma tables
    #[arg(long)]
    pub gamma_profile: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
pub struct BehaviorFlags {
    #[arg(long = "C")]
    pub c: Option<f64>,
    #[arg(long, value_parser = parse_kernel)]
    pub kernel: Option<KernelKind>,
    /// Keep this many consensus-RFE features
    #[arg(long)]
    pub rfe_top: Option<usize>,
}

fn parse_point(s: &str) -> Result<(f64, f64), String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok((num(x)?, num(y)?))
}

fn parse_kernel(s: &str) -> Result<KernelKind, String> {
    s.parse().map_err(|e: cyclerisk::Error| e.to_string())
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub ride: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub trainset: PathBuf,
    /// Output directory (default: <ride>/analysis)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub foe: FoeFlags,
    #[command(flatten)]
    pub risk: RiskFlags,
}

#[derive(Debug, Args)]
pub struct TrainRiskArgs {
    /// Descriptor record files whose records carry a level
    #[arg(long, required = true, num_args = 1..)]
    pub descriptors: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub risk: RiskFlags,
}

#[derive(Debug, Args)]
pub struct TrainBehaviorArgs {
    /// Ride directories with a `labels.csv`
    #[arg(long, required = true, num_args = 1..)]
    pub ride: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub behavior: BehaviorFlags,
}

#[derive(Debug, Args)]
pub struct ClassifyBehaviorArgs {
    /// Sensor CSV or ride directory
    pub input: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    /// Directory for windows.csv and segments.csv (default: stdout)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SceneKind {
    Flow,
    RiskSet,
}

#[derive(Debug, Args)]
pub struct GenSceneArgs {
    #[arg(long, value_enum)]
    pub kind: SceneKind,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 480)]
    pub width: usize,
    #[arg(long, default_value_t = 360)]
    pub height: usize,
    /// Flow scenes: number of observations
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.0)]
    pub outlier_frac: f64,
    /// Flow scenes: true FOE as `x,y` (default: image centre)
    #[arg(long, value_parser = parse_point, value_name = "X,Y")]
    pub foe: Option<(f64, f64)>,
    /// Risk sets: descriptors per level
    #[arg(long, default_value_t = 100)]
    pub per_level: usize,
}

#[derive(Debug, Args)]
pub struct GenRideArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Comma list of `mode:seconds`, e.g. `walk:60,bike:120`
    #[arg(long)]
    pub schedule: Option<String>,
    /// Random schedule of this many seconds when no schedule is given
    #[arg(long, default_value_t = 300.0)]
    pub duration: f64,
    /// Rendered frames; 0 writes no video
    #[arg(long, default_value_t = 0)]
    pub frames: u64,
    #[arg(long, default_value_t = 30.0)]
    pub fps: f64,
    /// Sensor-clock start of the video, seconds
    #[arg(long, default_value_t = 20.0)]
    pub video_start: f64,
    #[arg(long, default_value_t = 480)]
    pub width: usize,
    #[arg(long, default_value_t = 360)]
    pub height: usize,
    #[arg(long)]
    pub id: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum EvalCommand {
    /// Risk retrieval on labelled descriptors
    Risk(EvalRiskArgs),
    /// Transport-mode loss grid and confusion matrix on held-out rides
    Behavior(EvalBehaviorArgs),
}

#[derive(Debug, Args)]
pub struct EvalRiskArgs {
    #[arg(long)]
    pub trainset: PathBuf,
    /// Labelled descriptor files to classify
    #[arg(long, required = true, num_args = 1..)]
    pub test: Vec<PathBuf>,
    /// Also write the results as JSON
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Frame size the descriptors were computed at
    #[arg(long, default_value_t = 480)]
    pub width: usize,
    #[arg(long, default_value_t = 360)]
    pub height: usize,
    #[command(flatten)]
    pub risk: RiskFlags,
}

#[derive(Debug, Args)]
pub struct EvalBehaviorArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub train_ride: Vec<PathBuf>,
    #[arg(long, required = true, num_args = 1..)]
    pub test_ride: Vec<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub behavior: BehaviorFlags,
}
