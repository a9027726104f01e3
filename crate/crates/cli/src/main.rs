//! `mood3d`: evaluate monocular 3D detections, inspect the box lifting and
//! canonical-space geometry, generate synthetic fixtures and check losses.
//!
//! Exit codes: 0 success, 1 input error, 2 empty ground truth, 3 internal
//! invariant failure.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use config::Format;

#[derive(Debug)]
pub enum Failure {
    Input(String),
    EmptyGroundTruth(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 1,
            Failure::EmptyGroundTruth(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::EmptyGroundTruth(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<mood3d::Error> for Failure {
    fn from(e: mood3d::Error) -> Self {
        match e {
            mood3d::Error::EmptyGroundTruth => Failure::EmptyGroundTruth(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mood3d", version, about = "Monocular 3D detection evaluation toolkit")]
pub struct Cli {
    /// Worker threads; 0 uses one per core. Results do not depend on it.
    #[arg(long, global = true, env = "MOOD3D_THREADS", default_value_t = 0)]
    pub threads: usize,

    /// TOML or JSON config file. Keys present in it override flags.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate predictions against ground truth (AP_3D, AP_3D^dist, TP errors, ODS).
    Eval(EvalArgs),
    /// Per-class IoU-matched vs distance-matched AP, largest gap first.
    CompareMatching(CompareArgs),
    /// Decode 12 lifting parameters into a 3D box.
    Lift(LiftArgs),
    /// Canonical-space transform and intrinsics for a camera.
    Canon(CanonArgs),
    /// Generate a synthetic scene and perturbed predictions.
    Synth(SynthArgs),
    /// Evaluate a reference loss.
    #[command(subcommand)]
    Loss(LossCommand),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum IntegrationArg {
    Interpolated,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RadiusArg {
    Circumscribed,
    Inscribed,
}

#[derive(Debug, Args)]
pub struct MetricFlags {
    /// IoU thresholds for AP_3D [default: 0.05,0.10,...,0.50].
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub iou_thresholds: Option<Vec<f64>>,

    /// Distance thresholds as fractions of the GT radius [default: 0.50,0.55,...,1.00].
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub dist_ratios: Option<Vec<f64>>,

    /// Distance ratio whose matches feed mATE/mASE/mAOE [default: 1.0].
    #[arg(long, value_name = "RATIO")]
    pub tp_ratio: Option<f64>,

    /// Recall sample points for interpolated AP [default: 101].
    #[arg(long, value_name = "N")]
    pub recall_points: Option<usize>,

    /// AP integration rule [default: interpolated].
    #[arg(long, value_enum)]
    pub ap_integration: Option<IntegrationArg>,

    /// GT radius used by distance matching [default: circumscribed].
    #[arg(long, value_enum)]
    pub radius: Option<RadiusArg>,

    /// Classes averaged into ODS(B).
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub base_classes: Option<Vec<String>>,

    /// Classes averaged into ODS(N).
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub novel_classes: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth JSON-lines file.
    #[arg(long, value_name = "FILE", required_unless_present = "components")]
    pub gt: Option<PathBuf>,

    /// Prediction JSON-lines file.
    #[arg(long, value_name = "FILE", required_unless_present = "components")]
    pub pred: Option<PathBuf>,

    /// Write the full report (canonical JSON) here.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,

    /// Write the one-row results table (CSV) here.
    #[arg(long, value_name = "FILE")]
    pub csv: Option<PathBuf>,

    /// Standard-output format [default: text].
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    /// Skip evaluation and combine given AP_3D^dist (percent), mATE, mASE, mAOE into ODS.
    #[arg(
        long,
        value_delimiter = ',',
        value_name = "AP%,mATE,mASE,mAOE",
        conflicts_with_all = ["gt", "pred", "out", "csv"]
    )]
    pub components: Option<Vec<f64>>,

    #[command(flatten)]
    pub metrics: MetricFlags,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long, value_name = "FILE")]
    pub gt: PathBuf,

    #[arg(long, value_name = "FILE")]
    pub pred: PathBuf,

    /// Standard-output format [default: text].
    #[arg(long, value_enum)]
    pub format: Option<Format>,

    #[command(flatten)]
    pub metrics: MetricFlags,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    /// u_off,v_off,d,w,l,h,a1,a2,a3,b1,b2,b3 (offsets in pixels, scaled logs, 6D rotation).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub params: Vec<f64>,

    /// 2D box x1,y1,x2,y2 in pixels.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub box2d: Vec<f64>,

    /// fx,fy,cx,cy,width,height.
    #[arg(long, value_delimiter = ',', required = true)]
    pub intrinsics: Vec<f64>,

    /// Depth scale s_depth [default: 1].
    #[arg(long)]
    pub s_depth: Option<f64>,

    /// Dimension scale s_dim [default: 1].
    #[arg(long)]
    pub s_dim: Option<f64>,

    /// Also print the 9×12 Jacobian of (center, dims, axis-angle).
    #[arg(long)]
    pub jacobian: bool,
}

#[derive(Debug, Args)]
pub struct CanonArgs {
    /// fx,fy,cx,cy,width,height.
    #[arg(long, value_delimiter = ',', required = true)]
    pub intrinsics: Vec<f64>,

    /// Canonical height [default: 800].
    #[arg(long)]
    pub canon_height: Option<u32>,

    /// Canonical width [default: 1333].
    #[arg(long)]
    pub canon_width: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Scene spec (TOML or JSON).
    #[arg(long, value_name = "FILE")]
    pub spec: PathBuf,

    /// Override the scene seed.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Center noise std in meters [default: 0].
    #[arg(long)]
    pub sigma_t: Option<f64>,

    /// Log-dimension noise std [default: 0].
    #[arg(long)]
    pub sigma_s: Option<f64>,

    /// Rotation-vector noise std in radians [default: 0].
    #[arg(long)]
    pub sigma_r: Option<f64>,

    /// Probability of dropping each GT [default: 0].
    #[arg(long)]
    pub p_miss: Option<f64>,

    /// Expected false positives per frame [default: 0].
    #[arg(long)]
    pub fp_rate: Option<f64>,

    /// Seed of the prediction noise [default: 0].
    #[arg(long)]
    pub perturb_seed: Option<u64>,

    #[arg(long, value_name = "FILE")]
    pub gt_out: PathBuf,

    #[arg(long, value_name = "FILE")]
    pub pred_out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum LossCommand {
    /// Scale-invariant log depth loss.
    Silog {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        pred: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        gt: Vec<f64>,
        /// Valid-pixel mask as 0/1 values.
        #[arg(long, value_delimiter = ',')]
        mask: Option<Vec<u8>>,
        #[arg(long, default_value_t = mood3d::losses::DEFAULT_LAMBDA_SI)]
        lambda_si: f64,
    },
    /// Generalized IoU of two 2D boxes.
    Giou {
        /// x1,y1,x2,y2
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        a: Vec<f64>,
        /// x1,y1,x2,y2
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        b: Vec<f64>,
    },
    /// L1 distance between two 12-parameter vectors.
    L1 {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        pred: Vec<f64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        target: Vec<f64>,
    },
    /// Weighted sum of per-layer 2D and 3D losses plus the depth loss.
    Final {
        #[arg(long, value_delimiter = ',', required = true)]
        l2d: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        l3d: Vec<f64>,
        #[arg(long)]
        depth: f64,
        #[arg(long, default_value_t = 1.0)]
        w_2d: f64,
        #[arg(long, default_value_t = 1.0)]
        w_3d: f64,
        #[arg(long, default_value_t = 10.0)]
        lambda_depth: f64,
        /// Required number of decoder layers.
        #[arg(long)]
        layers: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let outcome = std::panic::catch_unwind(|| commands::run(cli))
        .unwrap_or_else(|_| Err(Failure::Internal("internal error (panic)".into())));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
