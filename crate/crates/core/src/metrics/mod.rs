//! Detection evaluation: IoU-threshold 3D AP and the Open Detection Score.
//!
//! ODS matches predictions to ground truth by 3D center distance, with the
//! threshold expressed as a fraction of each GT box's radius, and combines
//! the resulting AP with three normalized true-positive errors:
//!
//! ```text
//! ODS = (3 AP_dist + (1 - mATE) + (1 - mASE) + (1 - mAOE)) / 6
//! ```

mod ap;
mod config;
mod evaluate;
mod matching;
mod ods;
mod report;
mod tp;

pub use ap::{average_precision, pr_curve, PrCurve, RankedDetection};
pub use config::{ApIntegration, MetricConfig};
pub use evaluate::{ap_dist, ap_iou, evaluate, evaluate_with, ApSummary};
pub use matching::{match_frame, Criterion, FrameMatch};
pub use ods::ods;
pub use report::{ClassReport, Counts, MetricReport};
pub use tp::{pair_errors, tp_errors, TpErrors};

use crate::error::{Error, Result};
use crate::geometry::{Box2D, Box3D};

/// A scored 3D prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub frame_id: String,
    pub label: String,
    pub score: f64,
    pub box3d: Box3D,
    pub box2d: Option<Box2D>,
}

impl Detection {
    pub fn validate(&self) -> Result<()> {
        if !(self.score.is_finite() && (0.0..=1.0).contains(&self.score)) {
            return Err(Error::OutOfRange("score", self.score));
        }
        self.box3d.validate()?;
        if let Some(b) = &self.box2d {
            b.validate()?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub frame_id: String,
    pub label: String,
    pub box3d: Box3D,
    pub box2d: Option<Box2D>,
}

impl GroundTruth {
    pub fn validate(&self) -> Result<()> {
        self.box3d.validate()?;
        if let Some(b) = &self.box2d {
            b.validate()?;
        }
        Ok(())
    }
}
