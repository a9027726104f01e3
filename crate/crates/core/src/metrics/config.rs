use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::RadiusKind;

/// How a precision/recall curve is integrated into AP.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApIntegration {
    /// COCO-style: precision envelope sampled at evenly spaced recall points.
    #[default]
    Interpolated,
    /// Trapezoid rule over the raw curve, starting at recall 0.
    Trapezoid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricConfig {
    /// IoU thresholds for AP_3D (default 0.05, 0.10, …, 0.50).
    pub iou_thresholds: Vec<f64>,
    /// Distance thresholds as fractions of the GT radius (default 0.50, 0.55, …, 1.00).
    pub dist_ratio_thresholds: Vec<f64>,
    /// Distance ratio whose matches feed the TP errors.
    pub tp_error_threshold_ratio: f64,
    pub recall_points: usize,
    pub ap_integration: ApIntegration,
    pub radius: RadiusKind,
    pub base_classes: Option<Vec<String>>,
    pub novel_classes: Option<Vec<String>>,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            iou_thresholds: (1..=10).map(|i| i as f64 / 20.0).collect(),
            dist_ratio_thresholds: (10..=20).map(|i| i as f64 / 20.0).collect(),
            tp_error_threshold_ratio: 1.0,
            recall_points: 101,
            ap_integration: ApIntegration::Interpolated,
            radius: RadiusKind::Circumscribed,
            base_classes: None,
            novel_classes: None,
        }
    }
}

fn check_thresholds(field: &'static str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::invalid(field, "must not be empty"));
    }
    if !v.iter().all(|t| t.is_finite() && *t > 0.0 && *t <= 1.0) {
        return Err(Error::invalid(field, "values must lie in (0, 1]"));
    }
    if !v.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::invalid(field, "must be strictly increasing"));
    }
    Ok(())
}

impl MetricConfig {
    pub fn validate(&self) -> Result<()> {
        check_thresholds("iou_thresholds", &self.iou_thresholds)?;
        check_thresholds("dist_ratio_thresholds", &self.dist_ratio_thresholds)?;
        let r = self.tp_error_threshold_ratio;
        if !(r.is_finite() && r > 0.0 && r <= 1.0) {
            return Err(Error::invalid("tp_error_threshold_ratio", "must lie in (0, 1]"));
        }
        if self.recall_points < 2 {
            return Err(Error::invalid("recall_points", "must be at least 2"));
        }
        Ok(())
    }
}
