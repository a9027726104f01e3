use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub n_gt: usize,
    pub n_det: usize,
    pub ap_iou: f64,
    pub ap_dist: f64,
    pub ap_iou_by_threshold: Vec<f64>,
    pub ap_dist_by_threshold: Vec<f64>,
    pub ate: f64,
    pub ase: f64,
    pub aoe: f64,
    /// Match counts at the TP-error distance ratio.
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Counts {
    pub n_gt: usize,
    pub n_det: usize,
    /// Detections whose class never appears in the ground truth.
    pub n_det_ignored: usize,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub classes: BTreeMap<String, ClassReport>,
    pub ap_iou: f64,
    pub ap_dist: f64,
    pub mate: f64,
    pub mase: f64,
    pub maoe: f64,
    pub ods: f64,
    pub ods_base: Option<f64>,
    pub ods_novel: Option<f64>,
    pub iou_thresholds: Vec<f64>,
    pub dist_ratio_thresholds: Vec<f64>,
    pub tp_error_threshold_ratio: f64,
    pub counts: Counts,
}

fn pct(v: f64) -> String {
    format!("{:.1}", v * 100.0)
}

fn opt_pct(v: Option<f64>) -> String {
    v.map(pct).unwrap_or_else(|| "-".into())
}

impl MetricReport {
    /// Pretty JSON with keys sorted at every level; byte-stable for equal reports.
    pub fn to_canonical_json(&self) -> String {
        // serde_json::Value objects are BTreeMap-backed, hence key-sorted.
        let value = serde_json::to_value(self).expect("report is always serializable");
        let mut s = serde_json::to_string_pretty(&value).expect("value is always serializable");
        s.push('\n');
        s
    }

    /// One-row table with the open-set results layout: AP and ODS columns in
    /// percent with one decimal, TP errors as fractions with three.
    pub fn to_table_csv(&self) -> String {
        format!(
            "AP3D_dist,mATE,mASE,mAOE,ODS,ODS(B),ODS(N)\n{},{:.3},{:.3},{:.3},{},{},{}\n",
            pct(self.ap_dist),
            self.mate,
            self.mase,
            self.maoe,
            pct(self.ods),
            opt_pct(self.ods_base),
            opt_pct(self.ods_novel)
        )
    }

    /// Human-readable summary: per-class rows followed by the mean.
    pub fn summary_table(&self) -> String {
        let width = self.classes.keys().map(String::len).max().unwrap_or(0).max(5);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$} {:>6} {:>6} {:>9} {:>6} {:>6} {:>6} {:>6}",
            "class", "n_gt", "AP3D", "AP3D_dist", "ATE", "ASE", "AOE", "ODS"
        );
        for (name, c) in &self.classes {
            let class_ods = (3.0 * c.ap_dist + 3.0 - c.ate - c.ase - c.aoe) / 6.0;
            let _ = writeln!(
                out,
                "{:<width$} {:>6} {:>6} {:>9} {:>6.3} {:>6.3} {:>6.3} {:>6}",
                name,
                c.n_gt,
                pct(c.ap_iou),
                pct(c.ap_dist),
                c.ate,
                c.ase,
                c.aoe,
                pct(class_ods)
            );
        }
        let _ = writeln!(
            out,
            "{:<width$} {:>6} {:>6} {:>9} {:>6.3} {:>6.3} {:>6.3} {:>6}",
            "mean",
            self.counts.n_gt,
            pct(self.ap_iou),
            pct(self.ap_dist),
            self.mate,
            self.mase,
            self.maoe,
            pct(self.ods)
        );
        let _ = writeln!(
            out,
            "ODS {}  ODS(B) {}  ODS(N) {}",
            pct(self.ods),
            opt_pct(self.ods_base),
            opt_pct(self.ods_novel)
        );
        out
    }
}
