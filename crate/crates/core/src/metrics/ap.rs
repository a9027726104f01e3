use super::config::ApIntegration;
use crate::error::{Error, Result};

/// One detection of a class, pooled across frames, with its match outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedDetection {
    pub score: f64,
    /// Rank of the detection's frame id in sorted frame-id order.
    pub frame: usize,
    /// Position of the detection within its frame's input.
    pub index: usize,
    pub is_tp: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PrCurve {
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
}

/// Cumulative precision/recall over detections sorted by descending score.
///
/// Ties in score are ordered by frame rank, then by in-frame index, so the
/// curve does not depend on the order frames were processed in.
pub fn pr_curve(dets: &[RankedDetection], n_gt: usize) -> Result<PrCurve> {
    if n_gt == 0 {
        return Err(Error::NoGroundTruth(String::new()));
    }
    let mut sorted = dets.to_vec();
    sorted.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.frame.cmp(&b.frame))
            .then(a.index.cmp(&b.index))
    });
    let mut tp = 0usize;
    let mut curve = PrCurve {
        precision: Vec::with_capacity(sorted.len()),
        recall: Vec::with_capacity(sorted.len()),
    };
    for (k, d) in sorted.iter().enumerate() {
        if d.is_tp {
            tp += 1;
        }
        curve.precision.push(tp as f64 / (k + 1) as f64);
        curve.recall.push(tp as f64 / n_gt as f64);
    }
    Ok(curve)
}

/// Integrate a PR curve. An empty curve has AP 0.
pub fn average_precision(curve: &PrCurve, integration: ApIntegration, recall_points: usize) -> f64 {
    if curve.recall.is_empty() {
        return 0.0;
    }
    match integration {
        ApIntegration::Interpolated => {
            let mut envelope = curve.precision.clone();
            for k in (0..envelope.len().saturating_sub(1)).rev() {
                envelope[k] = envelope[k].max(envelope[k + 1]);
            }
            let n = recall_points.max(2);
            let mut sum = 0.0;
            for i in 0..n {
                let r = i as f64 / (n - 1) as f64;
                let idx = curve.recall.partition_point(|&x| x < r);
                if idx < envelope.len() {
                    sum += envelope[idx];
                }
            }
            sum / n as f64
        }
        ApIntegration::Trapezoid => {
            let mut area = 0.0;
            let (mut r0, mut p0) = (0.0, curve.precision[0]);
            for (&r, &p) in curve.recall.iter().zip(&curve.precision) {
                area += (r - r0) * 0.5 * (p + p0);
                r0 = r;
                p0 = p;
            }
            area
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rd(score: f64, is_tp: bool, index: usize) -> RankedDetection {
        RankedDetection {
            score,
            frame: 0,
            index,
            is_tp,
        }
    }

    #[test]
    fn single_perfect_detection() {
        let c = pr_curve(&[rd(0.9, true, 0)], 1).unwrap();
        assert_eq!((c.recall[0], c.precision[0]), (1.0, 1.0));
        assert_eq!(average_precision(&c, ApIntegration::Interpolated, 101), 1.0);
        assert_eq!(average_precision(&c, ApIntegration::Trapezoid, 101), 1.0);
    }

    #[test]
    fn no_detections() {
        let c = pr_curve(&[], 3).unwrap();
        assert_eq!(average_precision(&c, ApIntegration::Interpolated, 101), 0.0);
    }

    #[test]
    fn trailing_false_positive_keeps_ap_one() {
        let c = pr_curve(&[rd(0.2, false, 1), rd(0.9, true, 0)], 1).unwrap();
        assert_eq!(c.precision, vec![1.0, 0.5]);
        assert_eq!(average_precision(&c, ApIntegration::Interpolated, 101), 1.0);
    }

    #[test]
    fn leading_false_positive() {
        // FP then TP: precision 0, 0.5; envelope 0.5 everywhere.
        let c = pr_curve(&[rd(0.9, false, 0), rd(0.2, true, 1)], 1).unwrap();
        assert_eq!(average_precision(&c, ApIntegration::Interpolated, 101), 0.5);
    }

    #[test]
    fn half_recall() {
        // One TP out of two GT: recall thresholds 0..=0.5 (51 of 101) get precision 1.
        let c = pr_curve(&[rd(0.9, true, 0)], 2).unwrap();
        assert!((average_precision(&c, ApIntegration::Interpolated, 101) - 51.0 / 101.0).abs() < 1e-15);
        assert_eq!(average_precision(&c, ApIntegration::Trapezoid, 101), 0.5);
    }

    #[test]
    fn missing_gt_is_error() {
        assert!(matches!(pr_curve(&[], 0), Err(Error::NoGroundTruth(_))));
    }

    #[test]
    fn ties_are_ordered_by_frame_then_index() {
        let a = RankedDetection {
            score: 0.5,
            frame: 1,
            index: 0,
            is_tp: true,
        };
        let b = RankedDetection {
            score: 0.5,
            frame: 0,
            index: 3,
            is_tp: false,
        };
        let c1 = pr_curve(&[a, b], 1).unwrap();
        let c2 = pr_curve(&[b, a], 1).unwrap();
        assert_eq!(c1, c2);
        assert_eq!(c1.precision, vec![0.0, 0.5]);
    }
}
