//! Reference loss formulas, usable as numerical oracles for a training
//! pipeline.
//!
//! The 3D L1 loss acts on the encoded head outputs (scaled-log depth and
//! dims, raw 6D rotation), i.e. on [`LiftParams`] as regressed.

use crate::error::{Error, Result};
use crate::geometry::Box2D;
use crate::lifting::LiftParams;

/// Default weight of the squared-mean term of [`silog`].
pub const DEFAULT_LAMBDA_SI: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    pub w_2d: f64,
    pub w_3d: f64,
    pub lambda_depth: f64,
    /// Expected number of decoder layers; `None` accepts any equal length.
    pub num_decoder_layers: Option<usize>,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            w_2d: 1.0,
            w_3d: 1.0,
            lambda_depth: 10.0,
            num_decoder_layers: None,
        }
    }
}

/// Sum of absolute differences over the 12 encoded parameters.
pub fn l1_3d(pred: &LiftParams, target: &LiftParams) -> f64 {
    pred.to_array()
        .iter()
        .zip(target.to_array())
        .map(|(a, b)| (a - b).abs())
        .sum()
}

/// Generalized IoU: `IoU − (hull − union) / hull`, in `(−1, 1]`.
pub fn giou_2d(a: &Box2D, b: &Box2D) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    let hull = (a.x2.max(b.x2) - a.x1.min(b.x1)) * (a.y2.max(b.y2) - a.y1.min(b.y1));
    if !(hull > 0.0) {
        return Err(Error::DegenerateBox("GIoU hull has zero area".into()));
    }
    let iou = if union > 0.0 { inter / union } else { 0.0 };
    Ok(iou - (hull - union) / hull)
}

/// Scale-invariant log loss `mean(g²) − λ·mean(g)²` with `g = ln(pred / gt)`
/// over pixels where `mask` is set (all pixels when `mask` is `None`).
///
/// Evaluated as `var(g) + (1 − λ)·mean(g)²`, which is never negative for
/// `λ ≤ 1`.
pub fn silog(pred: &[f64], gt: &[f64], mask: Option<&[bool]>, lambda_si: f64) -> Result<f64> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch(format!("pred {} vs gt {}", pred.len(), gt.len())));
    }
    if let Some(m) = mask {
        if m.len() != pred.len() {
            return Err(Error::LengthMismatch(format!(
                "mask {} vs depth {}",
                m.len(),
                pred.len()
            )));
        }
    }
    let mut g = Vec::with_capacity(pred.len());
    for i in 0..pred.len() {
        if mask.is_some_and(|m| !m[i]) {
            continue;
        }
        let (p, t) = (pred[i], gt[i]);
        if !(p > 0.0) {
            return Err(Error::NonPositiveDepth(p));
        }
        if !(t > 0.0) {
            return Err(Error::NonPositiveDepth(t));
        }
        let ratio = p / t;
        g.push(if ratio.is_normal() { ratio.ln() } else { p.ln() - t.ln() });
    }
    if g.is_empty() {
        return Err(Error::EmptyMask);
    }
    let n = g.len() as f64;
    let mean = g.iter().sum::<f64>() / n;
    let var = g.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / n;
    Ok(var + (1.0 - lambda_si) * mean * mean)
}

/// `w_2d Σ L2D + w_3d Σ L3D + λ_depth L_depth` over decoder layers.
pub fn final_loss(per_layer_2d: &[f64], per_layer_3d: &[f64], depth_loss: f64, w: &LossWeights) -> Result<f64> {
    if per_layer_2d.len() != per_layer_3d.len() {
        return Err(Error::LengthMismatch(format!(
            "{} 2D layer losses vs {} 3D layer losses",
            per_layer_2d.len(),
            per_layer_3d.len()
        )));
    }
    if let Some(l) = w.num_decoder_layers {
        if per_layer_2d.len() != l {
            return Err(Error::LengthMismatch(format!(
                "expected {l} decoder layers, got {}",
                per_layer_2d.len()
            )));
        }
    }
    let s2: f64 = per_layer_2d.iter().sum();
    let s3: f64 = per_layer_3d.iter().sum();
    Ok(w.w_2d * s2 + w.w_3d * s3 + w.lambda_depth * depth_loss)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Rot6D, Vec3};
    use proptest::prelude::*;

    fn params(v: f64) -> LiftParams {
        LiftParams {
            u_off: v,
            v_off: 1.0,
            d_log: 2.0,
            dims_log: Vec3::new(0.1, 0.2, 0.3),
            rot6d: Rot6D::identity(),
        }
    }

    #[test]
    fn l1_examples() {
        assert_eq!(l1_3d(&params(0.0), &params(0.0)), 0.0);
        assert_eq!(l1_3d(&params(0.5), &params(0.0)), 0.5);
        assert_eq!(l1_3d(&params(0.0), &params(0.5)), 0.5);
    }

    #[test]
    fn giou_examples() {
        let a = Box2D::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let b = Box2D::new(2.0, 0.0, 3.0, 1.0).unwrap();
        assert_eq!(giou_2d(&a, &a).unwrap(), 1.0);
        assert!((giou_2d(&a, &b).unwrap() + 1.0 / 3.0).abs() < 1e-15);
        let p = Box2D::new(1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(giou_2d(&p, &p), Err(Error::DegenerateBox(_))));
    }

    #[test]
    fn silog_examples() {
        assert_eq!(silog(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], None, 0.5).unwrap(), 0.0);
        let gt = [1.0, 2.5, 7.0];
        let pred: Vec<f64> = gt.iter().map(|g| 3.0 * g).collect();
        assert!(silog(&pred, &gt, None, 1.0).unwrap().abs() < 1e-15);
        // g = (0, ln 4): mean g² = (ln 4)²/2, (mean g)² = (ln 4 / 2)²
        let v = silog(&[1.0, 4.0], &[1.0, 1.0], None, 0.5).unwrap();
        let l4 = 4f64.ln();
        assert!((v - (l4 * l4 / 2.0 - 0.5 * (l4 / 2.0).powi(2))).abs() < 1e-15);
        assert!((v - 0.7207).abs() < 1e-4);
    }

    #[test]
    fn silog_mask_and_errors() {
        let v = silog(&[1.0, 4.0, -1.0], &[1.0, 1.0, 5.0], Some(&[true, true, false]), 0.5).unwrap();
        assert!((v - 0.7207).abs() < 1e-4);
        assert_eq!(silog(&[1.0], &[1.0], Some(&[false]), 0.5), Err(Error::EmptyMask));
        assert_eq!(silog(&[], &[], None, 0.5), Err(Error::EmptyMask));
        assert!(matches!(
            silog(&[0.0], &[1.0], None, 0.5),
            Err(Error::NonPositiveDepth(_))
        ));
        assert!(matches!(
            silog(&[1.0], &[1.0, 2.0], None, 0.5),
            Err(Error::LengthMismatch(_))
        ));
    }

    #[test]
    fn final_loss_examples() {
        let w = LossWeights::default();
        assert_eq!(final_loss(&[0.0], &[0.0], 0.0, &w).unwrap(), 0.0);
        assert_eq!(final_loss(&[1.0], &[2.0], 0.1, &w).unwrap(), 4.0);
        assert!(matches!(
            final_loss(&[1.0], &[], 0.0, &w),
            Err(Error::LengthMismatch(_))
        ));
        let w6 = LossWeights {
            num_decoder_layers: Some(6),
            ..w
        };
        assert!(final_loss(&[1.0], &[1.0], 0.0, &w6).is_err());
        assert_eq!(final_loss(&[1.0; 6], &[0.5; 6], 0.0, &w6).unwrap(), 9.0);
    }

    proptest! {
        #[test]
        fn giou_bounded_by_iou_and_translation_invariant(
            x1 in -10.0f64..10.0, y1 in -10.0f64..10.0, w1 in 0.1f64..5.0, h1 in 0.1f64..5.0,
            x2 in -10.0f64..10.0, y2 in -10.0f64..10.0, w2 in 0.1f64..5.0, h2 in 0.1f64..5.0,
            tx in -50.0f64..50.0, ty in -50.0f64..50.0,
        ) {
            let a = Box2D::new(x1, y1, x1 + w1, y1 + h1).unwrap();
            let b = Box2D::new(x2, y2, x2 + w2, y2 + h2).unwrap();
            let g = giou_2d(&a, &b).unwrap();
            let iw = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
            let ih = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
            let iou = iw * ih / (a.area() + b.area() - iw * ih);
            prop_assert!(g <= iou + 1e-12 && g > -1.0);
            let sa = Box2D::new(a.x1 + tx, a.y1 + ty, a.x2 + tx, a.y2 + ty).unwrap();
            let sb = Box2D::new(b.x1 + tx, b.y1 + ty, b.x2 + tx, b.y2 + ty).unwrap();
            prop_assert!((giou_2d(&sa, &sb).unwrap() - g).abs() < 1e-9);
        }

        #[test]
        fn silog_scale_invariant_at_lambda_one(
            d in proptest::collection::vec(0.1f64..50.0, 2..20), noise in proptest::collection::vec(-0.5f64..0.5, 20), c in 0.1f64..10.0,
        ) {
            let pred: Vec<f64> = d.iter().zip(&noise).map(|(g, n)| g * n.exp()).collect();
            let base = silog(&pred, &d, None, 1.0).unwrap();
            let sp: Vec<f64> = pred.iter().map(|p| p * c).collect();
            let sg: Vec<f64> = d.iter().map(|g| g * c).collect();
            prop_assert!((silog(&sp, &sg, None, 1.0).unwrap() - base).abs() < 1e-9);
            let shifted: Vec<f64> = pred.iter().map(|p| p * c).collect();
            prop_assert!((silog(&shifted, &d, None, 1.0).unwrap() - base).abs() < 1e-9);
            let varied = noise.iter().take(d.len()).any(|n| (n - noise[0]).abs() > 1e-3);
            if varied {
                prop_assert!(silog(&pred, &d, None, 0.5).unwrap() > 0.0);
            }
        }

        #[test]
        fn final_loss_linear_in_depth(depth in 0.0f64..10.0, l2 in 0.0f64..5.0, l3 in 0.0f64..5.0) {
            let w = LossWeights::default();
            let a = final_loss(&[l2], &[l3], depth, &w).unwrap();
            let b = final_loss(&[l2], &[l3], depth + 1.0, &w).unwrap();
            prop_assert!((b - a - w.lambda_depth).abs() < 1e-9);
        }
    }
}
