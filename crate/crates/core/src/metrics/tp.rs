//! Normalized true-positive errors, each in `[0, 1]`.
//!
//! - ATE: center distance divided by the matching radius `ratio · radius(gt)`.
//! - ASE: `1 − IoU` after moving the prediction onto the GT center and
//!   rotation, so only the dimensions differ.
//! - AOE: SO(3) geodesic angle divided by π.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{center_distance, geodesic_angle, iou3d, Box3D, RadiusKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TpErrors {
    pub ate: f64,
    pub ase: f64,
    pub aoe: f64,
}

impl TpErrors {
    /// Error assigned to a class without any true positive.
    pub const WORST: TpErrors = TpErrors {
        ate: 1.0,
        ase: 1.0,
        aoe: 1.0,
    };
}

/// Errors of a single matched `(prediction, gt)` pair.
pub fn pair_errors(pred: &Box3D, gt: &Box3D, ratio: f64, radius: RadiusKind) -> Result<TpErrors> {
    let ate = center_distance(pred, gt) / (ratio * radius.radius(gt));
    let aligned = Box3D {
        center: gt.center,
        rotation: gt.rotation,
        dims: pred.dims,
    };
    let ase = 1.0 - iou3d(&aligned, gt)?;
    let aoe = geodesic_angle(&pred.rotation, &gt.rotation) / PI;
    Ok(TpErrors { ate, ase, aoe })
}

/// Mean errors over the matched pairs of one class; [`TpErrors::WORST`] if empty.
pub fn tp_errors(pairs: &[(Box3D, Box3D)], ratio: f64, radius: RadiusKind) -> Result<TpErrors> {
    let errs = pairs
        .iter()
        .map(|(p, g)| pair_errors(p, g, ratio, radius))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_errors(&errs))
}

pub(crate) fn mean_errors(errs: &[TpErrors]) -> TpErrors {
    if errs.is_empty() {
        return TpErrors::WORST;
    }
    let n = errs.len() as f64;
    let (mut a, mut s, mut o) = (0.0, 0.0, 0.0);
    for e in errs {
        a += e.ate;
        s += e.ase;
        o += e.aoe;
    }
    TpErrors {
        ate: a / n,
        ase: s / n,
        aoe: o / n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Rotation, Vec3};
    use std::f64::consts::FRAC_PI_2;

    fn b(c: Vec3, d: Vec3, r: Rotation) -> Box3D {
        Box3D::new(c, d, r).unwrap()
    }

    #[test]
    fn perfect_pair_is_zero() {
        let g = b(
            Vec3::new(1.0, 2.0, 9.0),
            Vec3::new(0.5, 1.5, 2.0),
            Rotation::about_y(0.7),
        );
        let e = pair_errors(&g, &g, 1.0, RadiusKind::Circumscribed).unwrap();
        assert_eq!((e.ate, e.ase, e.aoe), (0.0, 0.0, 0.0));
    }

    #[test]
    fn scale_error_from_dims() {
        let g = b(Vec3::zeros(), Vec3::new(1.0, 1.0, 2.0), Rotation::identity());
        let p = b(
            Vec3::new(0.3, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 1.0),
            Rotation::about_z(0.4),
        );
        let e = pair_errors(&p, &g, 1.0, RadiusKind::Circumscribed).unwrap();
        assert!((e.ase - 0.5).abs() < 1e-12);
    }

    #[test]
    fn orientation_error() {
        let g = b(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0), Rotation::identity());
        let p = b(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0), Rotation::about_z(FRAC_PI_2));
        let e = pair_errors(&p, &g, 1.0, RadiusKind::Circumscribed).unwrap();
        assert!((e.aoe - 0.5).abs() < 1e-15);
    }

    #[test]
    fn translation_error_normalized_by_match_radius() {
        let g = b(Vec3::zeros(), Vec3::new(2.0, 2.0, 1.0), Rotation::identity());
        let p = b(
            Vec3::new(0.75, 0.0, 0.0),
            Vec3::new(2.0, 2.0, 1.0),
            Rotation::identity(),
        );
        let e = pair_errors(&p, &g, 1.0, RadiusKind::Circumscribed).unwrap();
        assert_eq!(e.ate, 0.5);
        let e = pair_errors(&p, &g, 0.5, RadiusKind::Circumscribed).unwrap();
        assert_eq!(e.ate, 1.0);
    }

    #[test]
    fn empty_class_is_worst() {
        assert_eq!(tp_errors(&[], 1.0, RadiusKind::Circumscribed).unwrap(), TpErrors::WORST);
    }
}
