//! Canonical image space: every image is resized (aspect preserved) so it
//! fits a fixed canonical extent, then center-padded to exactly that extent.
//! The intrinsics follow the same mapping, so a given camera always shows up
//! with the same image size and `K`.
//!
//! Rounding is fixed: the resized size is `floor(scale * size + 0.5)` per
//! axis, the leading pad is `floor((canon - resized) / 2)` and the remainder
//! goes to the trailing side. Geometry uses the exact `scale`, not the
//! rounded size, so projection commutes with the transform.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CameraIntrinsics, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CanonicalConfig {
    pub canon_height: u32,
    pub canon_width: u32,
    /// Fill value for padded pixels. Only recorded; no pixels are resampled here.
    pub pad_value: f64,
}

impl Default for CanonicalConfig {
    fn default() -> Self {
        Self {
            canon_height: 800,
            canon_width: 1333,
            pad_value: 0.0,
        }
    }
}

impl CanonicalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.canon_height == 0 || self.canon_width == 0 {
            return Err(Error::invalid("canonical size", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CanonicalTransform {
    pub scale: f64,
    pub pad_left: u32,
    pub pad_top: u32,
    pub source_width: u32,
    pub source_height: u32,
    pub resized_width: u32,
    pub resized_height: u32,
}

impl CanonicalTransform {
    pub fn identity(width: u32, height: u32) -> Self {
        Self {
            scale: 1.0,
            pad_left: 0,
            pad_top: 0,
            source_width: width,
            source_height: height,
            resized_width: width,
            resized_height: height,
        }
    }
}

fn round_half_up(x: f64) -> u32 {
    (x + 0.5).floor() as u32
}

/// Transform for an image of `k.width × k.height` plus the canonical intrinsics.
pub fn canonicalize(k: &CameraIntrinsics, cfg: &CanonicalConfig) -> Result<(CanonicalTransform, CameraIntrinsics)> {
    k.validate()?;
    cfg.validate()?;
    let scale = (cfg.canon_width as f64 / k.width as f64).min(cfg.canon_height as f64 / k.height as f64);
    let resized_width = round_half_up(scale * k.width as f64).min(cfg.canon_width);
    let resized_height = round_half_up(scale * k.height as f64).min(cfg.canon_height);
    let t = CanonicalTransform {
        scale,
        pad_left: (cfg.canon_width - resized_width) / 2,
        pad_top: (cfg.canon_height - resized_height) / 2,
        source_width: k.width,
        source_height: k.height,
        resized_width,
        resized_height,
    };
    let kc = CameraIntrinsics {
        fx: k.fx * scale,
        fy: k.fy * scale,
        cx: k.cx * scale + t.pad_left as f64,
        cy: k.cy * scale + t.pad_top as f64,
        width: cfg.canon_width,
        height: cfg.canon_height,
    };
    Ok((t, kc))
}

/// Source pixel → canonical pixel.
pub fn apply_transform(p: &Vec2, t: &CanonicalTransform) -> Vec2 {
    Vec2::new(p.x * t.scale + t.pad_left as f64, p.y * t.scale + t.pad_top as f64)
}

/// Canonical pixel → source pixel.
pub fn invert_transform(p: &Vec2, t: &CanonicalTransform) -> Vec2 {
    Vec2::new((p.x - t.pad_left as f64) / t.scale, (p.y - t.pad_top as f64) / t.scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{project, Vec3};
    use proptest::prelude::*;

    #[test]
    fn canonicalize_example() {
        let k = CameraIntrinsics::new(2000.0, 2000.0, 1000.0, 750.0, 2000, 1500).unwrap();
        let cfg = CanonicalConfig {
            canon_height: 800,
            canon_width: 1000,
            ..Default::default()
        };
        let (t, kc) = canonicalize(&k, &cfg).unwrap();
        assert_eq!(t.scale, 0.5);
        assert_eq!((t.resized_width, t.resized_height), (1000, 750));
        assert_eq!((t.pad_left, t.pad_top), (0, 25));
        assert_eq!((kc.fx, kc.fy, kc.cx, kc.cy), (1000.0, 1000.0, 500.0, 400.0));
        assert_eq!((kc.width, kc.height), (1000, 800));
        assert_eq!(apply_transform(&Vec2::new(1000.0, 750.0), &t), Vec2::new(500.0, 400.0));
        assert_eq!(invert_transform(&Vec2::new(500.0, 400.0), &t), Vec2::new(1000.0, 750.0));
    }

    #[test]
    fn already_canonical_is_identity() {
        let k = CameraIntrinsics::new(700.0, 710.0, 660.0, 410.0, 1333, 800).unwrap();
        let (t, kc) = canonicalize(&k, &CanonicalConfig::default()).unwrap();
        assert_eq!(t, CanonicalTransform::identity(1333, 800));
        assert_eq!(kc, k);
        let p = Vec2::new(12.5, 99.0);
        assert_eq!(apply_transform(&p, &t), p);
        assert_eq!(invert_transform(&p, &t), p);
    }

    #[test]
    fn portrait_image_pads_left_and_right() {
        let k = CameraIntrinsics::new(1000.0, 1000.0, 540.0, 960.0, 1080, 1920).unwrap();
        let (t, _) = canonicalize(&k, &CanonicalConfig::default()).unwrap();
        assert_eq!(t.resized_height, 800);
        assert_eq!(t.resized_width, 450);
        assert_eq!(t.pad_left, (1333 - 450) / 2);
        assert_eq!(t.pad_top, 0);
    }

    #[test]
    fn default_size() {
        let c = CanonicalConfig::default();
        assert_eq!((c.canon_height, c.canon_width), (800, 1333));
    }

    proptest! {
        #[test]
        fn aspect_ratio_preserved(w in 16u32..5000, h in 16u32..5000) {
            let k = CameraIntrinsics::new(500.0, 500.0, w as f64 / 2.0, h as f64 / 2.0, w, h).unwrap();
            let (t, _) = canonicalize(&k, &CanonicalConfig::default()).unwrap();
            prop_assert!(t.resized_width <= 1333 && t.resized_height <= 800);
            prop_assert!(t.resized_width == 1333 || t.resized_height == 800);
            // Exact aspect lies within one rounding pixel of the resized extents.
            let ar = w as f64 / h as f64;
            let lo = (t.resized_width as f64 - 1.0) / (t.resized_height as f64 + 1.0);
            let hi = (t.resized_width as f64 + 1.0) / (t.resized_height as f64 - 1.0).max(1.0);
            prop_assert!(lo <= ar && ar <= hi);
        }

        #[test]
        fn transform_round_trip(x in -100.0f64..3000.0, y in -100.0f64..3000.0, w in 16u32..4000, h in 16u32..4000) {
            let k = CameraIntrinsics::new(800.0, 800.0, 0.0, 0.0, w, h).unwrap();
            let (t, _) = canonicalize(&k, &CanonicalConfig::default()).unwrap();
            let p = Vec2::new(x, y);
            prop_assert!((invert_transform(&apply_transform(&p, &t), &t) - p).amax() < 1e-9);
        }

        #[test]
        fn projection_commutes(
            px in -5.0f64..5.0, py in -5.0f64..5.0, pz in 0.5f64..80.0,
            w in 100u32..4000, h in 100u32..4000, f in 100.0f64..3000.0,
        ) {
            let k = CameraIntrinsics::new(f, f * 1.01, w as f64 * 0.49, h as f64 * 0.52, w, h).unwrap();
            let (t, kc) = canonicalize(&k, &CanonicalConfig::default()).unwrap();
            let p = Vec3::new(px, py, pz);
            let direct = project(&p, &kc).unwrap();
            let via = apply_transform(&project(&p, &k).unwrap(), &t);
            prop_assert!((direct - via).amax() < 1e-6);
        }
    }
}
