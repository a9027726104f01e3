//! Seeded synthetic scenes and perturbed predictions.
//!
//! Randomness comes from ChaCha8 with one stream per frame index (the stream
//! id is the frame index, the key comes from the seed), so every frame's
//! draws are independent of how frames are scheduled across threads.
//!
//! [`perturb`] draws the same number of variates per GT no matter which
//! noise levels are zero, so two models that differ only in one sigma share
//! all their underlying draws.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{corners, project, unproject, Box2D, Box3D, CameraIntrinsics, Rotation, Vec2, Vec3};
use crate::metrics::{Detection, GroundTruth};
use crate::par::Exec;

/// Per-class object model: log-normal dimensions and objects per frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSpec {
    pub name: String,
    /// Mean of `ln(w, l, h)`.
    pub log_dim_mean: [f64; 3],
    /// Standard deviation of `ln(w, l, h)`.
    #[serde(default)]
    pub log_dim_std: [f64; 3],
    #[serde(default = "one")]
    pub per_frame: usize,
}

fn one() -> usize {
    1
}

fn default_margin() -> f64 {
    0.5
}

impl ClassSpec {
    /// Class with fixed dimensions `(w, l, h)`.
    pub fn fixed(name: &str, dims: [f64; 3], per_frame: usize) -> Self {
        Self {
            name: name.into(),
            log_dim_mean: dims.map(f64::ln),
            log_dim_std: [0.0; 3],
            per_frame,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub n_frames: usize,
    pub classes: Vec<ClassSpec>,
    /// `[min, max]` depth of box centers in meters.
    pub depth_range: [f64; 2],
    pub intrinsics: CameraIntrinsics,
    pub seed: u64,
    /// Projected centers stay at least this many pixels inside the image.
    #[serde(default = "default_margin")]
    pub image_margin: f64,
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        self.intrinsics
            .validate()
            .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        let [lo, hi] = self.depth_range;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
            return bad(format!("depth_range must satisfy 0 < min <= max, got [{lo}, {hi}]"));
        }
        let m = self.image_margin;
        if !(m.is_finite() && m >= 0.0 && 2.0 * m < self.intrinsics.width.min(self.intrinsics.height) as f64) {
            return bad(format!("image_margin {m} does not fit the image"));
        }
        for c in &self.classes {
            if c.name.is_empty() {
                return bad("class name must not be empty".into());
            }
            if !c.log_dim_mean.iter().all(|v| v.is_finite()) {
                return bad(format!("class {}: log_dim_mean must be finite", c.name));
            }
            if !c.log_dim_std.iter().all(|v| v.is_finite() && *v >= 0.0) {
                return bad(format!("class {}: log_dim_std must be finite and >= 0", c.name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbModel {
    /// Per-axis center noise std (meters).
    pub sigma_t: f64,
    /// Per-axis log-dimension noise std.
    pub sigma_s: f64,
    /// Per-axis rotation-vector noise std (radians).
    pub sigma_r: f64,
    pub p_miss: f64,
    /// Expected false positives per frame (Poisson).
    pub fp_rate: f64,
    pub seed: u64,
}

impl Default for PerturbModel {
    fn default() -> Self {
        Self {
            sigma_t: 0.0,
            sigma_s: 0.0,
            sigma_r: 0.0,
            p_miss: 0.0,
            fp_rate: 0.0,
            seed: 0,
        }
    }
}

impl PerturbModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_t", self.sigma_t),
            ("sigma_s", self.sigma_s),
            ("sigma_r", self.sigma_r),
            ("fp_rate", self.fp_rate),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.p_miss) {
            return Err(Error::OutOfRange("p_miss", self.p_miss));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneFrame {
    pub frame_id: String,
    pub intrinsics: CameraIntrinsics,
    pub gts: Vec<GroundTruth>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub frames: Vec<SceneFrame>,
    pub depth_range: [f64; 2],
    pub image_margin: f64,
}

impl Scene {
    pub fn ground_truth(&self) -> Vec<GroundTruth> {
        self.frames.iter().flat_map(|f| f.gts.iter().cloned()).collect()
    }
}

fn frame_rng(seed: u64, frame: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(frame as u64);
    rng
}

fn normal3(rng: &mut ChaCha8Rng) -> Vec3 {
    Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

/// Tight image rectangle of the projected corners, if all lie in front.
pub fn project_box(b: &Box3D, k: &CameraIntrinsics) -> Option<Box2D> {
    let pts: Vec<Vec2> = corners(b).iter().map(|c| project(c, k)).collect::<Result<_>>().ok()?;
    let (mut x1, mut y1, mut x2, mut y2) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in pts {
        x1 = x1.min(p.x);
        y1 = y1.min(p.y);
        x2 = x2.max(p.x);
        y2 = y2.max(p.y);
    }
    Box2D::new(x1, y1, x2, y2).ok()
}

fn sample_center(rng: &mut ChaCha8Rng, k: &CameraIntrinsics, depth: [f64; 2], margin: f64) -> Vec3 {
    let u = margin + rng.random::<f64>() * (k.width as f64 - 2.0 * margin);
    let v = margin + rng.random::<f64>() * (k.height as f64 - 2.0 * margin);
    let z = depth[0] + rng.random::<f64>() * (depth[1] - depth[0]);
    unproject(&Vec2::new(u, v), z, k).expect("depth range is positive")
}

fn sample_yaw(rng: &mut ChaCha8Rng) -> Rotation {
    Rotation::about_y(-PI + 2.0 * PI * rng.random::<f64>())
}

/// Generate the ground truth of every frame.
pub fn generate(spec: &SceneSpec, exec: Exec) -> Result<Scene> {
    spec.validate()?;
    let frames = exec.map_range(spec.n_frames, |i| {
        let mut rng = frame_rng(spec.seed, i);
        let frame_id = format!("frame_{i:06}");
        let k = spec.intrinsics;
        let mut gts = Vec::new();
        for class in &spec.classes {
            for _ in 0..class.per_frame {
                let center = sample_center(&mut rng, &k, spec.depth_range, spec.image_margin);
                let n = normal3(&mut rng);
                let dims = Vec3::from_fn(|j, _| (class.log_dim_mean[j] + class.log_dim_std[j] * n[j]).exp());
                let rotation = sample_yaw(&mut rng);
                let box3d = Box3D::new(center, dims, rotation)?;
                gts.push(GroundTruth {
                    frame_id: frame_id.clone(),
                    label: class.name.clone(),
                    box2d: project_box(&box3d, &k),
                    box3d,
                });
            }
        }
        Ok(SceneFrame {
            frame_id,
            intrinsics: k,
            gts,
        })
    });
    Ok(Scene {
        frames: frames.into_iter().collect::<Result<_>>()?,
        depth_range: spec.depth_range,
        image_margin: spec.image_margin,
    })
}

/// Turn ground truth into noisy, scored detections.
///
/// A surviving GT's detection has score `exp(−‖Δcenter‖ / sigma_t)` (0.5
/// when `sigma_t = 0`). False positives copy label and size from a random GT
/// of the scene, sit uniformly in the frame's viewing volume and get a
/// uniform score.
pub fn perturb(scene: &Scene, model: &PerturbModel, exec: Exec) -> Result<Vec<Detection>> {
    model.validate()?;
    let pool = scene.ground_truth();
    let per_frame = exec.map_range(scene.frames.len(), |i| {
        let frame = &scene.frames[i];
        let mut rng = frame_rng(model.seed, i);
        let mut dets = Vec::new();
        for g in &frame.gts {
            let miss = rng.random::<f64>();
            let n_t = normal3(&mut rng);
            let n_s = normal3(&mut rng);
            let n_r = normal3(&mut rng);
            if miss < model.p_miss {
                continue;
            }
            let mut b = g.box3d;
            if model.sigma_t > 0.0 {
                b.center += n_t * model.sigma_t;
            }
            if model.sigma_s > 0.0 {
                b.dims = b.dims.component_mul(&(n_s * model.sigma_s).map(f64::exp));
            }
            if model.sigma_r > 0.0 {
                b.rotation = b.rotation * Rotation::from_axis_angle(&(n_r * model.sigma_r));
            }
            let score = if model.sigma_t > 0.0 {
                (-(b.center - g.box3d.center).norm() / model.sigma_t)
                    .exp()
                    .clamp(0.0, 1.0)
            } else {
                0.5
            };
            dets.push(Detection {
                frame_id: frame.frame_id.clone(),
                label: g.label.clone(),
                score,
                box2d: project_box(&b, &frame.intrinsics),
                box3d: b,
            });
        }
        if model.fp_rate > 0.0 && !pool.is_empty() {
            let n_fp = Poisson::new(model.fp_rate)
                .map_err(|e| Error::invalid("fp_rate", e.to_string()))?
                .sample(&mut rng) as usize;
            for _ in 0..n_fp {
                let template = &pool[rng.random_range(0..pool.len())];
                let center = sample_center(&mut rng, &frame.intrinsics, scene.depth_range, scene.image_margin);
                let b = Box3D::new(center, template.box3d.dims, sample_yaw(&mut rng))?;
                dets.push(Detection {
                    frame_id: frame.frame_id.clone(),
                    label: template.label.clone(),
                    score: rng.random::<f64>(),
                    box2d: project_box(&b, &frame.intrinsics),
                    box3d: b,
                });
            }
        }
        Ok(dets)
    });
    let mut out = Vec::new();
    for d in per_frame {
        out.extend(d?);
    }
    Ok(out)
}

/// Scene spec with one class of fixed dimensions, one object per frame.
pub fn single_class_spec(name: &str, dims: [f64; 3], n_frames: usize, seed: u64) -> SceneSpec {
    SceneSpec {
        n_frames,
        classes: vec![ClassSpec::fixed(name, dims, 1)],
        depth_range: [4.0, 40.0],
        intrinsics: CameraIntrinsics::new(1000.0, 1000.0, 640.0, 360.0, 1280, 720).expect("valid intrinsics"),
        seed,
        image_margin: default_margin(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{evaluate, MetricConfig};

    fn spec(n: usize) -> SceneSpec {
        SceneSpec {
            n_frames: n,
            classes: vec![
                ClassSpec {
                    name: "car".into(),
                    log_dim_mean: [1.8f64.ln(), 4.5f64.ln(), 1.6f64.ln()],
                    log_dim_std: [0.1, 0.1, 0.1],
                    per_frame: 2,
                },
                ClassSpec::fixed("picture", [0.8, 0.05, 0.6], 1),
            ],
            depth_range: [2.0, 50.0],
            intrinsics: CameraIntrinsics::new(900.0, 900.0, 640.0, 360.0, 1280, 720).unwrap(),
            seed: 42,
            image_margin: 0.5,
        }
    }

    #[test]
    fn deterministic_and_order_independent() {
        let a = generate(&spec(20), Exec::Sequential).unwrap();
        let b = generate(&spec(20), Exec::Parallel).unwrap();
        assert_eq!(a, b);
        let m = PerturbModel {
            sigma_t: 0.3,
            sigma_s: 0.1,
            sigma_r: 0.1,
            p_miss: 0.1,
            fp_rate: 1.0,
            seed: 7,
        };
        assert_eq!(
            perturb(&a, &m, Exec::Sequential).unwrap(),
            perturb(&b, &m, Exec::Parallel).unwrap()
        );
        let mut other = spec(20);
        other.seed = 43;
        assert_ne!(generate(&other, Exec::Sequential).unwrap(), a);
    }

    #[test]
    fn zero_frames_is_empty() {
        let s = generate(&spec(0), Exec::default()).unwrap();
        assert!(s.frames.is_empty());
    }

    #[test]
    fn generated_boxes_are_valid_and_visible() {
        let s = generate(&spec(334), Exec::default()).unwrap();
        let gts = s.ground_truth();
        assert!(gts.len() >= 1000);
        let k = s.frames[0].intrinsics;
        for g in &gts {
            g.validate().unwrap();
            assert!(crate::geometry::Rotation::new(*g.box3d.rotation.matrix()).is_ok());
            let p = project(&g.box3d.center, &k).unwrap();
            assert!(p.x >= 0.0 && p.x <= k.width as f64 && p.y >= 0.0 && p.y <= k.height as f64);
            assert!(g.box3d.center.z >= 2.0 && g.box3d.center.z <= 50.0);
        }
    }

    #[test]
    fn zero_noise_reproduces_gt() {
        let s = generate(&spec(10), Exec::default()).unwrap();
        let dets = perturb(&s, &PerturbModel::default(), Exec::default()).unwrap();
        let gts = s.ground_truth();
        assert_eq!(dets.len(), gts.len());
        for (d, g) in dets.iter().zip(&gts) {
            assert_eq!(d.box3d, g.box3d);
            assert_eq!(d.score, 0.5);
        }
        let r = evaluate(&gts, &dets, &MetricConfig::default()).unwrap();
        assert_eq!(r.ods, 1.0);
    }

    #[test]
    fn all_missed() {
        let s = generate(&spec(10), Exec::default()).unwrap();
        let m = PerturbModel {
            p_miss: 1.0,
            ..Default::default()
        };
        let dets = perturb(&s, &m, Exec::default()).unwrap();
        assert!(dets.is_empty());
        let r = evaluate(&s.ground_truth(), &dets, &MetricConfig::default()).unwrap();
        assert_eq!(r.ap_dist, 0.0);
        assert_eq!(r.ap_iou, 0.0);
    }

    #[test]
    fn false_positives_are_added() {
        let s = generate(&spec(50), Exec::default()).unwrap();
        let m = PerturbModel {
            fp_rate: 2.0,
            seed: 3,
            ..Default::default()
        };
        let dets = perturb(&s, &m, Exec::default()).unwrap();
        assert!(dets.len() > s.ground_truth().len() + 50);
        assert!(dets.iter().all(|d| (0.0..=1.0).contains(&d.score)));
    }

    #[test]
    fn invalid_inputs() {
        let mut s = spec(1);
        s.depth_range = [5.0, 1.0];
        assert!(matches!(generate(&s, Exec::default()), Err(Error::InvalidSpec(_))));
        let m = PerturbModel {
            p_miss: 1.5,
            ..Default::default()
        };
        assert!(m.validate().is_err());
        let m = PerturbModel {
            sigma_t: -1.0,
            ..Default::default()
        };
        assert!(m.validate().is_err());
    }
}
