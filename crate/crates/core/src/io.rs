//! JSON-lines files for ground truth and predictions, and report output.
//!
//! One frame per line:
//!
//! ```json
//! {"schema_version":"1.0","frame_id":"f0",
//!  "intrinsics":{"fx":1000.0,"fy":1000.0,"cx":640.0,"cy":360.0,"width":1280,"height":720},
//!  "objects":[{"label":"car","score":0.9,
//!              "box3d":{"center":[x,y,z],"dims":[w,l,h],"rotation":[r00,r01,...,r22]},
//!              "box2d":[x1,y1,x2,y2]}]}
//! ```
//!
//! | field            | unit / meaning                                        |
//! |------------------|-------------------------------------------------------|
//! | `center`         | meters, camera frame (+x right, +y down, +z forward)  |
//! | `dims`           | meters, extents along the box's local x, y, z axes    |
//! | `rotation`       | 3×3 row-major, box-local → camera                     |
//! | `rot6d`          | accepted on read instead of `rotation`: first two columns |
//! | `box2d`, `fx`... | pixels                                                |
//! | `score`          | predictions only, in `[0, 1]`                         |
//!
//! `intrinsics` is required in ground-truth files and optional in
//! prediction files. Unknown fields are rejected. Numbers are written in
//! shortest round-trip form, so write-then-read is lossless.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{rot6d_to_matrix, Box2D, Box3D, CameraIntrinsics, Rot6D, Rotation, Vec3};
use crate::metrics::{Detection, GroundTruth, MetricReport};
use crate::synth::Scene;

pub const SCHEMA_VERSION: &str = "1.0";

/// Rotations off SO(3) by more than the strict tolerance but within this one
/// are re-orthonormalized on read (text written with few digits).
const READ_ROTATION_TOL: f64 = 1e-6;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox3D {
    center: [f64; 3],
    dims: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rotation: Option<[f64; 9]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rot6d: Option<[f64; 6]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObject {
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    score: Option<f64>,
    box3d: RawBox3D,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    box2d: Option<[f64; 4]>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrame {
    schema_version: String,
    frame_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intrinsics: Option<CameraIntrinsics>,
    objects: Vec<RawObject>,
}

/// One line of a dataset file.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord<T> {
    pub frame_id: String,
    pub intrinsics: Option<CameraIntrinsics>,
    pub boxes: Vec<T>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset<T> {
    pub frames: Vec<FrameRecord<T>>,
}

pub type GtDataset = Dataset<GroundTruth>;
pub type PredDataset = Dataset<Detection>;

impl<T: Clone> Dataset<T> {
    pub fn items(&self) -> Vec<T> {
        self.frames.iter().flat_map(|f| f.boxes.iter().cloned()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }
}

impl GtDataset {
    pub fn from_scene(scene: &Scene) -> Self {
        Dataset {
            frames: scene
                .frames
                .iter()
                .map(|f| FrameRecord {
                    frame_id: f.frame_id.clone(),
                    intrinsics: Some(f.intrinsics),
                    boxes: f.gts.clone(),
                })
                .collect(),
        }
    }
}

impl PredDataset {
    /// Group detections by frame in order of first appearance.
    pub fn from_detections(dets: &[Detection]) -> Self {
        let mut frames: Vec<FrameRecord<Detection>> = Vec::new();
        let mut index: HashMap<&str, usize> = HashMap::new();
        for d in dets {
            let i = *index.entry(d.frame_id.as_str()).or_insert_with(|| {
                frames.push(FrameRecord {
                    frame_id: d.frame_id.clone(),
                    intrinsics: None,
                    boxes: Vec::new(),
                });
                frames.len() - 1
            });
            frames[i].boxes.push(d.clone());
        }
        Dataset { frames }
    }

    pub fn with_intrinsics(mut self, scene: &Scene) -> Self {
        let k: HashMap<&str, CameraIntrinsics> = scene
            .frames
            .iter()
            .map(|f| (f.frame_id.as_str(), f.intrinsics))
            .collect();
        for f in &mut self.frames {
            f.intrinsics = k.get(f.frame_id.as_str()).copied();
        }
        self
    }
}

fn violation(line: usize, field: impl Into<String>, reason: impl ToString) -> Error {
    Error::InvariantViolation {
        line,
        field: field.into(),
        reason: reason.to_string(),
    }
}

fn finite(line: usize, field: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(violation(line, field, "non-finite number"))
    }
}

fn decode_box3d(line: usize, path: &str, raw: &RawBox3D) -> Result<Box3D> {
    finite(line, &format!("{path}.center"), &raw.center)?;
    finite(line, &format!("{path}.dims"), &raw.dims)?;
    let rotation = match (&raw.rotation, &raw.rot6d) {
        (Some(_), Some(_)) => return Err(violation(line, path, "both `rotation` and `rot6d` given")),
        (None, None) => return Err(violation(line, path, "missing `rotation` (or `rot6d`)")),
        (Some(m), None) => {
            let field = format!("{path}.rotation");
            finite(line, &field, m)?;
            let mat = Rotation::from_row_major(m);
            match Rotation::new(mat) {
                Ok(r) => r,
                Err(_) => {
                    Rotation::with_tolerance(mat, READ_ROTATION_TOL).map_err(|e| violation(line, &field, e))?;
                    let cols = Rot6D::new(mat.column(0).into(), mat.column(1).into());
                    rot6d_to_matrix(&cols).map_err(|e| violation(line, &field, e))?
                }
            }
        }
        (None, Some(r6)) => {
            let field = format!("{path}.rot6d");
            finite(line, &field, r6)?;
            rot6d_to_matrix(&Rot6D::from_slice(r6)).map_err(|e| violation(line, &field, e))?
        }
    };
    Box3D::new(Vec3::from(raw.center), Vec3::from(raw.dims), rotation)
        .map_err(|e| violation(line, format!("{path}.dims"), e))
}

fn decode_box2d(line: usize, path: &str, raw: &Option<[f64; 4]>) -> Result<Option<Box2D>> {
    raw.map(|b| Box2D::new(b[0], b[1], b[2], b[3]).map_err(|e| violation(line, format!("{path}.box2d"), e)))
        .transpose()
}

fn encode_box3d(b: &Box3D) -> RawBox3D {
    RawBox3D {
        center: b.center.into(),
        dims: b.dims.into(),
        rotation: Some(b.rotation.to_row_major()),
        rot6d: None,
    }
}

enum Kind {
    Gt,
    Pred,
}

fn parse_frames(text: &str, kind: Kind) -> Result<Vec<(usize, RawFrame)>> {
    let mut frames = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawFrame = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: n,
            reason: e.to_string(),
        })?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(Error::SchemaVersion {
                line: n,
                version: raw.schema_version,
            });
        }
        if raw.frame_id.is_empty() {
            return Err(violation(n, "frame_id", "must not be empty"));
        }
        if !seen.insert(raw.frame_id.clone()) {
            return Err(violation(n, "frame_id", format!("duplicate frame `{}`", raw.frame_id)));
        }
        match (&kind, &raw.intrinsics) {
            (Kind::Gt, None) => return Err(violation(n, "intrinsics", "required in ground-truth files")),
            (_, Some(k)) => k.validate().map_err(|e| violation(n, "intrinsics", e))?,
            _ => {}
        }
        frames.push((n, raw));
    }
    Ok(frames)
}

/// Parse ground-truth JSON lines.
pub fn parse_gt(text: &str) -> Result<GtDataset> {
    let mut out = Vec::new();
    for (n, raw) in parse_frames(text, Kind::Gt)? {
        let mut boxes = Vec::with_capacity(raw.objects.len());
        for (j, o) in raw.objects.iter().enumerate() {
            let path = format!("objects[{j}]");
            if o.score.is_some() {
                return Err(violation(
                    n,
                    format!("{path}.score"),
                    "ground truth must not carry a score",
                ));
            }
            if o.label.is_empty() {
                return Err(violation(n, format!("{path}.label"), "must not be empty"));
            }
            boxes.push(GroundTruth {
                frame_id: raw.frame_id.clone(),
                label: o.label.clone(),
                box3d: decode_box3d(n, &format!("{path}.box3d"), &o.box3d)?,
                box2d: decode_box2d(n, &path, &o.box2d)?,
            });
        }
        out.push(FrameRecord {
            frame_id: raw.frame_id,
            intrinsics: raw.intrinsics,
            boxes,
        });
    }
    Ok(Dataset { frames: out })
}

/// Parse prediction JSON lines.
pub fn parse_pred(text: &str) -> Result<PredDataset> {
    let mut out = Vec::new();
    for (n, raw) in parse_frames(text, Kind::Pred)? {
        let mut boxes = Vec::with_capacity(raw.objects.len());
        for (j, o) in raw.objects.iter().enumerate() {
            let path = format!("objects[{j}]");
            let score = o
                .score
                .ok_or_else(|| violation(n, format!("{path}.score"), "predictions need a score"))?;
            if !(score.is_finite() && (0.0..=1.0).contains(&score)) {
                return Err(violation(n, format!("{path}.score"), format!("{score} not in [0, 1]")));
            }
            if o.label.is_empty() {
                return Err(violation(n, format!("{path}.label"), "must not be empty"));
            }
            boxes.push(Detection {
                frame_id: raw.frame_id.clone(),
                label: o.label.clone(),
                score,
                box3d: decode_box3d(n, &format!("{path}.box3d"), &o.box3d)?,
                box2d: decode_box2d(n, &path, &o.box2d)?,
            });
        }
        out.push(FrameRecord {
            frame_id: raw.frame_id,
            intrinsics: raw.intrinsics,
            boxes,
        });
    }
    Ok(Dataset { frames: out })
}

fn to_line(frame_id: &str, intrinsics: Option<CameraIntrinsics>, objects: Vec<RawObject>) -> String {
    let raw = RawFrame {
        schema_version: SCHEMA_VERSION.into(),
        frame_id: frame_id.into(),
        intrinsics,
        objects,
    };
    let mut s = serde_json::to_string(&raw).expect("frame records always serialize");
    s.push('\n');
    s
}

pub fn gt_to_string(ds: &GtDataset) -> String {
    ds.frames
        .iter()
        .map(|f| {
            let objects = f
                .boxes
                .iter()
                .map(|g| RawObject {
                    label: g.label.clone(),
                    score: None,
                    box3d: encode_box3d(&g.box3d),
                    box2d: g.box2d.map(|b| b.to_array()),
                })
                .collect();
            to_line(&f.frame_id, f.intrinsics, objects)
        })
        .collect()
}

pub fn pred_to_string(ds: &PredDataset) -> String {
    ds.frames
        .iter()
        .map(|f| {
            let objects = f
                .boxes
                .iter()
                .map(|d| RawObject {
                    label: d.label.clone(),
                    score: Some(d.score),
                    box3d: encode_box3d(&d.box3d),
                    box2d: d.box2d.map(|b| b.to_array()),
                })
                .collect();
            to_line(&f.frame_id, f.intrinsics, objects)
        })
        .collect()
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })
}

pub fn read_gt(path: impl AsRef<Path>) -> Result<GtDataset> {
    parse_gt(&read_text(path.as_ref())?)
}

pub fn read_pred(path: impl AsRef<Path>) -> Result<PredDataset> {
    parse_pred(&read_text(path.as_ref())?)
}

pub fn write_gt(ds: &GtDataset, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &gt_to_string(ds))
}

pub fn write_pred(ds: &PredDataset, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &pred_to_string(ds))
}

/// Write the canonical (key-sorted) JSON form of a report.
pub fn write_report(report: &MetricReport, path: impl AsRef<Path>) -> Result<()> {
    write_text(path.as_ref(), &report.to_canonical_json())
}
