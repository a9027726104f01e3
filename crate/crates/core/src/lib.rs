//! Deterministic core of a monocular 3D detection toolkit.
//!
//! - [`geometry`]: intrinsics, pinhole projection, rotations (including the
//!   continuous 6D representation), oriented cuboids and exact cuboid IoU.
//! - [`lifting`]: canonical image space and the 12-parameter decode that
//!   lifts a 2D box to a 3D box, with its analytic Jacobian.
//! - [`metrics`]: IoU-threshold 3D AP and the Open Detection Score (distance
//!   matching normalized by the GT radius, TP errors, aggregation).
//! - [`losses`]: reference loss formulas (L1, GIoU, SILog, weighted total).
//! - [`synth`]: seeded synthetic scenes and perturbed predictions.
//! - [`io`]: the JSON-lines wire format and canonical report output.
//!
//! Conventions: camera frame is +x right, +y down, +z forward. Lengths are
//! meters, angles radians, pixel coordinates reals.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod io;
pub mod lifting;
pub mod losses;
pub mod metrics;
pub mod par;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{Box2D, Box3D, CameraIntrinsics, Rot6D, Rotation, Vec2, Vec3};
pub use par::Exec;
