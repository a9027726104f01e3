//! Core 3D/2D primitives.

mod camera;
mod cuboid;
mod iou;
pub(crate) mod rotation;

pub use camera::{project, unproject, Box2D, CameraIntrinsics};
pub use cuboid::{center_distance, corners, gt_radius, Box3D, RadiusKind};
pub use iou::{intersection_volume, iou3d, iou3d_batch};
pub use rotation::{geodesic_angle, matrix_to_rot6d, rot6d_to_matrix, Rot6D, Rotation};

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
pub type Mat3 = nalgebra::Matrix3<f64>;
