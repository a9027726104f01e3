use serde::{Deserialize, Serialize};

use super::{Rotation, Vec3};
use crate::error::{Error, Result};

/// Oriented 3D box in the camera frame.
///
/// `dims = (w, l, h)` are extents along the box's local x, y and z axes,
/// i.e. along the columns of `rotation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box3D {
    pub center: Vec3,
    pub dims: Vec3,
    pub rotation: Rotation,
}

impl Box3D {
    pub fn new(center: Vec3, dims: Vec3, rotation: Rotation) -> Result<Self> {
        let b = Self { center, dims, rotation };
        b.validate()?;
        Ok(b)
    }

    pub fn axis_aligned(center: Vec3, dims: Vec3) -> Result<Self> {
        Self::new(center, dims, Rotation::identity())
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.iter().all(|v| v.is_finite()) {
            return Err(Error::DegenerateBox("center must be finite".into()));
        }
        if !self.dims.iter().all(|v| v.is_finite() && *v > 0.0) {
            return Err(Error::DegenerateBox(format!(
                "dimensions must be finite and > 0, got ({}, {}, {})",
                self.dims.x, self.dims.y, self.dims.z
            )));
        }
        Ok(())
    }

    pub fn volume(&self) -> f64 {
        self.dims.x * self.dims.y * self.dims.z
    }

    /// Same box expressed after the rigid motion `p -> rot * p + t`.
    pub fn transformed(&self, rot: &Rotation, t: &Vec3) -> Self {
        Self {
            center: rot * self.center + t,
            dims: self.dims,
            rotation: *rot * self.rotation,
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            center: self.center * s,
            dims: self.dims * s,
            rotation: self.rotation,
        }
    }
}

/// The eight corners `center + R (±w/2, ±l/2, ±h/2)`.
///
/// Corner `i` uses sign bit 0 for x, bit 1 for y and bit 2 for z (bit clear
/// means negative), so x varies fastest, then y, then z.
pub fn corners(b: &Box3D) -> [Vec3; 8] {
    let half = b.dims * 0.5;
    std::array::from_fn(|i| {
        let local = Vec3::new(
            if i & 1 == 0 { -half.x } else { half.x },
            if i & 2 == 0 { -half.y } else { half.y },
            if i & 4 == 0 { -half.z } else { half.z },
        );
        b.center + &b.rotation * local
    })
}

pub fn center_distance(a: &Box3D, b: &Box3D) -> f64 {
    (a.center - b.center).norm()
}

/// Which sphere defines the GT radius used by distance matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiusKind {
    /// Half the space diagonal, `0.5 √(w² + l² + h²)`.
    #[default]
    Circumscribed,
    /// Half the smallest extent.
    Inscribed,
}

impl RadiusKind {
    pub fn radius(self, b: &Box3D) -> f64 {
        match self {
            RadiusKind::Circumscribed => 0.5 * b.dims.norm(),
            RadiusKind::Inscribed => 0.5 * b.dims.min(),
        }
    }
}

/// Circumscribed-sphere radius of a GT box.
pub fn gt_radius(b: &Box3D) -> f64 {
    RadiusKind::Circumscribed.radius(b)
}
