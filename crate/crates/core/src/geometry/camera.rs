use serde::{Deserialize, Serialize};

use super::{Vec2, Vec3};
use crate::error::{Error, Result};

/// Pinhole intrinsics tied to an image size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fx.is_finite() && self.fx > 0.0) {
            return Err(Error::invalid("fx", format!("must be finite and > 0, got {}", self.fx)));
        }
        if !(self.fy.is_finite() && self.fy > 0.0) {
            return Err(Error::invalid("fy", format!("must be finite and > 0, got {}", self.fy)));
        }
        if !self.cx.is_finite() {
            return Err(Error::invalid("cx", "must be finite"));
        }
        if !self.cy.is_finite() {
            return Err(Error::invalid("cy", "must be finite"));
        }
        if self.width == 0 {
            return Err(Error::invalid("width", "must be > 0"));
        }
        if self.height == 0 {
            return Err(Error::invalid("height", "must be > 0"));
        }
        Ok(())
    }
}

/// Axis-aligned image box `[x1, y1, x2, y2]` in pixels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Box2D {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
}

impl Box2D {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64) -> Result<Self> {
        let b = Self { x1, y1, x2, y2 };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if ![self.x1, self.y1, self.x2, self.y2].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("box2d", "coordinates must be finite"));
        }
        if self.x2 < self.x1 {
            return Err(Error::invalid("box2d", format!("x2 {} < x1 {}", self.x2, self.x1)));
        }
        if self.y2 < self.y1 {
            return Err(Error::invalid("box2d", format!("y2 {} < y1 {}", self.y2, self.y1)));
        }
        Ok(())
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))
    }

    pub fn area(&self) -> f64 {
        (self.x2 - self.x1) * (self.y2 - self.y1)
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.x1, self.y1, self.x2, self.y2]
    }
}

/// Pinhole projection `u = fx x/z + cx`, `v = fy y/z + cy`.
pub fn project(point: &Vec3, k: &CameraIntrinsics) -> Result<Vec2> {
    if !(point.z > 0.0) {
        return Err(Error::NonPositiveDepth(point.z));
    }
    Ok(Vec2::new(
        k.fx * point.x / point.z + k.cx,
        k.fy * point.y / point.z + k.cy,
    ))
}

/// Back-project a pixel at metric depth `depth` into the camera frame.
pub fn unproject(pixel: &Vec2, depth: f64, k: &CameraIntrinsics) -> Result<Vec3> {
    if !(depth > 0.0) {
        return Err(Error::NonPositiveDepth(depth));
    }
    Ok(Vec3::new(
        (pixel.x - k.cx) * depth / k.fx,
        (pixel.y - k.cy) * depth / k.fy,
        depth,
    ))
}
