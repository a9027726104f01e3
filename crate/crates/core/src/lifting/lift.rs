//! Decode of the 12 lifting parameters into a camera-frame [`Box3D`].
//!
//! Parameter layout (also the Jacobian column order):
//!
//! | index  | meaning                                                    |
//! |--------|------------------------------------------------------------|
//! | 0, 1   | projected-center offset from the 2D box center (pixels)    |
//! | 2      | scaled log depth, `z = exp(d / s_depth)`                   |
//! | 3..6   | scaled log dims, `w = exp(d_w / s_dim)` etc.               |
//! | 6..12  | 6D rotation, first two unnormalized columns `a`, `b`       |
//!
//! Output layout of [`lift_outputs`] / Jacobian rows: center x, y, z;
//! dims w, l, h; rotation vector (axis-angle) of the decoded rotation.

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::rotation::{skew, vee};
use crate::geometry::{
    matrix_to_rot6d, rot6d_to_matrix, unproject, Box2D, Box3D, CameraIntrinsics, Mat3, Rot6D, Vec2, Vec3,
};

/// `∂(center, dims, axis-angle) / ∂(12 lifting parameters)`.
pub type LiftJacobian = SMatrix<f64, 9, 12>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LiftScales {
    pub s_depth: f64,
    pub s_dim: f64,
}

impl Default for LiftScales {
    fn default() -> Self {
        Self {
            s_depth: 1.0,
            s_dim: 1.0,
        }
    }
}

impl LiftScales {
    pub fn new(s_depth: f64, s_dim: f64) -> Result<Self> {
        let s = Self { s_depth, s_dim };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s_depth.is_finite() && self.s_depth > 0.0) {
            return Err(Error::invalid("s_depth", "must be finite and > 0"));
        }
        if !(self.s_dim.is_finite() && self.s_dim > 0.0) {
            return Err(Error::invalid("s_dim", "must be finite and > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftParams {
    pub u_off: f64,
    pub v_off: f64,
    pub d_log: f64,
    pub dims_log: Vec3,
    pub rot6d: Rot6D,
}

impl LiftParams {
    pub fn from_array(v: &[f64; 12]) -> Self {
        Self {
            u_off: v[0],
            v_off: v[1],
            d_log: v[2],
            dims_log: Vec3::new(v[3], v[4], v[5]),
            rot6d: Rot6D::from_slice(&[v[6], v[7], v[8], v[9], v[10], v[11]]),
        }
    }

    pub fn to_array(&self) -> [f64; 12] {
        let r = self.rot6d.to_array();
        [
            self.u_off,
            self.v_off,
            self.d_log,
            self.dims_log.x,
            self.dims_log.y,
            self.dims_log.z,
            r[0],
            r[1],
            r[2],
            r[3],
            r[4],
            r[5],
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.to_array().iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::invalid("lift params", "all components must be finite"))
        }
    }
}

pub fn decode_depth(d_log: f64, s: &LiftScales) -> Result<f64> {
    s.validate()?;
    let z = (d_log / s.s_depth).exp();
    if !z.is_finite() || z <= 0.0 {
        return Err(Error::Overflow("depth"));
    }
    Ok(z)
}

pub fn encode_depth(z: f64, s: &LiftScales) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::NonPositiveDepth(z));
    }
    Ok(z.ln() * s.s_depth)
}

pub fn decode_dims(dims_log: &Vec3, s: &LiftScales) -> Result<Vec3> {
    s.validate()?;
    let d = dims_log.map(|v| (v / s.s_dim).exp());
    if !d.iter().all(|v| v.is_finite() && *v > 0.0) {
        return Err(Error::Overflow("dimensions"));
    }
    Ok(d)
}

pub fn encode_dims(dims: &Vec3, s: &LiftScales) -> Result<Vec3> {
    if !dims.iter().all(|v| *v > 0.0) {
        return Err(Error::DegenerateBox("dimensions must be > 0".into()));
    }
    Ok(dims.map(|v| v.ln() * s.s_dim))
}

/// Lift a 2D detection with its predicted parameters into the camera frame.
pub fn lift(params: &LiftParams, box2d: &Box2D, k: &CameraIntrinsics, s: &LiftScales) -> Result<Box3D> {
    params.validate()?;
    box2d.validate()?;
    let projected = box2d.center() + Vec2::new(params.u_off, params.v_off);
    let z = decode_depth(params.d_log, s)?;
    let center = unproject(&projected, z, k)?;
    let dims = decode_dims(&params.dims_log, s)?;
    let rotation = rot6d_to_matrix(&params.rot6d)?;
    Box3D::new(center, dims, rotation)
}

/// Inverse of [`lift`]: the parameters that reproduce `b` from `box2d`.
pub fn encode_lift(b: &Box3D, box2d: &Box2D, k: &CameraIntrinsics, s: &LiftScales) -> Result<LiftParams> {
    let projected = crate::geometry::project(&b.center, k)?;
    let off = projected - box2d.center();
    Ok(LiftParams {
        u_off: off.x,
        v_off: off.y,
        d_log: encode_depth(b.center.z, s)?,
        dims_log: encode_dims(&b.dims, s)?,
        rot6d: matrix_to_rot6d(&b.rotation),
    })
}

/// The 9 outputs the Jacobian is taken of: center, dims, axis-angle.
pub fn lift_outputs(params: &LiftParams, box2d: &Box2D, k: &CameraIntrinsics, s: &LiftScales) -> Result<[f64; 9]> {
    let b = lift(params, box2d, k, s)?;
    let phi = b.rotation.to_axis_angle();
    Ok([
        b.center.x, b.center.y, b.center.z, b.dims.x, b.dims.y, b.dims.z, phi.x, phi.y, phi.z,
    ])
}

/// Analytic Jacobian of [`lift_outputs`] with respect to the 12 parameters.
///
/// The rotation block differentiates Gram–Schmidt, maps `dR` to the body
/// tangent `ω = vee(Rᵀ dR)` and pulls it back through the inverse right
/// Jacobian of SO(3). The axis-angle chart is singular at angle π.
pub fn lift_jacobian(params: &LiftParams, box2d: &Box2D, k: &CameraIntrinsics, s: &LiftScales) -> Result<LiftJacobian> {
    let b = lift(params, box2d, k, s)?;
    let mut j = LiftJacobian::zeros();
    let z = b.center.z;

    // center = ((u - cx) z / fx, (v - cy) z / fy, z), z = exp(d / s_depth)
    j[(0, 0)] = z / k.fx;
    j[(1, 1)] = z / k.fy;
    j[(0, 2)] = b.center.x / s.s_depth;
    j[(1, 2)] = b.center.y / s.s_depth;
    j[(2, 2)] = z / s.s_depth;

    for i in 0..3 {
        j[(3 + i, 3 + i)] = b.dims[i] / s.s_dim;
    }

    let rot_block = rotation_jacobian(&params.rot6d, b.rotation.matrix())?;
    j.fixed_view_mut::<3, 6>(6, 6).copy_from(&rot_block);
    Ok(j)
}

fn rotation_jacobian(r6: &Rot6D, r: &Mat3) -> Result<SMatrix<f64, 3, 6>> {
    let id = Mat3::identity();
    let na = r6.a.norm();
    let c1 = r6.a / na;
    let bdot = c1.dot(&r6.b);
    let u = r6.b - c1 * bdot;
    let nu = u.norm();
    let c2 = u / nu;

    let dc1_da = (id - c1 * c1.transpose()) / na;
    let du_da = -(c1 * r6.b.transpose() + id * bdot) * dc1_da;
    let du_db = id - c1 * c1.transpose();
    let p2 = (id - c2 * c2.transpose()) / nu;
    let dc2_da = p2 * du_da;
    let dc2_db = p2 * du_db;
    let dc3_da = -skew(&c2) * dc1_da + skew(&c1) * dc2_da;
    let dc3_db = skew(&c1) * dc2_db;

    let phi = crate::geometry::Rotation::from_matrix_unchecked(*r).to_axis_angle();
    let jr_inv = right_jacobian_inv(&phi);
    let rt = r.transpose();

    let mut out = SMatrix::<f64, 3, 6>::zeros();
    for col in 0..6 {
        let (d1, d2, d3) = if col < 3 {
            (
                dc1_da.column(col).into_owned(),
                dc2_da.column(col).into_owned(),
                dc3_da.column(col).into_owned(),
            )
        } else {
            let c = col - 3;
            (
                Vec3::zeros(),
                dc2_db.column(c).into_owned(),
                dc3_db.column(c).into_owned(),
            )
        };
        let dr = Mat3::from_columns(&[d1, d2, d3]);
        let omega = vee(&(rt * dr));
        out.set_column(col, &(jr_inv * omega));
    }
    Ok(out)
}

fn right_jacobian_inv(phi: &Vec3) -> Mat3 {
    let theta = phi.norm();
    let k = skew(phi);
    let c = if theta < 1e-5 {
        1.0 / 12.0 + theta * theta / 720.0
    } else {
        1.0 / (theta * theta) - (1.0 + theta.cos()) / (2.0 * theta * theta.sin())
    };
    Mat3::identity() + k * 0.5 + k * k * c
}
