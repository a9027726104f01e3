use std::f64::consts::PI;

use super::{Mat3, Vec3};
use crate::error::{Error, Result};

/// Orthonormality / determinant tolerance for [`Rotation`].
pub const ROTATION_TOL: f64 = 1e-9;

const GRAM_SCHMIDT_EPS: f64 = 1e-12;

/// A proper rotation matrix (element of SO(3)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub fn identity() -> Self {
        Rotation(Mat3::identity())
    }

    /// Validates `RᵀR = I` and `det R = 1` within [`ROTATION_TOL`].
    pub fn new(m: Mat3) -> Result<Self> {
        Self::with_tolerance(m, ROTATION_TOL)
    }

    pub fn with_tolerance(m: Mat3, tol: f64) -> Result<Self> {
        if !m.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("rotation", "entries must be finite"));
        }
        let ortho = (m.transpose() * m - Mat3::identity()).amax();
        if ortho > tol {
            return Err(Error::invalid("rotation", format!("|RᵀR - I| = {ortho:e}")));
        }
        let det = m.determinant();
        if (det - 1.0).abs() > tol {
            return Err(Error::invalid("rotation", format!("det = {det}")));
        }
        Ok(Rotation(m))
    }

    /// Skips validation. The caller guarantees the matrix is in SO(3).
    pub fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    /// Rodrigues' formula for the rotation vector `axis * angle`.
    pub fn from_axis_angle(v: &Vec3) -> Self {
        let theta = v.norm();
        let k = skew(v);
        let (a, b) = if theta < 1e-8 {
            (1.0 - theta * theta / 6.0, 0.5 - theta * theta / 24.0)
        } else {
            (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
        };
        Rotation(Mat3::identity() + k * a + k * k * b)
    }

    pub fn about_x(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::new(angle, 0.0, 0.0))
    }

    pub fn about_y(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::new(0.0, angle, 0.0))
    }

    pub fn about_z(angle: f64) -> Self {
        Self::from_axis_angle(&Vec3::new(0.0, 0.0, angle))
    }

    /// Rotation vector (log map). The angle lies in `[0, π]`.
    pub fn to_axis_angle(&self) -> Vec3 {
        let m = &self.0;
        let w = Vec3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]);
        let sin_t = 0.5 * w.norm();
        let cos_t = 0.5 * (m.trace() - 1.0);
        let theta = sin_t.atan2(cos_t);
        if theta < 1e-8 {
            return 0.5 * w;
        }
        if theta < PI - 1e-6 {
            return w * (theta / (2.0 * sin_t));
        }
        // Near π the skew part vanishes; read the axis off the symmetric part.
        let b = (m + m.transpose()) * 0.5 - Mat3::identity() * cos_t;
        let col = (0..3).max_by(|&i, &j| b[(i, i)].total_cmp(&b[(j, j)])).unwrap_or(0);
        let mut axis: Vec3 = b.column(col).into();
        axis /= axis.norm();
        if axis.dot(&w) < 0.0 {
            axis = -axis;
        }
        axis * theta
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Self {
        Rotation(self.0.transpose())
    }

    pub fn column(&self, i: usize) -> Vec3 {
        self.0.column(i).into()
    }

    /// Row-major entries.
    #[rustfmt::skip]
    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[(0, 0)], m[(0, 1)], m[(0, 2)],
            m[(1, 0)], m[(1, 1)], m[(1, 2)],
            m[(2, 0)], m[(2, 1)], m[(2, 2)],
        ]
    }

    pub fn from_row_major(v: &[f64; 9]) -> Mat3 {
        Mat3::from_row_slice(v)
    }
}

impl std::ops::Mul for Rotation {
    type Output = Rotation;
    fn mul(self, rhs: Rotation) -> Rotation {
        Rotation(self.0 * rhs.0)
    }
}

impl std::ops::Mul<Vec3> for &Rotation {
    type Output = Vec3;
    fn mul(self, rhs: Vec3) -> Vec3 {
        self.0 * rhs
    }
}

/// Continuous 6D rotation representation: the first two (unnormalized)
/// columns of a rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rot6D {
    pub a: Vec3,
    pub b: Vec3,
}

impl Rot6D {
    pub fn new(a: Vec3, b: Vec3) -> Self {
        Self { a, b }
    }

    pub fn identity() -> Self {
        Self::new(Vec3::x(), Vec3::y())
    }

    pub fn from_slice(v: &[f64; 6]) -> Self {
        Self::new(Vec3::new(v[0], v[1], v[2]), Vec3::new(v[3], v[4], v[5]))
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.a.x, self.a.y, self.a.z, self.b.x, self.b.y, self.b.z]
    }
}

/// Gram–Schmidt: `c1 = â`, `c2 = normalize(b − (b·c1)c1)`, `c3 = c1 × c2`.
pub fn rot6d_to_matrix(r: &Rot6D) -> Result<Rotation> {
    if !(r.a.iter().chain(r.b.iter()).all(|v| v.is_finite())) {
        return Err(Error::DegenerateInput("6D rotation has non-finite components"));
    }
    let na = r.a.norm();
    if na < GRAM_SCHMIDT_EPS {
        return Err(Error::DegenerateInput("6D rotation first column is zero"));
    }
    let c1 = r.a / na;
    let u = r.b - c1 * c1.dot(&r.b);
    let nu = u.norm();
    if nu < GRAM_SCHMIDT_EPS * r.b.norm().max(1.0) || nu < GRAM_SCHMIDT_EPS {
        return Err(Error::DegenerateInput("6D rotation columns are parallel"));
    }
    let c2 = u / nu;
    let c3 = c1.cross(&c2);
    Ok(Rotation(Mat3::from_columns(&[c1, c2, c3])))
}

pub fn matrix_to_rot6d(r: &Rotation) -> Rot6D {
    Rot6D::new(r.column(0), r.column(1))
}

/// SO(3) geodesic distance `arccos((tr(R1ᵀR2) − 1) / 2)` in `[0, π]`.
///
/// Evaluated as `atan2(sin θ, cos θ)` with `sin θ` taken from the skew part
/// of `R1ᵀR2`, which stays accurate near 0 where `arccos` loses half the digits.
pub fn geodesic_angle(r1: &Rotation, r2: &Rotation) -> f64 {
    let rel = r1.0.transpose() * r2.0;
    let cos_t = ((rel.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let sin_t = vee(&rel).norm();
    sin_t.atan2(cos_t)
}

pub(crate) fn skew(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

pub(crate) fn vee(m: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}
