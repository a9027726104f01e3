//! Exact IoU of oriented cuboids.
//!
//! Cuboid `a` is treated as a convex polytope (a list of planar faces) and
//! clipped successively against the six half-spaces of cuboid `b`. Each
//! clip runs Sutherland–Hodgman on every face and closes the cut with a cap
//! polygon built from the new on-plane vertices. The volume is then summed
//! over tetrahedra fanned from an interior point.

use std::cmp::Ordering;

use super::cuboid::{corners, Box3D};
use super::Vec3;
use crate::error::Result;
use crate::par::Exec;

/// Plane-distance tolerance for vertex classification, relative to the
/// coordinate magnitude of the scene (never below this absolute value).
const PLANE_EPS: f64 = 1e-12;

/// Corner indices of the six faces, counter-clockwise seen from outside.
const FACES: [[usize; 4]; 6] = [
    [0, 2, 6, 4], // -x
    [1, 5, 7, 3], // +x
    [0, 4, 5, 1], // -y
    [2, 3, 7, 6], // +y
    [0, 1, 3, 2], // -z
    [4, 6, 7, 5], // +z
];

struct Polytope {
    faces: Vec<Vec<Vec3>>,
}

impl Polytope {
    fn from_box(b: &Box3D) -> Self {
        let c = corners(b);
        Self {
            faces: FACES.iter().map(|f| f.iter().map(|&i| c[i]).collect()).collect(),
        }
    }

    /// Keep the part with `n·p − d ≤ eps`; points within `eps` count as inside.
    fn clip(&mut self, n: &Vec3, d: f64, eps: f64) {
        let mut faces = Vec::with_capacity(self.faces.len() + 1);
        let mut cap: Vec<Vec3> = Vec::new();
        let mut has_coplanar_face = false;

        for face in &self.faces {
            let dist: Vec<f64> = face.iter().map(|p| n.dot(p) - d).collect();
            if dist.iter().all(|&s| s > eps) {
                continue;
            }
            if dist.iter().all(|&s| s <= eps) {
                if dist.iter().all(|s| s.abs() <= eps) {
                    has_coplanar_face = true;
                }
                cap.extend(face.iter().zip(&dist).filter(|(_, s)| s.abs() <= eps).map(|(p, _)| *p));
                faces.push(face.clone());
                continue;
            }
            let mut out = Vec::with_capacity(face.len() + 2);
            for i in 0..face.len() {
                let j = (i + 1) % face.len();
                let (s, e) = (face[i], face[j]);
                let (ds, de) = (dist[i], dist[j]);
                let (s_in, e_in) = (ds <= eps, de <= eps);
                if s_in {
                    out.push(s);
                    if ds.abs() <= eps {
                        cap.push(s);
                    }
                }
                if s_in != e_in {
                    // Always interpolate from the inside endpoint so the shared
                    // edge of two neighbouring faces yields the same point.
                    let (pi, di, po, dout) = if s_in { (s, ds, e, de) } else { (e, de, s, ds) };
                    if di.abs() > eps {
                        let t = di / (di - dout);
                        let p = pi + (po - pi) * t;
                        out.push(p);
                        cap.push(p);
                    }
                }
            }
            if out.len() >= 3 {
                faces.push(out);
            }
        }

        if !has_coplanar_face {
            if let Some(polygon) = order_cap(cap, n, eps) {
                faces.push(polygon);
            }
        }
        self.faces = faces;
    }

    fn volume(&self) -> f64 {
        let n: usize = self.faces.iter().map(Vec::len).sum();
        if n == 0 {
            return 0.0;
        }
        let interior = self.faces.iter().flatten().sum::<Vec3>() / n as f64;
        let mut six_vol = 0.0;
        for face in &self.faces {
            let a = face[0] - interior;
            for k in 1..face.len() - 1 {
                let b = face[k] - interior;
                let c = face[k + 1] - interior;
                six_vol += a.dot(&b.cross(&c)).abs();
            }
        }
        six_vol / 6.0
    }
}

/// Sort cap points by angle around their centroid within the cutting plane
/// and drop near-duplicates.
fn order_cap(mut pts: Vec<Vec3>, n: &Vec3, eps: f64) -> Option<Vec<Vec3>> {
    if pts.len() < 3 {
        return None;
    }
    let m = pts.iter().sum::<Vec3>() / pts.len() as f64;
    let helper = if n.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
    let u = n.cross(&helper).normalize();
    let v = n.cross(&u);
    let angle = |p: &Vec3| {
        let q = p - m;
        q.dot(&v).atan2(q.dot(&u))
    };
    pts.sort_by(|p, q| angle(p).total_cmp(&angle(q)));
    let tol = eps * 1e3;
    pts.dedup_by(|a, b| (*a - *b).amax() <= tol);
    while pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).amax() <= tol {
        pts.pop();
    }
    (pts.len() >= 3).then_some(pts)
}

fn lex_cmp(a: &Box3D, b: &Box3D) -> Ordering {
    let ka = a.center.iter().chain(a.dims.iter()).chain(a.rotation.matrix().iter());
    let kb = b.center.iter().chain(b.dims.iter()).chain(b.rotation.matrix().iter());
    for (x, y) in ka.zip(kb) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

/// Exact intersection volume of two oriented cuboids.
pub fn intersection_volume(a: &Box3D, b: &Box3D) -> Result<f64> {
    a.validate()?;
    b.validate()?;
    // Fix the argument order so the result is bitwise symmetric.
    let (a, b) = if lex_cmp(a, b) == Ordering::Greater {
        (b, a)
    } else {
        (a, b)
    };

    let ra = 0.5 * a.dims.norm();
    let rb = 0.5 * b.dims.norm();
    if (a.center - b.center).norm() > ra + rb {
        return Ok(0.0);
    }

    let scale = a.center.amax().max(b.center.amax()).max(ra).max(rb).max(1.0);
    let eps = PLANE_EPS * scale;

    let mut poly = Polytope::from_box(a);
    let half = b.dims * 0.5;
    for axis in 0..3 {
        let n = b.rotation.column(axis);
        let c = n.dot(&b.center);
        poly.clip(&n, c + half[axis], eps);
        poly.clip(&-n, -c + half[axis], eps);
        if poly.faces.is_empty() {
            return Ok(0.0);
        }
    }
    Ok(poly.volume().min(a.volume()).min(b.volume()))
}

/// Volume IoU of two oriented cuboids, in `[0, 1]`.
pub fn iou3d(a: &Box3D, b: &Box3D) -> Result<f64> {
    if a == b {
        a.validate()?;
        return Ok(1.0);
    }
    let inter = intersection_volume(a, b)?;
    let union = a.volume() + b.volume() - inter;
    Ok((inter / union).clamp(0.0, 1.0))
}

/// [`iou3d`] over many pairs.
pub fn iou3d_batch(pairs: &[(Box3D, Box3D)], exec: Exec) -> Result<Vec<f64>> {
    exec.map(pairs, |(a, b)| iou3d(a, b)).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Rotation;
    use std::f64::consts::FRAC_PI_4;

    fn cube(c: Vec3) -> Box3D {
        Box3D::axis_aligned(c, Vec3::new(1.0, 1.0, 1.0)).unwrap()
    }

    #[test]
    fn identical_boxes() {
        let a = Box3D::new(
            Vec3::new(1.0, -2.0, 15.0),
            Vec3::new(0.4, 2.0, 1.1),
            Rotation::about_y(0.3),
        )
        .unwrap();
        assert!((iou3d(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn offset_unit_cubes() {
        let a = cube(Vec3::zeros());
        let b = cube(Vec3::new(0.5, 0.0, 0.0));
        assert!((iou3d(&a, &b).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        assert!((intersection_volume(&a, &b).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn disjoint_and_touching() {
        let a = cube(Vec3::zeros());
        assert_eq!(iou3d(&a, &cube(Vec3::new(5.0, 0.0, 0.0))).unwrap(), 0.0);
        assert!(iou3d(&a, &cube(Vec3::new(1.0, 0.0, 0.0))).unwrap() < 1e-12);
    }

    #[test]
    fn nested_boxes() {
        let outer = Box3D::axis_aligned(Vec3::zeros(), Vec3::new(2.0, 2.0, 2.0)).unwrap();
        let inner = Box3D::new(Vec3::zeros(), Vec3::new(0.5, 0.5, 0.5), Rotation::about_x(0.9)).unwrap();
        assert!((iou3d(&outer, &inner).unwrap() - 0.125 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn rotated_square_prism() {
        // Unit square vs the same square rotated by 45°: the intersection is a
        // regular octagon of area 2(√2 − 1).
        let a = cube(Vec3::zeros());
        let b = Box3D::new(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0), Rotation::about_z(FRAC_PI_4)).unwrap();
        let inter = 2.0 * (2f64.sqrt() - 1.0);
        let expected = inter / (2.0 - inter);
        assert!((iou3d(&a, &b).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn symmetric_bitwise() {
        let a = Box3D::new(
            Vec3::new(0.1, 0.2, 5.0),
            Vec3::new(1.0, 2.0, 0.5),
            Rotation::about_z(0.4),
        )
        .unwrap();
        let b = Box3D::new(
            Vec3::new(0.3, 0.0, 5.2),
            Vec3::new(1.5, 0.7, 0.9),
            Rotation::about_x(1.1),
        )
        .unwrap();
        assert_eq!(iou3d(&a, &b).unwrap(), iou3d(&b, &a).unwrap());
    }

    #[test]
    fn degenerate_rejected() {
        let a = cube(Vec3::zeros());
        let mut b = a;
        b.dims.y = 0.0;
        assert!(iou3d(&a, &b).is_err());
    }

    #[test]
    fn batch_matches_single() {
        let a = cube(Vec3::zeros());
        let pairs: Vec<_> = (0..8).map(|i| (a, cube(Vec3::new(0.1 * i as f64, 0.0, 0.0)))).collect();
        let seq = iou3d_batch(&pairs, Exec::Sequential).unwrap();
        let par = iou3d_batch(&pairs, Exec::Parallel).unwrap();
        assert_eq!(seq, par);
        assert!((seq[5] - 0.5 / 1.5).abs() < 1e-12);
    }
}
