//! Greedy score-ordered matching of detections to ground truth.
//!
//! Detections are visited by descending score (ties: lower input index
//! first). Each claims the unmatched GT with the best affinity among those
//! passing the criterion: highest IoU, or smallest center distance. Affinity
//! ties go to the lower GT index.

use super::{Detection, GroundTruth};
use crate::error::{Error, Result};
use crate::geometry::{center_distance, iou3d, Box3D, RadiusKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// Pass when `IoU ≥ τ`.
    Iou(f64),
    /// Pass when `distance ≤ ratio · radius(gt)`.
    Dist(f64),
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrameMatch {
    /// `(detection index, gt index)` in the order the matches were made.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_dets: Vec<usize>,
    pub unmatched_gts: Vec<usize>,
}

impl FrameMatch {
    pub fn tp(&self) -> usize {
        self.pairs.len()
    }

    pub fn fp(&self) -> usize {
        self.unmatched_dets.len()
    }

    pub fn fn_(&self) -> usize {
        self.unmatched_gts.len()
    }
}

/// Pairwise IoU, center distance and GT radius for one frame and class.
pub(crate) struct PairTable {
    n_gt: usize,
    iou: Vec<f64>,
    dist: Vec<f64>,
    radius: Vec<f64>,
}

impl PairTable {
    pub(crate) fn new(dets: &[&Box3D], gts: &[&Box3D], radius: RadiusKind) -> Result<Self> {
        let n_gt = gts.len();
        let mut iou = Vec::with_capacity(dets.len() * n_gt);
        let mut dist = Vec::with_capacity(dets.len() * n_gt);
        for d in dets {
            for g in gts {
                iou.push(iou3d(d, g)?);
                dist.push(center_distance(d, g));
            }
        }
        Ok(Self {
            n_gt,
            iou,
            dist,
            radius: gts.iter().map(|g| radius.radius(g)).collect(),
        })
    }

    fn passes(&self, d: usize, g: usize, c: Criterion) -> bool {
        let k = d * self.n_gt + g;
        match c {
            Criterion::Iou(t) => self.iou[k] >= t,
            Criterion::Dist(r) => self.dist[k] <= r * self.radius[g],
        }
    }

    /// True when `g1` is strictly preferred over `g2` for detection `d`.
    fn better(&self, d: usize, g1: usize, g2: usize, c: Criterion) -> bool {
        let (k1, k2) = (d * self.n_gt + g1, d * self.n_gt + g2);
        match c {
            Criterion::Iou(_) => self.iou[k1] > self.iou[k2],
            Criterion::Dist(_) => self.dist[k1] < self.dist[k2],
        }
    }

    pub(crate) fn distance(&self, d: usize, g: usize) -> f64 {
        self.dist[d * self.n_gt + g]
    }

    pub(crate) fn radius(&self, g: usize) -> f64 {
        self.radius[g]
    }

    /// Greedy matching for detections visited in `order`.
    pub(crate) fn greedy(&self, order: &[usize], criterion: Criterion) -> FrameMatch {
        let mut gt_taken = vec![false; self.n_gt];
        let mut det_matched = vec![false; order.len()];
        let mut pairs = Vec::new();
        for &d in order {
            let mut best: Option<usize> = None;
            for (g, &taken) in gt_taken.iter().enumerate() {
                if taken || !self.passes(d, g, criterion) {
                    continue;
                }
                if best.is_none_or(|b| self.better(d, g, b, criterion)) {
                    best = Some(g);
                }
            }
            if let Some(g) = best {
                gt_taken[g] = true;
                det_matched[d] = true;
                pairs.push((d, g));
            }
        }
        FrameMatch {
            pairs,
            unmatched_dets: (0..order.len()).filter(|&d| !det_matched[d]).collect(),
            unmatched_gts: (0..self.n_gt).filter(|&g| !gt_taken[g]).collect(),
        }
    }
}

/// Detection indices by descending score, ties by ascending index.
pub(crate) fn score_order(scores: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    order
}

/// Match detections to ground truth within a single frame and class.
pub fn match_frame(
    dets: &[Detection],
    gts: &[GroundTruth],
    criterion: Criterion,
    radius: RadiusKind,
) -> Result<FrameMatch> {
    let key = dets
        .iter()
        .map(|d| (&d.frame_id, &d.label))
        .chain(gts.iter().map(|g| (&g.frame_id, &g.label)))
        .next();
    if let Some((frame, label)) = key {
        let same = |f: &String, l: &String| f == frame && l == label;
        if !dets.iter().all(|d| same(&d.frame_id, &d.label)) || !gts.iter().all(|g| same(&g.frame_id, &g.label)) {
            return Err(Error::MixedFrames);
        }
    }
    for d in dets {
        d.validate()?;
    }
    let det_boxes: Vec<&Box3D> = dets.iter().map(|d| &d.box3d).collect();
    let gt_boxes: Vec<&Box3D> = gts.iter().map(|g| &g.box3d).collect();
    let table = PairTable::new(&det_boxes, &gt_boxes, radius)?;
    let scores: Vec<f64> = dets.iter().map(|d| d.score).collect();
    Ok(table.greedy(&score_order(&scores), criterion))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Vec3;

    fn gt(x: f64) -> GroundTruth {
        GroundTruth {
            frame_id: "f".into(),
            label: "car".into(),
            box3d: Box3D::axis_aligned(Vec3::new(x, 0.0, 10.0), Vec3::new(2.0, 2.0, 1.0)).unwrap(),
            box2d: None,
        }
    }

    fn det(x: f64, score: f64) -> Detection {
        Detection {
            frame_id: "f".into(),
            label: "car".into(),
            score,
            box3d: gt(x).box3d,
            box2d: None,
        }
    }

    #[test]
    fn exact_detection_always_matches() {
        for c in [
            Criterion::Iou(0.05),
            Criterion::Iou(0.5),
            Criterion::Dist(0.5),
            Criterion::Dist(1.0),
        ] {
            let m = match_frame(&[det(0.0, 0.9)], &[gt(0.0)], c, RadiusKind::Circumscribed).unwrap();
            assert_eq!(m.pairs, vec![(0, 0)]);
            assert!(m.unmatched_dets.is_empty() && m.unmatched_gts.is_empty());
        }
    }

    #[test]
    fn higher_score_claims_gt_even_if_farther() {
        let dets = [det(0.1, 0.3), det(0.6, 0.9)];
        let m = match_frame(&dets, &[gt(0.0)], Criterion::Dist(1.0), RadiusKind::Circumscribed).unwrap();
        assert_eq!(m.pairs, vec![(1, 0)]);
        assert_eq!(m.unmatched_dets, vec![0]);
    }

    #[test]
    fn score_ties_break_on_input_order() {
        let dets = [det(0.6, 0.5), det(0.1, 0.5)];
        let m = match_frame(&dets, &[gt(0.0)], Criterion::Dist(1.0), RadiusKind::Circumscribed).unwrap();
        assert_eq!(m.pairs, vec![(0, 0)]);
    }

    #[test]
    fn best_affinity_gt_is_claimed() {
        let m = match_frame(
            &[det(0.9, 0.9)],
            &[gt(0.0), gt(1.0)],
            Criterion::Dist(1.0),
            RadiusKind::Circumscribed,
        )
        .unwrap();
        assert_eq!(m.pairs, vec![(0, 1)]);
        assert_eq!(m.unmatched_gts, vec![0]);
    }

    #[test]
    fn threshold_rejects() {
        // radius 1.5, offset 1.0 -> ratio 2/3
        let m = match_frame(
            &[det(1.0, 0.9)],
            &[gt(0.0)],
            Criterion::Dist(0.6),
            RadiusKind::Circumscribed,
        )
        .unwrap();
        assert!(m.pairs.is_empty());
        let m = match_frame(
            &[det(1.0, 0.9)],
            &[gt(0.0)],
            Criterion::Dist(0.7),
            RadiusKind::Circumscribed,
        )
        .unwrap();
        assert_eq!(m.tp(), 1);
    }

    #[test]
    fn mixed_inputs_rejected() {
        let mut d = det(0.0, 0.5);
        d.frame_id = "g".into();
        assert_eq!(
            match_frame(&[d], &[gt(0.0)], Criterion::Iou(0.1), RadiusKind::Circumscribed),
            Err(Error::MixedFrames)
        );
        let mut g = gt(0.0);
        g.label = "bus".into();
        assert_eq!(
            match_frame(&[], &[gt(0.0), g], Criterion::Iou(0.1), RadiusKind::Circumscribed),
            Err(Error::MixedFrames)
        );
    }

    #[test]
    fn empty_inputs() {
        let m = match_frame(&[], &[gt(0.0)], Criterion::Iou(0.1), RadiusKind::Circumscribed).unwrap();
        assert_eq!(m.fn_(), 1);
        let m = match_frame(&[det(0.0, 1.0)], &[], Criterion::Iou(0.1), RadiusKind::Circumscribed).unwrap();
        assert_eq!(m.fp(), 1);
    }
}
