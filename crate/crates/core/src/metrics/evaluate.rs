use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::ap::{average_precision, pr_curve, RankedDetection};
use super::matching::{score_order, Criterion, PairTable};
use super::ods::ods;
use super::report::{ClassReport, Counts, MetricReport};
use super::tp::{mean_errors, pair_errors, TpErrors};
use super::{Detection, GroundTruth, MetricConfig};
use crate::error::{Error, Result};
use crate::geometry::Box3D;
use crate::par::Exec;

/// Per-class AP and its mean over classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ApSummary {
    pub per_class: BTreeMap<String, f64>,
    pub mean: f64,
}

struct Group<'a> {
    class: usize,
    frame: usize,
    dets: Vec<&'a Detection>,
    /// In-frame input position of each detection.
    det_index: Vec<usize>,
    gts: Vec<&'a GroundTruth>,
}

struct GroupResult {
    class: usize,
    frame: usize,
    scores: Vec<f64>,
    det_index: Vec<usize>,
    iou_tp: Vec<Vec<bool>>,
    dist_tp: Vec<Vec<bool>>,
    errors: Vec<TpErrors>,
    tp: usize,
    fp: usize,
    fn_: usize,
}

fn process(g: &Group<'_>, cfg: &MetricConfig) -> Result<GroupResult> {
    let det_boxes: Vec<&Box3D> = g.dets.iter().map(|d| &d.box3d).collect();
    let gt_boxes: Vec<&Box3D> = g.gts.iter().map(|t| &t.box3d).collect();
    let table = PairTable::new(&det_boxes, &gt_boxes, cfg.radius)?;
    let scores: Vec<f64> = g.dets.iter().map(|d| d.score).collect();
    let order = score_order(&scores);

    let flags = |c: Criterion| {
        let m = table.greedy(&order, c);
        let mut tp = vec![false; g.dets.len()];
        for (d, _) in &m.pairs {
            tp[*d] = true;
        }
        tp
    };
    let iou_tp = cfg.iou_thresholds.iter().map(|&t| flags(Criterion::Iou(t))).collect();
    let dist_tp = cfg
        .dist_ratio_thresholds
        .iter()
        .map(|&r| flags(Criterion::Dist(r)))
        .collect();

    let ratio = cfg.tp_error_threshold_ratio;
    let m = table.greedy(&order, Criterion::Dist(ratio));
    let errors = m
        .pairs
        .iter()
        .map(|&(d, t)| pair_errors(det_boxes[d], gt_boxes[t], ratio, cfg.radius))
        .collect::<Result<Vec<_>>>()?;
    debug_assert!(m
        .pairs
        .iter()
        .all(|&(d, t)| table.distance(d, t) <= ratio * table.radius(t)));

    Ok(GroupResult {
        class: g.class,
        frame: g.frame,
        scores,
        det_index: g.det_index.clone(),
        iou_tp,
        dist_tp,
        errors,
        tp: m.tp(),
        fp: m.fp(),
        fn_: m.fn_(),
    })
}

fn class_ap(results: &[&GroupResult], n_gt: usize, threshold: usize, use_iou: bool, cfg: &MetricConfig) -> Result<f64> {
    let mut ranked = Vec::new();
    for r in results {
        let flags = if use_iou {
            &r.iou_tp[threshold]
        } else {
            &r.dist_tp[threshold]
        };
        for (k, &is_tp) in flags.iter().enumerate() {
            ranked.push(RankedDetection {
                score: r.scores[k],
                frame: r.frame,
                index: r.det_index[k],
                is_tp,
            });
        }
    }
    let curve = pr_curve(&ranked, n_gt)?;
    Ok(average_precision(&curve, cfg.ap_integration, cfg.recall_points))
}

fn mean(v: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut n) = (0.0, 0usize);
    for x in v {
        s += x;
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        s / n as f64
    }
}

fn subset_ods(classes: &BTreeMap<String, ClassReport>, names: &Option<Vec<String>>) -> Result<Option<f64>> {
    let Some(names) = names else { return Ok(None) };
    let wanted: BTreeSet<&str> = names.iter().map(String::as_str).collect();
    let picked: Vec<&ClassReport> = classes
        .iter()
        .filter(|(k, _)| wanted.contains(k.as_str()))
        .map(|(_, v)| v)
        .collect();
    if picked.is_empty() {
        return Ok(None);
    }
    let v = ods(
        mean(picked.iter().map(|c| c.ap_dist)),
        mean(picked.iter().map(|c| c.ate)),
        mean(picked.iter().map(|c| c.ase)),
        mean(picked.iter().map(|c| c.aoe)),
    )?;
    Ok(Some(v))
}

/// [`evaluate_with`] using the default executor.
pub fn evaluate(gts: &[GroundTruth], dets: &[Detection], cfg: &MetricConfig) -> Result<MetricReport> {
    evaluate_with(gts, dets, cfg, Exec::default())
}

/// Compute every metric for a dataset.
///
/// Classes are those present in the ground truth; detections of other
/// classes are counted as ignored. Per-(class, frame) matching runs under
/// `exec`; all reductions happen afterwards in sorted class/frame order, so
/// the report is identical for every executor and thread count.
pub fn evaluate_with(gts: &[GroundTruth], dets: &[Detection], cfg: &MetricConfig, exec: Exec) -> Result<MetricReport> {
    cfg.validate()?;
    if gts.is_empty() {
        return Err(Error::EmptyGroundTruth);
    }
    for g in gts {
        g.validate()?;
    }
    for d in dets {
        d.validate()?;
    }

    let class_names: Vec<&str> = gts
        .iter()
        .map(|g| g.label.as_str())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let class_idx: HashMap<&str, usize> = class_names.iter().enumerate().map(|(i, c)| (*c, i)).collect();
    let frame_names: Vec<&str> = gts
        .iter()
        .map(|g| g.frame_id.as_str())
        .chain(dets.iter().map(|d| d.frame_id.as_str()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let frame_idx: HashMap<&str, usize> = frame_names.iter().enumerate().map(|(i, f)| (*f, i)).collect();

    let mut groups: BTreeMap<(usize, usize), Group<'_>> = BTreeMap::new();
    let mut counts = Counts {
        n_gt: gts.len(),
        n_det: dets.len(),
        ..Default::default()
    };
    for g in gts {
        let key = (class_idx[g.label.as_str()], frame_idx[g.frame_id.as_str()]);
        groups
            .entry(key)
            .or_insert_with(|| Group {
                class: key.0,
                frame: key.1,
                dets: Vec::new(),
                det_index: Vec::new(),
                gts: Vec::new(),
            })
            .gts
            .push(g);
    }
    let mut per_frame_counter = vec![0usize; frame_names.len()];
    for d in dets {
        let f = frame_idx[d.frame_id.as_str()];
        let index = per_frame_counter[f];
        per_frame_counter[f] += 1;
        let Some(&c) = class_idx.get(d.label.as_str()) else {
            counts.n_det_ignored += 1;
            continue;
        };
        let group = groups.entry((c, f)).or_insert_with(|| Group {
            class: c,
            frame: f,
            dets: Vec::new(),
            det_index: Vec::new(),
            gts: Vec::new(),
        });
        group.dets.push(d);
        group.det_index.push(index);
    }

    let groups: Vec<Group<'_>> = groups.into_values().collect();
    let results = exec
        .map(&groups, |g| process(g, cfg))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut classes = BTreeMap::new();
    for (ci, name) in class_names.iter().enumerate() {
        let rs: Vec<&GroupResult> = results.iter().filter(|r| r.class == ci).collect();
        let n_gt = groups.iter().filter(|g| g.class == ci).map(|g| g.gts.len()).sum();
        let n_det = groups.iter().filter(|g| g.class == ci).map(|g| g.dets.len()).sum();
        let ap_iou_by_threshold = (0..cfg.iou_thresholds.len())
            .map(|t| class_ap(&rs, n_gt, t, true, cfg))
            .collect::<Result<Vec<_>>>()?;
        let ap_dist_by_threshold = (0..cfg.dist_ratio_thresholds.len())
            .map(|t| class_ap(&rs, n_gt, t, false, cfg))
            .collect::<Result<Vec<_>>>()?;
        let errors: Vec<TpErrors> = rs.iter().flat_map(|r| r.errors.iter().copied()).collect();
        let e = mean_errors(&errors);
        let report = ClassReport {
            n_gt,
            n_det,
            ap_iou: mean(ap_iou_by_threshold.iter().copied()),
            ap_dist: mean(ap_dist_by_threshold.iter().copied()),
            ap_iou_by_threshold,
            ap_dist_by_threshold,
            ate: e.ate,
            ase: e.ase,
            aoe: e.aoe,
            tp: rs.iter().map(|r| r.tp).sum(),
            fp: rs.iter().map(|r| r.fp).sum(),
            fn_: rs.iter().map(|r| r.fn_).sum(),
        };
        counts.tp += report.tp;
        counts.fp += report.fp;
        counts.fn_ += report.fn_;
        classes.insert((*name).to_string(), report);
    }

    let ap_iou = mean(classes.values().map(|c| c.ap_iou));
    let ap_dist = mean(classes.values().map(|c| c.ap_dist));
    let mate = mean(classes.values().map(|c| c.ate));
    let mase = mean(classes.values().map(|c| c.ase));
    let maoe = mean(classes.values().map(|c| c.aoe));
    let ods_all = ods(ap_dist, mate, mase, maoe)?;
    let ods_base = subset_ods(&classes, &cfg.base_classes)?;
    let ods_novel = subset_ods(&classes, &cfg.novel_classes)?;

    Ok(MetricReport {
        classes,
        ap_iou,
        ap_dist,
        mate,
        mase,
        maoe,
        ods: ods_all,
        ods_base,
        ods_novel,
        iou_thresholds: cfg.iou_thresholds.clone(),
        dist_ratio_thresholds: cfg.dist_ratio_thresholds.clone(),
        tp_error_threshold_ratio: cfg.tp_error_threshold_ratio,
        counts,
    })
}

/// Mean AP over the IoU thresholds, per class and over classes.
pub fn ap_iou(gts: &[GroundTruth], dets: &[Detection], cfg: &MetricConfig) -> Result<ApSummary> {
    let r = evaluate(gts, dets, cfg)?;
    Ok(ApSummary {
        per_class: r.classes.iter().map(|(k, c)| (k.clone(), c.ap_iou)).collect(),
        mean: r.ap_iou,
    })
}

/// Mean AP over the distance-ratio thresholds, per class and over classes.
pub fn ap_dist(gts: &[GroundTruth], dets: &[Detection], cfg: &MetricConfig) -> Result<ApSummary> {
    let r = evaluate(gts, dets, cfg)?;
    Ok(ApSummary {
        per_class: r.classes.iter().map(|(k, c)| (k.clone(), c.ap_dist)).collect(),
        mean: r.ap_dist,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Rotation, Vec3};

    fn gt(frame: &str, label: &str, c: Vec3, dims: Vec3) -> GroundTruth {
        GroundTruth {
            frame_id: frame.into(),
            label: label.into(),
            box3d: Box3D::new(c, dims, Rotation::about_y(0.3)).unwrap(),
            box2d: None,
        }
    }

    fn as_det(g: &GroundTruth, score: f64) -> Detection {
        Detection {
            frame_id: g.frame_id.clone(),
            label: g.label.clone(),
            score,
            box3d: g.box3d,
            box2d: None,
        }
    }

    fn scene() -> Vec<GroundTruth> {
        vec![
            gt("a", "car", Vec3::new(0.0, 1.0, 20.0), Vec3::new(1.8, 4.5, 1.6)),
            gt("a", "sign", Vec3::new(3.0, -1.0, 12.0), Vec3::new(0.6, 0.05, 0.6)),
            gt("b", "car", Vec3::new(-4.0, 1.0, 30.0), Vec3::new(1.9, 4.2, 1.5)),
        ]
    }

    #[test]
    fn perfect_predictions() {
        let gts = scene();
        let dets: Vec<Detection> = gts.iter().map(|g| as_det(g, 0.8)).collect();
        let r = evaluate(&gts, &dets, &MetricConfig::default()).unwrap();
        assert_eq!((r.ap_iou, r.ap_dist, r.ods), (1.0, 1.0, 1.0));
        assert_eq!((r.mate, r.mase, r.maoe), (0.0, 0.0, 0.0));
        assert_eq!(r.counts.tp, 3);
    }

    #[test]
    fn empty_predictions() {
        let r = evaluate(&scene(), &[], &MetricConfig::default()).unwrap();
        assert_eq!((r.ap_iou, r.ap_dist, r.ods), (0.0, 0.0, 0.0));
        assert_eq!((r.mate, r.mase, r.maoe), (1.0, 1.0, 1.0));
        assert_eq!(r.counts.fn_, 3);
    }

    #[test]
    fn empty_ground_truth_is_error() {
        assert_eq!(
            evaluate(&[], &[], &MetricConfig::default()),
            Err(Error::EmptyGroundTruth)
        );
    }

    #[test]
    fn displaced_by_three_quarters_radius() {
        // dims (2, 2, 1): radius 1.5; offset 1.125 = 0.75 * 1.5.
        let g = GroundTruth {
            frame_id: "f".into(),
            label: "x".into(),
            box3d: Box3D::axis_aligned(Vec3::new(0.0, 0.0, 10.0), Vec3::new(2.0, 2.0, 1.0)).unwrap(),
            box2d: None,
        };
        let mut d = as_det(&g, 0.9);
        d.box3d.center.x += 1.125;
        let r = evaluate(std::slice::from_ref(&g), &[d], &MetricConfig::default()).unwrap();
        let c = &r.classes["x"];
        let expected: Vec<f64> = (10..=20).map(|i| if i >= 15 { 1.0 } else { 0.0 }).collect();
        assert_eq!(c.ap_dist_by_threshold, expected);
        assert!((r.ap_dist - 6.0 / 11.0).abs() < 1e-15);
        assert_eq!(c.ate, 0.75);
    }

    #[test]
    fn unknown_class_detections_ignored() {
        let gts = scene();
        let mut dets: Vec<Detection> = gts.iter().map(|g| as_det(g, 0.8)).collect();
        let mut extra = dets[0].clone();
        extra.label = "ufo".into();
        dets.push(extra);
        let r = evaluate(&gts, &dets, &MetricConfig::default()).unwrap();
        assert_eq!(r.counts.n_det_ignored, 1);
        assert_eq!(r.ods, 1.0);
    }

    #[test]
    fn base_and_novel_splits() {
        let gts = scene();
        let dets = vec![as_det(&gts[0], 0.9), as_det(&gts[2], 0.8)];
        let cfg = MetricConfig {
            base_classes: Some(vec!["car".into()]),
            novel_classes: Some(vec!["sign".into(), "absent".into()]),
            ..Default::default()
        };
        let r = evaluate(&gts, &dets, &cfg).unwrap();
        assert_eq!(r.ods_base, Some(1.0));
        assert_eq!(r.ods_novel, Some(0.0));
        assert_eq!(r.ods, 0.5);
    }

    #[test]
    fn rejects_bad_score() {
        let gts = scene();
        let mut d = as_det(&gts[0], 0.5);
        d.score = 1.5;
        assert!(matches!(
            evaluate(&gts, &[d], &MetricConfig::default()),
            Err(Error::OutOfRange(..))
        ));
    }

    #[test]
    fn executors_agree() {
        let gts = scene();
        let mut dets: Vec<Detection> = gts.iter().map(|g| as_det(g, 0.7)).collect();
        dets[1].box3d.center.z += 0.04;
        dets[2].box3d.center.x += 0.5;
        let a = evaluate_with(&gts, &dets, &MetricConfig::default(), Exec::Sequential).unwrap();
        let b = evaluate_with(&gts, &dets, &MetricConfig::default(), Exec::Parallel).unwrap();
        assert_eq!(a.to_canonical_json(), b.to_canonical_json());
    }

    #[test]
    fn ap_helpers() {
        let gts = scene();
        let dets: Vec<Detection> = gts.iter().map(|g| as_det(g, 0.8)).collect();
        let a = ap_iou(&gts, &dets, &MetricConfig::default()).unwrap();
        let b = ap_dist(&gts, &[], &MetricConfig::default()).unwrap();
        assert_eq!(a.mean, 1.0);
        assert_eq!(b.mean, 0.0);
        assert_eq!(a.per_class.len(), 2);
    }
}
