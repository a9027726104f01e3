use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use mood3d::geometry::RadiusKind;
use mood3d::io::{read_gt, read_pred, write_gt, write_pred, write_report, GtDataset, PredDataset};
use mood3d::lifting::{canonicalize, lift, lift_jacobian, CanonicalConfig, LiftParams, LiftScales};
use mood3d::losses::{final_loss, giou_2d, l1_3d, silog, LossWeights};
use mood3d::metrics::{evaluate_with, ods, ApIntegration, MetricConfig, MetricReport};
use mood3d::par::with_threads;
use mood3d::synth::{generate, perturb, PerturbModel, SceneSpec};
use mood3d::{Box2D, CameraIntrinsics, Exec};
use serde_json::json;

use crate::config::{overlay, FileConfig, Format};
use crate::{
    CanonArgs, Cli, Command, CompareArgs, EvalArgs, Failure, IntegrationArg, LiftArgs, LossCommand, MetricFlags,
    RadiusArg, SynthArgs,
};

type Outcome = Result<(), Failure>;

pub fn run(cli: Cli) -> Outcome {
    let file = FileConfig::load(cli.config.as_deref())?;
    let threads = file.threads.unwrap_or(cli.threads);
    match cli.command {
        Command::Eval(args) => eval(args, &file, threads),
        Command::CompareMatching(args) => compare(args, &file, threads),
        Command::Lift(args) => lift_cmd(args, &file),
        Command::Canon(args) => canon(args, &file),
        Command::Synth(args) => synth(args, &file, threads),
        Command::Loss(cmd) => loss(cmd),
    }
}

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

/// Attach the file name to errors that do not already carry it.
fn at(path: &Path, e: mood3d::Error) -> Failure {
    match e {
        mood3d::Error::Io { .. } => e.into(),
        _ => input(format!("{}: {e}", path.display())),
    }
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn metric_config(flags: &MetricFlags, file: &FileConfig) -> Result<MetricConfig, Failure> {
    let mut cfg = MetricConfig::default();
    if let Some(v) = &flags.iou_thresholds {
        cfg.iou_thresholds = v.clone();
    }
    if let Some(v) = &flags.dist_ratios {
        cfg.dist_ratio_thresholds = v.clone();
    }
    if let Some(v) = flags.tp_ratio {
        cfg.tp_error_threshold_ratio = v;
    }
    if let Some(v) = flags.recall_points {
        cfg.recall_points = v;
    }
    if let Some(v) = flags.ap_integration {
        cfg.ap_integration = match v {
            IntegrationArg::Interpolated => ApIntegration::Interpolated,
            IntegrationArg::Trapezoid => ApIntegration::Trapezoid,
        };
    }
    if let Some(v) = flags.radius {
        cfg.radius = match v {
            RadiusArg::Circumscribed => RadiusKind::Circumscribed,
            RadiusArg::Inscribed => RadiusKind::Inscribed,
        };
    }
    if flags.base_classes.is_some() {
        cfg.base_classes = flags.base_classes.clone();
    }
    if flags.novel_classes.is_some() {
        cfg.novel_classes = flags.novel_classes.clone();
    }
    let cfg = overlay(cfg, file.metrics.as_ref(), "metrics")?;
    cfg.validate()?;
    Ok(cfg)
}

fn intrinsics(v: &[f64]) -> Result<CameraIntrinsics, Failure> {
    let [fx, fy, cx, cy, w, h] = v else {
        return Err(input(format!(
            "--intrinsics needs 6 values fx,fy,cx,cy,width,height, got {}",
            v.len()
        )));
    };
    let size = |x: f64, name: &str| {
        if x.fract() == 0.0 && x >= 1.0 && x <= u32::MAX as f64 {
            Ok(x as u32)
        } else {
            Err(input(format!("intrinsics {name} must be a positive integer, got {x}")))
        }
    };
    Ok(CameraIntrinsics::new(
        *fx,
        *fy,
        *cx,
        *cy,
        size(*w, "width")?,
        size(*h, "height")?,
    )?)
}

fn box2d(v: &[f64], flag: &str) -> Result<Box2D, Failure> {
    let [x1, y1, x2, y2] = v else {
        return Err(input(format!("--{flag} needs 4 values x1,y1,x2,y2, got {}", v.len())));
    };
    Ok(Box2D::new(*x1, *y1, *x2, *y2)?)
}

fn params12(v: &[f64], flag: &str) -> Result<LiftParams, Failure> {
    let arr: [f64; 12] = v
        .try_into()
        .map_err(|_| input(format!("--{flag} needs 12 values, got {}", v.len())))?;
    let p = LiftParams::from_array(&arr);
    p.validate()?;
    Ok(p)
}

fn pct(v: f64) -> String {
    format!("{:.1}", 100.0 * v)
}

fn check_report(r: &MetricReport) -> Outcome {
    let unit = |v: f64| (0.0..=1.0).contains(&v);
    let mut values = vec![r.ap_iou, r.ap_dist, r.mate, r.mase, r.maoe, r.ods];
    values.extend(r.ods_base);
    values.extend(r.ods_novel);
    for c in r.classes.values() {
        values.extend([c.ap_iou, c.ap_dist, c.ate, c.ase, c.aoe]);
    }
    if values.into_iter().all(unit) {
        Ok(())
    } else {
        Err(Failure::Internal("report value outside [0, 1]".into()))
    }
}

fn load_and_evaluate(gt: &Path, pred: &Path, cfg: &MetricConfig, threads: usize) -> Result<MetricReport, Failure> {
    let gts = read_gt(gt).map_err(|e| at(gt, e))?.items();
    let dets = read_pred(pred).map_err(|e| at(pred, e))?.items();
    let report = with_threads(threads, || evaluate_with(&gts, &dets, cfg, Exec::default())).map_err(|e| match e {
        mood3d::Error::EmptyGroundTruth => {
            Failure::EmptyGroundTruth(format!("{}: no ground-truth boxes", gt.display()))
        }
        e => e.into(),
    })?;
    check_report(&report)?;
    Ok(report)
}

fn eval(args: EvalArgs, file: &FileConfig, threads: usize) -> Outcome {
    if let Some(c) = &args.components {
        let [ap, mate, mase, maoe] = c.as_slice() else {
            return Err(input(format!(
                "--components needs 4 values AP%,mATE,mASE,mAOE, got {}",
                c.len()
            )));
        };
        let v = ods(ap / 100.0, *mate, *mase, *maoe)?;
        println!("ODS {}", pct(v));
        return Ok(());
    }
    let (Some(gt), Some(pred)) = (&args.gt, &args.pred) else {
        return Err(input("--gt and --pred are required"));
    };
    let cfg = metric_config(&args.metrics, file)?;
    let report = load_and_evaluate(gt, pred, &cfg, threads)?;
    if let Some(out) = &args.out {
        write_report(&report, out)?;
    }
    if let Some(csv) = &args.csv {
        write_file(csv, &report.to_table_csv())?;
    }
    match file.format.or(args.format).unwrap_or(Format::Text) {
        Format::Text => print!("{}", report.summary_table()),
        Format::Json => print!("{}", report.to_canonical_json()),
        Format::Csv => print!("{}", report.to_table_csv()),
    }
    Ok(())
}

fn compare(args: CompareArgs, file: &FileConfig, threads: usize) -> Outcome {
    let cfg = metric_config(&args.metrics, file)?;
    let report = load_and_evaluate(&args.gt, &args.pred, &cfg, threads)?;
    let mut rows: Vec<(&String, f64, f64, f64)> = report
        .classes
        .iter()
        .map(|(name, c)| (name, c.ap_iou, c.ap_dist, c.ap_dist - c.ap_iou))
        .collect();
    rows.sort_by(|a, b| b.3.total_cmp(&a.3).then(a.0.cmp(b.0)));
    let mut out = String::new();
    match file.format.or(args.format).unwrap_or(Format::Text) {
        Format::Text => {
            let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max(5);
            let _ = writeln!(
                out,
                "{:<width$} {:>9} {:>10} {:>6}",
                "class", "AP3D(IoU)", "AP3D(dist)", "gap"
            );
            for (name, iou, dist, gap) in &rows {
                let _ = writeln!(
                    out,
                    "{:<width$} {:>9} {:>10} {:>6}",
                    name,
                    pct(*iou),
                    pct(*dist),
                    pct(*gap)
                );
            }
        }
        Format::Csv => {
            out.push_str("class,ap_iou,ap_dist,gap\n");
            for (name, iou, dist, gap) in &rows {
                let _ = writeln!(out, "{name},{},{},{}", pct(*iou), pct(*dist), pct(*gap));
            }
        }
        Format::Json => {
            let v: Vec<_> = rows
                .iter()
                .map(|(name, iou, dist, gap)| json!({"class": name, "ap_iou": iou, "ap_dist": dist, "gap": gap}))
                .collect();
            out = serde_json::to_string_pretty(&v).map_err(|e| Failure::Internal(e.to_string()))? + "\n";
        }
    }
    print!("{out}");
    Ok(())
}

fn lift_cmd(args: LiftArgs, file: &FileConfig) -> Outcome {
    let k = intrinsics(&args.intrinsics)?;
    let b = box2d(&args.box2d, "box2d")?;
    let p = params12(&args.params, "params")?;
    let mut scales = LiftScales::default();
    if let Some(v) = args.s_depth {
        scales.s_depth = v;
    }
    if let Some(v) = args.s_dim {
        scales.s_dim = v;
    }
    let scales = overlay(scales, file.scales.as_ref(), "scales")?;
    scales.validate()?;
    let box3d = lift(&p, &b, &k, &scales)?;
    let mut out = json!({
        "center": box3d.center.as_slice(),
        "dims": box3d.dims.as_slice(),
        "rotation": box3d.rotation.to_row_major(),
        "axis_angle": box3d.rotation.to_axis_angle().as_slice(),
    });
    if args.jacobian {
        let j = lift_jacobian(&p, &b, &k, &scales)?;
        let rows: Vec<Vec<f64>> = (0..9).map(|r| j.row(r).iter().copied().collect()).collect();
        out["jacobian"] = json!(rows);
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&out).map_err(|e| Failure::Internal(e.to_string()))?
    );
    Ok(())
}

fn canon(args: CanonArgs, file: &FileConfig) -> Outcome {
    let k = intrinsics(&args.intrinsics)?;
    let mut cfg = CanonicalConfig::default();
    if let Some(h) = args.canon_height {
        cfg.canon_height = h;
    }
    if let Some(w) = args.canon_width {
        cfg.canon_width = w;
    }
    let cfg = overlay(cfg, file.canonical.as_ref(), "canonical")?;
    cfg.validate()?;
    let (t, k2) = canonicalize(&k, &cfg)?;
    let out = json!({"transform": t, "intrinsics": k2});
    println!(
        "{}",
        serde_json::to_string_pretty(&out).map_err(|e| Failure::Internal(e.to_string()))?
    );
    Ok(())
}

fn load_spec(path: &Path) -> Result<SceneSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(|e| e.to_string())
    } else {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| input(format!("{}: {e}", path.display())))
}

fn synth(args: SynthArgs, file: &FileConfig, threads: usize) -> Outcome {
    let mut spec = load_spec(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    let mut model = PerturbModel::default();
    for (slot, flag) in [
        (&mut model.sigma_t, args.sigma_t),
        (&mut model.sigma_s, args.sigma_s),
        (&mut model.sigma_r, args.sigma_r),
        (&mut model.p_miss, args.p_miss),
        (&mut model.fp_rate, args.fp_rate),
    ] {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    if let Some(seed) = args.perturb_seed {
        model.seed = seed;
    }
    let model = overlay(model, file.perturb.as_ref(), "perturb")?;
    let (scene, dets) = with_threads(threads, || -> Result<_, mood3d::Error> {
        let scene = generate(&spec, Exec::default())?;
        let dets = perturb(&scene, &model, Exec::default())?;
        Ok((scene, dets))
    })?;
    let gt = GtDataset::from_scene(&scene);
    write_gt(&gt, &args.gt_out)?;
    write_pred(
        &PredDataset::from_detections(&dets).with_intrinsics(&scene),
        &args.pred_out,
    )?;
    println!(
        "wrote {} frames with {} ground-truth boxes to {} and {} predictions to {}",
        scene.frames.len(),
        gt.items().len(),
        args.gt_out.display(),
        dets.len(),
        args.pred_out.display()
    );
    Ok(())
}

fn loss(cmd: LossCommand) -> Outcome {
    let v = match cmd {
        LossCommand::Silog {
            pred,
            gt,
            mask,
            lambda_si,
        } => {
            let mask = mask
                .map(|m| {
                    m.into_iter()
                        .map(|x| match x {
                            0 => Ok(false),
                            1 => Ok(true),
                            _ => Err(input(format!("--mask values must be 0 or 1, got {x}"))),
                        })
                        .collect::<Result<Vec<bool>, _>>()
                })
                .transpose()?;
            silog(&pred, &gt, mask.as_deref(), lambda_si)?
        }
        LossCommand::Giou { a, b } => giou_2d(&box2d(&a, "a")?, &box2d(&b, "b")?)?,
        LossCommand::L1 { pred, target } => l1_3d(&params12(&pred, "pred")?, &params12(&target, "target")?),
        LossCommand::Final {
            l2d,
            l3d,
            depth,
            w_2d,
            w_3d,
            lambda_depth,
            layers,
        } => {
            let w = LossWeights {
                w_2d,
                w_3d,
                lambda_depth,
                num_decoder_layers: layers,
            };
            final_loss(&l2d, &l3d, depth, &w)?
        }
    };
    println!("{v}");
    Ok(())
}
