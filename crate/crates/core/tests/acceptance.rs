//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::{BTreeMap, HashSet};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radiodet::eval::{evaluate, CurvePoint, EvalConfig, ImageEval};
use radiodet::fusion::{Detection, DetectorKind};
use radiodet::geometry::Rect;
use radiodet::imaging::{back_project, project, CameraModel, ImagingParams, RadioRegion};
use radiodet::nms::{associate_regions, constrained_nms, NmsConfig};
use radiodet::pipeline::{load_inputs, run_with, Method, RunConfig};
use radiodet::radio_loc::{
    compute_spectrum, pick_peaks, synthesize_csi, ArrayGeometry, Orientation, RadioEstimate, SearchGrid, Target,
    SPEED_OF_LIGHT,
};
use radiodet::rng::{substream, Substream};
use radiodet::sim_regions::{build_simulative_set, gt_to_region, Annotation, NoiseDraw, NoiseParams};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ------------------------------------------------------------------ 1

fn matched_filter_recovery() -> Outcome {
    let start = Instant::now();
    let geometry = ArrayGeometry::half_wavelength(8, 64, 5.32e9, 1.25e6, Orientation::Horizontal);
    let grid = SearchGrid::default_for(&geometry, 64);
    assert_eq!((grid.aoa_deg.len(), grid.tof_s.len()), (181, 64));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let trials = 50;
    let mut exact = 0;
    let mut near = 0;
    for trial in 0..trials {
        let (ai, ti) = (rng.random_range(0..181), rng.random_range(0..64));
        let target = Target {
            aoa_deg: grid.aoa_deg[ai],
            tof_s: grid.tof_s[ti],
            amplitude: 1.0,
        };
        let strongest = |noise_std: f64, seed: u64| -> Result<(usize, usize), String> {
            let csi = synthesize_csi(&[target], &geometry, noise_std, seed).map_err(|e| e.to_string())?;
            let spec = compute_spectrum(&csi, &grid.aoa_deg, &grid.tof_s).map_err(|e| e.to_string())?;
            let peaks = pick_peaks(&spec, 0.5).map_err(|e| e.to_string())?;
            let best = peaks
                .iter()
                .max_by(|a, b| a.magnitude.total_cmp(&b.magnitude))
                .ok_or("no peak")?;
            Ok((best.aoa_bin, best.tof_bin))
        };
        if strongest(0.0, trial)? == (ai, ti) {
            exact += 1;
        }
        // unit-amplitude path, per-sample noise power 0.01: 20 dB
        let (a, t) = strongest(0.1, 1000 + trial)?;
        if a.abs_diff(ai) <= 1 && t.abs_diff(ti) <= 1 {
            near += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(exact == trials, || format!("noiseless exact {exact}/{trials}"))?;
    ensure(near as f64 >= 0.95 * trials as f64, || format!("20 dB within one bin {near}/{trials}"))?;
    ensure(secs < 30.0, || format!("runtime {secs:.1} s"))?;
    Ok(format!("noiseless {exact}/{trials} exact, 20 dB {near}/{trials} within one bin, {secs:.2} s"))
}

// ------------------------------------------------------------------ 2

fn moments(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, var.sqrt())
}

/// |mean - mu| and |std - s| within three standard errors of a normal sample.
fn within_3se(v: &[f64], mu: f64, s: f64) -> Result<(), String> {
    let n = v.len() as f64;
    let (m, sd) = moments(v);
    ensure((m - mu).abs() <= 3.0 * s / n.sqrt(), || format!("mean {m} vs {mu}"))?;
    ensure((sd - s).abs() <= 3.0 * s / (2.0 * (n - 1.0)).sqrt(), || format!("std {sd} vs {s}"))
}

fn noise_calibration() -> Outcome {
    let n = 100_000;
    let bbox = Rect::new(40.0, 30.0, 80.0, 200.0);
    let ann = Annotation::person("img", bbox);
    let side = bbox.w.min(bbox.h);
    let (cx, cy) = bbox.center();
    let mut checked = 0;
    for (si, &sigma) in [0.1, 0.3, 0.5].iter().enumerate() {
        for (ki, &k) in [0.05, 0.2].iter().enumerate() {
            let noise = NoiseParams { sigma, k1: k, k2: k, seed: 100 + (si * 2 + ki) as u64 };
            let ctx = |e: String| format!("sigma {sigma}, k {k}: {e}");

            // The draws exactly as the region builder makes them.
            let mut rng = substream(noise.seed, Substream::Regions);
            let draws: Vec<NoiseDraw> = (0..n).map(|_| NoiseDraw::sample(&noise, &mut rng)).collect();
            let zeta: Vec<f64> = draws.iter().map(|d| d.zeta).collect();
            let sx: Vec<f64> = draws.iter().map(|d| d.shift_x).collect();
            let sy: Vec<f64> = draws.iter().map(|d| d.shift_y).collect();
            within_3se(&zeta, 1.0, sigma).map_err(ctx)?;
            within_3se(&sx, 0.0, k).map_err(ctx)?;
            within_3se(&sy, 0.0, k).map_err(ctx)?;

            // The regions themselves: shifts are N(0, k L') exactly; the edge
            // is checked where clamping at MIN_SCALE has negligible mass.
            let mut rng = substream(noise.seed, Substream::Regions);
            let regions: Vec<RadioRegion> = (0..n).map(|_| gt_to_region(&ann, &noise, "r", &mut rng)).collect();
            let xi_x: Vec<f64> = regions.iter().map(|r| (r.center_x - cx) / r.edge).collect();
            let xi_y: Vec<f64> = regions.iter().map(|r| (r.center_y - cy) / r.edge).collect();
            within_3se(&xi_x, 0.0, k).map_err(ctx)?;
            within_3se(&xi_y, 0.0, k).map_err(ctx)?;
            if sigma <= 0.3 {
                let scale: Vec<f64> = regions.iter().map(|r| r.edge / side).collect();
                within_3se(&scale, 1.0, sigma).map_err(ctx)?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} (sigma, k) settings at n = {n}, all moments within 3 SE"))
}

// ------------------------------------------------------------------ 3

/// Sort by score, then repeatedly take the best survivor and delete
/// everything overlapping it.
fn oracle_nms(dets: &[Detection], t: f64) -> Vec<Detection> {
    let mut pool: Vec<(usize, &Detection)> = dets.iter().enumerate().collect();
    pool.sort_by(|a, b| b.1.score.partial_cmp(&a.1.score).unwrap().then(a.0.cmp(&b.0)));
    let mut out = Vec::new();
    while !pool.is_empty() {
        let (_, best) = pool.remove(0);
        pool.retain(|(_, d)| d.bbox.iou(&best.bbox) < t);
        out.push(best.clone());
    }
    out
}

fn random_scene(rng: &mut ChaCha8Rng) -> (Vec<Detection>, Vec<RadioRegion>) {
    let regions: Vec<RadioRegion> = (0..rng.random_range(1..=4))
        .map(|i| {
            RadioRegion::new(
                format!("r{i:04}"),
                rng.random_range(20.0..180.0),
                rng.random_range(20.0..180.0),
                rng.random_range(15.0..60.0),
            )
        })
        .collect();
    let dets = (0..10)
        .map(|_| {
            let w = rng.random_range(10.0..60.0);
            let h = rng.random_range(10.0..80.0);
            // quantized scores so ties occur
            let score = (rng.random_range(1..=20) as f64) / 20.0;
            let d = Detection::new("s", Rect::new(rng.random_range(0.0..160.0), rng.random_range(0.0..160.0), w, h), score);
            let r = rng.random_range(0..regions.len());
            d.with_region(&regions[r].identifier)
        })
        .collect();
    (dets, regions)
}

fn nms_oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let t = 0.5;
    let scenes = 1000;
    for s in 0..scenes {
        let (dets, regions) = random_scene(&mut rng);
        let plain = NmsConfig { region_constraint: false, ..Default::default() };
        let got = constrained_nms("s", &dets, &regions, &plain).into_detections();
        ensure(got == oracle_nms(&dets, t), || format!("scene {s}: unconstrained output differs from oracle"))?;

        for (mode, fallback) in [(DetectorKind::TwoStage, true), (DetectorKind::TwoStage, false), (DetectorKind::OneStage, false)] {
            let cfg = NmsConfig { mode, enable_fallback_loop: fallback, ..Default::default() };
            let associated = associate_regions(&dets, &regions, mode).map_err(|e| e.to_string())?;
            let out = constrained_nms("s", &associated, &regions, &cfg);
            let all: Vec<&Detection> = out.kept.iter().chain(&out.fallback).collect();
            let mut used = HashSet::new();
            for d in &all {
                let rid = d.region_id.as_ref().ok_or_else(|| format!("scene {s}: output box without region"))?;
                ensure(used.insert(rid.clone()), || format!("scene {s} {mode:?}: region {rid} used twice"))?;
            }
            for (i, a) in out.kept.iter().enumerate() {
                for b in &out.kept[i + 1..] {
                    ensure(a.bbox.iou(&b.bbox) < t, || format!("scene {s} {mode:?}: kept boxes overlap"))?;
                }
            }
            ensure(all.len() <= regions.len(), || format!("scene {s} {mode:?}: more boxes than regions"))?;
            if mode == DetectorKind::TwoStage && fallback {
                ensure(all.len() == regions.len(), || format!("scene {s}: fallback left a region empty"))?;
            }
        }
    }
    Ok(format!("{scenes} scenes: unconstrained == oracle; constraint invariants hold in 3 modes"))
}

// ------------------------------------------------------------------ 4

fn det(b: Rect, s: f64) -> Detection {
    Detection::new("_", b, s)
}

fn im(id: &str, dets: Vec<Detection>, gts: Vec<Rect>) -> ImageEval {
    ImageEval {
        image_id: id.into(),
        detections: dets.into_iter().map(|d| Detection { image_id: id.into(), ..d }).collect(),
        ground_truth: gts,
    }
}

/// 101-point AP with precision `p[i]` on recall step i, summed in threshold
/// order exactly as the definition reads.
fn ap_from_steps(steps: &[(usize, f64)]) -> f64 {
    let mut sum = 0.0;
    for &(count, p) in steps {
        for _ in 0..count {
            sum += p;
        }
    }
    sum / 101.0
}

fn mean10(v: f64) -> f64 {
    [v; 10].iter().sum::<f64>() / 10.0
}

struct Expect {
    name: &'static str,
    images: Vec<ImageEval>,
    ap: Option<f64>,
    ap50: Option<f64>,
    ap75: Option<f64>,
    ap_s: Option<f64>,
    ap_m: Option<f64>,
    ap_l: Option<f64>,
    lamr: f64,
    curve: Option<Vec<(f64, f64)>>,
    fp_fn: f64,
    tdr: f64,
}

fn metric_scenes() -> Vec<Expect> {
    let g = Rect::new(0.0, 0.0, 40.0, 100.0); // area 4000: medium
    let far = Rect::new(300.0, 300.0, 40.0, 100.0);
    let far2 = Rect::new(500.0, 100.0, 40.0, 100.0);
    let g2 = Rect::new(100.0, 0.0, 40.0, 100.0);
    let g3 = Rect::new(200.0, 0.0, 40.0, 100.0);
    let g4 = Rect::new(300.0, 0.0, 40.0, 100.0);
    let sq = Rect::new(0.0, 0.0, 10.0, 10.0);
    let base = |name| Expect {
        name,
        images: vec![],
        ap: None,
        ap50: None,
        ap75: None,
        ap_s: None,
        ap_m: None,
        ap_l: None,
        lamr: 0.0,
        curve: None,
        fp_fn: 0.0,
        tdr: 1.0,
    };
    vec![
        Expect {
            images: vec![im("a", vec![det(g, 0.9)], vec![g])],
            ap: Some(1.0),
            ap50: Some(1.0),
            ap75: Some(1.0),
            ap_m: Some(1.0),
            curve: Some(vec![(0.0, 1.0), (0.0, 0.0)]),
            ..base("perfect single detection")
        },
        Expect {
            // IoU = 60 / 100 = 0.6: a hit at 0.50, 0.55, 0.60 only
            images: vec![im("a", vec![det(Rect::new(0.0, 0.0, 6.0, 10.0), 0.9)], vec![sq])],
            ap: Some(0.3),
            ap50: Some(1.0),
            ap75: Some(0.0),
            ap_s: Some(0.3),
            ..base("IoU 0.6 detection")
        },
        Expect {
            // one person, one hit and two false alarms
            images: vec![im("a", vec![det(g, 0.9), det(far, 0.8), det(far2, 0.7)], vec![g])],
            ap: Some(1.0),
            ap50: Some(1.0),
            ap75: Some(1.0),
            ap_m: Some(1.0),
            fp_fn: 2.0,
            tdr: 1.0 / 3.0,
            ..base("1 TP + 2 FP")
        },
        Expect {
            // two people, one found
            images: vec![im("a", vec![det(g, 0.9)], vec![g, g2])],
            ap: Some(mean10(ap_from_steps(&[(51, 1.0)]))),
            ap50: Some(ap_from_steps(&[(51, 1.0)])),
            ap75: Some(ap_from_steps(&[(51, 1.0)])),
            ap_m: Some(mean10(ap_from_steps(&[(51, 1.0)]))),
            lamr: 0.5,
            fp_fn: 1.0,
            tdr: 0.5,
            ..base("one miss")
        },
        Expect {
            images: vec![im("a", vec![], vec![])],
            ..base("empty frame")
        },
        Expect {
            images: vec![im("a", vec![det(g, 0.9)], vec![])],
            fp_fn: 1.0,
            tdr: 0.0,
            ..base("false alarm without people")
        },
        Expect {
            // ranked TP, FP, TP over two people: precision 1, 1/2, 2/3
            images: vec![im("a", vec![det(g, 0.9), det(far, 0.8), det(g2, 0.7)], vec![g, g2])],
            ap: Some(mean10(ap_from_steps(&[(51, 1.0), (50, 2.0 / 3.0)]))),
            ap50: Some(ap_from_steps(&[(51, 1.0), (50, 2.0 / 3.0)])),
            ap75: Some(ap_from_steps(&[(51, 1.0), (50, 2.0 / 3.0)])),
            ap_m: Some(mean10(ap_from_steps(&[(51, 1.0), (50, 2.0 / 3.0)]))),
            curve: Some(vec![(0.0, 1.0), (0.0, 0.5), (1.0, 0.5), (1.0, 0.0)]),
            fp_fn: 1.0,
            tdr: 2.0 / 3.0,
            ..base("TP FP TP ranking")
        },
        Expect {
            // the duplicate is a false positive
            images: vec![im("a", vec![det(g, 0.9), det(g, 0.8)], vec![g])],
            ap: Some(1.0),
            ap50: Some(1.0),
            ap75: Some(1.0),
            ap_m: Some(1.0),
            fp_fn: 1.0,
            tdr: 0.5,
            ..base("duplicate on one person")
        },
        Expect {
            // a false alarm outranks the hit: precision 1/2 at every recall
            images: vec![im("a", vec![det(far, 0.9), det(g, 0.8)], vec![g])],
            ap: Some(0.5),
            ap50: Some(0.5),
            ap75: Some(0.5),
            ap_m: Some(0.5),
            curve: Some(vec![(0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]),
            fp_fn: 1.0,
            tdr: 0.5,
            ..base("FP ranked above TP")
        },
        Expect {
            // a hit in one frame, a false alarm and a miss in the other
            images: vec![im("a", vec![det(g, 0.9)], vec![g]), im("b", vec![det(far, 0.8)], vec![g])],
            ap: Some(mean10(ap_from_steps(&[(51, 1.0)]))),
            ap50: Some(ap_from_steps(&[(51, 1.0)])),
            ap75: Some(ap_from_steps(&[(51, 1.0)])),
            ap_m: Some(mean10(ap_from_steps(&[(51, 1.0)]))),
            lamr: 0.5,
            curve: Some(vec![(0.0, 1.0), (0.0, 0.5), (0.5, 0.5)]),
            fp_fn: 1.0,
            tdr: 1.0 / 3.0,
            ..base("two frames, curve plateau")
        },
        Expect {
            // four frames: TP .9, FP .8, TP .7, FP .6; misses in two frames.
            // MR 0.75 below FPPI 0.25 (six reference points), 0.5 above.
            images: vec![
                im("a", vec![det(g, 0.9)], vec![g]),
                im("b", vec![det(far, 0.8)], vec![g2]),
                im("c", vec![det(g3, 0.7)], vec![g3]),
                im("d", vec![det(far, 0.6)], vec![g4]),
            ],
            ap: Some(mean10(ap_from_steps(&[(26, 1.0), (25, 2.0 / 3.0)]))),
            ap50: Some(ap_from_steps(&[(26, 1.0), (25, 2.0 / 3.0)])),
            ap75: Some(ap_from_steps(&[(26, 1.0), (25, 2.0 / 3.0)])),
            ap_m: Some(mean10(ap_from_steps(&[(26, 1.0), (25, 2.0 / 3.0)]))),
            lamr: ([0.75; 6].iter().chain(&[0.5; 3]).map(|m: &f64| m.ln()).sum::<f64>() / 9.0).exp(),
            curve: Some(vec![(0.0, 1.0), (0.0, 0.75), (0.25, 0.75), (0.25, 0.5), (0.5, 0.5)]),
            fp_fn: 1.0,
            tdr: 2.0 / 6.0,
            ..base("four frames, two-level curve")
        },
        Expect {
            // small person found, large person missed
            images: vec![im("a", vec![det(sq, 0.9)], vec![sq, Rect::new(200.0, 0.0, 100.0, 100.0)])],
            ap: Some(mean10(ap_from_steps(&[(51, 1.0)]))),
            ap50: Some(ap_from_steps(&[(51, 1.0)])),
            ap75: Some(ap_from_steps(&[(51, 1.0)])),
            ap_s: Some(1.0),
            ap_l: Some(0.0),
            lamr: 0.5,
            fp_fn: 1.0,
            tdr: 0.5,
            ..base("area buckets")
        },
    ]
}

fn metric_correctness() -> Outcome {
    let scenes = metric_scenes();
    let cfg = EvalConfig::default();
    for e in &scenes {
        let r = evaluate(&e.images, &cfg);
        let c = r.coco;
        let got = (c.ap, c.ap50, c.ap75, c.ap_s, c.ap_m, c.ap_l);
        let want = (e.ap, e.ap50, e.ap75, e.ap_s, e.ap_m, e.ap_l);
        ensure(got == want, || format!("{}: coco {got:?} != {want:?}", e.name))?;
        ensure(r.log_avg_miss_rate == e.lamr, || format!("{}: LAMR {} != {}", e.name, r.log_avg_miss_rate, e.lamr))?;
        if let Some(curve) = &e.curve {
            let want: Vec<CurvePoint> = curve.iter().map(|&(fppi, miss_rate)| CurvePoint { fppi, miss_rate }).collect();
            ensure(r.mr_fppi_curve == want, || format!("{}: curve {:?}", e.name, r.mr_fppi_curve))?;
        }
        ensure(r.fp_fn_per_image == e.fp_fn, || format!("{}: fp_fn {} != {}", e.name, r.fp_fn_per_image, e.fp_fn))?;
        ensure(r.true_detection_ratio == e.tdr, || format!("{}: TDR {} != {}", e.name, r.true_detection_ratio, e.tdr))?;
    }
    Ok(format!("{} constructed scenes match exactly", scenes.len()))
}

// ------------------------------------------------------------------ 5

fn directional_trend() -> Outcome {
    let start = Instant::now();
    let cfg = RunConfig::default();
    let inputs = load_inputs(&cfg).map_err(|e| e.to_string())?;
    ensure(inputs.dataset.image_ids.len() == 500, || "expected 500 images".into())?;
    let report = |c: &RunConfig, i| run_with(c, i).map(|o| o.report).map_err(|e| e.to_string());
    let base = report(&cfg, &inputs)?;
    let m1 = report(&RunConfig { method: Method::Method1Cnms, ..cfg.clone() }, &inputs)?;

    let exact_cfg = RunConfig { method: Method::Method2, noise: NoiseParams::noiseless(), ..cfg.clone() };
    let exact_inputs = load_inputs(&exact_cfg).map_err(|e| e.to_string())?;
    let m2 = report(&exact_cfg, &exact_inputs)?;
    let secs = start.elapsed().as_secs_f64();

    let reduction = 1.0 - m1.fp_fn_per_image / base.fp_fn_per_image;
    let summary = format!(
        "FP+FN/img {:.3} -> {:.3} ({:.0}% lower), TDR {:.3} -> {:.3}; method2 noiseless TDR {:.3}; {secs:.1} s",
        base.fp_fn_per_image,
        m1.fp_fn_per_image,
        100.0 * reduction,
        base.true_detection_ratio,
        m1.true_detection_ratio,
        m2.true_detection_ratio
    );
    ensure(reduction >= 0.2, || summary.clone())?;
    ensure(m1.true_detection_ratio > base.true_detection_ratio, || summary.clone())?;
    ensure(m2.true_detection_ratio >= 0.95, || summary.clone())?;
    ensure(secs < 60.0, || summary.clone())?;
    Ok(summary)
}

// ------------------------------------------------------------------ 6

fn error_sensitivity() -> Outcome {
    let cfg = RunConfig { method: Method::Method2Cnms, ..Default::default() };
    let inputs = load_inputs(&cfg).map_err(|e| e.to_string())?;
    let values = [0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
    let ap_at = |sigma: f64, k: f64| -> Result<f64, String> {
        let c = RunConfig { noise: NoiseParams { sigma, k1: k, k2: k, seed: cfg.seed }, ..cfg.clone() };
        let regions = build_simulative_set(&inputs.dataset.annotations, &c.noise_params());
        let out = run_with(&c, &radiodet::pipeline::Inputs { regions, ..inputs.clone() }).map_err(|e| e.to_string())?;
        out.report.coco.ap.ok_or_else(|| "no AP".into())
    };
    let k_curve: Vec<f64> = values.iter().map(|&k| ap_at(0.2, k)).collect::<Result<_, _>>()?;
    let s_curve: Vec<f64> = values.iter().map(|&s| ap_at(s, 0.1)).collect::<Result<_, _>>()?;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
    let summary = format!("AP over k: {}; over sigma: {}", fmt(&k_curve), fmt(&s_curve));
    ensure(k_curve.windows(2).all(|w| w[1] <= w[0]), || format!("not monotone: {summary}"))?;
    let k_drop = k_curve[0] - k_curve[values.len() - 1];
    let s_drop = s_curve[0] - s_curve[values.len() - 1];
    ensure(k_drop > s_drop, || format!("k drop {k_drop:.3} <= sigma drop {s_drop:.3}: {summary}"))?;
    Ok(format!("{summary}; drops {k_drop:.3} (k) > {s_drop:.3} (sigma)"))
}

// ------------------------------------------------------------------ 7

fn identity_invariants() -> Outcome {
    let cfg = RunConfig { scenes: radiodet::synth_detector::SceneParams { num_images: 200, ..Default::default() }, ..Default::default() };
    let inputs = load_inputs(&cfg).map_err(|e| e.to_string())?;
    let base = run_with(&cfg, &inputs).map_err(|e| e.to_string())?.detections;
    for c in [
        RunConfig { method: Method::Method1, lambda: 0.0, ..cfg.clone() },
        RunConfig {
            method: Method::Method1Cnms,
            lambda: 0.0,
            nms: NmsConfig { region_constraint: false, ..Default::default() },
            ..cfg.clone()
        },
    ] {
        let out = run_with(&c, &inputs).map_err(|e| e.to_string())?.detections;
        ensure(out == base, || format!("{} with lambda 0 differs from baseline", c.method))?;
    }

    let squares = build_simulative_set(&inputs.dataset.annotations, &NoiseParams::noiseless());
    let mut by_image: BTreeMap<&str, Vec<&Annotation>> = BTreeMap::new();
    for a in &inputs.dataset.annotations {
        by_image.entry(&a.image_id).or_default().push(a);
    }
    for (id, anns) in by_image {
        for (a, r) in anns.iter().zip(&squares[id]) {
            let (cx, cy) = a.bbox.center();
            ensure((r.center_x, r.center_y, r.edge) == (cx, cy, a.bbox.w.min(a.bbox.h)), || {
                format!("image {id}: noiseless region {r:?} is not the GT square")
            })?;
        }
    }

    let camera = CameraModel::default();
    let params = ImagingParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let half_h = camera.fov_h / 2.0 * 0.99;
    let half_v = camera.fov_v / 2.0 * 0.99;
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let est = RadioEstimate {
            aoa_h: 90.0 + rng.random_range(-half_h..half_h),
            aoa_v: 90.0 + rng.random_range(-half_v..half_v),
            tof: rng.random_range(1.0..30.0) / SPEED_OF_LIGHT,
            magnitude: 1.0,
            identifier: format!("est-{i}"),
        };
        let region = project(&est, &camera, &params).map_err(|e| e.to_string())?.ok_or("estimate left the view")?;
        let back = back_project(&region, &camera, &params).map_err(|e| e.to_string())?;
        worst = worst.max((back.aoa_h - est.aoa_h).abs()).max((back.aoa_v - est.aoa_v).abs());
    }
    ensure(worst < 1e-9, || format!("projection round trip error {worst:e} deg"))?;
    Ok(format!("lambda 0 == baseline, noiseless squares exact, round trip max error {worst:.1e} deg"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("matched-filter recovery", matched_filter_recovery),
        ("noise calibration", noise_calibration),
        ("NMS oracle equivalence", nms_oracle_equivalence),
        ("metric correctness", metric_correctness),
        ("directional trend", directional_trend),
        ("error-sensitivity shape", error_sensitivity),
        ("identity invariants", identity_invariants),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
