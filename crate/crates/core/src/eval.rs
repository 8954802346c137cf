//! Detection metrics: COCO average precision, Caltech miss rate against false
//! positives per image, and order-free visual metrics (FP+FN per image and
//! the true-detection ratio `TP / (TP + FP + FN)`).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::fusion::Detection;
use crate::geometry::Rect;
use crate::sim_regions::Annotation;

/// IoU thresholds of the COCO AP average.
pub const COCO_IOU_THRESHOLDS: [f64; 10] = [0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95];

/// Detections per image considered by COCO AP.
pub const COCO_MAX_DETECTIONS: usize = 100;

/// COCO area buckets in square pixels.
pub const SMALL_AREA: f64 = 32.0 * 32.0;
pub const MEDIUM_AREA: f64 = 96.0 * 96.0;
const AREA_ALL: (f64, f64) = (0.0, 1e10);
const AREA_SMALL: (f64, f64) = (0.0, SMALL_AREA);
const AREA_MEDIUM: (f64, f64) = (SMALL_AREA, MEDIUM_AREA);
const AREA_LARGE: (f64, f64) = (MEDIUM_AREA, 1e10);

/// One image's detections and ground truth.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ImageEval {
    pub image_id: String,
    pub detections: Vec<Detection>,
    pub ground_truth: Vec<Rect>,
}

/// Groups detections and person annotations by image.
///
/// Every id in `image_ids` appears in the output (empty frames count towards
/// per-image rates), as does any image referenced by an annotation or
/// detection. Output is sorted by image id.
pub fn group_by_image(image_ids: &[String], detections: &[Detection], annotations: &[Annotation]) -> Vec<ImageEval> {
    let mut map: BTreeMap<&str, ImageEval> = BTreeMap::new();
    let entry = |id: &str| -> ImageEval {
        ImageEval {
            image_id: id.to_string(),
            ..Default::default()
        }
    };
    for id in image_ids {
        map.entry(id.as_str()).or_insert_with(|| entry(id));
    }
    for a in annotations.iter().filter(|a| a.is_person()) {
        map.entry(a.image_id.as_str())
            .or_insert_with(|| entry(&a.image_id))
            .ground_truth
            .push(a.bbox);
    }
    for d in detections {
        map.entry(d.image_id.as_str())
            .or_insert_with(|| entry(&d.image_id))
            .detections
            .push(d.clone());
    }
    map.into_values().collect()
}

/// Indices by descending score, stable.
fn by_score(detections: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| detections[b].score.total_cmp(&detections[a].score));
    order
}

/// Outcome of matching one image at one IoU threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// Order in which detections were processed (indices into the input).
    pub order: Vec<usize>,
    /// Ground truth matched by each input detection.
    pub matched_gt: Vec<Option<usize>>,
    pub num_gt: usize,
}

impl MatchResult {
    pub fn is_tp(&self, detection: usize) -> bool {
        self.matched_gt[detection].is_some()
    }

    pub fn true_positives(&self) -> usize {
        self.matched_gt.iter().filter(|m| m.is_some()).count()
    }

    pub fn false_positives(&self) -> usize {
        self.matched_gt.len() - self.true_positives()
    }

    pub fn false_negatives(&self) -> usize {
        self.num_gt - self.true_positives()
    }
}

/// Greedy one-to-one matching.
///
/// Detections are visited by descending score, or in input order when
/// `sorted_by_score` is false. Each takes the still unmatched ground truth
/// with the highest IoU, provided it is at least `iou_threshold`; on equal
/// IoU the later ground truth wins, as in pycocotools.
pub fn match_detections(
    detections: &[Detection],
    ground_truth: &[Rect],
    iou_threshold: f64,
    sorted_by_score: bool,
) -> MatchResult {
    let order: Vec<usize> = if sorted_by_score {
        by_score(detections)
    } else {
        (0..detections.len()).collect()
    };
    let mut taken = vec![false; ground_truth.len()];
    let mut matched_gt = vec![None; detections.len()];
    for &d in &order {
        let mut best = iou_threshold.min(1.0 - 1e-10);
        let mut choice = None;
        for (g, gt) in ground_truth.iter().enumerate() {
            if taken[g] {
                continue;
            }
            let v = detections[d].bbox.iou(gt);
            if v < best {
                continue;
            }
            best = v;
            choice = Some(g);
        }
        if let Some(g) = choice {
            taken[g] = true;
            matched_gt[d] = Some(g);
        }
    }
    MatchResult {
        order,
        matched_gt,
        num_gt: ground_truth.len(),
    }
}

/// A ranked detection outcome pooled across images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedMatch {
    pub score: f64,
    pub true_positive: bool,
}

/// 101-point interpolated AP (COCO convention).
///
/// `matches` are re-sorted stably by descending score. Returns `None` when
/// there is no ground truth, and `Some(0.0)` when there are no detections.
pub fn average_precision(matches: &[RankedMatch], num_gt: usize) -> Option<f64> {
    if num_gt == 0 {
        return None;
    }
    let mut ranked = matches.to_vec();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));

    let mut tp = 0.0;
    let mut fp = 0.0;
    let mut recall = Vec::with_capacity(ranked.len());
    let mut precision = Vec::with_capacity(ranked.len());
    for m in &ranked {
        if m.true_positive {
            tp += 1.0;
        } else {
            fp += 1.0;
        }
        recall.push(tp / num_gt as f64);
        precision.push(tp / (tp + fp));
    }
    for i in (1..precision.len()).rev() {
        if precision[i] > precision[i - 1] {
            precision[i - 1] = precision[i];
        }
    }

    let mut sum = 0.0;
    for r in 0..=100 {
        let threshold = r as f64 * 0.01;
        let idx = recall.partition_point(|&x| x < threshold);
        if idx < precision.len() {
            sum += precision[idx];
        }
    }
    Some(sum / 101.0)
}

/// The COCO AP family for the person class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct CocoMetrics {
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    pub ap_s: Option<f64>,
    pub ap_m: Option<f64>,
    pub ap_l: Option<f64>,
}

struct EvaluatedDetection {
    score: f64,
    matched: bool,
    ignored: bool,
}

/// COCO per-image evaluation for one area range and IoU threshold.
fn evaluate_image(image: &ImageEval, area: (f64, f64), iou_threshold: f64) -> (Vec<EvaluatedDetection>, usize) {
    let outside = |a: f64| a < area.0 || a > area.1;
    // non-ignored ground truth first
    let mut gts: Vec<(Rect, bool)> = image.ground_truth.iter().map(|g| (*g, outside(g.area()))).collect();
    gts.sort_by_key(|&(_, ignored)| ignored);
    let num_valid = gts.iter().filter(|(_, ig)| !ig).count();

    let mut order = by_score(&image.detections);
    order.truncate(COCO_MAX_DETECTIONS);

    let mut taken = vec![false; gts.len()];
    let mut out = Vec::with_capacity(order.len());
    for &d in &order {
        let det = &image.detections[d];
        let mut best = iou_threshold.min(1.0 - 1e-10);
        let mut choice: Option<usize> = None;
        for (g, (gt, ignored)) in gts.iter().enumerate() {
            if taken[g] {
                continue;
            }
            if let Some(m) = choice {
                if !gts[m].1 && *ignored {
                    break;
                }
            }
            let v = det.bbox.iou(gt);
            if v < best {
                continue;
            }
            best = v;
            choice = Some(g);
        }
        let (matched, ignored) = match choice {
            Some(g) => {
                taken[g] = true;
                (true, gts[g].1)
            }
            None => (false, outside(det.bbox.area())),
        };
        out.push(EvaluatedDetection {
            score: det.score,
            matched,
            ignored,
        });
    }
    (out, num_valid)
}

fn coco_ap(images: &[ImageEval], area: (f64, f64), iou_threshold: f64) -> Option<f64> {
    let mut pooled = Vec::new();
    let mut num_gt = 0;
    for image in images {
        let (dets, n) = evaluate_image(image, area, iou_threshold);
        num_gt += n;
        pooled.extend(dets.into_iter().filter(|d| !d.ignored).map(|d| RankedMatch {
            score: d.score,
            true_positive: d.matched,
        }));
    }
    average_precision(&pooled, num_gt)
}

fn mean_over_thresholds(images: &[ImageEval], area: (f64, f64)) -> Option<f64> {
    let aps: Option<Vec<f64>> = COCO_IOU_THRESHOLDS.iter().map(|&t| coco_ap(images, area, t)).collect();
    aps.map(|v| v.iter().sum::<f64>() / v.len() as f64)
}

/// AP averaged over IoU 0.50:0.05:0.95, AP at 0.50 and 0.75, and AP per
/// ground-truth area bucket. Buckets with no ground truth report `None`.
pub fn coco_map(images: &[ImageEval]) -> CocoMetrics {
    CocoMetrics {
        ap: mean_over_thresholds(images, AREA_ALL),
        ap50: coco_ap(images, AREA_ALL, 0.5),
        ap75: coco_ap(images, AREA_ALL, 0.75),
        ap_s: mean_over_thresholds(images, AREA_SMALL),
        ap_m: mean_over_thresholds(images, AREA_MEDIUM),
        ap_l: mean_over_thresholds(images, AREA_LARGE),
    }
}

/// One point of the miss-rate curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub fppi: f64,
    pub miss_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MissRateCurve {
    /// Ascending in FPPI, starting at `(0, 1)`.
    pub curve: Vec<CurvePoint>,
    pub log_avg_miss_rate: f64,
}

/// FPPI values at which the log-average miss rate is sampled:
/// nine points evenly log-spaced over `[1e-2, 1]`.
pub fn fppi_reference_points() -> [f64; 9] {
    std::array::from_fn(|i| 10f64.powf(-2.0 + 2.0 * i as f64 / 8.0))
}

/// Miss rate against false positives per image, swept over every distinct
/// score threshold.
///
/// The log-average miss rate is the geometric mean of the miss rate at the
/// nine reference FPPI values, each read as the lowest miss rate reached at
/// or below that FPPI (the curve end when the sweep stops earlier). Any zero
/// sample makes the mean zero. Without ground truth every miss rate is 0.
pub fn mr_fppi(images: &[ImageEval], iou_threshold: f64) -> MissRateCurve {
    let num_images = images.len().max(1) as f64;
    let mut pooled = Vec::new();
    let mut num_gt = 0usize;
    for image in images {
        let m = match_detections(&image.detections, &image.ground_truth, iou_threshold, true);
        num_gt += m.num_gt;
        pooled.extend(m.order.iter().map(|&d| RankedMatch {
            score: image.detections[d].score,
            true_positive: m.is_tp(d),
        }));
    }
    pooled.sort_by(|a, b| b.score.total_cmp(&a.score));

    let miss = |tp: usize| if num_gt == 0 { 0.0 } else { 1.0 - tp as f64 / num_gt as f64 };
    let mut curve = vec![CurvePoint {
        fppi: 0.0,
        miss_rate: miss(0),
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < pooled.len() {
        let score = pooled[i].score;
        while i < pooled.len() && pooled[i].score == score {
            if pooled[i].true_positive {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        curve.push(CurvePoint {
            fppi: fp as f64 / num_images,
            miss_rate: miss(tp),
        });
    }

    let samples = fppi_reference_points().map(|r| {
        curve
            .iter()
            .take_while(|p| p.fppi <= r)
            .map(|p| p.miss_rate)
            .fold(f64::INFINITY, f64::min)
    });
    let log_avg_miss_rate = if samples.iter().any(|&s| s <= 0.0) {
        0.0
    } else {
        (samples.iter().map(|s| s.ln()).sum::<f64>() / samples.len() as f64).exp()
    };
    MissRateCurve {
        curve,
        log_avg_miss_rate,
    }
}

/// Score-order-free counts over a whole set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct VisualMetrics {
    pub fp_fn_per_image: f64,
    pub true_detection_ratio: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// Matches detections in file order (no score sorting) and reports
/// `(FP + FN) / #images` and `TP / (TP + FP + FN)`; the ratio is 1 when all
/// three counts are zero.
pub fn visual_metrics(images: &[ImageEval], iou_threshold: f64) -> VisualMetrics {
    let (mut tp, mut fp, mut fneg) = (0, 0, 0);
    for image in images {
        let m = match_detections(&image.detections, &image.ground_truth, iou_threshold, false);
        tp += m.true_positives();
        fp += m.false_positives();
        fneg += m.false_negatives();
    }
    let total = tp + fp + fneg;
    VisualMetrics {
        fp_fn_per_image: if images.is_empty() {
            0.0
        } else {
            (fp + fneg) as f64 / images.len() as f64
        },
        true_detection_ratio: if total == 0 { 1.0 } else { tp as f64 / total as f64 },
        true_positives: tp,
        false_positives: fp,
        false_negatives: fneg,
    }
}

/// Keeps, per image, only the highest-scoring detections up to the number of
/// ground-truth boxes.
pub fn truncate_to_gt_count(images: &[ImageEval]) -> Vec<ImageEval> {
    images
        .iter()
        .map(|im| {
            let order = by_score(&im.detections);
            ImageEval {
                detections: order
                    .into_iter()
                    .take(im.ground_truth.len())
                    .map(|i| im.detections[i].clone())
                    .collect(),
                ..im.clone()
            }
        })
        .collect()
}

/// Drops detections scoring below `threshold`.
pub fn filter_by_score(images: &[ImageEval], threshold: f64) -> Vec<ImageEval> {
    images
        .iter()
        .map(|im| ImageEval {
            detections: im.detections.iter().filter(|d| d.score >= threshold).cloned().collect(),
            ..im.clone()
        })
        .collect()
}

/// Everything a run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MetricsReport {
    #[serde(flatten)]
    pub coco: CocoMetrics,
    pub log_avg_miss_rate: f64,
    pub mr_fppi_curve: Vec<CurvePoint>,
    pub fp_fn_per_image: f64,
    pub true_detection_ratio: f64,
    pub num_images: usize,
    pub num_ground_truth: usize,
    pub num_detections: usize,
    pub runtime_s: f64,
}

/// Thresholds used when assembling a [`MetricsReport`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalConfig {
    /// IoU for the miss-rate curve and the visual metrics.
    pub iou_threshold: f64,
    /// Detections below this score are left out of the visual metrics.
    pub visual_score_threshold: f64,
    /// Truncate detections per image to the ground-truth count before AP.
    pub count_constraint: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            visual_score_threshold: 0.3,
            count_constraint: false,
        }
    }
}

pub fn evaluate(images: &[ImageEval], cfg: &EvalConfig) -> MetricsReport {
    let ranked: Vec<ImageEval>;
    let for_ap = if cfg.count_constraint {
        ranked = truncate_to_gt_count(images);
        &ranked
    } else {
        images
    };
    let mr = mr_fppi(images, cfg.iou_threshold);
    let visual = visual_metrics(&filter_by_score(images, cfg.visual_score_threshold), cfg.iou_threshold);
    MetricsReport {
        coco: coco_map(for_ap),
        log_avg_miss_rate: mr.log_avg_miss_rate,
        mr_fppi_curve: mr.curve,
        fp_fn_per_image: visual.fp_fn_per_image,
        true_detection_ratio: visual.true_detection_ratio,
        num_images: images.len(),
        num_ground_truth: images.iter().map(|i| i.ground_truth.len()).sum(),
        num_detections: images.iter().map(|i| i.detections.len()).sum(),
        runtime_s: 0.0,
    }
}
