//! Non-maximum suppression, plain and constrained by radio regions.

use std::cmp::Ordering;
use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fusion::{Detection, DetectorKind};
use crate::geometry::Rect;
use crate::imaging::RadioRegion;

pub use crate::geometry::iou;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NmsConfig {
    /// A box overlapping a kept box at or above this IoU is suppressed.
    pub iou_threshold: f64,
    /// `two_stage` enables the fallback loop; `one_stage` never runs it.
    pub mode: DetectorKind,
    pub enable_fallback_loop: bool,
    /// Score of a fallback box made from a bare region square.
    pub fallback_floor_score: f64,
    /// Drop detections that belong to no region.
    pub strict: bool,
    /// When false every region check is skipped and the result equals
    /// [`standard_nms`].
    pub region_constraint: bool,
}

impl Default for NmsConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            mode: DetectorKind::TwoStage,
            enable_fallback_loop: true,
            fallback_floor_score: 0.01,
            strict: true,
            region_constraint: true,
        }
    }
}

/// Indices by descending score; equal scores keep input order.
fn score_order(detections: &[Detection]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..detections.len()).collect();
    order.sort_by(|&a, &b| {
        detections[b]
            .score
            .partial_cmp(&detections[a].score)
            .unwrap_or(Ordering::Equal)
    });
    order
}

/// Greedy NMS: a box survives iff its IoU with every already kept box is
/// below `threshold`. Output is in descending score order.
pub fn standard_nms(detections: &[Detection], threshold: f64) -> Vec<Detection> {
    let mut kept: Vec<&Detection> = Vec::new();
    for i in score_order(detections) {
        let d = &detections[i];
        if kept.iter().all(|k| iou(&k.bbox, &d.bbox) < threshold) {
            kept.push(d);
        }
    }
    kept.into_iter().cloned().collect()
}

/// Fills in `region_id` for each detection.
///
/// `TwoStage` detections must already carry their proposal's region. For
/// `OneStage` the region with the highest IoU wins (ties to the smaller id);
/// detections overlapping no region get `None`.
pub fn associate_regions(
    detections: &[Detection],
    regions: &[RadioRegion],
    mode: DetectorKind,
) -> Result<Vec<Detection>> {
    match mode {
        DetectorKind::TwoStage => {
            if let Some(d) = detections.iter().find(|d| d.region_id.is_none()) {
                return Err(invalid(format!(
                    "two-stage detection in image {} has no region id",
                    d.image_id
                )));
            }
            Ok(detections.to_vec())
        }
        DetectorKind::OneStage => Ok(detections
            .iter()
            .map(|d| {
                let mut best: Option<(&RadioRegion, f64)> = None;
                for r in regions {
                    let v = iou(&d.bbox, &r.rect());
                    if v <= 0.0 {
                        continue;
                    }
                    best = match best {
                        Some((b, bv)) if bv > v || (bv == v && b.identifier <= r.identifier) => Some((b, bv)),
                        _ => Some((r, v)),
                    };
                }
                Detection {
                    region_id: best.map(|(r, _)| r.identifier.clone()),
                    ..d.clone()
                }
            })
            .collect()),
    }
}

/// Output of [`constrained_nms`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConstrainedNms {
    /// Survivors of the first loop, in descending score order.
    pub kept: Vec<Detection>,
    /// One box per region the first loop left empty.
    pub fallback: Vec<Detection>,
}

impl ConstrainedNms {
    pub fn len(&self) -> usize {
        self.kept.len() + self.fallback.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn into_detections(self) -> Vec<Detection> {
        let mut out = self.kept;
        out.extend(self.fallback);
        out
    }
}

/// NMS in which each radio region yields at most one detection.
///
/// The first loop walks detections by descending score and skips a box when
/// it overlaps a kept box at or above the threshold, when its region already
/// produced a box, or (strict mode) when it has no region. For two-stage
/// input with the fallback enabled, a second loop gives each still-empty
/// region its best suppressed candidate, or the bare region square at
/// `fallback_floor_score` when it has none. Detections must already be
/// associated (see [`associate_regions`]).
pub fn constrained_nms(
    image_id: &str,
    detections: &[Detection],
    regions: &[RadioRegion],
    cfg: &NmsConfig,
) -> ConstrainedNms {
    if !cfg.region_constraint {
        return ConstrainedNms {
            kept: standard_nms(detections, cfg.iou_threshold),
            fallback: Vec::new(),
        };
    }

    let mut kept_idx: Vec<usize> = Vec::new();
    let mut used: HashSet<&str> = HashSet::new();
    for i in score_order(detections) {
        let d = &detections[i];
        if kept_idx
            .iter()
            .any(|&k| iou(&detections[k].bbox, &d.bbox) >= cfg.iou_threshold)
        {
            continue;
        }
        match d.region_id.as_deref() {
            Some(r) if used.contains(r) => continue,
            Some(r) => {
                used.insert(r);
            }
            None if cfg.strict => continue,
            None => {}
        }
        kept_idx.push(i);
    }

    let mut fallback = Vec::new();
    if cfg.mode == DetectorKind::TwoStage && cfg.enable_fallback_loop {
        for region in regions {
            if used.contains(region.identifier.as_str()) {
                continue;
            }
            let best = detections
                .iter()
                .enumerate()
                .filter(|(i, d)| d.region_id.as_deref() == Some(region.identifier.as_str()) && !kept_idx.contains(i))
                .fold(None::<&Detection>, |acc, (_, d)| match acc {
                    Some(a) if a.score >= d.score => Some(a),
                    _ => Some(d),
                });
            fallback.push(match best {
                Some(d) => d.clone(),
                None => anchor_detection(image_id, region, cfg.fallback_floor_score),
            });
            used.insert(region.identifier.as_str());
        }
    }

    ConstrainedNms {
        kept: kept_idx.into_iter().map(|i| detections[i].clone()).collect(),
        fallback,
    }
}

fn anchor_detection(image_id: &str, region: &RadioRegion, score: f64) -> Detection {
    let r: Rect = region.rect();
    Detection::new(image_id, r, score).with_region(&region.identifier)
}
