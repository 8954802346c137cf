//! Fusing radio regions with detector output.
//!
//! Confidence revision scales each score by `1 - lambda + lambda * gamma`,
//! where the decay `gamma` measures how well the detection agrees with the
//! radio regions. Region proposals replace a learned RPN with anchors
//! centred on each radio region.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Rect;
use crate::imaging::RadioRegion;

/// A scored box from a detector (or from this crate's emulators).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: String,
    pub bbox: Rect,
    pub score: f64,
    /// Radio region the detection was born from, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region_id: Option<String>,
    /// Backbone grid cell responsible for the detection (one-stage detectors).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cell: Option<Rect>,
}

impl Detection {
    pub fn new(image_id: impl Into<String>, bbox: Rect, score: f64) -> Self {
        Self {
            image_id: image_id.into(),
            bbox,
            score,
            region_id: None,
            cell: None,
        }
    }

    pub fn with_region(mut self, region_id: impl Into<String>) -> Self {
        self.region_id = Some(region_id.into());
        self
    }

    pub fn with_cell(mut self, cell: Rect) -> Self {
        self.cell = Some(cell);
        self
    }
}

/// Detector family; selects the decay formula and how detections map to regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DetectorKind {
    /// Anchor-based single-shot detector; decay uses the backbone cell.
    OneStage,
    /// Proposal-based detector; decay uses the box itself.
    #[default]
    TwoStage,
}

/// `area(region ∩ cell) / area(cell)`.
pub fn decay_one_stage(region: &Rect, cell: &Rect) -> Result<f64> {
    let area = cell.area();
    if !(area > 0.0) {
        return Err(invalid("grid cell has no area"));
    }
    Ok((region.intersection_area(cell) / area).clamp(0.0, 1.0))
}

/// `area(bbox ∩ region) / area(region)`.
pub fn decay_two_stage(bbox: &Rect, region: &Rect) -> Result<f64> {
    let area = region.area();
    if !(area > 0.0) {
        return Err(invalid("radio region has no area"));
    }
    Ok((bbox.intersection_area(region) / area).clamp(0.0, 1.0))
}

fn unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(format!("{name} must lie in [0, 1], got {v}")))
    }
}

/// `(1 - lambda + lambda * gamma) * score`.
pub fn revise_score(score: f64, gamma: f64, lambda: f64) -> Result<f64> {
    unit("score", score)?;
    unit("decay", gamma)?;
    unit("lambda", lambda)?;
    Ok((1.0 - lambda + lambda * gamma) * score)
}

/// Rewrites every score with the decay against its best-agreeing region.
///
/// `gamma` is the maximum over regions (0 with no regions). When `bounds` is
/// given, regions are clipped to it first and regions entirely outside are
/// ignored. Order and every other field are preserved.
pub fn revise_detections(
    detections: &[Detection],
    regions: &[RadioRegion],
    lambda: f64,
    mode: DetectorKind,
    bounds: Option<&Rect>,
) -> Result<Vec<Detection>> {
    unit("lambda", lambda)?;
    let footprints: Vec<Rect> = regions.iter().filter_map(|r| r.footprint(bounds)).collect();

    detections
        .iter()
        .map(|det| {
            let mut gamma: f64 = 0.0;
            for fp in &footprints {
                let g = match mode {
                    DetectorKind::OneStage => {
                        let cell = det.cell.as_ref().ok_or_else(|| {
                            invalid(format!("one-stage detection in image {} has no cell", det.image_id))
                        })?;
                        decay_one_stage(fp, cell)?
                    }
                    DetectorKind::TwoStage => decay_two_stage(&det.bbox, fp)?,
                };
                gamma = gamma.max(g);
            }
            if mode == DetectorKind::OneStage && det.cell.is_none() {
                return Err(invalid(format!("one-stage detection in image {} has no cell", det.image_id)));
            }
            Ok(Detection {
                score: revise_score(det.score, gamma, lambda)?,
                ..det.clone()
            })
        })
        .collect()
}

/// An anchor box generated from a radio region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub bbox: Rect,
    pub region_id: String,
    pub scale_index: usize,
    pub ratio_index: usize,
}

/// Anchor shapes relative to a region's edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnchorConfig {
    /// Anchor side as a fraction of the region edge.
    pub scales: Vec<f64>,
    /// Height over width.
    pub ratios: Vec<f64>,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        Self {
            scales: vec![0.75, 1.0, 1.25],
            ratios: vec![1.0, 2.0, 3.0],
        }
    }
}

/// One anchor per (scale, ratio), scale-major, each centred on the region with
/// area `(scale * edge)^2` and height/width equal to the ratio.
pub fn generate_proposals(region: &RadioRegion, scales: &[f64], ratios: &[f64]) -> Result<Vec<Proposal>> {
    if scales.is_empty() || ratios.is_empty() {
        return Err(invalid("anchor scales and ratios must be non-empty"));
    }
    if scales.iter().chain(ratios).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(invalid("anchor scales and ratios must be positive"));
    }
    let mut out = Vec::with_capacity(scales.len() * ratios.len());
    for (si, &s) in scales.iter().enumerate() {
        for (ri, &r) in ratios.iter().enumerate() {
            let side = s * region.edge;
            let w = side / r.sqrt();
            let h = side * r.sqrt();
            out.push(Proposal {
                bbox: Rect::from_center(region.center_x, region.center_y, w, h),
                region_id: region.identifier.clone(),
                scale_index: si,
                ratio_index: ri,
            });
        }
    }
    Ok(out)
}

/// Turns proposals into detections scored by their two-stage decay against
/// their own region. Stands in for a classification head when none is
/// available.
pub fn score_proposals_by_overlap(
    proposals: &[Proposal],
    region: &RadioRegion,
    image_id: &str,
) -> Result<Vec<Detection>> {
    let footprint = region.rect();
    proposals
        .iter()
        .map(|p| {
            Ok(Detection::new(image_id, p.bbox, decay_two_stage(&p.bbox, &footprint)?).with_region(&p.region_id))
        })
        .collect()
}
