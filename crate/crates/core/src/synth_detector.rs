//! Synthetic scenes and detector outputs.
//!
//! Lets the fusion pipeline be exercised end to end without a neural network:
//! [`generate`] imitates a full detector (jittered hits, misses, duplicate
//! part-boxes and background false positives), and [`emulate_roi_head`]
//! imitates the classification/regression stage of a two-stage detector run
//! on radio proposals.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::fusion::{Detection, Proposal};
use crate::geometry::Rect;
use crate::rng::{substream, Substream};
use crate::sim_regions::Annotation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoreModel {
    pub tp_mean: f64,
    pub fp_mean: f64,
    pub std: f64,
}

impl Default for ScoreModel {
    fn default() -> Self {
        Self {
            tp_mean: 0.8,
            fp_mean: 0.4,
            std: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthParams {
    /// Corner jitter standard deviation as a fraction of box width/height.
    pub jitter_std: f64,
    /// Mean of the Poisson number of background boxes per image.
    pub fp_per_image: f64,
    /// Probability a person is missed.
    pub fn_rate: f64,
    /// Probability a detected person also gets a duplicate part-box.
    pub duplicate_rate: f64,
    /// Horizontal offset of a duplicate, as a fraction of the box width.
    pub duplicate_shift: f64,
    pub score_model: ScoreModel,
    /// Attach the backbone grid cell of this stride (pixels) to every box.
    pub cell_stride: Option<f64>,
    pub seed: u64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            jitter_std: 0.05,
            fp_per_image: 1.0,
            fn_rate: 0.1,
            duplicate_rate: 0.2,
            duplicate_shift: 0.5,
            score_model: ScoreModel::default(),
            cell_stride: None,
            seed: 0,
        }
    }
}

impl SynthParams {
    /// Every person detected exactly, nothing else.
    pub fn exact() -> Self {
        Self {
            jitter_std: 0.0,
            fp_per_image: 0.0,
            fn_rate: 0.0,
            duplicate_rate: 0.0,
            score_model: ScoreModel {
                std: 0.0,
                ..Default::default()
            },
            ..Default::default()
        }
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

fn score<R: Rng + ?Sized>(rng: &mut R, mean: f64, std: f64) -> f64 {
    (mean + std * normal(rng)).clamp(0.0, 1.0)
}

/// Moves each corner by `N(0, std * size)`, keeping at least 1 px of extent.
fn jitter<R: Rng + ?Sized>(rng: &mut R, b: &Rect, std: f64) -> Rect {
    let x1 = b.x + std * b.w * normal(rng);
    let y1 = b.y + std * b.h * normal(rng);
    let x2 = b.right() + std * b.w * normal(rng);
    let y2 = b.bottom() + std * b.h * normal(rng);
    let (x1, x2) = (x1.min(x2), x1.max(x2).max(x1.min(x2) + 1.0));
    let (y1, y2) = (y1.min(y2), y1.max(y2).max(y1.min(y2) + 1.0));
    Rect::new(x1, y1, x2 - x1, y2 - y1)
}

fn cell_of(b: &Rect, stride: f64) -> Rect {
    let (cx, cy) = b.center();
    Rect::new((cx / stride).floor() * stride, (cy / stride).floor() * stride, stride, stride)
}

/// Synthesizes detector output for the given images.
///
/// Images are processed in ascending id order, ground truth in input order,
/// from one stream seeded by `params.seed`. `image_size` bounds where
/// background boxes are placed.
pub fn generate(image_ids: &[String], gts: &[Annotation], image_size: (f64, f64), params: &SynthParams) -> Vec<Detection> {
    let mut by_image: BTreeMap<&str, Vec<&Annotation>> = image_ids.iter().map(|id| (id.as_str(), Vec::new())).collect();
    for a in gts.iter().filter(|a| a.is_person()) {
        by_image.entry(a.image_id.as_str()).or_default().push(a);
    }

    let mut rng = substream(params.seed, Substream::Detector);
    let poisson = (params.fp_per_image > 0.0).then(|| Poisson::new(params.fp_per_image).expect("positive rate"));
    let sm = params.score_model;
    let (width, height) = image_size;
    let mut out = Vec::new();

    for (image_id, anns) in by_image {
        let start = out.len();
        for ann in &anns {
            if rng.random::<f64>() < params.fn_rate {
                continue;
            }
            let bbox = jitter(&mut rng, &ann.bbox, params.jitter_std);
            out.push(Detection::new(image_id, bbox, score(&mut rng, sm.tp_mean, sm.std)));
            if rng.random::<f64>() < params.duplicate_rate {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                let shifted = Rect {
                    x: ann.bbox.x + sign * params.duplicate_shift * ann.bbox.w,
                    ..ann.bbox
                };
                let dup = jitter(&mut rng, &shifted, params.jitter_std);
                out.push(Detection::new(image_id, dup, score(&mut rng, sm.tp_mean, sm.std)));
            }
        }

        let count = poisson.as_ref().map_or(0, |p| p.sample(&mut rng) as usize);
        for _ in 0..count {
            let bbox = loop {
                let w = rng.random_range(20.0..(0.3 * width).max(21.0));
                let h = (w * rng.random_range(1.2..2.8)).min(height);
                let x = rng.random_range(0.0..(width - w).max(1.0));
                let y = rng.random_range(0.0..(height - h).max(1.0));
                let b = Rect::new(x, y, w, h);
                if anns.iter().all(|a| a.bbox != b) {
                    break b;
                }
            };
            out.push(Detection::new(image_id, bbox, score(&mut rng, sm.fp_mean, sm.std)));
        }

        if let Some(stride) = params.cell_stride {
            for d in &mut out[start..] {
                d.cell = Some(cell_of(&d.bbox, stride));
            }
        }
    }
    out
}

/// Layout of synthetic scenes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneParams {
    pub num_images: usize,
    pub image_width: f64,
    pub image_height: f64,
    /// People per frame are uniform on `0..=max_people`.
    pub max_people: usize,
    pub min_height: f64,
    pub max_height: f64,
    /// Height over width of a person box.
    pub min_aspect: f64,
    pub max_aspect: f64,
    /// Maximum IoU between two people in the same frame.
    pub max_overlap: f64,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            num_images: 500,
            image_width: 640.0,
            image_height: 480.0,
            max_people: 3,
            min_height: 60.0,
            max_height: 300.0,
            min_aspect: 1.2,
            max_aspect: 2.8,
            max_overlap: 0.1,
        }
    }
}

/// A generated dataset: image ids plus person annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScenes {
    pub image_ids: Vec<String>,
    pub annotations: Vec<Annotation>,
}

pub fn synthetic_scenes(params: &SceneParams, seed: u64) -> SyntheticScenes {
    let mut rng = substream(seed, Substream::Scenes);
    let mut image_ids = Vec::with_capacity(params.num_images);
    let mut annotations = Vec::new();
    for i in 0..params.num_images {
        let id = format!("{i:06}");
        let n = rng.random_range(0..=params.max_people);
        let mut placed: Vec<Rect> = Vec::new();
        let mut attempts = 0;
        while placed.len() < n && attempts < 100 {
            attempts += 1;
            let h = rng.random_range(params.min_height..=params.max_height.min(params.image_height));
            let w = h / rng.random_range(params.min_aspect..=params.max_aspect);
            let x = rng.random_range(0.0..=(params.image_width - w).max(0.0));
            let y = rng.random_range(0.0..=(params.image_height - h).max(0.0));
            let b = Rect::new(x, y, w, h);
            if placed.iter().all(|p| p.iou(&b) <= params.max_overlap) {
                placed.push(b);
            }
        }
        annotations.extend(placed.into_iter().map(|b| Annotation::person(&id, b)));
        image_ids.push(id);
    }
    SyntheticScenes {
        image_ids,
        annotations,
    }
}

/// Behaviour of the emulated second stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoiHeadParams {
    /// Proposals at or above this IoU with a person are classified as person.
    pub fg_iou: f64,
    /// Fraction of the proposal-to-person corner offset removed by regression.
    pub regression: f64,
    /// Residual corner jitter as a fraction of the person box size.
    pub jitter_std: f64,
    pub fg_score_mean: f64,
    pub bg_score_mean: f64,
    pub score_std: f64,
}

impl Default for RoiHeadParams {
    fn default() -> Self {
        Self {
            fg_iou: 0.5,
            regression: 0.8,
            jitter_std: 0.03,
            fg_score_mean: 0.85,
            bg_score_mean: 0.05,
            score_std: 0.1,
        }
    }
}

/// Classifies and regresses proposals against the image's ground truth.
///
/// A proposal overlapping a person at `fg_iou` or more is pulled toward that
/// person's box and scored as foreground; any other proposal keeps its box
/// with a background score. Exactly five normals are drawn per proposal
/// whatever the outcome, so runs that only move the proposals stay on common
/// random numbers.
pub fn emulate_roi_head<R: Rng + ?Sized>(
    image_id: &str,
    proposals: &[Proposal],
    gts: &[Rect],
    params: &RoiHeadParams,
    rng: &mut R,
) -> Vec<Detection> {
    proposals
        .iter()
        .map(|p| {
            let z: [f64; 5] = std::array::from_fn(|_| normal(rng));
            let best = gts
                .iter()
                .map(|g| (g, p.bbox.iou(g)))
                .fold(None::<(&Rect, f64)>, |acc, (g, v)| match acc {
                    Some((_, bv)) if bv >= v => acc,
                    _ => Some((g, v)),
                });
            let (bbox, score) = match best {
                Some((g, v)) if v >= params.fg_iou => {
                    let keep = 1.0 - params.regression;
                    let blend = |gt: f64, prop: f64| gt + keep * (prop - gt);
                    let x1 = blend(g.x, p.bbox.x) + params.jitter_std * g.w * z[0];
                    let y1 = blend(g.y, p.bbox.y) + params.jitter_std * g.h * z[1];
                    let x2 = blend(g.right(), p.bbox.right()) + params.jitter_std * g.w * z[2];
                    let y2 = blend(g.bottom(), p.bbox.bottom()) + params.jitter_std * g.h * z[3];
                    let b = Rect::new(x1, y1, (x2 - x1).max(1.0), (y2 - y1).max(1.0));
                    (b, (params.fg_score_mean + params.score_std * z[4]).clamp(0.0, 1.0))
                }
                _ => (p.bbox, (params.bg_score_mean + params.score_std * z[4]).clamp(0.0, 1.0)),
            };
            Detection::new(image_id, bbox, score).with_region(&p.region_id)
        })
        .collect()
}
