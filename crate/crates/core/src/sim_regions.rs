//! Simulated radio regions built from ground-truth boxes.
//!
//! Each person box becomes a square of side `L = min(w, h)` centred on the
//! box. Range error scales the side, `L' = L * zeta` with `zeta ~ N(1, sigma)`;
//! angle error shifts the centre by `xi_1 ~ N(0, k1 L')` and
//! `xi_2 ~ N(0, k2 L')`.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::geometry::Rect;
use crate::imaging::RadioRegion;
use crate::rng::{substream, Substream};

pub const PERSON: &str = "person";

/// Lower bound on the sampled scale factor; keeps edges positive.
pub const MIN_SCALE: f64 = 0.05;

/// A ground-truth box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Annotation {
    pub image_id: String,
    pub bbox: Rect,
    pub category: String,
    /// Visible height in pixels; equals `bbox.h` unless the source says otherwise.
    pub height_px: f64,
    /// Fraction of the person that is occluded, when known.
    pub occlusion_fraction: Option<f64>,
}

impl Annotation {
    pub fn person(image_id: impl Into<String>, bbox: Rect) -> Self {
        Self {
            image_id: image_id.into(),
            bbox,
            category: PERSON.to_string(),
            height_px: bbox.h,
            occlusion_fraction: None,
        }
    }

    pub fn is_person(&self) -> bool {
        self.category == PERSON
    }
}

/// Caltech pedestrian evaluation subsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subset {
    /// Taller than 60 px and less than 35% occluded.
    Reasonable,
    /// Taller than 20 px and less than 80% occluded.
    All,
}

impl Subset {
    pub fn accepts(&self, ann: &Annotation) -> bool {
        let occ = ann.occlusion_fraction.unwrap_or(0.0);
        match self {
            Subset::Reasonable => ann.height_px > 60.0 && occ < 0.35,
            Subset::All => ann.height_px > 20.0 && occ < 0.8,
        }
    }
}

/// Localization error model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseParams {
    /// Standard deviation of the edge scale factor.
    pub sigma: f64,
    /// Horizontal shift standard deviation, as a fraction of the noisy edge.
    pub k1: f64,
    /// Vertical shift standard deviation, as a fraction of the noisy edge.
    pub k2: f64,
    pub seed: u64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        Self {
            sigma: 0.2,
            k1: 0.1,
            k2: 0.1,
            seed: 0,
        }
    }
}

impl NoiseParams {
    pub fn noiseless() -> Self {
        Self {
            sigma: 0.0,
            k1: 0.0,
            k2: 0.0,
            seed: 0,
        }
    }
}

/// One draw of the error model before it is applied to a box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseDraw {
    /// Scale factor `zeta`, not yet clamped.
    pub zeta: f64,
    /// `xi_1 / L'`.
    pub shift_x: f64,
    /// `xi_2 / L'`.
    pub shift_y: f64,
}

impl NoiseDraw {
    /// Consumes exactly three standard normals from `rng`.
    pub fn sample<R: Rng + ?Sized>(noise: &NoiseParams, rng: &mut R) -> Self {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let z2: f64 = rng.sample(StandardNormal);
        Self {
            zeta: 1.0 + noise.sigma * z0,
            shift_x: noise.k1 * z1,
            shift_y: noise.k2 * z2,
        }
    }

    pub fn apply(&self, bbox: &Rect, identifier: impl Into<String>) -> RadioRegion {
        let side = bbox.w.min(bbox.h);
        let edge = side * self.zeta.max(MIN_SCALE);
        let (cx, cy) = bbox.center();
        RadioRegion::new(identifier, cx + self.shift_x * edge, cy + self.shift_y * edge, edge)
    }
}

/// Converts one ground-truth box into a noisy square region.
pub fn gt_to_region<R: Rng + ?Sized>(
    ann: &Annotation,
    noise: &NoiseParams,
    identifier: impl Into<String>,
    rng: &mut R,
) -> RadioRegion {
    NoiseDraw::sample(noise, rng).apply(&ann.bbox, identifier)
}

/// Region identifier for the `index`-th person of an image.
pub fn region_id(index: usize) -> String {
    format!("r{index:04}")
}

/// Builds regions for every person annotation, keyed by image id.
///
/// Images are visited in ascending id order and annotations in input order,
/// all from one stream seeded by `noise.seed`, so the output is reproducible.
pub fn build_simulative_set(annotations: &[Annotation], noise: &NoiseParams) -> BTreeMap<String, Vec<RadioRegion>> {
    let mut by_image: BTreeMap<&str, Vec<&Annotation>> = BTreeMap::new();
    for ann in annotations.iter().filter(|a| a.is_person()) {
        by_image.entry(ann.image_id.as_str()).or_default().push(ann);
    }

    let mut rng = substream(noise.seed, Substream::Regions);
    by_image
        .into_iter()
        .map(|(image_id, anns)| {
            let regions = anns
                .iter()
                .enumerate()
                .map(|(i, a)| gt_to_region(a, noise, region_id(i), &mut rng))
                .collect();
            (image_id.to_string(), regions)
        })
        .collect()
}
