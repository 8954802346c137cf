//! Readers and writers for every file the pipeline consumes or produces.
//! Field-level documentation of each format lives in `SCHEMAS.md`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{CurvePoint, MetricsReport};
use crate::fusion::Detection;
use crate::geometry::Rect;
use crate::imaging::RadioRegion;
use crate::radio_loc::{ArrayGeometry, CsiFrame, RadioEstimate};
use crate::sim_regions::{Annotation, PERSON};

pub const CSI_SCHEMA: &str = "csi-frame/v1";
pub const DETECTIONS_SCHEMA: &str = "detections/v1";
pub const REGIONS_SCHEMA: &str = "radio-regions/v1";
pub const ESTIMATES_SCHEMA: &str = "radio-estimates/v1";
pub const METRICS_SCHEMA: &str = "metrics/v1";

fn schema_error(path: &Path, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| schema_error(path, e.to_string()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn check_schema(path: &Path, found: Option<&str>, expected: &str) -> Result<()> {
    match found {
        Some(s) if s != expected => Err(schema_error(path, format!("expected schema {expected}, found {s}"))),
        _ => Ok(()),
    }
}

/// Image ids may be numbers (COCO) or strings.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Id {
    Num(u64),
    Str(String),
}

impl Id {
    fn into_string(self) -> String {
        match self {
            Id::Num(n) => n.to_string(),
            Id::Str(s) => s,
        }
    }
}

// ---------------------------------------------------------------- CSI frames

#[derive(Serialize, Deserialize)]
struct CsiFile {
    schema: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    image_id: Option<String>,
    #[serde(default)]
    timestamp: f64,
    geometry: ArrayGeometry,
    samples: Vec<[f64; 2]>,
}

pub fn read_csi_frame(path: &Path) -> Result<CsiFrame> {
    let file: CsiFile = read_json(path)?;
    check_schema(path, file.schema.as_deref(), CSI_SCHEMA)?;
    let samples = file.samples.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
    let frame = CsiFrame::new(file.geometry, samples, file.timestamp).map_err(|e| schema_error(path, e.to_string()))?;
    Ok(match file.image_id {
        Some(id) => frame.with_image_id(id),
        None => frame,
    })
}

pub fn write_csi_frame(path: &Path, frame: &CsiFrame) -> Result<()> {
    write_json(
        path,
        &CsiFile {
            schema: Some(CSI_SCHEMA.into()),
            image_id: frame.image_id.clone(),
            timestamp: frame.timestamp,
            geometry: frame.geometry.clone(),
            samples: frame.samples().iter().map(|c| [c.re, c.im]).collect(),
        },
    )
}

// ------------------------------------------------------- COCO annotations

/// Images and person ground truth.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub image_ids: Vec<String>,
    pub annotations: Vec<Annotation>,
    /// `(width, height)` per image when the source provides it.
    pub image_sizes: BTreeMap<String, (f64, f64)>,
}

impl Dataset {
    pub fn bounds(&self, image_id: &str) -> Option<Rect> {
        self.image_sizes
            .get(image_id)
            .map(|&(w, h)| Rect::new(0.0, 0.0, w, h))
    }
}

#[derive(Deserialize)]
struct CocoIn {
    images: Vec<CocoImageIn>,
    annotations: Vec<CocoAnnIn>,
    #[serde(default)]
    categories: Vec<CocoCategoryIn>,
}

#[derive(Deserialize)]
struct CocoImageIn {
    id: Id,
    width: Option<f64>,
    height: Option<f64>,
}

#[derive(Deserialize)]
struct CocoAnnIn {
    image_id: Id,
    category_id: Id,
    bbox: [f64; 4],
    #[serde(default)]
    iscrowd: u8,
    #[serde(default)]
    ignore: bool,
    height: Option<f64>,
    occlusion: Option<f64>,
}

#[derive(Deserialize)]
struct CocoCategoryIn {
    id: Id,
    name: String,
}

/// Reads a COCO-style annotation file. Crowd and ignore annotations are
/// dropped; boxes must have positive size.
pub fn read_coco_annotations(path: &Path) -> Result<Dataset> {
    let file: CocoIn = read_json(path)?;
    let names: BTreeMap<String, String> = file
        .categories
        .into_iter()
        .map(|c| (c.id.into_string(), c.name))
        .collect();
    let mut ds = Dataset::default();
    for im in file.images {
        let id = im.id.into_string();
        if let (Some(w), Some(h)) = (im.width, im.height) {
            ds.image_sizes.insert(id.clone(), (w, h));
        }
        ds.image_ids.push(id);
    }
    for (i, a) in file.annotations.into_iter().enumerate() {
        if a.iscrowd != 0 || a.ignore {
            continue;
        }
        let bbox = Rect::from(a.bbox);
        if !(bbox.is_finite() && bbox.w > 0.0 && bbox.h > 0.0) {
            return Err(schema_error(path, format!("annotation {i} has a degenerate bbox")));
        }
        if let Some(o) = a.occlusion.filter(|o| !(0.0..=1.0).contains(o)) {
            return Err(schema_error(path, format!("annotation {i} occlusion {o} outside [0, 1]")));
        }
        let cat = a.category_id.into_string();
        let category = names
            .get(&cat)
            .cloned()
            .unwrap_or_else(|| if cat == "1" { PERSON.to_string() } else { cat });
        ds.annotations.push(Annotation {
            image_id: a.image_id.into_string(),
            bbox,
            category,
            height_px: a.height.unwrap_or(bbox.h),
            occlusion_fraction: a.occlusion,
        });
    }
    Ok(ds)
}

#[derive(Serialize)]
struct CocoOut<'a> {
    images: Vec<CocoImageOut<'a>>,
    annotations: Vec<CocoAnnOut<'a>>,
    categories: [CocoCategoryOut; 1],
}

#[derive(Serialize)]
struct CocoImageOut<'a> {
    id: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    height: Option<f64>,
}

#[derive(Serialize)]
struct CocoAnnOut<'a> {
    id: usize,
    image_id: &'a str,
    category_id: &'a str,
    bbox: Rect,
    area: f64,
    iscrowd: u8,
    height: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    occlusion: Option<f64>,
}

#[derive(Serialize)]
struct CocoCategoryOut {
    id: &'static str,
    name: &'static str,
}

/// Writes person annotations in the format [`read_coco_annotations`] reads.
pub fn write_coco_annotations(path: &Path, ds: &Dataset) -> Result<()> {
    let out = CocoOut {
        images: ds
            .image_ids
            .iter()
            .map(|id| {
                let size = ds.image_sizes.get(id);
                CocoImageOut {
                    id,
                    width: size.map(|s| s.0),
                    height: size.map(|s| s.1),
                }
            })
            .collect(),
        annotations: ds
            .annotations
            .iter()
            .filter(|a| a.is_person())
            .enumerate()
            .map(|(i, a)| CocoAnnOut {
                id: i + 1,
                image_id: &a.image_id,
                category_id: "person",
                bbox: a.bbox,
                area: a.bbox.area(),
                iscrowd: 0,
                height: a.height_px,
                occlusion: a.occlusion_fraction,
            })
            .collect(),
        categories: [CocoCategoryOut {
            id: "person",
            name: PERSON,
        }],
    };
    write_json(path, &out)
}

// ------------------------------------------------------------- detections

#[derive(Deserialize)]
#[serde(untagged)]
enum DetectionsIn {
    Wrapped {
        schema: Option<String>,
        detections: Vec<DetectionIn>,
    },
    Bare(Vec<DetectionIn>),
}

#[derive(Deserialize)]
struct DetectionIn {
    image_id: Id,
    bbox: Rect,
    score: f64,
    region_id: Option<String>,
    cell: Option<Rect>,
}

#[derive(Serialize)]
struct DetectionsOut<'a> {
    schema: &'static str,
    detections: &'a [Detection],
}

/// Reads a detections file; a bare COCO results array is accepted too.
pub fn read_detections(path: &Path) -> Result<Vec<Detection>> {
    let (schema, raw) = match read_json::<DetectionsIn>(path)? {
        DetectionsIn::Wrapped { schema, detections } => (schema, detections),
        DetectionsIn::Bare(d) => (None, d),
    };
    check_schema(path, schema.as_deref(), DETECTIONS_SCHEMA)?;
    raw.into_iter()
        .enumerate()
        .map(|(i, d)| {
            if !(0.0..=1.0).contains(&d.score) {
                return Err(schema_error(path, format!("detection {i} score {} outside [0, 1]", d.score)));
            }
            if !(d.bbox.is_finite() && d.bbox.w >= 0.0 && d.bbox.h >= 0.0) {
                return Err(schema_error(path, format!("detection {i} has an invalid bbox")));
            }
            if let Some(c) = d.cell.filter(|c| !(c.is_finite() && c.area() > 0.0)) {
                return Err(schema_error(path, format!("detection {i} has a degenerate cell {c:?}")));
            }
            Ok(Detection {
                image_id: d.image_id.into_string(),
                bbox: d.bbox,
                score: d.score,
                region_id: d.region_id,
                cell: d.cell,
            })
        })
        .collect()
}

pub fn write_detections(path: &Path, detections: &[Detection]) -> Result<()> {
    write_json(
        path,
        &DetectionsOut {
            schema: DETECTIONS_SCHEMA,
            detections,
        },
    )
}

// ---------------------------------------------------------------- regions

pub type RegionMap = BTreeMap<String, Vec<RadioRegion>>;

#[derive(Serialize, Deserialize)]
struct RegionsFile {
    schema: Option<String>,
    images: RegionMap,
}

pub fn read_regions(path: &Path) -> Result<RegionMap> {
    let file: RegionsFile = read_json(path)?;
    check_schema(path, file.schema.as_deref(), REGIONS_SCHEMA)?;
    for (image, regions) in &file.images {
        if let Some(r) = regions.iter().find(|r| !(r.edge > 0.0 && r.center_x.is_finite() && r.center_y.is_finite())) {
            return Err(schema_error(path, format!("region {} of image {image} is degenerate", r.identifier)));
        }
    }
    Ok(file.images)
}

pub fn write_regions(path: &Path, regions: &RegionMap) -> Result<()> {
    write_json(
        path,
        &RegionsFile {
            schema: Some(REGIONS_SCHEMA.into()),
            images: regions.clone(),
        },
    )
}

// -------------------------------------------------------------- estimates

/// A radio estimate tagged with the image it belongs to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub image_id: String,
    #[serde(flatten)]
    pub estimate: RadioEstimate,
}

#[derive(Serialize, Deserialize)]
struct EstimatesFile {
    schema: Option<String>,
    estimates: Vec<EstimateRecord>,
}

pub fn read_estimates(path: &Path) -> Result<Vec<EstimateRecord>> {
    let file: EstimatesFile = read_json(path)?;
    check_schema(path, file.schema.as_deref(), ESTIMATES_SCHEMA)?;
    if let Some(e) = file.estimates.iter().find(|e| !(e.estimate.tof > 0.0)) {
        return Err(schema_error(path, format!("estimate {} has non-positive ToF", e.estimate.identifier)));
    }
    Ok(file.estimates)
}

pub fn write_estimates(path: &Path, estimates: &[EstimateRecord]) -> Result<()> {
    write_json(
        path,
        &EstimatesFile {
            schema: Some(ESTIMATES_SCHEMA.into()),
            estimates: estimates.to_vec(),
        },
    )
}

// ---------------------------------------------------------------- metrics

#[derive(Serialize, Deserialize)]
struct MetricsFile {
    schema: Option<String>,
    #[serde(flatten)]
    report: MetricsReport,
}

pub fn read_metrics(path: &Path) -> Result<MetricsReport> {
    let file: MetricsFile = read_json(path)?;
    check_schema(path, file.schema.as_deref(), METRICS_SCHEMA)?;
    Ok(file.report)
}

pub fn write_metrics(path: &Path, report: &MetricsReport) -> Result<()> {
    write_json(
        path,
        &MetricsFile {
            schema: Some(METRICS_SCHEMA.into()),
            report: report.clone(),
        },
    )
}

pub fn write_curve_csv(path: &Path, curve: &[CurvePoint]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in curve {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv(path: &Path) -> Result<Vec<CurvePoint>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
