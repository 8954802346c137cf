//! Run configuration and the batch commands behind the `radiodet` binary.
//!
//! Every command takes a [`RunConfig`]. Missing inputs are synthesized from
//! the config seed, so `run` works out of the box on a synthetic dataset.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::eval::{evaluate, group_by_image, EvalConfig, MetricsReport};
use crate::fusion::{
    generate_proposals, revise_detections, score_proposals_by_overlap, AnchorConfig, Detection, DetectorKind,
};
use crate::geometry::Rect;
use crate::imaging::{back_project, batch_project, CameraModel, ImagingParams, RadioRegion};
use crate::io::{self, Dataset, EstimateRecord, RegionMap};
use crate::nms::{associate_regions, constrained_nms, standard_nms, NmsConfig};
use crate::radio_loc::{localize_pair, synthesize_csi, ArrayGeometry, CsiFrame, LocalizerConfig, Orientation, Target};
use crate::rng::{item_substream, Substream};
use crate::sim_regions::{build_simulative_set, NoiseParams, Subset};
use crate::synth_detector::{emulate_roi_head, generate, synthetic_scenes, RoiHeadParams, SceneParams, SynthParams};

/// Which fusion variant a run evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Method {
    /// Detector output with standard NMS.
    #[default]
    #[serde(rename = "baseline")]
    Baseline,
    /// Radio score revision, standard NMS.
    #[serde(rename = "method1")]
    Method1,
    /// Radio proposals through a second stage, standard NMS.
    #[serde(rename = "method2")]
    Method2,
    /// Score revision followed by region-constrained NMS.
    #[serde(rename = "method1+cnms")]
    Method1Cnms,
    /// Radio proposals followed by region-constrained NMS.
    #[serde(rename = "method2+cnms")]
    Method2Cnms,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Baseline,
        Method::Method1,
        Method::Method2,
        Method::Method1Cnms,
        Method::Method2Cnms,
    ];

    pub fn uses_proposals(self) -> bool {
        matches!(self, Method::Method2 | Method::Method2Cnms)
    }

    pub fn constrained(self) -> bool {
        matches!(self, Method::Method1Cnms | Method::Method2Cnms)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(v.as_str().unwrap_or_default())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::Config(format!("unknown method {s:?}")))
    }
}

/// How Method 2 turns radio proposals into scored boxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ProposalHead {
    /// [`emulate_roi_head`] against the ground truth.
    #[default]
    Emulated,
    /// Score each anchor by its overlap with its own region.
    RegionOverlap,
    /// Read second-stage output, with `region_id` set, from `paths.detections`.
    External,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// COCO-style person annotations; synthetic scenes when absent.
    pub annotations: Option<PathBuf>,
    /// Detector output; synthesized from the annotations when absent.
    pub detections: Option<PathBuf>,
    /// Radio regions; takes precedence over `estimates`.
    pub regions: Option<PathBuf>,
    /// Radio estimates, projected with `camera`. Regions are simulated from
    /// the annotations when neither this nor `regions` is given.
    pub estimates: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            annotations: None,
            detections: None,
            regions: None,
            estimates: None,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Antenna arrays used when synthesizing CSI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub num_antennas: usize,
    pub num_subcarriers: usize,
    pub base_frequency: f64,
    pub frequency_interval: f64,
    pub noise_std: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self {
            num_antennas: 8,
            num_subcarriers: 30,
            base_frequency: 5.32e9,
            frequency_interval: 1.25e6,
            noise_std: 0.01,
        }
    }
}

impl ArrayConfig {
    pub fn geometry(&self, orientation: Orientation) -> ArrayGeometry {
        ArrayGeometry::half_wavelength(
            self.num_antennas,
            self.num_subcarriers,
            self.base_frequency,
            self.frequency_interval,
            orientation,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    /// Root of every random stream; overrides `noise.seed` and `synth.seed`.
    pub seed: u64,
    pub method: Method,
    /// Decay used by Method 1 score revision.
    pub mode: DetectorKind,
    /// Weight of the radio decay factor in score revision.
    pub lambda: f64,
    pub noise: NoiseParams,
    pub nms: NmsConfig,
    /// When absent, a camera with focal length 600 px sized to the images.
    pub camera: Option<CameraModel>,
    pub imaging: ImagingParams,
    pub anchors: AnchorConfig,
    pub proposal_head: ProposalHead,
    pub roi_head: RoiHeadParams,
    pub localizer: LocalizerConfig,
    pub array: ArrayConfig,
    pub synth: SynthParams,
    pub scenes: SceneParams,
    /// Restrict ground truth (and simulated regions) to a pedestrian subset.
    pub subset: Option<Subset>,
    pub metrics: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            paths: Paths::default(),
            seed: 0,
            method: Method::default(),
            mode: DetectorKind::TwoStage,
            lambda: 0.5,
            noise: NoiseParams::default(),
            nms: NmsConfig::default(),
            camera: None,
            imaging: ImagingParams::default(),
            anchors: AnchorConfig::default(),
            proposal_head: ProposalHead::default(),
            roi_head: RoiHeadParams::default(),
            // a unit-amplitude person peaks at antennas x subcarriers
            localizer: LocalizerConfig {
                min_magnitude: 0.1 * (ArrayConfig::default().num_antennas * ArrayConfig::default().num_subcarriers) as f64,
                ..Default::default()
            },
            array: ArrayConfig::default(),
            synth: SynthParams::default(),
            scenes: SceneParams::default(),
            subset: None,
            metrics: EvalConfig::default(),
        }
    }
}

/// Focal length of the fallback camera.
pub const DEFAULT_FOCAL_PX: f64 = 600.0;

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies a dotted `key=value` override, e.g. `noise.sigma=0.3` or
    /// `method="method2+cnms"`. Bare words are taken as strings. `noise.k`
    /// sets both shift coefficients.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        if key == "noise.k" {
            self.set("noise.k1", raw)?;
            return self.set("noise.k2", raw);
        }
        let mut root = toml::Value::try_from(&*self).map_err(|e| Error::Config(e.to_string()))?;
        let mut node = &mut root;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = node
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("{key}: {} is not a table", parts[..i].join("."))))?;
            if i + 1 == parts.len() {
                table.insert(part.to_string(), parse_value(raw));
                break;
            }
            node = table
                .entry(part.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
        let cfg: Self = root.try_into().map_err(|e: toml::de::Error| Error::Config(format!("{key}: {e}")))?;
        cfg.validate()?;
        *self = cfg;
        Ok(())
    }

    /// Parses `key=value` and applies it.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("lambda must lie in [0, 1], got {}", self.lambda)));
        }
        let n = &self.noise;
        if [n.sigma, n.k1, n.k2].iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Config("noise parameters must be non-negative".into()));
        }
        if !(self.nms.iou_threshold > 0.0 && self.nms.iou_threshold <= 1.0) {
            return Err(Error::Config("nms.iou_threshold must lie in (0, 1]".into()));
        }
        let s = &self.synth;
        for (name, v) in [("fn_rate", s.fn_rate), ("duplicate_rate", s.duplicate_rate)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("synth.{name} must lie in [0, 1]")));
            }
        }
        if [s.jitter_std, s.fp_per_image, s.score_model.std].iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::Config("synth rates and deviations must be non-negative".into()));
        }
        if let Some(cam) = &self.camera {
            cam.validate()?;
        }
        let paths = &self.paths;
        for p in [&paths.annotations, &paths.detections, &paths.regions, &paths.estimates]
            .into_iter()
            .flatten()
        {
            if !p.exists() {
                return Err(Error::Config(format!("input {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// Region noise with the run seed.
    pub fn noise_params(&self) -> NoiseParams {
        NoiseParams {
            seed: self.seed,
            ..self.noise
        }
    }

    /// Detector synthesis with the run seed.
    pub fn synth_params(&self) -> SynthParams {
        SynthParams {
            seed: self.seed,
            ..self.synth.clone()
        }
    }

    fn camera_for(&self, size: (f64, f64)) -> CameraModel {
        self.camera
            .clone()
            .unwrap_or_else(|| CameraModel::from_focal_length(DEFAULT_FOCAL_PX, size.0, size.1))
    }
}

/// Everything a run consumes.
#[derive(Debug, Clone, PartialEq)]
pub struct Inputs {
    pub dataset: Dataset,
    pub detections: Vec<Detection>,
    pub regions: RegionMap,
    /// Common image size, used for synthesis and the fallback camera.
    pub image_size: (f64, f64),
}

/// Loads the ground truth, or generates synthetic scenes.
pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let mut ds = match &cfg.paths.annotations {
        Some(path) => io::read_coco_annotations(path)?,
        None => {
            let scenes = synthetic_scenes(&cfg.scenes, cfg.seed);
            let size = (cfg.scenes.image_width, cfg.scenes.image_height);
            Dataset {
                image_sizes: scenes.image_ids.iter().map(|id| (id.clone(), size)).collect(),
                image_ids: scenes.image_ids,
                annotations: scenes.annotations,
            }
        }
    };
    ds.annotations.retain(|a| a.is_person());
    if let Some(subset) = cfg.subset {
        ds.annotations.retain(|a| subset.accepts(a));
    }
    Ok(ds)
}

fn image_size(cfg: &RunConfig, ds: &Dataset) -> (f64, f64) {
    if let Some(cam) = &cfg.camera {
        return (cam.image_width, cam.image_height);
    }
    ds.image_sizes
        .values()
        .next()
        .copied()
        .unwrap_or((cfg.scenes.image_width, cfg.scenes.image_height))
}

/// Regions from file, from projected estimates, or simulated from the
/// ground truth, in that order of preference.
pub fn load_regions(cfg: &RunConfig, ds: &Dataset, size: (f64, f64)) -> Result<RegionMap> {
    if let Some(path) = &cfg.paths.regions {
        return io::read_regions(path);
    }
    if let Some(path) = &cfg.paths.estimates {
        return Ok(project_estimates(&io::read_estimates(path)?, &cfg.camera_for(size), &cfg.imaging));
    }
    Ok(build_simulative_set(&ds.annotations, &cfg.noise_params()))
}

pub fn load_inputs(cfg: &RunConfig) -> Result<Inputs> {
    cfg.validate()?;
    let dataset = load_dataset(cfg)?;
    let size = image_size(cfg, &dataset);
    let detections = match &cfg.paths.detections {
        Some(path) => io::read_detections(path)?,
        None => generate(&dataset.image_ids, &dataset.annotations, size, &cfg.synth_params()),
    };
    let regions = load_regions(cfg, &dataset, size)?;
    Ok(Inputs {
        dataset,
        detections,
        regions,
        image_size: size,
    })
}

fn project_estimates(records: &[EstimateRecord], camera: &CameraModel, params: &ImagingParams) -> RegionMap {
    let mut by_image: BTreeMap<String, Vec<_>> = BTreeMap::new();
    for r in records {
        by_image.entry(r.image_id.clone()).or_default().push(r.estimate.clone());
    }
    by_image
        .into_iter()
        .map(|(id, est)| (id, batch_project(&est, camera, params)))
        .collect()
}

/// Output of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: MetricsReport,
    /// Final detections, grouped by image in ascending id order.
    pub detections: Vec<Detection>,
    pub regions: RegionMap,
}

struct ImageWork<'a> {
    index: usize,
    id: &'a str,
    detections: Vec<&'a Detection>,
    gts: Vec<Rect>,
    regions: &'a [RadioRegion],
    bounds: Rect,
}

fn fuse_image(cfg: &RunConfig, w: &ImageWork<'_>) -> Result<Vec<Detection>> {
    let t = cfg.nms.iou_threshold;
    let own: Vec<Detection> = w.detections.iter().map(|d| (*d).clone()).collect();

    let candidates = if cfg.method.uses_proposals() {
        match cfg.proposal_head {
            ProposalHead::External => own,
            ProposalHead::RegionOverlap => {
                let mut out = Vec::new();
                for r in w.regions {
                    let props = generate_proposals(r, &cfg.anchors.scales, &cfg.anchors.ratios)?;
                    out.extend(score_proposals_by_overlap(&props, r, w.id)?);
                }
                out
            }
            ProposalHead::Emulated => {
                let mut rng = item_substream(cfg.seed, Substream::RoiHead, w.index);
                let mut out = Vec::new();
                for r in w.regions {
                    let props = generate_proposals(r, &cfg.anchors.scales, &cfg.anchors.ratios)?;
                    out.extend(emulate_roi_head(w.id, &props, &w.gts, &cfg.roi_head, &mut rng));
                }
                out
            }
        }
    } else if matches!(cfg.method, Method::Method1 | Method::Method1Cnms) {
        revise_detections(&own, w.regions, cfg.lambda, cfg.mode, Some(&w.bounds))?
    } else {
        own
    };

    if !cfg.method.constrained() || !cfg.nms.region_constraint {
        return Ok(standard_nms(&candidates, t));
    }
    // Full-detector output carries no provenance, so it is associated by
    // IoU and gets no fallback; radio proposals know their region.
    let nms_mode = if cfg.method.uses_proposals() {
        DetectorKind::TwoStage
    } else {
        DetectorKind::OneStage
    };
    let nms = NmsConfig {
        mode: nms_mode,
        ..cfg.nms.clone()
    };
    let associated = associate_regions(&candidates, w.regions, nms_mode)?;
    Ok(constrained_nms(w.id, &associated, w.regions, &nms).into_detections())
}

/// Runs the configured method on already loaded inputs.
pub fn run_with(cfg: &RunConfig, inputs: &Inputs) -> Result<RunOutput> {
    if cfg.method.uses_proposals() && cfg.proposal_head == ProposalHead::External && cfg.paths.detections.is_none() {
        return Err(Error::Config("proposal_head = \"external\" needs paths.detections".into()));
    }
    let start = Instant::now();
    let ds = &inputs.dataset;
    let mut ids = ds.image_ids.clone();
    ids.sort();
    ids.dedup();

    let mut dets_by: BTreeMap<&str, Vec<&Detection>> = BTreeMap::new();
    for d in &inputs.detections {
        dets_by.entry(d.image_id.as_str()).or_default().push(d);
    }
    let mut gts_by: BTreeMap<&str, Vec<Rect>> = BTreeMap::new();
    for a in &ds.annotations {
        gts_by.entry(a.image_id.as_str()).or_default().push(a.bbox);
    }
    let default_bounds = Rect::new(0.0, 0.0, inputs.image_size.0, inputs.image_size.1);
    let work: Vec<ImageWork<'_>> = ids
        .iter()
        .enumerate()
        .map(|(index, id)| ImageWork {
            index,
            id,
            detections: dets_by.remove(id.as_str()).unwrap_or_default(),
            gts: gts_by.remove(id.as_str()).unwrap_or_default(),
            regions: inputs.regions.get(id).map_or(&[], |v| v.as_slice()),
            bounds: ds.bounds(id).unwrap_or(default_bounds),
        })
        .collect();

    let per_image: Vec<Vec<Detection>> = work.par_iter().map(|w| fuse_image(cfg, w)).collect::<Result<_>>()?;
    let detections: Vec<Detection> = per_image.into_iter().flatten().collect();

    let images = group_by_image(&ids, &detections, &ds.annotations);
    let mut report = evaluate(&images, &cfg.metrics);
    report.runtime_s = start.elapsed().as_secs_f64();
    Ok(RunOutput {
        report,
        detections,
        regions: inputs.regions.clone(),
    })
}

pub fn run(cfg: &RunConfig) -> Result<RunOutput> {
    run_with(cfg, &load_inputs(cfg)?)
}

fn out_path(cfg: &RunConfig, out: Option<&Path>, name: &str) -> PathBuf {
    out.map(Path::to_path_buf)
        .unwrap_or_else(|| cfg.paths.output_dir.join(name))
}

/// Writes simulated regions for the configured ground truth.
pub fn cmd_simulate_regions(cfg: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    cfg.validate()?;
    let ds = load_dataset(cfg)?;
    let path = out_path(cfg, out, "regions.json");
    io::write_regions(&path, &build_simulative_set(&ds.annotations, &cfg.noise_params()))?;
    Ok(path)
}

fn frame_key(frame: &CsiFrame) -> String {
    frame
        .image_id
        .clone()
        .unwrap_or_else(|| format!("{}", frame.timestamp))
}

/// Localizes people from horizontal/vertical CSI frame pairs. Frames are
/// paired by image id, or by timestamp when they carry none.
pub fn cmd_localize(cfg: &RunConfig, csi_files: &[PathBuf], out: Option<&Path>) -> Result<PathBuf> {
    let mut pairs: BTreeMap<String, (Option<CsiFrame>, Option<CsiFrame>)> = BTreeMap::new();
    for path in csi_files {
        let frame = io::read_csi_frame(path)?;
        let slot = pairs.entry(frame_key(&frame)).or_default();
        let target = match frame.geometry.orientation {
            Orientation::Horizontal => &mut slot.0,
            Orientation::Vertical => &mut slot.1,
        };
        if target.is_some() {
            return Err(invalid(format!("two {:?} frames for image {}", frame.geometry.orientation, frame_key(&frame))));
        }
        *target = Some(frame);
    }
    let complete: Vec<(String, CsiFrame, CsiFrame)> = pairs
        .into_iter()
        .map(|(id, (h, v))| match (h, v) {
            (Some(h), Some(v)) => Ok((id, h, v)),
            _ => Err(invalid(format!("image {id} lacks a horizontal or vertical frame"))),
        })
        .collect::<Result<_>>()?;
    let per_image: Vec<Vec<EstimateRecord>> = complete
        .par_iter()
        .map(|(id, h, v)| {
            Ok(localize_pair(h, v, &cfg.localizer)?
                .into_iter()
                .map(|estimate| EstimateRecord {
                    image_id: id.clone(),
                    estimate,
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let path = out_path(cfg, out, "estimates.json");
    io::write_estimates(&path, &per_image.concat())?;
    Ok(path)
}

/// Projects an estimates file into image regions.
pub fn cmd_project(cfg: &RunConfig, estimates: &Path, out: Option<&Path>) -> Result<PathBuf> {
    let records = io::read_estimates(estimates)?;
    let size = (cfg.scenes.image_width, cfg.scenes.image_height);
    let regions = project_estimates(&records, &cfg.camera_for(size), &cfg.imaging);
    let path = out_path(cfg, out, "regions.json");
    io::write_regions(&path, &regions)?;
    Ok(path)
}

/// Files written by [`cmd_run`].
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: MetricsReport,
    pub metrics: PathBuf,
    pub detections: PathBuf,
    pub curve: PathBuf,
}

/// Runs the configured method and writes metrics, the MR-FPPI curve and the
/// final detections to the output directory.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunArtifacts> {
    let out = run(cfg)?;
    let dir = &cfg.paths.output_dir;
    fs::create_dir_all(dir)?;
    let art = RunArtifacts {
        metrics: dir.join("metrics.json"),
        detections: dir.join("detections.json"),
        curve: dir.join("mr_fppi.csv"),
        report: out.report,
    };
    io::write_metrics(&art.metrics, &art.report)?;
    io::write_detections(&art.detections, &out.detections)?;
    io::write_curve_csv(&art.curve, &art.report.mr_fppi_curve)?;
    Ok(art)
}

/// One line of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub param: String,
    pub value: String,
    pub method: String,
    pub ap: Option<f64>,
    pub ap50: Option<f64>,
    pub ap75: Option<f64>,
    pub log_avg_miss_rate: f64,
    pub fp_fn_per_image: f64,
    pub true_detection_ratio: f64,
}

/// Re-runs the pipeline once per value of `param`. Inputs that the parameter
/// cannot affect are loaded once.
pub fn sweep(cfg: &RunConfig, param: &str, values: &[String]) -> Result<Vec<SweepRow>> {
    let reuse = param.starts_with("noise.") || !(param.starts_with("synth.") || param.starts_with("scenes.") || param.starts_with("paths.") || param == "seed" || param == "subset");
    let shared = if reuse { Some(load_inputs(cfg)?) } else { None };
    values
        .iter()
        .map(|v| {
            let mut c = cfg.clone();
            c.set(param, v)?;
            let out = match &shared {
                Some(base) => {
                    let regions = if param.starts_with("noise.") {
                        load_regions(&c, &base.dataset, base.image_size)?
                    } else {
                        base.regions.clone()
                    };
                    run_with(&c, &Inputs { regions, ..base.clone() })?
                }
                None => run(&c)?,
            };
            let r = out.report;
            Ok(SweepRow {
                param: param.to_string(),
                value: v.clone(),
                method: c.method.to_string(),
                ap: r.coco.ap,
                ap50: r.coco.ap50,
                ap75: r.coco.ap75,
                log_avg_miss_rate: r.log_avg_miss_rate,
                fp_fn_per_image: r.fp_fn_per_image,
                true_detection_ratio: r.true_detection_ratio,
            })
        })
        .collect()
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Sweeps `param` and writes `sweep_<param>.csv` to the output directory.
pub fn cmd_sweep(cfg: &RunConfig, param: &str, values: &[String]) -> Result<PathBuf> {
    let rows = sweep(cfg, param, values)?;
    let path = cfg.paths.output_dir.join(format!("sweep_{param}.csv"));
    write_sweep_csv(&path, &rows)?;
    Ok(path)
}

/// Files written by [`cmd_synth`].
#[derive(Debug, Clone)]
pub struct SynthArtifacts {
    pub annotations: PathBuf,
    pub detections: PathBuf,
    pub csi: Vec<PathBuf>,
}

/// Writes a synthetic dataset: annotations, detector output and, when
/// `with_csi` is set, one horizontal and one vertical CSI frame per image
/// with a target at every person's noiseless back-projection.
pub fn cmd_synth(cfg: &RunConfig, with_csi: bool) -> Result<SynthArtifacts> {
    let inputs = load_inputs(&RunConfig {
        paths: Paths {
            regions: None,
            estimates: None,
            ..cfg.paths.clone()
        },
        ..cfg.clone()
    })?;
    let dir = &cfg.paths.output_dir;
    let mut art = SynthArtifacts {
        annotations: dir.join("annotations.json"),
        detections: dir.join("detections.json"),
        csi: Vec::new(),
    };
    io::write_coco_annotations(&art.annotations, &inputs.dataset)?;
    io::write_detections(&art.detections, &inputs.detections)?;
    if with_csi {
        let camera = cfg.camera_for(inputs.image_size);
        let exact = build_simulative_set(&inputs.dataset.annotations, &NoiseParams::noiseless());
        let csi_dir = dir.join("csi");
        fs::create_dir_all(&csi_dir)?;
        for (index, id) in inputs.dataset.image_ids.iter().enumerate() {
            let mut h_targets = Vec::new();
            let mut v_targets = Vec::new();
            for region in exact.get(id).into_iter().flatten() {
                let est = back_project(region, &camera, &cfg.imaging)?;
                h_targets.push(Target {
                    aoa_deg: est.aoa_h,
                    tof_s: est.tof,
                    amplitude: 1.0,
                });
                v_targets.push(Target {
                    aoa_deg: est.aoa_v,
                    ..h_targets[h_targets.len() - 1]
                });
            }
            let seed = cfg.seed.wrapping_add(index as u64);
            for (orientation, targets, tag, stream) in [
                (Orientation::Horizontal, &h_targets, "h", 0u64),
                (Orientation::Vertical, &v_targets, "v", 1),
            ] {
                let geometry = cfg.array.geometry(orientation);
                let frame_seed = seed.wrapping_mul(2).wrapping_add(stream);
                let frame = synthesize_csi(targets, &geometry, cfg.array.noise_std, frame_seed)?.with_image_id(id);
                let path = csi_dir.join(format!("{id}_{tag}.json"));
                io::write_csi_frame(&path, &frame)?;
                art.csi.push(path);
            }
        }
    }
    Ok(art)
}
