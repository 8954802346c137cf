//! Radio-assisted human detection.
//!
//! The crate turns WiFi channel state information into image-plane regions
//! and uses those regions to revise detector confidences and constrain
//! non-maximum suppression:
//!
//! - [`radio_loc`]: joint AoA-ToF spectrum, peak picking and axis fusion.
//! - [`imaging`]: projection of radio estimates to square image regions.
//! - [`sim_regions`]: noisy regions simulated from ground-truth boxes.
//! - [`fusion`]: score revision with a radio decay factor; radio proposals.
//! - [`nms`]: region-constrained NMS.
//! - [`eval`]: COCO mAP, MR-FPPI and per-image visual metrics.
//! - [`synth_detector`]: synthetic scenes and detector output for testing.
//! - [`pipeline`]: configuration and the end-to-end runner behind the CLI.
//!
//! Each capability has a runnable program under `examples/`.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod eval;
pub mod fusion;
pub mod geometry;
pub mod imaging;
pub mod io;
pub mod nms;
pub mod pipeline;
pub mod radio_loc;
pub mod rng;
pub mod sim_regions;
pub mod synth_detector;

pub use error::{Error, Result};
pub use eval::{coco_map, evaluate, mr_fppi, visual_metrics, EvalConfig, ImageEval, MetricsReport};
pub use fusion::{revise_detections, Detection, DetectorKind};
pub use geometry::Rect;
pub use imaging::{project, CameraModel, ImagingParams, RadioRegion};
pub use nms::{constrained_nms, standard_nms, NmsConfig};
pub use radio_loc::{compute_spectrum, localize_pair, ArrayGeometry, CsiFrame, RadioEstimate};
pub use sim_regions::{build_simulative_set, Annotation, NoiseParams};
