//! Scores a small detection set with COCO AP, the log-average miss rate and
//! the per-image visual metrics, then writes the report and curve to disk.
//!
//!     cargo run --example evaluate_metrics [out_dir]

use std::path::PathBuf;

use radiodet::eval::{evaluate, group_by_image, EvalConfig};
use radiodet::fusion::Detection;
use radiodet::geometry::Rect;
use radiodet::io;
use radiodet::sim_regions::Annotation;

fn main() -> radiodet::Result<()> {
    let ids: Vec<String> = ["a", "b", "c"].iter().map(|s| s.to_string()).collect();
    let people = vec![
        Annotation::person("a", Rect::new(10.0, 10.0, 50.0, 120.0)),
        Annotation::person("a", Rect::new(200.0, 40.0, 60.0, 150.0)),
        Annotation::person("b", Rect::new(80.0, 30.0, 40.0, 100.0)),
    ];
    let detections = vec![
        Detection::new("a", Rect::new(12.0, 8.0, 50.0, 125.0), 0.92),
        Detection::new("a", Rect::new(40.0, 10.0, 50.0, 120.0), 0.55),
        Detection::new("b", Rect::new(82.0, 35.0, 38.0, 95.0), 0.81),
        Detection::new("c", Rect::new(300.0, 200.0, 40.0, 90.0), 0.47),
    ];
    let images = group_by_image(&ids, &detections, &people);
    let report = evaluate(&images, &EvalConfig::default());
    println!("{}", serde_json::to_string_pretty(&report)?);

    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    io::write_metrics(&dir.join("metrics.json"), &report)?;
    io::write_curve_csv(&dir.join("mr_fppi.csv"), &report.mr_fppi_curve)?;
    println!("wrote metrics.json and mr_fppi.csv to {}", dir.display());
    Ok(())
}
