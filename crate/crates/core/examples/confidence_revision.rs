//! Score revision: detections agreeing with a radio region keep their
//! confidence, the rest decay with weight lambda.
//!
//!     cargo run --example confidence_revision

use radiodet::fusion::{revise_detections, Detection, DetectorKind};
use radiodet::geometry::Rect;
use radiodet::imaging::RadioRegion;

fn main() -> radiodet::Result<()> {
    let region = RadioRegion::new("r0000", 130.0, 160.0, 60.0);
    let detections = vec![
        // the person
        Detection::new("img", Rect::new(100.0, 80.0, 60.0, 160.0), 0.85)
            .with_cell(Rect::new(128.0, 160.0, 32.0, 32.0)),
        // a part-box shifted half a width
        Detection::new("img", Rect::new(130.0, 80.0, 60.0, 160.0), 0.7).with_cell(Rect::new(160.0, 160.0, 32.0, 32.0)),
        // background clutter
        Detection::new("img", Rect::new(400.0, 50.0, 50.0, 120.0), 0.6).with_cell(Rect::new(416.0, 96.0, 32.0, 32.0)),
    ];
    for mode in [DetectorKind::TwoStage, DetectorKind::OneStage] {
        println!("{mode:?}");
        for lambda in [0.0, 0.5, 1.0] {
            let revised = revise_detections(&detections, std::slice::from_ref(&region), lambda, mode, None)?;
            let scores: Vec<String> = revised.iter().map(|d| format!("{:.3}", d.score)).collect();
            println!("  lambda {lambda}: {}", scores.join("  "));
        }
    }
    Ok(())
}
