//! Standard NMS against region-constrained NMS on a crowded frame: two
//! people, a duplicate part-box and a stray false positive.
//!
//!     cargo run --example constrained_nms

use radiodet::fusion::{Detection, DetectorKind};
use radiodet::geometry::Rect;
use radiodet::imaging::RadioRegion;
use radiodet::nms::{associate_regions, constrained_nms, standard_nms, NmsConfig};

fn show(label: &str, dets: &[Detection]) {
    println!("{label}:");
    for d in dets {
        println!("  {:?} score {:.2} region {:?}", d.bbox, d.score, d.region_id);
    }
}

fn main() -> radiodet::Result<()> {
    let regions = vec![RadioRegion::new("r0000", 130.0, 160.0, 60.0), RadioRegion::new("r0001", 330.0, 170.0, 50.0)];
    let detections = vec![
        Detection::new("img", Rect::new(100.0, 80.0, 60.0, 160.0), 0.9),
        Detection::new("img", Rect::new(130.0, 85.0, 60.0, 150.0), 0.75),
        Detection::new("img", Rect::new(305.0, 110.0, 50.0, 125.0), 0.4),
        Detection::new("img", Rect::new(500.0, 40.0, 40.0, 100.0), 0.6),
    ];
    show("standard NMS", &standard_nms(&detections, 0.5));

    let cfg = NmsConfig { mode: DetectorKind::OneStage, ..Default::default() };
    let associated = associate_regions(&detections, &regions, cfg.mode)?;
    let out = constrained_nms("img", &associated, &regions, &cfg);
    show("constrained NMS", &out.kept);

    // Radio proposals carry their region, which enables the fallback loop.
    let proposals = vec![Detection::new("img", Rect::new(100.0, 80.0, 60.0, 160.0), 0.9).with_region("r0000")];
    let out = constrained_nms("img", &proposals, &regions, &NmsConfig::default());
    show("two-stage kept", &out.kept);
    show("two-stage fallback", &out.fallback);
    Ok(())
}
