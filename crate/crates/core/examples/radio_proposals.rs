//! Radio regions as anchors: nine proposals per region, scored by an
//! emulated second stage and by region overlap.
//!
//!     cargo run --example radio_proposals

use radiodet::fusion::{generate_proposals, score_proposals_by_overlap, AnchorConfig};
use radiodet::geometry::Rect;
use radiodet::imaging::RadioRegion;
use radiodet::rng::{substream, Substream};
use radiodet::synth_detector::{emulate_roi_head, RoiHeadParams};

fn main() -> radiodet::Result<()> {
    let person = Rect::new(100.0, 80.0, 60.0, 150.0);
    let region = RadioRegion::new("r0000", 133.0, 152.0, 64.0);
    let anchors = AnchorConfig::default();
    let proposals = generate_proposals(&region, &anchors.scales, &anchors.ratios)?;
    let by_overlap = score_proposals_by_overlap(&proposals, &region, "img")?;
    let mut rng = substream(0, Substream::RoiHead);
    let head = emulate_roi_head("img", &proposals, &[person], &RoiHeadParams::default(), &mut rng);

    println!("{:>5} {:>5} {:>8} {:>8} {:>7} {:>9} {:>9}", "scale", "ratio", "w", "h", "IoU", "overlap", "RoI head");
    for ((p, o), h) in proposals.iter().zip(&by_overlap).zip(&head) {
        println!(
            "{:>5} {:>5} {:>8.1} {:>8.1} {:>7.3} {:>9.3} {:>9.3}",
            anchors.scales[p.scale_index],
            anchors.ratios[p.ratio_index],
            p.bbox.w,
            p.bbox.h,
            p.bbox.iou(&person),
            o.score,
            h.score
        );
    }
    Ok(())
}
