//! Every fusion method on the same synthetic dataset, side by side.
//!
//!     cargo run --release --example end_to_end [num_images]

use radiodet::pipeline::{load_inputs, run_with, Method, RunConfig};

fn fmt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.3}"))
}

fn main() -> radiodet::Result<()> {
    let mut cfg = RunConfig::default();
    if let Some(n) = std::env::args().nth(1) {
        cfg.scenes.num_images = n.parse().expect("num_images must be an integer");
    }
    let inputs = load_inputs(&cfg)?;
    println!(
        "{} images, {} people, {} raw detections, lambda {}",
        inputs.dataset.image_ids.len(),
        inputs.dataset.annotations.len(),
        inputs.detections.len(),
        cfg.lambda
    );
    println!("{:<14} {:>6} {:>6} {:>6} {:>7} {:>7} {:>6}", "method", "AP", "AP50", "AP75", "LAMR", "FP+FN", "TDR");
    for method in Method::ALL {
        let r = run_with(&RunConfig { method, ..cfg.clone() }, &inputs)?.report;
        println!(
            "{:<14} {:>6} {:>6} {:>6} {:>7.3} {:>7.3} {:>6.3}",
            method.to_string(),
            fmt(r.coco.ap),
            fmt(r.coco.ap50),
            fmt(r.coco.ap75),
            r.log_avg_miss_rate,
            r.fp_fn_per_image,
            r.true_detection_ratio
        );
    }
    Ok(())
}
