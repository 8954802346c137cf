//! How radio localization error degrades Method 2: AP against the range
//! error `sigma` and against the angle error `k`, one held at its default
//! while the other varies.
//!
//!     cargo run --release --example sensitivity_sweep

use radiodet::pipeline::{sweep, Method, RunConfig};

fn main() -> radiodet::Result<()> {
    let cfg = RunConfig {
        method: Method::Method2Cnms,
        ..Default::default()
    };
    let values: Vec<String> = ["0.0", "0.05", "0.1", "0.2", "0.3", "0.4", "0.5"].iter().map(|s| s.to_string()).collect();
    for param in ["noise.sigma", "noise.k"] {
        println!("{param}");
        println!("{:>6} {:>6} {:>6} {:>7} {:>6}", "value", "AP", "AP50", "FP+FN", "TDR");
        for row in sweep(&cfg, param, &values)? {
            println!(
                "{:>6} {:>6.3} {:>6.3} {:>7.3} {:>6.3}",
                row.value,
                row.ap.unwrap_or(f64::NAN),
                row.ap50.unwrap_or(f64::NAN),
                row.fp_fn_per_image,
                row.true_detection_ratio
            );
        }
    }
    Ok(())
}
