//! Turns ground-truth boxes into noisy square radio regions and shows how
//! the range error `sigma` and the angle error `k` move them.
//!
//!     cargo run --example simulate_regions

use radiodet::geometry::Rect;
use radiodet::sim_regions::{build_simulative_set, Annotation, NoiseParams};

fn main() {
    let people = vec![
        Annotation::person("frame-1", Rect::new(100.0, 80.0, 60.0, 160.0)),
        Annotation::person("frame-1", Rect::new(300.0, 120.0, 45.0, 110.0)),
        Annotation::person("frame-2", Rect::new(50.0, 50.0, 80.0, 200.0)),
    ];
    for noise in [
        NoiseParams::noiseless(),
        NoiseParams::default(),
        NoiseParams { sigma: 0.5, ..Default::default() },
        NoiseParams { k1: 0.4, k2: 0.4, ..Default::default() },
    ] {
        println!("sigma {} k1 {} k2 {}", noise.sigma, noise.k1, noise.k2);
        for (image, regions) in build_simulative_set(&people, &noise) {
            for r in regions {
                println!(
                    "  {image} {}: centre ({:.1}, {:.1}) edge {:.1}",
                    r.identifier, r.center_x, r.center_y, r.edge
                );
            }
        }
    }
}
