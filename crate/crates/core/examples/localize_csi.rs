//! Plants two people in a pair of CSI frames, one per antenna array, and
//! recovers their angles and time of flight from the AoA-ToF spectrum.
//!
//!     cargo run --example localize_csi

use radiodet::radio_loc::{
    compute_spectrum, localize_pair, pick_peaks, synthesize_csi, ArrayGeometry, LocalizerConfig, Orientation, Target,
};

fn main() -> radiodet::Result<()> {
    let horizontal = ArrayGeometry::half_wavelength(8, 30, 5.32e9, 1.25e6, Orientation::Horizontal);
    let vertical = ArrayGeometry { orientation: Orientation::Vertical, ..horizontal.clone() };

    // (horizontal AoA, vertical AoA, ToF)
    let people = [(75.0, 95.0, 20e-9), (104.0, 88.0, 55e-9)];
    let h_targets: Vec<Target> = people.iter().map(|&(a, _, t)| Target { aoa_deg: a, tof_s: t, amplitude: 1.0 }).collect();
    let v_targets: Vec<Target> = people.iter().map(|&(_, b, t)| Target { aoa_deg: b, tof_s: t, amplitude: 1.0 }).collect();
    let h = synthesize_csi(&h_targets, &horizontal, 0.05, 1)?;
    let v = synthesize_csi(&v_targets, &vertical, 0.05, 2)?;

    let cfg = LocalizerConfig { min_magnitude: 24.0, ..Default::default() };
    let grid = cfg.grid_for(&horizontal);
    let spectrum = compute_spectrum(&h, &grid.aoa_deg, &grid.tof_s)?;
    let (rows, cols) = spectrum.dims();
    println!("horizontal spectrum {rows} x {cols}, max {:.1}", spectrum.max());
    for p in pick_peaks(&spectrum, cfg.relative_threshold)? {
        println!("  peak aoa {:>5.1} deg  tof {:>5.1} ns  |P| {:.1}", p.aoa, p.tof * 1e9, p.magnitude);
    }

    println!("fused estimates (planted: {people:?})");
    for e in localize_pair(&h, &v, &cfg)? {
        println!(
            "  {}: aoa_h {:>5.1}  aoa_v {:>5.1}  tof {:>5.1} ns",
            e.identifier,
            e.aoa_h,
            e.aoa_v,
            e.tof * 1e9
        );
    }
    Ok(())
}
