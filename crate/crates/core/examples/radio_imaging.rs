//! Projects radio estimates onto the image plane of a co-located camera and
//! inverts the projection again.
//!
//!     cargo run --example radio_imaging

use radiodet::imaging::{back_project, project, CameraModel, ImagingParams};
use radiodet::radio_loc::{RadioEstimate, SPEED_OF_LIGHT};

fn main() -> radiodet::Result<()> {
    let camera = CameraModel::default();
    let params = ImagingParams::default();
    println!(
        "camera: f = {} px, {}x{}, fov {:.1} x {:.1} deg",
        camera.focal_length_px, camera.image_width, camera.image_height, camera.fov_h, camera.fov_v
    );
    for (i, (aoa_h, aoa_v, range)) in [(90.0, 90.0, 5.0), (100.0, 85.0, 8.0), (70.0, 95.0, 3.0), (140.0, 90.0, 4.0)]
        .into_iter()
        .enumerate()
    {
        let est = RadioEstimate {
            aoa_h,
            aoa_v,
            tof: range / SPEED_OF_LIGHT,
            magnitude: 1.0,
            identifier: format!("est-{i}"),
        };
        match project(&est, &camera, &params)? {
            Some(r) => {
                let back = back_project(&r, &camera, &params)?;
                println!(
                    "{}: ({aoa_h}, {aoa_v}) at {range} m -> centre ({:.1}, {:.1}) edge {:.1} px; back to ({:.3}, {:.3}) at {:.3} m",
                    est.identifier,
                    r.center_x,
                    r.center_y,
                    r.edge,
                    back.aoa_h,
                    back.aoa_v,
                    back.tof * SPEED_OF_LIGHT
                );
            }
            None => println!("{}: ({aoa_h}, {aoa_v}) is outside the field of view", est.identifier),
        }
    }
    Ok(())
}
