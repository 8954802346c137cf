//! Radio imaging: mapping an (AoA, AoA, ToF) estimate onto a square region of
//! the image plane with a pinhole camera co-located with the antenna arrays.
//!
//! Angles follow the array convention `[0, 180]` degrees with 90 at
//! broadside; internally they are shifted so that 0 is the optical axis.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::Rect;
use crate::radio_loc::{RadioEstimate, SPEED_OF_LIGHT};

/// Pinhole camera with the focal length expressed in pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub focal_length_px: f64,
    pub image_width: f64,
    pub image_height: f64,
    /// Horizontal field of view in degrees.
    pub fov_h: f64,
    /// Vertical field of view in degrees.
    pub fov_v: f64,
}

impl CameraModel {
    /// Camera whose field of view is exactly what the sensor covers.
    pub fn from_focal_length(focal_length_px: f64, image_width: f64, image_height: f64) -> Self {
        Self {
            focal_length_px,
            image_width,
            image_height,
            fov_h: 2.0 * (image_width / 2.0 / focal_length_px).atan().to_degrees(),
            fov_v: 2.0 * (image_height / 2.0 / focal_length_px).atan().to_degrees(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.focal_length_px > 0.0) {
            return Err(invalid("focal length must be positive"));
        }
        if !(self.image_width > 0.0 && self.image_height > 0.0) {
            return Err(invalid("image dimensions must be positive"));
        }
        for fov in [self.fov_h, self.fov_v] {
            if !(fov > 0.0 && fov < 180.0) {
                return Err(invalid(format!("field of view must lie in (0, 180), got {fov}")));
            }
        }
        Ok(())
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0.0, 0.0, self.image_width, self.image_height)
    }

    /// Inverse of the tangent mapping: pixel to array angles in degrees.
    pub fn pixel_to_angles(&self, x: f64, y: f64) -> (f64, f64) {
        let a = ((x - self.image_width / 2.0) / self.focal_length_px).atan().to_degrees();
        let b = ((y - self.image_height / 2.0) / self.focal_length_px).atan().to_degrees();
        (a + 90.0, b + 90.0)
    }
}

impl Default for CameraModel {
    fn default() -> Self {
        Self::from_focal_length(3000.0, 1920.0, 1080.0)
    }
}

/// A square image-plane region born from one radio localization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioRegion {
    #[serde(rename = "id")]
    pub identifier: String,
    pub center_x: f64,
    pub center_y: f64,
    /// Side length in pixels.
    pub edge: f64,
}

impl RadioRegion {
    pub fn new(identifier: impl Into<String>, center_x: f64, center_y: f64, edge: f64) -> Self {
        Self {
            identifier: identifier.into(),
            center_x,
            center_y,
            edge,
        }
    }

    pub fn rect(&self) -> Rect {
        Rect::from_center(self.center_x, self.center_y, self.edge, self.edge)
    }

    /// The region's footprint restricted to `bounds`, if any.
    pub fn footprint(&self, bounds: Option<&Rect>) -> Option<Rect> {
        match bounds {
            Some(b) => self.rect().clip(b),
            None => Some(self.rect()),
        }
    }
}

/// Physical assumptions used when turning ranges into pixel sizes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ImagingParams {
    /// Physical side of the square a person occupies, in meters.
    pub person_extent_m: f64,
    /// Multiplier from `c * tof` to range: 1 for one-way emitters, 0.5 for
    /// round-trip (radar) capture.
    pub range_factor: f64,
}

impl Default for ImagingParams {
    fn default() -> Self {
        Self {
            person_extent_m: 1.0,
            range_factor: 1.0,
        }
    }
}

/// Projects one estimate into the image.
///
/// Returns `Ok(None)` when the direction is outside the camera's field of
/// view or the centre lands outside the image. The region keeps the
/// estimate's identifier.
pub fn project(estimate: &RadioEstimate, camera: &CameraModel, params: &ImagingParams) -> Result<Option<RadioRegion>> {
    camera.validate()?;
    if !(estimate.tof > 0.0) {
        return Err(invalid(format!("ToF must be positive, got {}", estimate.tof)));
    }
    if !(params.person_extent_m > 0.0 && params.range_factor > 0.0) {
        return Err(invalid("person extent and range factor must be positive"));
    }
    let off_h = estimate.aoa_h - 90.0;
    let off_v = estimate.aoa_v - 90.0;
    if off_h.abs() >= 90.0 || off_v.abs() >= 90.0 {
        return Err(Error::BehindCamera { distance: 0.0 });
    }

    let range = SPEED_OF_LIGHT * estimate.tof * params.range_factor;
    let plane_distance = range * off_h.to_radians().cos() * off_v.to_radians().cos();
    if !(plane_distance > 0.0) {
        return Err(Error::BehindCamera {
            distance: plane_distance,
        });
    }

    if off_h.abs() > camera.fov_h / 2.0 || off_v.abs() > camera.fov_v / 2.0 {
        return Ok(None);
    }
    let l = camera.focal_length_px;
    let cx = camera.image_width / 2.0 + l * off_h.to_radians().tan();
    let cy = camera.image_height / 2.0 + l * off_v.to_radians().tan();
    if !(0.0..=camera.image_width).contains(&cx) || !(0.0..=camera.image_height).contains(&cy) {
        return Ok(None);
    }

    Ok(Some(RadioRegion {
        identifier: estimate.identifier.clone(),
        center_x: cx,
        center_y: cy,
        edge: params.person_extent_m * l / plane_distance,
    }))
}

/// Inverse of [`project`]: the estimate that images to `region`.
pub fn back_project(region: &RadioRegion, camera: &CameraModel, params: &ImagingParams) -> Result<RadioEstimate> {
    camera.validate()?;
    if !(region.edge > 0.0) {
        return Err(invalid(format!("region edge must be positive, got {}", region.edge)));
    }
    let (aoa_h, aoa_v) = camera.pixel_to_angles(region.center_x, region.center_y);
    let plane_distance = params.person_extent_m * camera.focal_length_px / region.edge;
    let range = plane_distance / ((aoa_h - 90.0).to_radians().cos() * (aoa_v - 90.0).to_radians().cos());
    Ok(RadioEstimate {
        aoa_h,
        aoa_v,
        tof: range / (SPEED_OF_LIGHT * params.range_factor),
        magnitude: 1.0,
        identifier: region.identifier.clone(),
    })
}

/// Projects every estimate, silently dropping those that fall outside the
/// view or cannot be imaged.
pub fn batch_project(estimates: &[RadioEstimate], camera: &CameraModel, params: &ImagingParams) -> Vec<RadioRegion> {
    estimates
        .iter()
        .filter_map(|e| project(e, camera, params).ok().flatten())
        .collect()
}
