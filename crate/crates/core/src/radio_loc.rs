//! Joint angle-of-arrival / time-of-flight estimation from CSI.
//!
//! A frame holds one complex sample per (antenna, subcarrier). For a
//! hypothesised direction `theta` and delay `tau` the beamformer output is
//!
//! ```text
//! P(theta, tau) = sum_m sum_k s[m][k] * exp(j 2pi f_k m d cos(theta) / c) * exp(j 2pi k df tau)
//! ```
//!
//! with `f_k = f_0 + k df`. The estimate is the grid point maximising `|P|`.
//! Indices run over `0..M` and `0..K`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{invalid, Error, Result};
use crate::rng::{substream, Substream};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Uniform linear array sampled on equally spaced subcarriers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub num_antennas: usize,
    /// Inter-element spacing in meters.
    pub element_spacing: f64,
    pub num_subcarriers: usize,
    /// Frequency of subcarrier 0 in Hz.
    pub base_frequency: f64,
    /// Subcarrier spacing in Hz.
    pub frequency_interval: f64,
    pub orientation: Orientation,
}

impl ArrayGeometry {
    /// Builds a geometry whose element spacing is half the wavelength of the
    /// highest subcarrier, which keeps the AoA search free of grating lobes.
    pub fn half_wavelength(
        num_antennas: usize,
        num_subcarriers: usize,
        base_frequency: f64,
        frequency_interval: f64,
        orientation: Orientation,
    ) -> Self {
        let f_max = base_frequency + num_subcarriers.saturating_sub(1) as f64 * frequency_interval;
        Self {
            num_antennas,
            element_spacing: SPEED_OF_LIGHT / (2.0 * f_max),
            num_subcarriers,
            base_frequency,
            frequency_interval,
            orientation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_antennas < 2 {
            return Err(Error::InvalidGeometry(format!(
                "need at least 2 antennas, got {}",
                self.num_antennas
            )));
        }
        if self.num_subcarriers < 2 {
            return Err(Error::InvalidGeometry(format!(
                "need at least 2 subcarriers, got {}",
                self.num_subcarriers
            )));
        }
        if !(self.element_spacing > 0.0 && self.element_spacing.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "element spacing must be positive, got {}",
                self.element_spacing
            )));
        }
        if !(self.frequency_interval > 0.0 && self.frequency_interval.is_finite()) {
            return Err(Error::InvalidGeometry(format!(
                "frequency interval must be positive, got {}",
                self.frequency_interval
            )));
        }
        if !self.base_frequency.is_finite() || self.base_frequency < 0.0 {
            return Err(Error::InvalidGeometry(format!(
                "base frequency must be non-negative, got {}",
                self.base_frequency
            )));
        }
        Ok(())
    }

    pub fn subcarrier_frequency(&self, k: usize) -> f64 {
        self.base_frequency + k as f64 * self.frequency_interval
    }

    /// Delay after which the subcarrier phase ramp wraps around (`1 / df`).
    pub fn unambiguous_tof(&self) -> f64 {
        1.0 / self.frequency_interval
    }

    fn len(&self) -> usize {
        self.num_antennas * self.num_subcarriers
    }
}

/// One CSI snapshot, samples stored row-major as `[antenna][subcarrier]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiFrame {
    samples: Vec<Complex64>,
    pub geometry: ArrayGeometry,
    pub timestamp: f64,
    pub image_id: Option<String>,
}

impl CsiFrame {
    pub fn new(geometry: ArrayGeometry, samples: Vec<Complex64>, timestamp: f64) -> Result<Self> {
        geometry.validate()?;
        if samples.len() != geometry.len() {
            return Err(invalid(format!(
                "CSI has {} samples, geometry expects {} x {} = {}",
                samples.len(),
                geometry.num_antennas,
                geometry.num_subcarriers,
                geometry.len()
            )));
        }
        Ok(Self {
            samples,
            geometry,
            timestamp,
            image_id: None,
        })
    }

    pub fn with_image_id(mut self, image_id: impl Into<String>) -> Self {
        self.image_id = Some(image_id.into());
        self
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn sample(&self, antenna: usize, subcarrier: usize) -> Complex64 {
        self.samples[antenna * self.geometry.num_subcarriers + subcarrier]
    }

    /// Returns a copy with every sample multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * factor).collect(),
            ..self.clone()
        }
    }
}

/// A planted emitter for [`synthesize_csi`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub aoa_deg: f64,
    pub tof_s: f64,
    pub amplitude: f64,
}

/// Generates the CSI a set of emitters would produce on `geometry`.
///
/// Each target contributes `amplitude` times the conjugate steering phases, so
/// [`compute_spectrum`] acts as a matched filter. Noise is circular complex
/// Gaussian with total variance `noise_std^2` per sample (each of the real and
/// imaginary parts has standard deviation `noise_std / sqrt(2)`).
pub fn synthesize_csi(
    targets: &[Target],
    geometry: &ArrayGeometry,
    noise_std: f64,
    seed: u64,
) -> Result<CsiFrame> {
    geometry.validate()?;
    if !(noise_std >= 0.0 && noise_std.is_finite()) {
        return Err(invalid(format!("noise_std must be >= 0, got {noise_std}")));
    }
    if let Some(t) = targets.iter().find(|t| !(t.tof_s > 0.0)) {
        return Err(invalid(format!("target ToF must be positive, got {}", t.tof_s)));
    }

    let (m_count, k_count) = (geometry.num_antennas, geometry.num_subcarriers);
    let d = geometry.element_spacing;
    let df = geometry.frequency_interval;
    let mut samples = vec![Complex64::new(0.0, 0.0); m_count * k_count];
    for t in targets {
        let cos_theta = t.aoa_deg.to_radians().cos();
        for m in 0..m_count {
            for k in 0..k_count {
                let fk = geometry.subcarrier_frequency(k);
                let phase = -2.0 * PI * (fk * m as f64 * d * cos_theta / SPEED_OF_LIGHT
                    + k as f64 * df * t.tof_s);
                samples[m * k_count + k] += Complex64::from_polar(t.amplitude, phase);
            }
        }
    }

    if noise_std > 0.0 {
        let mut rng = substream(seed, Substream::Csi);
        let part_std = noise_std / std::f64::consts::SQRT_2;
        for s in &mut samples {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *s += Complex64::new(re * part_std, im * part_std);
        }
    }

    CsiFrame::new(geometry.clone(), samples, 0.0)
}

/// `|P(theta, tau)|` sampled on a rectangular grid, row-major `[aoa][tof]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AoaTofSpectrum {
    magnitudes: Vec<f64>,
    pub aoa_grid: Vec<f64>,
    pub tof_grid: Vec<f64>,
}

impl AoaTofSpectrum {
    /// Wraps precomputed magnitudes; used for synthetic spectra and tests.
    pub fn from_magnitudes(aoa_grid: Vec<f64>, tof_grid: Vec<f64>, magnitudes: Vec<f64>) -> Result<Self> {
        check_grid("aoa", &aoa_grid)?;
        check_grid("tof", &tof_grid)?;
        if magnitudes.len() != aoa_grid.len() * tof_grid.len() {
            return Err(invalid("spectrum size does not match grid lengths"));
        }
        if magnitudes.iter().any(|m| !(*m >= 0.0)) {
            return Err(invalid("spectrum magnitudes must be non-negative"));
        }
        Ok(Self {
            magnitudes,
            aoa_grid,
            tof_grid,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.aoa_grid.len(), self.tof_grid.len())
    }

    pub fn get(&self, aoa_bin: usize, tof_bin: usize) -> f64 {
        self.magnitudes[aoa_bin * self.tof_grid.len() + tof_bin]
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn max(&self) -> f64 {
        self.magnitudes.iter().copied().fold(0.0, f64::max)
    }

    /// Bin of the largest magnitude (first one in row-major order on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &m) in self.magnitudes.iter().enumerate() {
            if m > self.magnitudes[best] {
                best = i;
            }
        }
        (best / self.tof_grid.len(), best % self.tof_grid.len())
    }
}

/// Search grid for [`compute_spectrum`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchGrid {
    pub aoa_deg: Vec<f64>,
    pub tof_s: Vec<f64>,
}

impl SearchGrid {
    /// AoA in 1 degree steps over `[0, 180]` and `tof_bins` bin centres
    /// covering the unambiguous delay range `[0, 1/df)`.
    pub fn default_for(geometry: &ArrayGeometry, tof_bins: usize) -> Self {
        let span = geometry.unambiguous_tof();
        Self {
            aoa_deg: (0..=180).map(f64::from).collect(),
            tof_s: (0..tof_bins)
                .map(|j| (j as f64 + 0.5) * span / tof_bins as f64)
                .collect(),
        }
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(invalid(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid(format!("{name} grid must be finite and strictly ascending")));
    }
    Ok(())
}

/// Evaluates `|P(theta, tau)|` over the grid. Rows are computed in parallel.
pub fn compute_spectrum(csi: &CsiFrame, aoa_grid: &[f64], tof_grid: &[f64]) -> Result<AoaTofSpectrum> {
    let geo = &csi.geometry;
    geo.validate()?;
    if csi.samples.len() != geo.len() {
        return Err(invalid("CSI sample count does not match its geometry"));
    }
    check_grid("aoa", aoa_grid)?;
    check_grid("tof", tof_grid)?;

    let (m_count, k_count) = (geo.num_antennas, geo.num_subcarriers);
    let n_tof = tof_grid.len();

    // delay phasors, [k][tof]
    let delay: Vec<Complex64> = (0..k_count)
        .flat_map(|k| {
            tof_grid.iter().map(move |&tau| {
                Complex64::from_polar(1.0, 2.0 * PI * k as f64 * geo.frequency_interval * tau)
            })
        })
        .collect();

    let rows: Vec<Vec<f64>> = aoa_grid
        .par_iter()
        .map(|&theta| {
            let cos_theta = theta.to_radians().cos();
            // beamform across antennas per subcarrier
            let per_subcarrier: Vec<Complex64> = (0..k_count)
                .map(|k| {
                    let step = 2.0 * PI * geo.subcarrier_frequency(k) * geo.element_spacing * cos_theta
                        / SPEED_OF_LIGHT;
                    (0..m_count)
                        .map(|m| csi.samples[m * k_count + k] * Complex64::from_polar(1.0, step * m as f64))
                        .sum()
                })
                .collect();
            (0..n_tof)
                .map(|j| {
                    per_subcarrier
                        .iter()
                        .enumerate()
                        .map(|(k, a)| a * delay[k * n_tof + j])
                        .sum::<Complex64>()
                        .norm()
                })
                .collect()
        })
        .collect();

    Ok(AoaTofSpectrum {
        magnitudes: rows.into_iter().flatten().collect(),
        aoa_grid: aoa_grid.to_vec(),
        tof_grid: tof_grid.to_vec(),
    })
}

/// A local maximum of an [`AoaTofSpectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPeak {
    pub aoa: f64,
    pub tof: f64,
    pub magnitude: f64,
    pub aoa_bin: usize,
    pub tof_bin: usize,
}

/// Returns strict 8-neighbourhood maxima whose magnitude is at least
/// `relative_threshold` times the global maximum, strongest first.
///
/// The global maximum is always reported when non-zero, even on a plateau.
/// An all-zero spectrum yields no peaks.
pub fn pick_peaks(spectrum: &AoaTofSpectrum, relative_threshold: f64) -> Result<Vec<SpectrumPeak>> {
    if !(relative_threshold > 0.0 && relative_threshold <= 1.0) {
        return Err(invalid(format!(
            "relative threshold must lie in (0, 1], got {relative_threshold}"
        )));
    }
    let (rows, cols) = spectrum.dims();
    if rows == 0 || cols == 0 {
        return Err(invalid("spectrum is empty"));
    }
    let global = spectrum.max();
    if global <= 0.0 {
        return Ok(Vec::new());
    }
    let floor = relative_threshold * global;
    let (best_i, best_j) = spectrum.argmax();

    let mut peaks = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            let v = spectrum.get(i, j);
            if v < floor {
                continue;
            }
            let strict = neighbours(i, j, rows, cols).all(|(ni, nj)| spectrum.get(ni, nj) < v);
            if strict || (i, j) == (best_i, best_j) {
                peaks.push(SpectrumPeak {
                    aoa: spectrum.aoa_grid[i],
                    tof: spectrum.tof_grid[j],
                    magnitude: v,
                    aoa_bin: i,
                    tof_bin: j,
                });
            }
        }
    }
    peaks.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    Ok(peaks)
}

fn neighbours(i: usize, j: usize, rows: usize, cols: usize) -> impl Iterator<Item = (usize, usize)> {
    let di = i.saturating_sub(1)..=(i + 1).min(rows - 1);
    di.flat_map(move |a| (j.saturating_sub(1)..=(j + 1).min(cols - 1)).map(move |b| (a, b)))
        .filter(move |&p| p != (i, j))
}

/// A person localised by both arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadioEstimate {
    /// Horizontal AoA in degrees, `[0, 180]` with 90 at broadside.
    pub aoa_h: f64,
    /// Vertical AoA in degrees, same convention.
    pub aoa_v: f64,
    /// Time of flight in seconds.
    pub tof: f64,
    pub magnitude: f64,
    pub identifier: String,
}

/// Pairs horizontal-array and vertical-array peaks that share a ToF.
///
/// Horizontal peaks are visited strongest first; each takes the unused
/// vertical peak with the closest ToF within `tof_tolerance` (ties go to the
/// stronger vertical peak). Unpaired peaks are dropped. Identifiers are
/// sequential: `est-0`, `est-1`, ...
pub fn fuse_axes(
    horizontal_peaks: &[SpectrumPeak],
    vertical_peaks: &[SpectrumPeak],
    tof_tolerance: f64,
) -> Vec<RadioEstimate> {
    let mut order: Vec<usize> = (0..horizontal_peaks.len()).collect();
    order.sort_by(|&a, &b| {
        horizontal_peaks[b]
            .magnitude
            .total_cmp(&horizontal_peaks[a].magnitude)
    });

    let mut used = vec![false; vertical_peaks.len()];
    let mut out = Vec::new();
    for hi in order {
        let h = &horizontal_peaks[hi];
        let mut best: Option<usize> = None;
        for (vi, v) in vertical_peaks.iter().enumerate() {
            let gap = (h.tof - v.tof).abs();
            if used[vi] || gap > tof_tolerance {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    let bgap = (h.tof - vertical_peaks[b].tof).abs();
                    gap < bgap || (gap == bgap && v.magnitude > vertical_peaks[b].magnitude)
                }
            };
            if better {
                best = Some(vi);
            }
        }
        if let Some(vi) = best {
            used[vi] = true;
            let v = &vertical_peaks[vi];
            out.push(RadioEstimate {
                aoa_h: h.aoa,
                aoa_v: v.aoa,
                tof: 0.5 * (h.tof + v.tof),
                magnitude: 0.5 * (h.magnitude + v.magnitude),
                identifier: format!("est-{}", out.len()),
            });
        }
    }
    out
}

/// Settings for [`localize_pair`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalizerConfig {
    /// Explicit AoA grid in degrees; defaults to 0..=180 in 1 degree steps.
    pub aoa_grid: Option<Vec<f64>>,
    /// Number of ToF bins over the unambiguous range.
    pub tof_bins: usize,
    /// Peaks below this fraction of the strongest one are ignored.
    pub relative_threshold: f64,
    /// Maximum ToF disagreement, in seconds, between paired peaks.
    pub tof_tolerance: f64,
    /// Absolute spectrum magnitude below which peaks are ignored, so a frame
    /// with nobody in it yields no estimates. 0 disables the floor.
    pub min_magnitude: f64,
}

impl Default for LocalizerConfig {
    fn default() -> Self {
        Self {
            aoa_grid: None,
            tof_bins: 64,
            relative_threshold: 0.5,
            tof_tolerance: 5e-9,
            min_magnitude: 0.0,
        }
    }
}

impl LocalizerConfig {
    pub fn grid_for(&self, geometry: &ArrayGeometry) -> SearchGrid {
        let mut grid = SearchGrid::default_for(geometry, self.tof_bins);
        if let Some(aoa) = &self.aoa_grid {
            grid.aoa_deg = aoa.clone();
        }
        grid
    }
}

/// Runs spectrum search on a horizontal and a vertical frame and fuses the
/// resulting peaks into per-person estimates.
pub fn localize_pair(
    horizontal: &CsiFrame,
    vertical: &CsiFrame,
    config: &LocalizerConfig,
) -> Result<Vec<RadioEstimate>> {
    if horizontal.geometry.orientation != Orientation::Horizontal
        || vertical.geometry.orientation != Orientation::Vertical
    {
        return Err(invalid("localize_pair expects one horizontal and one vertical frame"));
    }
    let peaks = |frame: &CsiFrame| -> Result<Vec<SpectrumPeak>> {
        let grid = config.grid_for(&frame.geometry);
        let spectrum = compute_spectrum(frame, &grid.aoa_deg, &grid.tof_s)?;
        let mut peaks = pick_peaks(&spectrum, config.relative_threshold)?;
        peaks.retain(|p| p.magnitude >= config.min_magnitude);
        Ok(peaks)
    };
    Ok(fuse_axes(&peaks(horizontal)?, &peaks(vertical)?, config.tof_tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn geometry() -> ArrayGeometry {
        ArrayGeometry::half_wavelength(8, 32, 5.18e9, 20e6, Orientation::Horizontal)
    }

    /// Direct double sum over antennas and subcarriers, no factoring.
    fn brute_force_magnitude(csi: &CsiFrame, theta: f64, tau: f64) -> f64 {
        let g = &csi.geometry;
        let mut acc = Complex64::new(0.0, 0.0);
        for m in 0..g.num_antennas {
            for k in 0..g.num_subcarriers {
                let fk = g.base_frequency + k as f64 * g.frequency_interval;
                let phase = 2.0 * PI * fk * m as f64 * g.element_spacing * theta.to_radians().cos()
                    / SPEED_OF_LIGHT
                    + 2.0 * PI * k as f64 * g.frequency_interval * tau;
                acc += csi.sample(m, k) * Complex64::new(phase.cos(), phase.sin());
            }
        }
        acc.norm()
    }

    fn grid(g: &ArrayGeometry) -> SearchGrid {
        SearchGrid::default_for(g, 32)
    }

    #[test]
    fn spectrum_matches_brute_force() {
        let g = geometry();
        let csi = synthesize_csi(
            &[Target { aoa_deg: 70.0, tof_s: 11e-9, amplitude: 1.0 }, Target { aoa_deg: 120.0, tof_s: 31e-9, amplitude: 0.7 }],
            &g,
            0.05,
            3,
        )
        .unwrap();
        let aoa: Vec<f64> = (0..=18).map(|i| i as f64 * 10.0).collect();
        let tof: Vec<f64> = (0..10).map(|j| (j as f64 + 0.5) * 5e-9).collect();
        let s = compute_spectrum(&csi, &aoa, &tof).unwrap();
        for (i, &theta) in aoa.iter().enumerate() {
            for (j, &tau) in tof.iter().enumerate() {
                let want = brute_force_magnitude(&csi, theta, tau);
                assert!((s.get(i, j) - want).abs() <= 1e-9 * want.max(1.0));
            }
        }
    }

    #[test]
    fn single_target_peak_at_planted_bin() {
        let g = geometry();
        let sg = grid(&g);
        let (ti, tj) = (90, 4);
        let target = Target { aoa_deg: sg.aoa_deg[ti], tof_s: sg.tof_s[tj], amplitude: 1.0 };
        let csi = synthesize_csi(&[target], &g, 0.0, 0).unwrap();
        let s = compute_spectrum(&csi, &sg.aoa_deg, &sg.tof_s).unwrap();
        // oracle: scan every bin with the unfactored sum
        let mut best = (0, 0, f64::MIN);
        for (i, &a) in sg.aoa_deg.iter().enumerate() {
            for (j, &t) in sg.tof_s.iter().enumerate() {
                let v = brute_force_magnitude(&csi, a, t);
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        assert_eq!((best.0, best.1), (ti, tj));
        assert_eq!(s.argmax(), (ti, tj));
        let expected = (g.num_antennas * g.num_subcarriers) as f64;
        assert!((s.get(ti, tj) - expected).abs() < 1e-6);
    }

    #[test]
    fn zero_targets_give_zero_samples() {
        let csi = synthesize_csi(&[], &geometry(), 0.0, 1).unwrap();
        assert!(csi.samples().iter().all(|s| s.norm() == 0.0));
        let sg = grid(&csi.geometry);
        let s = compute_spectrum(&csi, &sg.aoa_deg, &sg.tof_s).unwrap();
        assert!(s.magnitudes().iter().all(|&m| m == 0.0));
        assert!(pick_peaks(&s, 0.5).unwrap().is_empty());
    }

    #[test]
    fn two_separated_targets_give_two_strong_peaks() {
        let g = geometry();
        let sg = grid(&g);
        let targets = [
            Target { aoa_deg: sg.aoa_deg[60], tof_s: sg.tof_s[5], amplitude: 1.0 },
            Target { aoa_deg: sg.aoa_deg[130], tof_s: sg.tof_s[20], amplitude: 0.9 },
        ];
        let csi = synthesize_csi(&targets, &g, 0.0, 0).unwrap();
        let s = compute_spectrum(&csi, &sg.aoa_deg, &sg.tof_s).unwrap();
        let peaks = pick_peaks(&s, 0.5).unwrap();
        let bins: Vec<_> = peaks.iter().map(|p| (p.aoa_bin, p.tof_bin)).collect();
        assert_eq!(bins, vec![(60, 5), (130, 20)]);
    }

    #[test]
    fn scaling_is_linear() {
        let g = geometry();
        let csi = synthesize_csi(&[Target { aoa_deg: 40.0, tof_s: 7e-9, amplitude: 1.3 }], &g, 0.2, 9).unwrap();
        let sg = grid(&g);
        let a = compute_spectrum(&csi, &sg.aoa_deg, &sg.tof_s).unwrap();
        let b = compute_spectrum(&csi.scaled(2.0), &sg.aoa_deg, &sg.tof_s).unwrap();
        for (x, y) in a.magnitudes().iter().zip(b.magnitudes()) {
            assert!((2.0 * x - y).abs() <= 1e-9 * y.max(1e-12));
        }
    }

    #[test]
    fn synthesis_is_deterministic() {
        let g = geometry();
        let t = [Target { aoa_deg: 40.0, tof_s: 7e-9, amplitude: 1.0 }];
        assert_eq!(synthesize_csi(&t, &g, 0.3, 5).unwrap(), synthesize_csi(&t, &g, 0.3, 5).unwrap());
        assert_ne!(synthesize_csi(&t, &g, 0.3, 5).unwrap(), synthesize_csi(&t, &g, 0.3, 6).unwrap());
    }

    #[test]
    fn invalid_geometry_and_inputs() {
        let mut g = geometry();
        g.num_antennas = 0;
        assert!(matches!(synthesize_csi(&[], &g, 0.0, 0), Err(Error::InvalidGeometry(_))));
        let g = geometry();
        let bad_tof = [Target { aoa_deg: 10.0, tof_s: 0.0, amplitude: 1.0 }];
        assert!(synthesize_csi(&bad_tof, &g, 0.0, 0).is_err());
        assert!(CsiFrame::new(g.clone(), vec![Complex64::new(0.0, 0.0); 3], 0.0).is_err());
        let csi = synthesize_csi(&[], &g, 0.0, 0).unwrap();
        assert!(compute_spectrum(&csi, &[], &[1e-9]).is_err());
        assert!(compute_spectrum(&csi, &[2.0, 1.0], &[1e-9]).is_err());
    }

    fn spectrum_from(rows: usize, cols: usize, values: &[((usize, usize), f64)]) -> AoaTofSpectrum {
        let mut mags = vec![0.0; rows * cols];
        for &((i, j), v) in values {
            mags[i * cols + j] = v;
        }
        AoaTofSpectrum::from_magnitudes(
            (0..rows).map(|i| i as f64).collect(),
            (0..cols).map(|j| (j + 1) as f64 * 1e-9).collect(),
            mags,
        )
        .unwrap()
    }

    #[test]
    fn single_planted_peak_is_picked() {
        let s = spectrum_from(6, 6, &[((2, 3), 1.0), ((2, 4), 0.6), ((3, 3), 0.55)]);
        let peaks = pick_peaks(&s, 0.5).unwrap();
        assert_eq!(peaks.len(), 1);
        assert_eq!((peaks[0].aoa_bin, peaks[0].tof_bin, peaks[0].magnitude), (2, 3, 1.0));
    }

    #[test]
    fn weak_peak_is_below_half_maximum() {
        let s = spectrum_from(8, 8, &[((1, 1), 1.0), ((6, 6), 0.4)]);
        let peaks = pick_peaks(&s, 0.5).unwrap();
        assert_eq!(peaks.len(), 1);
        assert_eq!(peaks[0].magnitude, 1.0);
        assert_eq!(pick_peaks(&s, 0.3).unwrap().len(), 2);
    }

    #[test]
    fn plateau_still_reports_global_max() {
        let s = spectrum_from(3, 3, &[((1, 1), 1.0), ((1, 2), 1.0)]);
        let peaks = pick_peaks(&s, 0.5).unwrap();
        assert_eq!(peaks.len(), 1);
        assert_eq!((peaks[0].aoa_bin, peaks[0].tof_bin), (1, 1));
    }

    #[test]
    fn threshold_must_be_in_unit_interval() {
        let s = spectrum_from(2, 2, &[((0, 0), 1.0)]);
        assert!(pick_peaks(&s, 0.0).is_err());
        assert!(pick_peaks(&s, 1.5).is_err());
        assert_eq!(pick_peaks(&s, 1.0).unwrap().len(), 1);
    }

    fn peak(aoa: f64, tof: f64, magnitude: f64) -> SpectrumPeak {
        SpectrumPeak { aoa, tof, magnitude, aoa_bin: 0, tof_bin: 0 }
    }

    #[test]
    fn fuse_unique_pair() {
        let est = fuse_axes(&[peak(90.0, 30e-9, 1.0)], &[peak(85.0, 30e-9, 1.0)], 5e-9);
        assert_eq!(est.len(), 1);
        assert_eq!((est[0].aoa_h, est[0].aoa_v, est[0].tof), (90.0, 85.0, 30e-9));
        assert_eq!(est[0].identifier, "est-0");
    }

    #[test]
    fn fuse_rejects_tof_mismatch() {
        assert!(fuse_axes(&[peak(90.0, 30e-9, 1.0)], &[peak(85.0, 50e-9, 1.0)], 5e-9).is_empty());
        assert!(fuse_axes(&[], &[peak(85.0, 50e-9, 1.0)], 5e-9).is_empty());
    }

    #[test]
    fn fuse_stronger_horizontal_wins() {
        let h = [peak(60.0, 30e-9, 0.5), peak(100.0, 30e-9, 0.9)];
        let est = fuse_axes(&h, &[peak(80.0, 30e-9, 1.0)], 5e-9);
        assert_eq!(est.len(), 1);
        assert_eq!(est[0].aoa_h, 100.0);
    }

    #[test]
    fn localize_pair_recovers_both_angles() {
        let h_geo = geometry();
        let v_geo = ArrayGeometry { orientation: Orientation::Vertical, ..geometry() };
        let sg = grid(&h_geo);
        let tof = sg.tof_s[6];
        let h = synthesize_csi(&[Target { aoa_deg: 100.0, tof_s: tof, amplitude: 1.0 }], &h_geo, 0.0, 0).unwrap();
        let v = synthesize_csi(&[Target { aoa_deg: 80.0, tof_s: tof, amplitude: 1.0 }], &v_geo, 0.0, 0).unwrap();
        let cfg = LocalizerConfig { tof_bins: 32, ..Default::default() };
        let est = localize_pair(&h, &v, &cfg).unwrap();
        assert_eq!(est.len(), 1);
        assert_eq!((est[0].aoa_h, est[0].aoa_v), (100.0, 80.0));
        assert!((est[0].tof - tof).abs() < 1e-15);
        assert!(localize_pair(&v, &h, &cfg).is_err());
    }
}
