//! Range-Doppler image formation.
//!
//! Fast time is transformed with a forward DFT (beat frequency → range),
//! slow time with the conjugate kernel so that a receding scatterer
//! (`f_D = 2 ṙ / λ > 0`) lands on a positive Doppler bin. Both axes are
//! shifted to put zero in the middle. The complex matrix holds the raw DFT
//! `χ`; displayed power is `|χ|² / (M N)` in dBm, which keeps a point return's
//! coherent gain and puts the receiver-noise floor at `N_p`.

mod export;

use ndarray::Array2;
use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::echo::RawDataCube;
use crate::kinematics::FrameSet;
use crate::scalar::Real;

pub use export::{
    power_to_u16, read_f32, read_f32_header, read_png, write_f32, write_png, F32Header, F32_FORMAT_VERSION,
};

/// Lowest displayable power; `|χ| = 0` maps here.
pub const POWER_FLOOR_DBM: f64 = -300.0;

/// Default |ω| below which no cross-range axis is attached (rad/s).
pub const OMEGA_MIN: f64 = 0.05;

/// Display window for noisy and ideal images (dBm).
pub const NOISY_WINDOW: (f64, f64) = (-90.0, -40.0);

/// Display window for cluttered images (dBm).
pub const CLUTTER_WINDOW: (f64, f64) = (-120.0, -40.0);

#[derive(Debug, Error)]
pub enum ImagingError {
    #[error("CPI {0} has no predecessor; ω is undefined")]
    NoPreviousYaw(usize),
    #[error("CPI {p} is outside the yaw track of {len} CPIs")]
    OutOfTrack { p: usize, len: usize },
    #[error("dynamic range floor {floor} dBm is not below ceiling {ceil} dBm")]
    BadWindow { floor: f64, ceil: f64 },
    #[error("image has no complex data")]
    NoComplexData,
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    None,
    Hann,
}

/// What was done to an image after formation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Corruption {
    #[default]
    Ideal,
    Noise { snr_db: f64 },
    Clutter { wind_mps: f64, seed: u64 },
}

impl Corruption {
    /// Directory name used by the dataset layout.
    pub fn dir_name(&self) -> String {
        match self {
            Corruption::Ideal => "ideal".to_string(),
            Corruption::Noise { snr_db } => format!("snr_{}", fmt_level(*snr_db)),
            Corruption::Clutter { wind_mps, .. } => format!("wind_{}", fmt_level(*wind_mps)),
        }
    }
}

fn fmt_level(x: f64) -> String {
    let s = format!("{x}");
    s.replace('-', "m").replace('.', "p")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ImageMeta {
    pub target: String,
    pub route: String,
    pub cpi_index: usize,
    pub corruption: Corruption,
}

/// Why an image has no cross-range axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossRangeStatus {
    Mapped,
    /// |ω| at or below the gate.
    SlowRotation,
    /// First CPI: no previous yaw.
    Undefined,
}

/// Range-Doppler image. Matrices are `M × N`: row = Doppler bin, column =
/// range bin.
#[derive(Debug, Clone)]
pub struct IsarImage<T: Real> {
    /// Power in dBm.
    pub power: Array2<T>,
    pub complex: Option<Array2<Complex<T>>>,
    /// Range of each column (m), increasing.
    pub range_axis: Vec<f64>,
    /// Doppler of each row (Hz), increasing.
    pub doppler_axis: Vec<f64>,
    pub crossrange_axis: Option<Vec<f64>>,
    pub cross_range: CrossRangeStatus,
    pub omega: Option<f64>,
    pub crp: f64,
    pub wavelength: f64,
    pub dynamic_range: Option<(f64, f64)>,
    pub meta: ImageMeta,
}

impl<T: Real> IsarImage<T> {
    pub fn num_doppler(&self) -> usize {
        self.doppler_axis.len()
    }

    pub fn num_range(&self) -> usize {
        self.range_axis.len()
    }

    /// Index of the zero-Doppler row.
    pub fn zero_doppler_row(&self) -> usize {
        self.num_doppler() / 2
    }

    /// Index of the CRP column.
    pub fn crp_column(&self) -> usize {
        self.num_range() / 2
    }

    /// Linear power `|χ|² / (M N)` (W) from the complex data.
    pub fn linear_power(&self) -> Option<Array2<f64>> {
        let scale = 1.0 / (self.num_doppler() * self.num_range()) as f64;
        self.complex.as_ref().map(|c| c.mapv(|z| z.norm_sqr().as_f64() * scale))
    }

    /// Recomputes `power` from `complex`. Clamping is reapplied if set.
    pub fn refresh_power(&mut self) {
        if let Some(c) = &self.complex {
            self.power = power_dbm(c);
            if let Some((lo, hi)) = self.dynamic_range {
                clip(&mut self.power, lo, hi);
            }
        }
    }

    /// Position (row, column) of the brightest pixel.
    pub fn peak(&self) -> (usize, usize) {
        let mut best = (0, 0);
        let mut val = T::lit(f64::NEG_INFINITY);
        for ((m, n), &p) in self.power.indexed_iter() {
            if p > val {
                val = p;
                best = (m, n);
            }
        }
        best
    }
}

/// Forward DFT along fast time, conjugate DFT along slow time, both shifted.
pub fn form_image<T: Real>(cube: &RawDataCube<T>, window: Window) -> IsarImage<T> {
    let (m, n) = cube.data.dim();
    let mut data: Vec<Complex<T>> = cube.data.iter().copied().collect();
    if window == Window::Hann {
        let wm = hann::<T>(m);
        let wn = hann::<T>(n);
        for (i, row) in data.chunks_mut(n).enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = *v * (wm[i] * wn[j]);
            }
        }
    }
    let mut planner = FftPlanner::<T>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(m);
    let mut scratch = vec![Complex::default(); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
    for row in data.chunks_mut(n) {
        fwd.process_with_scratch(row, &mut scratch);
    }
    let mut col = vec![Complex::default(); m];
    for j in 0..n {
        for i in 0..m {
            col[i] = data[i * n + j];
        }
        inv.process_with_scratch(&mut col, &mut scratch);
        for i in 0..m {
            data[i * n + j] = col[i];
        }
    }
    let (hm, hn) = (m / 2, n / 2);
    let complex = Array2::from_shape_fn((m, n), |(i, j)| {
        data[((i + m - hm) % m) * n + (j + n - hn) % n]
    });
    let params = &cube.params;
    let bin = params.range_bin_m();
    let range_axis = (0..n).map(|j| cube.crp + (j as f64 - hn as f64) * bin).collect();
    let df = params.doppler_bin_hz();
    let doppler_axis = (0..m).map(|i| (i as f64 - hm as f64) * df).collect();
    IsarImage {
        power: power_dbm(&complex),
        complex: Some(complex),
        range_axis,
        doppler_axis,
        crossrange_axis: None,
        cross_range: CrossRangeStatus::Undefined,
        omega: None,
        crp: cube.crp,
        wavelength: params.wavelength,
        dynamic_range: None,
        meta: ImageMeta { cpi_index: cube.cpi_index, ..ImageMeta::default() },
    }
}

fn hann<T: Real>(len: usize) -> Vec<T> {
    if len < 2 {
        return vec![T::one(); len];
    }
    (0..len)
        .map(|i| T::lit(0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (len - 1) as f64).cos()))
        .collect()
}

/// `10 log10(|χ|² / (M N) / 1 mW)`, floored at [`POWER_FLOOR_DBM`].
pub fn power_dbm<T: Real>(complex: &Array2<Complex<T>>) -> Array2<T> {
    let (m, n) = complex.dim();
    let scale = 1.0 / (m * n) as f64 / 1e-3;
    complex.mapv(|z| {
        let p = z.norm_sqr().as_f64() * scale;
        T::lit(if p > 0.0 { (10.0 * p.log10()).max(POWER_FLOOR_DBM) } else { POWER_FLOOR_DBM })
    })
}

fn clip<T: Real>(power: &mut Array2<T>, lo: f64, hi: f64) {
    let (lo, hi) = (T::lit(lo), T::lit(hi));
    power.mapv_inplace(|p| p.max(lo).min(hi));
}

/// Clips power to `[floor_dbm, ceil_dbm]` and records the window.
pub fn clamp_dynamic_range<T: Real>(
    mut image: IsarImage<T>,
    floor_dbm: f64,
    ceil_dbm: f64,
) -> Result<IsarImage<T>, ImagingError> {
    if !(floor_dbm < ceil_dbm) {
        return Err(ImagingError::BadWindow { floor: floor_dbm, ceil: ceil_dbm });
    }
    clip(&mut image.power, floor_dbm, ceil_dbm);
    image.dynamic_range = Some((floor_dbm, ceil_dbm));
    Ok(image)
}

/// Vehicle yaw per CPI, `Θ[p]` for `p = 1..`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YawTrack {
    pub yaw: Vec<f64>,
}

impl YawTrack {
    /// Unwrapped yaw sampled at the middle of each of `count` CPIs.
    pub fn from_frames<T: Real>(frames: &FrameSet<T>, t_cpi: f64, count: usize) -> Self {
        let yaw = (1..=count)
            .map(|p| frames.yaw_at(T::lit((p as f64 - 0.5) * t_cpi)).as_f64())
            .collect();
        YawTrack { yaw }
    }

    pub fn len(&self) -> usize {
        self.yaw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.yaw.is_empty()
    }
}

/// `ω = (Θ[p] − Θ[p−1]) / T_CPI` for 1-based `p`.
pub fn estimate_omega(yaw: &YawTrack, p: usize, t_cpi: f64) -> Result<f64, ImagingError> {
    if p < 2 {
        return Err(ImagingError::NoPreviousYaw(p));
    }
    if p > yaw.len() {
        return Err(ImagingError::OutOfTrack { p, len: yaw.len() });
    }
    Ok((yaw.yaw[p - 1] - yaw.yaw[p - 2]) / t_cpi)
}

/// Attaches `cr = f_D λ / (2ω)` when `|ω| > omega_min`; pixels are untouched.
pub fn doppler_to_crossrange<T: Real>(mut image: IsarImage<T>, omega: f64, omega_min: f64) -> IsarImage<T> {
    image.omega = Some(omega);
    if omega.abs() > omega_min {
        let k = image.wavelength / (2.0 * omega);
        image.crossrange_axis = Some(image.doppler_axis.iter().map(|f| f * k).collect());
        image.cross_range = CrossRangeStatus::Mapped;
    } else {
        image.crossrange_axis = None;
        image.cross_range = CrossRangeStatus::SlowRotation;
    }
    image
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echo::{RadarConfig, RadarParams};

    fn cube_of(data: Array2<Complex<f64>>) -> RawDataCube<f64> {
        let (m, n) = data.dim();
        let params = RadarParams::from_config(&RadarConfig {
            pri_s: Some(1e-4),
            cpi_s: 1e-4 * m as f64,
            range_span_m: n as f64 / (2.0 * 60e12 * 1e-4) * crate::scalar::SPEED_OF_LIGHT,
            ..RadarConfig::default()
        })
        .unwrap();
        assert_eq!((params.num_pri, params.num_fast), (m, n));
        RawDataCube {
            data,
            crp: 30.0,
            center_doppler_removed: true,
            cpi_index: 2,
            t_start: 0.1,
            params,
            stats: Default::default(),
        }
    }

    #[test]
    fn all_ones_peaks_at_dc() {
        let img = form_image(&cube_of(Array2::from_elem((16, 15), Complex::new(1.0, 0.0))), Window::None);
        let (m, n) = img.peak();
        assert_eq!(img.doppler_axis[m], 0.0);
        assert_eq!(img.range_axis[n], 30.0);
        let c = img.complex.as_ref().unwrap();
        assert!((c[[m, n]].norm() - 240.0).abs() < 1e-9);
        let others: f64 = c.iter().map(|z| z.norm()).sum::<f64>() - c[[m, n]].norm();
        assert!(others < 1e-9);
    }

    #[test]
    fn clamp_examples() {
        let mut img = form_image(&cube_of(Array2::from_elem((4, 4), Complex::new(1.0, 0.0))), Window::None);
        img.power.fill(-100.0);
        img.power[[0, 0]] = -40.0;
        img.power[[0, 1]] = -110.0;
        let cl = clamp_dynamic_range(img.clone(), CLUTTER_WINDOW.0, CLUTTER_WINDOW.1).unwrap();
        assert_eq!(cl.power[[0, 1]], -110.0);
        let no = clamp_dynamic_range(img, NOISY_WINDOW.0, NOISY_WINDOW.1).unwrap();
        assert_eq!(no.power[[0, 0]], -40.0);
        assert!(no.power.iter().skip(1).all(|&p| p == -90.0));
        assert_eq!(no.dynamic_range, Some((-90.0, -40.0)));
    }

    #[test]
    fn omega_examples() {
        let track = YawTrack { yaw: vec![1.0, 1.0, 1.05] };
        assert_eq!(estimate_omega(&track, 2, 0.1).unwrap(), 0.0);
        assert!((estimate_omega(&track, 3, 0.1).unwrap() - 0.5).abs() < 1e-12);
        assert!(matches!(estimate_omega(&track, 1, 0.1), Err(ImagingError::NoPreviousYaw(1))));
    }

    #[test]
    fn crossrange_relabels_only() {
        let img = form_image(&cube_of(Array2::from_elem((8, 5), Complex::new(0.5, 0.1))), Window::None);
        let omega = img.wavelength / 2.0;
        let mapped = doppler_to_crossrange(img.clone(), omega, 1e-4);
        assert_eq!(mapped.power, img.power);
        let cr = mapped.crossrange_axis.clone().unwrap();
        for (a, b) in cr.iter().zip(&img.doppler_axis) {
            assert!((a - b).abs() < 1e-12);
        }
        let doubled = doppler_to_crossrange(img.clone(), 2.0 * omega, 1e-4);
        for (a, b) in doubled.crossrange_axis.unwrap().iter().zip(&cr) {
            assert!((a - 0.5 * b).abs() < 1e-12);
        }
        let slow = doppler_to_crossrange(img, 0.01, OMEGA_MIN);
        assert!(slow.crossrange_axis.is_none());
        assert_eq!(slow.cross_range, CrossRangeStatus::SlowRotation);
    }

    #[test]
    fn corruption_dir_names() {
        assert_eq!(Corruption::Ideal.dir_name(), "ideal");
        assert_eq!(Corruption::Noise { snr_db: -5.0 }.dir_name(), "snr_m5");
        assert_eq!(Corruption::Clutter { wind_mps: 7.5, seed: 0 }.dir_name(), "wind_7p5");
    }
}
