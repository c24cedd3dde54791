//! Ground and wind clutter injected as complex speckle into formed images.
//!
//! Every range bin gets an exponentially distributed surface coefficient
//! `σ⁰`, which sets the ground return
//! `C_0[r] = P G_t G_r σ⁰ θ_BW δr sec ψ / ((4π)² r³)`. Wind spreads that
//! power across Doppler with the low-pass factor `[1 + |f_D / Δf_D|^s]⁻¹`.
//! Each pixel then receives a voltage of that power with a uniform random
//! phase.

use ndarray::Array2;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::echo::RadarParams;
use crate::imaging::{Corruption, IsarImage};
use crate::rng::{stream, Domain};
use crate::scalar::{db_to_linear, Real, SPEED_OF_LIGHT};

/// Asphalt at millimetre wave.
pub const SIGMA0_MEAN_DB: f64 = -15.0;

/// Wind speeds of the dataset ladder (m/s).
pub const WIND_LADDER: [f64; 4] = [2.5, 5.0, 7.5, 10.0];

#[derive(Debug, Error, PartialEq)]
pub enum ClutterError {
    #[error("invalid clutter parameters: {0}")]
    Invalid(String),
    #[error("clutter needs the complex image")]
    NoComplexData,
}

/// User-facing clutter settings. Missing geometry comes from the radar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClutterConfig {
    pub sigma0_mean_db: f64,
    pub beamwidth_deg: Option<f64>,
    pub radar_height_m: Option<f64>,
    pub seed: u64,
}

impl Default for ClutterConfig {
    fn default() -> Self {
        ClutterConfig { sigma0_mean_db: SIGMA0_MEAN_DB, beamwidth_deg: None, radar_height_m: None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClutterParams {
    pub sigma0_mean_db: f64,
    /// Mean wind speed `U` (m/s).
    pub wind_mps: f64,
    /// `θ_BW` (rad).
    pub beamwidth: f64,
    pub radar_height: f64,
    /// Patch depth `δr` (m).
    pub range_resolution: f64,
    pub seed: u64,
}

impl ClutterParams {
    pub fn new(config: &ClutterConfig, radar: &RadarParams, wind_mps: f64) -> Result<Self, ClutterError> {
        let p = ClutterParams {
            sigma0_mean_db: config.sigma0_mean_db,
            wind_mps,
            beamwidth: config.beamwidth_deg.map(f64::to_radians).unwrap_or(radar.beamwidth),
            radar_height: config.radar_height_m.unwrap_or(radar.radar_position[2]),
            range_resolution: radar.bandwidth_resolution_m(),
            seed: config.seed,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ClutterError> {
        let bad = |m: String| Err(ClutterError::Invalid(m));
        if !(self.wind_mps >= 0.0 && self.wind_mps.is_finite()) {
            return bad(format!("wind speed must be ≥ 0, got {}", self.wind_mps));
        }
        if !(self.range_resolution > 0.0) {
            return bad(format!("range resolution must be > 0, got {}", self.range_resolution));
        }
        if !(self.radar_height > 0.0) {
            return bad(format!("radar height must be > 0, got {}", self.radar_height));
        }
        if !(self.beamwidth >= 0.0) {
            return bad(format!("beamwidth must be ≥ 0, got {}", self.beamwidth));
        }
        if !self.sigma0_mean_db.is_finite() {
            return bad("sigma0_mean_db must be finite".into());
        }
        Ok(())
    }

    pub fn sigma0_mean(&self) -> f64 {
        db_to_linear(self.sigma0_mean_db)
    }
}

/// One exponential `σ⁰` draw per range bin, keyed by `(seed, image_key, bin)`.
pub fn sample_sigma0(params: &ClutterParams, image_key: u64, bins: usize) -> Vec<f64> {
    let exp = Exp::new(1.0 / params.sigma0_mean()).expect("positive mean");
    (0..bins)
        .into_par_iter()
        .map(|b| exp.sample(&mut stream(params.seed, Domain::ClutterSigma0, image_key, b as u64)))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeProfile {
    /// `C_0[r]` (W); zero where skipped.
    pub power: Vec<f64>,
    /// Bins with `r ≤ radar_height`, which have no ground patch.
    pub skipped: Vec<usize>,
}

/// Ground clutter power per range bin.
pub fn clutter_range_profile(
    params: &ClutterParams,
    radar: &RadarParams,
    range_axis: &[f64],
    sigma0: &[f64],
) -> RangeProfile {
    assert_eq!(range_axis.len(), sigma0.len(), "one σ⁰ per range bin");
    let k = radar.tx_power * radar.tx_gain * radar.rx_gain * params.beamwidth * params.range_resolution
        / (16.0 * std::f64::consts::PI.powi(2));
    let mut skipped = Vec::new();
    let power = range_axis
        .iter()
        .zip(sigma0)
        .enumerate()
        .map(|(i, (&r, &s0))| {
            if r <= params.radar_height {
                skipped.push(i);
                return 0.0;
            }
            let sec_psi = 1.0 / (params.radar_height / r).asin().cos();
            k * s0 * sec_psi / (r * r * r)
        })
        .collect();
    RangeProfile { power, skipped }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DopplerShape {
    /// Spectral exponent `s`; zero when wind is off.
    pub exponent: f64,
    /// `Δf_D` (Hz); zero when wind is off.
    pub width_hz: f64,
    /// Factor per Doppler bin.
    pub factor: Vec<f64>,
}

/// `Δf_D = 1.23 (3.2 / λ) U^1.3` with λ in metres.
pub fn doppler_width(wind_mps: f64, fc_hz: f64) -> f64 {
    1.23 * (3.2 / (SPEED_OF_LIGHT / fc_hz)) * wind_mps.powf(1.3)
}

/// `s = 2 (U + 2) / (U + 1) · (100 / (2π f_c))^0.2` with `f_c` in GHz.
pub fn doppler_exponent(wind_mps: f64, fc_hz: f64) -> f64 {
    let f_ghz = fc_hz * 1e-9;
    2.0 * (wind_mps + 2.0) / (wind_mps + 1.0) * (100.0 / (2.0 * std::f64::consts::PI * f_ghz)).powf(0.2)
}

/// Low-pass Doppler factor. With no wind only the 0 Hz bin keeps power.
pub fn doppler_shape(wind_mps: f64, fc_hz: f64, doppler_axis: &[f64]) -> DopplerShape {
    if wind_mps <= 0.0 {
        let factor = doppler_axis.iter().map(|&f| if f == 0.0 { 1.0 } else { 0.0 }).collect();
        return DopplerShape { exponent: 0.0, width_hz: 0.0, factor };
    }
    let s = doppler_exponent(wind_mps, fc_hz);
    let w = doppler_width(wind_mps, fc_hz);
    let factor = doppler_axis.iter().map(|&f| 1.0 / (1.0 + (f / w).abs().powf(s))).collect();
    DopplerShape { exponent: s, width_hz: w, factor }
}

/// Clutter power for every pixel of one image.
#[derive(Debug, Clone, PartialEq)]
pub struct ClutterField {
    /// `C[f_D, r]` (W), rows = Doppler.
    pub power: Array2<f64>,
    pub range_profile: RangeProfile,
    pub shape: DopplerShape,
    pub sigma0: Vec<f64>,
}

impl ClutterField {
    pub fn new(
        params: &ClutterParams,
        radar: &RadarParams,
        range_axis: &[f64],
        doppler_axis: &[f64],
        image_key: u64,
    ) -> Self {
        let sigma0 = sample_sigma0(params, image_key, range_axis.len());
        let range_profile = clutter_range_profile(params, radar, range_axis, &sigma0);
        let shape = doppler_shape(params.wind_mps, radar.carrier_freq, doppler_axis);
        let power = Array2::from_shape_fn((doppler_axis.len(), range_axis.len()), |(m, n)| {
            shape.factor[m] * range_profile.power[n]
        });
        ClutterField { power, range_profile, shape, sigma0 }
    }
}

/// Adds `sqrt(C M N) e^{jφ}` to every pixel of `χ`, so the displayed power
/// `|χ|² / (M N)` of clutter alone is `C`. Phases are keyed by
/// `(seed, image_key, range bin)`.
pub fn inject_field<T: Real>(
    mut image: IsarImage<T>,
    field: &ClutterField,
    seed: u64,
    image_key: u64,
) -> Result<IsarImage<T>, ClutterError> {
    let chi = image.complex.as_mut().ok_or(ClutterError::NoComplexData)?;
    let (m, n) = chi.dim();
    assert_eq!(field.power.dim(), (m, n), "clutter field shape");
    let scale = (m * n) as f64;
    let columns: Vec<Vec<Complex<T>>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(seed, Domain::ClutterPhase, image_key, j as u64);
            (0..m)
                .map(|i| {
                    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    let v = (field.power[[i, j]] * scale).sqrt();
                    Complex::new(T::lit(v * phi.cos()), T::lit(v * phi.sin()))
                })
                .collect()
        })
        .collect();
    for (j, col) in columns.iter().enumerate() {
        for (i, c) in col.iter().enumerate() {
            chi[[i, j]] += *c;
        }
    }
    image.refresh_power();
    Ok(image)
}

/// Builds the field for this image and injects it; metadata records `U` and
/// the seed.
pub fn inject_clutter<T: Real>(
    image: IsarImage<T>,
    params: &ClutterParams,
    radar: &RadarParams,
    image_key: u64,
) -> Result<(IsarImage<T>, ClutterField), ClutterError> {
    params.validate()?;
    if image.complex.is_none() {
        return Err(ClutterError::NoComplexData);
    }
    let field = ClutterField::new(params, radar, &image.range_axis, &image.doppler_axis, image_key);
    let mut out = inject_field(image, &field, params.seed, image_key)?;
    out.meta.corruption = Corruption::Clutter { wind_mps: params.wind_mps, seed: params.seed };
    Ok((out, field))
}

/// Mean power per Doppler bin across range bins, normalised to the 0 Hz bin.
pub fn doppler_profile(power: &Array2<f64>, zero_row: usize) -> Vec<f64> {
    let mut prof: Vec<f64> = power.rows().into_iter().map(|r| r.mean().unwrap_or(0.0)).collect();
    let dc = prof[zero_row];
    if dc > 0.0 {
        prof.iter_mut().for_each(|p| *p /= dc);
    }
    prof
}

/// −3 dB half-width of a normalised, DC-peaked Doppler profile.
///
/// Uses the first crossing of ½ on the positive-frequency side when one
/// exists. Otherwise fits `log(1/P − 1) = a log f + b` over the positive
/// bins and solves for `1/P − 1 = 1`, which reads the width off the roll-off
/// when it lies beyond the Doppler span.
pub fn measure_width(profile: &[f64], doppler_axis: &[f64]) -> Option<f64> {
    let pos: Vec<(f64, f64)> = doppler_axis
        .iter()
        .zip(profile)
        .filter(|(f, _)| **f > 0.0)
        .map(|(&f, &p)| (f, p))
        .collect();
    let mut prev = (0.0, 1.0);
    for &(f, p) in &pos {
        if p <= 0.5 {
            let (f0, p0) = prev;
            return Some(f0 + (p0 - 0.5) / (p0 - p) * (f - f0));
        }
        prev = (f, p);
    }
    let pts: Vec<(f64, f64)> = pos
        .iter()
        .filter(|(_, p)| *p > 0.0 && *p < 1.0 - 1e-9)
        .map(|&(f, p)| (f.ln(), (1.0 / p - 1.0).ln()))
        .collect();
    let (a, b) = linear_fit(&pts)?;
    (a > 0.0).then(|| (-b / a).exp())
}

/// Least-squares slope and intercept.
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (sxx, sxy) = pts
        .iter()
        .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx).powi(2), a.1 + (p.0 - mx) * (p.1 - my)));
    if sxx == 0.0 {
        return None;
    }
    let a = sxy / sxx;
    Some((a, my - a * mx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::echo::RadarConfig;

    fn radar() -> RadarParams {
        RadarParams::from_config(&RadarConfig::default()).unwrap()
    }

    fn params(wind: f64) -> ClutterParams {
        ClutterParams::new(&ClutterConfig::default(), &radar(), wind).unwrap()
    }

    #[test]
    fn width_at_low_wind() {
        let w = doppler_width(2.5, 77e9);
        assert!((w - 3320.0).abs() < 10.0, "{w}");
        assert!((doppler_exponent(2.5, 77e9) - 1.876).abs() < 1e-3);
    }

    #[test]
    fn shape_examples() {
        let axis = [-3000.0, 0.0, doppler_width(5.0, 77e9)];
        let s = doppler_shape(5.0, 77e9, &axis);
        assert_eq!(s.factor[1], 1.0);
        assert!((s.factor[2] - 0.5).abs() < 1e-12);
        let calm = doppler_shape(0.0, 77e9, &axis);
        assert_eq!(calm.factor, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn sigma0_is_deterministic_and_positive() {
        let p = params(2.5);
        let a = sample_sigma0(&p, 3, 500);
        assert_eq!(a, sample_sigma0(&p, 3, 500));
        assert_ne!(a, sample_sigma0(&p, 4, 500));
        assert!(a.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn profile_skips_patches_under_the_radar() {
        let p = params(2.5);
        let prof = clutter_range_profile(&p, &radar(), &[0.2, 0.5, 1.0, 2.0], &[1.0; 4]);
        assert_eq!(prof.skipped, vec![0, 1]);
        assert_eq!(prof.power[0], 0.0);
        assert!(prof.power[2] > prof.power[3]);
        let zero = ClutterParams { beamwidth: 0.0, ..p };
        let prof = clutter_range_profile(&zero, &radar(), &[5.0], &[1.0]);
        assert_eq!(prof.power, vec![0.0]);
    }

    #[test]
    fn invalid_params_rejected() {
        let p = params(2.5);
        assert!(ClutterParams { wind_mps: -1.0, ..p.clone() }.validate().is_err());
        assert!(ClutterParams { range_resolution: 0.0, ..p.clone() }.validate().is_err());
        assert!(ClutterParams { radar_height: 0.0, ..p }.validate().is_err());
    }

    #[test]
    fn width_measurement_both_paths() {
        let axis: Vec<f64> = (-600..600).map(|i| i as f64 * 10.0).collect();
        for u in WIND_LADDER {
            let s = doppler_shape(u, 77e9, &axis);
            let w = measure_width(&s.factor, &axis).unwrap();
            assert!((w / s.width_hz - 1.0).abs() < 1e-3, "U = {u}: {w} vs {}", s.width_hz);
        }
    }
}
