//! Baseband echo synthesis.
//!
//! Each facet is a flat plate with the physical-optics cross section
//! `σ = 4π A² cos²θ / λ² · sinc⁴(k d sinθ)`, weighted by the radar range
//! equation and a per-CPI Bernoulli visibility draw. After dechirping, PRI
//! `m` and fast-time sample `n` of a CPI hold
//!
//! ```text
//! S[m, n] = Σ_b a_b exp(-j 4π (ΔR_b(t_m) - ΔR_b(t_0)) / λ) exp(j 2π κ ΔR_b(t_mid) n / R_span)
//! ```
//!
//! where `ΔR_b` is the facet range minus the reference range (the vehicle
//! center when motion compensation is on, the CRP otherwise). The slow-time
//! phase is the accumulated residual Doppler `-2π ∫ f_D dt`; for constant
//! velocity it reduces to `-2π f_D m T_PRI`. The fast-time delay is held at
//! its value at the middle of the CPI, so scatterers do not migrate across
//! range bins within a CPI.

mod nufft;
mod params;
pub mod scene;

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::Vector3;
use ndarray::Array2;
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kinematics::FrameSet;
use crate::mesh::FacetMesh;
use crate::rng::{self, Domain};
use crate::scalar::{cis, Real};

pub use nufft::{direct_row, smooth_size, Gridder};
pub use params::{noise_power_for_snr, DechirpFactor, RadarConfig, RadarParams, MIN_SIGNAL_DBM};
pub use scene::{AnimatedTarget, Echo, PointScatterer, PointScene, Probes, Scene, Union};

/// Below this |u| the sinc power uses its Taylor series.
pub const SINC_SERIES_LIMIT: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum EchoError {
    #[error("radar config: {0}")]
    Config(String),
    #[error("scatterer coincides with the radar")]
    Coincident,
    #[error("CPI {cpi} spans [{start:.3}, {end:.3}) s but the animation ends at {available:.3} s")]
    OutsideAnimation {
        cpi: usize,
        start: f64,
        end: f64,
        available: f64,
    },
}

/// Aspect angle `θ = arccos |î · n̂|` in [0, π/2], `î` pointing from the radar
/// to the facet.
pub fn aspect_angle<T: Real>(
    normal: &Vector3<T>,
    centroid: &Vector3<T>,
    radar: &Vector3<T>,
) -> Result<T, EchoError> {
    aspect_cos(normal, centroid, radar).map(|c| c.acos()).ok_or(EchoError::Coincident)
}

/// `|cos θ|`, or `None` when the facet is within 1 µm of the radar.
#[inline]
pub fn aspect_cos<T: Real>(
    normal: &Vector3<T>,
    centroid: &Vector3<T>,
    radar: &Vector3<T>,
) -> Option<T> {
    let d = centroid - radar;
    let r = d.norm();
    if !(r >= T::lit(1e-6)) {
        return None;
    }
    Some((d.dot(normal) / r).magnitude().min(T::one()))
}

/// `(sin u / u)⁴`.
#[inline]
pub fn sinc4<T: Real>(u: T) -> T {
    if u.magnitude() < T::lit(SINC_SERIES_LIMIT) {
        let u2 = u * u;
        let s = T::one() - u2 / T::lit(6.0) + u2 * u2 / T::lit(120.0);
        let s2 = s * s;
        s2 * s2
    } else {
        let s = u.sin() / u;
        let s2 = s * s;
        s2 * s2
    }
}

/// Flat-plate cross section (m²).
pub fn facet_rcs<T: Real>(area: T, long_dim: T, aspect: T, wavelength: T, visible: bool) -> T {
    if !visible {
        return T::zero();
    }
    let u = T::two_pi() / wavelength * long_dim * aspect.sin();
    let c = aspect.cos();
    T::lit(4.0) * T::pi() * area * area * c * c / (wavelength * wavelength) * sinc4(u)
}

/// [`facet_rcs`] from `|cos θ|` directly.
#[inline]
pub fn facet_rcs_cos<T: Real>(area: T, long_dim: T, cos: T, wavelength: T) -> T {
    let sin = (T::one() - cos * cos).max(T::zero()).sqrt();
    let u = T::two_pi() / wavelength * long_dim * sin;
    T::lit(4.0) * T::pi() * area * area * cos * cos / (wavelength * wavelength) * sinc4(u)
}

/// Received voltage amplitude `sqrt(P G_t G_r σ λ² / ((4π)³ r⁴))`.
pub fn amplitude<T: Real>(p_tx: T, g_tx: T, g_rx: T, rcs: T, wavelength: T, range: T) -> T {
    let four_pi = T::lit(4.0) * T::pi();
    let r2 = range * range;
    (p_tx * g_tx * g_rx * rcs * wavelength * wavelength / (four_pi * four_pi * four_pi)).sqrt() / r2
}

/// Independent Bernoulli(½) visibility per facet for CPI `cpi`.
pub fn visibility_mask(num_facets: usize, cpi: usize, seed: u64) -> Vec<bool> {
    let mut r = rng::stream(seed, Domain::Visibility, cpi as u64, 0);
    (0..num_facets).map(|_| r.random_bool(0.5)).collect()
}

/// True when `p` lies inside the azimuth beam (boresight +y).
pub fn in_beam<T: Real>(params: &RadarParams, radar: &Vector3<T>, p: &Vector3<T>) -> bool {
    if params.beamwidth >= std::f64::consts::TAU {
        return true;
    }
    let d = p - radar;
    let az = d.x.atan2(d.y).magnitude();
    az <= T::lit(0.5 * params.beamwidth)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisStats {
    /// Scatterer-PRI pairs that contributed.
    pub contributions: u64,
    /// Scatterer-PRI pairs dropped for aliasing in fast time.
    pub aliased: u64,
    /// Scatterer-PRI pairs outside the antenna beam.
    pub out_of_beam: u64,
}

/// One CPI of dechirped baseband data, `M × N` (slow × fast time).
#[derive(Debug, Clone)]
pub struct RawDataCube<T: Real> {
    pub data: Array2<Complex<T>>,
    /// Central reference range R₀ (m).
    pub crp: f64,
    pub center_doppler_removed: bool,
    /// 1-based CPI index.
    pub cpi_index: usize,
    /// Time of the first PRI (s).
    pub t_start: f64,
    pub params: RadarParams,
    pub stats: SynthesisStats,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// Gaussian-gridded non-uniform FFT.
    #[default]
    Gridded,
    /// Exact per-sample evaluation.
    Direct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisOptions {
    pub kernel: Kernel,
    /// Remove the reference point's range and Doppler.
    pub compensate: bool,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        SynthesisOptions { kernel: Kernel::Gridded, compensate: true }
    }
}

/// Start time of 1-based CPI `p`.
pub fn cpi_start(params: &RadarParams, p: usize) -> f64 {
    (p.saturating_sub(1)) as f64 * params.cpi()
}

/// Noise-free cube of `scene` over CPI `cpi_index` (1-based).
pub fn synthesize<T: Real>(
    scene: &dyn Scene<T>,
    params: &RadarParams,
    cpi_index: usize,
    opts: &SynthesisOptions,
) -> RawDataCube<T> {
    let (m_count, n) = (params.num_pri, params.num_fast);
    let t_start = cpi_start(params, cpi_index);
    let time = |m: usize| T::lit(t_start + m as f64 * params.pri);
    let radar: Vector3<T> = params.radar_position();
    let lambda = T::lit(params.wavelength);

    let ref_range: Vec<T> = (0..m_count).map(|m| (scene.reference(time(m)) - radar).norm()).collect();
    let crp = ref_range.iter().map(|r| r.as_f64()).sum::<f64>() / m_count as f64;
    let crp_t = T::lit(crp);
    let reference = |m: usize| if opts.compensate { ref_range[m] } else { crp_t };

    let residual = |t: T, r_ref: T| {
        let mut pos = vec![None; scene.num_scatterers()];
        scene.positions(t, &mut pos);
        pos.into_iter().map(|p| p.map(|p: Vector3<T>| (p - radar).norm() - r_ref)).collect::<Vec<_>>()
    };
    let dr0 = residual(time(0), reference(0));
    let t_mid = T::lit(t_start + (m_count - 1) as f64 * 0.5 * params.pri);
    let ref_mid = if opts.compensate { (scene.reference(t_mid) - radar).norm() } else { crp_t };
    let dr_mid = residual(t_mid, ref_mid);

    let amp_k = T::lit(
        params.tx_power * params.tx_gain * params.rx_gain * params.wavelength.powi(2)
            / (4.0 * std::f64::consts::PI).powi(3),
    );
    let slow_k = -T::lit(4.0) * T::pi() / lambda;
    let fast_k = T::two_pi() * T::lit(params.dechirp.kappa() / params.range_span);
    let alias = T::lit(params.alias_limit_m());

    let contributions = AtomicU64::new(0);
    let aliased = AtomicU64::new(0);
    let out_of_beam = AtomicU64::new(0);
    let mut data = vec![Complex::<T>::default(); m_count * n];
    data.par_chunks_mut(n).enumerate().for_each_init(
        || (Gridder::<T>::new(n), Vec::new(), Vec::new()),
        |(grid, echoes, sources), (m, row)| {
            echoes.clear();
            sources.clear();
            scene.sample(time(m), &radar, lambda, echoes);
            let r_ref = reference(m);
            let (mut used, mut dropped, mut beam) = (0u64, 0u64, 0u64);
            for e in echoes.iter() {
                if !in_beam(params, &radar, &e.position) {
                    beam += 1;
                    continue;
                }
                let r = (e.position - radar).norm();
                let dr = r - r_ref;
                let delay = dr_mid[e.id as usize].unwrap_or(dr);
                if delay.magnitude() > alias {
                    dropped += 1;
                    continue;
                }
                if e.rcs <= T::zero() {
                    continue;
                }
                let a = (amp_k * e.rcs).sqrt() / (r * r);
                let c = cis(slow_k * (dr - dr0[e.id as usize].unwrap_or(dr))) * a;
                let omega = fast_k * delay;
                match opts.kernel {
                    Kernel::Gridded => grid.add(c, omega),
                    Kernel::Direct => sources.push((c, omega)),
                }
                used += 1;
            }
            match opts.kernel {
                Kernel::Gridded => grid.finish(row),
                Kernel::Direct => direct_row(sources, row),
            }
            contributions.fetch_add(used, Ordering::Relaxed);
            aliased.fetch_add(dropped, Ordering::Relaxed);
            out_of_beam.fetch_add(beam, Ordering::Relaxed);
        },
    );
    let stats = SynthesisStats {
        contributions: contributions.into_inner(),
        aliased: aliased.into_inner(),
        out_of_beam: out_of_beam.into_inner(),
    };
    if stats.contributions == 0 {
        log::warn!(
            "CPI {cpi_index}: no scatterer contributed ({} aliased, {} outside the beam)",
            stats.aliased,
            stats.out_of_beam
        );
    } else if stats.aliased > 0 {
        log::debug!("CPI {cpi_index}: {} scatterer samples beyond ±R_span/2", stats.aliased);
    }
    RawDataCube {
        data: Array2::from_shape_vec((m_count, n), data).expect("cube shape"),
        crp,
        center_doppler_removed: opts.compensate,
        cpi_index,
        t_start,
        params: params.clone(),
        stats,
    }
}

/// Cube for CPI `cpi_index` of an animated vehicle, including receiver noise
/// when `params.noise_power > 0`.
pub fn synthesize_cpi<T: Real>(
    frames: &FrameSet<T>,
    mesh: &FacetMesh<T>,
    params: &RadarParams,
    cpi_index: usize,
) -> Result<RawDataCube<T>, EchoError> {
    let start = cpi_start(params, cpi_index);
    let end = start + params.cpi();
    let available = frames.duration().as_f64();
    if cpi_index == 0 || start + (params.num_pri - 1) as f64 * params.pri > available + 1e-9 {
        return Err(EchoError::OutsideAnimation { cpi: cpi_index, start, end, available });
    }
    let mask = visibility_mask(mesh.len(), cpi_index, params.seed);
    let target = AnimatedTarget::new(mesh, frames, &mask);
    let mut cube = synthesize(&target, params, cpi_index, &SynthesisOptions::default());
    if params.noise_power > 0.0 {
        add_receiver_noise(&mut cube, params.noise_power, params.seed, 0);
    }
    Ok(cube)
}

/// Adds circular complex Gaussian noise of power `noise_power` per sample.
/// Streams are keyed by `(seed, cpi, key, row)`.
pub fn add_receiver_noise<T: Real>(cube: &mut RawDataCube<T>, noise_power: f64, seed: u64, key: u64) {
    if noise_power <= 0.0 {
        return;
    }
    let sigma = (0.5 * noise_power).sqrt();
    let cpi = cube.cpi_index as u64;
    let n = cube.data.ncols();
    let slice = cube.data.as_slice_mut().expect("cube is contiguous");
    slice.par_chunks_mut(n).enumerate().for_each(|(m, row)| {
        let mut r = rng::stream(seed, Domain::ReceiverNoise, cpi, (key << 32) | m as u64);
        for v in row.iter_mut() {
            let re: f64 = r.sample(StandardNormal);
            let im: f64 = r.sample(StandardNormal);
            *v += Complex::new(T::lit(sigma * re), T::lit(sigma * im));
        }
    });
}

/// Per-facet state at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScattererSnapshot {
    pub range: f64,
    pub radial_velocity: f64,
    pub doppler: f64,
    pub aspect: f64,
    pub rcs: f64,
    pub amplitude: f64,
    pub visible: bool,
}

/// Facet-by-facet snapshot of an animated target at time `t`. Radial
/// velocity is the one-PRI forward difference.
pub fn snapshot<T: Real>(target: &AnimatedTarget<'_, T>, params: &RadarParams, t: f64) -> Vec<ScattererSnapshot> {
    let radar: Vector3<T> = params.radar_position();
    let rig = &target.frames.rig;
    let now = rig.transforms(&target.frames.pose_at(T::lit(t)));
    let next = rig.transforms(&target.frames.pose_at(T::lit(t + params.pri)));
    let lambda = params.wavelength;
    target
        .mesh
        .facets
        .iter()
        .enumerate()
        .map(|(b, f)| {
            let p = rig.position(&now, b);
            let range = (p - radar).norm().as_f64();
            let range_next = (rig.position(&next, b) - radar).norm().as_f64();
            let radial_velocity = (range_next - range) / params.pri;
            let cos = aspect_cos(&rig.normal(&now, b), &p, &radar).map_or(0.0, |c| c.as_f64());
            let aspect = cos.acos();
            let visible = target.visible[b];
            let rcs = facet_rcs(f.area.as_f64(), f.longest_edge.as_f64(), aspect, lambda, visible);
            ScattererSnapshot {
                range,
                radial_velocity,
                doppler: 2.0 * radial_velocity / lambda,
                aspect,
                rcs,
                amplitude: amplitude(
                    params.tx_power,
                    params.tx_gain,
                    params.rx_gain,
                    rcs,
                    lambda,
                    range,
                ),
                visible,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn aspect_examples() {
        let radar = Vector3::new(0.0f64, 0.0, 0.0);
        let c = Vector3::new(0.0, 10.0, 0.0);
        assert!(aspect_angle(&Vector3::new(0.0, -1.0, 0.0), &c, &radar).unwrap().abs() < 1e-12);
        assert!((aspect_angle(&Vector3::new(1.0, 0.0, 0.0), &c, &radar).unwrap() - FRAC_PI_2).abs() < 1e-12);
        let n = Vector3::new(1.0, 1.0, 0.0).normalize();
        assert!((aspect_angle(&n, &c, &radar).unwrap() - FRAC_PI_4).abs() < 1e-12);
        assert!(aspect_angle(&n, &radar, &radar).is_err());
    }

    #[test]
    fn rcs_examples() {
        let lambda = 3.896e-3;
        let peak = 4.0 * PI * 0.25 / (lambda * lambda);
        assert!((facet_rcs(0.5, 1.0, 0.0, lambda, true) / peak - 1.0).abs() < 1e-12);
        assert_eq!(facet_rcs(0.5, 1.0, 0.0, lambda, false), 0.0);
        let via_cos = facet_rcs_cos(0.5, 1.0, 0.1f64.cos(), lambda);
        let via_angle = facet_rcs(0.5, 1.0, 0.1, lambda, true);
        assert!((via_cos / via_angle - 1.0).abs() < 1e-9);
    }

    #[test]
    fn amplitude_examples() {
        assert_eq!(amplitude(1.0, 1.0, 1.0, 0.0, 4e-3, 10.0), 0.0);
        let a1 = amplitude(0.3f64, 1.0, 1.0, 2.0, 4e-3, 10.0);
        let a2 = amplitude(0.3f64, 1.0, 1.0, 2.0, 4e-3, 20.0);
        assert!((a1 * a1 / (a2 * a2) - 16.0).abs() < 1e-9);
    }

    #[test]
    fn visibility_is_deterministic() {
        assert_eq!(visibility_mask(1000, 3, 9), visibility_mask(1000, 3, 9));
        assert_ne!(visibility_mask(1000, 3, 9), visibility_mask(1000, 4, 9));
    }
}
