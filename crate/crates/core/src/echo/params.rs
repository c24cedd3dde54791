//! Radar configuration and the quantities derived from it.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::EchoError;
use crate::scalar::{db_to_linear, dbm_to_watts, SPEED_OF_LIGHT};

/// Received power that the SNR ladder is referenced to (−80 dBm).
pub const MIN_SIGNAL_DBM: f64 = -80.0;

/// Phase constant of the dechirped fast-time term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum DechirpFactor {
    /// `exp(-j 2π K δt² n (n₀ - n_b))`: the standard stretch-processing beat.
    #[default]
    #[serde(rename = "2pi")]
    TwoPi,
    /// `exp(-j 4π K δt² n (n₀ - n_b))`: beat frequencies doubled.
    #[serde(rename = "4pi")]
    FourPi,
}

impl DechirpFactor {
    /// Beat-frequency multiplier κ (1 or 2).
    pub fn kappa(self) -> f64 {
        match self {
            DechirpFactor::TwoPi => 1.0,
            DechirpFactor::FourPi => 2.0,
        }
    }
}

/// Radar parameter file, in the units of its keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarConfig {
    pub fc_hz: f64,
    pub chirp_rate_hzps: f64,
    /// Defaults to `cpi_s / 1200`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pri_s: Option<f64>,
    pub cpi_s: f64,
    pub range_span_m: f64,
    pub tx_power_dbm: f64,
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub beamwidth_deg: f64,
    pub radar_pos_m: [f64; 3],
    /// Receiver noise is disabled when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    pub seed: u64,
    pub dechirp_phase_factor: DechirpFactor,
}

impl Default for RadarConfig {
    fn default() -> Self {
        RadarConfig {
            fc_hz: 77e9,
            chirp_rate_hzps: 60e12,
            pri_s: None,
            cpi_s: 0.1,
            range_span_m: 20.0,
            tx_power_dbm: 25.0,
            tx_gain_db: 0.0,
            rx_gain_db: 0.0,
            beamwidth_deg: 120.0,
            radar_pos_m: [0.0, 0.0, 0.5],
            snr_db: None,
            seed: 0,
            dechirp_phase_factor: DechirpFactor::TwoPi,
        }
    }
}

/// Validated radar parameters. SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarParams {
    pub carrier_freq: f64,
    pub wavelength: f64,
    pub chirp_rate: f64,
    pub pri: f64,
    /// Slow-time samples per CPI, `round(T_CPI / T_PRI)`.
    pub num_pri: usize,
    /// Fast-time samples per PRI, `round(F_s T_PRI)`.
    pub num_fast: usize,
    /// `F_s = 2 R_span K / c`.
    pub fast_sample_rate: f64,
    pub range_span: f64,
    pub tx_power: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    pub beamwidth: f64,
    pub radar_position: [f64; 3],
    /// Per-sample complex noise power (W); zero disables noise.
    pub noise_power: f64,
    pub snr_db: Option<f64>,
    pub seed: u64,
    pub dechirp: DechirpFactor,
}

impl RadarParams {
    pub fn from_config(c: &RadarConfig) -> Result<Self, EchoError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(EchoError::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("fc_hz", c.fc_hz)?;
        positive("chirp_rate_hzps", c.chirp_rate_hzps)?;
        positive("cpi_s", c.cpi_s)?;
        positive("range_span_m", c.range_span_m)?;
        let pri = positive("pri_s", c.pri_s.unwrap_or(c.cpi_s / 1200.0))?;
        if !(c.beamwidth_deg >= 0.0 && c.beamwidth_deg <= 360.0) {
            return Err(EchoError::Config(format!(
                "beamwidth_deg must lie in [0, 360], got {}",
                c.beamwidth_deg
            )));
        }
        let fs = 2.0 * c.range_span_m * c.chirp_rate_hzps / SPEED_OF_LIGHT;
        let num_pri = (c.cpi_s / pri).round() as usize;
        let num_fast = (fs * pri).round() as usize;
        if num_pri < 2 || num_fast < 2 {
            return Err(EchoError::Config(format!(
                "need at least 2 slow- and fast-time samples, got M = {num_pri}, N = {num_fast}"
            )));
        }
        let noise_power = match c.snr_db {
            Some(snr) if snr.is_finite() => noise_power_for_snr(snr),
            Some(snr) => return Err(EchoError::Config(format!("snr_db must be finite, got {snr}"))),
            None => 0.0,
        };
        Ok(RadarParams {
            carrier_freq: c.fc_hz,
            wavelength: SPEED_OF_LIGHT / c.fc_hz,
            chirp_rate: c.chirp_rate_hzps,
            pri,
            num_pri,
            num_fast,
            fast_sample_rate: fs,
            range_span: c.range_span_m,
            tx_power: dbm_to_watts(c.tx_power_dbm),
            tx_gain: db_to_linear(c.tx_gain_db),
            rx_gain: db_to_linear(c.rx_gain_db),
            beamwidth: c.beamwidth_deg.to_radians(),
            radar_position: c.radar_pos_m,
            noise_power,
            snr_db: c.snr_db,
            seed: c.seed,
            dechirp: c.dechirp_phase_factor,
        })
    }

    /// Effective coherent interval `M T_PRI`.
    pub fn cpi(&self) -> f64 {
        self.num_pri as f64 * self.pri
    }

    /// Doppler resolution `1 / (M T_PRI)`.
    pub fn doppler_bin_hz(&self) -> f64 {
        1.0 / self.cpi()
    }

    /// Range-bin width of a formed image, `R_span / (κ N)`.
    pub fn range_bin_m(&self) -> f64 {
        self.range_span / (self.dechirp.kappa() * self.num_fast as f64)
    }

    /// Largest residual range that does not alias in fast time.
    pub fn alias_limit_m(&self) -> f64 {
        self.range_span / (2.0 * self.dechirp.kappa())
    }

    /// Patch depth set by the swept bandwidth, `c / (2 K T_PRI)`.
    pub fn bandwidth_resolution_m(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.chirp_rate * self.pri)
    }

    pub fn radar_position<T: crate::scalar::Real>(&self) -> Vector3<T> {
        crate::mesh::vec3(self.radar_position)
    }

    /// Same parameters with a different SNR setting.
    pub fn with_snr(&self, snr_db: Option<f64>) -> Self {
        RadarParams {
            noise_power: snr_db.map(noise_power_for_snr).unwrap_or(0.0),
            snr_db,
            ..self.clone()
        }
    }
}

/// `N_p` such that `10 log10(P_min / N_p) = snr_db` with `P_min` = −80 dBm.
pub fn noise_power_for_snr(snr_db: f64) -> f64 {
    dbm_to_watts(MIN_SIGNAL_DBM) / db_to_linear(snr_db)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_parameters() {
        let p = RadarParams::from_config(&RadarConfig::default()).unwrap();
        assert_eq!(p.num_pri, 1200);
        assert_eq!(p.num_fast, 667);
        assert!((p.wavelength - 3.8934e-3).abs() < 1e-6);
        assert!((p.fast_sample_rate - 8.0055e6).abs() < 1e2);
        assert!((p.doppler_bin_hz() - 10.0).abs() < 1e-9);
        assert!((p.tx_power - 10f64.powf(-0.5)).abs() < 1e-12);
        assert!((p.range_span - p.range_bin_m() * p.num_fast as f64).abs() < 1e-12);
        assert_eq!(p.noise_power, 0.0);
    }

    #[test]
    fn snr_reference() {
        assert!((noise_power_for_snr(0.0) - 1e-11).abs() < 1e-24);
        assert!((noise_power_for_snr(10.0) - 1e-12).abs() < 1e-25);
    }

    #[test]
    fn config_parses_with_unknown_key_rejected() {
        let c: RadarConfig =
            serde_json::from_str(r#"{"snr_db": 5, "dechirp_phase_factor": "4pi"}"#).unwrap();
        assert_eq!(c.dechirp_phase_factor, DechirpFactor::FourPi);
        assert_eq!(c.snr_db, Some(5.0));
        assert!(serde_json::from_str::<RadarConfig>(r#"{"fc": 1}"#).is_err());
        let bad = RadarConfig { cpi_s: 1e-6, ..RadarConfig::default() };
        assert!(RadarParams::from_config(&bad).is_err());
    }
}
