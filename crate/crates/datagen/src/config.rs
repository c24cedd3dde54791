//! Dataset configuration (TOML or JSON).

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use isar_core::clutter::{ClutterConfig, WIND_LADDER};
use isar_core::echo::RadarConfig;
use isar_core::kinematics::{JunctionGeometry, Route};
use isar_core::mesh::fleet::VehicleKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SNR_LADDER: [f64; 4] = [-5.0, 0.0, 5.0, 10.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    F32,
    #[default]
    F64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub label: String,
    /// OBJ path (sidecar JSON next to it) or `builtin:<label>`.
    #[serde(default)]
    pub mesh: Option<String>,
    pub speed_mps: f64,
}

impl TargetConfig {
    pub fn mesh_source(&self) -> String {
        self.mesh.clone().unwrap_or_else(|| format!("builtin:{}", self.label))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub output_dir: PathBuf,
    pub targets: Vec<TargetConfig>,
    /// Route names, or `["all"]`.
    pub routes: Vec<String>,
    pub duration_s: f64,
    pub frame_dt_s: f64,
    /// Highest CPI index to consider; defaults to `floor(duration / T_CPI)`.
    pub last_cpi: Option<usize>,
    pub snr_db: Vec<f64>,
    pub wind_mps: Vec<f64>,
    pub precision: Precision,
    pub hann_window: bool,
    pub omega_min_radps: f64,
    pub write_png: bool,
    pub radar: RadarConfig,
    pub clutter: ClutterConfig,
    pub junction: JunctionGeometry,
}

/// Paper fleet with the speeds used for the full dataset.
pub fn default_targets() -> Vec<TargetConfig> {
    let speed = |k: VehicleKind| match k {
        VehicleKind::Bicycle => 5.0,
        VehicleKind::AutoRickshaw => 6.0,
        VehicleKind::MidSizeCar | VehicleKind::FullSizeCar => 7.0,
        VehicleKind::Truck => 6.0,
    };
    VehicleKind::ALL
        .iter()
        .map(|&k| TargetConfig { label: k.label().to_string(), mesh: None, speed_mps: speed(k) })
        .collect()
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            output_dir: PathBuf::from("dataset"),
            targets: default_targets(),
            routes: vec!["all".to_string()],
            duration_s: 5.0,
            frame_dt_s: 0.01,
            last_cpi: None,
            snr_db: SNR_LADDER.to_vec(),
            wind_mps: WIND_LADDER.to_vec(),
            precision: Precision::default(),
            hann_window: false,
            omega_min_radps: isar_core::imaging::OMEGA_MIN,
            write_png: true,
            radar: RadarConfig::default(),
            clutter: ClutterConfig::default(),
            junction: JunctionGeometry::default(),
        }
    }
}

impl DatasetConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: DatasetConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
            _ => toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?,
        };
        // relative paths are relative to the config file
        if let Some(dir) = path.parent() {
            if cfg.output_dir.is_relative() {
                cfg.output_dir = dir.join(&cfg.output_dir);
            }
            for t in &mut cfg.targets {
                if let Some(m) = &mut t.mesh {
                    if !m.starts_with("builtin:") && Path::new(m.as_str()).is_relative() {
                        *m = dir.join(&*m).to_string_lossy().into_owned();
                    }
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.targets.is_empty() {
            bail!("no targets configured");
        }
        let mut labels: Vec<&str> = self.targets.iter().map(|t| t.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            bail!("duplicate target labels");
        }
        for t in &self.targets {
            if !(t.speed_mps > 0.0) {
                bail!("target {}: speed must be positive", t.label);
            }
        }
        self.route_list()?;
        if !(self.duration_s > 0.0 && self.frame_dt_s > 0.0) {
            bail!("duration_s and frame_dt_s must be positive");
        }
        if self.snr_db.iter().chain(&self.wind_mps).any(|x| !x.is_finite()) {
            bail!("corruption ladders must be finite");
        }
        if self.wind_mps.iter().any(|&u| u < 0.0) {
            bail!("wind speeds must be non-negative");
        }
        isar_core::echo::RadarParams::from_config(&self.radar).map_err(|e| anyhow::anyhow!("{e}"))?;
        Ok(())
    }

    pub fn route_list(&self) -> Result<Vec<Route>> {
        if self.routes.iter().any(|r| r.eq_ignore_ascii_case("all")) {
            return Ok(Route::all());
        }
        let mut out = Vec::new();
        for name in &self.routes {
            let r: Route = name.parse().map_err(|e| anyhow::anyhow!("{e}"))?;
            if !out.contains(&r) {
                out.push(r);
            }
        }
        if out.is_empty() {
            bail!("no routes configured");
        }
        Ok(out)
    }

    /// SHA-256 of the canonical JSON form, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = PathBuf::new();
        let json = serde_json::to_vec(&canon).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_roundtrip_and_defaults() {
        let cfg: DatasetConfig = toml::from_str(
            r#"
            routes = ["S2N", "W2W"]
            duration_s = 1.0
            [[targets]]
            label = "truck"
            speed_mps = 6.0
            [radar]
            seed = 3
            "#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.route_list().unwrap().len(), 2);
        assert_eq!(cfg.targets[0].mesh_source(), "builtin:truck");
        assert_eq!(cfg.radar.seed, 3);
        assert_eq!(cfg.snr_db, SNR_LADDER.to_vec());
        let back: DatasetConfig = toml::from_str(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn hash_ignores_output_dir() {
        let a = DatasetConfig::default();
        let b = DatasetConfig { output_dir: "elsewhere".into(), ..a.clone() };
        let c = DatasetConfig { duration_s: 4.0, ..a.clone() };
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn rejects_bad_input() {
        let bad = DatasetConfig { routes: vec!["S2X".into()], ..DatasetConfig::default() };
        assert!(bad.validate().is_err());
        assert!(toml::from_str::<DatasetConfig>("colour = 1").is_err());
    }
}
