//! Which CPIs of which trajectories become images.

use anyhow::{anyhow, Result};
use isar_core::echo::{cpi_start, in_beam, RadarParams};
use isar_core::kinematics::{make_trajectory_with, Route, TrajectoryPlan};
use isar_core::rng::{hash_str, mix, Domain};
use nalgebra::Vector3;
use serde::Serialize;

use crate::config::DatasetConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DropReason {
    /// First CPI: no previous yaw, so ω is undefined.
    NoPreviousYaw,
    OutOfBeam,
    /// The range window would reach behind the radar.
    TooClose,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrajectoryJob {
    pub target: String,
    pub mesh: String,
    pub speed_mps: f64,
    pub route: Route,
    /// Seeds visibility and receiver noise.
    pub seed: u64,
    /// Seeds the clutter field.
    pub clutter_seed: u64,
    pub cpis: Vec<usize>,
    pub dropped: Vec<(usize, DropReason)>,
}

impl TrajectoryJob {
    pub fn route_name(&self) -> String {
        self.route.name()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetPlan {
    pub jobs: Vec<TrajectoryJob>,
    /// CPIs per trajectory before any are dropped.
    pub cpi_budget: usize,
    pub snr_db: Vec<f64>,
    pub wind_mps: Vec<f64>,
}

impl DatasetPlan {
    pub fn ideal_count(&self) -> usize {
        self.jobs.iter().map(|j| j.cpis.len()).sum()
    }

    pub fn noise_count(&self) -> usize {
        self.ideal_count() * self.snr_db.len()
    }

    pub fn clutter_count(&self) -> usize {
        self.ideal_count() * self.wind_mps.len()
    }

    pub fn image_count(&self) -> usize {
        self.ideal_count() + self.noise_count() + self.clutter_count()
    }

    pub fn cpis_per_trajectory(&self) -> (usize, usize) {
        let lens = self.jobs.iter().map(|j| j.cpis.len());
        (lens.clone().min().unwrap_or(0), lens.max().unwrap_or(0))
    }
}

/// Last CPI index whose PRIs all fall inside the animation.
pub fn last_full_cpi(params: &RadarParams, duration: f64) -> usize {
    let span = (params.num_pri - 1) as f64 * params.pri;
    let mut p = 0;
    while cpi_start(params, p + 1) + span <= duration + 1e-9 {
        p += 1;
    }
    p
}

/// Seeds of one trajectory, derived from the global seeds and its names.
pub fn trajectory_seeds(cfg: &DatasetConfig, target: &str, route: Route) -> (u64, u64) {
    let (a, b) = (hash_str(target), hash_str(&route.name()));
    (mix(cfg.radar.seed, Domain::Scenario, a, b), mix(cfg.clutter.seed, Domain::ClutterSigma0, a, b))
}

fn center_at(plan: &TrajectoryPlan<f64>, t: f64) -> Vector3<f64> {
    let x = (t / plan.frame_dt).max(0.0);
    let i = (x.floor() as usize).min(plan.len() - 2);
    let w = (x - i as f64).min(1.0);
    plan.waypoints[i].lerp(&plan.waypoints[i + 1], w)
}

pub fn plan_dataset(cfg: &DatasetConfig) -> Result<DatasetPlan> {
    let params = RadarParams::from_config(&cfg.radar).map_err(|e| anyhow!("{e}"))?;
    let radar: Vector3<f64> = params.radar_position();
    let routes = cfg.route_list()?;
    let last = cfg.last_cpi.unwrap_or(usize::MAX).min(last_full_cpi(&params, cfg.duration_s));
    let mut jobs = Vec::new();
    for target in &cfg.targets {
        for &route in &routes {
            let traj = make_trajectory_with::<f64>(route, target.speed_mps, cfg.duration_s, cfg.frame_dt_s, &cfg.junction)
                .map_err(|e| anyhow!("target {}: {e}", target.label))?;
            let (seed, clutter_seed) = trajectory_seeds(cfg, &target.label, route);
            let mut cpis = Vec::new();
            let mut dropped = Vec::new();
            for p in 1..=last {
                let mid = cpi_start(&params, p) + 0.5 * params.cpi();
                let c = center_at(&traj, mid);
                let ground = Vector3::new(c.x, c.y, radar.z);
                let reason = if p == 1 {
                    Some(DropReason::NoPreviousYaw)
                } else if !in_beam(&params, &radar, &ground) {
                    Some(DropReason::OutOfBeam)
                } else if (ground - radar).norm() < 0.5 * params.range_span {
                    Some(DropReason::TooClose)
                } else {
                    None
                };
                match reason {
                    Some(r) => dropped.push((p, r)),
                    None => cpis.push(p),
                }
            }
            jobs.push(TrajectoryJob {
                target: target.label.clone(),
                mesh: target.mesh_source(),
                speed_mps: target.speed_mps,
                route,
                seed,
                clutter_seed,
                cpis,
                dropped,
            });
        }
    }
    Ok(DatasetPlan {
        jobs,
        cpi_budget: last.saturating_sub(1),
        snr_db: cfg.snr_db.clone(),
        wind_mps: cfg.wind_mps.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use isar_core::echo::RadarConfig;

    #[test]
    fn fifty_cpis_fit_five_seconds() {
        let p = RadarParams::from_config(&RadarConfig::default()).unwrap();
        assert_eq!(last_full_cpi(&p, 5.0), 50);
        assert_eq!(last_full_cpi(&p, 1.0), 10);
    }

    #[test]
    fn first_cpi_is_always_dropped() {
        let cfg = DatasetConfig { routes: vec!["S2N".into()], duration_s: 2.0, ..DatasetConfig::default() };
        let plan = plan_dataset(&cfg).unwrap();
        for j in &plan.jobs {
            assert_eq!(j.dropped.first(), Some(&(1, DropReason::NoPreviousYaw)));
            assert!(!j.cpis.contains(&1));
        }
        assert_eq!(plan.cpi_budget, 19);
    }

    #[test]
    fn seeds_differ_per_trajectory() {
        let cfg = DatasetConfig::default();
        let a = trajectory_seeds(&cfg, "truck", "S2N".parse().unwrap());
        let b = trajectory_seeds(&cfg, "truck", "S2E".parse().unwrap());
        let c = trajectory_seeds(&cfg, "bicycle", "S2N".parse().unwrap());
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_ne!(a.0, a.1);
    }
}
