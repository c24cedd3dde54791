//! Renders planned CPIs to disk and records them in the manifest.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use isar_core::clutter::{inject_clutter, ClutterParams};
use isar_core::echo::{add_receiver_noise, synthesize_cpi, RadarParams};
use isar_core::imaging::{
    clamp_dynamic_range, doppler_to_crossrange, estimate_omega, form_image, write_f32, write_png, Corruption,
    IsarImage, Window, YawTrack, CLUTTER_WINDOW, NOISY_WINDOW,
};
use isar_core::kinematics::{animate, make_trajectory_with, FrameSet};
use isar_core::mesh::{fleet, load_mesh_with_sidecar, FacetMesh};
use isar_core::Real;
use log::{info, warn};

use crate::config::{DatasetConfig, Precision};
use crate::manifest::{Manifest, ManifestEntry, ManifestHeader, ManifestWriter, GENERATOR_VERSION, MANIFEST_NAME};
use crate::plan::{plan_dataset, DatasetPlan, TrajectoryJob};

/// Loads `builtin:<label>` or an OBJ file with its sidecar, and checks that
/// the mesh is labelled `label`.
pub fn load_target_mesh<T: Real>(source: &str, label: &str) -> Result<FacetMesh<T>> {
    let mesh = if source.starts_with("builtin:") {
        fleet::builtin::<T>(source)
    } else {
        load_mesh_with_sidecar::<T>(Path::new(source))
    }
    .with_context(|| format!("target {label}: loading mesh {source}"))?;
    if mesh.name != label {
        bail!("target {label}: mesh {source} is labelled {:?}", mesh.name);
    }
    Ok(mesh)
}

/// Everything needed to render any CPI of one trajectory.
pub struct Trajectory<T: Real> {
    pub job: TrajectoryJob,
    pub mesh: FacetMesh<T>,
    pub frames: FrameSet<T>,
    pub yaw: YawTrack,
    /// Noise-free radar parameters seeded for this trajectory.
    pub params: RadarParams,
}

impl<T: Real> Trajectory<T> {
    pub fn new(cfg: &DatasetConfig, job: &TrajectoryJob) -> Result<Self> {
        let mesh = load_target_mesh::<T>(&job.mesh, &job.target)?;
        let plan = make_trajectory_with::<T>(job.route, job.speed_mps, cfg.duration_s, cfg.frame_dt_s, &cfg.junction)
            .map_err(|e| anyhow!("{}/{}: {e}", job.target, job.route_name()))?;
        let frames = animate(&mesh, &plan);
        let mut params = RadarParams::from_config(&cfg.radar).map_err(|e| anyhow!("{e}"))?.with_snr(None);
        params.seed = job.seed;
        let last = job.cpis.iter().copied().max().unwrap_or(1);
        let yaw = YawTrack::from_frames(&frames, params.cpi(), last);
        Ok(Trajectory { job: job.clone(), mesh, frames, yaw, params })
    }

    /// Ideal image, then one per SNR level, then one per wind speed.
    pub fn render(&self, cfg: &DatasetConfig, p: usize) -> Result<Vec<IsarImage<T>>> {
        let window = if cfg.hann_window { Window::Hann } else { Window::None };
        let omega = estimate_omega(&self.yaw, p, self.params.cpi())?;
        let finish = |mut img: IsarImage<T>, corruption: Corruption| {
            img.meta.target = self.job.target.clone();
            img.meta.route = self.job.route_name();
            img.meta.corruption = corruption;
            doppler_to_crossrange(img, omega, cfg.omega_min_radps)
        };
        let cube = synthesize_cpi(&self.frames, &self.mesh, &self.params, p)?;
        let ideal = form_image(&cube, window);
        let mut out = Vec::with_capacity(1 + cfg.snr_db.len() + cfg.wind_mps.len());
        for (i, &snr) in cfg.snr_db.iter().enumerate() {
            let mut noisy = cube.clone();
            let np = self.params.with_snr(Some(snr)).noise_power;
            add_receiver_noise(&mut noisy, np, self.job.seed, i as u64 + 1);
            let img = clamp_dynamic_range(form_image(&noisy, window), NOISY_WINDOW.0, NOISY_WINDOW.1)?;
            out.push(finish(img, Corruption::Noise { snr_db: snr }));
        }
        drop(cube);
        for (i, &wind) in cfg.wind_mps.iter().enumerate() {
            let mut cp = ClutterParams::new(&cfg.clutter, &self.params, wind).map_err(|e| anyhow!("{e}"))?;
            cp.seed = self.job.clutter_seed;
            let key = (p as u64) * 64 + i as u64;
            let (img, _) = inject_clutter(ideal.clone(), &cp, &self.params, key).map_err(|e| anyhow!("{e}"))?;
            let img = clamp_dynamic_range(img, CLUTTER_WINDOW.0, CLUTTER_WINDOW.1)?;
            let c = img.meta.corruption;
            out.push(finish(img, c));
        }
        out.insert(0, finish(ideal, Corruption::Ideal));
        Ok(out)
    }
}

/// Relative path stem of an image, also used as its id.
pub fn image_id(target: &str, route: &str, corruption: &Corruption, p: usize) -> String {
    format!("{target}/{route}/{}/{p:03}", corruption.dir_name())
}

fn expected_ids(cfg: &DatasetConfig, job: &TrajectoryJob, p: usize) -> Vec<String> {
    let route = job.route_name();
    std::iter::once(Corruption::Ideal)
        .chain(cfg.snr_db.iter().map(|&snr_db| Corruption::Noise { snr_db }))
        .chain(cfg.wind_mps.iter().map(|&wind_mps| Corruption::Clutter { wind_mps, seed: job.clutter_seed }))
        .map(|c| image_id(&job.target, &route, &c, p))
        .collect()
}

/// Writes `image` under `root` and returns its manifest entry.
pub fn write_image<T: Real>(root: &Path, image: &IsarImage<T>, seed: u64, with_png: bool) -> Result<ManifestEntry> {
    let m = &image.meta;
    let id = image_id(&m.target, &m.route, &m.corruption, m.cpi_index);
    let f32_rel = format!("{id}.f32");
    let dir = root.join(&f32_rel);
    fs::create_dir_all(dir.parent().expect("image path has a parent"))?;
    write_f32(image, &root.join(&f32_rel))?;
    let png_rel = if with_png {
        let rel = format!("{id}.png");
        write_png(image, &root.join(&rel))?;
        Some(rel)
    } else {
        None
    };
    Ok(ManifestEntry::describe(id, image, seed, png_rel, f32_rel))
}

#[derive(Debug, Clone)]
pub struct Summary {
    pub manifest: PathBuf,
    pub plan: DatasetPlan,
    pub written: usize,
    pub reused: usize,
}

pub fn header_for(cfg: &DatasetConfig, plan: &DatasetPlan) -> Result<ManifestHeader> {
    Ok(ManifestHeader {
        generator_version: GENERATOR_VERSION.to_string(),
        config_hash: cfg.hash(),
        targets: cfg.targets.iter().map(|t| t.label.clone()).collect(),
        routes: cfg.route_list()?.iter().map(|r| r.name()).collect(),
        snr_db: cfg.snr_db.clone(),
        wind_mps: cfg.wind_mps.clone(),
        cpi_budget: plan.cpi_budget,
        incomplete: true,
    })
}

/// Entries of a previous run with the same configuration whose files are
/// still on disk.
fn resumable(path: &Path, root: &Path, hash: &str) -> Result<Vec<ManifestEntry>> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let old = Manifest::read(path)?;
    if old.header.config_hash != hash {
        bail!(
            "{} was written with a different configuration (hash {}); choose another output_dir",
            path.display(),
            old.header.config_hash
        );
    }
    Ok(old
        .entries
        .into_iter()
        .filter(|e| root.join(&e.f32).is_file() && e.png.as_ref().is_none_or(|p| root.join(p).is_file()))
        .collect())
}

/// Generates the dataset described by `cfg`, resuming a previous partial run
/// in the same directory.
pub fn run_generation(cfg: &DatasetConfig) -> Result<Summary> {
    cfg.validate()?;
    let plan = plan_dataset(cfg)?;
    for t in &cfg.targets {
        load_target_mesh::<f64>(&t.mesh_source(), &t.label)?;
    }
    let root = cfg.output_dir.clone();
    fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
    let path = root.join(MANIFEST_NAME);
    let existing = resumable(&path, &root, &cfg.hash())?;
    let mut writer = ManifestWriter::create(&path, header_for(cfg, &plan)?, &existing)?;
    let done: HashSet<String> = existing.iter().map(|e| e.image_id.clone()).collect();
    let result = match cfg.precision {
        Precision::F64 => render_all::<f64>(cfg, &plan, &root, &done, &mut writer),
        Precision::F32 => render_all::<f32>(cfg, &plan, &root, &done, &mut writer),
    };
    let written = match result {
        Ok(n) => n,
        Err(e) => {
            // leaves a manifest flagged incomplete that a rerun picks up
            writer.flush()?;
            return Err(e);
        }
    };
    writer.finish()?;
    Ok(Summary { manifest: path, plan, written, reused: existing.len() })
}

fn render_all<T: Real>(
    cfg: &DatasetConfig,
    plan: &DatasetPlan,
    root: &Path,
    done: &HashSet<String>,
    writer: &mut ManifestWriter,
) -> Result<usize> {
    let total = plan.ideal_count();
    let mut written = 0;
    let mut cpis_seen = 0;
    let started = Instant::now();
    for job in &plan.jobs {
        let pending: Vec<usize> = job
            .cpis
            .iter()
            .copied()
            .filter(|&p| expected_ids(cfg, job, p).iter().any(|id| !done.contains(id)))
            .collect();
        cpis_seen += job.cpis.len() - pending.len();
        if pending.is_empty() {
            continue;
        }
        let traj = Trajectory::<T>::new(cfg, job)?;
        if traj.mesh.len() == 0 {
            warn!("{}: mesh has no facets", job.target);
        }
        for p in pending {
            let images = traj.render(cfg, p).with_context(|| format!("{}/{} CPI {p}", job.target, job.route_name()))?;
            for img in &images {
                let m = &img.meta;
                if done.contains(&image_id(&m.target, &m.route, &m.corruption, p)) {
                    continue;
                }
                let entry = write_image(root, img, job.seed, cfg.write_png)?;
                writer.append(&entry)?;
                written += 1;
            }
            writer.flush()?;
            cpis_seen += 1;
            info!(
                "{}/{} CPI {p}: {cpis_seen}/{total} CPIs, {:.0} s elapsed",
                job.target,
                job.route_name(),
                started.elapsed().as_secs_f64()
            );
        }
    }
    Ok(written)
}
