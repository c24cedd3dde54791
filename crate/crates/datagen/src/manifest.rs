//! JSON-lines manifest: a header line followed by one line per image.

use std::collections::{BTreeMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use isar_core::imaging::{read_f32_header, Corruption, CrossRangeStatus, IsarImage};
use isar_core::Real;
use serde::{Deserialize, Serialize};

pub const MANIFEST_NAME: &str = "manifest.jsonl";
pub const GENERATOR_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestHeader {
    pub generator_version: String,
    pub config_hash: String,
    pub targets: Vec<String>,
    pub routes: Vec<String>,
    pub snr_db: Vec<f64>,
    pub wind_mps: Vec<f64>,
    /// Largest number of CPIs any trajectory can contribute.
    pub cpi_budget: usize,
    pub incomplete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxesSummary {
    /// `[M, N]`.
    pub dims: [usize; 2],
    pub range_m: [f64; 2],
    pub doppler_hz: [f64; 2],
    pub crossrange_m: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub image_id: String,
    pub target_label: String,
    pub route: String,
    pub cpi_index: usize,
    pub corruption: Corruption,
    /// Trajectory seed (visibility and receiver noise).
    pub seed: u64,
    /// Paths relative to the manifest directory.
    pub png: Option<String>,
    pub f32: String,
    pub crp_m: f64,
    pub omega_radps: Option<f64>,
    pub cross_range: CrossRangeStatus,
    pub axes: AxesSummary,
}

fn span(v: &[f64]) -> [f64; 2] {
    [v.first().copied().unwrap_or(0.0), v.last().copied().unwrap_or(0.0)]
}

impl ManifestEntry {
    pub fn describe<T: Real>(image_id: String, image: &IsarImage<T>, seed: u64, png: Option<String>, f32: String) -> Self {
        ManifestEntry {
            image_id,
            target_label: image.meta.target.clone(),
            route: image.meta.route.clone(),
            cpi_index: image.meta.cpi_index,
            corruption: image.meta.corruption,
            seed,
            png,
            f32,
            crp_m: image.crp,
            omega_radps: image.omega,
            cross_range: image.cross_range,
            axes: AxesSummary {
                dims: [image.num_doppler(), image.num_range()],
                range_m: span(&image.range_axis),
                doppler_hz: span(&image.doppler_axis),
                crossrange_m: image.crossrange_axis.as_deref().map(span),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub header: ManifestHeader,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let mut lines = BufReader::new(file).lines();
        let first = lines.next().context("manifest is empty")??;
        let header: ManifestHeader = serde_json::from_str(&first).context("manifest header")?;
        let mut entries = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            // a torn final line is what an interrupted run leaves behind
            match serde_json::from_str(&line) {
                Ok(e) => entries.push(e),
                Err(e) => bail!("{}: line {}: {e}", path.display(), i + 2),
            }
        }
        Ok(Manifest { header, entries })
    }
}

/// Appends entries as images are written. The header says `incomplete`
/// until [`ManifestWriter::finish`] rewrites it.
pub struct ManifestWriter {
    path: PathBuf,
    header: ManifestHeader,
    out: BufWriter<File>,
}

impl ManifestWriter {
    /// Starts a manifest holding `existing` entries.
    pub fn create(path: &Path, mut header: ManifestHeader, existing: &[ManifestEntry]) -> Result<Self> {
        header.incomplete = true;
        write_all(path, &header, existing)?;
        let out = BufWriter::new(OpenOptions::new().append(true).open(path)?);
        Ok(ManifestWriter { path: path.to_path_buf(), header, out })
    }

    pub fn append(&mut self, entry: &ManifestEntry) -> Result<()> {
        serde_json::to_writer(&mut self.out, entry)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }

    /// Marks the manifest complete.
    pub fn finish(mut self) -> Result<Manifest> {
        self.out.flush()?;
        drop(self.out);
        let mut m = Manifest::read(&self.path)?;
        self.header.incomplete = false;
        m.header = self.header;
        write_all(&self.path, &m.header, &m.entries)?;
        Ok(m)
    }
}

fn write_all(path: &Path, header: &ManifestHeader, entries: &[ManifestEntry]) -> Result<()> {
    let tmp = path.with_extension("jsonl.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer(&mut w, header)?;
        w.write_all(b"\n")?;
        for e in entries {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub ideal: usize,
    pub noise: usize,
    pub clutter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyIssue {
    pub image_id: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct VerifyReport {
    pub entries: usize,
    pub issues: Vec<VerifyIssue>,
    /// Per `(target, route)`.
    pub counts: BTreeMap<String, Counts>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn totals(&self) -> Counts {
        self.counts.values().fold(Counts::default(), |a, c| Counts {
            ideal: a.ideal + c.ideal,
            noise: a.noise + c.noise,
            clutter: a.clutter + c.clutter,
        })
    }

    fn flag(&mut self, image_id: Option<&str>, message: String) {
        self.issues.push(VerifyIssue { image_id: image_id.map(str::to_string), message });
    }
}

impl std::fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let t = self.totals();
        writeln!(
            f,
            "{} entries: {} ideal, {} noisy, {} cluttered over {} trajectories",
            self.entries,
            t.ideal,
            t.noise,
            t.clutter,
            self.counts.len()
        )?;
        if self.issues.is_empty() {
            return writeln!(f, "clean");
        }
        for i in &self.issues {
            match &i.image_id {
                Some(id) => writeln!(f, "  {id}: {}", i.message)?,
                None => writeln!(f, "  {}", i.message)?,
            }
        }
        Ok(())
    }
}

fn on_ladder(x: f64, ladder: &[f64]) -> bool {
    ladder.iter().any(|&l| (l - x).abs() < 1e-9)
}

/// Checks file presence, header and axis consistency, per-trajectory counts
/// and ladder membership.
pub fn verify_manifest(path: &Path) -> Result<VerifyReport> {
    let manifest = Manifest::read(path)?;
    let root = path.parent().unwrap_or(Path::new("."));
    let h = &manifest.header;
    let mut rep = VerifyReport { entries: manifest.entries.len(), ..VerifyReport::default() };
    if h.incomplete {
        rep.flag(None, "manifest is marked incomplete".into());
    }
    let mut seen = HashSet::new();
    let mut ideal_cpis: BTreeMap<String, HashSet<usize>> = BTreeMap::new();
    for e in &manifest.entries {
        let id = Some(e.image_id.as_str());
        if !seen.insert(e.image_id.clone()) {
            rep.flag(id, "duplicate image_id".into());
        }
        let key = format!("{}/{}", e.target_label, e.route);
        let c = rep.counts.entry(key.clone()).or_default();
        match e.corruption {
            Corruption::Ideal => {
                c.ideal += 1;
                ideal_cpis.entry(key).or_default().insert(e.cpi_index);
            }
            Corruption::Noise { snr_db } => {
                c.noise += 1;
                if !on_ladder(snr_db, &h.snr_db) {
                    rep.flag(id, format!("snr_db {snr_db} is not on the ladder {:?}", h.snr_db));
                }
            }
            Corruption::Clutter { wind_mps, .. } => {
                c.clutter += 1;
                if !on_ladder(wind_mps, &h.wind_mps) {
                    rep.flag(id, format!("wind_mps {wind_mps} is not on the ladder {:?}", h.wind_mps));
                }
            }
        }
        if !h.targets.contains(&e.target_label) {
            rep.flag(id, format!("unknown target {}", e.target_label));
        }
        if !h.routes.contains(&e.route) {
            rep.flag(id, format!("unknown route {}", e.route));
        }
        if let Some(png) = &e.png {
            if !root.join(png).is_file() {
                rep.flag(id, format!("missing {png}"));
            }
        }
        let f32_path = root.join(&e.f32);
        if !f32_path.is_file() {
            rep.flag(id, format!("missing {}", e.f32));
            continue;
        }
        match read_f32_header(&f32_path) {
            Err(err) => rep.flag(id, format!("unreadable {}: {err}", e.f32)),
            Ok(fh) => {
                if fh.dims != e.axes.dims {
                    rep.flag(id, format!("dims {:?} in file, {:?} in manifest", fh.dims, e.axes.dims));
                }
                if fh.range_axis_m.len() != fh.dims[1] || fh.doppler_axis_hz.len() != fh.dims[0] {
                    rep.flag(id, "axis lengths do not match dims".into());
                }
                if span(&fh.range_axis_m) != e.axes.range_m || span(&fh.doppler_axis_hz) != e.axes.doppler_hz {
                    rep.flag(id, "axis span differs from manifest".into());
                }
                let m = &fh.meta;
                if m.target != e.target_label
                    || m.route != e.route
                    || m.cpi_index != e.cpi_index
                    || m.corruption != e.corruption
                {
                    rep.flag(id, format!("file metadata {m:?} does not match the entry"));
                }
            }
        }
    }
    for t in &h.targets {
        for r in &h.routes {
            let key = format!("{t}/{r}");
            let c = rep.counts.get(&key).copied().unwrap_or_default();
            if c.ideal == 0 {
                rep.flag(None, format!("{key}: no images"));
                continue;
            }
            if c.ideal > h.cpi_budget {
                rep.flag(None, format!("{key}: {} CPIs exceed the budget of {}", c.ideal, h.cpi_budget));
            }
            if c.noise != c.ideal * h.snr_db.len() {
                rep.flag(None, format!("{key}: {} noisy images for {} ideal", c.noise, c.ideal));
            }
            if c.clutter != c.ideal * h.wind_mps.len() {
                rep.flag(None, format!("{key}: {} cluttered images for {} ideal", c.clutter, c.ideal));
            }
        }
    }
    for e in &manifest.entries {
        if e.corruption != Corruption::Ideal {
            let key = format!("{}/{}", e.target_label, e.route);
            if !ideal_cpis.get(&key).is_some_and(|s| s.contains(&e.cpi_index)) {
                rep.flag(Some(&e.image_id), "no ideal image for this CPI".into());
            }
        }
    }
    Ok(rep)
}
