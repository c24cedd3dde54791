use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use isar_core::imaging::{write_png, Corruption};
use isar_core::mesh::fleet::{self, VehicleKind};
use isar_datagen::config::{DatasetConfig, Precision};
use isar_datagen::generate::Trajectory;
use isar_datagen::{plan_dataset, run_generation, verify_manifest};

#[derive(Parser)]
#[command(name = "isar-forge", version, about = "Generate and check simulated ISAR datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render every planned image and write the manifest.
    Generate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Print the plan without rendering.
        #[arg(long)]
        dry_run: bool,
    },
    /// Check a manifest against the files it lists.
    Verify {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Render a single image to PNG.
    Preview {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        route: String,
        #[arg(long)]
        cpi: usize,
        /// `ideal`, `snr=<dB>` or `wind=<m/s>`.
        #[arg(long, default_value = "ideal")]
        corruption: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the built-in vehicle meshes as OBJ plus sidecar JSON.
    ExportFleet {
        #[arg(long)]
        dir: PathBuf,
    },
}

/// Bad configuration or arguments, as opposed to a failure while running.
#[derive(Debug)]
struct UsageError(anyhow::Error);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for UsageError {}

fn load(path: &PathBuf) -> Result<DatasetConfig> {
    DatasetConfig::load(path).map_err(|e| UsageError(e).into())
}

fn parse_corruption(s: &str) -> Result<Corruption> {
    let value = |v: &str| v.parse::<f64>().with_context(|| format!("bad level in {s:?}"));
    Ok(match s.split_once('=') {
        None if s == "ideal" => Corruption::Ideal,
        Some(("snr", v)) => Corruption::Noise { snr_db: value(v)? },
        Some(("wind", v)) => Corruption::Clutter { wind_mps: value(v)?, seed: 0 },
        _ => bail!("corruption must be ideal, snr=<dB> or wind=<m/s>, got {s:?}"),
    })
}

fn preview<T: isar_core::Real>(
    mut cfg: DatasetConfig,
    target: &str,
    route: &str,
    cpi: usize,
    corruption: Corruption,
    out: &PathBuf,
) -> Result<()> {
    cfg.targets.retain(|t| t.label == target);
    cfg.routes = vec![route.to_string()];
    match corruption {
        Corruption::Ideal => {}
        Corruption::Noise { snr_db } => cfg.snr_db = vec![snr_db],
        Corruption::Clutter { wind_mps, .. } => cfg.wind_mps = vec![wind_mps],
    }
    if cfg.targets.is_empty() {
        return Err(UsageError(anyhow::anyhow!("target {target} is not in the config")).into());
    }
    let plan = plan_dataset(&cfg).map_err(UsageError)?;
    let mut job = plan.jobs[0].clone();
    job.cpis = vec![cpi];
    let traj = Trajectory::<T>::new(&cfg, &job)?;
    let images = traj.render(&cfg, cpi)?;
    let image = images
        .iter()
        .find(|i| i.meta.corruption.dir_name() == corruption.dir_name())
        .expect("requested corruption is rendered");
    write_png(image, out)?;
    println!("wrote {}", out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate { config, output, dry_run } => {
            let mut cfg = load(&config)?;
            if let Some(o) = output {
                cfg.output_dir = o;
            }
            if dry_run {
                let plan = plan_dataset(&cfg).map_err(UsageError)?;
                let (lo, hi) = plan.cpis_per_trajectory();
                println!("trajectories: {}", plan.jobs.len());
                println!("CPIs per trajectory: {lo}..={hi} of {}", plan.cpi_budget);
                println!("ideal images: {}", plan.ideal_count());
                println!("noisy images: {}", plan.noise_count());
                println!("cluttered images: {}", plan.clutter_count());
                println!("total images: {}", plan.image_count());
                return Ok(ExitCode::SUCCESS);
            }
            let s = run_generation(&cfg)?;
            println!(
                "{} images written, {} reused, manifest {}",
                s.written,
                s.reused,
                s.manifest.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { manifest, json } => {
            let rep = verify_manifest(&manifest)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&rep)?);
            } else {
                print!("{rep}");
            }
            Ok(if rep.is_clean() { ExitCode::SUCCESS } else { ExitCode::from(3) })
        }
        Command::Preview { config, target, route, cpi, corruption, out } => {
            let cfg = load(&config)?;
            let c = parse_corruption(&corruption).map_err(UsageError)?;
            match cfg.precision {
                Precision::F64 => preview::<f64>(cfg, &target, &route, cpi, c, &out)?,
                Precision::F32 => preview::<f32>(cfg, &target, &route, cpi, c, &out)?,
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportFleet { dir } => {
            for kind in VehicleKind::ALL {
                let path = fleet::export(kind, &dir)?;
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
