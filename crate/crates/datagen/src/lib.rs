//! Dataset generation for the ISAR simulator: configuration, planning,
//! rendering and manifest verification.

pub mod config;
pub mod generate;
pub mod manifest;
pub mod plan;

pub use config::{DatasetConfig, Precision, TargetConfig, SNR_LADDER};
pub use generate::{load_target_mesh, run_generation, Summary, Trajectory};
pub use manifest::{verify_manifest, Manifest, ManifestEntry, VerifyReport, MANIFEST_NAME};
pub use plan::{plan_dataset, DatasetPlan, DropReason, TrajectoryJob};
