//! Simulation of millimetre-wave ISAR images of animated road vehicles.
//!
//! The pipeline runs `mesh` → `kinematics` → `echo` → `imaging` → `clutter`.
//! Every numeric type is generic over [`scalar::Real`]; the aliases below fix
//! the precision for the common cases.

pub mod clutter;
pub mod echo;
pub mod imaging;
pub mod kinematics;
pub mod mesh;
pub mod rng;
pub mod scalar;

pub use scalar::Real;

pub type Mesh = mesh::FacetMesh<f64>;
pub type Mesh32 = mesh::FacetMesh<f32>;
pub type Frames = kinematics::FrameSet<f64>;
pub type Frames32 = kinematics::FrameSet<f32>;
pub type Cube = echo::RawDataCube<f64>;
pub type Cube32 = echo::RawDataCube<f32>;
pub type Image = imaging::IsarImage<f64>;
pub type Image32 = imaging::IsarImage<f32>;
