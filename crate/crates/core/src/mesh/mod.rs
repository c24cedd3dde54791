//! Faceted vehicle models.
//!
//! A [`FacetMesh`] is an immutable triangle list with the per-facet quantities
//! the scattering model needs (centroid, unit normal, area, longest edge) and
//! the wheel assignment used by the animation. Meshes come either from the
//! ASCII triangle format in [`obj`] plus a JSON [`sidecar`], or from the
//! procedural [`fleet`].

pub mod fleet;
pub mod obj;
pub mod sidecar;

use std::path::Path;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

pub use obj::TriangleSoup;
pub use sidecar::{PartMap, Sidecar, WheelRule};

/// Facets whose area falls below this are rejected (m²).
pub const DEGENERATE_AREA_M2: f64 = 1e-12;

const GEOMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WheelId(pub usize);

/// Which rigid part a facet belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    Chassis,
    Wheel(WheelId),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Facet<T: Real> {
    pub vertices: [Vector3<T>; 3],
    pub centroid: Vector3<T>,
    /// Unit normal from the vertex winding.
    pub normal: Vector3<T>,
    /// Area (m²).
    pub area: T,
    /// Longest edge (m).
    pub longest_edge: T,
    pub part: Part,
}

impl<T: Real> Facet<T> {
    /// Builds a facet and its derived quantities. Returns `None` when the
    /// triangle is degenerate.
    pub fn from_vertices(vertices: [Vector3<T>; 3], part: Part) -> Option<Self> {
        let [a, b, c] = vertices;
        let cross = (b - a).cross(&(c - a));
        let twice_area = cross.norm();
        let area = twice_area * T::lit(0.5);
        if !(area.as_f64() >= DEGENERATE_AREA_M2) {
            return None;
        }
        let normal = cross / twice_area;
        let centroid = (a + b + c) / T::lit(3.0);
        let longest_edge = (b - a).norm().max((c - b).norm()).max((a - c).norm());
        Some(Facet {
            vertices,
            centroid,
            normal,
            area,
            longest_edge,
            part,
        })
    }
}

/// A wheel: hub center in mesh coordinates and rolling radius.
#[derive(Debug, Clone, PartialEq)]
pub struct WheelSpec<T: Real> {
    pub id: WheelId,
    pub group: String,
    pub center: Vector3<T>,
    pub radius: T,
}

#[derive(Debug, Clone)]
pub struct FacetMesh<T: Real> {
    pub facets: Vec<Facet<T>>,
    pub wheels: Vec<WheelSpec<T>>,
    /// Vehicle center in mesh coordinates.
    pub center: Vector3<T>,
    /// `facets[b].centroid - center`.
    pub offsets: Vec<Vector3<T>>,
    /// Target class label.
    pub name: String,
    /// Heading of the mesh's forward axis, measured from +x (rad).
    pub native_heading: T,
}

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("facet {index} is degenerate (area below {DEGENERATE_AREA_M2} m²)")]
    Degenerate { index: usize },
    #[error("mesh validation failed: {0}")]
    Invalid(ValidationReport),
    #[error("sidecar: {0}")]
    Sidecar(String),
    #[error("mesh contains no facets")]
    Empty,
    #[error("unknown builtin target '{0}'")]
    UnknownBuiltin(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl<T: Real> FacetMesh<T> {
    /// Assembles a mesh from a parsed triangle soup and wheel-labeling rules.
    pub fn from_soup(soup: &TriangleSoup, part_map: &PartMap) -> Result<Self, MeshError> {
        if soup.faces.is_empty() {
            return Err(MeshError::Empty);
        }
        let wheels: Vec<WheelSpec<T>> = part_map
            .wheels
            .iter()
            .enumerate()
            .map(|(i, w)| WheelSpec {
                id: WheelId(i),
                group: w.group.clone(),
                center: vec3(w.center),
                radius: T::lit(w.radius),
            })
            .collect();

        let mut facets = Vec::with_capacity(soup.faces.len());
        let mut missing = Vec::new();
        for (index, face) in soup.faces.iter().enumerate() {
            let vertices = face.indices.map(|i| vec3::<T>(soup.vertices[i]));
            let group = &soup.groups[face.group];
            let part = match part_map.wheel_for(group, &centroid_f64(soup, face.indices)) {
                Some(id) => Part::Wheel(id),
                None if sidecar::is_wheel_group(group) => {
                    missing.push(group.clone());
                    Part::Chassis
                }
                None => Part::Chassis,
            };
            let facet =
                Facet::from_vertices(vertices, part).ok_or(MeshError::Degenerate { index })?;
            facets.push(facet);
        }
        if !missing.is_empty() {
            missing.sort();
            missing.dedup();
            let issues = missing
                .into_iter()
                .map(|group| MeshIssue::WheelGroupWithoutSpec { group })
                .collect();
            return Err(MeshError::Invalid(ValidationReport { issues }));
        }

        let center = match part_map.center {
            Some(c) => vec3(c),
            None => {
                let sum = facets
                    .iter()
                    .fold(Vector3::zeros(), |acc: Vector3<T>, f| acc + f.centroid);
                sum / T::lit(facets.len() as f64)
            }
        };
        let offsets = facets.iter().map(|f| f.centroid - center).collect();
        let mesh = FacetMesh {
            facets,
            wheels,
            center,
            offsets,
            name: part_map.label.clone(),
            native_heading: T::lit(part_map.heading_deg.to_radians()),
        };
        let report = validate_mesh(&mesh);
        if report.is_clean() {
            Ok(mesh)
        } else {
            Err(MeshError::Invalid(report))
        }
    }

    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }

    pub fn total_area(&self) -> T {
        self.facets.iter().fold(T::zero(), |acc, f| acc + f.area)
    }

    pub fn wheel(&self, id: WheelId) -> Option<&WheelSpec<T>> {
        self.wheels.get(id.0)
    }

    /// Axis-aligned bounding box of all vertices, `(min, max)`.
    pub fn bounds(&self) -> (Vector3<T>, Vector3<T>) {
        let mut lo = Vector3::repeat(T::max_value().unwrap());
        let mut hi = -lo;
        for v in self.facets.iter().flat_map(|f| f.vertices.iter()) {
            lo = lo.inf(v);
            hi = hi.sup(v);
        }
        (lo, hi)
    }
}

/// Reads a triangle file and assembles it with `part_map`.
pub fn load_mesh<T: Real>(path: &Path, part_map: &PartMap) -> Result<FacetMesh<T>, MeshError> {
    let soup = obj::read(path)?;
    FacetMesh::from_soup(&soup, part_map)
}

/// Reads a triangle file together with its sidecar (`<stem>.json` next to it).
pub fn load_mesh_with_sidecar<T: Real>(path: &Path) -> Result<FacetMesh<T>, MeshError> {
    let sidecar_path = path.with_extension("json");
    let sidecar = Sidecar::read(&sidecar_path)?;
    load_mesh(path, &PartMap::from(&sidecar))
}

/// One violated mesh invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum MeshIssue {
    NoFacets,
    NonPositiveArea { facet: usize },
    NonPositiveEdge { facet: usize },
    NormalNotUnit { facet: usize },
    CentroidMismatch { facet: usize },
    LongestEdgeMismatch { facet: usize },
    OffsetMismatch { facet: usize },
    MissingWheelSpec { wheel_id: usize },
    WheelGroupWithoutSpec { group: String },
    NonPositiveWheelRadius { wheel_id: usize },
}

impl std::fmt::Display for MeshIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MeshIssue::NoFacets => write!(f, "mesh has no facets"),
            MeshIssue::NonPositiveArea { facet } => write!(f, "facet {facet}: area not positive"),
            MeshIssue::NonPositiveEdge { facet } => {
                write!(f, "facet {facet}: longest edge not positive")
            }
            MeshIssue::NormalNotUnit { facet } => write!(f, "facet {facet}: normal not unit"),
            MeshIssue::CentroidMismatch { facet } => {
                write!(f, "facet {facet}: centroid is not the vertex mean")
            }
            MeshIssue::LongestEdgeMismatch { facet } => {
                write!(f, "facet {facet}: longest edge inconsistent with vertices")
            }
            MeshIssue::OffsetMismatch { facet } => {
                write!(f, "facet {facet}: offset inconsistent with center")
            }
            MeshIssue::MissingWheelSpec { wheel_id } => {
                write!(f, "wheel {wheel_id} is referenced but has no spec")
            }
            MeshIssue::WheelGroupWithoutSpec { group } => {
                write!(f, "group '{group}' looks like a wheel but has no spec")
            }
            MeshIssue::NonPositiveWheelRadius { wheel_id } => {
                write!(f, "wheel {wheel_id}: radius not positive")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub issues: Vec<MeshIssue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let shown: Vec<String> = self.issues.iter().take(8).map(|i| i.to_string()).collect();
        write!(f, "{}", shown.join("; "))?;
        if self.issues.len() > shown.len() {
            write!(f, "; ... ({} issues total)", self.issues.len())?;
        }
        Ok(())
    }
}

/// Checks every facet and mesh invariant and reports all violations.
pub fn validate_mesh<T: Real>(mesh: &FacetMesh<T>) -> ValidationReport {
    // 1e-9 m is below f32 resolution at vehicle scale.
    let tol = T::lit(GEOMETRY_TOL).max(T::eps() * T::lit(64.0));
    let mut issues = Vec::new();
    if mesh.facets.is_empty() {
        issues.push(MeshIssue::NoFacets);
    }
    for (b, f) in mesh.facets.iter().enumerate() {
        if !(f.area > T::zero()) {
            issues.push(MeshIssue::NonPositiveArea { facet: b });
        }
        if !(f.longest_edge > T::zero()) {
            issues.push(MeshIssue::NonPositiveEdge { facet: b });
        }
        if !((f.normal.norm() - T::one()).magnitude() <= tol) {
            issues.push(MeshIssue::NormalNotUnit { facet: b });
        }
        let [a, v1, v2] = f.vertices;
        let mean = (a + v1 + v2) / T::lit(3.0);
        if !((mean - f.centroid).norm() <= tol) {
            issues.push(MeshIssue::CentroidMismatch { facet: b });
        }
        let edge = (v1 - a).norm().max((v2 - v1).norm()).max((a - v2).norm());
        if !((edge - f.longest_edge).magnitude() <= tol) {
            issues.push(MeshIssue::LongestEdgeMismatch { facet: b });
        }
        match mesh.offsets.get(b) {
            Some(o) if (mesh.center + o - f.centroid).norm() <= tol => {}
            _ => issues.push(MeshIssue::OffsetMismatch { facet: b }),
        }
    }
    let mut reported = std::collections::BTreeSet::new();
    for f in &mesh.facets {
        if let Part::Wheel(id) = f.part {
            if mesh.wheels.iter().all(|w| w.id != id) && reported.insert(id.0) {
                issues.push(MeshIssue::MissingWheelSpec { wheel_id: id.0 });
            }
        }
    }
    for w in &mesh.wheels {
        if !(w.radius > T::zero()) {
            issues.push(MeshIssue::NonPositiveWheelRadius { wheel_id: w.id.0 });
        }
    }
    ValidationReport { issues }
}

pub(crate) fn vec3<T: Real>(p: [f64; 3]) -> Vector3<T> {
    Vector3::new(T::lit(p[0]), T::lit(p[1]), T::lit(p[2]))
}

fn centroid_f64(soup: &TriangleSoup, idx: [usize; 3]) -> [f64; 3] {
    let mut c = [0.0; 3];
    for i in idx {
        for (k, ck) in c.iter_mut().enumerate() {
            *ck += soup.vertices[i][k] / 3.0;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn right_triangle() -> TriangleSoup {
        let mut soup = TriangleSoup::default();
        let g = soup.group("body");
        let a = soup.vertex([0.0, 0.0, 0.0]);
        let b = soup.vertex([1.0, 0.0, 0.0]);
        let c = soup.vertex([0.0, 1.0, 0.0]);
        soup.face([a, b, c], g);
        soup
    }

    #[test]
    fn right_triangle_quantities() {
        let mesh: FacetMesh<f64> =
            FacetMesh::from_soup(&right_triangle(), &PartMap::default()).unwrap();
        let f = &mesh.facets[0];
        assert!((f.area - 0.5).abs() < 1e-15);
        assert!((f.longest_edge - 2f64.sqrt()).abs() < 1e-15);
        assert!((f.normal.z.abs() - 1.0).abs() < 1e-15);
        assert!(f.normal.x.abs() < 1e-15 && f.normal.y.abs() < 1e-15);
        assert!(validate_mesh(&mesh).is_clean());
    }

    #[test]
    fn degenerate_facet_is_rejected_with_index() {
        let mut soup = right_triangle();
        let g = soup.group("body");
        let a = soup.vertex([0.0, 0.0, 0.0]);
        let b = soup.vertex([1.0, 0.0, 0.0]);
        let c = soup.vertex([2.0, 0.0, 0.0]);
        soup.face([a, b, c], g);
        match FacetMesh::<f64>::from_soup(&soup, &PartMap::default()) {
            Err(MeshError::Degenerate { index }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_area_facet_is_reported() {
        let mut mesh: FacetMesh<f64> =
            FacetMesh::from_soup(&right_triangle(), &PartMap::default()).unwrap();
        let mut bad = mesh.facets[0].clone();
        bad.vertices = [Vector3::zeros(); 3];
        bad.centroid = Vector3::zeros();
        bad.area = 0.0;
        bad.longest_edge = 0.0;
        mesh.facets.push(bad);
        mesh.offsets.push(-mesh.center);
        let report = validate_mesh(&mesh);
        assert!(report.issues.contains(&MeshIssue::NonPositiveArea { facet: 1 }));
        assert!(report.issues.contains(&MeshIssue::NonPositiveEdge { facet: 1 }));
    }

    #[test]
    fn wheel_facet_without_spec_is_reported() {
        let mut mesh: FacetMesh<f64> =
            FacetMesh::from_soup(&right_triangle(), &PartMap::default()).unwrap();
        mesh.facets[0].part = Part::Wheel(WheelId(3));
        let report = validate_mesh(&mesh);
        assert_eq!(report.issues, vec![MeshIssue::MissingWheelSpec { wheel_id: 3 }]);
    }

    #[test]
    fn wheel_group_without_sidecar_entry_fails_to_load() {
        let mut soup = TriangleSoup::default();
        let g = soup.group("wheel_front");
        let a = soup.vertex([0.0, 0.0, 0.0]);
        let b = soup.vertex([1.0, 0.0, 0.0]);
        let c = soup.vertex([0.0, 0.0, 1.0]);
        soup.face([a, b, c], g);
        let err = FacetMesh::<f64>::from_soup(&soup, &PartMap::default()).unwrap_err();
        assert!(err.to_string().contains("wheel_front"), "{err}");
    }

    #[test]
    fn offsets_reconstruct_centroids() {
        let mesh: FacetMesh<f64> = fleet::build(fleet::VehicleKind::Bicycle);
        for (f, o) in mesh.facets.iter().zip(&mesh.offsets) {
            assert!((mesh.center + o - f.centroid).norm() <= 1e-9);
        }
    }
}
