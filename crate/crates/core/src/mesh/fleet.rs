//! Procedural stand-ins for the five target classes.
//!
//! Each vehicle is assembled from rounded-box body shells, cylindrical wheels,
//! tubes and a flat trim strip that pads the model to its published facet
//! count. Overall dimensions follow the class (truck 8.5 m × 2.6 m, mid-size
//! car 4.4 m × 1.7 m, ...). Forward is +x, left is +y, z is up, the ground is
//! at z = 0.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use super::sidecar::{Sidecar, SidecarWheel};
use super::{FacetMesh, MeshError, PartMap, TriangleSoup};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VehicleKind {
    Bicycle,
    AutoRickshaw,
    MidSizeCar,
    FullSizeCar,
    Truck,
}

impl VehicleKind {
    pub const ALL: [VehicleKind; 5] = [
        VehicleKind::Bicycle,
        VehicleKind::AutoRickshaw,
        VehicleKind::MidSizeCar,
        VehicleKind::FullSizeCar,
        VehicleKind::Truck,
    ];

    pub fn label(self) -> &'static str {
        match self {
            VehicleKind::Bicycle => "bicycle",
            VehicleKind::AutoRickshaw => "auto_rickshaw",
            VehicleKind::MidSizeCar => "mid_size_car",
            VehicleKind::FullSizeCar => "full_size_car",
            VehicleKind::Truck => "truck",
        }
    }

    pub fn from_label(name: &str) -> Option<Self> {
        let norm = name.to_ascii_lowercase().replace(['-', ' '], "_");
        Self::ALL.into_iter().find(|k| k.label() == norm)
    }

    pub fn facet_count(self) -> usize {
        match self {
            VehicleKind::Bicycle => 3919,
            VehicleKind::AutoRickshaw => 6949,
            VehicleKind::MidSizeCar => 6905,
            VehicleKind::FullSizeCar => 19964,
            VehicleKind::Truck => 7206,
        }
    }

    /// Overall length × width (m).
    pub fn footprint(self) -> (f64, f64) {
        match self {
            VehicleKind::Bicycle => (1.74, 0.6),
            VehicleKind::AutoRickshaw => (2.7, 1.4),
            VehicleKind::MidSizeCar => (4.4, 1.7),
            VehicleKind::FullSizeCar => (5.7, 2.4),
            VehicleKind::Truck => (8.5, 2.6),
        }
    }
}

struct Builder {
    soup: TriangleSoup,
    wheels: Vec<SidecarWheel>,
}

impl Builder {
    fn new() -> Self {
        Builder { soup: TriangleSoup::default(), wheels: Vec::new() }
    }

    /// Rounded box: an ellipsoid parameterisation pushed out radially onto
    /// the superquadric `|x/a|^p + |y/b|^p + |z/c|^p = 1`.
    /// Emits `2 nu (nv - 1)` triangles.
    fn shell(&mut self, group: &str, center: [f64; 3], half: [f64; 3], p: f64, nu: usize, nv: usize) {
        let g = self.soup.group(group);
        let point = |u: f64, v: f64| {
            let d = [v.cos() * u.cos(), v.cos() * u.sin(), v.sin()];
            let f: f64 = d.iter().map(|x| x.abs().powf(p)).sum();
            let s = f.powf(-1.0 / p);
            [
                center[0] + half[0] * d[0] * s,
                center[1] + half[1] * d[1] * s,
                center[2] + half[2] * d[2] * s,
            ]
        };
        let south = self.soup.vertex([center[0], center[1], center[2] - half[2]]);
        let north = self.soup.vertex([center[0], center[1], center[2] + half[2]]);
        let mut rings = Vec::with_capacity(nv - 1);
        for i in 1..nv {
            let v = -PI / 2.0 + PI * i as f64 / nv as f64;
            let ring: Vec<usize> = (0..nu)
                .map(|j| self.soup.vertex(point(2.0 * PI * j as f64 / nu as f64, v)))
                .collect();
            rings.push(ring);
        }
        for j in 0..nu {
            let k = (j + 1) % nu;
            self.soup.face([south, rings[0][k], rings[0][j]], g);
            let top = &rings[nv - 2];
            self.soup.face([north, top[j], top[k]], g);
        }
        for r in 0..nv - 2 {
            for j in 0..nu {
                let k = (j + 1) % nu;
                let (a, b) = (&rings[r], &rings[r + 1]);
                self.soup.face([a[j], a[k], b[k]], g);
                self.soup.face([a[j], b[k], b[j]], g);
            }
        }
    }

    /// Closed cylinder with its axle along y: `4k` triangles.
    fn wheel(&mut self, group: &str, center: [f64; 3], radius: f64, half_width: f64, k: usize) {
        let g = self.soup.group(group);
        let rim = |y: f64, j: usize| {
            let a = 2.0 * PI * j as f64 / k as f64;
            [center[0] + radius * a.cos(), center[1] + y, center[2] + radius * a.sin()]
        };
        let left: Vec<usize> = (0..k).map(|j| self.soup.vertex(rim(half_width, j))).collect();
        let right: Vec<usize> = (0..k).map(|j| self.soup.vertex(rim(-half_width, j))).collect();
        let hub_l = self.soup.vertex([center[0], center[1] + half_width, center[2]]);
        let hub_r = self.soup.vertex([center[0], center[1] - half_width, center[2]]);
        for j in 0..k {
            let n = (j + 1) % k;
            self.soup.face([left[j], right[j], right[n]], g);
            self.soup.face([left[j], right[n], left[n]], g);
            self.soup.face([hub_l, left[n], left[j]], g);
            self.soup.face([hub_r, right[j], right[n]], g);
        }
        self.wheels.push(SidecarWheel {
            group: group.to_string(),
            center,
            radius,
            half_width: Some(half_width),
        });
    }

    /// Open tube from `a` to `b`: `2 k s` triangles.
    fn tube(&mut self, group: &str, a: [f64; 3], b: [f64; 3], radius: f64, k: usize, s: usize) {
        let g = self.soup.group(group);
        let axis = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let len = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let t = [axis[0] / len, axis[1] / len, axis[2] / len];
        let helper = if t[2].abs() < 0.9 { [0.0, 0.0, 1.0] } else { [1.0, 0.0, 0.0] };
        let e1 = normalize(cross(t, helper));
        let e2 = cross(t, e1);
        let mut rings = Vec::with_capacity(s + 1);
        for i in 0..=s {
            let f = i as f64 / s as f64;
            let c = [a[0] + axis[0] * f, a[1] + axis[1] * f, a[2] + axis[2] * f];
            let ring: Vec<usize> = (0..k)
                .map(|j| {
                    let ang = 2.0 * PI * j as f64 / k as f64;
                    let (sn, cs) = ang.sin_cos();
                    self.soup.vertex([
                        c[0] + radius * (cs * e1[0] + sn * e2[0]),
                        c[1] + radius * (cs * e1[1] + sn * e2[1]),
                        c[2] + radius * (cs * e1[2] + sn * e2[2]),
                    ])
                })
                .collect();
            rings.push(ring);
        }
        for i in 0..s {
            for j in 0..k {
                let n = (j + 1) % k;
                let (r0, r1) = (&rings[i], &rings[i + 1]);
                self.soup.face([r0[j], r0[n], r1[n]], g);
                self.soup.face([r0[j], r1[n], r1[j]], g);
            }
        }
    }

    /// Flat strip of exactly `count` triangles spanning `origin + s du + t dv`.
    fn strip(&mut self, group: &str, origin: [f64; 3], du: [f64; 3], dv: [f64; 3], count: usize) {
        if count == 0 {
            return;
        }
        let g = self.soup.group(group);
        let quads = count.div_ceil(2);
        let at = |s: f64, t: f64| {
            [
                origin[0] + s * du[0] + t * dv[0],
                origin[1] + s * du[1] + t * dv[1],
                origin[2] + s * du[2] + t * dv[2],
            ]
        };
        let lo: Vec<usize> =
            (0..=quads).map(|i| self.soup.vertex(at(i as f64 / quads as f64, 0.0))).collect();
        let hi: Vec<usize> =
            (0..=quads).map(|i| self.soup.vertex(at(i as f64 / quads as f64, 1.0))).collect();
        let mut emitted = 0;
        for i in 0..quads {
            self.soup.face([lo[i], lo[i + 1], hi[i + 1]], g);
            emitted += 1;
            if emitted == count {
                break;
            }
            self.soup.face([lo[i], hi[i + 1], hi[i]], g);
            emitted += 1;
        }
    }

    fn finish(mut self, kind: VehicleKind, trim: impl FnOnce(&mut Builder, usize)) -> (TriangleSoup, Sidecar) {
        let target = kind.facet_count();
        let have = self.soup.faces.len();
        assert!(have < target, "{}: base model has {have} facets, budget {target}", kind.label());
        trim(&mut self, target - have);
        debug_assert_eq!(self.soup.faces.len(), target);
        let (min, max) = bounds(&self.soup);
        let center = [0.5 * (min[0] + max[0]), 0.5 * (min[1] + max[1]), 0.5 * max[2]];
        let sidecar = Sidecar {
            center: Some(center),
            wheels: self.wheels,
            label: kind.label().to_string(),
            heading_deg: Some(0.0),
        };
        (self.soup, sidecar)
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn bounds(soup: &TriangleSoup) -> ([f64; 3], [f64; 3]) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for v in &soup.vertices {
        for k in 0..3 {
            lo[k] = lo[k].min(v[k]);
            hi[k] = hi[k].max(v[k]);
        }
    }
    (lo, hi)
}

fn truck() -> (TriangleSoup, Sidecar) {
    let mut b = Builder::new();
    b.shell("cargo_box", [-1.3, 0.0, 2.15], [2.95, 1.3, 1.25], 8.0, 64, 32);
    b.shell("cab", [3.05, 0.0, 1.85], [1.2, 1.2, 1.05], 6.0, 48, 24);
    for (name, x, y) in [
        ("wheel_fl", 3.0, 1.1),
        ("wheel_fr", 3.0, -1.1),
        ("wheel_rl", -2.6, 1.1),
        ("wheel_rr", -2.6, -1.1),
    ] {
        b.wheel(name, [x, y, 0.5], 0.5, 0.175, 48);
    }
    b.finish(VehicleKind::Truck, |b, n| {
        b.strip("bumper", [4.2, -1.1, 0.5], [0.0, 2.2, 0.0], [0.0, 0.0, 0.3], n)
    })
}

fn full_size_car() -> (TriangleSoup, Sidecar) {
    let mut b = Builder::new();
    b.shell("body", [0.0, 0.0, 0.72], [2.85, 1.2, 0.42], 6.0, 128, 48);
    b.shell("cabin", [-0.3, 0.0, 1.45], [1.7, 1.05, 0.35], 5.0, 96, 32);
    for (name, x, y) in [
        ("wheel_fl", 1.75, 1.0),
        ("wheel_fr", 1.75, -1.0),
        ("wheel_rl", -1.75, 1.0),
        ("wheel_rr", -1.75, -1.0),
    ] {
        b.wheel(name, [x, y, 0.38], 0.38, 0.13, 64);
    }
    b.finish(VehicleKind::FullSizeCar, |b, n| {
        b.strip("grille", [2.8, -0.8, 0.45], [0.0, 1.6, 0.0], [0.0, 0.0, 0.25], n)
    })
}

fn mid_size_car() -> (TriangleSoup, Sidecar) {
    let mut b = Builder::new();
    b.shell("body", [0.0, 0.0, 0.625], [2.2, 0.85, 0.375], 6.0, 72, 30);
    b.shell("cabin", [-0.2, 0.0, 1.15], [1.3, 0.75, 0.3], 5.0, 48, 20);
    for (name, x, y) in [
        ("wheel_fl", 1.35, 0.72),
        ("wheel_fr", 1.35, -0.72),
        ("wheel_rl", -1.35, 0.72),
        ("wheel_rr", -1.35, -0.72),
    ] {
        b.wheel(name, [x, y, 0.31], 0.31, 0.1, 40);
    }
    b.finish(VehicleKind::MidSizeCar, |b, n| {
        b.strip("grille", [2.15, -0.6, 0.4], [0.0, 1.2, 0.0], [0.0, 0.0, 0.2], n)
    })
}

fn auto_rickshaw() -> (TriangleSoup, Sidecar) {
    let mut b = Builder::new();
    b.shell("body", [0.0, 0.0, 0.75], [1.35, 0.7, 0.45], 5.0, 64, 32);
    b.shell("canopy", [-0.2, 0.0, 1.45], [0.95, 0.68, 0.35], 5.0, 48, 24);
    b.wheel("wheel_front", [1.0, 0.0, 0.2], 0.2, 0.06, 32);
    b.wheel("wheel_rl", [-0.75, 0.55, 0.2], 0.2, 0.06, 32);
    b.wheel("wheel_rr", [-0.75, -0.55, 0.2], 0.2, 0.06, 32);
    b.finish(VehicleKind::AutoRickshaw, |b, n| {
        b.strip("dash", [1.3, -0.5, 0.9], [0.0, 1.0, 0.0], [0.0, 0.0, 0.3], n)
    })
}

fn bicycle() -> (TriangleSoup, Sidecar) {
    let mut b = Builder::new();
    b.wheel("wheel_front", [0.53, 0.0, 0.34], 0.34, 0.0175, 64);
    b.wheel("wheel_rear", [-0.53, 0.0, 0.34], 0.34, 0.0175, 64);
    let bracket = [0.0, 0.0, 0.35];
    let seat_top = [-0.2, 0.0, 0.85];
    let head = [0.38, 0.0, 0.85];
    let tubes = [
        ("top_tube", seat_top, head),
        ("down_tube", head, bracket),
        ("seat_tube", seat_top, bracket),
        ("chain_stay", bracket, [-0.53, 0.0, 0.34]),
        ("seat_stay", seat_top, [-0.53, 0.0, 0.34]),
        ("fork", head, [0.53, 0.0, 0.34]),
        ("stem", head, [0.4, 0.0, 1.0]),
        ("handlebar", [0.4, -0.3, 1.0], [0.4, 0.3, 1.0]),
    ];
    for (name, a, c) in tubes {
        b.tube(name, a, c, 0.016, 16, 12);
    }
    b.shell("saddle", [-0.22, 0.0, 0.9], [0.13, 0.07, 0.03], 4.0, 16, 8);
    b.finish(VehicleKind::Bicycle, |b, n| {
        b.strip("chainring", [-0.1, 0.03, 0.25], [0.2, 0.0, 0.0], [0.0, 0.0, 0.2], n)
    })
}

/// Triangle soup and sidecar for `kind`.
pub fn model(kind: VehicleKind) -> (TriangleSoup, Sidecar) {
    match kind {
        VehicleKind::Bicycle => bicycle(),
        VehicleKind::AutoRickshaw => auto_rickshaw(),
        VehicleKind::MidSizeCar => mid_size_car(),
        VehicleKind::FullSizeCar => full_size_car(),
        VehicleKind::Truck => truck(),
    }
}

/// Assembled mesh for `kind`.
pub fn build<T: Real>(kind: VehicleKind) -> FacetMesh<T> {
    let (soup, sidecar) = model(kind);
    FacetMesh::from_soup(&soup, &PartMap::from(&sidecar))
        .unwrap_or_else(|e| panic!("builtin {} model is invalid: {e}", kind.label()))
}

/// Resolves `builtin:<label>` or a bare label.
pub fn builtin<T: Real>(name: &str) -> Result<FacetMesh<T>, MeshError> {
    let label = name.strip_prefix("builtin:").unwrap_or(name);
    VehicleKind::from_label(label)
        .map(build)
        .ok_or_else(|| MeshError::UnknownBuiltin(name.to_string()))
}

/// Writes `<label>.obj` and `<label>.json` into `dir`, returning the mesh path.
pub fn export(kind: VehicleKind, dir: &Path) -> Result<PathBuf, MeshError> {
    std::fs::create_dir_all(dir)?;
    let (soup, sidecar) = model(kind);
    let path = dir.join(format!("{}.obj", kind.label()));
    soup.write(&path)?;
    sidecar.write(&path.with_extension("json"))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{validate_mesh, Part};

    #[test]
    fn facet_counts_and_footprints() {
        for kind in VehicleKind::ALL {
            let mesh: FacetMesh<f64> = build(kind);
            assert_eq!(mesh.len(), kind.facet_count(), "{}", kind.label());
            assert!(validate_mesh(&mesh).is_clean());
            let (lo, hi) = mesh.bounds();
            let (len, width) = kind.footprint();
            assert!(((hi.x - lo.x) - len).abs() < 0.02, "{} length {}", kind.label(), hi.x - lo.x);
            assert!(((hi.y - lo.y) - width).abs() < 0.02, "{} width {}", kind.label(), hi.y - lo.y);
            assert!(lo.z.abs() < 1e-9);
            assert!(mesh.facets.iter().any(|f| matches!(f.part, Part::Wheel(_))));
        }
    }

    #[test]
    fn wheel_facets_stay_inside_their_wheel() {
        let mesh: FacetMesh<f64> = build(VehicleKind::MidSizeCar);
        assert_eq!(mesh.wheels.len(), 4);
        for f in &mesh.facets {
            if let Part::Wheel(id) = f.part {
                let w = mesh.wheel(id).unwrap();
                let d = f.centroid - w.center;
                assert!((d.x * d.x + d.z * d.z).sqrt() <= w.radius + 1e-9);
            }
        }
    }

    #[test]
    fn labels_resolve() {
        assert_eq!(VehicleKind::from_label("Auto-Rickshaw"), Some(VehicleKind::AutoRickshaw));
        assert!(builtin::<f32>("builtin:truck").is_ok());
        assert!(builtin::<f32>("builtin:tank").is_err());
    }
}
