//! Scatterer sources for the echo synthesizer.

use nalgebra::Vector3;

use super::{aspect_cos, facet_rcs_cos};
use crate::kinematics::FrameSet;
use crate::mesh::FacetMesh;
use crate::scalar::Real;

/// One point return at a given instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Echo<T: Real> {
    /// Stable scatterer index within the scene.
    pub id: u32,
    pub position: Vector3<T>,
    /// Radar cross section (m²).
    pub rcs: T,
}

/// Anything that can report its scatterers at arbitrary times.
pub trait Scene<T: Real>: Sync {
    /// Upper bound on scatterer ids.
    fn num_scatterers(&self) -> usize;

    /// Point whose range and Doppler translational motion compensation
    /// removes.
    fn reference(&self, t: T) -> Vector3<T>;

    /// Appends the scatterers visible at time `t` to `out`.
    fn sample(&self, t: T, radar: &Vector3<T>, wavelength: T, out: &mut Vec<Echo<T>>);

    /// Position of every scatterer at `t`, indexed by id, whether or not it
    /// faces the radar.
    fn positions(&self, t: T, out: &mut [Option<Vector3<T>>]) {
        let mut echoes = Vec::new();
        self.sample(t, &Vector3::zeros(), T::one(), &mut echoes);
        for e in echoes {
            out[e.id as usize] = Some(e.position);
        }
    }
}

/// Animated faceted vehicle with a fixed visibility mask.
pub struct AnimatedTarget<'a, T: Real> {
    pub mesh: &'a FacetMesh<T>,
    pub frames: &'a FrameSet<T>,
    /// `η` per facet.
    pub visible: &'a [bool],
}

impl<'a, T: Real> AnimatedTarget<'a, T> {
    pub fn new(mesh: &'a FacetMesh<T>, frames: &'a FrameSet<T>, visible: &'a [bool]) -> Self {
        assert_eq!(mesh.len(), visible.len(), "visibility mask length");
        assert_eq!(mesh.len(), frames.rig.len(), "frame set built from another mesh");
        AnimatedTarget { mesh, frames, visible }
    }
}

impl<T: Real> Scene<T> for AnimatedTarget<'_, T> {
    fn num_scatterers(&self) -> usize {
        self.mesh.len()
    }

    fn reference(&self, t: T) -> Vector3<T> {
        self.frames.body_center_at(t)
    }

    fn sample(&self, t: T, radar: &Vector3<T>, wavelength: T, out: &mut Vec<Echo<T>>) {
        let rig = &self.frames.rig;
        let xf = rig.transforms(&self.frames.pose_at(t));
        for (b, facet) in self.mesh.facets.iter().enumerate() {
            if !self.visible[b] {
                continue;
            }
            let position = rig.position(&xf, b);
            let normal = rig.normal(&xf, b);
            let Some(cos) = aspect_cos(&normal, &position, radar) else { continue };
            let rcs = facet_rcs_cos(facet.area, facet.longest_edge, cos, wavelength);
            out.push(Echo { id: b as u32, position, rcs });
        }
    }

    fn positions(&self, t: T, out: &mut [Option<Vector3<T>>]) {
        let rig = &self.frames.rig;
        let xf = rig.transforms(&self.frames.pose_at(t));
        for (b, slot) in out.iter_mut().enumerate().take(self.mesh.len()) {
            if self.visible[b] {
                *slot = Some(rig.position(&xf, b));
            }
        }
    }
}

/// Isotropic point scatterer in uniform linear motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointScatterer<T: Real> {
    pub position: Vector3<T>,
    pub velocity: Vector3<T>,
    pub rcs: T,
}

impl<T: Real> PointScatterer<T> {
    pub fn fixed(position: Vector3<T>, rcs: T) -> Self {
        PointScatterer { position, velocity: Vector3::zeros(), rcs }
    }
}

/// Points with a stationary compensation reference.
#[derive(Debug, Clone, PartialEq)]
pub struct PointScene<T: Real> {
    pub points: Vec<PointScatterer<T>>,
    pub reference: Vector3<T>,
}

impl<T: Real> PointScene<T> {
    pub fn new(reference: Vector3<T>, points: Vec<PointScatterer<T>>) -> Self {
        PointScene { points, reference }
    }
}

impl<T: Real> Scene<T> for PointScene<T> {
    fn num_scatterers(&self) -> usize {
        self.points.len()
    }

    fn reference(&self, _t: T) -> Vector3<T> {
        self.reference
    }

    fn sample(&self, t: T, _radar: &Vector3<T>, _wavelength: T, out: &mut Vec<Echo<T>>) {
        for (i, p) in self.points.iter().enumerate() {
            out.push(Echo { id: i as u32, position: p.position + p.velocity * t, rcs: p.rcs });
        }
    }
}

/// Isotropic points riding on a vehicle part (`0` chassis, `k + 1` wheel `k`),
/// given in that part's local frame.
pub struct Probes<'a, T: Real> {
    pub frames: &'a FrameSet<T>,
    pub points: Vec<(usize, Vector3<T>, T)>,
}

impl<T: Real> Scene<T> for Probes<'_, T> {
    fn num_scatterers(&self) -> usize {
        self.points.len()
    }

    fn reference(&self, t: T) -> Vector3<T> {
        self.frames.body_center_at(t)
    }

    fn sample(&self, t: T, _radar: &Vector3<T>, _wavelength: T, out: &mut Vec<Echo<T>>) {
        let xf = self.frames.rig.transforms(&self.frames.pose_at(t));
        for (i, &(part, local, rcs)) in self.points.iter().enumerate() {
            let position = xf.origin[part] + xf.rot[part] * local;
            out.push(Echo { id: i as u32, position, rcs });
        }
    }
}

/// Union of two scenes. Ids of `b` follow those of `a`; the reference is `a`'s.
pub struct Union<'s, T: Real> {
    pub a: &'s dyn Scene<T>,
    pub b: &'s dyn Scene<T>,
}

impl<T: Real> Scene<T> for Union<'_, T> {
    fn num_scatterers(&self) -> usize {
        self.a.num_scatterers() + self.b.num_scatterers()
    }

    fn reference(&self, t: T) -> Vector3<T> {
        self.a.reference(t)
    }

    fn sample(&self, t: T, radar: &Vector3<T>, wavelength: T, out: &mut Vec<Echo<T>>) {
        self.a.sample(t, radar, wavelength, out);
        let start = out.len();
        self.b.sample(t, radar, wavelength, out);
        let shift = self.a.num_scatterers() as u32;
        for e in &mut out[start..] {
            e.id += shift;
        }
    }

    fn positions(&self, t: T, out: &mut [Option<Vector3<T>>]) {
        let (a, b) = out.split_at_mut(self.a.num_scatterers());
        self.a.positions(t, a);
        self.b.positions(t, b);
    }
}
