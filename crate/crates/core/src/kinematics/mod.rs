//! Junction trajectories and rigid-body animation of a faceted vehicle.
//!
//! A [`TrajectoryPlan`] samples the vehicle center at a fixed frame interval.
//! [`animate`] turns it into a [`FrameSet`]: the per-frame yaw (four-quadrant
//! heading of consecutive waypoints, unwrapped) and the cumulative wheel spin
//! `α = Σ‖Δr‖ / r_w`. Facet positions are a pure function of that pose, so the
//! frame set stores poses and evaluates facets on demand.

pub mod route;

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use thiserror::Error;

use crate::mesh::{FacetMesh, Part};
use crate::scalar::Real;

pub use route::{Approach, JunctionGeometry, Maneuver, Route, RouteError, RoutePath};

/// Displacements shorter than this count as stationary (m).
pub const STATIONARY_EPS_M: f64 = 1e-9;

const LONG_VEHICLE_M: f64 = 30.0;

#[derive(Debug, Error, PartialEq)]
pub enum KinematicsError {
    #[error("{route}: duration {duration_s} s is too short at {speed_mps} m/s; need at least {min_duration_s:.3} s")]
    TooShort {
        route: String,
        duration_s: f64,
        speed_mps: f64,
        min_duration_s: f64,
    },
    #[error("invalid trajectory input: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPlan<T: Real> {
    /// Vehicle center per frame on the ground plane.
    pub waypoints: Vec<Vector3<T>>,
    pub frame_dt: T,
    pub route: Route,
    pub speed: T,
}

impl<T: Real> TrajectoryPlan<T> {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn duration(&self) -> T {
        self.frame_dt * T::lit((self.waypoints.len() - 1) as f64)
    }
}

/// Samples `route` at constant `speed` for `duration` seconds with the
/// default junction layout.
pub fn make_trajectory<T: Real>(
    route: Route,
    speed: f64,
    duration: f64,
    frame_dt: f64,
) -> Result<TrajectoryPlan<T>, KinematicsError> {
    make_trajectory_with(route, speed, duration, frame_dt, &JunctionGeometry::default())
}

/// As [`make_trajectory`] with an explicit junction layout. The maneuver's
/// midpoint is reached at `duration / 2`.
pub fn make_trajectory_with<T: Real>(
    route: Route,
    speed: f64,
    duration: f64,
    frame_dt: f64,
    geometry: &JunctionGeometry,
) -> Result<TrajectoryPlan<T>, KinematicsError> {
    for (name, v) in [("speed", speed), ("duration", duration), ("frame_dt", frame_dt)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(KinematicsError::Invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let frames = (duration / frame_dt).round() as usize + 1;
    if frames < 2 {
        return Err(KinematicsError::Invalid(format!(
            "frame_dt {frame_dt} s leaves fewer than 2 frames in {duration} s"
        )));
    }
    let total = speed * duration;
    let path = route.path(geometry, total).map_err(|e| match e {
        RouteError::TooShort { needed_m } => KinematicsError::TooShort {
            route: route.name(),
            duration_s: duration,
            speed_mps: speed,
            min_duration_s: needed_m / speed,
        },
        other => KinematicsError::Invalid(other.to_string()),
    })?;
    let waypoints = (0..frames)
        .map(|f| {
            let p = path.point(speed * frame_dt * f as f64);
            Vector3::new(T::lit(p[0]), T::lit(p[1]), T::zero())
        })
        .collect();
    Ok(TrajectoryPlan {
        waypoints,
        frame_dt: T::lit(frame_dt),
        route,
        speed: T::lit(speed),
    })
}

/// Heading of the step `prev → next`, `atan2(Δy, Δx)` in (−π, π]. `None`
/// when the XY displacement is below [`STATIONARY_EPS_M`].
pub fn compute_yaw<T: Real>(prev: &Vector3<T>, next: &Vector3<T>) -> Option<T> {
    let dx = next.x - prev.x;
    let dy = next.y - prev.y;
    if (dx * dx + dy * dy).sqrt() < T::lit(STATIONARY_EPS_M) {
        return None;
    }
    Some(dy.atan2(dx))
}

/// `Δα = ‖Δr‖ / r_w`.
#[inline]
pub fn wheel_rotation_increment<T: Real>(step_displacement: T, wheel_radius: T) -> T {
    step_displacement / wheel_radius
}

/// Per-frame unwrapped yaw and stationary flags. Frame 0 takes the heading
/// of the first step; a stationary frame holds the previous heading.
pub fn yaw_sequence<T: Real>(waypoints: &[Vector3<T>]) -> (Vec<T>, Vec<bool>) {
    let n = waypoints.len();
    let mut yaw = vec![T::zero(); n];
    let mut stationary = vec![false; n];
    let mut prev: Option<T> = None;
    for f in 1..n {
        match compute_yaw(&waypoints[f - 1], &waypoints[f]) {
            Some(raw) => {
                let y = match prev {
                    Some(p) => p + wrap_pi(raw - p),
                    None => raw,
                };
                yaw[f] = y;
                prev = Some(y);
            }
            None => {
                stationary[f] = true;
                yaw[f] = prev.unwrap_or(T::zero());
            }
        }
    }
    if n > 1 {
        yaw[0] = yaw[1];
        stationary[0] = stationary[1];
        // A leading stationary run inherits the first real heading.
        if let Some(first) = (1..n).find(|&f| !stationary[f]) {
            let y0 = yaw[first];
            for y in yaw.iter_mut().take(first) {
                *y = y0;
            }
        }
    }
    (yaw, stationary)
}

/// Wraps an angle into (−π, π].
pub fn wrap_pi<T: Real>(a: T) -> T {
    let two_pi = T::two_pi();
    let mut w = a - two_pi * ((a + T::pi()) / two_pi).floor();
    if w <= -T::pi() {
        w += two_pi;
    }
    w
}

/// Mesh reorganised for posing: each facet is expressed in its part's frame.
#[derive(Debug, Clone)]
pub struct Rig<T: Real> {
    /// Native heading of the mesh (rad).
    pub theta0: T,
    /// Height of the vehicle center above the ground.
    pub lift: T,
    /// 0 for the chassis, `k + 1` for wheel `k`.
    pub part: Vec<u16>,
    /// Chassis facets: offset from the vehicle center. Wheel facets: offset
    /// from the wheel center.
    pub local: Vec<Vector3<T>>,
    pub normals: Vec<Vector3<T>>,
    /// Wheel centers relative to the vehicle center.
    pub hubs: Vec<Vector3<T>>,
    pub radii: Vec<T>,
    /// Axle direction in the mesh frame, `ẑ × heading`.
    pub axle: Unit<Vector3<T>>,
}

impl<T: Real> Rig<T> {
    pub fn new(mesh: &FacetMesh<T>) -> Self {
        let theta0 = mesh.native_heading;
        let heading = Vector3::new(theta0.cos(), theta0.sin(), T::zero());
        let axle = Unit::new_normalize(Vector3::z().cross(&heading));
        let hubs: Vec<Vector3<T>> = mesh.wheels.iter().map(|w| w.center - mesh.center).collect();
        let mut part = Vec::with_capacity(mesh.len());
        let mut local = Vec::with_capacity(mesh.len());
        for (f, off) in mesh.facets.iter().zip(&mesh.offsets) {
            match f.part {
                Part::Chassis => {
                    part.push(0);
                    local.push(*off);
                }
                Part::Wheel(id) => {
                    part.push(id.0 as u16 + 1);
                    local.push(off - hubs[id.0]);
                }
            }
        }
        Rig {
            theta0,
            lift: mesh.center.z,
            part,
            local,
            normals: mesh.facets.iter().map(|f| f.normal).collect(),
            hubs,
            radii: mesh.wheels.iter().map(|w| w.radius).collect(),
            axle,
        }
    }

    pub fn len(&self) -> usize {
        self.local.len()
    }

    pub fn is_empty(&self) -> bool {
        self.local.is_empty()
    }

    /// Rigid transform of every part for `pose`.
    pub fn transforms(&self, pose: &Pose<T>) -> PartTransforms<T> {
        let yaw = Rotation3::from_axis_angle(&Vector3::z_axis(), pose.yaw - self.theta0);
        let base = pose.center + Vector3::z() * self.lift;
        let mut origin = Vec::with_capacity(self.hubs.len() + 1);
        let mut rot = Vec::with_capacity(self.hubs.len() + 1);
        origin.push(base);
        rot.push(*yaw.matrix());
        for (k, hub) in self.hubs.iter().enumerate() {
            let spin = Rotation3::from_axis_angle(&self.axle, pose.wheel_angles[k]);
            origin.push(base + yaw * hub);
            rot.push((yaw * spin).into_inner());
        }
        PartTransforms { origin, rot }
    }

    #[inline]
    pub fn position(&self, t: &PartTransforms<T>, b: usize) -> Vector3<T> {
        let p = self.part[b] as usize;
        t.origin[p] + t.rot[p] * self.local[b]
    }

    #[inline]
    pub fn normal(&self, t: &PartTransforms<T>, b: usize) -> Vector3<T> {
        t.rot[self.part[b] as usize] * self.normals[b]
    }
}

#[derive(Debug, Clone)]
pub struct PartTransforms<T: Real> {
    pub origin: Vec<Vector3<T>>,
    pub rot: Vec<Matrix3<T>>,
}

/// Vehicle state at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Pose<T: Real> {
    /// Vehicle center on the ground plane.
    pub center: Vector3<T>,
    /// Unwrapped absolute yaw (rad).
    pub yaw: T,
    /// Cumulative spin per wheel (rad).
    pub wheel_angles: Vec<T>,
}

/// Animated vehicle: one pose per frame plus the rig needed to place facets.
#[derive(Debug, Clone)]
pub struct FrameSet<T: Real> {
    pub frame_dt: T,
    pub centers: Vec<Vector3<T>>,
    pub yaw: Vec<T>,
    /// `wheel_angle[f][k]`.
    pub wheel_angle: Vec<Vec<T>>,
    pub stationary: Vec<bool>,
    pub rig: Rig<T>,
}

/// Animates `mesh` along `plan`.
pub fn animate<T: Real>(mesh: &FacetMesh<T>, plan: &TrajectoryPlan<T>) -> FrameSet<T> {
    let (lo, hi) = mesh.bounds();
    let extent = (hi - lo).xy().norm();
    if extent.as_f64() > LONG_VEHICLE_M {
        log::warn!(
            "{}: mesh spans {:.1} m in plan view; check that it is in meters",
            mesh.name,
            extent.as_f64()
        );
    }
    let rig = Rig::new(mesh);
    let (yaw, stationary) = yaw_sequence(&plan.waypoints);
    let mut wheel_angle = Vec::with_capacity(plan.len());
    let mut acc = vec![T::zero(); rig.radii.len()];
    wheel_angle.push(acc.clone());
    for w in plan.waypoints.windows(2) {
        let step = (w[1] - w[0]).norm();
        for (a, r) in acc.iter_mut().zip(&rig.radii) {
            *a += wheel_rotation_increment(step, *r);
        }
        wheel_angle.push(acc.clone());
    }
    FrameSet {
        frame_dt: plan.frame_dt,
        centers: plan.waypoints.clone(),
        yaw,
        wheel_angle,
        stationary,
        rig,
    }
}

impl<T: Real> FrameSet<T> {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn duration(&self) -> T {
        self.frame_dt * T::lit((self.len() - 1) as f64)
    }

    pub fn pose(&self, f: usize) -> Pose<T> {
        Pose {
            center: self.centers[f],
            yaw: self.yaw[f],
            wheel_angles: self.wheel_angle[f].clone(),
        }
    }

    /// Pose at time `t`, linearly interpolated between frames (clamped to the
    /// animated interval).
    pub fn pose_at(&self, t: T) -> Pose<T> {
        let (i, w) = self.locate(t);
        let lerp = |a: T, b: T| a + (b - a) * w;
        Pose {
            center: self.centers[i].lerp(&self.centers[i + 1], w),
            yaw: lerp(self.yaw[i], self.yaw[i + 1]),
            wheel_angles: self.wheel_angle[i]
                .iter()
                .zip(&self.wheel_angle[i + 1])
                .map(|(&a, &b)| lerp(a, b))
                .collect(),
        }
    }

    /// Ground-plane center at time `t`.
    pub fn center_at(&self, t: T) -> Vector3<T> {
        let (i, w) = self.locate(t);
        self.centers[i].lerp(&self.centers[i + 1], w)
    }

    /// Unwrapped yaw at time `t`.
    pub fn yaw_at(&self, t: T) -> T {
        let (i, w) = self.locate(t);
        self.yaw[i] + (self.yaw[i + 1] - self.yaw[i]) * w
    }

    /// Vehicle center including its height above ground.
    pub fn body_center_at(&self, t: T) -> Vector3<T> {
        self.center_at(t) + Vector3::z() * self.rig.lift
    }

    fn locate(&self, t: T) -> (usize, T) {
        let last = self.len() - 2;
        let x = (t / self.frame_dt).max(T::zero());
        let i = x.floor().as_usize().min(last);
        let w = (x - T::lit(i as f64)).min(T::one());
        (i, w)
    }

    pub fn transforms(&self, f: usize) -> PartTransforms<T> {
        self.rig.transforms(&self.pose(f))
    }

    /// Absolute facet centroids at frame `f`.
    pub fn positions(&self, f: usize) -> Vec<Vector3<T>> {
        let t = self.transforms(f);
        (0..self.rig.len()).map(|b| self.rig.position(&t, b)).collect()
    }

    /// Facet normals at frame `f`.
    pub fn normals(&self, f: usize) -> Vec<Vector3<T>> {
        let t = self.transforms(f);
        (0..self.rig.len()).map(|b| self.rig.normal(&t, b)).collect()
    }

    /// Polyline length of the center track.
    pub fn path_length(&self) -> T {
        self.centers.windows(2).fold(T::zero(), |acc, w| acc + (w[1] - w[0]).norm())
    }
}
