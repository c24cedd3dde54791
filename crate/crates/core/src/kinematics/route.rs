//! Four-way junction geometry and the 16 routes through it.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Approach {
    S,
    E,
    N,
    W,
}

impl Approach {
    /// Rotation taking the northbound template onto this approach.
    fn rotation(self) -> f64 {
        match self {
            Approach::S => 0.0,
            Approach::E => FRAC_PI_2,
            Approach::N => PI,
            Approach::W => -FRAC_PI_2,
        }
    }

    fn letter(self) -> char {
        match self {
            Approach::S => 'S',
            Approach::E => 'E',
            Approach::N => 'N',
            Approach::W => 'W',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'S' => Some(Approach::S),
            'E' => Some(Approach::E),
            'N' => Some(Approach::N),
            'W' => Some(Approach::W),
            _ => None,
        }
    }

    /// Arm reached after turning right, i.e. 90° clockwise of the travel
    /// direction.
    fn right_exit(self) -> Self {
        match self {
            Approach::S => Approach::E,
            Approach::E => Approach::N,
            Approach::N => Approach::W,
            Approach::W => Approach::S,
        }
    }

    fn opposite(self) -> Self {
        match self {
            Approach::S => Approach::N,
            Approach::E => Approach::W,
            Approach::N => Approach::S,
            Approach::W => Approach::E,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Maneuver {
    Straight,
    Right,
    Left,
    UTurn,
}

/// One of the 16 junction routes, named `<from>2<to>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Route {
    pub from: Approach,
    pub maneuver: Maneuver,
}

impl Route {
    pub const fn new(from: Approach, maneuver: Maneuver) -> Self {
        Route { from, maneuver }
    }

    pub fn all() -> Vec<Route> {
        let mut v = Vec::with_capacity(16);
        for maneuver in [Maneuver::Straight, Maneuver::Right, Maneuver::Left, Maneuver::UTurn] {
            for from in [Approach::S, Approach::E, Approach::N, Approach::W] {
                v.push(Route { from, maneuver });
            }
        }
        v
    }

    pub fn to(self) -> Approach {
        match self.maneuver {
            Maneuver::Straight => self.from.opposite(),
            Maneuver::Right => self.from.right_exit(),
            Maneuver::Left => self.from.right_exit().opposite(),
            Maneuver::UTurn => self.from,
        }
    }

    pub fn name(self) -> String {
        format!("{}2{}", self.from.letter(), self.to().letter())
    }

    /// Path of the vehicle center for this route in world coordinates.
    pub fn path(self, geometry: &JunctionGeometry, total_length: f64) -> Result<RoutePath, RouteError> {
        let h = geometry.lane_offset;
        let (start, segment, exit_dir, maneuver_len) = match self.maneuver {
            Maneuver::Straight => {
                let len = 4.0 * h;
                (
                    [h, -2.0 * h],
                    Segment::Line { start: [h, -2.0 * h], dir: [0.0, 1.0], len },
                    [0.0, 1.0],
                    len,
                )
            }
            Maneuver::Right => {
                let r = geometry.right_radius;
                let start = [h, -h - r];
                (start, Segment::arc([h + r, -h - r], r, PI, -FRAC_PI_2), [1.0, 0.0], r * FRAC_PI_2)
            }
            Maneuver::Left => {
                let r = geometry.left_radius;
                let start = [h, h - r];
                (start, Segment::arc([h - r, h - r], r, 0.0, FRAC_PI_2), [-1.0, 0.0], r * FRAC_PI_2)
            }
            Maneuver::UTurn => {
                let r = geometry.u_turn_radius;
                (
                    [h, 0.0],
                    Segment::arc([h - r, 0.0], r, 0.0, PI),
                    [0.0, -1.0],
                    r * PI,
                )
            }
        };
        if total_length < maneuver_len {
            return Err(RouteError::TooShort { needed_m: maneuver_len });
        }
        let lead = 0.5 * (total_length - maneuver_len);
        let end = segment.point(maneuver_len);
        let segments = vec![
            Segment::Line { start: [start[0], start[1] - lead], dir: [0.0, 1.0], len: lead },
            segment,
            Segment::Line { start: end, dir: exit_dir, len: lead },
        ];
        let phi = self.from.rotation();
        Ok(RoutePath {
            segments,
            rotation: [phi.cos(), phi.sin()],
            origin: geometry.center,
            length: total_length,
        })
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RouteError {
    #[error("unknown route '{0}' (expected e.g. S2N, S2E, S2W, S2S)")]
    Unknown(String),
    #[error("path shorter than the {needed_m:.2} m maneuver")]
    TooShort { needed_m: f64 },
}

impl FromStr for Route {
    type Err = RouteError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let chars: Vec<char> = s.trim().chars().collect();
        let bad = || RouteError::Unknown(s.to_string());
        if chars.len() != 3 || chars[1] != '2' {
            return Err(bad());
        }
        let from = Approach::from_letter(chars[0]).ok_or_else(bad)?;
        let to = Approach::from_letter(chars[2]).ok_or_else(bad)?;
        [Maneuver::Straight, Maneuver::Right, Maneuver::Left, Maneuver::UTurn]
            .into_iter()
            .map(|m| Route::new(from, m))
            .find(|r| r.to() == to)
            .ok_or_else(bad)
    }
}

impl Serialize for Route {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.name())
    }
}

impl<'de> Deserialize<'de> for Route {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Junction layout. Roads run along the x and y axes through `center`;
/// vehicles keep right at `lane_offset` from the road axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct JunctionGeometry {
    pub center: [f64; 2],
    pub lane_offset: f64,
    pub right_radius: f64,
    pub left_radius: f64,
    pub u_turn_radius: f64,
}

impl Default for JunctionGeometry {
    fn default() -> Self {
        JunctionGeometry {
            center: [0.0, 30.0],
            lane_offset: 1.75,
            right_radius: 6.0,
            left_radius: 4.0,
            u_turn_radius: 3.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Segment {
    Line { start: [f64; 2], dir: [f64; 2], len: f64 },
    Arc { center: [f64; 2], radius: f64, start_angle: f64, sweep: f64 },
}

impl Segment {
    fn arc(center: [f64; 2], radius: f64, start_angle: f64, sweep: f64) -> Self {
        Segment::Arc { center, radius, start_angle, sweep }
    }

    fn len(&self) -> f64 {
        match *self {
            Segment::Line { len, .. } => len,
            Segment::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    fn point(&self, s: f64) -> [f64; 2] {
        match *self {
            Segment::Line { start, dir, .. } => [start[0] + dir[0] * s, start[1] + dir[1] * s],
            Segment::Arc { center, radius, start_angle, sweep } => {
                let a = start_angle + sweep.signum() * s / radius;
                [center[0] + radius * a.cos(), center[1] + radius * a.sin()]
            }
        }
    }
}

/// Arc-length parameterised center path.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutePath {
    segments: Vec<Segment>,
    rotation: [f64; 2],
    origin: [f64; 2],
    length: f64,
}

impl RoutePath {
    pub fn length(&self) -> f64 {
        self.length
    }

    /// Point at arc length `s`, clamped to the path.
    pub fn point(&self, s: f64) -> [f64; 2] {
        let mut s = s.clamp(0.0, self.length);
        let last = self.segments[self.segments.len() - 1];
        let mut local = last.point(last.len());
        for seg in &self.segments {
            if s <= seg.len() {
                local = seg.point(s);
                break;
            }
            s -= seg.len();
        }
        let [c, sn] = self.rotation;
        [
            self.origin[0] + c * local[0] - sn * local[1],
            self.origin[1] + sn * local[0] + c * local[1],
        ]
    }
}
