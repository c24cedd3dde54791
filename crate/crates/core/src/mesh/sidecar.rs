//! Sidecar metadata and wheel-labeling rules.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{MeshError, WheelId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarWheel {
    pub group: String,
    pub center: [f64; 3],
    pub radius: f64,
    /// Half the tire width. When given, facets outside a named group that
    /// fall inside the wheel's bounding cylinder are also assigned to it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

/// JSON file stored next to a mesh: `{"center"?, "wheels", "label", "heading_deg"?}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 3]>,
    #[serde(default)]
    pub wheels: Vec<SidecarWheel>,
    pub label: String,
    /// Direction the mesh's front faces, degrees from +x. Defaults to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading_deg: Option<f64>,
}

impl Sidecar {
    pub fn read(path: &Path) -> Result<Self, MeshError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| MeshError::Sidecar(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| MeshError::Sidecar(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<(), MeshError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| MeshError::Sidecar(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WheelRule {
    pub group: String,
    pub center: [f64; 3],
    pub radius: f64,
    pub half_width: Option<f64>,
}

/// How facets are assigned to wheels, plus the center and label overrides.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PartMap {
    pub wheels: Vec<WheelRule>,
    pub center: Option<[f64; 3]>,
    pub label: String,
    pub heading_deg: f64,
}

impl From<&Sidecar> for PartMap {
    fn from(s: &Sidecar) -> Self {
        PartMap {
            wheels: s
                .wheels
                .iter()
                .map(|w| WheelRule {
                    group: w.group.clone(),
                    center: w.center,
                    radius: w.radius,
                    half_width: w.half_width,
                })
                .collect(),
            center: s.center,
            label: s.label.clone(),
            heading_deg: s.heading_deg.unwrap_or(0.0),
        }
    }
}

impl PartMap {
    /// Wheel for a facet in `group` with the given centroid. Named groups
    /// win; otherwise the first bounding cylinder containing the centroid.
    /// Wheel axles are assumed along the mesh's lateral axis.
    pub fn wheel_for(&self, group: &str, centroid: &[f64; 3]) -> Option<WheelId> {
        if let Some(i) = self.wheels.iter().position(|w| w.group == group) {
            return Some(WheelId(i));
        }
        let heading = self.heading_deg.to_radians();
        let axle = [-heading.sin(), heading.cos()];
        self.wheels
            .iter()
            .position(|w| {
                let Some(hw) = w.half_width else { return false };
                let d = [
                    centroid[0] - w.center[0],
                    centroid[1] - w.center[1],
                    centroid[2] - w.center[2],
                ];
                let along = d[0] * axle[0] + d[1] * axle[1];
                let radial2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2] - along * along;
                along.abs() <= hw && radial2 <= w.radius * w.radius
            })
            .map(WheelId)
    }
}

pub(crate) fn is_wheel_group(name: &str) -> bool {
    name.to_ascii_lowercase().starts_with("wheel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_json_roundtrip_and_defaults() {
        let json = r#"{"wheels":[{"group":"wheel_fl","center":[1,0.8,0.3],"radius":0.3}],"label":"car"}"#;
        let s: Sidecar = serde_json::from_str(json).unwrap();
        assert_eq!(s.center, None);
        assert_eq!(s.heading_deg, None);
        let back: Sidecar = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn bounding_cylinder_assignment() {
        let map = PartMap {
            wheels: vec![WheelRule {
                group: "hub".into(),
                center: [1.0, 0.8, 0.3],
                radius: 0.3,
                half_width: Some(0.1),
            }],
            ..PartMap::default()
        };
        assert_eq!(map.wheel_for("hub", &[9.0, 9.0, 9.0]), Some(WheelId(0)));
        assert_eq!(map.wheel_for("body", &[1.1, 0.85, 0.45]), Some(WheelId(0)));
        assert_eq!(map.wheel_for("body", &[1.1, 0.95, 0.45]), None);
        assert_eq!(map.wheel_for("body", &[1.0, 0.8, 0.65]), None);
    }
}
