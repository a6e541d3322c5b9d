//! Versioned JSON scene description.

use serde::{Deserialize, Serialize};

use super::PVGeneratorSpec;
use crate::electrical::CellParams;
use crate::geometry::{GeometryError, Transform, Vec3};
use crate::solar::{Site, SolarError, DEFAULT_ALBEDO, DEFAULT_TURBIDITY};

pub const SCENE_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneDocument {
    pub version: u32,
    pub site: SiteDoc,
    #[serde(default)]
    pub objects: Vec<ObjectDoc>,
    #[serde(default)]
    pub generators: Vec<PVGeneratorSpec>,
    #[serde(default)]
    pub cell_params: CellParams,
    #[serde(default)]
    pub engine: EngineSettings,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiteDoc {
    pub lat_deg: f64,
    pub lon_deg: f64,
    #[serde(default)]
    pub altitude_m: f64,
    #[serde(default = "default_turbidity")]
    pub turbidity: f64,
}

fn default_turbidity() -> f64 {
    DEFAULT_TURBIDITY
}

impl SiteDoc {
    pub fn to_site(&self) -> Result<Site, SolarError> {
        Site::new(self.lat_deg, self.lon_deg, self.altitude_m, self.turbidity)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectDoc {
    pub id: String,
    pub obj_path: String,
    #[serde(default)]
    pub translation_m: [f64; 3],
    /// Euler angles about Z, Y, X (degrees), applied in that order.
    #[serde(default)]
    pub rotation_deg: [f64; 3],
    #[serde(default = "unit_scale")]
    pub scale: [f64; 3],
    #[serde(default = "yes")]
    pub visible: bool,
}

fn unit_scale() -> [f64; 3] {
    [1.0; 3]
}

fn yes() -> bool {
    true
}

impl ObjectDoc {
    pub fn transform(&self) -> Result<Transform, GeometryError> {
        Transform::new(
            Vec3::from_array(self.translation_m),
            self.rotation_deg,
            Vec3::from_array(self.scale),
        )
    }
}

/// Numerical settings of the shading engine.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineSettings {
    /// Depth-map size (W, H) per generator footprint.
    #[serde(default = "default_resolution")]
    pub resolution: [usize; 2],
    #[serde(default = "default_albedo")]
    pub albedo: f64,
}

fn default_resolution() -> [usize; 2] {
    [2048, 2048]
}

fn default_albedo() -> f64 {
    DEFAULT_ALBEDO
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            resolution: default_resolution(),
            albedo: DEFAULT_ALBEDO,
        }
    }
}

impl EngineSettings {
    pub fn validate(&self) -> Result<(), String> {
        if self.resolution.iter().any(|&r| r == 0 || r > 16_384) {
            return Err(format!(
                "resolution {:?} outside 1..=16384",
                self.resolution
            ));
        }
        if !(0.0..=1.0).contains(&self.albedo) {
            return Err(format!("albedo {} outside [0, 1]", self.albedo));
        }
        Ok(())
    }
}

impl SceneDocument {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("scene document serializes")
    }

    /// Scales every object and generator uniformly about the world origin.
    pub fn scaled_uniform(&self, k: f64) -> Self {
        let mut out = self.clone();
        for o in &mut out.objects {
            o.translation_m = o.translation_m.map(|c| c * k);
            o.scale = o.scale.map(|c| c * k);
        }
        for g in &mut out.generators {
            g.origin = g.origin.map(|c| c * k);
            g.module_w_m *= k;
            g.module_h_m *= k;
            g.gap_row_m *= k;
            g.gap_col_m *= k;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_uses_defaults() {
        let text = r#"{
            "version": 1,
            "site": {"lat_deg": 40.0, "lon_deg": -3.7},
            "objects": [{"id": "wall", "obj_path": "wall.obj"}],
            "generators": [{
                "id": "g1", "origin_m": [0, 0, 0], "mode": "fixed", "azimuth_deg": 180, "tilt_deg": 30,
                "module_rows": 1, "module_cols": 12, "module_w_m": 0.66, "module_h_m": 1.5,
                "cell_rows": 9, "cell_cols": 4,
                "substrings": [[0,1,2,3,4,5,6,7,8,9,10,11,12,13,14,15,16,17],
                               [18,19,20,21,22,23,24,25,26,27,28,29,30,31,32,33,34,35]],
                "modules_per_string": 12, "strings_parallel": 1
            }]
        }"#;
        let doc = SceneDocument::from_json(text).unwrap();
        assert_eq!(doc.site.turbidity, DEFAULT_TURBIDITY);
        assert_eq!(doc.objects[0].scale, [1.0; 3]);
        assert!(doc.objects[0].visible);
        assert_eq!(doc.generators[0].subdivision, 3);
        assert!(!doc.generators[0].self_occluding);
        assert_eq!(doc.engine, EngineSettings::default());
        let again = SceneDocument::from_json(&doc.to_json_pretty()).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn bad_scale_names_axis() {
        let o = ObjectDoc {
            id: "o".into(),
            obj_path: "x.obj".into(),
            translation_m: [0.0; 3],
            rotation_deg: [0.0; 3],
            scale: [0.0, 1.0, 1.0],
            visible: true,
        };
        assert_eq!(
            o.transform().unwrap_err().to_string(),
            "scale[0] must be > 0, got 0"
        );
    }
}
