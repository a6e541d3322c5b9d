//! Single-instant JSON dump for interactive previews.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{GeneratorInstant, InstantResult};
use crate::solar::SunPosition;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstantDump {
    pub instant: DateTime<Utc>,
    pub azimuth_deg: f64,
    pub zenith_deg: f64,
    pub daylight: bool,
    pub generators: Vec<GeneratorDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorDump {
    pub generator: String,
    pub poa_beam_wm2: f64,
    pub poa_diffuse_wm2: f64,
    pub p_unshaded_w: f64,
    pub p_shaded_w: f64,
    pub geometric_factor: f64,
    pub effective_factor: f64,
    pub shaded_samples: usize,
    /// 1 = shaded, in sample order (module, cell, sub-cell).
    pub mask: Vec<u8>,
    /// Shaded share of each cell, module-major.
    pub cell_fractions: Vec<f64>,
}

impl GeneratorDump {
    pub fn new(g: &GeneratorInstant) -> Self {
        let (mask, cell_fractions) = match &g.detail {
            Some(d) => (
                d.mask.shaded.iter().map(|&s| u8::from(s)).collect(),
                d.cell_fractions.clone(),
            ),
            None => (Vec::new(), Vec::new()),
        };
        Self {
            generator: g.generator.clone(),
            poa_beam_wm2: g.poa.beam,
            poa_diffuse_wm2: g.poa.diffuse(),
            p_unshaded_w: g.p_unshaded_w,
            p_shaded_w: g.p_shaded_w,
            geometric_factor: g.geometric_factor,
            effective_factor: g.effective_factor,
            shaded_samples: g.shaded_samples,
            mask,
            cell_fractions,
        }
    }
}

impl InstantDump {
    pub fn new(instant: DateTime<Utc>, sun: &SunPosition, generators: &[GeneratorInstant]) -> Self {
        Self {
            instant,
            azimuth_deg: sun.azimuth_deg,
            zenith_deg: sun.zenith_deg,
            daylight: sun.is_daylight(),
            generators: generators.iter().map(GeneratorDump::new).collect(),
        }
    }

    pub fn from_result(r: &InstantResult) -> Self {
        Self::new(r.instant, &r.sun, &r.generators)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("dump serializes")
    }
}
