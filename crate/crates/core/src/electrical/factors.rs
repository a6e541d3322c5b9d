//! Irradiance reduction and shading-factor definitions.

use super::ElectricalError;
use crate::solar::POAIrradiance;

const CONSISTENCY_TOLERANCE: f64 = 1e-9;

/// Beam removed from the shaded share of a cell: `(1 − f)·beam + diffuse`.
pub fn effective_irradiance(beam: f64, diffuse: f64, shaded_fraction: f64) -> f64 {
    (1.0 - shaded_fraction.clamp(0.0, 1.0)) * beam.max(0.0) + diffuse.max(0.0)
}

/// `1 − P_shaded/P_unshaded`, or 0 without unshaded power.
pub fn effective_shading_factor(p_shaded: f64, p_unshaded: f64) -> Result<f64, ElectricalError> {
    if !(p_unshaded > 0.0) {
        return Ok(0.0);
    }
    if p_shaded > p_unshaded * (1.0 + CONSISTENCY_TOLERANCE) {
        return Err(ElectricalError::Inconsistent {
            p_shaded,
            p_unshaded,
        });
    }
    Ok((1.0 - p_shaded / p_unshaded).clamp(0.0, 1.0))
}

/// Mean share of plane-of-array irradiance removed by shadows.
pub fn geometric_shading_factor(fractions: &[f64], poa: &POAIrradiance) -> f64 {
    let total = poa.total();
    if !(total > 0.0) || fractions.is_empty() {
        return 0.0;
    }
    let mean = fractions.iter().sum::<f64>() / fractions.len() as f64;
    (mean * poa.beam / total).clamp(0.0, 1.0)
}
