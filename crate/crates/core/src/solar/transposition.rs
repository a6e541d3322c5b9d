//! Isotropic-sky plane-of-array transposition.

use serde::{Deserialize, Serialize};

use super::{direction_from_angles, IrradianceRecord, SunPosition};
use crate::geometry::Vec3;

pub const DEFAULT_ALBEDO: f64 = 0.2;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct POAIrradiance {
    pub beam: f64,
    pub diffuse_sky: f64,
    pub ground_reflected: f64,
}

impl POAIrradiance {
    /// Sky diffuse plus ground-reflected component.
    pub fn diffuse(&self) -> f64 {
        self.diffuse_sky + self.ground_reflected
    }

    pub fn total(&self) -> f64 {
        self.beam + self.diffuse()
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            beam: self.beam * k,
            diffuse_sky: self.diffuse_sky * k,
            ground_reflected: self.ground_reflected * k,
        }
    }
}

/// Irradiance components on a plane with unit normal `plane_normal`.
pub fn poa(
    record: &IrradianceRecord,
    pos: &SunPosition,
    plane_normal: Vec3,
    albedo: f64,
) -> POAIrradiance {
    let cos_tilt = plane_normal.z.clamp(-1.0, 1.0);
    let cos_aoi = if pos.is_daylight() {
        direction_from_angles(pos.azimuth_deg, pos.zenith_deg).dot(plane_normal)
    } else {
        0.0
    };
    POAIrradiance {
        beam: (record.dni * cos_aoi.max(0.0)).max(0.0),
        diffuse_sky: (record.dhi * (1.0 + cos_tilt) / 2.0).max(0.0),
        ground_reflected: (record.ghi * albedo * (1.0 - cos_tilt) / 2.0).max(0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rec(ghi: f64, dni: f64, dhi: f64) -> IrradianceRecord {
        IrradianceRecord {
            ghi,
            dni,
            dhi,
            ..IrradianceRecord::zero()
        }
    }

    fn sun(az: f64, z: f64) -> SunPosition {
        SunPosition {
            azimuth_deg: az,
            zenith_deg: z,
            distance_au: 1.0,
        }
    }

    #[test]
    fn horizontal_identity() {
        let p = sun(140.0, 35.0);
        let r = rec(700.0, 650.0, 700.0 - 650.0 * 35f64.to_radians().cos());
        let out = poa(&r, &p, Vec3::unit_z(), 0.0);
        assert!((out.beam + out.diffuse_sky - r.ghi).abs() < 1e-9);
        assert_eq!(out.ground_reflected, 0.0);
    }

    #[test]
    fn back_side_gets_no_beam() {
        let out = poa(
            &rec(500.0, 800.0, 100.0),
            &sun(180.0, 50.0),
            Vec3::new(0.0, 1.0, 0.0),
            0.2,
        );
        assert_eq!(out.beam, 0.0);
    }

    #[test]
    fn vertical_plane_sees_half_sky() {
        let out = poa(
            &rec(500.0, 800.0, 100.0),
            &sun(180.0, 50.0),
            Vec3::new(0.0, -1.0, 0.0),
            0.2,
        );
        assert!((out.diffuse_sky - 50.0).abs() < 1e-12);
        assert!((out.ground_reflected - 50.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn homogeneous_degree_one(
            ghi in 0.0f64..1200.0, dni in 0.0f64..1100.0, dhi in 0.0f64..500.0,
            k in 0.0f64..5.0, az in 0.0f64..360.0, z in 0.0f64..89.0,
            naz in 0.0f64..360.0, tilt in 0.0f64..90.0,
        ) {
            let n = direction_from_angles(naz, tilt);
            let base = poa(&rec(ghi, dni, dhi), &sun(az, z), n, 0.2);
            let scaled = poa(&rec(k * ghi, k * dni, k * dhi), &sun(az, z), n, 0.2);
            prop_assert!((scaled.beam - k * base.beam).abs() <= 1e-9 * (1.0 + k * base.beam));
            prop_assert!((scaled.diffuse_sky - k * base.diffuse_sky).abs() <= 1e-9 * (1.0 + k * base.diffuse_sky));
            prop_assert!((scaled.ground_reflected - k * base.ground_reflected).abs() <= 1e-9 * (1.0 + k * base.ground_reflected));
        }
    }
}
