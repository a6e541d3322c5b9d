//! Sun position, clear-sky irradiance, weather ingestion, plane-of-array
//! transposition and daylight time-step enumeration.
//!
//! Angles in degrees; azimuth clockwise from North; timestamps UTC.

mod clearsky;
mod spa;
mod steps;
mod tables;
mod transposition;
mod weather;

use chrono::{DateTime, Datelike, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec3;

pub use clearsky::{clear_sky, relative_air_mass, SOLAR_CONSTANT};
pub use spa::{delta_t_estimate, ephemeris, Ephemeris, Refraction};
pub use steps::daylight_steps;
pub use transposition::{poa, POAIrradiance, DEFAULT_ALBEDO};
pub use weather::{
    load_weather, ClearSkySource, IrradianceRecord, WeatherError, WeatherMode, WeatherSource,
    WeatherTable,
};

/// Default Linke turbidity (typical rural atmosphere).
pub const DEFAULT_TURBIDITY: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolarError {
    #[error("instant {0} outside supported range 1950-2100")]
    OutOfRange(DateTime<Utc>),
    #[error("sun below horizon (zenith {zenith_deg:.3}°)")]
    SunBelowHorizon { zenith_deg: f64 },
    #[error("invalid site: {0}")]
    InvalidSite(String),
    #[error("empty period: from {from} is not before to {to}")]
    EmptyPeriod {
        from: DateTime<Utc>,
        to: DateTime<Utc>,
    },
    #[error("time step must be positive")]
    NonPositiveStep,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_m: f64,
    pub turbidity: f64,
}

impl Site {
    pub fn new(
        latitude_deg: f64,
        longitude_deg: f64,
        altitude_m: f64,
        turbidity: f64,
    ) -> Result<Self, SolarError> {
        let site = Self {
            latitude_deg,
            longitude_deg,
            altitude_m,
            turbidity,
        };
        site.validate()?;
        Ok(site)
    }

    pub fn validate(&self) -> Result<(), SolarError> {
        if !(self.latitude_deg.abs() <= 90.0) {
            return Err(SolarError::InvalidSite(format!(
                "latitude {} outside [-90, 90]",
                self.latitude_deg
            )));
        }
        if !(self.longitude_deg.abs() <= 180.0) {
            return Err(SolarError::InvalidSite(format!(
                "longitude {} outside [-180, 180]",
                self.longitude_deg
            )));
        }
        if !(self.turbidity > 0.0) || !self.turbidity.is_finite() {
            return Err(SolarError::InvalidSite(format!(
                "turbidity {} must be > 0",
                self.turbidity
            )));
        }
        if !self.altitude_m.is_finite() {
            return Err(SolarError::InvalidSite("altitude must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SunPosition {
    /// Clockwise from North, [0, 360).
    pub azimuth_deg: f64,
    /// Geometric (refraction-free) topocentric zenith, [0, 180].
    pub zenith_deg: f64,
    /// Earth–Sun distance (AU).
    pub distance_au: f64,
}

impl SunPosition {
    pub fn is_daylight(&self) -> bool {
        self.zenith_deg < 90.0
    }

    /// Multiplier applied to the solar constant for the current Earth–Sun distance.
    pub fn distance_factor(&self) -> f64 {
        1.0 / (self.distance_au * self.distance_au)
    }
}

pub fn supported_instant(instant: DateTime<Utc>) -> bool {
    (1950..=2100).contains(&instant.year())
}

/// Geometric sun position for a site; refraction is not applied.
pub fn sun_position(site: &Site, instant: DateTime<Utc>) -> Result<SunPosition, SolarError> {
    if !supported_instant(instant) {
        return Err(SolarError::OutOfRange(instant));
    }
    let e = ephemeris(
        instant,
        site.latitude_deg,
        site.longitude_deg,
        site.altitude_m,
        delta_t_estimate(instant),
        None,
    );
    Ok(SunPosition {
        azimuth_deg: e.azimuth,
        zenith_deg: e.zenith.clamp(0.0, 180.0),
        distance_au: e.radius_au,
    })
}

/// Unit vector from the scene toward the sun in (East, North, Up).
pub fn sun_direction(pos: &SunPosition) -> Result<Vec3, SolarError> {
    if !pos.is_daylight() {
        return Err(SolarError::SunBelowHorizon {
            zenith_deg: pos.zenith_deg,
        });
    }
    Ok(direction_from_angles(pos.azimuth_deg, pos.zenith_deg))
}

pub(crate) fn direction_from_angles(azimuth_deg: f64, zenith_deg: f64) -> Vec3 {
    use crate::num::Real;
    let (sz, cz) = f64::sin_cos_deg(zenith_deg);
    let (sa, ca) = f64::sin_cos_deg(azimuth_deg);
    Vec3::new(sz * sa, sz * ca, cz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone};
    use proptest::prelude::*;

    fn denver() -> Site {
        Site::new(39.742476, -105.1786, 1830.14, 3.0).unwrap()
    }

    #[test]
    fn denver_reference_within_tolerance() {
        let t = Utc.with_ymd_and_hms(2003, 10, 17, 19, 30, 30).unwrap();
        let p = sun_position(&denver(), t).unwrap();
        assert!((p.zenith_deg - 50.11).abs() < 0.05, "{}", p.zenith_deg);
        assert!((p.azimuth_deg - 194.34).abs() < 0.05, "{}", p.azimuth_deg);
    }

    #[test]
    fn equinox_noon_at_equator() {
        let site = Site::new(0.0, 0.0, 0.0, 3.0).unwrap();
        let t = Utc.with_ymd_and_hms(2023, 3, 20, 12, 7, 30).unwrap();
        let p = sun_position(&site, t).unwrap();
        assert!(p.zenith_deg < 0.7, "{}", p.zenith_deg);
    }

    #[test]
    fn midnight_is_night() {
        let site = Site::new(45.0, 0.0, 0.0, 3.0).unwrap();
        let t = Utc.with_ymd_and_hms(2023, 6, 21, 0, 0, 0).unwrap();
        assert!(sun_position(&site, t).unwrap().zenith_deg > 90.0);
    }

    #[test]
    fn range_and_site_errors() {
        let t = Utc.with_ymd_and_hms(1949, 12, 31, 23, 0, 0).unwrap();
        assert!(matches!(
            sun_position(&denver(), t),
            Err(SolarError::OutOfRange(_))
        ));
        let t = Utc.with_ymd_and_hms(2101, 1, 1, 0, 0, 0).unwrap();
        assert!(sun_position(&denver(), t).is_err());
        assert!(Site::new(91.0, 0.0, 0.0, 3.0).is_err());
        assert!(Site::new(0.0, 181.0, 0.0, 3.0).is_err());
        assert!(Site::new(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn direction_examples() {
        let d = sun_direction(&SunPosition {
            azimuth_deg: 123.0,
            zenith_deg: 0.0,
            distance_au: 1.0,
        })
        .unwrap();
        assert_eq!(d, Vec3::new(0.0, 0.0, 1.0));
        let d = direction_from_angles(90.0, 90.0);
        assert!((d - Vec3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
        let d = sun_direction(&SunPosition {
            azimuth_deg: 180.0,
            zenith_deg: 60.0,
            distance_au: 1.0,
        })
        .unwrap();
        let s60 = 60f64.to_radians().sin();
        assert!((d - Vec3::new(0.0, -s60, 0.5)).norm() < 1e-12);
        let night = SunPosition {
            azimuth_deg: 0.0,
            zenith_deg: 90.0,
            distance_au: 1.0,
        };
        assert!(matches!(
            sun_direction(&night),
            Err(SolarError::SunBelowHorizon { .. })
        ));
    }

    #[test]
    fn day_path_is_continuous() {
        let site = Site::new(40.0, -3.7, 650.0, 3.0).unwrap();
        let start = Utc.with_ymd_and_hms(2023, 6, 21, 0, 0, 0).unwrap();
        let mut prev: Option<SunPosition> = None;
        for k in 0..144 {
            let p = sun_position(&site, start + Duration::minutes(10 * k)).unwrap();
            if let Some(q) = prev {
                let daz = (p.azimuth_deg - q.azimuth_deg).rem_euclid(360.0);
                let daz = daz.min(360.0 - daz);
                assert!((p.zenith_deg - q.zenith_deg).abs() < 4.0);
                let sep = direction_from_angles(p.azimuth_deg, p.zenith_deg)
                    .dot(direction_from_angles(q.azimuth_deg, q.zenith_deg))
                    .clamp(-1.0, 1.0)
                    .acos()
                    .to_degrees();
                assert!(sep < 4.0, "step {k}: {sep}");
                // Azimuth rate diverges as the sun nears the zenith.
                if p.zenith_deg > 45.0 && q.zenith_deg > 45.0 {
                    assert!(daz < 4.0, "step {k}: {daz}");
                }
            }
            prev = Some(p);
        }
    }

    proptest! {
        #[test]
        fn angles_stay_in_range(
            lat in -90.0f64..=90.0,
            lon in -180.0f64..=180.0,
            secs in 0i64..(150 * 365 * 86_400),
        ) {
            let site = Site::new(lat, lon, 0.0, 3.0).unwrap();
            let t = Utc.with_ymd_and_hms(1950, 1, 1, 0, 0, 0).unwrap() + Duration::seconds(secs);
            let p = sun_position(&site, t).unwrap();
            prop_assert!((0.0..=180.0).contains(&p.zenith_deg));
            prop_assert!((0.0..360.0).contains(&p.azimuth_deg));
        }
    }
}
