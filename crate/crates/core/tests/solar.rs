//! Sun positions against the frozen set in `support/solar_reference.rs`.

#[path = "support/solar_reference.rs"]
mod solar_reference;

use chrono::{DateTime, Utc};
use helios_core::solar::{sun_position, Site};
use solar_reference::{CASES, TOLERANCE_DEG};

fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

#[test]
fn positions_match_reference_set() {
    for &(lat, lon, alt, at, zenith, azimuth) in CASES {
        let site = Site::new(lat, lon, alt, 3.0).unwrap();
        let t: DateTime<Utc> = at.parse().unwrap();
        let p = sun_position(&site, t).unwrap();
        assert!(
            (p.zenith_deg - zenith).abs() <= TOLERANCE_DEG,
            "{at} at ({lat}, {lon}): zenith {} vs {zenith}",
            p.zenith_deg
        );
        assert!(
            angle_diff(p.azimuth_deg, azimuth) <= TOLERANCE_DEG,
            "{at} at ({lat}, {lon}): azimuth {} vs {azimuth}",
            p.azimuth_deg
        );
    }
}
