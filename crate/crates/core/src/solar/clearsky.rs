//! Linke-turbidity clear-sky model with site-altitude correction.

use super::{IrradianceRecord, Site, SunPosition};

/// Solar constant (W/m²) used with the turbidity formulation.
pub const SOLAR_CONSTANT: f64 = 1367.0;

/// Kasten–Young relative optical air mass; `None` at or below the horizon.
pub fn relative_air_mass(zenith_deg: f64) -> Option<f64> {
    if !(zenith_deg < 90.0) {
        return None;
    }
    Some(1.0 / (zenith_deg.to_radians().cos() + 0.50572 * (96.07995 - zenith_deg).powf(-1.6364)))
}

/// Standard-atmosphere pressure (Pa) at an altitude (m).
pub(crate) fn pressure_at_altitude(altitude_m: f64) -> f64 {
    100.0 * ((44_331.514 - altitude_m) / 11_880.516).powf(1.0 / 0.1902632)
}

/// Clear-sky GHI/DNI/DHI for the sun position; all zero when the sun is down.
/// The returned record's instant and air temperature are left at defaults.
pub fn clear_sky(pos: &SunPosition, site: &Site) -> IrradianceRecord {
    let mut out = IrradianceRecord::zero();
    let Some(am_rel) = relative_air_mass(pos.zenith_deg) else {
        return out;
    };
    let cos_z = pos.zenith_deg.to_radians().cos();
    if cos_z <= 0.0 {
        return out;
    }
    let am = am_rel * pressure_at_altitude(site.altitude_m) / 101_325.0;
    let tl = site.turbidity;
    let h = site.altitude_m;
    let i0 = SOLAR_CONSTANT * pos.distance_factor();

    let fh1 = (-h / 8000.0).exp();
    let fh2 = (-h / 1250.0).exp();
    let cg1 = 5.09e-5 * h + 0.868;
    let cg2 = 3.92e-5 * h + 0.0387;

    let ghi = (cg1 * i0 * cos_z * (-cg2 * am * (fh1 + fh2 * (tl - 1.0))).exp()).max(0.0);

    let b = 0.664 + 0.163 / fh1;
    let dni_beam = (b * i0 * (-0.09 * am * (tl - 1.0)).exp()).max(0.0);
    // Upper bound keeping the diffuse share physical at high turbidity.
    let dni_cap = ghi * ((1.0 - (0.1 - 0.2 * (-tl).exp()) / (0.1 + 0.882 / fh1)) / cos_z).max(0.0);
    let dni = dni_beam.min(dni_cap);

    out.ghi = ghi;
    out.dni = dni;
    out.dhi = (ghi - dni * cos_z).max(0.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(zenith: f64) -> SunPosition {
        SunPosition {
            azimuth_deg: 180.0,
            zenith_deg: zenith,
            distance_au: 1.0,
        }
    }

    fn sea_level() -> Site {
        Site::new(40.0, 0.0, 0.0, 3.0).unwrap()
    }

    #[test]
    fn night_is_dark() {
        let r = clear_sky(&at(95.0), &sea_level());
        assert_eq!((r.ghi, r.dni, r.dhi), (0.0, 0.0, 0.0));
    }

    #[test]
    fn zenith_sun_golden_values() {
        // Hand evaluation at AM = 0.99971198, TL = 3, h = 0:
        //   DNI = 1367 · 0.827 · exp(-0.09·AM·2)    = 944.32945
        //   GHI = 0.868 · 1367 · exp(-0.0387·AM·3)  = 1056.52839
        //   cap = GHI · (1 - (0.1 - 0.2e^-3)/0.982) = 959.65207 (inactive)
        let r = clear_sky(&at(0.0), &sea_level());
        assert!((r.dni - 944.32945).abs() < 1e-4, "{}", r.dni);
        assert!((r.ghi - 1056.52839).abs() < 1e-4, "{}", r.ghi);
        assert!((r.dhi - 112.19895).abs() < 1e-4);
    }

    #[test]
    fn dni_falls_with_air_mass() {
        let s = sea_level();
        assert!(clear_sky(&at(60.0), &s).dni < clear_sky(&at(0.0), &s).dni);
        assert!(clear_sky(&at(80.0), &s).dni < clear_sky(&at(60.0), &s).dni);
    }

    #[test]
    fn altitude_raises_irradiance() {
        let high = Site::new(40.0, 0.0, 2000.0, 3.0).unwrap();
        assert!(clear_sky(&at(30.0), &high).ghi > clear_sky(&at(30.0), &sea_level()).ghi);
    }

    #[test]
    fn closure_below_85() {
        for tl in [2.0, 3.0, 5.0, 7.0] {
            for alt in [0.0, 1500.0] {
                let site = Site::new(40.0, 0.0, alt, tl).unwrap();
                for z in 0..85 {
                    let r = clear_sky(&at(f64::from(z)), &site);
                    let recon = r.dni * f64::from(z).to_radians().cos() + r.dhi;
                    assert!((r.ghi - recon).abs() <= 0.02 * r.ghi);
                    assert!(r.dhi >= 0.0 && r.dni >= 0.0);
                }
            }
        }
    }
}
