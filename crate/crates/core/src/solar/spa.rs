//! High-accuracy solar ephemeris (periodic-term series for the Earth's
//! heliocentric position, IAU nutation series, topocentric parallax).
//!
//! Angles are carried in degrees between steps and converted at the trig
//! call sites, following the reference formulation step for step.

use chrono::{DateTime, Datelike, Utc};

use super::tables::{B0, B1, L0, L1, L2, L3, L4, L5, NUTATION, R0, R1, R2, R3, R4};

/// Intermediate and final quantities of one ephemeris evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ephemeris {
    pub julian_day: f64,
    /// Heliocentric longitude (deg).
    pub helio_longitude: f64,
    /// Heliocentric latitude (deg).
    pub helio_latitude: f64,
    /// Earth radius vector (AU).
    pub radius_au: f64,
    pub nutation_longitude: f64,
    pub nutation_obliquity: f64,
    pub true_obliquity: f64,
    pub apparent_longitude: f64,
    pub right_ascension: f64,
    pub declination: f64,
    pub hour_angle: f64,
    pub topocentric_declination: f64,
    pub topocentric_hour_angle: f64,
    /// Topocentric elevation without refraction (deg).
    pub elevation_geometric: f64,
    /// Topocentric zenith, refraction included when requested (deg).
    pub zenith: f64,
    /// Azimuth, clockwise from North (deg).
    pub azimuth: f64,
}

/// Optional atmospheric refraction parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Refraction {
    pub pressure_mbar: f64,
    pub temperature_c: f64,
}

pub(crate) fn julian_day(instant: DateTime<Utc>) -> f64 {
    let secs = instant.timestamp() as f64 + f64::from(instant.timestamp_subsec_nanos()) * 1e-9;
    secs / 86_400.0 + 2_440_587.5
}

/// ΔT = TT − UT (s), polynomial estimates valid 1941–2150.
pub fn delta_t_estimate(instant: DateTime<Utc>) -> f64 {
    let y = f64::from(instant.year()) + (f64::from(instant.month()) - 0.5) / 12.0;
    if y < 1961.0 {
        let t = y - 1950.0;
        29.07 + 0.407 * t - t * t / 233.0 + t.powi(3) / 2547.0
    } else if y < 1986.0 {
        let t = y - 1975.0;
        45.45 + 1.067 * t - t * t / 260.0 - t.powi(3) / 718.0
    } else if y < 2005.0 {
        let t = y - 2000.0;
        63.86 + 0.3345 * t - 0.060374 * t * t
            + 0.0017275 * t.powi(3)
            + 0.000651814 * t.powi(4)
            + 0.00002373599 * t.powi(5)
    } else if y < 2050.0 {
        let t = y - 2000.0;
        62.92 + 0.32217 * t + 0.005589 * t * t
    } else {
        let u = (y - 1820.0) / 100.0;
        -20.0 + 32.0 * u * u - 0.5628 * (2150.0 - y)
    }
}

fn series(terms: &[&[[f64; 3]]], jme: f64) -> f64 {
    let mut acc = 0.0;
    let mut pow = 1.0;
    for rows in terms {
        let s: f64 = rows.iter().map(|[a, b, c]| a * (b + c * jme).cos()).sum();
        acc += s * pow;
        pow *= jme;
    }
    acc / 1e8
}

fn wrap360(x: f64) -> f64 {
    let r = x.rem_euclid(360.0);
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

/// Full evaluation for a site given as latitude/longitude (deg) and altitude (m).
pub fn ephemeris(
    instant: DateTime<Utc>,
    latitude: f64,
    longitude: f64,
    altitude_m: f64,
    delta_t: f64,
    refraction: Option<Refraction>,
) -> Ephemeris {
    let jd = julian_day(instant);
    let jde = jd + delta_t / 86_400.0;
    let jc = (jd - 2_451_545.0) / 36_525.0;
    let jce = (jde - 2_451_545.0) / 36_525.0;
    let jme = jce / 10.0;

    let l = wrap360(series(&[&L0, &L1, &L2, &L3, &L4, &L5], jme).to_degrees());
    let b = series(&[&B0, &B1], jme).to_degrees();
    let r = series(&[&R0, &R1, &R2, &R3, &R4], jme);

    let theta = wrap360(l + 180.0);
    let beta = -b;

    let x = [
        297.85036 + 445_267.111480 * jce - 0.0019142 * jce * jce + jce.powi(3) / 189_474.0,
        357.52772 + 35_999.050340 * jce - 0.0001603 * jce * jce - jce.powi(3) / 300_000.0,
        134.96298 + 477_198.867398 * jce + 0.0086972 * jce * jce + jce.powi(3) / 56_250.0,
        93.27191 + 483_202.017538 * jce - 0.0036825 * jce * jce + jce.powi(3) / 327_270.0,
        125.04452 - 1_934.136261 * jce + 0.0020708 * jce * jce + jce.powi(3) / 450_000.0,
    ];
    let (mut dpsi, mut deps) = (0.0, 0.0);
    for (y, [a, bb, c, d]) in NUTATION.iter() {
        let arg: f64 = y
            .iter()
            .zip(x.iter())
            .map(|(&yi, xi)| f64::from(yi) * xi)
            .sum::<f64>()
            .to_radians();
        dpsi += (a + bb * jce) * arg.sin();
        deps += (c + d * jce) * arg.cos();
    }
    let dpsi = dpsi / 36_000_000.0;
    let deps = deps / 36_000_000.0;

    let u = jme / 10.0;
    let eps0 = 84_381.448 - 4_680.93 * u - 1.55 * u.powi(2) + 1_999.25 * u.powi(3)
        - 51.38 * u.powi(4)
        - 249.67 * u.powi(5)
        - 39.05 * u.powi(6)
        + 7.12 * u.powi(7)
        + 27.87 * u.powi(8)
        + 5.79 * u.powi(9)
        + 2.45 * u.powi(10);
    let eps = eps0 / 3600.0 + deps;

    let dtau = -20.4898 / (3600.0 * r);
    let lambda = theta + dpsi + dtau;

    let nu0 = wrap360(
        280.46061837 + 360.98564736629 * (jd - 2_451_545.0) + 0.000387933 * jc * jc
            - jc.powi(3) / 38_710_000.0,
    );
    let nu = nu0 + dpsi * eps.to_radians().cos();

    let (lr, er, br) = (lambda.to_radians(), eps.to_radians(), beta.to_radians());
    let alpha = wrap360(
        (lr.sin() * er.cos() - br.tan() * er.sin())
            .atan2(lr.cos())
            .to_degrees(),
    );
    let delta = (br.sin() * er.cos() + br.cos() * er.sin() * lr.sin())
        .asin()
        .to_degrees();

    let h = wrap360(nu + longitude - alpha);

    // topocentric parallax
    let xi = (8.794 / (3600.0 * r)).to_radians();
    let phi = latitude.to_radians();
    let uu = (0.99664719 * phi.tan()).atan();
    let xx = uu.cos() + altitude_m / 6_378_140.0 * phi.cos();
    let yy = 0.99664719 * uu.sin() + altitude_m / 6_378_140.0 * phi.sin();
    let (hr, dr) = (h.to_radians(), delta.to_radians());
    let dalpha = (-xx * xi.sin() * hr.sin()).atan2(dr.cos() - xx * xi.sin() * hr.cos());
    let delta_p =
        ((dr.sin() - yy * xi.sin()) * dalpha.cos()).atan2(dr.cos() - xx * xi.sin() * hr.cos());
    let h_p = hr - dalpha;

    let e0 = (phi.sin() * delta_p.sin() + phi.cos() * delta_p.cos() * h_p.cos())
        .asin()
        .to_degrees();
    let de = match refraction {
        Some(Refraction {
            pressure_mbar,
            temperature_c,
        }) if e0 >= -(0.26667 + 0.5667) => {
            (pressure_mbar / 1010.0) * (283.0 / (273.0 + temperature_c)) * 1.02
                / (60.0 * (e0 + 10.3 / (e0 + 5.11)).to_radians().tan())
        }
        _ => 0.0,
    };
    let zenith = 90.0 - (e0 + de);

    let gamma = h_p
        .sin()
        .atan2(h_p.cos() * phi.sin() - delta_p.tan() * phi.cos())
        .to_degrees();
    let azimuth = wrap360(gamma + 180.0);

    Ephemeris {
        julian_day: jd,
        helio_longitude: l,
        helio_latitude: b,
        radius_au: r,
        nutation_longitude: dpsi,
        nutation_obliquity: deps,
        true_obliquity: eps,
        apparent_longitude: lambda,
        right_ascension: alpha,
        declination: delta,
        hour_angle: h,
        topocentric_declination: delta_p.to_degrees(),
        topocentric_hour_angle: wrap360(h_p.to_degrees()),
        elevation_geometric: e0,
        zenith,
        azimuth,
    }
}
