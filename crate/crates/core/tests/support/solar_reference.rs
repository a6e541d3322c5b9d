//! Frozen solar positions for checking `sun_position`.
//!
//! Geometric (refraction-free) topocentric zenith and azimuth in degrees,
//! azimuth clockwise from north, produced by an independent implementation
//! of the same ephemeris. The first row is the Denver example with
//! refraction removed.

/// (latitude, longitude, altitude m, UTC instant, zenith, azimuth)
pub const CASES: &[(f64, f64, f64, &str, f64, f64)] = &[
    (
        39.742476,
        -105.1786,
        1830.14,
        "2003-10-17T19:30:30Z",
        50.12795,
        194.34024,
    ),
    (
        39.742476,
        -105.1786,
        1830.14,
        "2040-09-21T11:47:41Z",
        102.36060,
        79.02159,
    ),
    (
        39.742476,
        -105.1786,
        1830.14,
        "2055-08-14T02:58:26Z",
        101.16030,
        299.55145,
    ),
    (
        39.742476,
        -105.1786,
        1830.14,
        "2032-05-18T09:50:57Z",
        108.05933,
        42.90463,
    ),
    (
        39.742476,
        -105.1786,
        1830.14,
        "2003-01-02T23:13:16Z",
        85.25764,
        234.79497,
    ),
    (
        51.4779,
        0.0,
        46.0,
        "2032-10-13T08:56:37Z",
        69.74571,
        134.65374,
    ),
    (
        51.4779,
        0.0,
        46.0,
        "1981-05-05T03:09:19Z",
        100.41138,
        46.66779,
    ),
    (
        51.4779,
        0.0,
        46.0,
        "2010-01-12T23:25:34Z",
        148.91689,
        340.41101,
    ),
    (
        51.4779,
        0.0,
        46.0,
        "1964-11-24T22:00:27Z",
        142.88558,
        316.01921,
    ),
    (
        -33.8688,
        151.2093,
        58.0,
        "1980-08-12T22:36:53Z",
        68.51709,
        53.64391,
    ),
    (
        -33.8688,
        151.2093,
        58.0,
        "2059-11-26T04:34:25Z",
        40.01389,
        277.50076,
    ),
    (
        -33.8688,
        151.2093,
        58.0,
        "2092-11-21T02:00:48Z",
        14.46191,
        341.12346,
    ),
    (
        -33.8688,
        151.2093,
        58.0,
        "2056-08-27T12:17:29Z",
        146.83039,
        228.97213,
    ),
    (
        64.1466,
        -21.9426,
        20.0,
        "2039-02-04T21:46:50Z",
        117.81920,
        291.81246,
    ),
    (
        64.1466,
        -21.9426,
        20.0,
        "2046-12-23T00:59:56Z",
        139.04555,
        350.64699,
    ),
    (
        64.1466,
        -21.9426,
        20.0,
        "2001-10-24T10:44:07Z",
        81.02011,
        143.42869,
    ),
    (
        64.1466,
        -21.9426,
        20.0,
        "1955-05-02T19:59:14Z",
        79.93215,
        284.43032,
    ),
    (
        1.3521,
        103.8198,
        15.0,
        "2048-12-23T09:14:48Z",
        65.71358,
        243.46581,
    ),
    (
        1.3521,
        103.8198,
        15.0,
        "2024-02-10T08:02:35Z",
        43.48985,
        247.15660,
    ),
    (
        1.3521,
        103.8198,
        15.0,
        "2075-04-21T15:08:50Z",
        148.55423,
        296.02403,
    ),
    (
        1.3521,
        103.8198,
        15.0,
        "2034-04-22T02:16:45Z",
        42.66915,
        73.39445,
    ),
    (
        -54.8019,
        -68.303,
        10.0,
        "2003-03-27T06:02:46Z",
        124.92771,
        154.11118,
    ),
    (
        -54.8019,
        -68.303,
        10.0,
        "2089-02-18T08:24:28Z",
        99.71698,
        126.02969,
    ),
    (
        -54.8019,
        -68.303,
        10.0,
        "2028-06-11T04:41:44Z",
        148.27367,
        176.14557,
    ),
    (
        -54.8019,
        -68.303,
        10.0,
        "1998-07-06T11:01:22Z",
        105.11994,
        71.94130,
    ),
    (45.0, 7.7, 240.0, "2093-07-21T05:02:54Z", 81.35279, 69.87378),
    (45.0, 7.7, 240.0, "2021-06-13T02:43:44Z", 98.67763, 44.23404),
    (45.0, 7.7, 240.0, "1955-06-16T05:54:03Z", 69.56148, 77.00704),
    (
        45.0,
        7.7,
        240.0,
        "1980-09-18T01:49:04Z",
        123.07393,
        45.07646,
    ),
    (
        35.6762,
        139.6503,
        40.0,
        "2085-11-18T08:51:15Z",
        106.02905,
        257.31988,
    ),
    (
        35.6762,
        139.6503,
        40.0,
        "1984-11-04T13:28:56Z",
        156.28559,
        324.54560,
    ),
    (
        35.6762,
        139.6503,
        40.0,
        "1997-08-24T00:39:53Z",
        37.24549,
        123.42593,
    ),
    (
        35.6762,
        139.6503,
        40.0,
        "2012-07-17T04:59:46Z",
        32.29626,
        252.21009,
    ),
    (
        -23.55,
        -46.63,
        760.0,
        "2086-11-19T02:29:42Z",
        136.58776,
        187.59799,
    ),
    (
        -23.55,
        -46.63,
        760.0,
        "2092-04-28T14:34:16Z",
        38.82484,
        11.48719,
    ),
    (
        -23.55,
        -46.63,
        760.0,
        "2015-05-04T22:30:43Z",
        116.01865,
        277.09153,
    ),
    (
        -23.55,
        -46.63,
        760.0,
        "1997-05-20T13:14:06Z",
        51.04898,
        33.55451,
    ),
    (
        69.65,
        18.96,
        10.0,
        "2069-03-07T03:05:12Z",
        104.05361,
        65.65524,
    ),
    (
        69.65,
        18.96,
        10.0,
        "2024-10-02T05:50:50Z",
        86.94976,
        109.47846,
    ),
    (
        69.65,
        18.96,
        10.0,
        "1977-11-11T12:11:19Z",
        89.01326,
        204.50667,
    ),
    (
        69.65,
        18.96,
        10.0,
        "2047-11-24T23:52:23Z",
        129.50376,
        24.95879,
    ),
];

/// Tolerance in degrees on both angles.
pub const TOLERANCE_DEG: f64 = 0.05;
