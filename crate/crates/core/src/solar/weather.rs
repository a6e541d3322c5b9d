//! Weather time series: CSV ingestion and per-instant irradiance lookup.

use chrono::{DateTime, Datelike, Duration, FixedOffset, NaiveDate, NaiveDateTime, TimeZone, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{clear_sky, Site, SunPosition};

pub const WEATHER_HEADER: [&str; 5] = [
    "timestamp_utc",
    "ghi_wm2",
    "dni_wm2",
    "dhi_wm2",
    "temp_air_c",
];

/// Air temperature assumed when the source carries none (°C).
pub const DEFAULT_AIR_TEMPERATURE_C: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IrradianceRecord {
    pub instant: DateTime<Utc>,
    pub ghi: f64,
    pub dni: f64,
    pub dhi: f64,
    pub temp_air_c: f64,
}

impl IrradianceRecord {
    pub fn zero() -> Self {
        Self {
            instant: DateTime::UNIX_EPOCH,
            ghi: 0.0,
            dni: 0.0,
            dhi: 0.0,
            temp_air_c: DEFAULT_AIR_TEMPERATURE_C,
        }
    }

    /// Relative GHI closure error against `DNI·cos z + DHI`; `None` when GHI is zero.
    pub fn closure_error(&self, zenith_deg: f64) -> Option<f64> {
        if self.ghi <= 0.0 {
            return None;
        }
        let recon = self.dni * zenith_deg.to_radians().cos().max(0.0) + self.dhi;
        Some((self.ghi - recon) / self.ghi)
    }

    fn lerp(a: &Self, b: &Self, instant: DateTime<Utc>) -> Self {
        let span = (b.instant - a.instant).num_milliseconds() as f64;
        let w = if span > 0.0 {
            (instant - a.instant).num_milliseconds() as f64 / span
        } else {
            0.0
        };
        let mix = |x: f64, y: f64| x + (y - x) * w;
        Self {
            instant,
            ghi: mix(a.ghi, b.ghi),
            dni: mix(a.dni, b.dni),
            dhi: mix(a.dhi, b.dhi),
            temp_air_c: mix(a.temp_air_c, b.temp_air_c),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeatherError {
    #[error("bad header, expected `{}`, found `{found}`", WEATHER_HEADER.join(","))]
    Header { found: String },
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("non-monotonic at line {line}")]
    NonMonotonic { line: u64 },
    #[error("bad utc_offset header field `{0}`")]
    Offset(String),
}

fn parse_offset(s: &str) -> Option<FixedOffset> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("z") {
        return FixedOffset::east_opt(0);
    }
    let (sign, rest) = match s.as_bytes().first()? {
        b'+' => (1, &s[1..]),
        b'-' => (-1, &s[1..]),
        _ => (1, s),
    };
    let (h, m) = match rest.split_once(':') {
        Some((h, m)) => (h.parse::<i32>().ok()?, m.parse::<i32>().ok()?),
        None => (rest.parse::<i32>().ok()?, 0),
    };
    FixedOffset::east_opt(sign * (h * 3600 + m * 60))
}

fn parse_instant(s: &str, offset: FixedOffset) -> Option<DateTime<Utc>> {
    let s = s.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .and_then(|naive| {
            offset
                .from_local_datetime(&naive)
                .single()
                .map(|t| t.with_timezone(&Utc))
        })
}

/// Parses the weather CSV. Timestamps with an explicit offset are converted
/// to UTC; naive ones are taken as UTC unless a `# utc_offset=+hh:mm` line
/// precedes the header. Records must be strictly increasing in time.
pub fn load_weather(text: &str) -> Result<Vec<IrradianceRecord>, WeatherError> {
    let mut offset = FixedOffset::east_opt(0).unwrap();
    for line in text.lines().take_while(|l| l.trim_start().starts_with('#')) {
        let body = line.trim_start().trim_start_matches('#').trim();
        if let Some(v) = body.strip_prefix("utc_offset") {
            let v = v.trim_start().trim_start_matches(['=', ':']).trim();
            offset = parse_offset(v).ok_or_else(|| WeatherError::Offset(v.to_string()))?;
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| WeatherError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    if header.iter().collect::<Vec<_>>() != WEATHER_HEADER {
        return Err(WeatherError::Header {
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut out: Vec<IrradianceRecord> = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| WeatherError::Parse {
            line: e.position().map(|p| p.line()).unwrap_or(0),
            message: e.to_string(),
        })?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        let bad = |message: String| WeatherError::Parse { line, message };
        if row.len() != WEATHER_HEADER.len() {
            return Err(bad(format!(
                "expected {} fields, found {}",
                WEATHER_HEADER.len(),
                row.len()
            )));
        }
        let instant = parse_instant(&row[0], offset)
            .ok_or_else(|| bad(format!("bad timestamp `{}`", &row[0])))?;
        let mut vals = [0.0; 4];
        for (k, v) in vals.iter_mut().enumerate() {
            let field = &row[k + 1];
            *v = field
                .parse::<f64>()
                .map_err(|_| bad(format!("bad number `{field}` in {}", WEATHER_HEADER[k + 1])))?;
            if !v.is_finite() {
                return Err(bad(format!("non-finite {}", WEATHER_HEADER[k + 1])));
            }
        }
        if vals[..3].iter().any(|v| *v < 0.0) {
            return Err(bad("negative irradiance".into()));
        }
        if out.last().is_some_and(|prev| prev.instant >= instant) {
            return Err(WeatherError::NonMonotonic { line });
        }
        out.push(IrradianceRecord {
            instant,
            ghi: vals[0],
            dni: vals[1],
            dhi: vals[2],
            temp_air_c: vals[3],
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeatherMode {
    ClearSky,
    Tmy,
    Measured,
}

impl std::str::FromStr for WeatherMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "clear_sky" | "clear-sky" | "clearsky" => Ok(Self::ClearSky),
            "tmy" => Ok(Self::Tmy),
            "measured" => Ok(Self::Measured),
            other => Err(format!(
                "unknown weather mode `{other}` (clear_sky|tmy|measured)"
            )),
        }
    }
}

/// Source of unshaded irradiance for an instant; `None` marks a data gap.
pub trait WeatherSource: Send + Sync {
    fn irradiance(
        &self,
        site: &Site,
        instant: DateTime<Utc>,
        sun: &SunPosition,
    ) -> Option<IrradianceRecord>;
}

/// Clear-sky model evaluated on demand.
#[derive(Clone, Copy, Debug, Default)]
pub struct ClearSkySource;

impl WeatherSource for ClearSkySource {
    fn irradiance(
        &self,
        site: &Site,
        instant: DateTime<Utc>,
        sun: &SunPosition,
    ) -> Option<IrradianceRecord> {
        let mut r = clear_sky(sun, site);
        r.instant = instant;
        Some(r)
    }
}

/// Tabulated weather, linearly interpolated between records closer than `max_gap`.
#[derive(Clone, Debug)]
pub struct WeatherTable {
    records: Vec<IrradianceRecord>,
    typical_year: bool,
    max_gap: Duration,
}

impl WeatherTable {
    pub fn measured(records: Vec<IrradianceRecord>) -> Self {
        Self {
            records,
            typical_year: false,
            max_gap: Duration::hours(1),
        }
    }

    /// Typical-year table: lookups ignore the calendar year of the instant.
    pub fn typical_year(records: Vec<IrradianceRecord>) -> Self {
        Self {
            records,
            typical_year: true,
            max_gap: Duration::hours(1),
        }
    }

    pub fn with_max_gap(mut self, gap: Duration) -> Self {
        self.max_gap = gap;
        self
    }

    pub fn records(&self) -> &[IrradianceRecord] {
        &self.records
    }

    fn to_table_year(&self, instant: DateTime<Utc>) -> Option<DateTime<Utc>> {
        let year = self.records.first()?.instant.year();
        let (m, mut d) = (instant.month(), instant.day());
        if m == 2 && d == 29 && NaiveDate::from_ymd_opt(year, 2, 29).is_none() {
            d = 28;
        }
        let date = NaiveDate::from_ymd_opt(year, m, d)?;
        Some(Utc.from_utc_datetime(&date.and_time(instant.time())))
    }

    pub fn lookup(&self, instant: DateTime<Utc>) -> Option<IrradianceRecord> {
        let t = if self.typical_year {
            self.to_table_year(instant)?
        } else {
            instant
        };
        let recs = &self.records;
        let idx = recs.partition_point(|r| r.instant < t);
        if let Some(r) = recs.get(idx).filter(|r| r.instant == t) {
            return Some(IrradianceRecord { instant, ..*r });
        }
        let (a, b) = match (idx.checked_sub(1).map(|i| recs[i]), recs.get(idx).copied()) {
            (Some(a), Some(b)) => (a, b),
            // Typical years wrap around December 31st.
            (Some(a), None) if self.typical_year => {
                let first = recs.first()?;
                (
                    a,
                    IrradianceRecord {
                        instant: first.instant + Duration::days(365),
                        ..*first
                    },
                )
            }
            (None, Some(b)) if self.typical_year => {
                let last = recs.last()?;
                (
                    IrradianceRecord {
                        instant: last.instant - Duration::days(365),
                        ..*last
                    },
                    b,
                )
            }
            _ => return None,
        };
        if b.instant - a.instant > self.max_gap || t < a.instant || t > b.instant {
            return None;
        }
        let mut r = IrradianceRecord::lerp(&a, &b, t);
        r.instant = instant;
        Some(r)
    }
}

impl WeatherSource for WeatherTable {
    fn irradiance(
        &self,
        _site: &Site,
        instant: DateTime<Utc>,
        _sun: &SunPosition,
    ) -> Option<IrradianceRecord> {
        self.lookup(instant)
    }
}
