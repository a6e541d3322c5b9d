//! Textual run parameters shared by the command line and the HTTP service,
//! so that both front ends feed the engine identical values.

use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::solar::{
    load_weather, ClearSkySource, WeatherError, WeatherMode, WeatherSource, WeatherTable,
};

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("bad step `{0}`: {1}")]
    Step(String, String),
    #[error("bad instant `{0}` (expected YYYY-MM-DD or RFC 3339)")]
    Instant(String),
    #[error("empty period: {from} is not before {to}")]
    EmptyPeriod {
        from: DateTime<Utc>,
        to: DateTime<Utc>,
    },
    #[error("weather mode `{0}` needs a weather file")]
    MissingWeather(String),
    #[error("weather file: {0}")]
    Weather(#[from] WeatherError),
}

/// Parses durations such as `10m`, `1h` or `1h 30m`.
pub fn parse_step(text: &str) -> Result<Duration, ParamError> {
    let bad = |m: String| ParamError::Step(text.to_string(), m);
    let std = humantime::parse_duration(text.trim()).map_err(|e| bad(e.to_string()))?;
    let step = Duration::from_std(std).map_err(|e| bad(e.to_string()))?;
    if step <= Duration::zero() {
        return Err(bad("must be positive".into()));
    }
    Ok(step)
}

/// Parses a date (midnight UTC) or an RFC 3339 instant.
pub fn parse_instant(text: &str) -> Result<DateTime<Utc>, ParamError> {
    let t = text.trim();
    if let Ok(d) = NaiveDate::parse_from_str(t, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).unwrap().and_utc());
    }
    DateTime::parse_from_rfc3339(t)
        .map(|d| d.with_timezone(&Utc))
        .map_err(|_| ParamError::Instant(text.into()))
}

/// Period and sampling of a simulation run, in textual form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    pub from: String,
    pub to: String,
    pub step: String,
    #[serde(default = "clear_sky")]
    pub weather_mode: WeatherMode,
}

fn clear_sky() -> WeatherMode {
    WeatherMode::ClearSky
}

/// Parsed [`RunParams`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Period {
    pub from: DateTime<Utc>,
    pub to: DateTime<Utc>,
    pub step: Duration,
}

impl RunParams {
    pub fn period(&self) -> Result<Period, ParamError> {
        let (from, to) = (parse_instant(&self.from)?, parse_instant(&self.to)?);
        if from >= to {
            return Err(ParamError::EmptyPeriod { from, to });
        }
        Ok(Period {
            from,
            to,
            step: parse_step(&self.step)?,
        })
    }
}

/// Irradiance source for `mode`; table modes parse `weather_csv`.
pub fn weather_source(
    mode: WeatherMode,
    weather_csv: Option<&str>,
) -> Result<Box<dyn WeatherSource>, ParamError> {
    let table = |text: Option<&str>| -> Result<Vec<_>, ParamError> {
        let text =
            text.ok_or_else(|| ParamError::MissingWeather(format!("{mode:?}").to_lowercase()))?;
        Ok(load_weather(text)?)
    };
    Ok(match mode {
        WeatherMode::ClearSky => Box::new(ClearSkySource),
        WeatherMode::Tmy => Box::new(WeatherTable::typical_year(table(weather_csv)?)),
        WeatherMode::Measured => Box::new(WeatherTable::measured(table(weather_csv)?)),
    })
}
