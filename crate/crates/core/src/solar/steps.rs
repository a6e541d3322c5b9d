use chrono::{DateTime, Duration, Utc};

use super::{sun_position, Site, SolarError};

/// Instants `from + k·step` in `[from, to)` with the sun above the horizon.
pub fn daylight_steps(
    site: &Site,
    from: DateTime<Utc>,
    to: DateTime<Utc>,
    step: Duration,
) -> Result<Vec<DateTime<Utc>>, SolarError> {
    if step <= Duration::zero() {
        return Err(SolarError::NonPositiveStep);
    }
    if from >= to {
        return Err(SolarError::EmptyPeriod { from, to });
    }
    let mut out = Vec::new();
    let mut k: i32 = 0;
    loop {
        let t = from + step * k;
        if t >= to {
            break;
        }
        if sun_position(site, t)?.is_daylight() {
            out.push(t);
        }
        k += 1;
    }
    Ok(out)
}
