//! Energy integration and loss-report rollups.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{DateTime, Datelike, Duration, NaiveDate, SecondsFormat, TimeZone, Utc};
use serde::Serialize;

use super::InstantResult;

pub const REPORT_HEADER: [&str; 7] = [
    "scope",
    "period_start",
    "period_end",
    "e_unshaded_kwh",
    "e_shaded_kwh",
    "e_loss_kwh",
    "loss_fraction",
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EnergyTotals {
    pub unshaded_kwh: f64,
    pub shaded_kwh: f64,
    pub loss_kwh: f64,
}

impl EnergyTotals {
    fn add(&mut self, p_unshaded_w: f64, p_shaded_w: f64, hours: f64) {
        self.unshaded_kwh += p_unshaded_w * hours / 1000.0;
        self.shaded_kwh += p_shaded_w * hours / 1000.0;
        self.loss_kwh += (p_unshaded_w - p_shaded_w) * hours / 1000.0;
    }

    /// Lost share of the unshaded energy, 0 without energy.
    pub fn loss_fraction(&self) -> f64 {
        if self.unshaded_kwh > 0.0 {
            self.loss_kwh / self.unshaded_kwh
        } else {
            0.0
        }
    }
}

/// One report line. `scope` is `total`, `month` or `day` for the whole
/// scene, suffixed with `:<generator id>` for a single generator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub scope: String,
    pub period_start: DateTime<Utc>,
    pub period_end: DateTime<Utc>,
    pub energy: EnergyTotals,
}

/// Rectangle-rule energy totals with monthly and daily (UTC) rollups.
#[derive(Clone, Debug, PartialEq)]
pub struct LossReport {
    pub from: DateTime<Utc>,
    pub to: DateTime<Utc>,
    pub step: Duration,
    pub rows: Vec<ReportRow>,
}

#[derive(Clone, Default)]
struct Bucket {
    all: EnergyTotals,
    per_generator: Vec<EnergyTotals>,
}

impl Bucket {
    fn new(generators: usize) -> Self {
        Self {
            all: EnergyTotals::default(),
            per_generator: vec![EnergyTotals::default(); generators],
        }
    }

    fn add(&mut self, r: &InstantResult, hours: f64) {
        for (acc, g) in self.per_generator.iter_mut().zip(&r.generators) {
            acc.add(g.p_unshaded_w, g.p_shaded_w, hours);
            self.all.add(g.p_unshaded_w, g.p_shaded_w, hours);
        }
    }
}

fn midnight(d: NaiveDate) -> DateTime<Utc> {
    Utc.from_utc_datetime(&d.and_hms_opt(0, 0, 0).expect("midnight exists"))
}

fn month_start(y: i32, m: u32) -> DateTime<Utc> {
    midnight(NaiveDate::from_ymd_opt(y, m, 1).expect("valid month"))
}

fn next_month(y: i32, m: u32) -> (i32, u32) {
    if m == 12 {
        (y + 1, 1)
    } else {
        (y, m + 1)
    }
}

impl LossReport {
    /// Integrates `results` (sorted by instant) with `Δt = step`.
    pub fn build(
        from: DateTime<Utc>,
        to: DateTime<Utc>,
        step: Duration,
        generators: &[String],
        results: &[InstantResult],
    ) -> Self {
        let hours = step.num_milliseconds() as f64 / 3_600_000.0;
        let n = generators.len();
        let mut total = Bucket::new(n);
        let mut months: BTreeMap<(i32, u32), Bucket> = BTreeMap::new();
        let mut days: BTreeMap<NaiveDate, Bucket> = BTreeMap::new();
        for r in results {
            let d = r.instant.date_naive();
            total.add(r, hours);
            months
                .entry((d.year(), d.month()))
                .or_insert_with(|| Bucket::new(n))
                .add(r, hours);
            days.entry(d)
                .or_insert_with(|| Bucket::new(n))
                .add(r, hours);
        }
        let clip = |a: DateTime<Utc>, b: DateTime<Utc>| (a.max(from), b.min(to));
        let month_rows: Vec<(DateTime<Utc>, DateTime<Utc>, &Bucket)> = months
            .iter()
            .map(|(&(y, m), b)| {
                let (ny, nm) = next_month(y, m);
                let (s, e) = clip(month_start(y, m), month_start(ny, nm));
                (s, e, b)
            })
            .collect();
        let day_rows: Vec<(DateTime<Utc>, DateTime<Utc>, &Bucket)> = days
            .iter()
            .map(|(&d, b)| {
                let (s, e) = clip(midnight(d), midnight(d) + Duration::days(1));
                (s, e, b)
            })
            .collect();

        let mut rows = Vec::new();
        let mut push = |kind: &str, spans: &[(DateTime<Utc>, DateTime<Utc>, &Bucket)]| {
            for &(s, e, b) in spans {
                rows.push(ReportRow {
                    scope: kind.to_string(),
                    period_start: s,
                    period_end: e,
                    energy: b.all,
                });
            }
            for (k, id) in generators.iter().enumerate() {
                for &(s, e, b) in spans {
                    rows.push(ReportRow {
                        scope: format!("{kind}:{id}"),
                        period_start: s,
                        period_end: e,
                        energy: b.per_generator[k],
                    });
                }
            }
        };
        push("total", &[(from, to, &total)]);
        push("month", &month_rows);
        push("day", &day_rows);
        Self {
            from,
            to,
            step,
            rows,
        }
    }

    /// Whole-scene totals over the period.
    pub fn total(&self) -> &EnergyTotals {
        &self.rows[0].energy
    }

    pub fn generator_total(&self, id: &str) -> Option<&EnergyTotals> {
        let scope = format!("total:{id}");
        self.rows
            .iter()
            .find(|r| r.scope == scope)
            .map(|r| &r.energy)
    }

    pub fn rows_in_scope<'s>(&'s self, scope: &'s str) -> impl Iterator<Item = &'s ReportRow> + 's {
        self.rows.iter().filter(move |r| r.scope == scope)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(REPORT_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.scope.clone(),
                r.period_start.to_rfc3339_opts(SecondsFormat::Secs, true),
                r.period_end.to_rfc3339_opts(SecondsFormat::Secs, true),
                r.energy.unshaded_kwh.to_string(),
                r.energy.shaded_kwh.to_string(),
                r.energy.loss_kwh.to_string(),
                r.energy.loss_fraction().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("report is UTF-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::GeneratorInstant;
    use crate::solar::{POAIrradiance, SunPosition};

    fn step(t: DateTime<Utc>, powers: &[(f64, f64)]) -> InstantResult {
        InstantResult {
            instant: t,
            sun: SunPosition {
                azimuth_deg: 180.0,
                zenith_deg: 40.0,
                distance_au: 1.0,
            },
            generators: powers
                .iter()
                .enumerate()
                .map(|(k, &(pu, ps))| GeneratorInstant {
                    generator: format!("g{k}"),
                    poa: POAIrradiance::default(),
                    p_unshaded_w: pu,
                    p_shaded_w: ps,
                    geometric_factor: 0.0,
                    effective_factor: 0.0,
                    shaded_samples: 0,
                    detail: None,
                })
                .collect(),
        }
    }

    #[test]
    fn three_steps_sum_by_hand() {
        let t0 = Utc.with_ymd_and_hms(2023, 6, 1, 10, 0, 0).unwrap();
        let dt = Duration::minutes(10);
        let results = vec![
            step(t0, &[(600.0, 600.0)]),
            step(t0 + dt, &[(600.0, 300.0)]),
            step(t0 + dt * 2, &[(1200.0, 0.0)]),
        ];
        let r = LossReport::build(t0, t0 + dt * 3, dt, &["g0".into()], &results);
        let t = r.total();
        assert!((t.unshaded_kwh - 2400.0 / 6.0 / 1000.0).abs() < 1e-15);
        assert!((t.loss_kwh - 1500.0 / 6.0 / 1000.0).abs() < 1e-15);
        assert!((t.loss_fraction() - 0.625).abs() < 1e-12);
        assert_eq!(r.generator_total("g0"), Some(t));
    }

    #[test]
    fn rollups_split_on_utc_dates() {
        let t0 = Utc.with_ymd_and_hms(2023, 1, 31, 23, 50, 0).unwrap();
        let dt = Duration::minutes(10);
        let results = vec![
            step(t0, &[(60.0, 30.0), (6.0, 6.0)]),
            step(t0 + dt, &[(120.0, 0.0), (6.0, 0.0)]),
        ];
        let r = LossReport::build(t0, t0 + dt * 2, dt, &["g0".into(), "g1".into()], &results);
        let days: Vec<&ReportRow> = r.rows_in_scope("day").collect();
        assert_eq!(days.len(), 2);
        assert_eq!(days[0].period_start, t0);
        assert_eq!(days[1].period_end, t0 + dt * 2);
        assert_eq!(r.rows_in_scope("month").count(), 2);
        let sum: f64 = days.iter().map(|d| d.energy.loss_kwh).sum();
        assert!((sum - r.total().loss_kwh).abs() < 1e-15);
        let g1: f64 = r.rows_in_scope("month:g1").map(|d| d.energy.loss_kwh).sum();
        assert!((g1 - 1.0 / 1000.0).abs() < 1e-15);
    }

    #[test]
    fn csv_layout() {
        let t0 = Utc.with_ymd_and_hms(2023, 3, 1, 12, 0, 0).unwrap();
        let dt = Duration::hours(1);
        let r = LossReport::build(
            t0,
            t0 + dt,
            dt,
            &["a".into()],
            &[step(t0, &[(1000.0, 500.0)])],
        );
        let csv = r.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], REPORT_HEADER.join(","));
        assert_eq!(
            lines[1],
            "total,2023-03-01T12:00:00Z,2023-03-01T13:00:00Z,1,0.5,0.5,0.5"
        );
        assert_eq!(
            lines[2],
            "total:a,2023-03-01T12:00:00Z,2023-03-01T13:00:00Z,1,0.5,0.5,0.5"
        );
        assert_eq!(lines.len(), 7);
    }
}
