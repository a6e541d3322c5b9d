//! Per-instant evaluation (sun, occluders, depth map, mask, electrics) and
//! period integration.

mod dump;
mod heatmap;
mod params;
mod report;

use std::borrow::Cow;
use std::sync::atomic::{AtomicUsize, Ordering};

use chrono::{DateTime, Duration, Utc};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::electrical::{
    effective_shading_factor, generator_power, geometric_shading_factor, ElectricalError,
};
use crate::geometry::{Triangle, Vec3};
use crate::scene::{
    generator_samples, PVGeneratorSpec, PanelFrame, SamplePoint, Scene, SceneError, TrackingMode,
};
use crate::shadow::{
    build_depth_map_with, cell_shaded_fractions, classify, default_bias, DepthMap, DepthMapOptions,
    ShadingMask, ShadowError,
};
use crate::solar::{
    daylight_steps, poa, sun_direction, sun_position, IrradianceRecord, POAIrradiance, SolarError,
    SunPosition, WeatherSource,
};

pub use dump::{GeneratorDump, InstantDump};
pub use heatmap::{build_heatmap, HeatmapBin, SunPathHeatmap, DEFAULT_BIN_DEG, HEATMAP_HEADER};
pub use params::{parse_instant, parse_step, weather_source, ParamError, Period, RunParams};
pub use report::{EnergyTotals, LossReport, ReportRow, REPORT_HEADER};

/// Largest share of daylight steps that may lack weather data.
pub const MAX_MISSING_WEATHER: f64 = 0.05;

/// Gap ranges spelled out in a missing-weather error.
const LISTED_GAPS: usize = 20;

/// Broad failure classes, stable enough to map onto process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Domain,
    Numeric,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error(transparent)]
    Solar(#[from] SolarError),
    #[error("generator `{generator}`: {source}")]
    Shadow {
        generator: String,
        source: ShadowError,
    },
    #[error("generator `{generator}` at {instant}: {source}")]
    Electrical {
        generator: String,
        instant: DateTime<Utc>,
        source: ElectricalError,
    },
    #[error("sun below horizon at {instant} (zenith {zenith_deg:.2}°)")]
    SunBelowHorizon {
        instant: DateTime<Utc>,
        zenith_deg: f64,
    },
    #[error("no weather data for {instant}")]
    NoWeather { instant: DateTime<Utc> },
    #[error("weather missing for {missing} of {total} daylight steps (limit 5%): {}", format_gaps(.gaps))]
    WeatherGaps {
        missing: usize,
        total: usize,
        gaps: Vec<GapRange>,
    },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("cannot build worker pool: {0}")]
    Threads(String),
}

impl SimError {
    pub fn class(&self) -> ErrorClass {
        match self {
            SimError::SunBelowHorizon { .. }
            | SimError::Solar(SolarError::SunBelowHorizon { .. }) => ErrorClass::Domain,
            SimError::Electrical { .. } | SimError::Shadow { .. } => ErrorClass::Numeric,
            _ => ErrorClass::Input,
        }
    }
}

/// Consecutive daylight steps without weather data.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GapRange {
    pub first: DateTime<Utc>,
    pub last: DateTime<Utc>,
    pub steps: usize,
}

fn format_gaps(gaps: &[GapRange]) -> String {
    let mut parts: Vec<String> = gaps
        .iter()
        .take(LISTED_GAPS)
        .map(|g| {
            format!(
                "{}..{} ({} steps)",
                g.first.to_rfc3339(),
                g.last.to_rfc3339(),
                g.steps
            )
        })
        .collect();
    if gaps.len() > LISTED_GAPS {
        parts.push(format!("and {} more ranges", gaps.len() - LISTED_GAPS));
    }
    parts.join(", ")
}

/// Panel normal for the instant: the stored orientation for fixed
/// generators, the sun direction for ideal two-axis trackers.
pub fn tracker_normal(spec: &PVGeneratorSpec, pos: &SunPosition) -> Result<Vec3, SolarError> {
    match spec.mode {
        TrackingMode::Fixed => {
            Ok(PanelFrame::from_orientation(Vec3::zero(), spec.azimuth_deg, spec.tilt_deg).normal)
        }
        TrackingMode::TwoAxis => sun_direction(pos),
    }
}

/// Shading outcome of one generator at one instant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorInstant {
    pub generator: String,
    pub poa: POAIrradiance,
    pub p_unshaded_w: f64,
    pub p_shaded_w: f64,
    pub geometric_factor: f64,
    pub effective_factor: f64,
    pub shaded_samples: usize,
    /// Per-sample mask and per-cell fractions; dropped in period runs
    /// unless requested.
    pub detail: Option<ShadingDetail>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShadingDetail {
    pub mask: ShadingMask,
    pub cell_fractions: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstantResult {
    pub instant: DateTime<Utc>,
    pub sun: SunPosition,
    pub generators: Vec<GeneratorInstant>,
}

impl InstantResult {
    pub fn is_daylight(&self) -> bool {
        self.sun.is_daylight()
    }

    pub fn p_unshaded_w(&self) -> f64 {
        self.generators.iter().map(|g| g.p_unshaded_w).sum()
    }

    pub fn p_shaded_w(&self) -> f64 {
        self.generators.iter().map(|g| g.p_shaded_w).sum()
    }

    /// `1 − ΣP_shaded/ΣP_unshaded` over all generators, 0 without power.
    pub fn combined_effective_factor(&self) -> f64 {
        let pu = self.p_unshaded_w();
        if pu > 0.0 {
            (1.0 - self.p_shaded_w() / pu).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }
}

/// Depth map, samples and mask of one generator at one instant.
#[derive(Clone, Debug)]
pub struct ShadowView<'a> {
    pub frame: PanelFrame,
    pub samples: Cow<'a, [SamplePoint]>,
    pub map: DepthMap,
    pub shaded: Vec<bool>,
}

struct GeneratorContext {
    /// Frame and samples of fixed generators, computed once.
    fixed: Option<(PanelFrame, Vec<SamplePoint>, Vec<Vec3>)>,
}

/// Read-only evaluation context over a scene snapshot.
pub struct Simulator<'a> {
    scene: &'a Scene,
    objects: Vec<Triangle>,
    contexts: Vec<GeneratorContext>,
}

impl<'a> Simulator<'a> {
    pub fn new(scene: &'a Scene) -> Self {
        let contexts = scene
            .generators
            .iter()
            .map(|g| GeneratorContext {
                fixed: (g.mode == TrackingMode::Fixed).then(|| {
                    let frame = g.frame_at(None);
                    let samples: Vec<SamplePoint> = generator_samples(g, &frame);
                    let points = samples.iter().map(|s| s.position).collect();
                    (frame, samples, points)
                }),
            })
            .collect();
        Self {
            scene,
            objects: scene.object_triangles(),
            contexts,
        }
    }

    pub fn scene(&self) -> &Scene {
        self.scene
    }

    fn generator_index(&self, id: &str) -> Result<usize, SimError> {
        self.scene
            .generators
            .iter()
            .position(|g| g.id == id)
            .ok_or_else(|| SimError::UnknownGenerator(id.into()))
    }

    fn occluders(&self, k: usize, pos: &SunPosition) -> Cow<'_, [Triangle]> {
        let extra = self
            .scene
            .generator_occluders(&self.scene.generators[k].id, Some(pos));
        if extra.is_empty() {
            Cow::Borrowed(&self.objects)
        } else {
            let mut all = self.objects.clone();
            all.extend(extra);
            Cow::Owned(all)
        }
    }

    /// Depth map over generator `k`'s samples. The sparse map tracks only
    /// the sample texels and skips occluders behind every sample; the full
    /// map (for dumps) keeps every texel.
    fn shade(&self, k: usize, pos: &SunPosition, full: bool) -> Result<ShadowView<'_>, SimError> {
        let spec = &self.scene.generators[k];
        let sun = sun_direction(pos)?;
        let (frame, samples, points): (PanelFrame, Cow<'_, [SamplePoint]>, Cow<'_, [Vec3]>) =
            match &self.contexts[k].fixed {
                Some((f, s, p)) => (*f, Cow::Borrowed(s), Cow::Borrowed(p)),
                None => {
                    let f = spec.frame_at(Some(pos));
                    let s: Vec<SamplePoint> = generator_samples(spec, &f);
                    let p = s.iter().map(|s| s.position).collect::<Vec<_>>();
                    (f, Cow::Owned(s), Cow::Owned(p))
                }
            };
        let occluders = self.occluders(k, pos);
        let options = if full {
            DepthMapOptions::default()
        } else {
            DepthMapOptions::sparse(&points)
        };
        let map = build_depth_map_with(
            &occluders,
            sun,
            &points,
            self.scene.engine.resolution,
            &options,
        )
        .map_err(|source| SimError::Shadow {
            generator: spec.id.clone(),
            source,
        })?;
        let bias = default_bias(map.texel_size(), frame.normal, sun);
        let shaded = classify(&map, &samples, bias);
        Ok(ShadowView {
            frame,
            samples,
            map,
            shaded,
        })
    }

    /// Mask and depth map of one generator at a daylight instant.
    pub fn shadow_view(
        &self,
        generator: &str,
        instant: DateTime<Utc>,
        full: bool,
    ) -> Result<ShadowView<'_>, SimError> {
        let k = self.generator_index(generator)?;
        let pos = sun_position(&self.scene.site, instant)?;
        if !pos.is_daylight() {
            return Err(SimError::SunBelowHorizon {
                instant,
                zenith_deg: pos.zenith_deg,
            });
        }
        self.shade(k, &pos, full)
    }

    fn evaluate(
        &self,
        k: usize,
        instant: DateTime<Utc>,
        pos: &SunPosition,
        record: &IrradianceRecord,
        keep_detail: bool,
    ) -> Result<GeneratorInstant, SimError> {
        let spec = &self.scene.generators[k];
        if !pos.is_daylight() {
            return Ok(GeneratorInstant {
                generator: spec.id.clone(),
                poa: POAIrradiance::default(),
                p_unshaded_w: 0.0,
                p_shaded_w: 0.0,
                geometric_factor: 0.0,
                effective_factor: 0.0,
                shaded_samples: 0,
                detail: keep_detail.then(|| ShadingDetail {
                    mask: ShadingMask::unshaded(&spec.id, Some(instant), spec.sample_count()),
                    cell_fractions: vec![0.0; spec.cell_count()],
                }),
            });
        }
        let normal = tracker_normal(spec, pos)?;
        let irr = poa(record, pos, normal, self.scene.engine.albedo);
        let view = self.shade(k, pos, false)?;
        let fractions =
            cell_shaded_fractions(&view.shaded, &view.samples, spec).map_err(|source| {
                SimError::Shadow {
                    generator: spec.id.clone(),
                    source,
                }
            })?;
        let electrical = |source| SimError::Electrical {
            generator: spec.id.clone(),
            instant,
            source,
        };
        let pair = generator_power(
            spec,
            &self.scene.cell_params,
            &irr,
            &fractions,
            record.temp_air_c,
        )
        .map_err(electrical)?;
        let pu = pair.unshaded.p;
        let effective_factor = effective_shading_factor(pair.shaded.p, pu).map_err(electrical)?;
        let ps = pair.shaded.p.min(pu);
        let shaded_samples = view.shaded.iter().filter(|&&s| s).count();
        Ok(GeneratorInstant {
            generator: spec.id.clone(),
            poa: irr,
            p_unshaded_w: pu,
            p_shaded_w: ps,
            geometric_factor: geometric_shading_factor(&fractions, &irr),
            effective_factor,
            shaded_samples,
            detail: keep_detail.then(|| ShadingDetail {
                mask: ShadingMask::new(&spec.id, Some(instant), view.shaded),
                cell_fractions: fractions,
            }),
        })
    }

    fn evaluate_all(
        &self,
        instant: DateTime<Utc>,
        pos: &SunPosition,
        record: &IrradianceRecord,
        keep_detail: bool,
    ) -> Result<InstantResult, SimError> {
        let generators = (0..self.scene.generators.len())
            .map(|k| self.evaluate(k, instant, pos, record, keep_detail))
            .collect::<Result<_, _>>()?;
        Ok(InstantResult {
            instant,
            sun: *pos,
            generators,
        })
    }

    /// Every generator at one instant, with masks. At night the result has
    /// zero power and all-unshaded masks.
    pub fn instant(
        &self,
        weather: &dyn WeatherSource,
        instant: DateTime<Utc>,
    ) -> Result<InstantResult, SimError> {
        let pos = sun_position(&self.scene.site, instant)?;
        let record = if pos.is_daylight() {
            weather
                .irradiance(&self.scene.site, instant, &pos)
                .ok_or(SimError::NoWeather { instant })?
        } else {
            IrradianceRecord::zero()
        };
        self.evaluate_all(instant, &pos, &record, true)
    }

    /// One generator at one instant, with its mask.
    pub fn generator_instant(
        &self,
        generator: &str,
        weather: &dyn WeatherSource,
        instant: DateTime<Utc>,
    ) -> Result<(SunPosition, GeneratorInstant), SimError> {
        let k = self.generator_index(generator)?;
        let pos = sun_position(&self.scene.site, instant)?;
        let record = if pos.is_daylight() {
            weather
                .irradiance(&self.scene.site, instant, &pos)
                .ok_or(SimError::NoWeather { instant })?
        } else {
            IrradianceRecord::zero()
        };
        Ok((pos, self.evaluate(k, instant, &pos, &record, true)?))
    }

    /// Evaluates the daylight steps of `[from, to)` and integrates them.
    pub fn period(
        &self,
        weather: &dyn WeatherSource,
        request: &PeriodRequest,
    ) -> Result<PeriodResult, SimError> {
        let site = &self.scene.site;
        let run = || -> Result<PeriodResult, SimError> {
            let steps = daylight_steps(site, request.from, request.to, request.step)?;
            let inputs: Vec<(DateTime<Utc>, SunPosition, Option<IrradianceRecord>)> = steps
                .par_iter()
                .map(|&t| {
                    let pos = sun_position(site, t)?;
                    Ok((t, pos, weather.irradiance(site, t, &pos)))
                })
                .collect::<Result<_, SimError>>()?;
            let missing: Vec<DateTime<Utc>> = inputs
                .iter()
                .filter(|i| i.2.is_none())
                .map(|i| i.0)
                .collect();
            if !inputs.is_empty()
                && missing.len() as f64 > MAX_MISSING_WEATHER * inputs.len() as f64
            {
                return Err(SimError::WeatherGaps {
                    missing: missing.len(),
                    total: inputs.len(),
                    gaps: gap_ranges(&missing, request.step),
                });
            }
            let done = AtomicUsize::new(0);
            let total = inputs.len();
            let results: Vec<InstantResult> = inputs
                .par_iter()
                .filter_map(|(t, pos, rec)| rec.as_ref().map(|r| (t, pos, r)))
                .map(|(&t, pos, rec)| {
                    let r = self.evaluate_all(t, pos, rec, request.keep_masks);
                    let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                    if let Some(cb) = request.progress {
                        cb(n, total);
                    }
                    r
                })
                .collect::<Result<_, _>>()?;
            let ids: Vec<String> = self.scene.generators.iter().map(|g| g.id.clone()).collect();
            let report = LossReport::build(request.from, request.to, request.step, &ids, &results);
            let heatmap = build_heatmap(&results, DEFAULT_BIN_DEG);
            Ok(PeriodResult {
                steps: results,
                report,
                heatmap,
                skipped: missing,
            })
        };
        match request.threads {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| SimError::Threads(e.to_string()))?
                .install(run),
            None => run(),
        }
    }
}

fn gap_ranges(missing: &[DateTime<Utc>], step: Duration) -> Vec<GapRange> {
    let mut out: Vec<GapRange> = Vec::new();
    for &t in missing {
        match out.last_mut() {
            Some(g) if t - g.last == step => {
                g.last = t;
                g.steps += 1;
            }
            _ => out.push(GapRange {
                first: t,
                last: t,
                steps: 1,
            }),
        }
    }
    out
}

/// Parameters of a period run.
#[derive(Clone, Copy)]
pub struct PeriodRequest<'p> {
    pub from: DateTime<Utc>,
    pub to: DateTime<Utc>,
    pub step: Duration,
    /// Worker count; `None` uses the global pool.
    pub threads: Option<usize>,
    pub keep_masks: bool,
    /// Called with (evaluated, total) after every step.
    pub progress: Option<&'p (dyn Fn(usize, usize) + Sync)>,
}

impl<'p> PeriodRequest<'p> {
    pub fn new(from: DateTime<Utc>, to: DateTime<Utc>, step: Duration) -> Self {
        Self {
            from,
            to,
            step,
            threads: None,
            keep_masks: false,
            progress: None,
        }
    }

    pub fn threads(mut self, n: usize) -> Self {
        self.threads = Some(n);
        self
    }
}

#[derive(Clone, Debug)]
pub struct PeriodResult {
    pub steps: Vec<InstantResult>,
    pub report: LossReport,
    pub heatmap: SunPathHeatmap,
    /// Daylight steps skipped for lack of weather data.
    pub skipped: Vec<DateTime<Utc>>,
}

/// One instant over the whole scene.
pub fn simulate_instant(
    scene: &Scene,
    weather: &dyn WeatherSource,
    instant: DateTime<Utc>,
) -> Result<InstantResult, SimError> {
    Simulator::new(scene).instant(weather, instant)
}

/// Daylight steps of `[from, to)` integrated by the rectangle rule.
pub fn simulate_period(
    scene: &Scene,
    weather: &dyn WeatherSource,
    request: &PeriodRequest,
) -> Result<PeriodResult, SimError> {
    Simulator::new(scene).period(weather, request)
}
