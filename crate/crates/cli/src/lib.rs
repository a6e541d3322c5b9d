//! `helios` command line: scene validation, period simulation and
//! single-instant shadow dumps.
//!
//! Exit codes: 0 success, 2 input error, 3 domain error (sun below the
//! horizon), 4 numeric error.

mod config;

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use helios_core::scene::{Scene, SceneDocument, SceneError};
use helios_core::shadow::{write_depth_pgm, write_mask_csv};
use helios_core::sim::{
    parse_instant, simulate_period, weather_source, ErrorClass, InstantDump, ParamError,
    PeriodRequest, RunParams, SimError, Simulator,
};
use helios_core::solar::{WeatherMode, WeatherSource};

pub use config::Config;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "helios", version, about = "PV shading loss simulator")]
struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for the engine (default: all cores).
    #[arg(long, global = true, env = "HELIOS_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse a scene and its meshes and print a summary.
    Validate(SceneArgs),
    /// Integrate shading losses over a period.
    Simulate(SimulateArgs),
    /// Write the shading mask and depth map of one generator at one instant.
    Shadows(ShadowsArgs),
}

#[derive(Debug, Args)]
struct SceneArgs {
    #[arg(long)]
    scene: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WeatherArgs {
    /// Use the clear-sky model instead of a weather file.
    #[arg(long, conflicts_with = "weather")]
    clear_sky: bool,
    /// Weather CSV (`timestamp_utc,ghi_wm2,dni_wm2,dhi_wm2,temp_air_c`).
    #[arg(long)]
    weather: Option<PathBuf>,
    /// How to read the weather file: `tmy` or `measured`.
    #[arg(long)]
    weather_mode: Option<WeatherMode>,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[command(flatten)]
    weather: WeatherArgs,
    /// Start of the period (YYYY-MM-DD or RFC 3339, UTC).
    #[arg(long)]
    from: Option<String>,
    /// End of the period, exclusive.
    #[arg(long)]
    to: Option<String>,
    /// Time step, e.g. `10m` or `1h`.
    #[arg(long)]
    step: Option<String>,
    /// Report CSV path (default `report.csv`).
    #[arg(long)]
    report: Option<PathBuf>,
    /// Sun-path heatmap CSV path (default `heatmap.csv`).
    #[arg(long)]
    heatmap: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ShadowsArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[command(flatten)]
    weather: WeatherArgs,
    /// Instant (RFC 3339).
    #[arg(long)]
    at: Option<String>,
    #[arg(long)]
    generator: Option<String>,
    /// Mask CSV path (default `mask.csv`).
    #[arg(long)]
    mask: Option<PathBuf>,
    /// 16-bit PGM depth map path (default `depth.pgm`).
    #[arg(long)]
    depth: Option<PathBuf>,
    /// Optional JSON dump of the instant (mask, cell fractions, factors).
    #[arg(long)]
    dump: Option<PathBuf>,
}

/// Failure with its exit class and message.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        let code = match e.class() {
            ErrorClass::Input => EXIT_INPUT,
            ErrorClass::Domain => EXIT_DOMAIN,
            ErrorClass::Numeric => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ParamError> for Failure {
    fn from(e: ParamError) -> Self {
        Self::input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Runs the command line `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Outcome {
    let config = match &cli.config {
        Some(path) => Config::load(path).map_err(Failure::input)?,
        None => Config::default(),
    };
    let threads = cli.threads.or(config.threads);
    match cli.command {
        Command::Validate(a) => validate(&scene_path(a, &config)?, out),
        Command::Simulate(a) => simulate(a, &config, threads, out),
        Command::Shadows(a) => shadows(a, &config, out),
    }
}

fn scene_path(a: SceneArgs, config: &Config) -> Result<PathBuf, Failure> {
    a.scene
        .or_else(|| config.scene.clone())
        .ok_or_else(|| Failure::input("missing --scene"))
}

fn required<T>(flag: Option<T>, config: Option<T>, name: &str) -> Result<T, Failure> {
    flag.or(config)
        .ok_or_else(|| Failure::input(format!("missing --{name}")))
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::input(format!("{}: {e}", path.display()))
}

/// Reads a scene document and its meshes; OBJ paths resolve against the
/// scene file's directory.
pub fn load_scene(path: &Path) -> Result<Scene, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let doc = SceneDocument::from_json(&text)
        .map_err(|e| format!("{}: {}", path.display(), SceneError::Json(e)))?;
    let base = path.parent().unwrap_or(Path::new("."));
    Scene::from_document(&doc, base).map_err(|e| format!("{}: {e}", path.display()))
}

fn validate(path: &Path, out: &mut dyn Write) -> Outcome {
    let scene = load_scene(path).map_err(Failure::input)?;
    let samples: usize = scene.generators.iter().map(|g| g.sample_count()).sum();
    let w = |out: &mut dyn Write, s: String| {
        writeln!(out, "{s}").map_err(|e| Failure::input(e.to_string()))
    };
    w(
        out,
        format!(
            "objects: {}, triangles: {}, generators: {}, samples: {}",
            scene.objects.len(),
            scene.triangle_count(),
            scene.generators.len(),
            samples
        ),
    )?;
    for o in &scene.objects {
        let hidden = if o.visible { "" } else { " (hidden)" };
        w(
            out,
            format!(
                "  object {}: {} triangles{hidden}",
                o.id,
                o.mesh.triangle_count()
            ),
        )?;
    }
    for g in &scene.generators {
        w(
            out,
            format!(
                "  generator {}: {}x{} modules, {} cells/module in {} substrings, {} strings of {} modules, {} samples",
                g.id,
                g.module_rows,
                g.module_cols,
                g.cells_per_module(),
                g.substrings.len(),
                g.strings_parallel,
                g.modules_per_string,
                g.sample_count()
            ),
        )?;
    }
    Ok(())
}

fn weather(a: &WeatherArgs, config: &Config) -> Result<Box<dyn WeatherSource>, Failure> {
    let file = if a.clear_sky {
        None
    } else if a.weather.is_some() {
        a.weather.clone()
    } else if config.clear_sky == Some(true) {
        None
    } else {
        config.weather.clone()
    };
    let mode = a
        .weather_mode
        .or(config.weather_mode)
        .unwrap_or(WeatherMode::Measured);
    match file {
        Some(file) if mode != WeatherMode::ClearSky => {
            let text = std::fs::read_to_string(&file).map_err(|e| io_failure(&file, e))?;
            weather_source(mode, Some(&text)).map_err(|e| io_failure(&file, e))
        }
        _ => Ok(weather_source(WeatherMode::ClearSky, None)?),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_failure(path, e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Outcome {
    std::fs::write(path, bytes).map_err(|e| io_failure(path, e))
}

fn simulate(
    a: SimulateArgs,
    config: &Config,
    threads: Option<usize>,
    out: &mut dyn Write,
) -> Outcome {
    let source = weather(&a.weather, config)?;
    let params = RunParams {
        from: required(a.from, config.from.clone(), "from")?,
        to: required(a.to, config.to.clone(), "to")?,
        step: required(a.step, config.step.clone(), "step")?,
        weather_mode: WeatherMode::ClearSky,
    };
    let period = params.period()?;
    let report_path = a
        .report
        .or_else(|| config.report.clone())
        .unwrap_or_else(|| "report.csv".into());
    let heatmap_path = a
        .heatmap
        .or_else(|| config.heatmap.clone())
        .unwrap_or_else(|| "heatmap.csv".into());
    let scene = load_scene(&scene_path(a.scene, config)?).map_err(Failure::input)?;

    let started = Instant::now();
    let mut request = PeriodRequest::new(period.from, period.to, period.step);
    request.threads = threads;
    let result = simulate_period(&scene, source.as_ref(), &request)?;
    let elapsed = started.elapsed();

    write_file(&report_path, result.report.to_csv().as_bytes())?;
    write_file(&heatmap_path, result.heatmap.to_csv().as_bytes())?;
    let total = result.report.total();
    let lines = [
        format!(
            "daylight steps: {} ({} skipped for missing weather)",
            result.steps.len(),
            result.skipped.len()
        ),
        format!("unshaded energy: {:.3} kWh", total.unshaded_kwh),
        format!("shaded energy: {:.3} kWh", total.shaded_kwh),
        format!("loss fraction: {:.4}", total.loss_fraction()),
        format!("wall-clock: {:.1} s", elapsed.as_secs_f64()),
        format!("report: {}", report_path.display()),
        format!("heatmap: {}", heatmap_path.display()),
    ];
    for l in lines {
        writeln!(out, "{l}").map_err(|e| Failure::input(e.to_string()))?;
    }
    Ok(())
}

fn shadows(a: ShadowsArgs, config: &Config, out: &mut dyn Write) -> Outcome {
    let source = weather(&a.weather, config)?;
    let at = parse_instant(&required(a.at, config.at.clone(), "at")?)?;
    let generator = required(a.generator, config.generator.clone(), "generator")?;
    let mask_path = a
        .mask
        .or_else(|| config.mask.clone())
        .unwrap_or_else(|| "mask.csv".into());
    let depth_path = a
        .depth
        .or_else(|| config.depth.clone())
        .unwrap_or_else(|| "depth.pgm".into());
    let dump_path = a.dump.or_else(|| config.dump.clone());
    let scene = load_scene(&scene_path(a.scene, config)?).map_err(Failure::input)?;

    let sim = Simulator::new(&scene);
    let view = sim.shadow_view(&generator, at, true)?;
    let (pos, g) = sim.generator_instant(&generator, source.as_ref(), at)?;
    let mask = &g.detail.as_ref().expect("instant results carry masks").mask;

    let mut f = create(&mask_path)?;
    write_mask_csv(&generator, &view.samples, &mask.shaded, &mut f)
        .map_err(|e| io_failure(&mask_path, e))?;
    f.flush().map_err(|e| io_failure(&mask_path, e))?;
    let mut f = create(&depth_path)?;
    write_depth_pgm(&view.map, &mut f)
        .and_then(|_| f.flush())
        .map_err(|e| io_failure(&depth_path, e))?;
    if let Some(p) = &dump_path {
        let dump = InstantDump::new(at, &pos, std::slice::from_ref(&g));
        write_file(p, dump.to_json().as_bytes())?;
    }
    let lines = [
        format!(
            "sun: azimuth {:.2}°, zenith {:.2}°",
            pos.azimuth_deg, pos.zenith_deg
        ),
        format!(
            "shaded samples: {} of {}",
            g.shaded_samples,
            mask.shaded.len()
        ),
        format!("geometric factor: {:.4}", g.geometric_factor),
        format!("effective factor: {:.4}", g.effective_factor),
        format!("mask: {}", mask_path.display()),
        format!("depth: {}", depth_path.display()),
    ];
    for l in lines {
        writeln!(out, "{l}").map_err(|e| Failure::input(e.to_string()))?;
    }
    Ok(())
}
