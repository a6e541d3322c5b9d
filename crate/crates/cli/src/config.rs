//! TOML run configuration. Every key mirrors the flag of the same name
//! (dashes become underscores); flags win over the file.

use std::path::{Path, PathBuf};

use helios_core::solar::WeatherMode;
use serde::Deserialize;

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scene: Option<PathBuf>,
    pub clear_sky: Option<bool>,
    pub weather: Option<PathBuf>,
    pub weather_mode: Option<WeatherMode>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub step: Option<String>,
    pub report: Option<PathBuf>,
    pub heatmap: Option<PathBuf>,
    pub threads: Option<usize>,
    pub at: Option<String>,
    pub generator: Option<String>,
    pub mask: Option<PathBuf>,
    pub depth: Option<PathBuf>,
    pub dump: Option<PathBuf>,
}

impl Config {
    /// Reads a config file; relative paths in it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut c: Config =
            toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut c.scene,
            &mut c.weather,
            &mut c.report,
            &mut c.heatmap,
            &mut c.mask,
            &mut c.depth,
            &mut c.dump,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(c)
    }
}
