//! On-disk layout under the data directory:
//!
//! ```text
//! scenes/<scene-id>/meshes/<obj_path>   OBJ text as uploaded
//! scenes/<scene-id>/rev-<n>.json        scene document of revision n
//! jobs/<job-id>/job.json                job record
//! jobs/<job-id>/report.csv              loss report (done jobs)
//! jobs/<job-id>/heatmap.csv             sun-path heatmap (done jobs)
//! ```
//!
//! Files are written to a temporary name and renamed into place.

use std::collections::BTreeMap;
use std::io;
use std::path::{Path, PathBuf};

use helios_core::scene::SceneDocument;

use crate::jobs::JobRecord;

#[derive(Clone, Debug)]
pub struct Store {
    root: PathBuf,
}

/// Everything persisted for one scene.
pub struct StoredScene {
    pub id: String,
    pub meshes: BTreeMap<String, String>,
    pub revisions: Vec<SceneDocument>,
}

pub const REPORT_FILE: &str = "report.csv";
pub const HEATMAP_FILE: &str = "heatmap.csv";

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(tmp, path)
}

fn subdirs(dir: &Path) -> io::Result<Vec<PathBuf>> {
    if !dir.exists() {
        return Ok(Vec::new());
    }
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    out.sort();
    Ok(out)
}

fn invalid(path: &Path, e: impl std::fmt::Display) -> io::Error {
    io::Error::new(
        io::ErrorKind::InvalidData,
        format!("{}: {e}", path.display()),
    )
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> io::Result<Self> {
        let root = root.into();
        std::fs::create_dir_all(root.join("scenes"))?;
        std::fs::create_dir_all(root.join("jobs"))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn scene_dir(&self, id: &str) -> PathBuf {
        self.root.join("scenes").join(id)
    }

    pub fn job_dir(&self, id: &str) -> PathBuf {
        self.root.join("jobs").join(id)
    }

    pub fn save_meshes(&self, scene: &str, meshes: &BTreeMap<String, String>) -> io::Result<()> {
        let dir = self.scene_dir(scene).join("meshes");
        for (name, text) in meshes {
            write_atomic(&dir.join(name), text.as_bytes())?;
        }
        Ok(())
    }

    pub fn save_revision(&self, scene: &str, revision: u64, doc: &SceneDocument) -> io::Result<()> {
        write_atomic(
            &self.scene_dir(scene).join(format!("rev-{revision}.json")),
            doc.to_json_pretty().as_bytes(),
        )
    }

    pub fn save_job(&self, job: &JobRecord) -> io::Result<()> {
        let json = serde_json::to_string_pretty(job).map_err(io::Error::other)?;
        write_atomic(&self.job_dir(&job.id).join("job.json"), json.as_bytes())
    }

    pub fn save_job_file(&self, job: &str, name: &str, bytes: &[u8]) -> io::Result<()> {
        write_atomic(&self.job_dir(job).join(name), bytes)
    }

    pub fn read_job_file(&self, job: &str, name: &str) -> io::Result<Vec<u8>> {
        std::fs::read(self.job_dir(job).join(name))
    }

    pub fn load_scenes(&self) -> io::Result<Vec<StoredScene>> {
        let mut out = Vec::new();
        for dir in subdirs(&self.root.join("scenes"))? {
            let id = dir
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default()
                .to_string();
            let mut meshes = BTreeMap::new();
            let mesh_dir = dir.join("meshes");
            if mesh_dir.exists() {
                for e in std::fs::read_dir(&mesh_dir)? {
                    let p = e?.path();
                    if p.extension().is_some_and(|x| x == "tmp") {
                        continue;
                    }
                    let name = p
                        .file_name()
                        .and_then(|n| n.to_str())
                        .unwrap_or_default()
                        .to_string();
                    meshes.insert(name, std::fs::read_to_string(&p)?);
                }
            }
            let mut revisions = Vec::new();
            for n in 1.. {
                let p = dir.join(format!("rev-{n}.json"));
                if !p.exists() {
                    break;
                }
                let text = std::fs::read_to_string(&p)?;
                revisions.push(SceneDocument::from_json(&text).map_err(|e| invalid(&p, e))?);
            }
            if !revisions.is_empty() {
                out.push(StoredScene {
                    id,
                    meshes,
                    revisions,
                });
            }
        }
        Ok(out)
    }

    pub fn load_jobs(&self) -> io::Result<Vec<JobRecord>> {
        let mut out = Vec::new();
        for dir in subdirs(&self.root.join("jobs"))? {
            let p = dir.join("job.json");
            if p.exists() {
                let text = std::fs::read_to_string(&p)?;
                out.push(serde_json::from_str(&text).map_err(|e| invalid(&p, e))?);
            }
        }
        Ok(out)
    }
}
