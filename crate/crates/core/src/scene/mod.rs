//! Scenes: transformable occluder objects plus PV generators.

mod document;
mod generator;

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use thiserror::Error;

use crate::electrical::CellParams;
use crate::geometry::{parse_obj, GeometryError, Mesh, ObjError, Transform, Triangle, Vec3};
use crate::solar::{Site, SolarError, SunPosition};

pub use document::{EngineSettings, ObjectDoc, SceneDocument, SiteDoc, SCENE_VERSION};
pub use generator::{
    generator_samples, GeneratorError, PVGeneratorSpec, PanelFrame, SamplePoint, TrackingMode,
};

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("cannot read mesh file {path}: {source}")]
    MeshIo {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Obj { path: PathBuf, source: ObjError },
    #[error("object `{object}`: {source}")]
    Geometry {
        object: String,
        source: GeometryError,
    },
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unsupported scene version {0}")]
    Version(u32),
    #[error(transparent)]
    Site(#[from] SolarError),
    #[error("invalid cell parameters: {0}")]
    CellParams(String),
    #[error("invalid engine settings: {0}")]
    Engine(String),
    #[error("scene JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug)]
pub struct SceneObject {
    pub id: String,
    pub mesh: Arc<Mesh>,
    pub transform: Transform,
    pub visible: bool,
}

/// Validated, immutable scene snapshot.
#[derive(Clone, Debug)]
pub struct Scene {
    pub site: Site,
    pub objects: Vec<SceneObject>,
    pub generators: Vec<PVGeneratorSpec>,
    pub cell_params: CellParams,
    pub engine: EngineSettings,
}

impl Scene {
    pub fn new(
        site: Site,
        objects: Vec<SceneObject>,
        generators: Vec<PVGeneratorSpec>,
        cell_params: CellParams,
        engine: EngineSettings,
    ) -> Result<Self, SceneError> {
        site.validate()?;
        cell_params.validate().map_err(SceneError::CellParams)?;
        engine.validate().map_err(SceneError::Engine)?;
        let mut ids = HashSet::new();
        for id in objects
            .iter()
            .map(|o| &o.id)
            .chain(generators.iter().map(|g| &g.id))
        {
            if !ids.insert(id.as_str()) {
                return Err(SceneError::DuplicateId(id.clone()));
            }
        }
        for g in &generators {
            g.validate()?;
        }
        Ok(Self {
            site,
            objects,
            generators,
            cell_params,
            engine,
        })
    }

    /// Loads a document, reading OBJ paths relative to `base_dir`.
    pub fn from_document(doc: &SceneDocument, base_dir: &Path) -> Result<Self, SceneError> {
        Self::from_document_with(doc, &mut |p| load_mesh(&resolve(base_dir, p)))
    }

    /// Loads a document with a caller-supplied mesh loader (for caching).
    pub fn from_document_with(
        doc: &SceneDocument,
        loader: &mut dyn FnMut(&str) -> Result<Arc<Mesh>, SceneError>,
    ) -> Result<Self, SceneError> {
        if doc.version != SCENE_VERSION {
            return Err(SceneError::Version(doc.version));
        }
        let mut objects = Vec::with_capacity(doc.objects.len());
        for o in &doc.objects {
            let transform = o.transform().map_err(|source| SceneError::Geometry {
                object: o.id.clone(),
                source,
            })?;
            objects.push(SceneObject {
                id: o.id.clone(),
                mesh: loader(&o.obj_path)?,
                transform,
                visible: o.visible,
            });
        }
        Self::new(
            doc.site.to_site()?,
            objects,
            doc.generators.clone(),
            doc.cell_params,
            doc.engine,
        )
    }

    pub fn generator(&self, id: &str) -> Option<&PVGeneratorSpec> {
        self.generators.iter().find(|g| g.id == id)
    }

    pub fn triangle_count(&self) -> usize {
        self.objects.iter().map(|o| o.mesh.triangle_count()).sum()
    }

    /// World triangles of all visible objects, degenerate ones dropped.
    pub fn object_triangles(&self) -> Vec<Triangle> {
        let mut out = Vec::new();
        for o in self.objects.iter().filter(|o| o.visible) {
            let (tris, dropped) = o.mesh.world_triangles(&o.transform);
            if dropped > 0 {
                log::warn!("object `{}`: dropped {dropped} degenerate triangles", o.id);
            }
            out.extend(tris);
        }
        out
    }

    /// Panel quads of self-occluding generators other than `target`.
    pub fn generator_occluders(&self, target: &str, sun: Option<&SunPosition>) -> Vec<Triangle> {
        self.generators
            .iter()
            .filter(|g| g.self_occluding && g.id != target)
            .flat_map(|g| g.module_quads(&g.frame_at(sun)))
            .collect()
    }
}

/// Everything that can cast a shadow on `target`: visible objects plus the
/// quads of other self-occluding generators. The target's own surface is
/// never included.
pub fn scene_occluders(
    scene: &Scene,
    target: &str,
    sun: Option<&SunPosition>,
) -> Result<Vec<Triangle>, SceneError> {
    if scene.generator(target).is_none() {
        return Err(SceneError::UnknownGenerator(target.to_string()));
    }
    let mut out = scene.object_triangles();
    out.extend(scene.generator_occluders(target, sun));
    Ok(out)
}

pub fn resolve(base_dir: &Path, obj_path: &str) -> PathBuf {
    let p = Path::new(obj_path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

pub fn load_mesh(path: &Path) -> Result<Arc<Mesh>, SceneError> {
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::MeshIo {
        path: path.to_path_buf(),
        source,
    })?;
    parse_obj(&text)
        .map(Arc::new)
        .map_err(|source| SceneError::Obj {
            path: path.to_path_buf(),
            source,
        })
}

/// Centroid of a generator outline; used as the light-frame anchor.
pub fn outline_center(points: &[Vec3]) -> Vec3 {
    let n = points.len().max(1) as f64;
    points.iter().fold(Vec3::zero(), |a, &p| a + p) / n
}
