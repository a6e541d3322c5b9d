//! Scene revisions and the scene endpoints.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::Json;
use helios_core::geometry::{parse_obj, GeometryError, Mesh};
use helios_core::scene::{PVGeneratorSpec, Scene, SceneDocument, SceneError};
use helios_core::sim::{parse_instant, InstantDump, SimError, Simulator};
use helios_core::solar::{sun_position, ClearSkySource};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{ApiError, ApiResult};
use crate::AppState;

/// Immutable scene snapshot.
pub struct Revision {
    pub number: u64,
    pub document: SceneDocument,
    pub scene: Arc<Scene>,
}

/// Meshes of a scene and its revisions, oldest first; revision `n` sits at
/// index `n - 1`.
pub struct SceneHistory {
    pub meshes: Arc<HashMap<String, Arc<Mesh>>>,
    pub revisions: Vec<Arc<Revision>>,
}

impl SceneHistory {
    pub fn latest(&self) -> Arc<Revision> {
        self.revisions
            .last()
            .expect("scenes have a first revision")
            .clone()
    }

    pub fn get(&self, revision: u64) -> Option<Arc<Revision>> {
        revision
            .checked_sub(1)
            .and_then(|i| self.revisions.get(i as usize))
            .cloned()
    }

    pub fn build(&self, document: SceneDocument) -> ApiResult<Revision> {
        let scene = build_scene(&document, &self.meshes, "")?;
        Ok(Revision {
            number: self.revisions.len() as u64 + 1,
            document,
            scene: Arc::new(scene),
        })
    }
}

fn geometry_field(e: &GeometryError) -> String {
    match e {
        GeometryError::NonPositiveScale { axis, .. } => format!("scale[{axis}]"),
        GeometryError::NonFinite { what: "rotation" } => "rotation_deg".into(),
        GeometryError::NonFinite { .. } => "translation_m".into(),
        _ => "obj_path".into(),
    }
}

fn scene_error(doc: &SceneDocument, e: SceneError, prefix: &str) -> ApiError {
    let object_index = |id: &str| doc.objects.iter().position(|o| o.id == id).unwrap_or(0);
    let field = match &e {
        SceneError::Geometry { object, source } => {
            format!(
                "{prefix}objects[{}].{}",
                object_index(object),
                geometry_field(source)
            )
        }
        SceneError::Generator(g) => {
            let k = doc
                .generators
                .iter()
                .position(|s| s.id == g.generator())
                .unwrap_or(0);
            format!("{prefix}generators[{k}].{}", g.field())
        }
        SceneError::DuplicateId(_) => format!("{prefix}objects"),
        SceneError::Site(_) => format!("{prefix}site"),
        SceneError::CellParams(_) => format!("{prefix}cell_params"),
        SceneError::Engine(_) => format!("{prefix}engine"),
        SceneError::Version(_) => format!("{prefix}version"),
        _ => format!("{prefix}objects"),
    };
    ApiError::invalid(field, e.to_string())
}

pub fn build_scene(
    doc: &SceneDocument,
    meshes: &HashMap<String, Arc<Mesh>>,
    prefix: &str,
) -> ApiResult<Scene> {
    for (i, o) in doc.objects.iter().enumerate() {
        if !meshes.contains_key(&o.obj_path) {
            return Err(ApiError::invalid(
                format!("{prefix}objects[{i}].obj_path"),
                format!("no mesh uploaded as `{}`", o.obj_path),
            ));
        }
    }
    Scene::from_document_with(doc, &mut |p| Ok(meshes[p].clone()))
        .map_err(|e| scene_error(doc, e, prefix))
}

/// Parses uploaded OBJ texts; names must be plain file names.
pub fn parse_meshes(texts: &BTreeMap<String, String>) -> ApiResult<HashMap<String, Arc<Mesh>>> {
    let mut out = HashMap::new();
    for (name, text) in texts {
        let field = format!("meshes.{name}");
        let plain = !name.is_empty() && name != "." && name != ".." && !name.contains(['/', '\\']);
        if !plain {
            return Err(ApiError::invalid(
                field,
                "mesh names must be plain file names",
            ));
        }
        let mesh = parse_obj(text).map_err(|e| ApiError::invalid(field, e.to_string()))?;
        out.insert(name.clone(), Arc::new(mesh));
    }
    Ok(out)
}

#[derive(Debug, Deserialize)]
pub struct CreateScene {
    pub scene: SceneDocument,
    #[serde(default)]
    pub meshes: BTreeMap<String, String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RevisionRef {
    pub id: String,
    pub revision: u64,
}

#[derive(Debug, Serialize)]
pub struct SceneView {
    pub id: String,
    pub revision: u64,
    pub latest_revision: u64,
    pub triangles: usize,
    pub samples: usize,
    pub scene: SceneDocument,
}

#[derive(Debug, Deserialize)]
pub struct RevisionQuery {
    pub revision: Option<u64>,
}

fn parse_body<T: serde::de::DeserializeOwned>(body: &[u8], field: &str) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::invalid(field, e.to_string()))
}

pub async fn create(
    State(app): State<AppState>,
    body: axum::body::Bytes,
) -> ApiResult<impl IntoResponse> {
    let req: CreateScene = parse_body(&body, "scene")?;
    let meshes = parse_meshes(&req.meshes)?;
    let scene = build_scene(&req.scene, &meshes, "scene.")?;
    let id = app.next_scene_id();
    app.store()
        .save_meshes(&id, &req.meshes)
        .map_err(ApiError::internal)?;
    app.store()
        .save_revision(&id, 1, &req.scene)
        .map_err(ApiError::internal)?;
    let first = Revision {
        number: 1,
        document: req.scene,
        scene: Arc::new(scene),
    };
    app.insert_scene(
        &id,
        SceneHistory {
            meshes: Arc::new(meshes),
            revisions: vec![Arc::new(first)],
        },
    );
    Ok((StatusCode::CREATED, Json(RevisionRef { id, revision: 1 })))
}

pub async fn get(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<RevisionQuery>,
) -> ApiResult<Json<SceneView>> {
    let history = app.scene(&id)?;
    let history = history.lock().await;
    let latest = history.revisions.len() as u64;
    let rev = match q.revision {
        Some(n) => history
            .get(n)
            .ok_or_else(|| ApiError::not_found(format!("scene `{id}` has no revision {n}")))?,
        None => history.latest(),
    };
    Ok(Json(SceneView {
        id,
        revision: rev.number,
        latest_revision: latest,
        triangles: rev.scene.triangle_count(),
        samples: rev.scene.generators.iter().map(|g| g.sample_count()).sum(),
        scene: rev.document.clone(),
    }))
}

fn patch_map(body: &[u8]) -> ApiResult<Map<String, Value>> {
    match parse_body::<Value>(body, "body")? {
        Value::Object(m) => Ok(m),
        _ => Err(ApiError::invalid("body", "expected a JSON object")),
    }
}

fn triple(key: &str, v: &Value, positive: bool) -> ApiResult<[f64; 3]> {
    let arr: [Value; 3] = serde_json::from_value(v.clone())
        .map_err(|_| ApiError::invalid(key, format!("{key} must be an array of three numbers")))?;
    let mut out = [0.0; 3];
    for (i, x) in arr.iter().enumerate() {
        let field = format!("{key}[{i}]");
        let x = x
            .as_f64()
            .ok_or_else(|| ApiError::invalid(&field, "expected a number"))?;
        if positive && x <= 0.0 {
            return Err(ApiError::invalid(
                field,
                format!("{key} must be > 0, got {x}"),
            ));
        }
        out[i] = x;
    }
    Ok(out)
}

/// Commits `document` as the next revision of a locked history.
fn commit(
    app: &AppState,
    id: &str,
    history: &mut SceneHistory,
    document: SceneDocument,
) -> ApiResult<RevisionRef> {
    let rev = history.build(document)?;
    app.store()
        .save_revision(id, rev.number, &rev.document)
        .map_err(ApiError::internal)?;
    let number = rev.number;
    history.revisions.push(Arc::new(rev));
    Ok(RevisionRef {
        id: id.to_string(),
        revision: number,
    })
}

/// Body: any of `translation_m`, `rotation_deg`, `scale`, `visible`.
pub async fn patch_object(
    State(app): State<AppState>,
    Path((id, oid)): Path<(String, String)>,
    body: axum::body::Bytes,
) -> ApiResult<Json<RevisionRef>> {
    let patch = patch_map(&body)?;
    let history = app.scene(&id)?;
    let mut history = history.lock().await;
    let mut doc = history.latest().document.clone();
    let object = doc
        .objects
        .iter_mut()
        .find(|o| o.id == oid)
        .ok_or_else(|| ApiError::not_found(format!("scene `{id}` has no object `{oid}`")))?;
    for (key, v) in &patch {
        match key.as_str() {
            "translation_m" => object.translation_m = triple(key, v, false)?,
            "rotation_deg" => object.rotation_deg = triple(key, v, false)?,
            "scale" => object.scale = triple(key, v, true)?,
            "visible" => {
                object.visible = v
                    .as_bool()
                    .ok_or_else(|| ApiError::invalid(key, "expected a boolean"))?
            }
            other => {
                return Err(ApiError::invalid(
                    other,
                    format!("unknown object field `{other}`"),
                ))
            }
        }
    }
    Ok(Json(commit(&app, &id, &mut history, doc)?))
}

/// Body: any subset of generator spec fields except `id`.
pub async fn patch_generator(
    State(app): State<AppState>,
    Path((id, gid)): Path<(String, String)>,
    body: axum::body::Bytes,
) -> ApiResult<Json<RevisionRef>> {
    let patch = patch_map(&body)?;
    let history = app.scene(&id)?;
    let mut history = history.lock().await;
    let mut doc = history.latest().document.clone();
    let k = doc
        .generators
        .iter()
        .position(|g| g.id == gid)
        .ok_or_else(|| ApiError::not_found(format!("scene `{id}` has no generator `{gid}`")))?;
    let original = serde_json::to_value(&doc.generators[k]).map_err(ApiError::internal)?;
    let Value::Object(mut merged) = original.clone() else {
        unreachable!("specs serialize as objects")
    };
    for (key, v) in &patch {
        if key == "id" && v.as_str() != Some(gid.as_str()) {
            return Err(ApiError::invalid("id", "generator ids cannot be changed"));
        }
        if !merged.contains_key(key) {
            return Err(ApiError::invalid(
                key,
                format!("unknown generator field `{key}`"),
            ));
        }
        let Value::Object(mut single) = original.clone() else {
            unreachable!()
        };
        single.insert(key.clone(), v.clone());
        serde_json::from_value::<PVGeneratorSpec>(Value::Object(single))
            .map_err(|e| ApiError::invalid(key, e.to_string()))?;
        merged.insert(key.clone(), v.clone());
    }
    let spec: PVGeneratorSpec = serde_json::from_value(Value::Object(merged))
        .map_err(|e| ApiError::invalid("body", e.to_string()))?;
    spec.validate()
        .map_err(|e| ApiError::invalid(e.field(), e.to_string()))?;
    doc.generators[k] = spec;
    Ok(Json(commit(&app, &id, &mut history, doc)?))
}

#[derive(Debug, Deserialize)]
pub struct ShadowQuery {
    pub at: String,
    pub generator: String,
    pub revision: Option<u64>,
}

/// Mask, cell fractions and factors of one generator at one instant under
/// clear sky; the body matches the CLI `shadows --dump` file byte for byte.
pub async fn shadows(
    State(app): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<ShadowQuery>,
) -> ApiResult<impl IntoResponse> {
    let at = parse_instant(&q.at).map_err(|e| ApiError::invalid("at", e.to_string()))?;
    let rev = {
        let history = app.scene(&id)?;
        let history = history.lock().await;
        match q.revision {
            Some(n) => history
                .get(n)
                .ok_or_else(|| ApiError::not_found(format!("scene `{id}` has no revision {n}")))?,
            None => history.latest(),
        }
    };
    if rev.scene.generator(&q.generator).is_none() {
        return Err(ApiError::not_found(format!(
            "scene `{id}` has no generator `{}`",
            q.generator
        )));
    }
    let json = tokio::task::spawn_blocking(move || -> Result<String, SimError> {
        let scene = &rev.scene;
        let pos = sun_position(&scene.site, at)?;
        if !pos.is_daylight() {
            return Err(SimError::SunBelowHorizon {
                instant: at,
                zenith_deg: pos.zenith_deg,
            });
        }
        let (pos, g) =
            Simulator::new(scene).generator_instant(&q.generator, &ClearSkySource, at)?;
        Ok(InstantDump::new(at, &pos, std::slice::from_ref(&g)).to_json())
    })
    .await
    .map_err(ApiError::internal)?
    .map_err(|e| match e {
        SimError::SunBelowHorizon { .. } => ApiError::conflict(e.to_string()),
        SimError::Solar(_) => ApiError::invalid("at", e.to_string()),
        other => ApiError::internal(other),
    })?;
    Ok(([(header::CONTENT_TYPE, "application/json")], json))
}
