//! Synthetic scenes and meshes shared by tests, benchmarks and the CLI docs.
//!
//! Real survey meshes are not distributed with the crate, so every fixture
//! is built procedurally from boxes, cylinders and icospheres.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, TimeZone, Utc};
use rand::Rng;

use crate::electrical::CellParams;
use crate::geometry::{write_obj, Mesh, Triangle, Vec3};
use crate::scene::{
    EngineSettings, ObjectDoc, PVGeneratorSpec, Scene, SceneDocument, SceneError, SiteDoc,
    TrackingMode, SCENE_VERSION,
};

/// Accumulates vertices and triangles from several primitives.
#[derive(Clone, Debug, Default)]
pub struct MeshBuilder {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
}

impl MeshBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, p: Vec3) -> u32 {
        self.vertices.push(p);
        (self.vertices.len() - 1) as u32
    }

    pub fn triangle(&mut self, a: u32, b: u32, c: u32) {
        self.triangles.push([a, b, c]);
    }

    pub fn append(&mut self, mesh: &Mesh) -> &mut Self {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(mesh.vertices());
        self.triangles
            .extend(mesh.triangles().iter().map(|t| t.map(|i| i + base)));
        self
    }

    pub fn build(self) -> Mesh {
        Mesh::new(self.vertices, self.triangles).expect("builder produces a valid mesh")
    }
}

/// Axis-aligned box; each face is split into `n × n` quads.
pub fn box_mesh(min: Vec3, max: Vec3, n: usize) -> Mesh {
    let n = n.max(1);
    let mut b = MeshBuilder::new();
    let size = max - min;
    // (origin corner, u edge, v edge) with u × v pointing outwards.
    let faces = [
        (
            min,
            Vec3::new(0.0, size.y, 0.0),
            Vec3::new(size.x, 0.0, 0.0),
        ),
        (
            Vec3::new(min.x, min.y, max.z),
            Vec3::new(size.x, 0.0, 0.0),
            Vec3::new(0.0, size.y, 0.0),
        ),
        (
            min,
            Vec3::new(size.x, 0.0, 0.0),
            Vec3::new(0.0, 0.0, size.z),
        ),
        (
            Vec3::new(min.x, max.y, min.z),
            Vec3::new(0.0, 0.0, size.z),
            Vec3::new(size.x, 0.0, 0.0),
        ),
        (
            min,
            Vec3::new(0.0, 0.0, size.z),
            Vec3::new(0.0, size.y, 0.0),
        ),
        (
            Vec3::new(max.x, min.y, min.z),
            Vec3::new(0.0, size.y, 0.0),
            Vec3::new(0.0, 0.0, size.z),
        ),
    ];
    for (o, u, v) in faces {
        let base = b.vertices.len() as u32;
        for j in 0..=n {
            for i in 0..=n {
                b.vertex(o + u * (i as f64 / n as f64) + v * (j as f64 / n as f64));
            }
        }
        let idx = |i: usize, j: usize| base + (j * (n + 1) + i) as u32;
        for j in 0..n {
            for i in 0..n {
                b.triangle(idx(i, j), idx(i + 1, j), idx(i + 1, j + 1));
                b.triangle(idx(i, j), idx(i + 1, j + 1), idx(i, j + 1));
            }
        }
    }
    b.build()
}

/// Closed cylinder from `a` to `b`.
pub fn cylinder(a: Vec3, b: Vec3, radius: f64, segments: usize) -> Mesh {
    let segments = segments.max(3);
    let axis = (b - a).normalized().expect("cylinder axis has length");
    let helper = if axis.z.abs() < 0.9 {
        Vec3::unit_z()
    } else {
        Vec3::new(1.0, 0.0, 0.0)
    };
    let e1 = helper
        .cross(axis)
        .normalized()
        .expect("helper not parallel to axis");
    let e2 = axis.cross(e1);
    let mut m = MeshBuilder::new();
    let ca = m.vertex(a);
    let cb = m.vertex(b);
    let ring: Vec<(u32, u32)> = (0..segments)
        .map(|k| {
            let phi = std::f64::consts::TAU * k as f64 / segments as f64;
            let off = (e1 * phi.cos() + e2 * phi.sin()) * radius;
            (m.vertex(a + off), m.vertex(b + off))
        })
        .collect();
    for k in 0..segments {
        let (a0, b0) = ring[k];
        let (a1, b1) = ring[(k + 1) % segments];
        m.triangle(a0, a1, b1);
        m.triangle(a0, b1, b0);
        m.triangle(ca, a1, a0);
        m.triangle(cb, b0, b1);
    }
    m.build()
}

/// Sphere from a subdivided icosahedron: `20 · 4^level` triangles.
pub fn icosphere(center: Vec3, radius: f64, level: u32) -> Mesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vec3> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vec3::new(x, y, z).normalized().unwrap())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(u32, u32), u32> = HashMap::new();
        let mut mid = |a: u32, b: u32, verts: &mut Vec<Vec3>| {
            *cache.entry((a.min(b), a.max(b))).or_insert_with(|| {
                verts.push(
                    ((verts[a as usize] + verts[b as usize]) * 0.5)
                        .normalized()
                        .unwrap(),
                );
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let verts = verts.into_iter().map(|v| center + v * radius).collect();
    Mesh::new(verts, faces).expect("icosphere is valid")
}

/// Merges meshes into one.
pub fn merge(meshes: &[Mesh]) -> Mesh {
    let mut b = MeshBuilder::new();
    for m in meshes {
        b.append(m);
    }
    b.build()
}

/// A scene document plus the meshes its `obj_path`s refer to.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub document: SceneDocument,
    pub meshes: Vec<(String, Mesh)>,
}

impl Fixture {
    /// Builds the scene without touching the file system.
    pub fn scene(&self) -> Result<Scene, SceneError> {
        let meshes: HashMap<&str, Arc<Mesh>> = self
            .meshes
            .iter()
            .map(|(p, m)| (p.as_str(), Arc::new(m.clone())))
            .collect();
        Scene::from_document_with(&self.document, &mut |p| {
            meshes.get(p).cloned().ok_or_else(|| SceneError::MeshIo {
                path: PathBuf::from(p),
                source: std::io::Error::from(std::io::ErrorKind::NotFound),
            })
        })
    }

    /// Writes `scene.json` and the OBJ files into `dir`; returns the scene path.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        for (path, mesh) in &self.meshes {
            let mut f = std::io::BufWriter::new(std::fs::File::create(dir.join(path))?);
            write_obj(mesh, &mut f)?;
            std::io::Write::flush(&mut f)?;
        }
        let scene = dir.join("scene.json");
        std::fs::write(&scene, self.document.to_json_pretty())?;
        Ok(scene)
    }

    pub fn triangle_count(&self) -> usize {
        self.meshes.iter().map(|(_, m)| m.triangle_count()).sum()
    }

    pub fn with_object_visibility(mut self, id: &str, visible: bool) -> Self {
        for o in self.document.objects.iter_mut().filter(|o| o.id == id) {
            o.visible = visible;
        }
        self
    }

    /// Keeps only the named object visible.
    pub fn isolate(mut self, id: &str) -> Self {
        for o in &mut self.document.objects {
            o.visible = o.id == id;
        }
        self
    }
}

fn object(id: &str) -> ObjectDoc {
    ObjectDoc {
        id: id.into(),
        obj_path: format!("{id}.obj"),
        translation_m: [0.0; 3],
        rotation_deg: [0.0; 3],
        scale: [1.0; 3],
        visible: true,
    }
}

/// Generator of 36-cell modules (9 rows × 4 columns, two bypass diodes),
/// one string per module row.
pub fn module_grid(
    id: &str,
    origin: [f64; 3],
    azimuth_deg: f64,
    tilt_deg: f64,
    rows: usize,
    cols: usize,
    subdivision: usize,
) -> PVGeneratorSpec {
    PVGeneratorSpec {
        id: id.into(),
        origin,
        mode: TrackingMode::Fixed,
        azimuth_deg,
        tilt_deg,
        module_rows: rows,
        module_cols: cols,
        module_w_m: 0.66,
        module_h_m: 1.5,
        gap_row_m: 0.02,
        gap_col_m: 0.02,
        cell_rows: 9,
        cell_cols: 4,
        substrings: PVGeneratorSpec::consecutive_substrings(36, 2),
        modules_per_string: cols,
        strings_parallel: rows,
        subdivision,
        self_occluding: false,
    }
}

pub const FIXTURE_SITE: SiteDoc = SiteDoc {
    lat_deg: 45.0,
    lon_deg: 7.7,
    altitude_m: 240.0,
    turbidity: 3.0,
};

fn document(objects: Vec<ObjectDoc>, generators: Vec<PVGeneratorSpec>) -> SceneDocument {
    SceneDocument {
        version: SCENE_VERSION,
        site: FIXTURE_SITE,
        objects,
        generators,
        cell_params: CellParams::default(),
        engine: EngineSettings::default(),
    }
}

/// Sun (azimuth, zenith) in degrees at which the bike shades the lower
/// cells of the wall/bike panel.
pub const WALL_BIKE_SUN: (f64, f64) = (180.0, 72.0);

/// Winter-noon instant at [`FIXTURE_SITE`] when the bike shades the lower
/// cells of the wall/bike panel.
pub fn wall_bike_instant() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2023, 12, 21, 11, 30, 0).unwrap()
}

/// Ground-mounted row of twelve modules in series facing south, a bicycle
/// parked in front of it and a garden wall behind it.
pub fn wall_bike_panel() -> Fixture {
    let wall = box_mesh(Vec3::new(-5.0, 2.0, 0.0), Vec3::new(5.0, 2.2, 2.0), 1);
    let (y, r) = (-1.1, 0.34);
    let rear = Vec3::new(-1.5, y, r);
    let front = Vec3::new(-0.45, y, r);
    let crank = Vec3::new(-1.05, y, 0.3);
    let seat = Vec3::new(-1.2, y, 0.85);
    let head = Vec3::new(-0.55, y, 0.85);
    let wheel = |c: Vec3| {
        cylinder(
            c + Vec3::new(0.0, -0.02, 0.0),
            c + Vec3::new(0.0, 0.02, 0.0),
            r,
            32,
        )
    };
    let tube = |a: Vec3, b: Vec3| cylinder(a, b, 0.02, 8);
    let bike = merge(&[
        wheel(rear),
        wheel(front),
        tube(rear, crank),
        tube(crank, seat),
        tube(seat, head),
        tube(crank, head),
        tube(rear, seat),
        tube(head, front),
        tube(head, head + Vec3::new(0.05, 0.0, 0.2)),
        tube(
            Vec3::new(-0.5, y - 0.25, 1.05),
            Vec3::new(-0.5, y + 0.25, 1.05),
        ),
        box_mesh(
            Vec3::new(-1.32, y - 0.06, 0.88),
            Vec3::new(-1.08, y + 0.06, 0.93),
            1,
        ),
    ]);
    let generator = module_grid("panel", [0.0, 0.0, 0.8], 180.0, 30.0, 1, 12, 3);
    Fixture {
        document: document(vec![object("wall"), object("bike")], vec![generator]),
        meshes: vec![("wall.obj".into(), wall), ("bike.obj".into(), bike)],
    }
}

/// Tessellation level of [`house_tree_streetlight`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Detail {
    /// A few thousand triangles, for tests.
    Light,
    /// About 80,000 triangles, for timing runs.
    Full,
}

/// Roof-mounted generator (3 × 13 modules, 1,404 cell-center samples) on a
/// house with a taller west-north-west wing, a tree to the south-east and a
/// streetlight to the east-south-east.
///
/// The wing shades the array on summer evenings; the tree and the
/// streetlight shade it on winter mornings.
pub fn house_tree_streetlight(detail: Detail) -> Fixture {
    let (box_n, crown_level, trunk_seg, pole_seg, lamp_level) = match detail {
        Detail::Light => (1, 2, 16, 16, 1),
        Detail::Full => (23, 5, 64, 128, 4),
    };
    let pitch = 30f64;
    let (eave_y, eave_z) = (-4.5, 3.0);
    let ridge_z = eave_z + 4.5 * pitch.to_radians().tan();
    let mut roof = MeshBuilder::new();
    let p = [
        roof.vertex(Vec3::new(-5.0, eave_y, eave_z)),
        roof.vertex(Vec3::new(5.0, eave_y, eave_z)),
        roof.vertex(Vec3::new(5.0, 0.0, ridge_z)),
        roof.vertex(Vec3::new(-5.0, 0.0, ridge_z)),
        roof.vertex(Vec3::new(-5.0, 4.5, eave_z)),
        roof.vertex(Vec3::new(5.0, 4.5, eave_z)),
    ];
    roof.triangle(p[0], p[1], p[2]);
    roof.triangle(p[0], p[2], p[3]);
    roof.triangle(p[3], p[2], p[5]);
    roof.triangle(p[3], p[5], p[4]);
    roof.triangle(p[0], p[3], p[4]);
    roof.triangle(p[1], p[5], p[2]);
    let house = merge(&[
        box_mesh(
            Vec3::new(-5.0, -4.5, 0.0),
            Vec3::new(5.0, 4.5, eave_z),
            box_n,
        ),
        roof.build(),
        box_mesh(
            Vec3::new(-11.0, -2.0, 0.0),
            Vec3::new(-6.0, 5.0, 10.0),
            box_n,
        ),
    ]);

    let (tx, ty) = (8.0, -13.8);
    let tree = merge(&[
        cylinder(
            Vec3::new(tx, ty, 0.0),
            Vec3::new(tx, ty, 6.0),
            0.3,
            trunk_seg,
        ),
        icosphere(Vec3::new(tx, ty, 8.0), 3.2, crown_level),
        icosphere(Vec3::new(tx - 1.2, ty + 0.8, 9.5), 2.4, crown_level),
        icosphere(Vec3::new(tx + 1.0, ty - 0.6, 10.0), 2.2, crown_level),
    ]);

    let (sx, sy, h) = (9.2, -10.0, 7.0);
    let streetlight = merge(&[
        cylinder(Vec3::new(sx, sy, 0.0), Vec3::new(sx, sy, h), 0.12, pole_seg),
        box_mesh(
            Vec3::new(sx - 1.2, sy - 0.08, h - 0.1),
            Vec3::new(sx, sy + 0.08, h + 0.05),
            1,
        ),
        icosphere(Vec3::new(sx - 1.2, sy, h - 0.15), 0.3, lamp_level),
    ]);

    // The array floats 0.15 m above the south roof plane.
    let (sp, cp) = (pitch.to_radians().sin(), pitch.to_radians().cos());
    let along = 2.25;
    let origin = [
        0.0,
        eave_y + along - 0.15 * sp,
        eave_z + along * pitch.to_radians().tan() + 0.15 * cp,
    ];
    let generator = module_grid("roof", origin, 180.0, pitch, 3, 13, 1);
    Fixture {
        document: document(
            vec![object("house"), object("tree"), object("streetlight")],
            vec![generator],
        ),
        meshes: vec![
            ("house.obj".into(), house),
            ("tree.obj".into(), tree),
            ("streetlight.obj".into(), streetlight),
        ],
    }
}

/// Low morning sun in the south-east: where the tree and the streetlight
/// of [`house_tree_streetlight`] cast their shadows.
pub fn winter_morning_region(azimuth_deg: f64, zenith_deg: f64) -> bool {
    (90.0..180.0).contains(&azimuth_deg) && zenith_deg >= 64.0
}

/// Evening sun north of west, which only occurs in the warm half-year:
/// where the wing of [`house_tree_streetlight`] casts its shadow.
pub fn summer_evening_region(azimuth_deg: f64, _zenith_deg: f64) -> bool {
    (240.0..320.0).contains(&azimuth_deg)
}

/// Randomized occluder soup over a ground patch, for comparing the depth
/// map against exact ray casting.
#[derive(Clone, Debug)]
pub struct OracleScene {
    pub occluders: Vec<Triangle>,
    pub samples: Vec<Vec3>,
}

/// Up to `max_triangles` triangles (edge offsets up to 1.5 m) above a
/// 10 m × 10 m patch of `sample_count` ground samples. About one triangle in
/// ten sits below the ground and must never cast a shadow.
pub fn random_oracle_scene(
    rng: &mut impl Rng,
    max_triangles: usize,
    sample_count: usize,
) -> OracleScene {
    let count = rng.gen_range(1..=max_triangles.max(1));
    let mut occluders = Vec::with_capacity(count);
    while occluders.len() < count {
        let below = rng.gen_bool(0.1);
        let cz = if below {
            rng.gen_range(-4.0..-1.6)
        } else {
            rng.gen_range(2.0..5.0)
        };
        let c = Vec3::new(rng.gen_range(-2.0..12.0), rng.gen_range(-2.0..12.0), cz);
        let mut jitter = || {
            Vec3::new(
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
                rng.gen_range(-1.5..1.5),
            )
        };
        let t = Triangle::new(c + jitter(), c + jitter(), c + jitter());
        if t.area() > 1e-3 {
            occluders.push(t);
        }
    }
    let samples = (0..sample_count)
        .map(|_| Vec3::new(rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0), 0.0))
        .collect();
    OracleScene { occluders, samples }
}

/// Sun direction with uniform azimuth and zenith below `max_zenith_deg`.
pub fn random_sun(rng: &mut impl Rng, max_zenith_deg: f64) -> Vec3 {
    let az = rng.gen_range(0.0..360.0f64).to_radians();
    let zen = rng.gen_range(0.0..max_zenith_deg).to_radians();
    Vec3::new(zen.sin() * az.sin(), zen.sin() * az.cos(), zen.cos())
}
