//! Vectors, triangles, meshes and rigid-plus-scale transforms.
//!
//! World frame: X = East, Y = North, Z = up, meters.

mod obj;

use std::ops::{Add, AddAssign, Div, Index, Mul, Neg, Sub};

use thiserror::Error;

use crate::num::Real;

pub use obj::{parse_obj, write_obj, ObjError};

/// Minimum triangle area (m²) kept when building occluder lists.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("scale[{axis}] must be > 0, got {value}")]
    NonPositiveScale { axis: usize, value: f64 },
    #[error("non-finite {what}")]
    NonFinite { what: &'static str },
    #[error("triangle {triangle} references vertex {index}, mesh has {count} vertices")]
    IndexOutOfRange {
        triangle: usize,
        index: u32,
        count: usize,
    },
    #[error("mesh has no triangles")]
    EmptyMesh,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T = f64> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    /// Unit vector in the same direction; `None` for the zero vector.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn component_mul(self, o: Self) -> Self {
        Self::new(self.x * o.x, self.y * o.y, self.z * o.z)
    }

    pub fn min(self, o: Self) -> Self {
        Self::new(self.x.min(o.x), self.y.min(o.y), self.z.min(o.z))
    }

    pub fn max(self, o: Self) -> Self {
        Self::new(self.x.max(o.x), self.y.max(o.y), self.z.max(o.z))
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(
            U::lit(self.x.as_f64()),
            U::lit(self.y.as_f64()),
            U::lit(self.z.as_f64()),
        )
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Div<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn div(self, s: T) -> Self {
        Self::new(self.x / s, self.y / s, self.z / s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triangle<T = f64>(pub [Vec3<T>; 3]);

impl<T: Real> Triangle<T> {
    pub fn new(a: Vec3<T>, b: Vec3<T>, c: Vec3<T>) -> Self {
        Self([a, b, c])
    }

    /// Non-normalized normal, length = 2·area.
    pub fn normal_scaled(&self) -> Vec3<T> {
        (self.0[1] - self.0[0]).cross(self.0[2] - self.0[0])
    }

    pub fn area(&self) -> T {
        self.normal_scaled().norm() * T::lit(0.5)
    }

    pub fn is_degenerate(&self) -> bool {
        !(self.area().as_f64() > DEGENERATE_AREA)
    }

    pub fn map(&self, f: impl Fn(Vec3<T>) -> Vec3<T>) -> Self {
        Self([f(self.0[0]), f(self.0[1]), f(self.0[2])])
    }
}

impl<T> Index<usize> for Triangle<T> {
    type Output = Vec3<T>;
    fn index(&self, i: usize) -> &Vec3<T> {
        &self.0[i]
    }
}

/// Scale, then rotate (Euler Z·Y·X, degrees), then translate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transform<T = f64> {
    translation: Vec3<T>,
    rotation_zyx_deg: [T; 3],
    scale: Vec3<T>,
    matrix: [[T; 3]; 3],
}

impl<T: Real> Transform<T> {
    pub fn new(
        translation: Vec3<T>,
        rotation_zyx_deg: [T; 3],
        scale: Vec3<T>,
    ) -> Result<Self, GeometryError> {
        if !translation.is_finite() {
            return Err(GeometryError::NonFinite {
                what: "translation",
            });
        }
        if rotation_zyx_deg.iter().any(|a| !a.is_finite()) {
            return Err(GeometryError::NonFinite { what: "rotation" });
        }
        for (axis, s) in scale.to_array().into_iter().enumerate() {
            if !(s > T::zero()) || !s.is_finite() {
                return Err(GeometryError::NonPositiveScale {
                    axis,
                    value: s.as_f64(),
                });
            }
        }
        Ok(Self {
            translation,
            rotation_zyx_deg,
            scale,
            matrix: rotation_matrix(rotation_zyx_deg),
        })
    }

    pub fn identity() -> Self {
        let one = Vec3::new(T::one(), T::one(), T::one());
        Self::new(Vec3::zero(), [T::zero(); 3], one).expect("identity transform is valid")
    }

    pub fn translation(&self) -> Vec3<T> {
        self.translation
    }

    pub fn rotation_zyx_deg(&self) -> [T; 3] {
        self.rotation_zyx_deg
    }

    pub fn scale(&self) -> Vec3<T> {
        self.scale
    }

    pub fn is_identity(&self) -> bool {
        self.translation == Vec3::zero()
            && self.rotation_zyx_deg.iter().all(|a| *a == T::zero())
            && self.scale == Vec3::new(T::one(), T::one(), T::one())
    }

    #[inline]
    pub fn rotate(&self, v: Vec3<T>) -> Vec3<T> {
        let m = &self.matrix;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    #[inline]
    pub fn apply(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotate(p.component_mul(self.scale)) + self.translation
    }

    /// Exact algebraic inverse of [`Transform::apply`].
    pub fn apply_inverse(&self, p: Vec3<T>) -> Vec3<T> {
        let m = &self.matrix;
        let q = p - self.translation;
        let r = Vec3::new(
            m[0][0] * q.x + m[1][0] * q.y + m[2][0] * q.z,
            m[0][1] * q.x + m[1][1] * q.y + m[2][1] * q.z,
            m[0][2] * q.x + m[1][2] * q.y + m[2][2] * q.z,
        );
        Vec3::new(r.x / self.scale.x, r.y / self.scale.y, r.z / self.scale.z)
    }
}

fn rotation_matrix<T: Real>(zyx: [T; 3]) -> [[T; 3]; 3] {
    let (sz, cz) = T::sin_cos_deg(zyx[0]);
    let (sy, cy) = T::sin_cos_deg(zyx[1]);
    let (sx, cx) = T::sin_cos_deg(zyx[2]);
    // Rz · Ry · Rx
    [
        [cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx],
        [sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx],
        [-sy, cy * sx, cy * cx],
    ]
}

/// Indexed triangle mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh<T = f64> {
    vertices: Vec<Vec3<T>>,
    triangles: Vec<[u32; 3]>,
}

impl<T: Real> Mesh<T> {
    pub fn new(vertices: Vec<Vec3<T>>, triangles: Vec<[u32; 3]>) -> Result<Self, GeometryError> {
        if triangles.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(GeometryError::NonFinite { what: "vertex" });
        }
        let count = vertices.len();
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= count) {
                return Err(GeometryError::IndexOutOfRange {
                    triangle: t,
                    index,
                    count,
                });
            }
        }
        Ok(Self {
            vertices,
            triangles,
        })
    }

    pub fn vertices(&self) -> &[Vec3<T>] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle(&self, i: usize) -> Triangle<T> {
        let [a, b, c] = self.triangles[i];
        Triangle::new(
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        )
    }

    pub fn iter_triangles(&self) -> impl Iterator<Item = Triangle<T>> + '_ {
        (0..self.triangles.len()).map(move |i| self.triangle(i))
    }

    /// Transformed triangles with zero-area ones removed; returns the drop count.
    pub fn world_triangles(&self, t: &Transform<T>) -> (Vec<Triangle<T>>, usize) {
        let moved = transform_mesh(self, t);
        let mut out = Vec::with_capacity(moved.triangles.len());
        let mut dropped = 0;
        for tri in moved.iter_triangles() {
            if tri.is_degenerate() {
                dropped += 1;
            } else {
                out.push(tri);
            }
        }
        (out, dropped)
    }
}

/// Maps every vertex through `t`; topology is untouched.
pub fn transform_mesh<T: Real>(mesh: &Mesh<T>, t: &Transform<T>) -> Mesh<T> {
    if t.is_identity() {
        return mesh.clone();
    }
    Mesh {
        vertices: mesh.vertices.iter().map(|&v| t.apply(v)).collect(),
        triangles: mesh.triangles.clone(),
    }
}
