// Validation uses `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod electrical;
pub mod fixtures;
pub mod geometry;
pub mod num;
pub mod scene;
pub mod shadow;
pub mod sim;
pub mod solar;

pub use num::Real;

pub type Vec3d = geometry::Vec3<f64>;
pub type Vec3f = geometry::Vec3<f32>;
pub type Triangled = geometry::Triangle<f64>;
pub type Trianglef = geometry::Triangle<f32>;
pub type Meshd = geometry::Mesh<f64>;
pub type Meshf = geometry::Mesh<f32>;
pub type DepthMapd = shadow::DepthMap<f64>;
pub type DepthMapf = shadow::DepthMap<f32>;
