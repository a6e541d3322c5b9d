//! Sun-view depth maps, depth-test classification of generator samples and
//! a ray-cast reference.

mod agreement;
mod classify;
mod depth_map;
mod dump;
mod frame;
mod oracle;
mod raster;

use thiserror::Error;

pub use agreement::{
    compare_with_ray_cast, Agreement, OracleComparison, FAR_SILHOUETTE_TEXELS,
    NEAR_SILHOUETTE_TEXELS,
};
pub use classify::{cell_shaded_fractions, classify, default_bias, is_shaded, ShadingMask};
pub use depth_map::{
    build_depth_map, build_depth_map_with, DepthMap, DepthMapOptions, TILE, WINDOW_MARGIN_TEXELS,
};
pub use dump::{write_depth_pgm, write_mask_csv, MASK_HEADER, PGM_EMPTY};
pub use frame::LightFrame;
pub use oracle::{ray_cast_shaded, silhouette_margins, RAY_EPSILON};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShadowError {
    #[error("resolution must be at least 1x1, got {width}x{height}")]
    Resolution { width: usize, height: usize },
    #[error("invalid sun direction: {0}")]
    SunDirection(String),
    #[error("footprint has no points")]
    EmptyFootprint,
    #[error("non-finite {0}")]
    NonFinite(&'static str),
    #[error("mask for generator `{generator}` has {got} entries, expected {expected}")]
    MaskSize {
        generator: String,
        expected: usize,
        got: usize,
    },
}
