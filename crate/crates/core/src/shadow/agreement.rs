//! Depth-map classification scored against the ray-cast reference.

use std::ops::AddAssign;

use super::{build_depth_map_with, default_bias, is_shaded, ray_cast_shaded, silhouette_margins};
use super::{DepthMapOptions, ShadowError};
use crate::geometry::{Triangle, Vec3};
use crate::num::Real;

/// Samples closer than this to a silhouette (in texels) may legitimately
/// disagree with the reference.
pub const NEAR_SILHOUETTE_TEXELS: f64 = 1.5;

/// Beyond this distance from any silhouette the two must agree exactly.
pub const FAR_SILHOUETTE_TEXELS: f64 = 3.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Agreement {
    pub total: usize,
    pub agree: usize,
}

impl Agreement {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.agree as f64 / self.total as f64
        }
    }

    pub fn disagree(&self) -> usize {
        self.total - self.agree
    }

    fn record(&mut self, same: bool) {
        self.total += 1;
        self.agree += usize::from(same);
    }
}

impl AddAssign for Agreement {
    fn add_assign(&mut self, o: Self) {
        self.total += o.total;
        self.agree += o.agree;
    }
}

/// Agreement over all samples, over those farther than
/// [`NEAR_SILHOUETTE_TEXELS`] from a silhouette and over those farther than
/// [`FAR_SILHOUETTE_TEXELS`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OracleComparison {
    pub all: Agreement,
    pub beyond_near: Agreement,
    pub beyond_far: Agreement,
}

impl AddAssign for OracleComparison {
    fn add_assign(&mut self, o: Self) {
        self.all += o.all;
        self.beyond_near += o.beyond_near;
        self.beyond_far += o.beyond_far;
    }
}

/// Classifies `samples` (lying on a surface with unit `normal`) with a
/// sparse depth map at `resolution` and the default bias, and scores the
/// result against exact ray casting.
pub fn compare_with_ray_cast<T: Real>(
    occluders: &[Triangle<T>],
    sun_dir: Vec3<T>,
    samples: &[Vec3<T>],
    normal: Vec3<T>,
    resolution: [usize; 2],
) -> Result<OracleComparison, ShadowError> {
    let options = DepthMapOptions::sparse(samples);
    let map = build_depth_map_with(occluders, sun_dir, samples, resolution, &options)?;
    let bias = default_bias(map.texel_size(), normal, sun_dir);
    let texel = map.texel_size().as_f64();
    let margins = silhouette_margins(occluders, sun_dir, samples);
    let mut out = OracleComparison::default();
    for (&p, margin) in samples.iter().zip(margins) {
        let same = is_shaded(&map, p, bias) == ray_cast_shaded(occluders, sun_dir, p);
        let texels = margin / texel;
        out.all.record(same);
        if texels > NEAR_SILHOUETTE_TEXELS {
            out.beyond_near.record(same);
        }
        if texels > FAR_SILHOUETTE_TEXELS {
            out.beyond_far.record(same);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_square_agrees_away_from_edges() {
        let occ = vec![
            Triangle::new(
                Vec3::new(2.0, 2.0, 3.0),
                Vec3::new(6.0, 2.0, 3.0),
                Vec3::new(6.0, 6.0, 3.0),
            ),
            Triangle::new(
                Vec3::new(2.0, 2.0, 3.0),
                Vec3::new(6.0, 6.0, 3.0),
                Vec3::new(2.0, 6.0, 3.0),
            ),
        ];
        let samples: Vec<Vec3> = (0..400)
            .map(|k| {
                Vec3::new(
                    0.25 + (k % 20) as f64 * 0.5,
                    0.25 + (k / 20) as f64 * 0.5,
                    0.0,
                )
            })
            .collect();
        let r = compare_with_ray_cast(&occ, Vec3::unit_z(), &samples, Vec3::unit_z(), [256, 256])
            .unwrap();
        assert_eq!(r.all.total, 400);
        assert_eq!(r.beyond_far.disagree(), 0);
        assert!(r.beyond_near.total < 400 && r.beyond_near.total > 300);
    }

    #[test]
    fn agreement_ratio_of_nothing_is_one() {
        assert_eq!(Agreement::default().ratio(), 1.0);
    }
}
