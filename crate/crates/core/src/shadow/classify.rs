use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::depth_map::DepthMap;
use super::ShadowError;
use crate::geometry::Vec3;
use crate::num::Real;
use crate::scene::{PVGeneratorSpec, SamplePoint};

/// Per-sample shading state of one generator at one instant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShadingMask {
    pub generator: String,
    pub instant: Option<DateTime<Utc>>,
    /// `true` = shaded, in sample order.
    pub shaded: Vec<bool>,
}

impl ShadingMask {
    pub fn new(
        generator: impl Into<String>,
        instant: Option<DateTime<Utc>>,
        shaded: Vec<bool>,
    ) -> Self {
        Self {
            generator: generator.into(),
            instant,
            shaded,
        }
    }

    pub fn unshaded(
        generator: impl Into<String>,
        instant: Option<DateTime<Utc>>,
        samples: usize,
    ) -> Self {
        Self::new(generator, instant, vec![false; samples])
    }

    pub fn len(&self) -> usize {
        self.shaded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shaded.is_empty()
    }

    pub fn shaded_count(&self) -> usize {
        self.shaded.iter().filter(|&&s| s).count()
    }
}

/// Slope-scaled depth bias: `2·texel / max(0.1, |n·s|)`, capped at
/// `4·texel`. `normal` is the receiving surface's normal.
pub fn default_bias<T: Real>(texel: T, normal: Vec3<T>, sun_dir: Vec3<T>) -> T {
    let cos = normal.dot(sun_dir).abs().max(T::lit(0.1));
    (T::lit(2.0) * texel / cos).min(T::lit(4.0) * texel)
}

/// A sample is shaded when it lies deeper than its texel's depth plus
/// `bias`. Samples outside the window or on untracked texels are unshaded.
pub fn classify<T: Real>(map: &DepthMap<T>, samples: &[SamplePoint<T>], bias: T) -> Vec<bool> {
    samples
        .iter()
        .map(|s| is_shaded(map, s.position, bias))
        .collect()
}

#[inline]
pub fn is_shaded<T: Real>(map: &DepthMap<T>, p: Vec3<T>, bias: T) -> bool {
    let q = map.frame().project(p);
    let Some((ix, iy)) = map.texel_at(q.x, q.y) else {
        return false;
    };
    match map.depth(ix, iy) {
        Some(d) => q.z > d + bias,
        None => {
            debug_assert!(false, "sample texel ({ix}, {iy}) is not tracked");
            false
        }
    }
}

/// Shaded share of each cell, module-major, in steps of `1/subdivision²`.
pub fn cell_shaded_fractions<T>(
    shaded: &[bool],
    samples: &[SamplePoint<T>],
    spec: &PVGeneratorSpec,
) -> Result<Vec<f64>, ShadowError> {
    if shaded.len() != samples.len() || samples.len() != spec.sample_count() {
        return Err(ShadowError::MaskSize {
            generator: spec.id.clone(),
            expected: spec.sample_count(),
            got: shaded.len().min(samples.len()),
        });
    }
    let cpm = spec.cells_per_module();
    let mut counts = vec![0usize; spec.cell_count()];
    for (s, &hit) in samples.iter().zip(shaded) {
        if hit {
            counts[s.module as usize * cpm + s.cell as usize] += 1;
        }
    }
    let per_cell = spec.samples_per_cell() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / per_cell).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Triangle;
    use crate::scene::{generator_samples, TrackingMode};
    use crate::shadow::{build_depth_map, build_depth_map_with, DepthMapOptions};

    fn flat_spec(subdivision: usize) -> PVGeneratorSpec {
        PVGeneratorSpec {
            id: "g".into(),
            origin: [0.0; 3],
            mode: TrackingMode::Fixed,
            azimuth_deg: 180.0,
            tilt_deg: 0.0,
            module_rows: 1,
            module_cols: 2,
            module_w_m: 1.0,
            module_h_m: 1.0,
            gap_row_m: 0.0,
            gap_col_m: 0.0,
            cell_rows: 2,
            cell_cols: 2,
            substrings: vec![vec![0, 1, 2, 3]],
            modules_per_string: 2,
            strings_parallel: 1,
            subdivision,
            self_occluding: false,
        }
    }

    #[test]
    fn empty_map_shades_nothing() {
        let spec = flat_spec(3);
        let samples: Vec<SamplePoint> = generator_samples(&spec, &spec.frame_at(None));
        let pts: Vec<Vec3> = samples.iter().map(|s| s.position).collect();
        let map = build_depth_map(&[], Vec3::unit_z(), &pts, [64, 64]).unwrap();
        assert!(classify(&map, &samples, 0.0).iter().all(|&s| !s));
    }

    #[test]
    fn left_half_occluder_shades_left_half() {
        // Panel spans x ∈ [-1, 1], y ∈ [-0.5, 0.5]; the occluder covers x < 0.
        let spec = flat_spec(3);
        let samples: Vec<SamplePoint> = generator_samples(&spec, &spec.frame_at(None));
        let pts: Vec<Vec3> = samples.iter().map(|s| s.position).collect();
        let p = |x: f64, y: f64| Vec3::new(x, y, 2.0);
        let occ = [
            Triangle::new(p(-5.0, -5.0), p(0.0, -5.0), p(0.0, 5.0)),
            Triangle::new(p(-5.0, -5.0), p(0.0, 5.0), p(-5.0, 5.0)),
        ];
        let map = build_depth_map(&occ, Vec3::unit_z(), &pts, [256, 256]).unwrap();
        let bias = default_bias(map.texel_size(), Vec3::unit_z(), Vec3::unit_z());
        let mask = classify(&map, &samples, bias);
        for (s, hit) in samples.iter().zip(&mask) {
            assert_eq!(*hit, s.position.x < 0.0, "{:?}", s.position);
        }
        assert_eq!(mask.iter().filter(|&&m| m).count(), spec.sample_count() / 2);
    }

    #[test]
    fn outside_window_is_unshaded() {
        let occ = [Triangle::new(
            Vec3::new(-9.0, -9.0, 1.0),
            Vec3::new(9.0, -9.0, 1.0),
            Vec3::new(0.0, 9.0, 1.0),
        )];
        let fp = [Vec3::new(-1.0, -1.0, 0.0), Vec3::new(1.0, 1.0, 0.0)];
        let map = build_depth_map(&occ, Vec3::unit_z(), &fp, [16, 16]).unwrap();
        assert!(is_shaded(&map, Vec3::zero(), 0.0));
        assert!(!is_shaded(&map, Vec3::new(5.0, 0.0, 0.0), 0.0));
    }

    #[test]
    fn bias_rule() {
        let up = Vec3::unit_z();
        assert_eq!(default_bias(0.01, up, up), 0.02);
        let grazing = Vec3::new(1.0, 0.0, 0.0);
        assert_eq!(default_bias(0.01, up, grazing), 0.04);
        let s = Vec3::new(0.0, 0.6, 0.8);
        assert!((default_bias(0.01f64, up, s) - 0.025).abs() < 1e-15);
    }

    #[test]
    fn bare_panel_never_shades_itself() {
        let spec = PVGeneratorSpec {
            tilt_deg: 35.0,
            ..flat_spec(3)
        };
        let frame = spec.frame_at(None);
        let samples: Vec<SamplePoint> = generator_samples(&spec, &frame);
        let pts: Vec<Vec3> = samples.iter().map(|s| s.position).collect();
        for (az, zen) in [(180.0, 10.0), (90.0, 80.0), (300.0, 60.0), (0.0, 89.0)] {
            let sun = crate::solar::direction_from_angles(az, zen);
            let opts = DepthMapOptions::sparse(&pts);
            let map = build_depth_map_with(&[], sun, &pts, [2048, 2048], &opts).unwrap();
            let bias = default_bias(map.texel_size(), frame.normal, sun);
            assert!(classify(&map, &samples, bias).iter().all(|&s| !s));
        }
    }

    #[test]
    fn fractions_count_samples_per_cell() {
        let spec = flat_spec(3);
        let samples: Vec<SamplePoint> = generator_samples(&spec, &spec.frame_at(None));
        let none = vec![false; samples.len()];
        assert!(cell_shaded_fractions(&none, &samples, &spec)
            .unwrap()
            .iter()
            .all(|&f| f == 0.0));
        let all = vec![true; samples.len()];
        assert!(cell_shaded_fractions(&all, &samples, &spec)
            .unwrap()
            .iter()
            .all(|&f| f == 1.0));
        let mut some = none.clone();
        for (k, s) in samples.iter().enumerate() {
            if s.module == 1 && s.cell == 2 && s.sub < 4 {
                some[k] = true;
            }
        }
        let f = cell_shaded_fractions(&some, &samples, &spec).unwrap();
        assert_eq!(f[4 + 2], 4.0 / 9.0);
        assert_eq!(f.iter().filter(|&&x| x > 0.0).count(), 1);
        assert!(cell_shaded_fractions(&some[1..], &samples, &spec).is_err());
    }
}
