use helios_core::fixtures::{random_oracle_scene, random_sun, wall_bike_panel, WALL_BIKE_SUN};
use helios_core::geometry::{Triangle, Vec3};
use helios_core::scene::{generator_samples, scene_occluders, SamplePoint};
use helios_core::shadow::{
    build_depth_map_with, classify, compare_with_ray_cast, default_bias, ray_cast_shaded,
    DepthMapOptions, OracleComparison,
};
use helios_core::solar::{sun_direction, SunPosition};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GROUND: Vec3 = Vec3 {
    x: 0.0,
    y: 0.0,
    z: 1.0,
};

fn mask(occ: &[Triangle], sun: Vec3, samples: &[Vec3], resolution: usize) -> Vec<bool> {
    let options = DepthMapOptions::sparse(samples);
    let map = build_depth_map_with(occ, sun, samples, [resolution; 2], &options).unwrap();
    let bias = default_bias(map.texel_size(), GROUND, sun);
    let points: Vec<SamplePoint> = samples
        .iter()
        .map(|&position| SamplePoint {
            position,
            module: 0,
            cell: 0,
            sub: 0,
        })
        .collect();
    classify(&map, &points, bias)
}

#[test]
fn random_scenes_match_ray_casting() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut total = OracleComparison::default();
    for _ in 0..6 {
        let scene = random_oracle_scene(&mut rng, 200, 1000);
        for _ in 0..15 {
            let sun = random_sun(&mut rng, 85.0);
            total +=
                compare_with_ray_cast(&scene.occluders, sun, &scene.samples, GROUND, [2048, 2048])
                    .unwrap();
        }
    }
    assert_eq!(total.all.total, 90_000);
    assert!(total.beyond_near.ratio() >= 0.999, "{total:?}");
    assert_eq!(total.beyond_far.disagree(), 0, "{total:?}");
}

#[test]
fn single_precision_maps_match_ray_casting() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut total = OracleComparison::default();
    for _ in 0..3 {
        let scene = random_oracle_scene(&mut rng, 200, 1000);
        let occ: Vec<Triangle<f32>> = scene
            .occluders
            .iter()
            .map(|t| Triangle(t.0.map(|p| p.cast())))
            .collect();
        let samples: Vec<Vec3<f32>> = scene.samples.iter().map(|p| p.cast()).collect();
        for _ in 0..10 {
            let sun: Vec3<f32> = random_sun(&mut rng, 85.0).cast();
            let sun = sun.normalized().unwrap();
            total +=
                compare_with_ray_cast(&occ, sun, &samples, GROUND.cast(), [1024, 1024]).unwrap();
        }
    }
    assert!(total.beyond_near.ratio() >= 0.999, "{total:?}");
    assert_eq!(total.beyond_far.disagree(), 0, "{total:?}");
}

#[test]
fn finer_maps_never_disagree_more() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let resolutions = [128, 256, 512, 1024];
    let mut counts: Vec<Vec<usize>> = vec![Vec::new(); resolutions.len()];
    for _ in 0..20 {
        let scene = random_oracle_scene(&mut rng, 200, 1000);
        let sun = random_sun(&mut rng, 85.0);
        for (k, &r) in resolutions.iter().enumerate() {
            let c = compare_with_ray_cast(&scene.occluders, sun, &scene.samples, GROUND, [r, r])
                .unwrap();
            counts[k].push(c.all.disagree());
        }
    }
    let medians: Vec<usize> = counts
        .into_iter()
        .map(|mut c| {
            c.sort_unstable();
            c[c.len() / 2]
        })
        .collect();
    for w in medians.windows(2) {
        assert!(w[1] <= w[0], "medians {medians:?}");
    }
}

#[test]
fn translation_by_powers_of_two_keeps_the_mask() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // Dyadic coordinates keep every translated value exact.
    let snap = |p: Vec3| {
        Vec3::new(
            (p.x * 64.0).round() / 64.0,
            (p.y * 64.0).round() / 64.0,
            (p.z * 64.0).round() / 64.0,
        )
    };
    for shift in [
        Vec3::new(64.0, -128.0, 32.0),
        Vec3::new(-1024.0, 512.0, 0.0),
    ] {
        let scene = random_oracle_scene(&mut rng, 120, 500);
        let occ: Vec<Triangle> = scene.occluders.iter().map(|t| t.map(snap)).collect();
        let samples: Vec<Vec3> = scene.samples.iter().map(|&p| snap(p)).collect();
        let moved_occ: Vec<Triangle> = occ.iter().map(|t| t.map(|p| p + shift)).collect();
        let moved: Vec<Vec3> = samples.iter().map(|&p| p + shift).collect();
        for _ in 0..5 {
            let sun = random_sun(&mut rng, 80.0);
            assert_eq!(
                mask(&occ, sun, &samples, 1024),
                mask(&moved_occ, sun, &moved, 1024)
            );
        }
    }
}

#[test]
fn wall_bike_fixture_shades_the_panel() {
    let scene = wall_bike_panel().scene().unwrap();
    let g = &scene.generators[0];
    let pos = SunPosition {
        azimuth_deg: WALL_BIKE_SUN.0,
        zenith_deg: WALL_BIKE_SUN.1,
        distance_au: 1.0,
    };
    let sun = sun_direction(&pos).unwrap();
    let frame = g.frame_at(Some(&pos));
    let samples: Vec<SamplePoint> = generator_samples(g, &frame);
    let occ = scene_occluders(&scene, &g.id, Some(&pos)).unwrap();
    let points: Vec<Vec3> = samples.iter().map(|s| s.position).collect();
    let options = DepthMapOptions::sparse(&points);
    let map = build_depth_map_with(&occ, sun, &points, [2048, 2048], &options).unwrap();
    let shaded = classify(
        &map,
        &samples,
        default_bias(map.texel_size(), frame.normal, sun),
    );
    let reference: Vec<bool> = points
        .iter()
        .map(|&p| ray_cast_shaded(&occ, sun, p))
        .collect();
    let n = shaded.iter().filter(|&&s| s).count();
    let n_ref = reference.iter().filter(|&&s| s).count();
    assert!(n_ref > 0 && n > 0, "raster {n}, ray {n_ref}");
    let c = compare_with_ray_cast(&occ, sun, &points, frame.normal, [2048, 2048]).unwrap();
    assert_eq!(c.beyond_far.disagree(), 0, "{c:?}");
}

fn arb_scene() -> impl Strategy<Value = (u64, usize)> {
    (any::<u64>(), 1usize..60)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn more_occluders_never_unshade((seed, extra) in arb_scene(), az in 0.0f64..360.0, zen in 0.0f64..85.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_oracle_scene(&mut rng, 100, 400);
        let more = random_oracle_scene(&mut rng, extra, 1);
        let sun = Vec3::new(zen.to_radians().sin() * az.to_radians().sin(), zen.to_radians().sin() * az.to_radians().cos(), zen.to_radians().cos());
        let few = mask(&base.occluders, sun, &base.samples, 512);
        let mut all = base.occluders.clone();
        all.extend(more.occluders);
        let many = mask(&all, sun, &base.samples, 512);
        for (a, b) in few.iter().zip(&many) {
            prop_assert!(!a || *b);
        }
    }
}
