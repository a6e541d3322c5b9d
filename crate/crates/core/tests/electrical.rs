//! IV composition checked against the brute-force solvers in
//! `support/electrical_oracle.rs`.

#[path = "support/electrical_oracle.rs"]
mod electrical_oracle;

use electrical_oracle::*;
use helios_core::electrical::{
    cell_iv, effective_shading_factor, find_mpp, generator_power, geometric_shading_factor,
    series_iv, substring_iv, Cell, CellParams,
};
use helios_core::scene::PVGeneratorSpec;
use helios_core::solar::POAIrradiance;
use proptest::prelude::*;

#[test]
fn unshaded_module_mpp_matches_dense_scan() {
    for params in [CellParams::test_config(), CellParams::default()] {
        let spec = module_spec();
        let poa = POAIrradiance {
            beam: 850.0,
            diffuse_sky: 120.0,
            ground_reflected: 30.0,
        };
        let got = generator_power(&spec, &params, &poa, &[0.0; 36], 25.0)
            .unwrap()
            .unshaded;
        let cell = cell_iv(&params, poa.total(), 25.0);
        let isc = cell.short_circuit_current().unwrap();
        let oracle =
            dense_scan_uniform_groups(&[(cell, 18), (cell, 18)], isc, params.bypass_drop_v);
        assert!(
            (got.p - oracle).abs() <= 2e-3 * oracle,
            "{} vs {oracle}",
            got.p
        );
        assert!((got.p - got.v * got.i).abs() <= 1e-9 * got.p);
    }
}

#[test]
fn half_shaded_module_keeps_half_power() {
    let (ratio, oracle_ratio, shaded, oracle_shaded) = half_shaded_module();
    assert!((0.45..=0.55).contains(&ratio), "{ratio}");
    assert!((shaded - oracle_shaded).abs() <= 2e-3 * oracle_shaded);
    assert!((oracle_ratio - ratio).abs() < 2e-3);
    let factor = effective_shading_factor(shaded, shaded / ratio).unwrap();
    assert!((factor - 0.5).abs() < 0.05);
}

#[test]
fn partially_shaded_module_matches_dense_scan() {
    let params = CellParams::test_config();
    let spec = PVGeneratorSpec {
        subdivision: 3,
        ..module_spec()
    };
    let poa = POAIrradiance {
        beam: 800.0,
        diffuse_sky: 100.0,
        ground_reflected: 20.0,
    };
    let mut fractions = vec![0.0; 36];
    for (k, f) in fractions.iter_mut().enumerate() {
        if k % 7 == 3 {
            *f = (k % 10) as f64 / 9.0;
        }
    }
    let pair = generator_power(&spec, &params, &poa, &fractions, 25.0).unwrap();
    let cells: Vec<Cell> = fractions
        .iter()
        .map(|&f| cell_iv(&params, (1.0 - f) * poa.beam + poa.diffuse(), 25.0))
        .collect();
    let isc = cell_iv(&params, poa.total(), 25.0)
        .short_circuit_current()
        .unwrap();
    let subs = vec![cells[..18].to_vec(), cells[18..].to_vec()];
    let oracle = dense_scan_mpp(&subs, isc, 0.0);
    assert!(
        (pair.shaded.p - oracle).abs() <= 2e-3 * oracle,
        "{} vs {oracle}",
        pair.shaded.p
    );
}

#[test]
fn composed_networks_match_brute_force() {
    let worst = network_worst_error(0x5eed, 40);
    assert!(worst <= 1e-4, "{worst}");
}

#[test]
fn twelve_modules_in_series() {
    let p = CellParams::test_config();
    let module = substring_iv(&[(1000.0, 25.0); 36], &p, 0.0).unwrap();
    let string = series_iv(&vec![module.clone(); 12]).unwrap();
    assert!((string.open_circuit_voltage() - 12.0 * module.open_circuit_voltage()).abs() < 1e-9);
    assert_eq!(string.max_current(), module.max_current());
    assert!((find_mpp(&string).p - 12.0 * find_mpp(&module).p).abs() < 1e-9 * find_mpp(&string).p);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn superset_masks_never_gain_power(
        seeds in prop::collection::vec((0u8..10, 0u8..10), 72),
        beam in 100.0f64..1000.0, diffuse in 0.0f64..250.0,
    ) {
        let mut spec = module_spec();
        spec.module_cols = 2;
        spec.modules_per_string = 2;
        let params = CellParams::test_config();
        let poa = POAIrradiance { beam, diffuse_sky: diffuse, ground_reflected: 0.0 };
        let a: Vec<f64> = seeds.iter().map(|&(x, _)| f64::from(x.min(9)) / 9.0).collect();
        let b: Vec<f64> = seeds.iter().zip(&a).map(|(&(_, y), &fa)| (fa + f64::from(y) / 9.0).min(1.0)).collect();
        let pa = generator_power(&spec, &params, &poa, &a, 25.0).unwrap();
        let pb = generator_power(&spec, &params, &poa, &b, 25.0).unwrap();
        prop_assert!(pb.shaded.p <= pa.shaded.p * (1.0 + 1e-9));
        prop_assert!(pa.shaded.p <= pa.unshaded.p * (1.0 + 1e-9));
        let eff = effective_shading_factor(pa.shaded.p, pa.unshaded.p).unwrap();
        let geo = geometric_shading_factor(&a, &poa);
        prop_assert!(eff >= geo - 1e-3, "eff {} geo {}", eff, geo);
    }
}
