//! Brute-force IV solvers that share no code with the library: bisection on
//! the implicit cell equation, bypass clamping and dense current scans.

use helios_core::electrical::{
    cell_iv, generator_power, parallel_iv, string_iv, Cell, CellParams, IVCurve,
};
use helios_core::scene::{PVGeneratorSpec, TrackingMode};
use helios_core::solar::POAIrradiance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Voltages below this magnitude are compared in absolute terms (1 µV).
pub const V_FLOOR: f64 = 0.01;

/// Terminal voltage of a cell at current `i` by bisection on V.
pub fn oracle_cell_v(c: &Cell, i: f64) -> f64 {
    let resid = |v: f64| {
        let x = v + i * c.rs;
        c.iph - c.i0 * ((x / c.a).exp() - 1.0) - x / c.rsh - i
    };
    // resid decreases with v.
    let (mut lo, mut hi) = (-(i.abs() + 1.0) * c.rsh - 1.0, 2.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if resid(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Substring voltage at string current `i`: once the cells alone would go
/// below `−drop`, the bypass diode takes the excess current and holds the
/// substring there.
pub fn oracle_substring_v(cells: &[Cell], i: f64, drop: f64) -> f64 {
    let cells_v = |ic: f64| cells.iter().map(|c| oracle_cell_v(c, ic)).sum::<f64>();
    let free = cells_v(i);
    if free >= -drop {
        return free;
    }
    -drop
}

pub fn module_spec() -> PVGeneratorSpec {
    PVGeneratorSpec {
        id: "m".into(),
        origin: [0.0; 3],
        mode: TrackingMode::Fixed,
        azimuth_deg: 180.0,
        tilt_deg: 30.0,
        module_rows: 1,
        module_cols: 1,
        module_w_m: 0.66,
        module_h_m: 1.5,
        gap_row_m: 0.0,
        gap_col_m: 0.0,
        cell_rows: 9,
        cell_cols: 4,
        substrings: PVGeneratorSpec::consecutive_substrings(36, 2),
        modules_per_string: 1,
        strings_parallel: 1,
        subdivision: 1,
        self_occluding: false,
    }
}

/// Maximum of V·I over 10⁵ evenly spaced currents.
pub fn dense_scan_mpp(substrings: &[Vec<Cell>], i_max: f64, drop: f64) -> f64 {
    let n = 100_000;
    let mut best = 0.0f64;
    // Cell voltages depend only on (cell, current); group identical cells.
    for k in 0..=n {
        let i = i_max * k as f64 / n as f64;
        let v: f64 = substrings
            .iter()
            .map(|s| oracle_substring_v(s, i, drop))
            .sum();
        best = best.max(v * i);
    }
    best
}

/// Dense scan for substrings made of `count` copies of one cell each.
pub fn dense_scan_uniform_groups(groups: &[(Cell, usize)], i_max: f64, drop: f64) -> f64 {
    let n = 100_000;
    let mut best = 0.0f64;
    for k in 0..=n {
        let i = i_max * k as f64 / n as f64;
        let v: f64 = groups
            .iter()
            .map(|(c, count)| (*count as f64 * oracle_cell_v(c, i)).max(-drop))
            .sum();
        best = best.max(v * i);
    }
    best
}

#[derive(Clone, Debug)]
pub enum Network {
    /// Series substrings, each a list of cell irradiances behind one bypass diode.
    Series(Vec<Vec<f64>>),
    /// Parallel strings of the above.
    Parallel(Vec<Vec<Vec<f64>>>),
}

pub fn random_network(rng: &mut ChaCha8Rng) -> Network {
    let cells = rng.gen_range(2..=6);
    let g = |rng: &mut ChaCha8Rng| {
        if rng.gen_bool(0.2) {
            0.0
        } else {
            rng.gen_range(50.0..1100.0)
        }
    };
    if rng.gen_bool(0.5) {
        let mut subs = vec![Vec::new()];
        for _ in 0..cells {
            if !subs.last().unwrap().is_empty() && rng.gen_bool(0.4) {
                subs.push(Vec::new());
            }
            let x = g(rng);
            subs.last_mut().unwrap().push(x);
        }
        Network::Series(subs)
    } else {
        let strings = rng.gen_range(2..=cells.min(3));
        let mut out = vec![vec![Vec::new()]; strings];
        for k in 0..cells {
            let x = g(rng);
            out[k % strings][0].push(x);
        }
        Network::Parallel(out)
    }
}

pub fn compose_string(subs: &[Vec<f64>], p: &CellParams, drop: f64) -> IVCurve {
    let cells: Vec<Vec<(f64, f64)>> = subs
        .iter()
        .map(|s| s.iter().map(|&g| (g, 25.0)).collect())
        .collect();
    string_iv(&cells, p, drop).unwrap()
}

pub fn oracle_string_v(subs: &[Vec<f64>], p: &CellParams, drop: f64, i: f64) -> f64 {
    subs.iter()
        .map(|s| {
            let cells: Vec<Cell> = s.iter().map(|&g| cell_iv(p, g, 25.0)).collect();
            oracle_substring_v(&cells, i, drop)
        })
        .sum()
}

/// Current a string carries at terminal voltage `v`, capped at `i_max`.
pub fn oracle_string_i(s: &[Vec<f64>], p: &CellParams, drop: f64, v: f64, i_max: f64) -> f64 {
    if oracle_string_v(s, p, drop, 0.0) <= v {
        return 0.0;
    }
    if oracle_string_v(s, p, drop, i_max) >= v {
        return i_max;
    }
    let (mut lo, mut hi) = (0.0, i_max);
    for _ in 0..56 {
        let mid = 0.5 * (lo + hi);
        if oracle_string_v(s, p, drop, mid) >= v {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Voltage at which parallel strings together carry `i`.
pub fn oracle_parallel_v(
    strings: &[Vec<Vec<f64>>],
    curves: &[IVCurve],
    p: &CellParams,
    drop: f64,
    i: f64,
    v_hi: f64,
) -> f64 {
    let total = |v: f64| -> f64 {
        strings
            .iter()
            .zip(curves)
            .map(|(s, c)| oracle_string_i(s, p, drop, v, c.max_current()))
            .sum()
    };
    let (mut lo, mut hi) = (0.0, v_hi);
    for _ in 0..52 {
        let mid = 0.5 * (lo + hi);
        if total(mid) >= i {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Worst voltage error of composed networks of 2 to 6 cells against the
/// brute-force solvers, relative with an absolute floor of `V_FLOOR`.
/// Also asserts the composed curves have non-increasing voltage.
pub fn network_worst_error(seed: u64, cases: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut note =
        |v: f64, oracle: f64| worst = worst.max((v - oracle).abs() / oracle.abs().max(V_FLOOR));
    for case in 0..cases {
        let drop = if case % 3 == 0 { 0.35 } else { 0.0 };
        let p = CellParams {
            bypass_drop_v: drop,
            ..CellParams::test_config()
        };
        match random_network(&mut rng) {
            Network::Series(subs) => {
                let curve = compose_string(&subs, &p, drop);
                assert!(curve.voltages().windows(2).all(|w| w[1] <= w[0]));
                for (&i, &v) in curve
                    .currents()
                    .iter()
                    .zip(curve.voltages())
                    .step_by(curve.len() / 200 + 1)
                {
                    // Grid points beyond a substring's own range take its clamp.
                    note(v, oracle_string_v(&subs, &p, drop, i));
                }
            }
            Network::Parallel(strings) => {
                let curves: Vec<IVCurve> = strings
                    .iter()
                    .map(|s| compose_string(s, &p, drop))
                    .collect();
                let par = parallel_iv(&curves).unwrap();
                assert!(par.voltages().windows(2).all(|w| w[1] <= w[0]));
                let v_hi = curves
                    .iter()
                    .map(IVCurve::open_circuit_voltage)
                    .fold(0.0f64, f64::max);
                for (&i, &v) in par
                    .currents()
                    .iter()
                    .zip(par.voltages())
                    .step_by(par.len() / 40 + 1)
                {
                    note(v, oracle_parallel_v(&strings, &curves, &p, drop, i, v_hi));
                }
            }
        }
    }
    worst
}

/// Half of a two-substring module fully shaded under beam-only light:
/// (library shaded/unshaded power ratio, same ratio from dense scans,
/// library shaded power, dense-scan shaded power).
pub fn half_shaded_module() -> (f64, f64, f64, f64) {
    let params = CellParams::test_config();
    let poa = POAIrradiance {
        beam: 1000.0,
        diffuse_sky: 0.0,
        ground_reflected: 0.0,
    };
    let mut fractions = vec![0.0; 36];
    fractions[18..].iter_mut().for_each(|f| *f = 1.0);
    let pair = generator_power(&module_spec(), &params, &poa, &fractions, 25.0).unwrap();
    let lit = cell_iv(&params, 1000.0, 25.0);
    let dark = cell_iv(&params, 0.0, 25.0);
    let isc = lit.short_circuit_current().unwrap();
    let shaded = dense_scan_uniform_groups(&[(lit, 18), (dark, 18)], isc, 0.0);
    let unshaded = dense_scan_uniform_groups(&[(lit, 18), (lit, 18)], isc, 0.0);
    (
        pair.shaded.p / pair.unshaded.p,
        shaded / unshaded,
        pair.shaded.p,
        shaded,
    )
}
