//! Sampled IV curves, series/parallel composition and MPP search.

use serde::{Deserialize, Serialize};

use super::cell::{cell_iv, Cell, CellParams};
use super::ElectricalError;

/// Number of samples in composed curves.
pub const GRID_POINTS: usize = 512;

/// Exponent of the current grid clustering towards the top of the range,
/// where curves bend sharply at each cell's short-circuit current.
const GRID_CLUSTERING: f64 = 3.0;

const MONOTONE_TOLERANCE: f64 = 1e-9;

/// Relative distances from a knee covered by refinement points, in decades.
const KNEE_DECADES: (i32, i32) = (0, 10);

/// Bisection steps locating a bypass corner.
const CORNER_ITERATIONS: usize = 100;

/// Knee refinement points per decade for standalone curves. Linear
/// interpolation of `a·ln(Isc − I)` between ratio-`r` points errs by
/// `a·ln²(r)/8`, about 5e-6 V here.
pub const FINE_KNEE_STEPS: i32 = 64;

/// Current grid over `[0, i_max]`, denser near `i_max`.
pub fn current_grid(i_max: f64, points: usize) -> Vec<f64> {
    let last = (points.max(2) - 1) as f64;
    let mut g: Vec<f64> = (0..points.max(2))
        .map(|k| i_max * (1.0 - (1.0 - k as f64 / last).powf(GRID_CLUSTERING)))
        .collect();
    *g.last_mut().expect("grid has points") = i_max;
    g
}

/// Adds interior breakpoints to a grid.
pub(crate) fn with_breakpoints(
    mut grid: Vec<f64>,
    points: impl IntoIterator<Item = f64>,
) -> Vec<f64> {
    let (lo, hi) = match (grid.first(), grid.last()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return grid,
    };
    grid.extend(points.into_iter().filter(|&k| k > lo && k < hi));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// Adds short-circuit currents to a current grid with geometrically spaced
/// points on both sides. Below a knee the cell voltage falls off
/// logarithmically; above it the reverse-biased cell drops to the bypass
/// clamp within `ΔV / R_sh`.
pub fn with_knees(grid: Vec<f64>, knees: &[f64], steps_per_decade: i32) -> Vec<f64> {
    let scale = grid.last().copied().unwrap_or(0.0);
    let steps = KNEE_DECADES.0 * steps_per_decade..=KNEE_DECADES.1 * steps_per_decade;
    let points = knees.iter().flat_map(|&k| {
        let offsets = steps
            .clone()
            .map(|j| 10f64.powf(-f64::from(j) / f64::from(steps_per_decade)));
        std::iter::once(k).chain(offsets.flat_map(move |d| [k - k * d, k + scale * d]))
    });
    with_breakpoints(grid, points)
}

/// Uniform voltage grid over `[0, v_max]`.
pub fn voltage_grid(v_max: f64, points: usize) -> Vec<f64> {
    let last = (points.max(2) - 1) as f64;
    let mut g: Vec<f64> = (0..points.max(2))
        .map(|k| v_max * k as f64 / last)
        .collect();
    *g.last_mut().expect("grid has points") = v_max;
    g
}

/// Voltage as a function of current: `current` ascending, `voltage`
/// non-increasing. Beyond the last sample the voltage is `v_beyond`
/// (the bypass clamp, or −∞ for unprotected strings).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IVCurve {
    current: Vec<f64>,
    voltage: Vec<f64>,
    v_beyond: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub v: f64,
    pub i: f64,
    pub p: f64,
}

impl IVCurve {
    pub fn new(
        current: Vec<f64>,
        voltage: Vec<f64>,
        v_beyond: f64,
    ) -> Result<Self, ElectricalError> {
        if current.len() < 2 || current.len() != voltage.len() {
            return Err(ElectricalError::InvalidCurve(format!(
                "need >= 2 matching samples, got {} currents and {} voltages",
                current.len(),
                voltage.len()
            )));
        }
        if current.iter().chain(&voltage).any(|x| x.is_nan()) {
            return Err(ElectricalError::InvalidCurve("NaN sample".into()));
        }
        if current.windows(2).any(|w| w[1] < w[0]) {
            return Err(ElectricalError::InvalidCurve(
                "currents not ascending".into(),
            ));
        }
        if let Some(k) = voltage
            .windows(2)
            .position(|w| w[1] > w[0] + MONOTONE_TOLERANCE * w[0].abs().max(1.0))
        {
            return Err(ElectricalError::InvalidCurve(format!(
                "voltage increases after sample {k}"
            )));
        }
        Ok(Self {
            current,
            voltage,
            v_beyond,
        })
    }

    /// Builds a curve from solver output, removing sub-tolerance wiggles so
    /// the voltage is exactly non-increasing.
    pub(crate) fn from_samples(
        current: Vec<f64>,
        mut voltage: Vec<f64>,
        v_beyond: f64,
    ) -> Result<Self, ElectricalError> {
        for k in 1..voltage.len() {
            if voltage[k] > voltage[k - 1] {
                if voltage[k] - voltage[k - 1] > MONOTONE_TOLERANCE * voltage[k - 1].abs().max(1.0)
                {
                    return Err(ElectricalError::InvalidCurve(format!(
                        "voltage increases after sample {}",
                        k - 1
                    )));
                }
                voltage[k] = voltage[k - 1];
            }
        }
        Self::new(current, voltage, v_beyond)
    }

    pub fn currents(&self) -> &[f64] {
        &self.current
    }

    pub fn voltages(&self) -> &[f64] {
        &self.voltage
    }

    pub fn v_beyond(&self) -> f64 {
        self.v_beyond
    }

    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    pub fn max_current(&self) -> f64 {
        *self.current.last().expect("curve has samples")
    }

    /// Voltage at zero current.
    pub fn open_circuit_voltage(&self) -> f64 {
        self.voltage_at(0.0)
    }

    /// Linear interpolation of V at current `i`.
    pub fn voltage_at(&self, i: f64) -> f64 {
        let c = &self.current;
        if i <= c[0] {
            return self.voltage[0];
        }
        if i > self.max_current() {
            return self.v_beyond;
        }
        let k = c.partition_point(|&x| x < i).clamp(1, c.len() - 1);
        let (i0, i1) = (c[k - 1], c[k]);
        if i1 == i0 {
            return self.voltage[k];
        }
        let w = (i - i0) / (i1 - i0);
        self.voltage[k - 1] + w * (self.voltage[k] - self.voltage[k - 1])
    }

    /// Largest current at which the curve still reaches voltage `v`:
    /// 0 above the open-circuit voltage, the top of the range below the
    /// curve's lowest voltage.
    pub fn current_at(&self, v: f64) -> f64 {
        let vs = &self.voltage;
        let n = vs.partition_point(|&x| x >= v);
        if n == 0 {
            return 0.0;
        }
        if n == vs.len() {
            return self.max_current();
        }
        let (v0, v1) = (vs[n - 1], vs[n]);
        let (i0, i1) = (self.current[n - 1], self.current[n]);
        i0 + (v0 - v) / (v0 - v1) * (i1 - i0)
    }

    /// Global maximum of `V·I` over the piecewise-linear curve.
    pub fn mpp(&self) -> OperatingPoint {
        let mut best = OperatingPoint::default();
        let mut consider = |i: f64, v: f64| {
            let p = i * v;
            if p > best.p {
                best = OperatingPoint { v, i, p };
            }
        };
        for k in 0..self.current.len() {
            consider(self.current[k], self.voltage[k]);
            if k + 1 == self.current.len() {
                break;
            }
            let (i0, v0) = (self.current[k], self.voltage[k]);
            let (di, dv) = (self.current[k + 1] - i0, self.voltage[k + 1] - v0);
            let curvature = di * dv;
            if curvature < 0.0 {
                let t = -(i0 * dv + v0 * di) / (2.0 * curvature);
                if t > 0.0 && t < 1.0 {
                    consider(i0 + t * di, v0 + t * dv);
                }
            }
        }
        best
    }
}

/// Global MPP; zero for a dark or fully reverse-biased curve.
pub fn find_mpp(curve: &IVCurve) -> OperatingPoint {
    curve.mpp()
}

/// Voltage of each cell sampled on a current grid.
pub(crate) fn cell_voltages(cell: &Cell, grid: &[f64]) -> Result<Vec<f64>, ElectricalError> {
    grid.iter().map(|&i| cell.voltage_at(i)).collect()
}

/// Series cells protected by one bypass diode, sampled on `grid`.
pub(crate) fn substring_on_grid(
    cell_voltages: &[&[f64]],
    grid: &[f64],
    bypass_drop: f64,
) -> Result<IVCurve, ElectricalError> {
    let mut v = vec![0.0; grid.len()];
    for cv in cell_voltages {
        for (acc, x) in v.iter_mut().zip(cv.iter()) {
            *acc += x;
        }
    }
    for x in &mut v {
        *x = x.max(-bypass_drop);
    }
    IVCurve::from_samples(grid.to_vec(), v, -bypass_drop)
}

/// Substring of cells given as `(G_eff, T_cell)`, on a grid over `[0, max Isc]`.
pub fn substring_iv(
    cells: &[(f64, f64)],
    params: &CellParams,
    bypass_drop: f64,
) -> Result<IVCurve, ElectricalError> {
    string_iv(&[cells], params, bypass_drop)
}

/// Series substrings on one shared grid holding every cell's knee and every
/// bypass corner, so the curve is exact at each grid current.
pub fn string_iv<S: AsRef<[(f64, f64)]>>(
    substrings: &[S],
    params: &CellParams,
    bypass_drop: f64,
) -> Result<IVCurve, ElectricalError> {
    if substrings.is_empty() || substrings.iter().any(|s| s.as_ref().is_empty()) {
        return Err(ElectricalError::EmptyInput("substring"));
    }
    let models: Vec<Vec<Cell>> = substrings
        .iter()
        .map(|s| {
            s.as_ref()
                .iter()
                .map(|&(g, t)| cell_iv(params, g, t))
                .collect()
        })
        .collect();
    let mut knees = Vec::new();
    for m in models.iter().flatten() {
        knees.push(m.short_circuit_current()?);
    }
    let mut i_max = knees.iter().copied().fold(0.0f64, f64::max);
    if i_max <= 0.0 {
        // Dark string: forward current only flows through the shunts until
        // the bypass diodes take over.
        i_max = 1e-9;
        while i_max < 1e3
            && !models
                .iter()
                .all(|m| substring_voltage(m, i_max).is_ok_and(|v| v < -bypass_drop))
        {
            i_max *= 2.0;
        }
    }
    let mut grid = with_knees(current_grid(i_max, GRID_POINTS), &knees, FINE_KNEE_STEPS);
    let mut corners = Vec::new();
    for m in &models {
        corners.extend(bypass_corner(m, &grid, bypass_drop)?);
    }
    grid = with_breakpoints(grid, corners);
    let curves = models
        .iter()
        .map(|m| {
            let vs: Vec<Vec<f64>> = m
                .iter()
                .map(|c| cell_voltages(c, &grid))
                .collect::<Result<_, _>>()?;
            let refs: Vec<&[f64]> = vs.iter().map(Vec::as_slice).collect();
            substring_on_grid(&refs, &grid, bypass_drop)
        })
        .collect::<Result<Vec<_>, _>>()?;
    series_iv(&curves)
}

fn substring_voltage(models: &[Cell], i: f64) -> Result<f64, ElectricalError> {
    models
        .iter()
        .try_fold(0.0, |acc, m| Ok(acc + m.voltage_at(i)?))
}

/// Current at which the bypass diode starts conducting, found by bisection
/// inside the first grid interval where the cells fall below `−drop`.
fn bypass_corner(
    models: &[Cell],
    grid: &[f64],
    bypass_drop: f64,
) -> Result<Option<f64>, ElectricalError> {
    let total = |i: f64| substring_voltage(models, i);
    let (mut lo, mut hi) = (0, grid.len() - 1);
    if total(grid[hi])? >= -bypass_drop || total(grid[lo])? < -bypass_drop {
        return Ok(None);
    }
    // Cell voltages fall with current, so the crossing is unique.
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if total(grid[mid])? >= -bypass_drop {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (mut a, mut b) = (grid[lo], grid[hi]);
    for _ in 0..CORNER_ITERATIONS {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if total(mid)? >= -bypass_drop {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(Some(a))
}

/// Voltages add at equal current. Curves on identical grids are summed
/// sample by sample; otherwise on the sorted union of their grids.
pub fn series_iv(curves: &[IVCurve]) -> Result<IVCurve, ElectricalError> {
    let first = curves
        .first()
        .ok_or(ElectricalError::EmptyInput("series"))?;
    let v_beyond: f64 = curves.iter().map(|c| c.v_beyond).sum();
    if curves.iter().all(|c| c.current == first.current) {
        let mut v = first.voltage.clone();
        for c in &curves[1..] {
            for (acc, x) in v.iter_mut().zip(&c.voltage) {
                *acc += x;
            }
        }
        return IVCurve::from_samples(first.current.clone(), v, v_beyond);
    }
    let mut grid: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.current.iter().copied())
        .collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let v = grid
        .iter()
        .map(|&i| curves.iter().map(|c| c.voltage_at(i)).sum())
        .collect();
    IVCurve::from_samples(grid, v, v_beyond)
}

/// Currents add at equal voltage on a grid over `[0, max Voc]` that holds
/// every sample voltage of the inputs.
pub fn parallel_iv(curves: &[IVCurve]) -> Result<IVCurve, ElectricalError> {
    let v_max = curves
        .iter()
        .map(IVCurve::open_circuit_voltage)
        .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.max(v))))
        .ok_or(ElectricalError::EmptyInput("parallel"))?;
    // Every sample voltage of every curve is a breakpoint of its inverse.
    let knees: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.voltage.iter().copied())
        .collect();
    parallel_on_grid(
        curves,
        &with_breakpoints(
            voltage_grid(v_max.max(f64::MIN_POSITIVE), GRID_POINTS),
            knees,
        ),
    )
}

/// Parallel composition on a caller-supplied ascending voltage grid.
pub(crate) fn parallel_on_grid(
    curves: &[IVCurve],
    v_grid: &[f64],
) -> Result<IVCurve, ElectricalError> {
    if curves.is_empty() {
        return Err(ElectricalError::EmptyInput("parallel"));
    }
    // Sample index order reversed so current ascends.
    let current: Vec<f64> = v_grid
        .iter()
        .rev()
        .map(|&v| pairwise_sum(curves, v))
        .collect();
    let voltage: Vec<f64> = v_grid.iter().rev().copied().collect();
    IVCurve::new(current, voltage, f64::NEG_INFINITY)
}

/// Sum by recursive halving so that doubling a set of identical curves
/// doubles the result exactly.
fn pairwise_sum(curves: &[IVCurve], v: f64) -> f64 {
    match curves.len() {
        1 => curves[0].current_at(v),
        n => pairwise_sum(&curves[..n / 2], v) + pairwise_sum(&curves[n / 2..], v),
    }
}
