//! Generator-level IV solve: cells → substrings → modules → strings → array.

use std::collections::HashMap;
use std::sync::Arc;

use super::cell::{cell_iv, CellParams};
use super::curve::{
    cell_voltages, current_grid, parallel_on_grid, voltage_grid, with_knees, IVCurve,
    OperatingPoint, GRID_POINTS,
};
use super::factors::effective_irradiance;
use super::ElectricalError;

/// Knee refinement points per decade. Generator voltages span many cells,
/// so a coarser spacing than standalone curves keeps the same relative error.
const KNEE_STEPS: i32 = 8;
use crate::scene::PVGeneratorSpec;
use crate::solar::POAIrradiance;

/// Array solver with grids fixed by a reference (normally unshaded) state.
///
/// Every solve shares the same current grid and, with parallel strings, the
/// same voltage grid. Curves of darker conditions then lie pointwise below
/// the reference curve and their MPPs compare exactly.
pub struct ArraySolver<'a> {
    spec: &'a PVGeneratorSpec,
    params: &'a CellParams,
    current: Vec<f64>,
    voltage: Vec<f64>,
    cache: HashMap<(u64, u64), Arc<Vec<f64>>>,
    reference: IVCurve,
}

impl<'a> ArraySolver<'a> {
    /// `reference` holds `(G_eff, T_cell)` per cell, module-major. The
    /// short-circuit currents of `levels`, the cell conditions expected in
    /// later solves, become grid points so their corners are resolved.
    pub fn new(
        spec: &'a PVGeneratorSpec,
        params: &'a CellParams,
        reference: &[(f64, f64)],
        levels: &[(f64, f64)],
    ) -> Result<Self, ElectricalError> {
        check_len(spec, reference)?;
        let mut i_max = 0.0f64;
        let mut seen = HashMap::new();
        for &(g, t) in reference {
            if seen.insert((g.to_bits(), t.to_bits()), ()).is_none() {
                i_max = i_max.max(cell_iv(params, g, t).short_circuit_current()?);
            }
        }
        let current = if i_max > 0.0 {
            let knees: Vec<f64> = levels
                .iter()
                .map(|&(g, t)| cell_iv(params, g, t).short_circuit_current())
                .collect::<Result<_, _>>()?;
            with_knees(current_grid(i_max, GRID_POINTS), &knees, KNEE_STEPS)
        } else {
            vec![0.0, f64::MIN_POSITIVE]
        };
        let mut solver = Self {
            spec,
            params,
            current,
            voltage: Vec::new(),
            cache: HashMap::new(),
            reference: IVCurve::new(vec![0.0, 1.0], vec![0.0, 0.0], 0.0)?,
        };
        let strings = solver.strings(reference)?;
        if strings.len() > 1 {
            let v_max = strings
                .iter()
                .map(IVCurve::open_circuit_voltage)
                .fold(0.0f64, f64::max);
            solver.voltage = voltage_grid(v_max, GRID_POINTS);
        }
        solver.reference = solver.combine(strings)?;
        Ok(solver)
    }

    pub fn reference_curve(&self) -> &IVCurve {
        &self.reference
    }

    pub fn solve(&mut self, conditions: &[(f64, f64)]) -> Result<IVCurve, ElectricalError> {
        check_len(self.spec, conditions)?;
        let strings = self.strings(conditions)?;
        self.combine(strings)
    }

    fn cell_curve(&mut self, g: f64, t: f64) -> Result<Arc<Vec<f64>>, ElectricalError> {
        let key = (g.to_bits(), t.to_bits());
        if let Some(v) = self.cache.get(&key) {
            return Ok(v.clone());
        }
        let v = Arc::new(cell_voltages(&cell_iv(self.params, g, t), &self.current)?);
        self.cache.insert(key, v.clone());
        Ok(v)
    }

    fn strings(&mut self, conditions: &[(f64, f64)]) -> Result<Vec<IVCurve>, ElectricalError> {
        let spec = self.spec;
        let cpm = spec.cells_per_module();
        let n = self.current.len();
        let drop = self.params.bypass_drop_v;
        let groups_per_string = spec.substrings.len() * spec.modules_per_string;
        let mut out = Vec::with_capacity(spec.strings_parallel);
        let mut substring = vec![0.0; n];
        for s in 0..spec.strings_parallel {
            let mut string = vec![0.0; n];
            for m in s * spec.modules_per_string..(s + 1) * spec.modules_per_string {
                for group in &spec.substrings {
                    substring.iter_mut().for_each(|x| *x = 0.0);
                    for &c in group {
                        let (g, t) = conditions[m * cpm + c];
                        let cv = self.cell_curve(g, t)?;
                        for (acc, x) in substring.iter_mut().zip(cv.iter()) {
                            *acc += x;
                        }
                    }
                    for (acc, x) in string.iter_mut().zip(&substring) {
                        *acc += x.max(-drop);
                    }
                }
            }
            out.push(IVCurve::from_samples(
                self.current.clone(),
                string,
                -drop * groups_per_string as f64,
            )?);
        }
        Ok(out)
    }

    fn combine(&self, mut strings: Vec<IVCurve>) -> Result<IVCurve, ElectricalError> {
        if strings.len() == 1 {
            return Ok(strings.pop().expect("one string"));
        }
        parallel_on_grid(&strings, &self.voltage)
    }
}

fn check_len(spec: &PVGeneratorSpec, conditions: &[(f64, f64)]) -> Result<(), ElectricalError> {
    if conditions.len() != spec.cell_count() {
        return Err(ElectricalError::InvalidCurve(format!(
            "generator `{}` has {} cells, got {} conditions",
            spec.id,
            spec.cell_count(),
            conditions.len()
        )));
    }
    Ok(())
}

/// Unshaded and shaded MPP of a generator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PowerPair {
    pub unshaded: OperatingPoint,
    pub shaded: OperatingPoint,
}

/// Solves the generator with and without beam shading. `fractions` holds
/// the shaded fraction of each cell, module-major. Fractions are expected
/// on the lattice `k / samples_per_cell`; every lattice level is a grid knee,
/// so all masks at one irradiance share a grid and compare exactly.
pub fn generator_power(
    spec: &PVGeneratorSpec,
    params: &CellParams,
    poa: &POAIrradiance,
    fractions: &[f64],
    t_air_c: f64,
) -> Result<PowerPair, ElectricalError> {
    let g_full = poa.total();
    if !(g_full > 0.0) {
        return Ok(PowerPair::default());
    }
    let t_full = params.cell_temperature(g_full, t_air_c);
    let reference = vec![(g_full, t_full); spec.cell_count()];
    let lattice = spec.samples_per_cell().max(1);
    let levels: Vec<(f64, f64)> = (0..=lattice)
        .map(|k| {
            let g = effective_irradiance(poa.beam, poa.diffuse(), k as f64 / lattice as f64);
            (g, params.cell_temperature(g, t_air_c))
        })
        .collect();
    let mut solver = ArraySolver::new(spec, params, &reference, &levels)?;
    let unshaded = solver.reference_curve().mpp();
    let shaded = if fractions.iter().all(|&f| f == 0.0) {
        unshaded
    } else {
        let conditions: Vec<(f64, f64)> = fractions
            .iter()
            .map(|&f| {
                let g = effective_irradiance(poa.beam, poa.diffuse(), f);
                (g, params.cell_temperature(g, t_air_c))
            })
            .collect();
        solver.solve(&conditions)?.mpp()
    };
    Ok(PowerPair { unshaded, shaded })
}
