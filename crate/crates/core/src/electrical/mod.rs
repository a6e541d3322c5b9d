//! Single-diode cells, bypass-protected substrings, series/parallel IV
//! composition, MPP search and shading factors.

mod array;
mod cell;
mod curve;
mod factors;

use thiserror::Error;

pub use array::{generator_power, ArraySolver, PowerPair};
pub use cell::{cell_iv, thermal_voltage, Cell, CellParams, STC_IRRADIANCE, STC_TEMPERATURE_C};
pub use curve::{
    current_grid, find_mpp, parallel_iv, series_iv, string_iv, substring_iv, voltage_grid,
    with_knees, IVCurve, OperatingPoint, GRID_POINTS,
};
pub use factors::{effective_irradiance, effective_shading_factor, geometric_shading_factor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ElectricalError {
    #[error(
        "cell {what} solve did not converge (input {input}, G_eff {g_eff} W/m², T {t_cell_c} °C)"
    )]
    NonConvergence {
        what: &'static str,
        input: f64,
        g_eff: f64,
        t_cell_c: f64,
    },
    #[error("empty {0} composition")]
    EmptyInput(&'static str),
    #[error("invalid IV curve: {0}")]
    InvalidCurve(String),
    #[error("shaded power {p_shaded} W exceeds unshaded power {p_unshaded} W")]
    Inconsistent { p_shaded: f64, p_unshaded: f64 },
}
