//! Five-parameter single-diode cell.
//!
//! `I = Iph − I0·(exp((V + I·Rs)/(n·Vt)) − 1) − (V + I·Rs)/Rsh`
//!
//! Both solvers work on the diode voltage `x = V + I·Rs`, in which the
//! equation is explicit in `I`, and take Newton steps from the side of the
//! root on which the residual's curvature makes iterates approach it
//! monotonically.

use serde::{Deserialize, Serialize};

use super::ElectricalError;

pub const BOLTZMANN: f64 = 1.380649e-23;
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;
pub const STC_IRRADIANCE: f64 = 1000.0;
pub const STC_TEMPERATURE_C: f64 = 25.0;

const MAX_ITERATIONS: usize = 100;
const CURRENT_TOLERANCE: f64 = 1e-10;

/// Cell parameter block of the scene document.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellParams {
    pub iph_stc_a: f64,
    pub voc_stc_v: f64,
    pub n: f64,
    pub rs_ohm: f64,
    pub rsh_ohm: f64,
    #[serde(default)]
    pub alpha_isc_per_c: f64,
    /// Forward drop of each bypass diode (V); 0 is ideal.
    #[serde(default)]
    pub bypass_drop_v: f64,
    /// Enables the NOCT cell-temperature model when set; otherwise cells stay at 25 °C.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noct_c: Option<f64>,
}

impl Default for CellParams {
    /// A 156 mm monocrystalline cell with modest series and shunt losses.
    fn default() -> Self {
        Self {
            iph_stc_a: 9.0,
            voc_stc_v: 0.64,
            n: 1.2,
            rs_ohm: 0.004,
            rsh_ohm: 50.0,
            alpha_isc_per_c: 0.0005,
            bypass_drop_v: 0.0,
            noct_c: None,
        }
    }
}

impl CellParams {
    /// Ideal bypass, no series resistance, negligible shunt leakage.
    pub fn test_config() -> Self {
        Self {
            rs_ohm: 0.0,
            rsh_ohm: 1e6,
            alpha_isc_per_c: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = [
            self.iph_stc_a,
            self.voc_stc_v,
            self.n,
            self.rs_ohm,
            self.rsh_ohm,
            self.alpha_isc_per_c,
            self.bypass_drop_v,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err("non-finite cell parameter".into());
        }
        if !(self.iph_stc_a > 0.0) {
            return Err(format!("iph_stc_a must be > 0, got {}", self.iph_stc_a));
        }
        if !(self.voc_stc_v > 0.0) {
            return Err(format!("voc_stc_v must be > 0, got {}", self.voc_stc_v));
        }
        if !(1.0..=2.0).contains(&self.n) {
            return Err(format!("n must be in [1, 2], got {}", self.n));
        }
        if self.rs_ohm < 0.0 {
            return Err(format!("rs_ohm must be >= 0, got {}", self.rs_ohm));
        }
        if !(self.rsh_ohm > 0.0) {
            return Err(format!("rsh_ohm must be > 0, got {}", self.rsh_ohm));
        }
        if self.bypass_drop_v < 0.0 {
            return Err(format!(
                "bypass_drop_v must be >= 0, got {}",
                self.bypass_drop_v
            ));
        }
        if let Some(noct) = self.noct_c {
            if !noct.is_finite() {
                return Err("non-finite noct_c".into());
            }
        }
        Ok(())
    }

    /// Saturation current from `Voc_stc`, neglecting shunt leakage at open circuit.
    pub fn i0(&self) -> f64 {
        let a = self.n * thermal_voltage(STC_TEMPERATURE_C);
        self.iph_stc_a / (self.voc_stc_v / a).exp_m1()
    }

    /// Cell temperature for an effective irradiance and air temperature.
    pub fn cell_temperature(&self, g_eff: f64, t_air_c: f64) -> f64 {
        match self.noct_c {
            Some(noct) => t_air_c + (noct - 20.0) / 800.0 * g_eff,
            None => STC_TEMPERATURE_C,
        }
    }
}

/// `k·T/q` (V) at a temperature in °C.
pub fn thermal_voltage(t_c: f64) -> f64 {
    BOLTZMANN * (t_c + 273.15) / ELEMENTARY_CHARGE
}

/// A cell at fixed irradiance and temperature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub g_eff: f64,
    pub t_cell_c: f64,
    pub iph: f64,
    pub i0: f64,
    /// Modified ideality `n·Vt` (V).
    pub a: f64,
    pub rs: f64,
    pub rsh: f64,
}

/// Cell operating conditions; see [`Cell::current_at`] and [`Cell::voltage_at`].
pub fn cell_iv(params: &CellParams, g_eff: f64, t_cell_c: f64) -> Cell {
    let g = g_eff.max(0.0);
    Cell {
        g_eff: g,
        t_cell_c,
        iph: params.iph_stc_a
            * (g / STC_IRRADIANCE)
            * (1.0 + params.alpha_isc_per_c * (t_cell_c - STC_TEMPERATURE_C)),
        i0: params.i0(),
        a: params.n * thermal_voltage(t_cell_c),
        rs: params.rs_ohm,
        rsh: params.rsh_ohm,
    }
}

impl Cell {
    /// Terminal current as an explicit function of the diode voltage.
    #[inline]
    pub fn current_from_diode(&self, x: f64) -> f64 {
        self.iph - self.i0 * (x / self.a).exp_m1() - x / self.rsh
    }

    fn failure(&self, what: &'static str, input: f64) -> ElectricalError {
        ElectricalError::NonConvergence {
            what,
            input,
            g_eff: self.g_eff,
            t_cell_c: self.t_cell_c,
        }
    }

    /// Current at terminal voltage `v`.
    pub fn current_at(&self, v: f64) -> Result<f64, ElectricalError> {
        if self.rs == 0.0 {
            return Ok(self.current_from_diode(v));
        }
        // With L(x) = v + Rs·(Iph + I0) − x·(1 + Rs/Rsh) the equation reads
        // Rs·I0·e^{x/a} = L(x), i.e. H(x) = x − a·ln(L(x)/(Rs·I0)) = 0. H is
        // increasing and convex on L > 0 and never overflows, so Newton from
        // the right converges monotonically; steps leaving the sign bracket
        // fall back to bisection.
        let r = 1.0 + self.rs / self.rsh;
        let k = v + self.rs * (self.iph + self.i0);
        let ln_rs_i0 = (self.rs * self.i0).ln();
        let x_lin = k / r;
        let x_exp = v.max(self.a * (self.iph / self.i0).ln_1p());
        let mut lo = v.min(self.voltage_at(0.0)?);
        let mut hi = x_lin;
        let mut x = if x_exp < x_lin {
            x_exp
        } else {
            0.5 * (lo + hi)
        };
        let mut i_prev = f64::INFINITY;
        for _ in 0..MAX_ITERATIONS {
            let l = k - r * x;
            if !(l > 0.0) {
                hi = x;
                x = 0.5 * (lo + hi);
                continue;
            }
            let i = self.current_from_diode(x);
            if (i - i_prev).abs() < CURRENT_TOLERANCE * i.abs().max(1.0) {
                return Ok(i);
            }
            i_prev = i;
            let h = x - self.a * (l.ln() - ln_rs_i0);
            if h == 0.0 {
                return Ok(i);
            }
            if h > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let next = x - h / (1.0 + self.a * r / l);
            if next == x {
                return Ok(i);
            }
            x = if next >= lo && next <= hi {
                next
            } else {
                0.5 * (lo + hi)
            };
        }
        Err(self.failure("current", v))
    }

    /// Terminal voltage at current `i`; negative above the short-circuit
    /// current (reverse bias through the same equation).
    pub fn voltage_at(&self, i: f64) -> Result<f64, ElectricalError> {
        // g(x) = Iph + I0 − i − I0·e^{x/a} − x/Rsh is decreasing and concave;
        // Newton from a point with g ≤ 0 descends onto the root.
        let c = self.iph + self.i0 - i;
        let mut x = if c > 0.0 {
            (self.a * (c / self.i0).ln()).max(0.0)
        } else {
            0.0
        };
        for _ in 0..MAX_ITERATIONS {
            let e = (x / self.a).exp();
            let g = c - self.i0 * e - x / self.rsh;
            let dg = -(self.i0 / self.a * e + 1.0 / self.rsh);
            let step = g / dg;
            let next = x - step;
            // Converged once the residual current is below tolerance.
            if g.abs() < CURRENT_TOLERANCE || next == x {
                return Ok(next - i * self.rs);
            }
            x = next;
        }
        Err(self.failure("voltage", i))
    }

    pub fn short_circuit_current(&self) -> Result<f64, ElectricalError> {
        self.current_at(0.0)
    }

    pub fn open_circuit_voltage(&self) -> Result<f64, ElectricalError> {
        self.voltage_at(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Root of the implicit equation in I by plain bisection.
    pub(crate) fn bisect_current(c: &Cell, v: f64) -> f64 {
        let f =
            |i: f64| c.iph - c.i0 * ((v + i * c.rs) / c.a).exp_m1() - (v + i * c.rs) / c.rsh - i;
        let (mut lo, mut hi) = (-1e6, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn dark_cell_at_short_circuit() {
        let p = CellParams {
            rsh_ohm: 1e12,
            ..CellParams::test_config()
        };
        let c = cell_iv(&p, 0.0, 25.0);
        assert_eq!(c.current_at(0.0).unwrap(), 0.0);
        assert_eq!(c.voltage_at(0.0).unwrap(), 0.0);
    }

    #[test]
    fn stc_short_circuit_near_iph() {
        for p in [CellParams::default(), CellParams::test_config()] {
            let c = cell_iv(&p, 1000.0, 25.0);
            let i = c.current_at(0.0).unwrap();
            let oracle = bisect_current(&c, 0.0);
            assert!((i - oracle).abs() < 1e-9, "{i} vs {oracle}");
            assert!((i - p.iph_stc_a).abs() <= p.iph_stc_a * p.rs_ohm / p.rsh_ohm + 1e-6);
        }
    }

    #[test]
    fn open_circuit_at_voc_stc() {
        let p = CellParams::test_config();
        let c = cell_iv(&p, 1000.0, 25.0);
        let i = c.current_at(p.voc_stc_v).unwrap();
        assert!(i.abs() < 1e-6, "{i}");
        assert!(bisect_current(&c, p.voc_stc_v).abs() < 1e-6);
        assert!((c.open_circuit_voltage().unwrap() - p.voc_stc_v).abs() < 1e-5);
    }

    #[test]
    fn far_forward_bias_converges() {
        let c = cell_iv(&CellParams::default(), 800.0, 40.0);
        let i = c.current_at(25.0).unwrap();
        assert!((i - bisect_current(&c, 25.0)).abs() < 1e-8 * i.abs().max(1.0));
    }

    #[test]
    fn noct_temperature_model() {
        let p = CellParams {
            noct_c: Some(45.0),
            ..CellParams::default()
        };
        assert!((p.cell_temperature(800.0, 20.0) - 45.0).abs() < 1e-12);
        assert_eq!(CellParams::default().cell_temperature(800.0, 0.0), 25.0);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(CellParams {
            n: 2.5,
            ..CellParams::default()
        }
        .validate()
        .is_err());
        assert!(CellParams {
            rsh_ohm: 0.0,
            ..CellParams::default()
        }
        .validate()
        .is_err());
        assert!(CellParams {
            iph_stc_a: 0.0,
            ..CellParams::default()
        }
        .validate()
        .is_err());
        assert!(CellParams::default().validate().is_ok());
    }

    proptest! {
        #[test]
        fn solvers_are_mutually_inverse(
            g in 0.0f64..1200.0, t in -10.0f64..70.0, frac in -0.5f64..1.3,
            rs in 0.0f64..0.02, rsh in 5.0f64..1e6, n in 1.0f64..2.0,
        ) {
            let p = CellParams { rs_ohm: rs, rsh_ohm: rsh, n, ..CellParams::default() };
            let c = cell_iv(&p, g, t);
            let i = frac * p.iph_stc_a;
            let v = c.voltage_at(i).unwrap();
            let back = c.current_at(v).unwrap();
            prop_assert!((back - i).abs() < 1e-7 * (1.0 + i.abs()), "i={} v={} back={}", i, v, back);
            prop_assert!((bisect_current(&c, v) - i).abs() < 1e-7 * (1.0 + i.abs()));
        }
    }
}
