//! PV generator layout: module grid, cells, sample points.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Triangle, Vec3};
use crate::num::Real;
use crate::solar::SunPosition;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackingMode {
    #[default]
    Fixed,
    TwoAxis,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeneratorError {
    #[error("generator `{generator}`: {field} must be >= 1")]
    ZeroCount {
        generator: String,
        field: &'static str,
    },
    #[error("generator `{generator}`: {field} must be > 0, got {value}")]
    NonPositive {
        generator: String,
        field: &'static str,
        value: f64,
    },
    #[error("generator `{generator}`: {field} must be >= 0, got {value}")]
    Negative {
        generator: String,
        field: &'static str,
        value: f64,
    },
    #[error("generator `{generator}`: cell {cell} is not assigned to any substring")]
    CellUnassigned { generator: String, cell: usize },
    #[error("generator `{generator}`: cell {cell} is assigned to more than one substring")]
    CellDuplicated { generator: String, cell: usize },
    #[error("generator `{generator}`: substring references cell {cell}, module has {count} cells")]
    CellOutOfRange {
        generator: String,
        cell: usize,
        count: usize,
    },
    #[error("generator `{generator}`: {per_string} modules/string x {parallel} strings != {modules} modules")]
    Wiring {
        generator: String,
        per_string: usize,
        parallel: usize,
        modules: usize,
    },
    #[error("generator `{generator}`: non-finite {field}")]
    NonFinite {
        generator: String,
        field: &'static str,
    },
}

impl GeneratorError {
    /// Id of the offending generator.
    pub fn generator(&self) -> &str {
        match self {
            Self::ZeroCount { generator, .. }
            | Self::NonPositive { generator, .. }
            | Self::Negative { generator, .. }
            | Self::CellUnassigned { generator, .. }
            | Self::CellDuplicated { generator, .. }
            | Self::CellOutOfRange { generator, .. }
            | Self::Wiring { generator, .. }
            | Self::NonFinite { generator, .. } => generator,
        }
    }

    /// Name of the `PVGeneratorSpec` field the error refers to.
    pub fn field(&self) -> &'static str {
        match self {
            Self::ZeroCount { field, .. }
            | Self::NonPositive { field, .. }
            | Self::Negative { field, .. }
            | Self::NonFinite { field, .. } => field,
            Self::CellUnassigned { .. }
            | Self::CellDuplicated { .. }
            | Self::CellOutOfRange { .. } => "substrings",
            Self::Wiring { .. } => "modules_per_string",
        }
    }
}

fn default_subdivision() -> usize {
    3
}

/// Geometric layout and electrical wiring of one PV generator.
///
/// Modules form a `module_rows × module_cols` grid on the panel plane,
/// centered on `origin`; row 0 is the lowest row, column 0 the leftmost when
/// facing the panel front. Modules `k·modules_per_string .. (k+1)·modules_per_string`
/// (row-major) make up string `k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PVGeneratorSpec {
    pub id: String,
    #[serde(rename = "origin_m")]
    pub origin: [f64; 3],
    #[serde(default)]
    pub mode: TrackingMode,
    #[serde(default = "default_azimuth")]
    pub azimuth_deg: f64,
    #[serde(default)]
    pub tilt_deg: f64,
    pub module_rows: usize,
    pub module_cols: usize,
    pub module_w_m: f64,
    pub module_h_m: f64,
    #[serde(default)]
    pub gap_row_m: f64,
    #[serde(default)]
    pub gap_col_m: f64,
    pub cell_rows: usize,
    pub cell_cols: usize,
    /// Cell indices of each bypass-diode group within a module.
    pub substrings: Vec<Vec<usize>>,
    pub modules_per_string: usize,
    #[serde(default = "one")]
    pub strings_parallel: usize,
    #[serde(default = "default_subdivision")]
    pub subdivision: usize,
    #[serde(default)]
    pub self_occluding: bool,
}

fn default_azimuth() -> f64 {
    180.0
}

fn one() -> usize {
    1
}

impl PVGeneratorSpec {
    pub fn module_count(&self) -> usize {
        self.module_rows * self.module_cols
    }

    pub fn cells_per_module(&self) -> usize {
        self.cell_rows * self.cell_cols
    }

    pub fn cell_count(&self) -> usize {
        self.module_count() * self.cells_per_module()
    }

    pub fn samples_per_cell(&self) -> usize {
        self.subdivision * self.subdivision
    }

    pub fn sample_count(&self) -> usize {
        self.cell_count() * self.samples_per_cell()
    }

    /// Splits the cells of a module into `groups` consecutive runs of equal size
    /// (the last group takes the remainder).
    pub fn consecutive_substrings(cells: usize, groups: usize) -> Vec<Vec<usize>> {
        let groups = groups.clamp(1, cells.max(1));
        let per = cells / groups;
        (0..groups)
            .map(|g| {
                let end = if g + 1 == groups {
                    cells
                } else {
                    (g + 1) * per
                };
                (g * per..end).collect()
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), GeneratorError> {
        let id = || self.id.clone();
        for (field, v) in [
            ("module_rows", self.module_rows),
            ("module_cols", self.module_cols),
            ("cell_rows", self.cell_rows),
            ("cell_cols", self.cell_cols),
            ("subdivision", self.subdivision),
            ("modules_per_string", self.modules_per_string),
            ("strings_parallel", self.strings_parallel),
        ] {
            if v == 0 {
                return Err(GeneratorError::ZeroCount {
                    generator: id(),
                    field,
                });
            }
        }
        for (field, v) in [
            ("module_w_m", self.module_w_m),
            ("module_h_m", self.module_h_m),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(GeneratorError::NonPositive {
                    generator: id(),
                    field,
                    value: v,
                });
            }
        }
        for (field, v) in [("gap_row_m", self.gap_row_m), ("gap_col_m", self.gap_col_m)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(GeneratorError::Negative {
                    generator: id(),
                    field,
                    value: v,
                });
            }
        }
        if self.origin.iter().any(|c| !c.is_finite()) {
            return Err(GeneratorError::NonFinite {
                generator: id(),
                field: "origin_m",
            });
        }
        for (field, v) in [
            ("azimuth_deg", self.azimuth_deg),
            ("tilt_deg", self.tilt_deg),
        ] {
            if !v.is_finite() {
                return Err(GeneratorError::NonFinite {
                    generator: id(),
                    field,
                });
            }
        }
        let count = self.cells_per_module();
        let mut seen = vec![false; count];
        for &cell in self.substrings.iter().flatten() {
            if cell >= count {
                return Err(GeneratorError::CellOutOfRange {
                    generator: id(),
                    cell,
                    count,
                });
            }
            if std::mem::replace(&mut seen[cell], true) {
                return Err(GeneratorError::CellDuplicated {
                    generator: id(),
                    cell,
                });
            }
        }
        if let Some(cell) = seen.iter().position(|s| !s) {
            return Err(GeneratorError::CellUnassigned {
                generator: id(),
                cell,
            });
        }
        if self.modules_per_string * self.strings_parallel != self.module_count() {
            return Err(GeneratorError::Wiring {
                generator: id(),
                per_string: self.modules_per_string,
                parallel: self.strings_parallel,
                modules: self.module_count(),
            });
        }
        Ok(())
    }

    /// Panel frame for the instant: fixed orientation, or facing the sun for a
    /// two-axis tracker (`None` sun falls back to the stored orientation).
    pub fn frame_at(&self, sun: Option<&SunPosition>) -> PanelFrame {
        let origin = Vec3::from_array(self.origin);
        match (self.mode, sun) {
            (TrackingMode::TwoAxis, Some(s)) => {
                PanelFrame::from_orientation(origin, s.azimuth_deg, s.zenith_deg)
            }
            _ => PanelFrame::from_orientation(origin, self.azimuth_deg, self.tilt_deg),
        }
    }

    fn extent(&self) -> (f64, f64) {
        let w = self.module_cols as f64 * self.module_w_m
            + (self.module_cols - 1) as f64 * self.gap_col_m;
        let h = self.module_rows as f64 * self.module_h_m
            + (self.module_rows - 1) as f64 * self.gap_row_m;
        (w, h)
    }

    /// Lower-left corner of module `m` in panel (u, v) coordinates.
    fn module_corner(&self, m: usize) -> (f64, f64) {
        let (w, h) = self.extent();
        let (r, c) = (m / self.module_cols, m % self.module_cols);
        (
            -w / 2.0 + c as f64 * (self.module_w_m + self.gap_col_m),
            -h / 2.0 + r as f64 * (self.module_h_m + self.gap_row_m),
        )
    }

    /// Module rectangles as two triangles each, row-major.
    pub fn module_quads(&self, frame: &PanelFrame) -> Vec<Triangle> {
        let mut out = Vec::with_capacity(2 * self.module_count());
        for m in 0..self.module_count() {
            let (u0, v0) = self.module_corner(m);
            let (u1, v1) = (u0 + self.module_w_m, v0 + self.module_h_m);
            let p = |u: f64, v: f64| frame.point(u, v);
            out.push(Triangle::new(p(u0, v0), p(u1, v0), p(u1, v1)));
            out.push(Triangle::new(p(u0, v0), p(u1, v1), p(u0, v1)));
        }
        out
    }

    /// Outline of the whole module grid (counter-clockwise seen from the front).
    pub fn outline(&self, frame: &PanelFrame) -> [Vec3; 4] {
        let (w, h) = self.extent();
        let (a, b) = (w / 2.0, h / 2.0);
        [
            frame.point(-a, -b),
            frame.point(a, -b),
            frame.point(a, b),
            frame.point(-a, b),
        ]
    }
}

/// Orthonormal panel frame: `u` along module rows (left to right seen from
/// the front), `v` up the slope, `normal` out of the front face.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PanelFrame {
    pub origin: Vec3,
    pub u: Vec3,
    pub v: Vec3,
    pub normal: Vec3,
}

impl PanelFrame {
    pub fn from_orientation(origin: Vec3, azimuth_deg: f64, tilt_deg: f64) -> Self {
        let (st, ct) = f64::sin_cos_deg(tilt_deg);
        let (sa, ca) = f64::sin_cos_deg(azimuth_deg);
        let normal = Vec3::new(st * sa, st * ca, ct);
        let u = Vec3::new(-ca, sa, 0.0);
        let v = normal.cross(u);
        Self {
            origin,
            u,
            v,
            normal,
        }
    }

    /// Frame for an arbitrary unit normal; azimuth and tilt are recovered
    /// from it (azimuth 180° when horizontal).
    pub fn from_normal(origin: Vec3, normal: Vec3) -> Self {
        let n = normal.normalized().unwrap_or(Vec3::unit_z());
        let tilt = n.z.clamp(-1.0, 1.0).acos().to_degrees();
        let horizontal = (n.x * n.x + n.y * n.y).sqrt();
        let azimuth = if horizontal < 1e-12 {
            180.0
        } else {
            n.x.atan2(n.y).to_degrees().rem_euclid(360.0)
        };
        let mut f = Self::from_orientation(origin, azimuth, tilt);
        f.normal = n;
        f.v = n.cross(f.u);
        f
    }

    #[inline]
    pub fn point(&self, u: f64, v: f64) -> Vec3 {
        self.origin + self.u * u + self.v * v
    }

    /// Signed distance of `p` from the panel plane.
    pub fn distance(&self, p: Vec3) -> f64 {
        (p - self.origin).dot(self.normal)
    }
}

/// One classification point: the center of a sub-cell.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SamplePoint<T = f64> {
    pub position: Vec3<T>,
    pub module: u32,
    pub cell: u32,
    pub sub: u32,
}

/// Sample points at sub-cell centers; modules, cells and sub-cells are each
/// enumerated row-major from the bottom-left.
pub fn generator_samples<T: Real>(
    spec: &PVGeneratorSpec,
    frame: &PanelFrame,
) -> Vec<SamplePoint<T>> {
    let k = spec.subdivision;
    let (cw, ch) = (
        spec.module_w_m / spec.cell_cols as f64,
        spec.module_h_m / spec.cell_rows as f64,
    );
    let (sw, sh) = (cw / k as f64, ch / k as f64);
    let mut out = Vec::with_capacity(spec.sample_count());
    for m in 0..spec.module_count() {
        let (mu, mv) = spec.module_corner(m);
        for cell in 0..spec.cells_per_module() {
            let (cr, cc) = (cell / spec.cell_cols, cell % spec.cell_cols);
            for sub in 0..k * k {
                let (sr, sc) = (sub / k, sub % k);
                let u = mu + cc as f64 * cw + (sc as f64 + 0.5) * sw;
                let v = mv + cr as f64 * ch + (sr as f64 + 0.5) * sh;
                out.push(SamplePoint {
                    position: frame.point(u, v).cast(),
                    module: m as u32,
                    cell: cell as u32,
                    sub: sub as u32,
                });
            }
        }
    }
    out
}
