//! Piecewise-linear bottom profiles h(x, y) with h_xx = 0 on every segment.

use crate::error::{Error, Result};
use crate::operators::{deriv, Axis2, Field2D, Grid2D};
use serde::{Deserialize, Serialize};

/// Grid cells excluded on each side of a break when certifying residuals.
pub const BREAK_MARGIN: usize = 4;

/// h = intercept + slope·x + y_slope·y on [x_break, next break).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub x_break: f64,
    pub slope: f64,
    pub intercept: f64,
    #[serde(default)]
    pub y_slope: f64,
    /// Coefficient of x²; any nonzero value is rejected.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub curvature: f64,
}

fn is_zero(v: &f64) -> bool {
    *v == 0.0
}

impl Segment {
    pub fn new(x_break: f64, slope: f64, intercept: f64) -> Self {
        Segment { x_break, slope, intercept, y_slope: 0.0, curvature: 0.0 }
    }

    fn value(&self, x: f64, y: f64) -> f64 {
        self.intercept + self.slope * x + self.y_slope * y
    }
}

/// The first segment also covers x below its break; the last extends to +∞.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bathymetry {
    segments: Vec<Segment>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BathymetryReport {
    pub max_abs: f64,
    pub wrap_mismatch: f64,
    pub y_dependent: bool,
    pub warnings: Vec<String>,
}

pub fn make_bathymetry(segments: Vec<Segment>) -> Result<Bathymetry> {
    if segments.is_empty() {
        return Err(Error::Config("bathymetry needs at least one segment".into()));
    }
    for (i, s) in segments.iter().enumerate() {
        if s.curvature != 0.0 {
            return Err(Error::NonLinearSegment(i));
        }
        if ![s.x_break, s.slope, s.intercept, s.y_slope].iter().all(|v| v.is_finite()) {
            return Err(Error::Domain(format!("segment {i} has non-finite coefficients")));
        }
    }
    for w in segments.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.x_break <= a.x_break {
            return Err(Error::Config("segment breaks must be strictly increasing".into()));
        }
        let jump = (b.value(b.x_break, 0.0) - a.value(b.x_break, 0.0)).abs().max((b.y_slope - a.y_slope).abs());
        if jump > 1e-12 {
            return Err(Error::Discontinuity { x: b.x_break, jump });
        }
    }
    Ok(Bathymetry { segments })
}

impl Bathymetry {
    /// h ≡ c.
    pub fn flat(c: f64) -> Self {
        Bathymetry { segments: vec![Segment::new(0.0, 0.0, c)] }
    }

    /// Linear from h0 at x0 to h1 at x1, constant h1 beyond.
    pub fn ramp(x0: f64, x1: f64, h0: f64, h1: f64) -> Result<Self> {
        let s = (h1 - h0) / (x1 - x0);
        make_bathymetry(vec![Segment::new(x0, s, h0 - s * x0), Segment::new(x1, 0.0, h1)])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    fn segment_at(&self, x: f64) -> &Segment {
        let idx = self.segments.iter().rposition(|s| s.x_break <= x).unwrap_or(0);
        &self.segments[idx]
    }

    pub fn h(&self, x: f64, y: f64) -> f64 {
        self.segment_at(x).value(x, y)
    }

    /// ∂h/∂x, taken from the segment to the right at a break.
    pub fn h_x(&self, x: f64) -> f64 {
        self.segment_at(x).slope
    }

    pub fn h_y(&self, x: f64) -> f64 {
        self.segment_at(x).y_slope
    }

    pub fn depends_on_y(&self) -> bool {
        self.segments.iter().any(|s| s.y_slope != 0.0)
    }

    pub fn sample_h(&self, grid: &Grid2D) -> Field2D {
        Field2D::from_fn(*grid, |x, y| self.h(x, y))
    }

    pub fn sample_hx(&self, grid: &Grid2D) -> Field2D {
        Field2D::from_fn(*grid, |x, _| self.h_x(x))
    }

    /// Largest |h(0, y) − h(L_x, y)| over the grid rows.
    pub fn wrap_mismatch(&self, grid: &Grid2D) -> f64 {
        (0..grid.ny)
            .map(|j| (self.h(0.0, grid.y(j)) - self.h(grid.length_x, grid.y(j))).abs())
            .fold(0.0, f64::max)
    }

    /// Break positions strictly inside the box.
    pub fn interior_breaks(&self, grid: &Grid2D) -> Vec<f64> {
        self.segments.iter().map(|s| s.x_break).filter(|&x| x > 0.0 && x < grid.length_x).collect()
    }

    /// Per x-index flag: true when the column is at least `margin` cells from
    /// every break and, if h does not wrap periodically, from the box edge.
    pub fn interior_mask(&self, grid: &Grid2D, margin: usize) -> Vec<bool> {
        let mut cuts = self.interior_breaks(grid);
        if self.wrap_mismatch(grid) > 1e-12 {
            cuts.push(0.0);
            cuts.push(grid.length_x);
        }
        let reach = margin as f64 * grid.dx();
        (0..grid.nx)
            .map(|i| {
                let x = grid.x(i);
                cuts.iter().all(|&c| {
                    let d = (x - c).abs();
                    d.min(grid.length_x - d) > reach
                })
            })
            .collect()
    }

    /// True when sampled derivatives of h-weighted fields are unreliable somewhere.
    pub fn needs_interior_only(&self, grid: &Grid2D) -> bool {
        self.interior_mask(grid, BREAK_MARGIN).iter().any(|ok| !ok)
    }

    pub fn report(&self, grid: &Grid2D) -> BathymetryReport {
        let max_abs = self.sample_h(grid).max_abs();
        let wrap_mismatch = self.wrap_mismatch(grid);
        let y_dependent = self.depends_on_y();
        let mut warnings = vec![];
        if wrap_mismatch > 1e-12 {
            warnings.push(format!("h is not periodic across the box edge (jump {wrap_mismatch:.3e}); certification is interior-only"));
        }
        if y_dependent {
            warnings.push("h depends on y; only h and h_x enter the reduced equations".into());
        }
        if max_abs > 1.0 {
            warnings.push(format!("max|h| = {max_abs:.3e} exceeds 1 in scaled units"));
        }
        for w in &warnings {
            log::warn!("{w}");
        }
        BathymetryReport { max_abs, wrap_mismatch, y_dependent, warnings }
    }

    /// Errors when the sampled profile exceeds the O(1) scaling bound.
    pub fn check_on(&self, grid: &Grid2D) -> Result<BathymetryReport> {
        let r = self.report(grid);
        if r.max_abs > 1.0 {
            return Err(Error::Domain(format!("max|h| = {} exceeds 1 on the grid", r.max_abs)));
        }
        Ok(r)
    }
}

/// −¼δ(2h u_x + h_x u) with spectral u_x and analytic h, h_x.
pub fn bottom_term(u: &Field2D, b: &Bathymetry, delta: f64) -> Field2D {
    if delta == 0.0 {
        return Field2D::zeros(u.grid);
    }
    let ux = deriv(u, Axis2::X, 1);
    let g = u.grid;
    let mut out = Field2D::zeros(g);
    for ((i, j), v) in out.values.indexed_iter_mut() {
        let (x, y) = (g.x(i), g.y(j));
        *v = -0.25 * delta * (2.0 * b.h(x, y) * ux.values[[i, j]] + b.h_x(x) * u.values[[i, j]]);
    }
    out
}
