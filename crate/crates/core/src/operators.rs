//! Periodic pseudo-spectral kernel: grid, fields, derivatives, the zero-mean
//! x-antiderivative, 2/3-rule dealiasing and the binary field format.

use crate::error::{Error, Result};
use ndarray::{Array2, Axis, Zip};
use num_complex::Complex64;
use once_cell::sync::Lazy;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::{Arc, Mutex};

/// Relative tolerance of the zero-x-mean precondition of [`antideriv_x`].
pub const MEAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis2 {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid2D {
    pub nx: usize,
    pub ny: usize,
    pub length_x: f64,
    pub length_y: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, length_x: f64, length_y: f64) -> Result<Self> {
        let g = Grid2D { nx, ny, length_x, length_y };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        for n in [self.nx, self.ny] {
            if n < 8 || !n.is_power_of_two() {
                return Err(Error::Grid(format!("size {n} is not a power of two ≥ 8")));
            }
        }
        if !(self.length_x > 0.0 && self.length_y > 0.0 && self.length_x.is_finite() && self.length_y.is_finite()) {
            return Err(Error::Grid("box lengths must be positive and finite".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        self.length_x / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        self.length_y / self.ny as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }

    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy()
    }

    /// Number of stored y-modes of the real-to-complex transform.
    pub fn nky(&self) -> usize {
        self.ny / 2 + 1
    }

    /// Signed integer x-mode of spectral row `i`.
    pub fn mode_x(&self, i: usize) -> i64 {
        if i <= self.nx / 2 {
            i as i64
        } else {
            i as i64 - self.nx as i64
        }
    }

    /// Angular wavenumbers (2πκx/Lx, 2πκy/Ly) of spectral entry (i, j).
    pub fn wavenumbers(&self, i: usize, j: usize) -> (f64, f64) {
        (2.0 * PI * self.mode_x(i) as f64 / self.length_x, 2.0 * PI * j as f64 / self.length_y)
    }

    pub fn is_nyquist_x(&self, i: usize) -> bool {
        i == self.nx / 2
    }

    pub fn is_nyquist_y(&self, j: usize) -> bool {
        j == self.ny / 2
    }

    pub fn check_same(&self, other: &Grid2D) -> Result<()> {
        if self != other {
            return Err(Error::Grid(format!("grid mismatch: {self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Real samples on a periodic box; entry (i, j) sits at (x_i, y_j).
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    pub grid: Grid2D,
    pub values: Array2<f64>,
}

impl Field2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Field2D { grid, values: Array2::zeros((grid.nx, grid.ny)) }
    }

    pub fn from_fn(grid: Grid2D, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = Array2::from_shape_fn((grid.nx, grid.ny), |(i, j)| f(grid.x(i), grid.y(j)));
        Field2D { grid, values }
    }

    pub fn from_values(grid: Grid2D, values: Array2<f64>) -> Result<Self> {
        if values.dim() != (grid.nx, grid.ny) {
            return Err(Error::Grid(format!("array shape {:?} does not match grid", values.dim())));
        }
        Ok(Field2D { grid, values })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Field2D { grid: self.grid, values: self.values.mapv(f) }
    }

    pub fn zip_with(&self, other: &Field2D, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        let mut values = self.values.clone();
        Zip::from(&mut values).and(&other.values).for_each(|a, &b| *a = f(*a, b));
        Field2D { grid: self.grid, values }
    }

    pub fn add(&self, other: &Field2D) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field2D) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field2D) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    /// self + s·other
    pub fn axpy(&self, s: f64, other: &Field2D) -> Self {
        self.zip_with(other, |a, b| a + s * b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn rms(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.values.len() as f64).sqrt()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// ∬u dx dy.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dy()
    }

    /// ∬u² dx dy.
    pub fn l2_integral(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx() * self.grid.dy()
    }

    /// Mean over x for every y index.
    pub fn x_means(&self) -> Vec<f64> {
        self.values.mean_axis(Axis(0)).expect("non-empty grid").to_vec()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Grid index and coordinates of the largest |value|.
    pub fn argmax_abs(&self) -> (usize, usize) {
        let mut best = (0, 0, -1.0);
        for ((i, j), v) in self.values.indexed_iter() {
            if v.abs() > best.2 {
                best = (i, j, v.abs());
            }
        }
        (best.0, best.1)
    }

    pub fn spectrum(&self) -> Spectrum {
        forward(self)
    }

    /// Writes the `DSP1` little-endian binary layout.
    pub fn write_binary(&self, mut w: impl Write) -> Result<()> {
        let mut buf = Vec::with_capacity(36 + 8 * self.values.len());
        buf.extend_from_slice(b"DSP1");
        buf.extend_from_slice(&(self.grid.nx as u64).to_le_bytes());
        buf.extend_from_slice(&(self.grid.ny as u64).to_le_bytes());
        buf.extend_from_slice(&self.grid.length_x.to_le_bytes());
        buf.extend_from_slice(&self.grid.length_y.to_le_bytes());
        for v in self.values.iter() {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_binary(&mut out).expect("writing to memory");
        out
    }

    pub fn read_binary(mut r: impl Read) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() < 36 || &bytes[..4] != b"DSP1" {
            return Err(Error::Format("missing DSP1 header".into()));
        }
        let word = |k: usize| <[u8; 8]>::try_from(&bytes[4 + 8 * k..12 + 8 * k]).expect("8 bytes");
        let nx = u64::from_le_bytes(word(0)) as usize;
        let ny = u64::from_le_bytes(word(1)) as usize;
        let grid = Grid2D::new(nx, ny, f64::from_le_bytes(word(2)), f64::from_le_bytes(word(3)))?;
        let body = &bytes[36..];
        if body.len() != 8 * nx * ny {
            return Err(Error::Format(format!("expected {} samples, found {} bytes", nx * ny, body.len())));
        }
        let data: Vec<f64> =
            body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        let values = Array2::from_shape_vec((nx, ny), data).map_err(|e| Error::Format(e.to_string()))?;
        let f = Field2D { grid, values };
        if !f.is_finite() {
            return Err(Error::Format("field contains non-finite values".into()));
        }
        Ok(f)
    }

    /// CSV with header `x,y,u`, one row per grid point.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let mut s = String::from("x,y,u\n");
        for ((i, j), v) in self.values.indexed_iter() {
            s.push_str(&format!("{:.17e},{:.17e},{:.17e}\n", self.grid.x(i), self.grid.y(j), v));
        }
        w.write_all(s.as_bytes())?;
        Ok(())
    }
}

/// Half-complex spectrum: full x-modes by the nonnegative y-modes.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub grid: Grid2D,
    pub data: Array2<Complex64>,
}

struct Plans {
    complex: FftPlanner<f64>,
    real: RealFftPlanner<f64>,
    cache_c: HashMap<(usize, bool), Arc<dyn Fft<f64>>>,
    cache_r2c: HashMap<usize, Arc<dyn RealToComplex<f64>>>,
    cache_c2r: HashMap<usize, Arc<dyn ComplexToReal<f64>>>,
}

static PLANS: Lazy<Mutex<Plans>> = Lazy::new(|| {
    Mutex::new(Plans {
        complex: FftPlanner::new(),
        real: RealFftPlanner::new(),
        cache_c: HashMap::new(),
        cache_r2c: HashMap::new(),
        cache_c2r: HashMap::new(),
    })
});

fn plan_c(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut p = PLANS.lock().expect("plan cache poisoned");
    if let Some(f) = p.cache_c.get(&(n, inverse)) {
        return f.clone();
    }
    let f = if inverse { p.complex.plan_fft_inverse(n) } else { p.complex.plan_fft_forward(n) };
    p.cache_c.insert((n, inverse), f.clone());
    f
}

fn plan_r2c(n: usize) -> Arc<dyn RealToComplex<f64>> {
    let mut p = PLANS.lock().expect("plan cache poisoned");
    if let Some(f) = p.cache_r2c.get(&n) {
        return f.clone();
    }
    let f = p.real.plan_fft_forward(n);
    p.cache_r2c.insert(n, f.clone());
    f
}

fn plan_c2r(n: usize) -> Arc<dyn ComplexToReal<f64>> {
    let mut p = PLANS.lock().expect("plan cache poisoned");
    if let Some(f) = p.cache_c2r.get(&n) {
        return f.clone();
    }
    let f = p.real.plan_fft_inverse(n);
    p.cache_c2r.insert(n, f.clone());
    f
}

fn fft_columns(data: &mut Array2<Complex64>, inverse: bool) {
    let nx = data.nrows();
    let fft = plan_c(nx, inverse);
    let mut buf = vec![Complex64::new(0.0, 0.0); nx];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for mut col in data.axis_iter_mut(Axis(1)) {
        for (b, v) in buf.iter_mut().zip(col.iter()) {
            *b = *v;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (v, b) in col.iter_mut().zip(buf.iter()) {
            *v = *b;
        }
    }
}

fn forward(f: &Field2D) -> Spectrum {
    let g = f.grid;
    let r2c = plan_r2c(g.ny);
    let mut data = Array2::zeros((g.nx, g.nky()));
    let mut input = r2c.make_input_vec();
    let mut output = r2c.make_output_vec();
    let mut scratch = r2c.make_scratch_vec();
    for (row, mut out_row) in f.values.axis_iter(Axis(0)).zip(data.axis_iter_mut(Axis(0))) {
        for (a, b) in input.iter_mut().zip(row.iter()) {
            *a = *b;
        }
        r2c.process_with_scratch(&mut input, &mut output, &mut scratch).expect("r2c sizes match");
        for (a, b) in out_row.iter_mut().zip(output.iter()) {
            *a = *b;
        }
    }
    fft_columns(&mut data, false);
    Spectrum { grid: g, data }
}

impl Spectrum {
    pub fn zeros(grid: Grid2D) -> Self {
        Spectrum { grid, data: Array2::zeros((grid.nx, grid.nky())) }
    }

    pub fn to_field(&self) -> Field2D {
        let g = self.grid;
        let mut data = self.data.clone();
        fft_columns(&mut data, true);
        let c2r = plan_c2r(g.ny);
        let mut input = c2r.make_input_vec();
        let mut output = c2r.make_output_vec();
        let mut scratch = c2r.make_scratch_vec();
        let norm = 1.0 / (g.nx * g.ny) as f64;
        let mut values = Array2::zeros((g.nx, g.ny));
        for (row, mut out_row) in data.axis_iter(Axis(0)).zip(values.axis_iter_mut(Axis(0))) {
            for (a, b) in input.iter_mut().zip(row.iter()) {
                *a = *b;
            }
            input[0].im = 0.0;
            let last = input.len() - 1;
            input[last].im = 0.0;
            c2r.process_with_scratch(&mut input, &mut output, &mut scratch).expect("c2r sizes match");
            for (a, b) in out_row.iter_mut().zip(output.iter()) {
                *a = *b * norm;
            }
        }
        Field2D { grid: g, values }
    }

    /// Multiplies every mode by `f(i, j, kx, ky)`.
    pub fn apply(&self, f: impl Fn(usize, usize, f64, f64) -> Complex64) -> Spectrum {
        let g = self.grid;
        let mut out = self.data.clone();
        for ((i, j), v) in out.indexed_iter_mut() {
            let (kx, ky) = g.wavenumbers(i, j);
            *v *= f(i, j, kx, ky);
        }
        Spectrum { grid: g, data: out }
    }

    /// Multiplier of ∂x^a ∂y^b, with odd derivatives killing the Nyquist mode.
    pub fn derivative_multiplier(&self, i: usize, j: usize, a: u32, b: u32) -> Complex64 {
        let g = &self.grid;
        if (a % 2 == 1 && g.is_nyquist_x(i)) || (b % 2 == 1 && g.is_nyquist_y(j)) {
            return Complex64::new(0.0, 0.0);
        }
        let (kx, ky) = g.wavenumbers(i, j);
        Complex64::new(0.0, kx).powu(a) * Complex64::new(0.0, ky).powu(b)
    }

    /// ∂x^a ∂y^b in spectral space.
    pub fn dxy(&self, a: u32, b: u32) -> Spectrum {
        if a == 0 && b == 0 {
            return self.clone();
        }
        let g = self.grid;
        let mut out = self.data.clone();
        for ((i, j), v) in out.indexed_iter_mut() {
            *v *= self.derivative_multiplier(i, j, a, b);
        }
        Spectrum { grid: g, data: out }
    }

    /// Divides by i·kx, zeroing the kx = 0 and Nyquist x-modes.
    pub fn antideriv_x_unchecked(&self) -> Spectrum {
        let g = self.grid;
        let mut out = self.data.clone();
        for ((i, j), v) in out.indexed_iter_mut() {
            let (kx, _) = g.wavenumbers(i, j);
            *v = if i == 0 || g.is_nyquist_x(i) { Complex64::new(0.0, 0.0) } else { *v / Complex64::new(0.0, kx) };
        }
        Spectrum { grid: g, data: out }
    }

    /// Zeroes |κ| above 2/3 of the Nyquist index on both axes.
    pub fn dealias(&self) -> Spectrum {
        let g = self.grid;
        let (cx, cy) = (g.nx / 3, g.ny / 3);
        let mut out = self.data.clone();
        for ((i, j), v) in out.indexed_iter_mut() {
            if g.mode_x(i).unsigned_abs() as usize > cx || j > cy {
                *v = Complex64::new(0.0, 0.0);
            }
        }
        Spectrum { grid: g, data: out }
    }

    /// Σ|u|² over the grid recovered from the half spectrum (Parseval).
    pub fn parseval_sum(&self) -> f64 {
        let g = self.grid;
        let mut s = 0.0;
        for ((_, j), v) in self.data.indexed_iter() {
            let w = if j == 0 || g.is_nyquist_y(j) { 1.0 } else { 2.0 };
            s += w * v.norm_sqr();
        }
        s / (g.nx * g.ny) as f64
    }
}

/// Spectral ∂^order along one axis.
pub fn deriv(field: &Field2D, axis: Axis2, order: u32) -> Field2D {
    assert!((1..=6).contains(&order), "derivative order {order} outside [1, 6]");
    match axis {
        Axis2::X => dxy(field, order, 0),
        Axis2::Y => dxy(field, 0, order),
    }
}

/// Mixed spectral derivative ∂x^a ∂y^b.
pub fn dxy(field: &Field2D, a: u32, b: u32) -> Field2D {
    if a == 0 && b == 0 {
        return field.clone();
    }
    field.spectrum().dxy(a, b).to_field()
}

/// Worst x-mean over y-rows, as (row, mean, max|field|).
pub fn worst_x_mean(field: &Field2D) -> (usize, f64, f64) {
    let means = field.x_means();
    let (row, mean) = means
        .iter()
        .enumerate()
        .fold((0, 0.0_f64), |best, (j, &m)| if m.abs() > best.1.abs() { (j, m) } else { best });
    (row, mean, field.max_abs())
}

/// Fails with `NonZeroMean` unless every y-row has x-mean ≤ tol·max|field|.
pub fn check_zero_x_mean(field: &Field2D) -> Result<()> {
    let (row, mean, max) = worst_x_mean(field);
    if mean.abs() > MEAN_TOLERANCE * max {
        return Err(Error::NonZeroMean { row, mean, max });
    }
    Ok(())
}

/// The zero-mean periodic x-antiderivative.
pub fn antideriv_x(field: &Field2D) -> Result<Field2D> {
    check_zero_x_mean(field)?;
    Ok(field.spectrum().antideriv_x_unchecked().to_field())
}

/// x-antiderivative of the field with its x-means removed; also returns the
/// largest removed mean. Used for nonlinear integrands whose row means do not
/// vanish identically on a periodic box.
pub fn antideriv_x_projected(field: &Field2D) -> (Field2D, f64) {
    let (_, mean, _) = worst_x_mean(field);
    (field.spectrum().antideriv_x_unchecked().to_field(), mean.abs())
}

pub fn dealias(field: &Field2D) -> Field2D {
    field.spectrum().dealias().to_field()
}

/// Checks that two fields share a grid.
pub fn same_grid(a: &Field2D, b: &Field2D) -> Result<()> {
    a.grid.check_same(&b.grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2D {
        Grid2D::new(32, 16, 2.0 * PI, 4.0).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid2D::new(12, 16, 1.0, 1.0).is_err());
        assert!(Grid2D::new(4, 16, 1.0, 1.0).is_err());
        assert!(Grid2D::new(16, 16, 0.0, 1.0).is_err());
    }

    #[test]
    fn sine_derivative() {
        let g = grid();
        let f = Field2D::from_fn(g, |x, _| (x).sin());
        let d = deriv(&f, Axis2::X, 1);
        let e = Field2D::from_fn(g, |x, _| x.cos());
        assert!(d.sub(&e).max_abs() < 1e-12);
        let c = Field2D::from_fn(g, |_, _| 3.0);
        assert!(deriv(&c, Axis2::Y, 3).max_abs() < 1e-14);
    }

    #[test]
    fn antiderivative_examples() {
        let g = grid();
        let f = Field2D::from_fn(g, |x, _| x.cos());
        let a = antideriv_x(&f).unwrap();
        assert!(a.sub(&Field2D::from_fn(g, |x, _| x.sin())).max_abs() < 1e-13);
        let one = Field2D::from_fn(g, |_, _| 1.0);
        assert!(matches!(antideriv_x(&one), Err(Error::NonZeroMean { .. })));
        let (p, dropped) = antideriv_x_projected(&one);
        assert!(p.max_abs() < 1e-15 && (dropped - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nyquist_mode_is_dealiased() {
        let g = grid();
        let f = Field2D::from_fn(g, |x, y| (16.0 * x).cos() + (PI * 8.0 * y / 2.0).cos());
        assert!(dealias(&f).max_abs() < 1e-13);
    }

    #[test]
    fn binary_round_trip() {
        let g = grid();
        let f = Field2D::from_fn(g, |x, y| x.sin() * y);
        let back = Field2D::read_binary(&f.to_binary()[..]).unwrap();
        assert_eq!(back, f);
        assert!(Field2D::read_binary(&b"DSP0"[..]).is_err());
        let mut csv = Vec::new();
        f.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1 + 32 * 16);
    }
}
