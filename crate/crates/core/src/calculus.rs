//! Two interchangeable representations of u and its derivatives: spectral
//! fields on a periodic grid, and exact ξ-polynomials for plane waves.
//! Residual assembly is written once against [`Calculus`].

use crate::error::{Error, Result};
use crate::operators::{antideriv_x, antideriv_x_projected, check_zero_x_mean, Field2D};
use crate::profile::Poly;
use std::cell::Cell;

pub trait Calculus {
    type F: Clone;

    /// ∂x^a ∂y^b f
    fn d(&self, f: &Self::F, a: u32, b: u32) -> Self::F;
    /// Zero-mean x-antiderivative of an integrand that is linear in u.
    fn int_x(&self, f: &Self::F) -> Result<Self::F>;
    /// x-antiderivative of a nonlinear integrand; on a periodic box its
    /// x-means are projected out.
    fn int_x_nl(&self, f: &Self::F) -> Result<Self::F>;
    /// n-fold zero-mean x-antiderivative of ∂y^b f.
    fn int_x_dy(&self, f: &Self::F, n: u32, b: u32) -> Result<Self::F> {
        let mut out = self.d(f, 0, b);
        for _ in 0..n {
            out = self.int_x(&out)?;
        }
        Ok(out)
    }
    fn mul(&self, a: &Self::F, b: &Self::F) -> Self::F;
    /// Σ cᵢ fᵢ over a non-empty list.
    fn lin(&self, terms: &[(f64, &Self::F)]) -> Self::F;
}

/// Spectral fields on a grid.
#[derive(Default)]
pub struct GridCalculus {
    dropped: Cell<f64>,
}

impl GridCalculus {
    pub fn new() -> Self {
        GridCalculus::default()
    }

    /// Largest x-mean removed by [`Calculus::int_x_nl`] so far.
    pub fn dropped_mean(&self) -> f64 {
        self.dropped.get()
    }
}

impl Calculus for GridCalculus {
    type F = Field2D;

    fn d(&self, f: &Field2D, a: u32, b: u32) -> Field2D {
        crate::operators::dxy(f, a, b)
    }

    fn int_x(&self, f: &Field2D) -> Result<Field2D> {
        antideriv_x(f)
    }

    // One spectral pass: chaining ∂y^b and the division by i·kx through the
    // grid amplifies roundoff into the kx = 0 column on fine grids.
    fn int_x_dy(&self, f: &Field2D, n: u32, b: u32) -> Result<Field2D> {
        if check_zero_x_mean(f).is_err() {
            let mut out = self.d(f, 0, b);
            for _ in 0..n {
                out = self.int_x(&out)?;
            }
            return Ok(out);
        }
        let mut s = f.spectrum().dxy(0, b);
        for _ in 0..n {
            s = s.antideriv_x_unchecked();
        }
        Ok(s.to_field())
    }

    fn int_x_nl(&self, f: &Field2D) -> Result<Field2D> {
        let (out, dropped) = antideriv_x_projected(f);
        self.dropped.set(self.dropped.get().max(dropped));
        Ok(out)
    }

    fn mul(&self, a: &Field2D, b: &Field2D) -> Field2D {
        a.mul(b)
    }

    fn lin(&self, terms: &[(f64, &Field2D)]) -> Field2D {
        let mut out = Field2D::zeros(terms[0].1.grid);
        for (c, f) in terms {
            if *c != 0.0 {
                out = out.axpy(*c, f);
            }
        }
        out
    }
}

/// d^level/dξ^level of a polynomial in (sn, cn, dn).
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneExpr {
    pub poly: Poly,
    pub level: u32,
}

/// Integration constants for the plane-wave antiderivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gauge {
    /// Lower limit at ξ = −∞.
    Decaying,
    /// Zero mean over one period of the given length.
    Periodic(f64),
}

/// Plane-wave calculus: ∂x → k d/dξ, ∂y → l d/dξ, ∫dx → (1/k)∫dξ.
pub struct PlaneCalculus {
    pub k: f64,
    pub l: f64,
    pub m: f64,
    pub gauge: Gauge,
}

/// Samples used to compute a period mean in the periodic gauge.
const GAUGE_SAMPLES: usize = 4096;

impl PlaneCalculus {
    fn zero(&self) -> PlaneExpr {
        PlaneExpr { poly: Poly::zero(), level: 0 }
    }

    pub fn materialize(&self, e: &PlaneExpr) -> Poly {
        e.poly.nth_derivative(self.m, e.level)
    }

    fn gauge_constant(&self, p: &Poly) -> f64 {
        match self.gauge {
            Gauge::Decaying => p.eval_minus_infinity(),
            Gauge::Periodic(period) => {
                let sum: f64 = (0..GAUGE_SAMPLES)
                    .map(|i| {
                        let xi = period * i as f64 / GAUGE_SAMPLES as f64;
                        p.eval(&crate::elliptic::jacobi(xi, self.m).expect("validated m"))
                    })
                    .sum();
                sum / GAUGE_SAMPLES as f64
            }
        }
    }
}

impl Calculus for PlaneCalculus {
    type F = PlaneExpr;

    fn d(&self, f: &PlaneExpr, a: u32, b: u32) -> PlaneExpr {
        let s = self.k.powi(a as i32) * self.l.powi(b as i32);
        PlaneExpr { poly: f.poly.scale(s), level: f.level + a + b }
    }

    fn int_x(&self, f: &PlaneExpr) -> Result<PlaneExpr> {
        if f.poly.is_zero() {
            return Ok(self.zero());
        }
        if f.level == 0 {
            return Err(Error::Contract(
                "nonlocal term has no closed form in ξ for this plane wave; use grid mode".into(),
            ));
        }
        let poly = f.poly.scale(1.0 / self.k);
        if f.level == 1 {
            let c = self.gauge_constant(&poly);
            return Ok(PlaneExpr { poly: poly.add(&Poly::constant(-c)), level: 0 });
        }
        Ok(PlaneExpr { poly, level: f.level - 1 })
    }

    fn int_x_nl(&self, f: &PlaneExpr) -> Result<PlaneExpr> {
        self.int_x(f)
    }

    fn mul(&self, a: &PlaneExpr, b: &PlaneExpr) -> PlaneExpr {
        PlaneExpr { poly: self.materialize(a).mul(&self.materialize(b)), level: 0 }
    }

    fn lin(&self, terms: &[(f64, &PlaneExpr)]) -> PlaneExpr {
        let live: Vec<_> = terms.iter().filter(|(c, f)| *c != 0.0 && !f.poly.is_zero()).collect();
        if live.is_empty() {
            return self.zero();
        }
        let level = live[0].1.level;
        if live.iter().all(|(_, f)| f.level == level) {
            let poly = live.iter().fold(Poly::zero(), |acc, (c, f)| acc.add(&f.poly.scale(*c)));
            return PlaneExpr { poly, level };
        }
        let poly = live.iter().fold(Poly::zero(), |acc, (c, f)| acc.add(&self.materialize(f).scale(*c)));
        PlaneExpr { poly, level: 0 }
    }
}
