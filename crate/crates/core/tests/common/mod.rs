#![allow(dead_code)]
//! Oracles shared by the integration tests. Nothing here calls the spectral
//! kernel: derivatives are 4th-order finite differences, antiderivatives are
//! 4th-order cumulative quadrature, elliptic integrals are adaptive Simpson.

use dispersia_core::equations::EquationId;
use dispersia_core::{Bathymetry, Field2D, Grid2D, PhysicalParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

pub fn k_quad(m: f64) -> f64 {
    simpson(&|t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, std::f64::consts::FRAC_PI_2, 1e-14)
}

pub fn e_quad(m: f64) -> f64 {
    simpson(&|t: f64| (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, std::f64::consts::FRAC_PI_2, 1e-14)
}

/// Incomplete integral F(φ, m) = ∫₀^φ dθ/√(1 − m sin²θ).
pub fn f_quad(phi: f64, m: f64) -> f64 {
    simpson(&|t: f64| 1.0 / (1.0 - m * t.sin().powi(2)).sqrt(), 0.0, phi, 1e-14)
}

/// Σ a·cos(kx x + ky y + φ) with kx, ky small nonzero multiples of the box
/// wavenumbers; every row has zero x-mean.
pub fn random_smooth_field(grid: Grid2D, seed: u64, modes: usize, amp: f64) -> Field2D {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (bx, by) = (2.0 * std::f64::consts::PI / grid.length_x, 2.0 * std::f64::consts::PI / grid.length_y);
    let list: Vec<(f64, f64, f64, f64)> = (0..modes)
        .map(|_| {
            let kx = rng.gen_range(1..=2) as f64 * bx;
            let ky = rng.gen_range(-2..=2) as f64 * by;
            (kx, ky, amp * rng.gen_range(0.3..1.0), rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    Field2D::from_fn(grid, |x, y| list.iter().map(|(kx, ky, a, p)| a * (kx * x + ky * y + p).cos()).sum())
}

/// Plain row-major array with 4th-order periodic stencils.
#[derive(Clone)]
pub struct Fd {
    pub nx: usize,
    pub ny: usize,
    pub hx: f64,
    pub hy: f64,
    pub v: Vec<f64>,
}

impl Fd {
    pub fn from(f: &Field2D) -> Self {
        let g = f.grid;
        let mut v = vec![0.0; g.nx * g.ny];
        for ((i, j), x) in f.values.indexed_iter() {
            v[i * g.ny + j] = *x;
        }
        Fd { nx: g.nx, ny: g.ny, hx: g.dx(), hy: g.dy(), v }
    }

    fn like(&self, v: Vec<f64>) -> Self {
        Fd { v, ..*self }
    }

    fn at(&self, i: isize, j: isize) -> f64 {
        let (nx, ny) = (self.nx as isize, self.ny as isize);
        self.v[(i.rem_euclid(nx) * ny + j.rem_euclid(ny)) as usize]
    }

    fn stencil(&self, along_x: bool, w: [f64; 5], scale: f64) -> Self {
        let mut out = vec![0.0; self.v.len()];
        for i in 0..self.nx as isize {
            for j in 0..self.ny as isize {
                let mut s = 0.0;
                for (o, c) in (-2..=2).zip(w) {
                    s += c * if along_x { self.at(i + o, j) } else { self.at(i, j + o) };
                }
                out[(i as usize) * self.ny + j as usize] = s * scale;
            }
        }
        self.like(out)
    }

    pub fn dx(&self) -> Self {
        self.stencil(true, [1.0, -8.0, 0.0, 8.0, -1.0], 1.0 / (12.0 * self.hx))
    }

    pub fn dy(&self) -> Self {
        self.stencil(false, [1.0, -8.0, 0.0, 8.0, -1.0], 1.0 / (12.0 * self.hy))
    }

    pub fn dxx(&self) -> Self {
        self.stencil(true, [-1.0, 16.0, -30.0, 16.0, -1.0], 1.0 / (12.0 * self.hx * self.hx))
    }

    pub fn dyy(&self) -> Self {
        self.stencil(false, [-1.0, 16.0, -30.0, 16.0, -1.0], 1.0 / (12.0 * self.hy * self.hy))
    }

    /// Zero-mean periodic x-antiderivative of the row-mean-free part, by
    /// cumulative cubic-interpolation quadrature.
    pub fn ix(&self) -> Self {
        let mut out = vec![0.0; self.v.len()];
        for j in 0..self.ny as isize {
            let mean = (0..self.nx as isize).map(|i| self.at(i, j)).sum::<f64>() / self.nx as f64;
            let f = |i: isize| self.at(i, j) - mean;
            let mut acc = 0.0;
            let mut col = vec![0.0; self.nx];
            for i in 0..self.nx as isize {
                col[i as usize] = acc;
                acc += self.hx / 24.0 * (-f(i - 1) + 13.0 * f(i) + 13.0 * f(i + 1) - f(i + 2));
            }
            let cm = col.iter().sum::<f64>() / self.nx as f64;
            for (i, c) in col.iter().enumerate() {
                out[i * self.ny + j as usize] = c - cm;
            }
        }
        self.like(out)
    }

    pub fn mul(&self, o: &Fd) -> Self {
        self.like(self.v.iter().zip(&o.v).map(|(a, b)| a * b).collect())
    }

    pub fn lin(&self, a: f64, o: &Fd, b: f64) -> Self {
        self.like(self.v.iter().zip(&o.v).map(|(x, y)| a * x + b * y).collect())
    }

    pub fn add(&self, o: &Fd) -> Self {
        self.lin(1.0, o, 1.0)
    }

    pub fn scale(&self, a: f64) -> Self {
        self.like(self.v.iter().map(|x| a * x).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.v.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_diff(&self, f: &Field2D) -> f64 {
        let other = Fd::from(f);
        self.v.iter().zip(&other.v).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Term-by-term finite-difference assembly of each equation as displayed.
pub fn fd_residual(
    eq: EquationId,
    p: &PhysicalParams,
    lambda: f64,
    u: &Field2D,
    u_t: &Field2D,
    bathy: Option<&Bathymetry>,
) -> Fd {
    use EquationId::*;
    let (a, b, g, tau) = (p.alpha, p.beta, p.gamma, p.tau);
    let u_ = Fd::from(u);
    let ut = Fd::from(u_t);
    let ux = u_.dx();
    let uxx = u_.dxx();
    let u3x = uxx.dx();
    let u5x = uxx.dxx().dx();
    let uy = u_.dy();
    let uyy = u_.dyy();
    let u4y = uyy.dyy();
    let uxyy = uyy.dx();
    let uux = u_.mul(&ux);
    let c3 = b * (1.0 - 3.0 * tau) / 6.0;
    let c5 = b * b * (19.0 - 30.0 * tau - 45.0 * tau * tau) / 360.0;
    let cxyy = g * (1.0 - 3.0 * tau) / 4.0;
    let int_uyy = uyy.ix();
    let sum = |terms: &[(f64, &Fd)]| terms.iter().skip(1).fold(terms[0].1.scale(terms[0].0), |acc, (c, f)| acc.lin(1.0, f, *c));
    let bottom = |r: Fd| -> Fd {
        let Some(bt) = bathy else { return r };
        let gr = u.grid;
        let mut t = r.clone();
        for i in 0..gr.nx {
            for j in 0..gr.ny {
                let (x, y) = (gr.x(i), gr.y(j));
                let k = i * gr.ny + j;
                t.v[k] += -0.25 * p.delta * (2.0 * bt.h(x, y) * ux.v[k] + bt.h_x(x) * u_.v[k]);
            }
        }
        t
    };
    match eq {
        Kdv2p1 | Kdv2p1Bottom => {
            bottom(sum(&[(1.0, &ut), (1.0, &ux), (1.5 * a, &uux), (b / 6.0, &u3x), (g / (2.0 * b), &int_uyy)]))
        }
        KpFixedFrame => sum(&[(1.0, &ut), (1.0, &ux), (1.5 * a, &uux), (b / 6.0, &u3x)]).dx().lin(1.0, &uyy, g / (2.0 * b)),
        KpClassical => sum(&[(1.0, &ut), (6.0, &uux), (1.0, &u3x)]).dx().lin(1.0, &uyy, lambda),
        KpMoving => sum(&[(1.0, &ut), (6.0, &uux), (b / a, &u3x)]).dx().lin(1.0, &uyy, 4.0 * g / (3.0 * a * b)),
        FifthKdv2p1 | FifthKdv2p1Bottom => bottom(sum(&[
            (1.0, &ut),
            (1.0, &ux),
            (c3, &u3x),
            (g / (2.0 * b), &int_uyy),
            (1.5 * a, &uux),
            (c5, &u5x),
            (cxyy, &uxyy),
            (-g * g / (8.0 * b * b), &u4y.ix().ix().ix()),
        ])),
        FifthKpType => sum(&[(1.0, &ut), (1.0, &ux), (c3, &u3x), (1.5 * a, &uux), (c5, &u5x), (cxyy, &uxyy)])
            .dx()
            .lin(1.0, &uyy, g / (2.0 * b))
            .lin(1.0, &u4y.ix().ix(), -g * g / (8.0 * b * b)),
        Gardner2p1 | Gardner2p1Bottom => {
            let ag = a * g / b;
            let bracket = sum(&[
                (0.125, &uy.mul(&uy).add(&u_.mul(&uyy)).ix()),
                (0.125, &u_.mul(&int_uyy)),
                (1.0, &uy.mul(&uy.ix())),
                (-0.5, &ux.mul(&int_uyy.ix())),
            ]);
            bottom(sum(&[
                (1.0, &ut),
                (1.0, &ux),
                (1.5 * a, &uux),
                (g / (2.0 * b), &int_uyy),
                (-0.375 * a * a, &u_.mul(&uux)),
                (c3, &u3x),
                (ag, &bracket),
                (-g * g / (8.0 * b * b), &u4y.ix().ix().ix()),
            ]))
        }
        Gardner1p1 => sum(&[(1.0, &ut), (1.0, &ux), (1.5 * a, &uux), (-0.375 * a * a, &u_.mul(&uux)), (c3, &u3x)]),
    }
}

pub fn case_params() -> PhysicalParams {
    PhysicalParams { alpha: 0.15, beta: 0.1, gamma: 0.05, delta: 0.2, tau: 0.1, regime: None }
}

/// Two-segment ramp rising from 0 to 0.8 over the first half of the box.
pub fn ramp(lx: f64) -> Bathymetry {
    Bathymetry::ramp(0.0, 0.5 * lx, 0.0, 0.8).unwrap()
}

/// Relative max difference between the spectral residual and the oracle on
/// an n×n grid of the 4π box.
pub fn oracle_gap(eq: EquationId, n: usize, seed: u64) -> f64 {
    use dispersia_core::WaveEquation;
    let l = 4.0 * std::f64::consts::PI;
    let g = Grid2D::new(n, n, l, l).unwrap();
    let p = case_params();
    let u = random_smooth_field(g, seed, 3, 0.5);
    let u_t = random_smooth_field(g, seed + 1000, 2, 0.5);
    let bathy = eq.has_bottom().then(|| ramp(l));
    let w = WaveEquation::new(eq, p).with_lambda(1.0);
    let (r, _) = w.residual_field(&u, &u_t, bathy.as_ref()).unwrap_or_else(|e| panic!("{}: {e}", eq.name()));
    let fd = fd_residual(eq, &p, 1.0, &u, &u_t, bathy.as_ref());
    fd.max_diff(&r) / r.max_abs()
}
