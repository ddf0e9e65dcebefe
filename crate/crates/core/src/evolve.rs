//! Integrating-factor RK4 on the periodic box for the KdV/KP family.
//!
//! The linear part is integrated exactly in Fourier space; the quadratic
//! term is stepped with classical RK4 in conservative form c·½(u²)_x.

use crate::equations::{EquationId, TermOp, WaveEquation};
use crate::error::{Error, Result};
use crate::io::{atomic_write, canonical_json};
use crate::operators::{Field2D, Grid2D, Spectrum};
use crate::params::PhysicalParams;
use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const EVOLVABLE: [EquationId; 4] =
    [EquationId::Kdv2p1, EquationId::KpMoving, EquationId::KpClassical, EquationId::FifthKdv2p1];

fn keeps(op: TermOp, include_gamma2: bool) -> bool {
    include_gamma2 || !matches!(op, TermOp::Int2U4y | TermOp::Int3U4y)
}

/// Ω(kx, ky) such that the linearised equation reads û_t = −Ω û. Zero on
/// kx = 0.
pub fn linear_symbol(eq: &WaveEquation, kx: f64, ky: f64) -> Complex64 {
    if kx == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let (d, e) = (Complex64::new(0.0, kx), Complex64::new(0.0, ky));
    let kp = eq.id.is_kp_form();
    eq.coefficients()
        .entries
        .iter()
        .filter_map(|c| {
            let op = c.op?;
            if !keeps(op, eq.include_gamma2) {
                return None;
            }
            let s = op.symbol(d, e)?;
            Some(c.value * if kp && !c.inside_dx { s / d } else { s })
        })
        .sum()
}

/// Coefficient c of the c·u·u_x term.
fn quadratic_coefficient(eq: &WaveEquation) -> f64 {
    eq.coefficients().entries.iter().filter(|c| c.op == Some(TermOp::UUx)).map(|c| c.value).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub equation: EquationId,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    #[serde(default = "on")]
    pub dealias: bool,
    /// Keep the γ² nested-integral term of the fifth-order equation.
    #[serde(default)]
    pub include_gamma2: bool,
    /// λ for the classical KP equation.
    #[serde(default)]
    pub lambda: Option<f64>,
}

fn on() -> bool {
    true
}

impl EvolutionConfig {
    pub fn new(equation: EquationId, dt: f64, t_end: f64) -> Self {
        EvolutionConfig { equation, dt, t_end, snapshot_every: 0, dealias: true, include_gamma2: false, lambda: None }
    }

    pub fn wave_equation(&self, p: &PhysicalParams) -> WaveEquation {
        let mut eq = WaveEquation::new(self.equation, *p).with_gamma2(self.include_gamma2);
        eq.lambda = self.lambda;
        eq
    }

    /// Largest |Ω| over the grid's modes.
    pub fn max_symbol(&self, grid: &Grid2D, p: &PhysicalParams) -> f64 {
        let eq = self.wave_equation(p);
        let mut m = 0.0_f64;
        for i in 0..grid.nx {
            for j in 0..grid.nky() {
                let (kx, ky) = grid.wavenumbers(i, j);
                m = m.max(linear_symbol(&eq, kx, ky).norm());
            }
        }
        m
    }

    pub fn validate(&self, grid: &Grid2D, p: &PhysicalParams) -> Result<()> {
        if !EVOLVABLE.contains(&self.equation) {
            return Err(Error::Config(format!("{} cannot be evolved", self.equation.name())));
        }
        if self.equation == EquationId::KpClassical && self.lambda.is_none() {
            return Err(Error::Config("kp-classical evolution needs λ".into()));
        }
        if !(self.dt > 0.0) || !self.t_end.is_finite() || self.t_end < 0.0 {
            return Err(Error::Config(format!("need dt > 0 and t_end ≥ 0, got dt = {}, t_end = {}", self.dt, self.t_end)));
        }
        let limit = 0.5 / self.max_symbol(grid, p);
        if self.dt > limit {
            return Err(Error::Config(format!("dt = {} exceeds the stability bound 0.5/max|Ω| = {limit:.6e}", self.dt)));
        }
        Ok(())
    }

    /// Number of steps and the step that lands exactly on t_end.
    pub fn steps(&self) -> (usize, f64) {
        if self.t_end == 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_end / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_end / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservedDiagnostics {
    pub t: f64,
    pub mass: f64,
    pub l2: f64,
}

impl ConservedDiagnostics {
    pub fn of(t: f64, u: &Field2D) -> Self {
        ConservedDiagnostics { t, mass: u.integral(), l2: u.l2_integral() }
    }
}

/// Stepper holding the precomputed integrating factors.
pub struct Integrator {
    grid: Grid2D,
    dt: f64,
    dealias: bool,
    /// e^{−Ω dt/2}
    half: Array2<Complex64>,
    /// −c·½·i·kx, the multiplier taking (u²)^ to the nonlinear tendency.
    nl: Array2<Complex64>,
}

impl Integrator {
    /// `dt` may be negative to run backwards.
    pub fn new(eq: &WaveEquation, grid: Grid2D, dt: f64, dealias: bool) -> Self {
        let c = quadratic_coefficient(eq);
        let shape = (grid.nx, grid.nky());
        let mut half = Array2::zeros(shape);
        let mut nl = Array2::zeros(shape);
        for i in 0..grid.nx {
            for j in 0..grid.nky() {
                let (kx, ky) = grid.wavenumbers(i, j);
                let nyq = grid.is_nyquist_x(i);
                let omega = if nyq { Complex64::new(0.0, 0.0) } else { linear_symbol(eq, kx, ky) };
                half[[i, j]] = (-omega * 0.5 * dt).exp();
                nl[[i, j]] = if nyq { Complex64::new(0.0, 0.0) } else { Complex64::new(0.0, -0.5 * c * kx) };
            }
        }
        Integrator { grid, dt, dealias, half, nl }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn tendency(&self, v: &Array2<Complex64>) -> Array2<Complex64> {
        let u = Spectrum { grid: self.grid, data: v.clone() }.to_field();
        let mut sq = u.mul(&u).spectrum();
        if self.dealias {
            sq = sq.dealias();
        }
        sq.data * &self.nl * self.dt
    }

    /// One step in spectral space.
    pub fn step_spectrum(&self, v: &Array2<Complex64>) -> Array2<Complex64> {
        let e = &self.half;
        let e2 = e * e;
        let a = self.tendency(v);
        let b = self.tendency(&(e * &(v + &a * 0.5)));
        let c = self.tendency(&(e * v + &b * 0.5));
        let d = self.tendency(&(&e2 * v + e * &c));
        &e2 * v + (&e2 * &a + e * &(&b + &c) * 2.0 + d) / 6.0
    }

    pub fn step(&self, u: &Field2D) -> Result<Field2D> {
        u.grid.check_same(&self.grid)?;
        Ok(Spectrum { grid: self.grid, data: self.step_spectrum(&u.spectrum().data) }.to_field())
    }
}

/// Removes the kx = 0, ky ≠ 0 modes (row x-means minus the global mean);
/// returns the projected field and the largest removed row deviation.
pub fn project_initial(u: &Field2D) -> (Field2D, f64) {
    let mean = u.mean();
    let dev = u.x_means().iter().map(|m| (m - mean).abs()).fold(0.0, f64::max);
    let s = u.spectrum().apply(|i, j, _, _| {
        if i == 0 && j != 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(1.0, 0.0)
        }
    });
    (s.to_field(), dev)
}

/// Advances a field by one step of `cfg.dt`.
pub fn step(state: &Field2D, cfg: &EvolutionConfig, p: &PhysicalParams) -> Result<Field2D> {
    cfg.validate(&state.grid, p)?;
    let it = Integrator::new(&cfg.wave_equation(p), state.grid, cfg.dt, cfg.dealias);
    let out = it.step(state)?;
    if !out.is_finite() {
        return Err(Error::Blowup { time: cfg.dt });
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: EvolutionConfig,
    pub params: PhysicalParams,
    /// Step actually used so that the run ends on t_end.
    pub dt_used: f64,
    pub steps: usize,
    pub projected: f64,
    pub times: Vec<f64>,
    pub snapshots: Vec<Field2D>,
    pub diagnostics: Vec<ConservedDiagnostics>,
}

#[derive(Serialize)]
struct RunDocument<'a> {
    config: &'a EvolutionConfig,
    params: &'a PhysicalParams,
    dt_used: f64,
    steps: usize,
    projected_row_mean: f64,
    snapshot_times: &'a [f64],
    snapshot_files: Vec<String>,
    diagnostics: &'a [ConservedDiagnostics],
    mass_drift: f64,
    l2_drift: f64,
}

impl Trajectory {
    pub fn last(&self) -> &Field2D {
        self.snapshots.last().expect("trajectory holds u0")
    }

    fn drift(&self, f: fn(&ConservedDiagnostics) -> f64) -> f64 {
        let first = f(&self.diagnostics[0]);
        let worst = self.diagnostics.iter().map(|d| (f(d) - first).abs()).fold(0.0, f64::max);
        if first == 0.0 {
            worst
        } else {
            worst / first.abs()
        }
    }

    /// Largest relative change of ∬u over the run.
    pub fn mass_drift(&self) -> f64 {
        self.drift(|d| d.mass)
    }

    pub fn l2_drift(&self) -> f64 {
        self.drift(|d| d.l2)
    }

    pub fn diagnostics_csv(&self) -> String {
        let mut s = String::from("t,mass,l2\n");
        for d in &self.diagnostics {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", d.t, d.mass, d.l2));
        }
        s
    }

    /// Writes run.json, diagnostics.csv and snap_NNNNN.bin into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let names: Vec<String> = (0..self.snapshots.len()).map(|i| format!("snap_{i:05}.bin")).collect();
        for (f, name) in self.snapshots.iter().zip(&names) {
            atomic_write(&dir.join(name), &f.to_binary())?;
        }
        atomic_write(&dir.join("diagnostics.csv"), self.diagnostics_csv().as_bytes())?;
        let doc = RunDocument {
            config: &self.config,
            params: &self.params,
            dt_used: self.dt_used,
            steps: self.steps,
            projected_row_mean: self.projected,
            snapshot_times: &self.times,
            snapshot_files: names,
            diagnostics: &self.diagnostics,
            mass_drift: self.mass_drift(),
            l2_drift: self.l2_drift(),
        };
        atomic_write(&dir.join("run.json"), canonical_json(&doc)?.as_bytes())
    }
}

/// Runs from u0 to t_end, keeping every `snapshot_every`-th state (0 keeps
/// only the first and last) and conserved quantities at every step.
pub fn run(u0: &Field2D, cfg: &EvolutionConfig, p: &PhysicalParams) -> Result<Trajectory> {
    cfg.validate(&u0.grid, p)?;
    let (u, projected) = project_initial(u0);
    if projected > 0.0 {
        log::info!("removed row x-mean deviations up to {projected:.3e} from the initial state");
    }
    let (steps, dt) = cfg.steps();
    let it = Integrator::new(&cfg.wave_equation(p), u.grid, dt, cfg.dealias);
    let mut v = u.spectrum().data;
    let mut times = vec![0.0];
    let mut snapshots = vec![u.clone()];
    let mut diagnostics = vec![ConservedDiagnostics::of(0.0, &u)];
    for n in 1..=steps {
        v = it.step_spectrum(&v);
        let t = n as f64 * dt;
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Blowup { time: t });
        }
        let keep = n == steps || (cfg.snapshot_every > 0 && n % cfg.snapshot_every == 0);
        let f = Spectrum { grid: u.grid, data: v.clone() }.to_field();
        diagnostics.push(ConservedDiagnostics::of(t, &f));
        if keep {
            times.push(t);
            snapshots.push(f);
        }
    }
    Ok(Trajectory { config: *cfg, params: *p, dt_used: dt, steps, projected, times, snapshots, diagnostics })
}
