//! The perturbative layer behind the single wave equations: the surface
//! potential series, the auxiliary field w = u + corrections, the coupled
//! surface pairs, and the ε-sweep that measures how well a pair closes.

use crate::bathymetry::{bottom_term, Bathymetry};
use crate::calculus::{Calculus, GridCalculus};
use crate::equations::{EquationId, GardnerForm, WaveEquation};
use crate::error::{Error, Result};
use crate::operators::{check_zero_x_mean, dxy, same_grid, Field2D, Grid2D};
use crate::params::{CaseId, PhysicalParams};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Step of the central difference used for w_t.
pub const WT_STEP: f64 = 1e-5;

/// Functional forms a correction can take.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CorrectionKind {
    /// c·u²
    Square(f64),
    /// c·u³
    Cube(f64),
    /// c·u_xx
    Uxx(f64),
    /// c·u_4x
    U4x(f64),
    /// c·u_yy
    Uyy(f64),
    /// c·∫∫u_yy
    Int2Uyy(f64),
    /// c·∫∫∫∫u_4y
    Int4U4y(f64),
    /// ⅝∫∫(uu_y)_y − ⅜∫(u∫u_yy), plus −(3/2)∫(u∫u²u_yy) when `cubic`
    MixedAgb { cubic: bool },
    /// ¼(2hu + h_x∫u)
    Bottom,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionTerm {
    pub label: String,
    pub order: u32,
    /// Small-parameter factor, e.g. α for Qa or γ/β for Qgb.
    pub factor: f64,
    pub kind: CorrectionKind,
    pub enabled: bool,
}

/// The corrections making up w for one case and order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionSet {
    pub case: CaseId,
    pub order: u32,
    pub params: PhysicalParams,
    pub gardner_form: GardnerForm,
    pub terms: Vec<CorrectionTerm>,
}

fn term(label: &str, order: u32, factor: f64, kind: CorrectionKind) -> CorrectionTerm {
    CorrectionTerm { label: label.into(), order, factor, kind, enabled: true }
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

impl CorrectionSet {
    pub fn new(case: CaseId, order: u32, p: &PhysicalParams) -> Result<Self> {
        Self::with_form(case, order, p, GardnerForm::Consistent)
    }

    pub fn with_form(case: CaseId, order: u32, p: &PhysicalParams, form: GardnerForm) -> Result<Self> {
        use CorrectionKind::*;
        if order == 0 || order > case.max_order() {
            return Err(Error::Config(format!("{case:?} has corrections of order 1..={}, not {order}", case.max_order())));
        }
        let (a, b, g, d, tau) = (p.alpha, p.beta, p.gamma, p.delta, p.tau);
        let all = match case {
            CaseId::Case5 => vec![
                term("Qa", 1, a, Square(-0.25)),
                term("Qb", 1, b, Uxx(1.0 / 3.0)),
                term("Qg", 1, ratio(g, b), Int2Uyy(-0.5)),
                term("Qd", 1, d, Bottom),
            ],
            CaseId::Case6 => vec![
                term("Qb", 1, b, Uxx((2.0 - 3.0 * tau) / 6.0)),
                term("Qgb", 1, ratio(g, b), Int2Uyy(-0.5)),
                term("Qa", 2, a, Square(-0.25)),
                term("Qbb", 2, b * b, U4x((12.0 - 20.0 * tau - 15.0 * tau * tau) / 120.0)),
                term("Qg", 2, g, Uyy((2.0 - 3.0 * tau) / 12.0)),
                term("Qbg", 2, ratio(g * g, b * b), Int4U4y(0.375)),
                term("Qd", 2, d, Bottom),
            ],
            CaseId::Case7 => vec![
                term("Qa", 1, a, Square(-0.25)),
                term("Qgb", 1, ratio(g, b), Int2Uyy(-0.5)),
                term("Qb", 2, b, Uxx((2.0 - 3.0 * tau) / 6.0)),
                term("Qaa", 2, a * a, Cube(0.125)),
                term("Qagb", 2, ratio(a * g, b), MixedAgb { cubic: form == GardnerForm::WithCubic }),
                term("Qba2", 2, ratio(b * b, a * a), Zero),
                term("Qgb2", 2, ratio(g * g, b * b), Int4U4y(0.375)),
                term("Qd", 2, d, Bottom),
            ],
        };
        Ok(CorrectionSet {
            case,
            order,
            params: *p,
            gardner_form: form,
            terms: all.into_iter().filter(|t| t.order <= order).collect(),
        })
    }

    /// Disables one correction; unknown labels are an error.
    pub fn without(mut self, label: &str) -> Result<Self> {
        let t = self
            .terms
            .iter_mut()
            .find(|t| t.label == label)
            .ok_or_else(|| Error::Config(format!("no correction '{label}' in {:?}/order {}", self.case, self.order)))?;
        t.enabled = false;
        Ok(self)
    }

    /// Adds (γ/α)·c·∫∫u_yy to a first-order set, a candidate correction that
    /// compatibility should force to zero.
    pub fn with_trial_ga(mut self, c: f64) -> Self {
        let f = ratio(self.params.gamma, self.params.alpha);
        self.terms.push(term("Qga", 1, f, CorrectionKind::Int2Uyy(c)));
        self
    }

    pub fn labels(&self) -> Vec<&str> {
        self.terms.iter().map(|t| t.label.as_str()).collect()
    }

    /// One correction functional Q[u] (without its factor).
    pub fn functional(&self, label: &str, u: &Field2D, bathy: Option<&Bathymetry>) -> Result<Field2D> {
        let t = self
            .terms
            .iter()
            .find(|t| t.label == label)
            .ok_or_else(|| Error::Config(format!("no correction '{label}'")))?;
        eval_kind(t.kind, &GridCalculus::new(), u, bathy)
    }

    fn needs_zero_mean(&self) -> bool {
        self.terms.iter().any(|t| {
            t.enabled
                && matches!(t.kind, CorrectionKind::Int2Uyy(_) | CorrectionKind::Int4U4y(_) | CorrectionKind::MixedAgb { .. })
        })
    }

    fn assemble(&self, c: &GridCalculus, u: &Field2D, bathy: Option<&Bathymetry>) -> Result<Field2D> {
        let mut w = u.clone();
        for t in self.terms.iter().filter(|t| t.enabled && t.factor != 0.0) {
            w = w.axpy(t.factor, &eval_kind(t.kind, c, u, bathy)?);
        }
        Ok(w)
    }

    /// w = u + Σ factor·Q[u] over the enabled corrections.
    pub fn build_w(&self, u: &Field2D, bathy: Option<&Bathymetry>) -> Result<Field2D> {
        if self.needs_zero_mean() || bathy.is_some() {
            check_zero_x_mean(u)?;
        }
        self.assemble(&GridCalculus::new(), u, bathy)
    }

    /// d/dt w[u(t)] given u_t, by a Richardson-extrapolated central difference
    /// along u_t. Returns the field and the largest projected-out x-mean.
    pub fn w_t(&self, u: &Field2D, u_t: &Field2D, bathy: Option<&Bathymetry>) -> Result<(Field2D, f64)> {
        same_grid(u, u_t)?;
        let c = GridCalculus::new();
        let central = |h: f64| -> Result<Field2D> {
            let plus = self.assemble(&c, &u.axpy(h, u_t), bathy)?;
            let minus = self.assemble(&c, &u.axpy(-h, u_t), bathy)?;
            Ok(plus.sub(&minus).scale(0.5 / h))
        };
        let coarse = central(WT_STEP)?;
        let fine = central(0.5 * WT_STEP)?;
        Ok((fine.scale(4.0 / 3.0).axpy(-1.0 / 3.0, &coarse), c.dropped_mean()))
    }
}

fn int2<C: Calculus>(c: &C, f: &C::F) -> Result<C::F> {
    c.int_x_nl(&c.int_x_nl(f)?)
}

fn eval_kind(kind: CorrectionKind, c: &GridCalculus, u: &Field2D, bathy: Option<&Bathymetry>) -> Result<Field2D> {
    use CorrectionKind::*;
    Ok(match kind {
        Square(k) => u.mul(u).scale(k),
        Cube(k) => u.mul(u).mul(u).scale(k),
        Uxx(k) => c.d(u, 2, 0).scale(k),
        U4x(k) => c.d(u, 4, 0).scale(k),
        Uyy(k) => c.d(u, 0, 2).scale(k),
        Int2Uyy(k) => int2(c, &c.d(u, 0, 2))?.scale(k),
        Int4U4y(k) => int2(c, &int2(c, &c.d(u, 0, 4))?)?.scale(k),
        MixedAgb { cubic } => {
            let uyy = c.d(u, 0, 2);
            let a = int2(c, &c.d(&u.mul(&c.d(u, 0, 1)), 0, 1))?;
            let b = c.int_x_nl(&u.mul(&c.int_x_nl(&uyy)?))?;
            let mut q = a.scale(0.625).axpy(-0.375, &b);
            if cubic {
                let e = c.int_x_nl(&u.mul(&c.int_x_nl(&u.mul(u).mul(&uyy))?))?;
                q = q.axpy(-1.5, &e);
            }
            q
        }
        Bottom => match bathy {
            Some(b) => {
                let iu = c.int_x_nl(u)?;
                let g = u.grid;
                let mut out = Field2D::zeros(g);
                for ((i, j), v) in out.values.indexed_iter_mut() {
                    let (x, y) = (g.x(i), g.y(j));
                    *v = 0.25 * (2.0 * b.h(x, y) * u.values[[i, j]] + b.h_x(x) * iu.values[[i, j]]);
                }
                out
            }
            None => Field2D::zeros(u.grid),
        },
        Zero => Field2D::zeros(u.grid),
    })
}

/// (hw)_x = h w_x + h_x w with h, h_x taken analytically.
fn bottom_flux(w: &Field2D, b: &Bathymetry) -> Field2D {
    let wx = dxy(w, 1, 0);
    let g = w.grid;
    let mut out = Field2D::zeros(g);
    for ((i, j), v) in out.values.indexed_iter_mut() {
        let (x, y) = (g.x(i), g.y(j));
        *v = b.h(x, y) * wx.values[[i, j]] + b.h_x(x) * w.values[[i, j]];
    }
    out
}

/// Pointwise residuals of both surface equations.
#[derive(Debug, Clone)]
pub struct PairFields {
    pub r1: Field2D,
    pub r2: Field2D,
    pub dropped_mean: f64,
}

/// Evaluates the kinematic (r1) and dynamic (r2) surface equations of a case
/// for given u, u_t, w, w_t.
pub fn residual_pair_fields(
    case: CaseId,
    u: &Field2D,
    u_t: &Field2D,
    w: &Field2D,
    w_t: &Field2D,
    p: &PhysicalParams,
    bathy: Option<&Bathymetry>,
) -> Result<PairFields> {
    for f in [u_t, w, w_t] {
        same_grid(u, f)?;
    }
    if p.delta != 0.0 && bathy.is_none() {
        return Err(Error::Contract("δ ≠ 0 needs a bathymetry".into()));
    }
    let c = GridCalculus::new();
    let (a, b, g, d, tau) = (p.alpha, p.beta, p.gamma, p.delta, p.tau);
    let gb = ratio(g, b);
    let d_ = |f: &Field2D, i, j| c.d(f, i, j);
    let uw_x = d_(&u.mul(w), 1, 0);
    let ww_x = w.mul(&d_(w, 1, 0));
    let int_wyy = c.int_x_nl(&d_(w, 0, 2))?;

    let mut r1 = u_t.add(&d_(w, 1, 0)).axpy(a, &uw_x).axpy(-b / 6.0, &d_(w, 3, 0)).axpy(gb, &int_wyy);
    let mut r2 = w_t.add(&d_(u, 1, 0)).axpy(a, &ww_x);
    match case {
        CaseId::Case5 => {
            r2 = r2.axpy(-0.5 * b, &d_(w_t, 2, 0));
        }
        CaseId::Case6 => {
            r1 = r1.axpy(b * b / 120.0, &d_(w, 5, 0)).axpy(-g / 3.0, &d_(w, 1, 2));
            r2 = r2
                .axpy(-0.5 * b, &d_(w_t, 2, 0))
                .axpy(-b * tau, &d_(u, 3, 0))
                .axpy(b * b / 24.0, &d_(w_t, 4, 0))
                .axpy(-0.5 * g, &d_(w_t, 0, 2))
                .axpy(-g * tau, &d_(u, 1, 2));
        }
        CaseId::Case7 => {
            let ag = ratio(a * g, b);
            let int_wy = c.int_x_nl(&d_(w, 0, 1))?;
            let mixed1 = d_(u, 0, 1).mul(&int_wy).add(&u.mul(&int_wyy));
            r1 = r1.axpy(ag, &mixed1);
            r2 = r2
                .axpy(ag, &d_(w, 0, 1).mul(&int_wy))
                .axpy(-0.5 * b, &d_(w_t, 2, 0))
                .axpy(-b * tau, &d_(u, 3, 0));
        }
    }
    if let Some(bt) = bathy {
        if d != 0.0 {
            r1 = r1.axpy(-d, &bottom_flux(w, bt));
        }
    }
    Ok(PairFields { r1, r2, dropped_mean: c.dropped_mean() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairReport {
    pub r1_max: f64,
    pub r2_max: f64,
    pub diff_max: f64,
    pub dropped_mean: f64,
}

pub fn boussinesq_residual_pair(
    case: CaseId,
    u: &Field2D,
    u_t: &Field2D,
    w: &Field2D,
    w_t: &Field2D,
    p: &PhysicalParams,
    bathy: Option<&Bathymetry>,
) -> Result<PairReport> {
    let f = residual_pair_fields(case, u, u_t, w, w_t, p, bathy)?;
    Ok(PairReport {
        r1_max: f.r1.max_abs(),
        r2_max: f.r2.max_abs(),
        diff_max: f.r1.sub(&f.r2).max_abs(),
        dropped_mean: f.dropped_mean,
    })
}

/// The single equation a case reduces to at its highest order.
pub fn reduced_equation(case: CaseId, p: &PhysicalParams, form: GardnerForm) -> WaveEquation {
    let id = match case {
        CaseId::Case5 => EquationId::Kdv2p1,
        CaseId::Case6 => EquationId::FifthKdv2p1,
        CaseId::Case7 => EquationId::Gardner2p1,
    };
    WaveEquation::new(id, *p).with_gardner_form(form)
}

/// Spatial part N of u_t = −N(u) for the reduced equation of a case; terms
/// beyond the requested order are left out.
pub fn reduced_rhs(
    case: CaseId,
    order: u32,
    u: &Field2D,
    p: &PhysicalParams,
    form: GardnerForm,
    bathy: Option<&Bathymetry>,
) -> Result<Field2D> {
    let keep: Option<&[&str]> = match (case, order) {
        (CaseId::Case6, 1) => Some(&["u_x", "u_3x", "int u_yy"]),
        (CaseId::Case7, 1) => Some(&["u_x", "u u_x", "int u_yy"]),
        _ => None,
    };
    let table = reduced_equation(case, p, form).coefficients();
    let c = GridCalculus::new();
    let mut n = Field2D::zeros(u.grid);
    for e in &table.entries {
        let Some(op) = e.op else { continue };
        if e.value == 0.0 || keep.is_some_and(|k| !k.contains(&e.label.as_str())) {
            continue;
        }
        n = n.axpy(e.value, &op.eval(&c, u)?);
    }
    let bottom_in_order = case == CaseId::Case5 || order >= 2;
    if let (Some(b), true) = (bathy, bottom_in_order) {
        n = n.sub(&bottom_term(u, b, p.delta));
    }
    Ok(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatRow {
    pub eps: f64,
    pub diff_max: f64,
    pub r1_max: f64,
    pub r2_max: f64,
    pub dropped_mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatReport {
    pub case: CaseId,
    pub order: u32,
    pub profile: String,
    pub disabled: Vec<String>,
    pub rows: Vec<CompatRow>,
    /// log-log slope of max|r1 − r2| against ε.
    pub slope: f64,
    pub slope_r1: f64,
    pub slope_r2: f64,
    /// Smallest slope accepted as the claimed order.
    pub threshold: f64,
    pub pass: bool,
}

impl CompatReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,diff_max,r1_max,r2_max,dropped_mean\n");
        for r in &self.rows {
            s.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", r.eps, r.diff_max, r.r1_max, r.r2_max, r.dropped_mean));
        }
        s.push_str(&format!("# slope,{:.6}\n", self.slope));
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompatConfig {
    pub case: CaseId,
    pub order: u32,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub gardner_form: GardnerForm,
    /// Corrections switched off to demonstrate loss of compatibility.
    #[serde(default)]
    pub disabled: Vec<String>,
    /// Coefficient of the candidate (γ/α)∫∫u_yy correction (first-order sets).
    #[serde(default)]
    pub trial_ga: f64,
}

impl CompatConfig {
    pub fn new(case: CaseId, order: u32) -> Self {
        CompatConfig {
            case,
            order,
            epsilons: vec![0.1, 0.05, 0.025, 0.0125],
            tau: 0.0,
            gardner_form: GardnerForm::Consistent,
            disabled: vec![],
            trial_ga: 0.0,
        }
    }

    pub fn threshold(&self) -> f64 {
        if self.order == 1 {
            1.9
        } else {
            2.85
        }
    }
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    num / den
}

/// One point of the sweep: w from u, u_t from the reduced equation, w_t by
/// differentiating w along u_t.
pub fn compat_point(
    cfg: &CompatConfig,
    eps: f64,
    u: &Field2D,
    bathy: Option<&Bathymetry>,
) -> Result<CompatRow> {
    let p = cfg.case.scaled_params(eps, cfg.tau, bathy.is_some());
    let mut set = CorrectionSet::with_form(cfg.case, cfg.order, &p, cfg.gardner_form)?;
    if cfg.trial_ga != 0.0 {
        set = set.with_trial_ga(cfg.trial_ga);
    }
    for l in &cfg.disabled {
        set = set.without(l)?;
    }
    let w = set.build_w(u, bathy)?;
    let u_t = reduced_rhs(cfg.case, cfg.order, u, &p, cfg.gardner_form, bathy)?.scale(-1.0);
    let (w_t, dropped_w) = set.w_t(u, &u_t, bathy)?;
    let pair = residual_pair_fields(cfg.case, u, &u_t, &w, &w_t, &p, bathy)?;
    let mask = bathy.filter(|b| b.needs_interior_only(&u.grid)).map(|b| b.interior_mask(&u.grid, crate::bathymetry::BREAK_MARGIN));
    let max_on = |f: &Field2D| -> f64 {
        f.values
            .indexed_iter()
            .filter(|((i, _), _)| mask.as_ref().map_or(true, |m| m[*i]))
            .fold(0.0_f64, |acc, (_, v)| acc.max(v.abs()))
    };
    Ok(CompatRow {
        eps,
        diff_max: max_on(&pair.r1.sub(&pair.r2)),
        r1_max: max_on(&pair.r1),
        r2_max: max_on(&pair.r2),
        dropped_mean: pair.dropped_mean.max(dropped_w),
    })
}

/// Sweeps ε and fits the convergence order of the pair mismatch.
pub fn compatibility_order_test(
    cfg: &CompatConfig,
    u: &Field2D,
    profile_name: &str,
    bathy: Option<&Bathymetry>,
) -> Result<CompatReport> {
    if cfg.epsilons.len() < 4 {
        return Err(Error::Config("need at least four ε values".into()));
    }
    if cfg.epsilons.windows(2).any(|w| w[1] >= w[0]) || cfg.epsilons.iter().any(|&e| e <= 0.0) {
        return Err(Error::Config("ε values must be positive and decreasing".into()));
    }
    let rows = cfg.epsilons.iter().map(|&e| compat_point(cfg, e, u, bathy)).collect::<Result<Vec<_>>>()?;
    let eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let col = |f: fn(&CompatRow) -> f64| loglog_slope(&eps, &rows.iter().map(f).collect::<Vec<_>>());
    let slope = col(|r| r.diff_max);
    let threshold = cfg.threshold();
    Ok(CompatReport {
        case: cfg.case,
        order: cfg.order,
        profile: profile_name.into(),
        disabled: cfg.disabled.clone(),
        slope,
        slope_r1: col(|r| r.r1_max),
        slope_r2: col(|r| r.r2_max),
        threshold,
        pass: slope >= threshold,
        rows,
    })
}

/// Box and profile used for soliton sweeps: a periodized sech²(x + y/2) of
/// unit amplitude on a 12.8 × 25.6 box, x-mean removed.
pub fn soliton_profile(nx: usize, ny: usize) -> Result<Field2D> {
    let (k, l, lx) = (1.0, 0.5, 12.8);
    let grid = Grid2D::new(nx, ny, lx, k * lx / l)?;
    let period = k * lx;
    let f = Field2D::from_fn(grid, |x, y| {
        let xi = k * (x - 0.5 * lx) + l * y;
        (-4..=4).map(|n| (xi - n as f64 * period).cosh().powi(-2)).sum()
    });
    let mean = f.mean();
    Ok(f.map(|v| v - mean))
}

/// Sum of three Fourier modes on a 4π × 4π box. The x-wavenumbers are
/// distinct odd multiples of ½, so no product of up to three modes lands on
/// kx = 0 and projected antiderivatives stay exact.
pub fn random_profile(nx: usize, ny: usize, seed: u64) -> Result<Field2D> {
    let l = 4.0 * std::f64::consts::PI;
    let grid = Grid2D::new(nx, ny, l, l)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut odd = [1.0, 3.0, 5.0, 7.0];
    odd.shuffle(&mut rng);
    let modes: Vec<(f64, f64, f64, f64)> = odd[..3]
        .iter()
        .map(|&m| {
            let ky = *[-2.0, -1.0, 1.0, 2.0].choose(&mut rng).expect("non-empty") * 0.5;
            let amp = rng.gen_range(0.2..0.5);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            (0.5 * m, ky, amp, phase)
        })
        .collect();
    Ok(Field2D::from_fn(grid, |x, y| modes.iter().map(|(kx, ky, a, ph)| a * (kx * x + ky * y + ph).cos()).sum()))
}

/// φ(z) = Σ zⁿ cₙ(x, y).
#[derive(Debug, Clone)]
pub struct PotentialSeries {
    pub terms: Vec<(u32, Field2D)>,
}

impl PotentialSeries {
    pub fn eval(&self, z: f64) -> Field2D {
        let mut out = Field2D::zeros(self.terms[0].1.grid);
        for (n, c) in &self.terms {
            out = out.axpy(z.powi(*n as i32), c);
        }
        out
    }

    pub fn d2z(&self, z: f64) -> Field2D {
        let mut out = Field2D::zeros(self.terms[0].1.grid);
        for (n, c) in self.terms.iter().filter(|(n, _)| *n >= 2) {
            out = out.axpy((n * (n - 1)) as f64 * z.powi(*n as i32 - 2), c);
        }
        out
    }

    /// β φ_xx + γ φ_yy + φ_zz at height z.
    pub fn laplace_residual(&self, z: f64, p: &PhysicalParams) -> Field2D {
        let phi = self.eval(z);
        dxy(&phi, 2, 0).scale(p.beta).axpy(p.gamma, &dxy(&phi, 0, 2)).add(&self.d2z(z))
    }
}

/// The truncated potential series of a case, in powers of z.
pub fn potential_series(case: CaseId, f: &Field2D, bathy: Option<&Bathymetry>, p: &PhysicalParams) -> Result<PotentialSeries> {
    if bathy.is_some() && p.delta == 0.0 {
        log::warn!("bathymetry given with δ = 0; bottom term vanishes");
    }
    let (b, g) = (p.beta, p.gamma);
    let d = |i, j| dxy(f, i, j);
    let mut terms = vec![(0, f.clone()), (2, d(2, 0).scale(-0.5 * b).axpy(-0.5 * g, &d(0, 2)))];
    match case {
        CaseId::Case5 | CaseId::Case7 => terms.push((4, d(4, 0).scale(b * b / 24.0))),
        CaseId::Case6 => {
            terms.push((4, d(4, 0).scale(b * b / 24.0).axpy(2.0 * b * g / 24.0, &d(2, 2))));
            terms.push((6, d(6, 0).scale(-b.powi(3) / 720.0)));
        }
    }
    if let Some(bt) = bathy {
        // (h f_x)_x = h_x f_x + h f_xx since h_xx = 0 inside segments
        let (fx, fxx) = (d(1, 0), d(2, 0));
        let g2 = f.grid;
        let mut c1 = Field2D::zeros(g2);
        for ((i, j), v) in c1.values.indexed_iter_mut() {
            let (x, y) = (g2.x(i), g2.y(j));
            *v = b * p.delta * (bt.h_x(x) * fx.values[[i, j]] + bt.h(x, y) * fxx.values[[i, j]]);
        }
        terms.push((1, c1));
    }
    terms.sort_by_key(|(n, _)| *n);
    Ok(PotentialSeries { terms })
}

pub fn velocity_potential(
    case: CaseId,
    f: &Field2D,
    bathy: Option<&Bathymetry>,
    z: f64,
    p: &PhysicalParams,
) -> Result<Field2D> {
    if !(0.0..=1.0 + p.alpha.abs() + 1e-12).contains(&z) {
        return Err(Error::Domain(format!("z = {z} outside [0, 1 + α]")));
    }
    Ok(potential_series(case, f, bathy, p)?.eval(z))
}

/// Order at which the flat-bottom truncation of each case first fails the
/// field equation under the case's ε scaling.
pub fn laplace_expected_order(case: CaseId) -> f64 {
    match case {
        CaseId::Case5 => 3.0,
        CaseId::Case6 => 4.0,
        CaseId::Case7 => 5.0,
    }
}

/// ε-sweep of max|β φ_xx + γ φ_yy + φ_zz| at height z; returns (rows, slope).
pub fn laplace_order_test(case: CaseId, f: &Field2D, z: f64, epsilons: &[f64]) -> Result<(Vec<(f64, f64)>, f64)> {
    let rows = epsilons
        .iter()
        .map(|&e| {
            let p = case.scaled_params(e, 0.0, false);
            Ok((e, potential_series(case, f, None, &p)?.laplace_residual(z, &p).max_abs()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (x, y): (Vec<f64>, Vec<f64>) = rows.iter().copied().unzip();
    Ok((rows, loglog_slope(&x, &y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_gives_zero_w() {
        let g = Grid2D::new(16, 8, 6.0, 6.0).unwrap();
        let p = CaseId::Case5.scaled_params(0.1, 0.0, false);
        let w = CorrectionSet::new(CaseId::Case5, 1, &p).unwrap().build_w(&Field2D::zeros(g), None).unwrap();
        assert_eq!(w.max_abs(), 0.0);
        assert!(CorrectionSet::new(CaseId::Case5, 2, &p).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(3)).collect();
        assert!((loglog_slope(&x, &y) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn potential_at_surface_bottom() {
        let f = random_profile(32, 16, 1).unwrap();
        let p = CaseId::Case6.scaled_params(0.1, 0.0, false);
        let phi = velocity_potential(CaseId::Case6, &f, None, 0.0, &p).unwrap();
        assert_eq!(phi.sub(&f).max_abs(), 0.0);
    }
}
