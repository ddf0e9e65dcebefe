//! Registry of the single wave equations, their coefficient tables, and
//! residual evaluation on grids and on exact plane waves.

use crate::bathymetry::{bottom_term, Bathymetry, BREAK_MARGIN};
use crate::calculus::{Calculus, Gauge, GridCalculus, PlaneCalculus, PlaneExpr};
use crate::error::{Error, Result};
use crate::operators::{same_grid, Field2D};
use crate::params::PhysicalParams;
use crate::solutions::{Frame, SolutionFamily, SOLITON_WINDOW};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EquationId {
    /// u_t + u_x + (3/2)αuu_x + (β/6)u_xxx + (γ/2β)∫u_yy dx = 0
    Kdv2p1,
    Kdv2p1Bottom,
    /// ∂x(u_t + u_x + (3/2)αuu_x + (β/6)u_xxx) + (γ/2β)u_yy = 0
    KpFixedFrame,
    /// ∂x(u_t + 6uu_x + u_xxx) + λu_yy = 0
    KpClassical,
    /// ∂x(u_t + 6uu_x + (β/α)u_xxx) + (4γ/3αβ)u_yy = 0
    KpMoving,
    FifthKdv2p1,
    FifthKdv2p1Bottom,
    /// x-derivative of the fifth-order equation.
    FifthKpType,
    Gardner2p1,
    Gardner2p1Bottom,
    Gardner1p1,
}

impl EquationId {
    pub const ALL: [EquationId; 11] = [
        EquationId::Kdv2p1,
        EquationId::Kdv2p1Bottom,
        EquationId::KpFixedFrame,
        EquationId::KpClassical,
        EquationId::KpMoving,
        EquationId::FifthKdv2p1,
        EquationId::FifthKdv2p1Bottom,
        EquationId::FifthKpType,
        EquationId::Gardner2p1,
        EquationId::Gardner2p1Bottom,
        EquationId::Gardner1p1,
    ];

    pub fn name(self) -> &'static str {
        use EquationId::*;
        match self {
            Kdv2p1 => "kdv21",
            Kdv2p1Bottom => "kdv21-bottom",
            KpFixedFrame => "kp-fixed",
            KpClassical => "kp-classical",
            KpMoving => "kp-moving",
            FifthKdv2p1 => "kdv5-21",
            FifthKdv2p1Bottom => "kdv5-21-bottom",
            FifthKpType => "kp5",
            Gardner2p1 => "gardner21",
            Gardner2p1Bottom => "gardner21-bottom",
            Gardner1p1 => "gardner11",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        EquationId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown equation '{s}'")))
    }

    pub fn has_bottom(self) -> bool {
        matches!(self, EquationId::Kdv2p1Bottom | EquationId::FifthKdv2p1Bottom | EquationId::Gardner2p1Bottom)
    }

    /// The flat-bottom equation this one extends.
    pub fn flat(self) -> EquationId {
        match self {
            EquationId::Kdv2p1Bottom => EquationId::Kdv2p1,
            EquationId::FifthKdv2p1Bottom => EquationId::FifthKdv2p1,
            EquationId::Gardner2p1Bottom => EquationId::Gardner2p1,
            e => e,
        }
    }

    /// Residual is ∂x(u_t + …) + … rather than u_t + ….
    pub fn is_kp_form(self) -> bool {
        matches!(self, EquationId::KpFixedFrame | EquationId::KpClassical | EquationId::KpMoving | EquationId::FifthKpType)
    }
}

/// Which version of the Gardner αγ/β bracket to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum GardnerForm {
    /// Without the cubic u∫u²u_yy dx term, which has no source at second
    /// order and breaks compatibility of the underlying pair.
    #[default]
    Consistent,
    /// With (3/2)(αγ/β)u∫u²u_yy dx included.
    WithCubic,
}

/// Building blocks of the residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TermOp {
    Ux,
    U3x,
    U5x,
    UUx,
    U2Ux,
    Uyy,
    UxYY,
    UxxYY,
    /// ∫u_yy dx
    IntUyy,
    /// ∫∫u_4y
    Int2U4y,
    /// ∫∫∫u_4y
    Int3U4y,
    /// ∫(u_y² + uu_yy) dx, assembled as ∫(uu_y)_y dx
    IntDyUUy,
    /// u∫u_yy dx
    UIntUyy,
    /// u∫u²u_yy dx
    UIntU2Uyy,
    /// u_y∫u_y dx
    UyIntUy,
    /// u_x∫∫u_yy
    UxInt2Uyy,
}

impl TermOp {
    pub fn eval<C: Calculus>(self, c: &C, u: &C::F) -> Result<C::F> {
        use TermOp::*;
        Ok(match self {
            Ux => c.d(u, 1, 0),
            U3x => c.d(u, 3, 0),
            U5x => c.d(u, 5, 0),
            UUx => c.mul(u, &c.d(u, 1, 0)),
            U2Ux => c.mul(&c.mul(u, u), &c.d(u, 1, 0)),
            Uyy => c.d(u, 0, 2),
            UxYY => c.d(u, 1, 2),
            UxxYY => c.d(u, 2, 2),
            IntUyy => c.int_x_dy(u, 1, 2)?,
            Int2U4y => c.int_x_dy(u, 2, 4)?,
            Int3U4y => c.int_x_dy(u, 3, 4)?,
            IntDyUUy => c.int_x_nl(&c.d(&c.mul(u, &c.d(u, 0, 1)), 0, 1))?,
            UIntUyy => c.mul(u, &c.int_x_dy(u, 1, 2)?),
            UIntU2Uyy => c.mul(u, &c.int_x_nl(&c.mul(&c.mul(u, u), &c.d(u, 0, 2)))?),
            UyIntUy => c.mul(&c.d(u, 0, 1), &c.int_x_dy(u, 1, 1)?),
            UxInt2Uyy => c.mul(&c.d(u, 1, 0), &c.int_x_dy(u, 2, 2)?),
        })
    }

    /// Fourier symbol with d = i·kx, e = i·ky; `None` for nonlinear terms.
    pub fn symbol(self, d: Complex64, e: Complex64) -> Option<Complex64> {
        use TermOp::*;
        Some(match self {
            Ux => d,
            U3x => d.powu(3),
            U5x => d.powu(5),
            Uyy => e * e,
            UxYY => d * e * e,
            UxxYY => d * d * e * e,
            IntUyy => e * e / d,
            Int2U4y => e.powu(4) / (d * d),
            Int3U4y => e.powu(4) / d.powu(3),
            _ => return None,
        })
    }

    /// Grid evaluation of a single term.
    pub fn eval_grid(self, u: &Field2D) -> Result<Field2D> {
        self.eval(&GridCalculus::new(), u)
    }
}

/// One named coefficient of an equation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub label: String,
    pub value: f64,
    /// Operator multiplied by the coefficient; `None` for derived constants.
    pub op: Option<TermOp>,
    /// Inside the outer ∂x of a KP-form equation.
    pub inside_dx: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub equation: EquationId,
    pub entries: Vec<Coefficient>,
}

impl CoefficientTable {
    pub fn get(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|c| c.label == label).map(|c| c.value)
    }
}

/// An equation together with everything needed to evaluate it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveEquation {
    pub id: EquationId,
    pub params: PhysicalParams,
    /// λ of the classical KP equation.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub gardner_form: GardnerForm,
    /// Keep −(γ²/8β²)∫∫u_4y in the KP-type fifth-order equation.
    #[serde(default = "yes")]
    pub include_gamma2: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ResidualMode {
    PlaneWave,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Location {
    Grid { x: f64, y: f64 },
    Xi(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equation: EquationId,
    pub max_abs: f64,
    pub rms: f64,
    pub location_of_max: Location,
    pub mode: ResidualMode,
    /// Statistics exclude cells next to bathymetry breaks.
    pub interior_only: bool,
    /// Largest x-mean projected out of a nonlinear integrand.
    pub dropped_mean: f64,
    pub flags: Vec<String>,
}

impl ResidualReport {
    /// Statistics of a pointwise residual, optionally restricted to columns
    /// where `mask` is true.
    pub fn from_field(equation: EquationId, r: &Field2D, mask: Option<&[bool]>, dropped_mean: f64) -> Self {
        let g = r.grid;
        let (mut max, mut at, mut sum, mut n) = (0.0_f64, (0, 0), 0.0, 0usize);
        for ((i, j), v) in r.values.indexed_iter() {
            if mask.is_some_and(|m| !m[i]) {
                continue;
            }
            if v.abs() > max {
                max = v.abs();
                at = (i, j);
            }
            sum += v * v;
            n += 1;
        }
        ResidualReport {
            equation,
            max_abs: max,
            rms: if n > 0 { (sum / n as f64).sqrt() } else { 0.0 },
            location_of_max: Location::Grid { x: g.x(at.0), y: g.y(at.1) },
            mode: ResidualMode::Grid,
            interior_only: mask.is_some(),
            dropped_mean,
            flags: vec![],
        }
    }
}

fn coef(label: &str, value: f64, op: TermOp, inside_dx: bool) -> Coefficient {
    Coefficient { label: label.into(), value, op: Some(op), inside_dx }
}

/// Coefficient table of `eq` under default options.
pub fn coefficients(eq: EquationId, p: &PhysicalParams) -> CoefficientTable {
    WaveEquation::new(eq, *p).coefficients()
}

impl WaveEquation {
    pub fn new(id: EquationId, params: PhysicalParams) -> Self {
        WaveEquation { id, params, lambda: None, gardner_form: GardnerForm::Consistent, include_gamma2: true }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = Some(lambda);
        self
    }

    pub fn with_gardner_form(mut self, form: GardnerForm) -> Self {
        self.gardner_form = form;
        self
    }

    pub fn with_gamma2(mut self, on: bool) -> Self {
        self.include_gamma2 = on;
        self
    }

    pub fn coefficients(&self) -> CoefficientTable {
        use EquationId::*;
        use TermOp::*;
        let p = &self.params;
        let (a, b, g, tau) = (p.alpha, p.beta, p.gamma, p.tau);
        let c3 = b * (1.0 - 3.0 * tau) / 6.0;
        let c5 = b * b * (19.0 - 30.0 * tau - 45.0 * tau * tau) / 360.0;
        let cxyy = g * (1.0 - 3.0 * tau) / 4.0;
        let cg2 = -g * g / (8.0 * b * b);
        let lam = g / (2.0 * b);
        let ag = a * g / b;
        let mut e = match self.id.flat() {
            Kdv2p1 => vec![
                coef("u_x", 1.0, Ux, false),
                coef("u u_x", 1.5 * a, UUx, false),
                coef("u_3x", b / 6.0, U3x, false),
                coef("int u_yy", lam, IntUyy, false),
            ],
            KpFixedFrame => vec![
                coef("u_x", 1.0, Ux, true),
                coef("u u_x", 1.5 * a, UUx, true),
                coef("u_3x", b / 6.0, U3x, true),
                coef("lambda", lam, Uyy, false),
            ],
            KpClassical => vec![
                coef("u u_x", 6.0, UUx, true),
                coef("u_3x", 1.0, U3x, true),
                coef("lambda", self.lambda.unwrap_or(f64::NAN), Uyy, false),
            ],
            KpMoving => vec![
                coef("u u_x", 6.0, UUx, true),
                coef("u_3x", b / a, U3x, true),
                coef("lambda", 4.0 * g / (3.0 * a * b), Uyy, false),
            ],
            FifthKdv2p1 => vec![
                coef("u_x", 1.0, Ux, false),
                coef("u_3x", c3, U3x, false),
                coef("int u_yy", lam, IntUyy, false),
                coef("u u_x", 1.5 * a, UUx, false),
                coef("u_5x", c5, U5x, false),
                coef("u_xyy", cxyy, UxYY, false),
                coef("int3 u_4y", cg2, Int3U4y, false),
            ],
            FifthKpType => vec![
                coef("u_x", 1.0, Ux, true),
                coef("u_3x", c3, U3x, true),
                coef("u u_x", 1.5 * a, UUx, true),
                coef("u_5x", c5, U5x, true),
                coef("u_xyy", cxyy, UxYY, true),
                coef("lambda", lam, Uyy, false),
                coef("int2 u_4y", if self.include_gamma2 { cg2 } else { 0.0 }, Int2U4y, false),
            ],
            Gardner2p1 => vec![
                coef("u_x", 1.0, Ux, false),
                coef("u u_x", 1.5 * a, UUx, false),
                coef("int u_yy", lam, IntUyy, false),
                coef("u^2 u_x", -0.375 * a * a, U2Ux, false),
                coef("u_3x", c3, U3x, false),
                coef("ag: int (u_y^2 + u u_yy)", ag / 8.0, IntDyUUy, false),
                coef("ag: u int u_yy", ag / 8.0, UIntUyy, false),
                coef(
                    "ag: u int u^2 u_yy",
                    if self.gardner_form == GardnerForm::WithCubic { 1.5 * ag } else { 0.0 },
                    UIntU2Uyy,
                    false,
                ),
                coef("ag: u_y int u_y", ag, UyIntUy, false),
                coef("ag: u_x int2 u_yy", -0.5 * ag, UxInt2Uyy, false),
                coef("int3 u_4y", cg2, Int3U4y, false),
            ],
            Gardner1p1 => vec![
                coef("u_x", 1.0, Ux, false),
                coef("u u_x", 1.5 * a, UUx, false),
                coef("u^2 u_x", -0.375 * a * a, U2Ux, false),
                coef("u_3x", c3, U3x, false),
            ],
            _ => unreachable!("flat() maps bottom tags away"),
        };
        if self.id.has_bottom() {
            e.push(Coefficient { label: "bottom: 2h u_x + h_x u".into(), value: -0.25 * p.delta, op: None, inside_dx: false });
        }
        CoefficientTable { equation: self.id, entries: e }
    }

    fn check_lambda(&self) -> Result<()> {
        if self.id == EquationId::KpClassical && self.lambda.is_none() {
            return Err(Error::Contract("kp-classical needs λ".into()));
        }
        Ok(())
    }

    /// R = T(u_t) + S(u) assembled against any calculus; T is the identity or ∂x.
    pub fn assemble<C: Calculus>(&self, c: &C, u: &C::F, u_t: &C::F) -> Result<C::F> {
        self.check_lambda()?;
        let table = self.coefficients();
        let mut inside: Vec<(f64, C::F)> = vec![(1.0, u_t.clone())];
        let mut outside: Vec<(f64, C::F)> = vec![];
        for e in table.entries.iter().filter(|e| e.value != 0.0) {
            let Some(op) = e.op else { continue };
            let f = op.eval(c, u)?;
            if e.inside_dx {
                inside.push((e.value, f));
            } else {
                outside.push((e.value, f));
            }
        }
        let refs: Vec<(f64, &C::F)> = inside.iter().map(|(a, f)| (*a, f)).collect();
        let inner = c.lin(&refs);
        let head = if self.id.is_kp_form() { c.d(&inner, 1, 0) } else { inner };
        let mut all: Vec<(f64, &C::F)> = vec![(1.0, &head)];
        all.extend(outside.iter().map(|(a, f)| (*a, f)));
        Ok(c.lin(&all))
    }

    /// Pointwise grid residual and the largest projected-out x-mean.
    pub fn residual_field(&self, u: &Field2D, u_t: &Field2D, bathy: Option<&Bathymetry>) -> Result<(Field2D, f64)> {
        same_grid(u, u_t)?;
        match (self.id.has_bottom(), bathy) {
            (true, None) => return Err(Error::Contract(format!("{} requires a bathymetry", self.id.name()))),
            (false, Some(_)) => return Err(Error::Contract(format!("{} is a flat-bottom equation", self.id.name()))),
            _ => {}
        }
        let c = GridCalculus::new();
        let mut r = self.assemble(&c, u, u_t)?;
        if let Some(b) = bathy {
            r = r.add(&bottom_term(u, b, self.params.delta));
        }
        Ok((r, c.dropped_mean()))
    }

    /// Grid residual with u_t supplied by the caller.
    pub fn residual_grid(&self, u: &Field2D, u_t: &Field2D, bathy: Option<&Bathymetry>) -> Result<ResidualReport> {
        let (r, dropped) = self.residual_field(u, u_t, bathy)?;
        let mut flags = vec![];
        let mask = match bathy {
            Some(b) if b.wrap_mismatch(&u.grid) > 1e-12 => Some(b.interior_mask(&u.grid, BREAK_MARGIN)),
            _ => None,
        };
        if let Some(b) = bathy {
            if b.depends_on_y() {
                flags.push("bathymetry depends on y".into());
            }
        }
        if dropped > 0.0 {
            flags.push(format!("projected x-mean {dropped:.3e} out of nonlinear integrands"));
        }
        let mut rep = ResidualReport::from_field(self.id, &r, mask.as_deref(), dropped);
        rep.flags = flags;
        Ok(rep)
    }

    fn check_plane(&self, s: &SolutionFamily) -> Result<()> {
        use EquationId::*;
        if self.id.has_bottom() {
            return Err(Error::Contract("plane-wave mode needs a flat-bottom equation".into()));
        }
        let ok = match self.id {
            KpClassical => matches!(s.frame, Frame::KpClassical { .. }),
            KpMoving => s.frame == Frame::KpMoving,
            Gardner1p1 => s.frame == Frame::Physical && s.wave.l == 0.0,
            _ => s.frame == Frame::Physical,
        };
        if !ok {
            return Err(Error::Contract(format!(
                "{:?} in frame {:?} (l = {}) cannot be checked against {}",
                s.kind,
                s.frame,
                s.wave.l,
                self.id.name()
            )));
        }
        Ok(())
    }

    /// ξ-reduced residual of a plane wave, sampled over one period (or
    /// [−20, 20] for solitons).
    pub fn residual_plane(&self, s: &SolutionFamily, xi_samples: usize) -> Result<ResidualReport> {
        self.check_plane(s)?;
        let mut eq = *self;
        eq.params = s.params;
        if let (EquationId::KpClassical, Frame::KpClassical { lambda }) = (eq.id, s.frame) {
            eq.lambda = eq.lambda.or(Some(lambda));
        }
        let m = s.jacobi_m();
        let period = s.period();
        let c = PlaneCalculus {
            k: s.wave.k,
            l: s.wave.l,
            m,
            gauge: period.map_or(Gauge::Decaying, Gauge::Periodic),
        };
        let u = PlaneExpr { poly: s.profile_poly(), level: 0 };
        let u_t = PlaneExpr { poly: s.profile_poly().scale(-s.wave.omega), level: 1 };
        let r = c.materialize(&eq.assemble(&c, &u, &u_t)?);
        let n = xi_samples.max(2);
        let (mut max, mut at, mut sum) = (0.0_f64, 0.0, 0.0);
        for i in 0..n {
            let xi = match period {
                Some(p) => p * i as f64 / n as f64,
                None => SOLITON_WINDOW * (2.0 * i as f64 / (n - 1) as f64 - 1.0),
            };
            let v = r.eval(&crate::elliptic::jacobi(xi, m)?);
            if v.abs() > max {
                max = v.abs();
                at = xi;
            }
            sum += v * v;
        }
        Ok(ResidualReport {
            equation: self.id,
            max_abs: max,
            rms: (sum / n as f64).sqrt(),
            location_of_max: Location::Xi(at),
            mode: ResidualMode::PlaneWave,
            interior_only: false,
            dropped_mean: 0.0,
            flags: vec![],
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameDirection {
    ToMoving,
    ToFixed,
}

/// x̂ = √(3/2)(x − t), t̂ = ¼√(3/2) α t, and its inverse.
pub fn kp_transform(x: f64, t: f64, p: &PhysicalParams, direction: FrameDirection) -> (f64, f64) {
    let s = 1.5_f64.sqrt();
    match direction {
        FrameDirection::ToMoving => (s * (x - t), 0.25 * s * p.alpha * t),
        FrameDirection::ToFixed => {
            let t0 = 4.0 * t / (s * p.alpha);
            (x / s + t0, t0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> PhysicalParams {
        PhysicalParams::new(0.15, 0.1, 0.05, 0.0, 0.0).unwrap()
    }

    #[test]
    fn coefficient_examples() {
        assert_eq!(coefficients(EquationId::KpFixedFrame, &p()).get("lambda"), Some(0.25));
        let q = PhysicalParams { tau: 0.0, ..p() };
        let c5 = coefficients(EquationId::FifthKdv2p1, &q).get("u_5x").unwrap();
        assert!((c5 - 19.0 / 360.0 * 0.01).abs() < 1e-17);
        let q = PhysicalParams { tau: 1.0 / 3.0, ..p() };
        assert!(coefficients(EquationId::Gardner1p1, &q).get("u_3x").unwrap().abs() < 1e-17);
        let moving = coefficients(EquationId::KpMoving, &p()).get("lambda").unwrap();
        assert!((moving - 4.0 * 0.05 / (3.0 * 0.15 * 0.1)).abs() < 1e-14);
    }

    #[test]
    fn names_round_trip() {
        for e in EquationId::ALL {
            assert_eq!(EquationId::parse(e.name()).unwrap(), e);
        }
    }

    #[test]
    fn kp_transform_examples() {
        let (x, t) = kp_transform(1.0, 0.0, &p(), FrameDirection::ToMoving);
        assert!((x - 1.5_f64.sqrt()).abs() < 1e-15 && t == 0.0);
        let (x, _) = kp_transform(2.5, 2.5, &p(), FrameDirection::ToMoving);
        assert_eq!(x, 0.0);
    }

    #[test]
    fn soliton_plane_residual() {
        let s = SolutionFamily::soliton(1.0, 0.5, p()).unwrap();
        let eq = WaveEquation::new(EquationId::Kdv2p1, p());
        assert!(eq.residual_plane(&s, 2001).unwrap().max_abs < 1e-10);
        let mut bad = s;
        bad.wave.omega += 0.01;
        assert!(eq.residual_plane(&bad, 2001).unwrap().max_abs > 1e-3);
    }

    #[test]
    fn incompatible_pairs_are_rejected() {
        let s = SolutionFamily::soliton(1.0, 0.5, p()).unwrap();
        let eq = WaveEquation::new(EquationId::KpMoving, p());
        assert!(matches!(eq.residual_plane(&s, 10), Err(Error::Contract(_))));
        let eq = WaveEquation::new(EquationId::Gardner1p1, p());
        assert!(eq.residual_plane(&s, 10).is_err());
    }
}
