//! Closed-form traveling waves u = F(ξ), ξ = kx + ly − ωt: solitons, cnoidal
//! waves, dn² ± √m·cn·dn superpositions and their KP counterparts.

use crate::elliptic::{e_over_k, ellip_k, jacobi};
use crate::error::{Error, Result};
use crate::operators::{Field2D, Grid2D};
use crate::params::PhysicalParams;
use crate::profile::Poly;
use serde::{Deserialize, Serialize};

/// Cell-centred samples per period used for the reference amplitude table.
pub const TABLE_SAMPLES_PER_PERIOD: usize = 256;
/// Samples used for the dense crest-minus-trough amplitude.
pub const DENSE_SAMPLES: usize = 1 << 14;
/// Half-width of the ξ window used for solitons.
pub const SOLITON_WINDOW: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionKind {
    Soliton,
    CnoidalMath,
    CnoidalPhys,
    SuperpositionMathPlus,
    SuperpositionMathMinus,
    SuperpositionPhysPlus,
    SuperpositionPhysMinus,
    KpSoliton,
    KpSuperposition,
}

impl SolutionKind {
    pub fn parse(s: &str) -> Result<Self> {
        use SolutionKind::*;
        Ok(match s {
            "soliton" => Soliton,
            "cnoidal-math" => CnoidalMath,
            "cnoidal-phys" => CnoidalPhys,
            "superposition-math" | "superposition-math-plus" => SuperpositionMathPlus,
            "superposition-math-minus" => SuperpositionMathMinus,
            "superposition-phys" | "superposition-phys-plus" => SuperpositionPhysPlus,
            "superposition-phys-minus" => SuperpositionPhysMinus,
            "kp-soliton" => KpSoliton,
            "kp-superposition" => KpSuperposition,
            _ => return Err(Error::Config(format!("unknown solution family '{s}'"))),
        })
    }

    pub fn is_soliton(self) -> bool {
        matches!(self, SolutionKind::Soliton | SolutionKind::KpSoliton)
    }

    pub fn is_superposition(self) -> bool {
        use SolutionKind::*;
        matches!(
            self,
            SuperpositionMathPlus | SuperpositionMathMinus | SuperpositionPhysPlus | SuperpositionPhysMinus | KpSuperposition
        )
    }

    fn sign(self) -> f64 {
        match self {
            SolutionKind::SuperpositionMathMinus | SolutionKind::SuperpositionPhysMinus => -1.0,
            _ => 1.0,
        }
    }
}

/// Coordinates the wave lives in: the physical (x, y, t) of the (2+1)-D KdV
/// equation, or one of the two KP normalisations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum Frame {
    #[default]
    Physical,
    KpClassical { lambda: f64 },
    KpMoving,
}

impl Frame {
    /// (dispersion coefficient, λ) of `∂x(u_t + 6uu_x + c u_xxx) + λu_yy = 0`.
    pub fn kp_coefficients(&self, p: &PhysicalParams) -> Option<(f64, f64)> {
        match *self {
            Frame::Physical => None,
            Frame::KpClassical { lambda } => Some((1.0, lambda)),
            Frame::KpMoving => Some((p.beta / p.alpha, 4.0 * p.gamma / (3.0 * p.alpha * p.beta))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub k: f64,
    pub l: f64,
    pub omega: f64,
    /// Elliptic parameter (modulus squared); 1 for solitons.
    pub m: f64,
    pub amplitude_a: f64,
    pub offset_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionFamily {
    pub kind: SolutionKind,
    pub wave: WaveParams,
    pub params: PhysicalParams,
    #[serde(default)]
    pub frame: Frame,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveMetrics {
    pub amplitude: f64,
    pub speed: f64,
    pub wavelength_x: Option<f64>,
    pub wavelength_y: Option<f64>,
    pub direction: f64,
}

/// JSON form of a family, carrying the elliptic-parameter convention.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub parameter_convention: String,
    pub family: SolutionFamily,
}

pub const PARAMETER_CONVENTION: &str = "m is the elliptic parameter (modulus squared): cn(u, m), K(m), E(m)";

fn check_k(k: f64) -> Result<()> {
    if k == 0.0 || !k.is_finite() {
        return Err(Error::Domain(format!("wavenumber k = {k} must be finite and nonzero")));
    }
    Ok(())
}

fn check_m(m: f64, open_at_one: bool) -> Result<()> {
    let ok = m > 0.0 && if open_at_one { m < 1.0 } else { m <= 1.0 };
    if !ok {
        let range = if open_at_one { "(0, 1)" } else { "(0, 1]" };
        return Err(Error::Domain(format!("elliptic parameter m = {m} outside {range}")));
    }
    Ok(())
}

fn transverse(k: f64, l: f64, p: &PhysicalParams) -> f64 {
    l * l * p.gamma / (2.0 * k * p.beta)
}

/// Line soliton A sech²(ξ) of the (2+1)-D KdV equation.
pub fn soliton_params(k: f64, l: f64, p: &PhysicalParams) -> Result<WaveParams> {
    check_k(k)?;
    p.validate()?;
    Ok(WaveParams {
        k,
        l,
        omega: k + 2.0 * k.powi(3) * p.beta / 3.0 + transverse(k, l, p),
        m: 1.0,
        amplitude_a: 4.0 * k * k * p.beta / (3.0 * p.alpha),
        offset_b: 0.0,
    })
}

/// Cnoidal wave A cn²(ξ, m) + B; `physical` selects the zero-mean offset.
pub fn cnoidal_params(k: f64, l: f64, m: f64, p: &PhysicalParams, physical: bool) -> Result<WaveParams> {
    check_k(k)?;
    check_m(m, false)?;
    p.validate()?;
    let base = 4.0 * k * k * p.beta / (3.0 * p.alpha);
    let (omega, b) = if physical {
        let ek = e_over_k(m)?;
        (k - 2.0 * k.powi(3) * p.beta * (ek + (m - 2.0) / 3.0) + transverse(k, l, p), -base * (ek + m - 1.0))
    } else {
        (k + 2.0 * k.powi(3) * p.beta * (2.0 * m - 1.0) / 3.0 + transverse(k, l, p), 0.0)
    };
    Ok(WaveParams { k, l, omega, m, amplitude_a: base * m, offset_b: b })
}

/// Superposition A/2 (dn² ± √m cn dn) + B.
pub fn superposition_params(k: f64, l: f64, m: f64, p: &PhysicalParams, physical: bool) -> Result<WaveParams> {
    check_k(k)?;
    check_m(m, physical)?;
    p.validate()?;
    let a = 4.0 * k * k * p.beta / (3.0 * p.alpha);
    let (omega, b) = if physical {
        let ek = e_over_k(m)?;
        (k - k.powi(3) * p.beta * (ek + (m - 5.0) / 6.0) + transverse(k, l, p), -0.5 * a * ek)
    } else {
        (k + k.powi(3) * p.beta * (5.0 - m) / 6.0 + transverse(k, l, p), 0.0)
    };
    Ok(WaveParams { k, l, omega, m, amplitude_a: a, offset_b: b })
}

/// KP soliton or (+) superposition for `∂x(u_t + 6uu_x + c u_xxx) + λu_yy = 0`.
///
/// The superposition frequency carries the transverse shift λl²/k in the same
/// way as the soliton.
pub fn kp_solution_params(
    k: f64,
    l: f64,
    m: f64,
    kind: SolutionKind,
    frame: Frame,
    p: &PhysicalParams,
) -> Result<WaveParams> {
    check_k(k)?;
    let (c, lambda) = frame
        .kp_coefficients(p)
        .ok_or_else(|| Error::Contract("KP solutions need a KP frame".into()))?;
    if frame == Frame::KpMoving {
        p.validate()?;
    }
    let a = 2.0 * c * k * k;
    let shift = lambda * l * l / k;
    match kind {
        SolutionKind::KpSoliton => {
            Ok(WaveParams { k, l, omega: 4.0 * c * k.powi(3) + shift, m: 1.0, amplitude_a: a, offset_b: 0.0 })
        }
        SolutionKind::KpSuperposition => {
            check_m(m, false)?;
            let ek = e_over_k(m)?;
            Ok(WaveParams {
                k,
                l,
                omega: c * k.powi(3) * (5.0 - m - 6.0 * ek) + shift,
                m,
                amplitude_a: a,
                offset_b: -c * k * k * ek,
            })
        }
        _ => Err(Error::Contract(format!("{kind:?} is not a KP family"))),
    }
}

impl SolutionFamily {
    pub fn soliton(k: f64, l: f64, p: PhysicalParams) -> Result<Self> {
        Ok(SolutionFamily { kind: SolutionKind::Soliton, wave: soliton_params(k, l, &p)?, params: p, frame: Frame::Physical })
    }

    pub fn cnoidal(k: f64, l: f64, m: f64, p: PhysicalParams, physical: bool) -> Result<Self> {
        let kind = if physical { SolutionKind::CnoidalPhys } else { SolutionKind::CnoidalMath };
        Ok(SolutionFamily { kind, wave: cnoidal_params(k, l, m, &p, physical)?, params: p, frame: Frame::Physical })
    }

    pub fn superposition(k: f64, l: f64, m: f64, p: PhysicalParams, physical: bool, plus: bool) -> Result<Self> {
        let kind = match (physical, plus) {
            (false, true) => SolutionKind::SuperpositionMathPlus,
            (false, false) => SolutionKind::SuperpositionMathMinus,
            (true, true) => SolutionKind::SuperpositionPhysPlus,
            (true, false) => SolutionKind::SuperpositionPhysMinus,
        };
        Ok(SolutionFamily { kind, wave: superposition_params(k, l, m, &p, physical)?, params: p, frame: Frame::Physical })
    }

    pub fn kp(kind: SolutionKind, k: f64, l: f64, m: f64, frame: Frame, p: PhysicalParams) -> Result<Self> {
        Ok(SolutionFamily { kind, wave: kp_solution_params(k, l, m, kind, frame, &p)?, params: p, frame })
    }

    /// Builds any family from its kind; `m` is ignored by solitons.
    pub fn build(kind: SolutionKind, k: f64, l: f64, m: f64, p: PhysicalParams, lambda: Option<f64>) -> Result<Self> {
        use SolutionKind::*;
        match kind {
            Soliton => Self::soliton(k, l, p),
            CnoidalMath => Self::cnoidal(k, l, m, p, false),
            CnoidalPhys => Self::cnoidal(k, l, m, p, true),
            SuperpositionMathPlus => Self::superposition(k, l, m, p, false, true),
            SuperpositionMathMinus => Self::superposition(k, l, m, p, false, false),
            SuperpositionPhysPlus => Self::superposition(k, l, m, p, true, true),
            SuperpositionPhysMinus => Self::superposition(k, l, m, p, true, false),
            KpSoliton | KpSuperposition => {
                let frame = match lambda {
                    Some(lambda) => Frame::KpClassical { lambda },
                    None => Frame::KpMoving,
                };
                Self::kp(kind, k, l, m, frame, p)
            }
        }
    }

    /// The same wave written in the moving KP frame x̂ = √(3/2)(x − t),
    /// t̂ = ¼√(3/2) α t, where the (2+1)-D KdV equation becomes
    /// `∂x̂(u_t̂ + 6uu_x̂ + (β/α)u_x̂x̂x̂) + (4γ/3αβ)u_yy = 0`.
    pub fn to_kp_moving(&self) -> Result<Self> {
        if self.frame != Frame::Physical || matches!(self.kind, SolutionKind::KpSoliton | SolutionKind::KpSuperposition) {
            return Err(Error::Contract("only physical-frame KdV families map to the moving KP frame".into()));
        }
        let s = 1.5_f64.sqrt();
        let w = self.wave;
        let wave = WaveParams { k: w.k / s, omega: 4.0 * (w.omega - w.k) / (s * self.params.alpha), ..w };
        Ok(SolutionFamily { wave, frame: Frame::KpMoving, ..*self })
    }

    /// Elliptic parameter passed to the Jacobi functions.
    pub fn jacobi_m(&self) -> f64 {
        if self.kind.is_soliton() {
            1.0
        } else {
            self.wave.m
        }
    }

    /// Period in ξ; `None` for solitons.
    pub fn period(&self) -> Option<f64> {
        if self.kind.is_soliton() {
            return None;
        }
        let k = ellip_k(self.wave.m).ok()?;
        Some(if self.kind.is_superposition() { 4.0 * k } else { 2.0 * k })
    }

    /// Profile F as a polynomial in (sn, cn, dn), offset included.
    pub fn profile_poly(&self) -> Poly {
        let w = &self.wave;
        let shape = if self.kind.is_superposition() {
            let sign = self.kind.sign();
            Poly::monomial(0.5 * w.amplitude_a, [0, 0, 2])
                .add(&Poly::monomial(0.5 * sign * w.amplitude_a * w.m.sqrt(), [0, 1, 1]))
        } else {
            Poly::monomial(w.amplitude_a, [0, 2, 0])
        };
        shape.add(&Poly::constant(w.offset_b))
    }

    pub fn xi(&self, x: f64, y: f64, t: f64) -> f64 {
        self.wave.k * x + self.wave.l * y - self.wave.omega * t
    }

    /// F(ξ).
    pub fn profile(&self, xi: f64) -> f64 {
        let j = jacobi(xi, self.jacobi_m()).expect("family holds a validated m");
        let w = &self.wave;
        let v = if self.kind.is_superposition() {
            0.5 * w.amplitude_a * (j.dn * j.dn + self.kind.sign() * w.m.sqrt() * j.cn * j.dn)
        } else {
            w.amplitude_a * j.cn * j.cn
        };
        v + w.offset_b
    }

    pub fn evaluate(&self, x: f64, y: f64, t: f64) -> f64 {
        self.profile(self.xi(x, y, t))
    }

    /// Samples the wave on a grid. Solitons are summed over x-images so the
    /// sampled field is periodic in x.
    pub fn sample(&self, grid: &Grid2D, t: f64) -> Field2D {
        let images: i32 = if self.kind.is_soliton() { 3 } else { 0 };
        Field2D::from_fn(*grid, |x, y| {
            (-images..=images).map(|n| self.evaluate(x - n as f64 * grid.length_x, y, t)).sum()
        })
    }

    /// Crest-minus-trough amplitude by dense sampling of one period (or
    /// crest minus far field for solitons).
    pub fn dense_amplitude(&self) -> f64 {
        match self.period() {
            Some(p) => {
                let (lo, hi) = (0..=DENSE_SAMPLES)
                    .map(|i| self.profile(p * i as f64 / DENSE_SAMPLES as f64))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                hi - lo
            }
            None => {
                let crest = (0..=DENSE_SAMPLES)
                    .map(|i| self.profile(SOLITON_WINDOW * (2.0 * i as f64 / DENSE_SAMPLES as f64 - 1.0)))
                    .fold(f64::NEG_INFINITY, f64::max);
                crest - (self.profile_poly().eval_minus_infinity())
            }
        }
    }

    /// Crest-minus-trough over `n` cell-centred samples of one period,
    /// ξ_i = (i + ½)·P/n. Falls back to the dense value for solitons.
    pub fn sampled_amplitude(&self, n: usize) -> f64 {
        match self.period() {
            Some(p) => {
                let (lo, hi) = (0..n)
                    .map(|i| self.profile(p * (i as f64 + 0.5) / n as f64))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                hi - lo
            }
            None => self.dense_amplitude(),
        }
    }

    pub fn wave_metrics(&self) -> WaveMetrics {
        let w = &self.wave;
        let period = self.period();
        WaveMetrics {
            amplitude: self.dense_amplitude(),
            speed: w.omega / (w.k * w.k + w.l * w.l).sqrt(),
            wavelength_x: period.map(|p| p / w.k.abs()),
            wavelength_y: period.filter(|_| w.l != 0.0).map(|p| p / w.l.abs()),
            direction: (w.l / w.k).atan(),
        }
    }

    /// Mean of u over one (L_x, L_y) cell by a periodic n×n trapezoid rule;
    /// `None` for solitons.
    pub fn cell_mean(&self, n: usize) -> Option<f64> {
        let p = self.period()?;
        let lx = p / self.wave.k.abs();
        if self.wave.l == 0.0 {
            return Some((0..n).map(|i| self.evaluate(lx * i as f64 / n as f64, 0.0, 0.0)).sum::<f64>() / n as f64);
        }
        let ly = p / self.wave.l.abs();
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                sum += self.evaluate(lx * i as f64 / n as f64, ly * j as f64 / n as f64, 0.0);
            }
        }
        Some(sum / (n * n) as f64)
    }

    /// Relative residuals of the algebraic conditions that a plane-wave
    /// ansatz of this family must satisfy.
    pub fn constraint_residuals(&self) -> Vec<(String, f64)> {
        let w = &self.wave;
        let p = &self.params;
        let (k, l, om, a, b) = (w.k, w.l, w.omega, w.amplitude_a, w.offset_b);
        let rel = |terms: &[f64]| {
            let scale = terms.iter().fold(0.0_f64, |s, t| s.max(t.abs()));
            if scale == 0.0 {
                0.0
            } else {
                terms.iter().sum::<f64>().abs() / scale
            }
        };
        if let Some((c, lambda)) = self.frame.kp_coefficients(p) {
            let ek = if self.kind.is_soliton() { 0.0 } else { e_over_k(w.m).unwrap_or(f64::NAN) };
            let mut out = vec![("amplitude".to_string(), rel(&[a, -2.0 * c * k * k]))];
            if self.kind.is_soliton() {
                out.push(("dispersion".into(), rel(&[om, -4.0 * c * k.powi(3), -lambda * l * l / k])));
            } else {
                out.push(("offset".into(), rel(&[b, c * k * k * ek])));
                out.push((
                    "dispersion".into(),
                    rel(&[om, -c * k.powi(3) * (5.0 - w.m), 6.0 * c * k.powi(3) * ek, -lambda * l * l / k]),
                ));
            }
            return out;
        }
        let (al, be, ga) = (p.alpha, p.beta, p.gamma);
        let m = self.jacobi_m();
        if self.kind.is_superposition() {
            vec![
                ("amplitude".into(), rel(&[a, -4.0 * k * k * be / (3.0 * al)])),
                (
                    "dispersion".into(),
                    rel(&[
                        -3.0 * be * k * k * 3.0 * al * b,
                        -6.0 * be * k * k,
                        be * be * k.powi(4) * (m - 5.0),
                        6.0 * be * k * om,
                        -3.0 * ga * l * l,
                    ]),
                ),
            ]
        } else {
            vec![
                (
                    "dispersion".into(),
                    rel(&[
                        4.0 * be * be * k.powi(4),
                        -8.0 * be * be * k.powi(4) * m,
                        -6.0 * be * k * k,
                        6.0 * be * k * om,
                        -3.0 * ga * l * l,
                        -9.0 * al * be * b * k * k,
                    ]),
                ),
                ("amplitude".into(), rel(&[12.0 * be * be * k.powi(4) * m, -9.0 * al * a * be * k * k])),
            ]
        }
    }

    pub fn to_document(&self) -> SolutionDocument {
        SolutionDocument { parameter_convention: PARAMETER_CONVENTION.into(), family: *self }
    }
}
