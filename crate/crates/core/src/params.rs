use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Ordering regimes of the small parameters that reduce to a single wave equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseId {
    /// α ∼ β, γ ∼ β², δ ∼ β.
    Case5,
    /// α ∼ γ ∼ β², δ = 0 or δ ∼ β².
    Case6,
    /// β ∼ α², γ ∼ α³, δ = 0 or δ ∼ α².
    Case7,
}

impl CaseId {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "5" | "case5" => Ok(CaseId::Case5),
            "6" | "case6" => Ok(CaseId::Case6),
            "7" | "case7" => Ok(CaseId::Case7),
            _ => Err(Error::Config(format!("unknown case '{s}' (expected 5, 6 or 7)"))),
        }
    }

    /// Highest perturbation order with a known correction set.
    pub fn max_order(self) -> u32 {
        match self {
            CaseId::Case5 => 1,
            CaseId::Case6 | CaseId::Case7 => 2,
        }
    }

    /// Parameter set for one point of an ε-sweep.
    pub fn scaled_params(self, eps: f64, tau: f64, with_bottom: bool) -> PhysicalParams {
        let (alpha, beta, gamma, delta) = match self {
            CaseId::Case5 => (eps, eps, eps * eps, eps),
            CaseId::Case6 => (eps * eps, eps, eps * eps, eps * eps),
            CaseId::Case7 => (eps, eps * eps, eps.powi(3), eps * eps),
        };
        PhysicalParams {
            alpha,
            beta,
            gamma,
            delta: if with_bottom { delta } else { 0.0 },
            tau,
            regime: Some(self),
        }
    }
}

/// Small parameters: amplitude α, long wave β, transverse γ, bottom δ, Bond number τ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub tau: f64,
    #[serde(default)]
    pub regime: Option<CaseId>,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams { alpha: 0.15, beta: 0.1, gamma: 0.05, delta: 0.0, tau: 0.0, regime: None }
    }
}

impl PhysicalParams {
    /// Validated constructor; logs a warning for every regime ratio far from O(1).
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64, tau: f64) -> Result<Self> {
        let p = PhysicalParams { alpha, beta, gamma, delta, tau, regime: None };
        p.validate()?;
        Ok(p)
    }

    pub fn with_regime(mut self, case: CaseId) -> Self {
        self.regime = Some(case);
        for w in self.regime_warnings() {
            log::warn!("{w}");
        }
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("tau", self.tau),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} = {v} is not finite")));
            }
        }
        if self.alpha <= 0.0 || self.beta <= 0.0 {
            return Err(Error::Domain("alpha and beta must be positive".into()));
        }
        if self.gamma < 0.0 || self.delta < 0.0 || self.tau < 0.0 {
            return Err(Error::Domain("gamma, delta and tau must be non-negative".into()));
        }
        Ok(())
    }

    /// Ratios that the regime expects to be O(1), with a message for each one
    /// outside [0.1, 10].
    pub fn regime_warnings(&self) -> Vec<String> {
        let Some(case) = self.regime else { return vec![] };
        let (a, b, g, d) = (self.alpha, self.beta, self.gamma, self.delta);
        let ratios: Vec<(&str, f64)> = match case {
            CaseId::Case5 => vec![("alpha/beta", a / b), ("gamma/beta^2", g / (b * b)), ("delta/beta", d / b)],
            CaseId::Case6 => vec![("alpha/beta^2", a / (b * b)), ("gamma/beta^2", g / (b * b)), ("delta/beta^2", d / (b * b))],
            CaseId::Case7 => vec![("beta/alpha^2", b / (a * a)), ("gamma/alpha^3", g / a.powi(3)), ("delta/alpha^2", d / (a * a))],
        };
        ratios
            .into_iter()
            .filter(|(name, r)| !(name.starts_with("delta") && *r == 0.0) && (*r < 0.1 || *r > 10.0))
            .map(|(name, r)| format!("{case:?}: {name} = {r:.3e} is not O(1)"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(PhysicalParams::new(0.15, 0.1, 0.05, 0.0, 0.0).is_ok());
        assert!(PhysicalParams::new(0.0, 0.1, 0.05, 0.0, 0.0).is_err());
        assert!(PhysicalParams::new(0.1, 0.1, -1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn sweep_params_follow_the_ordering() {
        let p = CaseId::Case7.scaled_params(0.1, 0.0, false);
        assert!((p.beta - 0.01).abs() < 1e-15 && (p.gamma - 1e-3).abs() < 1e-15);
        assert!(p.regime_warnings().is_empty());
        let off = PhysicalParams { regime: Some(CaseId::Case5), ..PhysicalParams::new(1.0, 0.01, 0.0, 0.0, 0.0).unwrap() };
        assert_eq!(off.regime_warnings().len(), 2);
    }
}
