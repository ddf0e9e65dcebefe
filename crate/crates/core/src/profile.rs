//! Polynomials in (sn, cn, dn) with exact ξ-differentiation.
//!
//! Every traveling-wave profile used here is such a polynomial, and so are all
//! of its derivatives and products: sn' = cn dn, cn' = −sn dn, dn' = −m sn cn.

use crate::elliptic::Jacobi;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    terms: BTreeMap<[u32; 3], f64>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: f64) -> Self {
        Poly::monomial(c, [0, 0, 0])
    }

    /// `c · sn^e[0] · cn^e[1] · dn^e[2]`
    pub fn monomial(c: f64, e: [u32; 3]) -> Self {
        let mut p = Poly::zero();
        p.push(e, c);
        p
    }

    fn push(&mut self, e: [u32; 3], c: f64) {
        if c == 0.0 {
            return;
        }
        let v = self.terms.entry(e).or_insert(0.0);
        *v += c;
        if *v == 0.0 {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.push(*e, *c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            out.push(*e, c * s);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.push([ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]], ca * cb);
            }
        }
        out
    }

    /// d/dξ for elliptic parameter `m`.
    pub fn derivative(&self, m: f64) -> Poly {
        let mut out = Poly::zero();
        for (&[a, b, d], &c) in &self.terms {
            if a > 0 {
                out.push([a - 1, b + 1, d + 1], c * a as f64);
            }
            if b > 0 {
                out.push([a + 1, b - 1, d + 1], -c * b as f64);
            }
            if d > 0 {
                out.push([a + 1, b + 1, d - 1], -m * c * d as f64);
            }
        }
        out
    }

    pub fn nth_derivative(&self, m: f64, n: u32) -> Poly {
        (0..n).fold(self.clone(), |p, _| p.derivative(m))
    }

    pub fn eval(&self, j: &Jacobi) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * j.sn.powi(e[0] as i32) * j.cn.powi(e[1] as i32) * j.dn.powi(e[2] as i32))
            .sum()
    }

    /// Limit ξ → −∞ at m = 1, where sn → −1 and cn, dn → 0.
    pub fn eval_minus_infinity(&self) -> f64 {
        self.eval(&Jacobi { sn: -1.0, cn: 0.0, dn: 0.0 })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::jacobi;

    #[test]
    fn derivative_matches_finite_difference() {
        let m = 0.6;
        let p = Poly::monomial(1.5, [1, 2, 0]).add(&Poly::monomial(-0.3, [0, 1, 3]));
        let dp = p.derivative(m);
        let h = 1e-5;
        for &x in &[0.1, 0.9, 2.3] {
            let fd = (p.eval(&jacobi(x + h, m).unwrap()) - p.eval(&jacobi(x - h, m).unwrap())) / (2.0 * h);
            assert!((fd - dp.eval(&jacobi(x, m).unwrap())).abs() < 1e-8);
        }
    }

    #[test]
    fn cancellation_removes_terms() {
        let p = Poly::monomial(1.0, [0, 2, 0]);
        assert!(p.add(&p.scale(-1.0)).is_zero());
    }
}
