//! Complete elliptic integrals and Jacobi elliptic functions.
//!
//! Every function takes the elliptic *parameter* `m` (the modulus squared),
//! so `cn(u, m)` has quarter period `K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ)`.

use crate::error::{Error, Result};
use std::f64::consts::FRAC_PI_2;

/// Below this distance from `m = 1` the hyperbolic closed forms are used.
pub const HYPERBOLIC_SWITCH: f64 = 1e-12;

/// Values of sn, cn and dn at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jacobi {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
}

fn check_closed(m: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&m) {
        return Err(Error::Domain(format!("elliptic parameter m = {m} outside [0, 1]")));
    }
    Ok(())
}

/// K(m) and E(m) together from one arithmetic-geometric-mean sweep.
pub fn ellip_ke(m: f64) -> Result<(f64, f64)> {
    check_closed(m)?;
    if m == 1.0 {
        return Err(Error::Divergence("K(m) diverges at m = 1".into()));
    }
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut pow = 0.5;
    let mut sum = pow * c * c;
    for _ in 0..64 {
        if c.abs() <= 1e-17 * a {
            break;
        }
        let an = 0.5 * (a + b);
        // c² / 4a' rather than (a − b)/2, which cancels.
        c = c * c / (4.0 * an);
        b = (a * b).sqrt();
        a = an;
        pow *= 2.0;
        sum += pow * c * c;
    }
    let k = FRAC_PI_2 / a;
    Ok((k, k * (1.0 - sum)))
}

/// Complete elliptic integral of the first kind, `0 ≤ m < 1`.
pub fn ellip_k(m: f64) -> Result<f64> {
    ellip_ke(m).map(|(k, _)| k)
}

/// Complete elliptic integral of the second kind, `0 ≤ m ≤ 1`.
pub fn ellip_e(m: f64) -> Result<f64> {
    check_closed(m)?;
    if m == 1.0 {
        return Ok(1.0);
    }
    ellip_ke(m).map(|(_, e)| e)
}

/// The ratio E(m)/K(m), continuous up to m = 1 where it vanishes.
pub fn e_over_k(m: f64) -> Result<f64> {
    check_closed(m)?;
    if m == 1.0 {
        return Ok(0.0);
    }
    let (k, e) = ellip_ke(m)?;
    Ok(e / k)
}

/// sn, cn, dn at `u` for parameter `m`.
///
/// Uses the descending Landen (Gauss) transformation after reducing `u`
/// modulo the real period 4K(m).
pub fn jacobi(u: f64, m: f64) -> Result<Jacobi> {
    check_closed(m)?;
    if !u.is_finite() {
        return Err(Error::Domain(format!("jacobi argument u = {u} is not finite")));
    }
    if m == 0.0 {
        return Ok(Jacobi { sn: u.sin(), cn: u.cos(), dn: 1.0 });
    }
    let mc = 1.0 - m;
    if mc < HYPERBOLIC_SWITCH {
        let sech = 1.0 / u.cosh();
        return Ok(Jacobi { sn: u.tanh(), cn: sech, dn: sech });
    }
    let period = 4.0 * ellip_k(m)?;
    let u = u - period * (u / period).round();
    Ok(landen(u, mc))
}

fn landen(u: f64, mc: f64) -> Jacobi {
    const TOL: f64 = 1e-9;
    let mut em = [0.0_f64; 16];
    let mut en = [0.0_f64; 16];
    let mut a = 1.0_f64;
    let mut emc = mc;
    let mut c = 1.0;
    let mut levels = 0;
    for i in 0..16 {
        levels = i + 1;
        em[i] = a;
        emc = emc.sqrt();
        en[i] = emc;
        c = 0.5 * (a + emc);
        if (a - emc).abs() <= TOL * a {
            break;
        }
        emc *= a;
        a = c;
    }
    let v = u * c;
    let mut sn = v.sin();
    let mut cn = v.cos();
    let mut dn = 1.0;
    if sn != 0.0 {
        let mut a = cn / sn;
        c *= a;
        for i in (0..levels).rev() {
            let b = em[i];
            a *= c;
            c *= dn;
            dn = (en[i] + a) / (b + a);
            a = c / b;
        }
        let s = 1.0 / (c * c + 1.0).sqrt();
        sn = if sn >= 0.0 { s } else { -s };
        cn = c * sn;
    }
    Jacobi { sn, cn, dn }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn circular_and_hyperbolic_limits() {
        assert_eq!(ellip_k(0.0).unwrap(), FRAC_PI_2);
        assert!((ellip_e(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(ellip_e(1.0).unwrap(), 1.0);
        let j = jacobi(0.7, 0.0).unwrap();
        assert!((j.sn - 0.7_f64.sin()).abs() < 1e-15);
        let j = jacobi(0.7, 1.0).unwrap();
        assert!((j.cn - 1.0 / 0.7_f64.cosh()).abs() < 1e-15);
    }

    #[test]
    fn quarter_period_values() {
        let m = 0.7;
        let k = ellip_k(m).unwrap();
        let j = jacobi(k, m).unwrap();
        assert!((j.sn - 1.0).abs() < 1e-14);
        assert!(j.cn.abs() < 1e-14);
        assert!((j.dn - (1.0 - m).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(ellip_k(1.0), Err(Error::Divergence(_))));
        assert!(matches!(ellip_k(-0.1), Err(Error::Domain(_))));
        assert!(matches!(ellip_e(1.5), Err(Error::Domain(_))));
        assert!(matches!(jacobi(0.0, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn legendre_relation() {
        // E K' + E' K − K K' = π/2
        let m = 0.3;
        let (k, e) = ellip_ke(m).unwrap();
        let (kp, ep) = ellip_ke(1.0 - m).unwrap();
        assert!((e * kp + ep * k - k * kp - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn large_arguments_are_reduced() {
        let m = 0.9;
        let k = ellip_k(m).unwrap();
        let a = jacobi(0.3, m).unwrap();
        let b = jacobi(0.3 + 400.0 * k, m).unwrap();
        assert!((a.sn - b.sn).abs() < 1e-11);
        assert!((a.cn - b.cn).abs() < 1e-11);
    }
}
