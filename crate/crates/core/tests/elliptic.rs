mod common;

use dispersia_core::elliptic::{e_over_k, ellip_e, ellip_k, jacobi};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn complete_integrals_match_quadrature() {
    for i in 0..50 {
        let m = 0.99 * i as f64 / 49.0;
        assert!((ellip_k(m).unwrap() - common::k_quad(m)).abs() < 1e-10, "K at m = {m}");
        assert!((ellip_e(m).unwrap() - common::e_quad(m)).abs() < 1e-10, "E at m = {m}");
    }
}

#[test]
fn known_values() {
    assert!((ellip_k(0.0).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert!((ellip_e(0.0).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    assert!((ellip_k(0.5).unwrap() - 1.854_074_677_301_372).abs() < 1e-14);
    assert!((ellip_e(0.5).unwrap() - 1.350_643_881_047_675_5).abs() < 1e-14);
    assert_eq!(ellip_e(1.0).unwrap(), 1.0);
    assert_eq!(e_over_k(1.0).unwrap(), 0.0);
}

#[test]
fn domain_errors() {
    assert!(ellip_k(1.0).is_err());
    assert!(ellip_k(-0.1).unwrap_err().is_validation());
    assert!(jacobi(0.3, 1.5).is_err());
    assert!(jacobi(f64::NAN, 0.5).is_err());
}

/// φ ↦ u = F(φ, m) by quadrature, then sn(u) = sin φ, cn(u) = cos φ.
#[test]
fn inverts_the_incomplete_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..100 {
        let m: f64 = rng.gen_range(0.0..0.95);
        let phi: f64 = rng.gen_range(-7.0..7.0);
        let u = common::f_quad(phi, m);
        let j = jacobi(u, m).unwrap();
        assert!((j.sn - phi.sin()).abs() < 1e-10, "sn at m = {m}, φ = {phi}");
        assert!((j.cn - phi.cos()).abs() < 1e-10, "cn at m = {m}, φ = {phi}");
        assert!((j.dn - (1.0 - m * phi.sin().powi(2)).sqrt()).abs() < 1e-10);
    }
}

#[test]
fn trigonometric_and_hyperbolic_limits() {
    for u in [-3.0, -0.4, 0.0, 1.1, 5.0] {
        let j = jacobi(u, 0.0).unwrap();
        assert!((j.sn - f64::sin(u)).abs() < 1e-15 && (j.cn - f64::cos(u)).abs() < 1e-15 && j.dn == 1.0);
        let h = jacobi(u, 1.0).unwrap();
        assert!((h.sn - f64::tanh(u)).abs() < 1e-15);
        assert!((h.cn - 1.0 / f64::cosh(u)).abs() < 1e-15 && h.cn == h.dn);
        let near = jacobi(u, 1.0 - 1e-10).unwrap();
        assert!((near.sn - h.sn).abs() < 1e-8 && (near.dn - h.dn).abs() < 1e-8);
    }
}

fn d6(f: impl Fn(f64) -> f64, u: f64) -> f64 {
    let h = 2e-3;
    (-f(u - 3.0 * h) + 9.0 * f(u - 2.0 * h) - 45.0 * f(u - h) + 45.0 * f(u + h) - 9.0 * f(u + 2.0 * h) + f(u + 3.0 * h))
        / (60.0 * h)
}

proptest! {
    #[test]
    fn pythagorean_identities(u in -50.0..50.0f64, m in 0.0..1.0f64) {
        let j = jacobi(u, m).unwrap();
        prop_assert!((j.sn * j.sn + j.cn * j.cn - 1.0).abs() < 1e-12);
        prop_assert!((j.dn * j.dn + m * j.sn * j.sn - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivatives(u in -10.0..10.0f64, m in 0.0..0.99f64) {
        let j = jacobi(u, m).unwrap();
        prop_assert!((d6(|v| jacobi(v, m).unwrap().sn, u) - j.cn * j.dn).abs() < 1e-10);
        prop_assert!((d6(|v| jacobi(v, m).unwrap().cn, u) + j.sn * j.dn).abs() < 1e-10);
        prop_assert!((d6(|v| jacobi(v, m).unwrap().dn, u) + m * j.sn * j.cn).abs() < 1e-10);
    }

    #[test]
    fn half_period_shift(u in -10.0..10.0f64, m in 0.0..0.99f64) {
        let k = ellip_k(m).unwrap();
        let (a, b) = (jacobi(u, m).unwrap(), jacobi(u + 2.0 * k, m).unwrap());
        prop_assert!((a.cn + b.cn).abs() < 1e-11);
        prop_assert!((a.sn + b.sn).abs() < 1e-11);
        prop_assert!((a.dn - b.dn).abs() < 1e-11);
    }

    #[test]
    fn parity(u in -10.0..10.0f64, m in 0.0..1.0f64) {
        let (a, b) = (jacobi(u, m).unwrap(), jacobi(-u, m).unwrap());
        prop_assert!((a.sn + b.sn).abs() < 1e-14 && (a.cn - b.cn).abs() < 1e-14);
    }
}
