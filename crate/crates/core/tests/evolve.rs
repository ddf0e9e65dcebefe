use dispersia_core::evolve::{linear_symbol, project_initial, run, step, EvolutionConfig, Integrator};
use dispersia_core::{EquationId, Field2D, Grid2D, PhysicalParams, SolutionFamily, WaveEquation};
use proptest::prelude::*;

fn soliton_setup(nx: usize, ny: usize) -> (SolutionFamily, Grid2D, PhysicalParams) {
    let p = PhysicalParams::default();
    let s = SolutionFamily::soliton(1.0, 0.0, p).unwrap();
    (s, Grid2D::new(nx, ny, 40.0, 20.0).unwrap(), p)
}

fn advance(it: &Integrator, u: &Field2D, n: usize) -> Field2D {
    (0..n).fold(u.clone(), |v, _| it.step(&v).unwrap())
}

/// With α = 0, cos(kx x + ky y − ωt) with ω = kx − βkx³/6 + γky²/(2βkx).
#[test]
fn linear_mode_follows_the_dispersion_relation() {
    let p = PhysicalParams { alpha: 0.0, ..PhysicalParams::default() };
    let g = Grid2D::new(32, 16, 8.0 * std::f64::consts::PI, 8.0 * std::f64::consts::PI).unwrap();
    let (kx, ky) = (1.25_f64, 0.5);
    let omega = kx - p.beta * kx.powi(3) / 6.0 + p.gamma * ky * ky / (2.0 * p.beta * kx);
    let u0 = Field2D::from_fn(g, |x, y| (kx * x + ky * y).cos());
    let it = Integrator::new(&WaveEquation::new(EquationId::Kdv2p1, p), g, 0.05, true);
    let t = 0.05 * 200.0;
    let exact = Field2D::from_fn(g, |x, y| (kx * x + ky * y - omega * t).cos());
    assert!(advance(&it, &u0, 200).sub(&exact).max_abs() < 1e-12);
}

#[test]
fn stepping_back_recovers_the_initial_state() {
    let (s, g, p) = soliton_setup(64, 8);
    let eq = WaveEquation::new(EquationId::Kdv2p1, p);
    let u0 = s.sample(&g, 0.0);
    let fwd = advance(&Integrator::new(&eq, g, 0.01, true), &u0, 100);
    let back = advance(&Integrator::new(&eq, g, -0.01, true), &fwd, 100);
    assert!(back.sub(&u0).max_abs() < 1e-8);
}

#[test]
fn time_stepping_is_fourth_order() {
    let (s, g, p) = soliton_setup(64, 8);
    let eq = WaveEquation::new(EquationId::Kdv2p1, p);
    let u0 = s.sample(&g, 0.0);
    let t = 2.0;
    let solve = |n: usize| advance(&Integrator::new(&eq, g, t / n as f64, true), &u0, n);
    let reference = solve(320);
    let e1 = solve(40).sub(&reference).max_abs();
    let e2 = solve(80).sub(&reference).max_abs();
    let order = (e1 / e2).log2();
    assert!(order >= 3.8, "order {order} ({e1:e}, {e2:e})");
}

#[test]
fn soliton_transit_keeps_shape_and_mass() {
    let (s, g, p) = soliton_setup(128, 8);
    let t_end = 40.0 / (s.wave.omega / s.wave.k);
    let mut cfg = EvolutionConfig::new(EquationId::Kdv2p1, 1.0, t_end);
    cfg.dt = 0.5 / cfg.max_symbol(&g, &p);
    let traj = run(&s.sample(&g, 0.0), &cfg, &p).unwrap();
    assert!(traj.last().sub(&s.sample(&g, t_end)).max_abs() < 1e-3);
    assert!(traj.mass_drift() < 1e-10);
    assert!(traj.l2_drift() < 1e-5);
}

#[test]
fn kp_forms_conserve_mass() {
    let p = PhysicalParams::default();
    let g = Grid2D::new(32, 32, 20.0, 20.0).unwrap();
    let u0 = Field2D::from_fn(g, |x, y| {
        let (a, b) = (2.0 * std::f64::consts::PI * x / 20.0, 2.0 * std::f64::consts::PI * y / 20.0);
        0.3 * (a + b).cos() + 0.2 * (2.0 * a - b).sin() + 0.1
    });
    for (eq, lambda) in [(EquationId::KpClassical, Some(-1.0)), (EquationId::KpMoving, None), (EquationId::FifthKdv2p1, None)] {
        let mut cfg = EvolutionConfig::new(eq, 1.0, 1.0);
        cfg.lambda = lambda;
        cfg.dt = 0.5 / cfg.max_symbol(&g, &p);
        let traj = run(&u0, &cfg, &p).unwrap();
        assert!(traj.mass_drift() < 1e-10, "{}", eq.name());
        assert!(traj.last().is_finite());
    }
}

#[test]
fn zero_field_stays_zero() {
    let (_, g, p) = soliton_setup(32, 8);
    let cfg = EvolutionConfig::new(EquationId::Kdv2p1, 0.01, 0.5);
    let traj = run(&Field2D::zeros(g), &cfg, &p).unwrap();
    assert_eq!(traj.last().max_abs(), 0.0);
    assert_eq!(step(&Field2D::zeros(g), &cfg, &p).unwrap().max_abs(), 0.0);
}

#[test]
fn configuration_is_validated() {
    let (_, g, p) = soliton_setup(32, 8);
    let u = Field2D::zeros(g);
    assert!(run(&u, &EvolutionConfig::new(EquationId::Gardner2p1, 0.01, 1.0), &p).is_err());
    assert!(run(&u, &EvolutionConfig::new(EquationId::KpClassical, 0.01, 1.0), &p).is_err());
    assert!(run(&u, &EvolutionConfig::new(EquationId::Kdv2p1, 10.0, 20.0), &p).is_err());
    assert!(run(&u, &EvolutionConfig::new(EquationId::Kdv2p1, -0.1, 1.0), &p).is_err());
}

#[test]
fn projection_removes_transverse_mean_modes() {
    let g = Grid2D::new(16, 16, 10.0, 10.0).unwrap();
    let u = Field2D::from_fn(g, |x, y| 0.5 + (0.6283185307179586 * y).sin() + (0.6283185307179586 * x).cos());
    let (v, dev) = project_initial(&u);
    assert!((dev - 1.0).abs() < 0.1);
    assert!(v.x_means().iter().all(|m| (m - 0.5).abs() < 1e-12));
}

#[test]
fn steps_land_on_the_end_time() {
    let cfg = EvolutionConfig::new(EquationId::Kdv2p1, 0.3, 1.0);
    let (n, dt) = cfg.steps();
    assert_eq!(n, 4);
    assert!((n as f64 * dt - 1.0).abs() < 1e-15);
}

#[test]
fn trajectory_directory_is_complete_and_deterministic() {
    let (s, g, p) = soliton_setup(32, 8);
    let mut cfg = EvolutionConfig::new(EquationId::Kdv2p1, 0.01, 0.05);
    cfg.snapshot_every = 2;
    let dir = std::env::temp_dir().join(format!("dispersia-evolve-{}", std::process::id()));
    let read = |name: &str| std::fs::read(dir.join(name)).unwrap();
    run(&s.sample(&g, 0.0), &cfg, &p).unwrap().write_dir(&dir).unwrap();
    let (json, last) = (read("run.json"), read("snap_00003.bin"));
    run(&s.sample(&g, 0.0), &cfg, &p).unwrap().write_dir(&dir).unwrap();
    assert_eq!(json, read("run.json"));
    assert_eq!(last, read("snap_00003.bin"));
    assert!(String::from_utf8(read("diagnostics.csv")).unwrap().starts_with("t,mass,l2\n"));
    std::fs::remove_dir_all(&dir).unwrap();
}

proptest! {
    #[test]
    fn linear_symbol_is_purely_dispersive(kx in -5.0..5.0f64, ky in -5.0..5.0f64) {
        let p = PhysicalParams { tau: 0.1, ..PhysicalParams::default() };
        for eq in [EquationId::Kdv2p1, EquationId::KpMoving, EquationId::FifthKdv2p1] {
            prop_assert!(linear_symbol(&WaveEquation::new(eq, p), kx, ky).re.abs() < 1e-12);
        }
    }
}
