use crate::manifest::OutputDir;
use crate::{Cli, Command, CompatCmd, EvolveCmd, ExportCmd, FormatArg, ProfileArg, ResidualCmd, SolutionCmd, TableCmd, WaveArgs};
use crate::Failure;
use dispersia_core::bathymetry::make_bathymetry;
use dispersia_core::boussinesq::{compatibility_order_test, random_profile, soliton_profile, CompatConfig, CompatReport};
use dispersia_core::evolve::{run, EvolutionConfig, Trajectory};
use dispersia_core::io::canonical_json;
use dispersia_core::operators::dxy;
use dispersia_core::solutions::SOLITON_WINDOW;
use dispersia_core::table::{reproduce, TableInputs};
use dispersia_core::{
    Bathymetry, CaseId, EquationId, Error, Field2D, Grid2D, PhysicalParams, Segment, SolutionFamily, SolutionKind,
    WaveEquation,
};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};

type Outcome = std::result::Result<(), Failure>;

const DEFAULT_EPS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
const BREAK_EPS: [f64; 4] = [0.01, 0.005, 0.0025, 0.00125];

pub fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Solution(c) => solution(cli, c),
        Command::Table(c) => table(cli, c),
        Command::Residual(c) => residual(cli, c),
        Command::Evolve(c) => evolve(cli, c),
        Command::Compat(c) => compat(cli, c),
        Command::Export(c) => export(cli, c),
    }
}

fn params_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}

fn print_json<T: Serialize>(t: &T) -> Outcome {
    println!("{}", canonical_json(t)?);
    Ok(())
}

fn build_family(name: &str, w: &WaveArgs, p: PhysicalParams) -> dispersia_core::Result<SolutionFamily> {
    let kind = SolutionKind::parse(name)?;
    let m = match (kind.is_soliton(), w.m) {
        (true, _) => 1.0,
        (false, Some(m)) => m,
        (false, None) => return Err(Error::Config(format!("{name} needs --m"))),
    };
    SolutionFamily::build(kind, w.k, w.l, m, p, w.lambda)
}

fn solution(cli: &Cli, c: &SolutionCmd) -> Outcome {
    let s = build_family(&c.family, &c.wave, c.phys.params()?)?;
    let metrics = s.wave_metrics();
    let zero_mean = matches!(s.kind, SolutionKind::CnoidalPhys | SolutionKind::SuperpositionPhysPlus | SolutionKind::SuperpositionPhysMinus)
        .then(|| s.cell_mean(256).unwrap_or(0.0));
    let constraints = s.constraint_residuals();
    if cli.json {
        print_json(&json!({
            "family": s.to_document(),
            "metrics": metrics,
            "constraints": constraints,
            "cell_mean": zero_mean,
        }))?;
    } else {
        print!("A={:.6} speed={:.6}", metrics.amplitude, metrics.speed);
        if let Some(lx) = metrics.wavelength_x {
            print!(" Lx={lx:.6}");
        }
        if let Some(ly) = metrics.wavelength_y {
            print!(" Ly={ly:.6}");
        }
        println!(" omega={:.9}", s.wave.omega);
        for (name, r) in &constraints {
            println!("  constraint {name}: {r:.2e}");
        }
        if let Some(mean) = zero_mean {
            println!("zero-mean check {} (cell mean {mean:.2e})", if mean.abs() < 1e-10 { "PASS" } else { "FAIL" });
        }
    }
    if let Some(dir) = &c.out {
        let mut out = OutputDir::create(dir, "solution", params_value(c), cli.seed)?;
        out.write("solution.json", canonical_json(&s.to_document())?.as_bytes())?;
        let n = c.samples.max(2);
        let mut csv = String::from("xi,u\n");
        for i in 0..n {
            let xi = match s.period() {
                Some(p) => p * i as f64 / n as f64,
                None => SOLITON_WINDOW * (2.0 * i as f64 / (n - 1) as f64 - 1.0),
            };
            csv.push_str(&format!("{:.17e},{:.17e}\n", xi, s.profile(xi)));
        }
        out.write("profile.csv", csv.as_bytes())?;
        out.finish()?;
    }
    match zero_mean {
        Some(mean) if mean.abs() >= 1e-10 => Err(Failure::Threshold(format!("cell mean {mean:e} is not zero"))),
        _ => Ok(()),
    }
}

fn table(cli: &Cli, c: &TableCmd) -> Outcome {
    let inputs = TableInputs {
        params: c.phys.params()?,
        k: c.k,
        l: c.l,
        m_cnoidal: c.m_cno,
        m_superposition: c.m_sup,
        tolerance: c.tolerance,
    };
    let t = reproduce(&inputs)?;
    if cli.json {
        print_json(&t)?;
    } else {
        print!("{}", t.render());
    }
    if let Some(dir) = &c.out {
        let mut out = OutputDir::create(dir, "table", params_value(c), cli.seed)?;
        out.write("table.json", canonical_json(&t)?.as_bytes())?;
        out.write("table.txt", t.render().as_bytes())?;
        out.finish()?;
    }
    if t.all_pass {
        Ok(())
    } else {
        let worst = t.rows.iter().filter(|r| !r.pass).map(|r| r.quantity.as_str()).collect::<Vec<_>>().join(", ");
        Err(Failure::Threshold(format!("rows outside tolerance {:e}: {worst}", c.tolerance)))
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> dispersia_core::Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn read_bathymetry(path: &Path) -> dispersia_core::Result<Bathymetry> {
    make_bathymetry(read_json::<Vec<Segment>>(path)?)
}

fn read_field(path: &Path) -> dispersia_core::Result<Field2D> {
    Field2D::read_binary(std::io::BufReader::new(std::fs::File::open(path)?))
}

fn residual(cli: &Cli, c: &ResidualCmd) -> Outcome {
    let id = EquationId::parse(&c.equation)?;
    let p = c.phys.params()?;
    let mut eq = WaveEquation::new(id, p).with_gardner_form(c.gardner_form.into()).with_gamma2(!c.no_gamma2);
    if let Some(lambda) = c.wave.lambda {
        eq = eq.with_lambda(lambda);
    }
    let family = match (&c.family, c.soliton, c.kp_soliton) {
        (Some(f), _, _) => Some(f.as_str()),
        (None, true, _) => Some("soliton"),
        (None, false, true) => Some("kp-soliton"),
        _ => None,
    };
    let bathy = c.bathymetry.as_deref().map(read_bathymetry).transpose()?;
    let (report, threshold) = if let Some(name) = family {
        let s = build_family(name, &c.wave, p)?;
        (eq.residual_plane(&s, c.samples)?, Some(c.threshold.unwrap_or(1e-10)))
    } else {
        let (u, u_t) = match (&c.field, &c.field_t) {
            (Some(f), Some(ft)) => (read_field(f)?, read_field(ft)?),
            _ if c.random => {
                let u = random_profile(c.nx, c.ny, cli.seed)?;
                let z = Field2D::zeros(u.grid);
                (u, z)
            }
            _ => return Err(Error::Config("give --family/--soliton/--kp-soliton, --field with --field-t, or --random".into()).into()),
        };
        if let Some(b) = &bathy {
            for w in b.check_on(&u.grid)?.warnings {
                log::warn!("{w}");
            }
        }
        (eq.residual_grid(&u, &u_t, bathy.as_ref())?, c.threshold)
    };
    if cli.json {
        print_json(&report)?;
    } else {
        println!(
            "{} residual: max {:.3e} rms {:.3e} at {:?}{}",
            id.name(),
            report.max_abs,
            report.rms,
            report.location_of_max,
            if report.interior_only { " (interior columns)" } else { "" }
        );
        for f in &report.flags {
            println!("  note: {f}");
        }
    }
    match threshold {
        Some(t) if !(report.max_abs <= t) => Err(Failure::Threshold(format!("residual {:e} exceeds {t:e}", report.max_abs))),
        _ => Ok(()),
    }
}

/// Initial state of an evolution run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum InitialState {
    Family {
        family: String,
        k: f64,
        #[serde(default)]
        l: f64,
        #[serde(default)]
        m: Option<f64>,
        #[serde(default)]
        lambda: Option<f64>,
    },
    Random,
    File(PathBuf),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct EvolveSpec {
    equation: String,
    #[serde(default)]
    params: PhysicalParams,
    nx: usize,
    ny: usize,
    length_x: f64,
    length_y: f64,
    initial: InitialState,
    /// Defaults to 0.5/max|Ω|.
    #[serde(default)]
    dt: Option<f64>,
    /// Defaults to one transit of the box for a family, 1 otherwise.
    #[serde(default)]
    t_end: Option<f64>,
    #[serde(default)]
    snapshot_every: usize,
    #[serde(default)]
    include_gamma2: bool,
    #[serde(default)]
    lambda: Option<f64>,
}

impl Default for EvolveSpec {
    fn default() -> Self {
        EvolveSpec {
            equation: EquationId::Kdv2p1.name().into(),
            params: PhysicalParams::default(),
            nx: 128,
            ny: 64,
            length_x: 40.0,
            length_y: 40.0,
            initial: InitialState::Family { family: "soliton".into(), k: 1.0, l: 0.0, m: None, lambda: None },
            dt: None,
            t_end: None,
            snapshot_every: 0,
            include_gamma2: false,
            lambda: None,
        }
    }
}

fn evolve(cli: &Cli, c: &EvolveCmd) -> Outcome {
    let mut spec = match &c.config {
        Some(path) => read_json::<EvolveSpec>(path)?,
        None => EvolveSpec::default(),
    };
    spec.dt = c.dt.or(spec.dt);
    spec.t_end = c.t_end.or(spec.t_end);
    spec.params.validate()?;
    let p = spec.params;
    let grid = Grid2D::new(spec.nx, spec.ny, spec.length_x, spec.length_y)?;
    let (u0, family) = match &spec.initial {
        InitialState::Family { family, k, l, m, lambda } => {
            let w = WaveArgs { k: *k, l: *l, m: *m, lambda: *lambda };
            let s = build_family(family, &w, p)?;
            (s.sample(&grid, 0.0), Some(s))
        }
        InitialState::Random => {
            let u = random_profile(spec.nx, spec.ny, cli.seed)?;
            (Field2D::from_values(grid, u.values)?, None)
        }
        InitialState::File(path) => {
            let u = read_field(path)?;
            grid.check_same(&u.grid)?;
            (u, None)
        }
    };
    let mut cfg = EvolutionConfig::new(EquationId::parse(&spec.equation)?, 1.0, 1.0);
    cfg.snapshot_every = spec.snapshot_every;
    cfg.include_gamma2 = spec.include_gamma2;
    cfg.lambda = spec.lambda;
    cfg.dt = spec.dt.unwrap_or_else(|| 0.5 / cfg.max_symbol(&grid, &p));
    cfg.t_end = spec.t_end.unwrap_or_else(|| match &family {
        Some(s) if s.wave.omega != 0.0 => (grid.length_x * s.wave.k / s.wave.omega).abs(),
        _ => 1.0,
    });
    let traj = run(&u0, &cfg, &p)?;
    // Shape error only when the family solves the equation being evolved.
    let exact = family.filter(|s| {
        let eq = cfg.wave_equation(&p);
        eq.residual_plane(s, 401).is_ok_and(|r| r.max_abs < 1e-8)
    });
    let error = exact.map(|s| traj.last().sub(&s.sample(&grid, cfg.t_end)).max_abs());
    let convergence = if c.convergence { Some(time_convergence(&u0, &cfg, &p, &traj)?) } else { None };
    let summary = json!({
        "equation": spec.equation,
        "steps": traj.steps,
        "dt_used": traj.dt_used,
        "t_end": cfg.t_end,
        "mass_drift": traj.mass_drift(),
        "l2_drift": traj.l2_drift(),
        "projected_row_mean": traj.projected,
        "max_error_vs_exact": error,
        "time_convergence": convergence,
    });
    if cli.json {
        print_json(&summary)?;
    } else {
        println!("{} steps of dt = {:.6e} to t = {:.6}", traj.steps, traj.dt_used, cfg.t_end);
        println!("mass drift {:.3e}, L2 drift {:.3e}", traj.mass_drift(), traj.l2_drift());
        if let Some(e) = error {
            println!("max |u - exact| = {e:.3e}");
        }
        if let Some(conv) = &convergence {
            println!("time-step errors {:?}, observed orders {:?}", conv.errors, conv.orders);
        }
    }
    if let Some(dir) = &c.out {
        let mut out = OutputDir::create(dir, "evolve", params_value(&spec), cli.seed)?;
        traj.write_dir(out.path())?;
        for name in std::iter::once("run.json".to_string())
            .chain(std::iter::once("diagnostics.csv".to_string()))
            .chain((0..traj.snapshots.len()).map(|i| format!("snap_{i:05}.bin")))
        {
            out.record(&name);
        }
        out.write("summary.json", canonical_json(&summary)?.as_bytes())?;
        out.finish()?;
    }
    match (c.max_error, error) {
        (Some(limit), Some(e)) if !(e <= limit) => Err(Failure::Threshold(format!("error {e:e} exceeds {limit:e}"))),
        (Some(_), None) => Err(Error::Config("--max-error needs an initial wave that solves the equation".into()).into()),
        _ => Ok(()),
    }
}

#[derive(Debug, Serialize)]
struct TimeConvergence {
    dts: Vec<f64>,
    errors: Vec<f64>,
    orders: Vec<f64>,
}

/// Errors at dt, dt/2 and dt/4 against a dt/8 reference.
fn time_convergence(u0: &Field2D, cfg: &EvolutionConfig, p: &PhysicalParams, base: &Trajectory) -> dispersia_core::Result<TimeConvergence> {
    let at = |div: f64| -> dispersia_core::Result<Field2D> {
        let mut c = *cfg;
        c.dt = base.dt_used / div;
        c.snapshot_every = 0;
        Ok(run(u0, &c, p)?.last().clone())
    };
    let reference = at(8.0)?;
    let mut errors = vec![base.last().sub(&reference).max_abs()];
    for div in [2.0, 4.0] {
        errors.push(at(div)?.sub(&reference).max_abs());
    }
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    Ok(TimeConvergence { dts: vec![base.dt_used, base.dt_used / 2.0, base.dt_used / 4.0], errors, orders })
}

fn tent(grid: &Grid2D, height: f64) -> dispersia_core::Result<Bathymetry> {
    let half = 0.5 * grid.length_x;
    let s = height / half;
    make_bathymetry(vec![Segment::new(0.0, s, 0.0), Segment::new(half, -s, 2.0 * height)])
}

fn compat(cli: &Cli, c: &CompatCmd) -> Outcome {
    let case = CaseId::parse(&c.case)?;
    let breaking = !c.broken.is_empty() || c.trial_ga != 0.0;
    let cfg = CompatConfig {
        case,
        order: c.order,
        epsilons: c.eps.clone().unwrap_or_else(|| if breaking { BREAK_EPS.to_vec() } else { DEFAULT_EPS.to_vec() }),
        tau: c.tau,
        gardner_form: c.gardner_form.into(),
        disabled: c.broken.clone(),
        trial_ga: c.trial_ga,
    };
    if c.tent.is_some() && case != CaseId::Case5 {
        return Err(Error::Config("--tent applies to case5 only".into()).into());
    }
    let mut profiles = vec![];
    if matches!(c.profile, ProfileArg::Soliton | ProfileArg::Both) {
        profiles.push(("soliton", soliton_profile(c.nx, c.ny)?));
    }
    if matches!(c.profile, ProfileArg::Random | ProfileArg::Both) {
        profiles.push(("random", random_profile(c.nx, c.ny, cli.seed)?));
    }
    let reports: Vec<CompatReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = profiles
            .iter()
            .map(|(name, u)| {
                let cfg = &cfg;
                scope.spawn(move || {
                    let bathy = c.tent.map(|h| tent(&u.grid, h)).transpose()?;
                    compatibility_order_test(cfg, u, name, bathy.as_ref())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("compat worker panicked")).collect::<dispersia_core::Result<Vec<_>>>()
    })?;
    if cli.json {
        print_json(&reports)?;
    } else {
        for r in &reports {
            println!("{:?} order {} on {} profile", r.case, r.order, r.profile);
            println!("{:>10} {:>12} {:>12} {:>12}", "eps", "|r1-r2|", "|r1|", "|r2|");
            for row in &r.rows {
                println!("{:>10.5} {:>12.4e} {:>12.4e} {:>12.4e}", row.eps, row.diff_max, row.r1_max, row.r2_max);
            }
            println!(
                "slope {:.3} (r1 {:.3}, r2 {:.3}), need {:.2}: {}",
                r.slope,
                r.slope_r1,
                r.slope_r2,
                r.threshold,
                if r.pass { "PASS" } else { "FAIL" }
            );
        }
    }
    if let Some(dir) = &c.out {
        let mut out = OutputDir::create(dir, "compat", params_value(c), cli.seed)?;
        for r in &reports {
            out.write(&format!("compat_{}.csv", r.profile), r.to_csv().as_bytes())?;
        }
        out.write("report.json", canonical_json(&reports)?.as_bytes())?;
        out.finish()?;
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.profile.as_str()).collect();
    if breaking {
        if failed.len() == reports.len() {
            if !cli.json {
                println!("BROKEN-AS-EXPECTED");
            }
            Ok(())
        } else {
            Err(Failure::Threshold("the modified correction set still reaches the claimed order".into()))
        }
    } else if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Threshold(format!("order not reached on: {}", failed.join(", "))))
    }
}

fn export(cli: &Cli, c: &ExportCmd) -> Outcome {
    let (u, u_t) = if c.random {
        (random_profile(c.nx, c.ny, cli.seed)?, None)
    } else {
        let name = c.family.as_deref().unwrap_or("soliton");
        let s = build_family(name, &c.wave, c.phys.params()?)?;
        let grid = Grid2D::new(c.nx, c.ny, c.lx, c.ly)?;
        let u = s.sample(&grid, c.t);
        let u_t = c.with_t.then(|| dxy(&u, 1, 0).scale(-s.wave.omega / s.wave.k));
        (u, u_t)
    };
    let dir = c.out.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut out = OutputDir::create(dir, "export", params_value(c), cli.seed)?;
    let encode = |f: &Field2D| -> dispersia_core::Result<Vec<u8>> {
        match c.format {
            FormatArg::Bin => Ok(f.to_binary()),
            FormatArg::Csv => {
                let mut buf = vec![];
                f.write_csv(&mut buf)?;
                Ok(buf)
            }
        }
    };
    let file_name = |p: &Path| p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    out.write(&file_name(&c.out), &encode(&u)?)?;
    if let Some(ut) = &u_t {
        let stem = c.out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        let ext = c.out.extension().map(|e| format!(".{}", e.to_string_lossy())).unwrap_or_default();
        out.write(&format!("{stem}_t{ext}"), &encode(ut)?)?;
    }
    out.finish()?;
    if cli.json {
        print_json(&json!({"file": c.out, "nx": u.grid.nx, "ny": u.grid.ny, "max_abs": u.max_abs()}))?;
    } else {
        println!("wrote {} ({}x{}, max |u| {:.6})", c.out.display(), u.grid.nx, u.grid.ny, u.max_abs());
    }
    Ok(())
}
