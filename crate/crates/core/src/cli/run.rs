//! Execution of a validated [`RunConfig`].

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{
    CertifyArgs, Command, ConfigError, HeatArgs, LandauAction, LandauArgs, RunConfig, SolveArgs,
};
use crate::dump;
use crate::heat::{self, QuadratureSettings};
use crate::landau::{LandauSolution, ProductBump, RadialBump, TestFunction};
use crate::lattice::FourierLattice;
use crate::ns_solver::{self, Mode, SolverConfig, SolverError};
use crate::pm_norms::{self, certification_suite};
use crate::spectral::{inverse_transform, SpectralField};

/// Failure of a run, mapped onto the process exit code.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// The iteration did not reach its tolerance; the table is still produced.
    NotConverged {
        message: String,
        csv: String,
    },
    Smallness(String),
    Other(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::NotConverged { .. } => 3,
            RunError::Smallness(_) => 4,
            RunError::Other(_) => 1,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::NotConverged { message, .. } => write!(f, "not converged: {message}"),
            RunError::Smallness(m) => write!(f, "smallness condition violated: {m}"),
            RunError::Other(m) => write!(f, "{m}"),
        }
    }
}

fn other<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Other(e.to_string())
}

/// A CSV table with provenance header lines.
struct Table {
    text: String,
}

impl Table {
    fn new(cfg: &RunConfig, columns: &str) -> Self {
        let mut text = format!(
            "# sns {}\n# config-sha256: {}\n",
            env!("CARGO_PKG_VERSION"),
            cfg.provenance_hash()
        );
        for line in cfg.canonical_text().lines() {
            let _ = writeln!(text, "# {line}");
        }
        let mut t = Table { text };
        t.text.push_str(columns);
        t.text.push('\n');
        t
    }

    fn comment(&mut self, line: &str) {
        let _ = writeln!(self.text, "# {line}");
    }

    fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }
}

fn s(x: f64) -> String {
    x.to_string()
}

/// Runs `cfg` and returns the CSV text; `--out` also writes it to disk.
pub fn execute(cfg: &RunConfig) -> Result<String, RunError> {
    let (table, out, pending) = match &cfg.command {
        Command::Landau(a) => (run_landau(cfg, a)?, a.out.clone(), None),
        Command::Certify(a) => (run_certify(cfg, a)?, a.out.clone(), None),
        Command::Heat(a) => (run_heat(cfg, a)?, a.out.clone(), None),
        Command::Solve(a) => {
            let (t, pending) = run_solve(cfg, a)?;
            (t, a.report.clone(), pending)
        }
    };
    if let Some(path) = out {
        fs::write(&path, &table.text)
            .map_err(|e| RunError::Other(format!("cannot write {path}: {e}")))?;
    }
    match pending {
        Some(message) => Err(RunError::NotConverged {
            message,
            csv: table.text,
        }),
        None => Ok(table.text),
    }
}

/// Sample points for the residual sweep: log-uniform radius in `[0.1, 10]`, uniform direction.
pub fn residual_sweep_points(points: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..points)
        .map(|_| {
            let r = 10f64.powf(rng.gen_range(-1.0..1.0));
            let mu: f64 = rng.gen_range(-1.0..1.0);
            let az: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let st = (1.0 - mu * mu).sqrt();
            [r * mu, r * st * az.cos(), r * st * az.sin()]
        })
        .collect()
}

/// Relative step of the residual sweep.
pub const SWEEP_STEP: f64 = 1e-3;

/// Test functions of the pairing table: a radial bump and a tensor-product bump, both nonzero at the origin.
pub fn pairing_test_functions() -> (RadialBump, ProductBump) {
    (
        RadialBump {
            center: [0.0; 3],
            radius: 1.0,
            amplitude: 1.0,
        },
        ProductBump {
            center: [0.1, -0.05, 0.08],
            half_widths: [0.7, 0.6, 0.8],
        },
    )
}

fn run_landau(cfg: &RunConfig, a: &LandauArgs) -> Result<Table, RunError> {
    let sol = LandauSolution::new(a.c).map_err(other)?;
    let table = match &a.action {
        LandauAction::Eval(x) => {
            let mut t = Table::new(cfg, "c,x1,x2,x3,v1,v2,v3,q");
            let v = sol.velocity(*x).map_err(other)?;
            let q = sol.pressure(*x).map_err(other)?;
            t.row(&[
                s(a.c),
                s(x[0]),
                s(x[1]),
                s(x[2]),
                s(v[0]),
                s(v[1]),
                s(v[2]),
                s(q),
            ]);
            t
        }
        LandauAction::Kappa => {
            let mut t = Table::new(cfg, "c,kappa");
            t.row(&[s(a.c), s(sol.kappa())]);
            t
        }
        LandauAction::ResidualSweep => {
            let mut t = Table::new(cfg, "c,x1,x2,x3,h,momentum,divergence,relative,order");
            for x in residual_sweep_points(a.points, cfg.seed) {
                let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                let h = SWEEP_STEP * r;
                let fine = sol.stationary_residual(x, h).map_err(other)?;
                let coarse = sol.stationary_residual(x, 2.0 * h).map_err(other)?;
                let m = fine.momentum;
                let order = (coarse.relative() / fine.relative()).log2();
                t.row(&[
                    s(a.c),
                    s(x[0]),
                    s(x[1]),
                    s(x[2]),
                    s(h),
                    s((m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt()),
                    s(fine.divergence),
                    s(fine.relative()),
                    s(order),
                ]);
            }
            t
        }
        LandauAction::Pairing => {
            let mut t = Table::new(cfg, "c,k,value,target,rel_err");
            let (radial, product) = pairing_test_functions();
            let tests: [&dyn TestFunction; 2] = [&radial, &product];
            for (i, phi) in tests.iter().enumerate() {
                t.comment(&format!("test function {}", i + 1));
                let scale = (sol.kappa() * phi.value([0.0; 3])).abs();
                for k in 1..=3 {
                    let p = sol.weak_pairing(*phi, k).map_err(other)?;
                    t.row(&[
                        s(a.c),
                        k.to_string(),
                        s(p.value),
                        s(p.target),
                        s((p.value - p.target).abs() / scale),
                    ]);
                }
            }
            t
        }
    };
    Ok(table)
}

fn run_certify(cfg: &RunConfig, a: &CertifyArgs) -> Result<Table, RunError> {
    let lat = FourierLattice::new(a.n, a.l).map_err(other)?;
    let rows = certification_suite(a.lemma, a.trials, cfg.seed, lat).map_err(other)?;
    let mut t = Table::new(cfg, "lemma,trial,ratio,bound,pass");
    for r in &rows {
        t.row(&[
            a.lemma.name().to_string(),
            r.trial.to_string(),
            s(r.report.ratio),
            s(r.report.bound),
            r.report.pass.to_string(),
        ]);
    }
    let passed = rows.iter().filter(|r| r.report.pass).count();
    t.comment(&format!("passed {passed} of {}", rows.len()));
    Ok(t)
}

/// Log-spaced sample times of `--fit-decay`.
pub fn decay_fit_times() -> Vec<f64> {
    (0..7).map(|i| 10f64.powf(-3.0 + i as f64 / 3.0)).collect()
}

fn write_dump(dir: &str, name: &str, field: &SpectralField) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|e| RunError::Other(format!("cannot create {dir}: {e}")))?;
    let path = Path::new(dir).join(name);
    fs::write(&path, dump::encode(field))
        .map_err(|e| RunError::Other(format!("cannot write {}: {e}", path.display())))
}

fn run_heat(cfg: &RunConfig, a: &HeatArgs) -> Result<Table, RunError> {
    let curve = a.curve.build();
    let pm_a = 1.0 + 2.0 * curve.alpha();
    let settings = QuadratureSettings::default();
    let times = if a.fit_decay {
        decay_fit_times()
    } else {
        a.times.clone()
    };
    let mut t = Table::new(cfg, "t,q,lq_norm,pm2,pm_a");
    let mut pts = Vec::new();
    for (k, &time) in times.iter().enumerate() {
        // The decay fit follows the parabolic scaling: the box side is L·√t.
        let side = if a.fit_decay { a.l * time.sqrt() } else { a.l };
        let lat = FourierLattice::new(a.n, side).map_err(other)?;
        let d = heat::heat_decomposition(&curve, time, &lat, settings).map_err(other)?;
        let lq = pm_norms::lq_norm(&inverse_transform(&d.omega0).map_err(other)?, a.q);
        pts.push((time.ln(), lq.ln()));
        t.row(&[
            s(time),
            s(a.q),
            s(lq),
            s(pm_norms::pm_norm(&d.omega0, 2.0)),
            s(pm_norms::pm_norm(&d.omega0, pm_a)),
        ]);
        if let Some(dir) = &a.dump_fields {
            write_dump(dir, &format!("u_{k:04}.bin"), &d.u)?;
            write_dump(dir, &format!("omega0_{k:04}.bin"), &d.omega0)?;
        }
    }
    if a.fit_decay {
        let (slope, _) = heat::least_squares(&pts);
        t.comment(&format!("decay slope {slope}"));
    }
    Ok(t)
}

fn solver_config(cfg: &RunConfig, a: &SolveArgs) -> Result<SolverConfig, RunError> {
    let lat = FourierLattice::new(a.n, a.l).map_err(other)?;
    let curve = a.curve.build();
    let mut sc = match a.mode {
        Mode::FullU => SolverConfig::full_u(a.effective_kappa(), curve),
        Mode::RemainderOmega => {
            SolverConfig::remainder(a.c.expect("validated"), curve).map_err(other)?
        }
    };
    sc = sc.with_lattice(lat).with_time_grid(a.horizon, a.steps);
    sc.c = a.c;
    sc.tol = a.tol;
    sc.max_iter = a.max_iter;
    sc.report_exponent = a.a;
    sc.override_smallness = a.override_smallness;
    sc.seed = cfg.seed;
    Ok(sc)
}

fn run_solve(cfg: &RunConfig, a: &SolveArgs) -> Result<(Table, Option<String>), RunError> {
    let sc = solver_config(cfg, a)?;
    let sol = match ns_solver::picard_solve(&sc) {
        Ok(sol) => sol,
        Err(SolverError::SmallnessViolated(m)) => return Err(RunError::Smallness(m)),
        Err(e) => return Err(other(e)),
    };
    let rep = &sol.report;
    let mut t = Table::new(
        cfg,
        "iter,norm_pm2,norm_pm_a,increment,ratio,divergence_max,residual",
    );
    for r in &rep.rows {
        t.row(&[
            r.iter.to_string(),
            s(r.norm_pm2),
            s(r.norm_pm_a),
            s(r.increment),
            r.ratio.map(s).unwrap_or_default(),
            s(r.divergence_max),
            s(r.residual),
        ]);
    }
    let sm = &rep.smallness;
    t.comment(&format!("eta2 {}", sm.eta.eta));
    t.comment(&format!("kappa {}", sol.kappa));
    if let Some(l) = sm.lambda_hat {
        t.comment(&format!("lambda {l}"));
    }
    t.comment(&format!("bound {}", sm.bound));
    t.comment(&format!(
        "smallness {}",
        if sm.overridden {
            "overridden"
        } else {
            "satisfied"
        }
    ));
    t.comment(&format!("converged {}", rep.converged));
    if let Some(dir) = &a.dump_fields {
        let prefix = match sol.mode {
            Mode::FullU => "u",
            Mode::RemainderOmega => "omega",
        };
        for k in 0..sol.len() {
            write_dump(dir, &format!("{prefix}_{k:04}.bin"), &sol.field(k))?;
        }
    }
    let pending = if rep.converged {
        None
    } else {
        let last = rep.rows.last().map(|r| r.increment).unwrap_or(f64::NAN);
        Some(format!(
            "{} iterations, last increment {last}",
            rep.rows.len()
        ))
    };
    Ok((t, pending))
}
