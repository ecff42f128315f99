//! Picard construction of mild solutions of the Navier-Stokes system forced by
//! a Dirac mass `κ δ_{γ(t)} e₁` moving along a Hölder curve.
//!
//! All fields are spectral. With `λ = |ξ|²`, `g(t) = e^{-iγ(t)·ξ}` and the flux
//! `F(u, v) = -P̂ iξ·(u⊗v)^`, the full velocity solves
//!
//! ```text
//! u = B(u, u) + y,    B(u, v)(t) = ∫₀ᵗ e^{-(t-τ)λ} F(u, v)(τ) dτ,    y = κ P̂e₁ ∫₀ᵗ e^{-(t-τ)λ} g(τ) dτ.
//! ```
//!
//! In remainder mode the unknown is `ω = u - V_γ` with `V_γ = g V̂` the
//! stationary Landau field carried along the curve. Writing `w = ω + V_γ`,
//!
//! ```text
//! ω = B(w, w) - B(V_γ, V_γ) - y₀,    y₀ = (g - λ I) V̂,    I = ∫₀ᵗ e^{-(t-τ)λ} g(τ) dτ,
//! ```
//!
//! which expands to `B(ω, ω) + B(V_γ, ω) + B(ω, V_γ) - y₀` and starts from `ω(0) = -V_γ(0)`.
//!
//! Time integration of `B` treats the flux as piecewise linear between grid
//! nodes and integrates the exponential exactly, which makes it second order.
//! The term `B(V_γ, V_γ) = I F(V, V)` is evaluated from the phase integral
//! directly, so on the lattice `ω + V_γ` solves the same discrete equation as `u`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::curve::Curve;
use crate::heat::{duhamel_phase_integrals, HeatError, QuadratureSettings};
use crate::landau::{LandauError, LandauSolution};
use crate::lattice::FourierLattice;
use crate::pm_norms::{pm_norm, random_pm_field, NormError};
use crate::quadrature::{psi_left, psi_right};
use crate::spectral::{
    dealiased_product, dealiased_square, leray_project, SpectralError, SpectralField,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Fraction of the horizon excluded from the residual maximum.
pub const LATE_WINDOW: f64 = 0.25;
/// Iterates whose norm exceeds this multiple of the a-priori bound are declared divergent.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("smallness condition violated: {0}")]
    SmallnessViolated(String),
    #[error("no convergence after {iterations} iterations (last increment {increment:e})")]
    NotConverged { iterations: usize, increment: f64 },
    #[error("iterate {iteration} has norm {norm:e}, above {bound:e}")]
    DivergedIterate {
        iteration: usize,
        norm: f64,
        bound: f64,
    },
    #[error("stationary lattice field did not converge: {0}")]
    PolishFailed(String),
    #[error(transparent)]
    Heat(#[from] HeatError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Landau(#[from] LandauError),
    #[error(transparent)]
    Norm(#[from] NormError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Iterate on the full velocity `u`.
    FullU,
    /// Iterate on the remainder `ω = u - V_γ`; `κ = κ(c)`.
    RemainderOmega,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialIterate {
    Zero,
    /// The affine term: `y` in full mode, `-y₀` in remainder mode.
    Forcing,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub mode: Mode,
    /// Landau parameter; required in remainder mode.
    pub c: Option<f64>,
    pub kappa: f64,
    pub curve: Curve,
    pub lattice: FourierLattice,
    pub horizon: f64,
    /// Number of uniform time steps on `[0, horizon]`.
    pub steps: usize,
    /// Picard stops once `|||x_{n+1} - x_n|||_{2,T} <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Exponent of the secondary `|||·|||_{a,T}` norm in the report.
    pub report_exponent: f64,
    /// Run even when the measured smallness conditions fail.
    pub override_smallness: bool,
    pub initial: InitialIterate,
    pub quadrature: QuadratureSettings,
    /// Random fields used to measure `η̂₂`.
    pub eta_trials: usize,
    pub seed: u64,
    /// Bilinear constant measured beforehand on the same lattice and time grid.
    pub eta: Option<EtaEstimate>,
}

impl SolverConfig {
    /// Full-mode configuration with the desk-scale defaults `N = 64`, `L = 32`, `T = 0.5`, 64 steps.
    pub fn full_u(kappa: f64, curve: Curve) -> Self {
        let report_exponent = default_report_exponent(&curve);
        Self {
            mode: Mode::FullU,
            c: None,
            kappa,
            curve,
            lattice: FourierLattice::new(64, 32.0).expect("valid lattice"),
            horizon: 0.5,
            steps: 64,
            tol: 1e-10,
            max_iter: 30,
            report_exponent,
            override_smallness: false,
            initial: InitialIterate::Zero,
            quadrature: QuadratureSettings::default(),
            eta_trials: 8,
            seed: 0,
            eta: None,
        }
    }

    /// Remainder-mode configuration for the Landau parameter `c`, with `κ = κ(c)`.
    pub fn remainder(c: f64, curve: Curve) -> Result<Self, SolverError> {
        let kappa = crate::landau::kappa(c)?;
        let mut cfg = Self::full_u(kappa, curve);
        cfg.mode = Mode::RemainderOmega;
        cfg.c = Some(c);
        Ok(cfg)
    }

    pub fn with_lattice(mut self, lattice: FourierLattice) -> Self {
        self.lattice = lattice;
        self
    }

    pub fn with_time_grid(mut self, horizon: f64, steps: usize) -> Self {
        self.horizon = horizon;
        self.steps = steps;
        self
    }

    pub fn times(&self) -> Vec<f64> {
        uniform_times(self.horizon, self.steps)
    }

    fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::InvalidConfig(m.into()));
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad("horizon must be positive");
        }
        if self.steps < 2 {
            return bad("need at least two time steps");
        }
        if !(self.tol > 0.0) {
            return bad("tolerance must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be positive");
        }
        if !self.kappa.is_finite() {
            return bad("kappa must be finite");
        }
        if !(self.report_exponent >= 2.0 && self.report_exponent < 3.0) {
            return bad("report exponent must lie in [2, 3)");
        }
        if self.eta_trials == 0 {
            return bad("eta_trials must be positive");
        }
        if let Some(e) = &self.eta {
            if e.a != 2.0 || !(e.eta.is_finite() && e.eta > 0.0) {
                return bad("precomputed eta must be a positive PM² estimate");
            }
        }
        if self.mode == Mode::RemainderOmega {
            let c = self
                .c
                .ok_or_else(|| SolverError::InvalidConfig("remainder mode needs c".into()))?;
            let k = crate::landau::kappa(c)?;
            if k != self.kappa {
                return bad("remainder mode requires kappa = kappa(c)");
            }
        }
        Ok(())
    }
}

/// `min(2.5, 1 + 2α)`, inside the range where the remainder lies in `Y^a_T`.
pub fn default_report_exponent(curve: &Curve) -> f64 {
    2.5f64.min(1.0 + 2.0 * curve.alpha())
}

pub fn uniform_times(horizon: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|k| horizon * k as f64 / steps as f64)
        .collect()
}

/// Spectral fields on a time grid starting at `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<SpectralField>,
}

impl Trajectory {
    fn check(&self) -> Result<FourierLattice, SolverError> {
        if self.times.len() != self.fields.len() || self.times.is_empty() {
            return Err(SolverError::InvalidConfig(
                "trajectory needs one field per time".into(),
            ));
        }
        if self.times[0] != 0.0 || self.times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(SolverError::InvalidConfig(
                "trajectory times must start at 0 and increase".into(),
            ));
        }
        let lat = *self.fields[0].lattice();
        for f in &self.fields {
            if *f.lattice() != lat {
                return Err(SpectralError::LatticeMismatch.into());
            }
            if f.n_components() != 3 {
                return Err(SpectralError::ComponentMismatch {
                    expected: 3,
                    found: f.n_components(),
                }
                .into());
            }
        }
        Ok(lat)
    }

    /// `sup_k ‖x(t_k)‖_{PM²}`.
    pub fn pm2_sup(&self) -> f64 {
        self.fields
            .iter()
            .map(|f| pm_norm(f, 2.0))
            .fold(0.0, f64::max)
    }

    /// `|||x|||_{a,T}` on the grid: the larger of `sup ‖x‖_{PM²}` and `sup t^{a/2-1} ‖x‖_{PM^a}`.
    pub fn ya_norm(&self, a: f64) -> f64 {
        crate::pm_norms::yat_norm(&self.times, &self.fields, a)
            .map(|n| n.value())
            .unwrap_or(f64::NAN)
    }
}

/// `F(u, v) = -P̂ iξ·(u⊗v)^` with `F_i = -P̂_{ik} Σ_j iξ_j (u_j v_k)^`.
pub fn flux(u: &SpectralField, v: &SpectralField) -> Result<SpectralField, SolverError> {
    let prod = dealiased_product(u, v)?;
    let lat = *u.lattice();
    let mut out = SpectralField::zeros(lat, 3);
    for idx in 0..lat.len() {
        let lam = lat.xi_sq(idx);
        if lam == 0.0 || !lat.in_band(idx) {
            continue;
        }
        let xi = lat.xi(idx);
        let mut g = [ZERO; 3];
        for (k, gk) in g.iter_mut().enumerate() {
            let mut acc = ZERO;
            for (j, x) in xi.iter().enumerate() {
                acc += prod.component(3 * j + k)[idx] * *x;
            }
            *gk = acc;
        }
        let f = project_minus_i(xi, lam, g);
        for c in 0..3 {
            out.component_mut(c)[idx] = f[c];
        }
    }
    Ok(out)
}

/// `F(u, u)` from the six symmetric channels of `(u⊗u)^`.
pub fn flux_square(u: &SpectralField) -> Result<SpectralField, SolverError> {
    let sq = dealiased_square(u)?;
    let lat = *u.lattice();
    let mut out = SpectralField::zeros(lat, 3);
    for idx in 0..lat.len() {
        let lam = lat.xi_sq(idx);
        if lam == 0.0 || !lat.in_band(idx) {
            continue;
        }
        let f = square_flux_at(&sq, &lat, idx, lam);
        for c in 0..3 {
            out.component_mut(c)[idx] = f[c];
        }
    }
    Ok(out)
}

#[inline]
fn square_flux_at(
    sq: &SpectralField,
    lat: &FourierLattice,
    idx: usize,
    lam: f64,
) -> [Complex64; 3] {
    let xi = lat.xi(idx);
    let s = |i: usize, j: usize| sq.component(crate::spectral::sym_index(i, j))[idx];
    let mut g = [ZERO; 3];
    for (k, gk) in g.iter_mut().enumerate() {
        *gk = s(0, k) * xi[0] + s(1, k) * xi[1] + s(2, k) * xi[2];
    }
    project_minus_i(xi, lam, g)
}

/// `-i P̂ g` for `g = ξ·(u⊗v)^`.
#[inline]
fn project_minus_i(xi: [f64; 3], lam: f64, g: [Complex64; 3]) -> [Complex64; 3] {
    let dot = (g[0] * xi[0] + g[1] * xi[1] + g[2] * xi[2]) / lam;
    let mut out = [ZERO; 3];
    for c in 0..3 {
        let p = g[c] - dot * xi[c];
        out[c] = Complex64::new(p.im, -p.re);
    }
    out
}

/// `P̂(ξ) e₁` at one mode.
#[inline]
fn projected_e1(xi: [f64; 3], lam: f64) -> [f64; 3] {
    let s = xi[0] / lam;
    [1.0 - s * xi[0], -s * xi[1], -s * xi[2]]
}

#[inline]
fn cis(x: f64) -> Complex64 {
    let (s, c) = x.sin_cos();
    Complex64::new(c, s)
}

/// Per-mode weights of one uniform step of the exponential trapezoid.
struct StepWeights {
    decay: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl StepWeights {
    fn new(lams: impl Iterator<Item = f64>, dt: f64) -> Self {
        let mut w = StepWeights {
            decay: Vec::new(),
            left: Vec::new(),
            right: Vec::new(),
        };
        for lam in lams {
            let z = dt * lam;
            w.decay.push((-z).exp());
            w.left.push(dt * psi_left(z));
            w.right.push(dt * psi_right(z));
        }
        w
    }
}

/// `B(u, v)` at every node of the trajectories' common time grid.
///
/// The flux is linear in time between nodes; the exponential is integrated exactly.
pub fn bilinear_b(u: &Trajectory, v: &Trajectory) -> Result<Vec<SpectralField>, SolverError> {
    let lat = u.check()?;
    if v.check()? != lat {
        return Err(SpectralError::LatticeMismatch.into());
    }
    if u.times != v.times {
        return Err(SolverError::InvalidConfig(
            "trajectories use different time grids".into(),
        ));
    }
    let mut out = Vec::with_capacity(u.times.len());
    let mut acc = SpectralField::zeros(lat, 3);
    let mut prev = flux(&u.fields[0], &v.fields[0])?;
    out.push(acc.clone());
    for k in 1..u.times.len() {
        let dt = u.times[k] - u.times[k - 1];
        let next = flux(&u.fields[k], &v.fields[k])?;
        for idx in 0..lat.len() {
            let lam = lat.xi_sq(idx);
            if lam == 0.0 {
                continue;
            }
            let z = dt * lam;
            let (e, wl, wr) = ((-z).exp(), dt * psi_left(z), dt * psi_right(z));
            for c in 0..3 {
                let val = acc.component(c)[idx] * e
                    + prev.component(c)[idx] * wl
                    + next.component(c)[idx] * wr;
                acc.component_mut(c)[idx] = val;
            }
        }
        out.push(acc.clone());
        prev = next;
    }
    Ok(out)
}

/// `y(t_k) = κ P̂e₁ ∫₀^{t_k} e^{-(t_k-τ)λ} g(τ) dτ` at each requested time.
pub fn forcing_duhamel(
    kappa: f64,
    curve: &Curve,
    lattice: &FourierLattice,
    times: &[f64],
    settings: QuadratureSettings,
) -> Result<Vec<SpectralField>, SolverError> {
    let (ints, _) = duhamel_phase_integrals(curve, lattice, times, settings)?;
    Ok(ints
        .iter()
        .map(|i| forcing_from_integral(kappa, lattice, i))
        .collect())
}

fn forcing_from_integral(
    kappa: f64,
    lat: &FourierLattice,
    integral: &[Complex64],
) -> SpectralField {
    let mut out = SpectralField::zeros(*lat, 3);
    for idx in 0..lat.len() {
        let lam = lat.xi_sq(idx);
        if lam == 0.0 || lat.is_nyquist(idx) {
            continue;
        }
        let p = projected_e1(lat.xi(idx), lam);
        for c in 0..3 {
            out.component_mut(c)[idx] = integral[idx] * (kappa * p[c]);
        }
    }
    out
}

/// `y₀(t_k) = (g(t_k) - λ I(t_k)) V̂` at each requested time.
pub fn y0_term(
    v_hat: &SpectralField,
    curve: &Curve,
    times: &[f64],
    settings: QuadratureSettings,
) -> Result<Vec<SpectralField>, SolverError> {
    let lat = *v_hat.lattice();
    let (ints, _) = duhamel_phase_integrals(curve, &lat, times, settings)?;
    Ok(times
        .iter()
        .zip(&ints)
        .map(|(&t, i)| y0_from_integral(v_hat, curve, t, i))
        .collect())
}

fn y0_from_integral(
    v_hat: &SpectralField,
    curve: &Curve,
    t: f64,
    integral: &[Complex64],
) -> SpectralField {
    let lat = *v_hat.lattice();
    let mut out = SpectralField::zeros(lat, 3);
    for idx in 0..lat.len() {
        let lam = lat.xi_sq(idx);
        if lam == 0.0 || lat.is_nyquist(idx) {
            continue;
        }
        let m = cis(-curve.phase(t, lat.xi(idx))) - integral[idx] * lam;
        for c in 0..3 {
            out.component_mut(c)[idx] = v_hat.component(c)[idx] * m;
        }
    }
    out
}

/// Shifts a field by `γ(t)`: multiplies by `e^{-iγ(t)·ξ}`.
pub fn translate(v: &SpectralField, curve: &Curve, t: f64) -> SpectralField {
    let lat = *v.lattice();
    let mut out = v.clone();
    out.apply_multiplier(|idx| cis(-curve.phase(t, lat.xi(idx))));
    out
}

/// Measured constant of the bilinear estimate `|||B(u,v)|||_{a,T} <= η |||u|||_{2,T} |||v|||_{a,T}`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaEstimate {
    pub a: f64,
    /// Ratio for each random pair.
    pub ratios: Vec<f64>,
    /// Largest ratio, used as `η̂_a`.
    pub eta: f64,
}

/// Estimates `η̂_a` from time-constant, divergence-free random `PM²` fields.
///
/// Trial `j` uses spectral decay `|ξ|^{-2}(1+|ξ|)^{-s}` with `s` cycling
/// through 0, 0.5 and 1. `B` is evaluated with the solver's own time rule.
pub fn measure_eta(
    lattice: FourierLattice,
    times: &[f64],
    a: f64,
    trials: usize,
    seed: u64,
) -> Result<EtaEstimate, SolverError> {
    if !(2.0..3.0).contains(&a) {
        return Err(SolverError::InvalidConfig(format!(
            "eta exponent {a} outside [2, 3)"
        )));
    }
    if trials == 0 || times.len() < 2 || times[0] != 0.0 {
        return Err(SolverError::InvalidConfig(
            "eta measurement needs trials and a grid starting at 0".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(trials);
    let horizon = *times.last().expect("non-empty");
    for j in 0..trials {
        let s = [0.0, 0.5, 1.0][j % 3];
        let u = leray_project(&random_pm_field(lattice, 3, 2.0, s, true, &mut rng))?;
        let v = leray_project(&random_pm_field(lattice, 3, 2.0, s, true, &mut rng))?;
        let f = flux(&u, &v)?;
        let fields: Vec<SpectralField> = times
            .iter()
            .map(|&t| {
                let mut b = f.clone();
                b.apply_multiplier(|idx| {
                    let lam = lattice.xi_sq(idx);
                    if lam == 0.0 {
                        ZERO
                    } else {
                        Complex64::new(-(-t * lam).exp_m1() / lam, 0.0)
                    }
                });
                b
            })
            .collect();
        let b_norm = Trajectory {
            times: times.to_vec(),
            fields,
        }
        .ya_norm(a);
        let u2 = pm_norm(&u, 2.0);
        let va = pm_norm(&v, 2.0).max(horizon.powf(0.5 * a - 1.0) * pm_norm(&v, a));
        ratios.push(b_norm / (u2 * va));
    }
    let eta = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(EtaEstimate { a, ratios, eta })
}

/// Lattice fixed point of `λ V̂ = F(V, V) + κ P̂e₁`, started from the sampled Landau field.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryField {
    pub c: f64,
    pub kappa: f64,
    pub v_hat: SpectralField,
    pub iterations: usize,
    /// `‖V_{n+1} - V_n‖_{PM²} / ‖V_n‖_{PM²}` at the last iteration.
    pub last_change: f64,
    /// `‖V̂ - V̂_sampled‖_{PM²} / ‖V̂_sampled‖_{PM²}`.
    pub departure: f64,
}

/// Iteration cap for [`polish_stationary`].
pub const POLISH_MAX_ITER: usize = 200;
pub const POLISH_TOL: f64 = 1e-13;

/// Solves the stationary lattice equation by fixed-point iteration.
///
/// The sampled spectrum of `V^c` satisfies the stationary equation only up to
/// sampling and truncation error. The remainder equation is exact only for a
/// field that satisfies it on the lattice, so the sample is used as the
/// starting point of `V ← (F(V, V) + κ P̂e₁)/λ`.
pub fn polish_stationary(c: f64, lattice: FourierLattice) -> Result<StationaryField, SolverError> {
    let sol = LandauSolution::new(c)?;
    let kappa = sol.kappa();
    let sampled = sol.sampled_spectrum(lattice);
    let base = pm_norm(&sampled, 2.0);
    let mut v = sampled.clone();
    let mut last_change = f64::INFINITY;
    let mut prev_change = f64::INFINITY;
    for it in 1..=POLISH_MAX_ITER {
        let f = flux_square(&v)?;
        let mut next = SpectralField::zeros(lattice, 3);
        for idx in 0..lattice.len() {
            let lam = lattice.xi_sq(idx);
            if lam == 0.0 || lattice.is_nyquist(idx) {
                continue;
            }
            let p = projected_e1(lattice.xi(idx), lam);
            for c in 0..3 {
                next.component_mut(c)[idx] = (f.component(c)[idx] + kappa * p[c]) / lam;
            }
        }
        let mut diff = next.clone();
        diff.add_scaled(&v, -1.0)?;
        let scale = pm_norm(&next, 2.0);
        last_change = pm_norm(&diff, 2.0) / scale;
        v = next;
        if !last_change.is_finite() {
            return Err(SolverError::PolishFailed("non-finite iterate".into()));
        }
        if last_change <= POLISH_TOL {
            let mut d = v.clone();
            d.add_scaled(&sampled, -1.0)?;
            return Ok(StationaryField {
                c,
                kappa,
                departure: pm_norm(&d, 2.0) / base,
                v_hat: v,
                iterations: it,
                last_change,
            });
        }
        if it > 10 && last_change > prev_change {
            return Err(SolverError::PolishFailed(format!(
                "increment grew from {prev_change:e} to {last_change:e} at iteration {it}"
            )));
        }
        prev_change = last_change;
    }
    Err(SolverError::PolishFailed(format!(
        "relative change {last_change:e} after {POLISH_MAX_ITER} iterations"
    )))
}

/// Smallness diagnostics evaluated before iterating.
#[derive(Debug, Clone, PartialEq)]
pub struct Smallness {
    pub eta: EtaEstimate,
    /// `1/(8η̂₂)`, the admissible `|κ|` in full mode.
    pub kappa_threshold: f64,
    /// `2η̂₂ ‖V^c‖_{PM²}` in remainder mode.
    pub lambda_hat: Option<f64>,
    /// `4η̂₂ sup_t ‖y₀(t)‖_{PM²}` in remainder mode, to be compared with `(1 - λ̂)²`.
    pub y0_margin: Option<f64>,
    pub satisfied: bool,
    /// A-priori bound on `|||x|||_{2,T}`: `4|κ|` for `u`, `4‖V‖/(1 - λ̂)` for `ω`.
    pub bound: f64,
    pub overridden: bool,
}

/// One Picard iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRow {
    pub iter: usize,
    /// `|||x_n|||_{2,T}` of the new iterate.
    pub norm_pm2: f64,
    /// `|||x_n|||_{a,T}` of the new iterate.
    pub norm_pm_a: f64,
    /// `|||x_n - x_{n-1}|||_{2,T}`.
    pub increment: f64,
    /// Ratio of consecutive increments; not defined for the first iteration.
    pub ratio: Option<f64>,
    /// Largest `|ξ·x̂| / max |ξ||x̂|` over the nodes.
    pub divergence_max: f64,
    /// Late-window residual of the modewise ODE for the previous iterate, relative to `|κ|`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub rows: Vec<IterationRow>,
    pub converged: bool,
    pub report_exponent: f64,
    pub smallness: Smallness,
}

/// Converged (or last) iterate, stored compactly.
///
/// Outside the 2/3-rule band every iterate equals its affine term, which is
/// rebuilt from the stored Duhamel integrals on demand.
#[derive(Debug, Clone)]
pub struct Solution {
    pub mode: Mode,
    pub kappa: f64,
    pub curve: Curve,
    pub lattice: FourierLattice,
    pub times: Vec<f64>,
    pub report: IterationReport,
    /// Polished stationary field in remainder mode.
    pub stationary: Option<StationaryField>,
    integrals: Vec<Vec<Complex64>>,
    band: Vec<usize>,
    values: Vec<Vec<Complex64>>,
}

impl Solution {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// The iterated unknown (`u` or `ω`) at node `k`.
    pub fn field(&self, k: usize) -> SpectralField {
        let mut f = affine_term(
            self.mode,
            self.kappa,
            &self.curve,
            &self.lattice,
            self.times[k],
            &self.integrals[k],
            self.stationary.as_ref().map(|s| &s.v_hat),
        );
        let nb = self.band.len();
        for c in 0..3 {
            let comp = f.component_mut(c);
            for (m, &idx) in self.band.iter().enumerate() {
                comp[idx] = self.values[k][c * nb + m];
            }
        }
        f
    }

    /// The full velocity at node `k`: `u`, or `ω + V_γ` in remainder mode.
    pub fn velocity(&self, k: usize) -> SpectralField {
        let mut f = self.field(k);
        if let Some(s) = &self.stationary {
            f.add_scaled(&translate(&s.v_hat, &self.curve, self.times[k]), 1.0)
                .expect("same lattice");
        }
        f
    }

    pub fn trajectory(&self) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            fields: (0..self.len()).map(|k| self.field(k)).collect(),
        }
    }

    pub fn velocity_trajectory(&self) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            fields: (0..self.len()).map(|k| self.velocity(k)).collect(),
        }
    }
}

fn affine_term(
    mode: Mode,
    kappa: f64,
    curve: &Curve,
    lat: &FourierLattice,
    t: f64,
    integral: &[Complex64],
    v_hat: Option<&SpectralField>,
) -> SpectralField {
    match mode {
        Mode::FullU => forcing_from_integral(kappa, lat, integral),
        Mode::RemainderOmega => {
            let mut f = y0_from_integral(v_hat.expect("stationary field"), curve, t, integral);
            f.scale(Complex64::new(-1.0, 0.0));
            f
        }
    }
}

/// Per-node maximum of `λ^{a/2} max_c |x̂_c|` over modes outside the band.
fn out_of_band_norm(f: &SpectralField, lat: &FourierLattice, a: f64) -> f64 {
    let mut best: f64 = 0.0;
    for idx in 0..lat.len() {
        let lam = lat.xi_sq(idx);
        if lam == 0.0 || lat.in_band(idx) {
            continue;
        }
        let m = (0..3)
            .map(|c| f.component(c)[idx].norm())
            .fold(0.0, f64::max);
        best = best.max(lam.powf(0.5 * a) * m);
    }
    best
}

/// Runs the Picard iteration configured by `cfg`.
pub fn picard_solve(cfg: &SolverConfig) -> Result<Solution, SolverError> {
    cfg.validate()?;
    let lat = cfg.lattice;
    let times = cfg.times();
    let nt = times.len();
    let dt = cfg.horizon / cfg.steps as f64;
    let a = cfg.report_exponent;

    let eta = match &cfg.eta {
        Some(e) => e.clone(),
        None => measure_eta(lat, &times, 2.0, cfg.eta_trials, cfg.seed)?,
    };
    let stationary = match cfg.mode {
        Mode::FullU => None,
        Mode::RemainderOmega => Some(polish_stationary(cfg.c.expect("validated"), lat)?),
    };
    let (integrals, _) = duhamel_phase_integrals(&cfg.curve, &lat, &times, cfg.quadrature)?;
    let affine: Vec<SpectralField> = times
        .iter()
        .zip(&integrals)
        .map(|(&t, i)| {
            affine_term(
                cfg.mode,
                cfg.kappa,
                &cfg.curve,
                &lat,
                t,
                i,
                stationary.as_ref().map(|s| &s.v_hat),
            )
        })
        .collect();

    let smallness = smallness_check(cfg, &eta, stationary.as_ref(), &affine)?;

    let band: Vec<usize> = (0..lat.len())
        .filter(|&i| lat.in_band(i) && lat.xi_sq(i) > 0.0)
        .collect();
    let nb = band.len();
    let xis: Vec<[f64; 3]> = band.iter().map(|&i| lat.xi(i)).collect();
    let lams: Vec<f64> = band.iter().map(|&i| lat.xi_sq(i)).collect();
    let w2 = lams.clone();
    let wa: Vec<f64> = lams.iter().map(|l| l.powf(0.5 * a)).collect();
    let steps = StepWeights::new(lams.iter().cloned(), dt);
    let out_norm2: Vec<f64> = affine
        .iter()
        .map(|f| out_of_band_norm(f, &lat, 2.0))
        .collect();
    let out_norma: Vec<f64> = affine
        .iter()
        .map(|f| out_of_band_norm(f, &lat, a))
        .collect();

    let gather = |f: &SpectralField| -> Vec<Complex64> {
        let mut v = vec![ZERO; 3 * nb];
        for c in 0..3 {
            let comp = f.component(c);
            for (m, &idx) in band.iter().enumerate() {
                v[c * nb + m] = comp[idx];
            }
        }
        v
    };
    let mut affine_band: Vec<Vec<Complex64>> = affine.iter().map(gather).collect();
    drop(affine);

    // Remainder mode: B(V_γ, V_γ) = I(t) F(V,V) is integrated exactly, not by the step rule.
    let v_band = stationary.as_ref().map(|s| gather(&s.v_hat));
    if let Some(s) = &stationary {
        let fv = gather(&flux_square(&s.v_hat)?);
        for (x, integral) in affine_band.iter_mut().zip(&integrals) {
            for (m, &idx) in band.iter().enumerate() {
                for c in 0..3 {
                    x[c * nb + m] -= integral[idx] * fv[c * nb + m];
                }
            }
        }
    }
    let phases: Option<Vec<Vec<Complex64>>> = stationary.as_ref().map(|_| {
        times
            .iter()
            .map(|&t| xis.iter().map(|xi| cis(-cfg.curve.phase(t, *xi))).collect())
            .collect()
    });
    let forcing_band: Vec<Vec<Complex64>> = times
        .iter()
        .map(|&t| {
            let mut v = vec![ZERO; 3 * nb];
            for m in 0..nb {
                let g = cis(-cfg.curve.phase(t, xis[m])) * cfg.kappa;
                let p = projected_e1(xis[m], lams[m]);
                for c in 0..3 {
                    v[c * nb + m] = g * p[c];
                }
            }
            v
        })
        .collect();

    let mut current: Vec<Vec<Complex64>> = match cfg.initial {
        InitialIterate::Zero => vec![vec![ZERO; 3 * nb]; nt],
        InitialIterate::Forcing => affine_band.clone(),
    };
    let mut first_from_zero = cfg.initial == InitialIterate::Zero;
    let mut rows: Vec<IterationRow> = Vec::new();
    let mut converged = false;
    let mut scratch = SpectralField::zeros(lat, 3);
    let late_start = LATE_WINDOW * cfg.horizon;
    let kappa_scale = if cfg.kappa == 0.0 {
        1.0
    } else {
        cfg.kappa.abs()
    };

    for iter in 1..=cfg.max_iter {
        // Velocity (u, or ω + V_γ) in the band at every node, and its flux F(w, w).
        let velocity: Vec<Vec<Complex64>> = (0..nt)
            .map(|k| {
                let mut w = current[k].clone();
                if let (Some(vb), Some(ph)) = (&v_band, &phases) {
                    for c in 0..3 {
                        for m in 0..nb {
                            w[c * nb + m] += ph[k][m] * vb[c * nb + m];
                        }
                    }
                }
                w
            })
            .collect();
        let mut fluxes: Vec<Vec<Complex64>> = Vec::with_capacity(nt);
        for w in &velocity {
            for c in 0..3 {
                let comp = scratch.component_mut(c);
                for (m, &idx) in band.iter().enumerate() {
                    comp[idx] = w[c * nb + m];
                }
            }
            let sq = dealiased_square(&scratch)?;
            let mut f = vec![ZERO; 3 * nb];
            for (m, &idx) in band.iter().enumerate() {
                let v = square_flux_at(&sq, &lat, idx, lams[m]);
                for c in 0..3 {
                    f[c * nb + m] = v[c];
                }
            }
            fluxes.push(f);
        }

        // Residual of the modewise ODE for the current iterate.
        let mut residual: f64 = 0.0;
        for k in 1..nt - 1 {
            if times[k] < late_start {
                continue;
            }
            for c in 0..3 {
                for m in 0..nb {
                    let i = c * nb + m;
                    let dudt = (velocity[k + 1][i] - velocity[k - 1][i]) / (2.0 * dt);
                    let r = dudt + velocity[k][i] * lams[m] - fluxes[k][i] - forcing_band[k][i];
                    residual = residual.max(r.norm());
                }
            }
        }
        residual /= kappa_scale;
        drop(velocity);

        let mut next: Vec<Vec<Complex64>> = Vec::with_capacity(nt);
        let mut acc = vec![ZERO; 3 * nb];
        for k in 0..nt {
            if k > 0 {
                for c in 0..3 {
                    for m in 0..nb {
                        let i = c * nb + m;
                        acc[i] = acc[i] * steps.decay[m]
                            + fluxes[k - 1][i] * steps.left[m]
                            + fluxes[k][i] * steps.right[m];
                    }
                }
            }
            let mut x = affine_band[k].clone();
            for (xi, bi) in x.iter_mut().zip(&acc) {
                *xi += *bi;
            }
            next.push(x);
        }
        drop(fluxes);

        let mut increment: f64 = 0.0;
        let mut norm2: f64 = 0.0;
        let mut norma: f64 = 0.0;
        let mut div_max: f64 = 0.0;
        for k in 0..nt {
            let mut d2: f64 = if first_from_zero { out_norm2[k] } else { 0.0 };
            let mut n2: f64 = out_norm2[k];
            let mut na: f64 = out_norma[k];
            let mut dot_max: f64 = 0.0;
            let mut mag_max: f64 = 0.0;
            for m in 0..nb {
                let mut dm: f64 = 0.0;
                let mut vm: f64 = 0.0;
                let mut dot = ZERO;
                for c in 0..3 {
                    let i = c * nb + m;
                    dm = dm.max((next[k][i] - current[k][i]).norm());
                    vm = vm.max(next[k][i].norm());
                    dot += next[k][i] * xis[m][c];
                }
                d2 = d2.max(w2[m] * dm);
                n2 = n2.max(w2[m] * vm);
                na = na.max(wa[m] * vm);
                dot_max = dot_max.max(dot.norm());
                mag_max = mag_max.max(lams[m].sqrt() * vm);
            }
            increment = increment.max(d2);
            norm2 = norm2.max(n2);
            if times[k] > 0.0 {
                norma = norma.max(times[k].powf(0.5 * a - 1.0) * na);
            }
            if mag_max > 0.0 {
                div_max = div_max.max(dot_max / mag_max);
            }
        }
        let norma = norma.max(norm2);
        first_from_zero = false;
        let ratio = rows.last().map(|r: &IterationRow| {
            if r.increment == 0.0 {
                0.0
            } else {
                increment / r.increment
            }
        });
        rows.push(IterationRow {
            iter,
            norm_pm2: norm2,
            norm_pm_a: norma,
            increment,
            ratio,
            divergence_max: div_max,
            residual,
        });
        current = next;
        let limit = DIVERGENCE_FACTOR * smallness.bound;
        if !norm2.is_finite() || (smallness.bound > 0.0 && norm2 > limit) {
            return Err(SolverError::DivergedIterate {
                iteration: iter,
                norm: norm2,
                bound: limit,
            });
        }
        if increment <= cfg.tol {
            converged = true;
            break;
        }
    }

    let report = IterationReport {
        rows,
        converged,
        report_exponent: a,
        smallness,
    };
    Ok(Solution {
        mode: cfg.mode,
        kappa: cfg.kappa,
        curve: cfg.curve.clone(),
        lattice: lat,
        times,
        report,
        stationary,
        integrals,
        band,
        values: current,
    })
}

/// Like [`picard_solve`], but a run that exhausts `max_iter` is an error.
pub fn picard_solve_converged(cfg: &SolverConfig) -> Result<Solution, SolverError> {
    let sol = picard_solve(cfg)?;
    if !sol.report.converged {
        let last = sol
            .report
            .rows
            .last()
            .map(|r| r.increment)
            .unwrap_or(f64::NAN);
        return Err(SolverError::NotConverged {
            iterations: sol.report.rows.len(),
            increment: last,
        });
    }
    Ok(sol)
}

fn smallness_check(
    cfg: &SolverConfig,
    eta: &EtaEstimate,
    stationary: Option<&StationaryField>,
    affine: &[SpectralField],
) -> Result<Smallness, SolverError> {
    let kappa_threshold = 1.0 / (8.0 * eta.eta);
    let (lambda_hat, y0_margin, satisfied, bound, why) = match cfg.mode {
        Mode::FullU => {
            let ok = cfg.kappa.abs() < kappa_threshold;
            (
                None,
                None,
                ok,
                4.0 * cfg.kappa.abs(),
                format!(
                    "|kappa| = {} is not below 1/(8 eta) = {kappa_threshold}",
                    cfg.kappa.abs()
                ),
            )
        }
        Mode::RemainderOmega => {
            let v = pm_norm(&stationary.expect("remainder mode").v_hat, 2.0);
            let lam = 2.0 * eta.eta * v;
            let y0_sup = affine.iter().map(|f| pm_norm(f, 2.0)).fold(0.0, f64::max);
            let margin = 4.0 * eta.eta * y0_sup;
            let ok = lam < 1.0 && margin < (1.0 - lam).powi(2);
            let bound = if lam < 1.0 {
                4.0 * v / (1.0 - lam)
            } else {
                f64::INFINITY
            };
            (
                Some(lam),
                Some(margin),
                ok,
                bound,
                format!(
                    "lambda = {lam}, 4 eta sup|y0| = {margin}, (1 - lambda)^2 = {}",
                    (1.0 - lam).powi(2)
                ),
            )
        }
    };
    if !satisfied && !cfg.override_smallness {
        return Err(SolverError::SmallnessViolated(why));
    }
    Ok(Smallness {
        eta: eta.clone(),
        kappa_threshold,
        lambda_hat,
        y0_margin,
        satisfied,
        bound,
        overridden: !satisfied,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PressurePart {
    Full,
    /// `p - Q^c_γ`.
    Regular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    pub t: f64,
    pub p_hat: SpectralField,
    pub part: PressurePart,
}

/// `p̂ = -Σ ξ_iξ_j/λ (u_iu_j)^ - κ iξ₁/λ e^{-iγ(t)·ξ}`; the zero mode is zero.
pub fn pressure_recover(
    u: &SpectralField,
    kappa: f64,
    curve: &Curve,
    t: f64,
) -> Result<PressureField, SolverError> {
    let sq = dealiased_square(u)?;
    let lat = *u.lattice();
    let mut p = SpectralField::zeros(lat, 1);
    for idx in 0..lat.len() {
        let lam = lat.xi_sq(idx);
        if lam == 0.0 {
            continue;
        }
        let xi = lat.xi(idx);
        let mut val = quadratic_pressure(&sq, xi, idx, lam);
        if !lat.is_nyquist(idx) {
            val += cis(-curve.phase(t, xi)) * Complex64::new(0.0, -kappa * xi[0] / lam);
        }
        p.component_mut(0)[idx] = val;
    }
    Ok(PressureField {
        t,
        p_hat: p,
        part: PressurePart::Full,
    })
}

/// `p - Q^c_γ = -Σ ξ_iξ_j/λ [(w_iw_j)^ - g (V_iV_j)^]` with `w = ω + V_γ`.
pub fn pressure_recover_regular(
    omega: &SpectralField,
    v_hat: &SpectralField,
    curve: &Curve,
    t: f64,
) -> Result<PressureField, SolverError> {
    let v_gamma = translate(v_hat, curve, t);
    let mut w = omega.clone();
    w.add_scaled(&v_gamma, 1.0)?;
    let sq_w = dealiased_square(&w)?;
    let sq_v = dealiased_square(&v_gamma)?;
    let lat = *omega.lattice();
    let mut p = SpectralField::zeros(lat, 1);
    for idx in 0..lat.len() {
        let lam = lat.xi_sq(idx);
        if lam == 0.0 {
            continue;
        }
        let xi = lat.xi(idx);
        p.component_mut(0)[idx] =
            quadratic_pressure(&sq_w, xi, idx, lam) - quadratic_pressure(&sq_v, xi, idx, lam);
    }
    Ok(PressureField {
        t,
        p_hat: p,
        part: PressurePart::Regular,
    })
}

#[inline]
fn quadratic_pressure(sq: &SpectralField, xi: [f64; 3], idx: usize, lam: f64) -> Complex64 {
    let mut acc = ZERO;
    for i in 0..3 {
        for j in 0..3 {
            acc += sq.component(crate::spectral::sym_index(i, j))[idx] * (xi[i] * xi[j]);
        }
    }
    -acc / lam
}

/// Residual of `∂_t û + λû + iξ·(u⊗u)^ + iξp̂ = κ e^{-iγ(t)·ξ} e₁` on a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct MildResidual {
    /// Interior nodes at which the residual was evaluated.
    pub times: Vec<f64>,
    /// `max_ξ |residual|` at each of those nodes.
    pub per_node: Vec<f64>,
    /// Largest value over nodes with `t >= LATE_WINDOW·T`, divided by `|κ|` when `κ ≠ 0`.
    pub late_max: f64,
}

/// Evaluates the residual with a central difference in time at interior nodes.
///
/// The initial layer, where `∂_t³ û` grows like `λ² e^{-tλ}`, is excluded from
/// `late_max`; the per-node values cover all interior nodes.
pub fn mild_residual_check(
    traj: &Trajectory,
    kappa: f64,
    curve: &Curve,
) -> Result<MildResidual, SolverError> {
    let lat = traj.check()?;
    if traj.times.len() < 3 {
        return Err(SolverError::InvalidConfig(
            "need at least three nodes".into(),
        ));
    }
    let dt = traj.times[1] - traj.times[0];
    if traj
        .times
        .windows(2)
        .any(|w| ((w[1] - w[0]) - dt).abs() > 1e-12 * dt.max(1.0))
    {
        return Err(SolverError::InvalidConfig(
            "time grid must be uniform".into(),
        ));
    }
    let horizon = *traj.times.last().expect("non-empty");
    let mut times = Vec::new();
    let mut per_node = Vec::new();
    let mut late: f64 = 0.0;
    for k in 1..traj.times.len() - 1 {
        let t = traj.times[k];
        let u = &traj.fields[k];
        let sq = dealiased_square(u)?;
        let p = pressure_recover(u, kappa, curve, t)?;
        let mut worst: f64 = 0.0;
        for idx in 0..lat.len() {
            let lam = lat.xi_sq(idx);
            let xi = lat.xi(idx);
            let g = cis(-curve.phase(t, xi));
            for i in 0..3 {
                let dudt = (traj.fields[k + 1].component(i)[idx]
                    - traj.fields[k - 1].component(i)[idx])
                    / (2.0 * dt);
                let mut conv = ZERO;
                for (j, x) in xi.iter().enumerate() {
                    conv += sq.component(crate::spectral::sym_index(i, j))[idx] * *x;
                }
                let conv = Complex64::new(-conv.im, conv.re);
                let grad_p = p.p_hat.component(0)[idx] * Complex64::new(0.0, xi[i]);
                let force = if i == 0 && lam > 0.0 && !lat.is_nyquist(idx) {
                    g * kappa
                } else {
                    ZERO
                };
                let r = dudt + u.component(i)[idx] * lam + conv + grad_p - force;
                worst = worst.max(r.norm());
            }
        }
        if t >= LATE_WINDOW * horizon {
            late = late.max(worst);
        }
        times.push(t);
        per_node.push(worst);
    }
    let late_max = if kappa == 0.0 {
        late
    } else {
        late / kappa.abs()
    };
    Ok(MildResidual {
        times,
        per_node,
        late_max,
    })
}
