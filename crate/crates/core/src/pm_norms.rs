//! Pseudomeasure norms, Lebesgue and weak-Lebesgue norms, and numerical
//! certification of the inequalities that connect them.
//!
//! `‖v‖_{PM^a} = sup_ξ |ξ|^a |v̂(ξ)|`, evaluated over the lattice modes. The
//! certifiers compute the ratio `lhs / rhs` of an inequality for a concrete
//! field; a ratio that stays bounded over a family of fields is numerical
//! evidence for the inequality, and where the sharp constant is known in closed
//! form it is compared against it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::lattice::FourierLattice;
use crate::spectral::{
    dealiased_product, inverse_transform, PhysicalField, SpectralError, SpectralField,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("{name} = {value} outside {range}")]
    ExponentOutOfRange {
        name: &'static str,
        value: f64,
        range: String,
    },
    #[error("trajectory has {times} times but {fields} fields")]
    TrajectoryMismatch { times: usize, fields: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

fn out_of_range(name: &'static str, value: f64, range: impl Into<String>) -> NormError {
    NormError::ExponentOutOfRange {
        name,
        value,
        range: range.into(),
    }
}

/// `sup_ξ |ξ|^a |v̂(ξ)|`, maximized over components for vector and tensor fields.
///
/// The zero mode is excluded.
pub fn pm_norm(v: &SpectralField, a: f64) -> f64 {
    pm_norm_in_shell(v, a, 0.0, f64::INFINITY)
}

/// [`pm_norm`] restricted to the modes with `lo ≤ |ξ| ≤ hi`.
pub fn pm_norm_in_shell(v: &SpectralField, a: f64, lo: f64, hi: f64) -> f64 {
    let lat = v.lattice();
    let (lo2, hi2) = (lo * lo, hi * hi);
    let mut best: f64 = 0.0;
    for idx in 0..lat.len() {
        let lam = lat.xi_sq(idx);
        if lam == 0.0 || lam < lo2 || lam > hi2 {
            continue;
        }
        let mag = v
            .components()
            .iter()
            .map(|c| c[idx].norm())
            .fold(0.0, f64::max);
        let w = if a == 0.0 { 1.0 } else { lam.powf(0.5 * a) };
        best = best.max(w * mag);
    }
    best
}

/// Time-weighted pseudomeasure norms of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YatNorm {
    pub a: f64,
    pub horizon: f64,
    /// `sup_t ‖u(t)‖_{PM²}`.
    pub pm2_sup: f64,
    /// `sup_{t>0} t^{a/2-1} ‖u(t)‖_{PM^a}`.
    pub weighted_sup: f64,
}

impl YatNorm {
    /// The larger of the two seminorms, which together make up the norm.
    pub fn value(&self) -> f64 {
        self.pm2_sup.max(self.weighted_sup)
    }
}

pub fn yat_norm(times: &[f64], fields: &[SpectralField], a: f64) -> Result<YatNorm, NormError> {
    if times.len() != fields.len() {
        return Err(NormError::TrajectoryMismatch {
            times: times.len(),
            fields: fields.len(),
        });
    }
    let mut pm2_sup: f64 = 0.0;
    let mut weighted_sup: f64 = 0.0;
    for (&t, f) in times.iter().zip(fields) {
        pm2_sup = pm2_sup.max(pm_norm(f, 2.0));
        if t > 0.0 {
            weighted_sup = weighted_sup.max(t.powf(0.5 * a - 1.0) * pm_norm(f, a));
        }
    }
    Ok(YatNorm {
        a,
        horizon: times.last().copied().unwrap_or(0.0),
        pm2_sup,
        weighted_sup,
    })
}

/// `(Σ |f|^q h³)^{1/q}`, or the maximum for `q = ∞`.
pub fn lq_norm(f: &PhysicalField, q: f64) -> f64 {
    let mags = f.magnitudes();
    if q.is_infinite() {
        return mags.iter().cloned().fold(0.0, f64::max);
    }
    let vol = f.lattice().cell_volume();
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let s: f64 = mags.iter().map(|m| (m / peak).powf(q)).sum();
    peak * (s * vol).powf(1.0 / q)
}

/// Discrete weak-`L^p` quasinorm `sup_λ λ |{|f| > λ}|^{1/p}`.
///
/// With the site magnitudes sorted as `m_1 >= m_2 >= …`, the level set at
/// `λ` just below `m_k` contains `k` cells, giving `max_k m_k (k h³)^{1/p}`.
pub fn weak_lp_norm(f: &PhysicalField, p: f64) -> f64 {
    let mut mags = f.magnitudes();
    mags.sort_by(|a, b| b.total_cmp(a));
    let vol = f.lattice().cell_volume();
    let mut best: f64 = 0.0;
    for (k, m) in mags.iter().enumerate() {
        if *m == 0.0 {
            break;
        }
        best = best.max(m * ((k + 1) as f64 * vol).powf(1.0 / p));
    }
    best
}

/// The inequalities the certifiers test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Lemma {
    /// `‖uv‖_{PM^{a+b-3}} <= C(a,b) ‖u‖_{PM^a} ‖v‖_{PM^b}`.
    Product,
    /// `‖v‖_{L^q} <= C ‖v‖_{PM^a}^{1-β} ‖v‖_{PM^b}^β`.
    Interpolation,
    /// `‖∇ω‖_{L²} <= C ‖ω‖_{PM²}^{1-θ} ‖ω‖_{PM^β}^θ`.
    Gradient,
    /// `‖u‖_{L^{3,∞}} <= C ‖u‖_{PM²}`.
    WeakL3,
    /// `‖u ⊗ u‖_{L^{p/2,∞}} <= ‖u‖²_{L^{p,∞}}`.
    Tensor,
}

impl Lemma {
    pub const ALL: [Lemma; 5] = [
        Lemma::Product,
        Lemma::Interpolation,
        Lemma::Gradient,
        Lemma::WeakL3,
        Lemma::Tensor,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Lemma::Product => "product",
            Lemma::Interpolation => "interpolation",
            Lemma::Gradient => "gradient",
            Lemma::WeakL3 => "weak-l3",
            Lemma::Tensor => "tensor",
        }
    }

    pub fn from_name(s: &str) -> Option<Lemma> {
        Lemma::ALL.iter().copied().find(|l| l.name() == s)
    }
}

/// Outcome of one certification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub lemma: Lemma,
    /// `lhs / rhs`.
    pub ratio: f64,
    /// Threshold the ratio is compared against; infinite when no sharp constant is known.
    pub bound: f64,
    /// Interpolation exponent (`β` or `θ`) when the inequality has one.
    pub exponent: Option<f64>,
    pub pass: bool,
}

impl InequalityReport {
    fn new(lemma: Lemma, ratio: f64, bound: f64, exponent: Option<f64>) -> Self {
        let pass = ratio.is_finite() && ratio >= 0.0 && ratio <= bound;
        Self {
            lemma,
            ratio,
            bound,
            exponent,
            pass,
        }
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Admissible Lebesgue exponents for the interpolation inequality with `0 <= a < b < 3`, `b > 3/2`.
///
/// Returns `(lo, hi, lo_included)`.
pub fn interpolation_q_range(a: f64, b: f64) -> Result<(f64, f64, bool), NormError> {
    if !(0.0..3.0).contains(&a) {
        return Err(out_of_range("a", a, "[0, 3)"));
    }
    if !(b > a && b < 3.0 && b > 1.5) {
        return Err(out_of_range("b", b, "(max(a, 3/2), 3)"));
    }
    let hi = 3.0 / (3.0 - b);
    if a < 1.5 {
        Ok((2.0, hi, true))
    } else {
        Ok((3.0 / (3.0 - a), hi, false))
    }
}

/// `β = (q(3-a) - 3) / (q(b-a))`.
pub fn interpolation_beta(a: f64, b: f64, q: f64) -> f64 {
    (q * (3.0 - a) - 3.0) / (q * (b - a))
}

pub fn certify_interpolation(
    v: &SpectralField,
    a: f64,
    b: f64,
    q: f64,
) -> Result<InequalityReport, NormError> {
    let (lo, hi, closed) = interpolation_q_range(a, b)?;
    let inside = if closed { q >= lo } else { q > lo } && q < hi;
    if !inside {
        return Err(out_of_range(
            "q",
            q,
            format!("{}{lo}, {hi})", if closed { "[" } else { "(" }),
        ));
    }
    let beta = interpolation_beta(a, b, q);
    let lhs = lq_norm(&inverse_transform(v)?, q);
    let rhs = pm_norm(v, a).powf(1.0 - beta) * pm_norm(v, b).powf(beta);
    Ok(InequalityReport::new(
        Lemma::Interpolation,
        ratio(lhs, rhs),
        f64::INFINITY,
        Some(beta),
    ))
}

/// Sharp constant `C(a,b) = (2π)^{-3} sup_ξ |ξ|^{a+b-3} ∫ |ξ-η|^{-a} |η|^{-b} dη`.
///
/// Finite exactly for `a, b < 3` and `a + b > 3`.
pub fn product_constant(a: f64, b: f64) -> Result<f64, NormError> {
    check_product_exponents(a, b)?;
    let g = |x: f64| gamma(x);
    let riesz = PI.powf(1.5) * g((3.0 - a) / 2.0) * g((3.0 - b) / 2.0) * g((a + b - 3.0) / 2.0)
        / (g(a / 2.0) * g(b / 2.0) * g((6.0 - a - b) / 2.0));
    Ok(riesz / (2.0 * PI).powi(3))
}

fn check_product_exponents(a: f64, b: f64) -> Result<(), NormError> {
    if !(a > 0.0 && a < 3.0) {
        return Err(out_of_range("a", a, "(0, 3)"));
    }
    if !(b > 0.0 && b < 3.0) {
        return Err(out_of_range("b", b, "(0, 3)"));
    }
    if a + b <= 3.0 {
        return Err(out_of_range("a + b", a + b, "(3, 6)"));
    }
    Ok(())
}

/// Ratio `‖uv‖_{PM^{a+b-3}} / (‖u‖_{PM^a} ‖v‖_{PM^b})` for scalar fields, against `1.05·C(a,b)`.
pub fn certify_product(
    u: &SpectralField,
    v: &SpectralField,
    a: f64,
    b: f64,
) -> Result<InequalityReport, NormError> {
    let c = product_constant(a, b)?;
    let uv = dealiased_product(u, v)?;
    let lhs = pm_norm(&uv, a + b - 3.0);
    let rhs = pm_norm(u, a) * pm_norm(v, b);
    Ok(InequalityReport::new(
        Lemma::Product,
        ratio(lhs, rhs),
        1.05 * c,
        None,
    ))
}

/// `θ = 1 / (2(β - 2))`, the exponent that makes the inequality dilation invariant.
pub fn gradient_theta(beta: f64) -> f64 {
    1.0 / (2.0 * (beta - 2.0))
}

/// `‖∇ω‖_{L²}` by Plancherel: `((2π)^{-3} ∫ |ξ|² |ω̂|² dξ)^{1/2}`.
pub fn gradient_l2(omega: &SpectralField) -> f64 {
    let lat = omega.lattice();
    let mut s = 0.0;
    for idx in 0..lat.len() {
        let lam = lat.xi_sq(idx);
        s += lam
            * omega
                .components()
                .iter()
                .map(|c| c[idx].norm_sqr())
                .sum::<f64>();
    }
    (s / lat.box_length().powi(3)).sqrt()
}

pub fn certify_gradient_embedding(
    omega: &SpectralField,
    beta: f64,
) -> Result<InequalityReport, NormError> {
    if !(beta > 2.5 && beta <= 3.0) {
        return Err(out_of_range("β", beta, "(5/2, 3]"));
    }
    let theta = gradient_theta(beta);
    let lhs = gradient_l2(omega);
    let rhs = pm_norm(omega, 2.0).powf(1.0 - theta) * pm_norm(omega, beta).powf(theta);
    Ok(InequalityReport::new(
        Lemma::Gradient,
        ratio(lhs, rhs),
        f64::INFINITY,
        Some(theta),
    ))
}

pub fn certify_weak_l3(u: &SpectralField) -> Result<InequalityReport, NormError> {
    let lhs = weak_lp_norm(&inverse_transform(u)?, 3.0);
    let rhs = pm_norm(u, 2.0);
    Ok(InequalityReport::new(
        Lemma::WeakL3,
        ratio(lhs, rhs),
        f64::INFINITY,
        None,
    ))
}

/// Pointwise tensor square `u_i u_j` of a vector field, in physical space.
pub fn tensor_square(u: &PhysicalField) -> PhysicalField {
    let nc = u.n_components();
    let len = u.lattice().len();
    let comps = (0..nc * nc)
        .map(|c| {
            let (i, j) = (c / nc, c % nc);
            (0..len)
                .map(|s| u.component(i)[s] * u.component(j)[s])
                .collect()
        })
        .collect();
    PhysicalField::from_components(*u.lattice(), comps).expect("same lattice")
}

/// Ratio `‖u⊗u‖_{L^{p/2,∞}} / ‖u‖²_{L^{p,∞}}` with Frobenius and Euclidean norms, against 1.05.
pub fn certify_tensor(u: &PhysicalField, p: f64) -> Result<InequalityReport, NormError> {
    if !(p > 2.0) {
        return Err(out_of_range("p", p, "(2, ∞)"));
    }
    let lhs = weak_lp_norm(&tensor_square(u), 0.5 * p);
    let rhs = weak_lp_norm(u, p).powi(2);
    Ok(InequalityReport::new(
        Lemma::Tensor,
        ratio(lhs, rhs),
        1.05,
        None,
    ))
}

/// Random Hermitian field with `|v̂(ξ)| = |ξ|^{-a} (1 + |ξ|)^{-s}` and independent uniform phases.
///
/// The zero mode and the Nyquist planes are zero. With `band_limited` the
/// spectrum is also restricted to the 2/3-rule band.
pub fn random_pm_field(
    lattice: FourierLattice,
    n_components: usize,
    a: f64,
    s: f64,
    band_limited: bool,
    rng: &mut ChaCha8Rng,
) -> SpectralField {
    let mut out = SpectralField::zeros(lattice, n_components);
    for c in 0..n_components {
        let comp = out.component_mut(c);
        for idx in 0..lattice.len() {
            let conj = lattice.conjugate_index(idx);
            if conj < idx {
                continue;
            }
            let lam = lattice.xi_sq(idx);
            if lam == 0.0 || lattice.is_nyquist(idx) || (band_limited && !lattice.in_band(idx)) {
                continue;
            }
            let r = lam.sqrt();
            let amp = r.powf(-a) * (1.0 + r).powf(-s);
            let theta: f64 = rng.gen_range(0.0..2.0 * PI);
            let z = Complex64::from_polar(amp, theta);
            comp[idx] = z;
            comp[conj] = z.conj();
        }
    }
    out
}

/// One row of a certification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRow {
    pub trial: usize,
    pub report: InequalityReport,
    /// Human-readable parameters of the trial, e.g. `a=2 b=2 s=0.5`.
    pub params: String,
}

const DECAY_RATES: [f64; 3] = [0.5, 1.0, 1.5];

/// Runs `trials` certifications of `lemma` on random fields drawn from a fixed-seed generator.
pub fn certification_suite(
    lemma: Lemma,
    trials: usize,
    seed: u64,
    lattice: FourierLattice,
) -> Result<Vec<TrialRow>, NormError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(trials);
    for trial in 0..trials {
        let s = DECAY_RATES[trial % DECAY_RATES.len()];
        let (report, params) = match lemma {
            Lemma::Product => {
                const PAIRS: [(f64, f64); 4] = [(2.0, 2.0), (1.5, 2.0), (1.75, 1.75), (2.0, 2.5)];
                let (a, b) = PAIRS[(trial / DECAY_RATES.len()) % PAIRS.len()];
                let u = random_pm_field(lattice, 1, a, s, true, &mut rng);
                let v = random_pm_field(lattice, 1, b, s, true, &mut rng);
                (certify_product(&u, &v, a, b)?, format!("a={a} b={b} s={s}"))
            }
            Lemma::Interpolation => {
                const CASES: [(f64, f64, f64); 3] =
                    [(2.0, 2.5, 4.0), (1.0, 2.0, 2.5), (2.0, 2.8, 8.0)];
                let (a, b, q) = CASES[(trial / DECAY_RATES.len()) % CASES.len()];
                let v = random_pm_field(lattice, 1, 2.0, s, false, &mut rng);
                (
                    certify_interpolation(&v, a, b, q)?,
                    format!("a={a} b={b} q={q} s={s}"),
                )
            }
            Lemma::Gradient => {
                const BETAS: [f64; 3] = [2.75, 2.9, 3.0];
                let beta = BETAS[(trial / DECAY_RATES.len()) % BETAS.len()];
                let w = random_pm_field(lattice, 3, 2.0, s, false, &mut rng);
                (
                    certify_gradient_embedding(&w, beta)?,
                    format!("beta={beta} s={s}"),
                )
            }
            Lemma::WeakL3 => {
                let u = random_pm_field(lattice, 3, 2.0, s, false, &mut rng);
                (certify_weak_l3(&u)?, format!("s={s}"))
            }
            Lemma::Tensor => {
                const PS: [f64; 3] = [3.0, 4.0, 6.0];
                let p = PS[(trial / DECAY_RATES.len()) % PS.len()];
                let u = random_pm_field(lattice, 3, 2.0, s, false, &mut rng);
                (
                    certify_tensor(&inverse_transform(&u)?, p)?,
                    format!("p={p} s={s}"),
                )
            }
        };
        rows.push(TrialRow {
            trial,
            report,
            params,
        });
    }
    Ok(rows)
}
