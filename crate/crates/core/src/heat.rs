//! Heat equation forced by a Dirac mass moving along a Hölder curve.
//!
//! In Fourier variables the solution is the Duhamel integral
//! `û(ξ,t) = ∫_0^t e^{-(t-τ)|ξ|²} e^{-iγ(τ)·ξ} dτ`, and the remainder after
//! removing the instantaneous Newtonian potential is
//! `ω̂₀(ξ,t) = û(ξ,t) - e^{-iγ(t)·ξ}/|ξ|²`. The zero mode of every field
//! built here is set to zero.

use std::collections::HashMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::curve::{Curve, CurveKind};
use crate::lattice::FourierLattice;
use crate::pm_norms::lq_norm;
use crate::quadrature::{phi1, phi1_complex, ExpGauss, EXP_GAUSS_ORDER};
use crate::spectral::{inverse_transform, PhysicalField, SpectralError, SpectralField};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
/// History older than `DECAY_WINDOW / |ξ|²` is weighted by less than `e^{-60}` and skipped.
const DECAY_WINDOW: f64 = 60.0;
const GRADING_RATIO: f64 = 0.5;
const GRADING_LEVELS: usize = 40;
/// Coarsest level of the adaptive power-curve rule; coarser meshes can agree by accident.
const MIN_SUBINTERVALS: usize = 4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeatError {
    #[error("time quadrature did not converge within {max_subintervals} subintervals (mode |ξ|² = {lambda})")]
    QuadratureNotConverged {
        max_subintervals: usize,
        lambda: f64,
    },
    #[error("invalid time {0}")]
    InvalidTime(f64),
    #[error("exponent q = {q} outside the admissible interval ({lo}, {hi})")]
    ExponentOutOfRange { q: f64, lo: f64, hi: f64 },
    #[error("test function support comes within {distance} of the curve")]
    SupportIntersectsCurve { distance: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Accuracy controls for the Duhamel time quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    /// Agreement required between two refinement levels, relative to the PM² envelope.
    pub tol: f64,
    /// Largest number of uniform subintervals per time piece.
    pub max_subintervals: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_subintervals: 1 << 20,
        }
    }
}

/// Diagnostics of one quadrature run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct QuadratureStats {
    /// Largest number of uniform subintervals any mode needed.
    pub max_subintervals: usize,
    /// Number of distinct mode classes integrated.
    pub classes: usize,
}

/// `∫_0^{t_k} e^{-(t_k-τ)|ξ|²} e^{-iγ(τ)·ξ} dτ` for every mode and every node `t_k`.
///
/// `times` must be non-negative and non-decreasing. The result is indexed
/// `[node][mode]`; the zero mode is zero.
pub fn duhamel_phase_integrals(
    curve: &Curve,
    lattice: &FourierLattice,
    times: &[f64],
    settings: QuadratureSettings,
) -> Result<(Vec<Vec<Complex64>>, QuadratureStats), HeatError> {
    let mut prev = 0.0;
    for &t in times {
        if !(t.is_finite() && t >= prev) {
            return Err(HeatError::InvalidTime(t));
        }
        prev = t;
    }
    let lam_max = (0..lattice.len())
        .map(|i| lattice.xi_sq(i))
        .fold(0.0, f64::max);
    let mut pieces = Vec::with_capacity(times.len());
    let mut a = 0.0;
    for &b in times {
        let env = -(-(b - a) * lam_max).exp_m1();
        pieces.push(Piece {
            a,
            b,
            abs_tol: settings.tol * env.max(f64::MIN_POSITIVE),
        });
        a = b;
    }
    let mut engine = Engine {
        curve,
        rule: ExpGauss::shared(),
        settings,
        pieces,
        stats: QuadratureStats::default(),
    };
    let mut out = vec![vec![ZERO; lattice.len()]; times.len()];
    let mut cache: HashMap<(u64, u64), Vec<Complex64>> = HashMap::new();
    for idx in 0..lattice.len() {
        let lam = lattice.xi_sq(idx);
        if lam == 0.0 {
            continue;
        }
        let xi = lattice.xi(idx);
        let series = match curve.kind() {
            CurveKind::Power { direction } => {
                let s = direction[0] * xi[0] + direction[1] * xi[1] + direction[2] * xi[2];
                let key = (lam.to_bits(), s.abs().to_bits());
                if !cache.contains_key(&key) {
                    let v = engine.mode_series(lam, xi, s.abs())?;
                    engine.stats.classes += 1;
                    cache.insert(key, v);
                }
                let v = &cache[&key];
                if s < 0.0 {
                    v.iter().map(|z| z.conj()).collect()
                } else {
                    v.clone()
                }
            }
            _ => {
                engine.stats.classes += 1;
                engine.mode_series(lam, xi, 0.0)?
            }
        };
        for (k, z) in series.into_iter().enumerate() {
            out[k][idx] = z;
        }
    }
    Ok((out, engine.stats))
}

struct Piece {
    a: f64,
    b: f64,
    abs_tol: f64,
}

struct Engine<'a> {
    curve: &'a Curve,
    rule: &'static ExpGauss,
    settings: QuadratureSettings,
    pieces: Vec<Piece>,
    stats: QuadratureStats,
}

impl Engine<'_> {
    /// Node values for one mode; `s` is the projection `direction·ξ` for power curves.
    fn mode_series(&mut self, lam: f64, xi: [f64; 3], s: f64) -> Result<Vec<Complex64>, HeatError> {
        let mut out = Vec::with_capacity(self.pieces.len());
        let mut acc = ZERO;
        for p in 0..self.pieces.len() {
            let (a, b, tol) = (self.pieces[p].a, self.pieces[p].b, self.pieces[p].abs_tol);
            let a_eff = a.max(b - DECAY_WINDOW / lam);
            let decay = (-(b - a) * lam).exp();
            let j = if b > a_eff {
                self.piece(lam, xi, s, a_eff, b, tol)?
            } else {
                ZERO
            };
            acc = acc * decay + j;
            out.push(acc);
        }
        Ok(out)
    }

    /// `∫_a^b e^{-(b-τ)λ} e^{-iγ(τ)·ξ} dτ`.
    fn piece(
        &mut self,
        lam: f64,
        xi: [f64; 3],
        s: f64,
        a: f64,
        b: f64,
        tol: f64,
    ) -> Result<Complex64, HeatError> {
        let len = b - a;
        match self.curve.kind() {
            CurveKind::Constant { .. } => {
                let ph = self.curve.phase(b, xi);
                self.note(1);
                Ok(cis(-ph) * (len * phi1(len * lam)))
            }
            CurveKind::Linear { velocity, .. } => {
                let w = velocity[0] * xi[0] + velocity[1] * xi[1] + velocity[2] * xi[2];
                self.note(1);
                Ok(linear_segment(lam, self.curve.phase(b, xi), w, len))
            }
            CurveKind::Tabulated { times, .. } => {
                let mut knots = vec![a];
                knots.extend(times.iter().copied().filter(|&t| t > a && t < b));
                knots.push(b);
                self.note(knots.len() - 1);
                let mut acc = ZERO;
                for w in knots.windows(2) {
                    let (s0, s1) = (w[0], w[1]);
                    let l = s1 - s0;
                    if l <= 0.0 {
                        continue;
                    }
                    let p0 = self.curve.phase(s0, xi);
                    let p1 = self.curve.phase(s1, xi);
                    let seg = linear_segment(lam, p1, (p1 - p0) / l, l);
                    acc += seg * (-(b - s1) * lam).exp();
                }
                Ok(acc)
            }
            CurveKind::Power { .. } => self.power_piece(lam, s, a, b, tol),
        }
    }

    fn note(&mut self, m: usize) {
        self.stats.max_subintervals = self.stats.max_subintervals.max(m);
    }

    fn power_piece(
        &mut self,
        lam: f64,
        s: f64,
        a: f64,
        b: f64,
        tol: f64,
    ) -> Result<Complex64, HeatError> {
        let len = b - a;
        if s == 0.0 {
            self.note(1);
            return Ok(Complex64::new(len * phi1(len * lam), 0.0));
        }
        let alpha = self.curve.alpha();
        let variation = s * (b.powf(alpha) - a.powf(alpha));
        let mut m = ((variation / 2.0).ceil() as usize).max(MIN_SUBINTERVALS);
        let mut prev = self.power_level(lam, s, alpha, a, b, m);
        loop {
            let m2 = 2 * m;
            let cur = self.power_level(lam, s, alpha, a, b, m2);
            if lam * (cur - prev).norm() <= tol {
                self.note(m2);
                return Ok(cur);
            }
            if m2 >= self.settings.max_subintervals {
                return Err(HeatError::QuadratureNotConverged {
                    max_subintervals: self.settings.max_subintervals,
                    lambda: lam,
                });
            }
            prev = cur;
            m = m2;
        }
    }

    /// Composite exponential Gauss rule with `m` uniform subintervals; the
    /// first one is geometrically graded when it touches `τ = 0`.
    fn power_level(&self, lam: f64, s: f64, alpha: f64, a: f64, b: f64, m: usize) -> Complex64 {
        let h = (b - a) / m as f64;
        let w = self.rule.weights(h * lam);
        let step_decay = (-h * lam).exp();
        let mut acc = ZERO;
        let mut decay = 1.0;
        for i in (0..m).rev() {
            let left = a + i as f64 * h;
            let c = if i == 0 && a == 0.0 {
                self.graded(lam, s, alpha, h)
            } else {
                let mut sum = ZERO;
                for k in 0..EXP_GAUSS_ORDER {
                    let tau = left + self.rule.nodes[k] * h;
                    sum += cis(-s * tau.powf(alpha)) * w[k];
                }
                sum * h
            };
            acc += c * decay;
            decay *= step_decay;
            if decay < 1e-18 {
                break;
            }
        }
        acc
    }

    /// `∫_0^h e^{-(h-τ)λ} e^{-i s τ^α} dτ` on a geometric mesh refined toward 0.
    fn graded(&self, lam: f64, s: f64, alpha: f64, h: f64) -> Complex64 {
        let mut acc = ZERO;
        let mut hi = h;
        for _ in 0..GRADING_LEVELS {
            let lo = hi * GRADING_RATIO;
            let len = hi - lo;
            let decay = (-(h - hi) * lam).exp();
            if decay < 1e-18 {
                return acc;
            }
            let w = self.rule.weights(len * lam);
            let mut sum = ZERO;
            for k in 0..EXP_GAUSS_ORDER {
                let tau = lo + self.rule.nodes[k] * len;
                sum += cis(-s * tau.powf(alpha)) * w[k];
            }
            acc += sum * (len * decay);
            hi = lo;
        }
        let decay = (-(h - hi) * lam).exp();
        acc + cis(-s * (0.5 * hi).powf(alpha)) * (hi * phi1(hi * lam) * decay)
    }
}

#[inline]
fn cis(x: f64) -> Complex64 {
    let (s, c) = x.sin_cos();
    Complex64::new(c, s)
}

/// `∫_0^len e^{-uλ} e^{-i(φ_end - uω)} du`: a segment whose phase is linear in time.
fn linear_segment(lam: f64, phase_end: f64, omega: f64, len: f64) -> Complex64 {
    let mu = Complex64::new(lam, -omega);
    cis(-phase_end) * phi1_complex(mu * len) * len
}

/// `û(·, t)` on the lattice.
pub fn heat_fourier_solution(
    curve: &Curve,
    t: f64,
    lattice: &FourierLattice,
    settings: QuadratureSettings,
) -> Result<SpectralField, HeatError> {
    Ok(heat_decomposition(curve, t, lattice, settings)?.u)
}

/// `ω̂₀(·, t) = û(·, t) - e^{-iγ(t)·ξ}/|ξ|²` on the lattice.
pub fn omega0(
    curve: &Curve,
    t: f64,
    lattice: &FourierLattice,
    settings: QuadratureSettings,
) -> Result<SpectralField, HeatError> {
    Ok(heat_decomposition(curve, t, lattice, settings)?.omega0)
}

/// Heat solution split into the Newtonian potential of the current position and a remainder.
#[derive(Debug, Clone)]
pub struct HeatDecomposition {
    pub t: f64,
    pub u: SpectralField,
    pub omega0: SpectralField,
    pub stats: QuadratureStats,
}

pub fn heat_decomposition(
    curve: &Curve,
    t: f64,
    lattice: &FourierLattice,
    settings: QuadratureSettings,
) -> Result<HeatDecomposition, HeatError> {
    if !(t.is_finite() && t > 0.0) {
        return Err(HeatError::InvalidTime(t));
    }
    let (mut vals, stats) = duhamel_phase_integrals(curve, lattice, &[t], settings)?;
    let u = vals.pop().expect("one node");
    let w: Vec<Complex64> = (0..lattice.len())
        .map(|idx| {
            let lam = lattice.xi_sq(idx);
            if lam == 0.0 {
                ZERO
            } else {
                u[idx] - cis(-curve.phase(t, lattice.xi(idx))) / lam
            }
        })
        .collect();
    let mut u = SpectralField::from_components(*lattice, vec![u])?;
    let mut omega0 = SpectralField::from_components(*lattice, vec![w])?;
    u.zero_nyquist();
    omega0.zero_nyquist();
    Ok(HeatDecomposition {
        t,
        u,
        omega0,
        stats,
    })
}

/// Least-squares fit of `log ‖ω₀(t)‖_q` against `log t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub q: f64,
    pub slope: f64,
    pub intercept: f64,
    /// `(t, ‖ω₀(t)‖_q)` per sample.
    pub samples: Vec<(f64, f64)>,
}

/// Admissible range `(3, 3/(2-2α))` of Lebesgue exponents for `ω₀`.
pub fn admissible_q_range(alpha: f64) -> (f64, f64) {
    let hi = if alpha >= 1.0 {
        f64::INFINITY
    } else {
        3.0 / (2.0 - 2.0 * alpha)
    };
    (3.0, hi)
}

/// Decay of `‖ω₀(t)‖_{L^q}` in time.
///
/// Each sample uses an `n^3` lattice of side `ell·√t`, so the lattice follows
/// the parabolic scaling of the problem and the discretization error is the
/// same at every sample.
pub fn lq_decay_fit(
    curve: &Curve,
    q: f64,
    t_samples: &[f64],
    n: usize,
    ell: f64,
    settings: QuadratureSettings,
) -> Result<DecayFit, HeatError> {
    let (lo, hi) = admissible_q_range(curve.alpha());
    if !(q > lo && q < hi) {
        return Err(HeatError::ExponentOutOfRange { q, lo, hi });
    }
    if t_samples.len() < 2 {
        return Err(HeatError::InvalidArgument(
            "need at least two time samples".into(),
        ));
    }
    let mut samples = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        if !(t.is_finite() && t > 0.0) {
            return Err(HeatError::InvalidTime(t));
        }
        let lat = FourierLattice::new(n, ell * t.sqrt())?;
        let w = omega0(curve, t, &lat, settings)?;
        let f = inverse_transform(&w)?;
        samples.push((t, lq_norm(&f, q)));
    }
    let pts: Vec<(f64, f64)> = samples.iter().map(|(t, v)| (t.ln(), v.ln())).collect();
    let (slope, intercept) = least_squares(&pts);
    Ok(DecayFit {
        q,
        slope,
        intercept,
        samples,
    })
}

pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Smooth compactly supported test function `a(t) b(x)` built from standard bumps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceTimeBump {
    pub center: [f64; 3],
    pub radius: f64,
    pub t_center: f64,
    pub t_radius: f64,
}

/// `exp(1 - 1/(1-s²))` for `|s| < 1`, zero otherwise, with its derivative.
pub(crate) fn bump1(s: f64) -> (f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let d = 1.0 - s * s;
    let v = (1.0 - 1.0 / d).exp();
    (v, -2.0 * s / (d * d) * v)
}

impl SpaceTimeBump {
    fn time_part(&self, t: f64) -> (f64, f64) {
        let (v, d) = bump1((t - self.t_center) / self.t_radius);
        (v, d / self.t_radius)
    }

    fn space_part(&self, x: [f64; 3]) -> f64 {
        let r2: f64 = (0..3).map(|i| (x[i] - self.center[i]).powi(2)).sum();
        bump1(r2.sqrt() / self.radius).0
    }
}

/// Result of pairing the heat solution against `∂_t φ + Δφ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatResidual {
    /// `∫∫ u (∂_t φ + Δφ) dx dt`.
    pub residual: f64,
    /// `∫∫ |û| |(∂_t φ + Δφ)^|`, an upper bound for the size of the pairing.
    pub scale: f64,
    /// `|residual| / scale`.
    pub relative: f64,
}

/// Distributional heat residual of `u` tested against a bump whose support avoids the curve.
///
/// Space integrals are evaluated by Parseval on the lattice and the time
/// integral by the composite trapezoid rule with `time_steps` panels.
pub fn heat_residual_check(
    curve: &Curve,
    bump: &SpaceTimeBump,
    lattice: &FourierLattice,
    time_steps: usize,
    settings: QuadratureSettings,
) -> Result<HeatResidual, HeatError> {
    if time_steps < 2 {
        return Err(HeatError::InvalidArgument(
            "need at least two time steps".into(),
        ));
    }
    let t0 = bump.t_center - bump.t_radius;
    let t1 = bump.t_center + bump.t_radius;
    if t0 <= 0.0 {
        return Err(HeatError::InvalidArgument(
            "time support must lie in t > 0".into(),
        ));
    }
    let mut dist = f64::INFINITY;
    for i in 0..=256 {
        let t = t0 + (t1 - t0) * i as f64 / 256.0;
        let g = curve.eval(t);
        let d = (0..3)
            .map(|k| (g[k] - bump.center[k]).powi(2))
            .sum::<f64>()
            .sqrt();
        dist = dist.min(d - bump.radius);
    }
    if dist <= 0.0 {
        return Err(HeatError::SupportIntersectsCurve { distance: dist });
    }
    let b = crate::spectral::forward_transform(&PhysicalField::from_fn(*lattice, 1, |x, o| {
        o[0] = bump.space_part(x)
    }));
    let bh = b.component(0);
    let times: Vec<f64> = (0..=time_steps)
        .map(|i| t0 + (t1 - t0) * i as f64 / time_steps as f64)
        .collect();
    let (vals, _) = duhamel_phase_integrals(curve, lattice, &times, settings)?;
    let vol = 1.0 / lattice.box_length().powi(3);
    let dt = (t1 - t0) / time_steps as f64;
    let mut residual = 0.0;
    let mut scale = 0.0;
    for (k, (&t, u)) in times.iter().zip(&vals).enumerate() {
        let (a, da) = bump.time_part(t);
        let w = if k == 0 || k == time_steps {
            0.5 * dt
        } else {
            dt
        };
        let mut pair = 0.0;
        let mut mag = 0.0;
        for idx in 0..lattice.len() {
            let lam = lattice.xi_sq(idx);
            let psi = bh[idx] * (da - lam * a);
            pair += (u[idx] * psi.conj()).re;
            mag += u[idx].norm() * psi.norm();
        }
        residual += w * pair * vol;
        scale += w * mag * vol;
    }
    Ok(HeatResidual {
        residual,
        scale,
        relative: if scale > 0.0 {
            residual.abs() / scale
        } else {
            0.0
        },
    })
}
