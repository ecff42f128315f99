//! The Slezkin-Landau family of stationary solutions, singular at the origin,
//! and the momentum flux `κ(c)` of the Dirac force they carry.
//!
//! For `|c| > 1`, with `r = |x|`,
//!
//! ```text
//! V₁ = 2 (c r² - 2 x₁ r + c x₁²) / (r (c r - x₁)²)
//! V_j = 2 x_j (c x₁ - r) / (r (c r - x₁)²)        j = 2, 3
//! Q  = 4 (c x₁ - r) / (r (c r - x₁)²)
//! ```
//!
//! solve `-ΔV + (V·∇)V + ∇Q = κ(c) δ₀ e₁`, `∇·V = 0` in the sense of distributions.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

use crate::heat::bump1;
use crate::lattice::FourierLattice;
use crate::pm_norms::pm_norm_in_shell;
use crate::quadrature::gauss_legendre_on;
use crate::spectral::{forward_transform, PhysicalField, SpectralError, SpectralField};

/// Above this `|c|` the flux constant is evaluated from its expansion in `1/c`.
pub const KAPPA_SERIES_SWITCH: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LandauError {
    #[error("parameter c = {0} must satisfy |c| > 1")]
    DomainError(f64),
    #[error("evaluation at the origin")]
    OriginEvaluation,
    #[error("stencil of width {h} reaches within 10h of the origin at |x| = {r}")]
    StencilTooCloseToOrigin { r: f64, h: f64 },
    #[error("pairing quadrature levels disagree: {coarse} vs {fine}")]
    QuadratureNotConverged { coarse: f64, fine: f64 },
    #[error("component index {0} outside 1..=3")]
    InvalidComponent(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// `κ(c) = 8πc/(3(c²-1)) (2 + 6c² - 3c(c²-1) log((c+1)/(c-1)))`.
///
/// For `|c| > 10³` the bracket loses about `2 log₁₀|c|` digits to cancellation,
/// so the expansion `16πc/(c²-1) (1 + Σ_{m≥2} 2/(4m²-1) c^{2-2m})` is used instead.
pub fn kappa(c: f64) -> Result<f64, LandauError> {
    if !(c.is_finite() && c.abs() > 1.0) {
        return Err(LandauError::DomainError(c));
    }
    let a = c.abs();
    let v = if a > KAPPA_SERIES_SWITCH {
        let inv2 = 1.0 / (a * a);
        let mut sum = 1.0;
        let mut p = 1.0;
        for m in 2..=8 {
            p *= inv2;
            let mf = m as f64;
            sum += 2.0 / (4.0 * mf * mf - 1.0) * p;
        }
        16.0 * PI * a / ((a - 1.0) * (a + 1.0)) * sum
    } else {
        let log = (2.0 / (a - 1.0)).ln_1p();
        let bracket = 2.0 + 6.0 * a * a - 3.0 * a * (a * a - 1.0) * log;
        8.0 * PI * a / (3.0 * (a - 1.0) * (a + 1.0)) * bracket
    };
    Ok(v.copysign(c))
}

/// One member of the family, fixed by the parameter `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandauSolution {
    c: f64,
}

fn norm3(x: [f64; 3]) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

impl LandauSolution {
    pub fn new(c: f64) -> Result<Self, LandauError> {
        if !(c.is_finite() && c.abs() > 1.0) {
            return Err(LandauError::DomainError(c));
        }
        Ok(Self { c })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn kappa(&self) -> f64 {
        kappa(self.c).expect("validated parameter")
    }

    pub fn velocity(&self, x: [f64; 3]) -> Result<[f64; 3], LandauError> {
        let r = norm3(x);
        if r == 0.0 {
            return Err(LandauError::OriginEvaluation);
        }
        Ok(self.velocity_unchecked(x, r))
    }

    #[inline]
    fn velocity_unchecked(&self, x: [f64; 3], r: f64) -> [f64; 3] {
        let c = self.c;
        let d = c * r - x[0];
        let den = r * d * d;
        let t = 2.0 * (c * x[0] - r) / den;
        [
            2.0 * (c * r * r - 2.0 * x[0] * r + c * x[0] * x[0]) / den,
            x[1] * t,
            x[2] * t,
        ]
    }

    pub fn pressure(&self, x: [f64; 3]) -> Result<f64, LandauError> {
        let r = norm3(x);
        if r == 0.0 {
            return Err(LandauError::OriginEvaluation);
        }
        let d = self.c * r - x[0];
        Ok(4.0 * (self.c * x[0] - r) / (r * d * d))
    }

    /// Central-difference residual of the stationary equations at `x` with step `h`.
    pub fn stationary_residual(
        &self,
        x: [f64; 3],
        h: f64,
    ) -> Result<StationaryResidual, LandauError> {
        let r = norm3(x);
        if !(h > 0.0) || r < 10.0 * h {
            return Err(LandauError::StencilTooCloseToOrigin { r, h });
        }
        let v0 = self.velocity(x)?;
        let mut lap = [0.0; 3];
        let mut grad_v = [[0.0; 3]; 3]; // grad_v[j][i] = ∂_j V_i
        let mut grad_q = [0.0; 3];
        for j in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += h;
            xm[j] -= h;
            let vp = self.velocity(xp)?;
            let vm = self.velocity(xm)?;
            for i in 0..3 {
                lap[i] += (vp[i] - 2.0 * v0[i] + vm[i]) / (h * h);
                grad_v[j][i] = (vp[i] - vm[i]) / (2.0 * h);
            }
            grad_q[j] = (self.pressure(xp)? - self.pressure(xm)?) / (2.0 * h);
        }
        let mut momentum = [0.0; 3];
        let mut conv = [0.0; 3];
        for i in 0..3 {
            conv[i] = (0..3).map(|j| v0[j] * grad_v[j][i]).sum();
            momentum[i] = -lap[i] + conv[i] + grad_q[i];
        }
        let divergence = grad_v[0][0] + grad_v[1][1] + grad_v[2][2];
        let scale = norm3(lap).max(norm3(conv)).max(norm3(grad_q));
        Ok(StationaryResidual {
            momentum,
            divergence,
            scale,
        })
    }

    /// `∫ (∇V_k·∇φ - V_k V·∇φ - Q ∂_k φ) dx` by spherical-shell quadrature about the origin.
    ///
    /// Shells shrink geometrically by 1.5 from the support radius down to
    /// `1e-5` of it; each shell carries a tensor rule (Gauss in the radius and
    /// in `cos θ` about the `x₁` axis, trapezoid in azimuth). The rule is run at
    /// two resolutions and the finer value is returned.
    pub fn weak_pairing(
        &self,
        phi: &dyn TestFunction,
        k: usize,
    ) -> Result<PairingResult, LandauError> {
        if !(1..=3).contains(&k) {
            return Err(LandauError::InvalidComponent(k));
        }
        let coarse = self.pairing_level(phi, k - 1, 8, 32, 32);
        let fine = self.pairing_level(phi, k - 1, 12, 48, 48);
        let target = if k == 1 {
            self.kappa() * phi.value([0.0; 3])
        } else {
            0.0
        };
        let scale = fine.value.abs().max(self.kappa().abs() * fine.phi_max);
        let err = (fine.value - coarse.value).abs();
        if err > 0.01 * scale {
            return Err(LandauError::QuadratureNotConverged {
                coarse: coarse.value,
                fine: fine.value,
            });
        }
        Ok(PairingResult {
            k,
            value: fine.value,
            target,
            quadrature_error_estimate: err,
        })
    }

    fn pairing_level(
        &self,
        phi: &dyn TestFunction,
        k: usize,
        nr: usize,
        nmu: usize,
        naz: usize,
    ) -> LevelValue {
        let outer = phi.support_radius();
        let inner = 1e-5 * outer;
        let mu_rule = gauss_legendre_on(nmu, -1.0, 1.0);
        let mut total = 0.0;
        let mut phi_max: f64 = 0.0;
        let mut hi = outer;
        while hi > inner {
            let lo = (hi / 1.5).max(inner);
            for (r, wr) in gauss_legendre_on(nr, lo, hi) {
                let h = 1e-5 * r;
                for &(mu, wmu) in &mu_rule {
                    let s = (1.0 - mu * mu).max(0.0).sqrt();
                    for a in 0..naz {
                        let az = 2.0 * PI * a as f64 / naz as f64;
                        let x = [r * mu, r * s * az.cos(), r * s * az.sin()];
                        let g = phi.gradient(x);
                        phi_max = phi_max.max(phi.value(x).abs());
                        if g == [0.0; 3] {
                            continue;
                        }
                        let v = self.velocity_unchecked(x, r);
                        let q = self.pressure(x).expect("off origin");
                        let mut dvk = [0.0; 3];
                        for (j, d) in dvk.iter_mut().enumerate() {
                            let mut xp = x;
                            let mut xm = x;
                            xp[j] += h;
                            xm[j] -= h;
                            *d = (self.velocity_unchecked(xp, norm3(xp))[k]
                                - self.velocity_unchecked(xm, norm3(xm))[k])
                                / (2.0 * h);
                        }
                        let vg = v[0] * g[0] + v[1] * g[1] + v[2] * g[2];
                        let dg = dvk[0] * g[0] + dvk[1] * g[1] + dvk[2] * g[2];
                        let integrand = dg - v[k] * vg - q * g[k];
                        total += integrand * wr * r * r * wmu * (2.0 * PI / naz as f64);
                    }
                }
            }
            hi = lo;
        }
        LevelValue {
            value: total,
            phi_max,
        }
    }

    /// `sup |x|^{1+|α|} |c| |D^α V(x)|` over the sample points, by central differences.
    pub fn derivative_envelope_check(
        &self,
        alpha: [usize; 3],
        points: &[[f64; 3]],
    ) -> Result<f64, LandauError> {
        let order: usize = alpha.iter().sum();
        if order > 2 {
            return Err(LandauError::InvalidArgument(
                "derivative order above 2".into(),
            ));
        }
        let mut best: f64 = 0.0;
        for &x in points {
            let r = norm3(x);
            let h = 1e-4 * r;
            if r == 0.0 {
                return Err(LandauError::StencilTooCloseToOrigin { r, h });
            }
            let d = self.derivative(x, alpha, h)?;
            best = best.max(r.powi(1 + order as i32) * self.c.abs() * norm3(d));
        }
        Ok(best)
    }

    fn derivative(&self, x: [f64; 3], alpha: [usize; 3], h: f64) -> Result<[f64; 3], LandauError> {
        let axes: Vec<usize> = (0..3)
            .flat_map(|i| std::iter::repeat(i).take(alpha[i]))
            .collect();
        let shifted = |offs: &[(usize, f64)]| -> Result<[f64; 3], LandauError> {
            let mut y = x;
            for &(ax, o) in offs {
                y[ax] += o;
            }
            self.velocity(y)
        };
        let combine = |a: [f64; 3], b: [f64; 3], s: f64| {
            [(a[0] - b[0]) * s, (a[1] - b[1]) * s, (a[2] - b[2]) * s]
        };
        match axes.as_slice() {
            [] => self.velocity(x),
            [i] => Ok(combine(
                shifted(&[(*i, h)])?,
                shifted(&[(*i, -h)])?,
                0.5 / h,
            )),
            [i, j] if i == j => {
                let p = shifted(&[(*i, h)])?;
                let m = shifted(&[(*i, -h)])?;
                let c = self.velocity(x)?;
                Ok([
                    (p[0] - 2.0 * c[0] + m[0]) / (h * h),
                    (p[1] - 2.0 * c[1] + m[1]) / (h * h),
                    (p[2] - 2.0 * c[2] + m[2]) / (h * h),
                ])
            }
            [i, j] => {
                let pp = shifted(&[(*i, h), (*j, h)])?;
                let pm = shifted(&[(*i, h), (*j, -h)])?;
                let mp = shifted(&[(*i, -h), (*j, h)])?;
                let mm = shifted(&[(*i, -h), (*j, -h)])?;
                let s = 0.25 / (h * h);
                Ok([
                    (pp[0] - pm[0] - mp[0] + mm[0]) * s,
                    (pp[1] - pm[1] - mp[1] + mm[1]) * s,
                    (pp[2] - pm[2] - mp[2] + mm[2]) * s,
                ])
            }
            _ => unreachable!("order checked"),
        }
    }

    /// Lattice Fourier coefficients of `V`.
    ///
    /// Samples sit on the grid shifted by half a cell in every direction, so
    /// no sample hits the singularity and the grid stays symmetric about it.
    /// The eight cells touching the origin use their exact integrals, which
    /// homogeneity reduces to one integral over a unit cube. Nyquist planes
    /// are zeroed since the half-cell phase makes them non-Hermitian.
    ///
    /// `V` decays only like `1/|x|`, so cutting it off at the box edge would
    /// put a `1/|ξ|` tail into every direction. The samples are instead
    /// multiplied by a smooth radial window, equal to one on `|x| ≤ WINDOW_INNER·L`
    /// and zero beyond `WINDOW_OUTER·L`, which leaves the `|ξ|⁻²` asymptotics intact.
    pub fn sampled_spectrum(&self, lattice: FourierLattice) -> SpectralField {
        let h = lattice.spacing();
        let half = 0.5 * h;
        let box_len = lattice.box_length();
        let samples = PhysicalField::from_fn(lattice, 3, |x, out| {
            let y = [x[0] + half, x[1] + half, x[2] + half];
            let r = norm3(y);
            let w = radial_window(r / box_len);
            if w > 0.0 {
                let v = self.velocity_unchecked(y, r);
                for i in 0..3 {
                    out[i] = w * v[i];
                }
            }
        });
        let mut v = forward_transform(&samples);
        v.apply_multiplier(|idx| {
            let xi = lattice.xi(idx);
            let ph = -(xi[0] + xi[1] + xi[2]) * half;
            Complex64::new(ph.cos(), ph.sin())
        });
        for sx in [-1.0, 1.0] {
            for sy in [-1.0, 1.0] {
                for sz in [-1.0, 1.0] {
                    let sign = [sx, sy, sz];
                    let center = [sx * half, sy * half, sz * half];
                    let exact = self.octant_cube_integral(sign);
                    let point = self.velocity_unchecked(center, norm3(center));
                    let delta: Vec<f64> = (0..3)
                        .map(|i| h * h * exact[i] - h.powi(3) * point[i])
                        .collect();
                    for idx in 0..lattice.len() {
                        let xi = lattice.xi(idx);
                        let ph = -(xi[0] * center[0] + xi[1] * center[1] + xi[2] * center[2]);
                        let e = Complex64::new(ph.cos(), ph.sin());
                        for (c, d) in delta.iter().enumerate() {
                            v.component_mut(c)[idx] += e * *d;
                        }
                    }
                }
            }
        }
        v.zero_nyquist();
        v
    }

    /// `∫_{[0,1]³} V(σ ⊙ y) dy` for an octant sign pattern `σ`.
    ///
    /// The corner cube `[0,1/2]³` contributes a quarter of the total by
    /// homogeneity of degree −1, so the total is 4/3 of the integral over the
    /// other seven half-cubes, where `V` is smooth.
    fn octant_cube_integral(&self, sign: [f64; 3]) -> [f64; 3] {
        let rule = gauss_legendre_on(16, 0.0, 0.5);
        let mut acc = [0.0; 3];
        for cube in 1..8usize {
            let off = [
                0.5 * (cube & 1) as f64,
                0.5 * ((cube >> 1) & 1) as f64,
                0.5 * ((cube >> 2) & 1) as f64,
            ];
            for &(a, wa) in &rule {
                for &(b, wb) in &rule {
                    for &(c, wc) in &rule {
                        let y = [
                            sign[0] * (off[0] + a),
                            sign[1] * (off[1] + b),
                            sign[2] * (off[2] + c),
                        ];
                        let v = self.velocity_unchecked(y, norm3(y));
                        let w = wa * wb * wc;
                        for i in 0..3 {
                            acc[i] += w * v[i];
                        }
                    }
                }
            }
        }
        [acc[0] * 4.0 / 3.0, acc[1] * 4.0 / 3.0, acc[2] * 4.0 / 3.0]
    }
}

/// Window radii for [`LandauSolution::sampled_spectrum`] as fractions of the box length.
pub const WINDOW_INNER: f64 = 0.2;
pub const WINDOW_OUTER: f64 = 0.45;

/// Smooth step from 1 at `WINDOW_INNER` to 0 at `WINDOW_OUTER`.
fn radial_window(s: f64) -> f64 {
    if s <= WINDOW_INNER {
        return 1.0;
    }
    if s >= WINDOW_OUTER {
        return 0.0;
    }
    let u = (s - WINDOW_INNER) / (WINDOW_OUTER - WINDOW_INNER);
    let a = (-1.0 / (1.0 - u)).exp();
    let b = (-1.0 / u).exp();
    a / (a + b)
}

/// Residual `-ΔV + (V·∇)V + ∇Q` and `∇·V` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryResidual {
    pub momentum: [f64; 3],
    pub divergence: f64,
    /// Largest magnitude among `ΔV`, `(V·∇)V` and `∇Q` at the point.
    pub scale: f64,
}

impl StationaryResidual {
    /// Largest of the four residuals divided by `scale`.
    pub fn relative(&self) -> f64 {
        let m = self
            .momentum
            .iter()
            .fold(self.divergence.abs(), |a, b| a.max(b.abs()));
        m / self.scale
    }
}

/// Value of the distributional pairing for one momentum component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairingResult {
    /// Component index, 1 to 3.
    pub k: usize,
    pub value: f64,
    /// `κ(c) φ(0)` for `k = 1`, zero otherwise.
    pub target: f64,
    /// Difference between the two quadrature levels.
    pub quadrature_error_estimate: f64,
}

struct LevelValue {
    value: f64,
    phi_max: f64,
}

/// Smooth compactly supported test function.
pub trait TestFunction {
    fn value(&self, x: [f64; 3]) -> f64;
    fn gradient(&self, x: [f64; 3]) -> [f64; 3];
    /// Radius of a ball about the origin that contains the support.
    fn support_radius(&self) -> f64;
}

/// `A exp(1 - 1/(1 - |x-p|²/R²))` inside the ball of radius `R` about `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialBump {
    pub center: [f64; 3],
    pub radius: f64,
    pub amplitude: f64,
}

impl TestFunction for RadialBump {
    fn value(&self, x: [f64; 3]) -> f64 {
        let d = [
            x[0] - self.center[0],
            x[1] - self.center[1],
            x[2] - self.center[2],
        ];
        self.amplitude * bump1(norm3(d) / self.radius).0
    }

    fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let d = [
            x[0] - self.center[0],
            x[1] - self.center[1],
            x[2] - self.center[2],
        ];
        let r = norm3(d);
        if r == 0.0 {
            return [0.0; 3];
        }
        let (_, db) = bump1(r / self.radius);
        let s = self.amplitude * db / (self.radius * r);
        [s * d[0], s * d[1], s * d[2]]
    }

    fn support_radius(&self) -> f64 {
        norm3(self.center) + self.radius
    }
}

/// Product of one-dimensional bumps, `Π_i b((x_i - p_i)/w_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductBump {
    pub center: [f64; 3],
    pub half_widths: [f64; 3],
}

impl TestFunction for ProductBump {
    fn value(&self, x: [f64; 3]) -> f64 {
        (0..3)
            .map(|i| bump1((x[i] - self.center[i]) / self.half_widths[i]).0)
            .product()
    }

    fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let parts: Vec<(f64, f64)> = (0..3)
            .map(|i| {
                let (v, d) = bump1((x[i] - self.center[i]) / self.half_widths[i]);
                (v, d / self.half_widths[i])
            })
            .collect();
        [
            parts[0].1 * parts[1].0 * parts[2].0,
            parts[0].0 * parts[1].1 * parts[2].0,
            parts[0].0 * parts[1].0 * parts[2].1,
        ]
    }

    fn support_radius(&self) -> f64 {
        let far = [
            self.center[0].abs() + self.half_widths[0],
            self.center[1].abs() + self.half_widths[1],
            self.center[2].abs() + self.half_widths[2],
        ];
        norm3(far)
    }
}

/// `(w·x) φ(x)`, a test function vanishing at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearWeighted<T> {
    pub weight: [f64; 3],
    pub inner: T,
}

impl<T: TestFunction> TestFunction for LinearWeighted<T> {
    fn value(&self, x: [f64; 3]) -> f64 {
        let w = self.weight;
        (w[0] * x[0] + w[1] * x[1] + w[2] * x[2]) * self.inner.value(x)
    }

    fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let w = self.weight;
        let l = w[0] * x[0] + w[1] * x[1] + w[2] * x[2];
        let v = self.inner.value(x);
        let g = self.inner.gradient(x);
        [
            w[0] * v + l * g[0],
            w[1] * v + l * g[1],
            w[2] * v + l * g[2],
        ]
    }

    fn support_radius(&self) -> f64 {
        self.inner.support_radius()
    }
}

/// Lowest trusted `|ξ|` in units of the inverse inner window radius.
pub const RESOLVED_BAND_LOW: f64 = 6.0;
/// Highest trusted `|ξ|` in units of the inverse grid spacing.
pub const RESOLVED_BAND_HIGH: f64 = 0.6;

/// Shell `[lo, hi]` of wavenumbers on which a sampled spectrum of `V` is trusted.
///
/// Below `lo` the spectrum is the window's, not the field's. Above `hi` the
/// sampling error of the singular field exceeds a few percent.
pub fn resolved_band(lattice: &FourierLattice) -> (f64, f64) {
    let lo = RESOLVED_BAND_LOW / (WINDOW_INNER * lattice.box_length());
    let hi = RESOLVED_BAND_HIGH / lattice.spacing();
    (lo, hi)
}

/// `‖V^c‖_{PM²}` over a sweep of parameters and its power-law fit.
#[derive(Debug, Clone, PartialEq)]
pub struct Pm2Sweep {
    /// `(c, ‖V^c‖_{PM²})`.
    pub norms: Vec<(f64, f64)>,
    /// Least-squares slope of `log ‖V^c‖` against `log |c|`.
    pub slope: f64,
    /// `max_c |c| ‖V^c‖_{PM²}`.
    pub k_hat: f64,
}

/// Samples `‖V^c‖_{PM²}` on the [`resolved_band`] of `lattice` for each `c`.
pub fn pm2_norm_bound_check(
    c_values: &[f64],
    lattice: FourierLattice,
) -> Result<Pm2Sweep, LandauError> {
    let (lo, hi) = resolved_band(&lattice);
    if !(lo < hi) {
        return Err(LandauError::InvalidArgument(format!(
            "lattice too coarse: resolved band [{lo}, {hi}] is empty"
        )));
    }
    if c_values.len() < 2 {
        return Err(LandauError::InvalidArgument(
            "need at least two values of c".into(),
        ));
    }
    let mut norms = Vec::with_capacity(c_values.len());
    for &c in c_values {
        if !(c.abs() > 2.0) {
            return Err(LandauError::DomainError(c));
        }
        let v = LandauSolution::new(c)?.sampled_spectrum(lattice);
        norms.push((c, pm_norm_in_shell(&v, 2.0, lo, hi)));
    }
    let pts: Vec<(f64, f64)> = norms.iter().map(|(c, n)| (c.abs().ln(), n.ln())).collect();
    let (slope, _) = crate::heat::least_squares(&pts);
    let k_hat = norms.iter().map(|(c, n)| c.abs() * n).fold(0.0, f64::max);
    Ok(Pm2Sweep {
        norms,
        slope,
        k_hat,
    })
}
