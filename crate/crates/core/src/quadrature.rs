//! Gauss-Legendre rules and exponential-weight helpers shared by the time integrators.

use std::sync::OnceLock;

use num_complex::Complex64;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, found by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "need at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `P_n(x)` and `P_n'(x)`.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter()
        .zip(&w)
        .map(|(x, w)| (mid + half * x, half * w))
        .collect()
}

/// `(1 - e^{-z}) / z` for real `z >= 0`.
pub fn phi1(z: f64) -> f64 {
    if z.abs() < 1e-8 {
        1.0 - 0.5 * z
    } else {
        -(-z).exp_m1() / z
    }
}

/// `(1 - e^{-z}) / z` for complex `z`.
pub fn phi1_complex(z: Complex64) -> Complex64 {
    if z.norm() < 0.1 {
        let mut term = Complex64::new(1.0, 0.0);
        let mut acc = term;
        for n in 1..12 {
            term *= -z / (n as f64 + 1.0);
            acc += term;
        }
        acc
    } else {
        (Complex64::new(1.0, 0.0) - (-z).exp()) / z
    }
}

/// `(z - 1 + e^{-z}) / z²`, the weight of the right node in the exponential trapezoid.
pub fn psi_right(z: f64) -> f64 {
    if z < 0.5 {
        series(z, |n| 1.0 / factorial(n + 2))
    } else {
        (z - 1.0 + (-z).exp()) / (z * z)
    }
}

/// `(1 - e^{-z} - z e^{-z}) / z²`, the weight of the left node in the exponential trapezoid.
pub fn psi_left(z: f64) -> f64 {
    if z < 0.5 {
        series(z, |n| (n as f64 + 1.0) / factorial(n + 2))
    } else {
        let e = (-z).exp();
        (1.0 - e - z * e) / (z * z)
    }
}

fn series<F: Fn(usize) -> f64>(z: f64, coef: F) -> f64 {
    let mut acc = 0.0;
    let mut zn = 1.0;
    for n in 0..24 {
        acc += coef(n) * zn;
        zn *= -z;
    }
    acc
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |a, k| a * k as f64)
}

/// Order of the exponentially fitted Gauss rule.
pub const EXP_GAUSS_ORDER: usize = 6;
const SERIES_TERMS: usize = 32;
const DIRECT_NODES: usize = 48;

/// Product rule for `∫_0^1 e^{-z(1-σ)} g(σ) dσ` with `g` interpolated at Gauss nodes.
///
/// The rule integrates the exponential exactly and is exact for polynomial
/// `g` of degree below [`EXP_GAUSS_ORDER`].
pub struct ExpGauss {
    /// Interpolation nodes in `(0, 1)`.
    pub nodes: [f64; EXP_GAUSS_ORDER],
    /// `∫_0^1 (1-σ)^n ℓ_k(σ) dσ`, for the small-`z` series.
    moments_series: Vec<[f64; EXP_GAUSS_ORDER]>,
    /// Monomial coefficients of the Lagrange basis, `ℓ_k(σ) = Σ_j a[k][j] σ^j`.
    monomial: [[f64; EXP_GAUSS_ORDER]; EXP_GAUSS_ORDER],
    /// Direct quadrature nodes on `(0,1)` with weights and basis values.
    direct: Vec<(f64, f64, [f64; EXP_GAUSS_ORDER])>,
}

impl ExpGauss {
    pub fn shared() -> &'static ExpGauss {
        static RULE: OnceLock<ExpGauss> = OnceLock::new();
        RULE.get_or_init(ExpGauss::build)
    }

    fn build() -> Self {
        const P: usize = EXP_GAUSS_ORDER;
        let (x, _) = gauss_legendre(P);
        let mut nodes = [0.0; P];
        for (k, v) in x.iter().enumerate() {
            nodes[k] = 0.5 * (v + 1.0);
        }
        let basis = |s: f64| -> [f64; P] {
            let mut out = [1.0; P];
            for k in 0..P {
                for j in 0..P {
                    if j != k {
                        out[k] *= (s - nodes[j]) / (nodes[k] - nodes[j]);
                    }
                }
            }
            out
        };
        let direct: Vec<(f64, f64, [f64; P])> = gauss_legendre_on(DIRECT_NODES, 0.0, 1.0)
            .into_iter()
            .map(|(s, w)| (s, w, basis(s)))
            .collect();
        let moments_series = (0..SERIES_TERMS)
            .map(|n| {
                let mut m = [0.0; P];
                for (s, w, l) in &direct {
                    let f = (1.0 - s).powi(n as i32);
                    for k in 0..P {
                        m[k] += w * f * l[k];
                    }
                }
                m
            })
            .collect();
        let mut monomial = [[0.0; P]; P];
        for k in 0..P {
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for j in 0..P {
                if j == k {
                    continue;
                }
                let mut next = vec![0.0; poly.len() + 1];
                for (d, c) in poly.iter().enumerate() {
                    next[d + 1] += c;
                    next[d] -= c * nodes[j];
                }
                poly = next;
                denom *= nodes[k] - nodes[j];
            }
            for (d, c) in poly.iter().enumerate() {
                monomial[k][d] = c / denom;
            }
        }
        Self {
            nodes,
            moments_series,
            monomial,
            direct,
        }
    }

    /// Weights `W_k(z) = ∫_0^1 e^{-z(1-σ)} ℓ_k(σ) dσ` for `z >= 0`.
    pub fn weights(&self, z: f64) -> [f64; EXP_GAUSS_ORDER] {
        const P: usize = EXP_GAUSS_ORDER;
        let mut w = [0.0; P];
        if z < 2.0 {
            let mut zn = 1.0;
            let mut fact = 1.0;
            for (n, m) in self.moments_series.iter().enumerate() {
                if n > 0 {
                    zn *= -z;
                    fact *= n as f64;
                }
                let c = zn / fact;
                for k in 0..P {
                    w[k] += c * m[k];
                }
            }
        } else if z <= 40.0 {
            for (s, wt, l) in &self.direct {
                let e = wt * (-z * (1.0 - s)).exp();
                for k in 0..P {
                    w[k] += e * l[k];
                }
            }
        } else {
            let mut m = [0.0; P];
            m[0] = -(-z).exp_m1() / z;
            for j in 1..P {
                m[j] = (1.0 - j as f64 * m[j - 1]) / z;
            }
            for k in 0..P {
                for j in 0..P {
                    w[k] += self.monomial[k][j] * m[j];
                }
            }
        }
        w
    }
}
