//! Hölder curves `γ : [0, T] → R³` carrying the point singularity.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CurveError {
    #[error("Hölder exponent {0} outside (1/2, 1]")]
    ExponentOutOfRange(f64),
    #[error("invalid table: {0}")]
    InvalidTable(String),
    #[error("non-finite curve parameter")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CurveKind {
    /// `γ(t) = p`.
    Constant { point: [f64; 3] },
    /// `γ(t) = origin + t·velocity`.
    Linear {
        origin: [f64; 3],
        velocity: [f64; 3],
    },
    /// `γ(t) = t^α·direction`.
    Power { direction: [f64; 3] },
    /// Piecewise-linear interpolation of `(times[i], points[i])`, constant after the last knot.
    Tabulated {
        times: Vec<f64>,
        points: Vec<[f64; 3]>,
    },
}

/// A curve together with its Hölder exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    kind: CurveKind,
    alpha: f64,
}

/// `|γ(t) - γ(s)| <= constant·|t - s|^alpha` on `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderCertificate {
    pub alpha: f64,
    pub constant: f64,
    pub horizon: f64,
}

fn finite3(p: &[f64; 3]) -> bool {
    p.iter().all(|x| x.is_finite())
}

fn norm3(p: [f64; 3]) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

fn check_alpha(alpha: f64) -> Result<(), CurveError> {
    if alpha > 0.5 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(CurveError::ExponentOutOfRange(alpha))
    }
}

impl Curve {
    pub fn constant(point: [f64; 3]) -> Result<Self, CurveError> {
        if !finite3(&point) {
            return Err(CurveError::NonFinite);
        }
        Ok(Self {
            kind: CurveKind::Constant { point },
            alpha: 1.0,
        })
    }

    pub fn origin() -> Self {
        Self::constant([0.0; 3]).expect("finite")
    }

    pub fn linear(origin: [f64; 3], velocity: [f64; 3]) -> Result<Self, CurveError> {
        if !(finite3(&origin) && finite3(&velocity)) {
            return Err(CurveError::NonFinite);
        }
        Ok(Self {
            kind: CurveKind::Linear { origin, velocity },
            alpha: 1.0,
        })
    }

    pub fn power(direction: [f64; 3], alpha: f64) -> Result<Self, CurveError> {
        check_alpha(alpha)?;
        if !finite3(&direction) {
            return Err(CurveError::NonFinite);
        }
        Ok(Self {
            kind: CurveKind::Power { direction },
            alpha,
        })
    }

    /// Piecewise-linear curve through the given knots, certified with exponent `alpha`.
    pub fn tabulated(
        times: Vec<f64>,
        points: Vec<[f64; 3]>,
        alpha: f64,
    ) -> Result<Self, CurveError> {
        check_alpha(alpha)?;
        if times.is_empty() || times.len() != points.len() {
            return Err(CurveError::InvalidTable(
                "need the same positive number of times and points".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(CurveError::InvalidTable(
                "first knot must be at t = 0".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(CurveError::InvalidTable(
                "times must increase strictly".into(),
            ));
        }
        if !times.iter().all(|t| t.is_finite()) || !points.iter().all(finite3) {
            return Err(CurveError::NonFinite);
        }
        Ok(Self {
            kind: CurveKind::Tabulated { times, points },
            alpha,
        })
    }

    pub fn kind(&self) -> &CurveKind {
        &self.kind
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn eval(&self, t: f64) -> [f64; 3] {
        match &self.kind {
            CurveKind::Constant { point } => *point,
            CurveKind::Linear { origin, velocity } => [
                origin[0] + t * velocity[0],
                origin[1] + t * velocity[1],
                origin[2] + t * velocity[2],
            ],
            CurveKind::Power { direction } => {
                let s = t.max(0.0).powf(self.alpha);
                [s * direction[0], s * direction[1], s * direction[2]]
            }
            CurveKind::Tabulated { times, points } => {
                if t <= times[0] {
                    return points[0];
                }
                let last = times.len() - 1;
                if t >= times[last] {
                    return points[last];
                }
                let i = times.partition_point(|&x| x <= t) - 1;
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                let (a, b) = (points[i], points[i + 1]);
                [
                    a[0] + w * (b[0] - a[0]),
                    a[1] + w * (b[1] - a[1]),
                    a[2] + w * (b[2] - a[2]),
                ]
            }
        }
    }

    /// `γ(t)·ξ`.
    #[inline]
    pub fn phase(&self, t: f64, xi: [f64; 3]) -> f64 {
        let p = self.eval(t);
        p[0] * xi[0] + p[1] * xi[1] + p[2] * xi[2]
    }

    /// Hölder constant on `[0, horizon]` for the curve's exponent.
    ///
    /// Exact for the closed-form kinds. Tabulated curves are bounded by a
    /// pairwise sweep over knots and segment subdivisions.
    pub fn holder_certificate(&self, horizon: f64) -> HolderCertificate {
        let constant = match &self.kind {
            CurveKind::Constant { .. } => 0.0,
            CurveKind::Linear { velocity, .. } => norm3(*velocity),
            CurveKind::Power { direction } => norm3(*direction),
            CurveKind::Tabulated { times, .. } => {
                let mut ts: Vec<f64> = Vec::new();
                for w in times.windows(2) {
                    for j in 0..8 {
                        let t = w[0] + (w[1] - w[0]) * j as f64 / 8.0;
                        if t <= horizon {
                            ts.push(t);
                        }
                    }
                }
                ts.push(times[times.len() - 1].min(horizon));
                ts.push(horizon);
                ts.sort_by(f64::total_cmp);
                ts.dedup();
                let mut c: f64 = 0.0;
                for (i, &t) in ts.iter().enumerate() {
                    let gt = self.eval(t);
                    for &s in &ts[..i] {
                        let gs = self.eval(s);
                        let d = norm3([gt[0] - gs[0], gt[1] - gs[1], gt[2] - gs[2]]);
                        c = c.max(d / (t - s).powf(self.alpha));
                    }
                }
                c
            }
        };
        HolderCertificate {
            alpha: self.alpha,
            constant,
            horizon,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponent_range_enforced() {
        assert!(Curve::power([1.0, 0.0, 0.0], 0.5).is_err());
        assert!(Curve::power([1.0, 0.0, 0.0], 1.01).is_err());
        assert!(Curve::power([1.0, 0.0, 0.0], 0.51).is_ok());
        assert!(Curve::tabulated(vec![0.0, 0.0], vec![[0.0; 3]; 2], 1.0).is_err());
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let c = Curve::tabulated(
            vec![0.0, 1.0, 3.0],
            vec![[0.0; 3], [1.0, 0.0, 0.0], [1.0, 2.0, 0.0]],
            1.0,
        )
        .unwrap();
        assert_eq!(c.eval(0.5), [0.5, 0.0, 0.0]);
        assert_eq!(c.eval(2.0), [1.0, 1.0, 0.0]);
        assert_eq!(c.eval(9.0), [1.0, 2.0, 0.0]);
        let cert = c.holder_certificate(3.0);
        assert!((cert.constant - 1.0).abs() < 1e-12);
    }

    #[test]
    fn power_certificate_holds_on_samples() {
        let c = Curve::power([0.6, 0.8, 0.0], 0.7).unwrap();
        let cert = c.holder_certificate(2.0);
        for i in 0..40 {
            for j in 0..i {
                let (t, s) = (i as f64 / 20.0, j as f64 / 20.0);
                let (a, b) = (c.eval(t), c.eval(s));
                let d = norm3([a[0] - b[0], a[1] - b[1], a[2] - b[2]]);
                assert!(d <= cert.constant * (t - s).powf(0.7) * (1.0 + 1e-12));
            }
        }
    }
}
