//! Unnormalized 3D complex FFT on cubic grids stored row-major.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

thread_local! {
    static PLANS: RefCell<HashMap<usize, Arc<Plans>>> = RefCell::new(HashMap::new());
    static SCRATCH: RefCell<Vec<Complex64>> = const { RefCell::new(Vec::new()) };
}

fn plans(n: usize) -> Arc<Plans> {
    PLANS.with(|cell| {
        cell.borrow_mut()
            .entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                Arc::new(Plans {
                    forward: planner.plan_fft_forward(n),
                    inverse: planner.plan_fft_inverse(n),
                })
            })
            .clone()
    })
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    /// Kernel `exp(-2 pi i j k / n)`.
    Forward,
    /// Kernel `exp(+2 pi i j k / n)`, no `1/n` factor.
    Inverse,
}

/// In-place 3D transform of an `n^3` array with index `(i * n + j) * n + k`.
pub(crate) fn fft3(data: &mut [Complex64], n: usize, dir: Direction) {
    assert_eq!(data.len(), n * n * n, "fft3 expects an n^3 array");
    if n == 1 {
        return;
    }
    let p = plans(n);
    let fft = match dir {
        Direction::Forward => &p.forward,
        Direction::Inverse => &p.inverse,
    };
    SCRATCH.with(|cell| {
        let mut scratch = cell.borrow_mut();
        let need = fft.get_inplace_scratch_len().max(n * n * n);
        if scratch.len() < need {
            scratch.resize(need, Complex64::new(0.0, 0.0));
        }

        // Contiguous axis.
        let s = fft.get_inplace_scratch_len();
        fft.process_with_scratch(data, &mut scratch[..s]);

        // Middle axis: transpose each plane, transform rows, transpose back.
        let mut plane = vec![Complex64::new(0.0, 0.0); n * n];
        for slab in data.chunks_exact_mut(n * n) {
            transpose(slab, &mut plane, n);
            fft.process_with_scratch(&mut plane, &mut scratch[..s]);
            transpose(&plane, slab, n);
        }

        // Slowest axis: gather lines of stride n^2 into a contiguous buffer.
        let nn = n * n;
        let mut buf = vec![Complex64::new(0.0, 0.0); n * n * n];
        for i in 0..n {
            let src = &data[i * nn..(i + 1) * nn];
            for (r, v) in src.iter().enumerate() {
                buf[r * n + i] = *v;
            }
        }
        fft.process_with_scratch(&mut buf, &mut scratch[..s]);
        for i in 0..n {
            let dst = &mut data[i * nn..(i + 1) * nn];
            for (r, v) in dst.iter_mut().enumerate() {
                *v = buf[r * n + i];
            }
        }
    });
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], n: usize) {
    const B: usize = 16;
    for ib in (0..n).step_by(B) {
        for jb in (0..n).step_by(B) {
            for i in ib..(ib + B).min(n) {
                for j in jb..(jb + B).min(n) {
                    dst[j * n + i] = src[i * n + j];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(data: &[Complex64], n: usize, sign: f64) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        for j in 0..n {
                            for k in 0..n {
                                let ph = sign
                                    * 2.0
                                    * std::f64::consts::PI
                                    * ((a * i + b * j + c * k) as f64)
                                    / n as f64;
                                acc += data[(i * n + j) * n + k] * Complex64::from_polar(1.0, ph);
                            }
                        }
                    }
                    out[(a * n + b) * n + c] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let n = 6;
        let data: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        for (dir, sign) in [(Direction::Forward, -1.0), (Direction::Inverse, 1.0)] {
            let mut d = data.clone();
            fft3(&mut d, n, dir);
            let r = naive(&data, n, sign);
            for (x, y) in d.iter().zip(&r) {
                assert!((x - y).norm() < 1e-10);
            }
        }
    }
}
