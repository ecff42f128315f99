//! Periodic Fourier lattice on the box `[-L/2, L/2)^3`.

use std::f64::consts::PI;

use crate::spectral::SpectralError;

/// Mode and grid geometry of an `N^3` lattice of side `L`.
///
/// Spectral arrays use FFT index order along every axis: index `i` carries
/// the integer wavenumber `i` for `i < N/2` and `i - N` otherwise, so the
/// frequency is `2 pi k / L` with `k` in `[-N/2, N/2)`. Physical samples sit
/// at `x_j = (L/N) j - L/2`, which puts the origin at index `N/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierLattice {
    n: usize,
    box_length: f64,
}

impl FourierLattice {
    pub fn new(n: usize, box_length: f64) -> Result<Self, SpectralError> {
        if n < 2 || n % 2 != 0 {
            return Err(SpectralError::InvalidLattice(format!(
                "N must be even and at least 2, got {n}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(SpectralError::InvalidLattice(format!(
                "L must be positive and finite, got {box_length}"
            )));
        }
        Ok(Self { n, box_length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Number of lattice sites, `N^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing `L/N`.
    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    /// Frequency spacing `2 pi / L`.
    pub fn freq_step(&self) -> f64 {
        2.0 * PI / self.box_length
    }

    /// Largest resolved frequency magnitude per axis, `pi N / L`.
    pub fn cutoff(&self) -> f64 {
        PI * self.n as f64 / self.box_length
    }

    /// Integer wavenumber stored at FFT index `i`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT index of the wavenumber `-k` for the wavenumber stored at `i`.
    #[inline]
    pub fn negate_index(&self, i: usize) -> usize {
        (self.n - i) % self.n
    }

    #[inline]
    pub fn flat(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    #[inline]
    pub fn unflat(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Integer wavenumbers of the mode at flat index `idx`.
    #[inline]
    pub fn wavevector(&self, idx: usize) -> [i64; 3] {
        let (i, j, k) = self.unflat(idx);
        [self.wavenumber(i), self.wavenumber(j), self.wavenumber(k)]
    }

    /// Frequency vector `xi` of the mode at flat index `idx`.
    #[inline]
    pub fn xi(&self, idx: usize) -> [f64; 3] {
        let s = self.freq_step();
        let w = self.wavevector(idx);
        [s * w[0] as f64, s * w[1] as f64, s * w[2] as f64]
    }

    /// `|xi|^2`, computed from the integer wavevector so equal shells agree bitwise.
    #[inline]
    pub fn xi_sq(&self, idx: usize) -> f64 {
        let w = self.wavevector(idx);
        let s = self.freq_step();
        s * s * (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]) as f64
    }

    /// Flat index of the mode `-k`.
    #[inline]
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let (i, j, k) = self.unflat(idx);
        self.flat(
            self.negate_index(i),
            self.negate_index(j),
            self.negate_index(k),
        )
    }

    /// Whether the mode survives 2/3-rule truncation: every `|k_i| <= N/3`.
    #[inline]
    pub fn in_band(&self, idx: usize) -> bool {
        let w = self.wavevector(idx);
        let lim = self.n as i64;
        w.iter().all(|k| 3 * k.abs() <= lim)
    }

    /// Whether any component of the mode is the Nyquist wavenumber `-N/2`.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let w = self.wavevector(idx);
        let h = -(self.n as i64) / 2;
        w.iter().any(|&k| k == h)
    }

    /// Physical coordinate of grid index `j` along one axis.
    #[inline]
    pub fn coordinate(&self, j: usize) -> f64 {
        self.spacing() * j as f64 - 0.5 * self.box_length
    }

    /// Physical position of the site at flat index `idx`.
    #[inline]
    pub fn position(&self, idx: usize) -> [f64; 3] {
        let (i, j, k) = self.unflat(idx);
        [self.coordinate(i), self.coordinate(j), self.coordinate(k)]
    }

    /// `h^3`, the quadrature weight of one site.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }
}
