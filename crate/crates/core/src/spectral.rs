//! Continuum-normalized spectral fields, transforms, products and the Leray projector.
//!
//! The forward transform approximates `v̂(ξ) = ∫ f(x) e^{-iξ·x} dx` by the
//! rectangle rule on the lattice, and the inverse approximates
//! `f(x) = (2π)^{-3} ∫ v̂(ξ) e^{iξ·x} dξ` by the lattice sum with weight `L^{-3}`.

use num_complex::Complex64;
use thiserror::Error;

use crate::fft::{fft3, Direction};
use crate::lattice::FourierLattice;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Relative Hermitian defect above which an inverse transform is refused.
pub const HERMITIAN_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("fields live on different lattices")]
    LatticeMismatch,
    #[error("expected {expected} components, found {found}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("component length {found} does not match lattice size {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("spectrum is not Hermitian: relative defect {defect:e}")]
    NonHermitianInput { defect: f64 },
}

/// Fourier coefficients of a (scalar, vector or tensor) field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    lattice: FourierLattice,
    components: Vec<Vec<Complex64>>,
}

/// Real samples of a field at the lattice sites.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField {
    lattice: FourierLattice,
    components: Vec<Vec<f64>>,
    /// Largest discarded imaginary part relative to the largest amplitude.
    pub imag_residue: f64,
}

#[inline]
fn parity_sign(lat: &FourierLattice, idx: usize) -> f64 {
    let (i, j, k) = lat.unflat(idx);
    if (i + j + k) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl SpectralField {
    pub fn zeros(lattice: FourierLattice, n_components: usize) -> Self {
        let len = lattice.len();
        Self {
            lattice,
            components: (0..n_components).map(|_| vec![ZERO; len]).collect(),
        }
    }

    pub fn from_components(
        lattice: FourierLattice,
        components: Vec<Vec<Complex64>>,
    ) -> Result<Self, SpectralError> {
        check_lengths(&lattice, components.iter().map(Vec::len))?;
        Ok(Self {
            lattice,
            components,
        })
    }

    /// Builds a field by evaluating `f(idx, xi)` at every mode.
    pub fn from_fn<F>(lattice: FourierLattice, n_components: usize, mut f: F) -> Self
    where
        F: FnMut(usize, [f64; 3], &mut [Complex64]),
    {
        let mut out = Self::zeros(lattice, n_components);
        let mut buf = vec![ZERO; n_components];
        for idx in 0..lattice.len() {
            buf.iter_mut().for_each(|b| *b = ZERO);
            f(idx, lattice.xi(idx), &mut buf);
            for (c, b) in buf.iter().enumerate() {
                out.components[c][idx] = *b;
            }
        }
        out
    }

    pub fn lattice(&self) -> &FourierLattice {
        &self.lattice
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, c: usize) -> &[Complex64] {
        &self.components[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.components[c]
    }

    pub fn components(&self) -> &[Vec<Complex64>] {
        &self.components
    }

    pub fn into_components(self) -> Vec<Vec<Complex64>> {
        self.components
    }

    /// Largest coefficient modulus over all components.
    pub fn max_abs(&self) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.iter())
            .fold(0.0, |m, z| m.max(z.norm()))
    }

    /// `max |v̂(-ξ) - conj v̂(ξ)|` relative to the largest coefficient.
    pub fn hermitian_defect(&self) -> f64 {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let lat = &self.lattice;
        let mut worst: f64 = 0.0;
        for comp in &self.components {
            for idx in 0..lat.len() {
                let d = (comp[lat.conjugate_index(idx)] - comp[idx].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst / scale
    }

    /// Zeroes every mode outside the 2/3-rule band.
    pub fn truncate(&mut self) {
        let lat = self.lattice;
        for comp in &mut self.components {
            for (idx, z) in comp.iter_mut().enumerate() {
                if !lat.in_band(idx) {
                    *z = ZERO;
                }
            }
        }
    }

    /// Zeroes every mode carrying a Nyquist wavenumber.
    pub fn zero_nyquist(&mut self) {
        let lat = self.lattice;
        for comp in &mut self.components {
            for (idx, z) in comp.iter_mut().enumerate() {
                if lat.is_nyquist(idx) {
                    *z = ZERO;
                }
            }
        }
    }

    pub fn scale(&mut self, s: Complex64) {
        for comp in &mut self.components {
            comp.iter_mut().for_each(|z| *z *= s);
        }
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, other: &SpectralField, alpha: f64) -> Result<(), SpectralError> {
        self.check_compatible(other)?;
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y * alpha;
            }
        }
        Ok(())
    }

    pub fn check_compatible(&self, other: &SpectralField) -> Result<(), SpectralError> {
        if self.lattice != other.lattice {
            return Err(SpectralError::LatticeMismatch);
        }
        if self.n_components() != other.n_components() {
            return Err(SpectralError::ComponentMismatch {
                expected: self.n_components(),
                found: other.n_components(),
            });
        }
        Ok(())
    }

    /// Multiplies every mode by `m(idx)` (same factor for all components).
    pub fn apply_multiplier<F: Fn(usize) -> Complex64>(&mut self, m: F) {
        let len = self.lattice.len();
        for idx in 0..len {
            let f = m(idx);
            for comp in &mut self.components {
                comp[idx] *= f;
            }
        }
    }
}

impl PhysicalField {
    pub fn zeros(lattice: FourierLattice, n_components: usize) -> Self {
        let len = lattice.len();
        Self {
            lattice,
            components: (0..n_components).map(|_| vec![0.0; len]).collect(),
            imag_residue: 0.0,
        }
    }

    pub fn from_components(
        lattice: FourierLattice,
        components: Vec<Vec<f64>>,
    ) -> Result<Self, SpectralError> {
        check_lengths(&lattice, components.iter().map(Vec::len))?;
        Ok(Self {
            lattice,
            components,
            imag_residue: 0.0,
        })
    }

    /// Samples `f(x)` at every lattice site.
    pub fn from_fn<F>(lattice: FourierLattice, n_components: usize, mut f: F) -> Self
    where
        F: FnMut([f64; 3], &mut [f64]),
    {
        let mut out = Self::zeros(lattice, n_components);
        let mut buf = vec![0.0; n_components];
        for idx in 0..lattice.len() {
            buf.iter_mut().for_each(|b| *b = 0.0);
            f(lattice.position(idx), &mut buf);
            for (c, b) in buf.iter().enumerate() {
                out.components[c][idx] = *b;
            }
        }
        out
    }

    pub fn lattice(&self) -> &FourierLattice {
        &self.lattice
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        &self.components[c]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.components[c]
    }

    /// Euclidean (Frobenius for tensors) magnitude at each site.
    pub fn magnitudes(&self) -> Vec<f64> {
        let len = self.lattice.len();
        (0..len)
            .map(|i| {
                self.components
                    .iter()
                    .map(|c| c[i] * c[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// Largest magnitude on the outermost layer of sites relative to the global maximum.
    ///
    /// A value near zero means the field has decayed before reaching the
    /// periodic boundary, so periodization is a small perturbation.
    pub fn boundary_decay(&self) -> f64 {
        let lat = self.lattice;
        let n = lat.n();
        let mags = self.magnitudes();
        let global = mags.iter().cloned().fold(0.0, f64::max);
        if global == 0.0 {
            return 0.0;
        }
        let edge = |i: usize| i <= 1 || i == n - 1;
        let mut shell: f64 = 0.0;
        for (idx, m) in mags.iter().enumerate() {
            let (i, j, k) = lat.unflat(idx);
            if edge(i) || edge(j) || edge(k) {
                shell = shell.max(*m);
            }
        }
        shell / global
    }
}

fn check_lengths<I: Iterator<Item = usize>>(
    lattice: &FourierLattice,
    lens: I,
) -> Result<(), SpectralError> {
    for l in lens {
        if l != lattice.len() {
            return Err(SpectralError::LengthMismatch {
                expected: lattice.len(),
                found: l,
            });
        }
    }
    Ok(())
}

/// Lattice approximation of the continuum Fourier transform.
pub fn forward_transform(f: &PhysicalField) -> SpectralField {
    let lat = f.lattice;
    let mut out = SpectralField::zeros(lat, f.n_components());
    let mut c = 0;
    while c < f.n_components() {
        let pair = c + 1 < f.n_components();
        let second = if pair { Some(f.component(c + 1)) } else { None };
        let (a, b) = forward_real_pair(&lat, f.component(c), second);
        out.components[c] = a;
        if let Some(b) = b {
            out.components[c + 1] = b;
        }
        c += if pair { 2 } else { 1 };
    }
    out
}

/// Lattice approximation of the inverse continuum Fourier transform.
///
/// Fails with [`SpectralError::NonHermitianInput`] when the spectrum is not
/// the transform of a real field to relative accuracy `1e-8`; smaller
/// imaginary residues are dropped and recorded in `imag_residue`.
pub fn inverse_transform(v: &SpectralField) -> Result<PhysicalField, SpectralError> {
    let defect = v.hermitian_defect();
    if defect > HERMITIAN_TOLERANCE {
        return Err(SpectralError::NonHermitianInput { defect });
    }
    let lat = v.lattice;
    let norm = 1.0 / lat.box_length().powi(3);
    let mut out = PhysicalField::zeros(lat, v.n_components());
    let mut worst_im: f64 = 0.0;
    let mut worst_re: f64 = 0.0;
    for (c, comp) in v.components.iter().enumerate() {
        let mut data: Vec<Complex64> = comp
            .iter()
            .enumerate()
            .map(|(idx, z)| z * parity_sign(&lat, idx))
            .collect();
        fft3(&mut data, lat.n(), Direction::Inverse);
        for (x, z) in out.components[c].iter_mut().zip(&data) {
            *x = z.re * norm;
            worst_re = worst_re.max(x.abs());
            worst_im = worst_im.max((z.im * norm).abs());
        }
    }
    out.imag_residue = if worst_re > 0.0 {
        worst_im / worst_re
    } else {
        0.0
    };
    Ok(out)
}

/// Forward transform of one or two real arrays using a single complex FFT.
fn forward_real_pair(
    lat: &FourierLattice,
    a: &[f64],
    b: Option<&[f64]>,
) -> (Vec<Complex64>, Option<Vec<Complex64>>) {
    let vol = lat.cell_volume();
    let mut data: Vec<Complex64> = match b {
        Some(b) => a
            .iter()
            .zip(b)
            .map(|(x, y)| Complex64::new(*x, *y))
            .collect(),
        None => a.iter().map(|x| Complex64::new(*x, 0.0)).collect(),
    };
    fft3(&mut data, lat.n(), Direction::Forward);
    let len = lat.len();
    match b {
        None => {
            for (idx, z) in data.iter_mut().enumerate() {
                *z *= vol * parity_sign(lat, idx);
            }
            (data, None)
        }
        Some(_) => {
            let mut pa = vec![ZERO; len];
            let mut pb = vec![ZERO; len];
            for idx in 0..len {
                let z = data[idx];
                let zc = data[lat.conjugate_index(idx)].conj();
                let s = vol * parity_sign(lat, idx);
                pa[idx] = (z + zc) * (0.5 * s);
                pb[idx] = (z - zc) * Complex64::new(0.0, -0.5 * s);
            }
            (pa, Some(pb))
        }
    }
}

/// Inverse transform of one or two Hermitian spectra using a single complex FFT.
fn inverse_real_pair(
    lat: &FourierLattice,
    a: &[Complex64],
    b: Option<&[Complex64]>,
) -> (Vec<f64>, Option<Vec<f64>>) {
    let norm = 1.0 / lat.box_length().powi(3);
    let i = Complex64::new(0.0, 1.0);
    let mut data: Vec<Complex64> = match b {
        Some(b) => a
            .iter()
            .zip(b)
            .enumerate()
            .map(|(idx, (x, y))| (x + i * y) * parity_sign(lat, idx))
            .collect(),
        None => a
            .iter()
            .enumerate()
            .map(|(idx, x)| x * parity_sign(lat, idx))
            .collect(),
    };
    fft3(&mut data, lat.n(), Direction::Inverse);
    let ra = data.iter().map(|z| z.re * norm).collect();
    let rb = b.map(|_| data.iter().map(|z| z.im * norm).collect());
    (ra, rb)
}

fn truncated(lat: &FourierLattice, comp: &[Complex64]) -> Vec<Complex64> {
    comp.iter()
        .enumerate()
        .map(|(idx, z)| if lat.in_band(idx) { *z } else { ZERO })
        .collect()
}

/// Real samples of all components after 2/3-rule truncation, two per FFT.
fn band_limited_samples(v: &SpectralField) -> Vec<Vec<f64>> {
    let lat = v.lattice;
    let mut out = Vec::with_capacity(v.n_components());
    let mut c = 0;
    while c < v.n_components() {
        let a = truncated(&lat, v.component(c));
        if c + 1 < v.n_components() {
            let b = truncated(&lat, v.component(c + 1));
            let (ra, rb) = inverse_real_pair(&lat, &a, Some(&b));
            out.push(ra);
            out.push(rb.expect("pair"));
            c += 2;
        } else {
            out.push(inverse_real_pair(&lat, &a, None).0);
            c += 1;
        }
    }
    out
}

fn transform_products(lat: &FourierLattice, products: Vec<Vec<f64>>) -> Vec<Vec<Complex64>> {
    let mut out = Vec::with_capacity(products.len());
    let mut c = 0;
    while c < products.len() {
        if c + 1 < products.len() {
            let (a, b) = forward_real_pair(lat, &products[c], Some(&products[c + 1]));
            out.push(truncated(lat, &a));
            out.push(truncated(lat, &b.expect("pair")));
            c += 2;
        } else {
            let (a, _) = forward_real_pair(lat, &products[c], None);
            out.push(truncated(lat, &a));
            c += 1;
        }
    }
    out
}

/// Pseudo-spectral product with 2/3-rule dealiasing.
///
/// Returns the `m·n` channels `(u_i v_j)^` with channel index `i·n + j`.
/// Both inputs are truncated before the product and the result after it.
pub fn dealiased_product(
    u: &SpectralField,
    v: &SpectralField,
) -> Result<SpectralField, SpectralError> {
    if u.lattice != v.lattice {
        return Err(SpectralError::LatticeMismatch);
    }
    let lat = u.lattice;
    let us = band_limited_samples(u);
    let vs = if std::ptr::eq(u, v) {
        us.clone()
    } else {
        band_limited_samples(v)
    };
    let mut products = Vec::with_capacity(us.len() * vs.len());
    for a in &us {
        for b in &vs {
            products.push(a.iter().zip(b).map(|(x, y)| x * y).collect());
        }
    }
    Ok(SpectralField {
        lattice: lat,
        components: transform_products(&lat, products),
    })
}

/// Index of the symmetric pair `(i, j)` in the packed order xx, xy, xz, yy, yz, zz.
#[inline]
pub fn sym_index(i: usize, j: usize) -> usize {
    let (a, b) = if i <= j { (i, j) } else { (j, i) };
    match (a, b) {
        (0, 0) => 0,
        (0, 1) => 1,
        (0, 2) => 2,
        (1, 1) => 3,
        (1, 2) => 4,
        _ => 5,
    }
}

/// Dealiased `(u_i u_j)^` of a 3-vector field, packed as six symmetric channels.
pub fn dealiased_square(u: &SpectralField) -> Result<SpectralField, SpectralError> {
    if u.n_components() != 3 {
        return Err(SpectralError::ComponentMismatch {
            expected: 3,
            found: u.n_components(),
        });
    }
    let lat = u.lattice;
    let s = band_limited_samples(u);
    let pairs = [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)];
    let products = pairs
        .iter()
        .map(|&(i, j)| s[i].iter().zip(&s[j]).map(|(x, y)| x * y).collect())
        .collect();
    Ok(SpectralField {
        lattice: lat,
        components: transform_products(&lat, products),
    })
}

/// Applies `δ_jk - ξ_j ξ_k / |ξ|²` modewise; the zero mode passes unchanged.
pub fn leray_project(v: &SpectralField) -> Result<SpectralField, SpectralError> {
    if v.n_components() != 3 {
        return Err(SpectralError::ComponentMismatch {
            expected: 3,
            found: v.n_components(),
        });
    }
    let mut out = v.clone();
    leray_in_place(&mut out);
    Ok(out)
}

pub(crate) fn leray_in_place(v: &mut SpectralField) {
    let lat = v.lattice;
    for idx in 0..lat.len() {
        let lam = lat.xi_sq(idx);
        if lam == 0.0 {
            continue;
        }
        let xi = lat.xi(idx);
        let dot = (v.components[0][idx] * xi[0]
            + v.components[1][idx] * xi[1]
            + v.components[2][idx] * xi[2])
            / lam;
        for (c, x) in xi.iter().enumerate() {
            v.components[c][idx] -= dot * *x;
        }
    }
}

/// Multiplies every component by `iξ_axis`.
///
/// The Nyquist plane of the differentiated axis is zeroed: its mode is its
/// own conjugate, so keeping `iξ` there would make a real field complex.
pub fn spectral_derivative(v: &SpectralField, axis: usize) -> SpectralField {
    assert!(axis < 3, "axis must be 0, 1 or 2");
    let lat = v.lattice;
    let half = -(lat.n() as i64) / 2;
    let mut out = v.clone();
    out.apply_multiplier(|idx| {
        let w = lat.wavevector(idx)[axis];
        if w == half {
            ZERO
        } else {
            Complex64::new(0.0, lat.freq_step() * w as f64)
        }
    });
    out
}

/// `Σ_j iξ_j v̂_j` of a 3-vector field.
pub fn divergence(v: &SpectralField) -> Result<SpectralField, SpectralError> {
    if v.n_components() != 3 {
        return Err(SpectralError::ComponentMismatch {
            expected: 3,
            found: v.n_components(),
        });
    }
    let lat = v.lattice;
    let mut out = SpectralField::zeros(lat, 1);
    for idx in 0..lat.len() {
        let xi = lat.xi(idx);
        let mut acc = ZERO;
        for (c, x) in xi.iter().enumerate() {
            acc += v.components[c][idx] * *x;
        }
        out.components[0][idx] = Complex64::new(-acc.im, acc.re);
    }
    Ok(out)
}

/// `max_ξ |ξ·v̂| / max_ξ |ξ||v̂|`, a scale-free divergence diagnostic.
pub fn relative_divergence(v: &SpectralField) -> f64 {
    let lat = v.lattice;
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for idx in 0..lat.len() {
        let xi = lat.xi(idx);
        let mut dot = ZERO;
        let mut mag = 0.0;
        for (c, x) in xi.iter().enumerate() {
            let z = v.components[c][idx];
            dot += z * *x;
            mag += z.norm_sqr();
        }
        num = num.max(dot.norm());
        den = den.max(lat.xi_sq(idx).sqrt() * mag.sqrt());
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn gaussian(lat: FourierLattice, sigma: f64) -> PhysicalField {
        PhysicalField::from_fn(lat, 1, |x, out| {
            out[0] = (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (sigma * sigma)).exp();
        })
    }

    #[test]
    fn gaussian_transform_matches_continuum() {
        let lat = FourierLattice::new(40, 20.0).unwrap();
        let sigma = 1.6;
        let g = forward_transform(&gaussian(lat, sigma));
        for idx in (0..lat.len()).filter(|&i| !lat.is_nyquist(i)) {
            let lam = lat.xi_sq(idx);
            let exact = PI.powf(1.5) * sigma.powi(3) * (-lam * sigma * sigma / 4.0).exp();
            assert!(
                (g.component(0)[idx] - exact).norm() < 1e-10,
                "idx {idx} {} {exact}",
                g.component(0)[idx]
            );
        }
    }

    #[test]
    fn round_trip_is_identity() {
        let lat = FourierLattice::new(8, 3.0).unwrap();
        let f = PhysicalField::from_fn(lat, 3, |x, out| {
            out[0] = x[0].sin() + x[1];
            out[1] = (x[2] * 1.3).cos();
            out[2] = x[0] * x[1] * x[2];
        });
        let back = inverse_transform(&forward_transform(&f)).unwrap();
        for c in 0..3 {
            for (a, b) in f.component(c).iter().zip(back.component(c)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
        assert!(back.imag_residue < 1e-12);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let lat = FourierLattice::new(4, 1.0).unwrap();
        let mut v = SpectralField::zeros(lat, 1);
        v.component_mut(0)[1] = Complex64::new(1.0, 0.0);
        assert!(matches!(
            inverse_transform(&v),
            Err(SpectralError::NonHermitianInput { .. })
        ));
    }

    #[test]
    fn leray_output_is_divergence_free_and_idempotent() {
        let lat = FourierLattice::new(8, 2.0).unwrap();
        let v = SpectralField::from_fn(lat, 3, |idx, _, out| {
            for (c, o) in out.iter_mut().enumerate() {
                *o = Complex64::new((idx * (c + 1)) as f64 % 7.0, (idx + c) as f64 % 3.0);
            }
        });
        let p = leray_project(&v).unwrap();
        assert!(relative_divergence(&p) < 1e-14);
        let pp = leray_project(&p).unwrap();
        for c in 0..3 {
            for (a, b) in p.component(c).iter().zip(pp.component(c)) {
                assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
            }
        }
        assert_eq!(p.component(1)[0], v.component(1)[0]);
    }

    #[test]
    fn product_of_band_limited_fields_is_exact() {
        let lat = FourierLattice::new(12, 2.0 * PI).unwrap();
        let f = PhysicalField::from_fn(lat, 1, |x, o| o[0] = x[0].cos());
        let g = PhysicalField::from_fn(lat, 1, |x, o| o[0] = (x[1] + x[0]).sin());
        let fg = PhysicalField::from_fn(lat, 1, |x, o| o[0] = x[0].cos() * (x[1] + x[0]).sin());
        let p = dealiased_product(&forward_transform(&f), &forward_transform(&g)).unwrap();
        let exact = forward_transform(&fg);
        for (a, b) in p.component(0).iter().zip(exact.component(0)) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn square_matches_general_product() {
        let lat = FourierLattice::new(8, 5.0).unwrap();
        let u = forward_transform(&PhysicalField::from_fn(lat, 3, |x, o| {
            o[0] = (-x[0] * x[0]).exp();
            o[1] = (-x[1] * x[1] - 0.3 * x[0]).exp();
            o[2] = (-(x[2] - 0.5).powi(2)).exp();
        }));
        let sq = dealiased_square(&u).unwrap();
        let full = dealiased_product(&u, &u).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                for (a, b) in sq
                    .component(sym_index(i, j))
                    .iter()
                    .zip(full.component(3 * i + j))
                {
                    assert!((a - b).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn derivative_of_sine() {
        let lat = FourierLattice::new(16, 2.0 * PI).unwrap();
        let f = forward_transform(&PhysicalField::from_fn(lat, 1, |x, o| {
            o[0] = (2.0 * x[1]).sin()
        }));
        let d = inverse_transform(&spectral_derivative(&f, 1)).unwrap();
        for idx in 0..lat.len() {
            let x = lat.position(idx);
            assert!((d.component(0)[idx] - 2.0 * (2.0 * x[1]).cos()).abs() < 1e-11);
        }
    }

    #[test]
    fn boundary_decay_small_for_localized_field() {
        let lat = FourierLattice::new(16, 20.0).unwrap();
        assert!(gaussian(lat, 1.0).boundary_decay() < 1e-20);
    }
}
