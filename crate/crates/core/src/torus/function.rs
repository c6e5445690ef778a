use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex64;

use super::fft;
use super::grid::Grid1D;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn check_finite(values: &[Complex64]) -> Result<()> {
    match values.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Trigonometric coefficients on a one-dimensional grid.
///
/// Stored in FFT order; `get(m)` addresses the coefficient of `z^m` for
/// `m` in `-n/2 ..= n/2 - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum1D {
    grid: Grid1D,
    coeffs: Vec<Complex64>,
}

impl Spectrum1D {
    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            coeffs: vec![ZERO; grid.n()],
        }
    }

    pub fn from_fft_order(grid: Grid1D, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n() {
            return Err(Error::ShapeMismatch {
                expected: grid.n().to_string(),
                got: coeffs.len().to_string(),
            });
        }
        check_finite(&coeffs)?;
        Ok(Self { grid, coeffs })
    }

    /// Builds a spectrum from `(frequency, coefficient)` pairs; unlisted frequencies are zero.
    pub fn from_pairs(grid: Grid1D, pairs: &[(i64, Complex64)]) -> Result<Self> {
        let mut s = Self::zeros(grid);
        for &(m, c) in pairs {
            s.set(m, c)?;
        }
        Ok(s)
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn get(&self, m: i64) -> Option<Complex64> {
        self.grid.index(m).map(|i| self.coeffs[i])
    }

    pub fn set(&mut self, m: i64, c: Complex64) -> Result<()> {
        let idx = self.grid.index(m).ok_or(Error::FrequencyOutOfRange {
            freq: (m, 0),
            n: (self.grid.n(), 0),
        })?;
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::NonFinite { index: idx });
        }
        self.coeffs[idx] = c;
        Ok(())
    }

    pub fn as_fft_order(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| (self.grid.freq(i), *c))
    }

    /// Multiplies every coefficient by `mult(m)`.
    pub fn multiplied(&self, mult: impl Fn(i64) -> Complex64) -> Self {
        let coeffs = self.iter().map(|(m, c)| c * mult(m)).collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }
}

/// Trigonometric coefficients on a two-dimensional grid, `get(m, k)` multiplies `z1^m z2^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum2D {
    grids: (Grid1D, Grid1D),
    coeffs: Vec<Complex64>,
}

impl Spectrum2D {
    pub fn zeros(g1: Grid1D, g2: Grid1D) -> Self {
        Self {
            grids: (g1, g2),
            coeffs: vec![ZERO; g1.n() * g2.n()],
        }
    }

    pub fn from_fft_order(g1: Grid1D, g2: Grid1D, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != g1.n() * g2.n() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", g1.n(), g2.n()),
                got: coeffs.len().to_string(),
            });
        }
        check_finite(&coeffs)?;
        Ok(Self {
            grids: (g1, g2),
            coeffs,
        })
    }

    pub fn from_pairs(g1: Grid1D, g2: Grid1D, pairs: &[((i64, i64), Complex64)]) -> Result<Self> {
        let mut s = Self::zeros(g1, g2);
        for &((m, k), c) in pairs {
            s.set(m, k, c)?;
        }
        Ok(s)
    }

    pub fn grids(&self) -> (Grid1D, Grid1D) {
        self.grids
    }

    fn slot(&self, m: i64, k: i64) -> Option<usize> {
        let (g1, g2) = self.grids;
        Some(g1.index(m)? * g2.n() + g2.index(k)?)
    }

    pub fn get(&self, m: i64, k: i64) -> Option<Complex64> {
        self.slot(m, k).map(|i| self.coeffs[i])
    }

    pub fn set(&mut self, m: i64, k: i64, c: Complex64) -> Result<()> {
        let idx = self.slot(m, k).ok_or(Error::FrequencyOutOfRange {
            freq: (m, k),
            n: (self.grids.0.n(), self.grids.1.n()),
        })?;
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::NonFinite { index: idx });
        }
        self.coeffs[idx] = c;
        Ok(())
    }

    pub fn as_fft_order(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = ((i64, i64), Complex64)> + '_ {
        let (g1, g2) = self.grids;
        let n2 = g2.n();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, c)| ((g1.freq(i / n2), g2.freq(i % n2)), *c))
    }

    pub fn multiplied(&self, mult: impl Fn(i64, i64) -> Complex64) -> Self {
        let coeffs = self.iter().map(|((m, k), c)| c * mult(m, k)).collect();
        Self {
            grids: self.grids,
            coeffs,
        }
    }
}

/// Complex function sampled on a [`Grid1D`].
#[derive(Debug, Clone)]
pub struct TorusFn1D {
    grid: Grid1D,
    values: Vec<Complex64>,
    spectrum: OnceLock<Spectrum1D>,
}

impl PartialEq for TorusFn1D {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl TorusFn1D {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::ShapeMismatch {
                expected: grid.n().to_string(),
                got: values.len().to_string(),
            });
        }
        check_finite(&values)?;
        Ok(Self::from_parts(grid, values))
    }

    pub(crate) fn from_parts(grid: Grid1D, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self {
            grid,
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_real(grid: Grid1D, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Samples `f(theta)` at the grid angles.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.angles().map(f).collect())
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::from_parts(grid, vec![ZERO; grid.n()])
    }

    pub fn constant(grid: Grid1D, c: Complex64) -> Self {
        Self::from_parts(grid, vec![c; grid.n()])
    }

    /// The monomial `z^m`.
    pub fn monomial(grid: Grid1D, m: i64) -> Self {
        let values = grid
            .angles()
            .map(|t| Complex64::from_polar(1.0, m as f64 * t))
            .collect();
        Self::from_parts(grid, values)
    }

    /// Synthesizes values from a spectrum; the spectrum is kept as the cache.
    pub fn from_spectrum(spectrum: Spectrum1D) -> Result<Self> {
        let values = fft::inverse_1d(spectrum.as_fft_order());
        check_finite(&values)?;
        let out = Self::from_parts(spectrum.grid(), values);
        let _ = out.spectrum.set(spectrum);
        Ok(out)
    }

    pub(crate) fn from_spectrum_unchecked(spectrum: Spectrum1D) -> Self {
        let values = fft::inverse_1d(spectrum.as_fft_order());
        let out = Self::from_parts(spectrum.grid(), values);
        let _ = out.spectrum.set(spectrum);
        out
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Discrete Fourier coefficients, computed once and cached.
    pub fn spectrum(&self) -> &Spectrum1D {
        self.spectrum.get_or_init(|| Spectrum1D {
            grid: self.grid,
            coeffs: fft::forward_1d(&self.values),
        })
    }

    pub fn mean(&self) -> Complex64 {
        self.spectrum().as_fft_order()[0]
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_parts(self.grid, self.values.iter().map(|&c| f(c)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_parts(self.grid, values)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm()).collect()
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    /// Largest pointwise distance to `other`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }
}

/// Complex function sampled on a product grid, row-major with `z2` fastest.
///
/// `values()[i1 * n2 + i2]` is the sample at `(2 pi i1 / n1, 2 pi i2 / n2)`,
/// so a fiber at fixed `z1` is a contiguous row.
#[derive(Debug, Clone)]
pub struct TorusFn2D {
    grids: (Grid1D, Grid1D),
    values: Vec<Complex64>,
    spectrum: OnceLock<Spectrum2D>,
}

impl PartialEq for TorusFn2D {
    fn eq(&self, other: &Self) -> bool {
        self.grids == other.grids && self.values == other.values
    }
}

impl TorusFn2D {
    pub fn new(g1: Grid1D, g2: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != g1.n() * g2.n() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", g1.n(), g2.n()),
                got: values.len().to_string(),
            });
        }
        check_finite(&values)?;
        Ok(Self::from_parts((g1, g2), values))
    }

    pub(crate) fn from_parts(grids: (Grid1D, Grid1D), values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grids.0.n() * grids.1.n());
        Self {
            grids,
            values,
            spectrum: OnceLock::new(),
        }
    }

    pub fn from_real(g1: Grid1D, g2: Grid1D, values: &[f64]) -> Result<Self> {
        Self::new(
            g1,
            g2,
            values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn from_fn(g1: Grid1D, g2: Grid1D, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(g1.n() * g2.n());
        for t1 in g1.angles() {
            for t2 in g2.angles() {
                values.push(f(t1, t2));
            }
        }
        Self::new(g1, g2, values)
    }

    pub fn zeros(g1: Grid1D, g2: Grid1D) -> Self {
        Self::from_parts((g1, g2), vec![ZERO; g1.n() * g2.n()])
    }

    pub fn constant(g1: Grid1D, g2: Grid1D, c: Complex64) -> Self {
        Self::from_parts((g1, g2), vec![c; g1.n() * g2.n()])
    }

    /// The monomial `z1^m z2^k`.
    pub fn monomial(g1: Grid1D, g2: Grid1D, m: i64, k: i64) -> Self {
        let mut values = Vec::with_capacity(g1.n() * g2.n());
        for t1 in g1.angles() {
            for t2 in g2.angles() {
                values.push(Complex64::from_polar(1.0, m as f64 * t1 + k as f64 * t2));
            }
        }
        Self::from_parts((g1, g2), values)
    }

    pub fn from_spectrum(spectrum: Spectrum2D) -> Result<Self> {
        let (g1, g2) = spectrum.grids();
        let values = fft::inverse_2d(spectrum.as_fft_order(), g1.n(), g2.n());
        check_finite(&values)?;
        let out = Self::from_parts((g1, g2), values);
        let _ = out.spectrum.set(spectrum);
        Ok(out)
    }

    pub(crate) fn from_spectrum_unchecked(spectrum: Spectrum2D) -> Self {
        let (g1, g2) = spectrum.grids();
        let values = fft::inverse_2d(spectrum.as_fft_order(), g1.n(), g2.n());
        let out = Self::from_parts((g1, g2), values);
        let _ = out.spectrum.set(spectrum);
        out
    }

    /// Stacks fibers `f(z1_i, .)` in order of `i`.
    pub fn from_fibers_z2(g1: Grid1D, fibers: &[TorusFn1D]) -> Result<Self> {
        if fibers.len() != g1.n() {
            return Err(Error::ShapeMismatch {
                expected: g1.n().to_string(),
                got: fibers.len().to_string(),
            });
        }
        let g2 = fibers[0].grid();
        let mut values = Vec::with_capacity(g1.n() * g2.n());
        for fib in fibers {
            if fib.grid() != g2 {
                return Err(Error::ShapeMismatch {
                    expected: g2.n().to_string(),
                    got: fib.n().to_string(),
                });
            }
            values.extend_from_slice(fib.values());
        }
        Ok(Self::from_parts((g1, g2), values))
    }

    /// Builds from fibers `f(., z2_i)` indexed by `i`.
    pub fn from_fibers_z1(g2: Grid1D, fibers: &[TorusFn1D]) -> Result<Self> {
        if fibers.len() != g2.n() {
            return Err(Error::ShapeMismatch {
                expected: g2.n().to_string(),
                got: fibers.len().to_string(),
            });
        }
        let g1 = fibers[0].grid();
        let n2 = g2.n();
        let mut values = vec![ZERO; g1.n() * n2];
        for (i2, fib) in fibers.iter().enumerate() {
            if fib.grid() != g1 {
                return Err(Error::ShapeMismatch {
                    expected: g1.n().to_string(),
                    got: fib.n().to_string(),
                });
            }
            for (i1, v) in fib.values().iter().enumerate() {
                values[i1 * n2 + i2] = *v;
            }
        }
        Ok(Self::from_parts((g1, g2), values))
    }

    pub fn grids(&self) -> (Grid1D, Grid1D) {
        self.grids
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.grids.0.n(), self.grids.1.n())
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn at(&self, i1: usize, i2: usize) -> Complex64 {
        self.values[i1 * self.grids.1.n() + i2]
    }

    pub fn spectrum(&self) -> &Spectrum2D {
        self.spectrum.get_or_init(|| {
            let (n1, n2) = self.shape();
            Spectrum2D {
                grids: self.grids,
                coeffs: fft::forward_2d(&self.values, n1, n2),
            }
        })
    }

    pub fn mean(&self) -> Complex64 {
        self.spectrum().as_fft_order()[0]
    }

    /// The function of `z2` obtained by freezing `z1` at grid index `i1`.
    pub fn fiber_z2(&self, i1: usize) -> TorusFn1D {
        let n2 = self.grids.1.n();
        TorusFn1D::from_parts(self.grids.1, self.values[i1 * n2..(i1 + 1) * n2].to_vec())
    }

    /// The function of `z1` obtained by freezing `z2` at grid index `i2`.
    pub fn fiber_z1(&self, i2: usize) -> TorusFn1D {
        let n2 = self.grids.1.n();
        let values = (0..self.grids.0.n())
            .map(|i1| self.values[i1 * n2 + i2])
            .collect();
        TorusFn1D::from_parts(self.grids.0, values)
    }

    pub fn fibers_z2(&self) -> Vec<TorusFn1D> {
        (0..self.grids.0.n()).map(|i| self.fiber_z2(i)).collect()
    }

    pub fn fibers_z1(&self) -> Vec<TorusFn1D> {
        (0..self.grids.1.n()).map(|i| self.fiber_z1(i)).collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self::from_parts(self.grids, self.values.iter().map(|&c| f(c)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.grids, other.grids, "grid mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_parts(self.grids, values)
    }

    /// Multiplies by a function of `z2` alone.
    pub fn mul_z2(&self, b: &TorusFn1D) -> Self {
        assert_eq!(self.grids.1, b.grid(), "grid mismatch");
        let n2 = self.grids.1.n();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| v * b.values()[i % n2])
            .collect();
        Self::from_parts(self.grids, values)
    }

    /// Multiplies by a function of `z1` alone.
    pub fn mul_z1(&self, a: &TorusFn1D) -> Self {
        assert_eq!(self.grids.0, a.grid(), "grid mismatch");
        let n2 = self.grids.1.n();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| v * a.values()[i / n2])
            .collect();
        Self::from_parts(self.grids, values)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn abs(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.norm()).collect()
    }

    pub fn re(&self) -> Vec<f64> {
        self.values.iter().map(|c| c.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, c| m.max(c.im.abs()))
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.grids, other.grids, "grid mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|c| c.re == 0.0 && c.im == 0.0)
    }
}

macro_rules! impl_ops {
    ($t:ty) => {
        impl Add for &$t {
            type Output = $t;
            fn add(self, rhs: Self) -> $t {
                self.zip_map(rhs, |a, b| a + b)
            }
        }
        impl Sub for &$t {
            type Output = $t;
            fn sub(self, rhs: Self) -> $t {
                self.zip_map(rhs, |a, b| a - b)
            }
        }
        impl Mul for &$t {
            type Output = $t;
            fn mul(self, rhs: Self) -> $t {
                self.zip_map(rhs, |a, b| a * b)
            }
        }
        impl Neg for &$t {
            type Output = $t;
            fn neg(self) -> $t {
                self.map(|a| -a)
            }
        }
    };
}

impl_ops!(TorusFn1D);
impl_ops!(TorusFn2D);

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize) -> Grid1D {
        Grid1D::new(n).unwrap()
    }

    #[test]
    fn constant_has_only_mean() {
        let f = TorusFn1D::constant(g(8), Complex64::new(1.0, 0.0));
        let s = f.spectrum();
        assert!((s.get(0).unwrap() - 1.0).norm() < 1e-15);
        for m in -4..4 {
            if m != 0 {
                assert!(s.get(m).unwrap().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn monomial_spectrum() {
        let f = TorusFn1D::monomial(g(8), 1);
        let s = f.spectrum();
        assert!((s.get(1).unwrap() - 1.0).norm() < 1e-14);
        assert!(s.get(0).unwrap().norm() < 1e-14);
        let f2 = TorusFn2D::monomial(g(8), g(16), -2, 3);
        assert!((f2.spectrum().get(-2, 3).unwrap() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn spectrum_index_errors() {
        let mut s = Spectrum1D::zeros(g(8));
        assert!(s.set(4, Complex64::new(1.0, 0.0)).is_err());
        assert!(s.set(-4, Complex64::new(1.0, 0.0)).is_ok());
        let mut s2 = Spectrum2D::zeros(g(8), g(8));
        assert!(s2.set(0, -5, Complex64::new(1.0, 0.0)).is_err());
        assert!(Spectrum1D::from_fft_order(g(8), vec![ZERO; 7]).is_err());
    }

    #[test]
    fn rejects_non_finite() {
        let mut v = vec![ZERO; 8];
        v[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            TorusFn1D::new(g(8), v),
            Err(Error::NonFinite { index: 3 })
        ));
    }

    #[test]
    fn single_coefficient_synthesis() {
        let s = Spectrum1D::from_pairs(g(8), &[(1, Complex64::new(1.0, 0.0))]).unwrap();
        let f = TorusFn1D::from_spectrum(s).unwrap();
        for (k, v) in f.values().iter().enumerate() {
            let expect = Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / 8.0);
            assert!((v - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn fibers_round_trip() {
        let f = TorusFn2D::from_fn(g(8), g(16), |a, b| Complex64::new(a.cos(), b.sin() * a)).unwrap();
        let back = TorusFn2D::from_fibers_z2(g(8), &f.fibers_z2()).unwrap();
        assert_eq!(back, f);
        let back = TorusFn2D::from_fibers_z1(g(16), &f.fibers_z1()).unwrap();
        assert_eq!(back, f);
    }
}
