//! Discrete circle and torus: grids, sampled functions, spectra, Poisson smoothing
//! and weighted norms.
//!
//! Spectra use the symmetric band `-n/2 ..= n/2 - 1` and the convention that
//! coefficient `c_m` multiplies `z^m`. Integrals are normalized so that the circle
//! has mass one.

pub(crate) mod fft;
mod function;
mod grid;
pub mod io;

use num_complex::Complex64;

pub use function::{Spectrum1D, Spectrum2D, TorusFn1D, TorusFn2D};
pub use grid::Grid1D;

use crate::error::{invalid, Error, Result};

/// Shape of a sampled object.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    One(usize),
    Two(usize, usize),
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::One(n) => n,
            Shape::Two(a, b) => a * b,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Shape::One(n) => write!(f, "{n}"),
            Shape::Two(a, b) => write!(f, "{a}x{b}"),
        }
    }
}

/// Complex samples on a 1-D or 2-D grid.
pub trait Sampled {
    fn samples(&self) -> &[Complex64];
    fn sample_shape(&self) -> Shape;
}

/// Strictly positive real samples on a 1-D or 2-D grid.
pub trait WeightSamples {
    fn weight_values(&self) -> &[f64];
    fn weight_shape(&self) -> Shape;
}

impl Sampled for TorusFn1D {
    fn samples(&self) -> &[Complex64] {
        self.values()
    }
    fn sample_shape(&self) -> Shape {
        Shape::One(self.n())
    }
}

impl Sampled for TorusFn2D {
    fn samples(&self) -> &[Complex64] {
        self.values()
    }
    fn sample_shape(&self) -> Shape {
        let (a, b) = self.shape();
        Shape::Two(a, b)
    }
}

impl<T: Sampled + ?Sized> Sampled for &T {
    fn samples(&self) -> &[Complex64] {
        (**self).samples()
    }
    fn sample_shape(&self) -> Shape {
        (**self).sample_shape()
    }
}

impl<T: WeightSamples + ?Sized> WeightSamples for &T {
    fn weight_values(&self) -> &[f64] {
        (**self).weight_values()
    }
    fn weight_shape(&self) -> Shape {
        (**self).weight_shape()
    }
}

/// Convolution with the Poisson kernel: coefficient `c_m` becomes `rho^|m| c_m`.
pub fn poisson_convolve(f: &TorusFn1D, rho: f64) -> Result<TorusFn1D> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid("rho", format!("{rho} is outside [0, 1)")));
    }
    let s = f.spectrum().multiplied(|m| Complex64::new(rho.powi(m.unsigned_abs() as i32), 0.0));
    Ok(TorusFn1D::from_spectrum_unchecked(s))
}

/// Poisson smoothing in the first variable only.
pub fn poisson_convolve_z1(f: &TorusFn2D, rho: f64) -> Result<TorusFn2D> {
    if !(0.0..1.0).contains(&rho) {
        return Err(invalid("rho", format!("{rho} is outside [0, 1)")));
    }
    let s = f
        .spectrum()
        .multiplied(|m, _| Complex64::new(rho.powi(m.unsigned_abs() as i32), 0.0));
    Ok(TorusFn2D::from_spectrum_unchecked(s))
}

/// Weighted quasi-norm `(sum |f|^s w / N)^(1/s)`; for `s = inf` it is `max |f| / w`.
pub fn weighted_norm<F, W>(f: &F, w: &W, s: f64) -> Result<f64>
where
    F: Sampled + ?Sized,
    W: WeightSamples + ?Sized,
{
    if f.sample_shape() != w.weight_shape() {
        return Err(Error::ShapeMismatch {
            expected: f.sample_shape().to_string(),
            got: w.weight_shape().to_string(),
        });
    }
    weighted_norm_raw(f.samples(), w.weight_values(), s)
}

/// Same as [`weighted_norm`] on bare slices; checks the weight for positivity.
pub fn weighted_norm_raw(f: &[Complex64], w: &[f64], s: f64) -> Result<f64> {
    if f.len() != w.len() {
        return Err(Error::ShapeMismatch {
            expected: f.len().to_string(),
            got: w.len().to_string(),
        });
    }
    if !(s > 0.0) {
        return Err(invalid("s", format!("exponent must be positive, got {s}")));
    }
    if let Some(index) = w.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::NonPositiveWeight {
            index,
            value: w[index],
        });
    }
    Ok(norm_unchecked(f, w, s))
}

pub(crate) fn norm_unchecked(f: &[Complex64], w: &[f64], s: f64) -> f64 {
    if s.is_infinite() {
        return f
            .iter()
            .zip(w)
            .fold(0.0, |m, (v, wt)| m.max(v.norm() / wt));
    }
    let total: f64 = f.iter().zip(w).map(|(v, wt)| v.norm().powf(s) * wt).sum();
    (total / f.len() as f64).powf(1.0 / s)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Flat(Vec<f64>, Shape);
    impl WeightSamples for Flat {
        fn weight_values(&self) -> &[f64] {
            &self.0
        }
        fn weight_shape(&self) -> Shape {
            self.1
        }
    }

    #[test]
    fn poisson_zero_radius_keeps_mean() {
        let g = Grid1D::new(16).unwrap();
        let f = TorusFn1D::from_fn(g, |t| Complex64::new(1.0 + t.cos(), (2.0 * t).sin())).unwrap();
        let p = poisson_convolve(&f, 0.0).unwrap();
        for v in p.values() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        }
        let z = TorusFn1D::monomial(g, 1);
        let half = poisson_convolve(&z, 0.5).unwrap();
        assert!(half.max_diff(&z.scale(Complex64::new(0.5, 0.0))) < 1e-14);
        assert!(poisson_convolve(&f, 1.0).is_err());
        assert!(poisson_convolve(&f, -0.1).is_err());
    }

    #[test]
    fn norms_of_constants() {
        let g = Grid1D::new(8).unwrap();
        let one = Flat(vec![1.0; 8], Shape::One(8));
        let f = TorusFn1D::constant(g, Complex64::new(1.0, 0.0));
        for s in [0.5, 1.0, 2.0, 7.0, f64::INFINITY] {
            assert!((weighted_norm(&f, &one, s).unwrap() - 1.0).abs() < 1e-14);
        }
        let two = TorusFn1D::constant(g, Complex64::new(2.0, 0.0));
        assert_eq!(weighted_norm(&two, &one, f64::INFINITY).unwrap(), 2.0);
    }

    #[test]
    fn norm_rejects_bad_weight() {
        let f = vec![Complex64::new(1.0, 0.0); 8];
        let mut w = vec![1.0; 8];
        w[2] = 0.0;
        assert!(matches!(
            weighted_norm_raw(&f, &w, 1.0),
            Err(Error::NonPositiveWeight { index: 2, .. })
        ));
        assert!(weighted_norm_raw(&f, &[1.0; 8], 0.0).is_err());
    }
}
