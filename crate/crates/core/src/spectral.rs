//! Fourier multipliers and spectral projectors on the circle and the torus.
//!
//! Two flavours of conjugation are provided. [`hilbert`] is the literal multiplier
//! `-i sign(m)` over the whole band, so `H(H f) = -(f - mean f)` holds exactly.
//! [`conjugate`] is the harmonic conjugate of a real function: it drops the Nyquist
//! term so the result stays real and `f + i conjugate(f)` has real part exactly `f`.
//! The outer-function and corrector constructions need the second one.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::torus::{Grid1D, Sampled, Shape, Spectrum2D, TorusFn1D, TorusFn2D, WeightSamples};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The base regions of the frequency lattice used by the projectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConeKind {
    /// Every frequency.
    Full,
    /// `m >= 0`.
    RightHalf,
    /// `k >= 0`.
    TopHalf,
    /// `m >= 0 and k >= 0`.
    Quadrant,
    /// `m >= 0 or k >= 0`; the range of the projector `P`.
    Union,
    /// `k <= -1`; the range of `P2`.
    LowerHalfStrict,
}

/// A region of frequency pairs `(m, k)`, optionally complemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpectralCone {
    pub kind: ConeKind,
    pub complement: bool,
}

impl SpectralCone {
    pub const FULL: Self = Self::base(ConeKind::Full);
    pub const RIGHT_HALF: Self = Self::base(ConeKind::RightHalf);
    pub const TOP_HALF: Self = Self::base(ConeKind::TopHalf);
    pub const QUADRANT: Self = Self::base(ConeKind::Quadrant);
    pub const UNION: Self = Self::base(ConeKind::Union);
    pub const LOWER_HALF_STRICT: Self = Self::base(ConeKind::LowerHalfStrict);
    /// Range of `P`: spectra avoiding the open negative quadrant.
    pub const P: Self = Self::UNION;
    /// Range of `P2`: strictly negative second frequency.
    pub const P2: Self = Self::LOWER_HALF_STRICT;

    const fn base(kind: ConeKind) -> Self {
        Self {
            kind,
            complement: false,
        }
    }

    pub const ALL: [Self; 6] = [
        Self::FULL,
        Self::RIGHT_HALF,
        Self::TOP_HALF,
        Self::QUADRANT,
        Self::UNION,
        Self::LOWER_HALF_STRICT,
    ];

    pub fn complemented(self) -> Self {
        Self {
            kind: self.kind,
            complement: !self.complement,
        }
    }

    #[inline]
    pub fn contains(&self, m: i64, k: i64) -> bool {
        let inside = match self.kind {
            ConeKind::Full => true,
            ConeKind::RightHalf => m >= 0,
            ConeKind::TopHalf => k >= 0,
            ConeKind::Quadrant => m >= 0 && k >= 0,
            ConeKind::Union => m >= 0 || k >= 0,
            ConeKind::LowerHalfStrict => k <= -1,
        };
        inside != self.complement
    }
}

impl fmt::Display for SpectralCone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            ConeKind::Full => "full",
            ConeKind::RightHalf => "right",
            ConeKind::TopHalf => "top",
            ConeKind::Quadrant => "quadrant",
            ConeKind::Union => "union",
            ConeKind::LowerHalfStrict => "lower-strict",
        };
        if self.complement {
            write!(f, "!{name}")
        } else {
            f.write_str(name)
        }
    }
}

impl FromStr for SpectralCone {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (complement, name) = match s.strip_prefix('!') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let kind = match name {
            "full" => ConeKind::Full,
            "right" => ConeKind::RightHalf,
            "top" => ConeKind::TopHalf,
            "quadrant" => ConeKind::Quadrant,
            "union" | "p" => ConeKind::Union,
            "lower-strict" | "p2" => ConeKind::LowerHalfStrict,
            _ => return Err(invalid("cone", format!("unknown cone `{s}`"))),
        };
        Ok(Self { kind, complement })
    }
}

#[inline]
fn sign(m: i64) -> f64 {
    (m.signum()) as f64
}

/// Literal Hilbert transform: multiplier `-i sign(m)` on the whole band.
pub fn hilbert(f: &TorusFn1D) -> TorusFn1D {
    TorusFn1D::from_spectrum_unchecked(f.spectrum().multiplied(|m| -I * sign(m)))
}

fn conjugate_multiplier(grid: Grid1D) -> impl Fn(i64) -> Complex64 {
    let nyquist = grid.min_freq();
    move |m| {
        if m == nyquist {
            ZERO
        } else {
            -I * sign(m)
        }
    }
}

/// Harmonic conjugate of the real part of `f`; the result is real.
pub fn conjugate(f: &TorusFn1D) -> TorusFn1D {
    let re = f.map(|c| Complex64::new(c.re, 0.0));
    let h = TorusFn1D::from_spectrum_unchecked(re.spectrum().multiplied(conjugate_multiplier(f.grid())));
    h.map(|c| Complex64::new(c.re, 0.0))
}

/// `Re f + i conjugate(Re f)`: boundary values of the analytic function with real part `Re f`.
pub fn analytic_completion(f: &TorusFn1D) -> TorusFn1D {
    let h = conjugate(f);
    f.zip_map(&h, |a, b| Complex64::new(a.re, b.re))
}

/// Riesz projection: keeps `m >= 0`.
pub fn riesz(f: &TorusFn1D) -> TorusFn1D {
    TorusFn1D::from_spectrum_unchecked(f.spectrum().multiplied(|m| if m >= 0 { ONE } else { ZERO }))
}

/// Complementary Riesz projection: keeps `m <= -1`.
pub fn co_riesz(f: &TorusFn1D) -> TorusFn1D {
    TorusFn1D::from_spectrum_unchecked(f.spectrum().multiplied(|m| if m < 0 { ONE } else { ZERO }))
}

/// Zeroes every coefficient outside `cone`.
pub fn project_cone(f: &TorusFn2D, cone: SpectralCone) -> TorusFn2D {
    let s = project_spectrum(f.spectrum(), cone);
    TorusFn2D::from_spectrum_unchecked(s)
}

pub(crate) fn project_spectrum(s: &Spectrum2D, cone: SpectralCone) -> Spectrum2D {
    s.multiplied(|m, k| if cone.contains(m, k) { ONE } else { ZERO })
}

/// Literal Hilbert transform in the first variable.
pub fn hilbert_z1(f: &TorusFn2D) -> TorusFn2D {
    TorusFn2D::from_spectrum_unchecked(f.spectrum().multiplied(|m, _| -I * sign(m)))
}

/// Harmonic conjugate in the first variable of the real part of `f`.
pub fn conjugate_z1(f: &TorusFn2D) -> TorusFn2D {
    let nyquist = f.grids().0.min_freq();
    let re = f.map(|c| Complex64::new(c.re, 0.0));
    let s = re.spectrum().multiplied(|m, _| {
        if m == nyquist {
            ZERO
        } else {
            -I * sign(m)
        }
    });
    TorusFn2D::from_spectrum_unchecked(s).map(|c| Complex64::new(c.re, 0.0))
}

/// `Re f + i conjugate_z1(Re f)`.
pub fn analytic_completion_z1(f: &TorusFn2D) -> TorusFn2D {
    let h = conjugate_z1(f);
    f.zip_map(&h, |a, b| Complex64::new(a.re, b.re))
}

/// A nonvanishing multiplier used to conjugate projectors: `P^u f = u^{-1} P(u f)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    shape: Shape,
    values: Vec<Complex64>,
}

impl Frame {
    pub fn new(shape: Shape, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::ShapeMismatch {
                expected: shape.to_string(),
                got: values.len().to_string(),
            });
        }
        if let Some(index) = values
            .iter()
            .position(|c| !(c.norm() > 0.0) || !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::VanishingFrame { index });
        }
        Ok(Self { shape, values })
    }

    pub fn from_real(shape: Shape, values: &[f64]) -> Result<Self> {
        Self::new(shape, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_weight<W: WeightSamples + ?Sized>(w: &W) -> Self {
        let values = w.weight_values().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self {
            shape: w.weight_shape(),
            values,
        }
    }

    pub fn from_function<F: Sampled + ?Sized>(f: &F) -> Result<Self> {
        Self::new(f.sample_shape(), f.samples().to_vec())
    }

    pub fn ones(shape: Shape) -> Self {
        Self {
            shape,
            values: vec![ONE; shape.len()],
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.values.iter().all(|&c| c == ONE)
    }

    fn check(&self, shape: Shape) -> Result<()> {
        if self.shape != shape {
            return Err(Error::ShapeMismatch {
                expected: shape.to_string(),
                got: self.shape.to_string(),
            });
        }
        Ok(())
    }
}

/// `u^{-1} project_cone(u f, cone)`.
pub fn framed_project(f: &TorusFn2D, u: &Frame, cone: SpectralCone) -> Result<TorusFn2D> {
    u.check(f.sample_shape())?;
    if u.is_trivial() {
        return Ok(project_cone(f, cone));
    }
    let uf = TorusFn2D::from_parts(
        f.grids(),
        f.values().iter().zip(u.values()).map(|(a, b)| a * b).collect(),
    );
    let p = project_cone(&uf, cone);
    Ok(TorusFn2D::from_parts(
        f.grids(),
        p.values().iter().zip(u.values()).map(|(a, b)| a / b).collect(),
    ))
}

/// One-variable analogue of `P2^u` acting on a `z2` fiber: `u^{-1} (I - R)(u f)`.
pub fn framed_co_riesz(f: &TorusFn1D, u: &Frame) -> Result<TorusFn1D> {
    u.check(f.sample_shape())?;
    let uf = TorusFn1D::from_parts(
        f.grid(),
        f.values().iter().zip(u.values()).map(|(a, b)| a * b).collect(),
    );
    let p = co_riesz(&uf);
    Ok(TorusFn1D::from_parts(
        f.grid(),
        p.values().iter().zip(u.values()).map(|(a, b)| a / b).collect(),
    ))
}

/// Outcome of a membership test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Membership {
    pub member: bool,
    /// `max |c| outside the cone / max |c|`.
    pub leakage: f64,
}

pub fn membership(f: &TorusFn2D, cone: SpectralCone, tol: f64) -> Result<Membership> {
    if !(tol > 0.0) {
        return Err(invalid("tol", format!("must be positive, got {tol}")));
    }
    let leakage = cone_leakage(f.spectrum(), cone);
    Ok(Membership {
        member: leakage <= tol,
        leakage,
    })
}

/// Membership of `u f` in the cone, i.e. of `f` in the range of `P^u`.
pub fn framed_membership(f: &TorusFn2D, u: &Frame, cone: SpectralCone, tol: f64) -> Result<Membership> {
    u.check(f.sample_shape())?;
    let uf = TorusFn2D::from_parts(
        f.grids(),
        f.values().iter().zip(u.values()).map(|(a, b)| a * b).collect(),
    );
    membership(&uf, cone, tol)
}

pub(crate) fn cone_leakage(s: &Spectrum2D, cone: SpectralCone) -> f64 {
    let mut all = 0.0f64;
    let mut out = 0.0f64;
    for ((m, k), c) in s.iter() {
        let a = c.norm();
        all = all.max(a);
        if !cone.contains(m, k) {
            out = out.max(a);
        }
    }
    if all == 0.0 {
        0.0
    } else {
        out / all
    }
}

/// `max |c_m| over m < 0 / max |c_m|` for a one-variable function.
///
/// The Nyquist bin `-n/2` samples both `z^(n/2)` and `z^(-n/2)` and is not counted.
pub fn analytic_leakage(f: &TorusFn1D) -> f64 {
    let mut all = 0.0f64;
    let mut out = 0.0f64;
    let nyquist = f.grid().min_freq();
    for (m, c) in f.spectrum().iter() {
        all = all.max(c.norm());
        if m < 0 && m != nyquist {
            out = out.max(c.norm());
        }
    }
    if all == 0.0 {
        0.0
    } else {
        out / all
    }
}
