//! Weights on the circle and the torus, Muckenhoupt-type condition constants over
//! finite arc families, and the weight transforms used by the splitting engine.
//!
//! Every constant is invariant under `w -> c w`. To make that hold to the last bit
//! for constant weights, values are divided by their maximum before averaging.

mod arcs;
pub mod family;
pub mod hypothesis;

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;

pub use arcs::{Arc, ArcFamily, RectFamily};
pub use family::WeightSpec;
pub use hypothesis::{hypothesis_check, HypothesisEntry, HypothesisInput, HypothesisReport, TheoremId, Thresholds};

use crate::error::{invalid, Error, Result};
use crate::torus::{Grid1D, Shape, TorusFn1D, TorusFn2D, WeightSamples};

/// A condition whose constant can be measured on an arc family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Condition {
    /// Muckenhoupt `A_p`, `p > 1`.
    Ap(f64),
    A1,
    /// Reverse Hoelder with exponent `1 + delta`.
    ReverseHolder(f64),
    /// Mean oscillation of `log w`.
    BmoLog,
}

impl Condition {
    fn key(&self) -> (u8, u64) {
        match *self {
            Condition::Ap(p) => (0, p.to_bits()),
            Condition::A1 => (1, 0),
            Condition::ReverseHolder(d) => (2, d.to_bits()),
            Condition::BmoLog => (3, 0),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Condition::Ap(p) if !(p > 1.0) => Err(invalid("p", format!("A_p needs p > 1, got {p}"))),
            Condition::ReverseHolder(d) if !(d > 0.0) => {
                Err(invalid("delta", format!("reverse Hoelder needs delta > 0, got {d}")))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Ap(p) => write!(f, "A_{p}"),
            Condition::A1 => f.write_str("A_1"),
            Condition::ReverseHolder(d) => write!(f, "RH_{d}"),
            Condition::BmoLog => f.write_str("BMO(log)"),
        }
    }
}

/// Which variable runs along a fiber.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FiberVariable {
    /// Fibers `w(., z2)`: functions of the first variable.
    Z1,
    /// Fibers `w(z1, .)`: functions of the second variable.
    Z2,
}

type CacheKey = (u8, u64, u64);

fn check_positive(values: &[f64]) -> Result<()> {
    match values.iter().position(|&x| !(x > 0.0) || !x.is_finite()) {
        Some(index) => Err(Error::NonPositiveWeight {
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

fn normalized(values: &[f64]) -> Vec<f64> {
    let max = values.iter().copied().fold(0.0, f64::max);
    values.iter().map(|x| x / max).collect()
}

fn measure_1d(values: &[f64], cond: Condition, fam: &ArcFamily) -> f64 {
    match cond {
        Condition::Ap(p) => arcs::max_over(fam, &normalized(values), arcs::ap_kernel(p)).max(1.0),
        Condition::A1 => arcs::max_over(fam, &normalized(values), arcs::a1_kernel).max(1.0),
        Condition::ReverseHolder(d) => arcs::max_over(fam, &normalized(values), arcs::rh_kernel(d)).max(1.0),
        Condition::BmoLog => {
            let logs: Vec<f64> = normalized(values).iter().map(|x| x.ln()).collect();
            arcs::max_over(fam, &logs, arcs::bmo_kernel)
        }
    }
}

/// Strictly positive weight on the circle.
pub struct Weight1D {
    grid: Grid1D,
    values: Vec<f64>,
    cache: Mutex<HashMap<CacheKey, f64>>,
}

impl Clone for Weight1D {
    fn clone(&self) -> Self {
        Self::from_parts(self.grid, self.values.clone())
    }
}

impl fmt::Debug for Weight1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight1D")
            .field("n", &self.grid.n())
            .field("min", &self.min())
            .field("max", &self.max())
            .finish()
    }
}

impl PartialEq for Weight1D {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.values == other.values
    }
}

impl Weight1D {
    pub fn new(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::ShapeMismatch {
                expected: grid.n().to_string(),
                got: values.len().to_string(),
            });
        }
        check_positive(&values)?;
        Ok(Self::from_parts(grid, values))
    }

    pub(crate) fn from_parts(grid: Grid1D, values: Vec<f64>) -> Self {
        Self {
            grid,
            values,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.angles().map(f).collect())
    }

    pub fn constant(grid: Grid1D, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.n()])
    }

    pub fn ones(grid: Grid1D) -> Self {
        Self::from_parts(grid, vec![1.0; grid.n()])
    }

    /// Real, strictly positive samples of `f`.
    pub fn from_function(f: &TorusFn1D) -> Result<Self> {
        let im = f.max_imag();
        if im != 0.0 {
            return Err(Error::NotReal(im));
        }
        Self::new(f.grid(), f.re())
    }

    pub fn to_function(&self) -> TorusFn1D {
        TorusFn1D::from_parts(
            self.grid,
            self.values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn ln(&self) -> Vec<f64> {
        self.values.iter().map(|x| x.ln()).collect()
    }

    /// Mean of `log w`; finite on every grid weight.
    pub fn log_mean(&self) -> f64 {
        self.ln().iter().sum::<f64>() / self.n() as f64
    }

    pub fn powf(&self, e: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|x| x.powf(e)).collect())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.grid, self.values.iter().map(|x| x * c).collect())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::ShapeMismatch {
                expected: self.n().to_string(),
                got: other.n().to_string(),
            });
        }
        Self::new(
            self.grid,
            self.values.iter().zip(&other.values).map(|(a, b)| a * b).collect(),
        )
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&x| x == self.values[0])
    }

    /// Measured constant of `cond` over `fam`, memoized per (condition, family).
    pub fn condition_constant(&self, cond: Condition, fam: &ArcFamily) -> Result<f64> {
        cond.validate()?;
        if fam.n() != self.n() {
            return Err(Error::ShapeMismatch {
                expected: self.n().to_string(),
                got: fam.n().to_string(),
            });
        }
        let (tag, bits) = cond.key();
        let key = (tag, bits, fam.id());
        if let Some(&v) = self.cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(v);
        }
        let v = measure_1d(&self.values, cond, fam);
        self.cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, v);
        Ok(v)
    }
}

impl WeightSamples for Weight1D {
    fn weight_values(&self) -> &[f64] {
        &self.values
    }
    fn weight_shape(&self) -> Shape {
        Shape::One(self.n())
    }
}

/// Strictly positive weight on the torus, row-major with `z2` fastest.
pub struct Weight2D {
    grids: (Grid1D, Grid1D),
    values: Vec<f64>,
    cache: Mutex<HashMap<CacheKey, f64>>,
}

impl Clone for Weight2D {
    fn clone(&self) -> Self {
        Self::from_parts(self.grids, self.values.clone())
    }
}

impl fmt::Debug for Weight2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Weight2D")
            .field("shape", &self.shape())
            .field("min", &self.min())
            .field("max", &self.max())
            .finish()
    }
}

impl PartialEq for Weight2D {
    fn eq(&self, other: &Self) -> bool {
        self.grids == other.grids && self.values == other.values
    }
}

impl Weight2D {
    pub fn new(g1: Grid1D, g2: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != g1.n() * g2.n() {
            return Err(Error::ShapeMismatch {
                expected: format!("{}x{}", g1.n(), g2.n()),
                got: values.len().to_string(),
            });
        }
        check_positive(&values)?;
        Ok(Self::from_parts((g1, g2), values))
    }

    pub(crate) fn from_parts(grids: (Grid1D, Grid1D), values: Vec<f64>) -> Self {
        Self {
            grids,
            values,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn from_fn(g1: Grid1D, g2: Grid1D, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(g1.n() * g2.n());
        for t1 in g1.angles() {
            for t2 in g2.angles() {
                values.push(f(t1, t2));
            }
        }
        Self::new(g1, g2, values)
    }

    pub fn constant(g1: Grid1D, g2: Grid1D, c: f64) -> Result<Self> {
        Self::new(g1, g2, vec![c; g1.n() * g2.n()])
    }

    pub fn ones(g1: Grid1D, g2: Grid1D) -> Self {
        Self::from_parts((g1, g2), vec![1.0; g1.n() * g2.n()])
    }

    /// The product weight `a(z1) b(z2)`.
    pub fn separating(a: &Weight1D, b: &Weight1D) -> Self {
        let mut values = Vec::with_capacity(a.n() * b.n());
        for &x in a.values() {
            for &y in b.values() {
                values.push(x * y);
            }
        }
        Self::from_parts((a.grid(), b.grid()), values)
    }

    pub fn from_function(f: &TorusFn2D) -> Result<Self> {
        let im = f.max_imag();
        if im != 0.0 {
            return Err(Error::NotReal(im));
        }
        let (g1, g2) = f.grids();
        Self::new(g1, g2, f.re())
    }

    pub fn to_function(&self) -> TorusFn2D {
        TorusFn2D::from_parts(
            self.grids,
            self.values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    pub fn grids(&self) -> (Grid1D, Grid1D) {
        self.grids
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.grids.0.n(), self.grids.1.n())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn at(&self, i1: usize, i2: usize) -> f64 {
        self.values[i1 * self.grids.1.n() + i2]
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&x| x == self.values[0])
    }

    pub fn fiber_z2(&self, i1: usize) -> Weight1D {
        let n2 = self.grids.1.n();
        Weight1D::from_parts(self.grids.1, self.values[i1 * n2..(i1 + 1) * n2].to_vec())
    }

    pub fn fiber_z1(&self, i2: usize) -> Weight1D {
        let n2 = self.grids.1.n();
        Weight1D::from_parts(
            self.grids.0,
            (0..self.grids.0.n()).map(|i1| self.values[i1 * n2 + i2]).collect(),
        )
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.grids.0, self.grids.1, self.values.iter().map(|&x| f(x)).collect())
    }

    pub fn powf(&self, e: f64) -> Result<Self> {
        self.map(|x| x.powf(e))
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grids != other.grids {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", self.shape()),
                got: format!("{:?}", other.shape()),
            });
        }
        Self::new(
            self.grids.0,
            self.grids.1,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Multiplies by `a(z1)`.
    pub fn mul_z1(&self, a: &Weight1D) -> Result<Self> {
        let n2 = self.grids.1.n();
        if a.grid() != self.grids.0 {
            return Err(Error::ShapeMismatch {
                expected: self.grids.0.n().to_string(),
                got: a.n().to_string(),
            });
        }
        Self::new(
            self.grids.0,
            self.grids.1,
            self.values.iter().enumerate().map(|(i, &x)| x * a.values()[i / n2]).collect(),
        )
    }

    /// Multiplies by `b(z2)`.
    pub fn mul_z2(&self, b: &Weight1D) -> Result<Self> {
        let n2 = self.grids.1.n();
        if b.grid() != self.grids.1 {
            return Err(Error::ShapeMismatch {
                expected: n2.to_string(),
                got: b.n().to_string(),
            });
        }
        Self::new(
            self.grids.0,
            self.grids.1,
            self.values.iter().enumerate().map(|(i, &x)| x * b.values()[i % n2]).collect(),
        )
    }

    /// Two-dimensional constant of `cond` over rectangles, memoized.
    pub fn condition_constant(&self, cond: Condition, fam: &RectFamily) -> Result<f64> {
        cond.validate()?;
        if (fam.first.n(), fam.second.n()) != self.shape() {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", self.shape()),
                got: format!("({}, {})", fam.first.n(), fam.second.n()),
            });
        }
        let (tag, bits) = cond.key();
        let key = (tag, bits, fam.id());
        if let Some(&v) = self.cache.lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
            return Ok(v);
        }
        let v = match cond {
            Condition::Ap(p) => arcs::max_over(fam, &normalized(&self.values), arcs::ap_kernel(p)).max(1.0),
            Condition::A1 => arcs::max_over(fam, &normalized(&self.values), arcs::a1_kernel).max(1.0),
            Condition::ReverseHolder(d) => {
                arcs::max_over(fam, &normalized(&self.values), arcs::rh_kernel(d)).max(1.0)
            }
            Condition::BmoLog => {
                let logs: Vec<f64> = normalized(&self.values).iter().map(|x| x.ln()).collect();
                arcs::max_over(fam, &logs, arcs::bmo_kernel)
            }
        };
        self.cache
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .insert(key, v);
        Ok(v)
    }
}

impl WeightSamples for Weight2D {
    fn weight_values(&self) -> &[f64] {
        &self.values
    }
    fn weight_shape(&self) -> Shape {
        Shape::Two(self.grids.0.n(), self.grids.1.n())
    }
}

/// `max_B avg_B(w) avg_B(w^{1/(1-p)})^{p-1}`.
pub fn ap_constant(w: &Weight1D, p: f64, fam: &ArcFamily) -> Result<f64> {
    w.condition_constant(Condition::Ap(p), fam)
}

/// `max_B max_{x in B} avg_B(w) / w(x)`.
pub fn a1_constant(w: &Weight1D, fam: &ArcFamily) -> Result<f64> {
    w.condition_constant(Condition::A1, fam)
}

/// `max_B avg_B(w^{1+delta})^{1/(1+delta)} / avg_B(w)`.
pub fn reverse_holder_constant(w: &Weight1D, delta: f64, fam: &ArcFamily) -> Result<f64> {
    w.condition_constant(Condition::ReverseHolder(delta), fam)
}

/// `max_B avg_B |phi - avg_B phi|` for a real function.
pub fn bmo_norm(phi: &TorusFn1D, fam: &ArcFamily) -> Result<f64> {
    let im = phi.max_imag();
    if im != 0.0 {
        return Err(Error::NotReal(im));
    }
    bmo_norm_real(&phi.re(), fam)
}

pub fn bmo_norm_real(phi: &[f64], fam: &ArcFamily) -> Result<f64> {
    if phi.len() != fam.n() {
        return Err(Error::ShapeMismatch {
            expected: fam.n().to_string(),
            got: phi.len().to_string(),
        });
    }
    Ok(arcs::max_over(fam, phi, arcs::bmo_kernel))
}

/// Largest one-variable constant among the fibers of `w` along `var`.
pub fn uniform_fiber_constant(w: &Weight2D, var: FiberVariable, cond: Condition) -> Result<f64> {
    cond.validate()?;
    let (n1, n2) = w.shape();
    let fam = match var {
        FiberVariable::Z2 => ArcFamily::dyadic(n2),
        FiberVariable::Z1 => ArcFamily::dyadic(n1),
    };
    uniform_fiber_constant_with(w, var, cond, &fam)
}

pub fn uniform_fiber_constant_with(
    w: &Weight2D,
    var: FiberVariable,
    cond: Condition,
    fam: &ArcFamily,
) -> Result<f64> {
    cond.validate()?;
    let (n1, n2) = w.shape();
    let (count, len) = match var {
        FiberVariable::Z2 => (n1, n2),
        FiberVariable::Z1 => (n2, n1),
    };
    if fam.n() != len {
        return Err(Error::ShapeMismatch {
            expected: len.to_string(),
            got: fam.n().to_string(),
        });
    }
    Ok((0..count)
        .into_par_iter()
        .map(|i| {
            let fiber = match var {
                FiberVariable::Z2 => w.fiber_z2(i),
                FiberVariable::Z1 => w.fiber_z1(i),
            };
            measure_1d(fiber.values(), cond, fam)
        })
        .reduce(|| f64::NEG_INFINITY, f64::max))
}

/// The six weights of a couple together with the exponent they belong to.
#[derive(Debug, Clone)]
pub struct CoupleWeights {
    pub b1: Weight1D,
    pub w1: Weight2D,
    pub a1: Weight1D,
    pub b2: Weight1D,
    pub w2: Weight2D,
    pub a2: Weight1D,
}

/// Passes to the predual couple:
/// `(b1~, w1~, a1~) = (b2, w2, a2)` and `(b2~, w2~, a2~) = (b1, w1, a1)^{1-q}`.
/// Returns the transformed weights and `q = p / (p - 1)`.
pub fn dual_weights(weights: &CoupleWeights, p: f64) -> Result<(CoupleWeights, f64)> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(invalid("p", format!("need 1 < p < inf, got {p}")));
    }
    let q = p / (p - 1.0);
    let e = 1.0 - q;
    Ok((
        CoupleWeights {
            b1: weights.b2.clone(),
            w1: weights.w2.clone(),
            a1: weights.a2.clone(),
            b2: weights.b1.powf(e)?,
            w2: weights.w1.powf(e)?,
            a2: weights.a1.powf(e)?,
        },
        q,
    ))
}

/// `w = w1^{q/(q-1)} / w2^{1/(q-1)}` and `u = (w1 / w2)^{1/(q-1)}`.
pub fn single_weight_reduction(w1: &Weight2D, w2: &Weight2D, q: f64) -> Result<(Weight2D, Weight2D)> {
    if !(q > 1.0) || !q.is_finite() {
        return Err(invalid("q", format!("need 1 < q < inf, got {q}")));
    }
    let e = 1.0 / (q - 1.0);
    let w = w1.zip_with(w2, |a, b| a.powf(q * e) / b.powf(e))?;
    let u = w1.zip_with(w2, |a, b| (a / b).powf(e))?;
    Ok((w, u))
}

/// `w1 w2^{theta/(theta-1)}`, an `A_{1/(1-theta)}` candidate.
pub fn glue_weight(w1: &Weight2D, w2: &Weight2D, theta: f64) -> Result<Weight2D> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(invalid("theta", format!("need 0 < theta < 1, got {theta}")));
    }
    let e = theta / (theta - 1.0);
    w1.zip_with(w2, |a, b| a * b.powf(e))
}

/// Exponent paired with [`glue_weight`]: `1 / (1 - theta)`.
pub fn glue_exponent(theta: f64) -> f64 {
    1.0 / (1.0 - theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize) -> Grid1D {
        Grid1D::new(n).unwrap()
    }

    #[test]
    fn constant_weights_give_unit_constants() {
        let fam = ArcFamily::dyadic(64);
        for c in [1.0, 3.7, 1e-3] {
            let w = Weight1D::constant(g(64), c).unwrap();
            assert_eq!(ap_constant(&w, 2.0, &fam).unwrap(), 1.0);
            assert_eq!(ap_constant(&w, 1.3, &fam).unwrap(), 1.0);
            assert_eq!(a1_constant(&w, &fam).unwrap(), 1.0);
            assert_eq!(reverse_holder_constant(&w, 1.0, &fam).unwrap(), 1.0);
            assert_eq!(w.condition_constant(Condition::BmoLog, &fam).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Weight1D::new(g(8), vec![1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]).is_err());
        assert!(Weight1D::new(g(8), vec![1.0; 7]).is_err());
        let w = Weight1D::ones(g(8));
        assert!(ap_constant(&w, 1.0, &ArcFamily::dyadic(8)).is_err());
        assert!(reverse_holder_constant(&w, 0.0, &ArcFamily::dyadic(8)).is_err());
        assert!(ap_constant(&w, 2.0, &ArcFamily::dyadic(16)).is_err());
    }

    #[test]
    fn single_spike_a1() {
        let mut v = vec![1.0; 32];
        v[5] = 0.5;
        let w = Weight1D::new(g(32), v).unwrap();
        let fam = ArcFamily::dyadic(32);
        // the whole circle has the largest average: 31.5 / 32 over a minimum of 0.5
        assert!((a1_constant(&w, &fam).unwrap() - 1.96875).abs() < 1e-14);
    }

    #[test]
    fn cache_returns_same_value() {
        let w = Weight1D::from_fn(g(64), |t| 2.0 + t.sin()).unwrap();
        let fam = ArcFamily::dyadic(64);
        let a = ap_constant(&w, 2.0, &fam).unwrap();
        let b = ap_constant(&w, 2.0, &fam).unwrap();
        assert_eq!(a, b);
        let clone = w.clone();
        assert_eq!(ap_constant(&clone, 2.0, &fam).unwrap(), a);
    }

    #[test]
    fn separating_fibers_match_factor() {
        let a = Weight1D::from_fn(g(16), |t| 1.5 + t.cos()).unwrap();
        let b = Weight1D::from_fn(g(32), |t| (0.7 * t.sin()).exp()).unwrap();
        let w = Weight2D::separating(&a, &b);
        let fam = ArcFamily::dyadic(32);
        let direct = ap_constant(&b, 2.0, &fam).unwrap();
        let fiber = uniform_fiber_constant(&w, FiberVariable::Z2, Condition::Ap(2.0)).unwrap();
        assert!((direct - fiber).abs() < 1e-12 * direct);
    }

    #[test]
    fn transforms_on_constants() {
        let (g1, g2) = (g(8), g(8));
        let one1 = Weight1D::ones(g1);
        let four = Weight2D::constant(g1, g2, 4.0).unwrap();
        let cw = CoupleWeights {
            b1: one1.clone(),
            w1: four,
            a1: one1.clone(),
            b2: one1.clone(),
            w2: Weight2D::ones(g1, g2),
            a2: one1,
        };
        let (d, q) = dual_weights(&cw, 2.0).unwrap();
        assert_eq!(q, 2.0);
        assert!(d.w2.values().iter().all(|&x| (x - 0.25).abs() < 1e-15));
        assert!(d.w1.values().iter().all(|&x| x == 1.0));

        let v = Weight2D::from_fn(g1, g2, |a, b| 2.0 + (a + b).cos()).unwrap();
        let (w, u) = single_weight_reduction(&v, &v, 3.0).unwrap();
        assert!(w.values().iter().zip(v.values()).all(|(a, b)| (a - b).abs() < 1e-13 * b));
        assert!(u.values().iter().all(|&x| x == 1.0));

        let half = glue_weight(&v, &v.powf(0.5).unwrap(), 0.5).unwrap();
        assert!(half.values().iter().zip(v.values()).all(|(a, b)| (a - b.sqrt()).abs() < 1e-13));
        assert!(glue_weight(&v, &v, 1.0).is_err());
        assert_eq!(glue_exponent(0.5), 2.0);
    }
}
