use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Uniform grid on the unit circle with `n` points at angles `2 pi k / n`.
///
/// Every point carries quadrature weight `1/n`, so the circle has total mass one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid1D {
    n: usize,
}

impl Grid1D {
    pub const MIN_SIZE: usize = 8;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_SIZE || !n.is_power_of_two() {
            return Err(Error::BadGridSize(n));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn angle(&self, k: usize) -> f64 {
        TAU * k as f64 / self.n as f64
    }

    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|k| self.angle(k))
    }

    /// Lowest frequency in the band, `-n/2`.
    #[inline]
    pub fn min_freq(&self) -> i64 {
        -((self.n / 2) as i64)
    }

    /// Highest frequency in the band, `n/2 - 1`.
    #[inline]
    pub fn max_freq(&self) -> i64 {
        (self.n / 2) as i64 - 1
    }

    /// Frequency stored at slot `idx` of an FFT-ordered coefficient array.
    #[inline]
    pub fn freq(&self, idx: usize) -> i64 {
        if idx < self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// Slot of frequency `m`, or `None` when `m` is outside the band.
    #[inline]
    pub fn index(&self, m: i64) -> Option<usize> {
        if m < self.min_freq() || m > self.max_freq() {
            None
        } else if m >= 0 {
            Some(m as usize)
        } else {
            Some((m + self.n as i64) as usize)
        }
    }

    /// Grid with twice as many points.
    pub fn refined(&self) -> Self {
        Self { n: self.n * 2 }
    }
}
