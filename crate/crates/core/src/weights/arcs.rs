use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rayon::prelude::*;

use crate::error::{invalid, Result};

/// Contiguous run of grid indices `start, start + 1, ..., start + len - 1` taken mod `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Arc {
    pub start: usize,
    pub len: usize,
}

/// A finite family of arcs on an `n`-point grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcFamily {
    n: usize,
    arcs: Vec<Arc>,
    id: u64,
}

impl ArcFamily {
    pub const DEFAULT_MIN_LEN: usize = 4;

    /// All dyadic arcs of lengths `n, n/2, ..., 4`, aligned and shifted by half their length.
    pub fn dyadic(n: usize) -> Self {
        Self::dyadic_with_min(n, Self::DEFAULT_MIN_LEN)
    }

    /// Dyadic plus half-shifted arcs down to length `min_len` (rounded to a power of two).
    pub fn dyadic_with_min(n: usize, min_len: usize) -> Self {
        let min_len = min_len.max(1).next_power_of_two().min(n);
        let mut arcs = Vec::new();
        let mut len = n;
        while len >= min_len {
            for j in 0..n / len {
                arcs.push(Arc { start: j * len, len });
            }
            if len < n && len >= 2 {
                for j in 0..n / len {
                    arcs.push(Arc {
                        start: j * len + len / 2,
                        len,
                    });
                }
            }
            len /= 2;
        }
        Self::build(n, arcs)
    }

    pub fn from_arcs(n: usize, arcs: Vec<Arc>) -> Result<Self> {
        if arcs.is_empty() {
            return Err(invalid("arcs", "family must contain at least one arc"));
        }
        if let Some(a) = arcs.iter().find(|a| a.len == 0 || a.len > n || a.start >= n) {
            return Err(invalid("arcs", format!("arc {a:?} does not fit a grid of {n} points")));
        }
        Ok(Self::build(n, arcs))
    }

    fn build(n: usize, arcs: Vec<Arc>) -> Self {
        let mut h = DefaultHasher::new();
        n.hash(&mut h);
        arcs.hash(&mut h);
        Self {
            n,
            arcs,
            id: h.finish(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub(crate) fn id(&self) -> u64 {
        self.id
    }

    /// Grid indices covered by `arc`.
    pub fn indices(&self, arc: Arc) -> impl Iterator<Item = usize> + '_ {
        let n = self.n;
        (arc.start..arc.start + arc.len).map(move |i| i % n)
    }
}

/// Rectangles `B1 x B2` with `B1` from `first` and `B2` from `second`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RectFamily {
    pub first: ArcFamily,
    pub second: ArcFamily,
}

impl RectFamily {
    pub fn dyadic(n1: usize, n2: usize) -> Self {
        Self {
            first: ArcFamily::dyadic(n1),
            second: ArcFamily::dyadic(n2),
        }
    }

    pub fn len(&self) -> usize {
        self.first.len() * self.second.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub(crate) fn id(&self) -> u64 {
        self.first.id().rotate_left(17) ^ self.second.id()
    }
}

/// Measure-theoretic description of a region: a list of flat indices.
pub(crate) trait Regions: Sync {
    fn count(&self) -> usize;
    fn region(&self, i: usize, out: &mut Vec<usize>);
}

impl Regions for ArcFamily {
    fn count(&self) -> usize {
        self.arcs.len()
    }
    fn region(&self, i: usize, out: &mut Vec<usize>) {
        out.clear();
        out.extend(self.indices(self.arcs[i]));
    }
}

impl Regions for RectFamily {
    fn count(&self) -> usize {
        self.len()
    }
    fn region(&self, i: usize, out: &mut Vec<usize>) {
        out.clear();
        let n2 = self.second.n();
        let a = self.first.arcs()[i / self.second.len()];
        let b = self.second.arcs()[i % self.second.len()];
        for i1 in self.first.indices(a) {
            for i2 in self.second.indices(b) {
                out.push(i1 * n2 + i2);
            }
        }
    }
}

/// Maximum over the family of `f(region values)`; evaluated in parallel, exact max.
pub(crate) fn max_over<R: Regions>(fam: &R, values: &[f64], f: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
    (0..fam.count())
        .into_par_iter()
        .map_init(
            || (Vec::new(), Vec::new()),
            |(idx, buf): &mut (Vec<usize>, Vec<f64>), i| {
                fam.region(i, idx);
                buf.clear();
                buf.extend(idx.iter().map(|&j| values[j]));
                f(buf)
            },
        )
        .reduce(|| f64::NEG_INFINITY, f64::max)
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub(crate) fn ap_kernel(p: f64) -> impl Fn(&[f64]) -> f64 + Sync {
    let e = 1.0 / (1.0 - p);
    move |w: &[f64]| {
        let a = mean(w);
        let b: f64 = w.iter().map(|x| x.powf(e)).sum::<f64>() / w.len() as f64;
        a * b.powf(p - 1.0)
    }
}

pub(crate) fn a1_kernel(w: &[f64]) -> f64 {
    let min = w.iter().copied().fold(f64::INFINITY, f64::min);
    mean(w) / min
}

pub(crate) fn rh_kernel(delta: f64) -> impl Fn(&[f64]) -> f64 + Sync {
    move |w: &[f64]| {
        let hi = (w.iter().map(|x| x.powf(1.0 + delta)).sum::<f64>() / w.len() as f64)
            .powf(1.0 / (1.0 + delta));
        hi / mean(w)
    }
}

pub(crate) fn bmo_kernel(phi: &[f64]) -> f64 {
    let m = mean(phi);
    phi.iter().map(|x| (x - m).abs()).sum::<f64>() / phi.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_family_layout() {
        let fam = ArcFamily::dyadic(16);
        // lengths 16 (1), 8 (2 + 2), 4 (4 + 4)
        assert_eq!(fam.len(), 1 + 4 + 8);
        assert!(fam.arcs().contains(&Arc { start: 14, len: 4 }));
        let wrapped: Vec<usize> = fam.indices(Arc { start: 14, len: 4 }).collect();
        assert_eq!(wrapped, vec![14, 15, 0, 1]);
        let fine = ArcFamily::dyadic_with_min(16, 1);
        assert_eq!(fine.len(), 1 + 4 + 8 + 16 + 16);
    }

    #[test]
    fn from_arcs_validates() {
        assert!(ArcFamily::from_arcs(8, vec![]).is_err());
        assert!(ArcFamily::from_arcs(8, vec![Arc { start: 0, len: 0 }]).is_err());
        assert!(ArcFamily::from_arcs(8, vec![Arc { start: 0, len: 9 }]).is_err());
        assert!(ArcFamily::from_arcs(8, vec![Arc { start: 7, len: 3 }]).is_ok());
    }

    #[test]
    fn rect_regions_are_products() {
        let fam = RectFamily::dyadic(8, 16);
        let mut out = Vec::new();
        let total: usize = (0..fam.count())
            .map(|i| {
                fam.region(i, &mut out);
                out.len()
            })
            .sum();
        let s1: usize = fam.first.arcs().iter().map(|a| a.len).sum();
        let s2: usize = fam.second.arcs().iter().map(|a| a.len).sum();
        assert_eq!(total, s1 * s2);
    }
}
