//! Dyadic Calderón–Zygmund decomposition relative to a weighted measure `w dμ`.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::spectral::{framed_co_riesz, Frame};
use crate::torus::TorusFn1D;
use crate::weights::{Arc, Weight1D};

/// Measured constants of one decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CzConstants {
    /// `max w(parent) / w(child)` over one dyadic generation.
    pub doubling: f64,
    /// `max |g0| / λ`, ignoring a stop at the whole circle.
    pub good_bound: f64,
    /// `∫|g0| w / ∫|f| w`.
    pub good_l1: f64,
    /// `∫|g1| w / ∫|f| w`.
    pub bad_l1: f64,
    /// `λ w(Ω) / ∫|f| w`; at most one by the stopping rule.
    pub omega_measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CzResult {
    pub g0: TorusFn1D,
    pub g1: TorusFn1D,
    /// Maximal stopped dyadic arcs, pairwise disjoint, in increasing start order.
    pub omega: Vec<Arc>,
    pub lambda: f64,
    /// Normalized `∫|f| w`.
    pub mass: f64,
    /// Whether the whole circle was stopped.
    pub top: bool,
    pub constants: CzConstants,
}

impl CzResult {
    pub fn omega_mask(&self) -> Vec<bool> {
        let n = self.g0.n();
        let mut mask = vec![false; n];
        for a in &self.omega {
            for i in a.start..a.start + a.len {
                mask[i % n] = true;
            }
        }
        mask
    }
}

struct Prefix {
    fw: Vec<f64>,
    w: Vec<f64>,
}

impl Prefix {
    fn new(f: &TorusFn1D, w: &Weight1D) -> Self {
        let mut fw = vec![0.0];
        let mut ws = vec![0.0];
        for (v, wt) in f.values().iter().zip(w.values()) {
            fw.push(fw.last().unwrap() + v.norm() * wt);
            ws.push(ws.last().unwrap() + wt);
        }
        Self { fw, w: ws }
    }

    fn mass(&self, a: Arc) -> f64 {
        self.fw[a.start + a.len] - self.fw[a.start]
    }

    fn weight(&self, a: Arc) -> f64 {
        self.w[a.start + a.len] - self.w[a.start]
    }

    fn average(&self, a: Arc) -> f64 {
        self.mass(a) / self.weight(a)
    }
}

fn stop(p: &Prefix, arc: Arc, lambda: f64, out: &mut Vec<Arc>) {
    if p.average(arc) > lambda {
        out.push(arc);
        return;
    }
    if arc.len == 1 {
        return;
    }
    let half = arc.len / 2;
    stop(p, Arc { start: arc.start, len: half }, lambda, out);
    stop(p, Arc { start: arc.start + half, len: half }, lambda, out);
}

/// Doubling constant of `w dμ` over aligned dyadic arcs.
pub fn doubling_constant(w: &Weight1D) -> f64 {
    let mut d = 1.0f64;
    let mut level: Vec<f64> = w.values().to_vec();
    while level.len() > 1 {
        let parents: Vec<f64> = level.chunks(2).map(|c| c[0] + c[1]).collect();
        for (i, c) in level.iter().enumerate() {
            d = d.max(parents[i / 2] / c);
        }
        level = parents;
    }
    d
}

/// Weighted dyadic decomposition of `f` at level `λ` (`λ = ∞` stops nothing).
pub fn cz_decompose(f: &TorusFn1D, w: &Weight1D, lambda: f64) -> Result<CzResult> {
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("level must be positive, got {lambda}")));
    }
    if f.grid() != w.grid() {
        return Err(Error::ShapeMismatch {
            expected: f.n().to_string(),
            got: w.n().to_string(),
        });
    }
    let n = f.n();
    let p = Prefix::new(f, w);
    let whole = Arc { start: 0, len: n };
    let mut omega = Vec::new();
    stop(&p, whole, lambda, &mut omega);
    let top = omega.first() == Some(&whole);

    let wv = w.values();
    let mut g0: Vec<Complex64> = f.values().to_vec();
    for a in &omega {
        let range = a.start..a.start + a.len;
        let num: Complex64 = f.values()[range.clone()].iter().zip(&wv[range.clone()]).map(|(v, wt)| v * wt).sum();
        let avg = num / p.weight(*a);
        g0[range].fill(avg);
    }
    let g1: Vec<Complex64> = f.values().iter().zip(&g0).map(|(a, b)| a - b).collect();

    let total = p.mass(whole);
    let mass = total / n as f64;
    let ratio = |xs: &[Complex64]| -> f64 {
        if total == 0.0 {
            0.0
        } else {
            xs.iter().zip(wv).map(|(v, wt)| v.norm() * wt).sum::<f64>() / total
        }
    };
    let omega_w: f64 = omega.iter().map(|a| p.weight(*a)).sum();
    let good_bound = if top || lambda.is_infinite() {
        0.0
    } else {
        g0.iter().fold(0.0f64, |m, v| m.max(v.norm())) / lambda
    };
    let constants = CzConstants {
        doubling: doubling_constant(w),
        good_bound,
        good_l1: ratio(&g0),
        bad_l1: ratio(&g1),
        omega_measure: if total == 0.0 { 0.0 } else { lambda * omega_w / total },
    };
    Ok(CzResult {
        g0: TorusFn1D::from_parts(f.grid(), g0),
        g1: TorusFn1D::from_parts(f.grid(), g1),
        omega,
        lambda,
        mass,
        top,
        constants,
    })
}

/// `∫_{T∖Ω} |u⁻¹(I − R)(u g1)| w / ∫|f| w` for the decomposition `res`.
pub fn cz_tail_check(res: &CzResult, u: &Frame, w: &Weight1D) -> Result<f64> {
    if res.g1.is_zero() || res.mass == 0.0 {
        return Ok(0.0);
    }
    let q = framed_co_riesz(&res.g1, u)?;
    let mask = res.omega_mask();
    let n = w.n() as f64;
    let tail: f64 = q
        .values()
        .iter()
        .zip(w.values())
        .zip(mask)
        .filter(|(_, inside)| !inside)
        .map(|((v, wt), _)| v.norm() * wt)
        .sum::<f64>()
        / n;
    Ok(tail / res.mass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::Grid1D;

    fn fixture(n: usize) -> (TorusFn1D, Weight1D) {
        let g = Grid1D::new(n).unwrap();
        let f = TorusFn1D::from_fn(g, |t| Complex64::new((3.0 * t).cos() * 4.0, t.sin()) * (t.sin() * 2.0).exp()).unwrap();
        let w = Weight1D::from_fn(g, |t| 1.5 + t.cos()).unwrap();
        (f, w)
    }

    #[test]
    fn nothing_stopped_above_max() {
        let (f, w) = fixture(64);
        let r = cz_decompose(&f, &w, f64::INFINITY).unwrap();
        assert!(r.omega.is_empty());
        assert!(r.g1.is_zero());
        assert_eq!(r.g0, f);
        let big = f.max_abs() * 1.01;
        assert!(cz_decompose(&f, &w, big).unwrap().omega.is_empty());
    }

    #[test]
    fn top_stop_gives_global_average() {
        let (f, w) = fixture(64);
        let r = cz_decompose(&f, &w, 1e-6).unwrap();
        assert!(r.top);
        assert_eq!(r.omega.len(), 1);
        let first = r.g0.values()[0];
        assert!(r.g0.values().iter().all(|v| *v == first));
        let weighted: Complex64 = r.g1.values().iter().zip(w.values()).map(|(v, wt)| v * wt).sum();
        assert!(weighted.norm() < 1e-10 * f.max_abs() * 64.0);
    }

    #[test]
    fn rejects_bad_level() {
        let (f, w) = fixture(16);
        assert!(cz_decompose(&f, &w, 0.0).is_err());
        assert!(cz_decompose(&f, &w, f64::NAN).is_err());
    }

    #[test]
    fn stopping_set_is_monotone() {
        let (f, w) = fixture(128);
        let lo = cz_decompose(&f, &w, 2.0).unwrap().omega_mask();
        let hi = cz_decompose(&f, &w, 3.0).unwrap().omega_mask();
        assert!(hi.iter().zip(&lo).all(|(h, l)| !h || *l));
    }

    #[test]
    fn doubling_of_constant_is_two() {
        let w = Weight1D::ones(Grid1D::new(32).unwrap());
        assert_eq!(doubling_constant(&w), 2.0);
    }

    #[test]
    fn tail_vanishes_without_bad_part() {
        let (f, w) = fixture(32);
        let r = cz_decompose(&f, &w, f64::INFINITY).unwrap();
        let u = Frame::from_weight(&w);
        assert_eq!(cz_tail_check(&r, &u, &w).unwrap(), 0.0);
    }
}
