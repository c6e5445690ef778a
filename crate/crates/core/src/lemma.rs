//! Comparison of the boundary norm of an analytic function with the supremum of the norms of
//! its Poisson smoothings, both in weighted `L^r` with `r` possibly below one.

use crate::error::{invalid, Result};
use crate::random::{trial_rng, trig_poly_1d};
use crate::spectral::analytic_leakage;
use crate::torus::{norm_unchecked, poisson_convolve, TorusFn1D};
use crate::weights::Weight1D;

/// Leakage above which a function is not treated as analytic.
pub const ANALYTIC_TOL: f64 = 1e-8;

/// `ρ = 0` followed by `1 - 2^-k` for `k = 1..=12`.
pub fn default_rhos() -> Vec<f64> {
    std::iter::once(0.0).chain((1..=12).map(|k| 1.0 - 0.5f64.powi(k))).collect()
}

/// `(‖f‖, sup_ρ ‖P_ρ f‖)` in `L^r(w / mean w)`.
pub fn re_hardy_norm(f: &TorusFn1D, w: &Weight1D, r: f64, rhos: &[f64]) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(invalid("r", format!("must be positive, got {r}")));
    }
    if f.grid() != w.grid() {
        return Err(invalid("w", "grid differs from the function's"));
    }
    let leak = analytic_leakage(f);
    if leak > ANALYTIC_TOL {
        return Err(invalid("f", format!("not analytic (leakage {leak:e})")));
    }
    let mean = w.values().iter().sum::<f64>() / w.n() as f64;
    let wn: Vec<f64> = w.values().iter().map(|x| x / mean).collect();
    let boundary = norm_unchecked(f.values(), &wn, r);
    let mut sup = 0.0f64;
    for &rho in rhos {
        let smooth = poisson_convolve(f, rho)?;
        sup = sup.max(norm_unchecked(smooth.values(), &wn, r));
    }
    Ok((boundary, sup))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaRow {
    pub trial: usize,
    pub boundary: f64,
    pub smoothed_sup: f64,
    pub ratio: f64,
}

impl LemmaRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            self.trial.to_string(),
            self.boundary.to_string(),
            self.smoothed_sup.to_string(),
            self.ratio.to_string(),
        ]
    }
}

pub const LEMMA_HEADER: [&str; 4] = ["trial", "boundary", "smoothed_sup", "ratio"];

/// Ratios `sup_ρ ‖P_ρ f‖ / ‖f‖` for `trials` random analytic polynomials of the given degree.
pub fn verify_lemma(w: &Weight1D, r: f64, trials: usize, degree: u32, rhos: &[f64], seed: u64) -> Result<Vec<LemmaRow>> {
    if trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    (0..trials)
        .map(|trial| {
            let f = trig_poly_1d(&mut trial_rng(seed, trial as u64), w.grid(), degree, true);
            let (boundary, smoothed_sup) = re_hardy_norm(&f, w, r, rhos)?;
            Ok(LemmaRow {
                trial,
                boundary,
                smoothed_sup,
                ratio: smoothed_sup / boundary,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::Grid1D;
    use num_complex::Complex64;

    #[test]
    fn constant_function_gives_one() {
        let g = Grid1D::new(64).unwrap();
        let w = Weight1D::from_fn(g, |t| 2.0 + t.cos()).unwrap();
        let f = TorusFn1D::constant(g, Complex64::new(1.0, 0.0));
        let (b, s) = re_hardy_norm(&f, &w, 0.5, &default_rhos()).unwrap();
        assert!((b - 1.0).abs() < 1e-12 && (s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn monomial_is_scaled_by_rho() {
        let g = Grid1D::new(64).unwrap();
        let w = Weight1D::ones(g);
        let f = TorusFn1D::monomial(g, 1);
        let (b, s) = re_hardy_norm(&f, &w, 2.0, &[0.5]).unwrap();
        assert!((s - 0.5 * b).abs() < 1e-12);
        let (_, s) = re_hardy_norm(&f, &w, 2.0, &default_rhos()).unwrap();
        assert!(s <= b + 1e-12);
    }

    #[test]
    fn rejects_non_analytic() {
        let g = Grid1D::new(16).unwrap();
        let f = TorusFn1D::monomial(g, -2);
        assert!(re_hardy_norm(&f, &Weight1D::ones(g), 1.0, &[0.5]).is_err());
        assert!(re_hardy_norm(&TorusFn1D::monomial(g, 2), &Weight1D::ones(g), 0.0, &[0.5]).is_err());
    }

    #[test]
    fn rows_are_reproducible() {
        let g = Grid1D::new(128).unwrap();
        let w = Weight1D::from_fn(g, |t| (1.0 - t.cos()).max(1e-3).powf(0.3)).unwrap();
        let a = verify_lemma(&w, 0.5, 5, 6, &default_rhos(), 3).unwrap();
        let b = verify_lemma(&w, 0.5, 5, 6, &default_rhos(), 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
    }
}
