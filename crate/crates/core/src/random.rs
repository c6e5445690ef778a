//! Seeded generators for test instances: trigonometric polynomials, positive weights and
//! decompositions `f = g + h` with prescribed norms.
//!
//! Coefficients are always drawn in the same `(m, k)` order, independent of the grid size,
//! so the same seed describes the same function on every sufficiently fine grid.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::oracle::FreqSet;
use crate::torus::{norm_unchecked, Grid1D, Spectrum1D, Spectrum2D, TorusFn1D, TorusFn2D};
use crate::weights::{Weight1D, Weight2D};

/// Independent deterministic stream for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn normal_c(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// `sum c_m z^m` over `|m| <= degree` (or `0 <= m <= degree` when `analytic`), with
/// Gaussian coefficients damped by `1 / (1 + |m|)`.
pub fn trig_poly_1d(rng: &mut impl Rng, grid: Grid1D, degree: u32, analytic: bool) -> TorusFn1D {
    let d = degree as i64;
    let mut s = Spectrum1D::zeros(grid);
    for m in -d..=d {
        let c = normal_c(rng) / (1.0 + m.abs() as f64);
        if analytic && m < 0 {
            continue;
        }
        if grid.index(m).is_some() {
            s.set(m, c).expect("index checked");
        }
    }
    TorusFn1D::from_spectrum(s).expect("finite coefficients")
}

/// Two-variable analogue of [`trig_poly_1d`], restricted to `set` when given.
pub fn trig_poly_2d(rng: &mut impl Rng, g1: Grid1D, g2: Grid1D, degree: u32, set: Option<FreqSet>) -> TorusFn2D {
    let d = degree as i64;
    let mut s = Spectrum2D::zeros(g1, g2);
    for m in -d..=d {
        for k in -d..=d {
            let c = normal_c(rng) / (1.0 + (m.abs() + k.abs()) as f64);
            if set.is_some_and(|fs| !fs.contains(m, k)) {
                continue;
            }
            if g1.index(m).is_some() && g2.index(k).is_some() {
                s.set(m, k, c).expect("index checked");
            }
        }
    }
    TorusFn2D::from_spectrum(s).expect("finite coefficients")
}

/// `exp(amp * p)` with `p` a real trigonometric polynomial of the given degree, normalized
/// so that `max |p| = 1`.
pub fn weight_1d(rng: &mut impl Rng, grid: Grid1D, degree: u32, amp: f64) -> Weight1D {
    let p = trig_poly_1d(rng, grid, degree, false);
    let re = p.re();
    let scale = re.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    Weight1D::from_parts(grid, re.iter().map(|x| (amp * x / scale).exp()).collect())
}

pub fn weight_2d(rng: &mut impl Rng, g1: Grid1D, g2: Grid1D, degree: u32, amp: f64) -> Weight2D {
    let p = trig_poly_2d(rng, g1, g2, degree, None);
    let re = p.re();
    let scale = re.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    Weight2D::from_parts((g1, g2), re.iter().map(|x| (amp * x / scale).exp()).collect())
}

/// A decomposition `f = g + h` with `f` in `Y1 + Y2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub f: TorusFn2D,
    pub g: TorusFn2D,
    pub h: TorusFn2D,
}

/// Norms and subspaces an [`Instance`] is drawn for.
#[derive(Debug, Clone, Copy)]
pub struct InstanceSpec<'a> {
    pub y1: FreqSet,
    pub y2: FreqSet,
    pub w1: &'a Weight2D,
    pub w2: &'a Weight2D,
    pub r: f64,
    pub p: f64,
    pub degree: u32,
}

fn scale_to_unit(base: &TorusFn2D, shift: &TorusFn2D, w: &[f64], s: f64) -> f64 {
    let norm = |a: f64| {
        let v: Vec<Complex64> = base.values().iter().zip(shift.values()).map(|(x, y)| a * x + y).collect();
        norm_unchecked(&v, w, s)
    };
    let mut hi = 1.0;
    while norm(hi) < 1.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if norm(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Draws `g = α G + D`, `h = β H - D` with `G ∈ Y1`, `H ∈ Y2` and a free perturbation `D`,
/// where `α, β` are chosen so that `‖g‖_{L^r(w1)} = ‖h‖_{L^p(w2)} = 1`.
pub fn random_instance(rng: &mut impl Rng, g1: Grid1D, g2: Grid1D, spec: &InstanceSpec<'_>) -> Result<Instance> {
    if spec.w1.shape() != (g1.n(), g2.n()) || spec.w2.shape() != (g1.n(), g2.n()) {
        return Err(invalid("weights", "shape does not match the grids"));
    }
    let gg = trig_poly_2d(rng, g1, g2, spec.degree, Some(spec.y1));
    let hh = trig_poly_2d(rng, g1, g2, spec.degree, Some(spec.y2));
    let dd = trig_poly_2d(rng, g1, g2, spec.degree, None);
    if gg.is_zero() || hh.is_zero() {
        return Err(invalid("subspaces", "no admissible frequency within the requested degree"));
    }
    let (w1, w2) = (spec.w1.values(), spec.w2.values());
    let d1 = norm_unchecked(dd.values(), w1, spec.r);
    let d2 = norm_unchecked(dd.values(), w2, spec.p);
    let shrink = 0.5 / d1.max(d2).max(f64::MIN_POSITIVE);
    let d = dd.scale(Complex64::new(shrink, 0.0));
    let alpha = scale_to_unit(&gg, &d, w1, spec.r);
    let minus_d = d.scale(Complex64::new(-1.0, 0.0));
    let beta = scale_to_unit(&hh, &minus_d, w2, spec.p);
    let g = &gg.scale(Complex64::new(alpha, 0.0)) + &d;
    let h = &hh.scale(Complex64::new(beta, 0.0)) - &d;
    let f = &gg.scale(Complex64::new(alpha, 0.0)) + &hh.scale(Complex64::new(beta, 0.0));
    Ok(Instance { f, g, h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{cone_leakage, SpectralCone};

    #[test]
    fn same_seed_same_function_across_grids() {
        let a = trig_poly_1d(&mut trial_rng(7, 3), Grid1D::new(32).unwrap(), 6, false);
        let b = trig_poly_1d(&mut trial_rng(7, 3), Grid1D::new(64).unwrap(), 6, false);
        for m in -6..=6 {
            assert_eq!(a.spectrum().get(m), b.spectrum().get(m));
        }
        let c = trig_poly_1d(&mut trial_rng(7, 4), Grid1D::new(32).unwrap(), 6, false);
        assert_ne!(a, c);
    }

    #[test]
    fn instance_has_unit_norms_and_lies_in_sum() {
        let g = Grid1D::new(16).unwrap();
        let w1 = weight_2d(&mut trial_rng(1, 0), g, g, 3, 0.5);
        let w2 = Weight2D::ones(g, g);
        let spec = InstanceSpec {
            y1: FreqSet::from(SpectralCone::QUADRANT),
            y2: FreqSet::from(SpectralCone::UNION),
            w1: &w1,
            w2: &w2,
            r: 1.0,
            p: 2.0,
            degree: 4,
        };
        let inst = random_instance(&mut trial_rng(2, 0), g, g, &spec).unwrap();
        assert!((norm_unchecked(inst.g.values(), w1.values(), 1.0) - 1.0).abs() < 1e-12);
        assert!((norm_unchecked(inst.h.values(), w2.values(), 2.0) - 1.0).abs() < 1e-12);
        assert!((&inst.g + &inst.h).max_diff(&inst.f) < 1e-12);
        assert!(cone_leakage(inst.f.spectrum(), SpectralCone::UNION) < 1e-14);
    }
}
