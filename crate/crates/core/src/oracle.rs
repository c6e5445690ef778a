//! Brute-force estimator of splitting constants.
//!
//! Given `f = g + h`, the solver searches `g' ∈ Y1` with `h' = f - g' ∈ Y2` minimizing
//! `max(‖g'‖_{X1} / ‖g‖_{X1}, ‖h'‖_{X2} / ‖h‖_{X2})`. The unknowns are the spectral
//! coefficients of `u g'` on `Y1 ∩ Y2`; everything else is forced by the constraints.
//! The norms are smoothed (and `L^∞` replaced by a large finite power) and minimized by an
//! accelerated projected gradient method under a continuation schedule. Every iterate is
//! scored with the exact norms and the best one is returned.

use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::random::{random_instance, trial_rng, InstanceSpec};
use crate::report::write_csv;
use crate::spectral::{Frame, SpectralCone};
use crate::torus::fft::{forward_2d, inverse_2d};
use crate::torus::{norm_unchecked, Grid1D, Sampled, Shape, TorusFn1D, TorusFn2D};
use crate::weights::{Weight1D, Weight2D, WeightSpec};

/// A spectral cone, optionally cut down to `|m| <= bm`, `|k| <= bk`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FreqSet {
    pub cone: SpectralCone,
    pub band: Option<(u32, u32)>,
}

impl FreqSet {
    pub fn banded(cone: SpectralCone, bm: u32, bk: u32) -> Self {
        Self {
            cone,
            band: Some((bm, bk)),
        }
    }

    pub fn contains(&self, m: i64, k: i64) -> bool {
        let in_band = match self.band {
            Some((bm, bk)) => m.unsigned_abs() <= bm as u64 && k.unsigned_abs() <= bk as u64,
            None => true,
        };
        in_band && self.cone.contains(m, k)
    }
}

impl From<SpectralCone> for FreqSet {
    fn from(cone: SpectralCone) -> Self {
        Self { cone, band: None }
    }
}

impl fmt::Display for FreqSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.band {
            Some((a, b)) => write!(f, "{}[{a},{b}]", self.cone),
            None => write!(f, "{}", self.cone),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub max_iter: usize,
    pub tol: f64,
    /// Extra randomized starts for the nonconvex solver.
    pub starts: usize,
    pub seed: u64,
    /// Power standing in for `∞` in the smoothed objective.
    pub surrogate_power: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iter: 4000,
            tol: 1e-10,
            starts: 4,
            seed: 0,
            surrogate_power: 64.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleProblem {
    pub f: TorusFn2D,
    pub g: TorusFn2D,
    pub h: TorusFn2D,
    pub y1: FreqSet,
    pub y2: FreqSet,
    /// Membership of `g'` in `Y1` means membership of `u g'`; `None` is `u ≡ 1`.
    pub frame: Option<Frame>,
    pub w1: Weight2D,
    pub w2: Weight2D,
    pub r: f64,
    pub p: f64,
    pub settings: SolverSettings,
}

impl OracleProblem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        f: TorusFn2D,
        g: TorusFn2D,
        h: TorusFn2D,
        y1: impl Into<FreqSet>,
        y2: impl Into<FreqSet>,
        w1: Weight2D,
        w2: Weight2D,
        r: f64,
        p: f64,
    ) -> Result<Self> {
        let shape = f.shape();
        for (name, s) in [("g", g.shape()), ("h", h.shape()), ("w1", w1.shape()), ("w2", w2.shape())] {
            if s != shape {
                return Err(Error::ShapeMismatch {
                    expected: format!("{shape:?}"),
                    got: format!("{name}: {s:?}"),
                });
            }
        }
        check_sum(f.values(), g.values(), h.values())?;
        Ok(Self {
            f,
            g,
            h,
            y1: y1.into(),
            y2: y2.into(),
            frame: None,
            w1,
            w2,
            r,
            p,
            settings: SolverSettings::default(),
        })
    }

    pub fn with_frame(mut self, u: Frame) -> Self {
        self.frame = Some(u);
        self
    }

    pub fn with_settings(mut self, s: SolverSettings) -> Self {
        self.settings = s;
        self
    }
}

fn check_sum(f: &[Complex64], g: &[Complex64], h: &[Complex64]) -> Result<()> {
    let scale = f
        .iter()
        .chain(g)
        .chain(h)
        .fold(0.0f64, |m, v| m.max(v.norm()))
        .max(f64::MIN_POSITIVE);
    let err = f
        .iter()
        .zip(g.iter().zip(h))
        .fold(0.0f64, |m, (a, (b, c))| m.max((a - b - c).norm()));
    if err > 1e-10 * scale {
        return Err(invalid("f", format!("f differs from g + h by {err:e}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    /// One of `g`, `h` vanishes and the answer is forced.
    Forced,
    /// Same norm on both sides and `Y1 = Y2`: `g' = f ‖g‖ / (‖g‖ + ‖h‖)` is optimal.
    ClosedForm,
    Gradient,
    /// Multi-start descent on a nonconvex objective; an upper bound only.
    Heuristic,
}

impl fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OracleMethod::Forced => "forced",
            OracleMethod::ClosedForm => "closed-form",
            OracleMethod::Gradient => "gradient",
            OracleMethod::Heuristic => "HEURISTIC",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub g_prime: TorusFn2D,
    pub h_prime: TorusFn2D,
    pub c1: f64,
    pub c2: f64,
    pub objective: f64,
    pub converged: bool,
    pub iterations: usize,
    pub method: OracleMethod,
    /// `max |F| outside Y1 ∪ Y2 / max |F|` for `F` the spectrum of `u f`.
    pub infeasibility: f64,
    /// Best exact objective after each iteration; nonincreasing.
    pub history: Vec<f64>,
}

/// Raw problem data shared by the one- and two-variable entry points.
struct Core<'a> {
    n1: usize,
    n2: usize,
    f: &'a [Complex64],
    g: &'a [Complex64],
    h: &'a [Complex64],
    in1: Vec<bool>,
    in2: Vec<bool>,
    u: Option<&'a [Complex64]>,
    w1: &'a [f64],
    w2: &'a [f64],
    r: f64,
    p: f64,
    settings: SolverSettings,
}

struct CoreResult {
    g_prime: Vec<Complex64>,
    c1: f64,
    c2: f64,
    converged: bool,
    iterations: usize,
    method: OracleMethod,
    infeasibility: f64,
    history: Vec<f64>,
}

fn band_freq(n: usize, idx: usize) -> i64 {
    if n == 1 {
        0
    } else if idx < n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

fn masks(n1: usize, n2: usize, set: FreqSet) -> Vec<bool> {
    let mut out = Vec::with_capacity(n1 * n2);
    for i1 in 0..n1 {
        for i2 in 0..n2 {
            out.push(set.contains(band_freq(n1, i1), band_freq(n2, i2)));
        }
    }
    out
}

/// Smoothed norm and its gradient with respect to the samples.
fn smooth_norm(x: &[Complex64], w: &[f64], s: f64, eps: f64, surrogate: f64, grad: &mut [Complex64]) -> f64 {
    let len = x.len() as f64;
    let e2 = eps * eps;
    if s.is_infinite() {
        let pw = surrogate;
        let m = x
            .iter()
            .zip(w)
            .map(|(v, wt)| (v.norm_sqr() + e2).sqrt() / wt)
            .fold(0.0f64, f64::max);
        if m == 0.0 {
            grad.fill(Complex64::new(0.0, 0.0));
            return 0.0;
        }
        let mean: f64 = x
            .iter()
            .zip(w)
            .map(|(v, wt)| ((v.norm_sqr() + e2).sqrt() / wt / m).powf(pw))
            .sum::<f64>()
            / len;
        let n = m * mean.powf(1.0 / pw);
        for ((gr, v), wt) in grad.iter_mut().zip(x).zip(w) {
            let sq = (v.norm_sqr() + e2).sqrt();
            let t = sq / wt;
            *gr = v * ((t / n).powf(pw - 1.0) / (wt * sq * len));
        }
        n
    } else {
        let total: f64 = x.iter().zip(w).map(|(v, wt)| wt * (v.norm_sqr() + e2).powf(s / 2.0)).sum();
        let n = (total / len).powf(1.0 / s);
        if n == 0.0 {
            grad.fill(Complex64::new(0.0, 0.0));
            return 0.0;
        }
        for ((gr, v), wt) in grad.iter_mut().zip(x).zip(w) {
            let sq = (v.norm_sqr() + e2).sqrt();
            *gr = v * ((sq / n).powf(s - 1.0) * wt / (sq * len));
        }
        n
    }
}

struct Eval {
    smooth: f64,
    exact: f64,
    c1: f64,
    c2: f64,
}

impl Core<'_> {
    fn len(&self) -> usize {
        self.n1 * self.n2
    }

    fn values_of(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut x = inverse_2d(coeffs, self.n1, self.n2);
        if let Some(u) = self.u {
            x.iter_mut().zip(u).for_each(|(a, b)| *a /= b);
        }
        x
    }

    fn spectrum_of(&self, values: &[Complex64]) -> Vec<Complex64> {
        match self.u {
            Some(u) => {
                let uv: Vec<Complex64> = values.iter().zip(u).map(|(a, b)| a * b).collect();
                forward_2d(&uv, self.n1, self.n2)
            }
            None => forward_2d(values, self.n1, self.n2),
        }
    }

    fn exact(&self, x1: &[Complex64], a: f64, b: f64) -> (f64, f64) {
        let x2: Vec<Complex64> = self.f.iter().zip(x1).map(|(f, g)| f - g).collect();
        let c1 = norm_unchecked(x1, self.w1, self.r) / a;
        let c2 = norm_unchecked(&x2, self.w2, self.p) / b;
        (c1, c2)
    }

    #[allow(clippy::too_many_arguments)]
    fn evaluate(&self, coeffs: &[Complex64], a: f64, b: f64, eps: f64, tau: f64, pw: f64, free: &[bool], grad: Option<&mut Vec<Complex64>>) -> Eval {
        let x1 = self.values_of(coeffs);
        let x2: Vec<Complex64> = self.f.iter().zip(&x1).map(|(f, g)| f - g).collect();
        let mut g1 = vec![Complex64::new(0.0, 0.0); x1.len()];
        let mut g2 = vec![Complex64::new(0.0, 0.0); x1.len()];
        let s1 = smooth_norm(&x1, self.w1, self.r, eps, pw, &mut g1) / a;
        let s2 = smooth_norm(&x2, self.w2, self.p, eps, pw, &mut g2) / b;
        let m = s1.max(s2);
        let e1 = ((s1 - m) / tau).exp();
        let e2 = ((s2 - m) / tau).exp();
        let smooth = m + tau * (e1 + e2).ln();
        let c1 = norm_unchecked(&x1, self.w1, self.r) / a;
        let c2 = norm_unchecked(&x2, self.w2, self.p) / b;
        if let Some(out) = grad {
            let (sig1, sig2) = (e1 / (e1 + e2), e2 / (e1 + e2));
            let mut gx: Vec<Complex64> = g1.iter().zip(&g2).map(|(p, q)| p * (sig1 / a) - q * (sig2 / b)).collect();
            if let Some(u) = self.u {
                gx.iter_mut().zip(u).for_each(|(v, w)| *v /= w.conj());
            }
            let scale = self.len() as f64;
            let gc = forward_2d(&gx, self.n1, self.n2);
            out.clear();
            out.extend(gc.iter().zip(free).map(|(v, &fr)| if fr { v * scale } else { Complex64::new(0.0, 0.0) }));
        }
        Eval {
            smooth,
            exact: c1.max(c2),
            c1,
            c2,
        }
    }

    fn solve(&self, heuristic: bool) -> Result<CoreResult> {
        let nn = self.len();
        let fc = self.spectrum_of(self.f);
        let fmax = fc.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let rel = |v: f64| if fmax == 0.0 { 0.0 } else { v / fmax };
        let leak_outside = |keep: &dyn Fn(usize) -> bool| {
            rel((0..nn).filter(|&i| !keep(i)).fold(0.0f64, |m, i| m.max(fc[i].norm())))
        };
        let infeasibility = leak_outside(&|i| self.in1[i] || self.in2[i]);
        let a = norm_unchecked(self.g, self.w1, self.r);
        let b = norm_unchecked(self.h, self.w2, self.p);
        let feasible_tol = 1e-8;

        let forced = |g_prime: Vec<Complex64>, leak: f64| -> Result<CoreResult> {
            if leak > feasible_tol {
                return Err(Error::Infeasible { leak });
            }
            let (c1, c2) = self.exact(&g_prime, if a > 0.0 { a } else { 1.0 }, if b > 0.0 { b } else { 1.0 });
            let (c1, c2) = (if a > 0.0 { c1 } else { 0.0 }, if b > 0.0 { c2 } else { 0.0 });
            Ok(CoreResult {
                g_prime,
                c1,
                c2,
                converged: true,
                iterations: 0,
                method: OracleMethod::Forced,
                infeasibility,
                history: vec![c1.max(c2)],
            })
        };
        if a == 0.0 && b == 0.0 {
            return forced(vec![Complex64::new(0.0, 0.0); nn], rel(fmax));
        }
        if a == 0.0 {
            return forced(vec![Complex64::new(0.0, 0.0); nn], leak_outside(&|i| self.in2[i]));
        }
        if b == 0.0 {
            return forced(self.f.to_vec(), leak_outside(&|i| self.in1[i]));
        }

        let same_norm = self.r == self.p && self.r >= 1.0 && self.w1 == self.w2 && self.in1 == self.in2;
        if same_norm {
            let leak = leak_outside(&|i| self.in1[i]);
            if leak > feasible_tol {
                return Err(Error::Infeasible { leak });
            }
            let s = a / (a + b);
            let g_prime: Vec<Complex64> = self.f.iter().map(|v| v * s).collect();
            let (c1, c2) = self.exact(&g_prime, a, b);
            return Ok(CoreResult {
                g_prime,
                c1,
                c2,
                converged: true,
                iterations: 0,
                method: OracleMethod::ClosedForm,
                infeasibility,
                history: vec![c1.max(c2)],
            });
        }

        let free: Vec<bool> = (0..nn).map(|i| self.in1[i] && self.in2[i]).collect();
        let project = |c: &mut [Complex64]| {
            for i in 0..nn {
                if !free[i] {
                    c[i] = if self.in1[i] { fc[i] } else { Complex64::new(0.0, 0.0) };
                }
            }
        };

        let mut starts: Vec<Vec<Complex64>> = Vec::new();
        let mut s0 = self.spectrum_of(self.g);
        project(&mut s0);
        starts.push(s0.clone());
        if leak_outside(&|i| free[i]) <= feasible_tol {
            let a1 = norm_unchecked(self.f, self.w1, self.r) / a;
            let a2 = norm_unchecked(self.f, self.w2, self.p) / b;
            if a1 + a2 > 0.0 {
                let s = a2 / (a1 + a2);
                let mut c: Vec<Complex64> = fc.iter().map(|v| v * s).collect();
                project(&mut c);
                starts.push(c);
            }
        }
        if heuristic {
            let mut rng = trial_rng(self.settings.seed, 0x0AC1E);
            let scale = s0.iter().chain(&fc).fold(0.0f64, |m, v| m.max(v.norm()));
            for _ in 0..self.settings.starts {
                let mut c = s0.clone();
                for (v, &fr) in c.iter_mut().zip(&free) {
                    if fr {
                        let t: f64 = rng.random_range(-1.0..1.0);
                        let q: f64 = rng.random_range(-1.0..1.0);
                        *v += Complex64::new(t, q) * (0.5 * scale);
                    }
                }
                starts.push(c);
            }
        }

        let fscale = self.f.iter().chain(self.g).chain(self.h).fold(0.0f64, |m, v| m.max(v.norm()));
        let schedule: [(f64, f64, f64); 4] = [(1e-2, 1e-1, 0.25), (1e-3, 1e-2, 0.5), (1e-5, 1e-3, 1.0), (1e-8, 1e-4, 2.0)];
        let per_stage = (self.settings.max_iter / schedule.len()).max(1);

        let mut best = (f64::INFINITY, s0.clone(), 0.0, 0.0);
        let mut history = Vec::new();
        let mut iterations = 0;
        let mut converged = true;
        for start in starts {
            let mut z = start;
            let record = |c: &[Complex64], e: &Eval, best: &mut (f64, Vec<Complex64>, f64, f64), history: &mut Vec<f64>| {
                if e.exact < best.0 {
                    *best = (e.exact, c.to_vec(), e.c1, e.c2);
                }
                history.push(best.0);
            };
            let e0 = self.evaluate(&z, a, b, 1e-2 * fscale, 1e-1, self.settings.surrogate_power, &free, None);
            record(&z, &e0, &mut best, &mut history);
            let mut all_stages_converged = true;
            for &(eps_rel, tau, pow_scale) in &schedule {
                let eps = eps_rel * fscale.max(f64::MIN_POSITIVE);
                let pw = (self.settings.surrogate_power * pow_scale).max(2.0);
                let mut y = z.clone();
                let mut t = 1.0f64;
                let mut lip = 1.0f64;
                let mut grad = Vec::with_capacity(nn);
                let mut prev = self.evaluate(&z, a, b, eps, tau, pw, &free, None).smooth;
                let mut calm = 0;
                let mut stage_converged = false;
                for _ in 0..per_stage {
                    iterations += 1;
                    let ey = self.evaluate(&y, a, b, eps, tau, pw, &free, Some(&mut grad));
                    let gnorm2: f64 = grad.iter().map(|v| v.norm_sqr()).sum();
                    if gnorm2 == 0.0 {
                        stage_converged = true;
                        break;
                    }
                    let (znew, enew) = loop {
                        let mut cand: Vec<Complex64> = y.iter().zip(&grad).map(|(v, gr)| v - gr / lip).collect();
                        project(&mut cand);
                        let e = self.evaluate(&cand, a, b, eps, tau, pw, &free, None);
                        if e.smooth <= ey.smooth - 0.5 * gnorm2 / lip || lip > 1e30 {
                            break (cand, e);
                        }
                        lip *= 2.0;
                    };
                    record(&znew, &enew, &mut best, &mut history);
                    if enew.smooth > prev {
                        t = 1.0;
                        y = z.clone();
                        lip *= 2.0;
                        continue;
                    }
                    let tn = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
                    let mom = (t - 1.0) / tn;
                    y = znew.iter().zip(&z).map(|(a, b)| a + (a - b) * mom).collect();
                    project(&mut y);
                    z = znew;
                    t = tn;
                    lip *= 0.9;
                    if (prev - enew.smooth).abs() <= self.settings.tol * enew.smooth.abs().max(1e-300) {
                        calm += 1;
                        if calm >= 10 {
                            stage_converged = true;
                            break;
                        }
                    } else {
                        calm = 0;
                    }
                    prev = enew.smooth;
                }
                all_stages_converged &= stage_converged;
            }
            converged &= all_stages_converged;
        }
        let g_prime = self.values_of(&best.1);
        Ok(CoreResult {
            g_prime,
            c1: best.2,
            c2: best.3,
            converged,
            iterations,
            method: if heuristic { OracleMethod::Heuristic } else { OracleMethod::Gradient },
            infeasibility,
            history,
        })
    }
}

fn core_for(prob: &OracleProblem) -> Result<Core<'_>> {
    let (n1, n2) = prob.f.shape();
    let u = match &prob.frame {
        Some(fr) if !fr.is_trivial() => {
            if fr.shape() != Shape::Two(n1, n2) {
                return Err(Error::ShapeMismatch {
                    expected: format!("{n1}x{n2}"),
                    got: fr.shape().to_string(),
                });
            }
            Some(fr.values())
        }
        _ => None,
    };
    Ok(Core {
        n1,
        n2,
        f: prob.f.values(),
        g: prob.g.values(),
        h: prob.h.values(),
        in1: masks(n1, n2, prob.y1),
        in2: masks(n1, n2, prob.y2),
        u,
        w1: prob.w1.values(),
        w2: prob.w2.values(),
        r: prob.r,
        p: prob.p,
        settings: prob.settings,
    })
}

fn finish(prob: &OracleProblem, res: CoreResult) -> OracleResult {
    let grids = prob.f.grids();
    let g_prime = TorusFn2D::new(grids.0, grids.1, res.g_prime).expect("finite iterate");
    let h_prime = &prob.f - &g_prime;
    OracleResult {
        g_prime,
        h_prime,
        c1: res.c1,
        c2: res.c2,
        objective: res.c1.max(res.c2),
        converged: res.converged,
        iterations: res.iterations,
        method: res.method,
        infeasibility: res.infeasibility,
        history: res.history,
    }
}

/// Near-optimal splitting for `r, p ∈ [1, ∞]`.
pub fn solve_convex(prob: &OracleProblem) -> Result<OracleResult> {
    if !(prob.r >= 1.0 && prob.p >= 1.0) {
        return Err(invalid("r, p", format!("convex solve needs r, p >= 1, got r = {}, p = {}", prob.r, prob.p)));
    }
    let core = core_for(prob)?;
    Ok(finish(prob, core.solve(false)?))
}

/// Multi-start descent for `0 < r < 1 <= p`; the result is an upper bound only.
pub fn solve_heuristic(prob: &OracleProblem) -> Result<OracleResult> {
    if !(prob.r > 0.0 && prob.r < 1.0 && prob.p >= 1.0) {
        return Err(invalid("r, p", format!("heuristic solve needs 0 < r < 1 <= p, got r = {}, p = {}", prob.r, prob.p)));
    }
    let core = core_for(prob)?;
    Ok(finish(prob, core.solve(true)?))
}

/// Dispatches on `r`.
pub fn solve(prob: &OracleProblem) -> Result<OracleResult> {
    if prob.r < 1.0 {
        solve_heuristic(prob)
    } else {
        solve_convex(prob)
    }
}

/// Outcome of a one-variable solve.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberResult {
    pub g_prime: TorusFn1D,
    pub h_prime: TorusFn1D,
    pub c1: f64,
    pub c2: f64,
    pub converged: bool,
    pub method: OracleMethod,
}

/// Splits a one-variable `f = g + h` into analytic `g' + h'` (nonnegative spectrum).
#[allow(clippy::too_many_arguments)]
pub fn solve_fiber(
    f: &TorusFn1D,
    g: &TorusFn1D,
    h: &TorusFn1D,
    w1: &Weight1D,
    w2: &Weight1D,
    r: f64,
    p: f64,
    settings: SolverSettings,
) -> Result<FiberResult> {
    let n = f.n();
    if g.n() != n || h.n() != n || w1.n() != n || w2.n() != n {
        return Err(invalid("fiber", "all inputs must share one grid"));
    }
    check_sum(f.values(), g.values(), h.values())?;
    let analytic = masks(1, n, FreqSet::from(SpectralCone::TOP_HALF));
    let core = Core {
        n1: 1,
        n2: n,
        f: f.values(),
        g: g.values(),
        h: h.values(),
        in1: analytic.clone(),
        in2: analytic,
        u: None,
        w1: w1.values(),
        w2: w2.values(),
        r,
        p,
        settings,
    };
    let res = core.solve(r < 1.0)?;
    let g_prime = TorusFn1D::new(f.grid(), res.g_prime)?;
    let h_prime = f - &g_prime;
    Ok(FiberResult {
        g_prime,
        h_prime,
        c1: res.c1,
        c2: res.c2,
        converged: res.converged,
        method: res.method,
    })
}

/// Which weight of the couple a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepTarget {
    W1,
    W2,
}

/// Sweep description: `template` is a weight spec with `{}` standing for the parameter.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub family: String,
    pub template: String,
    pub params: Vec<f64>,
    pub target: SweepTarget,
    pub other: WeightSpec,
    pub y1: FreqSet,
    pub y2: FreqSet,
    pub r: f64,
    pub p: f64,
    pub trials: usize,
    pub n: usize,
    pub seed: u64,
    pub degree: u32,
    pub settings: SolverSettings,
    /// Also run the constructive splitting where it applies.
    pub constructive: bool,
}

impl SweepSpec {
    /// Hardy-type couple with both subspaces analytic in the quadrant sense.
    pub fn new(family: &str, template: &str, params: Vec<f64>, r: f64, p: f64, trials: usize, n: usize, seed: u64) -> Self {
        Self {
            family: family.to_string(),
            template: template.to_string(),
            params,
            target: SweepTarget::W2,
            other: WeightSpec::Const(1.0),
            y1: SpectralCone::QUADRANT.into(),
            y2: SpectralCone::QUADRANT.into(),
            r,
            p,
            trials,
            n,
            seed,
            degree: 6,
            settings: SolverSettings {
                max_iter: 1200,
                ..SolverSettings::default()
            },
            constructive: false,
        }
    }

    pub fn weight_spec(&self, param: f64) -> Result<WeightSpec> {
        if !self.template.contains("{}") {
            return Err(invalid("template", "must contain a `{}` placeholder"));
        }
        self.template.replace("{}", &param.to_string()).parse()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub family: String,
    pub param: f64,
    pub r: f64,
    pub p: f64,
    pub n: usize,
    pub trials: usize,
    pub oracle_max: f64,
    pub constructive_max: Option<f64>,
    pub seed: u64,
}

pub const SWEEP_HEADER: [&str; 9] = ["family", "param", "r", "p", "n", "trials", "oracle_max", "constructive_max", "seed"];

impl SweepRow {
    pub fn record(&self) -> Vec<String> {
        vec![
            self.family.clone(),
            self.param.to_string(),
            self.r.to_string(),
            self.p.to_string(),
            self.n.to_string(),
            self.trials.to_string(),
            self.oracle_max.to_string(),
            self.constructive_max.map(|c| c.to_string()).unwrap_or_default(),
            self.seed.to_string(),
        ]
    }
}

pub fn write_sweep_csv<W: std::io::Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let records: Vec<Vec<String>> = rows.iter().map(SweepRow::record).collect();
    write_csv(out, &SWEEP_HEADER, &records)
}

/// Worst oracle (and optionally constructive) constants over random trials for each parameter.
pub fn kconstant_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    if spec.trials == 0 {
        return Err(invalid("trials", "need at least one trial"));
    }
    let grid = Grid1D::new(spec.n)?;
    let other = spec.other.build_2d(grid, grid)?;
    let mut rows = Vec::with_capacity(spec.params.len());
    for &param in &spec.params {
        let varied = spec.weight_spec(param)?.build_2d(grid, grid)?;
        let (w1, w2) = match spec.target {
            SweepTarget::W1 => (varied, other.clone()),
            SweepTarget::W2 => (other.clone(), varied),
        };
        let inst_spec = InstanceSpec {
            y1: spec.y1,
            y2: spec.y2,
            w1: &w1,
            w2: &w2,
            r: spec.r,
            p: spec.p,
            degree: spec.degree.min((spec.n / 2 - 1) as u32),
        };
        let results: Vec<(f64, Option<f64>)> = (0..spec.trials)
            .into_par_iter()
            .map(|trial| -> Result<(f64, Option<f64>)> {
                let mut rng = trial_rng(spec.seed, trial as u64);
                let inst = random_instance(&mut rng, grid, grid, &inst_spec)?;
                let settings = SolverSettings {
                    seed: spec.seed ^ trial as u64,
                    ..spec.settings
                };
                let prob = OracleProblem::new(inst.f.clone(), inst.g.clone(), inst.h.clone(), spec.y1, spec.y2, w1.clone(), w2.clone(), spec.r, spec.p)?
                    .with_settings(settings);
                let oracle = solve(&prob)?.objective;
                let constructive = if spec.constructive && constructive_applies(spec) {
                    let cfg = crate::ksplit::SplitConfig::new(spec.p / (spec.p - 1.0))?;
                    let weights = crate::ksplit::SplitWeights::reduce(&w1, &w2, None, None, spec.p)?;
                    let rep = crate::ksplit::split_inf(&inst.f, &inst.g, &inst.h, &weights, &cfg)?;
                    Some(rep.c1.max(rep.c2))
                } else {
                    None
                };
                Ok((oracle, constructive))
            })
            .collect::<Result<_>>()?;
        let oracle_max = results.iter().map(|r| r.0).fold(0.0, f64::max);
        let constructive_max = if results.iter().all(|r| r.1.is_some()) {
            Some(results.iter().filter_map(|r| r.1).fold(0.0, f64::max))
        } else {
            None
        };
        rows.push(SweepRow {
            family: spec.family.clone(),
            param,
            r: spec.r,
            p: spec.p,
            n: spec.n,
            trials: spec.trials,
            oracle_max,
            constructive_max,
            seed: spec.seed,
        });
    }
    rows.sort_by(|a, b| a.param.total_cmp(&b.param));
    Ok(rows)
}

/// The constructive engine handles the `(L^1, L^q)` predual couple of the `P` subspaces.
fn constructive_applies(spec: &SweepSpec) -> bool {
    let p_range = FreqSet::from(SpectralCone::P);
    spec.r == 1.0 && spec.p > 1.0 && spec.p.is_finite() && spec.y1 == p_range && spec.y2 == p_range
}

/// Value of `max(‖g'‖/‖g‖, ‖h'‖/‖h‖)` for a given candidate, with `0/0 = 0`.
pub fn objective_of(prob: &OracleProblem, g_prime: &TorusFn2D) -> (f64, f64) {
    let a = norm_unchecked(prob.g.values(), prob.w1.values(), prob.r);
    let b = norm_unchecked(prob.h.values(), prob.w2.values(), prob.p);
    let h_prime = &prob.f - g_prime;
    let c1 = norm_unchecked(g_prime.samples(), prob.w1.values(), prob.r);
    let c2 = norm_unchecked(h_prime.samples(), prob.w2.values(), prob.p);
    (if a > 0.0 { c1 / a } else { 0.0 }, if b > 0.0 { c2 / b } else { 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::cone_leakage;

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(n).unwrap()
    }

    fn poly(g: Grid1D, terms: &[((i64, i64), (f64, f64))]) -> TorusFn2D {
        let pairs: Vec<((i64, i64), Complex64)> = terms.iter().map(|&(mk, (a, b))| (mk, Complex64::new(a, b))).collect();
        TorusFn2D::from_spectrum(crate::torus::Spectrum2D::from_pairs(g, g, &pairs).unwrap()).unwrap()
    }

    #[test]
    fn zero_g_is_forced() {
        let g8 = grid(8);
        let f = poly(g8, &[((0, 0), (1.0, 0.0)), ((1, 2), (0.5, 0.0))]);
        let zero = TorusFn2D::zeros(g8, g8);
        let ones = Weight2D::ones(g8, g8);
        let prob = OracleProblem::new(f.clone(), zero, f.clone(), SpectralCone::QUADRANT, SpectralCone::QUADRANT, ones.clone(), ones, 1.0, 2.0).unwrap();
        let res = solve_convex(&prob).unwrap();
        assert_eq!(res.method, OracleMethod::Forced);
        assert!(res.g_prime.is_zero());
        assert_eq!(res.h_prime, f);
        assert!(res.objective <= 1.0);
        let prob = OracleProblem { r: 0.5, ..prob };
        assert!(solve_heuristic(&prob).unwrap().g_prime.is_zero());
    }

    #[test]
    fn forced_but_infeasible_is_an_error() {
        let g8 = grid(8);
        let f = poly(g8, &[((-1, -1), (1.0, 0.0))]);
        let zero = TorusFn2D::zeros(g8, g8);
        let ones = Weight2D::ones(g8, g8);
        let prob = OracleProblem::new(f.clone(), zero, f, SpectralCone::QUADRANT, SpectralCone::QUADRANT, ones.clone(), ones, 1.0, 2.0).unwrap();
        assert!(matches!(solve_convex(&prob), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn hilbert_case_is_closed_form() {
        let g16 = grid(16);
        let f = poly(g16, &[((0, 0), (1.0, 0.0)), ((2, -3), (0.0, 1.0)), ((-1, 1), (0.3, 0.0))]);
        let d = poly(g16, &[((-3, -3), (0.7, 0.2)), ((1, 1), (0.1, 0.0))]);
        let g = &f.scale(Complex64::new(0.3, 0.0)) + &d;
        let h = &f - &g;
        let ones = Weight2D::ones(g16, g16);
        let prob = OracleProblem::new(f, g, h, SpectralCone::UNION, SpectralCone::UNION, ones.clone(), ones, 2.0, 2.0).unwrap();
        let res = solve_convex(&prob).unwrap();
        assert_eq!(res.method, OracleMethod::ClosedForm);
        assert!(res.objective <= 1.0 + 1e-12);
        assert!(cone_leakage(res.g_prime.spectrum(), SpectralCone::UNION) < 1e-12);
    }

    #[test]
    fn gradient_beats_starting_point() {
        let g8 = grid(8);
        let f = poly(g8, &[((0, 0), (1.0, 0.0)), ((1, 1), (0.5, 0.5)), ((0, 2), (0.25, 0.0))]);
        let d = poly(g8, &[((-2, -1), (0.4, 0.0)), ((0, 1), (0.3, -0.2))]);
        let g = &f.scale(Complex64::new(0.5, 0.0)) + &d;
        let h = &f - &g;
        let ones = Weight2D::ones(g8, g8);
        let prob = OracleProblem::new(f, g, h, SpectralCone::QUADRANT, SpectralCone::QUADRANT, ones.clone(), ones, 1.0, 2.0).unwrap();
        let res = solve_convex(&prob).unwrap();
        assert_eq!(res.method, OracleMethod::Gradient);
        assert!(res.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(res.objective <= res.history[0]);
        assert!((&res.g_prime + &res.h_prime).max_diff(&prob.f) < 1e-12);
        assert!(cone_leakage(res.g_prime.spectrum(), SpectralCone::QUADRANT) < 1e-8);
        let again = solve_convex(&prob).unwrap();
        assert_eq!(again, res);
    }

    #[test]
    fn fiber_solve_is_analytic() {
        let g = grid(32);
        let f = TorusFn1D::from_fn(g, |t| Complex64::from_polar(1.0, t) + 2.0).unwrap();
        let d = TorusFn1D::from_fn(g, |t| Complex64::from_polar(0.5, -2.0 * t)).unwrap();
        let gg = &f.scale(Complex64::new(0.5, 0.0)) + &d;
        let hh = &f - &gg;
        let w = Weight1D::ones(g);
        let res = solve_fiber(&f, &gg, &hh, &w, &w, 1.0, 2.0, SolverSettings::default()).unwrap();
        assert!(crate::spectral::analytic_leakage(&res.g_prime) < 1e-8);
        assert!(res.c1.is_finite() && res.c2.is_finite());
    }
}
