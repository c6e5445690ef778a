//! Constructive splitting for the couple `(L^1(w1), L^q(w2))` of `P`-subspaces on the torus,
//! the fiberwise first step for Hardy couples, and a driver for the three intermediate couples
//! used when gluing `(L^1, L^∞)`.
//!
//! The inputs of [`split_inf`] live in the original coordinates. Internally everything is
//! divided by the frame `u`, so that the couple becomes `(L^1(w), L^q(w))` over the range of
//! `P^u f = u^{-1} P(u f)`; results are mapped back before they are returned.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{build_partition, partition_levels};
use crate::czd::{cz_decompose, cz_tail_check};
use crate::error::{invalid, Error, Result};
use crate::oracle::{solve, solve_fiber, FreqSet, OracleMethod, OracleProblem, SolverSettings};
use crate::random::{random_instance, trial_rng, InstanceSpec};
use crate::report::KeyValues;
use crate::spectral::{
    analytic_completion, analytic_leakage, conjugate_z1, framed_membership, framed_project, membership, riesz, Frame,
    SpectralCone,
};
use crate::torus::{norm_unchecked, poisson_convolve_z1, TorusFn1D, TorusFn2D};
use crate::weights::{
    bmo_norm_real, glue_exponent, glue_weight, hypothesis_check, single_weight_reduction, ArcFamily, HypothesisInput,
    HypothesisReport, TheoremId, Weight1D, Weight2D,
};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Parameters of [`split_inf`].
#[derive(Debug, Clone, PartialEq)]
pub struct SplitConfig {
    pub p: f64,
    /// Conjugate exponent `p / (p - 1)`: the couple is `(L^1, L^q)`.
    pub q: f64,
    /// Smoothing power of the correctors.
    pub k: u32,
    /// Integer with `p / s < 1`.
    pub s: u32,
    /// Partition levels; `None` uses the smallest admissible range.
    pub levels: Option<(i32, i32)>,
    pub delta_maj: f64,
    /// Relative floor added to each majorant.
    pub majorant_eps: f64,
    /// Initial Poisson radius for the corrector weights.
    pub gimel_rho: f64,
    /// Largest accepted `‖H(ℷ^{1/k}) / ℷ^{1/k}‖_∞`.
    pub gimel_cap: f64,
    pub gimel_retries: usize,
    /// `φ_j = θ_j ψ_j^power`.
    pub partition_power: u32,
    /// Leakage accepted for `f` in the range of `P^u`.
    pub membership_tol: f64,
    /// Relative tolerance for `f = g + h`.
    pub sum_tol: f64,
    pub check_hypotheses: bool,
}

impl SplitConfig {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(invalid("p", format!("need 1 < p < inf, got {p}")));
        }
        let cfg = Self {
            p,
            q: p / (p - 1.0),
            k: 2,
            s: p.floor() as u32 + 1,
            levels: None,
            delta_maj: 0.5,
            majorant_eps: 1e-3,
            gimel_rho: 0.9,
            gimel_cap: 100.0,
            gimel_retries: 12,
            partition_power: 8,
            membership_tol: 1e-6,
            sum_tol: 1e-10,
            check_hypotheses: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Configuration whose conjugate exponent is `q`.
    pub fn with_q(q: f64) -> Result<Self> {
        if !(q > 1.0) || !q.is_finite() {
            return Err(invalid("q", format!("need 1 < q < inf, got {q}")));
        }
        Self::new(q / (q - 1.0))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            return Err(invalid("p", format!("need 1 < p < inf, got {}", self.p)));
        }
        if (1.0 / self.p + 1.0 / self.q - 1.0).abs() > 1e-15 {
            return Err(invalid("q", format!("{} is not conjugate to p = {}", self.q, self.p)));
        }
        if self.k < 2 {
            return Err(invalid("k", "must be at least 2"));
        }
        if !(self.p < self.s as f64) {
            return Err(invalid("s", format!("need p / s < 1, got s = {}", self.s)));
        }
        if !(self.delta_maj > 0.0 && self.delta_maj < 1.0) {
            return Err(invalid("delta_maj", "must lie in (0, 1)"));
        }
        if !(self.majorant_eps > 0.0) {
            return Err(invalid("majorant_eps", "must be positive"));
        }
        if !(self.gimel_rho > 0.0 && self.gimel_rho < 1.0) {
            return Err(invalid("gimel_rho", "must lie in (0, 1)"));
        }
        if !(self.gimel_cap > 0.0) {
            return Err(invalid("gimel_cap", "must be positive"));
        }
        if self.partition_power < 8 {
            return Err(invalid("partition_power", "must be at least 8"));
        }
        if !(self.membership_tol > 0.0 && self.sum_tol > 0.0) {
            return Err(invalid("tolerances", "must be positive"));
        }
        if let Some((lo, hi)) = self.levels {
            if lo > hi {
                return Err(invalid("levels", format!("empty range {lo}..={hi}")));
            }
        }
        Ok(())
    }
}

/// Weights of the `(L^1(w1), L^q(w2))` couple together with the reduced weight `w`,
/// the frame `u`, and the one-variable factors `a(z2)`, `b(z1)` of the norms.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitWeights {
    pub w1: Weight2D,
    pub w2: Weight2D,
    pub w: Weight2D,
    pub u: Weight2D,
    pub a: Weight1D,
    pub b: Weight1D,
    pub q: f64,
}

impl SplitWeights {
    pub fn reduce(w1: &Weight2D, w2: &Weight2D, a: Option<Weight1D>, b: Option<Weight1D>, q: f64) -> Result<Self> {
        if w1.shape() != w2.shape() {
            return Err(Error::ShapeMismatch {
                expected: format!("{:?}", w1.shape()),
                got: format!("{:?}", w2.shape()),
            });
        }
        let (g1, g2) = w1.grids();
        let a = a.unwrap_or_else(|| Weight1D::ones(g2));
        let b = b.unwrap_or_else(|| Weight1D::ones(g1));
        if a.grid() != g2 || b.grid() != g1 {
            return Err(invalid("a, b", "a must live on the z2 grid and b on the z1 grid"));
        }
        let (w, u) = single_weight_reduction(w1, w2, q)?;
        Ok(Self {
            w1: w1.clone(),
            w2: w2.clone(),
            w,
            u,
            a,
            b,
            q,
        })
    }

    pub fn trivial(w: &Weight2D, q: f64) -> Result<Self> {
        let (g1, g2) = w.grids();
        let ones = Weight2D::ones(g1, g2);
        Self::reduce(&ones, &ones, None, None, q)
    }

    pub fn frame(&self) -> Frame {
        Frame::from_weight(&self.u)
    }

    /// Weights `(w2^{1/(1-q)}, w1)` of the couple this one is predual to.
    pub fn primal(&self) -> Result<(Weight2D, Weight2D)> {
        Ok((self.w2.powf(1.0 / (1.0 - self.q))?, self.w1.clone()))
    }
}

/// Maximal-function majorant `v = M(y^δ)^{1/δ} + ε max y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Majorant {
    pub v: Vec<f64>,
    /// BMO norm of `log v` over the dyadic and shifted arcs.
    pub bmo_log: f64,
}

pub fn majorant(y: &[f64], delta: f64, eps: f64) -> Result<Majorant> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("delta", format!("need 0 < delta < 1, got {delta}")));
    }
    if !(eps > 0.0) {
        return Err(invalid("eps", "must be positive"));
    }
    if let Some(i) = y.iter().position(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(invalid("y", format!("entry {i} is {} but must be finite and nonnegative", y[i])));
    }
    let n = y.len();
    let fam = ArcFamily::dyadic_with_min(n, 1);
    let ymax = y.iter().copied().fold(0.0, f64::max);
    if ymax == 0.0 {
        return Ok(Majorant {
            v: vec![eps; n],
            bmo_log: 0.0,
        });
    }
    let yd: Vec<f64> = y.iter().map(|x| x.powf(delta)).collect();
    let mut m = yd.clone();
    for &arc in fam.arcs() {
        let avg = fam.indices(arc).map(|i| yd[i]).sum::<f64>() / arc.len as f64;
        for i in fam.indices(arc) {
            m[i] = m[i].max(avg);
        }
    }
    let v: Vec<f64> = m
        .iter()
        .zip(y)
        .map(|(mi, yi)| mi.powf(1.0 / delta).max(*yi) + eps * ymax)
        .collect();
    let logs: Vec<f64> = v.iter().map(|x| x.ln()).collect();
    let bmo_log = bmo_norm_real(&logs, &fam)?;
    Ok(Majorant { v, bmo_log })
}

/// Corrector weight `ℷ ~ v w` with controlled conjugate function in `z1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gimel {
    pub values: Weight2D,
    /// `max |conj_{z1}(ℷ^{1/k})| / ℷ^{1/k}` over columns that are not constant.
    pub ratio: f64,
    /// Poisson radius that was accepted.
    pub rho: f64,
    pub attempts: usize,
}

fn column_constant(values: &[f64], n1: usize, n2: usize) -> Vec<bool> {
    (0..n2)
        .map(|i2| (1..n1).all(|i1| values[i1 * n2 + i2] == values[i2]))
        .collect()
}

/// Poisson smoothing in `z1` of `v(z1) w(z1, z2)`, clipped to `[v w / 2, 2 v w]`.
///
/// The radius is halved until the conjugate-function ratio is at most `cap`.
pub fn gimel(v: &[f64], w: &Weight2D, k: u32, rho: f64, cap: f64, retries: usize) -> Result<Gimel> {
    let (g1, g2) = w.grids();
    let (n1, n2) = w.shape();
    if v.len() != n1 {
        return Err(Error::ShapeMismatch {
            expected: n1.to_string(),
            got: v.len().to_string(),
        });
    }
    if let Some(i) = v.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::NonPositiveWeight { index: i, value: v[i] });
    }
    if k == 0 {
        return Err(invalid("k", "must be positive"));
    }
    let vw: Vec<f64> = w.values().iter().enumerate().map(|(i, x)| v[i / n2] * x).collect();
    let constant = column_constant(&vw, n1, n2);
    if constant.iter().all(|&c| c) {
        return Ok(Gimel {
            values: Weight2D::new(g1, g2, vw)?,
            ratio: 0.0,
            rho,
            attempts: 0,
        });
    }
    let base = TorusFn2D::from_real(g1, g2, &vw)?;
    let inv_k = 1.0 / k as f64;
    let mut rho = rho;
    let mut ratio = f64::INFINITY;
    for attempt in 0..=retries {
        let smooth = poisson_convolve_z1(&base, rho)?.re();
        let values: Vec<f64> = smooth
            .iter()
            .zip(&vw)
            .enumerate()
            .map(|(i, (s, x))| if constant[i % n2] { *x } else { s.clamp(0.5 * x, 2.0 * x) })
            .collect();
        let root: Vec<f64> = values.iter().map(|x| x.powf(inv_k)).collect();
        let conj = conjugate_z1(&TorusFn2D::from_real(g1, g2, &root)?);
        ratio = conj
            .values()
            .iter()
            .zip(&root)
            .enumerate()
            .filter(|(i, _)| !constant[i % n2])
            .map(|(_, (c, r))| c.re.abs() / r)
            .fold(0.0, f64::max);
        if ratio <= cap {
            return Ok(Gimel {
                values: Weight2D::new(g1, g2, values)?,
                ratio,
                rho,
                attempts: attempt + 1,
            });
        }
        rho *= 0.5;
    }
    Err(Error::GimelRetries { ratio, retries })
}

/// `λ = v^p / D^{p-1}`, with `λ = ∞` where `D = 0`.
pub fn lambda_level(v: &[f64], d: &[f64], p: f64) -> Vec<f64> {
    v.iter()
        .zip(d)
        .map(|(vi, di)| if *di == 0.0 { f64::INFINITY } else { vi.powf(p) / di.powf(p - 1.0) })
        .collect()
}

/// Analytic-in-`z1` multipliers `Φ = 1 - (1 - F^{ks})^k` of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct Correctors {
    pub phi: TorusFn2D,
    pub f: TorusFn2D,
    /// `γ`, row-major like the samples.
    pub gamma: Vec<f64>,
    /// `max |Φ|`.
    pub c_phi: f64,
    /// `max |Φ| |P2^u g1| / λ`.
    pub bound: f64,
    /// `max |Φ| γ^{ks}`.
    pub decay: f64,
    /// Negative-frequency leakage in `z1` before the final Riesz projection.
    pub raw_leakage: f64,
    pub leakage: f64,
}

pub fn correctors(p2g1: &TorusFn2D, lambda: &[f64], gimel: &Weight2D, k: u32, s: u32, level: i32) -> Result<Correctors> {
    let (g1, g2) = p2g1.grids();
    let (n1, n2) = p2g1.shape();
    if gimel.shape() != (n1, n2) || lambda.len() != n1 {
        return Err(invalid("correctors", "inputs must share the grid"));
    }
    if let Some(i) = lambda.iter().position(|l| !(*l > 0.0)) {
        return Err(invalid("lambda", format!("entry {i} is {} but must be positive", lambda[i])));
    }
    let ks = (k * s) as i32;
    let exponent = 1.0 / (k * s) as f64;
    let inv_k = 1.0 / k as f64;
    let gamma: Vec<f64> = p2g1
        .values()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let l = lambda[i / n2];
            if l.is_infinite() {
                1.0
            } else {
                (c.norm() / l).powf(exponent).max(1.0)
            }
        })
        .collect();

    type Column = (TorusFn1D, TorusFn1D, f64, f64);
    let columns: Vec<Column> = (0..n2)
        .into_par_iter()
        .map(|i2| -> Result<Column> {
            let gam: Vec<f64> = (0..n1).map(|i1| gamma[i1 * n2 + i2]).collect();
            if gam.iter().all(|&x| x == 1.0) {
                let one = TorusFn1D::constant(g1, ONE);
                return Ok((one.clone(), one, 0.0, 0.0));
            }
            let r: Vec<f64> = (0..n1).map(|i1| gimel.at(i1, i2).powf(inv_k)).collect();
            let rg: Vec<f64> = r.iter().zip(&gam).map(|(a, b)| a * b).collect();
            let num = analytic_completion(&TorusFn1D::from_real(g1, &r)?);
            let den = analytic_completion(&TorusFn1D::from_real(g1, &rg)?);
            if let Some(i1) = den.values().iter().position(|d| !(d.norm() > f64::MIN_POSITIVE) || !d.norm().is_finite()) {
                return Err(Error::CorrectorDenominator {
                    level,
                    i1,
                    i2,
                    modulus: den.values()[i1].norm(),
                });
            }
            let f = num.zip_map(&den, |a, b| a / b);
            let raw = f.map(|x| ONE - (ONE - x.powi(ks)).powi(k as i32));
            let raw_leak = analytic_leakage(&raw);
            let phi = riesz(&raw);
            let leak = analytic_leakage(&phi);
            Ok((phi, f, raw_leak, leak))
        })
        .collect::<Result<_>>()?;

    let mut raw_leakage = 0.0f64;
    let mut leakage = 0.0f64;
    let mut phis = Vec::with_capacity(n2);
    let mut fs = Vec::with_capacity(n2);
    for (phi, f, rl, l) in columns {
        raw_leakage = raw_leakage.max(rl);
        leakage = leakage.max(l);
        phis.push(phi);
        fs.push(f);
    }
    let phi = TorusFn2D::from_fibers_z1(g2, &phis)?;
    let f = TorusFn2D::from_fibers_z1(g2, &fs)?;
    let mut c_phi = 0.0f64;
    let mut bound = 0.0f64;
    let mut decay = 0.0f64;
    for (i, (ph, x)) in phi.values().iter().zip(p2g1.values()).enumerate() {
        let m = ph.norm();
        c_phi = c_phi.max(m);
        decay = decay.max(m * gamma[i].powi(ks));
        let l = lambda[i / n2];
        if l.is_finite() {
            bound = bound.max(m * x.norm() / l);
        }
    }
    Ok(Correctors {
        phi,
        f,
        gamma,
        c_phi,
        bound,
        decay,
        raw_leakage,
        leakage,
    })
}

/// Measured quantities of one partition level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelReport {
    pub j: i32,
    /// Whether `g ψ^4` or `h ψ^4` is nonzero on this level.
    pub active: bool,
    /// Fibers with `λ = ∞`.
    pub skipped_fibers: usize,
    /// Largest weighted tail ratio of the CZ bad part.
    pub tail_max: f64,
    /// `max (∫|g0|^q w)^{1/q} / v`.
    pub g0_q_bound: f64,
    pub v_bmo_log: f64,
    pub gimel_ratio: f64,
    pub gimel_rho: f64,
    pub c_phi: f64,
    pub corrector_bound: f64,
    pub decay: f64,
    pub phi_raw_leakage: f64,
    pub phi_leakage: f64,
}

impl LevelReport {
    fn inactive(j: i32) -> Self {
        Self {
            j,
            active: false,
            skipped_fibers: 0,
            tail_max: 0.0,
            g0_q_bound: 0.0,
            v_bmo_log: 0.0,
            gimel_ratio: 0.0,
            gimel_rho: 0.0,
            c_phi: 1.0,
            corrector_bound: 0.0,
            decay: 0.0,
            phi_raw_leakage: 0.0,
            phi_leakage: 0.0,
        }
    }
}

/// Intermediate objects of one level, in reduced coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelState {
    pub j: i32,
    pub y: Vec<f64>,
    pub v: Vec<f64>,
    pub lambda: Vec<f64>,
    pub gimel: Weight2D,
    pub gamma: Vec<f64>,
    pub f: TorusFn2D,
    pub phi: TorusFn2D,
    pub u: TorusFn2D,
    pub alpha: TorusFn2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitState {
    pub levels: Vec<LevelState>,
    /// `Λ = Σ_j θ_j ψ_j^4 α_j`.
    pub big_lambda: TorusFn2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitReport {
    pub g_prime: TorusFn2D,
    pub h_prime: TorusFn2D,
    pub p: f64,
    pub q: f64,
    /// `‖g‖` in `L^1(w1 a)`.
    pub a_norm: f64,
    /// `‖h‖` in `L^q(b w2 a)`.
    pub b_norm: f64,
    pub g_prime_norm: f64,
    pub h_prime_norm: f64,
    pub c1: f64,
    pub c2: f64,
    /// Leakage of the assembled parts before the final projection.
    pub raw_leakage_g: f64,
    pub raw_leakage_h: f64,
    pub leakage_g: f64,
    pub leakage_h: f64,
    pub sum_error: f64,
    pub partition_sum_error: f64,
    /// `max_{z1} Σ_j 2^j y_j^q / ∫|h|^q w a`.
    pub y_sum_ratio: f64,
    pub levels: Vec<LevelReport>,
    pub hypothesis: Option<HypothesisReport>,
}

impl SplitReport {
    pub fn objective(&self) -> f64 {
        self.c1.max(self.c2)
    }

    pub fn hypotheses_hold(&self) -> bool {
        self.hypothesis.as_ref().is_none_or(HypothesisReport::all_pass)
    }

    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        let (n1, n2) = self.g_prime.shape();
        kv.push("shape", format!("{n1}x{n2}"));
        kv.push("p", self.p);
        kv.push("q", self.q);
        kv.push("norm_g", self.a_norm);
        kv.push("norm_h", self.b_norm);
        kv.push("norm_g_prime", self.g_prime_norm);
        kv.push("norm_h_prime", self.h_prime_norm);
        kv.push("c1", self.c1);
        kv.push("c2", self.c2);
        kv.push("raw_leakage_g", self.raw_leakage_g);
        kv.push("raw_leakage_h", self.raw_leakage_h);
        kv.push("leakage_g", self.leakage_g);
        kv.push("leakage_h", self.leakage_h);
        kv.push("sum_error", self.sum_error);
        kv.push("partition_sum_error", self.partition_sum_error);
        kv.push("y_sum_ratio", self.y_sum_ratio);
        for l in &self.levels {
            let key = |name: &str| format!("level.{}.{name}", l.j);
            kv.push(key("active"), l.active);
            if !l.active {
                continue;
            }
            kv.push(key("skipped_fibers"), l.skipped_fibers);
            kv.push(key("tail_max"), l.tail_max);
            kv.push(key("g0_q_bound"), l.g0_q_bound);
            kv.push(key("v_bmo_log"), l.v_bmo_log);
            kv.push(key("gimel_ratio"), l.gimel_ratio);
            kv.push(key("gimel_rho"), l.gimel_rho);
            kv.push(key("c_phi"), l.c_phi);
            kv.push(key("corrector_bound"), l.corrector_bound);
            kv.push(key("decay"), l.decay);
            kv.push(key("phi_raw_leakage"), l.phi_raw_leakage);
            kv.push(key("phi_leakage"), l.phi_leakage);
        }
        if let Some(h) = &self.hypothesis {
            kv.extend(h.to_key_values("hypothesis."));
        }
        kv
    }
}

fn relative_sum_error(f: &TorusFn2D, g: &TorusFn2D, h: &TorusFn2D) -> f64 {
    let scale = f.max_abs().max(g.max_abs()).max(h.max_abs());
    let diff = f
        .values()
        .iter()
        .zip(g.values())
        .zip(h.values())
        .map(|((a, b), c)| (a - b - c).norm())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else {
        num / den
    }
}

struct LevelOut {
    report: LevelReport,
    state: Option<LevelState>,
    /// `θψ^4 α`, `θψ^4 g1`, `θψ^4 (g0 + hψ^4)`.
    parts: Option<(TorusFn2D, TorusFn2D, TorusFn2D)>,
    y: Vec<f64>,
}

struct Reduced<'a> {
    g: &'a TorusFn2D,
    h: &'a TorusFn2D,
    w: &'a Weight2D,
    u: &'a Weight2D,
    frame: &'a Frame,
}

fn run_level(atom: &crate::analytic::PartitionAtom, red: &Reduced<'_>, cfg: &SplitConfig, trace: bool) -> Result<LevelOut> {
    let j = atom.j;
    let (g1, _) = red.g.grids();
    let (n1, n2) = red.g.shape();
    let psi4 = atom.psi_pow(4);
    let th = atom.theta.zip_map(&psi4, |a, b| a * b);
    let gpsi = red.g.mul_z2(&psi4);
    let hpsi = red.h.mul_z2(&psi4);
    if atom.is_zero() || (gpsi.is_zero() && hpsi.is_zero()) {
        return Ok(LevelOut {
            report: LevelReport::inactive(j),
            state: None,
            parts: None,
            y: vec![0.0; n1],
        });
    }
    let q = cfg.q;
    let wv = red.w.values();
    let (y, d): (Vec<f64>, Vec<f64>) = (0..n1)
        .map(|i1| {
            let row = i1 * n2..(i1 + 1) * n2;
            let w = &wv[row.clone()];
            let y = norm_unchecked(&hpsi.values()[row.clone()], w, q);
            let d = norm_unchecked(&gpsi.values()[row], w, 1.0);
            (y, d)
        })
        .unzip();
    let ymax = y.iter().copied().fold(0.0, f64::max);
    let dmax = d.iter().copied().fold(0.0, f64::max);
    let floor = cfg.majorant_eps * ymax.max(dmax);
    let (v, v_bmo_log) = if ymax == 0.0 {
        (vec![floor; n1], 0.0)
    } else {
        let m = majorant(&y, cfg.delta_maj, cfg.majorant_eps)?;
        (m.v.into_iter().map(|x| x.max(floor)).collect(), m.bmo_log)
    };
    let lambda = lambda_level(&v, &d, cfg.p);

    type Fiber = (TorusFn1D, TorusFn1D, f64, f64);
    let fibers: Vec<Fiber> = (0..n1)
        .into_par_iter()
        .map(|i1| -> Result<Fiber> {
            let gf = gpsi.fiber_z2(i1);
            let wf = red.w.fiber_z2(i1);
            if lambda[i1].is_infinite() {
                let zero = TorusFn1D::zeros(gf.grid());
                let q_norm = norm_unchecked(gf.values(), wf.values(), q);
                return Ok((gf, zero, 0.0, q_norm / v[i1]));
            }
            let res = cz_decompose(&gf, &wf, lambda[i1])?;
            let uf = Frame::from_weight(&red.u.fiber_z2(i1));
            let tail = cz_tail_check(&res, &uf, &wf)?;
            let q_norm = norm_unchecked(res.g0.values(), wf.values(), q);
            Ok((res.g0, res.g1, tail, q_norm / v[i1]))
        })
        .collect::<Result<_>>()?;
    let skipped_fibers = lambda.iter().filter(|l| l.is_infinite()).count();
    let tail_max = fibers.iter().map(|f| f.2).fold(0.0, f64::max);
    let g0_q_bound = fibers.iter().map(|f| f.3).fold(0.0, f64::max);
    let g0s: Vec<TorusFn1D> = fibers.iter().map(|f| f.0.clone()).collect();
    let g1s: Vec<TorusFn1D> = fibers.into_iter().map(|f| f.1).collect();
    let g0 = TorusFn2D::from_fibers_z2(g1, &g0s)?;
    let g1f = TorusFn2D::from_fibers_z2(g1, &g1s)?;

    let rest = &g0 + &hpsi;
    let p2g1 = framed_project(&g1f, red.frame, SpectralCone::P2)?;
    let p2rest = framed_project(&rest, red.frame, SpectralCone::P2)?;
    let gim = gimel(&v, red.w, cfg.k, cfg.gimel_rho, cfg.gimel_cap, cfg.gimel_retries)?;
    let corr = correctors(&p2g1, &lambda, &gim.values, cfg.k, cfg.s, j)?;
    let uj = &p2g1 + &p2rest;
    let alpha = corr
        .phi
        .values()
        .iter()
        .zip(uj.values())
        .zip(p2rest.values())
        .map(|((ph, x), r)| ph * x - r)
        .collect();
    let alpha = TorusFn2D::new(red.g.grids().0, red.g.grids().1, alpha)?;
    let parts = (alpha.mul_z2(&th), g1f.mul_z2(&th), rest.mul_z2(&th));
    let report = LevelReport {
        j,
        active: true,
        skipped_fibers,
        tail_max,
        g0_q_bound,
        v_bmo_log,
        gimel_ratio: gim.ratio,
        gimel_rho: gim.rho,
        c_phi: corr.c_phi,
        corrector_bound: corr.bound,
        decay: corr.decay,
        phi_raw_leakage: corr.raw_leakage,
        phi_leakage: corr.leakage,
    };
    let state = trace.then(|| LevelState {
        j,
        y: y.clone(),
        v,
        lambda,
        gimel: gim.values,
        gamma: corr.gamma,
        f: corr.f,
        phi: corr.phi,
        u: uj,
        alpha,
    });
    Ok(LevelOut {
        report,
        state,
        parts: Some(parts),
        y,
    })
}

/// Splits `f = g + h` with `g ∈ L^1(w1)`, `h ∈ L^q(w2)` into `g' + h'` with both parts in the
/// range of `P`.
pub fn split_inf(f: &TorusFn2D, g: &TorusFn2D, h: &TorusFn2D, weights: &SplitWeights, cfg: &SplitConfig) -> Result<SplitReport> {
    split_inf_impl(f, g, h, weights, cfg, false).map(|(r, _)| r)
}

/// [`split_inf`] that also returns every intermediate object.
pub fn split_inf_traced(
    f: &TorusFn2D,
    g: &TorusFn2D,
    h: &TorusFn2D,
    weights: &SplitWeights,
    cfg: &SplitConfig,
) -> Result<(SplitReport, SplitState)> {
    let (r, s) = split_inf_impl(f, g, h, weights, cfg, true)?;
    Ok((r, s.expect("traced run keeps its state")))
}

fn split_inf_impl(
    f: &TorusFn2D,
    g: &TorusFn2D,
    h: &TorusFn2D,
    weights: &SplitWeights,
    cfg: &SplitConfig,
    trace: bool,
) -> Result<(SplitReport, Option<SplitState>)> {
    cfg.validate()?;
    if (weights.q - cfg.q).abs() > 1e-12 * cfg.q {
        return Err(invalid("q", format!("weights were reduced for q = {} but the configuration has q = {}", weights.q, cfg.q)));
    }
    let shape = f.shape();
    if g.shape() != shape || h.shape() != shape || weights.w.shape() != shape {
        return Err(Error::ShapeMismatch {
            expected: format!("{}x{}", shape.0, shape.1),
            got: format!("{:?} / {:?} / {:?}", g.shape(), h.shape(), weights.w.shape()),
        });
    }
    let sum_error = relative_sum_error(f, g, h);
    if sum_error > cfg.sum_tol {
        return Err(invalid("f", format!("f differs from g + h by {sum_error:e} relative")));
    }
    let in_p = membership(f, SpectralCone::P, cfg.membership_tol)?;
    if !in_p.member {
        return Err(invalid("f", format!("not in the range of P (leakage {:e})", in_p.leakage)));
    }
    let hypothesis = if cfg.check_hypotheses {
        let (w1p, w2p) = weights.primal()?;
        let mut input = HypothesisInput::new(w1p, w2p, cfg.p);
        input.a = vec![("a".into(), weights.a.clone())];
        input.b = vec![("b".into(), weights.b.clone())];
        Some(hypothesis_check(TheoremId::InfNeibAllQ, &input)?)
    } else {
        None
    };

    let (gr1, gr2) = f.grids();
    let (n1, n2) = shape;
    let uv = weights.u.values();
    let divide = |x: &TorusFn2D| {
        TorusFn2D::new(gr1, gr2, x.values().iter().zip(uv).map(|(a, b)| a / b).collect())
    };
    let gt = divide(g)?;
    let ht = divide(h)?;
    let frame = weights.frame();

    let (lo, hi) = partition_levels(&weights.a);
    let (jmin, jmax) = cfg.levels.unwrap_or((lo, hi));
    let partition = build_partition(&weights.a, jmin, jmax, cfg.partition_power)?;
    let red = Reduced {
        g: &gt,
        h: &ht,
        w: &weights.w,
        u: &weights.u,
        frame: &frame,
    };
    let outs: Vec<LevelOut> = partition
        .atoms
        .par_iter()
        .map(|atom| run_level(atom, &red, cfg, trace))
        .collect::<Result<_>>()?;

    let zero = TorusFn2D::zeros(gr1, gr2);
    let mut big_lambda = zero.clone();
    let mut g_raw = zero.clone();
    let mut h_raw = zero;
    for out in &outs {
        if let Some((alpha, gp, hp)) = &out.parts {
            big_lambda = &big_lambda + alpha;
            g_raw = &g_raw + gp;
            h_raw = &h_raw + hp;
        }
    }
    let g_raw = &g_raw - &big_lambda;
    let h_raw = &h_raw + &big_lambda;
    let raw_leakage_g = framed_membership(&g_raw, &frame, SpectralCone::P, 1.0)?.leakage;
    let raw_leakage_h = framed_membership(&h_raw, &frame, SpectralCone::P, 1.0)?.leakage;

    let gt_prime = framed_project(&g_raw, &frame, SpectralCone::P)?;
    let g_prime = TorusFn2D::new(gr1, gr2, gt_prime.values().iter().zip(uv).map(|(a, b)| a * b).collect())?;
    let h_prime = f - &g_prime;
    let ht_prime = divide(&h_prime)?;
    let leakage_g = membership(&g_prime, SpectralCone::P, 1.0)?.leakage;
    let leakage_h = membership(&h_prime, SpectralCone::P, 1.0)?.leakage;

    let av = weights.a.values();
    let bv = weights.b.values();
    let wa: Vec<f64> = weights.w.values().iter().enumerate().map(|(i, x)| x * av[i % n2]).collect();
    let bwa: Vec<f64> = wa.iter().enumerate().map(|(i, x)| x * bv[i / n2]).collect();
    let q = cfg.q;
    let a_norm = norm_unchecked(gt.values(), &wa, 1.0);
    let b_norm = norm_unchecked(ht.values(), &bwa, q);
    let g_prime_norm = norm_unchecked(gt_prime.values(), &wa, 1.0);
    let h_prime_norm = norm_unchecked(ht_prime.values(), &bwa, q);

    let y_sum_ratio = (0..n1)
        .map(|i1| {
            let row = i1 * n2..(i1 + 1) * n2;
            let den = norm_unchecked(&ht.values()[row.clone()], &wa[row], q).powf(q);
            let num: f64 = outs.iter().map(|o| 2f64.powi(o.report.j) * o.y[i1].powf(q)).sum();
            ratio(num, den)
        })
        .fold(0.0, f64::max);

    let report = SplitReport {
        sum_error: relative_sum_error(f, &g_prime, &h_prime),
        g_prime,
        h_prime,
        p: cfg.p,
        q,
        a_norm,
        b_norm,
        g_prime_norm,
        h_prime_norm,
        c1: ratio(g_prime_norm, a_norm),
        c2: ratio(h_prime_norm, b_norm),
        raw_leakage_g,
        raw_leakage_h,
        leakage_g,
        leakage_h,
        partition_sum_error: partition.constants.sum_error,
        y_sum_ratio,
        levels: outs.iter().map(|o| o.report.clone()).collect(),
        hypothesis,
    };
    let state = trace.then(|| SplitState {
        levels: outs.into_iter().filter_map(|o| o.state).collect(),
        big_lambda,
    });
    Ok((report, state))
}

/// Result of splitting fiber by fiber in `z2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberwiseReport {
    pub g_prime: TorusFn2D,
    pub h_prime: TorusFn2D,
    /// Per-fiber `‖g'‖ / ‖g‖` and `‖h'‖ / ‖h‖`, indexed by `z1`.
    pub fiber_c1: Vec<f64>,
    pub fiber_c2: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    /// Negative-`z2`-frequency leakage of the outputs.
    pub leakage: f64,
    pub sum_error: f64,
    /// At least one fiber used the nonconvex heuristic.
    pub heuristic: bool,
}

/// Makes a decomposition analytic in `z2` by solving the one-variable problem on every fiber.
#[allow(clippy::too_many_arguments)]
pub fn split_fiberwise(
    f: &TorusFn2D,
    g: &TorusFn2D,
    h: &TorusFn2D,
    w1: &Weight2D,
    w2: &Weight2D,
    r: f64,
    p: f64,
    settings: SolverSettings,
) -> Result<FiberwiseReport> {
    let shape = f.shape();
    if g.shape() != shape || h.shape() != shape || w1.shape() != shape || w2.shape() != shape {
        return Err(invalid("fiberwise", "all inputs must share one grid"));
    }
    let (g1, _) = f.grids();
    let fibers: Vec<_> = (0..shape.0)
        .into_par_iter()
        .map(|i1| {
            let res = solve_fiber(
                &f.fiber_z2(i1),
                &g.fiber_z2(i1),
                &h.fiber_z2(i1),
                &w1.fiber_z2(i1),
                &w2.fiber_z2(i1),
                r,
                p,
                settings,
            )?;
            if !res.converged && res.method == OracleMethod::Gradient {
                return Err(Error::FiberNonConvergence {
                    fiber: i1,
                    iterations: settings.max_iter,
                });
            }
            Ok(res)
        })
        .collect::<Result<_>>()?;
    let gs: Vec<TorusFn1D> = fibers.iter().map(|r| r.g_prime.clone()).collect();
    let hs: Vec<TorusFn1D> = fibers.iter().map(|r| r.h_prime.clone()).collect();
    let g_prime = TorusFn2D::from_fibers_z2(g1, &gs)?;
    let h_prime = TorusFn2D::from_fibers_z2(g1, &hs)?;
    let leakage = membership(&g_prime, SpectralCone::TOP_HALF, 1.0)?
        .leakage
        .max(membership(&h_prime, SpectralCone::TOP_HALF, 1.0)?.leakage);
    let fiber_c1: Vec<f64> = fibers.iter().map(|r| r.c1).collect();
    let fiber_c2: Vec<f64> = fibers.iter().map(|r| r.c2).collect();
    Ok(FiberwiseReport {
        sum_error: relative_sum_error(f, &g_prime, &h_prime),
        c1: fiber_c1.iter().copied().fold(0.0, f64::max),
        c2: fiber_c2.iter().copied().fold(0.0, f64::max),
        heuristic: fibers.iter().any(|r| r.method == OracleMethod::Heuristic),
        g_prime,
        h_prime,
        fiber_c1,
        fiber_c2,
        leakage,
    })
}

/// Constants of one couple in the glue chain.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupleReport {
    pub label: String,
    pub r: f64,
    pub p: f64,
    pub c1: f64,
    pub c2: f64,
    pub objective: f64,
    pub method: String,
}

impl CoupleReport {
    fn from_oracle(label: &str, r: f64, p: f64, res: &crate::oracle::OracleResult) -> Self {
        Self {
            label: label.into(),
            r,
            p,
            c1: res.c1,
            c2: res.c2,
            objective: res.objective,
            method: format!("oracle:{:?}", res.method).to_lowercase(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlueReport {
    pub thetas: [f64; 4],
    pub hypothesis: HypothesisReport,
    /// `(L^1(w1), L^{p2}(W_{θ2}))`, `(L^{p1}(W_{θ1}), L^{p4}(W_{θ4}))`, `(L^{p3}(W_{θ3}), L^∞(w2))`.
    pub couples: Vec<CoupleReport>,
    /// Constructive run on the predual of the third couple.
    pub inf_end: SplitReport,
    /// Oracle estimate for `(L^1(w1), L^∞(w2))` itself.
    pub endpoint: CoupleReport,
}

impl GlueReport {
    pub fn to_key_values(&self) -> KeyValues {
        let mut kv = KeyValues::new();
        for (i, t) in self.thetas.iter().enumerate() {
            kv.push(format!("theta{}", i + 1), t);
        }
        let mut push = |prefix: &str, c: &CoupleReport| {
            kv.push(format!("{prefix}.label"), &c.label);
            kv.push(format!("{prefix}.r"), c.r);
            kv.push(format!("{prefix}.p"), c.p);
            kv.push(format!("{prefix}.c1"), c.c1);
            kv.push(format!("{prefix}.c2"), c.c2);
            kv.push(format!("{prefix}.objective"), c.objective);
            kv.push(format!("{prefix}.method"), &c.method);
        };
        for (i, c) in self.couples.iter().enumerate() {
            push(&format!("couple{}", i + 1), c);
        }
        push("endpoint", &self.endpoint);
        kv.push("inner_splitter", "oracle");
        kv.extend(self.hypothesis.to_key_values("hypothesis."));
        kv
    }
}

/// Runs the three intermediate couples of the glue argument for the Hardy couple
/// `(H^1(w1), H^∞(w2))` and the oracle on the endpoint couple.
///
/// `f, g, h` must be a decomposition of an analytic `f`; the third couple is exercised on a
/// random predual instance drawn from `seed`.
#[allow(clippy::too_many_arguments)]
pub fn glue_driver(
    f: &TorusFn2D,
    g: &TorusFn2D,
    h: &TorusFn2D,
    w1: &Weight2D,
    w2: &Weight2D,
    thetas: [f64; 4],
    settings: SolverSettings,
    seed: u64,
) -> Result<GlueReport> {
    let ordered = thetas[0] > 0.0 && thetas.windows(2).all(|t| t[0] < t[1]) && thetas[3] < 1.0;
    if !ordered {
        return Err(invalid("thetas", format!("need 0 < θ1 < θ2 < θ3 < θ4 < 1, got {thetas:?}")));
    }
    let mut input = HypothesisInput::new(w1.clone(), w2.clone(), 2.0);
    input.thetas = thetas.to_vec();
    let hypothesis = hypothesis_check(TheoremId::Glue, &input)?;

    let quadrant = FreqSet::from(SpectralCone::QUADRANT);
    let wt = |i: usize| glue_weight(w1, w2, thetas[i]);
    let pt = |i: usize| glue_exponent(thetas[i]);
    let oracle = |x1: &Weight2D, x2: &Weight2D, r: f64, p: f64| {
        let prob = OracleProblem::new(f.clone(), g.clone(), h.clone(), quadrant, quadrant, x1.clone(), x2.clone(), r, p)?
            .with_settings(settings);
        solve(&prob)
    };

    let c1 = oracle(w1, &wt(1)?, 1.0, pt(1))?;
    let couple1 = CoupleReport::from_oracle("L1(w1) | Lp(W_theta2)", 1.0, pt(1), &c1);
    let c2 = oracle(&wt(0)?, &wt(3)?, pt(0), pt(3))?;
    let couple2 = CoupleReport::from_oracle("Lp(W_theta1) | Lp(W_theta4)", pt(0), pt(3), &c2);

    let p3 = pt(2);
    let q3 = p3 / (p3 - 1.0);
    let dual_w2 = wt(2)?.powf(1.0 - q3)?;
    let (gr1, gr2) = f.grids();
    let spec = InstanceSpec {
        y1: SpectralCone::P.into(),
        y2: SpectralCone::P.into(),
        w1: w2,
        w2: &dual_w2,
        r: 1.0,
        p: q3,
        degree: 4.min((gr1.n().min(gr2.n()) / 2 - 1) as u32),
    };
    let inst = random_instance(&mut trial_rng(seed, 0), gr1, gr2, &spec)?;
    let weights = SplitWeights::reduce(w2, &dual_w2, None, None, q3)?;
    let cfg = SplitConfig::new(p3)?;
    let inf_end = split_inf(&inst.f, &inst.g, &inst.h, &weights, &cfg)?;
    let couple3 = CoupleReport {
        label: "Lp(W_theta3) | Linf(w2)".into(),
        r: p3,
        p: f64::INFINITY,
        c1: inf_end.c1,
        c2: inf_end.c2,
        objective: inf_end.objective(),
        method: "split_inf:predual".into(),
    };

    let end = oracle(w1, w2, 1.0, f64::INFINITY)?;
    let endpoint = CoupleReport::from_oracle("L1(w1) | Linf(w2)", 1.0, f64::INFINITY, &end);
    Ok(GlueReport {
        thetas,
        hypothesis,
        couples: vec![couple1, couple2, couple3],
        inf_end,
        endpoint,
    })
}
