//! Outer functions, inner-outer factorization and analytic partitions of unity.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::report::KeyValues;
use crate::spectral::{analytic_completion, analytic_leakage, riesz};
use crate::torus::{io, Grid1D, TorusFn1D};
use crate::weights::Weight1D;

/// Default relative floor applied to `|f|` before taking logarithms.
pub const DEFAULT_EPS: f64 = 1e-12;

/// Boundary values of an outer function together with the modulus it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterFn {
    values: TorusFn1D,
    modulus: Weight1D,
}

impl OuterFn {
    pub fn function(&self) -> &TorusFn1D {
        &self.values
    }

    pub fn into_function(self) -> TorusFn1D {
        self.values
    }

    pub fn modulus(&self) -> &Weight1D {
        &self.modulus
    }

    /// Relative deviation of `|O|` from the prescribed modulus.
    pub fn modulus_error(&self) -> f64 {
        self.values
            .values()
            .iter()
            .zip(self.modulus.values())
            .map(|(v, w)| (v.norm() - w).abs() / w)
            .fold(0.0, f64::max)
    }

    pub fn leakage(&self) -> f64 {
        analytic_leakage(&self.values)
    }
}

fn exp_completion(grid: Grid1D, logs: &[f64], scale: f64) -> Result<TorusFn1D> {
    let l = TorusFn1D::from_real(grid, logs)?;
    Ok(analytic_completion(&l).map(|c| (c * scale).exp()))
}

/// `exp(L + i conj(L))` with `L = log w`.
pub fn outer_function(w: &Weight1D) -> OuterFn {
    let logs = w.ln();
    let values = exp_completion(w.grid(), &logs, 1.0).expect("logs of a valid weight are finite");
    OuterFn {
        values,
        modulus: w.clone(),
    }
}

/// Outer function with modulus `w^(1/power)`.
pub fn outer_root(w: &Weight1D, power: u32) -> Result<OuterFn> {
    if power == 0 {
        return Err(crate::error::invalid("power", "must be at least 1"));
    }
    let values = exp_completion(w.grid(), &w.ln(), 1.0 / power as f64)?;
    let modulus = w.powf(1.0 / power as f64)?;
    Ok(OuterFn { values, modulus })
}

/// Factorizes `f = theta * psi` with `psi = outer(max(|f|, eps max|f|))`.
pub fn inner_outer(f: &TorusFn1D, eps: f64) -> Result<(TorusFn1D, OuterFn)> {
    inner_outer_root(f, eps, 1)
}

/// Factorizes `f = theta * psi^power`, `psi` the outer `power`-th root of the regularized `|f|`.
pub fn inner_outer_root(f: &TorusFn1D, eps: f64, power: u32) -> Result<(TorusFn1D, OuterFn)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(crate::error::invalid("eps", format!("need 0 < eps < 1, got {eps}")));
    }
    let max = f.max_abs();
    if max == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let floor = eps * max;
    let modulus: Vec<f64> = f.values().iter().map(|v| v.norm().max(floor)).collect();
    let psi = outer_root(&Weight1D::new(f.grid(), modulus)?, power)?;
    let p = power as i32;
    let theta = f.zip_map(psi.function(), |a, b| a / b.powi(p));
    Ok((theta, psi))
}

/// One level of an analytic partition of unity: `phi = theta * psi^power`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionAtom {
    pub j: i32,
    pub phi: TorusFn1D,
    pub theta: TorusFn1D,
    /// `None` when `phi` vanishes identically.
    pub psi: Option<OuterFn>,
}

impl PartitionAtom {
    pub fn is_zero(&self) -> bool {
        self.psi.is_none()
    }

    /// `psi^k`, or zero for a vanishing atom.
    pub fn psi_pow(&self, k: i32) -> TorusFn1D {
        match &self.psi {
            Some(p) => p.function().map(|c| c.powi(k)),
            None => TorusFn1D::zeros(self.phi.grid()),
        }
    }
}

/// Measured constants of a partition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionConstants {
    /// `max_j max |phi_j|^(1/power) a 2^-j`.
    pub c_upper: f64,
    /// `max sum_j |phi_j|^(1/power) 2^j / a`.
    pub c_lower: f64,
    /// `max sum_j |phi_j|^(1/power)`.
    pub c_sum: f64,
    /// `max |sum_j phi_j - 1|`.
    pub sum_error: f64,
    /// Largest negative-frequency leakage among the atoms.
    pub leakage: f64,
    /// Largest `|theta| - 1` over points where `phi` is above the regularization floor.
    pub inner_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub atoms: Vec<PartitionAtom>,
    pub weight: Weight1D,
    pub power: u32,
    pub constants: PartitionConstants,
}

impl Partition {
    pub fn levels(&self) -> (i32, i32) {
        (self.atoms[0].j, self.atoms[self.atoms.len() - 1].j)
    }

    pub fn atom(&self, j: i32) -> Option<&PartitionAtom> {
        self.atoms.iter().find(|a| a.j == j)
    }

    pub fn manifest(&self) -> KeyValues {
        let (jmin, jmax) = self.levels();
        let c = &self.constants;
        let mut kv = KeyValues::new();
        kv.push("n", self.weight.n());
        kv.push("power", self.power);
        kv.push("jmin", jmin);
        kv.push("jmax", jmax);
        kv.push("c_upper", c.c_upper);
        kv.push("c_lower", c.c_lower);
        kv.push("c_sum", c.c_sum);
        kv.push("sum_error", c.sum_error);
        kv.push("leakage", c.leakage);
        kv.push("inner_defect", c.inner_defect);
        for a in &self.atoms {
            kv.push(format!("atom.{}", a.j), if a.is_zero() { "zero" } else { "active" });
        }
        kv
    }

    /// Writes `manifest.txt` plus `phi_<j>.torus`, `theta_<j>.torus` and `psi_<j>.torus` per atom.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|source| Error::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        self.manifest().save(&dir.join("manifest.txt"))?;
        for a in &self.atoms {
            io::save(&dir.join(format!("phi_{}.torus", a.j)), &a.phi)?;
            io::save(&dir.join(format!("theta_{}.torus", a.j)), &a.theta)?;
            io::save(&dir.join(format!("psi_{}.torus", a.j)), &a.psi_pow(1))?;
        }
        Ok(())
    }
}

/// Smallest level range `(floor log2 min a, ceil log2 max a)` accepted by [`build_partition`].
pub fn partition_levels(a: &Weight1D) -> (i32, i32) {
    (a.min().log2().floor() as i32, a.max().log2().ceil() as i32)
}

/// Telescoping partition of unity subordinate to the dyadic level sets of `a`.
///
/// `V_j` is the analytic part of the outer function with modulus `min(1, 2^(power (j - log2 a)))`,
/// replaced by the constant 1 when that modulus is identically 1. The atoms are
/// `phi_jmin = V_jmin` and `phi_j = V_j - V_{j-1}`, so the sum telescopes to `V_jmax = 1`.
pub fn build_partition(a: &Weight1D, jmin: i32, jmax: i32, power: u32) -> Result<Partition> {
    let (lo, hi) = partition_levels(a);
    if jmin > jmax || jmin > lo || jmax < hi {
        return Err(Error::PartitionRange {
            jmin,
            jmax,
            min: a.min(),
            max: a.max(),
        });
    }
    if power == 0 {
        return Err(crate::error::invalid("power", "must be at least 1"));
    }
    let grid = a.grid();
    let h: Vec<f64> = a.values().iter().map(|x| x.log2()).collect();
    let pw = power as f64;
    let v: Vec<TorusFn1D> = (jmin..=jmax)
        .into_par_iter()
        .map(|j| {
            let logs: Vec<f64> = h
                .iter()
                .map(|&hj| (pw * (j as f64 - hj)).min(0.0) * std::f64::consts::LN_2)
                .collect();
            if logs.iter().all(|&l| l == 0.0) {
                TorusFn1D::constant(grid, Complex64::new(1.0, 0.0))
            } else {
                riesz(&exp_completion(grid, &logs, 1.0).expect("finite logs"))
            }
        })
        .collect();

    let phis: Vec<(i32, TorusFn1D)> = (jmin..=jmax)
        .zip(0..)
        .map(|(j, i)| {
            let phi = if i == 0 { v[0].clone() } else { &v[i] - &v[i - 1] };
            (j, phi)
        })
        .collect();

    let atoms: Vec<PartitionAtom> = phis
        .into_par_iter()
        .map(|(j, phi)| -> Result<PartitionAtom> {
            if phi.is_zero() {
                return Ok(PartitionAtom {
                    j,
                    theta: TorusFn1D::constant(grid, Complex64::new(1.0, 0.0)),
                    phi,
                    psi: None,
                });
            }
            let (theta, psi) = inner_outer_root(&phi, DEFAULT_EPS, power)?;
            Ok(PartitionAtom {
                j,
                phi,
                theta,
                psi: Some(psi),
            })
        })
        .collect::<Result<_>>()?;

    let constants = measure(&atoms, a, power);
    Ok(Partition {
        atoms,
        weight: a.clone(),
        power,
        constants,
    })
}

fn measure(atoms: &[PartitionAtom], a: &Weight1D, power: u32) -> PartitionConstants {
    let n = a.n();
    let inv = 1.0 / power as f64;
    let mut c_upper = 0.0f64;
    let mut lower = vec![0.0; n];
    let mut sum_abs = vec![0.0; n];
    let mut total = vec![Complex64::new(0.0, 0.0); n];
    let mut leakage = 0.0f64;
    let mut inner_defect = 0.0f64;
    for atom in atoms {
        let scale = 2f64.powi(atom.j);
        let floor = DEFAULT_EPS * atom.phi.max_abs();
        for (i, (phi, theta)) in atom.phi.values().iter().zip(atom.theta.values()).enumerate() {
            let r = phi.norm().powf(inv);
            c_upper = c_upper.max(r * a.values()[i] / scale);
            lower[i] += r * scale;
            sum_abs[i] += r;
            total[i] += phi;
            if !atom.is_zero() && phi.norm() >= floor {
                inner_defect = inner_defect.max((theta.norm() - 1.0).abs());
            }
        }
        leakage = leakage.max(analytic_leakage(&atom.phi));
    }
    PartitionConstants {
        c_upper,
        c_lower: lower.iter().zip(a.values()).map(|(l, w)| l / w).fold(0.0, f64::max),
        c_sum: sum_abs.iter().copied().fold(0.0, f64::max),
        sum_error: total.iter().map(|t| (t - 1.0).norm()).fold(0.0, f64::max),
        leakage,
        inner_defect,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize) -> Grid1D {
        Grid1D::new(n).unwrap()
    }

    #[test]
    fn outer_of_constant() {
        let w = Weight1D::constant(g(32), 2.0).unwrap();
        let o = outer_function(&w);
        for v in o.function().values() {
            assert!((v - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn outer_of_one_minus_half_z() {
        // |1 - z/2| is the modulus of an outer polynomial; log|1 - z/2| has mean log 1 = 0,
        // so the outer function is exactly 1 - z/2.
        let gr = g(256);
        let w = Weight1D::from_fn(gr, |t| (Complex64::new(1.0, 0.0) - Complex64::from_polar(0.5, t)).norm()).unwrap();
        let o = outer_function(&w);
        let expect = TorusFn1D::from_fn(gr, |t| Complex64::new(1.0, 0.0) - Complex64::from_polar(0.5, t)).unwrap();
        assert!(o.function().max_diff(&expect) < 1e-12);
        assert!(o.modulus_error() < 1e-12);
        assert!(o.leakage() < 1e-12);
    }

    #[test]
    fn inner_outer_splits_monomial() {
        let gr = g(128);
        let f = TorusFn1D::from_fn(gr, |t| {
            let z = Complex64::from_polar(1.0, t);
            z.powi(3) * (2.0 + z)
        })
        .unwrap();
        let (theta, psi) = inner_outer(&f, DEFAULT_EPS).unwrap();
        let z3 = TorusFn1D::monomial(gr, 3);
        assert!(theta.max_diff(&z3) < 1e-12);
        let two_plus_z = TorusFn1D::from_fn(gr, |t| 2.0 + Complex64::from_polar(1.0, t)).unwrap();
        assert!(psi.function().max_diff(&two_plus_z) < 1e-12);
        assert!(matches!(inner_outer(&TorusFn1D::zeros(gr), 1e-12), Err(Error::ZeroFunction)));
    }

    #[test]
    fn partition_of_constant_weight() {
        let a = Weight1D::ones(g(64));
        let p = build_partition(&a, -1, 1, 8).unwrap();
        assert_eq!(p.atoms.len(), 3);
        assert!(p.atom(1).unwrap().is_zero());
        let phi0 = p.atom(0).unwrap().phi.values()[0];
        assert!((phi0.re - (1.0 - 2f64.powi(-8))).abs() < 1e-14);
        assert!(p.constants.sum_error < 1e-14);
    }

    #[test]
    fn partition_of_half_level() {
        let a = Weight1D::constant(g(64), 2f64.powf(5.5)).unwrap();
        let p = build_partition(&a, 5, 6, 8).unwrap();
        let (p5, p6) = (&p.atom(5).unwrap().phi, &p.atom(6).unwrap().phi);
        assert!((p5.values()[7].re - 2f64.powi(-4)).abs() < 1e-12);
        assert!((p6.values()[7].re - (1.0 - 2f64.powi(-4))).abs() < 1e-12);
        assert!(p.constants.sum_error < 1e-12);
        assert!(build_partition(&a, 6, 6, 8).is_err());
        assert!(build_partition(&a, 5, 5, 8).is_err());
    }

    #[test]
    fn partition_of_smooth_weight() {
        let a = Weight1D::from_fn(g(256), |t| (1.5 * t.cos()).exp()).unwrap();
        let (lo, hi) = partition_levels(&a);
        let p = build_partition(&a, lo, hi, 8).unwrap();
        assert!(p.constants.sum_error < 1e-10);
        assert!(p.constants.leakage < 1e-12);
        for atom in &p.atoms {
            if let Some(psi) = &atom.psi {
                let rebuilt = atom.theta.zip_map(psi.function(), |t, s| t * s.powi(8));
                assert!(rebuilt.max_diff(&atom.phi) <= 1e-8 * atom.phi.max_abs().max(1e-300));
            }
        }
        assert!(p.constants.c_upper.is_finite() && p.constants.c_lower.is_finite());
    }
}
