use std::fmt;
use std::str::FromStr;

use super::{glue_exponent, glue_weight, uniform_fiber_constant, Condition, FiberVariable, RectFamily, Weight1D, Weight2D};
use crate::error::{invalid, Error, Result};
use crate::weights::ArcFamily;

/// Theorems whose hypotheses can be checked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremId {
    /// `(H_p, H_inf)` with weights `a u b`: two-dimensional `A_p`, `A_1`, BMO logs, fiber `A_inf`.
    Rght,
    /// `(H^r(w1), H^p(w2))` for `r <= 1 < p`: `w1 in A_inf`, `w2 in A_p`, both two-dimensional.
    Lft,
    /// Fiberwise version of `Lft`.
    OneNaib,
    /// Fiberwise conditions for the `(L_p, L_inf)` end.
    InfNeibAllQ,
    /// `(H_1(w1), H_inf(w2))`: `w1, w2 in A_1` and `w1 w2 in A_inf`.
    Glue,
}

impl TheoremId {
    pub const ALL: [Self; 5] = [Self::Rght, Self::Lft, Self::OneNaib, Self::InfNeibAllQ, Self::Glue];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::Rght => "rght",
            TheoremId::Lft => "lft",
            TheoremId::OneNaib => "one_naib",
            TheoremId::InfNeibAllQ => "inf_neib_all_q",
            TheoremId::Glue => "glue",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownTheorem(s.to_string()))
    }
}

/// Pass/fail cut-offs for measured constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub ap: f64,
    pub a1: f64,
    pub reverse_holder: f64,
    pub bmo: f64,
    /// Ratio between consecutive refinements above which a constant counts as unbounded.
    pub growth: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            ap: 50.0,
            a1: 50.0,
            reverse_holder: 10.0,
            bmo: 5.0,
            growth: 1.25,
        }
    }
}

impl Thresholds {
    fn for_condition(&self, c: Condition) -> f64 {
        match c {
            Condition::Ap(_) => self.ap,
            Condition::A1 => self.a1,
            Condition::ReverseHolder(_) => self.reverse_holder,
            Condition::BmoLog => self.bmo,
        }
    }
}

/// Weights and exponents a theorem is checked against.
///
/// `w1`, `w2` are the two-variable weights of the couple; `a` and `b` hold the
/// one-variable factors whose logarithms must lie in BMO, labelled for the report.
#[derive(Debug, Clone)]
pub struct HypothesisInput {
    pub w1: Weight2D,
    pub w2: Weight2D,
    pub a: Vec<(String, Weight1D)>,
    pub b: Vec<(String, Weight1D)>,
    pub p: f64,
    pub delta: f64,
    /// Candidate exponents for the auxiliary `A_l` / `A_m` conditions.
    pub exponent_sweep: Vec<f64>,
    /// Interpolation parameters whose glue weights are reported alongside `glue`.
    pub thetas: Vec<f64>,
    pub thresholds: Thresholds,
}

impl HypothesisInput {
    pub fn new(w1: Weight2D, w2: Weight2D, p: f64) -> Self {
        Self {
            w1,
            w2,
            a: Vec::new(),
            b: Vec::new(),
            p,
            delta: 1.0,
            exponent_sweep: vec![1.5, 2.0, 3.0, 4.0, 8.0],
            thetas: Vec::new(),
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisEntry {
    pub name: String,
    pub condition: String,
    pub constant: f64,
    pub threshold: f64,
    pub pass: bool,
    pub family_size: usize,
    /// Constants measured on coarser grids, ending with the reported one.
    pub trend: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub theorem: TheoremId,
    pub shape: (usize, usize),
    pub entries: Vec<HypothesisEntry>,
}

impl HypothesisReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &HypothesisEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    pub fn entry(&self, name: &str) -> Option<&HypothesisEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// `key: value` lines, one block per entry.
    pub fn to_key_values(&self, prefix: &str) -> Vec<(String, String)> {
        let mut out = vec![
            (format!("{prefix}theorem"), self.theorem.to_string()),
            (format!("{prefix}all_pass"), self.all_pass().to_string()),
        ];
        for e in &self.entries {
            let k = format!("{prefix}{}", e.name);
            out.push((format!("{k}.condition"), e.condition.clone()));
            out.push((format!("{k}.constant"), e.constant.to_string()));
            out.push((format!("{k}.threshold"), e.threshold.to_string()));
            out.push((format!("{k}.pass"), e.pass.to_string()));
            out.push((format!("{k}.family_size"), e.family_size.to_string()));
            if e.trend.len() > 1 {
                let t: Vec<String> = e.trend.iter().map(|v| v.to_string()).collect();
                out.push((format!("{k}.trend"), t.join(",")));
            }
        }
        out
    }
}

struct Builder<'a> {
    input: &'a HypothesisInput,
    rect: RectFamily,
    entries: Vec<HypothesisEntry>,
}

impl Builder<'_> {
    fn push(&mut self, name: &str, cond: Condition, label: String, constant: f64, family_size: usize) {
        let threshold = self.input.thresholds.for_condition(cond);
        self.entries.push(HypothesisEntry {
            name: name.to_string(),
            condition: label,
            constant,
            threshold,
            pass: constant.is_finite() && constant <= threshold,
            family_size,
            trend: vec![constant],
        });
    }

    fn two_d(&mut self, name: &str, w: &Weight2D, cond: Condition) -> Result<()> {
        let c = w.condition_constant(cond, &self.rect)?;
        let size = self.rect.len();
        self.push(name, cond, format!("{cond} on rectangles"), c, size);
        Ok(())
    }

    fn fiber(&mut self, name: &str, w: &Weight2D, var: FiberVariable, cond: Condition) -> Result<()> {
        let c = uniform_fiber_constant(w, var, cond)?;
        let (n1, n2) = w.shape();
        let (len, count) = match var {
            FiberVariable::Z2 => (n2, n1),
            FiberVariable::Z1 => (n1, n2),
        };
        let size = ArcFamily::dyadic(len).len() * count;
        let which = match var {
            FiberVariable::Z2 => "in z2 uniformly over z1",
            FiberVariable::Z1 => "in z1 uniformly over z2",
        };
        self.push(name, cond, format!("{cond} {which}"), c, size);
        Ok(())
    }

    fn bmo_factors(&mut self) -> Result<()> {
        let input = self.input;
        for (label, w) in input.a.iter().chain(&input.b) {
            let fam = ArcFamily::dyadic(w.n());
            let c = w.condition_constant(Condition::BmoLog, &fam)?;
            self.push(&format!("bmo_log_{label}"), Condition::BmoLog, "BMO(log) on arcs".into(), c, fam.len());
        }
        Ok(())
    }

    /// Smallest exponent of the sweep whose uniform constants all pass; else the largest one.
    fn sweep(&mut self, name: &str, weights: &[&Weight2D], var: FiberVariable) -> Result<()> {
        let mut sweep: Vec<f64> = self.input.exponent_sweep.iter().copied().filter(|&e| e >= 1.0).collect();
        sweep.sort_by(f64::total_cmp);
        if sweep.is_empty() {
            return Err(invalid("exponent_sweep", "needs at least one exponent >= 1"));
        }
        let mut chosen = None;
        for &e in &sweep {
            let cond = if e == 1.0 { Condition::A1 } else { Condition::Ap(e) };
            let mut worst = 0.0f64;
            for w in weights {
                worst = worst.max(uniform_fiber_constant(w, var, cond)?);
            }
            chosen = Some((cond, worst));
            if worst <= self.input.thresholds.for_condition(cond) {
                break;
            }
        }
        let (cond, worst) = chosen.expect("sweep is nonempty");
        let (n1, n2) = weights[0].shape();
        let (len, count) = match var {
            FiberVariable::Z2 => (n2, n1),
            FiberVariable::Z1 => (n1, n2),
        };
        let which = match var {
            FiberVariable::Z2 => "in z2 uniformly over z1",
            FiberVariable::Z1 => "in z1 uniformly over z2",
        };
        let size = ArcFamily::dyadic(len).len() * count;
        self.push(name, cond, format!("{cond} {which} (best of sweep)"), worst, size);
        Ok(())
    }
}

/// Measures every numbered hypothesis of `theorem` on the given weights.
pub fn hypothesis_check(theorem: TheoremId, input: &HypothesisInput) -> Result<HypothesisReport> {
    if !(input.p > 1.0) {
        return Err(invalid("p", format!("need p > 1, got {}", input.p)));
    }
    let shape = input.w1.shape();
    if input.w2.shape() != shape {
        return Err(Error::ShapeMismatch {
            expected: format!("{shape:?}"),
            got: format!("{:?}", input.w2.shape()),
        });
    }
    let mut b = Builder {
        input,
        rect: RectFamily::dyadic(shape.0, shape.1),
        entries: Vec::new(),
    };
    let p = input.p;
    let rh = Condition::ReverseHolder(input.delta);
    match theorem {
        TheoremId::Rght => {
            b.two_d("u1_ap", &input.w1, Condition::Ap(p))?;
            b.two_d("u2_a1", &input.w2, Condition::A1)?;
            b.bmo_factors()?;
            let mix = input.w2.powf(p)?.mul(&input.w1)?;
            b.fiber("u2p_u1_rh_z2", &mix, FiberVariable::Z2, rh)?;
        }
        TheoremId::Lft => {
            b.two_d("w1_ainf", &input.w1, rh)?;
            b.two_d("w2_ap", &input.w2, Condition::Ap(p))?;
        }
        TheoremId::OneNaib => {
            b.sweep("w1_al_z2", &[&input.w1], FiberVariable::Z2)?;
            b.fiber("w2_ap_z2", &input.w2, FiberVariable::Z2, Condition::Ap(p))?;
            b.sweep("w1_w2_am_z1", &[&input.w1, &input.w2], FiberVariable::Z1)?;
        }
        TheoremId::InfNeibAllQ => {
            let dual = input.w1.powf(1.0 / (1.0 - p))?;
            let integ = input.w1.mean().max(input.w2.mean()).max(dual.mean());
            b.entries.push(HypothesisEntry {
                name: "integrable".into(),
                condition: "w1, w2, w1^{1/(1-p)} in L^1".into(),
                constant: integ,
                threshold: f64::INFINITY,
                pass: integ.is_finite(),
                family_size: 1,
                trend: vec![integ],
            });
            let mix = input.w2.powf(p)?.mul(&input.w1)?;
            b.fiber("w2p_w1_rh_z2", &mix, FiberVariable::Z2, rh)?;
            b.fiber("w1_ap_z2", &input.w1, FiberVariable::Z2, Condition::Ap(p))?;
            b.fiber("w2_a1_z2", &input.w2, FiberVariable::Z2, Condition::A1)?;
            b.bmo_factors()?;
            b.fiber("w1_bmo_log_z1", &input.w1, FiberVariable::Z1, Condition::BmoLog)?;
            b.fiber("w2_bmo_log_z1", &input.w2, FiberVariable::Z1, Condition::BmoLog)?;
        }
        TheoremId::Glue => {
            b.two_d("w1_a1", &input.w1, Condition::A1)?;
            b.two_d("w2_a1", &input.w2, Condition::A1)?;
            let prod = input.w1.mul(&input.w2)?;
            b.two_d("w1w2_ainf", &prod, rh)?;
            for &theta in &input.thetas {
                let gw = glue_weight(&input.w1, &input.w2, theta)?;
                b.two_d(&format!("glue_{theta}_ap"), &gw, Condition::Ap(glue_exponent(theta)))?;
            }
        }
    }
    Ok(HypothesisReport {
        theorem,
        shape,
        entries: b.entries,
    })
}

/// Runs [`hypothesis_check`] on successively refined grids and flags constants that keep
/// growing: an entry fails if its last refinement ratio exceeds `thresholds.growth` and the
/// sequence is increasing.
pub fn hypothesis_check_refined(
    theorem: TheoremId,
    sizes: &[usize],
    build: impl Fn(usize) -> Result<HypothesisInput>,
) -> Result<HypothesisReport> {
    if sizes.is_empty() {
        return Err(invalid("sizes", "need at least one grid size"));
    }
    let mut reports = Vec::with_capacity(sizes.len());
    let mut growth = Thresholds::default().growth;
    for &n in sizes {
        let input = build(n)?;
        growth = input.thresholds.growth;
        reports.push(hypothesis_check(theorem, &input)?);
    }
    let mut last = reports.pop().expect("nonempty");
    for entry in &mut last.entries {
        let mut trend: Vec<f64> = reports
            .iter()
            .filter_map(|r| r.entry(&entry.name).map(|e| e.constant))
            .collect();
        trend.push(entry.constant);
        if trend.len() > 1 {
            let increasing = trend.windows(2).all(|w| w[1] >= w[0]);
            let prev = trend[trend.len() - 2];
            let ratio = if prev > 0.0 { entry.constant / prev } else { 1.0 };
            if increasing && ratio > growth {
                entry.pass = false;
            }
        }
        entry.trend = trend;
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::Grid1D;

    fn ones(n: usize) -> HypothesisInput {
        let g = Grid1D::new(n).unwrap();
        let mut input = HypothesisInput::new(Weight2D::ones(g, g), Weight2D::ones(g, g), 2.0);
        input.a = vec![("a".into(), Weight1D::ones(g))];
        input.b = vec![("b".into(), Weight1D::ones(g))];
        input.thetas = vec![0.5];
        input
    }

    #[test]
    fn unit_weights_pass_everything() {
        let input = ones(16);
        for t in TheoremId::ALL {
            let r = hypothesis_check(t, &input).unwrap();
            assert!(r.all_pass(), "{t}");
            for e in &r.entries {
                if e.name == "integrable" {
                    assert_eq!(e.constant, 1.0);
                } else if e.condition.starts_with("BMO") {
                    assert_eq!(e.constant, 0.0, "{}", e.name);
                } else {
                    assert_eq!(e.constant, 1.0, "{}", e.name);
                }
                assert!(e.family_size > 0);
            }
        }
        let glue = hypothesis_check(TheoremId::Glue, &input).unwrap();
        assert_eq!(glue.entry("w1w2_ainf").unwrap().constant, 1.0);
    }

    #[test]
    fn theorem_ids_parse() {
        assert_eq!("one_naib".parse::<TheoremId>().unwrap(), TheoremId::OneNaib);
        assert!(matches!("wolff".parse::<TheoremId>(), Err(Error::UnknownTheorem(_))));
    }
}
