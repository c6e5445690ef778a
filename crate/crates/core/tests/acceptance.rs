//! End-to-end acceptance gate. Every criterion prints one `PASS`/`FAIL` line and returns the
//! CSV bytes it produced, so that the determinism criterion can rerun and compare them.

use std::time::Instant;

use ksplit_core::analytic::{build_partition, outer_function, partition_levels};
use ksplit_core::czd::{cz_decompose, cz_tail_check};
use ksplit_core::ksplit::{split_inf, SplitConfig, SplitWeights};
use ksplit_core::lemma::{default_rhos, verify_lemma};
use ksplit_core::oracle::{kconstant_sweep, solve, write_sweep_csv, OracleProblem, SweepSpec};
use ksplit_core::random::{random_instance, trial_rng, trig_poly_1d, trig_poly_2d, weight_1d, weight_2d, Instance, InstanceSpec};
use ksplit_core::report::write_csv;
use ksplit_core::spectral::{analytic_leakage, framed_project, hilbert, project_cone, Frame, SpectralCone};
use ksplit_core::torus::{Grid1D, TorusFn1D, TorusFn2D};
use ksplit_core::weights::{Arc, Weight1D, Weight2D, WeightSpec};
use ksplit_core::Complex64;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
    csv: Vec<u8>,
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = Vec::new();
    write_csv(&mut out, header, rows).unwrap();
    out
}

fn grid(n: usize) -> Grid1D {
    Grid1D::new(n).unwrap()
}

fn rel_diff_2d(a: &TorusFn2D, b: &TorusFn2D, scale: f64) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale.max(f64::MIN_POSITIVE)
}

fn rel_diff_1d(a: &TorusFn1D, b: &TorusFn1D, scale: f64) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max) / scale.max(f64::MIN_POSITIVE)
}

fn within_factor(a: f64, b: f64, factor: f64) -> bool {
    if a == 0.0 && b == 0.0 {
        return true;
    }
    a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0 && a / b <= factor && b / a <= factor
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let g = grid(64);
    let cones: Vec<SpectralCone> = SpectralCone::ALL.iter().flat_map(|c| [*c, c.complemented()]).collect();
    let mut worst = [0.0f64; 4];
    let mut rows = Vec::new();
    for i in 0..200u64 {
        let mut rng = trial_rng(101, i);
        let f = trig_poly_2d(&mut rng, g, g, 40, None);
        let scale = f.max_abs();
        let mut idem = 0.0f64;
        let mut split = 0.0f64;
        for &c in &cones {
            let p = project_cone(&f, c);
            idem = idem.max(rel_diff_2d(&project_cone(&p, c), &p, scale));
            let sum = &p + &project_cone(&f, c.complemented());
            split = split.max(rel_diff_2d(&sum, &f, scale));
        }

        let f1 = trig_poly_1d(&mut rng, g, 40, false);
        let hh = hilbert(&hilbert(&f1));
        let mean = f1.mean();
        let expected = f1.map(|v| -(v - mean));
        let hil = rel_diff_1d(&hh, &expected, f1.max_abs());

        let u = weight_2d(&mut rng, g, g, 5, 1.0);
        let frame = Frame::from_weight(&u);
        let mut framed = 0.0f64;
        for c in [SpectralCone::P, SpectralCone::P2, SpectralCone::QUADRANT] {
            let once = framed_project(&f, &frame, c).unwrap();
            let twice = framed_project(&once, &frame, c).unwrap();
            framed = framed.max(rel_diff_2d(&twice, &once, once.max_abs()));
        }
        let errs = [idem, split, hil, framed];
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
        rows.push(std::iter::once(i.to_string()).chain(errs.iter().map(|e| format!("{e:e}"))).collect());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = worst.iter().all(|&e| e <= 1e-10) && elapsed < 10.0;
    Outcome {
        pass,
        detail: format!(
            "idempotence {:.1e}, complement {:.1e}, H∘H {:.1e}, framed {:.1e}, {elapsed:.2}s",
            worst[0], worst[1], worst[2], worst[3]
        ),
        csv: csv(&["function", "idempotence", "complement", "hilbert_square", "framed_idempotence"], &rows),
    }
}

fn criterion_2() -> Outcome {
    let g = grid(1024);
    let mut worst = [0.0f64; 3];
    let mut rows = Vec::new();
    for i in 0..50u64 {
        let mut rng = trial_rng(202, i);
        let w1 = weight_1d(&mut rng, g, 12, 1.5);
        let w2 = weight_1d(&mut rng, g, 12, 1.5);
        let o1 = outer_function(&w1);
        let modulus = o1
            .function()
            .values()
            .iter()
            .zip(w1.values())
            .map(|(v, w)| (v.norm() - w).abs() / w)
            .fold(0.0, f64::max);
        let leak = analytic_leakage(o1.function());
        let prod = Weight1D::new(g, w1.values().iter().zip(w2.values()).map(|(a, b)| a * b).collect()).unwrap();
        let op = outer_function(&prod);
        let o2 = outer_function(&w2);
        let mult = op
            .function()
            .values()
            .iter()
            .zip(o1.function().values())
            .zip(o2.function().values())
            .map(|((p, a), b)| (p - a * b).norm() / p.norm())
            .fold(0.0, f64::max);
        let errs = [modulus, leak, mult];
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
        rows.push(std::iter::once(i.to_string()).chain(errs.iter().map(|e| format!("{e:e}"))).collect());
    }
    Outcome {
        pass: worst.iter().all(|&e| e <= 1e-8),
        detail: format!("modulus {:.1e}, leakage {:.1e}, multiplicativity {:.1e}", worst[0], worst[1], worst[2]),
        csv: csv(&["weight", "modulus_error", "leakage", "multiplicativity"], &rows),
    }
}

/// `(sum error, max leakage, [upper, lower, sum])`, recomputed from the atoms.
fn partition_measures(a: &Weight1D) -> (f64, f64, [f64; 3]) {
    let (lo, hi) = partition_levels(a);
    let part = build_partition(a, lo, hi, 8).unwrap();
    let n = a.n();
    let mut total = vec![Complex64::new(0.0, 0.0); n];
    let mut leak = 0.0f64;
    let mut upper = 0.0f64;
    let mut lower = vec![0.0; n];
    let mut sum = vec![0.0; n];
    for atom in &part.atoms {
        leak = leak.max(analytic_leakage(&atom.phi));
        let scale = 2f64.powi(atom.j);
        for (i, v) in atom.phi.values().iter().enumerate() {
            total[i] += v;
            let root = v.norm().powf(1.0 / 8.0);
            upper = upper.max(root * a.values()[i] / scale);
            lower[i] += root * scale / a.values()[i];
            sum[i] += root;
        }
    }
    let err = total.iter().map(|t| (t - 1.0).norm()).fold(0.0, f64::max);
    let max = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    (err, leak, [upper, max(&lower), max(&sum)])
}

fn criterion_3() -> Outcome {
    let fixtures = ["const", "power alpha=0.25", "power alpha=0.5", "exp-cos eps=1"];
    let mut pass = true;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for spec in fixtures {
        let ws: WeightSpec = spec.parse().unwrap();
        let mut consts = Vec::new();
        for n in [1024usize, 2048] {
            let a = ws.build_1d(grid(n)).unwrap();
            let (err, leak, c) = partition_measures(&a);
            pass &= err <= 1e-8 && leak <= 1e-8 && c.iter().all(|x| x.is_finite());
            rows.push(vec![
                spec.to_string(),
                n.to_string(),
                format!("{err:e}"),
                format!("{leak:e}"),
                c[0].to_string(),
                c[1].to_string(),
                c[2].to_string(),
            ]);
            consts.push(c);
        }
        let stable = (0..3).all(|i| within_factor(consts[0][i], consts[1][i], 2.0));
        pass &= stable;
        notes.push(format!("{spec}: upper {:.3}->{:.3}", consts[0][0], consts[1][0]));
    }
    Outcome {
        pass,
        detail: notes.join("; "),
        csv: csv(&["weight", "n", "sum_error", "leakage", "c_upper", "c_lower", "c_sum"], &rows),
    }
}

/// Maximal aligned dyadic arcs whose directly summed weighted average exceeds `lambda`.
fn scan_stopped(f: &TorusFn1D, w: &Weight1D, lambda: f64) -> Vec<Arc> {
    let n = f.n();
    let avg = |a: Arc| {
        let mass: f64 = (a.start..a.start + a.len).map(|i| f.values()[i].norm() * w.values()[i]).sum();
        let weight: f64 = (a.start..a.start + a.len).map(|i| w.values()[i]).sum();
        mass / weight
    };
    let mut out = Vec::new();
    let mut len = n;
    while len >= 1 {
        for j in 0..n / len {
            let arc = Arc { start: j * len, len };
            let covered = out.iter().any(|o: &Arc| o.start <= arc.start && arc.start < o.start + o.len);
            if !covered && avg(arc) > lambda {
                out.push(arc);
            }
        }
        len /= 2;
    }
    out.sort_by_key(|a| a.start);
    out
}

fn criterion_4() -> Outcome {
    let g = grid(256);
    let mut pass = true;
    let mut worst_add = 0.0f64;
    let mut worst_good = 0.0f64;
    let mut worst_omega = 0.0f64;
    let mut mismatches = 0;
    let mut rows = Vec::new();
    for i in 0..100u64 {
        let mut rng = trial_rng(404, i);
        let f = trig_poly_1d(&mut rng, g, 24, false);
        let w = weight_1d(&mut rng, g, 8, 1.5);
        let u = weight_1d(&mut rng, g, 4, 0.5);
        let mean = f.values().iter().zip(w.values()).map(|(v, x)| v.norm() * x).sum::<f64>() / w.values().iter().sum::<f64>();
        let lambda = mean * (0.5 + 3.5 * rng.random::<f64>());
        let res = cz_decompose(&f, &w, lambda).unwrap();
        let add = rel_diff_1d(&(&res.g0 + &res.g1), &f, f.max_abs());
        let good = res.constants.good_bound / res.constants.doubling;
        let tail = cz_tail_check(&res, &Frame::from_weight(&u), &w).unwrap();
        let same = scan_stopped(&f, &w, lambda) == res.omega;
        mismatches += usize::from(!same);
        worst_add = worst_add.max(add);
        worst_good = worst_good.max(good);
        worst_omega = worst_omega.max(res.constants.omega_measure);
        pass &= add <= 1e-12 && good <= 1.0 && res.constants.omega_measure <= 1.0 + 1e-10 && tail.is_finite() && same;
        rows.push(vec![
            i.to_string(),
            lambda.to_string(),
            res.omega.len().to_string(),
            res.constants.good_bound.to_string(),
            res.constants.doubling.to_string(),
            res.constants.omega_measure.to_string(),
            tail.to_string(),
        ]);
    }
    Outcome {
        pass,
        detail: format!(
            "additivity {worst_add:.1e}, good/doubling {worst_good:.3}, λw(Ω)/∫|f|w {worst_omega:.3}, scan mismatches {mismatches}"
        ),
        csv: csv(&["trial", "lambda", "stopped", "good_bound", "doubling", "omega_measure", "tail_ratio"], &rows),
    }
}

fn unit_instance(n: usize, trial: u64) -> Instance {
    let g = grid(n);
    let ones = Weight2D::ones(g, g);
    let spec = InstanceSpec {
        y1: SpectralCone::P.into(),
        y2: SpectralCone::P.into(),
        w1: &ones,
        w2: &ones,
        r: 1.0,
        p: 2.0,
        degree: 6,
    };
    random_instance(&mut trial_rng(505, trial), g, g, &spec).unwrap()
}

fn mean_pow(f: &TorusFn2D, s: f64) -> f64 {
    (f.values().iter().map(|v| v.norm().powf(s)).sum::<f64>() / f.values().len() as f64).powf(1.0 / s)
}

/// Leakage of `f` outside `m >= 0 or k >= 0`, from the spectrum.
fn p_leakage(f: &TorusFn2D) -> f64 {
    let mut all = 0.0f64;
    let mut out = 0.0f64;
    for ((m, k), c) in f.spectrum().iter() {
        all = all.max(c.norm());
        if m < 0 && k < 0 {
            out = out.max(c.norm());
        }
    }
    if all == 0.0 {
        0.0
    } else {
        out / all
    }
}

struct SplitRun {
    objective: f64,
    instance: Instance,
}

fn criterion_5() -> (Outcome, Vec<SplitRun>) {
    let cfg = SplitConfig::new(2.0).unwrap();
    let mut pass = true;
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    let mut worst_time = 0.0f64;
    let mut worst_ratio = 1.0f64;
    for t in 0..20u64 {
        let mut cs = Vec::new();
        for n in [64usize, 128] {
            let inst = unit_instance(n, t);
            let weights = SplitWeights::trivial(&Weight2D::ones(grid(n), grid(n)), 2.0).unwrap();
            let start = Instant::now();
            let rep = split_inf(&inst.f, &inst.g, &inst.h, &weights, &cfg).unwrap();
            let secs = start.elapsed().as_secs_f64();
            worst_time = worst_time.max(secs);
            let sum = rel_diff_2d(&(&rep.g_prime + &rep.h_prime), &inst.f, inst.f.max_abs());
            let a = mean_pow(&inst.g, 1.0);
            let b = mean_pow(&inst.h, 2.0);
            let c1 = mean_pow(&rep.g_prime, 1.0) / a;
            let c2 = mean_pow(&rep.h_prime, 2.0) / b;
            let leak = p_leakage(&rep.g_prime).max(p_leakage(&rep.h_prime));
            pass &= (a - 1.0).abs() < 1e-10 && (b - 1.0).abs() < 1e-10;
            pass &= sum <= 1e-8 && leak <= 1e-6 && c1.is_finite() && c2.is_finite() && secs < 300.0;
            pass &= (c1 - rep.c1).abs() <= 1e-9 * c1.max(1.0) && (c2 - rep.c2).abs() <= 1e-9 * c2.max(1.0);
            rows.push(vec![t.to_string(), n.to_string(), c1.to_string(), c2.to_string(), format!("{sum:e}"), format!("{leak:e}")]);
            cs.push((c1, c2));
            if n == 64 {
                runs.push(SplitRun {
                    objective: c1.max(c2),
                    instance: inst,
                });
            }
        }
        let stable = within_factor(cs[0].0, cs[1].0, 2.0) && within_factor(cs[0].1, cs[1].1, 2.0);
        worst_ratio = worst_ratio.max((cs[0].0 / cs[1].0).max(cs[1].0 / cs[0].0)).max((cs[0].1 / cs[1].1).max(cs[1].1 / cs[0].1));
        pass &= stable;
    }

    let inst = unit_instance(64, 0);
    let zero = TorusFn2D::zeros(grid(64), grid(64));
    let weights = SplitWeights::trivial(&Weight2D::ones(grid(64), grid(64)), 2.0).unwrap();
    let rep = split_inf(&inst.f, &zero, &inst.f, &weights, &cfg).unwrap();
    let collapse = rep.g_prime.values().iter().all(|v| *v == Complex64::new(0.0, 0.0)) && rep.h_prime == inst.f;
    pass &= collapse;
    (
        Outcome {
            pass,
            detail: format!("worst refinement ratio {worst_ratio:.3}, slowest run {worst_time:.2}s, g = 0 collapse {collapse}"),
            csv: csv(&["instance", "n", "c1", "c2", "sum_error", "leakage"], &rows),
        },
        runs,
    )
}

fn criterion_6(runs: &[SplitRun]) -> Outcome {
    let g = grid(64);
    let ones = Weight2D::ones(g, g);
    let mut pass = true;
    let mut rows = Vec::new();
    let mut worst_gap = f64::INFINITY;
    let mut worst_hilbert = 0.0f64;
    for (i, run) in runs.iter().enumerate() {
        let inst = &run.instance;
        let prob = OracleProblem::new(
            inst.f.clone(),
            inst.g.clone(),
            inst.h.clone(),
            SpectralCone::P,
            SpectralCone::P,
            ones.clone(),
            ones.clone(),
            1.0,
            2.0,
        )
        .unwrap();
        let res = solve(&prob).unwrap();
        let oracle = (mean_pow(&res.g_prime, 1.0) / mean_pow(&inst.g, 1.0)).max(mean_pow(&res.h_prime, 2.0) / mean_pow(&inst.h, 2.0));
        pass &= (oracle - res.objective).abs() <= 1e-9 * oracle && oracle <= run.objective;
        worst_gap = worst_gap.min(run.objective - oracle);

        let hprob = OracleProblem { r: 2.0, ..prob };
        let h = solve(&hprob).unwrap();
        worst_hilbert = worst_hilbert.max(h.objective);
        pass &= h.objective <= 1.0 + 1e-8;
        rows.push(vec![i.to_string(), oracle.to_string(), run.objective.to_string(), h.objective.to_string()]);
    }
    Outcome {
        pass,
        detail: format!("smallest constructive - oracle gap {worst_gap:.4}, worst r = p = 2 objective {worst_hilbert:.12}"),
        csv: csv(&["instance", "oracle", "constructive", "oracle_r2_p2"], &rows),
    }
}

fn criterion_7() -> Outcome {
    let spec = SweepSpec::new("power", "power alpha={}", vec![0.0, 0.25, 0.5, 0.75, 0.95], 1.0, 2.0, 50, 32, 7);
    let rows = kconstant_sweep(&spec).unwrap();
    let worst: Vec<f64> = rows.iter().map(|r| r.oracle_max).collect();
    let pass = worst.windows(2).all(|w| w[1] > w[0]) && worst.iter().all(|x| x.is_finite());
    let mut out = Vec::new();
    write_sweep_csv(&mut out, &rows).unwrap();
    Outcome {
        pass,
        detail: format!("worst oracle constants {:?}", worst.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>()),
        csv: out,
    }
}

fn criterion_8() -> Outcome {
    let mut pass = true;
    let mut rows = Vec::new();
    let mut notes = Vec::new();
    for alpha in [-0.3, 0.3, 0.6] {
        let mut bounds = Vec::new();
        for n in [512usize, 1024] {
            let w = WeightSpec::Power { alpha, center: 1.0 }.build_1d(grid(n)).unwrap();
            let lemma = verify_lemma(&w, 0.5, 50, 8, &default_rhos(), 808).unwrap();
            let lo = lemma.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
            let hi = lemma.iter().map(|r| r.ratio).fold(0.0, f64::max);
            pass &= lo > 0.0 && hi.is_finite();
            rows.push(vec![alpha.to_string(), n.to_string(), lo.to_string(), hi.to_string()]);
            bounds.push((lo, hi));
        }
        pass &= within_factor(bounds[0].0, bounds[1].0, 2.0) && within_factor(bounds[0].1, bounds[1].1, 2.0);
        notes.push(format!("α={alpha}: [{:.4}, {:.4}]", bounds[1].0, bounds[1].1));
    }
    Outcome {
        pass,
        detail: notes.join("; "),
        csv: csv(&["alpha", "n", "ratio_min", "ratio_max"], &rows),
    }
}

fn run_all() -> Vec<Outcome> {
    let (c5, runs) = criterion_5();
    vec![criterion_1(), criterion_2(), criterion_3(), criterion_4(), c5, criterion_6(&runs), criterion_7(), criterion_8()]
}

#[test]
fn acceptance_criteria() {
    let first = run_all();
    let second = run_all();
    let identical = first.iter().zip(&second).all(|(a, b)| a.csv == b.csv);
    let bytes: usize = first.iter().map(|o| o.csv.len()).sum();
    let mut all = true;
    for (i, o) in first.iter().enumerate() {
        println!("criterion {}: {} ({})", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        all &= o.pass;
    }
    println!(
        "criterion 9: {} ({bytes} CSV bytes over eight criteria, identical on rerun: {identical})",
        if identical { "PASS" } else { "FAIL" }
    );
    assert!(all && identical, "acceptance criteria failed");
}
