use std::collections::HashMap;
use std::sync::{Arc, LazyLock, Mutex};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

type PlanKey = (usize, bool);

static PLANS: LazyLock<Mutex<(FftPlanner<f64>, HashMap<PlanKey, Arc<dyn Fft<f64>>>)>> =
    LazyLock::new(|| Mutex::new((FftPlanner::new(), HashMap::new())));

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut guard = PLANS.lock().unwrap_or_else(|e| e.into_inner());
    let (planner, cache) = &mut *guard;
    cache
        .entry((n, inverse))
        .or_insert_with(|| {
            if inverse {
                planner.plan_fft_inverse(n)
            } else {
                planner.plan_fft_forward(n)
            }
        })
        .clone()
}

/// Values to coefficients: c_m = (1/n) sum_k x_k e^{-2 pi i m k / n}, FFT order.
pub(crate) fn forward_1d(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    plan(n, false).process(&mut buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

/// Coefficients to values: x_k = sum_m c_m e^{2 pi i m k / n}.
pub(crate) fn inverse_1d(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut buf = coeffs.to_vec();
    plan(buf.len(), true).process(&mut buf);
    buf
}

fn transform_2d(data: &mut [Complex64], n1: usize, n2: usize, inverse: bool) {
    let rows = plan(n2, inverse);
    rows.process(data);
    let cols = plan(n1, inverse);
    let mut column = vec![Complex64::new(0.0, 0.0); n1];
    for i2 in 0..n2 {
        for (i1, slot) in column.iter_mut().enumerate() {
            *slot = data[i1 * n2 + i2];
        }
        cols.process(&mut column);
        for (i1, value) in column.iter().enumerate() {
            data[i1 * n2 + i2] = *value;
        }
    }
}

pub(crate) fn forward_2d(values: &[Complex64], n1: usize, n2: usize) -> Vec<Complex64> {
    let mut buf = values.to_vec();
    transform_2d(&mut buf, n1, n2, false);
    let s = 1.0 / (n1 * n2) as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

pub(crate) fn inverse_2d(coeffs: &[Complex64], n1: usize, n2: usize) -> Vec<Complex64> {
    let mut buf = coeffs.to_vec();
    transform_2d(&mut buf, n1, n2, true);
    buf
}
