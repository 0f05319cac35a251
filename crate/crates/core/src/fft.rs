//! Unitary 2D FFT on square arrays with a shared plan cache.

use crate::C64;
use std::sync::LazyLock;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

static PLANS: LazyLock<Mutex<HashMap<usize, Plans>>> = LazyLock::new(|| Mutex::new(HashMap::new()));

fn plans(n: usize) -> Plans {
    let mut cache = PLANS.lock().unwrap();
    cache
        .entry(n)
        .or_insert_with(|| {
            let mut p = FftPlanner::new();
            (p.plan_fft_forward(n), p.plan_fft_inverse(n))
        })
        .clone()
}

fn transpose(data: &mut [C64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// In-place 2D transform of an n x n row-major array, scaled by 1/n so that
/// the transform is unitary in both directions.
pub fn fft2(data: &mut [C64], n: usize, forward: bool) {
    assert_eq!(data.len(), n * n);
    let (fwd, inv) = plans(n);
    let plan = if forward { fwd } else { inv };
    let mut scratch = vec![C64::default(); plan.get_inplace_scratch_len()];
    plan.process_with_scratch(data, &mut scratch);
    transpose(data, n);
    plan.process_with_scratch(data, &mut scratch);
    transpose(data, n);
    let s = 1.0 / n as f64;
    for v in data.iter_mut() {
        *v *= s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_lands_on_its_index() {
        let n = 8;
        let mut d: Vec<C64> = (0..n * n)
            .map(|idx| {
                let (a, b) = ((idx / n) as f64, (idx % n) as f64);
                C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (2.0 * a - 3.0 * b) / n as f64)
            })
            .collect();
        fft2(&mut d, n, true);
        for (idx, v) in d.iter().enumerate() {
            let expect = if idx == 2 * n + (n - 3) { n as f64 } else { 0.0 };
            assert!((v.re - expect).abs() < 1e-12 && v.im.abs() < 1e-12);
        }
    }
}
