//! Deterministic test data: random fields and Gaussians.

use crate::{Field, Grid, Repr, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random complex Fourier coefficients, optionally restricted to |k_i| < `band`.
pub fn random_field(grid: &Grid, seed: u64, band: Option<i64>) -> Field {
    let mut r = rng(seed);
    let values = (0..grid.len())
        .map(|i| {
            let k = grid.wavenumbers(i);
            let keep = band.map_or(true, |b| k[0].abs() < b && k[1].abs() < b);
            let v = C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
            if keep {
                v
            } else {
                C64::default()
            }
        })
        .collect();
    Field::from_values(*grid, values, Repr::Frequency)
}

/// Random samples under a Gaussian envelope of width `w`.
pub fn random_localized(grid: &Grid, seed: u64, w: f64) -> Field {
    let mut r = rng(seed);
    let values = (0..grid.len())
        .map(|i| {
            let x = grid.point(i);
            let env = (-(x[0] * x[0] + x[1] * x[1]) / (2.0 * w * w)).exp();
            C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)) * env
        })
        .collect();
    Field::from_values(*grid, values, Repr::Physical)
}

/// Sum of a few randomly placed Gaussian packets with random carriers.
pub fn random_packets(grid: &Grid, seed: u64, count: usize, width: f64, spread: f64, kmax: f64) -> Field {
    let mut r = rng(seed);
    let mut acc = Field::zeros(*grid, Repr::Physical);
    for _ in 0..count {
        let c = [r.gen_range(-spread..spread), r.gen_range(-spread..spread)];
        let k = [r.gen_range(-kmax..kmax), r.gen_range(-kmax..kmax)];
        let amp = C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0));
        acc = acc.add(&gaussian(grid, width, c, k).scale(amp));
    }
    acc
}

/// exp(-|x-c|^2 / (2 w^2)) exp(i k.x).
pub fn gaussian(grid: &Grid, w: f64, center: [f64; 2], carrier: [f64; 2]) -> Field {
    Field::from_physical_fn(*grid, |x| {
        let d = [x[0] - center[0], x[1] - center[1]];
        let amp = (-(d[0] * d[0] + d[1] * d[1]) / (2.0 * w * w)).exp();
        C64::from_polar(amp, carrier[0] * x[0] + carrier[1] * x[1])
    })
}

/// Removes the zero-frequency coefficient.
pub fn zero_mean(f: &Field) -> Field {
    let mut v = f.to_frequency().into_values();
    v[0] = C64::default();
    Field::from_values(*f.grid(), v, Repr::Frequency)
}
