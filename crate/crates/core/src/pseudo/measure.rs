//! Empirical operator-norm ratios ||T(f..)||_r / prod ||f_i||_{p_i}.
//!
//! Ratios are lower bounds for the operator norm; they are compared across
//! parameters and against stored baselines, never against sharp constants.

use crate::testkit::{gaussian, random_packets, rng};
use crate::{Error, Field, Grid, Result};
use rand::Rng;

/// Lebesgue exponents of the inputs and of the output; `f64::INFINITY` for L^inf.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Exponents {
    pub inputs: Vec<f64>,
    pub output: f64,
}

impl Exponents {
    pub fn new(inputs: &[f64], output: f64) -> Self {
        Exponents { inputs: inputs.to_vec(), output }
    }

    /// Checks 1/r = sum 1/p_i.
    pub fn is_holder(&self) -> bool {
        let lhs = 1.0 / self.output;
        let rhs: f64 = self.inputs.iter().map(|p| 1.0 / p).sum();
        (lhs - rhs).abs() < 1e-12
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct BoundMeasurement {
    pub max_ratio: f64,
    pub mean_ratio: f64,
    pub trials: usize,
    /// Index of the input tuple attaining the maximum; adversarial tuples come last.
    pub worst: usize,
}

/// Random localized inputs, band-limited to a third of the lattice.
fn random_input(grid: &Grid, seed: u64) -> Field {
    let mut r = rng(seed);
    let count = r.gen_range(1..5);
    let spread = grid.length() / 8.0;
    random_packets(grid, seed ^ 0x5EED, count, grid.length() / 16.0, spread, grid.kmax() / 3.0)
}

/// Hand-built inputs: a single packet, packets at opposite carriers, a low
/// bump, each at a few carrier magnitudes.
fn adversarial_inputs(grid: &Grid, arity: usize) -> Vec<Vec<Field>> {
    let w = grid.length() / 12.0;
    let mut out = Vec::new();
    for frac in [0.0, 0.1, 0.25] {
        let k = grid.kmax() * frac;
        let plus = gaussian(grid, w, [0.0, 0.0], [k, 0.0]);
        let minus = gaussian(grid, w, [0.0, 0.0], [-k, 0.0]);
        let shifted = gaussian(grid, w, [w, 0.0], [0.0, k]);
        out.push(vec![plus.clone(); arity]);
        out.push((0..arity).map(|i| if i % 2 == 0 { plus.clone() } else { minus.clone() }).collect());
        out.push((0..arity).map(|i| if i == 0 { shifted.clone() } else { plus.clone() }).collect());
    }
    out
}

/// Largest and mean ratio over `trials` random tuples plus the adversarial set.
pub fn measure(
    grid: &Grid,
    arity: usize,
    exps: &Exponents,
    trials: usize,
    seed: u64,
    op: &dyn Fn(&[Field]) -> Result<Field>,
) -> Result<BoundMeasurement> {
    if exps.inputs.len() != arity {
        return Err(Error::Config(format!("{} input exponents for a {arity}-linear operator", exps.inputs.len())));
    }
    let mut tuples: Vec<Vec<Field>> = (0..trials)
        .map(|t| (0..arity).map(|i| random_input(grid, seed.wrapping_add((t * arity + i) as u64))).collect())
        .collect();
    tuples.extend(adversarial_inputs(grid, arity));
    let mut best = (0.0f64, 0usize);
    let mut sum = 0.0;
    for (i, inputs) in tuples.iter().enumerate() {
        let denom: f64 = inputs.iter().zip(&exps.inputs).map(|(f, p)| f.lp(*p)).product();
        if denom == 0.0 {
            continue;
        }
        let ratio = op(inputs)?.lp(exps.output) / denom;
        sum += ratio;
        if ratio > best.0 {
            best = (ratio, i);
        }
    }
    Ok(BoundMeasurement { max_ratio: best.0, mean_ratio: sum / tuples.len() as f64, trials: tuples.len(), worst: best.1 })
}

pub fn measure_bilinear(
    grid: &Grid,
    exps: &Exponents,
    trials: usize,
    seed: u64,
    op: impl Fn(&Field, &Field) -> Result<Field>,
) -> Result<BoundMeasurement> {
    measure(grid, 2, exps, trials, seed, &|f| op(&f[0], &f[1]))
}

pub fn measure_trilinear(
    grid: &Grid,
    exps: &Exponents,
    trials: usize,
    seed: u64,
    op: impl Fn(&Field, &Field, &Field) -> Result<Field>,
) -> Result<BoundMeasurement> {
    measure(grid, 3, exps, trials, seed, &|f| op(&f[0], &f[1], &f[2]))
}
