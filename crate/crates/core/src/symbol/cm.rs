//! Finite-difference estimates of Coifman-Meyer norms and class constants.

use super::{radius, PointFn, Symbol};
use crate::{Freq, Result};
use rand::Rng;

/// Random points on spheres of the given radii in R^{2 * arity}.
pub fn sample_shells(arity: usize, radii: &[f64], per_shell: usize, seed: u64) -> Vec<Vec<Vec<Freq>>> {
    let mut rng = crate::testkit::rng(seed);
    radii
        .iter()
        .map(|&r| {
            (0..per_shell)
                .map(|_| {
                    let mut v: Vec<f64> = (0..2 * arity).map(|_| gauss(&mut rng)).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter_mut().for_each(|x| *x *= r / n);
                    v.chunks(2).map(|c| [c[0], c[1]]).collect()
                })
                .collect()
        })
        .collect()
}

fn gauss(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.gen_range(1e-12..1.0);
    let v: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

/// All multi-indices over `dims` coordinates with total order <= `max_order`.
fn multi_indices(dims: usize, max_order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; dims]];
    let mut frontier = vec![vec![0; dims]];
    for _ in 0..max_order {
        let mut next = Vec::new();
        for a in &frontier {
            let start = a.iter().rposition(|&x| x > 0).unwrap_or(0);
            for d in start..dims {
                let mut b = a.clone();
                b[d] += 1;
                next.push(b);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// Central stencil (offsets in units of h, weights times h^order).
fn stencil(order: usize) -> &'static [(f64, f64)] {
    match order {
        0 => &[(0.0, 1.0)],
        1 => &[(-1.0, -0.5), (1.0, 0.5)],
        2 => &[(-1.0, 1.0), (0.0, -2.0), (1.0, 1.0)],
        3 => &[(-2.0, -0.5), (-1.0, 1.0), (1.0, -1.0), (2.0, 0.5)],
        4 => &[(-2.0, 1.0), (-1.0, -4.0), (0.0, 6.0), (1.0, -4.0), (2.0, 1.0)],
        _ => panic!("derivative order above 4 not supported"),
    }
}

fn derivative(m: &PointFn, p: &[Freq], alpha: &[usize], h: f64) -> f64 {
    let flat: Vec<f64> = p.iter().flat_map(|x| x.iter().copied()).collect();
    let active: Vec<(usize, &'static [(f64, f64)])> =
        alpha.iter().enumerate().filter(|(_, &a)| a > 0).map(|(d, &a)| (d, stencil(a))).collect();
    let order: usize = alpha.iter().sum();
    let mut acc = num_complex::Complex64::default();
    let mut idx = vec![0usize; active.len()];
    let mut q = flat.clone();
    loop {
        let mut w = 1.0;
        q.copy_from_slice(&flat);
        for (k, &(d, st)) in active.iter().enumerate() {
            let (off, wt) = st[idx[k]];
            q[d] += off * h;
            w *= wt;
        }
        let pts: Vec<Freq> = q.chunks(2).map(|c| [c[0], c[1]]).collect();
        acc += m(&pts) * w;
        let mut k = 0;
        loop {
            if k == active.len() {
                return acc.norm() / h.powi(order as i32);
            }
            idx[k] += 1;
            if idx[k] < active[k].1.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Sum of the Euclidean lengths of the frequency components.
fn weight(p: &[Freq]) -> f64 {
    p.iter().map(|x| (x[0] * x[0] + x[1] * x[1]).sqrt()).sum()
}

const STEP: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct CmNorm {
    pub value: f64,
    /// Maximum weighted derivative per total order.
    pub by_order: Vec<f64>,
}

/// Max over samples and |alpha| <= max_order of (sum |p_i|)^{|alpha|} |d^alpha m|.
pub fn cm_norm(m: &Symbol, max_order: usize, samples: &[Vec<Freq>]) -> Result<CmNorm> {
    let f = m.closure()?;
    let alphas = multi_indices(2 * m.arity, max_order);
    let mut by_order = vec![0.0f64; max_order + 1];
    for p in samples {
        let r = radius(p);
        if r == 0.0 {
            continue;
        }
        let w = weight(p);
        for a in &alphas {
            let ord: usize = a.iter().sum();
            let v = w.powi(ord as i32) * derivative(&f, p, a, STEP * r);
            by_order[ord] = by_order[ord].max(v);
        }
    }
    Ok(CmNorm { value: by_order.iter().copied().fold(0.0, f64::max), by_order })
}

/// Norms over the sample set contracted toward the origin by 2^{-level}.
pub fn cm_refinement(m: &Symbol, max_order: usize, samples: &[Vec<Freq>], levels: usize) -> Result<Vec<f64>> {
    (0..levels)
        .map(|l| {
            let s = 0.5f64.powi(l as i32);
            let scaled: Vec<Vec<Freq>> =
                samples.iter().map(|p| p.iter().map(|x| [s * x[0], s * x[1]]).collect()).collect();
            cm_norm(m, max_order, &scaled).map(|c| c.value)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub pass: bool,
    /// Smallest constant working on the low region.
    pub c_low: f64,
    /// Smallest constant working on r >= 2.
    pub c_high: f64,
    /// Per-shell constants (radius, constant).
    pub shells: Vec<(f64, f64)>,
    /// Fitted power-law growth of the constant at the open ends of the sampled range.
    pub growth_low: f64,
    pub growth_high: f64,
    /// Largest |m| on r <= c / sqrt(t), for m_t classes.
    pub vanishing_max: f64,
}

const GROWTH_LIMIT: f64 = 0.5;
const SHELLS_PER_OCTAVE: usize = 1;

fn shell_constant(f: &PointFn, pts: &[Vec<Freq>], k: i32, alphas: &[Vec<usize>]) -> f64 {
    let mut c = 0.0f64;
    for p in pts {
        let r = radius(p);
        let w = weight(p);
        for a in alphas {
            let ord: usize = a.iter().sum();
            let d = derivative(f, p, a, STEP * r);
            c = c.max(d / w.powi(k - ord as i32));
        }
    }
    c
}

fn growth(shells: &[(f64, f64)], from_end: bool) -> f64 {
    if shells.len() < 3 {
        return 0.0;
    }
    let top = shells.iter().map(|s| s.1).fold(0.0, f64::max);
    let floor = 1e-12 * top + 1e-300;
    let (a, b) = if from_end {
        (shells[shells.len() - 3], shells[shells.len() - 1])
    } else {
        (shells[2], shells[0])
    };
    ((b.1 + floor) / (a.1 + floor)).ln() / (b.0 / a.0).ln().abs()
}

/// Sampled verification of |d^a m| <= C r^{k-|a|} (low region) and C r^{k'-|a|} (r >= 2).
pub fn check_class(m: &Symbol, k: i32, k_prime: i32, t: Option<f64>, order: usize) -> Result<ClassReport> {
    let f = m.closure()?;
    let alphas = multi_indices(2 * m.arity, order);
    let per_shell = 24;
    let low_start = match t {
        Some(t) => 1.0 / t.sqrt(),
        None => 2f64.powi(-8),
    };
    let mut radii = Vec::new();
    let mut r = low_start;
    while r < 2.0 - 1e-12 {
        radii.push(r);
        r *= 2f64.powf(1.0 / SHELLS_PER_OCTAVE as f64);
    }
    let low_samples = sample_shells(m.arity, &radii, per_shell, 11);
    let low: Vec<(f64, f64)> = radii
        .iter()
        .zip(&low_samples)
        .map(|(&r, pts)| (r, shell_constant(&f, pts, k, &alphas)))
        .collect();
    let high_radii: Vec<f64> = (1..=8).map(|i| 2f64.powi(i)).collect();
    let high_samples = sample_shells(m.arity, &high_radii, per_shell, 12);
    let high: Vec<(f64, f64)> = high_radii
        .iter()
        .zip(&high_samples)
        .map(|(&r, pts)| (r, shell_constant(&f, pts, k_prime, &alphas)))
        .collect();
    let c_low = low.iter().map(|s| s.1).fold(0.0, f64::max);
    let c_high = high.iter().map(|s| s.1).fold(0.0, f64::max);
    let growth_low = if t.is_none() { growth(&low, false) } else { 0.0 };
    let growth_high = growth(&high, true);
    let vanishing_max = match t {
        Some(t) => {
            let inner: Vec<f64> = (1..=4).map(|i| 0.9 * i as f64 / 4.0 / t.sqrt()).collect();
            sample_shells(m.arity, &inner, per_shell, 13)
                .iter()
                .flatten()
                .map(|p| f(p).norm())
                .fold(0.0, f64::max)
        }
        None => 0.0,
    };
    let pass = c_low.is_finite()
        && c_high.is_finite()
        && growth_low <= GROWTH_LIMIT
        && growth_high <= GROWTH_LIMIT
        && vanishing_max <= 1e-12;
    let mut shells = low;
    shells.extend(high);
    Ok(ClassReport { pass, c_low, c_high, shells, growth_low, growth_high, vanishing_max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::{build_q, Linear};
    use crate::C64;

    #[test]
    fn multi_index_count() {
        // C(4 + 4, 4) multi-indices of order <= 4 in four variables
        assert_eq!(multi_indices(4, 4).len(), 70);
        assert_eq!(multi_indices(6, 2).len(), 28);
    }

    #[test]
    fn derivative_of_polynomial() {
        let f: PointFn = std::sync::Arc::new(|p: &[Freq]| C64::new(p[0][0].powi(3) * p[1][1], 0.0));
        let p = vec![[1.5, 0.0], [0.0, 2.0]];
        let d = derivative(&f, &p, &[2, 0, 0, 1], 1e-3);
        assert!((d - 6.0 * 1.5).abs() < 1e-4);
    }

    #[test]
    fn constant_symbol_norm() {
        let s = sample_shells(2, &[0.5, 1.0, 4.0], 10, 1);
        let n = cm_norm(&Symbol::one(2), 2, &s.concat()).unwrap();
        assert!((n.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degree_zero_is_stable_and_degree_minus_one_diverges() {
        let s = sample_shells(2, &[1.0], 20, 2).concat();
        let good = Symbol::real("g", 2, |p| p[0][0] / (p[0][0].hypot(p[0][1]) + p[1][0].hypot(p[1][1])));
        let r = cm_refinement(&good, 2, &s, 6).unwrap();
        assert!(r.iter().all(|v| (v / r[0] - 1.0).abs() < 1e-3), "{r:?}");
        let bad = Symbol::real("b", 2, |p| 1.0 / (p[0][0].hypot(p[0][1]) + p[1][0].hypot(p[1][1])));
        let r = cm_refinement(&bad, 0, &s, 6).unwrap();
        assert!(r[5] > 30.0 * r[0]);
    }

    #[test]
    fn q_is_in_its_class_and_not_a_smaller_one() {
        let q = build_q(Linear::default()).unwrap();
        let ok = check_class(&q, 1, 0, None, 2).unwrap();
        assert!(ok.pass, "{ok:?}");
        let wrong = check_class(&q, 2, 0, None, 2).unwrap();
        assert!(!wrong.pass);
    }
}
