//! Littlewood-Paley projections and the related multiplier families.

use crate::field::{lp_of, propagate, weighted_norm, Weight};
use crate::smooth::{fall, step};
use crate::{Error, Field, Freq, Grid, Result, C64};

const INNER: f64 = 0.75;
const OUTER: f64 = 8.0 / 3.0;

/// Low-pass profile: 1 for r <= 3/4, 0 for r >= 4/3.
pub fn low_profile(r: f64) -> f64 {
    fall(r, INNER, 4.0 / 3.0)
}

/// Annular bump supported in (3/4, 8/3); dyadic dilates telescope to 1.
pub fn band_profile(r: f64) -> f64 {
    low_profile(0.5 * r) - low_profile(r)
}

fn norm(xi: Freq) -> f64 {
    (xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
}

fn dyadic(j: i32) -> f64 {
    2f64.powi(j)
}

/// Band indices whose annuli meet the nonzero lattice frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandRange {
    pub lo: i32,
    pub hi: i32,
}

impl BandRange {
    pub fn of(grid: &Grid) -> Self {
        let smallest = grid.dk();
        let largest = grid.dk() * (grid.n() as f64 / 2.0) * 2f64.sqrt();
        let mut lo = (smallest / OUTER).log2().floor() as i32;
        while dyadic(lo) * OUTER <= smallest {
            lo += 1;
        }
        let mut hi = (largest / INNER).log2().ceil() as i32;
        while dyadic(hi) * INNER >= largest {
            hi -= 1;
        }
        Self { lo, hi }
    }

    pub fn contains(&self, j: i32) -> bool {
        (self.lo..=self.hi).contains(&j)
    }

    pub fn iter(&self) -> impl Iterator<Item = i32> {
        self.lo..=self.hi
    }
}

pub fn try_project_band(f: &Field, j: i32) -> Result<Field> {
    let range = BandRange::of(f.grid());
    if !range.contains(j) {
        return Err(Error::OutOfRange { j, lo: range.lo, hi: range.hi });
    }
    let s = dyadic(-j);
    Ok(f.multiply_real(|xi| band_profile(norm(xi) * s)))
}

/// P_j; out-of-range indices give the zero field and a logged warning.
pub fn project_band(f: &Field, j: i32) -> Field {
    try_project_band(f, j).unwrap_or_else(|e| {
        log::warn!("project_band: {e}");
        Field::zeros(*f.grid(), f.repr())
    })
}

/// P_{<j}.
pub fn project_low(f: &Field, j: i32) -> Field {
    let s = dyadic(-j);
    f.multiply_real(|xi| low_profile(norm(xi) * s))
}

/// Largest deviation of the resolvable dyadic sum from 1 over nonzero lattice frequencies.
pub fn partition_error(grid: &Grid) -> f64 {
    let range = BandRange::of(grid);
    (1..grid.len())
        .map(|i| {
            let r = norm(grid.freq(i));
            let s: f64 = range.iter().map(|j| band_profile(r * dyadic(-j))).sum();
            (s - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

/// Lower and upper bounds of the sum of squared band profiles over nonzero lattice frequencies.
pub fn frame_bounds(grid: &Grid) -> (f64, f64) {
    let range = BandRange::of(grid);
    (1..grid.len())
        .map(|i| {
            let r = norm(grid.freq(i));
            range.iter().map(|j| band_profile(r * dyadic(-j)).powi(2)).sum::<f64>()
        })
        .fold((f64::INFINITY, 0.0), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn bands(f: &Field) -> Vec<Field> {
    BandRange::of(f.grid()).iter().map(|j| project_band(f, j).to_physical()).collect()
}

/// Square function (sum_j |P_j f|^2)^(1/2), returned as a physical field.
pub fn square_function(f: &Field) -> Field {
    let parts = bands(f);
    let g = *f.grid();
    let values = (0..g.len())
        .map(|i| C64::new(parts.iter().map(|p| p.values()[i].norm_sqr()).sum::<f64>().sqrt(), 0.0))
        .collect();
    Field::from_values(g, values, crate::Repr::Physical)
}

/// Maximal function sup_j |P_{<j} f| over the resolvable range.
pub fn maximal_function(f: &Field) -> Field {
    let g = *f.grid();
    let range = BandRange::of(&g);
    let mut out = vec![0.0f64; g.len()];
    for j in range.lo..=range.hi + 1 {
        let p = project_low(f, j).to_physical();
        for (o, v) in out.iter_mut().zip(p.values()) {
            *o = o.max(v.norm());
        }
    }
    Field::from_values(g, out.into_iter().map(|v| C64::new(v, 0.0)).collect(), crate::Repr::Physical)
}

/// ||P_j f||_p / (2^{2j(1/q - 1/p)} ||P_j f||_q).
pub fn bernstein_ratio(f: &Field, j: i32, p: f64, q: f64) -> Result<f64> {
    let pj = project_band(f, j).to_physical();
    if pj.is_zero() {
        return Err(Error::UndefinedRatio(format!("band {j} projection vanishes")));
    }
    if p == q {
        return Ok(1.0);
    }
    let area = f.grid().cell_area();
    let np = lp_of(pj.values().iter().map(|v| v.norm()), p, area);
    let nq = lp_of(pj.values().iter().map(|v| v.norm()), q, area);
    let expo = 2.0 * j as f64 * (1.0 / q - 1.0 / p);
    Ok(np / (2f64.powf(expo) * nq))
}

/// Z: 1 on [0,1], 1/r on [2, inf), exp(-s(r) log r) in between.
pub fn z_blend(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        1.0 / r
    } else {
        (-step(r - 1.0) * r.ln()).exp()
    }
}

/// Fractional integration family: multiplier t^{a/2} Z(sqrt(t)|xi|)^a.
pub fn lambda_multiplier(xi: Freq, alpha: f64, t: f64) -> f64 {
    if alpha == 0.0 {
        return 1.0;
    }
    t.powf(0.5 * alpha) * z_blend(t.sqrt() * norm(xi)).powf(alpha)
}

pub fn lambda_op(f: &Field, alpha: f64, t: f64) -> Field {
    if alpha == 0.0 {
        return f.clone();
    }
    f.multiply_real(|xi| lambda_multiplier(xi, alpha, t))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GagnirSides {
    pub lhs: f64,
    pub rhs: f64,
    pub contaminated: bool,
}

/// Both sides of ||U(-t)(x f)||_4^2 <= ||U(-t) f||_inf ||U(-t)(|x|^2 f)||_2.
pub fn check_gagnir(f: &Field, t: f64) -> GagnirSides {
    let contaminated = weighted_norm(f, Weight::Square, 2.0).contaminated;
    let x1 = propagate(&f.map_physical(|x, v| v * x[0]), -t).to_physical();
    let x2 = propagate(&f.map_physical(|x, v| v * x[1]), -t).to_physical();
    let mags = x1.values().iter().zip(x2.values()).map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt());
    let l4 = lp_of(mags, 4.0, f.grid().cell_area());
    let sup = propagate(f, -t).linf();
    let sq = propagate(&f.map_physical(|x, v| v * (x[0] * x[0] + x[1] * x[1])), -t).l2();
    GagnirSides { lhs: l4 * l4, rhs: sup * sq, contaminated }
}
