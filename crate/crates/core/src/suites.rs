//! Measured-ratio suites for the implicit constants of the linear and
//! multilinear estimates.
//!
//! Every suite evaluates a ratio ||lhs|| / ||rhs|| on a deterministic corpus
//! and reports one value per sweep parameter (the max over the corpus). The
//! values are lower bounds for the hidden constants; [`crate::baseline`]
//! stores them and later runs are compared against the stored numbers.

use crate::field::{lp_of, propagate};
use crate::lp::{bernstein_ratio, check_gagnir, lambda_op, maximal_function, project_band, square_function, BandRange};
use crate::pseudo::{
    apply_bilinear_with, apply_trilinear_with, measure_bilinear, measure_trilinear, model_operator, ApplicationMethod,
    CostGuard, Exponents, ModelVariant, Trilinear, TrilinearKernel,
};
use crate::resonance::{build_cutoffs, PhaseSpec};
use crate::smooth::fall;
use crate::symbol::{build_q, class_exemplar, norm2, q_separable, sample_shells, FlagSymbol, Linear, Symbol};
use crate::testkit::{random_field, random_localized, random_packets};
use crate::{Field, Grid, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteConfig {
    pub trials: usize,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { trials: 100, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuitePoint {
    pub label: String,
    pub value: f64,
}

/// How a suite is judged against its baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// Every value at most the stored maximum.
    Bounded,
    /// Every value within a factor 2 of its stored counterpart, and the
    /// values of each group within a factor 2 of each other.
    Uniform,
    /// Every value at most twice the stored maximum of its group.
    Capped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub criterion: Criterion,
    pub points: Vec<SuitePoint>,
}

pub const UNIFORM_FACTOR: f64 = 2.0;

impl SuiteOutcome {
    fn new(name: &str, criterion: Criterion) -> Self {
        Self { name: name.into(), criterion, points: Vec::new() }
    }

    fn push(&mut self, label: impl Into<String>, value: f64) {
        self.points.push(SuitePoint { label: label.into(), value });
    }

    pub fn max(&self) -> f64 {
        self.points.iter().map(|p| p.value).fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.points.iter().map(|p| p.value).fold(f64::INFINITY, f64::min)
    }

    /// Largest max / min over the groups of the sweep.
    pub fn spread(&self) -> f64 {
        self.groups().iter().map(|g| self.group_max(g) / self.group_min(g)).fold(1.0, f64::max)
    }

    /// Group names: the label up to its last '/', empty when there is none.
    pub fn groups(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for p in &self.points {
            let g = group_of(&p.label).to_string();
            if !out.contains(&g) {
                out.push(g);
            }
        }
        out
    }

    pub fn group_max(&self, group: &str) -> f64 {
        self.in_group(group).fold(0.0, f64::max)
    }

    pub fn group_min(&self, group: &str) -> f64 {
        self.in_group(group).fold(f64::INFINITY, f64::min)
    }

    fn in_group<'a>(&'a self, group: &'a str) -> impl Iterator<Item = f64> + 'a {
        self.points.iter().filter(move |p| group_of(&p.label) == group).map(|p| p.value)
    }
}

pub fn group_of(label: &str) -> &str {
    label.rsplit_once('/').map_or("", |(g, _)| g)
}

fn holder2() -> Exponents {
    Exponents::new(&[4.0, 4.0], 2.0)
}

fn holder3() -> Exponents {
    Exponents::new(&[4.0, 4.0, 2.0], 1.0)
}

/// Bilinear Hoelder ratios of q (separable path) under refinement 16 -> 32 -> 64
/// at fixed box size, and of the cutoff-weighted symbol chi^T q at 16 and 32.
pub fn coifman_meyer(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("coifman_meyer", Criterion::Uniform);
    let q = q_separable(Linear::default())?;
    let guard = CostGuard::default();
    for n in [16, 32, 64] {
        let g = Grid::new(16.0, n)?;
        let m = measure_bilinear(&g, &holder2(), cfg.trials, cfg.seed, |f, h| {
            apply_bilinear_with(&q, f, h, ApplicationMethod::Separable, &guard)
        })?;
        out.push(format!("q/N{n}"), m.max_ratio);
    }
    let fam = build_cutoffs(&PhaseSpec::quadratic(1, 1), 1.0, 0.1, 0.1)?;
    let chi_t = fam.symbols()[2].clone();
    let cut = chi_t.product(&build_q(Linear::default())?)?;
    for n in [16, 32] {
        let g = Grid::new(16.0, n)?;
        let sampled = cut.to_sampled(&g)?;
        let m = measure_bilinear(&g, &holder2(), cfg.trials, cfg.seed, |f, h| {
            apply_bilinear_with(&sampled, f, h, ApplicationMethod::Direct, &guard)
        })?;
        out.push(format!("chiT_q/N{n}"), m.max_ratio);
    }
    Ok(out)
}

/// Hoelder ratios of p -> q(sqrt(t) p) for t in {1, 4, 16}.
pub fn scaled_symbol(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("scaled_symbol", Criterion::Uniform);
    let g = Grid::new(16.0, 32)?;
    let q = build_q(Linear::default())?;
    let guard = CostGuard::default();
    for t in [1.0f64, 4.0, 16.0] {
        let m = q.dilate(t.sqrt())?.to_sampled(&g)?;
        let r = measure_bilinear(&g, &holder2(), cfg.trials, cfg.seed, |f, h| {
            apply_bilinear_with(&m, f, h, ApplicationMethod::Direct, &guard)
        })?;
        out.push(format!("t{t}"), r.max_ratio);
    }
    Ok(out)
}

/// Ratio of the class exemplar m_t^{-1,-2} times t^{-1/2}, t in {1, 4, 16, 64}.
pub fn decay_exemplar(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("exemplar_decay", Criterion::Capped);
    let g = Grid::new(64.0, 32)?;
    let guard = CostGuard::default();
    for t in [1.0f64, 4.0, 16.0, 64.0] {
        let m = class_exemplar(2, -1, -2, t).to_sampled(&g)?;
        let r = measure_bilinear(&g, &holder2(), cfg.trials, cfg.seed, |f, h| {
            apply_bilinear_with(&m, f, h, ApplicationMethod::Direct, &guard)
        })?;
        out.push(format!("t{t}"), r.max_ratio / t.sqrt());
    }
    Ok(out)
}

/// Degree-0 angular factor lambda (1 + c a1 / (|a| + |b|)).
fn tilted(c: f64, lambda: f64) -> Symbol {
    Symbol::real("tilted", 2, move |p| {
        let r = p[0][0].hypot(p[0][1]) + p[1][0].hypot(p[1][1]);
        if r == 0.0 {
            lambda
        } else {
            lambda * (1.0 + c * p[0][0] / r)
        }
    })
}

/// Trilinear ratio divided by the flag norm for flag symbols lambda * m over
/// two base shapes; linear scaling shows as a flat sequence per shape.
pub fn flag_linearity(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("flag_linearity", Criterion::Uniform);
    let g = Grid::new(12.0, 12)?;
    let s2 = sample_shells(2, &[0.5, 1.0, 2.0], 40, cfg.seed).concat();
    let s3 = sample_shells(3, &[0.5, 1.0, 2.0], 40, cfg.seed).concat();
    let guard = CostGuard::default();
    for (shape, a, b) in [("A", 0.5, 0.5), ("B", 1.0, 2.0)] {
        for lambda in [0.25, 1.0, 4.0, 16.0] {
            let flag = FlagSymbol::new(Symbol::one(3), tilted(a, lambda), tilted(b, 1.0))?;
            let norm = flag.fs_norm(2, &s2, &s3)?;
            let m = Trilinear::Flag(flag);
            let r = measure_trilinear(&g, &holder3(), cfg.trials, cfg.seed, |f1, f2, f3| {
                apply_trilinear_with(&m, f1, f2, f3, ApplicationMethod::Separable, &guard)
            })?;
            out.push(format!("{shape}/x{lambda}"), r.max_ratio / norm);
        }
    }
    Ok(out)
}

/// Model operator (variant 2) ratio over the gap sweep J = 0..=5.
pub fn model_gap(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("model_gap", Criterion::Capped);
    let g = Grid::new(32.0, 64)?;
    for gap in 0..=5 {
        let r = measure_trilinear(&g, &holder3(), cfg.trials, cfg.seed, |f1, f2, f3| {
            model_operator(ModelVariant::LowHigh, gap, f1, f2, f3)
        })?;
        out.push(format!("J{gap}"), r.max_ratio);
    }
    Ok(out)
}

/// Projected flag operator: the flag symbol switched off where
/// |(eta, sigma)| > 4 |xi|; L^inf x L^inf x L^2 -> L^2 ratio.
pub fn flag_projected(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("flag_projected", Criterion::Bounded);
    let g = Grid::new(12.0, 12)?;
    let flag = FlagSymbol::new(Symbol::one(3), tilted(1.0, 1.0), tilted(1.0, 1.0))?;
    let kernel = TrilinearKernel::new(
        g,
        &|p| {
            let inner = (norm2(p[1]) + norm2(p[2])).sqrt();
            let outer = norm2(p[0]).sqrt();
            let gate = if outer == 0.0 { 0.0 } else { fall(inner / outer, 2.0, FS_THRESHOLD) };
            flag.eval(p).unwrap() * gate
        },
        &CostGuard::default(),
    )?;
    let exps = Exponents::new(&[f64::INFINITY, f64::INFINITY, 2.0], 2.0);
    let r = measure_trilinear(&g, &exps, cfg.trials, cfg.seed, |f1, f2, f3| Ok(kernel.apply(f1, f2, f3)))?;
    out.push("threshold4", r.max_ratio);
    Ok(out)
}

/// Ratio |(eta, sigma)| / |xi| beyond which the projected flag symbol vanishes.
pub const FS_THRESHOLD: f64 = 4.0;

/// Bernstein ratios (p, q) = (inf, 2) and (4, 2), max over random fields, per band.
pub fn bernstein(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("bernstein", Criterion::Bounded);
    let g = Grid::new(32.0, 64)?;
    let fields: Vec<Field> = (0..cfg.trials).map(|i| random_field(&g, cfg.seed + i as u64, None)).collect();
    for (p, q) in [(f64::INFINITY, 2.0), (4.0, 2.0)] {
        for j in BandRange::of(&g).iter() {
            let mut worst = 0.0f64;
            for f in &fields {
                worst = worst.max(bernstein_ratio(f, j, p, q)?);
            }
            out.push(format!("p{p}-q{q}/j{j}"), worst);
        }
    }
    Ok(out)
}

fn localized_corpus(g: &Grid, cfg: &SuiteConfig) -> Vec<Field> {
    (0..cfg.trials)
        .map(|i| {
            let seed = cfg.seed + i as u64;
            if i % 2 == 0 {
                random_localized(g, seed, 2.0 + (i % 5) as f64)
            } else {
                random_packets(g, seed, 1 + i % 4, 1.0 + (i % 3) as f64, 4.0, 2.0)
            }
        })
        .collect()
}

/// ||Lambda_t^{-1} f||_p / (t^{1/2 + 1/p - 1/q} ||f||_q), and the same with
/// the free flow applied first, for (p, q) = (4, 4/3) and (inf, 2).
pub fn lambda_smoothing(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("lambda_smoothing", Criterion::Bounded);
    let g = Grid::new(64.0, 64)?;
    let corpus = localized_corpus(&g, cfg);
    for (name, p, q) in [("p4-q4/3", 4.0, 4.0 / 3.0), ("pinf-q2", f64::INFINITY, 2.0)] {
        for t in [1.0f64, 4.0, 16.0, 64.0] {
            let scale = t.powf(0.5 + 1.0 / p - 1.0 / q);
            let (mut plain, mut flowed) = (0.0f64, 0.0f64);
            for f in &corpus {
                let denom = scale * f.lp(q);
                plain = plain.max(lambda_op(f, 1.0, t).lp(p) / denom);
                flowed = flowed.max(lambda_op(&propagate(f, t), 1.0, t).lp(p) / denom);
            }
            out.push(format!("{name}/t{t}"), plain);
            out.push(format!("flow-{name}/t{t}"), flowed);
        }
    }
    Ok(out)
}

/// ||P_j e^{it Delta} f||_1 / (2^{2j} t ||f||_1) over a (j, t) sweep with 2^{2j} t >= 1.
pub fn band_dispersive(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("band_dispersive", Criterion::Bounded);
    let g = Grid::new(64.0, 64)?;
    let corpus = localized_corpus(&g, cfg);
    let area = g.cell_area();
    for j in BandRange::of(&g).iter() {
        for t in [0.5f64, 1.0, 2.0, 4.0, 8.0, 16.0] {
            if 4f64.powi(j) * t < 1.0 {
                continue;
            }
            let mut worst = 0.0f64;
            for f in &corpus {
                let band = project_band(&propagate(f, t), j).to_physical();
                let num = lp_of(band.values().iter().map(|v| v.norm()), 1.0, area);
                worst = worst.max(num / (4f64.powi(j) * t * f.lp(1.0)));
            }
            out.push(format!("j{j}/t{t}"), worst);
        }
    }
    Ok(out)
}

/// ||Mf||_p / ||f||_p and ||Sf||_p / ||f||_p for p in {2, 4}.
pub fn maximal_and_square(cfg: &SuiteConfig) -> Result<(SuiteOutcome, SuiteOutcome)> {
    let mut max = SuiteOutcome::new("maximal", Criterion::Bounded);
    let mut sq = SuiteOutcome::new("square_function", Criterion::Bounded);
    let g = Grid::new(32.0, 64)?;
    let fields: Vec<Field> = (0..cfg.trials)
        .map(|i| {
            let seed = cfg.seed + i as u64;
            if i % 2 == 0 {
                random_field(&g, seed, Some(1 + (i as i64 % 31)))
            } else {
                random_localized(&g, seed, 1.0 + (i % 6) as f64)
            }
        })
        .collect();
    for p in [2.0, 4.0] {
        let (mut wm, mut ws) = (0.0f64, 0.0f64);
        for f in &fields {
            let n = f.lp(p);
            wm = wm.max(maximal_function(f).lp(p) / n);
            ws = ws.max(square_function(f).lp(p) / n);
        }
        max.push(format!("p{p}"), wm);
        sq.push(format!("p{p}"), ws);
    }
    Ok((max, sq))
}

/// lhs / rhs of the weighted interpolation inequality at t in {1, 4}.
pub fn gagnir(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::new("gagnir", Criterion::Bounded);
    let g = Grid::new(64.0, 64)?;
    let corpus = localized_corpus(&g, cfg);
    for t in [1.0, 4.0] {
        let mut worst = 0.0f64;
        for f in &corpus {
            let s = check_gagnir(f, t);
            if s.rhs > 0.0 {
                worst = worst.max(s.lhs / s.rhs);
            }
        }
        out.push(format!("t{t}"), worst);
    }
    Ok(out)
}

/// Names of all suites, in evaluation order.
pub const SUITES: [&str; 12] = [
    "coifman_meyer",
    "scaled_symbol",
    "exemplar_decay",
    "flag_linearity",
    "model_gap",
    "flag_projected",
    "bernstein",
    "lambda_smoothing",
    "band_dispersive",
    "maximal",
    "square_function",
    "gagnir",
];

pub fn run_all(cfg: &SuiteConfig) -> Result<Vec<SuiteOutcome>> {
    let (max, sq) = maximal_and_square(cfg)?;
    Ok(vec![
        coifman_meyer(cfg)?,
        scaled_symbol(cfg)?,
        decay_exemplar(cfg)?,
        flag_linearity(cfg)?,
        model_gap(cfg)?,
        flag_projected(cfg)?,
        bernstein(cfg)?,
        lambda_smoothing(cfg)?,
        band_dispersive(cfg)?,
        max,
        sq,
        gagnir(cfg)?,
    ])
}
