//! Profile-form integration of the quadratic Schroedinger equation
//! d_t u + i Lap u = alpha Q(u,u) + beta Q(ubar,ubar) from t = 2, and the
//! diagnostic series tracked along the way.
//!
//! The profile is f = e^{it Lap} u, so d_t f = e^{it Lap} N(u). All
//! products run on the 2/3-dealiased lattice: inputs and outputs are
//! restricted to |k_i| < N/3, which makes the periodic product exact on the
//! retained modes.

use crate::field::{propagate, weighted_norm, Weight};
use crate::pseudo::apply_separable_periodic;
use crate::symbol::{q_separable, Linear, Symbol};
use crate::testkit::gaussian;
use crate::{Error, Field, Grid, Repr, Result, C64};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Largest allowed dt * max |xi|^2 over retained modes: one phase turn per step.
pub const STABILITY_CEILING: f64 = 2.0 * std::f64::consts::PI;
/// Growth of ||f||_2 over its initial value that aborts a run.
pub const INSTABILITY_GROWTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Nonlinearity {
    /// alpha Q(u,u) + beta Q(ubar,ubar)
    Paper,
    /// adds gamma Q(u,ubar)
    ResonantContrast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub length: f64,
    pub n: usize,
    pub epsilon: f64,
    pub width: f64,
    pub offset: [f64; 2],
    /// Complex coefficients as [re, im].
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub gamma: [f64; 2],
    pub mode: Nonlinearity,
    pub q: Linear,
    pub t0: f64,
    pub t_final: f64,
    pub dt: f64,
    pub output_every: f64,
    /// Extra output times, merged with the regular cadence.
    pub output_times: Vec<f64>,
}

impl Default for ExperimentConfig {
    /// The standard run: eps = 0.01, 32^2 on a box of side 16, T = 10.
    fn default() -> Self {
        ExperimentConfig {
            length: 16.0,
            n: 32,
            epsilon: 0.01,
            width: 1.0,
            offset: [0.0, 0.0],
            alpha: [1.0, 0.0],
            beta: [1.0, 0.0],
            gamma: [0.0, 0.0],
            mode: Nonlinearity::Paper,
            q: Linear::default(),
            t0: 2.0,
            t_final: 10.0,
            dt: 0.1,
            output_every: 1.0,
            output_times: Vec::new(),
        }
    }
}

pub fn complex(c: [f64; 2]) -> C64 {
    C64::new(c[0], c[1])
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.length, self.n)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if self.t0 != 2.0 {
            return Err(Error::Config(format!("initial time must be 2, got {}", self.t0)));
        }
        if !(self.epsilon >= 0.0) || !(self.width > 0.0) {
            return Err(Error::Config("epsilon must be >= 0 and width > 0".into()));
        }
        if !(self.dt > 0.0) || !(self.t_final >= self.t0) || !(self.output_every > 0.0) {
            return Err(Error::Config("need dt > 0, output_every > 0 and t_final >= 2".into()));
        }
        let kmax = grid.dk() * ((self.n as f64 / 3.0).ceil() - 1.0);
        let stiff = self.dt * 2.0 * kmax * kmax;
        if stiff > STABILITY_CEILING {
            return Err(Error::Config(format!(
                "dt * max|xi|^2 = {stiff:.3} exceeds the ceiling {STABILITY_CEILING:.3}"
            )));
        }
        if self.mode == Nonlinearity::Paper && self.gamma != [0.0, 0.0] {
            return Err(Error::Config("gamma is only used in resonant-contrast mode".into()));
        }
        Ok(())
    }

    /// Output times: the regular cadence, the extra times and t_final, sorted.
    pub fn output_schedule(&self) -> Vec<f64> {
        let mut out = vec![self.t0];
        let mut k = 1;
        loop {
            let t = self.t0 + k as f64 * self.output_every;
            if t > self.t_final + 1e-9 {
                break;
            }
            out.push(t);
            k += 1;
        }
        out.extend(self.output_times.iter().copied().filter(|t| *t > self.t0 && *t <= self.t_final));
        out.push(self.t_final);
        out.sort_by(f64::total_cmp);
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        out
    }
}

/// f(2) = u_*: eps times a Gaussian, restricted to the retained modes.
pub fn initial_profile(cfg: &ExperimentConfig) -> Result<Field> {
    let grid = cfg.grid()?;
    let u = gaussian(&grid, cfg.width, cfg.offset, [0.0, 0.0]).scale(C64::new(cfg.epsilon, 0.0));
    Ok(u.mask(&grid.dealias_mask()))
}

/// The separate contributions to d_t f.
#[derive(Debug, Clone)]
pub struct RhsParts {
    pub alpha: Field,
    pub beta: Field,
    pub gamma: Field,
}

impl RhsParts {
    pub fn total(&self) -> Field {
        self.alpha.add(&self.beta).add(&self.gamma)
    }
}

/// Right-hand side of the profile equation with the symbol and mask prepared once.
#[derive(Clone)]
pub struct Rhs {
    grid: Grid,
    mask: Vec<bool>,
    q: Symbol,
    alpha: C64,
    beta: C64,
    gamma: C64,
}

impl Rhs {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        let gamma = if cfg.mode == Nonlinearity::ResonantContrast { complex(cfg.gamma) } else { C64::default() };
        Ok(Rhs {
            grid,
            mask: grid.dealias_mask(),
            q: q_separable(cfg.q)?,
            alpha: complex(cfg.alpha),
            beta: complex(cfg.beta),
            gamma,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    fn q_product(&self, a: &Field, b: &Field) -> Field {
        apply_separable_periodic(&self.q, a, b).expect("q is separable").mask(&self.mask)
    }

    pub fn parts(&self, f: &Field, s: f64) -> RhsParts {
        let zero = Field::zeros(self.grid, Repr::Frequency);
        let u = propagate(&f.mask(&self.mask), -s);
        let ubar = u.conj();
        let term = |c: C64, a: &Field, b: &Field| {
            if c == C64::default() {
                zero.clone()
            } else {
                propagate(&self.q_product(a, b), s).scale(c)
            }
        };
        RhsParts { alpha: term(self.alpha, &u, &u), beta: term(self.beta, &ubar, &ubar), gamma: term(self.gamma, &u, &ubar) }
    }

    pub fn eval(&self, f: &Field, s: f64) -> Field {
        self.parts(f, s).total()
    }
}

/// d_t f at time s.
pub fn rhs_profile(f: &Field, s: f64, cfg: &ExperimentConfig) -> Result<Field> {
    if s < 2.0 {
        return Err(Error::Config(format!("rhs evaluated at s = {s} < 2")));
    }
    Ok(Rhs::new(cfg)?.eval(f, s))
}

/// One classical Runge-Kutta step; `d0` is the derivative at (t, f).
pub fn rk4_step(rhs: &Rhs, t: f64, f: &Field, d0: &Field, h: f64) -> Field {
    let c = |x: f64| C64::new(x, 0.0);
    let k1 = d0;
    let k2 = rhs.eval(&f.add(&k1.scale(c(h / 2.0))), t + h / 2.0);
    let k3 = rhs.eval(&f.add(&k2.scale(c(h / 2.0))), t + h / 2.0);
    let k4 = rhs.eval(&f.add(&k3.scale(c(h))), t + h);
    let incr = k1.add(&k2.scale(c(2.0))).add(&k3.scale(c(2.0))).add(&k4);
    f.add(&incr.scale(c(h / 6.0)))
}

/// Data handed to step observers: both end points and derivatives.
pub struct StepEvent<'a> {
    pub t0: f64,
    pub t1: f64,
    pub f0: &'a Field,
    pub f1: &'a Field,
    pub d0: &'a Field,
    pub d1: &'a Field,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub l2_f: f64,
    pub l2_xf: f64,
    pub l2_x2f: f64,
    pub linf_u: f64,
    pub t_linf_u: f64,
    pub cauchy_inc: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DiagnosticsSeries {
    pub rows: Vec<DiagnosticsRow>,
}

impl DiagnosticsSeries {
    fn push(&mut self, t: f64, f: &Field, prev: Option<&Field>) {
        let linf_u = propagate(f, -t).linf();
        self.rows.push(DiagnosticsRow {
            t,
            l2_f: f.l2(),
            l2_xf: weighted_norm(f, Weight::Bracket, 2.0).value,
            l2_x2f: weighted_norm(f, Weight::Square, 2.0).value,
            linf_u,
            t_linf_u: t * linf_u,
            cauchy_inc: prev.map_or(0.0, |p| f.sub(p).l2()),
        });
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for r in &self.rows {
            out.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
        }
        out.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Profiles in frequency representation.
    pub fields: Vec<Field>,
    pub diagnostics: DiagnosticsSeries,
}

pub fn integrate(cfg: &ExperimentConfig) -> Result<Trajectory> {
    integrate_with(cfg, |_| Ok(()))
}

/// Integrates from t = 2 to t_final, landing exactly on every output time,
/// and calls `observe` after each step.
pub fn integrate_with(cfg: &ExperimentConfig, mut observe: impl FnMut(&StepEvent) -> Result<()>) -> Result<Trajectory> {
    let rhs = Rhs::new(cfg)?;
    let schedule = cfg.output_schedule();
    let mut f = initial_profile(cfg)?;
    let initial_norm = f.l2();
    let mut t = cfg.t0;
    let mut d = rhs.eval(&f, t);
    let mut traj = Trajectory { times: vec![t], fields: vec![f.clone()], diagnostics: DiagnosticsSeries::default() };
    traj.diagnostics.push(t, &f, None);
    for &target in &schedule[1..] {
        while target - t > 1e-12 {
            let h = cfg.dt.min(target - t);
            // Snap tiny remainders onto the target to keep the cadence exact.
            let t1 = if target - (t + h) < 1e-9 * cfg.dt { target } else { t + h };
            let f1 = rk4_step(&rhs, t, &f, &d, t1 - t);
            let d1 = rhs.eval(&f1, t1);
            let norm = f1.l2();
            if !norm.is_finite() || (initial_norm > 0.0 && norm > INSTABILITY_GROWTH * initial_norm) {
                let last = traj.diagnostics.rows.last().copied();
                return Err(Error::Instability {
                    t: t1,
                    detail: format!("||f||_2 = {norm:.6e} against initial {initial_norm:.6e}; last diagnostics {last:?}"),
                });
            }
            observe(&StepEvent { t0: t, t1, f0: &f, f1: &f1, d0: &d, d1: &d1 })?;
            t = t1;
            f = f1;
            d = d1;
        }
        let prev = traj.fields.last().cloned();
        traj.diagnostics.push(t, &f, prev.as_ref());
        traj.times.push(t);
        traj.fields.push(f.clone());
    }
    Ok(traj)
}

/// Cauchy increments ||f(t_{k+1}) - f(t_k)||_2 between consecutive outputs.
pub fn scattering_indicator(traj: &Trajectory) -> Result<Vec<f64>> {
    if traj.fields.len() < 3 {
        return Err(Error::Config("scattering indicator needs at least three outputs".into()));
    }
    Ok(traj.fields.windows(2).map(|w| w[1].sub(&w[0]).l2()).collect())
}

/// t ||u(t)||_inf at each output time.
pub fn decay_indicator(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    if traj.fields.len() < 3 {
        return Err(Error::Config("decay indicator needs at least three outputs".into()));
    }
    Ok(traj.times.iter().zip(&traj.fields).map(|(&t, f)| (t, t * propagate(f, -t).linf())).collect())
}

/// Summary of the two long-time behaviours.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LongTimeIndicators {
    /// Largest ratio of consecutive Cauchy increments (<= 1 when nonincreasing).
    pub increment_growth: f64,
    /// sup t ||u||_inf over outputs from the first increment time on, divided
    /// by its value there.
    pub decay_growth: f64,
}

/// Increments are taken between consecutive `increment_times` (each must be an
/// output time); the decay product uses every output from the first of them on.
pub fn long_time_indicators(traj: &Trajectory, increment_times: &[f64]) -> Result<LongTimeIndicators> {
    if increment_times.len() < 3 {
        return Err(Error::Config("need at least three increment times".into()));
    }
    let find = |t: f64| {
        traj.times
            .iter()
            .position(|&s| (s - t).abs() < 1e-9)
            .ok_or_else(|| Error::Config(format!("t = {t} is not an output time")))
    };
    let idx = increment_times.iter().map(|&t| find(t)).collect::<Result<Vec<_>>>()?;
    let inc: Vec<f64> = idx.windows(2).map(|w| traj.fields[w[1]].sub(&traj.fields[w[0]]).l2()).collect();
    let increment_growth = inc.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
    let decay: Vec<f64> = traj.times[idx[0]..]
        .iter()
        .zip(&traj.fields[idx[0]..])
        .map(|(&t, f)| t * propagate(f, -t).linf())
        .collect();
    let decay_growth = decay.iter().copied().fold(0.0, f64::max) / decay[0];
    Ok(LongTimeIndicators { increment_growth, decay_growth })
}

/// Half-octave output times 8 * 2^{k/2} up to `t_final`.
pub fn half_octave_times(from: f64, t_final: f64) -> Vec<f64> {
    (0..).map(|k| from * 2f64.powf(k as f64 / 2.0)).take_while(|&t| t <= t_final + 1e-9).collect()
}

impl ExperimentConfig {
    /// Long-box run for the long-time comparison: eps = 0.01, T = 50, outputs
    /// on half octaves from t = 8. `contrast` swaps alpha Q(u,u) + beta Q(ubar,ubar) for
    /// gamma Q(u, ubar).
    pub fn long_time(contrast: bool) -> Self {
        let mut cfg = ExperimentConfig {
            length: 150.0,
            n: 192,
            width: 2.0,
            dt: 0.2,
            t_final: 50.0,
            output_every: 48.0,
            output_times: half_octave_times(8.0, 50.0),
            ..Default::default()
        };
        if contrast {
            cfg.mode = Nonlinearity::ResonantContrast;
            cfg.alpha = [0.0, 0.0];
            cfg.beta = [0.0, 0.0];
            cfg.gamma = [1.0, 0.0];
        }
        cfg
    }
}

/// Free Schroedinger evolution of exp(-|x|^2 / (2 w^2)) at time t, summed over
/// periodic images |n_i| <= images.
pub fn free_gaussian(grid: &Grid, w: f64, t: f64, images: i64) -> Field {
    let a = C64::new(w * w, -2.0 * t);
    let pre = C64::new(w * w, 0.0) / a;
    let l = grid.length();
    Field::from_physical_fn(*grid, |x| {
        let mut acc = C64::default();
        for i in -images..=images {
            for j in -images..=images {
                let y = [x[0] + i as f64 * l, x[1] + j as f64 * l];
                acc += pre * (-(y[0] * y[0] + y[1] * y[1]) / (2.0 * a)).exp();
            }
        }
        acc
    })
}
