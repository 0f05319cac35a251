//! Normal-form decomposition f = u_* + g + h1 + h2 + h3.
//!
//! The ++ and -- Duhamel integrands are split with the dilated R/S/T cutoffs;
//! the chi^T parts are integrated by parts in time. g collects the boundary
//! terms, h1 the ball and d_s chi^T terms, h2 the chi^S term and h3 the terms
//! where d_s hits a profile. h3 is evaluated in nested form: the inner
//! bilinear is d_s f itself (or its conjugate), the outer bilinear carries
//! the symmetrized kernel (chi^T q (xi,eta) + chi^T q (xi,xi-eta)) / (i phi).
//!
//! All bilinear forms are exact quadratures over the retained modes of the
//! dealiased lattice, so they match the evolution's right-hand side exactly
//! and the decomposition closes up to the time-integration error.

use std::collections::BTreeMap;
use crate::evolution::{complex, initial_profile, integrate_with, ExperimentConfig, Nonlinearity, Rhs, Trajectory};
use crate::field::{propagate, weighted_norm, Weight};
use crate::resonance::{build_cutoffs, default_widths, lattice_sample, phase_eval, support_lower_bounds, CutoffFamily, PhaseSpec};
use crate::smooth::{fall, fall_deriv};
use crate::symbol::{build_q, Symbol};
use crate::{Error, Field, Freq, Grid, Repr, Result, C64};
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, Copy)]
struct Pair {
    out: usize,
    /// Index of eta (first input) and of xi - eta (second input).
    a: usize,
    b: usize,
    /// |(xi, eta)| and |(xi, xi - eta)|.
    r: f64,
    r_swap: f64,
    q: f64,
    q_swap: f64,
    phi_pp: f64,
    phi_mm: f64,
    share_pp: f64,
    share_pp_swap: f64,
    share_mm: f64,
    share_mm_swap: f64,
}

fn ball(x: f64) -> f64 {
    fall(x, 1.0, 2.0)
}

/// (chi^T, d_s chi^T) at time s from the radius and time share.
fn time_cut(s: f64, r: f64, share: f64) -> (f64, f64) {
    let rho = s.sqrt() * r;
    let b = ball(rho);
    let db = fall_deriv(rho, 1.0, 2.0) * rho / (2.0 * s);
    ((1.0 - b) * share, -db * share)
}

/// 1 / (i phi), zero where the numerator cutoff vanishes.
fn inv_i(phi: f64) -> C64 {
    C64::new(0.0, -1.0 / phi)
}

/// Time derivatives of the h pieces at one instant.
#[derive(Debug, Clone)]
pub struct Rates {
    pub h1: Field,
    pub h2: Field,
    pub h3: Field,
}

/// Engine for the normal-form pieces on one grid.
pub struct NormalForm {
    grid: Grid,
    alpha: C64,
    beta: C64,
    pairs: Vec<Pair>,
    pp: CutoffFamily,
    mm: CutoffFamily,
}

impl NormalForm {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.mode != Nonlinearity::Paper {
            return Err(Error::Config("the normal form needs mode = paper (no gamma term)".into()));
        }
        let grid = cfg.grid()?;
        let q = build_q(cfg.q)?;
        let (spp, smm) = (PhaseSpec::quadratic(1, 1), PhaseSpec::quadratic(-1, -1));
        let (dt, ds) = default_widths(&spp);
        let pp = build_cutoffs(&spp, 1.0, dt, ds)?;
        let mm = build_cutoffs(&smm, 1.0, dt, ds)?;
        for fam in [&pp, &mm] {
            support_lower_bounds(fam, &lattice_sample(2))?;
        }
        let pairs = build_pairs(&grid, &q, &pp, &mm)?;
        Ok(NormalForm { grid, alpha: complex(cfg.alpha), beta: complex(cfg.beta), pairs, pp, mm })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Cutoff families (++, --) at dilation time 1.
    pub fn families(&self) -> (&CutoffFamily, &CutoffFamily) {
        (&self.pp, &self.mm)
    }

    /// The bracket of g at time s: alpha T[chi^T q/(i phi) e^{is phi}](f, f) + beta (same for --)(fbar, fbar).
    pub fn boundary(&self, f: &Field, s: f64) -> Field {
        let n = self.grid.n() as f64;
        let fv = f.to_frequency();
        let fb = fv.conj().to_frequency();
        let (fv, fb) = (fv.values(), fb.values());
        let mut out = vec![C64::default(); self.grid.len()];
        for p in &self.pairs {
            let (chi_pp, _) = time_cut(s, p.r, p.share_pp);
            if chi_pp != 0.0 {
                let e = C64::from_polar(1.0, s * p.phi_pp);
                out[p.out] += self.alpha * chi_pp * p.q * inv_i(p.phi_pp) * e * fv[p.a] * fv[p.b] / n;
            }
            let (chi_mm, _) = time_cut(s, p.r, p.share_mm);
            if chi_mm != 0.0 {
                let e = C64::from_polar(1.0, s * p.phi_mm);
                out[p.out] += self.beta * chi_mm * p.q * inv_i(p.phi_mm) * e * fb[p.a] * fb[p.b] / n;
            }
        }
        Field::from_values(self.grid, out, Repr::Frequency)
    }

    /// d_s h1, d_s h2, d_s h3 at time s, given f(s) and d_s f(s).
    pub fn rates(&self, f: &Field, df: &Field, s: f64) -> Rates {
        let n = self.grid.n() as f64;
        let fv = f.to_frequency();
        let fb = fv.conj().to_frequency();
        let rv = df.to_frequency();
        let rb = rv.conj().to_frequency();
        let (fv, fb, rv, rb) = (fv.values(), fb.values(), rv.values(), rb.values());
        let len = self.grid.len();
        let (mut h1, mut h2, mut h3) = (vec![C64::default(); len], vec![C64::default(); len], vec![C64::default(); len]);
        for p in &self.pairs {
            let b = ball(s.sqrt() * p.r);
            // ++ with inputs (f, f)
            let e = C64::from_polar(1.0, s * p.phi_pp);
            let (chi_t, dchi_t) = time_cut(s, p.r, p.share_pp);
            let w = fv[p.a] * fv[p.b] / n;
            let mut m1 = C64::new(b * p.q, 0.0);
            if dchi_t != 0.0 {
                m1 -= dchi_t * p.q * inv_i(p.phi_pp);
            }
            h1[p.out] += self.alpha * m1 * e * w;
            h2[p.out] += self.alpha * ((1.0 - b) - chi_t) * p.q * e * w;
            let (chi_swap, _) = time_cut(s, p.r_swap, p.share_pp_swap);
            let k = chi_t * p.q + chi_swap * p.q_swap;
            if k != 0.0 {
                h3[p.out] -= self.alpha * k * inv_i(p.phi_pp) * e * rv[p.a] * fv[p.b] / n;
            }
            // -- with inputs (fbar, fbar)
            let e = C64::from_polar(1.0, s * p.phi_mm);
            let (chi_t, dchi_t) = time_cut(s, p.r, p.share_mm);
            let w = fb[p.a] * fb[p.b] / n;
            let mut m1 = C64::new(b * p.q, 0.0);
            if dchi_t != 0.0 {
                m1 -= dchi_t * p.q * inv_i(p.phi_mm);
            }
            h1[p.out] += self.beta * m1 * e * w;
            h2[p.out] += self.beta * ((1.0 - b) - chi_t) * p.q * e * w;
            let (chi_swap, _) = time_cut(s, p.r_swap, p.share_mm_swap);
            let k = chi_t * p.q + chi_swap * p.q_swap;
            if k != 0.0 {
                h3[p.out] -= self.beta * k * inv_i(p.phi_mm) * e * rb[p.a] * fb[p.b] / n;
            }
        }
        let g = self.grid;
        Rates {
            h1: Field::from_values(g, h1, Repr::Frequency),
            h2: Field::from_values(g, h2, Repr::Frequency),
            h3: Field::from_values(g, h3, Repr::Frequency),
        }
    }

    /// Largest |(xi, eta)| among pairs where the h1 integrand is nonzero at time s.
    pub fn h1_support_radius(&self, s: f64) -> f64 {
        self.pairs
            .iter()
            .filter(|p| ball(s.sqrt() * p.r) > 0.0 || time_cut(s, p.r, p.share_pp).1 != 0.0)
            .map(|p| p.r)
            .fold(0.0, f64::max)
    }

    /// Smallest |phi_{++}| / |(xi, eta)|^2 over pairs where chi^T_s of ++ is nonzero.
    pub fn g_phase_floor(&self, s: f64) -> f64 {
        self.pairs
            .iter()
            .filter(|p| time_cut(s, p.r, p.share_pp).0 > 0.0)
            .map(|p| p.phi_pp.abs() / (p.r * p.r))
            .fold(f64::INFINITY, f64::min)
    }
}

fn build_pairs(grid: &Grid, q: &Symbol, pp: &CutoffFamily, mm: &CutoffFamily) -> Result<Vec<Pair>> {
    let mask = grid.dealias_mask();
    let lim = grid.n() as f64 / 3.0;
    let modes: Vec<usize> = (0..grid.len()).filter(|&i| mask[i]).collect();
    let (spp, smm) = (PhaseSpec::quadratic(1, 1), PhaseSpec::quadratic(-1, -1));
    let mut pairs = Vec::new();
    for &a in &modes {
        let ka = grid.wavenumbers(a);
        for &b in &modes {
            let kb = grid.wavenumbers(b);
            let k = [ka[0] + kb[0], ka[1] + kb[1]];
            if (k[0].abs() as f64) >= lim || (k[1].abs() as f64) >= lim {
                continue;
            }
            let (eta, zeta) = (grid.freq(a), grid.freq(b));
            let xi: Freq = [eta[0] + zeta[0], eta[1] + zeta[1]];
            let (r, share_pp) = pp.radial_split(&[xi, eta]);
            let (r_swap, share_pp_swap) = pp.radial_split(&[xi, zeta]);
            let (_, share_mm) = mm.radial_split(&[xi, eta]);
            let (_, share_mm_swap) = mm.radial_split(&[xi, zeta]);
            let p = Pair {
                out: grid.index_of_pair(k),
                a,
                b,
                r,
                r_swap,
                q: q.eval(&[xi, eta])?.re,
                q_swap: q.eval(&[xi, zeta])?.re,
                phi_pp: phase_eval(&spp, &[xi, eta]),
                phi_mm: phase_eval(&smm, &[xi, eta]),
                share_pp,
                share_pp_swap,
                share_mm,
                share_mm_swap,
            };
            for (share, phi) in [(share_pp, p.phi_pp), (share_mm, p.phi_mm)] {
                if share > 0.0 && r > 0.0 && phi == 0.0 {
                    return Err(Error::PositiveFloor(format!("chi^T is nonzero on the zero set of the phase at xi={xi:?}, eta={eta:?}")));
                }
            }
            pairs.push(p);
        }
    }
    Ok(pairs)
}

/// The pieces at one time.
#[derive(Debug, Clone)]
pub struct NormalFormState {
    pub t: f64,
    pub g: Field,
    pub h1: Field,
    pub h2: Field,
    pub h3: Field,
}

impl NormalFormState {
    pub fn h(&self) -> Field {
        self.h1.add(&self.h2).add(&self.h3)
    }

    /// ||f - (u_* + g + h)||_2.
    pub fn residual(&self, f: &Field, u_star: &Field) -> f64 {
        f.sub(&u_star.add(&self.g).add(&self.h())).l2()
    }
}

#[derive(Debug, Clone)]
pub struct NormalFormRun {
    pub trajectory: Trajectory,
    pub u_star: Field,
    /// States at the output times of the trajectory.
    pub states: Vec<NormalFormState>,
    pub residuals: Vec<f64>,
}

/// Integrates the equation and accumulates h1, h2, h3 by composite Simpson
/// quadrature over each step; the midpoint profile is the cubic Hermite
/// interpolant of the step's end points and derivatives.
pub fn run_normal_form(cfg: &ExperimentConfig) -> Result<NormalFormRun> {
    let nf = NormalForm::new(cfg)?;
    let rhs = Rhs::new(cfg)?;
    let u_star = initial_profile(cfg)?;
    let g2 = nf.boundary(&u_star, cfg.t0);
    let zero = Field::zeros(nf.grid, Repr::Frequency);
    let mut acc = [zero.clone(), zero.clone(), zero.clone()];
    let mut last: Option<(f64, Rates)> = None;
    let schedule = cfg.output_schedule();
    let mut states = vec![NormalFormState { t: cfg.t0, g: zero.clone(), h1: zero.clone(), h2: zero.clone(), h3: zero }];
    let c = |x: f64| C64::new(x, 0.0);
    let traj = integrate_with(cfg, |ev| {
        let h = ev.t1 - ev.t0;
        let r0 = match last.take() {
            Some((t, r)) if t == ev.t0 => r,
            _ => nf.rates(ev.f0, ev.d0, ev.t0),
        };
        let sm = ev.t0 + h / 2.0;
        let fm = ev.f0.add(ev.f1).scale(c(0.5)).add(&ev.d0.sub(ev.d1).scale(c(h / 8.0)));
        let rm = nf.rates(&fm, &rhs.eval(&fm, sm), sm);
        let r1 = nf.rates(ev.f1, ev.d1, ev.t1);
        for (k, (a, (m, b))) in [(&r0.h1, (&rm.h1, &r1.h1)), (&r0.h2, (&rm.h2, &r1.h2)), (&r0.h3, (&rm.h3, &r1.h3))]
            .into_iter()
            .enumerate()
        {
            let incr = a.add(&m.scale(c(4.0))).add(b).scale(c(h / 6.0));
            acc[k] = acc[k].add(&incr);
        }
        if schedule.iter().any(|&t| (t - ev.t1).abs() < 1e-9) {
            states.push(NormalFormState {
                t: ev.t1,
                g: nf.boundary(ev.f1, ev.t1).sub(&g2),
                h1: acc[0].clone(),
                h2: acc[1].clone(),
                h3: acc[2].clone(),
            });
        }
        last = Some((ev.t1, r1));
        Ok(())
    })?;
    if states.len() != traj.times.len() {
        return Err(Error::Config("normal-form states out of step with the trajectory".into()));
    }
    let residuals = states.iter().zip(&traj.fields).map(|(s, f)| s.residual(f, &u_star)).collect();
    Ok(NormalFormRun { trajectory: traj, u_star, states, residuals })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub t: f64,
    pub piece: String,
    pub norm_name: String,
    pub value: f64,
    pub envelope: f64,
    pub quotient: f64,
}

/// Tracked norms of g and h with their envelopes eps^2 t^power.
pub fn norm_report(state: &NormalFormState, epsilon: f64) -> Vec<NormRow> {
    let t = state.t;
    let e2 = epsilon * epsilon;
    let mut rows = Vec::new();
    let mut push = |piece: &str, name: &str, value: f64, power: f64| {
        let envelope = e2 * t.powf(power);
        let quotient = if envelope > 0.0 { value / envelope } else { 0.0 };
        rows.push(NormRow { t, piece: piece.into(), norm_name: name.into(), value, envelope, quotient });
    };
    let linf_u = |f: &Field| propagate(f, -t).linf();
    push("g", "l2", state.g.l2(), -0.5);
    push("g", "l2_bracket_x", weighted_norm(&state.g, Weight::Bracket, 2.0).value, 0.0);
    push("g", "l2_x2", weighted_norm(&state.g, Weight::Square, 2.0).value, 1.0);
    push("g", "linf_u", linf_u(&state.g), -1.0);
    let h = state.h();
    for (piece, f) in [("h", &h), ("h1", &state.h1), ("h2", &state.h2), ("h3", &state.h3)] {
        push(piece, "l2_bracket_x", weighted_norm(f, Weight::Bracket, 2.0).value, 0.0);
        push(piece, "l2_x2", weighted_norm(f, Weight::Square, 2.0).value, 0.625);
        push(piece, "linf_u", linf_u(f), -1.0);
    }
    rows
}

pub fn write_norm_csv(rows: &[NormRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}

/// Dimensionless envelope quotients used by the long-run checks, as
/// (name, quotient): ||g||_2 sqrt(t), ||<x>h||_2, ||x^2 h||_2 t^{-5/8},
/// t ||u_g||_inf and t ||u_h||_inf, all over eps^2.
pub fn envelope_quotients(rows: &[NormRow]) -> Vec<(String, f64)> {
    const TRACKED: [(&str, &str); 5] =
        [("g", "l2"), ("h", "l2_bracket_x"), ("h", "l2_x2"), ("g", "linf_u"), ("h", "linf_u")];
    rows.iter()
        .filter(|r| TRACKED.iter().any(|(p, n)| r.piece == *p && r.norm_name == *n))
        .map(|r| (format!("{}:{}", r.piece, r.norm_name), r.quotient))
        .collect()
}

/// Max of each envelope quotient over the states with t in [from, to].
pub fn envelope_maxima(states: &[NormalFormState], epsilon: f64, from: f64, to: f64) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    for st in states.iter().filter(|s| s.t >= from - 1e-9 && s.t <= to + 1e-9) {
        for (k, v) in envelope_quotients(&norm_report(st, epsilon)) {
            let e = out.entry(k).or_insert(0.0f64);
            *e = e.max(v);
        }
    }
    out
}
