//! R/S/T cutoff partitions and the lower bounds that make the time and
//! space integrations by parts legitimate.

use super::phase::{inner_grad, phase_eval, PhaseSpec};
use super::sets::{null_space, SliceForm};
use crate::smooth::{fall, fall_deriv, rise};
use crate::symbol::{radius, Symbol};
use crate::testkit::rng;
use crate::{Error, Freq, Result, C64};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use std::sync::Arc;

pub const DEFAULT_DELTA: f64 = 0.1;
/// Cubic widths: with 0.1 the +-- time and space neighbourhoods leave a gap.
pub const DEFAULT_DELTA_CUBIC: f64 = 0.05;

/// Default (delta_T, delta_S) for a phase.
pub fn default_widths(spec: &PhaseSpec) -> (f64, f64) {
    if spec.arity() == 2 {
        (DEFAULT_DELTA, DEFAULT_DELTA)
    } else {
        (DEFAULT_DELTA_CUBIC, DEFAULT_DELTA_CUBIC)
    }
}
pub const NEIGHBORHOOD_WIDTH: f64 = 0.2;
const COVERAGE_SAMPLES: usize = 20_000;

/// Ball cut: 1 on r <= 1, 0 on r >= 2.
pub fn ball(r: f64) -> f64 {
    fall(r, 1.0, 2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Split {
    /// Time-nonresonant part takes everything outside the ball.
    TimeOnly,
    /// S-distance from |xi - 2 eta| / r.
    Pair,
    /// S-distance from the projector onto the gradient row space.
    Projector,
}

/// The triple (chi^R, chi^S, chi^T) of a phase at dilation time t.
#[derive(Clone)]
pub struct CutoffFamily {
    pub spec: PhaseSpec,
    pub t: f64,
    pub delta_t: f64,
    pub delta_s: f64,
    split: Split,
    row_proj: Arc<DMatrix<f64>>,
}

impl std::fmt::Debug for CutoffFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CutoffFamily")
            .field("spec", &self.spec)
            .field("t", &self.t)
            .field("delta_t", &self.delta_t)
            .field("delta_s", &self.delta_s)
            .finish()
    }
}

fn flatten(p: &[Freq]) -> DVector<f64> {
    DVector::from_iterator(2 * p.len(), p.iter().flat_map(|x| x.iter().copied()))
}

pub fn build_cutoffs(spec: &PhaseSpec, t: f64, delta_t: f64, delta_s: f64) -> Result<CutoffFamily> {
    if !(t > 0.0) || !(delta_t > 0.0) || !(delta_s > 0.0) {
        return Err(Error::Config(format!("cutoff parameters must be positive (t={t}, widths {delta_t}, {delta_s})")));
    }
    let label = spec.label();
    let split = match label.as_str() {
        "--" | "---" => Split::TimeOnly,
        "++" => Split::Pair,
        "+++" | "+--" => Split::Projector,
        _ => {
            return Err(Error::UnsupportedPhase(format!(
                "{label}: the space-time resonant set is not trivial; no R/S/T partition"
            )))
        }
    };
    let (_, row_proj) = null_space(&SliceForm::new(spec, 2).grad);
    let family = CutoffFamily { spec: *spec, t, delta_t, delta_s, split, row_proj: Arc::new(row_proj) };
    family.check_coverage()?;
    Ok(family)
}

impl CutoffFamily {
    pub fn arity(&self) -> usize {
        self.spec.arity()
    }

    /// Same family at another dilation time.
    pub fn at_time(&self, t: f64) -> Self {
        CutoffFamily { t, ..self.clone() }
    }

    /// Raw (time, space) weights of the unit-sphere direction of p.
    fn raw(&self, p: &[Freq], r: f64) -> (f64, f64) {
        let a = phase_eval(&self.spec, p) / (r * r);
        let c = match self.split {
            Split::TimeOnly => return (1.0, 0.0),
            Split::Pair => {
                let (xi, eta) = (p[0], p[1]);
                ((xi[0] - 2.0 * eta[0]).powi(2) + (xi[1] - 2.0 * eta[1]).powi(2)).sqrt() / r
            }
            Split::Projector => (&*self.row_proj * flatten(p)).norm() / r,
        };
        (rise(a.abs(), self.delta_t, 2.0 * self.delta_t), rise(c, self.delta_s, 2.0 * self.delta_s))
    }

    /// Share of the complement of the ball given to chi^T.
    fn time_share(&self, p: &[Freq], r: f64) -> f64 {
        let (wt, ws) = self.raw(p, r);
        if wt == 0.0 {
            0.0
        } else {
            wt / (wt + ws)
        }
    }

    /// (chi^R, chi^S, chi^T) at p for the undilated family.
    fn unit(&self, p: &[Freq]) -> [f64; 3] {
        let r = radius(p);
        let b = ball(r);
        if b == 1.0 {
            return [1.0, 0.0, 0.0];
        }
        let chi_t = (1.0 - b) * self.time_share(p, r);
        [b, (1.0 - b) - chi_t, chi_t]
    }

    fn dilate(&self, p: &[Freq]) -> Vec<Freq> {
        let s = self.t.sqrt();
        p.iter().map(|x| [s * x[0], s * x[1]]).collect()
    }

    /// (chi^R_t, chi^S_t, chi^T_t) at p.
    pub fn eval(&self, p: &[Freq]) -> [f64; 3] {
        assert_eq!(p.len(), self.arity());
        self.unit(&self.dilate(p))
    }

    pub fn chi_r(&self, p: &[Freq]) -> f64 {
        self.eval(p)[0]
    }

    pub fn chi_s(&self, p: &[Freq]) -> f64 {
        self.eval(p)[1]
    }

    pub fn chi_t(&self, p: &[Freq]) -> f64 {
        self.eval(p)[2]
    }

    /// Radius of p and the time share of the undilated family at p. The share is
    /// homogeneous of degree 0, so at any time t the cutoffs are
    /// chi^R = ball(sqrt(t) r), chi^T = (1 - chi^R) share, chi^S the rest.
    pub fn radial_split(&self, p: &[Freq]) -> (f64, f64) {
        let r = radius(p);
        if r == 0.0 {
            (0.0, 0.0)
        } else {
            (r, self.time_share(p, r))
        }
    }

    /// Time derivative of chi^T_t at p.
    pub fn dt_chi_t(&self, p: &[Freq]) -> f64 {
        let q = self.dilate(p);
        let rho = radius(&q);
        if rho <= 1.0 || rho >= 2.0 {
            return 0.0;
        }
        -rho * fall_deriv(rho, 1.0, 2.0) * self.time_share(&q, rho) / (2.0 * self.t)
    }

    /// The three cutoffs as closed-form symbols of class m_t^{0,0}.
    pub fn symbols(&self) -> [Symbol; 3] {
        let names = ["chi_r", "chi_s", "chi_t"];
        let n = self.arity();
        let label = self.spec.label();
        std::array::from_fn(|k| {
            let fam = self.clone();
            Symbol::real(&format!("{}{label}", names[k]), n, move |p| fam.eval(p)[k]).with_class(0, 0, Some(self.t))
        })
    }

    /// Time-derivative symbol d_t chi^T_t.
    pub fn dt_symbol(&self) -> Symbol {
        let fam = self.clone();
        Symbol::real(&format!("dt_chi_t{}", self.spec.label()), self.arity(), move |p| fam.dt_chi_t(p))
    }

    fn check_coverage(&self) -> Result<()> {
        if self.split == Split::TimeOnly {
            return Ok(());
        }
        let n = self.arity();
        let mut g = rng(0xC0FE);
        let check = |p: &[Freq]| -> Result<()> {
            let r = radius(p);
            if r == 0.0 {
                return Ok(());
            }
            let (wt, ws) = self.raw(p, r);
            if wt + ws < 1.0 {
                return Err(Error::Coverage { point: p.iter().flat_map(|x| x.iter().copied()).collect(), weight: wt + ws });
            }
            Ok(())
        };
        for p in lattice_sample(n) {
            check(&p)?;
        }
        for _ in 0..COVERAGE_SAMPLES {
            let p: Vec<Freq> = (0..n).map(|_| [g.sample(StandardNormal), g.sample(StandardNormal)]).collect();
            check(&p)?;
        }
        Ok(())
    }
}

/// 64^2 sample points: 64 x 64 (xi, eta) pairs, or 16^3 triples for arity 3.
pub fn lattice_sample(arity: usize) -> Vec<Vec<Freq>> {
    let line = |m: usize, step: f64| -> Vec<Freq> {
        let mut v = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                v.push([(i as f64 - (m as f64 - 1.0) / 2.0) * step, (j as f64 - (m as f64 - 1.0) / 2.0) * step]);
            }
        }
        v
    };
    let mut out = Vec::new();
    if arity == 2 {
        let a = line(8, 0.55);
        for &x in &a {
            for &y in &a {
                out.push(vec![x, y]);
            }
        }
    } else {
        let a = line(4, 0.9);
        for &x in &a {
            for &y in &a {
                for &z in &a {
                    out.push(vec![x, y, z]);
                }
            }
        }
    }
    out
}

/// Largest partition-of-unity defect and range violation over `samples`.
pub fn partition_defect(family: &CutoffFamily, samples: &[Vec<Freq>]) -> (f64, f64) {
    let mut sum_err = 0.0f64;
    let mut range_err = 0.0f64;
    for p in samples {
        let c = family.eval(p);
        sum_err = sum_err.max((c[0] + c[1] + c[2] - 1.0).abs());
        for v in c {
            range_err = range_err.max((-v).max(v - 1.0).max(0.0));
        }
    }
    (sum_err, range_err)
}

/// Minima of |phi| over supp chi^T and of |inner grad phi| over supp chi^S.
#[derive(Debug, Clone)]
pub struct SupportBounds {
    pub min_phase: Option<f64>,
    pub min_grad: Option<f64>,
    /// Fitted exponents of the shell minima against |p|+1.
    pub phase_exponent: Option<f64>,
    pub grad_exponent: Option<f64>,
}

fn fit_exponent(pairs: &[(f64, f64)]) -> Option<f64> {
    // per dyadic shell of |p|+1, keep the minimum value
    let mut shells: std::collections::BTreeMap<i32, (f64, f64)> = Default::default();
    for &(scale, v) in pairs {
        let key = scale.log2().floor() as i32;
        let e = shells.entry(key).or_insert((scale, v));
        if v < e.1 {
            *e = (scale, v);
        }
    }
    if shells.len() < 3 {
        return None;
    }
    let pts: Vec<(f64, f64)> = shells.values().map(|&(s, v)| (s.ln(), v.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

pub fn support_lower_bounds(family: &CutoffFamily, samples: &[Vec<Freq>]) -> Result<SupportBounds> {
    let mut phase_pairs = Vec::new();
    let mut grad_pairs = Vec::new();
    for p in samples {
        let c = family.eval(p);
        let scale = radius(p) + 1.0;
        if c[2] > 0.0 {
            phase_pairs.push((scale, phase_eval(&family.spec, p).abs()));
        }
        if c[1] > 0.0 {
            let g = inner_grad(&family.spec, p);
            grad_pairs.push((scale, g.iter().map(|v| v * v).sum::<f64>().sqrt()));
        }
    }
    let min = |v: &[(f64, f64)]| v.iter().map(|x| x.1).fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.min(x))));
    let bounds = SupportBounds {
        min_phase: min(&phase_pairs),
        min_grad: min(&grad_pairs),
        phase_exponent: fit_exponent(&phase_pairs),
        grad_exponent: fit_exponent(&grad_pairs),
    };
    if let Some(m) = bounds.min_phase.filter(|m| *m <= 0.0) {
        return Err(Error::PositiveFloor(format!("|phase| reaches {m} on the support of chi^T for {}", family.spec)));
    }
    if let Some(m) = bounds.min_grad.filter(|m| *m <= 0.0) {
        return Err(Error::PositiveFloor(format!("|grad phase| reaches {m} on the support of chi^S for {}", family.spec)));
    }
    Ok(bounds)
}

/// Residual of the space integration by parts identity
/// (1 / (i s |g|^2)) g . grad[e^{i s phi}] - e^{i s phi}, with g the inner gradient.
pub fn ibp_residual(spec: &PhaseSpec, s: f64, p: &[Freq]) -> f64 {
    let g = inner_grad(spec, p);
    let g2: f64 = g.iter().map(|v| v * v).sum();
    let e = C64::from_polar(1.0, s * phase_eval(spec, p));
    let i = C64::new(0.0, 1.0);
    let mut acc = C64::default();
    for gk in &g {
        let d = i * s * gk * e;
        acc += gk * d;
    }
    (acc / (i * s * g2) - e).norm()
}

/// Residual of the time identity (1 / (i phi)) d_s e^{i s phi} - e^{i s phi}.
pub fn time_ibp_residual(spec: &PhaseSpec, s: f64, p: &[Freq]) -> f64 {
    let phi = phase_eval(spec, p);
    let i = C64::new(0.0, 1.0);
    let e = C64::from_polar(1.0, s * phi);
    ((i * phi * e) / (i * phi) - e).norm()
}

/// Cutoff to a conic neighbourhood of the -++ space-time resonant line
/// {xi = sigma = eta/2}: 1 where the normalized distance is below width/2,
/// 0 beyond width.
#[derive(Debug, Clone, Copy)]
pub struct NeighborhoodCutoff {
    pub width: f64,
}

impl Default for NeighborhoodCutoff {
    fn default() -> Self {
        NeighborhoodCutoff { width: NEIGHBORHOOD_WIDTH }
    }
}

impl NeighborhoodCutoff {
    /// Distance to the line divided by |p|.
    pub fn normalized_distance(p: &[Freq]) -> f64 {
        let r = radius(p);
        if r == 0.0 {
            return f64::INFINITY;
        }
        let v = [(p[0][0] + 2.0 * p[1][0] + p[2][0]) / 6.0, (p[0][1] + 2.0 * p[1][1] + p[2][1]) / 6.0];
        let w = [1.0, 2.0, 1.0];
        let mut d2 = 0.0;
        for k in 0..3 {
            for c in 0..2 {
                d2 += (p[k][c] - w[k] * v[c]).powi(2);
            }
        }
        d2.sqrt() / r
    }

    pub fn eval(&self, p: &[Freq]) -> f64 {
        fall(Self::normalized_distance(p), 0.5 * self.width, self.width)
    }

    pub fn symbol(&self) -> Symbol {
        let c = *self;
        Symbol::real("chi_nbhd-++", 3, move |p| c.eval(p)).with_class(0, 0, None)
    }
}
