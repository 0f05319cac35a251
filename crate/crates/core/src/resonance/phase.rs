//! Quadratic and cubic phase functions as real quadratic forms.

use crate::{Error, Freq, Result};
use std::fmt;

/// Sign pattern selecting one of the eight built-in phases.
///
/// Quadratic: -|xi|^2 + s1 |eta|^2 + s2 |xi-eta|^2, variables (xi, eta).
/// Cubic: -|xi|^2 + s1 |xi-eta|^2 + s2 |eta-sigma|^2 + s3 |sigma|^2,
/// variables (xi, eta, sigma).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PhaseSpec {
    signs: [i8; 3],
    arity: usize,
}

/// Variable of a phase, by position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Xi,
    Eta,
    Sigma,
}

impl Var {
    fn index(self) -> usize {
        match self {
            Var::Xi => 0,
            Var::Eta => 1,
            Var::Sigma => 2,
        }
    }
}

impl PhaseSpec {
    pub fn quadratic(s1: i8, s2: i8) -> Self {
        PhaseSpec { signs: [s1.signum(), s2.signum(), 0], arity: 2 }
    }

    pub fn cubic(s1: i8, s2: i8, s3: i8) -> Self {
        PhaseSpec { signs: [s1.signum(), s2.signum(), s3.signum()], arity: 3 }
    }

    /// Parses "++", "-+", "+--" and the like.
    pub fn parse(s: &str) -> Result<Self> {
        let signs: Vec<i8> = s
            .trim()
            .chars()
            .map(|c| match c {
                '+' => Ok(1),
                '-' => Ok(-1),
                _ => Err(Error::Config(format!("bad phase sign '{c}' in {s:?}"))),
            })
            .collect::<Result<_>>()?;
        let spec = match signs.len() {
            2 => PhaseSpec::quadratic(signs[0], signs[1]),
            3 => PhaseSpec::cubic(signs[0], signs[1], signs[2]),
            _ => return Err(Error::Config(format!("phase {s:?} must have 2 or 3 signs"))),
        };
        if !Self::all().contains(&spec) {
            return Err(Error::UnsupportedPhase(s.to_string()));
        }
        Ok(spec)
    }

    /// The built-in phases: all four quadratic ones and the four cubic ones
    /// arising in the normal form.
    pub fn all() -> Vec<PhaseSpec> {
        vec![
            PhaseSpec::quadratic(1, 1),
            PhaseSpec::quadratic(1, -1),
            PhaseSpec::quadratic(-1, 1),
            PhaseSpec::quadratic(-1, -1),
            PhaseSpec::cubic(1, 1, 1),
            PhaseSpec::cubic(1, -1, -1),
            PhaseSpec::cubic(-1, 1, 1),
            PhaseSpec::cubic(-1, -1, -1),
        ]
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs[..self.arity]
    }

    pub fn label(&self) -> String {
        self.signs().iter().map(|&s| if s > 0 { '+' } else { '-' }).collect()
    }

    /// Coefficient matrix Q0 with phase = sum_ij Q0[i][j] (p_i . p_j).
    pub fn form(&self) -> Vec<Vec<f64>> {
        let n = self.arity;
        // (coefficient, linear combination of the variables)
        let mut terms: Vec<(f64, [f64; 3])> = vec![(-1.0, [1.0, 0.0, 0.0])];
        let s = self.signs.map(f64::from);
        if n == 2 {
            terms.push((s[0], [0.0, 1.0, 0.0]));
            terms.push((s[1], [1.0, -1.0, 0.0]));
        } else {
            terms.push((s[0], [1.0, -1.0, 0.0]));
            terms.push((s[1], [0.0, 1.0, -1.0]));
            terms.push((s[2], [0.0, 0.0, 1.0]));
        }
        let mut q = vec![vec![0.0; n]; n];
        for (c, a) in terms {
            for i in 0..n {
                for j in 0..n {
                    q[i][j] += c * a[i] * a[j];
                }
            }
        }
        q
    }

    /// Variables the space-resonance gradient is taken with respect to.
    pub fn inner_vars(&self) -> Vec<Var> {
        if self.arity == 2 {
            vec![Var::Eta]
        } else {
            vec![Var::Eta, Var::Sigma]
        }
    }

    pub fn vars(&self) -> Vec<Var> {
        [Var::Xi, Var::Eta, Var::Sigma][..self.arity].to_vec()
    }
}

impl fmt::Display for PhaseSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn check_arity(spec: &PhaseSpec, point: &[Freq]) {
    assert_eq!(point.len(), spec.arity(), "phase {spec} expects {} frequencies", spec.arity());
}

pub fn phase_eval(spec: &PhaseSpec, point: &[Freq]) -> f64 {
    check_arity(spec, point);
    let s = spec.signs.map(f64::from);
    let n2 = |a: Freq| a[0] * a[0] + a[1] * a[1];
    let d = |a: Freq, b: Freq| [a[0] - b[0], a[1] - b[1]];
    if spec.arity == 2 {
        let (xi, eta) = (point[0], point[1]);
        -n2(xi) + s[0] * n2(eta) + s[1] * n2(d(xi, eta))
    } else {
        let (xi, eta, sigma) = (point[0], point[1], point[2]);
        -n2(xi) + s[0] * n2(d(xi, eta)) + s[1] * n2(d(eta, sigma)) + s[2] * n2(sigma)
    }
}

/// Gradient with respect to `wrt`, concatenated in the order given.
pub fn phase_grad(spec: &PhaseSpec, wrt: &[Var], point: &[Freq]) -> Vec<f64> {
    check_arity(spec, point);
    let q = spec.form();
    let mut out = Vec::with_capacity(2 * wrt.len());
    for v in wrt {
        let i = v.index();
        assert!(i < spec.arity, "variable {v:?} not present in phase {spec}");
        for c in 0..2 {
            out.push(2.0 * (0..spec.arity).map(|j| q[i][j] * point[j][c]).sum::<f64>());
        }
    }
    out
}

/// Gradient in the inner variables (eta, or eta and sigma).
pub fn inner_grad(spec: &PhaseSpec, point: &[Freq]) -> Vec<f64> {
    phase_grad(spec, &spec.inner_vars(), point)
}

/// d_xi phi + 2 d_eta phi + d_sigma phi for the -++ phase.
pub fn check_null_identity(point: &[Freq; 3]) -> [f64; 2] {
    let spec = PhaseSpec::cubic(-1, 1, 1);
    let g = phase_grad(&spec, &[Var::Xi, Var::Eta, Var::Sigma], point);
    [g[0] + 2.0 * g[2] + g[4], g[1] + 2.0 * g[3] + g[5]]
}

/// Largest identity residual over `points` uniform samples of [-10, 10]^6,
/// relative to max(1, sum of |components|).
pub fn null_identity_residual(points: usize, seed: u64) -> f64 {
    use rand::Rng;
    let mut r = crate::testkit::rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let p: [Freq; 3] = [0, 1, 2].map(|_| [r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0)]);
        let scale = p.iter().map(|x: &Freq| x[0].abs() + x[1].abs()).sum::<f64>().max(1.0);
        let v = check_null_identity(&p);
        worst = worst.max(v[0].abs().max(v[1].abs()) / scale);
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> PhaseSpec {
        PhaseSpec::parse(s).unwrap()
    }

    #[test]
    fn quadratic_examples() {
        assert_eq!(phase_eval(&p("++"), &[[1.0, 1.0], [1.0, 0.0]]), 0.0);
        assert_eq!(phase_eval(&p("--"), &[[0.0, 0.0], [0.0, 0.0]]), 0.0);
        assert_eq!(phase_eval(&p("++"), &[[2.0, 0.0], [1.0, 0.0]]), -2.0);
    }

    #[test]
    fn gradient_examples() {
        let g = phase_grad(&p("++"), &[Var::Eta], &[[2.0, 0.0], [1.0, 0.0]]);
        assert_eq!(g, vec![0.0, 0.0]);
        let xi = [0.3, -1.7];
        // -|xi|^2 - |eta|^2 + |xi-eta|^2 = -2 xi.eta, so d_eta = -2 xi
        let g = phase_grad(&p("-+"), &[Var::Eta], &[xi, [5.0, 2.0]]);
        assert!((g[0] + 2.0 * xi[0]).abs() < 1e-14 && (g[1] + 2.0 * xi[1]).abs() < 1e-14);
        let sigma = [0.5, 0.25];
        let pt = [[1.5, 0.75], [1.0, 0.5], sigma];
        assert!(inner_grad(&p("+++"), &pt).iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn minus_plus_is_bilinear() {
        let (xi, eta) = ([0.7, -0.2], [1.1, 3.0]);
        let v = phase_eval(&p("-+"), &[xi, eta]);
        assert!((v + 2.0 * (xi[0] * eta[0] + xi[1] * eta[1])).abs() < 1e-13);
    }

    #[test]
    fn parse_rejects_unknown() {
        assert!(PhaseSpec::parse("+-+").is_err());
        assert!(PhaseSpec::parse("+x").is_err());
        assert_eq!(PhaseSpec::all().len(), 8);
        for s in PhaseSpec::all() {
            assert_eq!(PhaseSpec::parse(&s.label()).unwrap(), s);
        }
    }

    #[test]
    fn null_identity_examples() {
        assert_eq!(check_null_identity(&[[0.0; 2]; 3]), [0.0, 0.0]);
        assert_eq!(check_null_identity(&[[1.0, 0.0], [2.0, 0.0], [1.0, 0.0]]), [0.0, 0.0]);
    }

    fn freq() -> impl Strategy<Value = Freq> {
        [-50.0..50.0f64, -50.0..50.0f64]
    }

    proptest! {
        #[test]
        fn null_identity_vanishes(a in freq(), b in freq(), c in freq()) {
            let r = check_null_identity(&[a, b, c]);
            prop_assert!(r[0].abs() <= 1e-12 && r[1].abs() <= 1e-12);
        }

        #[test]
        fn gradient_matches_central_differences(a in freq(), b in freq(), c in freq(), which in 0usize..8) {
            let spec = PhaseSpec::all()[which];
            let pt: Vec<Freq> = [a, b, c][..spec.arity()].to_vec();
            let g = phase_grad(&spec, &spec.vars(), &pt);
            let h = 0.5;
            for (k, gk) in g.iter().enumerate() {
                let (v, c) = (k / 2, k % 2);
                let mut up = pt.clone();
                let mut dn = pt.clone();
                up[v][c] += h;
                dn[v][c] -= h;
                let fd = (phase_eval(&spec, &up) - phase_eval(&spec, &dn)) / (2.0 * h);
                // quadratic: central differences are exact up to rounding
                prop_assert!((fd - gk).abs() <= 1e-8 * (1.0 + gk.abs()), "{fd} vs {gk}");
            }
        }

        #[test]
        fn form_matches_eval(a in freq(), b in freq(), c in freq(), which in 0usize..8) {
            let spec = PhaseSpec::all()[which];
            let pt: Vec<Freq> = [a, b, c][..spec.arity()].to_vec();
            let q = spec.form();
            let mut v = 0.0;
            for i in 0..spec.arity() {
                for j in 0..spec.arity() {
                    v += q[i][j] * (pt[i][0] * pt[j][0] + pt[i][1] * pt[j][1]);
                }
            }
            let e = phase_eval(&spec, &pt);
            prop_assert!((v - e).abs() <= 1e-10 * (1.0 + e.abs()));
        }
    }
}
