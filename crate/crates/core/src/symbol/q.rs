use super::{dot, norm2, Factor, SeparableTerm, Symbol};
use crate::smooth::fall;
use crate::{Error, Freq, Result, C64};

/// Linear functional l(xi, eta) = a.xi + b.eta.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Linear {
    pub xi: [f64; 2],
    pub eta: [f64; 2],
}

impl Default for Linear {
    fn default() -> Self {
        Self { xi: [0.25, 0.0], eta: [0.25, 0.0] }
    }
}

impl Linear {
    pub fn eval(&self, xi: Freq, eta: Freq) -> f64 {
        dot(self.xi, xi) + dot(self.eta, eta)
    }

    fn is_zero(&self) -> bool {
        self.xi == [0.0, 0.0] && self.eta == [0.0, 0.0]
    }
}

/// Cut in |.|^2: 1 up to 1, 0 from 2 on.
fn cut(x2: f64) -> f64 {
    fall(x2, 1.0, 2.0)
}

/// q = 1 + (l - 1) cut(|xi|^2) cut(|eta|^2).
///
/// The product of the two cuts is 1 on |(xi,eta)| <= 1 and 0 on |(xi,eta)| >= 2,
/// so q is linear near the origin and 1 far out, while the blend stays
/// separable in (xi, eta).
pub fn build_q(l: Linear) -> Result<Symbol> {
    if l.is_zero() {
        return Err(Error::Config("q needs a nonzero linear part".into()));
    }
    Ok(Symbol::real("q", 2, move |p| {
        let (xi, eta) = (p[0], p[1]);
        1.0 + (l.eval(xi, eta) - 1.0) * cut(norm2(xi)) * cut(norm2(eta))
    })
    .with_class(1, 0, None))
}

/// Exact three-term separable form of [`build_q`].
pub fn q_separable(l: Linear) -> Result<Symbol> {
    if l.is_zero() {
        return Err(Error::Config("q needs a nonzero linear part".into()));
    }
    let terms = vec![
        SeparableTerm { out: Factor::One, first: Factor::One, second: Factor::One },
        SeparableTerm {
            out: Factor::closed(move |x| C64::new((dot(l.xi, x) - 1.0) * cut(norm2(x)), 0.0)),
            first: Factor::closed(|x| C64::new(cut(norm2(x)), 0.0)),
            second: Factor::One,
        },
        SeparableTerm {
            out: Factor::closed(|x| C64::new(cut(norm2(x)), 0.0)),
            first: Factor::closed(move |x| C64::new(dot(l.eta, x) * cut(norm2(x)), 0.0)),
            second: Factor::One,
        },
    ];
    Ok(Symbol::separable("q-separable", terms, 0.0).with_class(1, 0, None))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_examples() {
        let q = build_q(Linear::default()).unwrap();
        assert_eq!(q.eval(&[[3.0, 0.0], [0.0, 0.0]]).unwrap().re, 1.0);
        assert_eq!(q.eval(&[[1.5, 1.5], [1.5, -1.0]]).unwrap().re, 1.0);
        assert_eq!(q.eval(&[[0.0, 0.0], [0.0, 0.0]]).unwrap().re, 0.0);
        let l = Linear { xi: [1.0, 0.0], eta: [1.0, 0.0] };
        let v = build_q(l).unwrap().eval(&[[0.3, 0.0], [0.2, 0.0]]).unwrap().re;
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_functional_rejected() {
        let z = Linear { xi: [0.0; 2], eta: [0.0; 2] };
        assert!(build_q(z).is_err());
        assert!(q_separable(z).is_err());
    }

    #[test]
    fn separable_form_is_exact() {
        let l = Linear { xi: [0.25, -0.1], eta: [0.3, 0.25] };
        let (a, b) = (build_q(l).unwrap(), q_separable(l).unwrap());
        let mut r = crate::testkit::rng(7);
        use rand::Rng;
        for _ in 0..1000 {
            let p = [[r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)], [r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)]];
            assert!((a.eval(&p).unwrap() - b.eval(&p).unwrap()).norm() < 1e-14);
        }
    }

    #[test]
    fn q_bounded_in_blend_region() {
        let q = build_q(Linear::default()).unwrap();
        let mut r = crate::testkit::rng(3);
        use rand::Rng;
        for _ in 0..5000 {
            let p = [[r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)], [r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0)]];
            let rad = super::super::radius(&p);
            if rad > 1.0 {
                assert!(q.eval(&p).unwrap().re.abs() <= 1.0 + 1e-15);
            }
        }
    }
}
