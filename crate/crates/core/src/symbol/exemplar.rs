//! Reference members of the classes m_t^{k,k'}.
//!
//! m_t(p) = (1 - b(sqrt(t) r)) (B(r) r^k + (1 - B(r)) r^{k'}) with r = |p|,
//! b and B both equal to 1 below 1 and 0 above 2.

use super::{radius, Symbol};
use crate::smooth::{fall, fall_deriv};
use crate::Freq;

fn profile(r: f64, k: i32, kp: i32) -> (f64, f64) {
    let b = fall(r, 1.0, 2.0);
    let db = fall_deriv(r, 1.0, 2.0);
    let h = b * r.powi(k) + (1.0 - b) * r.powi(kp);
    let dh = db * (r.powi(k) - r.powi(kp)) + b * k as f64 * r.powi(k - 1) + (1.0 - b) * kp as f64 * r.powi(kp - 1);
    (h, dh)
}

fn gate(x: f64) -> (f64, f64) {
    (1.0 - fall(x, 1.0, 2.0), -fall_deriv(x, 1.0, 2.0))
}

pub fn class_exemplar(arity: usize, k: i32, k_prime: i32, t: f64) -> Symbol {
    let st = t.sqrt();
    Symbol::real("exemplar", arity, move |p| {
        let r = radius(p);
        if r == 0.0 {
            return 0.0;
        }
        gate(st * r).0 * profile(r, k, k_prime).0
    })
    .with_class(k, k_prime, Some(t))
}

/// d m_t / d p_c for flattened coordinate `c`.
pub fn class_exemplar_gradient(arity: usize, k: i32, k_prime: i32, t: f64, c: usize) -> Symbol {
    let st = t.sqrt();
    Symbol::real("exemplar-gradient", arity, move |p| {
        let r = radius(p);
        if r == 0.0 {
            return 0.0;
        }
        let (a, da) = gate(st * r);
        let (h, dh) = profile(r, k, k_prime);
        let x = p[c / 2][c % 2];
        (st * da * h + a * dh) * x / r
    })
    .with_class(k - 1, k_prime - 1, Some(t))
}

/// t d/dt m_t.
pub fn class_exemplar_time_derivative(arity: usize, k: i32, k_prime: i32, t: f64) -> Symbol {
    let st = t.sqrt();
    Symbol::real("exemplar-t-derivative", arity, move |p: &[Freq]| {
        let r = radius(p);
        let (_, da) = gate(st * r);
        0.5 * st * r * da * profile(r, k, k_prime).0
    })
    .with_class(k, k_prime, Some(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_matches_difference_quotient() {
        let m = class_exemplar(2, -1, -2, 4.0);
        let g = class_exemplar_gradient(2, -1, -2, 4.0, 2);
        let p = [[0.3, -0.2], [0.5, 0.4]];
        let h = 1e-6;
        let mut a = p;
        let mut b = p;
        a[1][0] += h;
        b[1][0] -= h;
        let fd = (m.eval(&a).unwrap() - m.eval(&b).unwrap()).re / (2.0 * h);
        assert!((fd - g.eval(&p).unwrap().re).abs() < 1e-6);
    }

    #[test]
    fn time_derivative_matches_difference_quotient() {
        let p = [[0.3, -0.2], [0.1, 0.2]];
        let t = 9.0;
        let h = 1e-5;
        let fd = (class_exemplar(2, 1, 0, t + h).eval(&p).unwrap() - class_exemplar(2, 1, 0, t - h).eval(&p).unwrap()).re
            / (2.0 * h);
        let an = class_exemplar_time_derivative(2, 1, 0, t).eval(&p).unwrap().re;
        assert!((t * fd - an).abs() < 1e-6);
    }
}
