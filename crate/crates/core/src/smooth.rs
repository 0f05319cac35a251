//! Smooth step and bump functions built from exp(-1/x).

#[inline]
fn e(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

#[inline]
fn de(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp() / (x * x)
    } else {
        0.0
    }
}

/// C-infinity step: 0 for x <= 0, 1 for x >= 1.
#[inline]
pub fn step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = e(x);
        a / (a + e(1.0 - x))
    }
}

/// Derivative of [`step`].
#[inline]
pub fn step_deriv(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let (a, b) = (e(x), e(1.0 - x));
    let s = a + b;
    (de(x) * b + a * de(1.0 - x)) / (s * s)
}

/// Falls from 1 (x <= lo) to 0 (x >= hi).
#[inline]
pub fn fall(x: f64, lo: f64, hi: f64) -> f64 {
    1.0 - step((x - lo) / (hi - lo))
}

#[inline]
pub fn fall_deriv(x: f64, lo: f64, hi: f64) -> f64 {
    -step_deriv((x - lo) / (hi - lo)) / (hi - lo)
}

/// Rises from 0 (x <= lo) to 1 (x >= hi).
#[inline]
pub fn rise(x: f64, lo: f64, hi: f64) -> f64 {
    step((x - lo) / (hi - lo))
}
