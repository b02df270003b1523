//! Finite-difference derivatives.
//!
//! One-sided quotients use the second-order three-point stencils so that
//! left and right derivatives at kinks are resolved to O(h^2).

/// Default relative step; the absolute step is `DEFAULT_STEP * (|x| + 1)`.
pub const DEFAULT_STEP: f64 = 1e-6;

#[inline]
pub fn step_at(x: f64, rel: f64) -> f64 {
    rel * (x.abs() + 1.0)
}

/// Right derivative `(-3 f(x) + 4 f(x+h) - f(x+2h)) / 2h`.
pub fn forward<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h)
}

/// Left derivative `(3 f(x) - 4 f(x-h) + f(x-2h)) / 2h`.
pub fn backward<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h)
}

pub fn central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

pub fn second_central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Derivative on `[0, inf)`: central where the stencil fits, forward near 0.
pub fn on_half_line<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    if x > h {
        central(f, x, h)
    } else {
        forward(f, x, h)
    }
}
