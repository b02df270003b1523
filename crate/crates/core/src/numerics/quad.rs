use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

// 15-point Kronrod abscissae/weights and the embedded 7-point Gauss weights.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

const MAX_PANELS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    if !res_k.is_finite() {
        return Err(Error::NonFinite(format!("integrand on [{a}, {b}]")));
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    res_asc *= half.abs();
    res_abs *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Panel { a, b, value, error })
}

fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    let first = kronrod15(&f, a, b)?;
    let mut heap = BinaryHeap::new();
    let mut total = first.value;
    let mut total_err = first.error;
    heap.push(first);
    let mut panels = 1;
    while total_err > tol.max(tol * total.abs()) {
        if panels >= MAX_PANELS {
            return Err(Error::Quadrature {
                partial: total,
                estimate: total_err,
            });
        }
        let worst = heap.pop().expect("heap holds at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // panel can no longer be split in floating point
            return Err(Error::Quadrature {
                partial: total,
                estimate: total_err,
            });
        }
        let left = kronrod15(&f, worst.a, mid)?;
        let right = kronrod15(&f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        panels += 1;
    }
    // Re-sum to shed accumulated cancellation in the running totals.
    let (value, error_estimate) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    Ok(QuadResult {
        value,
        error_estimate,
        panels,
    })
}

/// Integrates `f` over `[a, b]`, where `b` may be `f64::INFINITY`.
///
/// Semi-infinite ranges are mapped onto `[0, 1)` with `x = a + u / (1 - u)`;
/// the caller guarantees at least exponential decay of `f`. The tolerance is
/// applied both absolutely and relative to the integral's magnitude.
pub fn integrate_leg<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    if a.is_nan() || b.is_nan() || a < 0.0 || b < a || !a.is_finite() {
        return Err(Error::InvalidArgument(format!("bad integration range [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error_estimate: 0.0,
            panels: 0,
        });
    }
    if b.is_infinite() {
        let g = |u: f64| {
            let w = 1.0 - u;
            let x = a + u / w;
            let fx = f(x);
            if fx == 0.0 {
                0.0
            } else {
                fx / (w * w)
            }
        };
        adaptive(g, 0.0, 1.0, tol)
    } else {
        adaptive(f, a, b, tol)
    }
}

/// Integrates over consecutive pieces `[p0, p1], [p1, p2], ...` and sums.
/// The last break point may be infinite.
pub fn integrate_pieces<F: Fn(f64) -> f64>(f: F, breaks: &[f64], tol: f64) -> Result<QuadResult> {
    let mut acc = QuadResult {
        value: 0.0,
        error_estimate: 0.0,
        panels: 0,
    };
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    for w in breaks.windows(2) {
        let q = integrate_leg(&f, w[0], w[1], tol / pieces)?;
        acc.value += q.value;
        acc.error_estimate += q.error_estimate;
        acc.panels += q.panels;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_tail() {
        let q = integrate_leg(|x| (-x).exp(), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!((q.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn error_estimate_bounds_true_error() {
        let z = 1.4816f64;
        let exact = z * z.cosh() - z.sinh();
        let q = integrate_leg(|y| y * y.sinh(), 0.0, z, 1e-9).unwrap();
        assert!((q.value - exact).abs() <= 10.0 * q.error_estimate + 1e-14);
    }

    #[test]
    fn empty_range() {
        assert_eq!(integrate_leg(|x| x, 2.0, 2.0, 1e-9).unwrap().value, 0.0);
        assert!(integrate_leg(|x| x, 2.0, 1.0, 1e-9).is_err());
    }

    #[test]
    fn non_convergence_is_reported() {
        // 1/x is not integrable at 0; refinement runs out of panels.
        let err = integrate_leg(|x| if x > 0.0 { 1.0 / x } else { 0.0 }, 0.0, 1.0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::Quadrature { .. } | Error::NonFinite(_)), "{err:?}");
    }
}
