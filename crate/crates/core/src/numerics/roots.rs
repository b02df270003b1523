use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 200;

/// Outcome of a bracketed scalar root search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootResult {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Final bracket `(lo, hi)`, always containing `root`.
    pub bracket: (f64, f64),
}

/// Finds a zero of a continuous `f` on `[lo, hi]` given a sign change.
///
/// Illinois-modified secant steps, with a bisection step whenever the
/// bracket failed to halve over the previous two iterations. Terminates when
/// `|f(root)| <= tol` or the bracket width is at most `tol * (1 + |root|)`.
pub fn find_root_bracketed<F>(f: F, lo: f64, hi: f64, tol: f64) -> Result<RootResult>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) || lo > hi || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "bad bracket [{lo}, {hi}] or tolerance {tol}"
        )));
    }
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa.is_finite() && fb.is_finite()) {
        return Err(Error::NonFinite("root bracket endpoint".into()));
    }
    if fa == 0.0 {
        return Ok(RootResult {
            root: a,
            residual: 0.0,
            iterations: 0,
            bracket: (a, a),
        });
    }
    if fb == 0.0 {
        return Ok(RootResult {
            root: b,
            residual: 0.0,
            iterations: 0,
            bracket: (b, b),
        });
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange {
            lo,
            hi,
            f_lo: fa,
            f_hi: fb,
        });
    }

    // Which endpoint was retained on the previous step (for Illinois halving).
    let mut retained: i8 = 0;
    let mut widths = [b - a, b - a];
    for it in 1..=MAX_ITERATIONS {
        let width = b - a;
        let stalled = it > 2 && width > 0.5 * widths[0];
        let mut x = if stalled {
            0.5 * (a + b)
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(Error::NonFinite(format!("root function at {x}")));
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if retained == 1 {
                fb *= 0.5;
            }
            retained = 1;
        } else {
            b = x;
            fb = fx;
            if retained == -1 {
                fa *= 0.5;
            }
            retained = -1;
        }
        widths = [widths[1], b - a];
        if fx.abs() <= tol || (b - a) <= tol * (1.0 + x.abs()) {
            return Ok(RootResult {
                root: x,
                residual: fx,
                iterations: it,
                bracket: (a, b),
            });
        }
    }
    Err(Error::RootMaxIterations {
        iterations: MAX_ITERATIONS,
        bracket: (a, b),
    })
}
