use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct NewtonOptions {
    /// Infinity-norm residual tolerance.
    pub tol: f64,
    pub max_iter: usize,
    /// Forward-difference Jacobian step, relative to `1 + |x_k|`.
    pub fd_step: f64,
    /// Keep every iterate componentwise positive.
    pub keep_positive: bool,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: super::SYSTEM_TOL,
            max_iter: 100,
            fd_step: 1e-7,
            keep_positive: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemSolution {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    /// Infinity-norm residual of every accepted iterate, starting with `x0`.
    pub trace: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Damped Newton iteration with a forward-difference Jacobian and
/// backtracking line search on the infinity norm of the residual.
pub fn solve_system<F>(f: F, x0: &[f64], opts: NewtonOptions) -> Result<SystemSolution>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty initial iterate".into()));
    }
    if opts.keep_positive && x0.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidArgument("initial iterate must be positive".into()));
    }
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    if fx.len() != n {
        return Err(Error::InvalidArgument(format!(
            "system maps {n} unknowns to {} equations",
            fx.len()
        )));
    }
    let mut norm = inf_norm(&fx);
    let mut trace = vec![norm];
    let diverged = |x: Vec<f64>, norm: f64, trace: Vec<f64>, it: usize| Error::Divergence {
        iterations: it,
        last: x,
        residual: norm,
        trace,
    };

    for it in 0..opts.max_iter {
        if norm <= opts.tol {
            return Ok(SystemSolution {
                x,
                residual: norm,
                iterations: it,
                trace,
            });
        }
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            let h = opts.fd_step * (1.0 + x[j].abs());
            let mut xp = x.clone();
            xp[j] += h;
            let fp = f(&xp)?;
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fx[i]) / h;
            }
        }
        let rhs = -DVector::from_column_slice(&fx);
        let Some(step) = jac.lu().solve(&rhs) else {
            return Err(diverged(x, norm, trace, it));
        };

        let mut lambda = 1.0f64;
        if opts.keep_positive {
            // fraction-to-boundary
            for j in 0..n {
                if step[j] < 0.0 {
                    lambda = lambda.min(0.9 * x[j] / -step[j]);
                }
            }
        }
        let mut accepted = None;
        while lambda > 1e-12 {
            let trial: Vec<f64> = (0..n).map(|j| x[j] + lambda * step[j]).collect();
            if let Ok(ft) = f(&trial) {
                let tn = inf_norm(&ft);
                if tn.is_finite() && tn < (1.0 - 1e-4 * lambda) * norm {
                    accepted = Some((trial, ft, tn));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, ft, tn)) => {
                x = xt;
                fx = ft;
                norm = tn;
                trace.push(norm);
            }
            None => return Err(diverged(x, norm, trace, it)),
        }
    }
    if norm <= opts.tol {
        return Ok(SystemSolution {
            x,
            residual: norm,
            iterations: opts.max_iter,
            trace,
        });
    }
    Err(diverged(x, norm, trace, opts.max_iter))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system() {
        let b = [1.0, 2.0, 3.0];
        let sol = solve_system(
            |x| Ok(x.iter().zip(b).map(|(xi, bi)| xi - bi).collect()),
            &[0.5, 0.5, 0.5],
            NewtonOptions::default(),
        )
        .unwrap();
        for (xi, bi) in sol.x.iter().zip(b) {
            assert!((xi - bi).abs() < 1e-10);
        }
    }

    #[test]
    fn trace_is_monotone() {
        let sol = solve_system(
            |x| Ok(vec![x[0] * x[0] - 4.0, x[0] * x[1] - 6.0]),
            &[5.0, 0.1],
            NewtonOptions::default(),
        )
        .unwrap();
        assert!((sol.x[0] - 2.0).abs() < 1e-9 && (sol.x[1] - 3.0).abs() < 1e-9);
        assert!(sol.trace.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn reports_divergence() {
        let err = solve_system(|x| Ok(vec![x[0] * x[0] + 1.0]), &[1.0], NewtonOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }
}
