use crate::diffusion::SpiderModel;
use crate::error::{invalid, Error, Result};
use crate::excessive::{reward_decomposition, RewardDecomposition};
use crate::function::PayoffFamily;
use crate::numerics::{find_root_bracketed, integrate_leg, solve_system, NewtonOptions, QUAD_TOL};

use super::region::StoppingRegion;
use super::value::assemble_value;
use super::{default_grid, diagnose, StoppingSolution};

/// How the boundary equations are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualPath {
    /// Antiderivatives for Brownian legs.
    ClosedForm,
    /// Adaptive quadrature of the reward density.
    Quadrature,
}

#[derive(Debug, Clone, Copy)]
pub struct ThresholdOptions {
    pub newton: NewtonOptions,
    /// `None` picks the closed form for Brownian legs.
    pub path: Option<ResidualPath>,
    pub quad_tol: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            newton: NewtonOptions::default(),
            path: None,
            quad_tol: QUAD_TOL,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ThresholdSolution {
    pub family: PayoffFamily,
    pub thresholds: Vec<f64>,
    pub initial_guess: Vec<f64>,
    pub path: ResidualPath,
    pub iterations: usize,
    /// Newton residual norms, starting at the initial guess.
    pub trace: Vec<f64>,
    /// Published thresholds for this configuration, when there are any.
    pub reference: Option<Vec<f64>>,
    /// Sign changes of each boundary equation along a sweep of its own threshold.
    pub sign_changes: Vec<usize>,
    /// Largest violation of `V_* <= V <= V^*` on the diagnostic grid, where
    /// `V_*`, `V^*` solve the problem with every coefficient set to the
    /// smallest, largest one.
    pub bound_violation: f64,
    pub solution: StoppingSolution,
}

fn check_family(model: &SpiderModel, family: &PayoffFamily) -> Result<()> {
    let a = family.coefficients();
    if a.len() != model.n() {
        return invalid(format!("{} coefficients for {} legs", a.len(), model.n()));
    }
    if a.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return invalid("payoff coefficients must be positive");
    }
    Ok(())
}

struct Quadrature {
    dec: RewardDecomposition,
    tol: f64,
}

impl Quadrature {
    /// `c int_0^z psi_killed f m'` on `leg`.
    fn upper(&self, model: &SpiderModel, z: f64, leg: usize) -> Result<f64> {
        let f = &self.dec.f_density;
        let q = integrate_leg(
            |y| model.psi_killed(y) * f.at(y, leg) * model.speed_density(y),
            0.0,
            z,
            self.tol,
        )?;
        Ok(model.c_r() * q.value)
    }

    /// `int_0^z phi f m'` on `leg`.
    fn lower(&self, model: &SpiderModel, z: f64, leg: usize) -> Result<f64> {
        let f = &self.dec.f_density;
        Ok(integrate_leg(
            |y| model.phi(y) * f.at(y, leg) * model.speed_density(y),
            0.0,
            z,
            self.tol,
        )?
        .value)
    }
}

/// Boundary equations for upper-ray regions `{x >= z_i}`, each divided by
/// `g_r((z_i, i), 0)`:
/// `N_i = c int_0^{z_i} psi_killed f_i dm + sum_k p_k int_0^{z_k} phi f_k dm + delta0`.
pub fn threshold_residuals(
    model: &SpiderModel,
    family: &PayoffFamily,
    z: &[f64],
    path: ResidualPath,
) -> Result<Vec<f64>> {
    check_family(model, family)?;
    if z.len() != model.n() || z.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return invalid("need one finite non-negative threshold per leg");
    }
    match path {
        ResidualPath::ClosedForm => closed_form(model, family, z),
        ResidualPath::Quadrature => {
            let q = Quadrature {
                dec: reward_decomposition(model, &family.payoff())?,
                tol: QUAD_TOL,
            };
            by_quadrature(model, &q, z)
        }
    }
}

fn closed_form(model: &SpiderModel, family: &PayoffFamily, z: &[f64]) -> Result<Vec<f64>> {
    if !model.is_brownian() {
        return invalid("closed-form boundary equations need Brownian legs");
    }
    let theta = model.c_r();
    let a = family.coefficients();
    let u: Vec<f64> = z.iter().map(|&v| theta * v).collect();
    Ok(match family {
        PayoffFamily::Linear(_) => {
            let common: f64 = (0..model.n())
                .map(|k| model.p(k + 1) * a[k] * (-u[k]).exp() * (1.0 + u[k]))
                .sum();
            (0..model.n())
                .map(|i| a[i] * (u[i] * u[i].cosh() - u[i].sinh()) - common)
                .collect()
        }
        PayoffFamily::Quadratic(_) => {
            let big_f = |v: f64| v * v * v.cosh() - 2.0 * v * v.sinh();
            let big_h = |v: f64| -(-v).exp() * v * (v + 2.0);
            let common: f64 = (0..model.n()).map(|k| model.p(k + 1) * a[k] * big_h(u[k])).sum();
            (0..model.n()).map(|i| (a[i] * big_f(u[i]) + common) / theta).collect()
        }
    })
}

fn by_quadrature(model: &SpiderModel, q: &Quadrature, z: &[f64]) -> Result<Vec<f64>> {
    let mut common = q.dec.delta0;
    for k in 1..=model.n() {
        common += model.p(k) * q.lower(model, z[k - 1], k)?;
    }
    (1..=model.n())
        .map(|i| Ok(q.upper(model, z[i - 1], i)? + common))
        .collect()
}

fn auto_path(model: &SpiderModel, opts: &ThresholdOptions) -> ResidualPath {
    opts.path.unwrap_or(if model.is_brownian() {
        ResidualPath::ClosedForm
    } else {
        ResidualPath::Quadrature
    })
}

/// Common threshold when every coefficient equals `a` (it does not depend
/// on `a` or on the leg probabilities).
pub fn scalar_threshold(model: &SpiderModel, family: &PayoffFamily, path: ResidualPath) -> Result<f64> {
    let n = model.n();
    let sym = match family {
        PayoffFamily::Linear(_) => PayoffFamily::Linear(vec![1.0; n]),
        PayoffFamily::Quadratic(_) => PayoffFamily::Quadratic(vec![1.0; n]),
    };
    let q = match path {
        ResidualPath::Quadrature => Some(Quadrature {
            dec: reward_decomposition(model, &sym.payoff())?,
            tol: QUAD_TOL,
        }),
        ResidualPath::ClosedForm => None,
    };
    let f = |z: f64| -> f64 {
        let zs = vec![z; n];
        let r = match &q {
            Some(q) => by_quadrature(model, q, &zs),
            None => closed_form(model, &sym, &zs),
        };
        r.map(|v| v[0]).unwrap_or(f64::NAN)
    };
    let lo = 1e-6 / model.c_r();
    if !(f(lo) < 0.0) {
        return invalid("boundary equation is not negative near the vertex");
    }
    let mut hi = 1.0 / model.c_r();
    while !(f(hi) > 0.0) {
        hi *= 2.0;
        if hi > 1e4 || f(hi).is_nan() {
            return invalid("could not bracket the scalar threshold");
        }
    }
    Ok(find_root_bracketed(f, lo, hi, 1e-13)?.root)
}

/// Counts sign changes of `N_i` as `z_i` sweeps `[0.05, 3] * z*_i` with the
/// other thresholds held at the solution.
pub fn uniqueness_sweep(
    model: &SpiderModel,
    family: &PayoffFamily,
    z: &[f64],
    path: ResidualPath,
) -> Result<Vec<usize>> {
    let q = match path {
        ResidualPath::Quadrature => Some(Quadrature {
            dec: reward_decomposition(model, &family.payoff())?,
            tol: 1e-10,
        }),
        ResidualPath::ClosedForm => None,
    };
    let eval = |zs: &[f64]| match &q {
        Some(q) => by_quadrature(model, q, zs),
        None => closed_form(model, family, zs),
    };
    let mut out = Vec::with_capacity(z.len());
    for i in 0..z.len() {
        let mut zs = z.to_vec();
        let mut changes = 0;
        let mut prev: Option<f64> = None;
        for k in 0..=60 {
            zs[i] = z[i] * (0.05 + 2.95 * k as f64 / 60.0);
            let v = eval(&zs)?[i];
            if let Some(p) = prev {
                if p.signum() != v.signum() && v != 0.0 {
                    changes += 1;
                }
            }
            if v != 0.0 {
                prev = Some(v);
            }
        }
        out.push(changes);
    }
    Ok(out)
}

fn reference_thresholds(model: &SpiderModel, family: &PayoffFamily) -> Option<Vec<f64>> {
    let uniform = model.n() == 3 && model.probabilities().iter().all(|p| (p - 1.0 / 3.0).abs() < 1e-12);
    let standard = family.coefficients() == [1.0, 2.0, 3.0];
    if !(model.is_brownian() && model.r() == 0.5 && uniform && standard) {
        return None;
    }
    Some(match family {
        PayoffFamily::Linear(_) => vec![1.4816, 1.2041, 1.0628],
        PayoffFamily::Quadratic(_) => vec![2.16987, 2.06543, 2.02250],
    })
}

/// Solves the per-leg threshold problem for a linear or quadratic payoff.
pub fn solve_threshold_system(
    model: &SpiderModel,
    family: &PayoffFamily,
    opts: &ThresholdOptions,
) -> Result<ThresholdSolution> {
    check_family(model, family)?;
    let path = auto_path(model, opts);
    if path == ResidualPath::ClosedForm && !model.is_brownian() {
        return invalid("closed-form boundary equations need Brownian legs");
    }
    let a = family.coefficients();
    // The common threshold solves the problem with every coefficient equal
    // to sum p_k A_k; it does not depend on that value.
    let z0 = scalar_threshold(model, family, path)?;
    let x0 = vec![z0; model.n()];

    let quad = match path {
        ResidualPath::Quadrature => Some(Quadrature {
            dec: reward_decomposition(model, &family.payoff())?,
            tol: opts.quad_tol,
        }),
        ResidualPath::ClosedForm => None,
    };
    let residuals = |z: &[f64]| -> Result<Vec<f64>> {
        if z.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::NonFinite("threshold iterate".into()));
        }
        match &quad {
            Some(q) => by_quadrature(model, q, z),
            None => closed_form(model, family, z),
        }
    };
    let sol = solve_system(residuals, &x0, opts.newton)?;
    let z = sol.x.clone();
    let final_residuals = residuals(&z)?;

    let payoff = family.payoff();
    let region = StoppingRegion::upper_rays(&z)?;
    let value = assemble_value(model, &region, &payoff)?;
    let mut diagnostics = diagnose(model, &payoff, &region, &value, final_residuals)?;

    // V_* <= V <= V^*
    let amin = a.iter().copied().fold(f64::INFINITY, f64::min);
    let amax = a.iter().copied().fold(0.0, f64::max);
    let unit = match family {
        PayoffFamily::Linear(_) => PayoffFamily::Linear(vec![1.0; model.n()]),
        PayoffFamily::Quadratic(_) => PayoffFamily::Quadratic(vec![1.0; model.n()]),
    };
    let unit_value = assemble_value(model, &StoppingRegion::upper_rays(&x0)?, &unit.payoff())?;
    let mut bound_violation = 0.0f64;
    for leg in 1..=model.n() {
        for &x in &default_grid(&region) {
            let v = value.at(x, leg);
            let u = unit_value.at(x, leg);
            bound_violation = bound_violation.max(amin * u - v).max(v - amax * u);
        }
    }

    let reference = reference_thresholds(model, family);
    if reference.is_none() {
        diagnostics
            .notes
            .push("no published thresholds for this configuration; not validated against a reference".into());
    }
    let sign_changes = uniqueness_sweep(model, family, &z, path)?;
    Ok(ThresholdSolution {
        family: family.clone(),
        thresholds: z,
        initial_guess: x0,
        path,
        iterations: sol.iterations,
        trace: sol.trace,
        reference,
        sign_changes,
        bound_violation,
        solution: StoppingSolution {
            region,
            value,
            diagnostics,
        },
    })
}
