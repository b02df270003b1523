//! Optimal stopping: stopping regions, value assembly, the solvers for the
//! shipped payoff families and the verification battery.

mod example71;
mod region;
mod resolvent;
mod threshold;
mod value;

pub use example71::{example71_case, solve_spider_example71, Example71Case, Example71Solution};
pub use region::{BoundaryPoint, StoppingRegion};
pub use resolvent::{resolvent_apply, resolvent_apply_tol, riesz_value, Restrict};
pub use threshold::{
    scalar_threshold, solve_threshold_system, threshold_residuals, uniqueness_sweep, ResidualPath, ThresholdOptions,
    ThresholdSolution,
};
pub use value::assemble_value;

use crate::diffusion::{SpiderModel, SpiderPoint};
use crate::error::{invalid, Result};
use crate::excessive::{gluing_value, is_excessive, reward_decomposition, ExcessiveTolerances};
use crate::function::{LegFunction, Side};
use crate::numerics::diff;

/// Solver output: region, value function and diagnostics.
#[derive(Debug, Clone)]
pub struct StoppingSolution {
    pub region: StoppingRegion,
    pub value: LegFunction,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub payoff_gluing: f64,
    pub value_gluing: f64,
    /// `|dV/dS - dg/dS|` on the continuation side of every boundary point.
    pub smooth_fit: Vec<(SpiderPoint, f64)>,
    /// `min (V - g)` over the diagnostic grid.
    pub majorant_min_gap: f64,
    /// Residuals of the equations the solver drove to zero.
    pub equation_residuals: Vec<f64>,
    /// Largest gap between the hitting-time value and its resolvent
    /// representation at the vertex and the boundary points.
    pub resolvent_route_gap: Option<f64>,
    pub notes: Vec<String>,
}

/// Sufficient condition for the vertex to continue: `D g(0) > 0`.
pub fn vertex_in_continuation(model: &SpiderModel, g: &LegFunction) -> Result<bool> {
    Ok(gluing_value(model, g)? > 0.0)
}

/// Grid on `[0, xmax]` refined around the region's boundary points.
pub fn default_grid(region: &StoppingRegion) -> Vec<f64> {
    let bpts: Vec<f64> = region.boundary_points().iter().map(|b| b.point.x).collect();
    let xmax = bpts.iter().fold(5.0f64, |m, &x| m.max(3.0 * x));
    let mut grid: Vec<f64> = (0..=120).map(|k| xmax * k as f64 / 120.0).collect();
    for &b in &bpts {
        for d in [-1e-3, 0.0, 1e-3] {
            if b + d > 0.0 {
                grid.push(b + d);
            }
        }
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn fd_scale_slope(model: &SpiderModel, f: &LegFunction, x: f64, leg: usize, side: Side) -> f64 {
    let h = diff::step_at(x, 1e-6).min(x / 2.5);
    let g = |y: f64| f.at(y, leg);
    let d = match side {
        Side::Left => diff::backward(g, x, h),
        Side::Right => diff::forward(g, x, h),
    };
    d / model.scale_dx(x)
}

/// Smooth-fit residual `|dV/dS - dg/dS|` at a non-vertex boundary point,
/// with one-sided differences of `V` on the continuation side.
pub fn smooth_fit_check(
    model: &SpiderModel,
    sol: &StoppingSolution,
    payoff: &LegFunction,
    boundary: &SpiderPoint,
) -> Result<f64> {
    if boundary.is_vertex() {
        return invalid("smooth fit is not defined at the vertex");
    }
    let Some(bp) = sol.region.boundary_points().into_iter().find(|b| b.point == *boundary) else {
        return invalid(format!("{boundary} is not a boundary point of {}", sol.region));
    };
    let (x, leg) = (boundary.x, boundary.leg);
    let dv = fd_scale_slope(model, &sol.value, x, leg, bp.continuation);
    let dg = payoff.ds(model, x, leg, bp.continuation);
    Ok((dv - dg).abs())
}

/// Builds the standard diagnostics for a candidate solution.
pub fn diagnose(
    model: &SpiderModel,
    payoff: &LegFunction,
    region: &StoppingRegion,
    value: &LegFunction,
    equation_residuals: Vec<f64>,
) -> Result<Diagnostics> {
    let grid = default_grid(region);
    let mut gap = f64::INFINITY;
    for leg in 1..=model.n() {
        for &x in &grid {
            gap = gap.min(value.at(x, leg) - payoff.at(x, leg));
        }
    }
    let partial = StoppingSolution {
        region: region.clone(),
        value: value.clone(),
        diagnostics: Diagnostics::default(),
    };
    let mut smooth_fit = Vec::new();
    for bp in region.boundary_points() {
        smooth_fit.push((bp.point, smooth_fit_check(model, &partial, payoff, &bp.point)?));
    }
    let mut notes = Vec::new();
    let value_gluing = gluing_value(model, value)?;
    let resolvent_route_gap = match reward_decomposition(model, payoff) {
        Ok(mut dec) => {
            // Without smooth fit at the vertex the value carries its own
            // vertex mass.
            if region.vertex_included() {
                dec.delta0 = -value_gluing;
            }
            let mut pts = vec![SpiderPoint::VERTEX];
            pts.extend(region.boundary_points().iter().map(|b| b.point));
            let mut worst: Option<f64> = Some(0.0);
            for p in &pts {
                match riesz_value(model, &dec, Restrict::Region(region), p) {
                    Ok(v) => worst = worst.map(|w| w.max((v - value.eval(p)).abs())),
                    Err(e) => {
                        notes.push(format!("resolvent route unavailable at {p}: {e}"));
                        worst = None;
                        break;
                    }
                }
            }
            worst
        }
        Err(e) => {
            notes.push(format!("reward decomposition failed: {e}"));
            None
        }
    };
    Ok(Diagnostics {
        payoff_gluing: gluing_value(model, payoff)?,
        value_gluing,
        smooth_fit,
        majorant_min_gap: gap,
        equation_residuals,
        resolvent_route_gap,
        notes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed quantity for the check.
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub checks: Vec<VerificationCheck>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&VerificationCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs the six checks (majorant, excessivity, boundary equations, sign of
/// the reward density on the region, vertex condition, smooth fit).
pub fn verify_solution(
    model: &SpiderModel,
    payoff: &LegFunction,
    sol: &StoppingSolution,
    grid: &[f64],
    tol: f64,
) -> Result<VerificationReport> {
    let region = &sol.region;
    let dec = reward_decomposition(model, payoff)?;
    let mut checks = Vec::new();

    let mut worst_gap = f64::INFINITY;
    let mut at = String::new();
    for leg in 1..=model.n() {
        for &x in grid {
            let d = sol.value.at(x, leg) - payoff.at(x, leg);
            if d < worst_gap {
                worst_gap = d;
                at = format!("{x}@{leg}");
            }
        }
    }
    checks.push(VerificationCheck {
        name: "majorant",
        passed: worst_gap >= -tol,
        value: worst_gap,
        detail: format!("min(V - g) = {worst_gap:.3e} at {at}"),
    });

    let exc = is_excessive(
        model,
        &sol.value,
        grid,
        ExcessiveTolerances {
            sign: tol,
            monotonicity: tol,
        },
    );
    checks.push(VerificationCheck {
        name: "excessive",
        passed: exc.excessive,
        value: exc.gluing,
        detail: format!(
            "gluing {:.3e}, nonnegative {}, monotone {}, bounded {}",
            exc.gluing, exc.nonnegative_ok, exc.monotone_ok, exc.bounded_ok
        ),
    });

    let mut worst_eq = 0.0f64;
    let mut eq_detail = Vec::new();
    for bp in region.boundary_points() {
        let res = riesz_value(model, &dec, Restrict::Complement(region), &bp.point)?;
        worst_eq = worst_eq.max(res.abs());
        eq_detail.push(format!("{}: {res:.3e}", bp.point));
    }
    checks.push(VerificationCheck {
        name: "boundary-equations",
        passed: worst_eq < tol,
        value: worst_eq,
        detail: eq_detail.join(", "),
    });

    let mut worst_sign = 0.0f64;
    for leg in 1..=model.n() {
        for &x in grid {
            if x > 0.0 && region.contains_on_leg(x, leg) {
                let f = dec.f_density.at(x, leg);
                if f.is_finite() {
                    worst_sign = worst_sign.min(f);
                }
            }
        }
    }
    for atom in &dec.kink_atoms {
        if region.contains_on_leg(atom.x, atom.leg) {
            worst_sign = worst_sign.min(atom.mass);
        }
    }
    checks.push(VerificationCheck {
        name: "density-sign",
        passed: worst_sign >= -tol,
        value: worst_sign,
        detail: format!("min f on the region = {worst_sign:.3e}"),
    });

    let vertex_ok = !(dec.delta0 < 0.0 && region.vertex_included());
    checks.push(VerificationCheck {
        name: "vertex",
        passed: vertex_ok,
        value: dec.delta0,
        detail: format!("delta0 = {:.6}, vertex stops: {}", dec.delta0, region.vertex_included()),
    });

    let mut worst_fit = 0.0f64;
    let mut fit_detail = Vec::new();
    for bp in region.boundary_points() {
        let r = smooth_fit_check(model, sol, payoff, &bp.point)?;
        worst_fit = worst_fit.max(r);
        fit_detail.push(format!("{}: {r:.3e}", bp.point));
    }
    checks.push(VerificationCheck {
        name: "smooth-fit",
        passed: worst_fit < tol,
        value: worst_fit,
        detail: fit_detail.join(", "),
    });

    Ok(VerificationReport { checks })
}
