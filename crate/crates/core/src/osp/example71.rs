use crate::diffusion::SpiderModel;
use crate::error::{invalid, Result};
use crate::function::{LegFunction, Side};
use crate::kernels::{psi_tilde_dx, psi_tilde_raw};
use crate::numerics::find_root_bracketed;

use super::region::StoppingRegion;
use super::value::assemble_value;
use super::{diagnose, StoppingSolution};

const TOL: f64 = 1e-14;

/// Regime of the three-leg `(1 + x, (1 - x/2)+, (1 - 2x)+)` problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example71Case {
    /// `r > 2`: leg 1, the vertex and initial pieces of legs 2 and 3 stop.
    A,
    /// `1/8 < r <= 2`: leg 1, the vertex and an initial piece of leg 2.
    B,
    /// `r <= 1/8`: only `{x >= z1}` on leg 1.
    C,
}

pub fn example71_case(r: f64) -> Example71Case {
    if r > 2.0 {
        Example71Case::A
    } else if r > 0.125 {
        Example71Case::B
    } else {
        Example71Case::C
    }
}

#[derive(Debug, Clone)]
pub struct Example71Solution {
    pub case: Example71Case,
    pub x2: Option<f64>,
    pub x3: Option<f64>,
    pub z1: Option<f64>,
    pub solution: StoppingSolution,
}

/// `(p/c)(g'_S(x-) phi - phi'_S g)` on `leg`.
fn tail_of_payoff(model: &SpiderModel, g: &LegFunction, x: f64, leg: usize) -> f64 {
    let side = if x > 0.0 { Side::Left } else { Side::Right };
    model.p(leg) / model.c_r() * (g.ds(model, x, leg, side) * model.phi(x) - model.phi_scale_deriv(x) * g.at(x, leg))
}

/// `g psi_tilde'_S - g'_S psi_tilde` on leg 1.
fn lower_bracket_leg1(model: &SpiderModel, g: &LegFunction, x: f64) -> f64 {
    let s = model.scale_dx(x);
    g.at(x, 1) * psi_tilde_dx(model, x, 1) / s - g.ds(model, x, 1, Side::Right) * psi_tilde_raw(model, x, 1)
}

/// Solves the three-leg example for uniform leg probabilities.
pub fn solve_spider_example71(model: &SpiderModel) -> Result<Example71Solution> {
    if model.n() != 3 || model.probabilities().iter().any(|p| (p - 1.0 / 3.0).abs() > 1e-12) {
        return invalid("the example is posed on three legs with equal probabilities");
    }
    if !model.is_brownian() {
        return invalid("the example is posed for Brownian legs");
    }
    let g = LegFunction::example71();
    let case = example71_case(model.r());
    let (mut x2, mut x3, mut z1) = (None, None, None);
    let region = match case {
        Example71Case::A | Example71Case::B => {
            let root2 = find_root_bracketed(|x| tail_of_payoff(model, &g, x, 2), 0.0, 2.0, TOL)?.root;
            x2 = Some(root2);
            let mut region = StoppingRegion::empty(3)
                .with_interval(1, 0.0, f64::INFINITY)?
                .with_interval(2, 0.0, root2)?;
            if case == Example71Case::A {
                let root3 = find_root_bracketed(|x| tail_of_payoff(model, &g, x, 3), 0.0, 0.5, TOL)?.root;
                x3 = Some(root3);
                region = region.with_interval(3, 0.0, root3)?;
            }
            region
        }
        Example71Case::C => {
            let f = |x: f64| lower_bracket_leg1(model, &g, x);
            let root = if f(0.0) >= 0.0 {
                0.0
            } else {
                let mut hi = 1.0;
                while f(hi) < 0.0 {
                    hi *= 2.0;
                    if hi > 1e6 {
                        return invalid("no stopping boundary found on leg 1");
                    }
                }
                find_root_bracketed(f, 0.0, hi, TOL)?.root
            };
            z1 = Some(root);
            StoppingRegion::empty(3).with_interval(1, root, f64::INFINITY)?
        }
    };
    let value = assemble_value(model, &region, &g)?;
    let residuals: Vec<f64> = match case {
        Example71Case::C => vec![lower_bracket_leg1(model, &g, z1.unwrap_or(0.0))],
        _ => x2
            .iter()
            .map(|&x| tail_of_payoff(model, &g, x, 2))
            .chain(x3.iter().map(|&x| tail_of_payoff(model, &g, x, 3)))
            .collect(),
    };
    let diagnostics = diagnose(model, &g, &region, &value, residuals)?;
    Ok(Example71Solution {
        case,
        x2,
        x3,
        z1,
        solution: StoppingSolution {
            region,
            value,
            diagnostics,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::SpiderPoint;

    fn solve(r: f64) -> Example71Solution {
        solve_spider_example71(&SpiderModel::brownian_uniform(3, r).unwrap()).unwrap()
    }

    #[test]
    fn case_b_at_one_half() {
        let s = solve(0.5);
        assert_eq!(s.case, Example71Case::B);
        assert!((s.x2.unwrap() - 1.0).abs() < 1e-12);
        assert!(s.solution.region.vertex_included());
        assert_eq!(s.solution.value.at(2.0, 3), (-2f64).exp());
    }

    #[test]
    fn case_a_closed_forms() {
        let s = solve(8.0);
        assert_eq!(s.case, Example71Case::A);
        assert!((s.x2.unwrap() - 1.75).abs() < 1e-10);
        assert!((s.x3.unwrap() - 0.25).abs() < 1e-10);
        assert!((s.solution.diagnostics.value_gluing + 0.5).abs() < 1e-12);
    }

    #[test]
    fn case_c_value_and_smooth_fit() {
        let s = solve(0.125);
        assert_eq!(s.case, Example71Case::C);
        assert_eq!(s.z1, Some(0.0));
        let s = solve(0.05);
        let z = s.z1.unwrap();
        assert!(z > 0.0);
        let m = SpiderModel::brownian_uniform(3, 0.05).unwrap();
        let theta = (0.1f64).sqrt();
        let k = (1.0 + z) / (theta * psi_tilde_raw(&m, z, 1));
        assert!(k > 1.0);
        for x in [0.0, 0.7, 3.0] {
            assert!((s.solution.value.at(x, 2) - k * (-theta * x).exp()).abs() < 1e-12);
        }
        let fit = s.solution.diagnostics.smooth_fit[0].1;
        assert!(fit < 1e-6, "{fit}");
        assert!(s.solution.diagnostics.majorant_min_gap > -1e-12);
        assert!(!s.solution.region.contains(&SpiderPoint::VERTEX));
    }

    #[test]
    fn resolvent_route_agrees() {
        for r in [0.05, 0.5, 8.0] {
            let s = solve(r);
            let gap = s.solution.diagnostics.resolvent_route_gap.unwrap();
            assert!(gap < 1e-6, "r = {r}: {gap}");
        }
    }
}
