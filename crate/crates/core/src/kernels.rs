//! Green kernel, `psi_tilde`, hitting-time Laplace transforms and the
//! minimal excessive / harmonic functions of a diffusion spider.

use std::f64::consts::PI;

use crate::diffusion::{Pole, SpiderModel, SpiderPoint};
use crate::error::{invalid, Result};
use crate::function::{LegFunction, Side};

/// Exponent magnitude beyond which kernel products are formed in log space.
pub const LOG_SPACE_SWITCH: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelBranch {
    /// Same leg, `x <= y`: `phi(y) psi_tilde(x)`.
    SameLegBelow,
    /// Same leg, `y < x`: `phi(x) psi_tilde(y)`.
    SameLegAbove,
    /// Different legs: `phi(x) phi(y) / c_r`.
    CrossLeg,
    /// At least one argument is the vertex.
    Vertex,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenKernelValue {
    pub value: f64,
    pub branch: KernelBranch,
}

fn log_sum_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub(crate) fn psi_tilde_raw(model: &SpiderModel, x: f64, leg: usize) -> f64 {
    model.psi_killed(x) / model.p(leg) + model.phi(x) / model.c_r()
}

pub(crate) fn ln_psi_tilde(model: &SpiderModel, x: f64, leg: usize) -> f64 {
    let a = if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        model.ln_psi_killed(x) - model.p(leg).ln()
    };
    log_sum_exp(a, model.ln_phi(x) - model.c_r().ln())
}

/// `x`-derivative of `psi_tilde`.
pub(crate) fn psi_tilde_dx(model: &SpiderModel, x: f64, leg: usize) -> f64 {
    model.psi_killed_dx(x) / model.p(leg) + model.phi_dx(x) / model.c_r()
}

/// `psi_tilde(x, i) = psi_killed(x) / p_i + phi(x) / c_r`, positive and
/// increasing on every leg.
pub fn psi_tilde(model: &SpiderModel, x: f64, leg: usize) -> Result<f64> {
    model.check_leg(leg)?;
    if !(x >= 0.0) {
        return invalid(format!("distance must be non-negative, got {x}"));
    }
    let v = psi_tilde_raw(model, x, leg);
    Ok(if v.is_finite() {
        v
    } else {
        ln_psi_tilde(model, x, leg).exp()
    })
}

/// Product `a * b` given both factors' logs; direct unless either log is
/// beyond the switch.
fn product(ln_a: f64, ln_b: f64, a: impl FnOnce() -> f64, b: impl FnOnce() -> f64) -> f64 {
    if ln_a.abs() > LOG_SPACE_SWITCH || ln_b.abs() > LOG_SPACE_SWITCH {
        (ln_a + ln_b).exp()
    } else {
        a() * b()
    }
}

pub(crate) fn green_raw(model: &SpiderModel, x: f64, i: usize, y: f64, k: usize) -> GreenKernelValue {
    let c = model.c_r();
    if x == 0.0 || y == 0.0 || i != k {
        let branch = if x == 0.0 || y == 0.0 {
            KernelBranch::Vertex
        } else {
            KernelBranch::CrossLeg
        };
        let value = product(
            model.ln_phi(x),
            model.ln_phi(y) - c.ln(),
            || model.phi(x),
            || model.phi(y) / c,
        );
        return GreenKernelValue { value, branch };
    }
    let (lo, hi, branch) = if x <= y {
        (x, y, KernelBranch::SameLegBelow)
    } else {
        (y, x, KernelBranch::SameLegAbove)
    };
    let value = product(
        model.ln_phi(hi),
        ln_psi_tilde(model, lo, i),
        || model.phi(hi),
        || psi_tilde_raw(model, lo, i),
    );
    GreenKernelValue { value, branch }
}

/// Green kernel `g_r(a, b)`: density of the `r`-resolvent with respect to
/// the spider's speed measure `p_k m(dy)` on the target leg.
pub fn green_kernel(model: &SpiderModel, from: &SpiderPoint, to: &SpiderPoint) -> Result<GreenKernelValue> {
    model.check_point(from)?;
    model.check_point(to)?;
    Ok(green_raw(model, from.x, from.leg, to.x, to.leg))
}

/// Transition density of the Brownian spider with respect to length on the
/// target leg.
pub fn transition_density_brownian(model: &SpiderModel, t: f64, from: &SpiderPoint, to: &SpiderPoint) -> Result<f64> {
    if !model.is_brownian() {
        return invalid("transition density is only available for Brownian legs");
    }
    if !(t > 0.0 && t.is_finite()) {
        return invalid(format!("time must be positive, got {t}"));
    }
    model.check_point(from)?;
    model.check_point(to)?;
    let (x, y) = (from.x, to.x);
    let norm = (2.0 * PI * t).sqrt();
    let image = (-(x + y) * (x + y) / (2.0 * t)).exp() / norm;
    if from.is_vertex() || to.is_vertex() || from.leg != to.leg {
        return Ok(2.0 * model.p(to.leg) * image);
    }
    let direct = (-(x - y) * (x - y) / (2.0 * t)).exp() / norm;
    Ok(direct - image + 2.0 * model.p(from.leg) * image)
}

/// Increasing solution of the skew-diffusion reduction with `principal_leg`
/// as the positive half line: `psi_tilde(x, leg)` for `x >= 0`,
/// `phi(-x) / c_r` for `x < 0`.
pub fn skew_psi(model: &SpiderModel, x: f64, principal_leg: usize) -> Result<f64> {
    model.check_leg(principal_leg)?;
    if x >= 0.0 {
        psi_tilde(model, x, principal_leg)
    } else {
        Ok(model.phi(-x) / model.c_r())
    }
}

pub(crate) fn hitting_raw(model: &SpiderModel, x: f64, i: usize, y: f64, k: usize) -> f64 {
    if y == 0.0 {
        return model.phi(x);
    }
    if x == y && (i == k || x == 0.0) {
        return 1.0;
    }
    let ln_target = ln_psi_tilde(model, y, k);
    let ln = if x == 0.0 || i != k {
        model.ln_phi(x) - model.c_r().ln() - ln_target
    } else if x < y {
        ln_psi_tilde(model, x, k) - ln_target
    } else {
        model.ln_phi(x) - model.ln_phi(y)
    };
    if ln.abs() > LOG_SPACE_SWITCH {
        return ln.exp();
    }
    if x == 0.0 || i != k {
        model.phi(x) / (model.c_r() * psi_tilde_raw(model, y, k))
    } else if x < y {
        psi_tilde_raw(model, x, k) / psi_tilde_raw(model, y, k)
    } else {
        model.phi(x) / model.phi(y)
    }
}

/// `E_from[exp(-r H_target)]`.
pub fn hitting_laplace(model: &SpiderModel, from: &SpiderPoint, target: &SpiderPoint) -> Result<f64> {
    model.check_point(from)?;
    model.check_point(target)?;
    Ok(hitting_raw(model, from.x, from.leg, target.x, target.leg))
}

fn martin_raw(model: &SpiderModel, x: f64, i: usize, pole: &Pole) -> f64 {
    match *pole {
        Pole::Infinity { leg } => {
            if x > 0.0 && i == leg {
                model.c_r() * psi_tilde_raw(model, x, i)
            } else {
                model.phi(x)
            }
        }
        Pole::Point(p) => {
            if p.is_vertex() || x == 0.0 || i != p.leg {
                model.phi(x)
            } else if x <= p.x {
                model.c_r() * psi_tilde_raw(model, x, i)
            } else {
                let ratio = model.ln_phi(x) - model.ln_phi(p.x);
                model.c_r() * psi_tilde_raw(model, p.x, i) * ratio.exp()
            }
        }
    }
}

fn martin_dx(model: &SpiderModel, x: f64, i: usize, pole: &Pole, side: Side) -> f64 {
    let c = model.c_r();
    match *pole {
        Pole::Infinity { leg } => {
            if i == leg {
                c * psi_tilde_dx(model, x, i)
            } else {
                model.phi_dx(x)
            }
        }
        Pole::Point(p) => {
            if p.is_vertex() || i != p.leg {
                model.phi_dx(x)
            } else if x < p.x || (x == p.x && side == Side::Left) {
                c * psi_tilde_dx(model, x, i)
            } else {
                c * psi_tilde_raw(model, p.x, i) * model.phi_dx(x) / model.phi(p.x)
            }
        }
    }
}

fn check_pole(model: &SpiderModel, pole: &Pole) -> Result<()> {
    match pole {
        Pole::Point(p) => model.check_point(p),
        Pole::Infinity { leg } => model.check_leg(*leg),
    }
}

/// Minimal `r`-excessive function with the given pole, normalized to 1 at
/// the vertex.
pub fn minimal_excessive(model: &SpiderModel, at: &SpiderPoint, pole: &Pole) -> Result<f64> {
    model.check_point(at)?;
    check_pole(model, pole)?;
    Ok(martin_raw(model, at.x, at.leg, pole))
}

/// `H(x, i) = (a_i c_r / p_i) psi_killed(x) + phi(x) sum(a)`.
pub fn harmonic_function(model: &SpiderModel, a: &[f64], at: &SpiderPoint) -> Result<f64> {
    check_harmonic_coefficients(model, a)?;
    model.check_point(at)?;
    let i = at.leg;
    let sum: f64 = a.iter().sum();
    let x = at.x;
    if x == 0.0 {
        return Ok(sum);
    }
    Ok(a[i - 1] * model.c_r() / model.p(i) * model.psi_killed(x) + model.phi(x) * sum)
}

fn check_harmonic_coefficients(model: &SpiderModel, a: &[f64]) -> Result<()> {
    if a.len() != model.n() {
        return invalid(format!("{} coefficients for {} legs", a.len(), model.n()));
    }
    if a.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
        return invalid("harmonic coefficients must be finite and non-negative");
    }
    if a.iter().all(|&v| v == 0.0) {
        return invalid("all-zero coefficients give the trivial function");
    }
    Ok(())
}

/// `phi` on every leg.
pub fn phi_function(model: &SpiderModel) -> LegFunction {
    let (m1, m2) = (model.clone(), model.clone());
    LegFunction::new(model.n(), move |x, _| m1.phi(x)).with_slope(move |x, _, _| m2.phi_dx(x))
}

/// `psi_tilde(., i)` on leg `i`.
pub fn psi_tilde_function(model: &SpiderModel) -> LegFunction {
    let (m1, m2) = (model.clone(), model.clone());
    LegFunction::new(model.n(), move |x, leg| psi_tilde_raw(&m1, x, leg))
        .with_slope(move |x, leg, _| psi_tilde_dx(&m2, x, leg))
}

/// Martin mixture `sum_m w_m K(.; pole_m)`.
pub fn martin_mixture(model: &SpiderModel, components: &[(Pole, f64)]) -> Result<LegFunction> {
    for (pole, w) in components {
        check_pole(model, pole)?;
        if !(*w >= 0.0 && w.is_finite()) {
            return invalid(format!("mixture weight {w} is not a finite non-negative number"));
        }
    }
    let comps = components.to_vec();
    let (m1, m2, c1, c2) = (model.clone(), model.clone(), comps.clone(), comps.clone());
    let mut f = LegFunction::new(model.n(), move |x, leg| {
        c1.iter().map(|(p, w)| w * martin_raw(&m1, x, leg, p)).sum()
    })
    .with_slope(move |x, leg, side| c2.iter().map(|(p, w)| w * martin_dx(&m2, x, leg, p, side)).sum());
    for leg in 1..=model.n() {
        let kinks: Vec<f64> = comps
            .iter()
            .filter_map(|(p, _)| match p {
                Pole::Point(q) if !q.is_vertex() && q.leg == leg => Some(q.x),
                _ => None,
            })
            .collect();
        f = f.with_kinks(leg, kinks);
    }
    Ok(f)
}

/// Minimal excessive function as a [`LegFunction`].
pub fn minimal_excessive_function(model: &SpiderModel, pole: Pole) -> Result<LegFunction> {
    martin_mixture(model, &[(pole, 1.0)])
}

/// Harmonic function as a [`LegFunction`].
pub fn harmonic(model: &SpiderModel, a: &[f64]) -> Result<LegFunction> {
    check_harmonic_coefficients(model, a)?;
    let comps: Vec<(Pole, f64)> = a
        .iter()
        .enumerate()
        .map(|(k, &w)| (Pole::Infinity { leg: k + 1 }, w))
        .collect();
    martin_mixture(model, &comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::DriftedBrownian;
    use std::sync::Arc;

    fn pt(x: f64, leg: usize) -> SpiderPoint {
        SpiderPoint::new(x, leg).unwrap()
    }

    #[test]
    fn psi_tilde_values() {
        let m3 = SpiderModel::brownian_uniform(3, 0.5).unwrap();
        assert!((psi_tilde(&m3, 0.0, 2).unwrap() - 1.0).abs() < 1e-15);
        let m2 = SpiderModel::brownian_uniform(2, 0.5).unwrap();
        assert!((psi_tilde(&m2, 1.0, 1).unwrap() - 1f64.exp()).abs() < 1e-14);
        assert!(psi_tilde(&m3, 1.0, 4).is_err());
    }

    #[test]
    fn kernel_at_vertex_and_line_reduction() {
        let m = SpiderModel::brownian_uniform(3, 0.5).unwrap();
        let g = green_kernel(&m, &SpiderPoint::VERTEX, &SpiderPoint::VERTEX).unwrap();
        assert_eq!(g.value, 1.0);
        assert_eq!(g.branch, KernelBranch::Vertex);
        let m2 = SpiderModel::brownian_uniform(2, 0.5).unwrap();
        let g = green_kernel(&m2, &pt(2.0, 1), &pt(1.0, 1)).unwrap();
        assert!((g.value - (-1f64).exp()).abs() < 1e-15);
        assert_eq!(g.branch, KernelBranch::SameLegAbove);
    }

    #[test]
    fn kernel_far_out_stays_finite() {
        let m = SpiderModel::brownian_uniform(3, 0.5).unwrap();
        let g = green_kernel(&m, &pt(400.0, 1), &pt(450.0, 2)).unwrap();
        assert_eq!(g.branch, KernelBranch::CrossLeg);
        assert!(g.value == 0.0 || g.value.is_finite());
        let same = green_kernel(&m, &pt(800.0, 1), &pt(801.0, 1)).unwrap().value;
        assert!((same - 3.0 * (-1f64).exp() / 2.0).abs() < 1e-9, "{same}");
    }

    #[test]
    fn transition_density_known_values() {
        let m = SpiderModel::brownian_uniform(3, 0.5).unwrap();
        let t = 0.7;
        let v = transition_density_brownian(&m, t, &pt(0.0, 1), &pt(0.0, 2)).unwrap();
        assert!((v - 2.0 / 3.0 / (2.0 * PI * t).sqrt()).abs() < 1e-15);
        assert!(transition_density_brownian(&m, 0.0, &pt(0.0, 1), &pt(0.0, 2)).is_err());
        let d = SpiderModel::new(vec![0.5, 0.5], 0.5, Arc::new(DriftedBrownian::new(1.0).unwrap())).unwrap();
        assert!(transition_density_brownian(&d, 1.0, &pt(0.0, 1), &pt(1.0, 1)).is_err());
    }

    #[test]
    fn hitting_values() {
        let m2 = SpiderModel::brownian_uniform(2, 0.5).unwrap();
        let e1 = (-1f64).exp();
        assert!((hitting_laplace(&m2, &SpiderPoint::VERTEX, &pt(1.0, 1)).unwrap() - e1).abs() < 1e-15);
        assert!((hitting_laplace(&m2, &pt(1.0, 2), &pt(1.0, 1)).unwrap() - e1 * e1).abs() < 1e-15);
        assert_eq!(hitting_laplace(&m2, &pt(1.0, 2), &pt(1.0, 2)).unwrap(), 1.0);
        assert!((hitting_laplace(&m2, &pt(3.0, 1), &pt(1.0, 1)).unwrap() - e1 * e1).abs() < 1e-15);
        let far = hitting_laplace(&m2, &pt(1.0, 1), &pt(900.0, 1)).unwrap();
        assert!(far == 0.0 || far < 1e-300);
    }

    #[test]
    fn martin_functions() {
        let m = SpiderModel::brownian_uniform(3, 0.5).unwrap();
        let v = minimal_excessive(&m, &pt(1.0, 1), &Pole::Infinity { leg: 1 }).unwrap();
        assert!((v - (3.0 * 1f64.sinh() + (-1f64).exp())).abs() < 1e-14);
        let v = minimal_excessive(&m, &pt(1.0, 2), &Pole::Infinity { leg: 1 }).unwrap();
        assert!((v - (-1f64).exp()).abs() < 1e-15);
        for pole in [
            Pole::Point(pt(2.0, 3)),
            Pole::Infinity { leg: 2 },
            Pole::Point(SpiderPoint::VERTEX),
        ] {
            assert_eq!(minimal_excessive(&m, &SpiderPoint::VERTEX, &pole).unwrap(), 1.0);
        }
        assert!((harmonic_function(&m, &[1.0, 2.0, 0.5], &SpiderPoint::VERTEX).unwrap() - 3.5).abs() < 1e-15);
        assert!(harmonic_function(&m, &[0.0; 3], &SpiderPoint::VERTEX).is_err());
        let h = harmonic(&m, &[0.0, 1.0, 0.0]).unwrap();
        for x in [0.3, 2.0] {
            for leg in 1..=3 {
                let direct = minimal_excessive(&m, &pt(x, leg), &Pole::Infinity { leg: 2 }).unwrap();
                assert!((h.at(x, leg) - direct).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn finite_pole_kernel_ratio() {
        let m = SpiderModel::brownian(vec![0.2, 0.3, 0.5], 0.7).unwrap();
        let pole = pt(1.3, 2);
        for (x, leg) in [(0.4, 2), (2.5, 2), (1.0, 1), (3.0, 3)] {
            let a = pt(x, leg);
            let want = green_kernel(&m, &a, &pole).unwrap().value
                / green_kernel(&m, &SpiderPoint::VERTEX, &pole).unwrap().value;
            let got = minimal_excessive(&m, &a, &Pole::Point(pole)).unwrap();
            assert!((got - want).abs() < 1e-13 * want.max(1.0));
        }
    }
}
