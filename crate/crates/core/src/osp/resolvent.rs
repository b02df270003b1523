use crate::diffusion::{SpiderModel, SpiderPoint};
use crate::error::{Error, Result};
use crate::excessive::RewardDecomposition;
use crate::function::LegFunction;
use crate::kernels::green_raw;
use crate::numerics::{integrate_leg, QUAD_TOL};

use super::region::StoppingRegion;

/// Which part of the state space the integrand is restricted to.
#[derive(Debug, Clone, Copy)]
pub enum Restrict<'a> {
    All,
    Region(&'a StoppingRegion),
    Complement(&'a StoppingRegion),
}

impl Restrict<'_> {
    fn includes(&self, x: f64, leg: usize) -> bool {
        match self {
            Restrict::All => true,
            Restrict::Region(r) => r.contains_on_leg(x, leg),
            Restrict::Complement(r) => !r.contains_on_leg(x, leg),
        }
    }

    fn includes_vertex(&self) -> bool {
        match self {
            Restrict::All => true,
            Restrict::Region(r) => r.vertex_included(),
            Restrict::Complement(r) => !r.vertex_included(),
        }
    }

    fn breaks(&self, leg: usize) -> Vec<f64> {
        let region = match self {
            Restrict::All => return Vec::new(),
            Restrict::Region(r) | Restrict::Complement(r) => r,
        };
        region
            .intervals(leg)
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .filter(|v| v.is_finite())
            .collect()
    }

    /// True when the restricted set on `leg` is bounded.
    fn bounded_on(&self, leg: usize) -> bool {
        match self {
            Restrict::All => false,
            Restrict::Region(r) => r.intervals(leg).last().is_none_or(|iv| iv.1.is_finite()),
            Restrict::Complement(r) => r.intervals(leg).last().is_some_and(|iv| iv.1.is_infinite()),
        }
    }
}

/// Checks that `phi f m'` decays on `leg` by comparing two far-out samples.
fn integrability_probe(model: &SpiderModel, f: &LegFunction, leg: usize, from: f64) -> Result<()> {
    let x1 = from.max(1.0) + 40.0 / model.c_r().max(1e-3);
    let x2 = 2.0 * x1;
    let w = |y: f64| {
        let v = (model.ln_phi(y) + (f.at(y, leg).abs() * model.speed_density(y)).ln()).exp();
        v * (1.0 + y) * (1.0 + y)
    };
    let (v1, v2) = (w(x1), w(x2));
    if !v2.is_finite() || (v2 > v1 && v2 > 1e-300) {
        return Err(Error::NotIntegrable { leg, x: x2, value: v2 });
    }
    Ok(())
}

/// Point past which `phi` has fallen by `e^-745` from `from`; the kernel
/// underflows there, while reward densities can overflow.
fn tail_cutoff(model: &SpiderModel, from: f64) -> f64 {
    let base = model.ln_phi(from);
    let mut b = from.max(1.0);
    while model.ln_phi(b) - base > -745.0 && b < 1e12 {
        b *= 2.0;
    }
    b
}

/// `G_r(1_restrict f)(at) = sum_k int g_r(at, (y, k)) f(y, k) 1_restrict p_k m(dy)`.
pub fn resolvent_apply(model: &SpiderModel, f: &LegFunction, restrict: Restrict<'_>, at: &SpiderPoint) -> Result<f64> {
    resolvent_apply_tol(model, f, restrict, at, QUAD_TOL)
}

pub fn resolvent_apply_tol(
    model: &SpiderModel,
    f: &LegFunction,
    restrict: Restrict<'_>,
    at: &SpiderPoint,
    tol: f64,
) -> Result<f64> {
    f.check_compatible(model)?;
    model.check_point(at)?;
    let (x, i) = (at.x, at.leg);
    let mut total = 0.0;
    for k in 1..=model.n() {
        if !restrict.bounded_on(k) {
            integrability_probe(model, f, k, x)?;
        }
        let mut breaks = vec![0.0, f64::INFINITY];
        breaks.extend(restrict.breaks(k));
        breaks.extend_from_slice(f.kinks(k));
        if k == i && x > 0.0 {
            breaks.push(x);
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let pk = model.p(k);
        for w in breaks.windows(2) {
            let (a, b) = (w[0], w[1]);
            let probe = if b.is_infinite() { a + 1.0 } else { 0.5 * (a + b) };
            if !restrict.includes(probe, k) {
                continue;
            }
            let integrand = |y: f64| {
                if y == 0.0 {
                    return 0.0;
                }
                let g = green_raw(model, x, i, y, k).value;
                if g == 0.0 {
                    return 0.0;
                }
                g * f.at(y, k) * pk * model.speed_density(y)
            };
            let b = if b.is_infinite() {
                tail_cutoff(model, a.max(x))
            } else {
                b
            };
            if b > a {
                total += integrate_leg(integrand, a, b, tol)?.value;
            }
        }
    }
    if !total.is_finite() {
        return Err(Error::NonFinite(format!("resolvent at {at}")));
    }
    Ok(total)
}

/// `G_r(1_O f)(at) + sum of kink atoms in O + g_r(at, 0) 1_O(0) delta0`: the
/// Riesz representation of a candidate value, or of the payoff itself for
/// `Restrict::All`.
pub fn riesz_value(
    model: &SpiderModel,
    decomposition: &RewardDecomposition,
    restrict: Restrict<'_>,
    at: &SpiderPoint,
) -> Result<f64> {
    let mut v = resolvent_apply(model, &decomposition.f_density, restrict, at)?;
    for atom in &decomposition.kink_atoms {
        if restrict.includes(atom.x, atom.leg) {
            v += green_raw(model, at.x, at.leg, atom.x, atom.leg).value * model.p(atom.leg) * atom.mass;
        }
    }
    if restrict.includes_vertex() {
        v += green_raw(model, at.x, at.leg, 0.0, 1).value * decomposition.delta0;
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffusion::DriftedBrownian;
    use crate::excessive::reward_decomposition;
    use crate::kernels::phi_function;
    use std::sync::Arc;

    #[test]
    fn constants_resolve_to_one_over_r() {
        for r in [0.5, 2.0] {
            let m = SpiderModel::brownian(vec![0.2, 0.3, 0.5], r).unwrap();
            let one = LegFunction::constant(3, 1.0);
            for at in [SpiderPoint::VERTEX, SpiderPoint::new(1.3, 2).unwrap()] {
                let v = resolvent_apply(&m, &one, Restrict::All, &at).unwrap();
                assert!((v - 1.0 / r).abs() < 1e-7, "{v}");
            }
        }
        let d = SpiderModel::new(vec![0.5, 0.5], 0.4, Arc::new(DriftedBrownian::new(0.8).unwrap())).unwrap();
        let v = resolvent_apply(
            &d,
            &LegFunction::constant(2, 1.0),
            Restrict::All,
            &SpiderPoint::new(0.7, 1).unwrap(),
        )
        .unwrap();
        assert!((v - 2.5).abs() < 1e-7);
    }

    #[test]
    fn growth_is_rejected() {
        let m = SpiderModel::brownian_uniform(2, 0.5).unwrap();
        let f = LegFunction::new(2, |x, _| (3.0 * x).exp());
        let err = resolvent_apply(&m, &f, Restrict::All, &SpiderPoint::VERTEX).unwrap_err();
        assert!(matches!(err, Error::NotIntegrable { .. }));
    }

    #[test]
    fn phi_has_zero_density() {
        let m = SpiderModel::brownian_uniform(3, 0.5).unwrap();
        let dec = reward_decomposition(&m, &phi_function(&m)).unwrap();
        let v = resolvent_apply(&m, &dec.f_density, Restrict::All, &SpiderPoint::VERTEX).unwrap();
        assert!(v.abs() < 1e-6);
    }

    #[test]
    fn kinked_payoff_round_trip() {
        let m = SpiderModel::brownian_uniform(3, 0.5).unwrap();
        let g = LegFunction::example71();
        let dec = reward_decomposition(&m, &g).unwrap();
        for (x, leg) in [(0.0, 1), (0.3, 3), (1.0, 2), (2.5, 2), (0.7, 1)] {
            let at = SpiderPoint::new(x, leg).unwrap();
            let v = riesz_value(&m, &dec, Restrict::All, &at).unwrap();
            assert!((v - g.eval(&at)).abs() < 1e-6, "{at}: {v}");
        }
    }
}
