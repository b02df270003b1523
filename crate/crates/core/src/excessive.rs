//! Gluing operator, representing measures, excessivity tests and the reward
//! decomposition of a payoff.

use crate::diffusion::{SpiderModel, SpiderPoint};
use crate::error::{invalid, Error, Result};
use crate::function::{LegFunction, Side};
use crate::kernels::{harmonic_function, ln_psi_tilde, psi_tilde_dx, psi_tilde_raw};

/// `D f(0) = sum_i p_i f'_S(0+, i)`.
pub fn gluing_value(model: &SpiderModel, f: &LegFunction) -> Result<f64> {
    f.check_compatible(model)?;
    let mut acc = 0.0;
    for leg in 1..=model.n() {
        let d = f.ds(model, 0.0, leg, Side::Right);
        if !d.is_finite() {
            return Err(Error::NonFinite(format!(
                "right scale derivative at the vertex on leg {leg}"
            )));
        }
        acc += model.p(leg) * d;
    }
    Ok(acc)
}

/// `f'_S phi - phi'_S f` at `x` on `leg`, with the chosen side for `f`.
fn wronskian_with_phi(model: &SpiderModel, f: &LegFunction, x: f64, leg: usize, side: Side) -> f64 {
    let phi = model.phi(x);
    if phi == 0.0 {
        return f64::NAN;
    }
    f.ds(model, x, leg, side) * phi - model.phi_scale_deriv(x) * f.at(x, leg)
}

/// Representing measure of an excessive function normalized to 1 at the
/// vertex.
#[derive(Debug, Clone)]
pub struct RepresentingMeasure {
    model: SpiderModel,
    f: LegFunction,
    pub vertex_atom: f64,
}

impl RepresentingMeasure {
    /// `sigma((x, inf), leg)`.
    pub fn tail(&self, x: f64, leg: usize) -> f64 {
        let m = &self.model;
        m.p(leg) / m.c_r() * wronskian_with_phi(m, &self.f, x, leg, Side::Right)
    }

    /// `sigma({x}, leg)` for `x > 0`, as the jump of [`Self::tail`] at `x`.
    pub fn atom_at(&self, x: f64, leg: usize) -> f64 {
        let m = &self.model;
        let jump = self.f.ds(m, x, leg, Side::Left) - self.f.ds(m, x, leg, Side::Right);
        m.p(leg) * m.phi(x) / m.c_r() * jump
    }

    /// `sigma({0}) + sum_i sigma((0, inf), i)`; 1 for a probability measure.
    pub fn total_mass(&self) -> f64 {
        self.vertex_atom + (1..=self.model.n()).map(|leg| self.tail(0.0, leg)).sum::<f64>()
    }
}

/// Tolerance on `f(0) = 1` for representing-measure inputs.
pub const NORMALIZATION_TOL: f64 = 1e-9;

pub fn representing_measure_at_vertex(model: &SpiderModel, f: &LegFunction) -> Result<RepresentingMeasure> {
    f.check_compatible(model)?;
    let f0 = f.at_vertex();
    if (f0 - 1.0).abs() > NORMALIZATION_TOL {
        return invalid(format!("f(vertex) = {f0}; normalize to 1 first"));
    }
    let vertex_atom = -gluing_value(model, f)? / model.c_r();
    Ok(RepresentingMeasure {
        model: model.clone(),
        f: f.clone(),
        vertex_atom,
    })
}

/// Representing measure of an excessive function normalized at a point off
/// the vertex. Below the base point only an aggregate is available.
#[derive(Debug, Clone)]
pub struct OffVertexMeasure {
    model: SpiderModel,
    f: LegFunction,
    pub base: SpiderPoint,
}

impl OffVertexMeasure {
    /// `sigma((x, inf), i0)` for `x >= x0` on the base leg.
    pub fn upper_tail(&self, x: f64) -> Result<f64> {
        let (x0, i0) = (self.base.x, self.base.leg);
        if x < x0 {
            return invalid(format!("upper tail needs x >= {x0}, got {x}"));
        }
        let m = &self.model;
        Ok(m.p(i0) * psi_tilde_raw(m, x0, i0) * wronskian_with_phi(m, &self.f, x, i0, Side::Right))
    }

    /// `sigma((0, x), i0) + sigma({0}) + sum_{k != i0} sigma((0, inf), k)`
    /// for `0 <= x <= x0`.
    pub fn lower_aggregate(&self, x: f64) -> Result<f64> {
        let (x0, i0) = (self.base.x, self.base.leg);
        if !(0.0..=x0).contains(&x) {
            return invalid(format!("lower aggregate needs 0 <= x <= {x0}, got {x}"));
        }
        let m = &self.model;
        let side = if x > 0.0 { Side::Left } else { Side::Right };
        let s_dx = m.scale_dx(x);
        let psi = psi_tilde_raw(m, x, i0);
        let bracket = self.f.at(x, i0) * psi_tilde_dx(m, x, i0) / s_dx - self.f.ds(m, x, i0, side) * psi;
        Ok(m.p(i0) * m.phi(x0) * bracket)
    }

    /// Point mass at `x > 0` on the base leg.
    pub fn atom_at(&self, x: f64) -> f64 {
        let m = &self.model;
        let i0 = self.base.leg;
        let jump = self.f.ds(m, x, i0, Side::Left) - self.f.ds(m, x, i0, Side::Right);
        let scale = if x >= self.base.x {
            m.p(i0) * psi_tilde_raw(m, self.base.x, i0) * m.phi(x)
        } else {
            m.p(i0) * m.phi(self.base.x) * psi_tilde_raw(m, x, i0)
        };
        scale * jump
    }
}

pub fn representing_measure_offvertex(
    model: &SpiderModel,
    f: &LegFunction,
    base: &SpiderPoint,
) -> Result<OffVertexMeasure> {
    f.check_compatible(model)?;
    model.check_point(base)?;
    if base.is_vertex() {
        return invalid("base point is the vertex; use representing_measure_at_vertex");
    }
    let fb = f.eval(base);
    if (fb - 1.0).abs() > NORMALIZATION_TOL {
        return invalid(format!("f(base) = {fb}; normalize to 1 first"));
    }
    Ok(OffVertexMeasure {
        model: model.clone(),
        f: f.clone(),
        base: *base,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcessiveTolerances {
    /// Slack on sign conditions.
    pub sign: f64,
    /// Slack on the monotonicity of the tails.
    pub monotonicity: f64,
}

impl Default for ExcessiveTolerances {
    fn default() -> Self {
        Self {
            sign: 1e-8,
            monotonicity: 1e-6,
        }
    }
}

/// One grid row of an excessivity check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExcessiveRow {
    pub leg: usize,
    pub x: f64,
    /// `(p_i / c_r)(f'_S phi - phi'_S f)`, the tail mass of `f` (scaled by `f(0)`).
    pub tail: f64,
    /// Increase of `tail` since the previous grid point, 0 when it decreased.
    pub monotonicity_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExcessiveReport {
    pub gluing: f64,
    pub gluing_ok: bool,
    pub nonnegative_ok: bool,
    pub monotone_ok: bool,
    pub bounded_ok: bool,
    pub rows: Vec<ExcessiveRow>,
    pub excessive: bool,
}

/// Grid-based excessivity test: non-positive gluing value and, per leg,
/// non-negative, non-increasing, finite tails. Never errors; failures show
/// up in the report.
pub fn is_excessive(model: &SpiderModel, f: &LegFunction, grid: &[f64], tol: ExcessiveTolerances) -> ExcessiveReport {
    let gluing = gluing_value(model, f).unwrap_or(f64::NAN);
    let scale = f.at_vertex().abs().max(1.0);
    let gluing_ok = gluing <= tol.sign * scale;
    let mut rows = Vec::new();
    let (mut nonneg, mut mono, mut bounded) = (true, true, f.n() == model.n());
    if bounded {
        let mut points: Vec<f64> = grid.iter().copied().filter(|x| *x >= 0.0).collect();
        points.sort_by(f64::total_cmp);
        points.dedup();
        if points.first() != Some(&0.0) {
            points.insert(0, 0.0);
        }
        for leg in 1..=model.n() {
            let mut prev: Option<f64> = None;
            for &x in &points {
                let tail = model.p(leg) / model.c_r() * wronskian_with_phi(model, f, x, leg, Side::Right);
                let level = tail.abs().max(scale);
                let residual = prev.map_or(0.0, |p| (tail - p).max(0.0));
                if !tail.is_finite() {
                    bounded = false;
                } else {
                    nonneg &= tail >= -tol.sign * level;
                    mono &= residual <= tol.monotonicity * level;
                }
                rows.push(ExcessiveRow {
                    leg,
                    x,
                    tail,
                    monotonicity_residual: residual,
                });
                prev = Some(tail);
            }
        }
    }
    ExcessiveReport {
        gluing,
        gluing_ok,
        nonnegative_ok: nonneg,
        monotone_ok: mono,
        bounded_ok: bounded,
        excessive: gluing_ok && nonneg && mono && bounded,
        rows,
    }
}

/// Point mass of the reward measure at a payoff kink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinkAtom {
    pub leg: usize,
    pub x: f64,
    /// `g'_S(x-) - g'_S(x+)`, mass with respect to `m` on the leg.
    pub mass: f64,
}

/// `g = G_r(f) + delta0 g_r(., 0)` with `f = r g - (d/dm)(d/dS) g`.
#[derive(Debug, Clone)]
pub struct RewardDecomposition {
    model: SpiderModel,
    g: LegFunction,
    pub delta0: f64,
    /// Absolutely continuous part of the reward density; NaN at kinks.
    pub f_density: LegFunction,
    pub kink_atoms: Vec<KinkAtom>,
}

impl RewardDecomposition {
    /// `g'_S phi - g phi'_S` at `x`, which equals `int_(x, inf) phi f dm` on the leg.
    pub fn integral_form(&self, x: f64, leg: usize) -> f64 {
        wronskian_with_phi(&self.model, &self.g, x, leg, Side::Right)
    }
}

pub fn reward_decomposition(model: &SpiderModel, g: &LegFunction) -> Result<RewardDecomposition> {
    g.check_compatible(model)?;
    let delta0 = -gluing_value(model, g)?;
    let (m, gg) = (model.clone(), g.clone());
    let f_density = LegFunction::new(model.n(), move |x, leg| {
        let Ok(d2) = gg.d2x(x, leg) else {
            return f64::NAN;
        };
        let d1 = gg.dx(x, leg, Side::Right);
        let generator = match m.generator(x) {
            Some((a, b)) => a * d2 + b * d1,
            None => {
                let s1 = m.scale_dx(x);
                (d2 / s1 - d1 * m.scale_d2x(x) / (s1 * s1)) / m.speed_density(x)
            }
        };
        m.r() * gg.at(x, leg) - generator
    });
    let mut f_density = f_density;
    let mut kink_atoms = Vec::new();
    for leg in 1..=model.n() {
        let kinks = g.kinks(leg).to_vec();
        for &x in &kinks {
            let mass = g.ds(model, x, leg, Side::Left) - g.ds(model, x, leg, Side::Right);
            kink_atoms.push(KinkAtom { leg, x, mass });
        }
        f_density = f_density.with_kinks(leg, kinks);
    }
    Ok(RewardDecomposition {
        model: model.clone(),
        g: g.clone(),
        delta0,
        f_density,
        kink_atoms,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Finiteness {
    /// `g / H` looks bounded; `sup` over the grid.
    Bounded { sup: f64 },
    /// The ratio was still increasing over the last decade of the grid.
    Unbounded { leg: usize, x: f64, ratio: f64 },
}

/// Heuristic boundedness of `g / H` for the harmonic `H` with coefficients
/// `a`: bounded when, on every leg, the ratio does not increase over the
/// last decade of `grid`.
pub fn finiteness_check(model: &SpiderModel, g: &LegFunction, a: &[f64], grid: &[f64]) -> Result<Finiteness> {
    g.check_compatible(model)?;
    let mut pts: Vec<f64> = grid.iter().copied().filter(|x| *x >= 0.0 && x.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let Some(&xmax) = pts.last() else {
        return invalid("empty grid");
    };
    let mut sup = 0.0f64;
    for leg in 1..=model.n() {
        let mut prev: Option<f64> = None;
        for &x in &pts {
            let at = SpiderPoint { x, leg };
            let h = if x == 0.0 {
                harmonic_function(model, a, &SpiderPoint::VERTEX)?
            } else {
                // log-space keeps H finite far out
                let ln_h = (a[leg - 1] * model.c_r()).ln() + ln_psi_tilde(model, x, leg);
                let direct = harmonic_function(model, a, &at)?;
                if direct.is_finite() {
                    direct
                } else {
                    ln_h.exp()
                }
            };
            let ratio = g.at(x, leg).abs() / h;
            if !ratio.is_finite() {
                return Ok(Finiteness::Unbounded { leg, x, ratio });
            }
            if x >= xmax / 10.0 {
                if let Some(p) = prev {
                    if ratio > p * (1.0 + 1e-12) {
                        return Ok(Finiteness::Unbounded { leg, x, ratio });
                    }
                }
                prev = Some(ratio);
            }
            sup = sup.max(ratio);
        }
    }
    Ok(Finiteness::Bounded { sup })
}
