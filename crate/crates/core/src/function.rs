//! Functions on the star graph, evaluated leg by leg.

use std::fmt;
use std::sync::Arc;

use crate::diffusion::{SpiderModel, SpiderPoint};
use crate::error::{invalid, Error, Result};
use crate::numerics::diff;

/// Which one-sided limit to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

type ValueFn = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;
type SlopeFn = Arc<dyn Fn(f64, usize, Side) -> f64 + Send + Sync>;
type CurvatureFn = Arc<dyn Fn(f64, usize) -> f64 + Send + Sync>;

/// A real function on an `n`-leg star graph, `(x, leg) -> f(x, leg)` with
/// legs numbered from 1.
///
/// Derivatives are taken in `x`. Without an analytic slope they come from
/// one-sided second-order differences whose stencil never straddles a
/// registered kink, so `f(x-)` and `f(x+)` are resolved at corners of
/// payoffs like `(1 - 2x)+`.
#[derive(Clone)]
pub struct LegFunction {
    n: usize,
    value: ValueFn,
    slope: Option<SlopeFn>,
    curvature: Option<CurvatureFn>,
    kinks: Vec<Vec<f64>>,
    fd_step: f64,
}

impl fmt::Debug for LegFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LegFunction")
            .field("n", &self.n)
            .field("analytic_slope", &self.slope.is_some())
            .field("kinks", &self.kinks)
            .finish()
    }
}

/// Relative step for second differences.
const CURVATURE_STEP: f64 = 1e-4;

impl LegFunction {
    pub fn new<F>(n: usize, value: F) -> Self
    where
        F: Fn(f64, usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            n,
            value: Arc::new(value),
            slope: None,
            curvature: None,
            kinks: vec![Vec::new(); n],
            fd_step: diff::DEFAULT_STEP,
        }
    }

    /// Analytic one-sided `x`-derivatives.
    pub fn with_slope<F>(mut self, slope: F) -> Self
    where
        F: Fn(f64, usize, Side) -> f64 + Send + Sync + 'static,
    {
        self.slope = Some(Arc::new(slope));
        self
    }

    /// Analytic second `x`-derivative inside the legs.
    pub fn with_curvature<F>(mut self, curvature: F) -> Self
    where
        F: Fn(f64, usize) -> f64 + Send + Sync + 'static,
    {
        self.curvature = Some(Arc::new(curvature));
        self
    }

    /// Registers points on `leg` where `f` is not differentiable.
    pub fn with_kinks(mut self, leg: usize, mut kinks: Vec<f64>) -> Self {
        kinks.retain(|k| *k > 0.0 && k.is_finite());
        kinks.sort_by(f64::total_cmp);
        kinks.dedup();
        self.kinks[leg - 1] = kinks;
        self
    }

    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kinks(&self, leg: usize) -> &[f64] {
        &self.kinks[leg - 1]
    }

    pub fn has_analytic_slope(&self) -> bool {
        self.slope.is_some()
    }

    pub fn at(&self, x: f64, leg: usize) -> f64 {
        (self.value)(x, leg)
    }

    pub fn eval(&self, pt: &SpiderPoint) -> f64 {
        if pt.is_vertex() {
            (self.value)(0.0, 1)
        } else {
            (self.value)(pt.x, pt.leg)
        }
    }

    pub fn at_vertex(&self) -> f64 {
        (self.value)(0.0, 1)
    }

    /// Checks that every leg agrees at the vertex.
    pub fn check_vertex(&self, tol: f64) -> Result<()> {
        let v0 = self.at(0.0, 1);
        for leg in 2..=self.n {
            let v = self.at(0.0, leg);
            if (v - v0).abs() > tol * (1.0 + v0.abs()) {
                return invalid(format!(
                    "value at the vertex differs by leg: {v0} on leg 1, {v} on leg {leg}"
                ));
            }
        }
        Ok(())
    }

    pub fn check_compatible(&self, model: &SpiderModel) -> Result<()> {
        if self.n != model.n() {
            return invalid(format!("function has {} legs, model has {}", self.n, model.n()));
        }
        Ok(())
    }

    /// Largest step so a one-sided stencil of width `2h` from `x` stays on
    /// one smooth piece.
    fn one_sided_step(&self, x: f64, leg: usize, side: Side) -> f64 {
        let mut h = diff::step_at(x, self.fd_step);
        let kinks = &self.kinks[leg - 1];
        match side {
            Side::Right => {
                if let Some(k) = kinks.iter().find(|&&k| k > x) {
                    h = h.min((k - x) / 2.5);
                }
            }
            Side::Left => {
                if let Some(k) = kinks.iter().rev().find(|&&k| k < x) {
                    h = h.min((x - k) / 2.5);
                }
                h = h.min(x / 2.5);
            }
        }
        h
    }

    /// One-sided `x`-derivative. The left derivative at 0 is replaced by the
    /// right one.
    pub fn dx(&self, x: f64, leg: usize, side: Side) -> f64 {
        let side = if x <= 0.0 { Side::Right } else { side };
        if let Some(s) = &self.slope {
            return s(x, leg, side);
        }
        let h = self.one_sided_step(x, leg, side);
        let f = |y: f64| (self.value)(y, leg);
        match side {
            Side::Right => diff::forward(f, x, h),
            Side::Left => diff::backward(f, x, h),
        }
    }

    /// One-sided derivative with respect to the scale function.
    pub fn ds(&self, model: &SpiderModel, x: f64, leg: usize, side: Side) -> f64 {
        self.dx(x, leg, side) / model.scale_dx(x)
    }

    pub fn is_kink(&self, x: f64, leg: usize) -> bool {
        self.kinks[leg - 1].iter().any(|&k| (k - x).abs() <= 1e-12 * (1.0 + x))
    }

    /// Second `x`-derivative away from kinks. Errors at a registered kink.
    pub fn d2x(&self, x: f64, leg: usize) -> Result<f64> {
        if self.is_kink(x, leg) {
            return Err(Error::InvalidArgument(format!(
                "second derivative requested at kink {x} on leg {leg}"
            )));
        }
        if let Some(c) = &self.curvature {
            return Ok(c(x, leg));
        }
        let kinks = &self.kinks[leg - 1];
        let mut h = CURVATURE_STEP * (1.0 + x);
        let nearest = kinks.iter().map(|k| (k - x).abs()).fold(f64::INFINITY, f64::min);
        h = h.min(nearest / 4.0);
        let f = |y: f64| (self.value)(y, leg);
        let v = if x > h {
            diff::second_central(f, x, h)
        } else {
            // one-sided second difference at the left end
            (2.0 * f(x) - 5.0 * f(x + h) + 4.0 * f(x + 2.0 * h) - f(x + 3.0 * h)) / (h * h)
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFinite(format!("second derivative at {x} on leg {leg}")))
        }
    }

    /// `lambda * f`.
    pub fn scaled(&self, lambda: f64) -> Self {
        let base = self.clone();
        let mut out = {
            let b = base.clone();
            Self::new(self.n, move |x, leg| lambda * b.at(x, leg))
        };
        if base.slope.is_some() {
            let b = base.clone();
            out = out.with_slope(move |x, leg, side| lambda * b.dx(x, leg, side));
        }
        if base.curvature.is_some() {
            let b = base.clone();
            out = out.with_curvature(move |x, leg| lambda * b.d2x(x, leg).unwrap_or(f64::NAN));
        }
        out.kinks = base.kinks.clone();
        out.fd_step = base.fd_step;
        out
    }

    /// Constant function.
    pub fn constant(n: usize, c: f64) -> Self {
        Self::new(n, move |_, _| c)
            .with_slope(|_, _, _| 0.0)
            .with_curvature(|_, _| 0.0)
    }

    /// `g(x, i) = a_i x`.
    pub fn linear(a: Vec<f64>) -> Self {
        let n = a.len();
        let (a1, a2) = (a.clone(), a);
        Self::new(n, move |x, leg| a1[leg - 1] * x)
            .with_slope(move |_, leg, _| a2[leg - 1])
            .with_curvature(|_, _| 0.0)
    }

    /// `g(x, i) = a_i x^2`.
    pub fn quadratic(a: Vec<f64>) -> Self {
        let n = a.len();
        let (a1, a2, a3) = (a.clone(), a.clone(), a);
        Self::new(n, move |x, leg| a1[leg - 1] * x * x)
            .with_slope(move |x, leg, _| 2.0 * a2[leg - 1] * x)
            .with_curvature(move |_, leg| 2.0 * a3[leg - 1])
    }

    /// Three-leg payoff `1 + x`, `(1 - x/2)+`, `(1 - 2x)+`.
    pub fn example71() -> Self {
        fn value(x: f64, leg: usize) -> f64 {
            match leg {
                1 => 1.0 + x,
                2 => (1.0 - 0.5 * x).max(0.0),
                _ => (1.0 - 2.0 * x).max(0.0),
            }
        }
        fn slope(x: f64, leg: usize, side: Side) -> f64 {
            let below = |k: f64| x < k || (x == k && side == Side::Left);
            match leg {
                1 => 1.0,
                2 => {
                    if below(2.0) {
                        -0.5
                    } else {
                        0.0
                    }
                }
                _ => {
                    if below(0.5) {
                        -2.0
                    } else {
                        0.0
                    }
                }
            }
        }
        Self::new(3, value)
            .with_slope(slope)
            .with_curvature(|_, _| 0.0)
            .with_kinks(2, vec![2.0])
            .with_kinks(3, vec![0.5])
    }
}

/// Parametric payoff families with solver support.
#[derive(Debug, Clone, PartialEq)]
pub enum PayoffFamily {
    /// `g(x, i) = a_i x`.
    Linear(Vec<f64>),
    /// `g(x, i) = a_i x^2`.
    Quadratic(Vec<f64>),
}

impl PayoffFamily {
    pub fn coefficients(&self) -> &[f64] {
        match self {
            PayoffFamily::Linear(a) | PayoffFamily::Quadratic(a) => a,
        }
    }

    pub fn payoff(&self) -> LegFunction {
        match self {
            PayoffFamily::Linear(a) => LegFunction::linear(a.clone()),
            PayoffFamily::Quadratic(a) => LegFunction::quadratic(a.clone()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            PayoffFamily::Linear(_) => "linear",
            PayoffFamily::Quadratic(_) => "quadratic",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinked_payoff_one_sided_by_differences() {
        let g = LegFunction::new(3, |x, leg| LegFunction::example71().at(x, leg))
            .with_kinks(3, vec![0.5])
            .with_kinks(2, vec![2.0]);
        assert!((g.dx(0.5, 3, Side::Left) + 2.0).abs() < 1e-8);
        assert!(g.dx(0.5, 3, Side::Right).abs() < 1e-8);
        assert!((g.dx(2.0, 2, Side::Left) + 0.5).abs() < 1e-8);
        // near but not at a kink
        assert!((g.dx(0.4999999, 3, Side::Right) + 2.0).abs() < 1e-6);
    }

    #[test]
    fn analytic_slopes_agree_with_differences() {
        let a = LegFunction::example71();
        for (x, leg) in [(0.0, 1), (0.3, 2), (0.2, 3), (3.0, 2)] {
            let fd = LegFunction::new(3, move |x, l| LegFunction::example71().at(x, l))
                .with_kinks(2, vec![2.0])
                .with_kinks(3, vec![0.5]);
            assert!((a.dx(x, leg, Side::Right) - fd.dx(x, leg, Side::Right)).abs() < 1e-8);
        }
    }

    #[test]
    fn second_derivative() {
        let q = LegFunction::new(2, |x, _| x.powi(3));
        assert!((q.d2x(1.0, 1).unwrap() - 6.0).abs() < 1e-5);
        assert!((q.d2x(0.0, 1).unwrap()).abs() < 1e-3);
        assert!(LegFunction::example71().d2x(0.5, 3).is_err());
    }

    #[test]
    fn vertex_consistency() {
        assert!(LegFunction::example71().check_vertex(1e-12).is_ok());
        let bad = LegFunction::new(2, |x, leg| x + leg as f64);
        assert!(bad.check_vertex(1e-12).is_err());
    }

    #[test]
    fn scaling() {
        let g = LegFunction::linear(vec![1.0, 2.0]).scaled(3.0);
        assert_eq!(g.at(2.0, 2), 12.0);
        assert_eq!(g.dx(2.0, 2, Side::Left), 6.0);
    }
}
