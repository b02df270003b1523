//! Diffusion characteristics, the spider model and points on the star graph.
//!
//! A diffusion spider runs one recurrent linear diffusion `X` on every leg of
//! a star graph and, on leaving the vertex, picks leg `i` with probability
//! `p_i`. Everything downstream is expressed through the fundamental
//! solutions of `(d/dm)(d/dS) u = r u` normalized by
//!
//! * `phi(0) = 1`, `psi_killed(0) = 0`,
//! * `d psi_killed / dS (0+) = 1`, hence Wronskian `psi'_S phi - phi'_S psi = 1`,
//! * `c_r = -d phi / dS (0+) > 0`.

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::numerics::diff;

/// Characteristics of one recurrent diffusion on `[0, inf)`, reflected at 0.
///
/// Closed-form `x`-derivatives are optional; when absent, callers fall back to
/// finite differences.
pub trait Diffusion: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Decreasing fundamental solution `phi_r`.
    fn phi(&self, x: f64, r: f64) -> f64;
    /// Increasing fundamental solution of the process killed at 0.
    fn psi_killed(&self, x: f64, r: f64) -> f64;
    /// Scale function with `S(0) = 0`.
    fn scale(&self, x: f64) -> f64;
    /// Density of the speed measure with respect to length.
    fn speed_density(&self, x: f64) -> f64;
    /// `c_r = -d phi / dS (0+)`.
    fn c_r(&self, r: f64) -> f64;

    fn ln_phi(&self, x: f64, r: f64) -> f64 {
        self.phi(x, r).ln()
    }
    fn ln_psi_killed(&self, x: f64, r: f64) -> f64 {
        self.psi_killed(x, r).ln()
    }
    fn phi_dx(&self, _x: f64, _r: f64) -> Option<f64> {
        None
    }
    fn psi_killed_dx(&self, _x: f64, _r: f64) -> Option<f64> {
        None
    }
    fn scale_dx(&self, _x: f64) -> Option<f64> {
        None
    }
    fn scale_d2x(&self, _x: f64) -> Option<f64> {
        None
    }
    /// `(a, b)` with generator `a g'' + b g'`, when known in closed form.
    fn generator(&self, _x: f64) -> Option<(f64, f64)> {
        None
    }
    fn is_reflected_brownian(&self) -> bool {
        false
    }
}

/// Reflecting Brownian motion: `S(x) = x`, `m(dx) = 2 dx`,
/// `phi = e^{-theta x}`, `psi_killed = sinh(theta x) / theta`, `c_r = theta`,
/// with `theta = sqrt(2 r)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Brownian;

#[inline]
pub fn theta(r: f64) -> f64 {
    (2.0 * r).sqrt()
}

impl Diffusion for Brownian {
    fn name(&self) -> &str {
        "brownian"
    }
    fn phi(&self, x: f64, r: f64) -> f64 {
        (-theta(r) * x).exp()
    }
    fn psi_killed(&self, x: f64, r: f64) -> f64 {
        let t = theta(r);
        (t * x).sinh() / t
    }
    fn scale(&self, x: f64) -> f64 {
        x
    }
    fn speed_density(&self, _x: f64) -> f64 {
        2.0
    }
    fn c_r(&self, r: f64) -> f64 {
        theta(r)
    }
    fn ln_phi(&self, x: f64, r: f64) -> f64 {
        -theta(r) * x
    }
    fn ln_psi_killed(&self, x: f64, r: f64) -> f64 {
        let t = theta(r);
        let u = t * x;
        if u < 20.0 {
            (u.sinh() / t).ln()
        } else {
            u + (-(-2.0 * u).exp()).ln_1p() - std::f64::consts::LN_2 - t.ln()
        }
    }
    fn phi_dx(&self, x: f64, r: f64) -> Option<f64> {
        let t = theta(r);
        Some(-t * (-t * x).exp())
    }
    fn psi_killed_dx(&self, x: f64, r: f64) -> Option<f64> {
        Some((theta(r) * x).cosh())
    }
    fn scale_dx(&self, _x: f64) -> Option<f64> {
        Some(1.0)
    }
    fn scale_d2x(&self, _x: f64) -> Option<f64> {
        Some(0.0)
    }
    fn generator(&self, _x: f64) -> Option<(f64, f64)> {
        Some((0.5, 0.0))
    }
    fn is_reflected_brownian(&self) -> bool {
        true
    }
}

/// Reflected Brownian motion with constant drift `-mu` (`mu > 0`), generator
/// `u''/2 - mu u'`. Recurrent with `+inf` natural; used to exercise the
/// generic (non-closed-form) code paths.
#[derive(Debug, Clone, Copy)]
pub struct DriftedBrownian {
    mu: f64,
}

impl DriftedBrownian {
    pub fn new(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return invalid(format!("drift magnitude must be positive, got {mu}"));
        }
        Ok(Self { mu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    fn roots(&self, r: f64) -> (f64, f64) {
        let s = (self.mu * self.mu + 2.0 * r).sqrt();
        (self.mu - s, self.mu + s)
    }
}

impl Diffusion for DriftedBrownian {
    fn name(&self) -> &str {
        "drifted-brownian"
    }
    fn phi(&self, x: f64, r: f64) -> f64 {
        (self.roots(r).0 * x).exp()
    }
    fn psi_killed(&self, x: f64, r: f64) -> f64 {
        let (lm, lp) = self.roots(r);
        ((lp * x).exp() - (lm * x).exp()) / (lp - lm)
    }
    fn scale(&self, x: f64) -> f64 {
        (2.0 * self.mu * x).exp_m1() / (2.0 * self.mu)
    }
    fn speed_density(&self, x: f64) -> f64 {
        2.0 * (-2.0 * self.mu * x).exp()
    }
    fn c_r(&self, r: f64) -> f64 {
        -self.roots(r).0
    }
    fn ln_phi(&self, x: f64, r: f64) -> f64 {
        self.roots(r).0 * x
    }
    fn scale_dx(&self, x: f64) -> Option<f64> {
        Some((2.0 * self.mu * x).exp())
    }
    fn scale_d2x(&self, x: f64) -> Option<f64> {
        Some(2.0 * self.mu * (2.0 * self.mu * x).exp())
    }
    fn generator(&self, _x: f64) -> Option<(f64, f64)> {
        Some((0.5, -self.mu))
    }
}

type Factory = Arc<dyn Fn() -> Arc<dyn Diffusion> + Send + Sync>;

/// Name-to-characteristics lookup; `"brownian"` and `"drifted-brownian"`
/// (drift magnitude 1) are pre-registered.
#[derive(Clone)]
pub struct CharacteristicsRegistry {
    entries: BTreeMap<String, Factory>,
}

impl fmt::Debug for CharacteristicsRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

impl Default for CharacteristicsRegistry {
    fn default() -> Self {
        let mut reg = Self {
            entries: BTreeMap::new(),
        };
        reg.register("brownian", || Arc::new(Brownian));
        reg.register("drifted-brownian", || {
            Arc::new(DriftedBrownian::new(1.0).expect("positive drift"))
        });
        reg
    }
}

impl CharacteristicsRegistry {
    pub fn register<F>(&mut self, name: &str, factory: F)
    where
        F: Fn() -> Arc<dyn Diffusion> + Send + Sync + 'static,
    {
        self.entries.insert(name.to_string(), Arc::new(factory));
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Diffusion>> {
        self.entries
            .get(name)
            .map(|f| f())
            .ok_or_else(|| Error::UnknownCharacteristics(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

pub fn brownian_characteristics() -> Arc<dyn Diffusion> {
    Arc::new(Brownian)
}

/// A point of the star graph: distance `x` from the vertex on leg `leg`
/// (1-based). All points with `x == 0` are the vertex.
#[derive(Debug, Clone, Copy)]
pub struct SpiderPoint {
    pub x: f64,
    pub leg: usize,
}

impl SpiderPoint {
    pub const VERTEX: SpiderPoint = SpiderPoint { x: 0.0, leg: 1 };

    pub fn new(x: f64, leg: usize) -> Result<Self> {
        if !(x >= 0.0 && x.is_finite()) {
            return invalid(format!("distance must be finite and non-negative, got {x}"));
        }
        if leg == 0 {
            return invalid("legs are numbered from 1");
        }
        // normalizes -0.0
        Ok(Self { x: x + 0.0, leg })
    }

    pub fn vertex() -> Self {
        Self::VERTEX
    }

    pub fn is_vertex(&self) -> bool {
        self.x == 0.0
    }

    fn key(&self) -> (usize, u64) {
        if self.is_vertex() {
            (0, 0)
        } else {
            (self.leg, self.x.to_bits())
        }
    }
}

impl PartialEq for SpiderPoint {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for SpiderPoint {}

impl Hash for SpiderPoint {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl PartialOrd for SpiderPoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for SpiderPoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // distances are non-negative, so bit patterns order like values
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for SpiderPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_vertex() {
            write!(f, "0")
        } else {
            write!(f, "{}@{}", self.x, self.leg)
        }
    }
}

impl FromStr for SpiderPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.split_once('@') {
            None => {
                let x: f64 = s
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad point '{s}'")))?;
                if x == 0.0 {
                    Ok(Self::VERTEX)
                } else {
                    invalid(format!("point '{s}' needs a leg (write x@leg)"))
                }
            }
            Some((x, leg)) => {
                let x: f64 = x
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad distance in '{s}'")))?;
                let leg: usize = leg
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad leg in '{s}'")))?;
                Self::new(x, leg)
            }
        }
    }
}

/// A Martin-boundary pole: a finite point or the point at infinity of a leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pole {
    Point(SpiderPoint),
    Infinity { leg: usize },
}

/// The spider `(X, n, p)` together with a discount rate.
#[derive(Clone)]
pub struct SpiderModel {
    p: Vec<f64>,
    r: f64,
    chars: Arc<dyn Diffusion>,
    fd_step: f64,
}

impl fmt::Debug for SpiderModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpiderModel")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("chars", &self.chars.name())
            .finish()
    }
}

pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

impl SpiderModel {
    pub fn new(p: Vec<f64>, r: f64, chars: Arc<dyn Diffusion>) -> Result<Self> {
        if p.is_empty() {
            return invalid("a spider needs at least one leg");
        }
        if let Some(bad) = p.iter().find(|&&pi| !(pi > 0.0 && pi <= 1.0)) {
            return invalid(format!("leg probabilities must lie in (0, 1], got {bad}"));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return invalid(format!("leg probabilities sum to {total}, not 1"));
        }
        if !(r > 0.0 && r.is_finite()) {
            return invalid(format!("discount rate must be positive, got {r}"));
        }
        Ok(Self {
            p,
            r,
            chars,
            fd_step: diff::DEFAULT_STEP,
        })
    }

    /// Brownian spider with uniform leg probabilities.
    pub fn brownian_uniform(n: usize, r: f64) -> Result<Self> {
        if n == 0 {
            return invalid("a spider needs at least one leg");
        }
        Self::new(vec![1.0 / n as f64; n], r, brownian_characteristics())
    }

    pub fn brownian(p: Vec<f64>, r: f64) -> Result<Self> {
        Self::new(p, r, brownian_characteristics())
    }

    /// Same spider, different discount rate.
    pub fn with_rate(&self, r: f64) -> Result<Self> {
        Ok(Self::new(self.p.clone(), r, self.chars.clone())?.with_fd_step(self.fd_step))
    }

    /// Relative finite-difference step used where closed forms are missing.
    pub fn with_fd_step(mut self, step: f64) -> Self {
        self.fd_step = step;
        self
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }
    pub fn probabilities(&self) -> &[f64] {
        &self.p
    }
    /// Probability of leg `leg` (1-based).
    pub fn p(&self, leg: usize) -> f64 {
        self.p[leg - 1]
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn chars(&self) -> &Arc<dyn Diffusion> {
        &self.chars
    }
    pub fn fd_step(&self) -> f64 {
        self.fd_step
    }
    pub fn is_brownian(&self) -> bool {
        self.chars.is_reflected_brownian()
    }

    pub fn check_leg(&self, leg: usize) -> Result<()> {
        if leg == 0 || leg > self.n() {
            return invalid(format!("leg {leg} outside 1..={}", self.n()));
        }
        Ok(())
    }

    pub fn check_point(&self, pt: &SpiderPoint) -> Result<()> {
        if pt.is_vertex() {
            Ok(())
        } else {
            self.check_leg(pt.leg)
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.chars.phi(x, self.r)
    }
    pub fn psi_killed(&self, x: f64) -> f64 {
        self.chars.psi_killed(x, self.r)
    }
    pub fn ln_phi(&self, x: f64) -> f64 {
        self.chars.ln_phi(x, self.r)
    }
    pub fn ln_psi_killed(&self, x: f64) -> f64 {
        self.chars.ln_psi_killed(x, self.r)
    }
    pub fn c_r(&self) -> f64 {
        self.chars.c_r(self.r)
    }
    pub fn scale(&self, x: f64) -> f64 {
        self.chars.scale(x)
    }
    pub fn speed_density(&self, x: f64) -> f64 {
        self.chars.speed_density(x)
    }

    fn h(&self, x: f64) -> f64 {
        diff::step_at(x, self.fd_step)
    }

    pub fn phi_dx(&self, x: f64) -> f64 {
        self.chars
            .phi_dx(x, self.r)
            .unwrap_or_else(|| diff::on_half_line(|y| self.phi(y), x, self.h(x)))
    }
    pub fn psi_killed_dx(&self, x: f64) -> f64 {
        self.chars
            .psi_killed_dx(x, self.r)
            .unwrap_or_else(|| diff::on_half_line(|y| self.psi_killed(y), x, self.h(x)))
    }
    pub fn scale_dx(&self, x: f64) -> f64 {
        self.chars
            .scale_dx(x)
            .unwrap_or_else(|| diff::on_half_line(|y| self.scale(y), x, self.h(x)))
    }
    pub fn generator(&self, x: f64) -> Option<(f64, f64)> {
        self.chars.generator(x)
    }
    pub fn scale_d2x(&self, x: f64) -> f64 {
        self.chars.scale_d2x(x).unwrap_or_else(|| {
            let h = diff::step_at(x, self.fd_step.sqrt() * 1e-1);
            if x > h {
                diff::second_central(|y| self.scale(y), x, h)
            } else {
                diff::second_central(|y| self.scale(y), h, h)
            }
        })
    }

    /// `d phi / dS`.
    pub fn phi_scale_deriv(&self, x: f64) -> f64 {
        self.phi_dx(x) / self.scale_dx(x)
    }
    /// `d psi_killed / dS`.
    pub fn psi_killed_scale_deriv(&self, x: f64) -> f64 {
        self.psi_killed_dx(x) / self.scale_dx(x)
    }
}

/// Numerical health report for a set of characteristics.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicsReport {
    pub r: f64,
    /// `max |psi'_S phi - phi'_S psi - 1|` over the grid.
    pub wronskian_residual: f64,
    pub phi_at_zero_error: f64,
    pub psi_at_zero_error: f64,
    /// `|c_r + one-sided d phi / dS (0+)|`.
    pub c_r_residual: f64,
    /// Grid points where `phi` fails to decrease or `psi_killed` to increase.
    pub monotonicity_violations: Vec<(f64, String)>,
    /// Evaluation failures, reported rather than raised.
    pub failures: Vec<(f64, String)>,
    /// `|d phi / dS|` at the largest grid point; should tend to 0.
    pub far_phi_scale_deriv: f64,
}

/// Tolerance of the `c_r` cross-check against a one-sided difference.
pub const C_R_CHECK_TOL: f64 = 1e-4;

impl CharacteristicsReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.wronskian_residual < tol
            && self.phi_at_zero_error < tol
            && self.psi_at_zero_error < tol
            && self.c_r_residual < C_R_CHECK_TOL
            && self.monotonicity_violations.is_empty()
            && self.failures.is_empty()
    }
}

/// Checks the normalizations, the Wronskian identity and monotonicity of
/// `chars` on `grid` using central differences with relative step `step`.
pub fn validate_characteristics(
    chars: &dyn Diffusion,
    r: f64,
    grid: &[f64],
    step: f64,
) -> Result<CharacteristicsReport> {
    if grid.is_empty() {
        return invalid("validation grid is empty");
    }
    if grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return invalid("validation grid must be positive");
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return invalid("validation grid must be strictly increasing");
    }
    if !(r > 0.0) {
        return invalid("discount rate must be positive");
    }
    let mut failures = Vec::new();
    let mut violations = Vec::new();

    let phi0 = chars.phi(0.0, r);
    let psi0 = chars.psi_killed(0.0, r);
    let c_r = chars.c_r(r);
    let h0 = step;
    let one_sided = -diff::forward(|y| chars.phi(y, r), 0.0, h0) / diff::forward(|y| chars.scale(y), 0.0, h0);
    if !c_r.is_finite() || c_r <= 0.0 {
        failures.push((0.0, format!("c_r = {c_r} is not positive")));
    }

    let mut wronskian = 0.0f64;
    let mut far = 0.0;
    let mut prev = (0.0, phi0, psi0);
    for &x in grid {
        let h = step.min(0.5 * x);
        let phi = chars.phi(x, r);
        let psi = chars.psi_killed(x, r);
        let ds = diff::central(|y| chars.scale(y), x, h);
        let dphi = diff::central(|y| chars.phi(y, r), x, h) / ds;
        let dpsi = diff::central(|y| chars.psi_killed(y, r), x, h) / ds;
        if ![phi, psi, ds, dphi, dpsi].iter().all(|v| v.is_finite()) {
            failures.push((x, "non-finite evaluation".into()));
            continue;
        }
        wronskian = wronskian.max((dpsi * phi - dphi * psi - 1.0).abs());
        if phi >= prev.1 {
            violations.push((x, format!("phi not decreasing on [{}, {x}]", prev.0)));
        }
        if psi <= prev.2 {
            violations.push((x, format!("psi_killed not increasing on [{}, {x}]", prev.0)));
        }
        prev = (x, phi, psi);
        far = dphi.abs();
    }

    Ok(CharacteristicsReport {
        r,
        wronskian_residual: wronskian,
        phi_at_zero_error: (phi0 - 1.0).abs(),
        psi_at_zero_error: psi0.abs(),
        c_r_residual: (c_r - one_sided).abs(),
        monotonicity_violations: violations,
        failures,
        far_phi_scale_deriv: far,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn brownian_values() {
        let b = Brownian;
        assert_eq!(b.phi(0.0, 0.5), 1.0);
        assert_eq!(b.c_r(0.5), 1.0);
        // sinh(1) from its exponential series
        let series: f64 = (0..20)
            .map(|k| 1.0 / (1..=2 * k + 1).map(|j| j as f64).product::<f64>())
            .sum();
        assert!((b.psi_killed(1.0, 0.5) - series).abs() < 1e-14);
        for r in [0.01, 0.5, 2.0, 8.0, 100.0] {
            assert_eq!(b.c_r(r), (2.0 * r).sqrt());
        }
    }

    #[test]
    fn brownian_log_forms_match() {
        let b = Brownian;
        for x in [0.1, 3.0, 15.0, 40.0] {
            assert!((b.ln_psi_killed(x, 0.5) - b.psi_killed(x, 0.5).ln()).abs() < 1e-12);
        }
        assert!(b.ln_psi_killed(2000.0, 0.5).is_finite());
    }

    #[test]
    fn brownian_passes_validation() {
        let rep = validate_characteristics(&Brownian, 0.5, &[0.5, 1.0, 2.0], 1e-5).unwrap();
        assert!(rep.wronskian_residual < 1e-9, "{rep:?}");
        assert!(rep.passes(1e-8));
        let rep = validate_characteristics(&Brownian, 2.0, &[0.25, 0.5, 1.0, 3.0], 1e-5).unwrap();
        assert!(rep.monotonicity_violations.is_empty());
        let big = validate_characteristics(&Brownian, 0.5, &[1.0, 10.0, 30.0], 1e-5).unwrap();
        assert!(big.far_phi_scale_deriv < 1e-12);
    }

    #[test]
    fn drifted_brownian_normalizations() {
        let d = DriftedBrownian::new(0.7).unwrap();
        let rep = validate_characteristics(&d, 0.3, &[0.1, 0.5, 1.0, 2.0, 4.0], 1e-5).unwrap();
        assert!(rep.passes(1e-7), "{rep:?}");
    }

    #[derive(Debug)]
    struct DoubledPhi;
    impl Diffusion for DoubledPhi {
        fn name(&self) -> &str {
            "doubled"
        }
        fn phi(&self, x: f64, r: f64) -> f64 {
            2.0 * Brownian.phi(x, r)
        }
        fn psi_killed(&self, x: f64, r: f64) -> f64 {
            Brownian.psi_killed(x, r)
        }
        fn scale(&self, x: f64) -> f64 {
            x
        }
        fn speed_density(&self, _x: f64) -> f64 {
            2.0
        }
        fn c_r(&self, r: f64) -> f64 {
            Brownian.c_r(r)
        }
    }

    #[test]
    fn broken_normalization_is_flagged() {
        let rep = validate_characteristics(&DoubledPhi, 0.5, &[0.5, 1.0, 2.0], 1e-5).unwrap();
        assert!((rep.phi_at_zero_error - 1.0).abs() < 1e-15);
        assert!(!rep.passes(1e-8));
    }

    #[test]
    fn bad_grid_rejected() {
        assert!(validate_characteristics(&Brownian, 0.5, &[], 1e-5).is_err());
        assert!(validate_characteristics(&Brownian, 0.5, &[1.0, 0.5], 1e-5).is_err());
        assert!(validate_characteristics(&Brownian, 0.5, &[0.0, 1.0], 1e-5).is_err());
    }

    #[test]
    fn vertex_identification() {
        let a = SpiderPoint::new(0.0, 1).unwrap();
        let b = SpiderPoint::new(-0.0, 3).unwrap();
        assert_eq!(a, b);
        let set: HashSet<_> = [a, b, SpiderPoint::new(1.0, 1).unwrap()].into_iter().collect();
        assert_eq!(set.len(), 2);
        assert_ne!(SpiderPoint::new(1.0, 1).unwrap(), SpiderPoint::new(1.0, 2).unwrap());
        assert_eq!(a.cmp(&b), std::cmp::Ordering::Equal);
    }

    #[test]
    fn point_syntax() {
        let p: SpiderPoint = "1.5@2".parse().unwrap();
        assert_eq!(p, SpiderPoint::new(1.5, 2).unwrap());
        assert_eq!(p.to_string(), "1.5@2");
        let v: SpiderPoint = "0@3".parse().unwrap();
        assert!(v.is_vertex());
        assert_eq!(v.to_string(), "0");
        assert!("1.5".parse::<SpiderPoint>().is_err());
        assert!("x@1".parse::<SpiderPoint>().is_err());
        assert!("1@0".parse::<SpiderPoint>().is_err());
    }

    #[test]
    fn model_validation() {
        assert!(SpiderModel::brownian(vec![0.5, 0.5], 0.5).is_ok());
        assert!(SpiderModel::brownian(vec![0.5, 0.6], 0.5).is_err());
        assert!(SpiderModel::brownian(vec![1.0, 0.0], 0.5).is_err());
        assert!(SpiderModel::brownian(vec![0.5, 0.5], 0.0).is_err());
        let m = SpiderModel::brownian_uniform(3, 0.5).unwrap();
        assert!((m.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn registry_lookup() {
        let mut reg = CharacteristicsRegistry::default();
        assert!(reg.get("brownian").unwrap().is_reflected_brownian());
        assert!(matches!(reg.get("nope"), Err(Error::UnknownCharacteristics(_))));
        reg.register("slow", || Arc::new(DriftedBrownian::new(0.1).unwrap()));
        assert_eq!(reg.get("slow").unwrap().name(), "drifted-brownian");
    }
}
