//! Recomputes every published number and closed-form identity.

use spider_core::kernels::{green_kernel, phi_function};
use spider_core::{
    example71_case, gluing_value, representing_measure_at_vertex, solve_spider_example71, solve_threshold_system,
    Example71Case, LegFunction, PayoffFamily, Result, SpiderModel, SpiderPoint,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub tol: f64,
}

impl Check {
    fn new(name: impl Into<String>, computed: f64, expected: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            computed,
            expected,
            tol,
        }
    }

    pub fn passed(&self) -> bool {
        (self.computed - self.expected).abs() <= self.tol
    }
}

/// Shown thresholds have five significant digits for the linear payoff and
/// six for the quadratic one.
const LINEAR_TOL: f64 = 5e-4;
const QUADRATIC_TOL: f64 = 5e-5;
const EXACT_TOL: f64 = 1e-10;

pub fn reproduce() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let m = SpiderModel::brownian_uniform(3, 0.5)?;
    let coef = vec![1.0, 2.0, 3.0];

    let lin = solve_threshold_system(&m, &PayoffFamily::Linear(coef.clone()), &Default::default())?;
    for (k, (z, want)) in lin.thresholds.iter().zip([1.4816, 1.2041, 1.0628]).enumerate() {
        out.push(Check::new(
            format!("linear threshold leg {}", k + 1),
            *z,
            want,
            LINEAR_TOL,
        ));
    }
    let quad = solve_threshold_system(&m, &PayoffFamily::Quadratic(coef), &Default::default())?;
    for (k, (z, want)) in quad.thresholds.iter().zip([2.16987, 2.06543, 2.02250]).enumerate() {
        out.push(Check::new(
            format!("quadratic threshold leg {}", k + 1),
            *z,
            want,
            QUADRATIC_TOL,
        ));
    }

    for r in [0.5, 2.0, 8.0] {
        let mr = SpiderModel::brownian_uniform(3, r)?;
        let g = green_kernel(&mr, &SpiderPoint::VERTEX, &SpiderPoint::VERTEX)?.value;
        out.push(Check::new(
            format!("g_r(0,0) = 1/theta, r = {r}"),
            g,
            1.0 / (2.0 * r).sqrt(),
            EXACT_TOL,
        ));
    }

    for r in [8.0, 0.5, 0.125] {
        let s = solve_spider_example71(&SpiderModel::brownian_uniform(3, r)?)?;
        let theta = (2.0 * r).sqrt();
        if let Some(x2) = s.x2 {
            out.push(Check::new(
                format!("three-leg x2 = 2 - 1/theta, r = {r}"),
                x2,
                2.0 - 1.0 / theta,
                EXACT_TOL,
            ));
        }
        if let Some(x3) = s.x3 {
            out.push(Check::new(
                format!("three-leg x3 = 1/2 - 1/theta, r = {r}"),
                x3,
                0.5 - 1.0 / theta,
                EXACT_TOL,
            ));
        }
        if let Some(z1) = s.z1 {
            out.push(Check::new(format!("three-leg z1, r = {r}"), z1, 0.0, EXACT_TOL));
        }
    }
    let flips = [
        (0.125 - 1e-6, Example71Case::C),
        (0.125 + 1e-6, Example71Case::B),
        (2.0 - 1e-6, Example71Case::B),
        (2.0 + 1e-6, Example71Case::A),
    ];
    for (r, want) in flips {
        let got = example71_case(r);
        out.push(Check::new(
            format!("three-leg regime {want:?} at r = {r}"),
            f64::from(u8::from(got == want)),
            1.0,
            0.0,
        ));
    }

    let atom = representing_measure_at_vertex(&m, &phi_function(&m))?.vertex_atom;
    out.push(Check::new("phi has unit vertex atom", atom, 1.0, 1e-8));
    let (m1, m2) = (m.clone(), m.clone());
    let psi_plus_one =
        LegFunction::new(3, move |x, _| m1.psi_killed(x) + 1.0).with_slope(move |x, _, _| m2.psi_killed_dx(x));
    out.push(Check::new(
        "gluing of psi_killed + 1",
        gluing_value(&m, &psi_plus_one)?,
        1.0,
        1e-6,
    ));
    Ok(out)
}
