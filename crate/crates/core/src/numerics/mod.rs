//! Shared numerical kernels: bracketed root finding, damped Newton for small
//! systems, adaptive Gauss-Kronrod quadrature on legs and finite differences.

pub mod diff;
mod newton;
mod quad;
mod roots;

pub use newton::{solve_system, NewtonOptions, SystemSolution};
pub use quad::{integrate_leg, integrate_pieces, QuadResult};
pub use roots::{find_root_bracketed, RootResult};

/// Default absolute/relative tolerance of scalar root finding.
pub const ROOT_TOL: f64 = 1e-10;
/// Default infinity-norm tolerance of nonlinear system solves.
pub const SYSTEM_TOL: f64 = 1e-10;
/// Default quadrature tolerance.
pub const QUAD_TOL: f64 = 1e-9;
