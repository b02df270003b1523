//! Diffusion spiders on star graphs: Green kernels, hitting-time Laplace
//! transforms, excessive functions and optimal stopping.

// `!(x > 0.0)` is how NaN gets rejected along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diffusion;
pub mod error;
pub mod excessive;
pub mod function;
pub mod kernels;
pub mod numerics;
pub mod osp;
pub mod simulator;

pub use diffusion::{
    brownian_characteristics, theta, validate_characteristics, Brownian, CharacteristicsRegistry,
    CharacteristicsReport, Diffusion, DriftedBrownian, Pole, SpiderModel, SpiderPoint,
};
pub use error::{Error, Result};
pub use excessive::{
    finiteness_check, gluing_value, is_excessive, representing_measure_at_vertex, representing_measure_offvertex,
    reward_decomposition, ExcessiveReport, ExcessiveTolerances, Finiteness, RepresentingMeasure, RewardDecomposition,
};
pub use function::{LegFunction, PayoffFamily, Side};
pub use kernels::{
    green_kernel, harmonic, harmonic_function, hitting_laplace, martin_mixture, minimal_excessive,
    minimal_excessive_function, phi_function, psi_tilde, skew_psi, transition_density_brownian, GreenKernelValue,
    KernelBranch,
};
pub use osp::{
    assemble_value, example71_case, solve_spider_example71, solve_threshold_system, verify_solution, Diagnostics,
    Example71Case, Example71Solution, ResidualPath, StoppingRegion, StoppingSolution, ThresholdOptions,
    ThresholdSolution, VerificationReport,
};
pub use simulator::{
    simulate_discounted_stop, simulate_hitting_laplace, simulate_resolvent, EstimateWithError, SimConfig,
};
