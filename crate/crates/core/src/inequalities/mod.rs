//! Quantitative isoperimetric and Sobolev inequalities on sampled surfaces.
//!
//! The submodules split the work into: structured results
//! ([`report::InequalityReport`]), admissible test functions with their
//! tangential gradients ([`test_function::TestFunction`]), the inequality
//! evaluators themselves ([`evaluators`]), and the sharp Euclidean Sobolev
//! constant that the `L^p` form consumes ([`sobolev_constant`]).

pub mod evaluators;
pub mod report;
pub mod sobolev_constant;
pub mod test_function;

pub use evaluators::{
    classical_isoperimetric, lp_sobolev, weighted_isoperimetric, weighted_sobolev_l1,
    CURVATURE_FLAG, JACOBIAN_FLOOR,
};
pub use report::InequalityReport;
pub use sobolev_constant::{lp_profile_ratio, sobolev_constant};
pub use test_function::{TestFunction, DEFAULT_COLLAR};
