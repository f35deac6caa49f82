//! Warped-product ambient geometry `dt² + w(t)² dy²`: warp functions,
//! metric-aware chart sampling, and the isoperimetric and Sobolev
//! evaluators adapted to the warp.

pub mod evaluators;
pub mod geometry;
pub mod metric;

pub use evaluators::{warped_lp_sobolev, warped_weighted_isoperimetric};
pub use geometry::{
    warped_full_projection_jacobian, warped_geometry, warped_inner, warped_projection_jacobian,
    WarpedImmersion, WARPED_FRAME_TOL,
};
pub use metric::{WarpFn, WarpedMetric};
