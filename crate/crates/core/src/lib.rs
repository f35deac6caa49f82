//! Optimal transport for measures carried by immersed submanifolds, and the
//! isoperimetric / Sobolev inequalities that transport arguments certify.
//!
//! The crate is organised around one pipeline:
//!
//! 1. [`geometry`] samples a parametric chart into a quadrature-ready
//!    point cloud carrying tangent frames, mean curvature and weights, and
//!    measures how a submanifold sits relative to a linear subspace
//!    (projection Jacobians, critical sets, Grassmannian averages).
//! 2. [`measures`] holds finitely supported measures, transference plans and
//!    three-way couplings, together with the gluing/composition algebra and a
//!    cyclical-monotonicity certifier.
//! 3. [`transport`] solves the quadratic-cost problem exactly (transportation
//!    simplex with an assignment fast path), builds the project-then-transport
//!    factorisation through a subspace, and interpolates along plans.
//! 4. [`inequalities`] and [`warped`] evaluate isoperimetric and Sobolev
//!    inequalities — Euclidean and warped-product — on the sampled geometry
//!    and emit machine-readable reports with signed margins.
//!
//! Everything is deterministic: random sampling takes explicit seeds, solver
//! ties are broken by lowest index, and reports serialise identically across
//! runs.
//!
//! # Example
//!
//! Verify the weighted isoperimetric inequality on a spherical cap:
//!
//! ```
//! use otiso::geometry::{catalog, Subspace};
//! use otiso::inequalities::weighted_isoperimetric;
//!
//! let chart = catalog::build("sphere-cap", &[("theta_max", 1.0)], &[48, 48]).unwrap();
//! let cap = otiso::geometry::sample_immersion(&chart).unwrap();
//! let e = Subspace::coordinate(3, &[0, 1]).unwrap();
//! let report = weighted_isoperimetric(&cap, &e).unwrap();
//! assert!(report.relative_margin >= -1e-6);
//! ```

pub mod constants;
pub mod error;
pub mod geometry;
pub mod inequalities;
pub mod linalg;
pub mod measures;
pub mod quadrature;
pub mod transport;
pub mod warped;

pub use error::{Error, Result};
