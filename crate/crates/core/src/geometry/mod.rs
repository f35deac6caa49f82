//! Sampled submanifold geometry: charts, immersions, subspaces, Grassmannian
//! averages, and the Laplacian identity used to validate the discretisation.

pub mod catalog;
pub mod chart;
pub mod grassmann;
pub mod immersion;
pub mod laplacian;
pub mod subspace;

pub use chart::{ChartMap, ParametricChart, SurfaceInfo};
pub use grassmann::{
    alpha_constant, alpha_n1, alpha_n1_lower_bound, haar_plane_sample, sine_power_integral,
    AlphaEstimate, ALPHA_QUADRATURE_ORDER,
};
pub use immersion::{sample_immersion, BoundaryNode, SampledImmersion};
pub use laplacian::{
    laplacian_identity_check, HalfSquaredNorm, LaplacianCheck, LinearForm, SmoothPotential,
};
pub use subspace::{
    critical_set, plane_cosine, projection_jacobian, Subspace, CRITICAL_EPS_DEFAULT,
};
