//! Crate-wide error type.
//!
//! Numerical preconditions are enforced eagerly: constructors and solvers
//! return an [`Error`] naming the offending datum (cell index, atom id,
//! tolerance) rather than propagating NaNs into downstream quadrature.

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // ---- geometry ----
    #[error("chart dimensions inconsistent: {0}")]
    ChartDimensions(String),
    #[error("chart map returned a non-finite value at parameter {param:?}")]
    NonFiniteMapValue { param: Vec<f64> },
    #[error(
        "degenerate induced metric at cell {cell:?} (Gram determinant {det:.3e} <= {tol:.1e})"
    )]
    DegenerateMetric { cell: Vec<usize>, det: f64, tol: f64 },
    #[error("basis is not orthonormal: max Gram deviation {deviation:.3e} exceeds {tol:.1e}")]
    NotOrthonormal { deviation: f64, tol: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point index {index} out of range ({len} points)")]
    PointIndex { index: usize, len: usize },
    #[error("sampled immersion carries no chart; finite differences need the source chart")]
    MissingChart,
    #[error("potential is not twice differentiable at the requested point")]
    PotentialNotSmooth,
    #[error("unknown catalog surface `{0}`")]
    UnknownSurface(String),
    #[error("invalid surface parameter: {0}")]
    SurfaceParameter(String),

    // ---- measures ----
    #[error("measure is empty")]
    EmptyMeasure,
    #[error("atom {index} has non-positive or non-finite mass {mass}")]
    BadMass { index: usize, mass: f64 },
    #[error("atom {index} has a non-finite coordinate")]
    BadAtom { index: usize },
    #[error("plan marginal mismatch: {side} marginal deviates by {deviation:.3e} (tol {tol:.1e})")]
    MarginalMismatch { side: &'static str, deviation: f64, tol: f64 },
    #[error("plans do not share a middle measure: {0}")]
    MiddleMeasureMismatch(String),
    #[error("interpolation parameter {0} outside [0, 1]")]
    InterpolationParameter(f64),
    #[error(
        "support too large for exhaustive monotonicity search: {support} entries at cycle \
         length {cycle_len} exceeds the budget of {budget} cycles; use the sampled cycle \
         policy instead"
    )]
    MonotoneSearchBudget { support: usize, cycle_len: usize, budget: usize },

    // ---- transport ----
    #[error("problem size {size} exceeds the dense-solver limit {limit}")]
    ProblemTooLarge { size: usize, limit: usize },
    #[error("{requested} atoms requested; ball discretisations need at least {minimum}")]
    TooFewAtoms { requested: usize, minimum: usize },
    #[error("transport infeasible: total source mass {source_total:.12e} differs from target {target_total:.12e}")]
    MassMismatch { source_total: f64, target_total: f64 },
    #[error("solver failed to converge within {iterations} pivots")]
    SolverStalled { iterations: usize },

    // ---- inequalities ----
    #[error("exponent p = {p} outside the admissible range ({lo}, {hi})")]
    ExponentRange { p: f64, lo: f64, hi: f64 },
    #[error("surface has no boundary samples; this evaluator integrates over the boundary")]
    MissingBoundary,
    #[error("test function vanishes at every sample node")]
    ZeroTestFunction,
    #[error("inequality report invariant violated: {0}")]
    ReportInvariant(String),
    #[error("radial profile invalid: {0}")]
    BadProfile(String),
    #[error(
        "projection Jacobian below floor {floor:.1e} on the support of the test function \
         at point ids {points:?}"
    )]
    JacobianBelowFloor { floor: f64, points: Vec<usize> },
    #[error("test function is not supported in the chart interior: {0}")]
    SupportTouchesBoundary(String),
    #[error("profile optimisation did not converge; best values: {trace:?}")]
    OptimizerStalled { trace: Vec<f64> },

    // ---- warped ----
    #[error("warp factor must be positive: w({t}) = {w}")]
    NonPositiveWarp { t: f64, w: f64 },
    #[error(
        "warp derivative inconsistent at t = {t}: declared {declared}, finite difference {fd}"
    )]
    WarpDerivative { t: f64, declared: f64, fd: f64 },
    #[error("{0} requires a warped-product context")]
    NotWarped(&'static str),

    // ---- io ----
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed input: {0}")]
    Parse(String),
}
