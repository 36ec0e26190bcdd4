//! Crate-wide error type. Every fallible numerical routine reports through
//! this enum so callers can distinguish recoverable geometry failures
//! (retry with a smaller step or a perturbed contour) from hard failures.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Iterative root finder did not reach its residual tolerance.
    #[error("root finder failed to converge: {0}")]
    NonConvergence(String),

    /// The two polynomial factors share a root to numerical precision, so
    /// the coefficient-splitting system is singular. The caller should try
    /// a root merge or retreat to a smaller step.
    #[error("singular coefficient split: {0}")]
    SingularSylvester(String),

    /// Branch-point configuration too degenerate for cut selection.
    #[error("degenerate hull during cut selection: {0}")]
    DegenerateHull(String),

    /// Evaluation point lies on (or within tolerance of) a branch cut.
    #[error("evaluation on a branch cut at z = {0}")]
    OnCutEvaluation(num_complex::Complex64),

    /// A path segment meets a cut at grazing incidence or at an endpoint;
    /// the crossing parity would be unreliable.
    #[error("tangential or endpoint cut crossing: {0}")]
    TangentialCrossing(String),

    /// Could not place a cycle polygon with clearance from branch points.
    #[error("clearance failure building homology cycle: {0}")]
    ClearanceFailure(String),

    /// Linear system condition number exceeds the trust threshold.
    #[error("ill-conditioned linear system (cond ~ {0:.3e})")]
    IllConditionedSystem(f64),

    /// Adaptive step size underflowed its floor.
    #[error("step size underflow at iteration {0}")]
    StepFloorReached(usize),

    /// Trajectory integrator step underflowed inside a stiff region.
    #[error("stiff region while tracing near z = {0}")]
    StiffRegion(num_complex::Complex64),

    /// Root multiplicity could not be resolved from a numerical cluster.
    #[error("ambiguous root multiplicity: {0}")]
    MultiplicityAmbiguity(String),

    /// Adaptive quadrature failed to meet tolerance at maximum depth.
    #[error("quadrature refinement stalled: {0}")]
    QuadratureStall(String),

    /// Invalid run configuration.
    #[error("config error: {0}")]
    ConfigError(String),

    #[error("io error: {0}")]
    IoError(#[from] std::io::Error),

    #[error("json error: {0}")]
    JsonError(#[from] serde_json::Error),
}
