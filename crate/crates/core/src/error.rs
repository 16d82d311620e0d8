//! Error types shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the geometric kernels.
///
/// Report-style checkers (axiom checks, theorem residuals, duality
/// comparison) do not error on a failed check; they return a report with
/// residuals. Errors are reserved for inputs that violate preconditions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pairing is degenerate: |det| ratio {0:.3e} below tolerance")]
    DegeneratePairing(f64),
    #[error("pairing restricted to the subspace is degenerate")]
    DegenerateRestriction,
    #[error("subspace basis is rank deficient (rank {rank} < {cols} columns)")]
    RankDeficient { rank: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("subspace is not a generalized metric: {0}")]
    NotGeneralizedMetric(String),
    #[error("splitting summand is not isotropic (max |⟨v,v⟩| = {0:.3e})")]
    NonIsotropicSplitting(f64),
    #[error("subspace is not a graph over the first summand (condition {0:.3e})")]
    NotAGraph(f64),
    #[error("matrix is not positive definite (min eigenvalue {0:.3e})")]
    NotPositiveDefinite(f64),
    #[error("evaluation point {0:?} is outside the chart domain")]
    EvaluationOutsideDomain(Vec<f64>),
    #[error("deformation lost positivity at t = {t}")]
    PositivityLost { t: f64 },
    #[error("connection is not compatible with the generalized metric (residual {0:.3e})")]
    NotCompatible(f64),
    #[error("anchor restricted to V+ is not bijective onto the tangent space")]
    AnchorNotBijective,
    #[error("connection shift is not block-diagonal w.r.t. V± (residual {0:.3e})")]
    ShiftNotBlockDiagonal(f64),
    #[error("connection shift is not antisymmetric (residual {0:.3e})")]
    ShiftNotAntisymmetric(f64),
    #[error("shift is not valued in ⋀²V₋ (residual {0:.3e})")]
    ShiftNotMinusValued(f64),
    #[error("background is not invariant: parameter derivatives differ by {0:.3e} between reference points")]
    NotInvariant(f64),
    #[error("integration step rejected at t = {t}: {reason}")]
    StepRejected { t: f64, reason: String },
    #[error("structure constants are not antisymmetric (residual {0:.3e})")]
    NotAntisymmetric(f64),
    #[error("Jacobi identity fails (residual {0:.3e})")]
    JacobiFails(f64),
    #[error("pairing is not ad-invariant (residual {0:.3e})")]
    NotAdInvariant(f64),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}
