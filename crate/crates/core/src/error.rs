use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (relative residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("Hermitian eigensolver did not converge for a {dim}x{dim} matrix")]
    EigenFailure { dim: usize },

    #[error("{what} is not positive semidefinite (lambda_min = {lambda_min:e})")]
    NotPsd { what: String, lambda_min: f64 },

    #[error("invalid tolerance {name} = {value}: must lie in (0, 1)")]
    InvalidTolerance { name: &'static str, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Complementary marginals of a pure tripartite vector disagree in rank.
    /// The identity is exact, so this only signals numerical breakdown.
    #[error("purity identity violated: rank {left} ({left_rank}) != rank {right} ({right_rank})")]
    PurityViolation { left: &'static str, left_rank: usize, right: &'static str, right_rank: usize },

    #[error("rank decision too close to the cutoff: {0}")]
    Fragile(String),

    /// A proven implication failed. Either the numerics broke down or there is a bug.
    #[error("counterexample or bug: {0}")]
    CounterexampleOrBug(String),
}
