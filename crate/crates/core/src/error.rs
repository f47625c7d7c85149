use thiserror::Error;

/// Errors raised by the algebraic core.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("coordinate index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("operands belong to different chart contexts")]
    ContextMismatch,

    #[error("invalid symplectic matrix: {0}")]
    InvalidOmega(String),

    #[error("term {term} cannot be divided by h without leaving the W+ algebra")]
    Inadmissible { term: String },

    #[error("connection entry ({i},{j},{k}) conflicts with an earlier symmetric entry")]
    SymmetryConflict { i: usize, j: usize, k: usize },

    #[error("vector field is not symplectic: condition fails at (i,j) = ({i},{j})")]
    NotSymplectic { i: usize, j: usize },

    #[error("{what} did not converge within {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("postcondition failed: {0}")]
    Postcondition(String),

    #[error("structure constants are not antisymmetric at (i,j,k) = ({i},{j},{k})")]
    LieAntisymmetry { i: usize, j: usize, k: usize },

    #[error("structure constants violate the Jacobi identity at (i,j,k,l) = ({i},{j},{k},{l})")]
    LieJacobi { i: usize, j: usize, k: usize, l: usize },

    #[error("action is not a Lie homomorphism on the bracket of basis elements {i} and {j}")]
    ActionHomomorphism { i: usize, j: usize },

    #[error("h-order {requested} exceeds the truncation contract h^{limit}")]
    TruncationOverflow { requested: u32, limit: u32 },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
