use thiserror::Error;

/// Errors surfaced by the library.
///
/// Construction errors mirror the invariants of the domain types: they are
/// returned eagerly so that every value in circulation is well-formed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("eigenvalues {0} and {1} coincide within tolerance; local spectra must be non-degenerate")]
    DuplicateEigenvalue(f64, f64),

    #[error("a local observable needs at least 2 eigenvalues, got {0}")]
    TooFewEigenvalues(usize),

    #[error("grid of {actual} points exceeds the dense-representation cap of {cap}")]
    GridTooLarge { actual: u128, cap: usize },

    #[error("coefficient list is empty or all zero")]
    EmptyCoefficients,

    #[error("invalid block size k={k} for n={n} parties (need 1 <= k <= n)")]
    InvalidK { k: usize, n: usize },

    #[error("mixing parameter eps={0} outside [0, 1]")]
    EpsOutOfRange(f64),

    #[error("party count {0} must be even for this construction")]
    OddN(usize),

    #[error("matrix is not Hermitian: max |a_ij - conj(a_ji)| = {0:.3e}")]
    NotHermitian(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("variance ceiling A={0} must be positive")]
    NonpositiveA(f64),

    #[error("density matrix has rank zero at the configured tolerance")]
    RankZero,

    #[error("degenerate range: upper and lower bounds are both {0}")]
    DegenerateRange(f64),

    #[error("thickness parameter zeta={0} must be non-negative")]
    NegativeZeta(f64),

    #[error("sampled function is not convex: second difference {0:.3e} at index {1}")]
    NotConvex(f64, usize),

    #[error("sampled function has f(0)={0:.3e}, expected 0")]
    NonzeroAtZero(f64),

    #[error("infeasible level set: {0}")]
    InfeasibleLevel(String),

    #[error("degenerate block count k={0}: the level-set algebra divides by k-1")]
    DegenerateK(f64),

    #[error("coefficient normalization violated: sum of squares is {0}, expected {1}")]
    BadNormalization(f64, f64),

    #[error("state file parse error: {0}")]
    Parse(String),

    #[error("state invariant violated: {0}")]
    InvariantViolation(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}
