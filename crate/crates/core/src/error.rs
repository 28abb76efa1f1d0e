//! Error type shared by all library operations.

use thiserror::Error;

/// Errors reported by channel validation, factorization, and the genie-MAC
/// operations.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// The gain matrix is not square.
    #[error("H must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },
    /// A gain entry is NaN or infinite.
    #[error("H[{row},{col}] must be finite, got {value}")]
    NonFinite { row: usize, col: usize, value: f64 },
    /// The channel has no users.
    #[error("K must be at least 1")]
    EmptyChannel,
    /// The per-transmitter power is not positive.
    #[error("P must be positive, got {0}")]
    NonPositivePower(f64),
    /// The noise variance is not positive.
    #[error("N must be positive, got {0}")]
    NonPositiveNoise(f64),
    /// Rank-1 factorization rejected the channel.
    #[error("channel is not degraded: sigma2/sigma1 = {ratio:.3e} exceeds tol {tol:.3e}")]
    NotDegraded { ratio: f64, tol: f64 },
    /// A user index lies outside `0..k`.
    #[error("index {index} out of range for K = {k}")]
    IndexOutOfRange { index: usize, k: usize },
    /// An ordered subset repeats a user index.
    #[error("subset repeats index {index}")]
    RepeatedIndex { index: usize },
    /// An ordered subset is empty.
    #[error("subset must contain at least one index")]
    EmptySubset,
    /// Receiver gains are not in the required ascending-square order.
    #[error("receiver gains must satisfy a_1^2 <= ... <= a_K^2 (violated at position {position})")]
    NotAscending { position: usize },
    /// Vector lengths disagree.
    #[error("dimension mismatch: {context} expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },
    /// A noise covariance failed the positive-definiteness check.
    #[error("Sigma not positive-definite")]
    SigmaNotPd,
    /// A noise covariance is not symmetric.
    #[error("Sigma must be symmetric (max asymmetry {residual:.3e})")]
    SigmaNotSymmetric { residual: f64 },
    /// A reparameterization requires a whitened instance.
    #[error("instance must be whitened (Sigma = I), max deviation {residual:.3e}")]
    NotWhitened { residual: f64 },
    /// The epsilon parameter of the identity reparameterizations is out of range.
    #[error("eps must lie in (0, 1), got {0}")]
    EpsOutOfRange(f64),
    /// Subset enumeration refused for large K without an explicit override.
    #[error("refusing to enumerate ordered subsets for K = {k} > 8 (pass force to override)")]
    TooManyUsers { k: usize },
    /// Requested subset size exceeds the user count.
    #[error("max subset size {max_k} exceeds K = {k}")]
    SubsetSizeTooLarge { max_k: usize, k: usize },
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
