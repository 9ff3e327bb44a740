use thiserror::Error;

/// Everything that can go wrong while building or using a model.
///
/// Variants carry the state index or magnitude that triggered them so a
/// caller (or the CLI) can report where a construction became infeasible
/// rather than just that it did.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// P(y|x) > 0 but P(x|y) = 0: the reversibility factorization needs
    /// two-way support on every edge.
    #[error("asymmetric support between states {x} and {y}")]
    AsymmetricSupport { x: usize, y: usize },

    /// A one-step rate is 0 or 1 away from the wall, so ln(q/p) blows up.
    #[error("degenerate step rate at state {index}")]
    DegenerateRate { index: usize },

    /// Holding-walk acceptance prefactor outside (0, 1/2].
    #[error("hold factor {0} outside (0, 1/2]")]
    BadHoldFactor(f64),

    /// Holding probability came out strictly negative at a state.
    #[error("nonpositive holding mass at state {index}")]
    NonpositiveHoldMass { index: usize },

    /// Symmetric base step distribution fails normalization or positivity.
    #[error("bad base step kernel: {detail}")]
    BadBaseKernel { detail: String },

    /// The continued-fraction inversion produced a nonpositive coefficient,
    /// so no reflected walk reproduces this potential at the given lambda.
    #[error("continued-fraction positivity failure at index {index}")]
    PositivityFailure { index: usize },

    /// Eigensolver hit its iteration cap before meeting tolerance.
    #[error("eigensolver did not converge within {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// Supplied ground state is not consistent with the model: a bulk row of
    /// the reconstructed kernel is far from stochastic.
    #[error("ground state mismatch: row {row} sum deviates from 1 by {deviation:.3e}")]
    GroundStateMismatch { row: usize, deviation: f64 },

    /// A path takes a step the kernel (or energy table) forbids.
    #[error("forbidden step from {from} to {to}")]
    ForbiddenStep { from: i64, to: i64 },

    /// Bridge constraint has probability zero (e.g. odd length for a strict
    /// nearest-neighbor walk).
    #[error("bridge event has probability zero")]
    ZeroBridgeProbability,

    /// Exhaustive enumeration would exceed the path guard.
    #[error("enumeration of {estimated} paths exceeds the limit of {limit}")]
    TooLarge { estimated: u128, limit: u64 },

    /// Probability mass is escaping toward the truncation boundary.
    #[error("cutoff too small: mass {mass:.3e} sits above half the cutoff")]
    CutoffTooSmall { mass: f64 },

    /// Tail fit did not settle on a plateau.
    #[error("tail fit unstable: plateau varies by {variation:.1}%")]
    FitUnstable { variation: f64 },

    /// Malformed path (endpoints, negativity).
    #[error("invalid path: {0}")]
    InvalidPath(String),

    /// Anything rejected at the input-validation stage.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
