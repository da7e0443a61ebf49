//! Error type shared across the solver crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Fractional order outside (0, 1].
    #[error("fractional order must lie in (0, 1], got {0}")]
    InvalidOrder(f64),

    /// A model or grid parameter violates its stated range.
    #[error("invalid parameter {name}: {reason} (got {value})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Vectors of different dimensions were mixed.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A node index fell outside the sampled path.
    #[error("index {index} out of range for a path of {len} nodes")]
    IndexOutOfRange { index: usize, len: usize },

    /// The weight table does not reach the requested history depth.
    #[error("weight table covers indices 0..={max}, step {needed} requires more")]
    WeightTableTooShort { needed: usize, max: usize },

    /// An operation needed the full right-hand side f but the system only
    /// supplies the split parts.
    #[error("system '{0}' does not provide the full right-hand side f")]
    MissingFullField(String),

    /// Newton iteration for the implicit GL step did not reach tolerance.
    #[error("Newton iteration failed at step {step}: residual {residual:.3e} after {iters} iterations")]
    NewtonDivergence {
        step: usize,
        residual: f64,
        iters: usize,
    },

    /// The NSFD denominator 1 + h^α f₋ came out nonpositive, which cannot
    /// happen when f₋ ≥ 0 on the nonnegative orthant.
    #[error(
        "decomposition contract violated at step {step}, component {component}: \
         NSFD denominator {denominator:.3e} ≤ 0 (f₋ must be nonnegative)"
    )]
    DecompositionViolation {
        step: usize,
        component: usize,
        denominator: f64,
    },

    /// A state component went negative and the negativity policy is `Halt`.
    #[error("negative state at step {step}, component {component}: {value:.6e}")]
    NegativityHalt {
        step: usize,
        component: usize,
        value: f64,
    },

    /// A state stopped being finite (overflow or NaN) during integration.
    #[error("non-finite state at step {step}, component {component}")]
    NonFiniteState { step: usize, component: usize },

    /// Two grids that must nest dyadically do not.
    #[error("grid misalignment: {0}")]
    GridMisaligned(String),

    /// An unknown model name was requested from the registry.
    #[error("unknown model '{0}' (available: predator_prey, toy)")]
    UnknownModel(String),

    /// A linear solve hit a singular matrix.
    #[error("singular Jacobian in Newton solve at step {0}")]
    SingularJacobian(usize),
}
