//! Solvers for Caputo fractional differential systems of order 0 < α ≤ 1.
//!
//! The crate discretizes the Caputo derivative with the Grünwald-Letnikov
//! difference operator and advances systems written in the decomposed form
//!
//! ```text
//! cD^α x = f₊(x) − x ⊙ f₋(x)
//! ```
//!
//! with either the implicit Grünwald-Letnikov scheme or a non-standard
//! finite difference (NSFD) scheme that keeps every iterate nonnegative for
//! any step size. Supporting modules locate equilibria of the built-in
//! models, classify their linear stability for fractional orders, and
//! estimate empirical convergence rates against a fine-step reference.
//!
//! - [`glkernel`] — Grünwald-Letnikov weights and the discrete Caputo
//!   derivative of a sampled path.
//! - [`models`] — the decomposed-system abstraction, the built-in
//!   predator-prey and toy models, and sampling validators.
//! - [`schemes`] — the GL and NSFD time steppers.
//! - [`analysis`] — equilibria, eigenvalues, and per-α stability verdicts.
//! - [`convergence`] — dyadic step ladders, max errors ξ(h), and observed
//!   rates ρ.

pub mod analysis;
pub mod convergence;
pub mod error;
pub mod glkernel;
pub mod models;
pub mod schemes;

pub use error::Error;
pub use glkernel::{FractionalOrder, GlWeights, SampledPath};
pub use models::DecomposedSystem;
pub use schemes::{Grid, SchemeKind, SolverOptions, Trajectory};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
