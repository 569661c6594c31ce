//! Automaticity of integer sets in base `q`.
//!
//! The automaticity of a set `X` at `x` is the size of the smallest finite
//! automaton that, reading base-`q` digits least-significant first, accepts
//! every integer `n <= x` exactly when `n` is in `X`. This crate measures it
//! from several sides:
//!
//! - [`residuals`] computes the residual sets `A_w` of continuations `a` with
//!   `a*q^(n-m) + w` in the set, and the census of how many distinct residuals
//!   there are. Distinct residuals force distinct automaton states.
//! - [`automata`] builds length-bounded DFAs (prefix trie, greedy merge, exact
//!   search on tiny instances) and a distinguishability lower bound.
//! - [`constructions`] builds the explicit square and prime automata and the
//!   subset-count bound.
//! - [`bounds`] evaluates the analytic sieve constants and lower-bound formulas,
//!   generic over the floating-point scalar.
//!
//! The [`cli`] module backs the `automaticity` binary.

pub mod automata;
pub mod bitset;
pub mod bounds;
pub mod cli;
pub mod constructions;
mod error;
pub mod membership;
pub mod numeral;
pub mod residuals;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Default floating-point scalar for the analytic evaluators.
pub type Real = f64;

/// Exact rational scalar, used for rational cross-checks of finite prime products.
pub type Rational = num_rational::BigRational;

/// Bounds configuration over [`Real`].
pub type BoundsConfig = bounds::BoundsConfig<Real>;

/// Parameter-selection report over [`Real`].
pub type ParameterReport = bounds::ParameterReport<Real>;
