//! Numerical evaluation of the analytic bounds.
//!
//! Every evaluator is generic over the floating-point [`Scalar`]; the crate
//! root aliases the `f64` instances. All logarithms are natural logarithms.
//! Constants that the analysis leaves unspecified (`c`, `D1`, `D2`, `C0`, the
//! coefficient of `r_k`) live in [`BoundsConfig`].

// `!(a > b)` rejects NaN along with small values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod formulas;
mod sieve;

use serde::Serialize;

pub use config::BoundsConfig;
pub use formulas::{
    ck_bound, e_constant, eq1_check, eq1_from_counts, lasteq_lower, ln_theorem1_lower, select_parameters,
    theorem1_lower, Conditions, Eq1Report, LastEqReport, ParameterReport,
};
pub use sieve::{
    lemma1_rhs, lemma2_rhs, mertens_product, omega_profile, r_k, sieve_product, Lemma2Report,
    SieveProduct,
};

use crate::Scalar;

/// Name of the logarithm used throughout, reported alongside results.
pub const LOG_BASE: &str = "natural";

/// An evaluator result, or the reason its inputs are outside the formula's domain.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Evaluated<R> {
    Value(R),
    OutOfDomain { domain: String },
}

impl<R> Evaluated<R> {
    pub fn value(self) -> Option<R> {
        match self {
            Evaluated::Value(v) => Some(v),
            Evaluated::OutOfDomain { .. } => None,
        }
    }

    pub fn as_value(&self) -> Option<&R> {
        match self {
            Evaluated::Value(v) => Some(v),
            Evaluated::OutOfDomain { .. } => None,
        }
    }

    pub(crate) fn out_of_domain(reason: impl Into<String>) -> Self {
        Evaluated::OutOfDomain {
            domain: reason.into(),
        }
    }
}

/// `ln(n!)`.
pub(crate) fn ln_factorial<T: Scalar>(n: u32) -> T {
    (2..=n).fold(T::zero(), |acc, i| acc + T::from_count(i as u64).ln())
}
