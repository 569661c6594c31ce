use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar used by the analytic evaluators.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static
{
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).unwrap()
    }

    #[inline]
    fn from_count(v: u64) -> Self {
        Self::from_u64(v).unwrap()
    }
}

impl<T> Scalar for T where T: Float + FloatConst + FromPrimitive + Debug + Display + Send + Sync + 'static {}
