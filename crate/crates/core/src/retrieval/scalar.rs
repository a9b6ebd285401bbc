use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point type usable for index statistics and scores.
pub trait Scalar:
    Float + FromPrimitive + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal fits the scalar type")
    }

    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count fits the scalar type")
    }
}

impl<T> Scalar for T where
    T: Float + FromPrimitive + Debug + Display + Default + Send + Sync + Serialize + DeserializeOwned + 'static
{
}
