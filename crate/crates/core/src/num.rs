//! Scalar abstraction for the numeric core.
//!
//! Everything numeric in this crate is generic over [`Real`], so the same
//! pipeline runs in `f32` or `f64`. Concrete aliases for the common case
//! live at the crate root.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating-point scalar the pipeline computes in.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
    /// Conversion from `f64`; panics only for values outside the type's
    /// range, which no finite input here produces.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from(x).expect("f64 value representable in scalar type")
    }

    /// Widening conversion used where grid arithmetic wants full precision.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
