use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating-point scalar the whole crate is generic over: `f32` or `f64`.
///
/// All energies and temperatures share one dimensionless unit with k = 1,
/// so nothing here carries units. The default tolerances baked into the
/// library are calibrated for `f64`; `f32` users should pass their own.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssignOps
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal (tolerances, grid bounds, defaults) into `Self`.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 literal")
    }

    /// Converts an integer degeneracy count into `Self`.
    fn from_count(value: u64) -> Self {
        Self::from_u64(value).expect("degeneracy count representable")
    }

    /// Rescales an `f64`-calibrated near-epsilon tolerance to this scalar's
    /// precision: the identity for `f64`, the same multiple of machine
    /// epsilon for anything else.
    fn tol(f64_tol: f64) -> Self {
        let scale = Self::epsilon().to_f64().expect("epsilon fits f64") / f64::EPSILON;
        Self::lit(f64_tol * scale)
    }

    /// Nearest `f64`, for diagnostics and fixed-width formatting.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar convertible to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
