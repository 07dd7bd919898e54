//! Integer value types usable as domain values.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::str::FromStr;

use num_traits::{CheckedNeg, CheckedRem, FromPrimitive, PrimInt, Signed};

/// A signed machine integer usable as a raw domain value.
///
/// Everything in the crate is generic over this trait; the root aliases fix
/// it to `i64`.
pub trait Value:
    PrimInt
    + Signed
    + CheckedRem
    + CheckedNeg
    + FromPrimitive
    + Hash
    + Debug
    + Display
    + FromStr
    + Send
    + Sync
    + 'static
{
}

impl<T> Value for T where
    T: PrimInt
        + Signed
        + CheckedRem
        + CheckedNeg
        + FromPrimitive
        + Hash
        + Debug
        + Display
        + FromStr
        + Send
        + Sync
        + 'static
{
}
