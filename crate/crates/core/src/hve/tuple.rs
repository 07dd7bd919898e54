use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TupleError {
    #[error("tuple has length {actual}, expected {expected}")]
    Length { expected: usize, actual: usize },
    #[error("component {index} out of range for a tuple of length {len}")]
    OutOfRange { index: usize, len: usize },
}

/// A fixed-length value tuple with constant-time positional access.
/// Ordered lexicographically.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tuple<V>(Box<[V]>);

impl<V: Copy> Tuple<V> {
    pub fn from_list(values: impl Into<Vec<V>>) -> Self {
        Self(values.into().into_boxed_slice())
    }

    /// The components in order. `n` must be the tuple's length.
    pub fn to_list(&self, n: usize) -> Result<Vec<V>, TupleError> {
        if n != self.0.len() {
            return Err(TupleError::Length {
                expected: n,
                actual: self.0.len(),
            });
        }
        Ok(self.0.to_vec())
    }

    /// The `i`-th component, 0-based.
    pub fn proj(&self, i: usize) -> Result<V, TupleError> {
        self.0.get(i).copied().ok_or(TupleError::OutOfRange {
            index: i,
            len: self.0.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[V] {
        &self.0
    }
}

impl<V: fmt::Display> fmt::Display for Tuple<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        f.write_str(")")
    }
}

impl<V: fmt::Debug> fmt::Debug for Tuple<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_cases() {
        assert_eq!(Tuple::from_list(vec![5i64]).as_slice(), &[5]);
        let t = Tuple::from_list(vec![0i64, 1, 0]);
        assert_eq!(t.to_list(3), Ok(vec![0, 1, 0]));
        assert_eq!(t.proj(1), Ok(1));
        assert_eq!(t.proj(3), Err(TupleError::OutOfRange { index: 3, len: 3 }));
        assert_eq!(
            t.to_list(2),
            Err(TupleError::Length {
                expected: 2,
                actual: 3
            })
        );
        let empty = Tuple::<i64>::from_list(vec![]);
        assert_eq!(empty.to_list(0), Ok(vec![]));
        assert!(empty.proj(0).is_err());
        assert!(Tuple::from_list(vec![0i64, 1]) < Tuple::from_list(vec![1i64, 0]));
    }

    proptest! {
        #[test]
        fn roundtrip(values in proptest::collection::vec(any::<i64>(), 0..12)) {
            let t = Tuple::from_list(values.clone());
            prop_assert_eq!(t.to_list(values.len()).unwrap(), values);
        }
    }
}
