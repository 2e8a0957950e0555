//! Probability distributions over k-tuples and the stationarity
//! (consistency) check.
//!
//! A distribution on `A^k` is *stationary* when its leading and trailing
//! (k-1)-marginals coincide and the reduced distribution is itself
//! stationary, recursively down to single symbols. Stationary tuple
//! distributions are exactly the ones that can arise as the k-tuple
//! frequencies of a stationary process, and the one-step transition
//! structure of a Markov chain can be recovered from them.

use crate::error::{Error, Result};
use crate::index::{flat_index, tuple_count};
use crate::scalar::{real, stationarity_tolerance, sum_tolerance, Scalar};

/// Probability vector over `A^k` in canonical lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct KTupleDistribution<F> {
    n: usize,
    k: usize,
    p: Vec<F>,
}

/// Outcome of a stationarity check: the verdict plus the largest absolute
/// constraint violation found across all reduction levels.
#[derive(Debug, Clone, Copy)]
pub struct StationaryFlag<F> {
    pub is_stationary: bool,
    pub max_violation: F,
}

impl<F: Scalar> KTupleDistribution<F> {
    /// Validates entries (nonnegative, summing to 1 within
    /// [`sum_tolerance`]) and wraps them.
    pub fn new(n: usize, k: usize, p: Vec<F>) -> Result<Self> {
        Self::with_sum_tolerance(n, k, p, sum_tolerance::<F>())
    }

    pub fn with_sum_tolerance(n: usize, k: usize, p: Vec<F>, tolerance: F) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyAlphabet);
        }
        if k == 0 {
            return Err(Error::TupleTooShort { min: 1, got: 0 });
        }
        let expected = tuple_count(n, k).ok_or(Error::LengthMismatch {
            n,
            k,
            expected: usize::MAX,
            got: p.len(),
        })?;
        if p.len() != expected {
            return Err(Error::LengthMismatch {
                n,
                k,
                expected,
                got: p.len(),
            });
        }
        for (index, &value) in p.iter().enumerate() {
            if value < F::zero() {
                return Err(Error::NegativeEntry {
                    index,
                    value: value.to_f64().unwrap_or(f64::NAN),
                });
            }
        }
        let mut sum = F::zero();
        for &value in &p {
            sum = sum + value;
        }
        if (sum - F::one()).abs() > tolerance {
            return Err(Error::SumNotOne {
                sum: sum.to_f64().unwrap_or(f64::NAN),
                tolerance: tolerance.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { n, k, p })
    }

    /// Internal constructor for vectors already known to be valid
    /// (marginals, exact count ratios, solver outputs).
    pub(crate) fn from_parts(n: usize, k: usize, p: Vec<F>) -> Self {
        debug_assert_eq!(Some(p.len()), tuple_count(n, k));
        Self { n, k, p }
    }

    pub fn uniform(n: usize, k: usize) -> Self {
        let len = tuple_count(n, k).expect("n^k must fit in usize");
        let value = F::one() / real::<F>(len as f64);
        Self::from_parts(n, k, vec![value; len])
    }

    pub fn point_mass(n: usize, k: usize, tuple: &[usize]) -> Result<Self> {
        if tuple.len() != k {
            return Err(Error::TupleTooShort {
                min: k,
                got: tuple.len(),
            });
        }
        let len = tuple_count(n, k).ok_or(Error::EmptyAlphabet)?;
        let mut p = vec![F::zero(); len];
        p[flat_index(tuple, n)?] = F::one();
        Ok(Self::from_parts(n, k, p))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn as_slice(&self) -> &[F] {
        &self.p
    }

    /// Probability of the tuple with the given flat index.
    pub fn prob(&self, index: usize) -> F {
        self.p[index]
    }

    /// Probability of an explicit tuple.
    pub fn prob_tuple(&self, tuple: &[usize]) -> Result<F> {
        Ok(self.p[flat_index(tuple, self.n)?])
    }

    pub fn same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.k != other.k {
            return Err(Error::ShapeMismatch {
                n_left: self.n,
                k_left: self.k,
                n_right: other.n,
                k_right: other.k,
            });
        }
        Ok(())
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.p.iter().all(|&v| v > F::zero())
    }

    /// Index of the first zero entry, if any.
    pub(crate) fn first_zero(&self) -> Option<usize> {
        self.p.iter().position(|&v| v <= F::zero())
    }

    /// Total l1 distance between two same-shape distributions.
    pub fn l1_distance(&self, other: &Self) -> Result<F> {
        self.same_shape(other)?;
        let mut acc = F::zero();
        for (&a, &b) in self.p.iter().zip(&other.p) {
            acc = acc + (a - b).abs();
        }
        Ok(acc)
    }

    /// Marginal over the last symbol: the length-(k-1) distribution with
    /// entries `sum_j p[i, j]`.
    pub fn marginalize(&self) -> Result<Self> {
        if self.k < 2 {
            return Err(Error::TupleTooShort {
                min: 2,
                got: self.k,
            });
        }
        Ok(self.sum_over_last())
    }

    pub(crate) fn sum_over_last(&self) -> Self {
        let reduced_len = self.p.len() / self.n;
        let mut q = vec![F::zero(); reduced_len];
        for (prefix, slot) in q.iter_mut().enumerate() {
            let base = prefix * self.n;
            let mut acc = F::zero();
            for j in 0..self.n {
                acc = acc + self.p[base + j];
            }
            *slot = acc;
        }
        Self::from_parts(self.n, self.k - 1, q)
    }

    pub(crate) fn sum_over_first(&self) -> Self {
        let reduced_len = self.p.len() / self.n;
        let mut q = vec![F::zero(); reduced_len];
        for (suffix, slot) in q.iter_mut().enumerate() {
            let mut acc = F::zero();
            for j in 0..self.n {
                acc = acc + self.p[j * reduced_len + suffix];
            }
            *slot = acc;
        }
        Self::from_parts(self.n, self.k - 1, q)
    }

    /// Checks stationarity at the default tolerance.
    ///
    /// For k = 1 every distribution is stationary (no constraint). For
    /// k >= 2 the leading and trailing marginals must agree entrywise, and
    /// the reduced distribution must be stationary in turn; the reported
    /// violation is the maximum over all levels.
    pub fn check_stationary(&self) -> StationaryFlag<F> {
        self.check_stationary_with(stationarity_tolerance::<F>())
    }

    pub fn check_stationary_with(&self, tolerance: F) -> StationaryFlag<F> {
        let mut max_violation = F::zero();
        let mut current = self.clone();
        while current.k >= 2 {
            let trailing = current.sum_over_last();
            let leading = current.sum_over_first();
            for (&a, &b) in trailing.p.iter().zip(&leading.p) {
                max_violation = max_violation.max((a - b).abs());
            }
            current = trailing;
        }
        StationaryFlag {
            is_stationary: max_violation <= tolerance,
            max_violation,
        }
    }

    /// Errors with the observed violation unless stationary.
    pub fn require_stationary(&self) -> Result<()> {
        self.require_stationary_with(stationarity_tolerance::<F>())
    }

    pub fn require_stationary_with(&self, tolerance: F) -> Result<()> {
        let flag = self.check_stationary_with(tolerance);
        if flag.is_stationary {
            Ok(())
        } else {
            Err(Error::NotStationary {
                max_violation: flag.max_violation.to_f64().unwrap_or(f64::NAN),
            })
        }
    }
}
