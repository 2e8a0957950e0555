//! Small numeric utilities: compensated summation and exact log-factorials.

use crate::scalar::Scalar;

/// Kahan compensated accumulator. Additions are order-sensitive, so callers
/// must feed terms in a deterministic order.
#[derive(Debug, Clone, Copy)]
pub struct KahanSum<F> {
    sum: F,
    compensation: F,
}

impl<F: Scalar> Default for KahanSum<F> {
    fn default() -> Self {
        Self {
            sum: F::zero(),
            compensation: F::zero(),
        }
    }
}

impl<F: Scalar> KahanSum<F> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, term: F) {
        let y = term - self.compensation;
        let t = self.sum + y;
        self.compensation = (t - self.sum) - y;
        self.sum = t;
    }

    /// Folds another accumulator in (two ordered additions).
    pub fn merge(&mut self, other: &KahanSum<F>) {
        self.add(other.sum);
        self.add(-other.compensation);
    }

    pub fn value(&self) -> F {
        self.sum
    }
}

/// Table of ln(m!) for integer m, built once per analysis pass.
///
/// Values are accumulated with compensated summation, so the relative error
/// stays at machine precision for every m in the table.
#[derive(Debug)]
pub struct LnFactorials {
    table: Vec<f64>,
}

impl LnFactorials {
    pub fn up_to(max: u64) -> Self {
        let mut table = Vec::with_capacity(max as usize + 1);
        table.push(0.0); // 0! = 1
        let mut acc = KahanSum::<f64>::new();
        for m in 1..=max {
            acc.add((m as f64).ln());
            table.push(acc.value());
        }
        Self { table }
    }

    pub fn get(&self, m: u64) -> f64 {
        self.table[m as usize]
    }
}

/// Exact factorial in 128-bit arithmetic; valid through 33! without overflow.
pub(crate) fn factorial_u128(m: u64) -> u128 {
    (1..=m as u128).product()
}
