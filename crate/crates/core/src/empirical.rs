//! Empirical measures of sample paths and the follower-set decomposition.
//!
//! Three estimators with deliberately different behavior:
//!
//! * singleton frequencies: fraction of positions equal to each symbol;
//! * raw consecutive-pair frequencies over l-1 windows, which are *not*
//!   stationary in general;
//! * cyclic (s+1)-tuple frequencies, where the path is wrapped around by
//!   its own first s symbols before counting. The wrap adds s "ghost"
//!   transitions and makes the counts exactly balanced at the integer
//!   level, so the estimate is always stationary and its marginals reduce
//!   all the way down to the singleton frequencies.
//!
//! Counts are kept as exact integers; division by the window count is
//! deferred until a distribution is requested, because type-class logic
//! groups measures by exact integer identity.

use crate::dist::KTupleDistribution;
use crate::error::{Error, Result};
use crate::index::tuple_count;
use crate::model::SamplePath;
use crate::scalar::Scalar;

/// Integer-count empirical measure: `counts` over `A^k` summing to `total`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmpiricalMeasure {
    n: usize,
    k: usize,
    counts: Vec<u64>,
    total: u64,
}

impl EmpiricalMeasure {
    pub fn new(n: usize, k: usize, counts: Vec<u64>) -> Result<Self> {
        let expected = tuple_count(n, k).ok_or(Error::EmptyAlphabet)?;
        if counts.len() != expected {
            return Err(Error::LengthMismatch {
                n,
                k,
                expected,
                got: counts.len(),
            });
        }
        let total = counts.iter().sum();
        Ok(Self {
            n,
            k,
            counts,
            total,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of counted windows (the denominator of the frequencies).
    pub fn total(&self) -> u64 {
        self.total
    }

    /// The measure as a probability vector `counts / total`.
    pub fn as_distribution<F: Scalar>(&self) -> Result<KTupleDistribution<F>> {
        if self.total == 0 {
            return Err(Error::InvalidInput(
                "cannot normalize an empty empirical measure".into(),
            ));
        }
        let denom = F::from(self.total).expect("count fits in scalar");
        let p = self
            .counts
            .iter()
            .map(|&c| F::from(c).expect("count fits in scalar") / denom)
            .collect();
        KTupleDistribution::new(self.n, self.k, p)
    }

    /// Marginal counts over the last symbol (k - 1 tuple counts).
    pub fn marginal_counts(&self) -> Result<EmpiricalMeasure> {
        if self.k < 2 {
            return Err(Error::TupleTooShort {
                min: 2,
                got: self.k,
            });
        }
        let reduced_len = self.counts.len() / self.n;
        let mut counts = vec![0u64; reduced_len];
        for (prefix, slot) in counts.iter_mut().enumerate() {
            *slot = self.counts[prefix * self.n..(prefix + 1) * self.n]
                .iter()
                .sum();
        }
        Ok(Self {
            n: self.n,
            k: self.k - 1,
            counts,
            total: self.total,
        })
    }

    /// Integer-level stationarity: leading and trailing marginal counts
    /// agree exactly, recursively at every reduction level.
    pub fn is_exactly_stationary(&self) -> bool {
        let mut counts = self.counts.clone();
        let mut k = self.k;
        while k >= 2 {
            let reduced_len = counts.len() / self.n;
            let mut trailing = vec![0u64; reduced_len];
            let mut leading = vec![0u64; reduced_len];
            for (idx, &c) in counts.iter().enumerate() {
                trailing[idx / self.n] += c;
                leading[idx % reduced_len] += c;
            }
            if trailing != leading {
                return false;
            }
            counts = trailing;
            k -= 1;
        }
        true
    }
}

/// Fraction of positions carrying each symbol (k = 1, denominator l).
pub fn singleton_empirical(path: &SamplePath) -> EmpiricalMeasure {
    let mut counts = vec![0u64; path.n()];
    for &x in path.symbols() {
        counts[x] += 1;
    }
    EmpiricalMeasure {
        n: path.n(),
        k: 1,
        counts,
        total: path.len() as u64,
    }
}

/// Consecutive-pair frequencies over the l-1 real transitions (k = 2,
/// denominator l - 1, no wrap-around). Not stationary unless the path
/// happens to close on itself.
pub fn raw_doublet_empirical(path: &SamplePath) -> Result<EmpiricalMeasure> {
    let l = path.len();
    if l < 2 {
        return Err(Error::PathTooShort { l, min: 2 });
    }
    let n = path.n();
    let mut counts = vec![0u64; n * n];
    let symbols = path.symbols();
    for t in 0..l - 1 {
        counts[symbols[t] * n + symbols[t + 1]] += 1;
    }
    Ok(EmpiricalMeasure {
        n,
        k: 2,
        counts,
        total: (l - 1) as u64,
    })
}

/// Cyclic (s+1)-tuple frequencies: the path is extended by its own first s
/// symbols (cyclically when s >= l) and all l windows are counted, so the
/// result is exactly stationary with denominator l. `s = 0` degenerates to
/// the singleton frequencies.
pub fn cyclic_empirical(path: &SamplePath, s: usize) -> EmpiricalMeasure {
    let n = path.n();
    let l = path.len();
    let k = s + 1;
    let len = tuple_count(n, k).expect("n^(s+1) must fit in usize");
    let mut counts = vec![0u64; len];
    cyclic_counts_into(path.symbols(), n, s, &mut counts);
    EmpiricalMeasure {
        n,
        k,
        counts,
        total: l as u64,
    }
}

/// Accumulation core of [`cyclic_empirical`] (enumeration hot path).
/// `out` must be zeroed and of length n^(s+1).
pub(crate) fn cyclic_counts_into(symbols: &[usize], n: usize, s: usize, out: &mut [u64]) {
    let l = symbols.len();
    for t in 0..l {
        let mut idx = 0usize;
        for offset in 0..=s {
            idx = idx * n + symbols[(t + offset) % l];
        }
        out[idx] += 1;
    }
}

/// Per-symbol ordered successor sequences along the wrapped path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FollowerSets {
    n: usize,
    sets: Vec<Vec<usize>>,
}

impl FollowerSets {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Successors of `symbol` in order of occurrence.
    pub fn set(&self, symbol: usize) -> &[usize] {
        &self.sets[symbol]
    }

    pub fn total_len(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }
}

/// Decomposes a path into follower sets: `set(i)` lists the symbols that
/// follow each occurrence of `i`, including the ghost transition from the
/// last symbol back to the first.
pub fn follower_sets(path: &SamplePath) -> FollowerSets {
    let n = path.n();
    let mut sets = vec![Vec::new(); n];
    let l = path.len();
    for t in 0..l {
        sets[path.cyclic(t)].push(path.cyclic(t + 1));
    }
    FollowerSets { n, sets }
}

/// Replays follower sets from `start`: emit the current symbol, consume its
/// next follower, move there. Succeeds only if every follower is consumed
/// in exactly `total_len` steps and the walk closes back at `start`.
pub fn reconstruct_path(sets: &FollowerSets, start: usize) -> Result<SamplePath> {
    if start >= sets.n {
        return Err(Error::SymbolOutOfRange {
            symbol: start,
            n: sets.n,
        });
    }
    let l = sets.total_len();
    let mut cursors = vec![0usize; sets.n];
    let mut symbols = Vec::with_capacity(l);
    let mut at = start;
    for emitted in 0..l {
        symbols.push(at);
        let cursor = cursors[at];
        if cursor >= sets.sets[at].len() {
            return Err(Error::ReconstructionStuck { at, emitted, l });
        }
        cursors[at] += 1;
        at = sets.sets[at][cursor];
    }
    if at != start {
        return Err(Error::ReconstructionNotClosed { end: at, start });
    }
    SamplePath::new(sets.n, symbols)
}
