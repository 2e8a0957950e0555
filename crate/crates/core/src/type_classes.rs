//! Exact enumeration of empirical-measure classes and their cardinality
//! bounds.
//!
//! For fixed (l, n, s) every length-l path has a cyclic (s+1)-tuple
//! empirical measure; grouping the n^l paths by exact integer counts yields
//! the achievable set and the type-class sizes. Everything downstream (rate
//! verification, nearest achievable measure) reuses this census.
//!
//! Two families of cardinality bounds are verified per class:
//!
//! * the conditional-entropy sandwich
//!   `(2l)^(-n^(s+1)) e^(l H_c) <= |T| <= l e^(l H_c)` for l >= n, and
//! * the permutation bounds built from follower-set counting:
//!   `prod_i (lbar_i - 1)! / prod l_ij!  <=  |T|  <=  l prod_i lbar_i! /
//!   prod l_ij!`, products over contexts with positive mass.
//!
//! A count vector is achievable iff it is exactly stationary and the
//! directed multigraph it induces (edges `i.j -> j.k` with the counted
//! multiplicities) has a single strongly connected component covering every
//! node with positive degree; this is the Euler-circuit criterion, and the
//! all-self-loop "diagonal" measures are the canonical near-miss.
//!
//! Enumeration is parallelized over fixed-length prefix partitions whose
//! layout depends only on (n, l); per-partition results are merged in
//! prefix order, so outputs are identical for every worker count.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::dist::KTupleDistribution;
use crate::empirical::{cyclic_counts_into, EmpiricalMeasure};
use crate::error::{Error, Result};
use crate::index::{tuple_count, unflatten};
use crate::numeric::{factorial_u128, KahanSum, LnFactorials};
use crate::scalar::{real, Scalar};

/// Budget and parallelism knobs for exhaustive path scans.
#[derive(Debug, Clone, Copy)]
pub struct ScanOptions {
    /// Maximum n^l * l path-steps a scan may cost.
    pub max_path_steps: u128,
    /// Worker threads; 0 means use the available parallelism.
    pub workers: usize,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            max_path_steps: 100_000_000,
            workers: 0,
        }
    }
}

/// Exact map from achievable count vectors to type-class cardinalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeCensus {
    n: usize,
    s: usize,
    l: u64,
    classes: BTreeMap<Vec<u64>, u64>,
}

impl TypeCensus {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Iterates classes in lexicographic count-vector order.
    pub fn iter(&self) -> impl Iterator<Item = (&[u64], u64)> {
        self.classes.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn cardinality(&self, counts: &[u64]) -> Option<u64> {
        self.classes.get(counts).copied()
    }

    pub fn contains(&self, counts: &[u64]) -> bool {
        self.classes.contains_key(counts)
    }

    /// Sum of all class cardinalities (must equal n^l).
    pub fn total_paths(&self) -> u128 {
        self.classes.values().map(|&c| c as u128).sum()
    }

    pub fn measure(&self, counts: &[u64]) -> Result<EmpiricalMeasure> {
        EmpiricalMeasure::new(self.n, self.s + 1, counts.to_vec())
    }

    /// Assembles a census from already-grouped entries (deserialization).
    pub fn from_entries(
        n: usize,
        s: usize,
        l: u64,
        entries: impl IntoIterator<Item = (Vec<u64>, u64)>,
    ) -> Result<Self> {
        let len = tuple_count(n, s + 1).ok_or(Error::EmptyAlphabet)?;
        let mut classes = BTreeMap::new();
        for (counts, cardinality) in entries {
            if counts.len() != len {
                return Err(Error::LengthMismatch {
                    n,
                    k: s + 1,
                    expected: len,
                    got: counts.len(),
                });
            }
            if counts.iter().sum::<u64>() != l {
                return Err(Error::InvalidInput(format!(
                    "census entry sums to {}, expected l = {l}",
                    counts.iter().sum::<u64>()
                )));
            }
            let measure = EmpiricalMeasure::new(n, s + 1, counts.clone())?;
            if !measure.is_exactly_stationary() {
                return Err(Error::InvalidInput(format!(
                    "census entry {counts:?} is not a stationary count vector"
                )));
            }
            classes.insert(counts, cardinality);
        }
        Ok(Self { n, s, l, classes })
    }
}

/// Cost of scanning all paths, in path-steps.
pub fn path_steps(n: usize, l: usize) -> Option<u128> {
    let paths = (n as u128).checked_pow(u32::try_from(l).ok()?)?;
    paths.checked_mul(l.max(1) as u128)
}

pub(crate) fn check_budget(n: usize, l: usize, options: &ScanOptions) -> Result<()> {
    let required = path_steps(n, l).unwrap_or(u128::MAX);
    if required > options.max_path_steps {
        return Err(Error::BudgetExceeded {
            required,
            budget: options.max_path_steps,
        });
    }
    Ok(())
}

/// Fixed prefix length for chunked enumeration; depends only on (n, l) so
/// chunk boundaries (and therefore merged floating-point results) never
/// change with the worker count.
fn chunk_prefix_len(n: usize, l: usize) -> usize {
    let mut p = 0usize;
    let mut chunks = 1usize;
    while p < l && chunks < 128 {
        match chunks.checked_mul(n) {
            Some(next) => {
                chunks = next;
                p += 1;
            }
            None => break,
        }
    }
    p
}

/// Runs `visit` over every path in A^l, chunked by prefix; returns the
/// per-chunk accumulators in prefix order.
pub(crate) fn scan_paths<T, I, V>(
    n: usize,
    l: usize,
    options: &ScanOptions,
    init: I,
    visit: V,
) -> Result<Vec<T>>
where
    T: Send,
    I: Fn() -> T + Sync,
    V: Fn(&mut T, &[usize]) + Sync,
{
    if n == 0 {
        return Err(Error::EmptyAlphabet);
    }
    check_budget(n, l, options)?;
    let prefix_len = chunk_prefix_len(n, l);
    let chunk_count = tuple_count(n, prefix_len).expect("chunk count fits");
    let run_chunk = |chunk: usize| -> T {
        let mut acc = init();
        let mut path = unflatten(chunk, n, prefix_len);
        path.resize(l, 0);
        loop {
            visit(&mut acc, &path);
            // odometer over the suffix positions
            let mut pos = l;
            while pos > prefix_len {
                pos -= 1;
                path[pos] += 1;
                if path[pos] < n {
                    break;
                }
                path[pos] = 0;
                if pos == prefix_len {
                    return acc;
                }
            }
            if l == prefix_len {
                return acc;
            }
        }
    };

    let workers = if options.workers == 0 {
        std::thread::available_parallelism().map_or(1, usize::from)
    } else {
        options.workers
    }
    .min(chunk_count)
    .max(1);

    if workers == 1 {
        return Ok((0..chunk_count).map(run_chunk).collect());
    }

    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..chunk_count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let chunk = next.fetch_add(1, Ordering::Relaxed);
                if chunk >= chunk_count {
                    break;
                }
                let acc = run_chunk(chunk);
                slots.lock().expect("scan mutex poisoned")[chunk] = Some(acc);
            });
        }
    });
    let collected = slots
        .into_inner()
        .expect("scan mutex poisoned")
        .into_iter()
        .map(|slot| slot.expect("every chunk was scanned"))
        .collect();
    Ok(collected)
}

struct CensusAccumulator {
    map: BTreeMap<Vec<u64>, u64>,
    scratch: Vec<u64>,
}

/// Exhaustively enumerates A^l and groups paths by their exact cyclic
/// empirical counts.
pub fn enumerate_census(n: usize, l: usize, s: usize) -> Result<TypeCensus> {
    enumerate_census_with(n, l, s, &ScanOptions::default())
}

pub fn enumerate_census_with(
    n: usize,
    l: usize,
    s: usize,
    options: &ScanOptions,
) -> Result<TypeCensus> {
    let len = tuple_count(n, s + 1).ok_or(Error::EmptyAlphabet)?;
    let chunks = scan_paths(
        n,
        l,
        options,
        || CensusAccumulator {
            map: BTreeMap::new(),
            scratch: vec![0u64; len],
        },
        |acc, path| {
            acc.scratch.fill(0);
            cyclic_counts_into(path, n, s, &mut acc.scratch);
            if let Some(slot) = acc.map.get_mut(acc.scratch.as_slice()) {
                *slot += 1;
            } else {
                acc.map.insert(acc.scratch.clone(), 1);
            }
        },
    )?;
    let mut classes: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
    for chunk in chunks {
        for (counts, cardinality) in chunk.map {
            *classes.entry(counts).or_insert(0) += cardinality;
        }
    }
    Ok(TypeCensus {
        n,
        s,
        l: l as u64,
        classes,
    })
}

/// Conditional-entropy sandwich verdict for one census class.
#[derive(Debug, Clone)]
pub struct BoundsRow<F> {
    pub counts: Vec<u64>,
    pub cardinality: u64,
    pub log_cardinality: F,
    /// l * H_c(zeta), computed from exact counts.
    pub scaled_conditional_entropy: F,
    pub log_lower: F,
    pub log_upper: F,
    pub entropy_pass: bool,
    pub perm_log_lower: F,
    pub perm_log_upper: F,
    pub permutation_pass: bool,
}

/// Census-wide bound verification.
#[derive(Debug, Clone)]
pub struct BoundsReport<F> {
    pub n: usize,
    pub s: usize,
    pub l: u64,
    /// The sandwich is a theorem only for l >= n; below that the report is
    /// informational.
    pub hypothesis_met: bool,
    pub rows: Vec<BoundsRow<F>>,
    pub all_pass: bool,
}

/// Log-space slack for bound comparisons (exact boundary cases occur).
pub const BOUND_LOG_SLACK: f64 = 1e-9;

/// Verifies both cardinality sandwiches for every class of the census.
pub fn check_census_bounds<F: Scalar>(census: &TypeCensus) -> BoundsReport<F> {
    let slack = real::<F>(BOUND_LOG_SLACK);
    let l = census.l;
    let n = census.n;
    let tuple_len = tuple_count(n, census.s + 1).expect("census shape is valid") as f64;
    let facts = LnFactorials::up_to(l);
    let mut rows = Vec::with_capacity(census.class_count());
    let mut all_pass = true;
    for (counts, cardinality) in census.iter() {
        let scaled_hc = real::<F>(scaled_conditional_entropy(counts, n));
        let log_l = real::<F>((l as f64).ln());
        let log_lower = real::<F>(-tuple_len * (2.0 * l as f64).ln()) + scaled_hc;
        let log_upper = log_l + scaled_hc;
        let log_cardinality = real::<F>((cardinality as f64).ln());
        let entropy_pass =
            log_lower - slack <= log_cardinality && log_cardinality <= log_upper + slack;
        let perm = permutation_bounds_from_counts::<F>(counts, n, l, &facts);
        let permutation_pass = perm.sandwiches(cardinality, slack);
        all_pass &= entropy_pass && permutation_pass;
        rows.push(BoundsRow {
            counts: counts.to_vec(),
            cardinality,
            log_cardinality,
            scaled_conditional_entropy: scaled_hc,
            log_lower,
            log_upper,
            entropy_pass,
            perm_log_lower: perm.log_lower,
            perm_log_upper: perm.log_upper,
            permutation_pass,
        });
    }
    BoundsReport {
        n,
        s: census.s,
        l,
        hypothesis_met: l >= n as u64,
        rows,
        all_pass,
    }
}

/// l * H_c from exact counts:
/// `sum_i lbar_i ln lbar_i - sum_t c_t ln c_t`.
pub(crate) fn scaled_conditional_entropy(counts: &[u64], n: usize) -> f64 {
    let contexts = counts.len() / n;
    let mut acc = KahanSum::<f64>::new();
    for context in 0..contexts {
        let lbar: u64 = counts[context * n..(context + 1) * n].iter().sum();
        if lbar > 0 {
            acc.add(lbar as f64 * (lbar as f64).ln());
        }
    }
    for &c in counts {
        if c > 0 {
            acc.add(-(c as f64) * (c as f64).ln());
        }
    }
    acc.value()
}

/// Multinomial coefficient sandwich in log space, with the exact value from
/// the log-factorial table: `(2m)^-(n-1) e^(m H) <= C(m; m_vec) <= e^(m H)`.
#[derive(Debug, Clone, Copy)]
pub struct MultinomialBounds<F> {
    pub log_lower: F,
    pub log_exact: F,
    pub log_upper: F,
    /// The lower bound is a theorem for m >= n; smaller m is informational.
    pub hypothesis_met: bool,
}

pub fn multinomial_bounds<F: Scalar>(m: u64, m_vec: &[u64]) -> Result<MultinomialBounds<F>> {
    if m_vec.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let sum: u64 = m_vec.iter().sum();
    if sum != m {
        return Err(Error::InvalidInput(format!(
            "multinomial cells sum to {sum}, expected {m}"
        )));
    }
    let n = m_vec.len() as u64;
    let facts = LnFactorials::up_to(m);
    let mut log_exact = KahanSum::<f64>::new();
    log_exact.add(facts.get(m));
    for &c in m_vec {
        log_exact.add(-facts.get(c));
    }
    // m * H(m_vec / m) = m ln m - sum c ln c
    let mut scaled_entropy = KahanSum::<f64>::new();
    if m > 0 {
        scaled_entropy.add(m as f64 * (m as f64).ln());
        for &c in m_vec {
            if c > 0 {
                scaled_entropy.add(-(c as f64) * (c as f64).ln());
            }
        }
    }
    let log_upper = scaled_entropy.value();
    let log_lower = log_upper - (n as f64 - 1.0) * (2.0 * m as f64).ln();
    Ok(MultinomialBounds {
        log_lower: real(log_lower),
        log_exact: real(log_exact.value()),
        log_upper: real(log_upper),
        hypothesis_met: m >= n,
    })
}

/// Follower-set permutation bounds for a type class, exactly in 128-bit
/// integers when l <= 20 and in log space beyond.
#[derive(Debug, Clone, Copy)]
pub struct PermutationBounds<F> {
    pub log_lower: F,
    pub log_upper: F,
    exact: Option<ExactPermutationBounds>,
}

#[derive(Debug, Clone, Copy)]
struct ExactPermutationBounds {
    lower_num: u128,
    lower_den: u128,
    upper_num: u128,
    upper_den: u128,
}

impl<F: Scalar> PermutationBounds<F> {
    /// lower <= cardinality <= upper, exactly when possible, otherwise in
    /// log space with the given slack.
    pub fn sandwiches(&self, cardinality: u64, log_slack: F) -> bool {
        if let Some(exact) = self.exact {
            let c = cardinality as u128;
            return exact.lower_num <= c * exact.lower_den
                && c * exact.upper_den <= exact.upper_num;
        }
        let log_c = real::<F>((cardinality as f64).ln());
        self.log_lower - log_slack <= log_c && log_c <= self.log_upper + log_slack
    }
}

pub fn permutation_bounds<F: Scalar>(zeta: &EmpiricalMeasure) -> Result<PermutationBounds<F>> {
    if zeta.k() < 2 {
        return Err(Error::TupleTooShort {
            min: 2,
            got: zeta.k(),
        });
    }
    let facts = LnFactorials::up_to(zeta.total());
    Ok(permutation_bounds_from_counts(
        zeta.counts(),
        zeta.n(),
        zeta.total(),
        &facts,
    ))
}

fn permutation_bounds_from_counts<F: Scalar>(
    counts: &[u64],
    n: usize,
    l: u64,
    facts: &LnFactorials,
) -> PermutationBounds<F> {
    let contexts = counts.len() / n;
    let mut log_lower = KahanSum::<f64>::new();
    let mut log_upper = KahanSum::<f64>::new();
    log_upper.add((l.max(1) as f64).ln());
    for context in 0..contexts {
        let lbar: u64 = counts[context * n..(context + 1) * n].iter().sum();
        if lbar > 0 {
            log_lower.add(facts.get(lbar - 1));
            log_upper.add(facts.get(lbar));
        }
    }
    for &c in counts {
        if c > 0 {
            log_lower.add(-facts.get(c));
            log_upper.add(-facts.get(c));
        }
    }
    let exact = (l <= 20).then(|| {
        let mut lower_num = 1u128;
        let mut upper_num = l.max(1) as u128;
        let mut den = 1u128;
        for context in 0..contexts {
            let lbar: u64 = counts[context * n..(context + 1) * n].iter().sum();
            if lbar > 0 {
                lower_num *= factorial_u128(lbar - 1);
                upper_num *= factorial_u128(lbar);
            }
        }
        for &c in counts {
            den *= factorial_u128(c);
        }
        ExactPermutationBounds {
            lower_num,
            lower_den: den,
            upper_num,
            upper_den: den,
        }
    });
    PermutationBounds {
        log_lower: real(log_lower.value()),
        log_upper: real(log_upper.value()),
        exact,
    }
}

/// Euler-circuit achievability test: exact stationarity plus a single
/// strongly connected component spanning all positive-degree nodes.
pub fn is_achievable(zeta: &EmpiricalMeasure) -> bool {
    if zeta.total() == 0 {
        return false;
    }
    if zeta.k() == 1 {
        return true;
    }
    if !zeta.is_exactly_stationary() {
        return false;
    }
    let n = zeta.n();
    let node_count = zeta.counts().len() / n;
    // adjacency over contexts: tuple (i_1..i_{k}) is an edge
    // (i_1..i_{k-1}) -> (i_2..i_k)
    let mut forward: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    let mut backward: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    let mut active = vec![false; node_count];
    for (idx, &c) in zeta.counts().iter().enumerate() {
        if c == 0 {
            continue;
        }
        let from = idx / n;
        let to = idx % node_count;
        forward[from].push(to);
        backward[to].push(from);
        active[from] = true;
        active[to] = true;
    }
    let start = match active.iter().position(|&a| a) {
        Some(node) => node,
        None => return false,
    };
    let reaches_all = |adjacency: &[Vec<usize>]| {
        let mut seen = vec![false; node_count];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(node) = stack.pop() {
            for &next in &adjacency[node] {
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        active
            .iter()
            .zip(&seen)
            .all(|(&is_active, &was_seen)| !is_active || was_seen)
    };
    reaches_all(&forward) && reaches_all(&backward)
}

/// Nearest achievable empirical measure in total l1 distance, by scanning
/// the census; ties broken lexicographically (first in census order).
pub fn nearest_empirical<F: Scalar>(
    psi: &KTupleDistribution<F>,
    l: usize,
) -> Result<(EmpiricalMeasure, F)> {
    nearest_empirical_with(psi, l, &ScanOptions::default())
}

pub fn nearest_empirical_with<F: Scalar>(
    psi: &KTupleDistribution<F>,
    l: usize,
    options: &ScanOptions,
) -> Result<(EmpiricalMeasure, F)> {
    psi.require_stationary()?;
    if psi.k() < 2 {
        return Err(Error::TupleTooShort {
            min: 2,
            got: psi.k(),
        });
    }
    let census = enumerate_census_with(psi.n(), l, psi.k() - 1, options)?;
    let scale = F::from(l as f64).expect("length fits in scalar");
    let mut best: Option<(Vec<u64>, F)> = None;
    for (counts, _) in census.iter() {
        let mut distance = F::zero();
        for (&c, &p) in counts.iter().zip(psi.as_slice()) {
            let freq = F::from(c).expect("count fits in scalar") / scale;
            distance = distance + (freq - p).abs();
        }
        match &best {
            Some((_, incumbent)) if distance >= *incumbent => {}
            _ => best = Some((counts.to_vec(), distance)),
        }
    }
    let (counts, distance) = best.expect("census of a nonempty alphabet has classes");
    Ok((census.measure(&counts)?, distance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::empirical::cyclic_empirical;
    use crate::index::for_each_path;
    use crate::model::{MarkovModel, SamplePath};

    #[test]
    fn census_n2_l2_has_three_classes() {
        let census = enumerate_census(2, 2, 1).unwrap();
        assert_eq!(census.class_count(), 3);
        assert_eq!(census.cardinality(&[2, 0, 0, 0]), Some(1));
        assert_eq!(census.cardinality(&[0, 1, 1, 0]), Some(2));
        assert_eq!(census.cardinality(&[0, 0, 0, 2]), Some(1));
    }

    #[test]
    fn census_single_symbol_alphabet() {
        let census = enumerate_census(1, 5, 1).unwrap();
        assert_eq!(census.class_count(), 1);
        assert_eq!(census.cardinality(&[5]), Some(1));
    }

    #[test]
    fn census_mass_and_class_cap() {
        let census = enumerate_census(2, 6, 1).unwrap();
        assert_eq!(census.total_paths(), 64);
        // |E(l, n, s+1)| <= (l+1)^(n^(s+1))
        assert!((census.class_count() as f64).ln() <= 4.0 * 7.0f64.ln());
    }

    #[test]
    fn census_budget_is_enforced() {
        let options = ScanOptions {
            max_path_steps: 10,
            workers: 1,
        };
        match enumerate_census_with(2, 10, 1, &options) {
            Err(Error::BudgetExceeded { required, budget }) => {
                assert_eq!(required, 1024 * 10);
                assert_eq!(budget, 10);
            }
            other => panic!("expected budget refusal, got {other:?}"),
        }
    }

    #[test]
    fn census_is_identical_across_worker_counts() {
        let baseline = enumerate_census_with(
            3,
            7,
            1,
            &ScanOptions {
                workers: 1,
                ..ScanOptions::default()
            },
        )
        .unwrap();
        for workers in [2usize, 4, 8] {
            let census = enumerate_census_with(
                3,
                7,
                1,
                &ScanOptions {
                    workers,
                    ..ScanOptions::default()
                },
            )
            .unwrap();
            assert_eq!(census, baseline);
        }
    }

    #[test]
    fn entropy_sandwich_hand_case() {
        let census = enumerate_census(2, 2, 1).unwrap();
        let report = check_census_bounds::<f64>(&census);
        assert!(report.hypothesis_met);
        assert!(report.all_pass);
        let row = report
            .rows
            .iter()
            .find(|r| r.counts == vec![0, 1, 1, 0])
            .unwrap();
        // H_c = 0, bounds [(2l)^-4, l] = [1/256, 2], |T| = 2
        assert!(row.scaled_conditional_entropy.abs() < 1e-12);
        assert!((row.log_lower - (1.0f64 / 256.0).ln()).abs() < 1e-12);
        assert!((row.log_upper - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn bounds_hold_for_paper_regime() {
        let census = enumerate_census(3, 10, 1).unwrap();
        assert_eq!(census.total_paths(), 59049);
        let report = check_census_bounds::<f64>(&census);
        assert!(report.hypothesis_met);
        assert!(report.all_pass);
    }

    #[test]
    fn multinomial_examples() {
        let b = multinomial_bounds::<f64>(4, &[2, 2]).unwrap();
        assert!((b.log_exact - 6.0f64.ln()).abs() < 1e-12);
        assert!((b.log_upper - 16.0f64.ln()).abs() < 1e-12);
        assert!((b.log_lower - 2.0f64.ln()).abs() < 1e-12);
        assert!(b.hypothesis_met);

        let degenerate = multinomial_bounds::<f64>(6, &[6, 0, 0]).unwrap();
        assert_eq!(degenerate.log_exact, 0.0);
        assert_eq!(degenerate.log_upper, 0.0);
        assert!((degenerate.log_lower + 2.0 * 12.0f64.ln()).abs() < 1e-12);

        let b3 = multinomial_bounds::<f64>(10, &[3, 3, 4]).unwrap();
        assert!((b3.log_exact - 4200.0f64.ln()).abs() < 1e-12);
        assert!(b3.log_lower <= b3.log_exact && b3.log_exact <= b3.log_upper);

        assert!(multinomial_bounds::<f64>(5, &[2, 2]).is_err());
        assert!(
            !multinomial_bounds::<f64>(2, &[1, 1, 0])
                .unwrap()
                .hypothesis_met
        );
    }

    #[test]
    fn permutation_bounds_hand_cases() {
        // single path class "a" (l = 1)
        let point = EmpiricalMeasure::new(2, 2, vec![1, 0, 0, 0]).unwrap();
        let bounds = permutation_bounds::<f64>(&point).unwrap();
        assert!(bounds.sandwiches(1, real(1e-9)));

        // {ab, ba} at l = 2: lower 1, upper 2, |T| = 2
        let swap = EmpiricalMeasure::new(2, 2, vec![0, 1, 1, 0]).unwrap();
        let bounds = permutation_bounds::<f64>(&swap).unwrap();
        assert!((bounds.log_lower - 0.0).abs() < 1e-12);
        assert!((bounds.log_upper - 2.0f64.ln()).abs() < 1e-12);
        assert!(bounds.sandwiches(2, real(1e-9)));
    }

    #[test]
    fn permutation_bounds_sandwich_whole_census() {
        for (n, l, s) in [(2usize, 10usize, 1usize), (3, 7, 1), (2, 8, 2)] {
            let census = enumerate_census(n, l, s).unwrap();
            let report = check_census_bounds::<f64>(&census);
            for row in &report.rows {
                assert!(row.permutation_pass, "n={n} l={l} s={s}: {:?}", row.counts);
            }
        }
    }

    #[test]
    fn paper_path_class_is_sandwiched() {
        let path = SamplePath::new(3, vec![0, 1, 0, 2, 2, 1, 0, 2, 1, 2]).unwrap();
        let zeta = cyclic_empirical(&path, 1);
        let census = enumerate_census(3, 10, 1).unwrap();
        let cardinality = census.cardinality(zeta.counts()).unwrap();
        let bounds = permutation_bounds::<f64>(&zeta).unwrap();
        assert!(bounds.sandwiches(cardinality, real(1e-9)));
    }

    #[test]
    fn diagonal_measure_is_not_achievable() {
        let diagonal = EmpiricalMeasure::new(2, 2, vec![1, 0, 0, 1]).unwrap();
        assert!(diagonal.is_exactly_stationary());
        assert!(!is_achievable(&diagonal));

        let swap = EmpiricalMeasure::new(2, 2, vec![0, 1, 1, 0]).unwrap();
        assert!(is_achievable(&swap));
    }

    #[test]
    fn achievability_matches_census_membership() {
        for l in 1..=6u64 {
            let census = enumerate_census(2, l as usize, 1).unwrap();
            // all compositions of l into 4 cells
            for a in 0..=l {
                for b in 0..=l - a {
                    for c in 0..=l - a - b {
                        let d = l - a - b - c;
                        let counts = vec![a, b, c, d];
                        let zeta = EmpiricalMeasure::new(2, 2, counts.clone()).unwrap();
                        if !zeta.is_exactly_stationary() {
                            assert!(!is_achievable(&zeta));
                            continue;
                        }
                        assert_eq!(
                            is_achievable(&zeta),
                            census.contains(&counts),
                            "counts {counts:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn achievability_matches_census_membership_two_step() {
        fn compositions(total: u64, cells: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
            if cells == 1 {
                prefix.push(total);
                out.push(prefix.clone());
                prefix.pop();
                return;
            }
            for value in 0..=total {
                prefix.push(value);
                compositions(total - value, cells - 1, prefix, out);
                prefix.pop();
            }
        }
        for l in 1..=6u64 {
            let census = enumerate_census(2, l as usize, 2).unwrap();
            let mut all = Vec::new();
            compositions(l, 8, &mut Vec::new(), &mut all);
            for counts in all {
                let zeta = EmpiricalMeasure::new(2, 3, counts.clone()).unwrap();
                assert_eq!(
                    is_achievable(&zeta),
                    census.contains(&counts),
                    "l={l} counts={counts:?}"
                );
            }
        }
    }

    #[test]
    fn nearest_empirical_examples() {
        // achievable at l = 4: the uniform pair measure itself
        let psi = KTupleDistribution::<f64>::uniform(2, 2);
        let (nearest, distance) = nearest_empirical(&psi, 4).unwrap();
        assert_eq!(nearest.counts(), &[1, 1, 1, 1]);
        assert!(distance.abs() < 1e-12);

        // random stationary measures stay within the guaranteed radius
        for seed in 0..20u64 {
            let model = MarkovModel::<f64>::random_positive(2, 1, seed).unwrap();
            for l in [4usize, 6, 8] {
                let (_, distance) = nearest_empirical(model.mu(), l).unwrap();
                assert!(
                    distance <= 2.0 * 4.0 * 4.0 / l as f64 + 1e-12,
                    "seed={seed} l={l}: {distance}"
                );
            }
        }
    }

    #[test]
    fn nearest_requires_stationary_input() {
        let theta = KTupleDistribution::<f64>::new(2, 2, vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        assert!(matches!(
            nearest_empirical(&theta, 4),
            Err(Error::NotStationary { .. })
        ));
    }

    #[test]
    fn exhaustive_census_agrees_with_direct_grouping() {
        // independent oracle: group paths with a plain HashMap, no chunking
        use std::collections::HashMap;
        let mut oracle: HashMap<Vec<u64>, u64> = HashMap::new();
        for_each_path(2, 5, |symbols| {
            let path = SamplePath::new(2, symbols.to_vec()).unwrap();
            let nu = cyclic_empirical(&path, 1);
            *oracle.entry(nu.counts().to_vec()).or_insert(0) += 1;
        });
        let census = enumerate_census(2, 5, 1).unwrap();
        assert_eq!(census.class_count(), oracle.len());
        for (counts, cardinality) in census.iter() {
            assert_eq!(oracle.get(counts).copied(), Some(cardinality));
        }
    }
}
