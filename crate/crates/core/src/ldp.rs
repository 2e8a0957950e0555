//! Exact finite-length large-deviation quantities and their envelopes.
//!
//! For a strictly positive model, every path's log-likelihood is pinned by
//! its cyclic empirical measure up to additive constants:
//!
//! ```text
//! -l [J(nu, mu) - J(nu_bar, mu_bar)] + c_lo
//!     <= log Pr{X_1^l = x}
//!     <= -l [J(nu, mu) - J(nu_bar, mu_bar)] + c_hi
//! ```
//!
//! with `c_lo = (s+1) ln a_lo - s ln b_hi`, `c_hi = (s+1) ln a_hi - s ln
//! b_lo` built from the extreme entries of `mu_bar` (a) and `mu` (b).
//! Combining this with the type-class cardinality sandwich gives a fully
//! explicit envelope around the normalized class log-probability:
//!
//! ```text
//! | delta(l, zeta) + D_c(zeta || mu) |
//!     <= (n^(s+1) ln(2l) + max(|c_lo|, |c_hi|) + ln l) / l
//! ```
//!
//! where `delta(l, zeta) = (1/l) log Pr{empirical = zeta}` is computed here
//! exactly by exhaustive enumeration at census scale. Event probabilities
//! add one more `(n^(s+1) ln(l+1)) / l` term for the class count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::KTupleDistribution;
use crate::empirical::{cyclic_counts_into, cyclic_empirical, EmpiricalMeasure};
use crate::error::{Error, Result};
use crate::index::tuple_count;
use crate::information::{conditional_relative_entropy, conditional_relative_entropy_rows};
use crate::model::{MarkovModel, SamplePath};
use crate::numeric::KahanSum;
use crate::scalar::{cross_check_close, real, Scalar};
use crate::type_classes::{scan_paths, ScanOptions};

/// Path log-likelihood bracketed by its empirical-measure envelope.
#[derive(Debug, Clone, Copy)]
pub struct Sandwich<F> {
    pub lower: F,
    pub exact: F,
    pub upper: F,
}

/// Additive constants of the likelihood sandwich.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SandwichConstants<F> {
    pub c_lower: F,
    pub c_upper: F,
}

pub(crate) fn sandwich_constants<F: Scalar>(
    model: &MarkovModel<F>,
) -> Result<SandwichConstants<F>> {
    model.require_strictly_positive()?;
    let ((a_lo, a_hi), (b_lo, b_hi)) = model.entry_ranges();
    let s = real::<F>(model.s() as f64);
    let s1 = s + F::one();
    Ok(SandwichConstants {
        c_lower: s1 * a_lo.ln() - s * b_hi.ln(),
        c_upper: s1 * a_hi.ln() - s * b_lo.ln(),
    })
}

/// Evaluates the likelihood sandwich for one path (requires a strictly
/// positive model and l >= s + 1).
pub fn likelihood_sandwich<F: Scalar>(
    model: &MarkovModel<F>,
    path: &SamplePath,
) -> Result<Sandwich<F>> {
    let constants = sandwich_constants(model)?;
    if path.len() < model.s() + 1 {
        return Err(Error::PathTooShort {
            l: path.len(),
            min: model.s() + 1,
        });
    }
    let exact = model.log_path_probability(path)?;
    let nu = cyclic_empirical(path, model.s());
    let core = log_likelihood_core(model, &nu);
    Ok(Sandwich {
        lower: core + constants.c_lower,
        exact,
        upper: core + constants.c_upper,
    })
}

/// `-l [J(nu, mu) - J(nu_bar, mu_bar)]`, evaluated from exact counts so the
/// scale-l term carries no extra rounding.
fn log_likelihood_core<F: Scalar>(model: &MarkovModel<F>, nu: &EmpiricalMeasure) -> F {
    let n = model.n();
    let mut acc = KahanSum::<F>::new();
    for (idx, &count) in nu.counts().iter().enumerate() {
        if count > 0 {
            let c = F::from(count).expect("count fits in scalar");
            acc.add(c * model.mu().prob(idx).ln());
        }
    }
    let contexts = nu.counts().len() / n;
    for context in 0..contexts {
        let lbar: u64 = nu.counts()[context * n..(context + 1) * n].iter().sum();
        if lbar > 0 {
            let c = F::from(lbar).expect("count fits in scalar");
            acc.add(-c * model.mu_bar().prob(context).ln());
        }
    }
    acc.value()
}

/// Explicit deviation envelope for `|delta + D_c|` at length l.
pub fn rate_error_envelope<F: Scalar>(model: &MarkovModel<F>, l: u64) -> Result<F> {
    let constants = sandwich_constants(model)?;
    let tuple_len = real::<F>(tuple_count(model.n(), model.s() + 1).expect("shape valid") as f64);
    let l_f = real::<F>(l as f64);
    let c_max = constants.c_lower.abs().max(constants.c_upper.abs());
    Ok((tuple_len * (real::<F>(2.0) * l_f).ln() + c_max + l_f.ln()) / l_f)
}

/// Per-class exact probabilities under a model: cardinality, total
/// probability, and its log, keyed by exact counts.
#[derive(Debug, Clone)]
pub struct ClassProbabilities<F> {
    n: usize,
    s: usize,
    l: u64,
    classes: BTreeMap<Vec<u64>, ClassStat<F>>,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassStat<F> {
    pub cardinality: u64,
    pub probability: F,
    pub log_probability: F,
}

impl<F: Scalar> ClassProbabilities<F> {
    pub fn l(&self) -> u64 {
        self.l
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[u64], &ClassStat<F>)> {
        self.classes.iter().map(|(k, v)| (k.as_slice(), v))
    }

    pub fn stat(&self, counts: &[u64]) -> Option<&ClassStat<F>> {
        self.classes.get(counts)
    }

    /// delta(l, zeta): normalized log-probability of the class, `-inf` for
    /// unachievable measures.
    pub fn delta(&self, counts: &[u64]) -> F {
        match self.classes.get(counts) {
            Some(stat) => stat.log_probability / real::<F>(self.l as f64),
            None => F::neg_infinity(),
        }
    }

    /// Sum of all class probabilities (one, up to enumeration rounding).
    pub fn total_probability(&self) -> F {
        let mut acc = KahanSum::<F>::new();
        for stat in self.classes.values() {
            acc.add(stat.probability);
        }
        acc.value()
    }
}

/// Exhaustively enumerates A^l, grouping paths by cyclic empirical measure
/// and accumulating exact path probabilities per class (compensated, in a
/// fixed order independent of the worker count).
pub fn class_probabilities<F: Scalar>(
    model: &MarkovModel<F>,
    l: usize,
) -> Result<ClassProbabilities<F>> {
    class_probabilities_with(model, l, &ScanOptions::default())
}

pub fn class_probabilities_with<F: Scalar>(
    model: &MarkovModel<F>,
    l: usize,
    options: &ScanOptions,
) -> Result<ClassProbabilities<F>> {
    if l < model.s() {
        return Err(Error::PathTooShort { l, min: model.s() });
    }
    let n = model.n();
    let s = model.s();
    let len = tuple_count(n, s + 1).ok_or(Error::EmptyAlphabet)?;
    struct Acc<F> {
        map: BTreeMap<Vec<u64>, (u64, KahanSum<F>)>,
        scratch: Vec<u64>,
    }
    let chunks = scan_paths(
        n,
        l,
        options,
        || Acc::<F> {
            map: BTreeMap::new(),
            scratch: vec![0u64; len],
        },
        |acc, path| {
            acc.scratch.fill(0);
            cyclic_counts_into(path, n, s, &mut acc.scratch);
            let log_prob = model.log_prob_symbols(path);
            let probability = if log_prob.is_infinite() {
                F::zero()
            } else {
                log_prob.exp()
            };
            if let Some((cardinality, sum)) = acc.map.get_mut(acc.scratch.as_slice()) {
                *cardinality += 1;
                sum.add(probability);
            } else {
                let mut sum = KahanSum::new();
                sum.add(probability);
                acc.map.insert(acc.scratch.clone(), (1, sum));
            }
        },
    )?;
    let mut merged: BTreeMap<Vec<u64>, (u64, KahanSum<F>)> = BTreeMap::new();
    for chunk in chunks {
        for (counts, (cardinality, sum)) in chunk.map {
            match merged.get_mut(&counts) {
                Some((total, acc)) => {
                    *total += cardinality;
                    acc.merge(&sum);
                }
                None => {
                    merged.insert(counts, (cardinality, sum));
                }
            }
        }
    }
    let classes = merged
        .into_iter()
        .map(|(counts, (cardinality, sum))| {
            let probability = sum.value();
            let log_probability = if probability > F::zero() {
                probability.ln()
            } else {
                F::neg_infinity()
            };
            (
                counts,
                ClassStat {
                    cardinality,
                    probability,
                    log_probability,
                },
            )
        })
        .collect();
    Ok(ClassProbabilities {
        n,
        s,
        l: l as u64,
        classes,
    })
}

/// delta(l, zeta) for a single measure, enumerating at census scale.
pub fn delta_exact<F: Scalar>(
    model: &MarkovModel<F>,
    zeta: &EmpiricalMeasure,
    options: &ScanOptions,
) -> Result<F> {
    let probs = class_probabilities_with(model, zeta.total() as usize, options)?;
    Ok(probs.delta(zeta.counts()))
}

/// One convergence check: exact delta against the rate prediction, with
/// the explicit envelope.
#[derive(Debug, Clone, Copy)]
pub struct RateRow<F> {
    pub l: u64,
    /// Exact normalized log-probability.
    pub exact: F,
    /// Rate prediction: `-D_c(zeta || mu)` (or `-inf_Gamma D_c` for events).
    pub rate: F,
    pub envelope: F,
    pub pass: bool,
}

impl<F: Scalar> RateRow<F> {
    pub fn gap(&self) -> F {
        self.exact - self.rate
    }
}

/// Series of rate rows over a length schedule.
#[derive(Debug, Clone)]
pub struct RateReport<F> {
    pub rows: Vec<RateRow<F>>,
}

impl<F: Scalar> RateReport<F> {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Checks `|delta(l, zeta) + D_c(zeta || mu)| <= envelope` for one class,
/// reusing precomputed class probabilities.
pub fn rate_convergence_row<F: Scalar>(
    model: &MarkovModel<F>,
    zeta: &EmpiricalMeasure,
    probs: &ClassProbabilities<F>,
) -> Result<RateRow<F>> {
    let l = probs.l();
    let exact = probs.delta(zeta.counts());
    let dc = conditional_relative_entropy(&zeta.as_distribution()?, model.mu())?;
    let envelope = rate_error_envelope(model, l)?;
    let rate = -dc;
    let pass = (exact - rate).abs() <= envelope;
    Ok(RateRow {
        l,
        exact,
        rate,
        envelope,
        pass,
    })
}

/// Rate function for cyclic doublet frequencies: the conditional relative
/// entropy, cross-checked against the conditional-row form on every call.
pub fn doublet_rate<F: Scalar>(
    nu: &KTupleDistribution<F>,
    mu: &KTupleDistribution<F>,
) -> Result<F> {
    if nu.k() != 2 {
        return Err(Error::TupleTooShort {
            min: 2,
            got: nu.k(),
        });
    }
    tuple_rate(nu, mu)
}

/// Rate function for raw (`l - 1` window) doublet frequencies: the same
/// conditional relative entropy on the stationary set, `+inf` exactly off
/// it.
pub fn raw_doublet_rate<F: Scalar>(
    theta: &KTupleDistribution<F>,
    mu: &KTupleDistribution<F>,
) -> Result<F> {
    theta.same_shape(mu)?;
    if theta.k() != 2 {
        return Err(Error::TupleTooShort {
            min: 2,
            got: theta.k(),
        });
    }
    require_positive(mu)?;
    if !theta.check_stationary().is_stationary {
        return Ok(F::infinity());
    }
    tuple_rate(theta, mu)
}

/// Rate function for cyclic (s+1)-tuple frequencies of an s-step chain.
pub fn tuple_rate<F: Scalar>(nu: &KTupleDistribution<F>, mu: &KTupleDistribution<F>) -> Result<F> {
    require_positive(mu)?;
    let value = conditional_relative_entropy(nu, mu)?;
    let row_form = conditional_relative_entropy_rows(nu, mu)?;
    if !cross_check_close(value, row_form) {
        return Err(Error::CrossCheckFailed {
            what: "conditional relative entropy row form",
            left: value.to_f64().unwrap_or(f64::NAN),
            right: row_form.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(value)
}

fn require_positive<F: Scalar>(mu: &KTupleDistribution<F>) -> Result<()> {
    match mu.first_zero() {
        None => Ok(()),
        Some(index) => Err(Error::PositivityRequired { index }),
    }
}

/// Deterministic event predicate over empirical measures.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventSet {
    /// Total l1 ball around a center vector.
    L1Ball { center: Vec<f64>, radius: f64 },
    /// Half space `{nu : <normal, nu> >= offset}`.
    HalfSpace { normal: Vec<f64>, offset: f64 },
    /// Explicit list of exact count vectors.
    Classes { classes: Vec<Vec<u64>> },
}

impl EventSet {
    /// Membership of an exact count vector at length l. Frequencies are
    /// evaluated at f64 so the predicate does not depend on the working
    /// scalar type.
    pub fn contains_counts(&self, counts: &[u64], l: u64) -> bool {
        match self {
            EventSet::L1Ball { center, radius } => {
                if center.len() != counts.len() {
                    return false;
                }
                let mut distance = 0.0f64;
                for (&c, &m) in counts.iter().zip(center) {
                    distance += (c as f64 / l as f64 - m).abs();
                }
                distance <= *radius
            }
            EventSet::HalfSpace { normal, offset } => {
                if normal.len() != counts.len() {
                    return false;
                }
                let mut inner = 0.0f64;
                for (&c, &w) in counts.iter().zip(normal) {
                    inner += w * (c as f64 / l as f64);
                }
                inner >= *offset
            }
            EventSet::Classes { classes } => classes.iter().any(|class| class == counts),
        }
    }
}

/// Exact event probabilities against the rate-function proxy over a length
/// schedule: per l, `(1/l) log P{empirical in Gamma}` next to
/// `-min_{zeta in Gamma} D_c(zeta || mu)`, with the explicit envelope
/// (deviation envelope plus the class-count term).
pub fn event_rate_report<F: Scalar>(
    model: &MarkovModel<F>,
    event: &EventSet,
    schedule: &[usize],
    options: &ScanOptions,
) -> Result<RateReport<F>> {
    model.require_strictly_positive()?;
    let tuple_len = real::<F>(tuple_count(model.n(), model.s() + 1).expect("shape valid") as f64);
    let mut rows = Vec::with_capacity(schedule.len());
    for &l in schedule {
        let probs = class_probabilities_with(model, l, options)?;
        let mut mass = KahanSum::<F>::new();
        let mut min_dc = F::infinity();
        let mut member_found = false;
        for (counts, stat) in probs.iter() {
            if !event.contains_counts(counts, probs.l()) {
                continue;
            }
            member_found = true;
            mass.add(stat.probability);
            let zeta = EmpiricalMeasure::new(model.n(), model.s() + 1, counts.to_vec())?;
            let dc = conditional_relative_entropy(&zeta.as_distribution()?, model.mu())?;
            min_dc = min_dc.min(dc);
        }
        let l_f = real::<F>(l as f64);
        let envelope =
            rate_error_envelope(model, l as u64)? + tuple_len * (l_f + F::one()).ln() / l_f;
        let (exact, rate) = if member_found {
            (mass.value().ln() / l_f, -min_dc)
        } else {
            (F::neg_infinity(), F::neg_infinity())
        };
        let pass = if member_found {
            (exact - rate).abs() <= envelope
        } else {
            true
        };
        rows.push(RateRow {
            l: l as u64,
            exact,
            rate,
            envelope,
            pass,
        });
    }
    Ok(RateReport { rows })
}
