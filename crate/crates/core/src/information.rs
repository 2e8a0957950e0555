//! Entropy and divergence functionals on tuple distributions.
//!
//! Everything here is in nats (natural logs) with the `0 log 0 = 0`
//! convention. Infinite divergences are returned as the scalar's own
//! infinity so they propagate through arithmetic exactly; domination
//! failure (`mu_i = 0 < nu_i`) is the only source of infinities.
//!
//! The conditional quantities subtract the reduced-distribution value:
//! `H_c(p) = H(p) - H(p_bar)` and `D_c(nu || mu) = D(nu || mu) -
//! D(nu_bar || mu_bar)`. For stationary arguments `D_c` also equals the
//! row form `sum_i nu_bar_i sum_j c_ij log(c_ij / a_ij)` built from the
//! conditional rows, and the entropy rate of a chain equals both
//! `H_c(mu)` and the state-weighted average of row entropies.

use crate::dist::KTupleDistribution;
use crate::error::{Error, Result};
use crate::model::{MarkovModel, SamplePath};
use crate::scalar::{cross_check_close, Scalar};

/// Shannon entropy `-sum p_i ln p_i`.
pub fn entropy<F: Scalar>(p: &KTupleDistribution<F>) -> F {
    let mut acc = F::zero();
    for &v in p.as_slice() {
        if v > F::zero() {
            acc = acc - v * v.ln();
        }
    }
    acc
}

/// Relative entropy (Kullback-Leibler divergence) `sum nu_i ln(nu_i/mu_i)`;
/// `+inf` exactly when some `mu_i = 0 < nu_i`.
pub fn relative_entropy<F: Scalar>(
    nu: &KTupleDistribution<F>,
    mu: &KTupleDistribution<F>,
) -> Result<F> {
    nu.same_shape(mu)?;
    let mut acc = F::zero();
    for (&v, &m) in nu.as_slice().iter().zip(mu.as_slice()) {
        if v > F::zero() {
            if m <= F::zero() {
                return Ok(F::infinity());
            }
            acc = acc + v * (v / m).ln();
        }
    }
    Ok(acc)
}

/// Cross entropy `sum nu_i ln(1/mu_i)`, the loss whose gap over `H(nu)`
/// is the relative entropy.
pub fn cross_entropy<F: Scalar>(
    nu: &KTupleDistribution<F>,
    mu: &KTupleDistribution<F>,
) -> Result<F> {
    nu.same_shape(mu)?;
    let mut acc = F::zero();
    for (&v, &m) in nu.as_slice().iter().zip(mu.as_slice()) {
        if v > F::zero() {
            if m <= F::zero() {
                return Ok(F::infinity());
            }
            acc = acc - v * m.ln();
        }
    }
    Ok(acc)
}

/// Conditional entropy `H(p) - H(p_bar)` of a stationary distribution with
/// k >= 2; nonnegative, and equal to the chain-rule conditional entropy of
/// the last symbol given the preceding ones.
pub fn conditional_entropy<F: Scalar>(p: &KTupleDistribution<F>) -> Result<F> {
    if p.k() < 2 {
        return Err(Error::TupleTooShort { min: 2, got: p.k() });
    }
    p.require_stationary()?;
    Ok(entropy(p) - entropy(&p.marginalize()?))
}

/// Conditional relative entropy `D(nu||mu) - D(nu_bar||mu_bar)` for
/// stationary same-shape arguments with k >= 2.
///
/// When `D(nu||mu)` is infinite the reduced divergence is infinite too and
/// the conditional value is `+inf` (the row form's limit).
pub fn conditional_relative_entropy<F: Scalar>(
    nu: &KTupleDistribution<F>,
    mu: &KTupleDistribution<F>,
) -> Result<F> {
    nu.same_shape(mu)?;
    if nu.k() < 2 {
        return Err(Error::TupleTooShort {
            min: 2,
            got: nu.k(),
        });
    }
    nu.require_stationary()?;
    mu.require_stationary()?;
    let full = relative_entropy(nu, mu)?;
    if full.is_infinite() {
        return Ok(F::infinity());
    }
    let reduced = relative_entropy(&nu.marginalize()?, &mu.marginalize()?)?;
    Ok(full - reduced)
}

/// Row form of the conditional relative entropy:
/// `sum_i nu_bar_i sum_j c_ij ln(c_ij / a_ij)` with `c_ij = nu_ij/nu_bar_i`
/// and `a_ij = mu_ij/mu_bar_i`.
///
/// Evaluates the summation as written, without requiring stationarity; it
/// coincides with [`conditional_relative_entropy`] on stationary inputs.
pub fn conditional_relative_entropy_rows<F: Scalar>(
    nu: &KTupleDistribution<F>,
    mu: &KTupleDistribution<F>,
) -> Result<F> {
    nu.same_shape(mu)?;
    if nu.k() < 2 {
        return Err(Error::TupleTooShort {
            min: 2,
            got: nu.k(),
        });
    }
    let n = nu.n();
    let nu_bar = nu.sum_over_last();
    let mu_bar = mu.sum_over_last();
    let mut acc = F::zero();
    for context in 0..nu_bar.len() {
        let weight = nu_bar.prob(context);
        if weight <= F::zero() {
            continue;
        }
        let mass = mu_bar.prob(context);
        if mass <= F::zero() {
            return Ok(F::infinity());
        }
        for j in 0..n {
            let v = nu.prob(context * n + j);
            if v <= F::zero() {
                continue;
            }
            let m = mu.prob(context * n + j);
            if m <= F::zero() {
                return Ok(F::infinity());
            }
            // nu_ij * ln((nu_ij * mu_bar_i) / (nu_bar_i * mu_ij))
            acc = acc + v * ((v * mass) / (weight * m)).ln();
        }
    }
    Ok(acc)
}

/// Entropy rate of the chain, computed as `H(mu) - H(mu_bar)`.
///
/// Debug builds assert agreement with the row-average form
/// [`entropy_rate_row_average`]; the two are the statement and the
/// chain-rule expansion of the same quantity.
pub fn entropy_rate<F: Scalar>(model: &MarkovModel<F>) -> F {
    let conditional = entropy(model.mu()) - entropy(model.mu_bar());
    debug_assert!(
        cross_check_close(conditional, entropy_rate_row_average(model)),
        "entropy rate forms disagree: {conditional} vs {}",
        entropy_rate_row_average(model)
    );
    conditional
}

/// Entropy rate as the state-weighted average of conditional row entropies.
pub fn entropy_rate_row_average<F: Scalar>(model: &MarkovModel<F>) -> F {
    let mut acc = F::zero();
    for context in 0..model.mu_bar().len() {
        let weight = model.mu_bar().prob(context);
        if weight <= F::zero() {
            continue;
        }
        let row = model.row(context).expect("positive-mass context has a row");
        let mut h = F::zero();
        for &a in row {
            if a > F::zero() {
                h = h - a * a.ln();
            }
        }
        acc = acc + weight * h;
    }
    acc
}

/// Per-symbol negative log-likelihood `-(1/l) log Pr{X_1^l = x}`.
///
/// Converges (in probability, and almost surely) to the entropy rate as
/// the path grows; `+inf` for zero-probability paths.
pub fn empirical_entropy_rate<F: Scalar>(model: &MarkovModel<F>, path: &SamplePath) -> Result<F> {
    let log_prob = model.log_path_probability(path)?;
    let l = F::from(path.len()).expect("path length fits in scalar");
    Ok(-log_prob / l)
}
