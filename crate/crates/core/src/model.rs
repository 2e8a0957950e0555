//! Markov chain models reconstructed from stationary tuple frequencies.
//!
//! An s-step chain over an alphabet of size n is fully described by its
//! stationary (s+1)-tuple distribution: the state distribution is the
//! s-tuple marginal, and the conditional row for context `i` is
//! `mu[i, j] / mu_bar[i]`. Contexts with zero mass keep their index (so
//! serialized vectors stay aligned) but carry no transition row.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dist::KTupleDistribution;
use crate::error::{Error, Result};
use crate::index::tuple_count;
use crate::scalar::{real, Scalar};

/// Finite symbol sequence over `{0, .., n-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplePath {
    n: usize,
    symbols: Vec<usize>,
}

impl SamplePath {
    pub fn new(n: usize, symbols: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyAlphabet);
        }
        if symbols.is_empty() {
            return Err(Error::PathTooShort { l: 0, min: 1 });
        }
        if let Some(&symbol) = symbols.iter().find(|&&s| s >= n) {
            return Err(Error::SymbolOutOfRange { symbol, n });
        }
        Ok(Self { n, symbols })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    /// Symbol at cyclic position `t` (wraps past the end).
    pub(crate) fn cyclic(&self, t: usize) -> usize {
        self.symbols[t % self.symbols.len()]
    }
}

/// Validated stationary (s+1)-tuple distribution together with its s-tuple
/// marginal and the derived conditional transition rows.
#[derive(Debug, Clone)]
pub struct MarkovModel<F> {
    n: usize,
    s: usize,
    mu: KTupleDistribution<F>,
    mu_bar: KTupleDistribution<F>,
    rows: Vec<Option<Vec<F>>>,
}

impl<F: Scalar> MarkovModel<F> {
    /// Builds the model from a stationary tuple distribution with k >= 2.
    pub fn from_distribution(mu: KTupleDistribution<F>) -> Result<Self> {
        Self::from_distribution_with_tolerance(mu, crate::scalar::stationarity_tolerance::<F>())
    }

    /// Same with an explicit stationarity tolerance.
    pub fn from_distribution_with_tolerance(
        mu: KTupleDistribution<F>,
        tolerance: F,
    ) -> Result<Self> {
        if mu.k() < 2 {
            return Err(Error::TupleTooShort {
                min: 2,
                got: mu.k(),
            });
        }
        mu.require_stationary_with(tolerance)?;
        let n = mu.n();
        let s = mu.k() - 1;
        let mu_bar = mu.marginalize()?;
        let mut rows = Vec::with_capacity(mu_bar.len());
        for context in 0..mu_bar.len() {
            let mass = mu_bar.prob(context);
            if mass > F::zero() {
                let mut row = Vec::with_capacity(n);
                for j in 0..n {
                    row.push(mu.prob(context * n + j) / mass);
                }
                rows.push(Some(row));
            } else {
                rows.push(None);
            }
        }
        Ok(Self {
            n,
            s,
            mu,
            mu_bar,
            rows,
        })
    }

    /// i.i.d. model with one-step memory: `mu[i, j] = q_i * q_j`.
    pub fn iid_from_marginal(q: &KTupleDistribution<F>) -> Result<Self> {
        if q.k() != 1 {
            return Err(Error::TupleTooShort { min: 1, got: q.k() });
        }
        let n = q.n();
        let mut p = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                p.push(q.prob(i) * q.prob(j));
            }
        }
        Self::from_distribution(KTupleDistribution::from_parts(n, 2, p))
    }

    /// Strictly positive random model: conditional rows drawn from
    /// normalized exponentials, state distribution from power iteration on
    /// the induced one-step lift, then `mu[i, j] = pi_i * row_i[j]`.
    /// Deterministic in the seed (ChaCha8 stream).
    pub fn random_positive(n: usize, s: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyAlphabet);
        }
        if s == 0 {
            return Err(Error::TupleTooShort { min: 2, got: 1 });
        }
        let contexts = tuple_count(n, s).ok_or(Error::EmptyAlphabet)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::with_capacity(contexts);
        for _ in 0..contexts {
            let mut row = vec![0.0f64; n];
            let mut total = 0.0;
            for slot in row.iter_mut() {
                let u: f64 = rng.random();
                // exponential draw keeps every entry strictly positive
                *slot = -(1.0 - u).ln() + 1e-3;
                total += *slot;
            }
            for slot in row.iter_mut() {
                *slot /= total;
            }
            rows.push(row);
        }
        // stationary distribution of the lift over A^s
        let suffix = contexts / n;
        let mut pi = vec![1.0 / contexts as f64; contexts];
        let mut next = vec![0.0f64; contexts];
        for _ in 0..100_000 {
            for slot in next.iter_mut() {
                *slot = 0.0;
            }
            for (context, row) in rows.iter().enumerate() {
                let tail = (context % suffix) * n;
                for (j, &a) in row.iter().enumerate() {
                    next[tail + j] += pi[context] * a;
                }
            }
            let drift: f64 = pi.iter().zip(&next).map(|(&a, &b)| (a - b).abs()).sum();
            std::mem::swap(&mut pi, &mut next);
            if drift < 1e-15 {
                break;
            }
        }
        let mut p = Vec::with_capacity(contexts * n);
        for (context, row) in rows.iter().enumerate() {
            for &a in row {
                p.push(real::<F>(pi[context] * a));
            }
        }
        Self::from_distribution(KTupleDistribution::new(n, s + 1, p)?)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Memory length s (the tuple distribution has k = s + 1).
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn mu(&self) -> &KTupleDistribution<F> {
        &self.mu
    }

    pub fn mu_bar(&self) -> &KTupleDistribution<F> {
        &self.mu_bar
    }

    /// Conditional row for a context (flat index over A^s), when the
    /// context has positive mass.
    pub fn row(&self, context: usize) -> Option<&[F]> {
        self.rows[context].as_deref()
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.mu.is_strictly_positive()
    }

    pub(crate) fn require_strictly_positive(&self) -> Result<()> {
        match self.mu.first_zero() {
            None => Ok(()),
            Some(index) => Err(Error::PositivityRequired { index }),
        }
    }

    /// log Pr{X_1^l = x} for l >= s: the initial block log-mass plus the
    /// conditional log-factors. Returns -inf as soon as any factor is zero.
    pub fn log_path_probability(&self, path: &SamplePath) -> Result<F> {
        self.check_alphabet(path)?;
        let l = path.len();
        if l < self.s {
            return Err(Error::PathTooShort { l, min: self.s });
        }
        Ok(self.log_prob_symbols(path.symbols()))
    }

    /// Same as [`log_path_probability`](Self::log_path_probability) for a
    /// pre-validated symbol slice (enumeration hot path).
    pub(crate) fn log_prob_symbols(&self, symbols: &[usize]) -> F {
        let mut context = 0usize;
        for &x in &symbols[..self.s] {
            context = context * self.n + x;
        }
        let initial = self.mu_bar.prob(context);
        if initial <= F::zero() {
            return F::neg_infinity();
        }
        let mut log_prob = initial.ln();
        let suffix = self.mu_bar.len() / self.n;
        for &x in &symbols[self.s..] {
            let tuple = context * self.n + x;
            let joint = self.mu.prob(tuple);
            if joint <= F::zero() {
                return F::neg_infinity();
            }
            log_prob = log_prob + (joint / self.mu_bar.prob(context)).ln();
            context = (context % suffix) * self.n + x;
        }
        log_prob
    }

    /// Draws a length-l path: the initial s-block from the state
    /// distribution, each further symbol from its context row. The ChaCha8
    /// stream makes the result a pure function of (model, l, seed), and the
    /// uniforms are drawn at f64 regardless of the scalar type.
    pub fn sample_path(&self, l: usize, seed: u64) -> Result<SamplePath> {
        if l < self.s {
            return Err(Error::PathTooShort { l, min: self.s });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights: Vec<f64> = self
            .mu_bar
            .as_slice()
            .iter()
            .map(|&w| w.to_f64().unwrap_or(0.0))
            .collect();
        let mut context = draw_index(&mut rng, &weights);
        let mut symbols = crate::index::unflatten(context, self.n, self.s);
        symbols.reserve(l - self.s);
        let suffix = self.mu_bar.len() / self.n;
        let mut row_weights = vec![0.0f64; self.n];
        while symbols.len() < l {
            let row = self.rows[context]
                .as_ref()
                .expect("sampled context always has positive mass");
            for (slot, &w) in row_weights.iter_mut().zip(row) {
                *slot = w.to_f64().unwrap_or(0.0);
            }
            let next = draw_index(&mut rng, &row_weights);
            symbols.push(next);
            context = (context % suffix) * self.n + next;
        }
        SamplePath::new(self.n, symbols)
    }

    /// Smallest and largest entries of (mu_bar, mu); the sandwich constants
    /// are built from these.
    pub(crate) fn entry_ranges(&self) -> ((F, F), (F, F)) {
        let fold = |slice: &[F]| {
            let mut lo = F::infinity();
            let mut hi = F::neg_infinity();
            for &v in slice {
                lo = lo.min(v);
                hi = hi.max(v);
            }
            (lo, hi)
        };
        (fold(self.mu_bar.as_slice()), fold(self.mu.as_slice()))
    }

    fn check_alphabet(&self, path: &SamplePath) -> Result<()> {
        if path.n() != self.n {
            return Err(Error::ShapeMismatch {
                n_left: self.n,
                k_left: self.s + 1,
                n_right: path.n(),
                k_right: 1,
            });
        }
        Ok(())
    }
}

fn draw_index(rng: &mut ChaCha8Rng, weights: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
            acc += w;
            if u < acc {
                return i;
            }
        }
    }
    // rounding pushed the cumulative sum just below 1
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::for_each_path;

    fn two_state() -> MarkovModel<f64> {
        let mu = KTupleDistribution::new(2, 2, vec![0.4, 0.2, 0.2, 0.2]).unwrap();
        MarkovModel::from_distribution(mu).unwrap()
    }

    #[test]
    fn uniform_pair_gives_uniform_rows() {
        let model =
            MarkovModel::from_distribution(KTupleDistribution::<f64>::uniform(2, 2)).unwrap();
        assert_eq!(model.s(), 1);
        for context in 0..2 {
            assert!((model.mu_bar().prob(context) - 0.5).abs() < 1e-15);
            let row = model.row(context).unwrap();
            assert!((row[0] - 0.5).abs() < 1e-15);
            assert!((row[1] - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn two_state_rows_match_hand_arithmetic() {
        let model = two_state();
        assert!((model.mu_bar().prob(0) - 0.6).abs() < 1e-15);
        assert!((model.mu_bar().prob(1) - 0.4).abs() < 1e-15);
        let row_a = model.row(0).unwrap();
        assert!((row_a[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((row_a[1] - 1.0 / 3.0).abs() < 1e-15);
        let row_b = model.row(1).unwrap();
        assert!((row_b[0] - 0.5).abs() < 1e-15);
        assert!((row_b[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_mass_state_is_dropped_from_rows() {
        let mu = KTupleDistribution::new(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let model = MarkovModel::from_distribution(mu).unwrap();
        assert_eq!(model.mu_bar().prob(0), 1.0);
        assert_eq!(model.mu_bar().prob(1), 0.0);
        assert_eq!(model.row(0).unwrap(), &[1.0, 0.0]);
        assert!(model.row(1).is_none());
    }

    #[test]
    fn non_stationary_input_rejected_with_violation() {
        let mu = KTupleDistribution::new(2, 2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        match MarkovModel::from_distribution(mu) {
            Err(Error::NotStationary { max_violation }) => {
                assert!((max_violation - 1.0).abs() < 1e-12)
            }
            other => panic!("expected NotStationary, got {other:?}"),
        }
    }

    #[test]
    fn reassembling_mu_from_rows_is_exact() {
        let model = MarkovModel::<f64>::random_positive(3, 1, 7).unwrap();
        for context in 0..3 {
            let mass = model.mu_bar().prob(context);
            let row = model.row(context).unwrap();
            for (j, &conditional) in row.iter().enumerate() {
                let rebuilt = mass * conditional;
                assert!((rebuilt - model.mu().prob(context * 3 + j)).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn mu_bar_is_a_row_eigenvector_and_rows_are_stochastic() {
        for seed in 0..5 {
            let model = MarkovModel::<f64>::random_positive(3, 1, seed).unwrap();
            for i in 0..3 {
                let row_sum: f64 = model.row(i).unwrap().iter().sum();
                assert!((row_sum - 1.0).abs() <= 1e-12);
            }
            for j in 0..3 {
                let mut image = 0.0;
                for i in 0..3 {
                    image += model.mu_bar().prob(i) * model.row(i).unwrap()[j];
                }
                assert!((image - model.mu_bar().prob(j)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn iid_uniform_path_probability() {
        let model =
            MarkovModel::iid_from_marginal(&KTupleDistribution::<f64>::uniform(2, 1)).unwrap();
        let path = SamplePath::new(2, vec![0, 1, 1, 0, 1]).unwrap();
        let lp = model.log_path_probability(&path).unwrap();
        assert!((lp + 5.0 * 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn length_s_path_returns_initial_block_mass() {
        let model = two_state();
        let path = SamplePath::new(2, vec![1]).unwrap();
        let lp = model.log_path_probability(&path).unwrap();
        assert!((lp - 0.4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn hand_product_for_aab() {
        let model = two_state();
        let path = SamplePath::new(2, vec![0, 0, 1]).unwrap();
        let lp = model.log_path_probability(&path).unwrap();
        let expected = (0.6f64 * (2.0 / 3.0) * (1.0 / 3.0)).ln();
        assert!((lp - expected).abs() < 1e-12);
    }

    #[test]
    fn too_short_path_rejected() {
        let mu = KTupleDistribution::<f64>::uniform(2, 3);
        let model = MarkovModel::from_distribution(mu).unwrap();
        let path = SamplePath::new(2, vec![0]).unwrap();
        assert!(matches!(
            model.log_path_probability(&path),
            Err(Error::PathTooShort { l: 1, min: 2 })
        ));
    }

    #[test]
    fn total_probability_over_all_paths_is_one() {
        for (n, l, seed) in [(2, 10, 1u64), (3, 10, 2u64)] {
            let model = MarkovModel::<f64>::random_positive(n, 1, seed).unwrap();
            let mut total = 0.0;
            for_each_path(n, l, |symbols| {
                let path = SamplePath::new(n, symbols.to_vec()).unwrap();
                total += model.log_path_probability(&path).unwrap().exp();
            });
            assert!((total - 1.0).abs() <= 1e-9, "n = {n}, total = {total}");
        }
    }

    #[test]
    fn point_mass_chain_samples_constant_path() {
        let mu = KTupleDistribution::new(2, 2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let model = MarkovModel::from_distribution(mu).unwrap();
        let path = model.sample_path(20, 99).unwrap();
        assert!(path.symbols().iter().all(|&x| x == 0));
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let model = two_state();
        let a = model.sample_path(500, 42).unwrap();
        let b = model.sample_path(500, 42).unwrap();
        let c = model.sample_path(500, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn long_sample_matches_mu_in_total_variation() {
        let model = two_state();
        let path = model.sample_path(100_000, 7).unwrap();
        let nu = crate::empirical::cyclic_empirical(&path, 1);
        let dist = nu.as_distribution::<f64>().unwrap();
        let tv = 0.5 * dist.l1_distance(model.mu()).unwrap();
        assert!(tv <= 0.02, "tv = {tv}");
    }

    #[test]
    fn two_step_sampling_matches_mu_in_total_variation() {
        let model = MarkovModel::<f64>::random_positive(2, 2, 12).unwrap();
        let path = model.sample_path(100_000, 3).unwrap();
        let nu = crate::empirical::cyclic_empirical(&path, 2);
        let dist = nu.as_distribution::<f64>().unwrap();
        let tv = 0.5 * dist.l1_distance(model.mu()).unwrap();
        assert!(tv <= 0.02, "tv = {tv}");
    }
}
