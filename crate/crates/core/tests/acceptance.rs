//! Acceptance suite: one test per criterion, each printing a PASS line
//! (run with `--nocapture` to see them). Exhaustive checks run at desk
//! scale; every tolerance is pinned in the assertions.

use markov_ldp::contraction::{
    singleton_rate_constrained, singleton_rate_row_form, singleton_rate_variational,
};
use markov_ldp::dist::KTupleDistribution;
use markov_ldp::empirical::{cyclic_empirical, EmpiricalMeasure};
use markov_ldp::index::for_each_path;
use markov_ldp::index::tuple_count;
use markov_ldp::information::{
    conditional_relative_entropy, conditional_relative_entropy_rows, empirical_entropy_rate,
    entropy_rate, relative_entropy,
};
use markov_ldp::io;
use markov_ldp::ldp::{
    class_probabilities, class_probabilities_with, rate_convergence_row, raw_doublet_rate,
};
use markov_ldp::model::{MarkovModel, SamplePath};
use markov_ldp::type_classes::{
    check_census_bounds, enumerate_census, enumerate_census_with, is_achievable, nearest_empirical,
    permutation_bounds, ScanOptions, TypeCensus,
};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type D = KTupleDistribution<f64>;
type M = MarkovModel<f64>;

/// (n, s, l-range) regimes used by the exhaustive criteria.
const REGIMES: [(usize, usize, std::ops::RangeInclusive<usize>); 3] =
    [(2, 1, 2..=16), (3, 1, 3..=10), (2, 2, 4..=12)];

fn two_state() -> M {
    M::from_distribution(D::new(2, 2, vec![0.4, 0.2, 0.2, 0.2]).unwrap()).unwrap()
}

fn three_state() -> M {
    M::random_positive(3, 1, 424_242).unwrap()
}

fn two_state_two_step() -> M {
    M::random_positive(2, 2, 77_777).unwrap()
}

fn model_for(n: usize, s: usize) -> M {
    match (n, s) {
        (2, 1) => two_state(),
        (3, 1) => three_state(),
        (2, 2) => two_state_two_step(),
        _ => panic!("no fixed model for n={n}, s={s}"),
    }
}

fn random_simplex(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

#[test]
fn criterion_01_type_class_sandwich() {
    let started = std::time::Instant::now();
    let mut classes_checked = 0usize;
    for (n, s, ls) in REGIMES {
        for l in ls {
            let census = enumerate_census(n, l, s).unwrap();
            let report = check_census_bounds::<f64>(&census);
            assert!(report.hypothesis_met, "l >= n must hold in the regimes");
            for row in &report.rows {
                assert!(
                    row.entropy_pass,
                    "n={n} s={s} l={l}: class {:?} violates the entropy sandwich \
                     (log|T|={}, bounds [{}, {}])",
                    row.counts, row.log_cardinality, row.log_lower, row.log_upper
                );
            }
            classes_checked += report.rows.len();
        }
    }
    assert!(
        started.elapsed().as_secs() < 300,
        "runtime target is 5 minutes"
    );
    println!(
        "criterion 01 type-class sandwich: PASS ({classes_checked} classes, {:?})",
        started.elapsed()
    );
}

#[test]
fn criterion_02_permutation_bounds() {
    let mut classes_checked = 0usize;
    for (n, s, ls) in REGIMES {
        for l in ls {
            let census = enumerate_census(n, l, s).unwrap();
            let report = check_census_bounds::<f64>(&census);
            for row in &report.rows {
                assert!(
                    row.permutation_pass,
                    "n={n} s={s} l={l}: class {:?} violates the permutation bounds",
                    row.counts
                );
            }
            classes_checked += report.rows.len();
        }
    }
    println!("criterion 02 permutation bounds: PASS ({classes_checked} classes)");
}

/// All count vectors of length `cells` summing to `total`.
fn compositions(total: u64, cells: usize) -> Vec<Vec<u64>> {
    fn go(total: u64, cells: usize, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cells == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for value in 0..=total {
            prefix.push(value);
            go(total - value, cells - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(total, cells, &mut Vec::new(), &mut out);
    out
}

#[test]
fn criterion_03_achievability_matches_census() {
    let mut stationary_checked = 0usize;
    for (n, max_l) in [(2usize, 8u64), (3usize, 6u64)] {
        for l in 1..=max_l {
            let census = enumerate_census(n, l as usize, 1).unwrap();
            for counts in compositions(l, n * n) {
                let zeta = EmpiricalMeasure::new(n, 2, counts.clone()).unwrap();
                if !zeta.is_exactly_stationary() {
                    assert!(!is_achievable(&zeta));
                    assert!(!census.contains(&counts));
                    continue;
                }
                stationary_checked += 1;
                assert_eq!(
                    is_achievable(&zeta),
                    census.contains(&counts),
                    "n={n} l={l} counts={counts:?}"
                );
            }
        }
    }
    // the diagonal counterexample: stationary yet unachievable
    let diagonal = EmpiricalMeasure::new(2, 2, vec![1, 0, 0, 1]).unwrap();
    assert!(diagonal.is_exactly_stationary() && !is_achievable(&diagonal));
    println!(
        "criterion 03 achievability vs census: PASS ({stationary_checked} stationary vectors)"
    );
}

#[test]
fn criterion_04_mass_conservation() {
    for (n, s, ls) in REGIMES {
        let model = model_for(n, s);
        for l in ls {
            let census = enumerate_census(n, l, s).unwrap();
            assert_eq!(
                census.total_paths(),
                (n as u128).pow(l as u32),
                "n={n} s={s} l={l}: cardinalities must sum to n^l"
            );
            // polynomial cap on the number of achievable measures
            let cells = tuple_count(n, s + 1).unwrap() as f64;
            assert!(
                (census.class_count() as f64).ln() <= cells * ((l + 1) as f64).ln() + 1e-12,
                "n={n} s={s} l={l}: |E| = {} exceeds (l+1)^(n^(s+1))",
                census.class_count()
            );
            let probs = class_probabilities(&model, l).unwrap();
            let total = probs.total_probability();
            assert!(
                (total - 1.0).abs() <= 1e-9,
                "n={n} s={s} l={l}: total probability {total}"
            );
        }
    }
    println!("criterion 04 mass conservation: PASS");
}

#[test]
fn criterion_05_likelihood_sandwich() {
    let model = two_state();
    let mut paths_checked = 0usize;
    for l in 2..=10usize {
        for_each_path(2, l, |symbols| {
            let path = SamplePath::new(2, symbols.to_vec()).unwrap();
            let s = markov_ldp::ldp::likelihood_sandwich(&model, &path).unwrap();
            assert!(
                s.lower <= s.exact + 1e-9 && s.exact <= s.upper + 1e-9,
                "exhaustive n=2 l={l}: {symbols:?}"
            );
            paths_checked += 1;
        });
    }

    let model3 = three_state();
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    for _ in 0..10_000 {
        let symbols: Vec<usize> = (0..50).map(|_| rng.random_range(0..3usize)).collect();
        let path = SamplePath::new(3, symbols).unwrap();
        let s = markov_ldp::ldp::likelihood_sandwich(&model3, &path).unwrap();
        assert!(s.lower <= s.exact + 1e-9 && s.exact <= s.upper + 1e-9);
        paths_checked += 1;
    }
    println!("criterion 05 likelihood sandwich: PASS ({paths_checked} paths)");
}

#[test]
fn criterion_06_rate_convergence_envelope() {
    let mut rows_checked = 0usize;
    for (n, s, ls) in REGIMES {
        let model = model_for(n, s);
        for l in ls {
            let probs = class_probabilities(&model, l).unwrap();
            for (counts, _) in probs.iter() {
                let zeta = EmpiricalMeasure::new(n, s + 1, counts.to_vec()).unwrap();
                let row = rate_convergence_row(&model, &zeta, &probs).unwrap();
                assert!(
                    row.pass,
                    "n={n} s={s} l={l} counts={counts:?}: |delta + Dc| = {} > envelope {}",
                    (row.exact - row.rate).abs(),
                    row.envelope
                );
                rows_checked += 1;
            }
        }
    }
    println!("criterion 06 rate convergence envelope: PASS ({rows_checked} class rows)");
}

#[test]
fn criterion_07_rate_function_equivalences() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    for n in [2usize, 3] {
        for trial in 0..1000u64 {
            let nu = M::random_positive(n, 1, 2 * trial).unwrap();
            let mu = M::random_positive(n, 1, 2 * trial + 1).unwrap();
            let definition = conditional_relative_entropy(nu.mu(), mu.mu()).unwrap();
            let rows = conditional_relative_entropy_rows(nu.mu(), mu.mu()).unwrap();
            let raw = raw_doublet_rate(nu.mu(), mu.mu()).unwrap();
            let tolerance = 1e-12 * definition.abs().max(1.0) + 1e-14;
            assert!(
                (definition - rows).abs() <= tolerance,
                "n={n} trial={trial}: {definition} vs {rows}"
            );
            assert!((definition - raw).abs() <= tolerance);
        }
        // non-stationary estimates must map to +infinity exactly
        let mu = M::random_positive(n, 1, 999).unwrap();
        let mut rejected = 0usize;
        while rejected < 1000 {
            let theta = D::new(n, 2, random_simplex(n * n, &mut rng)).unwrap();
            if theta.check_stationary().is_stationary {
                continue;
            }
            assert_eq!(raw_doublet_rate(&theta, mu.mu()).unwrap(), f64::INFINITY);
            rejected += 1;
        }
    }
    println!(
        "criterion 07 rate-function equivalences: PASS (1000 pairs per n, 1000 rejections per n)"
    );
}

/// n = 2 oracle: stationary pair measures with marginal phi are the
/// one-parameter family [phi_a - t, t, t, phi_b - t]; minimize by dense
/// grid plus ternary refinement.
fn grid_oracle(phi: &D, model: &M) -> f64 {
    let (pa, pb) = (phi.prob(0), phi.prob(1));
    let hi = pa.min(pb);
    let a = [
        model.row(0).unwrap()[0],
        model.row(0).unwrap()[1],
        model.row(1).unwrap()[0],
        model.row(1).unwrap()[1],
    ];
    let dc = |t: f64| -> f64 {
        let nu = [pa - t, t, t, pb - t];
        let bar = [pa, pa, pb, pb];
        let mut acc = 0.0;
        for idx in 0..4 {
            if nu[idx] > 0.0 {
                acc += nu[idx] * (nu[idx] / (bar[idx] * a[idx])).ln();
            }
        }
        acc
    };
    let mut best = f64::INFINITY;
    let mut best_t = 0.0;
    for step in 0..=4000 {
        let t = hi * step as f64 / 4000.0;
        let value = dc(t);
        if value < best {
            best = value;
            best_t = t;
        }
    }
    let (mut lo, mut hi_t) = (
        (best_t - hi / 4000.0).max(0.0),
        (best_t + hi / 4000.0).min(hi),
    );
    for _ in 0..200 {
        let m1 = lo + (hi_t - lo) / 3.0;
        let m2 = hi_t - (hi_t - lo) / 3.0;
        if dc(m1) <= dc(m2) {
            hi_t = m2;
        } else {
            lo = m1;
        }
    }
    dc(0.5 * (lo + hi_t)).min(best)
}

#[test]
fn criterion_08_contraction_cross_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(1717);
    for trial in 0..100u64 {
        let n = if trial % 2 == 0 { 2 } else { 3 };
        let model = M::random_positive(n, 1, 3000 + trial).unwrap();
        let phi = D::new(n, 1, random_simplex(n, &mut rng)).unwrap();
        let variational = singleton_rate_variational(&phi, &model).unwrap();
        let constrained = singleton_rate_constrained(&phi, &model).unwrap();
        assert!(
            (variational.value - constrained.value).abs() <= 1e-8,
            "trial {trial}: {} vs {}",
            variational.value,
            constrained.value
        );
        let worst_entry = variational
            .nu_star
            .as_slice()
            .iter()
            .zip(constrained.nu.as_slice())
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(worst_entry <= 1e-8, "trial {trial}: nu gap {worst_entry}");
        if n == 2 {
            let oracle = grid_oracle(&phi, &model);
            assert!(
                (variational.value - oracle).abs() <= 1e-6,
                "trial {trial}: grid oracle {oracle} vs {}",
                variational.value
            );
        }
    }
    println!("criterion 08 contraction cross-check: PASS (100 models)");
}

#[test]
fn criterion_09_sanov_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(2323);
    let mut instances = 0usize;
    while instances < 100 {
        let n = 2 + instances % 3; // cycles over 2, 3, 4
        let q = D::new(n, 1, random_simplex(n, &mut rng)).unwrap();
        let model = M::iid_from_marginal(&q).unwrap();
        let phi = D::new(n, 1, random_simplex(n, &mut rng)).unwrap();
        let expected = relative_entropy(&phi, &q).unwrap();
        let variational = singleton_rate_variational(&phi, &model).unwrap();
        assert!(
            (variational.value - expected).abs() <= 1e-8,
            "n={n}: {} vs {expected}",
            variational.value
        );
        instances += 1;
    }
    println!("criterion 09 sanov reduction: PASS (100 i.i.d. instances)");
}

#[test]
fn criterion_10_row_and_column_suprema_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(2929);
    for trial in 0..100u64 {
        let n = if trial % 2 == 0 { 2 } else { 3 };
        let model = M::random_positive(n, 1, 5000 + trial).unwrap();
        let phi = D::new(n, 1, random_simplex(n, &mut rng)).unwrap();
        let column = singleton_rate_variational(&phi, &model).unwrap();
        let row = singleton_rate_row_form(&phi, &model).unwrap();
        assert!(
            (column.value - row.value).abs() <= 1e-6,
            "trial {trial}: column {} vs row {}",
            column.value,
            row.value
        );
    }
    println!("criterion 10 row/column supremum agreement: PASS (100 models)");
}

#[test]
fn criterion_11_smb_monte_carlo() {
    let started = std::time::Instant::now();
    let second_two_state =
        M::from_distribution(D::new(2, 2, vec![0.6, 1.0 / 15.0, 1.0 / 15.0, 0.8 / 3.0]).unwrap())
            .unwrap();
    for (tag, model) in [
        ("2-state", two_state()),
        ("2-state-skewed", second_two_state),
        ("3-state", three_state()),
    ] {
        let rate = entropy_rate(&model);
        let mut values = Vec::with_capacity(200);
        for seed in 0..200u64 {
            let path = model.sample_path(10_000, seed).unwrap();
            values.push(empirical_entropy_rate(&model, &path).unwrap());
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / values.len() as f64;
        let std = variance.sqrt();
        assert!(
            (mean - rate).abs() <= 0.02,
            "{tag}: mean {mean} vs entropy rate {rate}"
        );
        assert!(std < 0.05, "{tag}: std {std}");
    }
    assert!(
        started.elapsed().as_secs() < 60,
        "runtime target is 1 minute"
    );
    println!(
        "criterion 11 smb monte carlo: PASS (3 models x 200 seeds, {:?})",
        started.elapsed()
    );
}

#[test]
fn criterion_12_nearest_empirical_radius() {
    for l in [4usize, 6, 8, 10] {
        let bound = 2.0 * (1.0 + 3.0) * 4.0 / l as f64; // 2(s+3) n^(s+1) / l
        for seed in 0..100u64 {
            let psi = M::random_positive(2, 1, 10_000 + seed).unwrap();
            let (_, distance) = nearest_empirical(psi.mu(), l).unwrap();
            assert!(
                distance <= bound + 1e-12,
                "l={l} seed={seed}: distance {distance} > bound {bound}"
            );
        }
    }
    println!("criterion 12 nearest-empirical radius: PASS (100 measures x 4 lengths)");
}

#[test]
fn criterion_13_determinism_across_workers() {
    let reference_census = {
        let census = enumerate_census_with(
            3,
            8,
            1,
            &ScanOptions {
                workers: 1,
                ..ScanOptions::default()
            },
        )
        .unwrap();
        io::census_to_json(&census).unwrap()
    };
    let model = three_state();
    let reference_report = verify_report_bytes(&model, 1);
    for workers in [2usize, 4, 8] {
        let census = enumerate_census_with(
            3,
            8,
            1,
            &ScanOptions {
                workers,
                ..ScanOptions::default()
            },
        )
        .unwrap();
        assert_eq!(
            io::census_to_json(&census).unwrap(),
            reference_census,
            "census bytes changed at {workers} workers"
        );
        assert_eq!(
            verify_report_bytes(&model, workers),
            reference_report,
            "verification bytes changed at {workers} workers"
        );
    }
    println!("criterion 13 determinism across workers: PASS (1/2/4/8 workers)");
}

/// Deterministic verification artifact: per-class delta/rate rows rendered
/// with fixed-precision floats.
fn verify_report_bytes(model: &M, workers: usize) -> String {
    let options = ScanOptions {
        workers,
        ..ScanOptions::default()
    };
    let probs = class_probabilities_with(model, 7, &options).unwrap();
    let mut out = String::new();
    for (counts, stat) in probs.iter() {
        let zeta = EmpiricalMeasure::new(model.n(), model.s() + 1, counts.to_vec()).unwrap();
        let row = rate_convergence_row(model, &zeta, &probs).unwrap();
        out.push_str(&format!(
            "{counts:?},{},{},{},{}\n",
            stat.cardinality,
            io::format_float(row.exact),
            io::format_float(row.rate),
            io::format_float(row.envelope),
        ));
    }
    out
}

/// Census sanity used by several criteria: spot-check that the frozen
/// examples from the worked path stay reproducible.
#[test]
fn worked_example_census_values() {
    let census: TypeCensus = enumerate_census(3, 10, 1).unwrap();
    let path = SamplePath::new(3, vec![0, 1, 0, 2, 2, 1, 0, 2, 1, 2]).unwrap();
    let zeta = cyclic_empirical(&path, 1);
    let cardinality = census.cardinality(zeta.counts()).unwrap();
    let bounds = permutation_bounds::<f64>(&zeta).unwrap();
    assert!(bounds.sandwiches(cardinality, 1e-9));

    // under the uniform i.i.d. model every path has probability 3^-10, so
    // delta reduces to (ln |T| - 10 ln 3) / 10
    let uniform = M::iid_from_marginal(&D::uniform(3, 1)).unwrap();
    let probs = class_probabilities(&uniform, 10).unwrap();
    let delta = probs.delta(zeta.counts());
    let expected = ((cardinality as f64).ln() - 10.0 * 3.0f64.ln()) / 10.0;
    assert!((delta - expected).abs() <= 1e-10);
}
