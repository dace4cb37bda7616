use rand::Rng as _;
use spectral_ensemble::covariance::sample_covariance;
use spectral_ensemble::meta::{exact_mle_enumeration, imle, majority_vote, mle_predict, mle_weights, EmOptions};
use spectral_ensemble::rng::{child_rng, rng_from_seed};
use spectral_ensemble::synthetic::{
    generate_truth, independent_columns, population_covariance, sample_population, Targeting,
};
use spectral_ensemble::{ClassifierPerformance, EnsembleSpec, PredictionMatrix};

fn spec(b: f64, perfs: &[(f64, f64)]) -> EnsembleSpec {
    let honest = perfs
        .iter()
        .map(|&(psi, eta)| ClassifierPerformance::population(psi, eta).unwrap())
        .collect();
    EnsembleSpec::new(b, honest, None).unwrap()
}

/// Finite-sample variance of an unbiased covariance entry between two
/// +/-1 variables with means `mi`, `mj` and covariance `q`.
fn entry_var(mi: f64, mj: f64, q: f64, s: f64) -> f64 {
    (1.0 - mi * mi) * (1.0 - mj * mj) / (s - 1.0) + q / s * (4.0 * mi * mj - (s - 2.0) / (s - 1.0) * q)
}

#[test]
fn sample_covariance_is_unbiased() {
    let s = spec(0.3, &[(0.9, 0.7), (0.6, 0.8), (0.75, 0.75), (0.4, 0.5)]);
    let q = population_covariance(&s);
    let mu = s.means();
    let (reps, instances) = (4000, 40);
    let mut rng = rng_from_seed(11);
    let mut sum = nalgebra::DMatrix::<f64>::zeros(4, 4);
    for _ in 0..reps {
        let (pred, _) = sample_population(&s, instances, &mut rng).unwrap();
        sum += sample_covariance(&pred).unwrap().q_hat;
    }
    let mean = sum / reps as f64;
    for i in 0..4 {
        for j in 0..4 {
            let se = (entry_var(mu[i], mu[j], q[(i, j)], instances as f64) / reps as f64).sqrt();
            assert!((mean[(i, j)] - q[(i, j)]).abs() <= 4.0 * se, "({i},{j}) {} vs {}", mean[(i, j)], q[(i, j)]);
        }
    }
}

#[test]
fn sample_covariance_converges() {
    let s = spec(-0.2, &[(0.8, 0.9), (0.7, 0.6), (0.55, 0.65), (0.3, 0.35), (0.95, 0.8)]);
    let q = population_covariance(&s);
    for (k, instances) in [1_000usize, 10_000, 100_000].into_iter().enumerate() {
        let (pred, _) = sample_population(&s, instances, &mut child_rng(3, k as u64)).unwrap();
        let q_hat = sample_covariance(&pred).unwrap().q_hat;
        let err = (q_hat - &q).abs().max();
        assert!(err <= 5.0 / (instances as f64).sqrt(), "S={instances}: {err}");
    }
}

#[test]
fn rdfba_columns_are_conditionally_independent() {
    let mut rng = rng_from_seed(5);
    let truth = generate_truth(20_000, 0.1, &mut rng).unwrap();
    let cols = independent_columns(&truth, &[0.7, 0.6, 0.85, 0.55], Targeting::Nearest, &mut rng).unwrap();
    for class in [1i8, -1] {
        let rows: Vec<usize> = (0..truth.len()).filter(|&k| truth.as_slice()[k] == class).collect();
        let n = rows.len() as f64;
        for a in 0..4 {
            for b in a + 1..4 {
                let mean = |c: usize| rows.iter().map(|&k| f64::from(cols.columns[c][k])).sum::<f64>() / n;
                let (ma, mb) = (mean(a), mean(b));
                let cov = rows
                    .iter()
                    .map(|&k| (f64::from(cols.columns[a][k]) - ma) * (f64::from(cols.columns[b][k]) - mb))
                    .sum::<f64>()
                    / (n - 1.0);
                assert!(cov.abs() <= 4.0 / n.sqrt(), "class {class} pair ({a},{b}): {cov}");
            }
        }
    }
}

fn random_problem(seed: u64, m: usize, s: usize) -> (PredictionMatrix, Vec<ClassifierPerformance>) {
    let mut rng = rng_from_seed(seed);
    let perfs: Vec<ClassifierPerformance> = (0..m)
        .map(|_| ClassifierPerformance::population(rng.gen_range(0.05..0.95), rng.gen_range(0.05..0.95)).unwrap())
        .collect();
    let entries: Vec<i8> = (0..m * s).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    (PredictionMatrix::from_row_major(entries, s, m).unwrap(), perfs)
}

#[test]
fn mle_matches_enumeration() {
    let mut checked = 0;
    for seed in 0..500u64 {
        let m = 2 + (seed % 4) as usize;
        let s = 2 + (seed % 7) as usize;
        let (pred, perfs) = random_problem(seed, m, s);
        let weights = mle_weights(&perfs, 1e-3);
        let fast = mle_predict(&pred, &weights, seed);
        let exact = exact_mle_enumeration(&pred, &perfs).unwrap();
        for (k, row) in pred.rows().enumerate() {
            let score: f64 = row.iter().zip(&weights.log_alpha).map(|(&f, w)| f64::from(f) * w).sum::<f64>() + weights.offset();
            if score.abs() > 1e-9 {
                assert_eq!(fast.labels.as_slice()[k], exact.as_slice()[k], "seed {seed} row {k}");
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn em_likelihood_never_decreases() {
    for seed in 0..40u64 {
        let (pred, _) = random_problem(seed, 3 + (seed % 6) as usize, 30 + (seed % 50) as usize);
        let init = majority_vote(&pred, seed).labels;
        let state = imle(&pred, &init, &EmOptions::default()).unwrap();
        for w in state.trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "seed {seed}: {} -> {}", w[0], w[1]);
        }
    }
}
