//! Values from the analysis of the three built-in data sets.

use hwe_equiv::bootstrap::bootstrap_sigma;
use hwe_equiv::datasets::builtin_counts;
use hwe_equiv::stats::{observed_distance, t_c};
use hwe_equiv::{
    from_counts, l2_distance, project_to_hwe, run_asymptotic_test, run_bootstrap_test,
    BootstrapOptions, GenotypeCounts, GenotypeDistribution, ProjectionOptions, TestKind,
};

fn observed(id: u8) -> (GenotypeDistribution, u64) {
    let c = builtin_counts(id).unwrap();
    (from_counts(&c).unwrap(), c.n())
}

#[test]
fn distances() {
    let expected = [(0.102, 0.101), (0.126, 0.118), (0.013, 0.013)];
    for (id, (l2, d)) in (1..=3).zip(expected) {
        let (p, _) = observed(id);
        let got_l2 = l2_distance(&p, &p.hwe()).unwrap();
        let got_d = project_to_hwe(&p, &ProjectionOptions::default())
            .unwrap()
            .distance;
        assert!((got_l2 - l2).abs() <= 5e-4, "data set {id}: l2 {got_l2}");
        assert!((got_d - d).abs() <= 5e-4, "data set {id}: d {got_d}");
    }
}

#[test]
fn asymptotic_min_epsilon() {
    let expected = [(0.130, 0.130), (0.159, 0.149), (0.017, 0.018)];
    for (id, (tc, tm)) in (1..=3).zip(expected) {
        let (p, n) = observed(id);
        let c = run_asymptotic_test(&p, n, 0.1, 0.05, TestKind::Conditional).unwrap();
        let m = run_asymptotic_test(&p, n, 0.1, 0.05, TestKind::MinimumDistance).unwrap();
        assert!(
            (c.min_epsilon - tc).abs() <= 1.5e-3,
            "data set {id}: {}",
            c.min_epsilon
        );
        assert!(
            (m.min_epsilon - tm).abs() <= 1.5e-3,
            "data set {id}: {}",
            m.min_epsilon
        );
    }
}

#[test]
fn statistic_vanishes_at_observed_distance() {
    let (p, n) = observed(3);
    let d = observed_distance(&p, TestKind::Conditional, &ProjectionOptions::default())
        .unwrap()
        .distance;
    assert!(t_c(&p, n, d).unwrap().abs() < 1e-12);
    // 0.013 is the rounded distance
    let slack = (n as f64).sqrt() * ((0.0135f64).powi(2) - 0.013f64.powi(2));
    assert!(t_c(&p, n, 0.013).unwrap().abs() < slack);
}

#[test]
fn cli_examples_decisions() {
    let (p, n) = observed(3);
    assert!(
        run_asymptotic_test(&p, n, 0.02, 0.05, TestKind::Conditional)
            .unwrap()
            .reject
    );
    let (p, n) = observed(1);
    assert!(
        !run_asymptotic_test(&p, n, 0.05, 0.05, TestKind::MinimumDistance)
            .unwrap()
            .reject
    );
}

#[test]
fn bootstrap_is_deterministic_and_epsilon_free() {
    let (p, n) = observed(2);
    for kind in TestKind::ALL {
        let opts = BootstrapOptions::new(kind, 200, 77);
        let a = run_bootstrap_test(&p, n, 0.1, 0.05, &opts).unwrap();
        let b = run_bootstrap_test(&p, n, 0.1, 0.05, &opts).unwrap();
        assert_eq!(a, b);
        let c = run_bootstrap_test(&p, n, 0.3, 0.05, &opts).unwrap();
        assert_eq!(a.sigma, c.sigma);
    }
}

#[test]
fn bootstrap_sigma_is_stable_across_seeds() {
    let (p, n) = observed(1);
    let sigmas: Vec<f64> = (0..50)
        .map(|seed| {
            bootstrap_sigma(
                &p,
                n,
                &BootstrapOptions::new(TestKind::Conditional, 500, seed),
            )
            .unwrap()
        })
        .collect();
    let mean = sigmas.iter().sum::<f64>() / 50.0;
    let sd = (sigmas.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / 49.0).sqrt();
    assert!(sd / mean < 0.10, "coefficient of variation {}", sd / mean);
}

#[test]
fn bootstrap_is_slightly_more_conservative() {
    // B = 2000 keeps the Monte-Carlo error of the bootstrap min-eps near 5e-4
    for id in 1..=3 {
        let (p, n) = observed(id);
        for kind in TestKind::ALL {
            let a = run_asymptotic_test(&p, n, 0.1, 0.05, kind).unwrap();
            let b = run_bootstrap_test(&p, n, 0.1, 0.05, &BootstrapOptions::new(kind, 2000, 0))
                .unwrap();
            assert!(
                b.min_epsilon >= a.min_epsilon - 1e-3,
                "data set {id} {kind}: {} < {}",
                b.min_epsilon,
                a.min_epsilon
            );
        }
    }
}

#[test]
fn bootstrap_matches_delta_method_at_large_n() {
    // Data set 1 frequencies at 100x the sample size: the linear term of
    // the expansion dominates and the two σ estimates should agree.
    let (p, _) = observed(1);
    let scaled = GenotypeCounts::new(
        4,
        builtin_counts(1)
            .unwrap()
            .counts()
            .iter()
            .map(|c| c * 100)
            .collect(),
    )
    .unwrap();
    let n = scaled.n();
    for kind in TestKind::ALL {
        let a = run_asymptotic_test(&p, n, 0.1, 0.05, kind).unwrap().sigma;
        let b = bootstrap_sigma(&p, n, &BootstrapOptions::new(kind, 500, 1)).unwrap();
        assert!(
            (b / a - 1.0).abs() < 0.15,
            "{kind}: bootstrap {b} vs delta {a}"
        );
    }
}
