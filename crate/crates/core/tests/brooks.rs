use proptest::prelude::*;

use pcheeger::brooks::{brooks_verify, exponential_sum_check, volume_growth, BrooksFamily, BrooksOptions, CenterSampling};
use pcheeger::generators::{cycle, tree_ball};
use pcheeger::metrics::PseudoMetric;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20_000))]

    #[test]
    fn exponential_sum_inequality(s in 0.0f64..10.0, t in 0.0f64..10.0, p in 1.0f64..=10.0) {
        let (lhs, rhs) = exponential_sum_check(s, t, p);
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-300);
    }
}

#[test]
fn tree_test_functions() {
    // alpha = 3 mu/p sits well above the threshold mu/p; closer to it the
    // norm ratio converges too slowly for radii this small
    let opts = BrooksOptions {
        alpha_grid: vec![1.05, 1.25, 1.5, 3.0],
        ..BrooksOptions::default()
    };
    let v = brooks_verify(&BrooksFamily::Tree { k: 3 }, 2.0, &[8, 10, 12, 14], &opts).unwrap();
    assert!(v.quotient_route_holds);
    for row in &v.rows {
        for t in &row.test_functions {
            assert!(t.pairwise.holds, "R={} alpha={}", row.radius, t.alpha);
            assert!(t.quotient <= t.bound * (1.0 + 1e-12));
        }
    }
    let ratios: Vec<f64> = v.rows.iter().map(|r| r.test_functions.last().unwrap().norm_ratio).collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    for (row, r) in v.rows.iter().zip(&ratios).skip(2) {
        assert!((r - 1.0).abs() <= 0.05, "R={} ratio={r}", row.radius);
    }
}

#[test]
fn nonlinear_truncations_decrease() {
    let v = brooks_verify(&BrooksFamily::Tree { k: 3 }, 1.5, &[3, 4, 5], &BrooksOptions::default()).unwrap();
    assert!(v.decreasing);
    assert!(v.rows.iter().all(|r| r.metric_ok));
}

#[test]
fn growth_rate_of_regular_trees() {
    for k in [3usize, 4] {
        let g = tree_ball(k, 9).unwrap().graph.normalizing_measure().unwrap();
        let pm = PseudoMetric::combinatorial(&g);
        let radii: Vec<f64> = (1..=8).map(f64::from).collect();
        let est = volume_growth(&g, &pm, &radii, &CenterSampling::Given(vec![0])).unwrap();
        // (1/r) log m(B_r) approaches log(k-1) from below at rate O(1/r)
        let want = ((k - 1) as f64).ln();
        assert!(est.mu_estimate < want, "k={k}: {}", est.mu_estimate);
        assert!(want - est.mu_estimate < 1.6 / 8.0, "k={k}: {}", est.mu_estimate);
    }
}

#[test]
fn custom_family_uses_balls_of_the_given_graph() {
    // unit measure would break sum b d^p <= m for the hop metric
    let g = cycle(40).unwrap().normalizing_measure().unwrap();
    let v = brooks_verify(
        &BrooksFamily::Custom { graph: g, root: 0 },
        2.0,
        &[4, 6, 8],
        &BrooksOptions::default(),
    )
    .unwrap();
    assert_eq!(v.rows.iter().map(|r| r.interior_size).collect::<Vec<_>>(), vec![7, 11, 15]);
    assert!(v.decreasing);
    // a cycle has no exponential growth
    assert!(v.mu_estimate < 0.3);
}
