use std::time::Instant;

use infmax_core::oracle::{check_condition_11, verify_theorem2};

#[test]
fn complete_graph_at_p_08_meets_the_connectivity_bound() {
    assert!(check_condition_11(15, 0.8));
    let start = Instant::now();
    let report = verify_theorem2(15, 0.8, 5, 400, 2024).unwrap();
    assert!(start.elapsed().as_secs_f64() < 60.0);
    assert!(report.empirical_fraction >= report.lower_threshold, "{report:?}");
    assert_eq!(report.structure_failures, 0);
    assert!(report.connected_trials > 0);
}

#[test]
fn larger_complete_graph_meets_the_bound() {
    assert!(check_condition_11(40, 0.5));
    let report = verify_theorem2(40, 0.5, 3, 100, 7).unwrap();
    assert!(report.passed(), "{report:?}");
}
