//! The symmetry-reduced, pruned search against exhaustive ground truth.

use sortnet::checkpoint;
use sortnet::oracle::brute_force_optimal_depth;
use sortnet::{exists_sorting_network, optimal_depth, SearchConfig};

#[test]
fn agrees_with_breadth_first_search() {
    for n in 2..=6 {
        let opt = brute_force_optimal_depth(n).unwrap();
        for d in 0..=opt + 1 {
            let outcome = exists_sorting_network(&SearchConfig::new(n, d)).unwrap();
            assert_eq!(outcome.exists, d >= opt, "n = {n}, d = {d}");
            if let Some(w) = outcome.witness {
                assert!(w.is_sorting_network());
                assert_eq!(w.depth(), d);
            }
        }
        let found = optimal_depth(n, opt + 2, &SearchConfig::new(n, 1)).unwrap();
        assert_eq!(found.map(|(d, _)| d), Some(opt));
    }
}

#[test]
fn witness_only_on_request() {
    let mut config = SearchConfig::new(4, 3);
    config.emit_witness = false;
    let outcome = exists_sorting_network(&config).unwrap();
    assert!(outcome.exists);
    assert!(outcome.witness.is_none());
}

#[test]
fn seven_and_eight_channels() {
    for (n, opt) in [(7, 6), (8, 6)] {
        assert!(!exists_sorting_network(&SearchConfig::new(n, opt - 1)).unwrap().exists);
        assert!(exists_sorting_network(&SearchConfig::new(n, opt)).unwrap().exists);
    }
}

#[test]
fn skipping_late_minimisation_keeps_the_answer() {
    for (n, d, expected) in [(6, 4, false), (6, 5, true), (8, 6, true)] {
        let mut config = SearchConfig::new(n, d);
        config.minimize_through = Some(d - 2);
        let outcome = exists_sorting_network(&config).unwrap();
        assert_eq!(outcome.exists, expected, "n = {n}, d = {d}");
    }
}

#[test]
fn resume_from_third_depth() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = SearchConfig::new(9, 6);
    config.checkpoint_dir = Some(tmp.path().to_path_buf());
    let full = exists_sorting_network(&config).unwrap();

    let r3 = checkpoint::load(tmp.path(), 9, 3, 6).unwrap();
    let again = tempfile::tempdir().unwrap();
    checkpoint::save(again.path(), &r3).unwrap();
    assert_eq!(checkpoint::load(again.path(), 9, 3, 6).unwrap(), r3);
    assert!(checkpoint::load(tmp.path(), 10, 3, 6).is_err());

    let mut resumed = config.clone();
    resumed.checkpoint_dir = Some(again.path().to_path_buf());
    resumed.resume = true;
    let out = exists_sorting_network(&resumed).unwrap();
    assert_eq!(out.exists, full.exists);
    assert_eq!(out.pool, full.pool);
    let strip = |o: &sortnet::SearchOutcome| {
        o.stats
            .per_depth
            .iter()
            .map(|s| (s.depth, s.generated, s.lookahead_survivors, s.sortable_survivors, s.unique_count, s.minimized_count))
            .collect::<Vec<_>>()
    };
    assert_eq!(strip(&out), strip(&full));
}

#[test]
fn worker_count_does_not_change_results() {
    let run = |workers| {
        let mut config = SearchConfig::new(8, 6);
        config.workers = workers;
        exists_sorting_network(&config).unwrap()
    };
    let (a, b) = (run(1), run(3));
    assert_eq!(a.pool, b.pool);
    assert_eq!(a.witness, b.witness);
    let counts = |o: &sortnet::SearchOutcome| o.stats.per_depth.iter().map(|s| (s.unique_count, s.minimized_count)).collect::<Vec<_>>();
    assert_eq!(counts(&a), counts(&b));
}
