//! Channel sets traced through input pairs are contained in the sets read
//! off the output set.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use sortnet::oracle::trace_from_to_reach;
use sortnet::prune::from_to_reach;
use sortnet::{enumerate_levels, Network, OutputSet};

#[test]
fn traced_sets_are_contained() {
    let mut rng = StdRng::seed_from_u64(17);
    for n in 3..=10 {
        let levels = enumerate_levels(n);
        for _ in 0..200 {
            let mut net = Network::empty(n);
            for _ in 0..rng.gen_range(0..=n) {
                net.push(*levels.choose(&mut rng).unwrap());
            }
            let traced = trace_from_to_reach(&net).unwrap();
            let derived = from_to_reach(&OutputSet::of_network(&net));
            assert!(traced.is_subset_of(&derived), "{net}");
            for c in 1..=n {
                for q in 1..=n {
                    let to = traced.to(c) >> (q - 1) & 1;
                    let from = traced.from(q) >> (c - 1) & 1;
                    assert_eq!(to, from);
                }
            }
        }
    }
}

#[test]
fn empty_network_traces_everything() {
    for n in 2..=8 {
        let traced = trace_from_to_reach(&Network::empty(n)).unwrap();
        assert_eq!(traced, from_to_reach(&OutputSet::full(n)));
    }
}

#[test]
fn sorting_network_traces_identity() {
    let net = Network::parse("n=4\n1:2 3:4\n1:3 2:4\n2:3\n").unwrap();
    let traced = trace_from_to_reach(&net).unwrap();
    for c in 1..=4 {
        assert_eq!(traced.from(c), 1 << (c - 1));
        assert_eq!(traced.to(c), 1 << (c - 1));
    }
}
