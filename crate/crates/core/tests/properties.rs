use proptest::prelude::*;
use sortnet::prune::{sortable_in_three, sortable_in_two};
use sortnet::subsume::minimize;
use sortnet::{enumerate_levels, CandidatePool, Network, OutputSet, PoolEntry};

fn network(n: usize, max_depth: usize) -> impl Strategy<Value = Network> {
    let count = enumerate_levels(n).len();
    prop::collection::vec(0..count, 0..=max_depth).prop_map(move |picks| {
        let levels = enumerate_levels(n);
        Network::from_levels(n, picks.into_iter().map(|i| levels[i]).collect())
    })
}

fn any_network() -> impl Strategy<Value = Network> {
    (2usize..=9).prop_flat_map(|n| network(n, 5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn extension_matches_evaluation(net in any_network()) {
        let mut set = OutputSet::full(net.channels());
        for level in net.levels() {
            set = set.extend(level);
        }
        prop_assert_eq!(&set, &OutputSet::of_network(&net));
        prop_assert!(set.check_invariants());
        let n = net.channels();
        let expected = OutputSet::from_members(n, (0..1u32 << n).map(|x| net.evaluate(x))).unwrap();
        prop_assert_eq!(set, expected);
    }

    #[test]
    fn reflection_is_an_involution(net in any_network()) {
        let set = OutputSet::of_network(&net);
        prop_assert_eq!(set.reflect().reflect(), set.clone());
        prop_assert_eq!(set.reflect(), OutputSet::of_network(&net.reflect()));
        prop_assert_eq!(net.reflect().reflect(), net);
    }

    #[test]
    fn text_round_trips(net in any_network()) {
        prop_assert_eq!(Network::parse(&net.to_string()).unwrap(), net.clone());
        let set = OutputSet::of_network(&net);
        prop_assert_eq!(OutputSet::parse(&set.serialize()).unwrap(), set);
    }

    #[test]
    fn sortable_in_two_implies_three(net in any_network()) {
        let set = OutputSet::of_network(&net);
        if sortable_in_two(&set) {
            prop_assert!(sortable_in_three(&set));
        }
    }

    #[test]
    fn minimisation_is_idempotent(nets in prop::collection::vec(network(6, 3), 1..40)) {
        let pool = CandidatePool::new(nets.into_iter().map(PoolEntry::of_network).collect());
        let once = minimize(pool);
        let twice = minimize(once.clone());
        prop_assert_eq!(once, twice);
    }
}
