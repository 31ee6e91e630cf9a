use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use sortnet::network::sorted_word;
use sortnet::subsume::{minimize, naive_subsumes, permutation_subsumes, subsumes_perm_refl};
use sortnet::{enumerate_levels, CandidatePool, ChannelPermutation, Network, OutputSet, PoolEntry, Word};

fn random_network(rng: &mut StdRng, n: usize, depth: usize) -> Network {
    let levels = enumerate_levels(n);
    let mut net = Network::empty(n);
    for _ in 0..depth {
        net.push(*levels.choose(rng).unwrap());
    }
    net
}

/// `B = π(S_A)` plus the sorted words and a few random extras always admits
/// an embedding of `S_A`, also on widths the naive oracle cannot handle.
#[test]
fn finds_planted_permutations() {
    let mut rng = StdRng::seed_from_u64(5);
    for _ in 0..300 {
        let n = rng.gen_range(5..=11);
        let depth = rng.gen_range(1..=4);
        let a = OutputSet::of_network(&random_network(&mut rng, n, depth));
        let mut images: Vec<usize> = (1..=n).collect();
        images.shuffle(&mut rng);
        let pi = ChannelPermutation::from_images(&images).unwrap();
        let mut members: Vec<Word> = a.members().map(|x| pi.apply(x)).collect();
        members.extend((0..=n).map(|k| sorted_word(n, k)));
        for _ in 0..rng.gen_range(0..5) {
            members.push(rng.gen_range(0..1u32 << n));
        }
        let b = OutputSet::from_members(n, members).unwrap();
        let found = permutation_subsumes(&a, &b).expect("planted embedding missed");
        assert!(a.members().all(|x| b.contains(found.apply(x))));
    }
}

#[test]
fn reflected_prefix_is_detected() {
    let mut rng = StdRng::seed_from_u64(8);
    for _ in 0..200 {
        let n = rng.gen_range(4..=7);
        let depth = rng.gen_range(0..=3);
        let b = random_network(&mut rng, n, depth);
        let a = random_network(&mut rng, n, 1).concat(&b).reflect();
        let (sa, sb) = (OutputSet::of_network(&a), OutputSet::of_network(&b));
        assert!(subsumes_perm_refl(&sa, &sb));
        assert_eq!(naive_subsumes(&sa, &sb, true).unwrap(), true);
    }
}

#[test]
fn minimized_pool_has_no_internal_subsumption() {
    let mut rng = StdRng::seed_from_u64(9);
    let n = 7;
    let entries: Vec<PoolEntry> = (0..400)
        .map(|_| {
            let depth = rng.gen_range(1..=3);
            PoolEntry::of_network(random_network(&mut rng, n, depth))
        })
        .collect();
    let pool = minimize(CandidatePool::new(entries.clone()));
    for a in &pool.entries {
        for b in &pool.entries {
            if a != b {
                assert!(!naive_subsumes(&a.set, &b.set, true).unwrap());
            }
        }
    }
    // Every input is covered by some survivor.
    for e in &entries {
        assert!(pool.entries.iter().any(|k| subsumes_perm_refl(&k.set, &e.set)));
    }
}
