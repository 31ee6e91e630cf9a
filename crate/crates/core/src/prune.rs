//! Pruning of the last four levels.
//!
//! Let `x, y` be outputs of a prefix `A` that differ only on channel `i`, with
//! `x_i = 1` and `|x| = k`. Any suffix that sorts must turn them into the sorted
//! words of weight `k` and `k - 1`, which differ only on channel
//! `dest(x) = n - k + 1`. The single differing position travels from `i` to
//! `dest(x)` along comparators of the suffix, so `dest(x)` is forward-reachable
//! from `i` and `i` is backward-reachable from `dest(x)`:
//!
//! * `to[i]` collects every such `dest(x)` (where channel `i` must send values);
//! * `from[c]` collects every `i` whose difference lands on `c`;
//! * `reach[c] = from[c] ∪ to[c] ∪ {c}`.
//!
//! With `r` levels left a channel reaches at most `2^r` channels in either
//! direction, and with two left `|reach| ≤ 5`.
//!
//! The look-ahead tests each comparator `<p, q>` of the next level on its
//! own. Pairs of `S ⊕ <p,q>` differing on `p` keep differing only on `p` after
//! the rest of the level (it does not touch `p`), so `to[p]` computed for the
//! single comparator is contained in `to[p]` for any full level holding it.
//! The bound therefore applies to `to[p]` and `to[q]`; `from[p]` can pick up
//! channels moved by the other comparators and has no such guarantee.

use crate::network::{all_comparators, Comparator, Level, Word};
use crate::outset::{apply_comparator_bits, tables, OutputSet, LOW_CHANNEL, LOW_WEIGHT};

/// A set of channels; bit `c - 1` stands for channel `c`.
pub type ChannelMask = Word;

/// The output channel where the distinguishing one of a weight-`k` word ends
/// up after sorting, 1-based. Defined for `1 ≤ k ≤ n`.
#[inline]
pub fn dest(n: usize, k: usize) -> usize {
    debug_assert!(k >= 1 && k <= n);
    n - k + 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ChannelSets {
    n: usize,
    from: [ChannelMask; 16],
    to: [ChannelMask; 16],
}

impl ChannelSets {
    pub fn empty(n: usize) -> Self {
        ChannelSets {
            n,
            from: [0; 16],
            to: [0; 16],
        }
    }

    /// Records that a difference on channel `source` must reach channel `target`.
    pub fn add(&mut self, source: usize, target: usize) {
        self.to[source - 1] |= 1 << (target - 1);
        self.from[target - 1] |= 1 << (source - 1);
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn from(&self, c: usize) -> ChannelMask {
        self.from[c - 1]
    }

    #[inline]
    pub fn to(&self, c: usize) -> ChannelMask {
        self.to[c - 1]
    }

    #[inline]
    pub fn reach(&self, c: usize) -> ChannelMask {
        self.from[c - 1] | self.to[c - 1] | 1 << (c - 1)
    }

    /// Channel-wise containment of all three families.
    pub fn is_subset_of(&self, other: &ChannelSets) -> bool {
        self.n == other.n
            && (1..=self.n).all(|c| {
                self.from(c) & !other.from(c) == 0
                    && self.to(c) & !other.to(c) == 0
                    && self.reach(c) & !other.reach(c) == 0
            })
    }

    /// No channel sends to or receives from more than `bound` channels.
    fn within(&self, bound: u32) -> bool {
        (0..self.n).all(|c| self.from[c].count_ones() <= bound && self.to[c].count_ones() <= bound)
    }
}

/// Weights `k` (as a bitmask) for which the set holds a pair differing only on
/// bit `i`, the member with the bit set having weight `k`.
#[inline]
fn pair_weights(bits: &[u64], i: usize) -> u32 {
    let mut weights = 0u32;
    if i < 6 {
        let shift = 1 << i;
        for (w, &word) in bits.iter().enumerate() {
            let pairs = word & (word << shift) & LOW_CHANNEL[i];
            if pairs != 0 {
                weights |= split_weights(pairs, w);
            }
        }
    } else {
        let offset = 1 << (i - 6);
        for w in (0..bits.len()).filter(|w| w & offset != 0) {
            let pairs = bits[w] & bits[w - offset];
            if pairs != 0 {
                weights |= split_weights(pairs, w);
            }
        }
    }
    weights
}

#[inline]
fn split_weights(word: u64, index: usize) -> u32 {
    let base = index.count_ones();
    let mut weights = 0;
    for (j, mask) in LOW_WEIGHT.iter().enumerate() {
        if word & mask != 0 {
            weights |= 1 << (base + j as u32);
        }
    }
    weights
}

/// Maps a weight mask (bit `k`) to the destination channels (bit `n - k`).
#[inline]
fn destinations(n: usize, weights: u32) -> ChannelMask {
    weights.reverse_bits() >> (31 - n)
}

fn sets_of_bits(n: usize, bits: &[u64]) -> ChannelSets {
    let mut sets = ChannelSets::empty(n);
    for i in 0..n {
        let to = destinations(n, pair_weights(bits, i));
        sets.to[i] = to;
        let mut rest = to;
        while rest != 0 {
            let d = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            sets.from[d] |= 1 << i;
        }
    }
    sets
}

/// From/to/reach sets of every channel, read off the single-coordinate
/// neighbours inside the output set. Runs in `O(n · 2^n / 64)` word operations.
pub fn from_to_reach(s: &OutputSet) -> ChannelSets {
    sets_of_bits(s.channels(), s.bits())
}

pub(crate) fn sortable_in_two_bits(n: usize, bits: &[u64]) -> bool {
    let sets = sets_of_bits(n, bits);
    sets.within(4) && (1..=n).all(|c| sets.reach(c).count_ones() <= 5)
}

pub(crate) fn sortable_in_three_bits(n: usize, bits: &[u64]) -> bool {
    sets_of_bits(n, bits).within(8)
}

/// Necessary condition for two more levels to finish sorting.
pub fn sortable_in_two(s: &OutputSet) -> bool {
    sortable_in_two_bits(s.channels(), s.bits())
}

/// Necessary condition for three more levels to finish sorting.
pub fn sortable_in_three(s: &OutputSet) -> bool {
    sortable_in_three_bits(s.channels(), s.bits())
}

/// Bitmask over [`all_comparators`] indices of comparators that cannot belong
/// to the next level when `log2(bound)` levels follow it.
///
/// For each comparator `<p, q>`, the set extended by that comparator alone
/// must have `|to[p]|, |to[q]| ≤ bound`. The remaining comparators of the
/// level cannot shrink these sets, so the test is safe for whole levels.
pub fn lookahead_rejections(s: &OutputSet, bound: u32) -> u128 {
    let n = s.channels();
    let t = tables(n);
    let mut scratch = s.bits().to_vec();
    let mut rejected = 0u128;
    for (idx, c) in all_comparators(n).into_iter().enumerate() {
        scratch.copy_from_slice(s.bits());
        apply_comparator_bits(&mut scratch, n, t, c);
        let to_lo = pair_weights(&scratch, c.lo() - 1).count_ones();
        let to_hi = pair_weights(&scratch, c.hi() - 1).count_ones();
        if to_lo > bound || to_hi > bound {
            rejected |= 1 << idx;
        }
    }
    rejected
}

/// Index of `c` in [`all_comparators`] order.
#[inline]
pub fn comparator_index(n: usize, c: Comparator) -> usize {
    let (lo, hi) = (c.lo() - 1, c.hi() - 1);
    lo * (2 * n - lo - 1) / 2 + (hi - lo - 1)
}

/// Bitmask over comparator indices of the comparators in `level`.
pub fn level_comparator_mask(n: usize, level: &Level) -> u128 {
    level
        .comparators()
        .iter()
        .fold(0, |m, &c| m | 1 << comparator_index(n, c))
}

/// Levels `L` with `S ⊕ L` possibly sortable in two more levels.
pub fn second_last_levels(s: &OutputSet, levels: &[Level]) -> Vec<Level> {
    levels
        .iter()
        .filter(|l| sortable_in_two(&s.extend(l)))
        .copied()
        .collect()
}

/// Levels `L` passing the two-level look-ahead on each of their comparators
/// and with `S ⊕ L` possibly sortable in three more levels.
pub fn third_last_levels(s: &OutputSet, levels: &[Level]) -> Vec<Level> {
    let n = s.channels();
    let rejected = lookahead_rejections(s, 4);
    levels
        .iter()
        .filter(|l| level_comparator_mask(n, l) & rejected == 0)
        .filter(|l| sortable_in_three(&s.extend(l)))
        .copied()
        .collect()
}

/// Levels whose comparators all pass the three-level look-ahead.
pub fn fourth_last_levels(s: &OutputSet, levels: &[Level]) -> Vec<Level> {
    let n = s.channels();
    let rejected = lookahead_rejections(s, 8);
    levels
        .iter()
        .filter(|l| level_comparator_mask(n, l) & rejected == 0)
        .copied()
        .collect()
}

/// Candidate levels for level `t` of a depth-`d` network, given the output
/// set of the first `t - 1` levels.
pub fn get_all_levels(s: &OutputSet, t: usize, d: usize, levels: &[Level]) -> Vec<Level> {
    match d.checked_sub(t) {
        Some(3) => fourth_last_levels(s, levels),
        Some(2) => third_last_levels(s, levels),
        Some(1) => second_last_levels(s, levels),
        _ => levels.to_vec(),
    }
}

/// The test level `t` of a depth-`d` network must pass, built once for the
/// output set `S` of the first `t - 1` levels. With `r = d - t` levels left
/// after `L`:
///
/// * `r = 3`: every comparator of `L` passes the look-ahead with bound 8 and
///   `S ⊕ L` is possibly sortable in three levels;
/// * `r = 2`: look-ahead with bound 4, and `S ⊕ L` possibly sortable in two;
/// * `r = 1`: `S ⊕ L` possibly sortable in two;
/// * otherwise every level passes.
#[derive(Clone, Copy, Debug)]
pub struct LevelFilter {
    n: usize,
    rejected: u128,
    post: Option<Sortable>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sortable {
    InTwo,
    InThree,
}

impl LevelFilter {
    pub fn new(s: &OutputSet, levels_remaining: usize) -> Self {
        let (bound, post) = match levels_remaining {
            3 => (Some(8), Some(Sortable::InThree)),
            2 => (Some(4), Some(Sortable::InTwo)),
            1 => (None, Some(Sortable::InTwo)),
            _ => (None, None),
        };
        LevelFilter {
            n: s.channels(),
            rejected: bound.map_or(0, |b| lookahead_rejections(s, b)),
            post,
        }
    }

    /// The comparator look-ahead, which needs no extension.
    #[inline]
    pub fn passes_lookahead(&self, level: &Level) -> bool {
        self.rejected == 0 || level_comparator_mask(self.n, level) & self.rejected == 0
    }

    #[inline]
    pub(crate) fn accepts_bits(&self, bits: &[u64]) -> bool {
        match self.post {
            None => true,
            Some(Sortable::InTwo) => sortable_in_two_bits(self.n, bits),
            Some(Sortable::InThree) => sortable_in_three_bits(self.n, bits),
        }
    }

    /// The test on the extended set `S ⊕ L`.
    pub fn accepts_extension(&self, extended: &OutputSet) -> bool {
        self.accepts_bits(extended.bits())
    }

    /// Both tests for `S ⊕ L`, given `S`.
    pub fn accepts(&self, s: &OutputSet, level: &Level) -> bool {
        self.passes_lookahead(level) && self.accepts_extension(&s.extend(level))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{enumerate_levels, weight, Network};
    use rand::{rngs::StdRng, Rng, SeedableRng};

    /// Literal all-pairs construction over members.
    fn all_pairs(s: &OutputSet) -> ChannelSets {
        let n = s.channels();
        let members: Vec<Word> = s.members().collect();
        let mut sets = ChannelSets::empty(n);
        for &x in &members {
            for &y in &members {
                let diff = x ^ y;
                if diff.count_ones() == 1 && x & diff != 0 {
                    let i = diff.trailing_zeros() as usize + 1;
                    sets.add(i, dest(n, weight(x)));
                }
            }
        }
        sets
    }

    fn random_net(rng: &mut StdRng, n: usize, depth: usize) -> Network {
        let levels = enumerate_levels(n);
        let mut net = Network::empty(n);
        for _ in 0..depth {
            net.push(levels[rng.gen_range(0..levels.len())]);
        }
        net
    }

    #[test]
    fn sorted_set_has_singleton_sets() {
        for n in 2..=9 {
            let sets = from_to_reach(&OutputSet::sorted(n));
            for c in 1..=n {
                assert_eq!(sets.from(c), 1 << (c - 1));
                assert_eq!(sets.to(c), 1 << (c - 1));
                assert_eq!(sets.reach(c), 1 << (c - 1));
            }
        }
    }

    #[test]
    fn full_set_connects_everything() {
        let sets = from_to_reach(&OutputSet::full(3));
        for c in 1..=3 {
            assert_eq!(sets.from(c), 0b111);
            assert_eq!(sets.to(c), 0b111);
            assert_eq!(sets.reach(c), 0b111);
        }
    }

    #[test]
    fn neighbour_scan_matches_all_pairs() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..400 {
            let n = rng.gen_range(2..=9);
            let depth = rng.gen_range(0..4);
            let s = OutputSet::of_network(&random_net(&mut rng, n, depth));
            let fast = from_to_reach(&s);
            assert_eq!(fast, all_pairs(&s));
            for c in 1..=n {
                assert_ne!(fast.reach(c) & 1 << (c - 1), 0);
                for q in 1..=n {
                    assert_eq!(fast.to(c) >> (q - 1) & 1, fast.from(q) >> (c - 1) & 1);
                }
            }
        }
    }

    #[test]
    fn sortable_checks_on_extremes() {
        for n in 2..=10 {
            assert!(sortable_in_two(&OutputSet::sorted(n)));
            assert!(sortable_in_three(&OutputSet::sorted(n)));
        }
        assert!(!sortable_in_two(&OutputSet::full(6)));
        for n in 2..=8 {
            assert!(sortable_in_three(&OutputSet::full(n)));
        }
        assert!(!sortable_in_three(&OutputSet::full(9)));
    }

    #[test]
    fn comparator_indices() {
        for n in 2..=16 {
            for (i, c) in all_comparators(n).into_iter().enumerate() {
                assert_eq!(comparator_index(n, c), i);
            }
        }
    }

    #[test]
    fn filters_on_sorted_set_keep_everything() {
        for n in [4, 7, 10] {
            let levels = enumerate_levels(n);
            let t = OutputSet::sorted(n);
            assert_eq!(second_last_levels(&t, &levels).len(), levels.len());
            assert_eq!(third_last_levels(&t, &levels).len(), levels.len());
            assert_eq!(fourth_last_levels(&t, &levels).len(), levels.len());
        }
    }

    #[test]
    fn three_level_lookahead_is_vacuous_up_to_eight_channels() {
        let mut rng = StdRng::seed_from_u64(5);
        for n in 2..=8 {
            let levels = enumerate_levels(n);
            let s = OutputSet::of_network(&random_net(&mut rng, n, 1));
            assert_eq!(fourth_last_levels(&s, &levels), levels);
            assert_eq!(fourth_last_levels(&OutputSet::full(n), &levels), levels);
        }
    }

    #[test]
    fn dispatch_by_levels_left() {
        let levels = enumerate_levels(6);
        let s = OutputSet::full(6);
        assert_eq!(get_all_levels(&s, 1, 6, &levels), levels);
        assert_eq!(get_all_levels(&s, 3, 6, &levels), fourth_last_levels(&s, &levels));
        assert_eq!(get_all_levels(&s, 4, 6, &levels), third_last_levels(&s, &levels));
        assert_eq!(get_all_levels(&s, 5, 6, &levels), second_last_levels(&s, &levels));
        assert_eq!(get_all_levels(&s, 6, 6, &levels), levels);
        let t = OutputSet::sorted(6);
        assert_eq!(get_all_levels(&t, 5, 6, &levels), levels);
    }

    /// The single-comparator look-ahead never rejects a level whose full
    /// extension passes the corresponding sortable-in-k test.
    #[test]
    fn lookahead_is_implied_by_full_extension_check() {
        let mut rng = StdRng::seed_from_u64(17);
        for _ in 0..60 {
            let n = rng.gen_range(4..=9);
            let levels = enumerate_levels(n);
            let depth = rng.gen_range(1..=4);
            let s = OutputSet::of_network(&random_net(&mut rng, n, depth));
            let rej4 = lookahead_rejections(&s, 4);
            let rej8 = lookahead_rejections(&s, 8);
            for l in &levels {
                let ext = s.extend(l);
                let mask = level_comparator_mask(n, l);
                if sortable_in_two(&ext) {
                    assert_eq!(mask & rej4, 0, "{s:?} {l}");
                }
                if sortable_in_three(&ext) {
                    assert_eq!(mask & rej8, 0, "{s:?} {l}");
                }
            }
        }
    }

    #[test]
    fn survivor_counts_bounded() {
        let mut rng = StdRng::seed_from_u64(23);
        let levels = enumerate_levels(7);
        for _ in 0..10 {
            let s = OutputSet::of_network(&random_net(&mut rng, 7, 2));
            assert!(second_last_levels(&s, &levels).len() <= levels.len());
            assert!(third_last_levels(&s, &levels).len() <= levels.len());
        }
    }

    #[test]
    fn two_implies_three() {
        let mut rng = StdRng::seed_from_u64(29);
        for _ in 0..500 {
            let n = rng.gen_range(2..=11);
            let depth = rng.gen_range(0..6);
            let s = OutputSet::of_network(&random_net(&mut rng, n, depth));
            if sortable_in_two(&s) {
                assert!(sortable_in_three(&s));
            }
        }
    }
}
