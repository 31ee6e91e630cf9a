//! Subsumption of output sets up to channel permutation and reflection, and
//! the reduction of a candidate pool to minimal representatives.
//!
//! `S_A` subsumes `S_B` when `π(S_A) ⊆ S_B` for some channel permutation `π`,
//! or the same holds for the reflection of `S_A`. Any depth-`k` suffix that
//! completes `B` into a sorting network then has a depth-`k` counterpart for
//! `A`, so `B` can be dropped while `A` stays in the pool.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::time::{Duration, Instant};

use log::info;

use rayon::prelude::*;

use crate::error::OracleError;
use crate::network::{weight, Network, Word, MAX_CHANNELS};
use crate::outset::OutputSet;

/// A bijection on channels. `image(c)` is the channel that channel `c` is
/// sent to; both 1-based.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChannelPermutation {
    n: u8,
    map: [u8; MAX_CHANNELS],
}

impl ChannelPermutation {
    pub fn identity(n: usize) -> Self {
        let mut map = [0u8; MAX_CHANNELS];
        for (i, m) in map.iter_mut().enumerate().take(n) {
            *m = i as u8;
        }
        ChannelPermutation { n: n as u8, map }
    }

    /// From 1-based images, `images[c - 1] = π(c)`. `None` unless bijective.
    pub fn from_images(images: &[usize]) -> Option<Self> {
        let n = images.len();
        if n > MAX_CHANNELS {
            return None;
        }
        let mut map = [0u8; MAX_CHANNELS];
        let mut seen = 0u32;
        for (i, &img) in images.iter().enumerate() {
            if img == 0 || img > n || seen & (1 << (img - 1)) != 0 {
                return None;
            }
            seen |= 1 << (img - 1);
            map[i] = (img - 1) as u8;
        }
        Some(ChannelPermutation { n: n as u8, map })
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn image(&self, c: usize) -> usize {
        self.map[c - 1] as usize + 1
    }

    /// Moves the value on channel `c` to channel `π(c)`.
    #[inline]
    pub fn apply(&self, x: Word) -> Word {
        let mut out = 0;
        let mut rest = x;
        while rest != 0 {
            let c = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            out |= 1 << self.map[c];
        }
        out
    }

    pub fn apply_set(&self, s: &OutputSet) -> Vec<Word> {
        s.members().map(|x| self.apply(x)).collect()
    }

    /// `self` after `first`: `x ↦ self(first(x))`.
    pub fn compose(&self, first: &ChannelPermutation) -> ChannelPermutation {
        let mut map = [0u8; MAX_CHANNELS];
        for (c, m) in map.iter_mut().enumerate().take(self.channels()) {
            *m = self.map[first.map[c] as usize];
        }
        ChannelPermutation { n: self.n, map }
    }
}

impl fmt::Debug for ChannelPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let images: Vec<usize> = (1..=self.channels()).map(|c| self.image(c)).collect();
        write!(f, "π{images:?}")
    }
}

/// Per weight class, per channel counts of members with a one on that channel.
/// The quantities are invariant under channel permutation up to relabelling,
/// which makes them cheap necessary conditions for `π(A) ⊆ B`.
#[derive(Clone)]
pub(crate) struct Profile {
    n: usize,
    weight_counts: [u32; MAX_CHANNELS + 1],
    ones: Vec<[u16; MAX_CHANNELS]>,
    /// Per layer, `ones` sorted descending and zeros sorted descending.
    sorted_ones: Vec<[u16; MAX_CHANNELS]>,
    sorted_zeros: Vec<[u16; MAX_CHANNELS]>,
}

impl Profile {
    fn new(s: &OutputSet) -> Profile {
        let n = s.channels();
        let mut ones = vec![[0u16; MAX_CHANNELS]; n + 1];
        for x in s.members() {
            let layer = &mut ones[weight(x)];
            let mut rest = x;
            while rest != 0 {
                let c = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                layer[c] += 1;
            }
        }
        let mut weight_counts = [0u32; MAX_CHANNELS + 1];
        for (dst, &src) in weight_counts.iter_mut().zip(s.weight_counts()) {
            *dst = src as u32;
        }
        let mut sorted_ones = ones.clone();
        let mut sorted_zeros = ones.clone();
        for k in 0..=n {
            sorted_ones[k][..n].sort_unstable_by(|a, b| b.cmp(a));
            for c in 0..n {
                sorted_zeros[k][c] = weight_counts[k] as u16 - ones[k][c];
            }
            sorted_zeros[k][..n].sort_unstable_by(|a, b| b.cmp(a));
        }
        Profile {
            n,
            weight_counts,
            ones,
            sorted_ones,
            sorted_zeros,
        }
    }

    #[inline]
    fn zeros(&self, k: usize, c: usize) -> u16 {
        self.weight_counts[k] as u16 - self.ones[k][c]
    }

    /// Hash of the layer sizes and the multiset of per-channel columns.
    /// Equal for sets related by a channel permutation.
    fn signature(&self) -> u64 {
        let n = self.n;
        let mut columns: Vec<[u16; MAX_CHANNELS]> = (0..n)
            .map(|c| {
                let mut col = [0u16; MAX_CHANNELS];
                for k in 1..n {
                    col[k] = self.ones[k][c];
                }
                col
            })
            .collect();
        columns.sort_unstable();
        let mut h = std::collections::hash_map::DefaultHasher::new();
        self.weight_counts[..=n].hash(&mut h);
        columns.hash(&mut h);
        h.finish()
    }

    /// Counting conditions that do not depend on the permutation.
    fn may_embed_into(&self, other: &Profile) -> bool {
        let n = self.n;
        if (0..=n).any(|k| self.weight_counts[k] > other.weight_counts[k]) {
            return false;
        }
        // Layers 0 and n hold a single word each.
        (1..n).all(|k| {
            (0..n).all(|i| {
                self.sorted_ones[k][i] <= other.sorted_ones[k][i]
                    && self.sorted_zeros[k][i] <= other.sorted_zeros[k][i]
            })
        })
    }

    /// `compat[c]`: channels of `other` that channel `c` may map to.
    fn compatibility(&self, other: &Profile) -> [u32; MAX_CHANNELS] {
        let n = self.n;
        let mut compat = [0u32; MAX_CHANNELS];
        for (c, slot) in compat.iter_mut().enumerate().take(n) {
            for d in 0..n {
                let fits = (1..n).all(|k| {
                    self.ones[k][c] <= other.ones[k][d] && self.zeros(k, c) <= other.zeros(k, d)
                });
                if fits {
                    *slot |= 1 << d;
                }
            }
        }
        compat
    }
}

/// Everything the embedding search needs to know about one set.
#[derive(Clone)]
pub(crate) struct Prepared {
    members: Vec<Word>,
    weights: Vec<u8>,
    profile: Profile,
}

impl Prepared {
    pub(crate) fn new(s: &OutputSet) -> Prepared {
        let members: Vec<Word> = s.members().collect();
        let weights = members.iter().map(|&x| weight(x) as u8).collect();
        Prepared {
            members,
            weights,
            profile: Profile::new(s),
        }
    }
}

/// Scratch space reused across embedding searches.
pub(crate) struct Scratch {
    /// Kept index that subsumed the previous candidate; neighbouring
    /// candidates are often subsumed by the same set.
    hint: Option<usize>,
    stamp: u32,
    seen: Vec<u32>,
    a_keys: Vec<u32>,
    b_keys: Vec<u32>,
}

impl Scratch {
    pub(crate) fn new(n: usize) -> Scratch {
        Scratch {
            hint: None,
            stamp: 0,
            seen: vec![0; (n + 1) << n],
            a_keys: Vec::new(),
            b_keys: Vec::new(),
        }
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.seen.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
        self.stamp
    }
}

/// Backtracking search for `π` with `π(A) ⊆ B`.
///
/// Channels of `A` are assigned one at a time, most constrained first. After
/// each assignment, every member of `A` projected onto the assigned channels
/// (together with its weight) must occur as the projection of some member of
/// `B` onto the image channels; at full depth this is exactly `π(A) ⊆ B`.
pub(crate) fn embed(a: &Prepared, b: &Prepared, scratch: &mut Scratch) -> Option<ChannelPermutation> {
    let n = a.profile.n;
    if a.members.len() > b.members.len() || !a.profile.may_embed_into(&b.profile) {
        return None;
    }
    let compat = a.profile.compatibility(&b.profile);
    if compat[..n].iter().any(|&m| m == 0) {
        return None;
    }
    // Hall's condition on the union of all candidate images.
    if compat[..n].iter().fold(0, |m, c| m | c).count_ones() < n as u32 {
        return None;
    }
    if scratch.seen.len() < (n + 1) << n {
        *scratch = Scratch::new(n);
    }
    scratch.a_keys.clear();
    scratch.a_keys.resize(a.members.len(), 0);
    scratch.b_keys.clear();
    scratch.b_keys.resize(b.members.len(), 0);
    let mut map = [0u8; MAX_CHANNELS];
    let found = assign(a, b, &compat, 0, 0, &mut map, scratch);
    found.then(|| ChannelPermutation { n: n as u8, map })
}

fn assign(
    a: &Prepared,
    b: &Prepared,
    compat: &[u32; MAX_CHANNELS],
    assigned: u32,
    used: u32,
    map: &mut [u8; MAX_CHANNELS],
    scratch: &mut Scratch,
) -> bool {
    let n = a.profile.n;
    let depth = assigned.count_ones() as usize;
    if depth == n {
        return true;
    }
    // Most constrained unassigned channel.
    let mut best = usize::MAX;
    let mut best_options = u32::MAX;
    for c in 0..n {
        if assigned & (1 << c) == 0 {
            let options = (compat[c] & !used).count_ones();
            if options < best_options {
                best = c;
                best_options = options;
            }
        }
    }
    if best_options == 0 {
        return false;
    }
    let c = best;
    let bit = 1u32 << depth;
    for (key, &x) in scratch.a_keys.iter_mut().zip(&a.members) {
        if x >> c & 1 == 1 {
            *key |= bit;
        }
    }
    let mut options = compat[c] & !used;
    while options != 0 {
        let d = options.trailing_zeros() as usize;
        options &= options - 1;
        for (key, &y) in scratch.b_keys.iter_mut().zip(&b.members) {
            *key = (*key & !bit) | ((y >> d & 1) << depth);
        }
        if projections_fit(a, b, depth + 1, scratch) {
            map[c] = d as u8;
            if assign(a, b, compat, assigned | 1 << c, used | 1 << d, map, scratch) {
                return true;
            }
        }
    }
    for key in scratch.b_keys.iter_mut() {
        *key &= !bit;
    }
    for key in scratch.a_keys.iter_mut() {
        *key &= !bit;
    }
    false
}

fn projections_fit(a: &Prepared, b: &Prepared, width: usize, scratch: &mut Scratch) -> bool {
    let stamp = scratch.next_stamp();
    for (&key, &w) in scratch.b_keys.iter().zip(&b.weights) {
        scratch.seen[((w as usize) << width) | key as usize] = stamp;
    }
    scratch
        .a_keys
        .iter()
        .zip(&a.weights)
        .all(|(&key, &w)| scratch.seen[((w as usize) << width) | key as usize] == stamp)
}

/// Some `π` with `π(S_A) ⊆ S_B`, if one exists.
pub fn permutation_subsumes(a: &OutputSet, b: &OutputSet) -> Option<ChannelPermutation> {
    assert_eq!(a.channels(), b.channels());
    let mut scratch = Scratch::new(a.channels());
    embed(&Prepared::new(a), &Prepared::new(b), &mut scratch)
}

/// Subsumption up to permutation and reflection.
pub fn subsumes_perm_refl(a: &OutputSet, b: &OutputSet) -> bool {
    permutation_subsumes(a, b).is_some() || permutation_subsumes(&a.reflect(), b).is_some()
}

/// Exhaustive check over all `n!` permutations of `S_A` (and of its
/// reflection when `with_reflection`). Refuses `n > 7`.
pub fn naive_subsumes(a: &OutputSet, b: &OutputSet, with_reflection: bool) -> Result<bool, OracleError> {
    let n = a.channels();
    if n > 7 {
        return Err(OracleError {
            what: "naive subsumption",
            reason: format!("n = {n} exceeds 7"),
        });
    }
    let sources: Vec<Vec<Word>> = if with_reflection {
        vec![a.members().collect(), a.reflect().members().collect()]
    } else {
        vec![a.members().collect()]
    };
    let mut images: Vec<usize> = (1..=n).collect();
    let mut found = false;
    permute(&mut images, 0, &mut |images| {
        let pi = ChannelPermutation::from_images(images).unwrap();
        if sources
            .iter()
            .any(|src| src.iter().all(|&x| b.contains(pi.apply(x))))
        {
            found = true;
        }
        found
    });
    Ok(found)
}

/// Visits every permutation of `items[k..]`; stops once `visit` returns true.
fn permute(items: &mut [usize], k: usize, visit: &mut impl FnMut(&[usize]) -> bool) -> bool {
    if k == items.len() {
        return visit(items);
    }
    for i in k..items.len() {
        items.swap(k, i);
        if permute(items, k + 1, visit) {
            items.swap(k, i);
            return true;
        }
        items.swap(k, i);
    }
    false
}

/// An output set together with a network that produces it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolEntry {
    pub set: OutputSet,
    pub witness: Network,
}

impl PoolEntry {
    pub fn new(set: OutputSet, witness: Network) -> Self {
        PoolEntry { set, witness }
    }

    pub fn of_network(witness: Network) -> Self {
        PoolEntry {
            set: OutputSet::of_network(&witness),
            witness,
        }
    }

    /// Processing order of minimisation: smaller sets first, then the
    /// lexicographically smaller witness.
    fn order(&self, other: &Self) -> Ordering {
        self.set
            .cardinality()
            .cmp(&other.set.cardinality())
            .then_with(|| self.witness.cmp(&other.witness))
    }
}

/// The surviving candidates at one depth.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CandidatePool {
    pub entries: Vec<PoolEntry>,
}

impl CandidatePool {
    pub fn new(entries: Vec<PoolEntry>) -> Self {
        CandidatePool { entries }
    }

    /// The pool holding only the empty network on `n` channels.
    pub fn initial(n: usize) -> Self {
        CandidatePool {
            entries: vec![PoolEntry::of_network(Network::empty(n))],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Drops exact duplicates, keeping the smallest witness of each set.
    pub fn dedup(self) -> CandidatePool {
        let mut best: HashMap<OutputSet, Network> = HashMap::with_capacity(self.entries.len());
        for entry in self.entries {
            match best.get_mut(&entry.set) {
                Some(w) if *w <= entry.witness => {}
                Some(w) => *w = entry.witness,
                None => {
                    best.insert(entry.set, entry.witness);
                }
            }
        }
        let mut entries: Vec<PoolEntry> = best.into_iter().map(|(s, w)| PoolEntry::new(s, w)).collect();
        entries.sort_by(|a, b| a.order(b));
        CandidatePool { entries }
    }

    /// Entries sorted in canonical order (cardinality, then witness).
    pub fn sorted(mut self) -> CandidatePool {
        self.entries.sort_by(|a, b| a.order(b));
        self
    }
}

/// Keeps one representative of every minimal class of the subsumption
/// preorder (permutation and reflection), choosing the least witness among
/// equivalent sets.
///
/// Entries are processed by ascending cardinality, so a set can only be
/// subsumed by one already kept. A kept set of equal cardinality can only
/// subsume by being equivalent, which is looked up through a permutation
/// invariant signature; only strictly smaller kept sets are scanned. The
/// result is independent of input order and of the number of worker threads.
pub fn minimize(pool: CandidatePool) -> CandidatePool {
    minimize_reporting(pool, Duration::MAX)
}

struct Kept {
    straight: Prepared,
    reflected: Prepared,
    cardinality: usize,
}

/// Layer sizes padded to a fixed width, for a vectorisable dominance test.
type Counts = [u16; MAX_CHANNELS + 1];

fn counts_of(p: &Prepared) -> Counts {
    let mut c = [0u16; MAX_CHANNELS + 1];
    for (dst, &src) in c.iter_mut().zip(p.profile.weight_counts.iter()) {
        *dst = src as u16;
    }
    c
}

#[inline]
fn dominated(a: &Counts, b: &Counts) -> bool {
    a.iter().zip(b).fold(true, |ok, (x, y)| ok & (x <= y))
}

struct KeptIndex {
    kept: Vec<Kept>,
    straight_counts: Vec<Counts>,
    reflected_counts: Vec<Counts>,
    /// Signature of either orientation -> kept indices.
    by_signature: HashMap<u64, Vec<u32>>,
}

impl KeptIndex {
    fn new() -> Self {
        KeptIndex {
            kept: Vec::new(),
            straight_counts: Vec::new(),
            reflected_counts: Vec::new(),
            by_signature: HashMap::new(),
        }
    }

    fn try_kept(&self, i: usize, b: &Prepared, b_counts: &Counts, scratch: &mut Scratch) -> bool {
        let k = &self.kept[i];
        (dominated(&self.straight_counts[i], b_counts) && embed(&k.straight, b, scratch).is_some())
            || (dominated(&self.reflected_counts[i], b_counts) && embed(&k.reflected, b, scratch).is_some())
    }

    /// Whether some kept set at index `>= from` subsumes `b`.
    fn subsumes(&self, from: usize, b: &Prepared, cardinality: usize, scratch: &mut Scratch) -> bool {
        let b_counts = counts_of(b);
        if let Some(i) = scratch.hint {
            if i >= from && i < self.kept.len() && self.try_kept(i, b, &b_counts, scratch) {
                return true;
            }
        }
        let found = self.find(from, b, &b_counts, cardinality, scratch);
        if found.is_some() {
            scratch.hint = found;
        }
        found.is_some()
    }

    fn find(&self, from: usize, b: &Prepared, b_counts: &Counts, cardinality: usize, scratch: &mut Scratch) -> Option<usize> {
        if let Some(same) = self.by_signature.get(&b.profile.signature()) {
            let hit = same
                .iter()
                .map(|&i| i as usize)
                .filter(|&i| i >= from)
                .find(|&i| self.try_kept(i, b, b_counts, scratch));
            if hit.is_some() {
                return hit;
            }
        }
        let smaller = self.kept.partition_point(|k| k.cardinality < cardinality);
        (from.min(smaller)..smaller).find(|&i| self.try_kept(i, b, b_counts, scratch))
    }

    fn push(&mut self, straight: Prepared, reflected: Prepared, cardinality: usize) {
        let idx = self.kept.len() as u32;
        let (s, r) = (straight.profile.signature(), reflected.profile.signature());
        self.by_signature.entry(s).or_default().push(idx);
        if r != s {
            self.by_signature.entry(r).or_default().push(idx);
        }
        self.straight_counts.push(counts_of(&straight));
        self.reflected_counts.push(counts_of(&reflected));
        self.kept.push(Kept {
            straight,
            reflected,
            cardinality,
        });
    }
}

/// [`minimize`] with a progress message every `interval`.
pub fn minimize_reporting(pool: CandidatePool, interval: Duration) -> CandidatePool {
    let entries = pool.dedup().entries;
    let Some(first) = entries.first() else {
        return CandidatePool::default();
    };
    let n = first.set.channels();
    let total = entries.len();

    let mut index = KeptIndex::new();
    let mut survivors: Vec<PoolEntry> = Vec::new();
    let batch = (rayon::current_num_threads() * 64).max(256);
    let mut iter = entries.into_iter().peekable();
    let mut scratch = Scratch::new(n);
    let mut done = 0;
    let mut last_report = Instant::now();
    while iter.peek().is_some() {
        let chunk: Vec<PoolEntry> = iter.by_ref().take(batch).collect();
        done += chunk.len();
        // Test the whole chunk against the representatives kept so far.
        let settled = index.kept.len();
        let verdicts: Vec<Option<Prepared>> = chunk
            .par_iter()
            .map_init(
                || Scratch::new(n),
                |scratch, entry| {
                    let prepared = Prepared::new(&entry.set);
                    (!index.subsumes(0, &prepared, entry.set.cardinality(), scratch)).then_some(prepared)
                },
            )
            .collect();
        // Then against earlier members of the same chunk, in order.
        for (entry, verdict) in chunk.into_iter().zip(verdicts) {
            let Some(prepared) = verdict else { continue };
            let cardinality = entry.set.cardinality();
            if index.subsumes(settled, &prepared, cardinality, &mut scratch) {
                continue;
            }
            index.push(prepared, Prepared::new(&entry.set.reflect()), cardinality);
            survivors.push(entry);
        }
        if last_report.elapsed() >= interval {
            last_report = Instant::now();
            info!("minimising: {done}/{total} tested, {} kept", survivors.len());
        }
    }
    CandidatePool::new(survivors)
}
