//! Slow reference implementations used to cross-check the fast paths.
//!
//! Each oracle works directly from the definitions, shares no code with the
//! bit-parallel routines it checks, and refuses inputs where it would be
//! impractically slow.

use std::collections::{HashMap, HashSet};

use crate::error::OracleError;
use crate::network::{enumerate_levels, weight, Level, Network, Word};
use crate::prune::{dest, ChannelSets};

/// From/to/reach sets recomputed by tracing pairs of inputs.
pub type TraceResult = ChannelSets;

fn refuse(what: &'static str, reason: String) -> OracleError {
    OracleError { what, reason }
}

/// Recomputes the channel sets by tracing pairs of inputs. For inputs `v`
/// and `w = v` without bit `i`, the outputs either agree or differ in exactly
/// one channel `j`; in the latter case the one carried by `v` ends up on
/// `dest(|v|)`, so that destination is added to `to[j]`. Refuses `n > 12`.
pub fn trace_from_to_reach(net: &Network) -> Result<TraceResult, OracleError> {
    let n = net.channels();
    if n > 12 {
        return Err(refuse("from/to/reach trace", format!("n = {n} exceeds 12")));
    }
    let outputs: Vec<Word> = (0..1u32 << n).map(|x| net.evaluate(x)).collect();
    let mut sets = ChannelSets::empty(n);
    for v in 0..1u32 << n {
        for i in 0..n {
            if v >> i & 1 == 0 {
                continue;
            }
            let w = v & !(1 << i);
            let diff = outputs[v as usize] ^ outputs[w as usize];
            if diff != 0 {
                debug_assert_eq!(diff.count_ones(), 1);
                let j = diff.trailing_zeros() as usize + 1;
                sets.add(j, dest(n, weight(v)));
            }
        }
    }
    Ok(sets)
}

/// A set of words on at most seven channels, bit `x` standing for word `x`.
type SmallSet = u128;

fn small_set(members: &[Word]) -> SmallSet {
    members.iter().fold(0, |m, &x| m | 1 << x)
}

fn small_members(s: SmallSet) -> Vec<Word> {
    (0..128).filter(|&x| s >> x & 1 == 1).collect()
}

fn apply_level_small(level: &Level, s: SmallSet) -> SmallSet {
    let mut out = 0;
    let mut rest = s;
    while rest != 0 {
        let x = rest.trailing_zeros();
        rest &= rest - 1;
        out |= 1 << apply_level(level, x);
    }
    out
}

fn sorted_small(n: usize) -> SmallSet {
    (0..=n).fold(0, |m, k| m | 1 << (((1u32 << k) - 1) << (n - k)))
}

/// Decides whether some `k` further levels sort every member of a set.
/// Memoised over the sets visited, so one instance can answer many queries.
pub struct ExtensionOracle {
    n: usize,
    levels: Vec<Level>,
    sorted: SmallSet,
    memo: HashMap<(SmallSet, usize), bool>,
}

impl ExtensionOracle {
    /// Feasible for `n ≤ 6` (any `k ≤ 3`) and `n = 7` (`k ≤ 2`).
    pub fn new(n: usize) -> Result<Self, OracleError> {
        if !(2..=7).contains(&n) {
            return Err(refuse("extendability", format!("n = {n} outside 2..=7")));
        }
        Ok(ExtensionOracle {
            n,
            levels: enumerate_levels(n),
            sorted: sorted_small(n),
            memo: HashMap::new(),
        })
    }

    fn check_budget(&self, k: usize) -> Result<(), OracleError> {
        let limit = if self.n <= 6 { 3 } else { 2 };
        if k > limit {
            return Err(refuse(
                "extendability",
                format!("k = {k} exceeds {limit} for n = {}", self.n),
            ));
        }
        Ok(())
    }

    /// Whether `k` more levels can sort every word in `members`.
    pub fn extendable(&mut self, members: &[Word], k: usize) -> Result<bool, OracleError> {
        self.check_budget(k)?;
        if members.iter().any(|&x| x >> self.n != 0) {
            return Err(refuse("extendability", format!("word outside {} channels", self.n)));
        }
        Ok(self.search(small_set(members), k))
    }

    fn search(&mut self, s: SmallSet, k: usize) -> bool {
        if s & !self.sorted == 0 {
            return true;
        }
        if k == 0 {
            return false;
        }
        if let Some(&v) = self.memo.get(&(s, k)) {
            return v;
        }
        let mut result = false;
        for i in 0..self.levels.len() {
            let next = apply_level_small(&self.levels[i], s);
            if self.search(next, k - 1) {
                result = true;
                break;
            }
        }
        self.memo.insert((s, k), result);
        result
    }
}

/// Comparator semantics written out directly: the larger of the two values
/// goes to the higher channel.
fn apply_level(level: &Level, x: Word) -> Word {
    let mut y = x;
    for c in level.comparators() {
        let (a, b) = (c.lo() - 1, c.hi() - 1);
        let (va, vb) = (y >> a & 1, y >> b & 1);
        if va > vb {
            y ^= (1 << a) | (1 << b);
        }
    }
    y
}

/// Whether `net` can be completed to a sorting network with `k` more levels.
pub fn brute_force_extendable(net: &Network, k: usize) -> Result<bool, OracleError> {
    let mut oracle = ExtensionOracle::new(net.channels())?;
    let members: Vec<Word> = (0..1u32 << net.channels())
        .map(|x| net.levels().iter().fold(x, |y, l| apply_level(l, y)))
        .collect();
    oracle.extendable(&members, k)
}

/// Every distinct output set of a depth-`depth` network on `n ≤ 6`
/// channels, as sorted member lists in ascending order of their bitsets.
pub fn reachable_output_sets(n: usize, depth: usize) -> Result<Vec<Vec<Word>>, OracleError> {
    if !(2..=6).contains(&n) {
        return Err(refuse("reachable sets", format!("n = {n} outside 2..=6")));
    }
    let levels = enumerate_levels(n);
    let mut frontier: HashSet<SmallSet> = HashSet::from([small_set(&(0..1u32 << n).collect::<Vec<_>>())]);
    for _ in 0..depth {
        frontier = frontier
            .iter()
            .flat_map(|&s| levels.iter().map(move |l| apply_level_small(l, s)))
            .collect();
    }
    let mut sets: Vec<SmallSet> = frontier.into_iter().collect();
    sets.sort_unstable();
    Ok(sets.into_iter().map(small_members).collect())
}

/// Optimal depth by breadth-first search over all reachable output sets,
/// with no symmetry reduction. Refuses `n > 6`.
pub fn brute_force_optimal_depth(n: usize) -> Result<usize, OracleError> {
    if !(2..=6).contains(&n) {
        return Err(refuse("optimal depth", format!("n = {n} outside 2..=6")));
    }
    let levels = enumerate_levels(n);
    let sorted = sorted_small(n);
    let mut seen: HashSet<SmallSet> = HashSet::new();
    let mut frontier: Vec<SmallSet> = vec![small_set(&(0..1u32 << n).collect::<Vec<_>>())];
    seen.insert(frontier[0]);
    let mut depth = 0;
    loop {
        if frontier.contains(&sorted) {
            return Ok(depth);
        }
        // A set first reached at depth t stays reachable at every later depth
        // (append empty levels), so only new sets need expanding.
        let mut next = Vec::new();
        for &s in &frontier {
            for level in &levels {
                let t = apply_level_small(level, s);
                if seen.insert(t) {
                    next.push(t);
                }
            }
        }
        frontier = next;
        depth += 1;
    }
}
