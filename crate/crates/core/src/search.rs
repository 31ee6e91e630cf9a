//! Depth-by-depth generation of candidate pools and the existence decision.
//!
//! Level `t` of a depth-`d` network is chosen from the levels that survive the
//! filter for `r = d - t` remaining levels. The pool after every level is
//! reduced to minimal representatives under subsumption, so a sorting network
//! of depth `d` exists iff the final pool contains the sorted set.

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use log::{debug, info};
use rayon::prelude::*;

use crate::checkpoint::{self, Checkpoint};
use crate::error::SearchError;
use crate::network::{enumerate_levels, Level, Network, MAX_CHANNELS};
use crate::outset::{apply_level_bits, tables, OutputSet};
use crate::prune::LevelFilter;
use crate::subsume::{minimize_reporting, CandidatePool, PoolEntry};

/// Parameters of one existence query.
#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub n: usize,
    pub depth: usize,
    /// Rayon worker threads, at least one.
    pub workers: usize,
    /// Depths after this one are deduplicated but not minimised.
    /// `None` minimises every depth.
    pub minimize_through: Option<usize>,
    pub checkpoint_dir: Option<PathBuf>,
    /// Keep the witness of a successful search.
    pub emit_witness: bool,
    /// Continue from the deepest checkpoint found in `checkpoint_dir`.
    pub resume: bool,
    /// Abort with [`SearchError::PoolLimit`] when a generated pool exceeds
    /// this many distinct sets.
    pub pool_limit: Option<usize>,
    pub progress_interval: Duration,
}

/// Available hardware parallelism, or one.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl SearchConfig {
    pub fn new(n: usize, depth: usize) -> Self {
        SearchConfig {
            n,
            depth,
            workers: default_workers(),
            minimize_through: None,
            checkpoint_dir: None,
            emit_witness: true,
            resume: false,
            pool_limit: None,
            progress_interval: Duration::from_secs(10),
        }
    }

    fn validate(&self) -> Result<(), SearchError> {
        if !(2..=MAX_CHANNELS).contains(&self.n) {
            return Err(SearchError::Config(format!(
                "n must lie in 2..={MAX_CHANNELS}, got {}",
                self.n
            )));
        }
        if self.workers == 0 {
            return Err(SearchError::Config("at least one worker is required".into()));
        }
        if self.resume && self.checkpoint_dir.is_none() {
            return Err(SearchError::Config("resume requires a checkpoint directory".into()));
        }
        Ok(())
    }

    fn minimizes(&self, t: usize) -> bool {
        self.minimize_through.map_or(true, |m| t <= m)
    }
}

/// Counters for the generation of one depth.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DepthStats {
    pub depth: usize,
    /// Levels still to be added after this one.
    pub levels_remaining: usize,
    /// Pool size entering this depth.
    pub input_count: usize,
    /// Extensions considered: `input_count · |G_n|`.
    pub generated: u64,
    /// Extensions whose level passed the comparator look-ahead (every
    /// extension when no look-ahead applies at this depth).
    pub lookahead_survivors: u64,
    /// Extensions that also passed the sortability test on the extended set.
    pub sortable_survivors: u64,
    /// Distinct sets among the survivors.
    pub unique_count: usize,
    /// Pool size after minimisation (equals `unique_count` when skipped).
    pub minimized_count: usize,
    pub wall_seconds: f64,
    pub cpu_seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SearchStats {
    pub per_depth: Vec<DepthStats>,
}

impl SearchStats {
    pub fn wall_seconds(&self) -> f64 {
        self.per_depth.iter().map(|s| s.wall_seconds).sum()
    }

    pub fn cpu_seconds(&self) -> f64 {
        self.per_depth.iter().map(|s| s.cpu_seconds).sum()
    }

    pub fn depth(&self, t: usize) -> Option<&DepthStats> {
        self.per_depth.iter().find(|s| s.depth == t)
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub exists: bool,
    pub stats: SearchStats,
    /// A sorting network of the requested depth when one exists and the
    /// witness was requested.
    pub witness: Option<Network>,
    /// The pool after the last depth.
    pub pool: CandidatePool,
}

/// Decides whether an `n`-channel sorting network of depth `d` exists.
pub fn exists_sorting_network(config: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| SearchError::Workers(e.to_string()))?;
    pool.install(|| run(config))
}

/// Smallest `d ≤ max_depth` for which a sorting network exists, together with
/// the outcome of that search. `None` when every depth up to `max_depth` fails.
pub fn optimal_depth(
    n: usize,
    max_depth: usize,
    base: &SearchConfig,
) -> Result<Option<(usize, SearchOutcome)>, SearchError> {
    for d in 1..=max_depth {
        let config = SearchConfig { n, depth: d, ..base.clone() };
        let outcome = exists_sorting_network(&config)?;
        info!("n = {n}, depth {d}: {}", if outcome.exists { "exists" } else { "none" });
        if outcome.exists {
            return Ok(Some((d, outcome)));
        }
    }
    Ok(None)
}

fn run(config: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    let (n, d) = (config.n, config.depth);
    let levels = enumerate_levels(n);
    let mut pool = CandidatePool::initial(n);
    let mut stats = SearchStats::default();
    let mut start = 1;

    if config.resume {
        let dir = config.checkpoint_dir.as_ref().expect("validated");
        if let Some(cp) = checkpoint::load_latest(dir, n, d)? {
            info!("resuming n = {n}, d = {d} after depth {}", cp.depth);
            start = cp.depth + 1;
            pool = cp.pool;
            stats = cp.stats;
        }
    }

    for t in start..=d {
        let wall = Instant::now();
        let cpu = cpu_time();
        let (next, mut depth_stats) = generate_next_depth(&pool, t, d, &levels, config)?;
        info!(
            "depth {t}/{d}: {} generated, {} past look-ahead, {} sortable, {} unique",
            depth_stats.generated, depth_stats.lookahead_survivors, depth_stats.sortable_survivors, depth_stats.unique_count
        );
        pool = if config.minimizes(t) {
            minimize_reporting(next, config.progress_interval)
        } else {
            next
        };
        depth_stats.minimized_count = pool.len();
        depth_stats.wall_seconds = wall.elapsed().as_secs_f64();
        depth_stats.cpu_seconds = cpu_time() - cpu;
        info!(
            "depth {t}/{d}: {} in, {} unique, {} kept ({:.2}s)",
            depth_stats.input_count, depth_stats.unique_count, depth_stats.minimized_count, depth_stats.wall_seconds
        );
        stats.per_depth.push(depth_stats);
        if let Some(dir) = &config.checkpoint_dir {
            checkpoint::save(
                dir,
                &Checkpoint {
                    n,
                    depth: t,
                    target_depth: d,
                    pool: pool.clone(),
                    stats: stats.clone(),
                },
            )?;
        }
    }

    let found = pool.entries.iter().find(|e| e.set.is_sorted_set());
    if let Some(e) = found {
        assert!(
            e.witness.depth() == d && e.witness.is_sorting_network(),
            "witness does not sort"
        );
    }
    let exists = found.is_some();
    let witness = found.filter(|_| config.emit_witness).map(|e| e.witness.clone());
    Ok(SearchOutcome {
        exists,
        stats,
        witness,
        pool,
    })
}

/// Survivors of one input entry, deduplicated by least level index.
struct Local {
    found: HashMap<OutputSet, u32>,
    lookahead: u64,
    sortable: u64,
}

fn extend_entry(set: &OutputSet, levels: &[Level], levels_remaining: usize) -> Local {
    let n = set.channels();
    let t = tables(n);
    let filter = LevelFilter::new(set, levels_remaining);
    let mut local = Local {
        found: HashMap::new(),
        lookahead: 0,
        sortable: 0,
    };
    let mut bits = set.bits().to_vec();
    for (idx, level) in levels.iter().enumerate() {
        if !filter.passes_lookahead(level) {
            continue;
        }
        local.lookahead += 1;
        bits.copy_from_slice(set.bits());
        apply_level_bits(&mut bits, n, t, level);
        if filter.accepts_bits(&bits) {
            local.sortable += 1;
            let s = OutputSet::from_bits(n, bits.clone().into_boxed_slice());
            // Levels are visited in ascending order, so the first index wins.
            local.found.entry(s).or_insert(idx as u32);
        }
    }
    local
}

/// Extends every entry of `pool` (depth `t - 1`) by one filtered level and
/// returns the deduplicated, canonically ordered result.
pub fn generate_next_depth(
    pool: &CandidatePool,
    t: usize,
    d: usize,
    levels: &[Level],
    config: &SearchConfig,
) -> Result<(CandidatePool, DepthStats), SearchError> {
    let mut stats = DepthStats {
        depth: t,
        levels_remaining: d - t,
        input_count: pool.len(),
        generated: pool.len() as u64 * levels.len() as u64,
        ..DepthStats::default()
    };
    // Set -> (entry index, level index) of the least witness.
    let mut best: HashMap<OutputSet, (u32, u32)> = HashMap::new();
    let chunk = (rayon::current_num_threads() * 16).max(64);
    let mut last_report = Instant::now();
    for (c, entries) in pool.entries.chunks(chunk).enumerate() {
        let locals: Vec<Local> = entries
            .par_iter()
            .map(|e| extend_entry(&e.set, levels, d - t))
            .collect();
        for (offset, local) in locals.into_iter().enumerate() {
            let e = (c * chunk + offset) as u32;
            stats.lookahead_survivors += local.lookahead;
            stats.sortable_survivors += local.sortable;
            for (set, l) in local.found {
                match best.get_mut(&set) {
                    Some(slot) => {
                        let current = &pool.entries[slot.0 as usize].witness;
                        let candidate = &pool.entries[e as usize].witness;
                        if (candidate, l) < (current, slot.1) {
                            *slot = (e, l);
                        }
                    }
                    None => {
                        best.insert(set, (e, l));
                    }
                }
            }
        }
        if let Some(limit) = config.pool_limit {
            if best.len() > limit {
                return Err(SearchError::PoolLimit { depth: t, limit });
            }
        }
        if last_report.elapsed() >= config.progress_interval {
            last_report = Instant::now();
            info!(
                "depth {t}: {}/{} entries extended, {} distinct sets",
                ((c + 1) * chunk).min(pool.len()),
                pool.len(),
                best.len()
            );
        }
    }
    stats.unique_count = best.len();
    debug!("depth {t}: {} distinct of {} survivors", best.len(), stats.sortable_survivors);
    let entries: Vec<PoolEntry> = best
        .into_iter()
        .map(|(set, (e, l))| {
            let witness = pool.entries[e as usize].witness.with_level(levels[l as usize]);
            PoolEntry::new(set, witness)
        })
        .collect();
    stats.minimized_count = entries.len();
    Ok((CandidatePool::new(entries).sorted(), stats))
}

/// Process CPU time in seconds, summed over all threads.
fn cpu_time() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    // SAFETY: `ts` is a valid out-pointer for the duration of the call.
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_PROCESS_CPUTIME_ID, &mut ts) };
    if rc != 0 {
        return 0.0;
    }
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exists(n: usize, d: usize) -> bool {
        exists_sorting_network(&SearchConfig::new(n, d)).unwrap().exists
    }

    #[test]
    fn small_optima() {
        for (n, opt) in [(2, 1), (3, 3), (4, 3), (5, 5), (6, 5)] {
            assert!(!exists(n, opt - 1), "n = {n}");
            let outcome = exists_sorting_network(&SearchConfig::new(n, opt)).unwrap();
            assert!(outcome.exists, "n = {n}");
            let w = outcome.witness.unwrap();
            assert_eq!(w.depth(), opt);
            assert!(w.is_sorting_network());
        }
    }

    #[test]
    fn depth_zero_never_sorts() {
        let outcome = exists_sorting_network(&SearchConfig::new(4, 0)).unwrap();
        assert!(!outcome.exists);
        assert!(outcome.stats.per_depth.is_empty());
    }

    #[test]
    fn rejects_bad_config() {
        assert!(exists_sorting_network(&SearchConfig::new(1, 3)).is_err());
        assert!(exists_sorting_network(&SearchConfig::new(17, 3)).is_err());
        let mut c = SearchConfig::new(4, 3);
        c.resume = true;
        assert!(exists_sorting_network(&c).is_err());
        let mut c = SearchConfig::new(4, 3);
        c.workers = 0;
        assert!(exists_sorting_network(&c).is_err());
    }

    #[test]
    fn pool_limit_is_reported() {
        let mut c = SearchConfig::new(6, 5);
        c.pool_limit = Some(3);
        assert!(matches!(
            exists_sorting_network(&c),
            Err(SearchError::PoolLimit { limit: 3, .. })
        ));
    }

    #[test]
    fn optimal_depth_small() {
        let base = SearchConfig::new(2, 1);
        assert_eq!(optimal_depth(4, 5, &base).unwrap().map(|(d, _)| d), Some(3));
        assert!(optimal_depth(5, 4, &base).unwrap().is_none());
    }

    #[test]
    fn stats_are_consistent() {
        let outcome = exists_sorting_network(&SearchConfig::new(6, 5)).unwrap();
        let levels = enumerate_levels(6).len() as u64;
        for s in &outcome.stats.per_depth {
            assert_eq!(s.generated, s.input_count as u64 * levels);
            assert!(s.lookahead_survivors <= s.generated);
            assert!(s.sortable_survivors <= s.lookahead_survivors);
            assert!(s.unique_count as u64 <= s.sortable_survivors);
            assert!(s.minimized_count <= s.unique_count);
        }
    }

    #[test]
    fn first_depth_keeps_one_set() {
        let outcome = exists_sorting_network(&SearchConfig::new(7, 1)).unwrap();
        assert_eq!(outcome.pool.len(), 1);
    }
}
