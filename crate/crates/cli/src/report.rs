//! JSON rendering of search statistics.
//!
//! Schema version 1:
//!
//! ```text
//! {
//!   "schema_version": 1,
//!   "tool_version": "<crate version>",
//!   "config": { "n", "depth", "workers", "minimize_through" },
//!   "exists": bool,
//!   "per_depth": [ { "depth", "levels_remaining", "input_count", "generated",
//!                    "lookahead_survivors", "sortable_survivors",
//!                    "unique_count", "minimized_count",
//!                    "wall_seconds", "cpu_seconds" } ],
//!   "summary": { "r3_count", "lookahead_survivors", "sortable3", "sortable2",
//!                "runtime_seconds", "wall_seconds" }
//! }
//! ```
//!
//! The summary mirrors a four-column funnel: `r3_count` is the pool entering
//! the depth with three levels remaining after it, `lookahead_survivors` and
//! `sortable3` are counted while generating that depth, and `sortable2` while
//! generating the next one. Missing depths (small `d`) give `null`.
//! `runtime_seconds` is CPU time summed over all workers.

use serde::Serialize;
use sortnet::{DepthStats, SearchConfig, SearchOutcome};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct StatsReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub config: ConfigEcho,
    pub exists: bool,
    pub per_depth: Vec<DepthRecord>,
    pub summary: Summary,
}

#[derive(Serialize)]
pub struct ConfigEcho {
    pub n: usize,
    pub depth: usize,
    pub workers: usize,
    pub minimize_through: Option<usize>,
}

#[derive(Serialize)]
pub struct DepthRecord {
    pub depth: usize,
    pub levels_remaining: usize,
    pub input_count: usize,
    pub generated: u64,
    pub lookahead_survivors: u64,
    pub sortable_survivors: u64,
    pub unique_count: usize,
    pub minimized_count: usize,
    pub wall_seconds: f64,
    pub cpu_seconds: f64,
}

#[derive(Serialize)]
pub struct Summary {
    pub r3_count: Option<usize>,
    pub lookahead_survivors: Option<u64>,
    pub sortable3: Option<u64>,
    pub sortable2: Option<u64>,
    pub runtime_seconds: f64,
    pub wall_seconds: f64,
}

impl From<&DepthStats> for DepthRecord {
    fn from(s: &DepthStats) -> Self {
        DepthRecord {
            depth: s.depth,
            levels_remaining: s.levels_remaining,
            input_count: s.input_count,
            generated: s.generated,
            lookahead_survivors: s.lookahead_survivors,
            sortable_survivors: s.sortable_survivors,
            unique_count: s.unique_count,
            minimized_count: s.minimized_count,
            wall_seconds: s.wall_seconds,
            cpu_seconds: s.cpu_seconds,
        }
    }
}

impl StatsReport {
    pub fn new(config: &SearchConfig, outcome: &SearchOutcome) -> Self {
        let stats = &outcome.stats;
        let remaining = |r: usize| stats.per_depth.iter().find(|s| s.levels_remaining == r);
        StatsReport {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            config: ConfigEcho {
                n: config.n,
                depth: config.depth,
                workers: config.workers,
                minimize_through: config.minimize_through,
            },
            exists: outcome.exists,
            per_depth: stats.per_depth.iter().map(DepthRecord::from).collect(),
            summary: Summary {
                r3_count: remaining(3).map(|s| s.input_count),
                lookahead_survivors: remaining(3).map(|s| s.lookahead_survivors),
                sortable3: remaining(3).map(|s| s.sortable_survivors),
                sortable2: remaining(2).map(|s| s.sortable_survivors),
                runtime_seconds: stats.cpu_seconds(),
                wall_seconds: stats.wall_seconds(),
            },
        }
    }
}
