//! Search for minimal-depth sorting networks over output sets.
//!
//! A comparator-network prefix is represented only by its output set. At each
//! depth the candidate sets are reduced to minimal representatives up to
//! channel permutation and reflection, and the last four levels are pruned
//! with cardinality bounds on per-channel from/to/reach sets derived from
//! pairs of outputs that differ in a single coordinate.

pub mod checkpoint;
pub mod error;
pub mod network;
pub mod oracle;
pub mod outset;
pub mod prune;
pub mod search;
pub mod subsume;

pub use error::{CheckpointError, OracleError, ParseError, SearchError};
pub use network::{enumerate_levels, Comparator, Level, Network, Word};
pub use outset::OutputSet;
pub use prune::{ChannelSets, LevelFilter};
pub use search::{
    default_workers, exists_sorting_network, generate_next_depth, optimal_depth, DepthStats, SearchConfig,
    SearchOutcome, SearchStats,
};
pub use subsume::{CandidatePool, ChannelPermutation, PoolEntry};
