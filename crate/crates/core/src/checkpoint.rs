//! On-disk snapshots of the candidate pool after each completed depth.
//!
//! Each depth gets its own directory `depth-<t>` holding `meta.txt` (format
//! version, parameters, statistics and a checksum of the pool file) and
//! `pool.txt` (one witness network and output set per entry). The pool file
//! is written first and both files are renamed into place, so a directory
//! with a `meta.txt` always describes a complete pool.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use crate::error::CheckpointError;
use crate::network::Network;
use crate::outset::OutputSet;
use crate::search::{DepthStats, SearchStats};
use crate::subsume::{CandidatePool, PoolEntry};

pub const FORMAT_VERSION: u32 = 1;

const META: &str = "meta.txt";
const POOL: &str = "pool.txt";
const ENTRY_MARK: &str = "@entry";
const SET_MARK: &str = "@set";

/// Everything needed to resume a search after depth `depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub n: usize,
    pub depth: usize,
    pub target_depth: usize,
    pub pool: CandidatePool,
    pub stats: SearchStats,
}

pub fn depth_dir(dir: &Path, depth: usize) -> PathBuf {
    dir.join(format!("depth-{depth}"))
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CheckpointError + '_ {
    move |source| CheckpointError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn write_atomic(path: &Path, contents: &str) -> Result<(), CheckpointError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn stats_line(s: &DepthStats) -> String {
    format!(
        "stats={} {} {} {} {} {} {} {} {} {}",
        s.depth,
        s.levels_remaining,
        s.input_count,
        s.generated,
        s.lookahead_survivors,
        s.sortable_survivors,
        s.unique_count,
        s.minimized_count,
        s.wall_seconds,
        s.cpu_seconds
    )
}

fn parse_stats(text: &str) -> Option<DepthStats> {
    let f: Vec<&str> = text.split_whitespace().collect();
    if f.len() != 10 {
        return None;
    }
    Some(DepthStats {
        depth: f[0].parse().ok()?,
        levels_remaining: f[1].parse().ok()?,
        input_count: f[2].parse().ok()?,
        generated: f[3].parse().ok()?,
        lookahead_survivors: f[4].parse().ok()?,
        sortable_survivors: f[5].parse().ok()?,
        unique_count: f[6].parse().ok()?,
        minimized_count: f[7].parse().ok()?,
        wall_seconds: f[8].parse().ok()?,
        cpu_seconds: f[9].parse().ok()?,
    })
}

/// Writes the checkpoint for `cp.depth` under `dir`.
pub fn save(dir: &Path, cp: &Checkpoint) -> Result<(), CheckpointError> {
    let target = depth_dir(dir, cp.depth);
    fs::create_dir_all(&target).map_err(io_err(&target))?;

    let mut pool = String::new();
    for (i, entry) in cp.pool.entries.iter().enumerate() {
        pool.push_str(&format!("{ENTRY_MARK} {i}\n"));
        pool.push_str(&entry.witness.to_string());
        pool.push_str(SET_MARK);
        pool.push('\n');
        pool.push_str(&entry.set.serialize());
    }
    let mut meta = format!(
        "format={FORMAT_VERSION}\nn={}\ndepth={}\ntarget_depth={}\ncount={}\nchecksum={:016x}\n",
        cp.n,
        cp.depth,
        cp.target_depth,
        cp.pool.len(),
        fnv1a(pool.as_bytes())
    );
    for s in &cp.stats.per_depth {
        meta.push_str(&stats_line(s));
        meta.push('\n');
    }
    write_atomic(&target.join(POOL), &pool)?;
    write_atomic(&target.join(META), &meta)
}

/// Reads the checkpoint for `depth`, checking it against `n` and
/// `target_depth`.
pub fn load(dir: &Path, n: usize, depth: usize, target_depth: usize) -> Result<Checkpoint, CheckpointError> {
    let base = depth_dir(dir, depth);
    let meta_path = base.join(META);
    let pool_path = base.join(POOL);
    let meta = fs::read_to_string(&meta_path).map_err(io_err(&meta_path))?;

    let mut fields: Vec<(&str, &str)> = Vec::new();
    let mut stats = SearchStats::default();
    for line in meta.lines().filter(|l| !l.trim().is_empty()) {
        let Some((key, value)) = line.split_once('=') else {
            return Err(CheckpointError::Truncated {
                path: meta_path,
                detail: format!("malformed line `{line}`"),
            });
        };
        if key == "stats" {
            let s = parse_stats(value).ok_or_else(|| CheckpointError::Truncated {
                path: meta_path.clone(),
                detail: format!("malformed statistics `{value}`"),
            })?;
            stats.per_depth.push(s);
        } else {
            fields.push((key, value.trim()));
        }
    }
    let field = |name: &'static str| -> Result<&str, CheckpointError> {
        fields
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| CheckpointError::Truncated {
                path: meta_path.clone(),
                detail: format!("missing `{name}`"),
            })
    };
    let number = |name: &'static str| -> Result<u64, CheckpointError> {
        let v = field(name)?;
        v.parse().map_err(|_| CheckpointError::Truncated {
            path: meta_path.clone(),
            detail: format!("`{name}` is not a number: `{v}`"),
        })
    };

    let version = number("format")?;
    if version != FORMAT_VERSION as u64 {
        return Err(CheckpointError::Version {
            path: meta_path,
            found: version as u32,
            expected: FORMAT_VERSION,
        });
    }
    for (name, expected) in [("n", n), ("depth", depth), ("target_depth", target_depth)] {
        let found = number(name)? as usize;
        if found != expected {
            return Err(CheckpointError::Mismatch {
                path: meta_path,
                field: name,
                found,
                expected,
            });
        }
    }
    let count = number("count")? as usize;
    let recorded = u64::from_str_radix(field("checksum")?, 16).map_err(|_| CheckpointError::Truncated {
        path: meta_path.clone(),
        detail: "malformed checksum".into(),
    })?;

    let pool_text = fs::read_to_string(&pool_path).map_err(io_err(&pool_path))?;
    let computed = fnv1a(pool_text.as_bytes());
    if computed != recorded {
        return Err(CheckpointError::Checksum {
            path: pool_path,
            recorded,
            computed,
        });
    }
    let entries = parse_pool(&pool_path, &pool_text, n, depth)?;
    if entries.len() != count {
        return Err(CheckpointError::Truncated {
            path: pool_path,
            detail: format!("expected {count} entries, found {}", entries.len()),
        });
    }
    Ok(Checkpoint {
        n,
        depth,
        target_depth,
        pool: CandidatePool::new(entries),
        stats,
    })
}

fn parse_pool(path: &Path, text: &str, n: usize, depth: usize) -> Result<Vec<PoolEntry>, CheckpointError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    let mut entries = Vec::new();
    while let Some((line_no, line)) = lines.next() {
        if line.trim().is_empty() {
            continue;
        }
        let index = entries.len();
        let corrupt = |detail: String| CheckpointError::Corrupt {
            path: path.to_path_buf(),
            index,
            detail,
        };
        if line.trim() != format!("{ENTRY_MARK} {index}") {
            return Err(corrupt(format!("line {line_no}: expected `{ENTRY_MARK} {index}`")));
        }
        let mut net_text = String::new();
        loop {
            match lines.next() {
                Some((_, l)) if l.trim() == SET_MARK => break,
                Some((_, l)) => {
                    net_text.push_str(l);
                    net_text.push('\n');
                }
                None => {
                    return Err(CheckpointError::Truncated {
                        path: path.to_path_buf(),
                        detail: format!("entry {index} has no output set"),
                    })
                }
            }
        }
        let witness = Network::parse(&net_text).map_err(|source| CheckpointError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        let set = OutputSet::parse_lines(&mut lines).map_err(|source| CheckpointError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        if witness.channels() != n || set.channels() != n || witness.depth() != depth {
            return Err(corrupt("width or depth does not match the checkpoint".into()));
        }
        if OutputSet::of_network(&witness) != set {
            return Err(corrupt("output set differs from its witness".into()));
        }
        entries.push(PoolEntry::new(set, witness));
    }
    Ok(entries)
}

/// The deepest checkpoint of at most `target_depth` levels under `dir`, if any.
pub fn load_latest(dir: &Path, n: usize, target_depth: usize) -> Result<Option<Checkpoint>, CheckpointError> {
    for depth in (1..=target_depth).rev() {
        if depth_dir(dir, depth).join(META).exists() {
            return load(dir, n, depth, target_depth).map(Some);
        }
    }
    Ok(None)
}
