//! Comparator networks on up to 16 channels.
//!
//! Binary words are stored in a `u32`. Channel `c` (1-based) is bit `c - 1`,
//! so the leftmost coordinate `x_1` is the least significant bit. A word is
//! sorted when all of its zeros sit on lower channels than its ones, i.e. the
//! set bits form a contiguous run ending at bit `n - 1`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::ParseError;

/// Largest supported channel count.
pub const MAX_CHANNELS: usize = 16;

/// A binary input or output vector, one bit per channel.
pub type Word = u32;

/// Mask with the low `n` bits set.
#[inline]
pub fn full_mask(n: usize) -> Word {
    if n >= 32 {
        Word::MAX
    } else {
        (1 << n) - 1
    }
}

/// Number of ones in `x`.
#[inline]
pub fn weight(x: Word) -> usize {
    x.count_ones() as usize
}

/// The sorted word of weight `k` on `n` channels.
#[inline]
pub fn sorted_word(n: usize, k: usize) -> Word {
    debug_assert!(k <= n);
    full_mask(n) & !full_mask(n - k)
}

/// True iff zeros precede ones in `x`.
#[inline]
pub fn is_sorted(x: Word, n: usize) -> bool {
    x == sorted_word(n, weight(x))
}

/// Complement-then-reverse: channel `c` of the result holds the negation of
/// channel `n + 1 - c` of `x`.
#[inline]
pub fn reflect_word(x: Word, n: usize) -> Word {
    (x.reverse_bits() >> (32 - n)) ^ full_mask(n)
}

/// A min-max comparator between two 1-based channels, `lo < hi`.
///
/// After the comparator, channel `lo` carries the minimum of the two values and
/// channel `hi` the maximum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Comparator {
    lo: u8,
    hi: u8,
}

impl Comparator {
    pub fn new(lo: usize, hi: usize) -> Option<Self> {
        if lo >= 1 && lo < hi && hi <= MAX_CHANNELS {
            Some(Comparator {
                lo: lo as u8,
                hi: hi as u8,
            })
        } else {
            None
        }
    }

    #[inline]
    pub fn lo(self) -> usize {
        self.lo as usize
    }

    #[inline]
    pub fn hi(self) -> usize {
        self.hi as usize
    }

    /// Bits of both channels.
    #[inline]
    pub fn mask(self) -> Word {
        (1 << (self.lo - 1)) | (1 << (self.hi - 1))
    }

    #[inline]
    pub fn apply(self, x: Word) -> Word {
        let lo = 1 << (self.lo - 1);
        let hi = 1 << (self.hi - 1);
        if x & lo != 0 && x & hi == 0 {
            x ^ (lo | hi)
        } else {
            x
        }
    }

    pub fn reflect(self, n: usize) -> Self {
        Comparator {
            lo: (n + 1 - self.hi()) as u8,
            hi: (n + 1 - self.lo()) as u8,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

const MAX_PER_LEVEL: usize = MAX_CHANNELS / 2;

/// A set of comparators on pairwise disjoint channels, kept sorted by `lo`.
///
/// Levels are ordered lexicographically by their comparator sequence, with a
/// proper prefix ordering before its extensions; the empty level is smallest.
#[derive(Clone, Copy)]
pub struct Level {
    len: u8,
    comps: [Comparator; MAX_PER_LEVEL],
}

impl Level {
    pub fn empty() -> Self {
        Level {
            len: 0,
            comps: [Comparator::default(); MAX_PER_LEVEL],
        }
    }

    /// Builds a level from arbitrary-order comparators. Fails if two
    /// comparators share a channel; the offending channel is returned.
    pub fn new(comparators: impl IntoIterator<Item = Comparator>) -> Result<Self, usize> {
        let mut level = Level::empty();
        let mut used: Word = 0;
        for c in comparators {
            if used & (1 << (c.lo() - 1)) != 0 {
                return Err(c.lo());
            }
            if used & (1 << (c.hi() - 1)) != 0 {
                return Err(c.hi());
            }
            used |= c.mask();
            level.comps[level.len as usize] = c;
            level.len += 1;
        }
        level.comps[..level.len as usize].sort_unstable();
        Ok(level)
    }

    pub fn single(c: Comparator) -> Self {
        let mut level = Level::empty();
        level.comps[0] = c;
        level.len = 1;
        level
    }

    #[inline]
    pub fn comparators(&self) -> &[Comparator] {
        &self.comps[..self.len as usize]
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Channels touched by this level.
    pub fn channel_mask(&self) -> Word {
        self.comparators().iter().fold(0, |m, c| m | c.mask())
    }

    /// Largest channel used, 0 for the empty level.
    pub fn max_channel(&self) -> usize {
        self.comparators().iter().map(|c| c.hi()).max().unwrap_or(0)
    }

    #[inline]
    pub fn apply(&self, x: Word) -> Word {
        self.comparators().iter().fold(x, |x, c| c.apply(x))
    }

    pub fn reflect(&self, n: usize) -> Self {
        Level::new(self.comparators().iter().map(|c| c.reflect(n)))
            .expect("reflection preserves disjointness")
    }
}

impl PartialEq for Level {
    fn eq(&self, other: &Self) -> bool {
        self.comparators() == other.comparators()
    }
}

impl Eq for Level {}

impl std::hash::Hash for Level {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.comparators().hash(state)
    }
}

impl PartialOrd for Level {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Level {
    fn cmp(&self, other: &Self) -> Ordering {
        self.comparators().cmp(other.comparators())
    }
}

impl fmt::Debug for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Level[{self}]")
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.comparators().iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// An `n`-channel comparator network: a sequence of levels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Network {
    n: usize,
    levels: Vec<Level>,
}

impl Network {
    /// The depth-0 network on `n` channels.
    pub fn empty(n: usize) -> Self {
        assert!((2..=MAX_CHANNELS).contains(&n), "channel count {n} out of range");
        Network {
            n,
            levels: Vec::new(),
        }
    }

    pub fn from_levels(n: usize, levels: Vec<Level>) -> Self {
        assert!((2..=MAX_CHANNELS).contains(&n), "channel count {n} out of range");
        for level in &levels {
            assert!(level.max_channel() <= n, "level {level} exceeds {n} channels");
        }
        Network { n, levels }
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    #[inline]
    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn comparator_count(&self) -> usize {
        self.levels.iter().map(Level::len).sum()
    }

    pub fn push(&mut self, level: Level) {
        assert!(level.max_channel() <= self.n);
        self.levels.push(level);
    }

    /// `self ⊕ level`.
    pub fn with_level(&self, level: Level) -> Network {
        let mut out = self.clone();
        out.push(level);
        out
    }

    /// `self ⊕ other`. Panics if the channel counts differ.
    pub fn concat(&self, other: &Network) -> Network {
        assert_eq!(self.n, other.n, "cannot concatenate networks of different width");
        let mut levels = self.levels.clone();
        levels.extend_from_slice(&other.levels);
        Network { n: self.n, levels }
    }

    /// Output of the network on a single input word, first level first.
    pub fn evaluate(&self, x: Word) -> Word {
        self.levels.iter().fold(x, |x, level| level.apply(x))
    }

    /// Zero-one principle: sorts every one of the `2^n` binary inputs.
    pub fn is_sorting_network(&self) -> bool {
        (0..=full_mask(self.n)).all(|x| is_sorted(self.evaluate(x), self.n))
    }

    /// Mirror image: every comparator `<i, j>` becomes `<n-j+1, n-i+1>`.
    pub fn reflect(&self) -> Network {
        Network {
            n: self.n,
            levels: self.levels.iter().map(|l| l.reflect(self.n)).collect(),
        }
    }

    /// Parses the text format: `n=<int>` on the first line, then one level
    /// per line as space-separated `lo:hi` pairs. A blank line is an empty
    /// level and `#` starts a comment that runs to the end of the line.
    pub fn parse(text: &str) -> Result<Network, ParseError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let n = loop {
            let Some((no, raw)) = lines.next() else {
                return Err(ParseError::new(1, "missing `n=` header"));
            };
            let line = strip_comment(raw).trim();
            if line.is_empty() && raw.trim_start().starts_with('#') {
                continue;
            }
            let value = line
                .strip_prefix("n=")
                .ok_or_else(|| ParseError::new(no, format!("expected `n=<int>`, found {line:?}")))?;
            let n: usize = value
                .trim()
                .parse()
                .map_err(|_| ParseError::new(no, format!("invalid channel count {value:?}")))?;
            if !(2..=MAX_CHANNELS).contains(&n) {
                return Err(ParseError::new(
                    no,
                    format!("channel count {n} outside 2..={MAX_CHANNELS}"),
                ));
            }
            break n;
        };

        let mut levels = Vec::new();
        for (no, raw) in lines {
            // Lines holding only a comment do not denote a level.
            if raw.trim_start().starts_with('#') {
                continue;
            }
            let line = strip_comment(raw);
            let mut comps = Vec::new();
            for token in line.split_whitespace() {
                let (a, b) = token
                    .split_once(':')
                    .ok_or_else(|| ParseError::new(no, format!("malformed comparator {token:?}")))?;
                let lo: usize = a
                    .parse()
                    .map_err(|_| ParseError::new(no, format!("malformed comparator {token:?}")))?;
                let hi: usize = b
                    .parse()
                    .map_err(|_| ParseError::new(no, format!("malformed comparator {token:?}")))?;
                if lo == 0 || hi == 0 || lo > n || hi > n {
                    return Err(ParseError::new(
                        no,
                        format!("channel out of range in {token:?} for n={n}"),
                    ));
                }
                if lo >= hi {
                    return Err(ParseError::new(
                        no,
                        format!("comparator {token:?} must satisfy lo < hi"),
                    ));
                }
                comps.push(Comparator::new(lo, hi).expect("range checked"));
            }
            let level = Level::new(comps).map_err(|ch| {
                ParseError::new(no, format!("channel {ch} used twice in one level"))
            })?;
            levels.push(level);
        }
        Ok(Network { n, levels })
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

impl fmt::Display for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={}", self.n)?;
        for level in &self.levels {
            writeln!(f, "{level}")?;
        }
        Ok(())
    }
}

impl PartialOrd for Network {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Networks compare by width, then level by level.
impl Ord for Network {
    fn cmp(&self, other: &Self) -> Ordering {
        self.n
            .cmp(&other.n)
            .then_with(|| self.levels.cmp(&other.levels))
    }
}

/// Every level on `n` channels (all matchings, including the empty one) in
/// ascending [`Level`] order. The count is the involution number `I(n)`.
pub fn enumerate_levels(n: usize) -> Vec<Level> {
    assert!((2..=MAX_CHANNELS).contains(&n), "channel count {n} out of range");
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(MAX_PER_LEVEL);
    matchings(n, 0, &mut current, &mut out);
    out.sort_unstable();
    out
}

fn matchings(n: usize, used: Word, current: &mut Vec<Comparator>, out: &mut Vec<Level>) {
    // Lowest unused channel is either left alone or paired with a higher one.
    let free = !used & full_mask(n);
    if free == 0 {
        out.push(Level::new(current.iter().copied()).expect("disjoint by construction"));
        return;
    }
    let first = free.trailing_zeros() as usize;
    matchings(n, used | (1 << first), current, out);
    let mut rest = free & !(1 << first);
    while rest != 0 {
        let second = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        current.push(Comparator::new(first + 1, second + 1).unwrap());
        matchings(n, used | (1 << first) | (1 << second), current, out);
        current.pop();
    }
}

/// Every comparator on `n` channels, ordered by `(lo, hi)`.
pub fn all_comparators(n: usize) -> Vec<Comparator> {
    (1..=n)
        .flat_map(|lo| (lo + 1..=n).map(move |hi| Comparator::new(lo, hi).unwrap()))
        .collect()
}
