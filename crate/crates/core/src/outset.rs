//! Output sets: the image of all `2^n` binary inputs under a network.
//!
//! A set is a bitset indexed by word code. Levels are applied to the whole
//! bitset at once: a comparator `<a, b>` moves exactly the members with bit
//! `a` set and bit `b` clear up by `2^(b-1) - 2^(a-1)` positions.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::OnceLock;

use crate::error::ParseError;
use crate::network::{
    full_mask, reflect_word, sorted_word, Comparator, Level, Network, Word,
    MAX_CHANNELS,
};

/// Number of `u64` words holding a bitset over `2^n` codes.
#[inline]
pub fn word_count(n: usize) -> usize {
    if n <= 6 {
        1
    } else {
        1 << (n - 6)
    }
}

/// `LOW_WEIGHT[j]`: positions `0..64` whose 6-bit index has weight `j`. Code
/// `64 * w + b` has weight `popcount(w) + popcount(b)`, so these masks split
/// any bitset word into weight classes.
pub(crate) const LOW_WEIGHT: [u64; 7] = {
    let mut masks = [0u64; 7];
    let mut b = 0;
    while b < 64 {
        masks[(b as u64).count_ones() as usize] |= 1 << b;
        b += 1;
    }
    masks
};

/// `LOW_CHANNEL[i]`: positions `0..64` whose index has bit `i` set.
pub(crate) const LOW_CHANNEL: [u64; 6] = [
    0xaaaa_aaaa_aaaa_aaaa,
    0xcccc_cccc_cccc_cccc,
    0xf0f0_f0f0_f0f0_f0f0,
    0xff00_ff00_ff00_ff00,
    0xffff_0000_ffff_0000,
    0xffff_ffff_0000_0000,
];

/// Per-comparator mover masks for one channel count.
pub(crate) struct Tables {
    /// `movers[a * n + b]`: codes with bit `a` set and bit `b` clear.
    movers: Vec<Vec<u64>>,
}

impl Tables {
    fn build(n: usize) -> Tables {
        let words = word_count(n);
        let channel = |i: usize| -> Vec<u64> {
            (0..words)
                .map(|w| {
                    if i < 6 {
                        LOW_CHANNEL[i]
                    } else if w >> (i - 6) & 1 == 1 {
                        u64::MAX
                    } else {
                        0
                    }
                })
                .collect()
        };
        let mut movers = vec![Vec::new(); n * n];
        for a in 0..n {
            let ca = channel(a);
            for b in a + 1..n {
                movers[a * n + b] = ca.iter().zip(channel(b)).map(|(ma, mb)| ma & !mb).collect();
            }
        }
        Tables { movers }
    }

    #[inline]
    fn movers(&self, n: usize, c: Comparator) -> &[u64] {
        &self.movers[(c.lo() - 1) * n + c.hi() - 1]
    }
}

pub(crate) fn tables(n: usize) -> &'static Tables {
    static TABLES: [OnceLock<Tables>; MAX_CHANNELS + 1] = [const { OnceLock::new() }; MAX_CHANNELS + 1];
    TABLES[n].get_or_init(|| Tables::build(n))
}

/// Applies one comparator in place to a raw bitset.
#[inline]
pub(crate) fn apply_comparator_bits(bits: &mut [u64], n: usize, t: &Tables, c: Comparator) {
    let movers = t.movers(n, c);
    let delta = (1usize << (c.hi() - 1)) - (1usize << (c.lo() - 1));
    let (word_shift, bit_shift) = (delta >> 6, delta & 63);
    let words = bits.len();
    // Destinations never lie in `movers`, so a single ascending pass is safe.
    for i in 0..words {
        let moving = bits[i] & movers[i];
        if moving == 0 {
            continue;
        }
        bits[i] ^= moving;
        bits[i + word_shift] |= moving << bit_shift;
        if bit_shift != 0 && i + word_shift + 1 < words {
            bits[i + word_shift + 1] |= moving >> (64 - bit_shift);
        }
    }
}

#[inline]
pub(crate) fn apply_level_bits(bits: &mut [u64], n: usize, t: &Tables, level: &Level) {
    for &c in level.comparators() {
        apply_comparator_bits(bits, n, t, c);
    }
}

/// The set of outputs `S_C` of some network on `n` channels.
///
/// Invariants: every sorted word is a member, `cardinality` equals the
/// population count, and `weight_counts[k]` counts the members of weight `k`.
#[derive(Clone)]
pub struct OutputSet {
    n: u8,
    cardinality: u32,
    weight_counts: [u16; MAX_CHANNELS + 1],
    bits: Box<[u64]>,
}

impl OutputSet {
    /// All `2^n` words: the output set of the empty network.
    pub fn full(n: usize) -> Self {
        assert!((2..=MAX_CHANNELS).contains(&n));
        let mut bits = vec![u64::MAX; word_count(n)];
        if n < 6 {
            bits[0] = (1u64 << (1 << n)) - 1;
        }
        Self::from_bits(n, bits.into_boxed_slice())
    }

    /// `T_n`, the `n + 1` sorted words.
    pub fn sorted(n: usize) -> Self {
        assert!((2..=MAX_CHANNELS).contains(&n));
        let mut bits = vec![0u64; word_count(n)].into_boxed_slice();
        for k in 0..=n {
            let x = sorted_word(n, k) as usize;
            bits[x >> 6] |= 1 << (x & 63);
        }
        Self::from_bits(n, bits)
    }

    /// Builds a set from raw members, which must include every sorted word.
    pub fn from_members(n: usize, members: impl IntoIterator<Item = Word>) -> Option<Self> {
        if !(2..=MAX_CHANNELS).contains(&n) {
            return None;
        }
        let mut bits = vec![0u64; word_count(n)].into_boxed_slice();
        for x in members {
            if x > full_mask(n) {
                return None;
            }
            bits[x as usize >> 6] |= 1 << (x & 63);
        }
        let set = Self::from_bits(n, bits);
        (0..=n)
            .all(|k| set.contains(sorted_word(n, k)))
            .then_some(set)
    }

    pub(crate) fn from_bits(n: usize, bits: Box<[u64]>) -> Self {
        debug_assert_eq!(bits.len(), word_count(n));
        let mut weight_counts = [0u16; MAX_CHANNELS + 1];
        for (w, &word) in bits.iter().enumerate() {
            if word == 0 {
                continue;
            }
            let base = w.count_ones() as usize;
            for (j, mask) in LOW_WEIGHT.iter().enumerate() {
                weight_counts[base + j] += (word & mask).count_ones() as u16;
            }
        }
        OutputSet {
            n: n as u8,
            cardinality: weight_counts.iter().map(|&c| c as u32).sum(),
            weight_counts,
            bits,
        }
    }

    /// `S_C`, computed by extending the full set one level at a time.
    pub fn of_network(net: &Network) -> Self {
        let n = net.channels();
        let t = tables(n);
        let mut bits = OutputSet::full(n).bits;
        for level in net.levels() {
            apply_level_bits(&mut bits, n, t, level);
        }
        Self::from_bits(n, bits)
    }

    /// `{ L(x) | x ∈ self }`; equals the output set of `A ⊕ L` when `self` is
    /// the output set of `A`.
    pub fn extend(&self, level: &Level) -> Self {
        let n = self.channels();
        debug_assert!(level.max_channel() <= n);
        let mut bits = self.bits.clone();
        apply_level_bits(&mut bits, n, tables(n), level);
        Self::from_bits(n, bits)
    }

    /// Member-wise complement-then-reverse. Equals the output set of the
    /// reflected network.
    pub fn reflect(&self) -> Self {
        let n = self.channels();
        let mut bits = vec![0u64; self.bits.len()].into_boxed_slice();
        for x in self.members() {
            let y = reflect_word(x, n) as usize;
            bits[y >> 6] |= 1 << (y & 63);
        }
        let mut weight_counts = [0u16; MAX_CHANNELS + 1];
        for k in 0..=n {
            weight_counts[k] = self.weight_counts[n - k];
        }
        OutputSet {
            n: self.n,
            cardinality: self.cardinality,
            weight_counts,
            bits,
        }
    }

    #[inline]
    pub fn channels(&self) -> usize {
        self.n as usize
    }

    #[inline]
    pub fn cardinality(&self) -> usize {
        self.cardinality as usize
    }

    /// Members per weight class, indices `0..=n`.
    #[inline]
    pub fn weight_counts(&self) -> &[u16] {
        &self.weight_counts[..=self.channels()]
    }

    #[inline]
    pub fn contains(&self, x: Word) -> bool {
        let x = x as usize;
        x < (1 << self.n) && self.bits[x >> 6] >> (x & 63) & 1 == 1
    }

    #[inline]
    pub(crate) fn bits(&self) -> &[u64] {
        &self.bits
    }

    /// Members in ascending code order.
    pub fn members(&self) -> Members<'_> {
        Members {
            bits: &self.bits,
            word: 0,
            current: self.bits[0],
        }
    }

    /// A sorting network's output set is exactly `T_n`, which is the only
    /// network output set with `n + 1` members.
    pub fn is_sorted_set(&self) -> bool {
        self.cardinality() == self.channels() + 1
    }

    pub fn is_subset_of(&self, other: &OutputSet) -> bool {
        self.n == other.n && self.bits.iter().zip(other.bits.iter()).all(|(a, b)| a & !b == 0)
    }

    /// A 64-bit digest of the membership bitset. Equal sets have equal keys;
    /// distinct sets may collide, so callers compare bitsets on a match.
    pub fn dedup_key(&self) -> u64 {
        digest(self.channels(), &self.bits)
    }

    /// Text form: `n=<int> count=<int>` followed by one lowercase hex code
    /// per line in ascending order.
    pub fn serialize(&self) -> String {
        let mut out = format!("n={} count={}\n", self.n, self.cardinality);
        for x in self.members() {
            out.push_str(&format!("{x:x}\n"));
        }
        out
    }

    /// Parses [`OutputSet::serialize`] output from numbered lines, leaving the
    /// iterator just past the last member.
    pub fn parse_lines<'a>(
        lines: &mut impl Iterator<Item = (usize, &'a str)>,
    ) -> Result<OutputSet, ParseError> {
        let (no, header) = lines
            .next()
            .ok_or_else(|| ParseError::new(0, "missing output-set header"))?;
        let (n, count) = parse_set_header(header).ok_or_else(|| {
            ParseError::new(no, format!("expected `n=<int> count=<int>`, found {header:?}"))
        })?;
        if !(2..=MAX_CHANNELS).contains(&n) {
            return Err(ParseError::new(no, format!("channel count {n} out of range")));
        }
        let mut bits = vec![0u64; word_count(n)].into_boxed_slice();
        let mut previous: Option<Word> = None;
        for i in 0..count {
            let (no, line) = lines.next().ok_or_else(|| {
                ParseError::new(no + i, format!("expected {count} members, found {i}"))
            })?;
            let x = Word::from_str_radix(line.trim(), 16)
                .map_err(|_| ParseError::new(no, format!("invalid member code {line:?}")))?;
            if x > full_mask(n) {
                return Err(ParseError::new(no, format!("member {x:x} exceeds {n} channels")));
            }
            if previous.is_some_and(|p| p >= x) {
                return Err(ParseError::new(no, "members not strictly ascending"));
            }
            previous = Some(x);
            bits[x as usize >> 6] |= 1 << (x & 63);
        }
        let set = OutputSet::from_bits(n, bits);
        if let Some(k) = (0..=n).find(|&k| !set.contains(sorted_word(n, k))) {
            return Err(ParseError::new(
                no,
                format!("sorted word of weight {k} missing from output set"),
            ));
        }
        Ok(set)
    }

    pub fn parse(text: &str) -> Result<OutputSet, ParseError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        OutputSet::parse_lines(&mut lines)
    }

    /// Checks the structural invariants; used by tests and checkpoint loading.
    pub fn check_invariants(&self) -> bool {
        let n = self.channels();
        let recount = OutputSet::from_bits(n, self.bits.clone());
        recount.weight_counts == self.weight_counts
            && recount.cardinality == self.cardinality
            && (0..=n).all(|k| self.contains(sorted_word(n, k)))
            && self.members().all(|x| x <= full_mask(n))
    }
}

fn parse_set_header(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let n = parts.next()?.strip_prefix("n=")?.parse().ok()?;
    let count = parts.next()?.strip_prefix("count=")?.parse().ok()?;
    parts.next().is_none().then_some((n, count))
}

pub(crate) fn digest(n: usize, bits: &[u64]) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ n as u64;
    for &w in bits {
        h = (h.rotate_left(23) ^ w).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    }
    h ^= h >> 29;
    h = h.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    h ^ (h >> 32)
}

impl PartialEq for OutputSet {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.bits == other.bits
    }
}

impl Eq for OutputSet {}

impl Hash for OutputSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        state.write_u64(self.dedup_key());
    }
}

impl fmt::Debug for OutputSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OutputSet(n={}, |S|={}, {{", self.n, self.cardinality)?;
        for (i, x) in self.members().take(16).enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            for c in 0..self.channels() {
                f.write_str(if x >> c & 1 == 1 { "1" } else { "0" })?;
            }
        }
        if self.cardinality > 16 {
            f.write_str(", ...")?;
        }
        f.write_str("})")
    }
}

pub struct Members<'a> {
    bits: &'a [u64],
    word: usize,
    current: u64,
}

impl Iterator for Members<'_> {
    type Item = Word;

    #[inline]
    fn next(&mut self) -> Option<Word> {
        while self.current == 0 {
            self.word += 1;
            if self.word >= self.bits.len() {
                return None;
            }
            self.current = self.bits[self.word];
        }
        let bit = self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        Some((self.word * 64 + bit) as Word)
    }
}
