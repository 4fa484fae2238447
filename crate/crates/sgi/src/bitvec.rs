//! Rank/select bit vectors.
//!
//! Two storage modes share one query interface:
//!
//! * **plain** — the raw bits plus a two-level rank directory (superblocks of
//!   4096 bits holding cumulative 64-bit counts, blocks of 256 bits holding
//!   16-bit in-superblock counts).  Select binary-searches the superblock
//!   directory, then scans at most 16 blocks and 4 words.  Directory overhead
//!   is under 8% of the payload.
//! * **sparse** — a monotone encoding of the 1-positions split into low bits
//!   (packed verbatim) and high bits (unary bucket counts over a plain
//!   directory).  Far smaller than plain storage when 1s are rare.
//!
//! Public positions are 1-based: position `p` means the `p`-th bit,
//! `1 ≤ p ≤ length`.

use crate::error::{Result, SgiError};

const SUPER_BITS: usize = 4096;
const BLOCK_BITS: usize = 256;
const WORDS_PER_BLOCK: usize = BLOCK_BITS / 64;

/// Growable sequence of raw bits (0-based internal addressing).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    /// Creates an empty bit sequence.
    pub fn new() -> Self {
        Self::default()
    }

    /// Creates an all-zero sequence of `len` bits.
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(64)] }
    }

    /// Builds from a slice of booleans.
    pub fn from_bools(bits: &[bool]) -> Self {
        let mut bv = BitVec::new();
        for &b in bits {
            bv.push(b);
        }
        bv
    }

    /// Builds `len` bits by evaluating `f` at each 0-based index.
    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut bv = BitVec::new();
        for i in 0..len {
            bv.push(f(i));
        }
        bv
    }

    /// Appends one bit.
    pub fn push(&mut self, bit: bool) {
        let word = self.len / 64;
        if word == self.words.len() {
            self.words.push(0);
        }
        if bit {
            self.words[word] |= 1u64 << (self.len % 64);
        }
        self.len += 1;
    }

    /// Reads the bit at 0-based index `i`.
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Sets the bit at 0-based index `i`.
    pub fn set(&mut self, i: usize, bit: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    /// Number of bits.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when no bits are stored.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Total number of 1 bits.
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Backing words, little-endian bit order within each word.
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Iterates the bits in order.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

/// Position of the `k`-th (1-based) set bit of `word`; `k ≤ popcount(word)`.
fn select_in_word(word: u64, k: usize) -> usize {
    debug_assert!(k >= 1 && k <= word.count_ones() as usize);
    let mut w = word;
    let mut remaining = k;
    loop {
        let tz = w.trailing_zeros() as usize;
        if remaining == 1 {
            return tz;
        }
        remaining -= 1;
        w &= w - 1;
    }
}

/// Two-level rank directory over a fixed word array.
#[derive(Debug, Clone)]
struct PlainDir {
    len: usize,
    words: Vec<u64>,
    /// Cumulative 1s before each superblock; last entry is the total.
    super_ranks: Vec<u64>,
    /// 1s between the enclosing superblock start and each block start.
    block_ranks: Vec<u16>,
    ones: usize,
}

impl PlainDir {
    fn build(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), len.div_ceil(64));
        let n_super = len.div_ceil(SUPER_BITS);
        let n_block = len.div_ceil(BLOCK_BITS);
        let mut super_ranks = Vec::with_capacity(n_super + 1);
        let mut block_ranks = Vec::with_capacity(n_block);
        let mut total = 0u64;
        let mut in_super = 0u16;
        for block in 0..n_block {
            if block % (SUPER_BITS / BLOCK_BITS) == 0 {
                super_ranks.push(total);
                in_super = 0;
            }
            block_ranks.push(in_super);
            let start = block * WORDS_PER_BLOCK;
            let end = (start + WORDS_PER_BLOCK).min(words.len());
            let block_ones: u32 = words[start..end].iter().map(|w| w.count_ones()).sum();
            total += block_ones as u64;
            in_super += block_ones as u16;
        }
        if n_block == 0 {
            super_ranks.push(0);
        }
        super_ranks.push(total);
        PlainDir { len, words, super_ranks, block_ranks, ones: total as usize }
    }

    fn access(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// 1s among the first `pos` bits (0-based exclusive, `0 ≤ pos ≤ len`).
    fn rank1(&self, pos: usize) -> usize {
        debug_assert!(pos <= self.len);
        if pos == 0 {
            return 0;
        }
        let block = pos / BLOCK_BITS;
        let mut r = if block < self.block_ranks.len() {
            self.super_ranks[pos / SUPER_BITS] as usize + self.block_ranks[block] as usize
        } else {
            // pos == len at an exact block boundary past the last block.
            return self.ones;
        };
        let mut bit = block * BLOCK_BITS;
        let mut word = bit / 64;
        while bit + 64 <= pos {
            r += self.words[word].count_ones() as usize;
            word += 1;
            bit += 64;
        }
        if bit < pos {
            let mask = (1u64 << (pos - bit)) - 1;
            r += (self.words[word] & mask).count_ones() as usize;
        }
        r
    }

    fn rank0(&self, pos: usize) -> usize {
        pos - self.rank1(pos)
    }

    /// 0-based position of the `k`-th 1 (`1 ≤ k ≤ ones`).
    fn select1(&self, k: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.ones);
        // Superblock: last one with cumulative rank < k.
        let sb = self.super_ranks.partition_point(|&r| (r as usize) < k) - 1;
        let mut remaining = k - self.super_ranks[sb] as usize;
        let first_block = sb * (SUPER_BITS / BLOCK_BITS);
        let last_block = ((sb + 1) * (SUPER_BITS / BLOCK_BITS)).min(self.block_ranks.len());
        let mut block = first_block;
        for b in (first_block..last_block).rev() {
            if (self.block_ranks[b] as usize) < remaining {
                block = b;
                break;
            }
        }
        remaining -= self.block_ranks[block] as usize;
        let mut word = block * WORDS_PER_BLOCK;
        loop {
            let ones = self.words[word].count_ones() as usize;
            if ones >= remaining {
                return word * 64 + select_in_word(self.words[word], remaining);
            }
            remaining -= ones;
            word += 1;
        }
    }

    /// 0-based position of the `k`-th 0 (`1 ≤ k ≤ len - ones`).
    fn select0(&self, k: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.len - self.ones);
        let zeros_before_super = |sb: usize| sb * SUPER_BITS - self.super_ranks[sb] as usize;
        let max_sb = self.len / SUPER_BITS;
        let (mut lo, mut hi) = (0usize, max_sb);
        // Last superblock whose preceding zero count is < k.
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if zeros_before_super(mid.min(max_sb)) < k {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        let sb = lo;
        let mut remaining = k - zeros_before_super(sb);
        let first_block = sb * (SUPER_BITS / BLOCK_BITS);
        let last_block = ((sb + 1) * (SUPER_BITS / BLOCK_BITS)).min(self.block_ranks.len());
        let mut block = first_block;
        for b in (first_block..last_block).rev() {
            let zeros = (b - first_block) * BLOCK_BITS - self.block_ranks[b] as usize;
            if zeros < remaining {
                block = b;
                remaining = remaining - zeros;
                break;
            }
        }
        let mut word = block * WORDS_PER_BLOCK;
        loop {
            let bits_here = 64.min(self.len - word * 64);
            let inv = !self.words[word] & if bits_here == 64 { !0 } else { (1u64 << bits_here) - 1 };
            let zeros = inv.count_ones() as usize;
            if zeros >= remaining {
                return word * 64 + select_in_word(inv, remaining);
            }
            remaining -= zeros;
            word += 1;
        }
    }

    /// Directory overhead in bits, beyond the raw payload.
    fn overhead_bits(&self) -> u64 {
        (self.super_ranks.len() * 64 + self.block_ranks.len() * 16) as u64
    }

    fn payload_bits(&self) -> u64 {
        (self.words.len() * 64) as u64
    }
}

/// Monotone (Elias–Fano style) encoding of the 1-positions.
#[derive(Debug, Clone)]
struct SparseDir {
    len: usize,
    ones: usize,
    low_width: u32,
    /// `ones * low_width` packed low bits.
    low: Vec<u64>,
    /// Unary bucket counts: one 1 per element, one 0 per bucket terminator.
    high: PlainDir,
}

impl SparseDir {
    fn low_width_for(len: usize, ones: usize) -> u32 {
        if ones == 0 {
            0
        } else {
            let ratio = (len / ones).max(1);
            63 - (ratio as u64).leading_zeros() // floor(log2(ratio))
        }
    }

    fn build(bits: &BitVec) -> Self {
        let len = bits.len();
        let ones = bits.count_ones();
        let low_width = Self::low_width_for(len, ones);
        let mut low = vec![0u64; ((ones as u64 * low_width as u64).div_ceil(64)) as usize];
        let high_len = ones + (len >> low_width) + 1;
        let mut high = BitVec::zeros(high_len);
        let mut k = 0usize;
        for p in 0..len {
            if bits.get(p) {
                if low_width > 0 {
                    let val = (p as u64) & ((1u64 << low_width) - 1);
                    store_bits(&mut low, k as u64 * low_width as u64, low_width, val);
                }
                high.set((p >> low_width) + k, true);
                k += 1;
            }
        }
        let BitVec { len: hlen, words: hwords } = high;
        SparseDir { len, ones, low_width, low, high: PlainDir::build(hlen, hwords) }
    }

    fn low_value(&self, k: usize) -> u64 {
        if self.low_width == 0 {
            0
        } else {
            load_bits(&self.low, k as u64 * self.low_width as u64, self.low_width)
        }
    }

    /// 0-based position of the `k`-th 1 (`1 ≤ k ≤ ones`).
    fn select1(&self, k: usize) -> usize {
        let q = self.high.select1(k);
        let bucket = q - (k - 1);
        (bucket << self.low_width) | self.low_value(k - 1) as usize
    }

    /// 1s among the first `pos` bits (`0 ≤ pos ≤ len`).
    fn rank1(&self, pos: usize) -> usize {
        if self.ones == 0 || pos == 0 {
            return 0;
        }
        if pos > self.len {
            unreachable!("callers bound pos");
        }
        let bucket = pos >> self.low_width;
        let start = if bucket == 0 {
            0
        } else {
            // 1s of `high` strictly before the bucket-th terminator are
            // exactly the elements in buckets 0..bucket.
            self.high.select0(bucket) - (bucket - 1)
        };
        let end = self.high.select0(bucket + 1) - bucket;
        let target = (pos as u64) & if self.low_width == 0 { 0 } else { (1u64 << self.low_width) - 1 };
        // Elements within one bucket are sorted by their low bits.
        let (mut lo, mut hi) = (start, end);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.low_value(mid) < target {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo
    }

    fn access(&self, pos: usize) -> bool {
        self.rank1(pos + 1) - self.rank1(pos) == 1
    }

    /// 0-based position of the `k`-th 0 of the *original* vector, by binary
    /// search over rank0 (logarithmic, adequate for the few tables using it).
    fn select0(&self, k: usize) -> usize {
        let (mut lo, mut hi) = (1usize, self.len);
        while lo < hi {
            let mid = (lo + hi) / 2;
            if mid - self.rank1(mid) < k {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo - 1
    }

    fn size_bits(&self) -> u64 {
        (self.low.len() * 64) as u64 + self.high.payload_bits() + self.high.overhead_bits() + 128
    }
}

/// Writes `width ≤ 64` bits of `val` at absolute bit offset `off`.
fn store_bits(words: &mut [u64], off: u64, width: u32, val: u64) {
    debug_assert!(width <= 64);
    let word = (off / 64) as usize;
    let shift = (off % 64) as u32;
    words[word] |= val << shift;
    if shift + width > 64 {
        words[word + 1] |= val >> (64 - shift);
    }
}

/// Reads `width ≤ 64` bits at absolute bit offset `off`.
fn load_bits(words: &[u64], off: u64, width: u32) -> u64 {
    debug_assert!(width >= 1 && width <= 64);
    let word = (off / 64) as usize;
    let shift = (off % 64) as u32;
    let mut v = words[word] >> shift;
    if shift + width > 64 {
        v |= words[word + 1] << (64 - shift);
    }
    if width == 64 {
        v
    } else {
        v & ((1u64 << width) - 1)
    }
}

/// Storage mode of a rank/select vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Raw bits plus rank directories.
    Plain,
    /// Positions of the 1s, monotone-encoded.
    Sparse,
}

#[derive(Debug, Clone)]
enum Repr {
    Plain(PlainDir),
    Sparse(SparseDir),
}

/// Immutable rank/select structure over a bit sequence.
///
/// All public positions are 1-based.
#[derive(Debug, Clone)]
pub struct RankSelect {
    repr: Repr,
}

impl RankSelect {
    /// Builds over `bits` in the requested mode.
    ///
    /// Errors with [`SgiError::EmptyBitVector`] when `bits` is empty.
    pub fn build(bits: &BitVec, mode: Mode) -> Result<Self> {
        if bits.is_empty() {
            return Err(SgiError::EmptyBitVector);
        }
        let repr = match mode {
            Mode::Plain => Repr::Plain(PlainDir::build(bits.len(), bits.words.clone())),
            Mode::Sparse => Repr::Sparse(SparseDir::build(bits)),
        };
        Ok(RankSelect { repr })
    }

    /// Builds, choosing sparse storage when 1s are rare enough to profit.
    pub fn build_auto(bits: &BitVec) -> Result<Self> {
        if bits.is_empty() {
            return Err(SgiError::EmptyBitVector);
        }
        let mode = if bits.count_ones() * 8 <= bits.len() { Mode::Sparse } else { Mode::Plain };
        Self::build(bits, mode)
    }

    /// Storage mode.
    pub fn mode(&self) -> Mode {
        match self.repr {
            Repr::Plain(_) => Mode::Plain,
            Repr::Sparse(_) => Mode::Sparse,
        }
    }

    /// Number of bits in the underlying sequence.
    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Plain(p) => p.len,
            Repr::Sparse(s) => s.len,
        }
    }

    /// Never true: empty vectors cannot be built.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of 1 bits.
    pub fn ones(&self) -> usize {
        match &self.repr {
            Repr::Plain(p) => p.ones,
            Repr::Sparse(s) => s.ones,
        }
    }

    /// Number of occurrences of `lab`.
    pub fn count(&self, lab: bool) -> usize {
        if lab {
            self.ones()
        } else {
            self.len() - self.ones()
        }
    }

    /// The bit at 1-based position `pos`.
    pub fn access(&self, pos: usize) -> Result<bool> {
        if pos == 0 || pos > self.len() {
            return Err(SgiError::PositionOutOfRange { pos, len: self.len() });
        }
        Ok(match &self.repr {
            Repr::Plain(p) => p.access(pos - 1),
            Repr::Sparse(s) => s.access(pos - 1),
        })
    }

    /// Occurrences of `lab` among positions `1..=pos`.
    pub fn rank(&self, lab: bool, pos: usize) -> Result<usize> {
        if pos == 0 || pos > self.len() {
            return Err(SgiError::PositionOutOfRange { pos, len: self.len() });
        }
        let ones = match &self.repr {
            Repr::Plain(p) => p.rank1(pos),
            Repr::Sparse(s) => s.rank1(pos),
        };
        Ok(if lab { ones } else { pos - ones })
    }

    /// 1-based position of the `r`-th occurrence of `lab`.
    pub fn select(&self, lab: bool, r: usize) -> Result<usize> {
        let occurrences = self.count(lab);
        if r == 0 || r > occurrences {
            return Err(SgiError::RankOutOfRange { pos: r, len: occurrences });
        }
        let pos0 = match (&self.repr, lab) {
            (Repr::Plain(p), true) => p.select1(r),
            (Repr::Plain(p), false) => p.select0(r),
            (Repr::Sparse(s), true) => s.select1(r),
            (Repr::Sparse(s), false) => s.select0(r),
        };
        Ok(pos0 + 1)
    }

    /// Total structure size in bits (payload plus directories).
    pub fn size_bits(&self) -> u64 {
        match &self.repr {
            Repr::Plain(p) => p.payload_bits() + p.overhead_bits(),
            Repr::Sparse(s) => s.size_bits(),
        }
    }

    /// Bits beyond the information-carrying payload (plain mode only counts
    /// its directories; sparse mode's whole encoding is its size).
    pub fn overhead_bits(&self) -> u64 {
        match &self.repr {
            Repr::Plain(p) => p.overhead_bits(),
            Repr::Sparse(s) => s.size_bits(),
        }
    }

    /// Serializes to the container record format: mode tag (1 byte), bit
    /// length (8 bytes LE), payload, zero-padded to an 8-byte boundary.
    /// Directories are rebuilt on load.
    pub fn to_record(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match &self.repr {
            Repr::Plain(p) => {
                out.push(0u8);
                out.extend_from_slice(&(p.len as u64).to_le_bytes());
                for w in &p.words {
                    out.extend_from_slice(&w.to_le_bytes());
                }
            }
            Repr::Sparse(s) => {
                out.push(1u8);
                out.extend_from_slice(&(s.len as u64).to_le_bytes());
                out.extend_from_slice(&(s.ones as u64).to_le_bytes());
                out.push(s.low_width as u8);
                out.resize(out.len().div_ceil(8) * 8, 0); // align the word arrays
                for w in &s.low {
                    out.extend_from_slice(&w.to_le_bytes());
                }
                for w in &s.high.words {
                    out.extend_from_slice(&w.to_le_bytes());
                }
            }
        }
        while out.len() % 8 != 0 {
            out.push(0);
        }
        out
    }

    /// Deserializes one record, returning the structure and bytes consumed.
    pub fn from_record(data: &[u8]) -> Result<(Self, usize)> {
        let bad = |what: &str| SgiError::Container(format!("bit-vector record: {what}"));
        if data.len() < 9 {
            return Err(bad("truncated header"));
        }
        let mode = data[0];
        let len = u64::from_le_bytes(data[1..9].try_into().unwrap()) as usize;
        if len == 0 {
            return Err(SgiError::EmptyBitVector);
        }
        match mode {
            0 => {
                let n_words = len.div_ceil(64);
                let end = 9 + n_words * 8;
                if data.len() < end {
                    return Err(bad("truncated plain payload"));
                }
                let words: Vec<u64> = data[9..end]
                    .chunks_exact(8)
                    .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
                    .collect();
                // Bits past `len` in the final word must be zero.
                if len % 64 != 0 {
                    let tail = words[n_words - 1] >> (len % 64);
                    if tail != 0 {
                        return Err(bad("nonzero padding bits"));
                    }
                }
                let consumed = end.div_ceil(8) * 8;
                let dir = PlainDir::build(len, words);
                Ok((RankSelect { repr: Repr::Plain(dir) }, consumed))
            }
            1 => {
                if data.len() < 24 {
                    return Err(bad("truncated sparse header"));
                }
                let ones = u64::from_le_bytes(data[9..17].try_into().unwrap()) as usize;
                let low_width = data[17] as u32;
                if ones > len || low_width > 63 {
                    return Err(bad("inconsistent sparse header"));
                }
                let expect_width = SparseDir::low_width_for(len, ones);
                if low_width != expect_width {
                    return Err(bad("unexpected low width"));
                }
                let low_words = ((ones as u64 * low_width as u64).div_ceil(64)) as usize;
                let high_len = ones + (len >> low_width) + 1;
                let high_words = high_len.div_ceil(64);
                let body = 24 + (low_words + high_words) * 8;
                if data.len() < body {
                    return Err(bad("truncated sparse payload"));
                }
                let mut off = 24;
                let read_words = |count: usize, off: &mut usize| -> Vec<u64> {
                    let out = data[*off..*off + count * 8]
                        .chunks_exact(8)
                        .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
                        .collect();
                    *off += count * 8;
                    out
                };
                let low = read_words(low_words, &mut off);
                let high_raw = read_words(high_words, &mut off);
                let high = PlainDir::build(high_len, high_raw);
                if high.ones != ones {
                    return Err(bad("high bits disagree with stored count"));
                }
                let consumed = body.div_ceil(8) * 8;
                let dir = SparseDir { len, ones, low_width, low, high };
                Ok((RankSelect { repr: Repr::Sparse(dir) }, consumed))
            }
            other => Err(bad(&format!("unknown mode tag {other}"))),
        }
    }
}

/// A packed array of fixed-width unsigned integers.  Width 0 is allowed and
/// stores nothing (every element reads back as 0).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixedVec {
    width: u32,
    len: usize,
    words: Vec<u64>,
}

impl FixedVec {
    /// An empty array of `width`-bit elements (`width ≤ 64`).
    pub fn new(width: u32) -> Self {
        assert!(width <= 64, "element width {width} > 64");
        FixedVec { width, len: 0, words: Vec::new() }
    }

    /// The narrowest width that can hold every value in `0..universe`
    /// (0 for a universe of one).
    pub fn width_for(universe: usize) -> u32 {
        usize::BITS - universe.saturating_sub(1).leading_zeros()
    }

    /// Appends a value, which must fit in the element width.
    pub fn push(&mut self, v: u64) {
        assert!(self.width == 64 || v < (1u64 << self.width), "value {v} overflows width {}", self.width);
        if self.width > 0 {
            let need = ((self.len as u64 + 1) * self.width as u64).div_ceil(64) as usize;
            if self.words.len() < need {
                self.words.resize(need, 0);
            }
            store_bits(&mut self.words, self.len as u64 * self.width as u64, self.width, v);
        }
        self.len += 1;
    }

    /// Element at `i` (panics when out of bounds).
    pub fn get(&self, i: usize) -> u64 {
        assert!(i < self.len, "index {i} out of bounds (len {})", self.len);
        if self.width == 0 {
            return 0;
        }
        load_bits(&self.words, i as u64 * self.width as u64, self.width)
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.len
    }

    /// Whether the array is empty.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Element width in bits.
    pub fn width(&self) -> u32 {
        self.width
    }

    /// Payload size in bits.
    pub fn bits(&self) -> u64 {
        self.len as u64 * self.width as u64
    }

    /// Serializes as `[width u8, pad ×7, len u64 LE, words ×8B]`.
    pub fn to_record(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.words.len() * 8);
        out.push(self.width as u8);
        out.resize(8, 0);
        out.extend_from_slice(&(self.len as u64).to_le_bytes());
        for w in &self.words {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    /// Deserializes one record, returning the array and bytes consumed.
    pub fn from_record(data: &[u8]) -> Result<(Self, usize)> {
        let bad = |what: &str| SgiError::Container(format!("packed-array record: {what}"));
        if data.len() < 16 {
            return Err(bad("truncated header"));
        }
        let width = data[0] as u32;
        if width > 64 || data[1..8].iter().any(|&b| b != 0) {
            return Err(bad("corrupt header"));
        }
        let len = u64::from_le_bytes(data[8..16].try_into().unwrap()) as usize;
        let n_words = (len as u64 * width as u64).div_ceil(64) as usize;
        let end = 16 + n_words * 8;
        if data.len() < end {
            return Err(bad("truncated payload"));
        }
        let words: Vec<u64> = data[16..end]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let tail_bits = len as u64 * width as u64;
        if tail_bits % 64 != 0 {
            let tail = words[n_words - 1] >> (tail_bits % 64);
            if tail != 0 {
                return Err(bad("nonzero padding bits"));
            }
        }
        Ok((FixedVec { width, len, words }, end))
    }
}
