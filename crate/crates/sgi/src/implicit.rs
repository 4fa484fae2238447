//! The fully implicit variant: the index bitstream hidden in the relative
//! order of consecutive point pairs.
//!
//! Pair `i` of the point array (positions `2i` and `2i+1`) stores one bit:
//! ascending lexicographic order encodes 0, descending encodes 1.  A point
//! array alone — no side structure at all — can therefore carry the whole
//! serialized index, provided the stream fits the `floor(n/2)`-bit channel.
//! The measured stream is far larger than that at every practical size, so
//! [`ImplicitArray::encode`] refuses honestly rather than degrade; the
//! query machinery is still implemented in full and exercised through a
//! byte-backed bit source.
//!
//! Swapping a pair destroys the within-pair label order, so labels are
//! resolved at read time by sorting the pair lexicographically: label `l`
//! is the `(l mod 2)`-th point of the sorted pair `l / 2`.  This replaces
//! an even-sized-region constraint with a purely local rule and preserves
//! every answer that treats labels as positions of points.
//!
//! [`locate_streamed`] walks the serialized container through a
//! [`BitSource`] with constant working state for all index reads; only the
//! final subregion decode materializes its point buffer (the permutation
//! codec inverts a whole subregion at once).

use crate::error::{Result, SgiError};
use crate::geom::{self, Point};
use crate::index;
use crate::permcode::{self, CodecConfig, CodecMode};

/// Random access to a bit sequence, LSB-first within the underlying bytes:
/// bit `t` of a byte-backed source is `(bytes[t / 8] >> (t % 8)) & 1`.
pub trait BitSource {
    /// Reads `width ≤ 64` consecutive bits starting at bit `at`, assembled
    /// least-significant-first.
    fn read_field(&self, at: u64, width: u32) -> Result<u64>;
    /// Total readable bits.
    fn len_bits(&self) -> u64;
}

/// A plain byte-backed bit source (the serialized container itself).
pub struct ByteSource<'a> {
    bytes: &'a [u8],
}

impl<'a> ByteSource<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        ByteSource { bytes }
    }
}

impl BitSource for ByteSource<'_> {
    fn read_field(&self, at: u64, width: u32) -> Result<u64> {
        debug_assert!(width <= 64);
        if width == 0 {
            return Ok(0);
        }
        let end = at.checked_add(width as u64).filter(|&e| e <= self.len_bits());
        if end.is_none() {
            return Err(SgiError::PositionOutOfRange {
                pos: at as usize,
                len: self.len_bits() as usize,
            });
        }
        let mut v = 0u64;
        let mut got = 0u32;
        let mut byte = (at / 8) as usize;
        let mut shift = (at % 8) as u32;
        while got < width {
            let take = (8 - shift).min(width - got);
            let part = (self.bytes[byte] >> shift) as u64 & ((1u64 << take) - 1);
            v |= part << got;
            got += take;
            byte += 1;
            shift = 0;
        }
        Ok(v)
    }

    fn len_bits(&self) -> u64 {
        self.bytes.len() as u64 * 8
    }
}

/// A point array whose pair orderings carry a bit stream.
pub struct ImplicitArray {
    points: Vec<Point>,
    /// Bits actually embedded (the channel capacity when unknown).
    bits_len: u64,
}

/// Bit `t` as carried by one pair: descending order is 1.
fn pair_bit(a: Point, b: Point) -> u8 {
    u8::from(a > b)
}

impl ImplicitArray {
    /// Embeds `bits_len` bits of `stream` (LSB-first bytes) into the pair
    /// orderings of `points`, which must be in graph-label order.  Pairs
    /// beyond the stream are left ascending.
    pub fn encode(points: &[Point], stream: &[u8], bits_len: u64) -> Result<Self> {
        let capacity = points.len() as u64 / 2;
        if bits_len > capacity {
            return Err(SgiError::CapacityExceeded { need: bits_len, have: capacity });
        }
        if bits_len > stream.len() as u64 * 8 {
            return Err(SgiError::ParamError(format!(
                "stream holds {} bits, {bits_len} requested",
                stream.len() as u64 * 8
            )));
        }
        check_distinct(points)?;
        let src = ByteSource::new(stream);
        let mut arr = points.to_vec();
        for p in 0..capacity as usize {
            let bit = if (p as u64) < bits_len { src.read_field(p as u64, 1)? as u8 } else { 0 };
            let (a, b) = (arr[2 * p], arr[2 * p + 1]);
            if pair_bit(a, b) != bit {
                arr.swap(2 * p, 2 * p + 1);
            }
        }
        Ok(ImplicitArray { points: arr, bits_len })
    }

    /// Adopts an already-encoded array (e.g. read back from disk).  The
    /// embedded bit count is not recoverable from the points alone, so the
    /// whole channel is treated as readable.
    pub fn from_points(points: Vec<Point>) -> Result<Self> {
        check_distinct(&points)?;
        let bits_len = points.len() as u64 / 2;
        Ok(ImplicitArray { points, bits_len })
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// The stored (pair-permuted) point array.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Channel capacity in bits: one per pair.
    pub fn capacity(&self) -> u64 {
        self.points.len() as u64 / 2
    }

    /// Reads embedded bit `t`.
    pub fn read_bit(&self, t: u64) -> Result<u8> {
        if t >= self.bits_len {
            return Err(SgiError::PositionOutOfRange {
                pos: t as usize,
                len: self.bits_len as usize,
            });
        }
        let p = t as usize;
        Ok(pair_bit(self.points[2 * p], self.points[2 * p + 1]))
    }

    /// Reads `width` consecutive embedded bits, least-significant-first.
    pub fn read_field(&self, t: u64, width: u32) -> Result<u64> {
        PairSource(self).read_field(t, width)
    }

    /// Resolves a graph-label to its point: sort pair `l / 2`
    /// lexicographically and take the `(l mod 2)`-th element.  An unpaired
    /// final point resolves directly.
    pub fn point_by_label(&self, l: u32) -> Result<Point> {
        let n = self.points.len();
        if l as usize >= n {
            return Err(SgiError::IdOutOfRange {
                what: "graph label",
                got: l as u64,
                max: n as u64 - 1,
            });
        }
        let i = l as usize;
        if i | 1 >= n {
            return Ok(self.points[i]);
        }
        let (a, b) = (self.points[i & !1], self.points[i | 1]);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        Ok(if i % 2 == 0 { lo } else { hi })
    }

    /// Point location with no memory but the array itself: every index read
    /// goes through the pair channel, points come from
    /// [`point_by_label`](Self::point_by_label).
    pub fn locate(&self, q: Point) -> Result<[u32; 3]> {
        locate_streamed(&PairSource(self), &|l| self.point_by_label(l), q)
    }
}

/// Rejects coordinate-identical points: the pair channel needs every
/// comparison to be strict.
fn check_distinct(points: &[Point]) -> Result<()> {
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_unstable_by_key(|&i| points[i]);
    for w in idx.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(SgiError::DuplicatePoint(w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    Ok(())
}

/// [`BitSource`] view of an [`ImplicitArray`]'s pair channel.
struct PairSource<'a>(&'a ImplicitArray);

impl BitSource for PairSource<'_> {
    fn read_field(&self, at: u64, width: u32) -> Result<u64> {
        debug_assert!(width <= 64);
        if width == 0 {
            return Ok(0);
        }
        if at.checked_add(width as u64).is_none_or(|e| e > self.len_bits()) {
            return Err(SgiError::PositionOutOfRange {
                pos: at as usize,
                len: self.len_bits() as usize,
            });
        }
        let mut v = 0u64;
        for j in 0..width as u64 {
            let p = (at + j) as usize;
            let bit = pair_bit(self.0.points[2 * p], self.0.points[2 * p + 1]);
            v |= (bit as u64) << j;
        }
        Ok(v)
    }

    fn len_bits(&self) -> u64 {
        self.0.bits_len
    }
}

// ---------------------------------------------------------------------------
// Streamed container walk
// ---------------------------------------------------------------------------

/// Cheap field accessors over a [`BitSource`], all byte-addressed.
struct Walk<'a> {
    src: &'a dyn BitSource,
}

impl Walk<'_> {
    fn u8(&self, byte: u64) -> Result<u64> {
        self.src.read_field(byte * 8, 8)
    }
    fn u32(&self, byte: u64) -> Result<u64> {
        self.src.read_field(byte * 8, 32)
    }
    fn u64(&self, byte: u64) -> Result<u64> {
        self.src.read_field(byte * 8, 64)
    }
    fn word(&self, base_byte: u64, i: u64) -> Result<u64> {
        self.u64(base_byte + 8 * i)
    }
}

/// One serialized rank/select record, addressed by its byte offset.
#[derive(Clone, Copy)]
struct RsRec {
    /// 0 plain, 1 sparse.
    mode: u64,
    len: u64,
    /// Plain: word array.  Sparse: unused.
    words: u64,
    /// Sparse fields.
    ones: u64,
    low_width: u32,
    low: u64,
    high: u64,
    high_len: u64,
}

impl RsRec {
    fn parse(w: &Walk, at: u64) -> Result<RsRec> {
        let mode = w.u8(at)?;
        let len = w.u64(at + 1)?;
        match mode {
            0 => Ok(RsRec {
                mode,
                len,
                words: at + 9,
                ones: 0,
                low_width: 0,
                low: 0,
                high: 0,
                high_len: 0,
            }),
            1 => {
                let ones = w.u64(at + 9)?;
                let low_width = w.u8(at + 17)? as u32;
                let low = at + 24;
                let low_words = (ones * low_width as u64).div_ceil(64);
                let high = low + 8 * low_words;
                let high_len = ones + (len >> low_width) + 1;
                Ok(RsRec { mode, len, words: 0, ones, low_width, low, high, high_len })
            }
            other => Err(SgiError::Container(format!("unknown bit-vector mode {other}"))),
        }
    }

    /// 1s among the first `pos` bits (`pos ≤ len`).
    fn rank1(&self, w: &Walk, pos: u64) -> Result<u64> {
        if pos == 0 {
            return Ok(0);
        }
        match self.mode {
            0 => plain_rank1(w, self.words, pos),
            _ => {
                if self.ones == 0 {
                    return Ok(0);
                }
                let lw = self.low_width;
                let bucket = pos >> lw;
                let start = if bucket == 0 {
                    0
                } else {
                    plain_select0(w, self.high, self.high_len, bucket)? - (bucket - 1)
                };
                let end = plain_select0(w, self.high, self.high_len, bucket + 1)? - bucket;
                let target = if lw == 0 { 0 } else { pos & ((1u64 << lw) - 1) };
                let (mut lo, mut hi) = (start, end);
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if self.low_value(w, mid)? < target {
                        lo = mid + 1;
                    } else {
                        hi = mid;
                    }
                }
                Ok(lo)
            }
        }
    }

    /// 0-based position of the `k`-th 1 (`1 ≤ k ≤ ones`).
    fn select1(&self, w: &Walk, k: u64) -> Result<u64> {
        match self.mode {
            0 => plain_select1(w, self.words, self.len, k),
            _ => {
                let q = plain_select1(w, self.high, self.high_len, k)?;
                let bucket = q - (k - 1);
                Ok((bucket << self.low_width) | self.low_value(w, k - 1)?)
            }
        }
    }

    /// Bit at 0-based `pos`.
    fn access(&self, w: &Walk, pos: u64) -> Result<bool> {
        match self.mode {
            0 => Ok(w.src.read_field(self.words * 8 + pos, 1)? == 1),
            _ => Ok(self.rank1(w, pos + 1)? - self.rank1(w, pos)? == 1),
        }
    }

    fn low_value(&self, w: &Walk, k: u64) -> Result<u64> {
        if self.low_width == 0 {
            return Ok(0);
        }
        w.src.read_field(self.low * 8 + k * self.low_width as u64, self.low_width)
    }
}

fn plain_rank1(w: &Walk, words: u64, pos: u64) -> Result<u64> {
    let mut total = 0u64;
    let full = pos / 64;
    for i in 0..full {
        total += w.word(words, i)?.count_ones() as u64;
    }
    let rem = pos % 64;
    if rem > 0 {
        let word = w.word(words, full)?;
        total += (word & ((1u64 << rem) - 1)).count_ones() as u64;
    }
    Ok(total)
}

fn plain_select1(w: &Walk, words: u64, len: u64, k: u64) -> Result<u64> {
    let mut seen = 0u64;
    let n_words = len.div_ceil(64);
    for i in 0..n_words {
        let word = w.word(words, i)?;
        let here = word.count_ones() as u64;
        if seen + here >= k {
            let mut need = k - seen;
            for b in 0..64u64 {
                if (word >> b) & 1 == 1 {
                    need -= 1;
                    if need == 0 {
                        return Ok(i * 64 + b);
                    }
                }
            }
        }
        seen += here;
    }
    Err(SgiError::RankOutOfRange { pos: k as usize, len: seen as usize })
}

/// 0-based position of the `k`-th 0 among the first `len` bits.
fn plain_select0(w: &Walk, words: u64, len: u64, k: u64) -> Result<u64> {
    let mut seen = 0u64;
    let n_words = len.div_ceil(64);
    for i in 0..n_words {
        let word = w.word(words, i)?;
        let effective = (len - i * 64).min(64);
        let zeros = effective - (word & mask_low(effective)).count_ones() as u64;
        if seen + zeros >= k {
            let mut need = k - seen;
            for b in 0..effective {
                if (word >> b) & 1 == 0 {
                    need -= 1;
                    if need == 0 {
                        return Ok(i * 64 + b);
                    }
                }
            }
        }
        seen += zeros;
    }
    Err(SgiError::RankOutOfRange { pos: k as usize, len: seen as usize })
}

fn mask_low(bits: u64) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// One serialized fixed-width array, addressed by its byte offset.
#[derive(Clone, Copy)]
struct FvRec {
    width: u32,
    len: u64,
    /// Byte offset of the word payload.
    words: u64,
}

impl FvRec {
    fn parse(w: &Walk, at: u64) -> Result<FvRec> {
        let width = w.u8(at)? as u32;
        if width > 64 {
            return Err(SgiError::Container(format!("fixed-width record width {width}")));
        }
        let len = w.u64(at + 8)?;
        Ok(FvRec { width, len, words: at + 16 })
    }

    /// Serialized byte length (header + padded words).
    fn byte_len(&self) -> u64 {
        16 + (self.len * self.width as u64).div_ceil(64) * 8
    }

    fn get(&self, w: &Walk, i: u64) -> Result<u64> {
        if i >= self.len {
            return Err(SgiError::Container(format!(
                "fixed-width read {i} past length {}",
                self.len
            )));
        }
        if self.width == 0 {
            return Ok(0);
        }
        w.src.read_field(self.words * 8 + i * self.width as u64, self.width)
    }
}

/// A conversion table addressed inside the serialized sections.
struct TableRef {
    sizes: RsRec,
    dup: RsRec,
    spill: FvRec,
    groups: u64,
}

impl TableRef {
    /// Mirrors the in-memory conversion: (1-based group, 0-based position)
    /// → 0-based label at this level.
    fn to_label(&self, w: &Walk, group: u64, k: u64) -> Result<u64> {
        if group == 0 || group > self.groups {
            return Err(SgiError::IdOutOfRange {
                what: "group id",
                got: group,
                max: self.groups,
            });
        }
        let start = self.sizes.select1(w, group)? + 1; // 1-based position
        let end = if group == self.groups {
            self.sizes.len + 1
        } else {
            self.sizes.select1(w, group + 1)? + 1
        };
        let size = end - start - 1;
        if k >= size {
            return Err(SgiError::IdOutOfRange {
                what: "group position",
                got: k,
                max: size.wrapping_sub(1),
            });
        }
        let slot = start - group + k + 1; // 1-based over all slots
        let is_dup = self.dup.access(w, slot - 1)?;
        let dups_through = self.dup.rank1(w, slot)?;
        if is_dup {
            self.spill.get(w, dups_through - 1)
        } else {
            Ok(slot - dups_through - 1)
        }
    }
}

/// A serialized coarse layer, addressed by the byte offset of its blob.
struct LayerRef {
    f: u64,
    skip: u64,
    faces: FvRec,
    tags: FvRec,
    vmap: FvRec,
}

impl LayerRef {
    fn parse(w: &Walk, at: u64) -> Result<LayerRef> {
        let f = w.u32(at + 4)?;
        let skip = w.u32(at + 8)?;
        let faces = FvRec::parse(w, at + 16)?;
        let tags = FvRec::parse(w, at + 16 + faces.byte_len())?;
        let vmap = FvRec::parse(w, at + 16 + faces.byte_len() + tags.byte_len())?;
        if faces.len != 3 * f || tags.len != f {
            return Err(SgiError::Container("layer record lengths disagree".into()));
        }
        Ok(LayerRef { f, skip, faces, tags, vmap })
    }

    /// First face whose closed triangle contains `q`, scanning in stored
    /// order (separator faces first, coarse covers next, complement last —
    /// the same priority the search hierarchy's tie rule realizes).  Local
    /// vertices below `skip` are synthetic and never reached: a routed
    /// query always matches an earlier real-vertex face.
    fn scan(
        &self,
        w: &Walk,
        q: Point,
        point_of_local: &dyn Fn(u64) -> Result<Point>,
    ) -> Result<Option<(u64, [u64; 3])>> {
        for idx in 0..self.f {
            let ids = [
                self.faces.get(w, 3 * idx)?,
                self.faces.get(w, 3 * idx + 1)?,
                self.faces.get(w, 3 * idx + 2)?,
            ];
            if self.skip > 0 && ids.iter().any(|&l| l < self.skip) {
                continue; // complement face touching a synthetic corner
            }
            let a = point_of_local(ids[0])?;
            let b = point_of_local(ids[1])?;
            let c = point_of_local(ids[2])?;
            if geom::closed_contains(a, b, c, q) {
                return Ok(Some((self.tags.get(w, idx)?, ids)));
            }
        }
        Ok(None)
    }
}

/// Byte offsets of the params block fields inside the stream.
mod at {
    pub const GROUP: u64 = 16;
    pub const MIN_N: u64 = 20;
    pub const N: u64 = 24;
    pub const R: u64 = 32;
    pub const SECTIONS: u64 = 40;
}

/// Full point location over a serialized container exposed only as a bit
/// sequence.  `point_of` resolves a graph-label to its point.  All index
/// reads stream through `src` with constant walker state; the subregion
/// decode at the end materializes one subregion's points.
pub fn locate_streamed(
    src: &dyn BitSource,
    point_of: &dyn Fn(u32) -> Result<Point>,
    q: Point,
) -> Result<[u32; 3]> {
    let w = Walk { src };
    let n = w.u64(at::N)?;
    let r_count = w.u32(at::R)?;
    let codec = CodecConfig::new(
        w.u32(at::GROUP)? as usize,
        CodecMode::Subdivision,
        w.u32(at::MIN_N)? as usize,
    )?;

    // Section table: tag → (offset, length), fixed slots.
    let sec_count = w.u32(at::SECTIONS)?;
    let mut sec = [(0u64, 0u64); 10];
    for i in 0..sec_count {
        let entry = at::SECTIONS + 4 + i * 20;
        let tag = w.u32(entry)?;
        if (1..=9).contains(&tag) {
            sec[tag as usize] = (w.u64(entry + 4)?, w.u64(entry + 12)?);
        }
    }
    let section = |tag: u64, name: &str| -> Result<u64> {
        let (off, len) = sec[tag as usize];
        if len == 0 {
            return Err(SgiError::Container(format!("missing section {name}")));
        }
        Ok(off)
    };
    let toppl = section(1, "TOPPL")?;
    let lblx = section(6, "LBLX")?;
    let dirs = section(7, "DIRS")?;

    let table_at = |entry: u64| -> Result<(TableRef, u64, u64, u64)> {
        let base = lblx + entry * 56;
        let n_verts = w.u64(base)?;
        let groups = w.u64(base + 8)?;
        let sizes = RsRec::parse(&w, section(3, "LBLB")? + w.u64(base + 16)?)?;
        let dup = RsRec::parse(&w, section(4, "LBLC")? + w.u64(base + 24)?)?;
        let spill = FvRec::parse(&w, section(5, "LBLD")? + w.u64(base + 32)?)?;
        let sub_base = w.u64(base + 40)?;
        let regpl_off = w.u64(base + 48)?;
        Ok((TableRef { sizes, dup, spill, groups }, n_verts, sub_base, regpl_off))
    };
    let (top_table, top_n, _, _) = table_at(0)?;
    if top_n != n || top_table.groups != r_count {
        return Err(SgiError::Container("top directory disagrees with the header".into()));
    }

    // Top layer: local vertices map straight to graph labels.
    let top = LayerRef::parse(&w, toppl)?;
    let top_gl = |l: u64| top.vmap.get(&w, l);
    let (top_tag, top_ids) = top
        .scan(&w, q, &|l| point_of(top_gl(l)? as u32))?
        .ok_or(SgiError::OutsideHull)?;
    if top_tag == 0 {
        let mut labels = [0u32; 3];
        for (slot, id) in top_ids.into_iter().enumerate() {
            labels[slot] = top_gl(id)? as u32;
        }
        labels.sort_unstable();
        return Ok(labels);
    }

    let i = top_tag;
    if i > r_count {
        return Err(SgiError::Container("query routed to an unknown region".into()));
    }
    let (reg_table, _, sub_base, regpl_off) = table_at(i)?;
    let to_graph = |rl: u64| top_table.to_label(&w, i, rl);
    let j = if regpl_off == u64::MAX {
        1
    } else {
        let layer = LayerRef::parse(&w, section(2, "REGPL")? + regpl_off)?;
        let rl_of = |l: u64| layer.vmap.get(&w, l - layer.skip);
        let (tag, ids) = layer
            .scan(&w, q, &|l| point_of(to_graph(rl_of(l)?)? as u32))?
            .ok_or_else(|| SgiError::Container("query escaped its region layer".into()))?;
        if tag == 0 {
            let mut labels = [0u32; 3];
            for (slot, id) in ids.into_iter().enumerate() {
                labels[slot] = to_graph(rl_of(id)?)? as u32;
            }
            labels.sort_unstable();
            return Ok(labels);
        }
        if tag > reg_table.groups {
            return Err(SgiError::Container("query routed to an unreachable layer face".into()));
        }
        tag
    };

    // Subregion scan: gather its points in label order, then test faces.
    let dir = dirs + 8 + (sub_base + j - 1) * 8;
    let count = w.u32(dir)?;
    let expl_off = w.u32(dir + 4)?;
    let mut glabels = Vec::with_capacity(count as usize);
    let mut pts = Vec::with_capacity(count as usize);
    for k in 0..count {
        let gl = to_graph(reg_table.to_label(&w, j, k)?)? as u32;
        glabels.push(gl);
        pts.push(point_of(gl)?);
    }
    let mut best: Option<[u32; 3]> = None;
    let mut consider = |a: usize, b: usize, c: usize| {
        if geom::closed_contains(pts[a], pts[b], pts[c], q) {
            let mut triple = [glabels[a], glabels[b], glabels[c]];
            triple.sort_unstable();
            if best.is_none_or(|cur| triple < cur) {
                best = Some(triple);
            }
        }
    };
    if expl_off == u32::MAX as u64 {
        let (wrap, edges) = permcode::decode_mesh(&pts, &codec, true)?;
        let eset: std::collections::HashSet<(u32, u32)> = edges
            .ok_or_else(|| SgiError::Container("subregion decode lost its edge set".into()))?
            .into_iter()
            .collect();
        let real = |a: u32, b: u32| eset.contains(&(a.min(b), a.max(b)));
        for tri in wrap.tris() {
            let [a, b, c] = *tri;
            if a < 3 || b < 3 || c < 3 {
                continue;
            }
            if real(a, b) && real(b, c) && real(c, a) {
                consider(a as usize - 3, b as usize - 3, c as usize - 3);
            }
        }
    } else {
        let blob = section(8, "EXPL")? + expl_off;
        let f_sub = w.u32(blob + 4)?;
        let fv = FvRec::parse(&w, blob + 8)?;
        if fv.len != 3 * f_sub {
            return Err(SgiError::Container("explicit blob face count mismatch".into()));
        }
        for fi in 0..f_sub {
            consider(
                fv.get(&w, 3 * fi)? as usize,
                fv.get(&w, 3 * fi + 1)? as usize,
                fv.get(&w, 3 * fi + 2)? as usize,
            );
        }
    }
    best.ok_or_else(|| SgiError::Container("no subregion face contains the query".into()))
}

/// Convenience wrapper: locate against container bytes (with magic and
/// version still attached) using direct point access.  This is the
/// cross-implementation oracle for the streamed walk.
pub fn locate_in_bytes(container: &[u8], points: &[Point], q: Point) -> Result<[u32; 3]> {
    let stream = container
        .get(index::STREAM_START..)
        .ok_or_else(|| SgiError::Container("container truncated".into()))?;
    let src = ByteSource::new(stream);
    locate_streamed(&src, &|l| {
        points.get(l as usize).copied().ok_or(SgiError::IdOutOfRange {
            what: "graph label",
            got: l as u64,
            max: points.len() as u64 - 1,
        })
    }, q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitvec::{BitVec, RankSelect};
    use crate::index::{build_index, BuildParams};
    use crate::mesh::Triangulation;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn distinct_points(n: usize, seed: u64) -> Vec<Point> {
        let mut rng = StdRng::seed_from_u64(seed);
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let p = Point { x: rng.gen_range(-100_000..100_000), y: rng.gen_range(-100_000..100_000) };
            if seen.insert(p) {
                out.push(p);
            }
        }
        out
    }

    /// Encoding then reading returns every bit; the multiset survives.
    #[test]
    fn pair_channel_roundtrips_bits() {
        let mut rng = StdRng::seed_from_u64(7);
        let stream: Vec<u8> = (0..250).map(|_| rng.gen()).collect();
        let points = distinct_points(4001, 1);
        let bits_len = 2000u64;
        let arr = ImplicitArray::encode(&points, &stream, bits_len).unwrap();
        let src = ByteSource::new(&stream);
        for t in 0..bits_len {
            assert_eq!(arr.read_bit(t).unwrap() as u64, src.read_field(t, 1).unwrap());
        }
        assert!(arr.read_bit(bits_len).is_err());
        let mut a = arr.points().to_vec();
        let mut b = points.clone();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    /// Field reads agree with the byte source at every offset and width.
    #[test]
    fn field_reads_match_byte_source() {
        let mut rng = StdRng::seed_from_u64(9);
        let stream: Vec<u8> = (0..64).map(|_| rng.gen()).collect();
        let points = distinct_points(1024, 2);
        let arr = ImplicitArray::encode(&points, &stream, 512).unwrap();
        let src = ByteSource::new(&stream);
        for _ in 0..500 {
            let width = rng.gen_range(1..=64u32);
            let at = rng.gen_range(0..=(512 - width as u64));
            assert_eq!(
                arr.read_field(at, width).unwrap(),
                src.read_field(at, width).unwrap(),
                "at {at} width {width}"
            );
        }
    }

    /// Labels resolve to the same points before and after pair swaps.
    #[test]
    fn labels_survive_pair_swaps() {
        let points = distinct_points(2000, 3);
        let all_ones = vec![0xFFu8; 125];
        let arr = ImplicitArray::encode(&points, &all_ones, 1000).unwrap();
        for l in 0..2000u32 {
            let direct = arr.point_by_label(l).unwrap();
            let pair = l as usize / 2;
            let (a, b) = (points[2 * pair], points[2 * pair + 1]);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            assert_eq!(direct, if l % 2 == 0 { lo } else { hi });
        }
        assert!(arr.point_by_label(2000).is_err());
        // All-zero bits: the array is pairwise ascending.
        let arr0 = ImplicitArray::encode(&points, &[0u8; 125], 1000).unwrap();
        for p in 0..1000 {
            assert!(arr0.points()[2 * p] < arr0.points()[2 * p + 1]);
        }
    }

    /// The channel refuses streams beyond capacity and duplicate points.
    #[test]
    fn refuses_overflow_and_duplicates() {
        let points = distinct_points(100, 4);
        let stream = vec![0u8; 100];
        match ImplicitArray::encode(&points, &stream, 51) {
            Err(SgiError::CapacityExceeded { need: 51, have: 50 }) => {}
            other => panic!("expected capacity refusal, got {other:?}"),
        }
        let mut dups = points.clone();
        dups[7] = dups[93];
        assert!(matches!(
            ImplicitArray::encode(&dups, &stream, 10),
            Err(SgiError::DuplicatePoint(7, 93))
        ));
    }

    /// Streamed rank/select over serialized records equals the in-memory
    /// structures, in both storage modes.
    #[test]
    fn streamed_rank_select_matches_oracle() {
        let mut rng = StdRng::seed_from_u64(11);
        for &(len, density) in &[(700usize, 0.5f64), (900, 0.03), (64, 1.0), (130, 0.01)] {
            let mut bits = BitVec::zeros(len);
            for i in 0..len {
                if rng.gen_bool(density) {
                    bits.set(i, true);
                }
            }
            if bits.count_ones() == 0 {
                bits.set(len / 2, true);
            }
            let rs = RankSelect::build_auto(&bits).unwrap();
            let record = rs.to_record();
            let src = ByteSource::new(&record);
            let w = Walk { src: &src };
            let rec = RsRec::parse(&w, 0).unwrap();
            for pos in 0..=len {
                assert_eq!(rec.rank1(&w, pos as u64).unwrap() as usize, rs.rank(true, pos).unwrap());
            }
            for pos in 0..len {
                assert_eq!(rec.access(&w, pos as u64).unwrap(), bits.get(pos));
            }
            for k in 1..=bits.count_ones() {
                assert_eq!(
                    rec.select1(&w, k as u64).unwrap() as usize + 1,
                    rs.select(true, k).unwrap()
                );
            }
        }
    }

    /// The streamed walk over real container bytes answers every query
    /// exactly like the pointer-based index.
    #[test]
    fn streamed_walk_matches_index() {
        let t = Triangulation::gen_random(4000, 17).unwrap();
        let (points, ix) = build_index(&t, &BuildParams::default()).unwrap();
        let mut rng = StdRng::seed_from_u64(23);
        let pts = t.points();
        let (a, b, c) = (pts[0], pts[1], pts[2]);
        let mut tried = 0;
        while tried < 60 {
            let q = Point {
                x: rng.gen_range(a.x.min(b.x).min(c.x)..=a.x.max(b.x).max(c.x)),
                y: rng.gen_range(a.y.min(b.y).min(c.y)..=a.y.max(b.y).max(c.y)),
            };
            if geom::point_in_triangle(a, b, c, q).unwrap() != geom::TriLocation::Inside {
                continue;
            }
            tried += 1;
            assert_eq!(
                locate_in_bytes(ix.bytes(), &points, q).unwrap(),
                ix.locate(&points, q).unwrap(),
                "query {q}"
            );
        }
        // Outside the hull the walk refuses like the index does.
        let far = Point { x: a.x.min(b.x).min(c.x) - 10, y: a.y };
        assert!(matches!(locate_in_bytes(ix.bytes(), &points, far), Err(SgiError::OutsideHull)));
    }

    /// A real build's stream never fits the pair channel at practical
    /// sizes; the refusal carries the exact arithmetic.
    #[test]
    fn real_streams_exceed_the_channel() {
        let t = Triangulation::gen_random(3000, 5).unwrap();
        let (points, ix) = build_index(&t, &BuildParams::default()).unwrap();
        let bits = ix.stream().len() as u64 * 8;
        match ImplicitArray::encode(&points, ix.stream(), bits) {
            Err(SgiError::CapacityExceeded { need, have }) => {
                assert_eq!(need, bits);
                assert_eq!(have, 1500);
            }
            other => panic!("expected capacity refusal, got {other:?}"),
        }
    }
}
