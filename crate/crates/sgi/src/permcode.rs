//! Triangulation and subdivision connectivity stored as a permutation of
//! the point set.
//!
//! The encoder dismantles a triangulation by repeatedly removing batches of
//! independent low-degree interior vertices (retriangulating each hole), then
//! removes a final run of vertices one at a time until only the outer
//! triangle remains.  Every removal is summarized by a tiny record: which of
//! the at most 41 local insertion configurations rebuilds the hole around the
//! vertex, plus (in subdivision mode) which of the drawn star edges belong to
//! the original graph.  The decoder replays the removals in reverse,
//! re-inserting each point into the face that contains it.
//!
//! No bits are stored anywhere except in the *order* of the point array:
//! - the final run of removals occupies a fixed-size segment just before the
//!   outer corners; the permutation of that segment (relative to
//!   coordinate-sorted order) carries a bootstrap stream holding those
//!   vertices' records and a table of batch sizes;
//! - each batch occupies a contiguous range, cut into chunks whose internal
//!   permutations carry the main record stream via the factorial number
//!   system.
//!
//! Record consumption order is tied to a canonical breadth-first traversal of
//! the current mesh, so both sides agree on which record belongs to which
//! point without any side channel.

use crate::error::{Result, SgiError};
use crate::geom::{self, orient, Point, TriLocation};
use crate::mesh::{planar_face_cycles, Subdivision, Triangulation, OUTER};
use crate::polygon;
use num_bigint::BigUint;
use std::collections::{HashMap, HashSet};
use std::sync::OnceLock;

macro_rules! corrupt {
    ($($arg:tt)*) => {
        SgiError::CorruptPermutation(format!($($arg)*))
    };
}

// ---------------------------------------------------------------------------
// Bit streams
// ---------------------------------------------------------------------------

/// Append-only bit buffer (one byte per bit; streams here are small relative
/// to the meshes they describe).
#[derive(Default, Clone)]
struct BitWriter {
    bits: Vec<u8>,
}

impl BitWriter {
    fn new() -> Self {
        Self::default()
    }

    fn len(&self) -> usize {
        self.bits.len()
    }

    fn push(&mut self, bit: bool) {
        self.bits.push(bit as u8);
    }

    /// `width` low bits of `value`, most significant first.
    fn write_bits(&mut self, value: u64, width: usize) {
        debug_assert!(width == 64 || value < (1u64 << width));
        for i in (0..width).rev() {
            self.push((value >> i) & 1 == 1);
        }
    }

    /// Elias gamma code for `value >= 1`.
    fn write_gamma(&mut self, value: u64) {
        debug_assert!(value >= 1);
        let top = 63 - value.leading_zeros() as usize;
        for _ in 0..top {
            self.push(false);
        }
        self.write_bits(value, top + 1);
    }

    fn extend(&mut self, other: &BitWriter) {
        self.bits.extend_from_slice(&other.bits);
    }
}

/// Cursor over a bit slice; running out of bits means the permutation did
/// not carry a well-formed stream.
struct BitReader<'a> {
    bits: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    fn new(bits: &'a [u8]) -> Self {
        BitReader { bits, pos: 0 }
    }

    fn read_bit(&mut self) -> Result<bool> {
        let b = *self
            .bits
            .get(self.pos)
            .ok_or_else(|| corrupt!("bit stream exhausted at {}", self.pos))?;
        self.pos += 1;
        Ok(b == 1)
    }

    fn read_bits(&mut self, width: usize) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }

    fn read_gamma(&mut self) -> Result<u64> {
        let mut zeros = 0usize;
        while !self.read_bit()? {
            zeros += 1;
            if zeros > 63 {
                return Err(corrupt!("gamma code run-length overflow"));
            }
        }
        let mut v = 1u64;
        for _ in 0..zeros {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }
}

/// Ceiling of the base-2 logarithm (0 for n <= 1).
fn ceil_lg(n: u32) -> usize {
    if n <= 1 {
        0
    } else {
        32 - (n - 1).leading_zeros() as usize
    }
}

/// Truncated binary code for `value` in `0..n` (0 bits when n == 1).
fn write_tb(w: &mut BitWriter, value: u32, n: u32) {
    debug_assert!(value < n);
    if n <= 1 {
        return;
    }
    let k = ceil_lg(n);
    let u = (1u32 << k) - n;
    if value < u {
        w.write_bits(value as u64, k - 1);
    } else {
        w.write_bits((value + u) as u64, k);
    }
}

fn read_tb(r: &mut BitReader, n: u32) -> Result<u32> {
    if n <= 1 {
        return Ok(0);
    }
    let k = ceil_lg(n);
    let u = (1u32 << k) - n;
    let mut x = r.read_bits(k - 1)? as u32;
    if x >= u {
        x = (x << 1 | r.read_bit()? as u32) - u;
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Permutations as integers (factorial number system)
// ---------------------------------------------------------------------------

/// `floor(lg k!)`: the number of whole bits an arrangement of `k` distinct
/// items can carry.
fn floor_lg_factorial(k: usize) -> u64 {
    let mut fact = BigUint::from(1u32);
    for i in 2..=k as u64 {
        fact *= i;
    }
    fact.bits().saturating_sub(1)
}

/// The permutation of `0..k` whose factorial-number-system rank is `index`.
///
/// Fails when `index >= k!`.
fn index_to_perm(index: &BigUint, k: usize) -> Result<Vec<u32>> {
    // Extract mixed-radix digits least significant first: the digit at the
    // m! place is obtained modulo m+1.
    let mut v = index.clone();
    let mut digits = vec![0u32; k]; // digits[i] pairs with (k-1-i)!
    for m in 1..k as u64 {
        let rem = &v % (m + 1);
        digits[k - 1 - m as usize] = rem.to_u32_digits().first().copied().unwrap_or(0);
        v /= m + 1;
    }
    if v != BigUint::from(0u32) {
        return Err(corrupt!("arrangement rank exceeds {k}!"));
    }
    let mut remaining: Vec<u32> = (0..k as u32).collect();
    let mut perm = Vec::with_capacity(k);
    for &d in &digits {
        perm.push(remaining.remove(d as usize));
    }
    Ok(perm)
}

/// Factorial-number-system rank of a permutation of `0..k`.
fn perm_to_index(perm: &[u32]) -> BigUint {
    let k = perm.len();
    // Fenwick tree counting still-unused values below perm[i].
    let mut tree = vec![0u32; k + 1];
    let add = |tree: &mut Vec<u32>, mut i: usize| {
        i += 1;
        while i <= k {
            tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    };
    let prefix = |tree: &Vec<u32>, mut i: usize| -> u32 {
        let mut s = 0;
        while i > 0 {
            s += tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    };
    let mut index = BigUint::from(0u32);
    for (i, &p) in perm.iter().enumerate() {
        let used_below = prefix(&tree, p as usize);
        let digit = p - used_below;
        index *= (k - i) as u64;
        index += digit as u64;
        add(&mut tree, p as usize);
    }
    index
}

/// Packs a sequence of radix-`radix` symbols into a permutation of `0..k`.
///
/// The mixed-radix value of `symbols` (most significant symbol first) becomes
/// the permutation's factorial-number-system rank; [`perm_unpack`] inverts
/// this exactly.  Fails with [`SgiError::CapacityExceeded`] when
/// `radix^len(symbols) > k!`.
pub fn perm_pack(symbols: &[u32], radix: u32, k: usize) -> Result<Vec<u32>> {
    if radix == 0 {
        return Err(SgiError::ParamError("radix must be at least 1".into()));
    }
    for &s in symbols {
        if s >= radix {
            return Err(SgiError::ParamError(format!(
                "symbol {s} out of range for radix {radix}"
            )));
        }
    }
    check_pack_capacity(symbols.len(), radix, k)?;
    let mut value = BigUint::from(0u32);
    for &s in symbols {
        value *= radix;
        value += s;
    }
    index_to_perm(&value, k)
}

/// Recovers `count` radix-`radix` symbols from a permutation of `0..k`
/// (inverse of [`perm_pack`]).
pub fn perm_unpack(perm: &[u32], radix: u32, count: usize) -> Result<Vec<u32>> {
    let k = perm.len();
    let mut seen = vec![false; k];
    for &p in perm {
        if p as usize >= k || seen[p as usize] {
            return Err(SgiError::NotAPermutation(k));
        }
        seen[p as usize] = true;
    }
    if radix == 0 {
        return Err(SgiError::ParamError("radix must be at least 1".into()));
    }
    check_pack_capacity(count, radix, k)?;
    let mut value = perm_to_index(perm);
    let mut symbols = Vec::with_capacity(count);
    for _ in 0..count {
        let rem = &value % radix;
        symbols.push(rem.to_u32_digits().first().copied().unwrap_or(0));
        value /= radix;
    }
    symbols.reverse();
    Ok(symbols)
}

/// Enforces `radix^count <= k!` exactly.
fn check_pack_capacity(count: usize, radix: u32, k: usize) -> Result<()> {
    let pow = BigUint::from(radix).pow(count as u32);
    let mut fact = BigUint::from(1u32);
    for i in 2..=k as u64 {
        fact *= i;
    }
    if pow > fact {
        return Err(SgiError::CapacityExceeded {
            need: pow.bits().saturating_sub(1),
            have: fact.bits().saturating_sub(1),
        });
    }
    Ok(())
}

/// Turns exactly `cap` stream bits (MSB first) into a permutation of `0..k`,
/// where `cap = floor(lg k!)`.
fn bits_to_perm(bits: &[u8], k: usize) -> Vec<u32> {
    let value = if bits.is_empty() {
        BigUint::from(0u32)
    } else {
        BigUint::from_radix_be(bits, 2).expect("bits are binary digits")
    };
    index_to_perm(&value, k).expect("value below 2^floor(lg k!) is below k!")
}

/// Recovers the `cap`-bit stream slice carried by an arrangement's rank.
fn perm_to_bits(perm: &[u32], cap: u64) -> Result<Vec<u8>> {
    let value = perm_to_index(perm);
    if value.bits() > cap {
        return Err(corrupt!(
            "arrangement rank needs {} bits, capacity {}",
            value.bits(),
            cap
        ));
    }
    let digits = value.to_radix_be(2);
    let mut bits = vec![0u8; cap as usize - digits.len()];
    bits.extend_from_slice(&digits);
    Ok(bits)
}

// ---------------------------------------------------------------------------
// Insertion configurations
// ---------------------------------------------------------------------------

/// Shape of the retriangulated hole on the far side of one anchor-face edge:
/// either the edge lies on the hole boundary, or another hole face sits
/// across it, itself carrying two more edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Shape {
    Leaf,
    Node(Box<Shape>, Box<Shape>),
}

impl Shape {
    fn nodes(&self) -> usize {
        match self {
            Shape::Leaf => 0,
            Shape::Node(l, r) => 1 + l.nodes() + r.nodes(),
        }
    }

    fn serialize(&self, out: &mut Vec<u8>) {
        match self {
            Shape::Leaf => out.push(0),
            Shape::Node(l, r) => {
                out.push(1);
                l.serialize(out);
                r.serialize(out);
            }
        }
    }
}

/// All hole layouts reachable by removing an interior vertex of degree 3..6:
/// three edge shapes with at most three extra faces in total.  There are
/// exactly 1 + 3 + 9 + 28 = 41.
struct Catalog {
    /// `by_extra[j]` lists configurations with `j` extra faces (degree 3+j).
    by_extra: [Vec<[Shape; 3]>; 4],
    /// Serialized triple -> (degree, index within its degree class).
    lookup: HashMap<Vec<u8>, (u8, u16)>,
}

fn shapes_with(nodes: usize) -> Vec<Shape> {
    if nodes == 0 {
        return vec![Shape::Leaf];
    }
    let mut out = Vec::new();
    for left in 0..nodes {
        for l in shapes_with(left) {
            for r in shapes_with(nodes - 1 - left) {
                out.push(Shape::Node(Box::new(l.clone()), Box::new(r)));
            }
        }
    }
    out
}

fn catalog() -> &'static Catalog {
    static CATALOG: OnceLock<Catalog> = OnceLock::new();
    CATALOG.get_or_init(|| {
        let mut by_extra: [Vec<[Shape; 3]>; 4] = Default::default();
        for (extra, bucket) in by_extra.iter_mut().enumerate() {
            for j0 in 0..=extra {
                for j1 in 0..=(extra - j0) {
                    let j2 = extra - j0 - j1;
                    for t0 in shapes_with(j0) {
                        for t1 in shapes_with(j1) {
                            for t2 in shapes_with(j2) {
                                bucket.push([t0.clone(), t1.clone(), t2.clone()]);
                            }
                        }
                    }
                }
            }
        }
        let counts: Vec<usize> = by_extra.iter().map(Vec::len).collect();
        assert_eq!(counts, [1, 3, 9, 28], "configuration census must be 41");
        let mut lookup = HashMap::new();
        for (extra, bucket) in by_extra.iter().enumerate() {
            for (idx, cfg) in bucket.iter().enumerate() {
                let mut key = Vec::new();
                for t in cfg {
                    t.serialize(&mut key);
                }
                lookup.insert(key, ((extra + 3) as u8, idx as u16));
            }
        }
        Catalog { by_extra, lookup }
    })
}

/// Writes one removal record: a prefix code selecting the vertex degree,
/// then a truncated-binary configuration index within that degree class.
fn write_record(w: &mut BitWriter, degree: usize, code: u16) {
    match degree {
        3 => w.push(false),
        4 => {
            w.write_bits(0b10, 2);
            write_tb(w, code as u32, 3);
        }
        5 => {
            w.write_bits(0b110, 3);
            write_tb(w, code as u32, 9);
        }
        6 => {
            w.write_bits(0b111, 3);
            write_tb(w, code as u32, 28);
        }
        _ => unreachable!("removal degree out of range"),
    }
}

fn read_record(r: &mut BitReader) -> Result<(usize, u16)> {
    if !r.read_bit()? {
        return Ok((3, 0));
    }
    if !r.read_bit()? {
        return Ok((4, read_tb(r, 3)? as u16));
    }
    if !r.read_bit()? {
        return Ok((5, read_tb(r, 9)? as u16));
    }
    Ok((6, read_tb(r, 28)? as u16))
}


// ---------------------------------------------------------------------------
// Editable face graph
// ---------------------------------------------------------------------------

/// Triangulation under incremental edits: a slab of faces with stable slots,
/// a free list, and mutual adjacency.  Vertex ids refer to an external point
/// array that never changes.
struct FaceGraph {
    verts: Vec<[u32; 3]>,
    nbrs: Vec<[u32; 3]>,
    alive: Vec<bool>,
    free: Vec<u32>,
    live: usize,
}

impl FaceGraph {
    fn from_mesh(t: &Triangulation) -> Self {
        FaceGraph {
            verts: t.tris().to_vec(),
            nbrs: t.neighbors().to_vec(),
            alive: vec![true; t.f()],
            free: Vec::new(),
            live: t.f(),
        }
    }

    /// A fresh graph holding only the outer triangle (vertices 0, 1, 2).
    fn outer_only() -> Self {
        FaceGraph {
            verts: vec![[0, 1, 2]],
            nbrs: vec![[OUTER; 3]],
            alive: vec![true],
            free: Vec::new(),
            live: 1,
        }
    }

    fn to_faces(&self) -> Vec<[u32; 3]> {
        self.verts
            .iter()
            .zip(&self.alive)
            .filter(|(_, &a)| a)
            .map(|(&v, _)| v)
            .collect()
    }

    fn alloc(&mut self, verts: [u32; 3]) -> u32 {
        self.live += 1;
        if let Some(slot) = self.free.pop() {
            self.verts[slot as usize] = verts;
            self.nbrs[slot as usize] = [OUTER; 3];
            self.alive[slot as usize] = true;
            slot
        } else {
            self.verts.push(verts);
            self.nbrs.push([OUTER; 3]);
            self.alive.push(true);
            (self.verts.len() - 1) as u32
        }
    }

    fn kill(&mut self, slot: u32) {
        debug_assert!(self.alive[slot as usize]);
        self.alive[slot as usize] = false;
        self.free.push(slot);
        self.live -= 1;
    }

    /// Slot of directed edge `(u, w)` within face `t`, if present.
    fn dir_slot(&self, t: u32, u: u32, w: u32) -> Option<usize> {
        let vs = self.verts[t as usize];
        (0..3).find(|&s| vs[s] == u && vs[(s + 1) % 3] == w)
    }

    /// Slot of vertex `v` within face `t`.
    fn slot_of(&self, t: u32, v: u32) -> Option<usize> {
        let vs = self.verts[t as usize];
        (0..3).find(|&s| vs[s] == v)
    }

    /// Replaces the faces `dead` (covering some region) by `new_tris`
    /// (covering the same region), repairing adjacency on both sides of the
    /// region boundary.  Returns the slots of the new faces.
    fn replace_region(&mut self, dead: &[u32], new_tris: &[[u32; 3]]) -> Vec<u32> {
        // Outside wiring of every region-boundary edge, recorded before the
        // kill so reused slots cannot be confused with old ones.
        let mut boundary: HashMap<(u32, u32), u32> = HashMap::new();
        for &t in dead {
            for s in 0..3 {
                let u = self.verts[t as usize][s];
                let w = self.verts[t as usize][(s + 1) % 3];
                let nb = self.nbrs[t as usize][s];
                if nb == OUTER || !dead.contains(&nb) {
                    boundary.insert((u, w), nb);
                }
            }
        }
        for &t in dead {
            self.kill(t);
        }
        let slots: Vec<u32> = new_tris.iter().map(|&vs| self.alloc(vs)).collect();
        let mut internal: HashMap<(u32, u32), (u32, usize)> = HashMap::new();
        for (&slot, vs) in slots.iter().zip(new_tris) {
            for s in 0..3 {
                internal.insert((vs[s], vs[(s + 1) % 3]), (slot, s));
            }
        }
        for (&slot, vs) in slots.iter().zip(new_tris) {
            for s in 0..3 {
                let u = vs[s];
                let w = vs[(s + 1) % 3];
                if let Some(&(other, os)) = internal.get(&(w, u)) {
                    self.nbrs[slot as usize][s] = other;
                    self.nbrs[other as usize][os] = slot;
                } else {
                    let nb = *boundary
                        .get(&(u, w))
                        .expect("replacement boundary must match region boundary");
                    self.nbrs[slot as usize][s] = nb;
                    if nb != OUTER {
                        let back = self
                            .dir_slot(nb, w, u)
                            .expect("outside neighbor shares the boundary edge");
                        self.nbrs[nb as usize][back] = slot;
                    }
                }
            }
        }
        slots
    }

    /// CCW star of interior vertex `v` from one incident face.
    fn star(&self, v: u32, t0: u32) -> Vec<u32> {
        let mut faces = vec![t0];
        let s0 = self.slot_of(t0, v).expect("incidence");
        let (mut t, mut s) = (t0, s0);
        loop {
            let next = self.nbrs[t as usize][(s + 2) % 3];
            debug_assert_ne!(next, OUTER, "interior vertex star hit the boundary");
            if next == t0 {
                return faces;
            }
            t = next;
            s = self.slot_of(t, v).expect("walk stays incident");
            faces.push(t);
        }
    }

    /// Walks toward `q` from face `start` and classifies the landing.
    fn locate(&self, points: &[Point], q: Point, start: u32) -> (u32, TriLocation) {
        let mut t = start;
        let mut prev = OUTER;
        let cap = 2 * self.live + 32;
        for step in 0..cap {
            let vs = self.verts[t as usize];
            let ps = [
                points[vs[0] as usize],
                points[vs[1] as usize],
                points[vs[2] as usize],
            ];
            let o = [
                orient(ps[0], ps[1], q),
                orient(ps[1], ps[2], q),
                orient(ps[2], ps[0], q),
            ];
            let mut exits = [false; 3];
            let mut n_exits = 0;
            for e in 0..3 {
                if o[e] < 0 && self.nbrs[t as usize][e] != prev {
                    exits[e] = true;
                    n_exits += 1;
                }
            }
            if n_exits == 0 {
                let loc = geom::point_in_triangle(ps[0], ps[1], ps[2], q)
                    .expect("live faces are CCW");
                return (t, loc);
            }
            let mut pick = 0;
            let mut seen = 0;
            for e in 0..3 {
                if exits[e] {
                    seen += 1;
                    pick = e;
                    if n_exits == 1 || (step & 1 == 0 && seen == 1) {
                        break;
                    }
                }
            }
            let next = self.nbrs[t as usize][pick];
            if next == OUTER {
                return (t, TriLocation::Outside);
            }
            prev = t;
            t = next;
        }
        // Pathological cycling: exhaustive scan in slot order.
        for (t, &a) in self.alive.iter().enumerate() {
            if !a {
                continue;
            }
            let vs = self.verts[t];
            let ps = [
                points[vs[0] as usize],
                points[vs[1] as usize],
                points[vs[2] as usize],
            ];
            if geom::closed_contains(ps[0], ps[1], ps[2], q) {
                let loc = geom::point_in_triangle(ps[0], ps[1], ps[2], q).unwrap();
                return (t as u32, loc);
            }
        }
        (start, TriLocation::Outside)
    }

    /// Slot (within face `t`) of the vertex with the lexicographically
    /// smallest coordinates — the canonical rotation start.
    fn canonical_slot(&self, t: u32, points: &[Point]) -> usize {
        let vs = self.verts[t as usize];
        (0..3)
            .min_by_key(|&s| points[vs[s] as usize])
            .expect("nonempty")
    }

    /// Canonical breadth-first order over all live faces.
    ///
    /// Starts at the face inside the hull edge leaving the outer corner with
    /// the smallest coordinates, and expands each face's neighbors in the
    /// order of its canonical rotation.  Depends only on geometry, so encoder
    /// and decoder derive identical orders regardless of slot numbering.
    /// Returns `(order, rank)` with `rank[slot] = u32::MAX` for dead slots.
    fn canonical_bfs(&self, points: &[Point]) -> (Vec<u32>, Vec<u32>) {
        let corner = (0u32..3).min_by_key(|&c| points[c as usize]).unwrap();
        let succ = (corner + 1) % 3;
        let start = self
            .alive
            .iter()
            .enumerate()
            .find_map(|(t, &a)| {
                (a && self.dir_slot(t as u32, corner, succ).is_some()).then_some(t as u32)
            })
            .expect("hull edge has an inner face");
        let mut rank = vec![u32::MAX; self.verts.len()];
        let mut order = Vec::with_capacity(self.live);
        let mut queue = std::collections::VecDeque::new();
        rank[start as usize] = 0;
        order.push(start);
        queue.push_back(start);
        while let Some(t) = queue.pop_front() {
            let base = self.canonical_slot(t, points);
            for off in 0..3 {
                let s = (base + off) % 3;
                let nb = self.nbrs[t as usize][s];
                if nb != OUTER && rank[nb as usize] == u32::MAX {
                    rank[nb as usize] = order.len() as u32;
                    order.push(nb);
                    queue.push_back(nb);
                }
            }
        }
        debug_assert_eq!(order.len(), self.live, "face graph must stay connected");
        (order, rank)
    }
}

// ---------------------------------------------------------------------------
// Hole retriangulation (encoder side)
// ---------------------------------------------------------------------------

/// All triangulations of a convex-position d-gon as position triples, in a
/// fixed recursive order; geometric validity is checked per hole.
fn polygon_fills(d: usize) -> &'static [Vec<[u8; 3]>] {
    static FILLS: OnceLock<[Vec<Vec<[u8; 3]>>; 4]> = OnceLock::new();
    fn arcs(lo: u8, hi: u8) -> Vec<Vec<[u8; 3]>> {
        if hi - lo < 2 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for k in lo + 1..hi {
            for left in arcs(lo, k) {
                for right in arcs(k, hi) {
                    let mut fill = vec![[lo, k, hi]];
                    fill.extend_from_slice(&left);
                    fill.extend_from_slice(&right);
                    out.push(fill);
                }
            }
        }
        out
    }
    let table = FILLS.get_or_init(|| {
        [
            arcs(0, 2), // d == 3
            arcs(0, 3), // d == 4
            arcs(0, 4), // d == 5
            arcs(0, 5), // d == 6
        ]
    });
    &table[d - 3]
}

/// Is `fill` a geometrically valid triangulation of the simple polygon
/// `pts` (CCW)?  All faces must be CCW and every diagonal must lie strictly
/// inside the polygon without crossing its boundary.
fn fill_is_valid(pts: &[Point], fill: &[[u8; 3]]) -> bool {
    let d = pts.len();
    for &[a, b, c] in fill {
        if orient(pts[a as usize], pts[b as usize], pts[c as usize]) <= 0 {
            return false;
        }
    }
    let is_diag = |a: usize, b: usize| (a + 1) % d != b && (b + 1) % d != a;
    for &[a, b, c] in fill {
        for (x, y) in [(a as usize, b as usize), (b as usize, c as usize), (c as usize, a as usize)]
        {
            if !is_diag(x, y) {
                continue;
            }
            let cone = |v: usize, to: usize| {
                polygon::in_cone(
                    pts[(v + d - 1) % d],
                    pts[v],
                    pts[(v + 1) % d],
                    pts[to],
                )
            };
            if !cone(x, y) || !cone(y, x) {
                return false;
            }
            for e in 0..d {
                let f = (e + 1) % d;
                if e == x || e == y || f == x || f == y {
                    continue;
                }
                if geom::segments_cross_open(pts[x], pts[y], pts[e], pts[f]) {
                    return false;
                }
            }
        }
    }
    true
}

/// First geometrically valid retriangulation of the hole left by removing a
/// vertex whose link cycle is `pts` (CCW).
fn first_valid_fill(pts: &[Point]) -> Option<&'static Vec<[u8; 3]>> {
    polygon_fills(pts.len())
        .iter()
        .find(|fill| fill_is_valid(pts, fill))
}

// ---------------------------------------------------------------------------
// Configuration derivation and expansion
// ---------------------------------------------------------------------------

/// Reads the hole layout off the live graph: the shape across each edge of
/// `anchor`'s canonical rotation, restricted to the faces in `tau`.
/// Returns the configuration identity plus the hole boundary cycle starting
/// at the canonical rotation start.
fn derive_config(
    fg: &FaceGraph,
    anchor: u32,
    tau: &[u32],
    points: &[Point],
) -> (usize, u16, Vec<u32>) {
    fn grow(fg: &FaceGraph, at: u32, u: u32, w: u32, tau: &[u32], cycle: &mut Vec<u32>) -> Shape {
        let s = fg.dir_slot(at, u, w).expect("edge of its own face");
        let nb = fg.nbrs[at as usize][s];
        if nb == OUTER || !tau.contains(&nb) {
            cycle.push(u);
            return Shape::Leaf;
        }
        let s2 = fg.dir_slot(nb, w, u).expect("mutual adjacency");
        let x = fg.verts[nb as usize][(s2 + 2) % 3];
        let l = grow(fg, nb, u, x, tau, cycle);
        let r = grow(fg, nb, x, w, tau, cycle);
        Shape::Node(Box::new(l), Box::new(r))
    }
    let base = fg.canonical_slot(anchor, points);
    let vs = fg.verts[anchor as usize];
    let rot = [vs[base], vs[(base + 1) % 3], vs[(base + 2) % 3]];
    let mut cycle = Vec::new();
    let mut key = Vec::new();
    for j in 0..3 {
        let shape = grow(fg, anchor, rot[j], rot[(j + 1) % 3], tau, &mut cycle);
        shape.serialize(&mut key);
    }
    let &(d, code) = catalog().lookup.get(&key).expect("hole layout is cataloged");
    debug_assert_eq!(cycle.len(), d as usize);
    (d as usize, code, cycle)
}

/// Expands a configuration at `anchor` into the hole it describes.
///
/// Returns the hole's face slots and its boundary cycle (starting at the
/// anchor's canonical rotation start).  Fails when the graph does not admit
/// the layout — the decode-side integrity check.
fn expand_config(
    fg: &FaceGraph,
    anchor: u32,
    degree: usize,
    code: u16,
    points: &[Point],
) -> Result<(Vec<u32>, Vec<u32>)> {
    if !fg.alive[anchor as usize] {
        return Err(corrupt!("insertion anchor face is gone"));
    }
    let shapes = &catalog().by_extra[degree - 3][code as usize];
    let base = fg.canonical_slot(anchor, points);
    let vs = fg.verts[anchor as usize];
    let rot = [vs[base], vs[(base + 1) % 3], vs[(base + 2) % 3]];
    let mut hole = vec![anchor];
    let mut cycle = Vec::new();
    fn expand(
        fg: &FaceGraph,
        at: u32,
        u: u32,
        w: u32,
        shape: &Shape,
        hole: &mut Vec<u32>,
        cycle: &mut Vec<u32>,
    ) -> Result<()> {
        match shape {
            Shape::Leaf => {
                cycle.push(u);
                Ok(())
            }
            Shape::Node(l, r) => {
                let s = fg.dir_slot(at, u, w).expect("edge of its own face");
                let nb = fg.nbrs[at as usize][s];
                if nb == OUTER {
                    return Err(corrupt!("configuration reaches across the boundary"));
                }
                if !fg.alive[nb as usize] || hole.contains(&nb) {
                    return Err(corrupt!("configuration folds onto itself"));
                }
                let s2 = fg.dir_slot(nb, w, u).expect("mutual adjacency");
                let x = fg.verts[nb as usize][(s2 + 2) % 3];
                hole.push(nb);
                expand(fg, nb, u, x, l, hole, cycle)?;
                expand(fg, nb, x, w, r, hole, cycle)
            }
        }
    }
    for j in 0..3 {
        expand(fg, anchor, rot[j], rot[(j + 1) % 3], &shapes[j], &mut hole, &mut cycle)?;
    }
    debug_assert_eq!(cycle.len(), degree);
    Ok((hole, cycle))
}

// ---------------------------------------------------------------------------
// Codec configuration
// ---------------------------------------------------------------------------

/// Whether flag bits accompany each insertion record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodecMode {
    /// Full triangulation: connectivity only.
    Triangulation,
    /// Planar subdivision: connectivity of a wrapping triangulation plus
    /// per-edge membership flags for the original graph.
    Subdivision,
}

/// Parameters of the permutation codec.
#[derive(Debug, Clone)]
pub struct CodecConfig {
    /// Target chunk length whose internal arrangement carries stream bits.
    pub group_size: usize,
    /// Payload flavor.
    pub mode: CodecMode,
    /// Smallest total vertex count accepted by the encoder.
    pub min_n: usize,
}

/// Hard floor below which the bootstrap segment cannot carry its own stream.
const MIN_SUPPORTED_N: usize = 2048;

/// Bootstrap segment target length per mode.  Subdivision payloads carry an
/// extra edge-flag section (~3 bits per vertex), so they get a longer
/// segment and with it more pooled capacity per position.
fn boot_target(mode: CodecMode) -> usize {
    match mode {
        CodecMode::Triangulation => 2048,
        CodecMode::Subdivision => 4096,
    }
}

/// Smallest `k` with `k! >= 41^k` — the break-even group size at the
/// configuration catalog's flat payload rate, computed exactly.
fn minimal_group_size() -> usize {
    static MINIMUM: OnceLock<usize> = OnceLock::new();
    *MINIMUM.get_or_init(|| {
        let mut fact = BigUint::from(1u32);
        let mut pow = BigUint::from(1u32);
        for k in 1..100_000u64 {
            fact *= k;
            pow *= 41u64;
            if fact >= pow {
                return k as usize;
            }
        }
        unreachable!("factorial growth dominates any exponential");
    })
}

impl CodecConfig {
    /// Validates the capacity law: `group_size` must be at least the exact
    /// break-even size for the record alphabet's flat payload rate.
    pub fn new(group_size: usize, mode: CodecMode, min_n: usize) -> Result<Self> {
        let minimal = minimal_group_size();
        if group_size < minimal {
            return Err(SgiError::ParamError(format!(
                "group size {group_size} below the break-even size {minimal}"
            )));
        }
        Ok(CodecConfig { group_size, mode, min_n })
    }

    /// Default parameters for triangulation connectivity.
    pub fn triangulation() -> Self {
        Self::new(512, CodecMode::Triangulation, MIN_SUPPORTED_N).expect("default is lawful")
    }

    /// Default parameters for planar subdivisions.
    pub fn subdivision() -> Self {
        Self::new(8192, CodecMode::Subdivision, MIN_SUPPORTED_N).expect("default is lawful")
    }

    fn effective_min_n(&self) -> usize {
        self.min_n.max(MIN_SUPPORTED_N)
    }
}

/// Byte-free accounting of one encode run.
#[derive(Debug, Clone)]
pub(crate) struct CodecStats {
    /// Fixed head: address bits plus the batch size table (must fit in the
    /// bootstrap segment).
    pub head_bits: u64,
    /// Payload: record bits, then the edge-flag section in subdivision mode.
    pub payload_bits: u64,
    /// Combined capacity of the bootstrap segment and all batch chunks.
    pub capacity: u64,
    /// Independent-batch rounds.
    pub rounds: usize,
    /// One-at-a-time removals in the bootstrap segment.
    pub singles: usize,
}

// ---------------------------------------------------------------------------
// Synthetic outer corners
// ---------------------------------------------------------------------------

/// Outer corners derived from a point set's bounding box, for meshes whose
/// wrapper triangle is reconstructed rather than stored.  The triangle
/// `(A, A + (S, 0), A + (0, S))` strictly contains the bounding box.
pub(crate) fn synthetic_corners(reals: &[Point]) -> Result<[Point; 3]> {
    if reals.is_empty() {
        return Err(SgiError::TooSmall { got: 0, min: 1 });
    }
    let xmin = reals.iter().map(|p| p.x).min().unwrap();
    let xmax = reals.iter().map(|p| p.x).max().unwrap();
    let ymin = reals.iter().map(|p| p.y).min().unwrap();
    let ymax = reals.iter().map(|p| p.y).max().unwrap();
    let w = (xmax - xmin).max(ymax - ymin).max(1);
    let margin = w + 2;
    let side = 4 * w + 8;
    let a = Point { x: xmin - margin, y: ymin - margin };
    Ok([
        a,
        Point { x: a.x + side, y: a.y },
        Point { x: a.x, y: a.y + side },
    ])
}

// ---------------------------------------------------------------------------
// Encoder
// ---------------------------------------------------------------------------

/// One vertex removed during the bootstrap phase, with its pre-rendered
/// record bits and (for replay checking) the hole boundary it left.
struct SingleRemoval {
    v: u32,
    degree: usize,
    code: u16,
    bits: BitWriter,
    cycle: Vec<u32>,
}

/// One vertex removed during a batch round; record bits are rendered at
/// round end once anchors and traversal ranks are known.
struct BatchRemoval {
    v: u32,
    tau: Vec<u32>,
}

struct Encoder<'a> {
    points: &'a [Point],
    fg: FaceGraph,
}

fn edge_key(u: u32, v: u32) -> (u32, u32) {
    (u.min(v), u.max(v))
}

impl<'a> Encoder<'a> {
    /// Degrees of live vertices (edge counts; equals face count for interior
    /// vertices).
    fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.points.len()];
        for (t, &a) in self.fg.alive.iter().enumerate() {
            if a {
                for &v in &self.fg.verts[t] {
                    deg[v as usize] += 1;
                }
            }
        }
        deg
    }

    /// One live incidence per vertex.
    fn incidences(&self) -> Vec<u32> {
        let mut inc = vec![OUTER; self.points.len()];
        for (t, &a) in self.fg.alive.iter().enumerate() {
            if a {
                for &v in &self.fg.verts[t] {
                    inc[v as usize] = t as u32;
                }
            }
        }
        inc
    }

    /// Link cycle of interior vertex `v` (CCW), via its star.
    fn link_of(&self, v: u32, t0: u32) -> Vec<u32> {
        self.fg
            .star(v, t0)
            .iter()
            .map(|&t| {
                let s = self.fg.slot_of(t, v).expect("star face contains v");
                self.fg.verts[t as usize][(s + 1) % 3]
            })
            .collect()
    }

    /// Removes interior vertex `v` (degree 3..6): retriangulates its hole
    /// with the first valid fill and returns the new face slots.
    fn remove_vertex(&mut self, v: u32, t0: u32) -> Result<Vec<u32>> {
        let star = self.fg.star(v, t0);
        let link = self.link_of(v, t0);
        let d = link.len();
        debug_assert!((3..=6).contains(&d));
        let pts: Vec<Point> = link.iter().map(|&c| self.points[c as usize]).collect();
        let fill = first_valid_fill(&pts).ok_or_else(|| {
            SgiError::GeometryError(format!("hole around vertex {v} admits no fill"))
        })?;
        let tris: Vec<[u32; 3]> = fill
            .iter()
            .map(|&[a, b, c]| [link[a as usize], link[b as usize], link[c as usize]])
            .collect();
        Ok(self.fg.replace_region(&star, &tris))
    }

    /// A maximal independent set of interior vertices of degree <= 6, by
    /// ascending (degree, id), truncated to `need`.
    fn independent_batch(&self, need: usize) -> Vec<(u32, u32)> {
        let deg = self.degrees();
        let inc = self.incidences();
        let mut cands: Vec<u32> = (3..self.points.len() as u32)
            .filter(|&v| deg[v as usize] >= 1 && deg[v as usize] <= 6)
            .collect();
        cands.sort_by_key(|&v| (deg[v as usize], v));
        let mut blocked = vec![false; self.points.len()];
        let mut batch = Vec::new();
        for v in cands {
            if batch.len() == need {
                break;
            }
            if blocked[v as usize] {
                continue;
            }
            let t0 = inc[v as usize];
            for c in self.link_of(v, t0) {
                blocked[c as usize] = true;
            }
            batch.push((v, t0));
        }
        batch
    }

    /// Renders the record bits for one removal given its hole.
    fn render_record(&self, anchor: u32, tau: &[u32]) -> (usize, u16, BitWriter, Vec<u32>) {
        let (d, code, cycle) = derive_config(&self.fg, anchor, tau, self.points);
        let mut bits = BitWriter::new();
        write_record(&mut bits, d, code);
        (d, code, bits, cycle)
    }

    /// Anchor face of removed vertex `v`: the hole face containing `v` with
    /// the smallest traversal rank (the tie on a diagonal is broken by rank).
    fn anchor_of(&self, v: u32, tau: &[u32], rank: &[u32]) -> u32 {
        let q = self.points[v as usize];
        tau.iter()
            .copied()
            .filter(|&t| {
                let vs = self.fg.verts[t as usize];
                geom::closed_contains(
                    self.points[vs[0] as usize],
                    self.points[vs[1] as usize],
                    self.points[vs[2] as usize],
                    q,
                )
            })
            .min_by_key(|&t| rank[t as usize])
            .expect("removed vertex lies in its own hole")
    }
}

/// Core encoder shared by every public entry point.
///
/// `synthetic` omits the outer corners from the output (the decoder rebuilds
/// them from the stored points' bounding box).  `graph_edges` switches on
/// subdivision mode and lists the original graph's edges.
pub(crate) fn encode_mesh(
    t: &Triangulation,
    cfg: &CodecConfig,
    synthetic: bool,
    graph_edges: Option<&HashSet<(u32, u32)>>,
) -> Result<(Vec<u32>, CodecStats)> {
    let n = t.n();
    if n < cfg.effective_min_n() {
        return Err(SgiError::TooSmall { got: n, min: cfg.effective_min_n() });
    }
    match (cfg.mode, graph_edges.is_some()) {
        (CodecMode::Triangulation, false) | (CodecMode::Subdivision, true) => {}
        _ => {
            return Err(SgiError::ParamError(
                "codec mode does not match the payload kind".into(),
            ))
        }
    }
    if synthetic {
        let reals: Vec<Point> = t.points()[3..].to_vec();
        let corners = synthetic_corners(&reals)?;
        if [t.point(0), t.point(1), t.point(2)] != corners {
            return Err(SgiError::ParamError(
                "outer corners do not match the bounding-box rule".into(),
            ));
        }
    }
    // Subdivision mode: every original-graph edge must be an edge of the
    // covering mesh.  Membership travels as one bit per mesh edge, in sorted
    // edge order, at the payload tail.
    let mut mesh_edges: Vec<(u32, u32)> = Vec::new();
    if let Some(g) = graph_edges {
        let mut set = HashSet::new();
        for vs in t.tris() {
            for e in 0..3 {
                set.insert(edge_key(vs[e], vs[(e + 1) % 3]));
            }
        }
        for key in g {
            if !set.contains(key) {
                return Err(SgiError::ParamError(
                    "graph edge is not an edge of the covering mesh".into(),
                ));
            }
        }
        mesh_edges = set.into_iter().collect();
        // Coordinate order: the decoder's vertex ids are permuted relative to
        // ours, so the only enumeration both sides share is by endpoints.
        let pts = t.points();
        mesh_edges.sort_unstable_by_key(|&(u, v)| {
            let (a, b) = (pts[u as usize], pts[v as usize]);
            (a.min(b), a.max(b))
        });
    }
    let mut enc = Encoder { points: t.points(), fg: FaceGraph::from_mesh(t) };
    let z = boot_target(cfg.mode).min((n - 3) / 2);
    let mut live = n - 3;

    // Batch rounds until only the bootstrap segment's vertices remain.
    let mut round_records: Vec<Vec<(u32, BitWriter, u32)>> = Vec::new(); // (bfs rank, bits, v)
    while live > z {
        let need = live - z;
        let batch = enc.independent_batch(need);
        if batch.is_empty() {
            return Err(SgiError::GeometryError(
                "no removable interior vertex found".into(),
            ));
        }
        let mut removed = Vec::with_capacity(batch.len());
        for &(v, t0) in &batch {
            let tau = enc.remove_vertex(v, t0)?;
            removed.push(BatchRemoval { v, tau });
            live -= 1;
        }
        let (_, rank) = enc.fg.canonical_bfs(enc.points);
        let mut recs: Vec<(u32, BitWriter, u32)> = removed
            .iter()
            .map(|rem| {
                let anchor = enc.anchor_of(rem.v, &rem.tau, &rank);
                let (_, _, bits, _) = enc.render_record(anchor, &rem.tau);
                (rank[anchor as usize], bits, rem.v)
            })
            .collect();
        recs.sort_by_key(|&(r, _, _)| r);
        debug_assert!(recs.windows(2).all(|w| w[0].0 < w[1].0));
        round_records.push(recs);
    }

    // Bootstrap phase: one vertex at a time, in coordinate-descending order
    // wherever the degree cap allows.  The replay inserts in the reverse
    // order, so its targets are usually the smallest remaining coordinates —
    // exactly what the decoder predicts for free.
    let mut singles: Vec<SingleRemoval> = Vec::with_capacity(z);
    while live > 0 {
        let deg = enc.degrees();
        let inc = enc.incidences();
        let pick = (3..enc.points.len() as u32)
            .filter(|&v| (3..=6).contains(&deg[v as usize]))
            .max_by_key(|&v| enc.points[v as usize])
            .ok_or_else(|| SgiError::GeometryError("no removable interior vertex".into()))?;
        let t0 = inc[pick as usize];
        let tau = enc.remove_vertex(pick, t0)?;
        let (_, rank_post) = enc.fg.canonical_bfs(enc.points);
        let anchor = enc.anchor_of(pick, &tau, &rank_post);
        let (d, code, bits, cycle) = enc.render_record(anchor, &tau);
        singles.push(SingleRemoval { v: pick, degree: d, code, bits, cycle });
        live -= 1;
    }
    debug_assert_eq!(enc.fg.live, 1);
    debug_assert_eq!(singles.len(), z);

    // Streams.  The head (bootstrap address bits plus the batch size table)
    // must fit inside the bootstrap segment; the payload (record bits, then
    // the edge flags in subdivision mode) fills the segment's remainder and
    // spills into the batch chunks, so capacity is pooled across both.
    let mut addr = BitWriter::new();
    let mut payload = BitWriter::new();
    replay_bootstrap_emit(enc.points, &singles, &mut addr, &mut payload)?;
    let rounds_count = round_records.len();
    let mut head = BitWriter::new();
    head.write_gamma(addr.len() as u64 + 1);
    head.extend(&addr);
    head.write_gamma(rounds_count as u64 + 1);
    for recs in round_records.iter().rev() {
        head.write_gamma(recs.len() as u64);
    }
    for recs in round_records.iter().rev() {
        for (_, bits, _) in recs {
            payload.extend(bits);
        }
    }
    if let Some(g) = graph_edges {
        for key in &mesh_edges {
            payload.push(g.contains(key));
        }
    }

    // Chunk layout and capacity.
    let mut chunk_sizes: Vec<usize> = Vec::new();
    for recs in round_records.iter().rev() {
        let m = recs.len();
        let nc = m.div_ceil(cfg.group_size);
        let base = m / nc;
        let extra = m % nc;
        for i in 0..nc {
            chunk_sizes.push(base + usize::from(i < extra));
        }
    }
    let mut cap_cache: HashMap<usize, u64> = HashMap::new();
    let mut chunk_cap_total = 0u64;
    let caps: Vec<u64> = chunk_sizes
        .iter()
        .map(|&c| {
            let cap = *cap_cache.entry(c).or_insert_with(|| floor_lg_factorial(c));
            chunk_cap_total += cap;
            cap
        })
        .collect();
    let boot_cap = floor_lg_factorial(z);
    if (head.len() as u64) > boot_cap {
        return Err(SgiError::InternalCapacity { need: head.len() as u64, have: boot_cap });
    }
    let capacity = boot_cap + chunk_cap_total;
    let need = (head.len() + payload.len()) as u64;
    if need > capacity {
        return Err(SgiError::InternalCapacity { need, have: capacity });
    }

    // Split the payload: the bootstrap segment takes what fits after the
    // head, the chunks carry the spill.
    let take = payload.bits.len().min(boot_cap as usize - head.len());
    let mut boot_seg_bits = head.bits.clone();
    boot_seg_bits.extend_from_slice(&payload.bits[..take]);
    boot_seg_bits.resize(boot_cap as usize, 0);
    let spill = &payload.bits[take..];

    // Materialize the ordering: batches newest first, each chunk's ids
    // arranged to carry its slice of the spilled payload; then the bootstrap
    // segment; then the outer corners.
    let points = t.points();
    let mut ordering: Vec<u32> = Vec::with_capacity(if synthetic { n - 3 } else { n });
    let mut cursor = 0usize;
    let mut chunk_iter = caps.iter();
    for recs in round_records.iter().rev() {
        let mut ids: Vec<u32> = recs.iter().map(|&(_, _, v)| v).collect();
        ids.sort_by_key(|&v| points[v as usize]);
        let m = ids.len();
        let nc = m.div_ceil(cfg.group_size);
        let base = m / nc;
        let extra = m % nc;
        let mut off = 0usize;
        for i in 0..nc {
            let c = base + usize::from(i < extra);
            let cap = *chunk_iter.next().expect("chunk layout replays identically") as usize;
            let take = cap.min(spill.len().saturating_sub(cursor));
            let mut slice = spill[cursor..cursor + take].to_vec();
            cursor += take;
            slice.resize(cap, 0);
            let perm = bits_to_perm(&slice, c);
            for &p in &perm {
                ordering.push(ids[off + p as usize]);
            }
            off += c;
        }
    }
    let mut boot_ids: Vec<u32> = singles.iter().map(|s| s.v).collect();
    boot_ids.sort_by_key(|&v| points[v as usize]);
    let perm = bits_to_perm(&boot_seg_bits, z);
    for &p in &perm {
        ordering.push(boot_ids[p as usize]);
    }
    if !synthetic {
        ordering.extend_from_slice(&[0, 1, 2]);
    }
    debug_assert_eq!(ordering.len(), if synthetic { n - 3 } else { n });
    let stats = CodecStats {
        head_bits: head.len() as u64,
        payload_bits: payload.len() as u64,
        capacity,
        rounds: rounds_count,
        singles: z,
    };
    Ok((ordering, stats))
}

// ---------------------------------------------------------------------------
// Bootstrap replay (shared by encoder simulation and decoder)
// ---------------------------------------------------------------------------

/// Where each not-yet-inserted point lands in the live graph: the one or two
/// faces whose closed triangles contain it.
struct Landings {
    map: HashMap<u32, Vec<u32>>,
}

impl Landings {
    fn init(points: &[Point], fg: &FaceGraph, ids: &[u32]) -> Result<Self> {
        let mut map = HashMap::with_capacity(ids.len());
        let start = fg
            .alive
            .iter()
            .position(|&a| a)
            .expect("graph has a live face") as u32;
        for &id in ids {
            let faces = land(points, fg, points[id as usize], start)?;
            map.insert(id, faces);
        }
        Ok(Landings { map })
    }

    /// Re-resolves points whose landing faces were replaced.
    fn update(
        &mut self,
        points: &[Point],
        fg: &FaceGraph,
        dead: &[u32],
        created: &[u32],
    ) -> Result<()> {
        let affected: Vec<u32> = self
            .map
            .iter()
            .filter(|(_, faces)| faces.iter().any(|f| dead.contains(f)))
            .map(|(&id, _)| id)
            .collect();
        for id in affected {
            let q = points[id as usize];
            let mut faces: Vec<u32> = self.map[&id]
                .iter()
                .copied()
                .filter(|f| !dead.contains(f) && fg.alive[*f as usize])
                .collect();
            for &t in created {
                let vs = fg.verts[t as usize];
                if geom::closed_contains(
                    points[vs[0] as usize],
                    points[vs[1] as usize],
                    points[vs[2] as usize],
                    q,
                ) {
                    faces.push(t);
                }
            }
            if faces.is_empty() {
                return Err(corrupt!("pending point fell out of the replaced region"));
            }
            faces.sort_unstable();
            faces.dedup();
            self.map.insert(id, faces);
        }
        Ok(())
    }

}

/// Closed-containing faces of `q` (one, or two across a shared edge).
fn land(points: &[Point], fg: &FaceGraph, q: Point, start: u32) -> Result<Vec<u32>> {
    let (t, loc) = fg.locate(points, q, start);
    match loc {
        TriLocation::Outside => Err(corrupt!("stored point lies outside the boundary")),
        TriLocation::OnVertex(_) => Err(corrupt!("stored point coincides with a vertex")),
        TriLocation::Inside => Ok(vec![t]),
        TriLocation::OnEdge(e) => {
            let nb = fg.nbrs[t as usize][e];
            if nb == OUTER {
                Ok(vec![t])
            } else {
                let mut v = vec![t.min(nb), t.max(nb)];
                v.dedup();
                Ok(v)
            }
        }
    }
}

/// Applies one insertion: expands the configuration at `anchor`, checks the
/// star is geometrically sound, replaces the hole by the star of `v`, and
/// maintains the edge-flag map.  Returns (dead slots, new slots, cycle).
fn apply_insert(
    points: &[Point],
    fg: &mut FaceGraph,
    v: u32,
    anchor: u32,
    degree: usize,
    code: u16,
) -> Result<(Vec<u32>, Vec<u32>, Vec<u32>)> {
    if code as usize >= catalog().by_extra[degree - 3].len() {
        return Err(corrupt!("configuration index {code} out of range for degree {degree}"));
    }
    let (hole, cycle) = expand_config(fg, anchor, degree, code, points)?;
    let q = points[v as usize];
    for j in 0..degree {
        let a = points[cycle[j] as usize];
        let b = points[cycle[(j + 1) % degree] as usize];
        if orient(q, a, b) <= 0 {
            return Err(corrupt!("inserted star is not positively oriented"));
        }
    }
    let tris: Vec<[u32; 3]> = (0..degree)
        .map(|j| [v, cycle[j], cycle[(j + 1) % degree]])
        .collect();
    let new = fg.replace_region(&hole, &tris);
    Ok((hole, new, cycle))
}

/// Encoder-side bootstrap replay: walks the insertions in decode order and
/// emits the address bits and record bits the decoder will consume.
fn replay_bootstrap_emit(
    points: &[Point],
    singles: &[SingleRemoval],
    addr: &mut BitWriter,
    payload: &mut BitWriter,
) -> Result<()> {
    let mut fg = FaceGraph::outer_only();
    let ids: Vec<u32> = singles.iter().rev().map(|s| s.v).collect();
    let mut landings = Landings::init(points, &fg, &ids)?;
    let mut remaining = ids.clone();
    remaining.sort_by_key(|&v| points[v as usize]);
    for s in singles.iter().rev() {
        let (_, rank) = fg.canonical_bfs(points);
        let pos = remaining
            .iter()
            .position(|&id| id == s.v)
            .expect("target not yet inserted");
        // One prediction bit: the expected next point is the smallest
        // remaining coordinate; a miss spells out the position instead.
        if pos == 0 {
            addr.push(true);
        } else {
            addr.push(false);
            addr.write_gamma(pos as u64);
        }
        payload.extend(&s.bits);
        let anchor = landings.map[&s.v]
            .iter()
            .copied()
            .min_by_key(|&f| rank[f as usize])
            .expect("target has a landing");
        let (dead, new, cycle) =
            apply_insert(points, &mut fg, s.v, anchor, s.degree, s.code)?;
        debug_assert_eq!(cycle, s.cycle, "replay must rebuild the recorded hole");
        remaining.remove(pos);
        landings.map.remove(&s.v);
        landings.update(points, &fg, &dead, &new)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Decoder
// ---------------------------------------------------------------------------

/// Core decoder shared by every public entry point.  Returns the rebuilt
/// triangulation (vertex `p + 3` is stored position `p`; vertices 0..3 are
/// the outer corners) and, in subdivision mode, the surviving original-graph
/// edges.
pub(crate) fn decode_mesh(
    stored: &[Point],
    cfg: &CodecConfig,
    synthetic: bool,
) -> Result<(Triangulation, Option<Vec<(u32, u32)>>)> {
    let n = stored.len() + if synthetic { 3 } else { 0 };
    if n < cfg.effective_min_n() {
        return Err(SgiError::TooSmall { got: n, min: cfg.effective_min_n() });
    }
    let (corners, reals) = if synthetic {
        (synthetic_corners(stored)?, stored)
    } else {
        let c = [stored[n - 3], stored[n - 2], stored[n - 1]];
        (c, &stored[..n - 3])
    };
    if orient(corners[0], corners[1], corners[2]) <= 0 {
        return Err(corrupt!("outer corners are not counter-clockwise"));
    }
    let mut points: Vec<Point> = Vec::with_capacity(n);
    points.extend_from_slice(&corners);
    points.extend_from_slice(reals);
    {
        let mut sorted = points.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(corrupt!("point array contains duplicates"));
        }
    }
    let interior = n - 3;
    let z = boot_target(cfg.mode).min(interior / 2);
    let boot_cap = floor_lg_factorial(z);

    // Bootstrap segment: the head (address bits, then the batch size table),
    // followed by the payload prefix.
    let boot_ids: Vec<u32> = (interior - z..interior).map(|p| p as u32 + 3).collect();
    let seg = segment_bits(&points, &boot_ids, boot_cap)?;
    let mut head = BitReader::new(&seg);
    let alen = (head.read_gamma()? - 1) as usize;
    if alen > seg.len() - head.pos {
        return Err(corrupt!("address stream longer than the bootstrap segment"));
    }
    let addr_bits = &seg[head.pos..head.pos + alen];
    let mut addr = BitReader::new(addr_bits);
    head.pos += alen;

    // Batch size table.
    let rounds = head.read_gamma()? - 1;
    if rounds as usize > interior {
        return Err(corrupt!("implausible round count {rounds}"));
    }
    let mut sizes = Vec::with_capacity(rounds as usize);
    let mut total = 0u64;
    for _ in 0..rounds {
        let m = head.read_gamma()?;
        total += m;
        if total > (interior - z) as u64 {
            return Err(corrupt!("batch sizes exceed the stored prefix"));
        }
        sizes.push(m as usize);
    }
    if total != (interior - z) as u64 {
        return Err(corrupt!(
            "batch sizes cover {total} positions, expected {}",
            interior - z
        ));
    }

    // Payload: the segment remainder, then every batch chunk's bits in array
    // order.
    let mut payload_bits: Vec<u8> = seg[head.pos..].to_vec();
    {
        let mut offset = 0usize;
        let mut cap_cache: HashMap<usize, u64> = HashMap::new();
        for &m in &sizes {
            let nc = m.div_ceil(cfg.group_size);
            let base = m / nc;
            let extra = m % nc;
            let mut off = offset;
            for i in 0..nc {
                let c = base + usize::from(i < extra);
                let ids: Vec<u32> = (off..off + c).map(|p| p as u32 + 3).collect();
                let cap = *cap_cache.entry(c).or_insert_with(|| floor_lg_factorial(c));
                payload_bits.extend(segment_bits(&points, &ids, cap)?);
                off += c;
            }
            offset += m;
        }
    }
    let mut payload = BitReader::new(&payload_bits);

    // Replay the bootstrap insertions.
    let mut fg = FaceGraph::outer_only();
    let mut landings = Landings::init(&points, &fg, &boot_ids)?;
    let mut remaining = boot_ids.clone();
    remaining.sort_by_key(|&v| points[v as usize]);
    for _ in 0..z {
        let (_, rank) = fg.canonical_bfs(&points);
        let pos = if addr.read_bit()? {
            0usize
        } else {
            let p = addr.read_gamma()? as usize;
            if p >= remaining.len() {
                return Err(corrupt!("insertion position outside the remaining set"));
            }
            p
        };
        let v = remaining[pos];
        let anchor = landings.map[&v]
            .iter()
            .copied()
            .min_by_key(|&f| rank[f as usize])
            .expect("pending point has a landing");
        let (degree, code) = read_record(&mut payload)?;
        let (dead, new, _) = apply_insert(&points, &mut fg, v, anchor, degree, code)?;
        remaining.remove(pos);
        landings.map.remove(&v);
        landings.update(&points, &fg, &dead, &new)?;
    }

    // Replay the batches.
    let mut offset = 0usize;
    for &m in &sizes {
        let (order, rank) = fg.canonical_bfs(&points);
        let block: Vec<u32> = (offset..offset + m).map(|p| p as u32 + 3).collect();
        // Locate in coordinate-proximity order so successive walks stay
        // short.
        let xmin = block.iter().map(|&v| points[v as usize].x).min().unwrap();
        let ymin = block.iter().map(|&v| points[v as usize].y).min().unwrap();
        let origin = Point { x: xmin, y: ymin };
        let mut by_prox: Vec<u32> = block.clone();
        by_prox.sort_by_key(|&v| geom::morton_key(points[v as usize], origin));
        let mut anchored: Vec<(u32, u32)> = Vec::with_capacity(m);
        let mut start = fg.alive.iter().position(|&a| a).unwrap() as u32;
        for &v in &by_prox {
            let faces = land(&points, &fg, points[v as usize], start)?;
            let anchor = faces
                .iter()
                .copied()
                .min_by_key(|&f| rank[f as usize])
                .expect("landing nonempty");
            start = anchor;
            anchored.push((rank[anchor as usize], v));
        }
        anchored.sort_unstable();
        if anchored.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(corrupt!("two batch points share an anchor face"));
        }
        // Anchor slots survive until their own insertion: holes within one
        // batch are disjoint.
        for (r, v) in anchored {
            let anchor = order[r as usize];
            let (degree, code) = read_record(&mut payload)?;
            apply_insert(&points, &mut fg, v, anchor, degree, code)?;
        }
        offset += m;
    }

    let faces = fg.to_faces();
    let mesh = Triangulation::from_faces(points, faces)
        .map_err(|e| corrupt!("rebuilt mesh is inconsistent: {e}"))?;
    let graph = match cfg.mode {
        CodecMode::Triangulation => None,
        CodecMode::Subdivision => {
            // Edge-flag section: one bit per mesh edge, enumerated by
            // endpoint coordinates (the only order shared across the two
            // sides' vertex labelings).
            let mut keys: Vec<(u32, u32)> = mesh
                .tris()
                .iter()
                .flat_map(|vs| (0..3).map(move |e| edge_key(vs[e], vs[(e + 1) % 3])))
                .collect();
            keys.sort_unstable();
            keys.dedup();
            let mesh_pts = mesh.points();
            keys.sort_unstable_by_key(|&(u, v)| {
                let (a, b) = (mesh_pts[u as usize], mesh_pts[v as usize]);
                (a.min(b), a.max(b))
            });
            let mut edges = Vec::new();
            for &key in &keys {
                if payload.read_bit()? {
                    if key.0 < 3 {
                        return Err(corrupt!("original-graph edge touches a wrapper corner"));
                    }
                    edges.push(key);
                }
            }
            edges.sort_unstable();
            Some(edges)
        }
    };
    Ok((mesh, graph))
}

/// Stream bits carried by the arrangement of `ids` (stored-array order)
/// relative to their coordinate-sorted order.
fn segment_bits(points: &[Point], ids: &[u32], cap: u64) -> Result<Vec<u8>> {
    let mut sorted: Vec<u32> = ids.to_vec();
    sorted.sort_by_key(|&v| points[v as usize]);
    let perm: Vec<u32> = ids
        .iter()
        .map(|&v| {
            sorted
                .binary_search_by_key(&points[v as usize], |&w| points[w as usize])
                .expect("id present in its own segment") as u32
        })
        .collect();
    perm_to_bits(&perm, cap)
}

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

/// Encodes a triangulation as an ordering of its vertex ids.
///
/// The outer corners occupy the last three positions; every other structural
/// bit of `t` is carried by the order alone, and
/// [`decode_triangulation`] reconstructs the face set exactly.
pub fn encode_triangulation(t: &Triangulation, cfg: &CodecConfig) -> Result<Vec<u32>> {
    if cfg.mode != CodecMode::Triangulation {
        return Err(SgiError::ParamError("config is not in triangulation mode".into()));
    }
    encode_mesh(t, cfg, false, None).map(|(o, _)| o)
}

/// Rebuilds the triangulation encoded in the order of `points`.
///
/// Vertex `p + 3` of the result is `points[p]`; vertices 0..3 are the outer
/// corners (the last three entries of `points`).
pub fn decode_triangulation(points: &[Point], cfg: &CodecConfig) -> Result<Triangulation> {
    if cfg.mode != CodecMode::Triangulation {
        return Err(SgiError::ParamError("config is not in triangulation mode".into()));
    }
    decode_mesh(points, cfg, false).map(|(t, _)| t)
}

/// Encodes a planar subdivision as an ordering of its points plus three
/// wrapper corners (ids `n`, `n+1`, `n+2`, always the final three entries).
///
/// The subdivision is wrapped in a bounding triangle and triangulated; flag
/// bits mark which drawn edges belong to `g`, so [`decode_subdivision`]
/// recovers exactly the original edge set.
pub fn encode_subdivision(g: &Subdivision, cfg: &CodecConfig) -> Result<Vec<u32>> {
    if cfg.mode != CodecMode::Subdivision {
        return Err(SgiError::ParamError("config is not in subdivision mode".into()));
    }
    let (wrap, g_edges) = wrap_subdivision(g)?;
    encode_mesh(&wrap, cfg, false, Some(&g_edges)).map(|(o, _)| o)
}

/// Rebuilds the subdivision encoded in the order of `points` (the last three
/// entries being the wrapper corners).  The result's point array is
/// `points` without those corners, in stored order.
pub fn decode_subdivision(points: &[Point], cfg: &CodecConfig) -> Result<Subdivision> {
    if cfg.mode != CodecMode::Subdivision {
        return Err(SgiError::ParamError("config is not in subdivision mode".into()));
    }
    let (_, edges) = decode_mesh(points, cfg, false)?;
    let edges = edges.expect("subdivision mode yields graph edges");
    let stored = &points[..points.len() - 3];
    Ok(Subdivision {
        points: stored.to_vec(),
        edges: edges.into_iter().map(|(u, v)| (u - 3, v - 3)).collect(),
    })
}

/// Wraps a subdivision in a bounding triangle and triangulates every face
/// and the surrounding gap.  Returns the wrapper mesh (corners first, then
/// `g`'s points shifted by 3) and `g`'s edge set in wrapper ids.
pub(crate) fn wrap_subdivision(g: &Subdivision) -> Result<(Triangulation, HashSet<(u32, u32)>)> {
    g.validate()?;
    let n_g = g.points.len();
    if n_g < 3 {
        return Err(SgiError::TooSmall { got: n_g, min: 3 });
    }
    let mut degree = vec![0u32; n_g];
    for &(u, v) in &g.edges {
        degree[u as usize] += 1;
        degree[v as usize] += 1;
    }
    if let Some(v) = degree.iter().position(|&d| d < 2) {
        return Err(SgiError::GeometryError(format!(
            "vertex {v} has degree {} — faces cannot all be simple polygons",
            degree[v]
        )));
    }
    let corners = synthetic_corners(&g.points)?;
    let mut points: Vec<Point> = Vec::with_capacity(n_g + 3);
    points.extend_from_slice(&corners);
    points.extend(g.points.iter().copied());
    let shift = |c: &[u32]| -> Vec<u32> { c.iter().map(|&v| v + 3).collect() };
    let cycles = planar_face_cycles(&g.points, &g.edges);
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut contours: Vec<Vec<u32>> = Vec::new();
    for cycle in &cycles {
        let area = crate::mesh::cycle_area2(&g.points, cycle);
        if area > 0 {
            let mut seen = HashSet::new();
            if cycle.iter().any(|&v| !seen.insert(v)) {
                return Err(SgiError::NonSimpleFace(faces.len()));
            }
            faces.extend(polygon::clip_nodes(&points, &shift(cycle))?);
        } else {
            contours.push(shift(cycle));
        }
    }
    faces.extend(polygon::triangulate_region(
        &points,
        &[0, 1, 2],
        &contours,
    )?);
    let wrap = Triangulation::from_faces(points, faces)?;
    let g_edges: HashSet<(u32, u32)> = g
        .edges
        .iter()
        .map(|&(u, v)| edge_key(u + 3, v + 3))
        .collect();
    Ok((wrap, g_edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn coord_faces(t: &Triangulation) -> BTreeSet<[Point; 3]> {
        t.tris()
            .iter()
            .map(|&[a, b, c]| {
                let mut f = [t.point(a), t.point(b), t.point(c)];
                f.sort_unstable();
                f
            })
            .collect()
    }

    fn coord_edges(points: &[Point], edges: &[(u32, u32)]) -> BTreeSet<(Point, Point)> {
        edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (points[u as usize], points[v as usize]);
                (a.min(b), a.max(b))
            })
            .collect()
    }

    fn assert_valid_ordering(ordering: &[u32], n: usize) {
        assert_eq!(ordering.len(), n);
        let mut seen = vec![false; n];
        for &v in ordering {
            assert!(!seen[v as usize], "vertex {v} repeated");
            seen[v as usize] = true;
        }
        let mut last: Vec<u32> = ordering[n - 3..].to_vec();
        last.sort_unstable();
        assert_eq!(last, vec![0, 1, 2], "outer corners must come last");
    }

    fn roundtrip_tri(n: usize, seed: u64) {
        let t = Triangulation::gen_random(n, seed).unwrap();
        let cfg = CodecConfig::triangulation();
        let ordering = encode_triangulation(&t, &cfg).unwrap();
        assert_valid_ordering(&ordering, n);
        let stored: Vec<Point> = ordering.iter().map(|&v| t.point(v)).collect();
        let t2 = decode_triangulation(&stored, &cfg).unwrap();
        assert_eq!(coord_faces(&t), coord_faces(&t2), "n={n} seed={seed}");
    }

    #[test]
    fn configuration_census_is_41() {
        let cat = catalog();
        let counts: Vec<usize> = cat.by_extra.iter().map(Vec::len).collect();
        assert_eq!(counts, [1, 3, 9, 28]);
        assert_eq!(cat.lookup.len(), 41);
    }

    #[test]
    fn polygon_fill_counts_are_catalan() {
        assert_eq!(polygon_fills(3).len(), 1);
        assert_eq!(polygon_fills(4).len(), 2);
        assert_eq!(polygon_fills(5).len(), 5);
        assert_eq!(polygon_fills(6).len(), 14);
    }

    #[test]
    fn gamma_code_roundtrip() {
        let mut w = BitWriter::new();
        let values: Vec<u64> = (1..200).chain([255, 256, 1 << 20, (1 << 40) + 17]).collect();
        for &v in &values {
            w.write_gamma(v);
        }
        let mut r = BitReader::new(&w.bits);
        for &v in &values {
            assert_eq!(r.read_gamma().unwrap(), v);
        }
        assert!(r.read_gamma().is_err(), "exhaustion is an error");
    }

    #[test]
    fn truncated_binary_roundtrip() {
        for n in 1..=40u32 {
            let mut w = BitWriter::new();
            for v in 0..n {
                write_tb(&mut w, v, n);
            }
            let mut r = BitReader::new(&w.bits);
            for v in 0..n {
                assert_eq!(read_tb(&mut r, n).unwrap(), v, "n={n}");
            }
        }
    }

    #[test]
    fn rank_unrank_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in [1usize, 2, 3, 5, 16, 64, 200] {
            for _ in 0..5 {
                let mut perm: Vec<u32> = (0..k as u32).collect();
                perm.shuffle(&mut rng);
                let idx = perm_to_index(&perm);
                assert_eq!(index_to_perm(&idx, k).unwrap(), perm, "k={k}");
            }
        }
        // Known ranks.
        assert_eq!(perm_to_index(&[1, 2, 0]), BigUint::from(3u32));
        assert_eq!(perm_to_index(&[3, 2, 1, 0]), BigUint::from(23u32));
        assert_eq!(index_to_perm(&BigUint::from(0u32), 4).unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn pack_low_symbol_pairs() {
        assert_eq!(perm_pack(&[0, 0], 2, 3).unwrap(), vec![0, 1, 2]);
        assert_eq!(perm_pack(&[1, 1], 2, 3).unwrap(), vec![1, 2, 0]);
    }

    #[test]
    fn unpack_reversed_arrangement() {
        // Rank of (3,2,1,0) is 23; its four low bits are 0111.
        assert_eq!(perm_unpack(&[3, 2, 1, 0], 2, 4).unwrap(), vec![0, 1, 1, 1]);
    }

    #[test]
    fn unpack_of_identity_is_empty() {
        let identity: Vec<u32> = (0..41).collect();
        assert_eq!(perm_unpack(&identity, 41, 0).unwrap(), Vec::<u32>::new());
    }

    #[test]
    fn pack_unpack_radix41_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let symbols: Vec<u32> = (0..128).map(|_| rng.gen_range(0..41)).collect();
            let perm = perm_pack(&symbols, 41, 128).unwrap();
            assert_eq!(perm_unpack(&perm, 41, 128).unwrap(), symbols);
        }
    }

    #[test]
    fn pack_unpack_random_radices() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let radix = rng.gen_range(2..50u32);
            let k = rng.gen_range(2..30usize);
            // Largest count with radix^count <= k!.
            let mut fact = BigUint::from(1u32);
            for i in 2..=k as u64 {
                fact *= i;
            }
            let mut count = 0usize;
            let mut pow = BigUint::from(1u32);
            while &pow * radix <= fact {
                pow *= radix;
                count += 1;
            }
            let symbols: Vec<u32> = (0..count).map(|_| rng.gen_range(0..radix)).collect();
            let perm = perm_pack(&symbols, radix, k).unwrap();
            assert_eq!(perm_unpack(&perm, radix, count).unwrap(), symbols);
        }
    }

    #[test]
    fn pack_capacity_is_exact() {
        // 2^25 > 24! / ... : for k = 4 (4! = 24), five radix-2 symbols need 32 > 24.
        assert!(matches!(
            perm_pack(&[0; 5], 2, 4),
            Err(SgiError::CapacityExceeded { .. })
        ));
        assert!(perm_pack(&[0; 4], 2, 4).is_ok());
        assert!(matches!(
            perm_unpack(&[0, 1, 2, 3], 2, 5),
            Err(SgiError::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn unpack_rejects_non_permutations() {
        assert!(matches!(
            perm_unpack(&[0, 0, 1], 2, 1),
            Err(SgiError::NotAPermutation(3))
        ));
        assert!(matches!(
            perm_unpack(&[1, 2, 3], 2, 1),
            Err(SgiError::NotAPermutation(3))
        ));
    }

    #[test]
    fn pack_rejects_out_of_range_symbols() {
        assert!(matches!(perm_pack(&[2], 2, 3), Err(SgiError::ParamError(_))));
    }

    #[test]
    fn group_size_law_is_exact() {
        let min = minimal_group_size();
        // k! first overtakes 41^k near k = e * 41; assert structurally that
        // the law accepts min and rejects min - 1.
        assert!(min <= 512, "break-even group size {min}");
        assert!(CodecConfig::new(min, CodecMode::Triangulation, 2048).is_ok());
        assert!(CodecConfig::new(min - 1, CodecMode::Triangulation, 2048).is_err());
        assert!(CodecConfig::new(min, CodecMode::Subdivision, 2048).is_ok());
        assert!(CodecConfig::new(min - 1, CodecMode::Subdivision, 2048).is_err());
        // Both defaults satisfy the law with room to spare.
        assert!(CodecConfig::triangulation().group_size >= min);
        assert!(CodecConfig::subdivision().group_size >= min);
    }

    #[test]
    fn synthetic_corners_contain_their_points() {
        let pts = vec![
            Point { x: 5, y: 9 },
            Point { x: -40, y: 2 },
            Point { x: 17, y: -33 },
        ];
        let [a, b, c] = synthetic_corners(&pts).unwrap();
        assert!(orient(a, b, c) > 0);
        for &p in &pts {
            assert!(orient(a, b, p) > 0 && orient(b, c, p) > 0 && orient(c, a, p) > 0);
        }
    }

    #[test]
    fn triangulation_roundtrip_at_minimum_size() {
        roundtrip_tri(2048, 42);
        roundtrip_tri(2048, 1000);
    }

    #[test]
    fn triangulation_roundtrip_mid_sizes() {
        roundtrip_tri(3000, 5);
        roundtrip_tri(4096, 99);
    }

    #[test]
    fn triangulation_roundtrip_spec_size() {
        roundtrip_tri(5000, 2024);
    }

    #[test]
    fn encode_rejects_small_meshes() {
        let t = Triangulation::gen_random(1000, 3).unwrap();
        let cfg = CodecConfig::triangulation();
        assert!(matches!(
            encode_triangulation(&t, &cfg),
            Err(SgiError::TooSmall { got: 1000, min: 2048 })
        ));
    }

    #[test]
    fn shuffled_ordering_fails_or_differs() {
        let n = 2048;
        let t = Triangulation::gen_random(n, 77).unwrap();
        let cfg = CodecConfig::triangulation();
        let ordering = encode_triangulation(&t, &cfg).unwrap();
        let stored: Vec<Point> = ordering.iter().map(|&v| t.point(v)).collect();
        let reference = coord_faces(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let mut shuffled = stored.clone();
            shuffled[..n - 3].shuffle(&mut rng);
            match decode_triangulation(&shuffled, &cfg) {
                Err(_) => {}
                Ok(t2) => assert_ne!(coord_faces(&t2), reference, "shuffle went unnoticed"),
            }
        }
    }

    #[test]
    fn swapped_pair_fails_or_differs() {
        let n = 2048;
        let t = Triangulation::gen_random(n, 123).unwrap();
        let cfg = CodecConfig::triangulation();
        let ordering = encode_triangulation(&t, &cfg).unwrap();
        let mut stored: Vec<Point> = ordering.iter().map(|&v| t.point(v)).collect();
        let reference = coord_faces(&t);
        stored.swap(100, 1500);
        match decode_triangulation(&stored, &cfg) {
            Err(_) => {}
            Ok(t2) => assert_ne!(coord_faces(&t2), reference, "swap went unnoticed"),
        }
    }

    /// Drops a fraction of interior edges such that no face loses two edges
    /// (merged faces stay simple quadrilaterals).
    fn drop_interior_edges(t: &Triangulation, frac: f64, seed: u64) -> Subdivision {
        let mut owners: HashMap<(u32, u32), Vec<usize>> = HashMap::new();
        for (f, vs) in t.tris().iter().enumerate() {
            for e in 0..3 {
                owners.entry(edge_key(vs[e], vs[(e + 1) % 3])).or_default().push(f);
            }
        }
        let mut interior: Vec<(u32, u32)> = owners
            .iter()
            .filter(|(_, fs)| fs.len() == 2)
            .map(|(&k, _)| k)
            .collect();
        interior.sort_unstable();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        interior.shuffle(&mut rng);
        let target = (interior.len() as f64 * frac) as usize;
        let mut touched = vec![false; t.f()];
        let mut dropped: HashSet<(u32, u32)> = HashSet::new();
        for &e in &interior {
            if dropped.len() == target {
                break;
            }
            let fs = &owners[&e];
            if fs.iter().any(|&f| touched[f]) {
                continue;
            }
            for &f in fs {
                touched[f] = true;
            }
            dropped.insert(e);
        }
        let edges: Vec<(u32, u32)> = owners
            .keys()
            .filter(|k| !dropped.contains(k))
            .copied()
            .collect();
        Subdivision { points: t.points().to_vec(), edges }
    }

    fn roundtrip_sub(g: &Subdivision) {
        let cfg = CodecConfig::subdivision();
        let ordering = encode_subdivision(g, &cfg).unwrap();
        let n = g.points.len() + 3;
        assert_valid_ordering_sub(&ordering, n, g.points.len());
        // The wrapper's points: g's points plus derived corners, ids shifted.
        let corners = synthetic_corners(&g.points).unwrap();
        let wrapped: Vec<Point> = corners.iter().copied().chain(g.points.iter().copied()).collect();
        let stored: Vec<Point> = ordering.iter().map(|&v| wrapped[v as usize]).collect();
        let g2 = decode_subdivision(&stored, &cfg).unwrap();
        let mut pts1: Vec<Point> = g.points.clone();
        let mut pts2: Vec<Point> = g2.points.clone();
        pts1.sort_unstable();
        pts2.sort_unstable();
        assert_eq!(pts1, pts2, "point sets differ");
        assert_eq!(
            coord_edges(&g.points, &g.edges),
            coord_edges(&g2.points, &g2.edges),
            "edge sets differ"
        );
    }

    fn assert_valid_ordering_sub(ordering: &[u32], n: usize, n_g: usize) {
        assert_eq!(ordering.len(), n);
        let mut seen = vec![false; n];
        for &v in ordering {
            assert!(!seen[v as usize]);
            seen[v as usize] = true;
        }
        // Wrapper corners are ids 0..3 of the wrapped mesh and come last.
        let mut last: Vec<u32> = ordering[n - 3..].to_vec();
        last.sort_unstable();
        assert_eq!(last, vec![0, 1, 2]);
        let _ = n_g;
    }

    #[test]
    fn subdivision_zero_deletion_matches_triangulation() {
        let t = Triangulation::gen_random(2048, 8).unwrap();
        let g = drop_interior_edges(&t, 0.0, 1);
        assert_eq!(coord_edges(&g.points, &g.edges).len(), 3 * 2048 - 6);
        roundtrip_sub(&g);
    }

    #[test]
    fn wrap_mesh_rebuilds_under_relabeling() {
        // The decoder sees permuted vertex ids; the wrapper mesh must still
        // rebuild face-for-face and the edge-flag section must land on the
        // right edges.
        let t = Triangulation::gen_random(10_000, 21).unwrap();
        let g = drop_interior_edges(&t, 0.1, 2);
        let (wrap, g_edges) = wrap_subdivision(&g).unwrap();
        let cfg = CodecConfig::subdivision();
        let (ordering, _) = encode_mesh(&wrap, &cfg, false, Some(&g_edges)).unwrap();
        let stored: Vec<Point> = ordering.iter().map(|&v| wrap.point(v)).collect();
        let (mesh2, edges2) = decode_mesh(&stored, &cfg, false).unwrap();
        assert_eq!(coord_faces(&wrap), coord_faces(&mesh2), "wrap mesh differs");
        let wrap_pts = wrap.points();
        let mesh2_pts = mesh2.points();
        let want: BTreeSet<(Point, Point)> = g_edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (wrap_pts[u as usize], wrap_pts[v as usize]);
                (a.min(b), a.max(b))
            })
            .collect();
        let got: BTreeSet<(Point, Point)> = edges2
            .unwrap()
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (mesh2_pts[u as usize], mesh2_pts[v as usize]);
                (a.min(b), a.max(b))
            })
            .collect();
        assert_eq!(want, got, "flag section mismatch");
    }

    #[test]
    fn subdivision_ten_percent_deletion_roundtrip() {
        let t = Triangulation::gen_random(10_000, 21).unwrap();
        let g = drop_interior_edges(&t, 0.1, 2);
        assert!(g.edges.len() < 3 * 10_000 - 6);
        roundtrip_sub(&g);
    }

    #[test]
    fn subdivision_below_minimum_rejected() {
        let t = Triangulation::gen_random(1500, 9).unwrap();
        let g = drop_interior_edges(&t, 0.05, 3);
        let cfg = CodecConfig::subdivision();
        assert!(matches!(
            encode_subdivision(&g, &cfg),
            Err(SgiError::TooSmall { .. })
        ));
    }

    #[test]
    fn stream_budgets_have_margin_at_minimum_size() {
        let t = Triangulation::gen_random(2048, 5).unwrap();
        let cfg = CodecConfig::triangulation();
        let (_, stats) = encode_mesh(&t, &cfg, false, None).unwrap();
        let used = stats.head_bits + stats.payload_bits;
        eprintln!(
            "n=2048 used {}/{} rounds {} singles {}",
            used, stats.capacity, stats.rounds, stats.singles
        );
        // At the smallest supported size the streams should not be close to
        // the pooled capacity; demand at least 10% slack.
        assert!(used * 10 <= stats.capacity * 9, "used {used} of {}", stats.capacity);
        assert!(stats.singles * 2 <= 2048);
    }

    #[test]
    fn synthetic_outer_roundtrip() {
        // Wrap a full mesh in derived corners and fill the gap, then encode
        // without storing the corners.
        let t = Triangulation::gen_random(2100, 31).unwrap();
        let inner_pts = t.points().to_vec();
        let corners = synthetic_corners(&inner_pts).unwrap();
        let mut points: Vec<Point> = corners.to_vec();
        points.extend(inner_pts.iter().copied());
        let shift = |v: u32| v + 3;
        let inner_faces: Vec<[u32; 3]> = t
            .tris()
            .iter()
            .map(|&[a, b, c]| [shift(a), shift(b), shift(c)])
            .collect();
        let inner_cycle: Vec<u32> = vec![3, 4, 5]; // t's outer triangle, shifted
        let (wrap, _) =
            polygon::triangulate_complement(&points, [0, 1, 2], &[inner_cycle], &inner_faces)
                .unwrap();
        let g_edges: HashSet<(u32, u32)> = t
            .tris()
            .iter()
            .flat_map(|vs| (0..3).map(move |e| edge_key(shift(vs[e]), shift(vs[(e + 1) % 3]))))
            .collect();
        let cfg = CodecConfig::subdivision();
        let (ordering, _) = encode_mesh(&wrap, &cfg, true, Some(&g_edges)).unwrap();
        assert_eq!(ordering.len(), wrap.n() - 3);
        assert!(ordering.iter().all(|&v| v >= 3), "corners are not stored");
        let stored: Vec<Point> = ordering.iter().map(|&v| wrap.point(v)).collect();
        let (mesh2, edges2) = decode_mesh(&stored, &cfg, true).unwrap();
        assert_eq!(coord_faces(&wrap), coord_faces(&mesh2));
        let got: BTreeSet<(Point, Point)> = edges2
            .unwrap()
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (mesh2.point(u), mesh2.point(v));
                (a.min(b), a.max(b))
            })
            .collect();
        let want: BTreeSet<(Point, Point)> = g_edges
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (wrap.point(u), wrap.point(v));
                (a.min(b), a.max(b))
            })
            .collect();
        assert_eq!(got, want);
    }
}
