//! Planar triangulation containers, validation, text I/O, and synthetic
//! mesh generation.
//!
//! A [`Triangulation`] covers a triangular outer boundary completely with
//! counter-clockwise triangles.  The first three points are the corners of
//! the boundary.  With `n` vertices there are always `f = 2n - 5` faces and
//! `m = 3n - 6` edges, and every edge is shared by exactly two faces except
//! the three boundary edges.

use crate::error::{Result, SgiError};
use crate::geom::{self, orient, Point, TriLocation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;

/// Sentinel face id meaning "across this edge lies the outer face".
pub const OUTER: u32 = u32::MAX;

/// A full triangulation of a triangular region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triangulation {
    points: Vec<Point>,
    tris: Vec<[u32; 3]>,
    /// `neighbors[t][e]` is the face across edge `(tris[t][e], tris[t][(e+1)%3])`.
    neighbors: Vec<[u32; 3]>,
}

impl Triangulation {
    /// Builds from points and faces, validating every structural invariant
    /// and deriving the adjacency table.
    pub fn from_faces(points: Vec<Point>, tris: Vec<[u32; 3]>) -> Result<Self> {
        let neighbors = validate_and_adjacency(&points, &tris)?;
        Ok(Triangulation { points, tris, neighbors })
    }

    /// Builds from complete parts without validation (debug builds assert).
    ///
    /// Callers must guarantee the same invariants [`Triangulation::from_faces`]
    /// checks; intended for algorithms that construct meshes they have already
    /// proven consistent.
    pub fn from_parts_unchecked(
        points: Vec<Point>,
        tris: Vec<[u32; 3]>,
        neighbors: Vec<[u32; 3]>,
    ) -> Self {
        debug_assert!(validate_and_adjacency(&points, &tris)
            .map(|adj| adj == neighbors)
            .unwrap_or(false));
        Triangulation { points, tris, neighbors }
    }

    /// Builds from points and faces, deriving adjacency and checking only
    /// local soundness: in-range distinct vertex indices, CCW faces, uniquely
    /// paired directed edges, and a boundary equal to the outer triangle.
    ///
    /// Unlike [`Triangulation::from_faces`] this allows vertices that appear
    /// in no face, which intermediate meshes during incremental construction
    /// need (their point array keeps every eventual vertex).
    pub(crate) fn from_faces_trusted(points: Vec<Point>, tris: Vec<[u32; 3]>) -> Result<Self> {
        let neighbors = adjacency_only(&points, &tris)?;
        Ok(Triangulation { points, tris, neighbors })
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.points.len()
    }

    /// Number of faces.
    pub fn f(&self) -> usize {
        self.tris.len()
    }

    /// Number of edges (`3n - 6`).
    pub fn m(&self) -> usize {
        3 * self.n() - 6
    }

    /// All vertex coordinates.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    /// Coordinates of vertex `v`.
    pub fn point(&self, v: u32) -> Point {
        self.points[v as usize]
    }

    /// All faces as CCW vertex triples.
    pub fn tris(&self) -> &[[u32; 3]] {
        &self.tris
    }

    /// Vertex triple of face `t`.
    pub fn tri(&self, t: u32) -> [u32; 3] {
        self.tris[t as usize]
    }

    /// Full neighbor table.
    pub fn neighbors(&self) -> &[[u32; 3]] {
        &self.neighbors
    }

    /// Face across edge `e` of face `t` ([`OUTER`] at the boundary).
    pub fn neighbor(&self, t: u32, e: usize) -> u32 {
        self.neighbors[t as usize][e]
    }

    /// Corner coordinates of face `t`.
    pub fn tri_points(&self, t: u32) -> [Point; 3] {
        let [a, b, c] = self.tris[t as usize];
        [self.points[a as usize], self.points[b as usize], self.points[c as usize]]
    }

    /// The outer boundary corners (always the first three vertices).
    pub fn outer(&self) -> [u32; 3] {
        [0, 1, 2]
    }

    /// Slot of vertex `v` within face `t`.
    pub fn slot_of(&self, t: u32, v: u32) -> usize {
        let vs = self.tris[t as usize];
        vs.iter().position(|&w| w == v).expect("vertex not in face")
    }

    /// One `(face, slot)` incidence per vertex.
    pub fn vertex_incidence(&self) -> Vec<(u32, u8)> {
        let mut inc = vec![(OUTER, 0u8); self.n()];
        for (t, vs) in self.tris.iter().enumerate() {
            for (s, &v) in vs.iter().enumerate() {
                inc[v as usize] = (t as u32, s as u8);
            }
        }
        inc
    }

    /// Vertex degrees (number of incident edges).
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n()];
        for vs in &self.tris {
            for &v in vs {
                deg[v as usize] += 1;
            }
        }
        for v in self.outer() {
            deg[v as usize] += 1;
        }
        deg
    }

    /// Faces around vertex `v` in CCW order starting from incidence `(t, s)`
    /// (where `tris[t][s] == v`), plus whether the cycle closed (always true
    /// for interior vertices).
    pub fn star(&self, v: u32, t0: u32, s0: u8) -> (Vec<u32>, bool) {
        debug_assert_eq!(self.tris[t0 as usize][s0 as usize], v);
        let mut faces = vec![t0];
        // CCW walk: cross the edge arriving at v.
        let (mut t, mut s) = (t0, s0 as usize);
        loop {
            let next = self.neighbors[t as usize][(s + 2) % 3];
            if next == t0 {
                return (faces, true);
            }
            if next == OUTER {
                break;
            }
            t = next;
            s = self.slot_of(t, v);
            faces.push(t);
        }
        // Hit the boundary: walk CW from the start to collect the rest.
        let (mut t, mut s) = (t0, s0 as usize);
        loop {
            let prev = self.neighbors[t as usize][s];
            if prev == OUTER {
                return (faces, false);
            }
            t = prev;
            s = self.slot_of(t, v);
            faces.insert(0, t);
        }
    }

    /// Dual graph over internal faces: adjacency lists, outer face excluded.
    pub fn dual_graph(&self) -> Vec<Vec<u32>> {
        self.neighbors
            .iter()
            .map(|ns| ns.iter().copied().filter(|&u| u != OUTER).collect())
            .collect()
    }

    /// Walks from face `start` toward `q` and classifies the landing.
    ///
    /// Returns `(face, location)`; `location` is [`TriLocation::Outside`] when
    /// `q` lies outside the outer boundary, with `face` the last face visited.
    pub fn locate_from(&self, q: Point, start: u32) -> (u32, TriLocation) {
        let mut t = start;
        let mut prev = OUTER;
        let cap = 2 * self.f() + 32;
        for step in 0..cap {
            let ps = self.tri_points(t);
            let o = [
                orient(ps[0], ps[1], q),
                orient(ps[1], ps[2], q),
                orient(ps[2], ps[0], q),
            ];
            let mut exits = [false; 3];
            let mut n_exits = 0;
            for e in 0..3 {
                if o[e] < 0 && self.neighbors[t as usize][e] != prev {
                    exits[e] = true;
                    n_exits += 1;
                }
            }
            if n_exits == 0 {
                let loc = geom::point_in_triangle(ps[0], ps[1], ps[2], q)
                    .expect("validated faces are CCW");
                if loc == TriLocation::Outside {
                    // Only the entry edge is negative: q is behind us, which
                    // means it sits outside through that boundary edge.
                    return (t, TriLocation::Outside);
                }
                return (t, loc);
            }
            // Alternate between candidate exits to avoid 2-cycles.
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
            let next = self.neighbors[t as usize][pick];
            if next == OUTER {
                return (t, TriLocation::Outside);
            }
            prev = t;
            t = next;
        }
        // Pathological cycling: fall back to an exhaustive scan, preferring
        // the smallest face id so ties on shared edges are deterministic.
        for t in 0..self.f() as u32 {
            let ps = self.tri_points(t);
            if geom::closed_contains(ps[0], ps[1], ps[2], q) {
                let loc = geom::point_in_triangle(ps[0], ps[1], ps[2], q).unwrap();
                return (t, loc);
            }
        }
        (start, TriLocation::Outside)
    }

    /// [`Triangulation::locate_from`] starting at face 0.
    pub fn locate(&self, q: Point) -> (u32, TriLocation) {
        self.locate_from(q, 0)
    }

    /// Re-checks every invariant (used by tests and after deserialization).
    pub fn validate(&self) -> Result<()> {
        let adj = validate_and_adjacency(&self.points, &self.tris)?;
        if adj != self.neighbors {
            return Err(SgiError::BrokenAdjacency(0, 0));
        }
        Ok(())
    }

    /// Serializes to the `.tri` text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{} {}\n", self.n(), self.f()));
        for p in &self.points {
            out.push_str(&format!("{} {}\n", p.x, p.y));
        }
        for vs in &self.tris {
            out.push_str(&format!("{} {} {}\n", vs[0] + 1, vs[1] + 1, vs[2] + 1));
        }
        out
    }

    /// Parses the `.tri` text format: `n f`, then `n` lines `x y`, then `f`
    /// lines of 1-based CCW vertex triples.  The first three points are the
    /// outer corners.  Trailing garbage is rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut tokens = text.split_ascii_whitespace();
        let mut next_int = |what: &str| -> Result<i64> {
            let tok = tokens
                .next()
                .ok_or_else(|| SgiError::Parse(format!("unexpected end of input reading {what}")))?;
            tok.parse::<i64>()
                .map_err(|_| SgiError::Parse(format!("bad integer {tok:?} reading {what}")))
        };
        let n = next_int("vertex count")?;
        let f = next_int("face count")?;
        if n < 3 || f < 1 {
            return Err(SgiError::Parse(format!("implausible sizes n={n} f={f}")));
        }
        let (n, f) = (n as usize, f as usize);
        let mut points = Vec::with_capacity(n);
        for i in 0..n {
            let x = next_int("x coordinate")?;
            let y = next_int("y coordinate")?;
            points.push(Point::checked(x, y, i)?);
        }
        let mut tris = Vec::with_capacity(f);
        for t in 0..f {
            let mut vs = [0u32; 3];
            for slot in &mut vs {
                let v = next_int("vertex index")?;
                if v < 1 || v > n as i64 {
                    return Err(SgiError::Parse(format!(
                        "face {t}: vertex index {v} out of range 1..={n}"
                    )));
                }
                *slot = (v - 1) as u32;
            }
            tris.push(vs);
        }
        if let Some(extra) = tokens.next() {
            return Err(SgiError::Parse(format!("trailing garbage starting at {extra:?}")));
        }
        Triangulation::from_faces(points, tris)
    }

    /// Generates a random valid triangulation of `n ≥ 4` points.
    ///
    /// Deterministic in `seed`: interior points are inserted one at a time
    /// into an area-weighted random face (splitting it in three), then about
    /// `2n` random legal edge flips mix the diagonals.
    pub fn gen_random(n: usize, seed: u64) -> Result<Self> {
        if n < 4 {
            return Err(SgiError::TooSmall { got: n, min: 4 });
        }
        let bound: i64 = 1 << 28;
        let corners = [
            Point::new(-bound, -bound),
            Point::new(3 * bound, -bound),
            Point::new(-bound, 3 * bound),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = corners.to_vec();
        let mut used: std::collections::HashSet<Point> = points.iter().copied().collect();

        // First interior point: fan the outer triangle.
        let p0 = sample_interior(&mut rng, corners[0], corners[1], corners[2], &used)
            .expect("outer triangle is huge");
        used.insert(p0);
        points.push(p0);
        let mut tris: Vec<[u32; 3]> = vec![[0, 1, 3], [1, 2, 3], [2, 0, 3]];
        let mut neighbors: Vec<[u32; 3]> = vec![
            [OUTER, 1, 2], // (0,1) hull, (1,3) -> face 1, (3,0) -> face 2
            [OUTER, 2, 0],
            [OUTER, 0, 1],
        ];
        let area = |points: &[Point], vs: [u32; 3]| -> u128 {
            geom::signed_area2(
                points[vs[0] as usize],
                points[vs[1] as usize],
                points[vs[2] as usize],
            ) as u128
        };
        let mut fenwick = Fenwick::with_capacity(2 * n);
        for t in 0..3 {
            fenwick.push(area(&points, tris[t]));
        }

        while points.len() < n {
            // Area-weighted face choice; rejection keeps the sample exact.
            let total = fenwick.total();
            let x = rng.gen_range(0..total);
            let t = fenwick.find(x);
            let [a, b, c] = tris[t];
            let (pa, pb, pc) =
                (points[a as usize], points[b as usize], points[c as usize]);
            let Some(p) = sample_interior(&mut rng, pa, pb, pc, &used) else {
                continue; // sliver face: integer interior point not found
            };
            used.insert(p);
            let v = points.len() as u32;
            points.push(p);
            // Split face t into three fans around v.
            let t0 = t;
            let t1 = tris.len();
            let t2 = tris.len() + 1;
            let old_n = neighbors[t0];
            tris[t0] = [a, b, v];
            tris.push([b, c, v]);
            tris.push([c, a, v]);
            neighbors[t0] = [old_n[0], t1 as u32, t2 as u32];
            neighbors.push([old_n[1], t2 as u32, t0 as u32]);
            neighbors.push([old_n[2], t0 as u32, t1 as u32]);
            fix_neighbor(&mut neighbors, old_n[1], t0 as u32, t1 as u32);
            fix_neighbor(&mut neighbors, old_n[2], t0 as u32, t2 as u32);
            fenwick.set(t0, area(&points, tris[t0]));
            fenwick.push(area(&points, tris[t1]));
            fenwick.push(area(&points, tris[t2]));
        }

        // Random legal flips; illegal draws are skipped, keeping determinism.
        let f = tris.len();
        for _ in 0..2 * n {
            let t = rng.gen_range(0..f);
            let e = rng.gen_range(0..3usize);
            flip_edge(&points, &mut tris, &mut neighbors, t, e);
        }

        let mesh = Triangulation { points, tris, neighbors };
        debug_assert!(mesh.validate().is_ok());
        Ok(mesh)
    }
}

/// In `neighbors[t]`, replaces the entry `old` with `new` (no-op at OUTER).
fn fix_neighbor(neighbors: &mut [[u32; 3]], t: u32, old: u32, new: u32) {
    if t == OUTER {
        return;
    }
    for slot in neighbors[t as usize].iter_mut() {
        if *slot == old {
            *slot = new;
            return;
        }
    }
    panic!("neighbor entry to fix not found");
}

/// Flips the diagonal across edge `e` of face `t` when strictly legal.
/// Returns true if the flip happened.
fn flip_edge(
    points: &[Point],
    tris: &mut [[u32; 3]],
    neighbors: &mut [[u32; 3]],
    t: usize,
    e: usize,
) -> bool {
    let s = neighbors[t][e];
    if s == OUTER {
        return false;
    }
    let s = s as usize;
    let u = tris[t][e];
    let v = tris[t][(e + 1) % 3];
    let c1 = tris[t][(e + 2) % 3];
    let es = tris[s].iter().position(|&w| w == v).expect("shared edge");
    debug_assert_eq!(tris[s][(es + 1) % 3], u);
    let c2 = tris[s][(es + 2) % 3];
    let (pu, pv, p1, p2) = (
        points[u as usize],
        points[v as usize],
        points[c1 as usize],
        points[c2 as usize],
    );
    // The quad u -> c2 -> v -> c1 must be strictly convex at u and v.
    if orient(p1, pu, p2) <= 0 || orient(p2, pv, p1) <= 0 {
        return false;
    }
    // Outer neighbors before rewiring.
    let n_t_uc1 = neighbors[t][(e + 2) % 3]; // across (c1, u)
    let n_s_uc2 = neighbors[s][(es + 1) % 3]; // across (u, c2)
    let n_t_vc1 = neighbors[t][(e + 1) % 3]; // across (v, c1)
    let n_s_vc2 = neighbors[s][(es + 2) % 3]; // across (c2, v)
    tris[t] = [c1, u, c2];
    tris[s] = [c2, v, c1];
    neighbors[t] = [n_t_uc1, n_s_uc2, s as u32];
    neighbors[s] = [n_s_vc2, n_t_vc1, t as u32];
    fix_neighbor(neighbors, n_s_uc2, s as u32, t as u32);
    fix_neighbor(neighbors, n_t_vc1, t as u32, s as u32);
    true
}

/// Draws an exact integer point strictly inside CCW triangle `(a, b, c)`,
/// avoiding `used`; `None` after bounded retries (possible only for slivers).
fn sample_interior(
    rng: &mut ChaCha8Rng,
    a: Point,
    b: Point,
    c: Point,
    used: &std::collections::HashSet<Point>,
) -> Option<Point> {
    const DEN: i64 = 1 << 16;
    for _ in 0..32 {
        let u = rng.gen_range(1..DEN - 1);
        let v = rng.gen_range(1..DEN - u);
        let x = a.x + (u * (b.x - a.x) + v * (c.x - a.x)).div_euclid(DEN);
        let y = a.y + (u * (b.y - a.y) + v * (c.y - a.y)).div_euclid(DEN);
        let p = Point::new(x, y);
        if orient(a, b, p) > 0 && orient(b, c, p) > 0 && orient(c, a, p) > 0 && !used.contains(&p)
        {
            return Some(p);
        }
    }
    None
}

/// Fenwick tree over `u128` weights supporting append, point update, and
/// weighted-prefix search.
struct Fenwick {
    tree: Vec<u128>,
    values: Vec<u128>,
}

impl Fenwick {
    fn with_capacity(cap: usize) -> Self {
        Fenwick { tree: Vec::with_capacity(cap), values: Vec::with_capacity(cap) }
    }

    fn len(&self) -> usize {
        self.values.len()
    }

    fn push(&mut self, w: u128) {
        self.values.push(w);
        let i = self.tree.len();
        // tree[i] covers values[i - lowbit(i+1) + 1 ..= i].
        let mut sum = w;
        let lb = (i + 1) & !(i);
        let mut k = 1;
        while k < lb {
            sum += self.tree[i - k];
            k <<= 1;
        }
        self.tree.push(sum);
    }

    fn set(&mut self, i: usize, w: u128) {
        let old = self.values[i];
        self.values[i] = w;
        let mut j = i + 1;
        while j <= self.tree.len() {
            self.tree[j - 1] = self.tree[j - 1] + w - old;
            j += j & j.wrapping_neg();
        }
    }

    fn total(&self) -> u128 {
        self.prefix(self.len())
    }

    /// Sum of the first `k` values.
    fn prefix(&self, k: usize) -> u128 {
        let mut sum = 0;
        let mut j = k;
        while j > 0 {
            sum += self.tree[j - 1];
            j &= j - 1;
        }
        sum
    }

    /// Smallest index `i` with `prefix(i + 1) > x`.
    fn find(&self, x: u128) -> usize {
        debug_assert!(x < self.total());
        let mut idx = 0usize; // number of values already accepted
        let mut rem = x;
        let mut step = self.tree.len().next_power_of_two();
        while step > 0 {
            let next = idx + step;
            if next <= self.tree.len() {
                // tree[next-1] covers (idx..next] only when next has idx as
                // its Fenwick parent; that holds exactly when step == lowbit(next).
                if step == next & next.wrapping_neg() {
                    let span = self.tree[next - 1];
                    if rem >= span {
                        rem -= span;
                        idx = next;
                    }
                }
            }
            step >>= 1;
        }
        idx
    }
}

/// Local soundness checks only; returns the derived adjacency table.
///
/// Shared by [`Triangulation::from_faces_trusted`]: faces must use in-range
/// distinct vertices, be CCW, pair their directed edges uniquely, and leave
/// exactly the outer triangle's edges unmatched.  Global properties (Euler
/// counts, vertex coverage, containment) are not checked.
fn adjacency_only(points: &[Point], tris: &[[u32; 3]]) -> Result<Vec<[u32; 3]>> {
    let n = points.len();
    for (t, vs) in tris.iter().enumerate() {
        if vs[0] == vs[1] || vs[1] == vs[2] || vs[2] == vs[0] || vs.iter().any(|&v| v as usize >= n)
        {
            return Err(SgiError::NonTriangleFace(t));
        }
        let [a, b, c] = [
            points[vs[0] as usize],
            points[vs[1] as usize],
            points[vs[2] as usize],
        ];
        if orient(a, b, c) <= 0 {
            return Err(SgiError::BadOrientation(t));
        }
    }
    let mut edge_map: HashMap<(u32, u32), (u32, u8)> = HashMap::with_capacity(3 * tris.len());
    for (t, vs) in tris.iter().enumerate() {
        for e in 0..3 {
            let key = (vs[e], vs[(e + 1) % 3]);
            if edge_map.insert(key, (t as u32, e as u8)).is_some() {
                return Err(SgiError::BrokenAdjacency(key.0, key.1));
            }
        }
    }
    let mut neighbors = vec![[OUTER; 3]; tris.len()];
    let mut unmatched: Vec<(u32, u32)> = Vec::new();
    for (&(u, v), &(t, e)) in &edge_map {
        match edge_map.get(&(v, u)) {
            Some(&(s, _)) => neighbors[t as usize][e as usize] = s,
            None => unmatched.push((u, v)),
        }
    }
    unmatched.sort_unstable();
    if unmatched != [(0, 1), (1, 2), (2, 0)] {
        return Err(SgiError::GeometryError(format!(
            "boundary edges are {unmatched:?}, expected the outer triangle 0,1,2"
        )));
    }
    Ok(neighbors)
}

/// Structural validation; returns the derived adjacency table.
fn validate_and_adjacency(points: &[Point], tris: &[[u32; 3]]) -> Result<Vec<[u32; 3]>> {
    let n = points.len();
    if n < 3 {
        return Err(SgiError::TooSmall { got: n, min: 3 });
    }
    // Coordinate-range policy is enforced at ingestion (`parse`), not here:
    // internally synthesized wrapper triangles may exceed the input bound.
    // Duplicate detection by sorting index handles.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| points[i]);
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(SgiError::DuplicatePoint(a, b));
        }
    }
    let expected_f = 2 * n - 5;
    if tris.len() != expected_f {
        return Err(SgiError::EulerViolation { n, faces: tris.len(), edges: 0 });
    }
    let neighbors = adjacency_only(points, tris)?;
    let m = (3 * tris.len() + 3) / 2;
    if m != 3 * n - 6 {
        return Err(SgiError::EulerViolation { n, faces: tris.len(), edges: m });
    }
    // Every vertex must appear in some face (full coverage), and all points
    // must lie inside the outer triangle.
    let mut seen = vec![false; n];
    for vs in tris {
        for &v in vs {
            seen[v as usize] = true;
        }
    }
    if let Some(v) = seen.iter().position(|&s| !s) {
        return Err(SgiError::GeometryError(format!("vertex {v} appears in no face")));
    }
    let [o0, o1, o2] = [points[0], points[1], points[2]];
    if orient(o0, o1, o2) <= 0 {
        return Err(SgiError::GeometryError(
            "outer triangle is degenerate or clockwise".into(),
        ));
    }
    for (i, &p) in points.iter().enumerate().skip(3) {
        if !(orient(o0, o1, p) > 0 && orient(o1, o2, p) > 0 && orient(o2, o0, p) > 0) {
            return Err(SgiError::GeometryError(format!(
                "vertex {i} is not strictly inside the outer triangle"
            )));
        }
    }
    Ok(neighbors)
}

/// A planar straight-line subdivision: points plus undirected edges.
///
/// Faces are implied by the embedding (edges ordered angularly around each
/// vertex).  Every bounded face must be a simple polygon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subdivision {
    /// Vertex coordinates.
    pub points: Vec<Point>,
    /// Undirected edges as vertex-index pairs.
    pub edges: Vec<(u32, u32)>,
}

impl Subdivision {
    /// Basic well-formedness: coordinates in range, points distinct, edge
    /// endpoints distinct and in range, no repeated edges.
    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        for (i, p) in self.points.iter().enumerate() {
            Point::checked(p.x, p.y, i)?;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| self.points[i]);
        for w in order.windows(2) {
            if self.points[w[0]] == self.points[w[1]] {
                return Err(SgiError::DuplicatePoint(w[0].min(w[1]), w[0].max(w[1])));
            }
        }
        let mut seen = std::collections::HashSet::new();
        for &(u, v) in &self.edges {
            if u == v || u as usize >= n || v as usize >= n {
                return Err(SgiError::GeometryError(format!("bad edge ({u}, {v})")));
            }
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(SgiError::GeometryError(format!("repeated edge ({u}, {v})")));
            }
        }
        Ok(())
    }

    /// Sorted undirected edge set (for equality testing).
    pub fn canonical_edges(&self) -> Vec<(u32, u32)> {
        let mut es: Vec<(u32, u32)> = self
            .edges
            .iter()
            .map(|&(u, v)| (u.min(v), u.max(v)))
            .collect();
        es.sort_unstable();
        es
    }
}

/// Face cycles of a planar straight-line graph via rotation-system traversal.
///
/// Each directed edge belongs to exactly one cycle; following a cycle, the
/// successor of directed edge `(u, v)` is `(v, w)` where `w` is the neighbor
/// of `v` clockwise-next from `u` — this walks every bounded face
/// counter-clockwise and each component's unbounded contour clockwise.
/// Returned cycles list vertices in walk order.
pub fn planar_face_cycles(points: &[Point], edges: &[(u32, u32)]) -> Vec<Vec<u32>> {
    let n = points.len();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(u, v) in edges {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    for (v, list) in adj.iter_mut().enumerate() {
        let center = points[v];
        list.sort_by(|&a, &b| {
            let pa = points[a as usize];
            let pb = points[b as usize];
            geom::angular_cmp((pa.x - center.x, pa.y - center.y), (pb.x - center.x, pb.y - center.y))
        });
    }
    let index_of = |v: u32, w: u32| -> usize {
        adj[v as usize].iter().position(|&x| x == w).expect("edge present")
    };
    let mut cycles = Vec::new();
    let mut visited: std::collections::HashSet<(u32, u32)> = std::collections::HashSet::new();
    let mut starts: Vec<(u32, u32)> = Vec::new();
    for &(u, v) in edges {
        starts.push((u, v));
        starts.push((v, u));
    }
    starts.sort_unstable();
    for start in starts {
        if visited.contains(&start) {
            continue;
        }
        let mut cycle = Vec::new();
        let (mut u, mut v) = start;
        loop {
            visited.insert((u, v));
            cycle.push(u);
            // CW-next neighbor of v after u: previous entry in CCW order.
            let i = index_of(v, u);
            let deg = adj[v as usize].len();
            let w = adj[v as usize][(i + deg - 1) % deg];
            u = v;
            v = w;
            if (u, v) == start {
                break;
            }
        }
        cycles.push(cycle);
    }
    cycles
}

/// Twice the signed area of a closed polygon given by vertex indices.
pub fn cycle_area2(points: &[Point], cycle: &[u32]) -> i128 {
    let mut sum = 0i128;
    for i in 0..cycle.len() {
        let p = points[cycle[i] as usize];
        let q = points[cycle[(i + 1) % cycle.len()] as usize];
        sum += p.x as i128 * q.y as i128 - q.x as i128 * p.y as i128;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t4_text() -> &'static str {
        "4 3\n0 0\n10 0\n5 9\n5 3\n1 2 4\n2 3 4\n3 1 4\n"
    }

    #[test]
    fn parse_t4() {
        let mesh = Triangulation::parse(t4_text()).unwrap();
        assert_eq!(mesh.n(), 4);
        assert_eq!(mesh.f(), 3);
        assert_eq!(mesh.m(), 6);
        assert_eq!(mesh.outer(), [0, 1, 2]);
        mesh.validate().unwrap();
    }

    #[test]
    fn t4_dual_is_a_triangle() {
        let mesh = Triangulation::parse(t4_text()).unwrap();
        let dual = mesh.dual_graph();
        assert_eq!(dual.len(), 3);
        let edge_count: usize = dual.iter().map(|l| l.len()).sum::<usize>() / 2;
        assert_eq!(edge_count, 3);
        for (t, list) in dual.iter().enumerate() {
            assert_eq!(list.len(), 2, "face {t} has 2 internal neighbors");
        }
    }

    #[test]
    fn duplicate_face_breaks_euler() {
        let text = "4 4\n0 0\n10 0\n5 9\n5 3\n1 2 4\n2 3 4\n3 1 4\n1 2 4\n";
        match Triangulation::parse(text) {
            Err(SgiError::EulerViolation { n, faces, .. }) => {
                assert_eq!(n, 4);
                assert_eq!(faces, 4);
            }
            other => panic!("expected EulerViolation, got {other:?}"),
        }
    }

    #[test]
    fn bad_faces_are_rejected() {
        // Clockwise face.
        let cw = "4 3\n0 0\n10 0\n5 9\n5 3\n1 4 2\n2 3 4\n3 1 4\n";
        assert!(matches!(Triangulation::parse(cw), Err(SgiError::BadOrientation(0))));
        // Repeated vertex within a face.
        let degen = "4 3\n0 0\n10 0\n5 9\n5 3\n1 1 4\n2 3 4\n3 1 4\n";
        assert!(matches!(Triangulation::parse(degen), Err(SgiError::NonTriangleFace(0))));
        // Duplicate point.
        let dup = "4 3\n0 0\n10 0\n5 9\n10 0\n1 2 4\n2 3 4\n3 1 4\n";
        assert!(matches!(Triangulation::parse(dup), Err(SgiError::DuplicatePoint(1, 3))));
        // Coordinate overflow.
        let big = format!("4 3\n0 0\n{} 0\n5 9\n5 3\n1 2 4\n2 3 4\n3 1 4\n", (1i64 << 30) + 1);
        assert!(matches!(
            Triangulation::parse(&big),
            Err(SgiError::CoordinateOverflow { index: 1, .. })
        ));
    }

    #[test]
    fn trailing_garbage_rejected() {
        let text = format!("{}1\n", t4_text());
        assert!(matches!(Triangulation::parse(&text), Err(SgiError::Parse(_))));
    }

    #[test]
    fn text_roundtrip_is_identity() {
        let mesh = Triangulation::gen_random(200, 42).unwrap();
        let text = mesh.to_text();
        let back = Triangulation::parse(&text).unwrap();
        assert_eq!(mesh, back);
    }

    #[test]
    fn gen_random_is_deterministic() {
        let a = Triangulation::gen_random(1000, 7).unwrap();
        let b = Triangulation::gen_random(1000, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gen_random_minimum_is_t4_shape() {
        let mesh = Triangulation::gen_random(4, 3).unwrap();
        assert_eq!(mesh.f(), 3);
        // One interior vertex present in every face.
        for t in 0..3 {
            assert!(mesh.tri(t).contains(&3));
        }
    }

    #[test]
    fn gen_random_too_small() {
        assert!(matches!(
            Triangulation::gen_random(3, 0),
            Err(SgiError::TooSmall { got: 3, min: 4 })
        ));
    }

    #[test]
    fn gen_random_validates_across_sizes_and_seeds() {
        for seed in 0..8 {
            for n in [4, 10, 37, 300] {
                let mesh = Triangulation::gen_random(n, seed).unwrap();
                mesh.validate().unwrap();
                assert_eq!(mesh.f(), 2 * n - 5);
            }
        }
    }

    #[test]
    fn dual_graph_bounds() {
        let mesh = Triangulation::gen_random(500, 11).unwrap();
        let dual = mesh.dual_graph();
        assert_eq!(dual.len(), mesh.f());
        let edges: usize = dual.iter().map(|l| l.len()).sum::<usize>() / 2;
        assert!(edges <= 3 * mesh.f() / 2);
        assert_eq!(edges, mesh.m() - 3); // every non-hull edge is a dual edge
    }

    #[test]
    fn locate_agrees_with_linear_scan() {
        let mesh = Triangulation::gen_random(300, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..500 {
            let q = Point::new(
                rng.gen_range(-(1 << 28)..(1 << 28)),
                rng.gen_range(-(1 << 28)..(1 << 28)),
            );
            let (face, loc) = mesh.locate(q);
            // Oracle: scan everything.
            let mut best: Option<u32> = None;
            for t in 0..mesh.f() as u32 {
                let ps = mesh.tri_points(t);
                if geom::closed_contains(ps[0], ps[1], ps[2], q) {
                    best = Some(best.map_or(t, |b| b.min(t)));
                }
            }
            match best {
                None => assert_eq!(loc, TriLocation::Outside, "q={q}"),
                Some(_) => {
                    assert_ne!(loc, TriLocation::Outside, "q={q}");
                    let ps = mesh.tri_points(face);
                    assert!(geom::closed_contains(ps[0], ps[1], ps[2], q));
                }
            }
        }
    }

    #[test]
    fn star_walks_full_cycle_for_interior_vertices() {
        let mesh = Triangulation::gen_random(60, 2).unwrap();
        let inc = mesh.vertex_incidence();
        let degs = mesh.degrees();
        for v in 3..mesh.n() as u32 {
            let (t, s) = inc[v as usize];
            let (faces, closed) = mesh.star(v, t, s);
            assert!(closed, "interior vertex {v}");
            assert_eq!(faces.len() as u32, degs[v as usize]);
            let unique: std::collections::HashSet<_> = faces.iter().collect();
            assert_eq!(unique.len(), faces.len());
            for &face in &faces {
                assert!(mesh.tri(face).contains(&v));
            }
        }
    }

    #[test]
    fn degrees_sum_to_twice_edges() {
        let mesh = Triangulation::gen_random(120, 8).unwrap();
        let total: u32 = mesh.degrees().iter().sum();
        assert_eq!(total as usize, 2 * mesh.m());
    }

    #[test]
    fn face_cycles_of_a_square_with_diagonal() {
        // Square 0-1-2-3 plus diagonal 0-2: two triangles + outer contour.
        let points = vec![
            Point::new(0, 0),
            Point::new(10, 0),
            Point::new(10, 10),
            Point::new(0, 10),
        ];
        let edges = vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)];
        let cycles = planar_face_cycles(&points, &edges);
        assert_eq!(cycles.len(), 3);
        let mut pos = 0;
        let mut neg = 0;
        for c in &cycles {
            let a = cycle_area2(&points, c);
            if a > 0 {
                pos += 1;
                assert_eq!(c.len(), 3);
            } else {
                neg += 1;
                assert_eq!(c.len(), 4);
            }
        }
        assert_eq!((pos, neg), (2, 1));
    }

    #[test]
    fn subdivision_validation() {
        let good = Subdivision {
            points: vec![Point::new(0, 0), Point::new(5, 0), Point::new(0, 5)],
            edges: vec![(0, 1), (1, 2), (2, 0)],
        };
        good.validate().unwrap();
        let dup_edge = Subdivision {
            edges: vec![(0, 1), (1, 0)],
            ..good.clone()
        };
        assert!(dup_edge.validate().is_err());
        let self_loop = Subdivision { edges: vec![(1, 1)], ..good };
        assert!(self_loop.validate().is_err());
    }
}
