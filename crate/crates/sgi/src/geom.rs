//! Exact integer geometry over 64-bit coordinates.
//!
//! All predicates are evaluated exactly in 128-bit intermediate arithmetic.
//! Input coordinates are bounded by [`MAX_COORD`] in absolute value, which is
//! enforced at ingestion; helper triangles synthesized internally stay within
//! a few powers of two of that bound, far below any overflow threshold.

use crate::error::{Result, SgiError};
use serde::{Deserialize, Serialize};

/// Largest admissible coordinate magnitude (`2^30`).
pub const MAX_COORD: i64 = 1 << 30;

/// A point with exact integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Point {
    /// Horizontal coordinate.
    pub x: i64,
    /// Vertical coordinate.
    pub y: i64,
}

impl Point {
    /// Creates a point without range checking.
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    /// Creates a point, rejecting coordinates outside `[-2^30, 2^30]`.
    ///
    /// `index` is only used to report which input point overflowed.
    pub fn checked(x: i64, y: i64, index: usize) -> Result<Self> {
        for value in [x, y] {
            if value.abs() > MAX_COORD {
                return Err(SgiError::CoordinateOverflow { index, value });
            }
        }
        Ok(Point { x, y })
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

thread_local! {
    static ORIENT_CALLS: std::cell::Cell<u64> = const { std::cell::Cell::new(0) };
}

/// Total [`orient`] invocations on this thread; pair two snapshots to cost
/// an operation.
pub fn orient_count() -> u64 {
    ORIENT_CALLS.with(|c| c.get())
}

/// Exact orientation test.
///
/// Returns `+1` if `a`, `b`, `c` make a left turn (counter-clockwise), `-1`
/// for a right turn, and `0` when collinear.
pub fn orient(a: Point, b: Point, c: Point) -> i32 {
    ORIENT_CALLS.with(|c| c.set(c.get() + 1));
    let det = (b.x - a.x) as i128 * (c.y - a.y) as i128
        - (b.y - a.y) as i128 * (c.x - a.x) as i128;
    match det.cmp(&0) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Less => -1,
        std::cmp::Ordering::Equal => 0,
    }
}

/// Twice the signed area of triangle `(a, b, c)` as an exact 128-bit integer.
pub fn signed_area2(a: Point, b: Point, c: Point) -> i128 {
    (b.x - a.x) as i128 * (c.y - a.y) as i128 - (b.y - a.y) as i128 * (c.x - a.x) as i128
}

/// Result of locating a query point against a single triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TriLocation {
    /// Strictly inside the triangle.
    Inside,
    /// On the open edge from corner `k` to corner `(k + 1) % 3`.
    OnEdge(usize),
    /// Coincides with corner `k`.
    OnVertex(usize),
    /// Strictly outside the triangle.
    Outside,
}

/// Locates `q` against the counter-clockwise triangle `(a, b, c)`.
///
/// Corners must be in counter-clockwise order and non-degenerate; otherwise
/// [`SgiError::DegenerateTriangle`] is returned.
pub fn point_in_triangle(a: Point, b: Point, c: Point, q: Point) -> Result<TriLocation> {
    if orient(a, b, c) <= 0 {
        return Err(SgiError::DegenerateTriangle);
    }
    let corners = [a, b, c];
    for (k, corner) in corners.iter().enumerate() {
        if *corner == q {
            return Ok(TriLocation::OnVertex(k));
        }
    }
    let mut on_edge = None;
    for k in 0..3 {
        let u = corners[k];
        let v = corners[(k + 1) % 3];
        match orient(u, v, q) {
            -1 => return Ok(TriLocation::Outside),
            0 => on_edge = Some(k),
            _ => {}
        }
    }
    // Collinear with exactly one supporting line and not outside any other
    // means the point lies on that open edge (corner hits were caught above).
    match on_edge {
        Some(k) => Ok(TriLocation::OnEdge(k)),
        None => Ok(TriLocation::Inside),
    }
}

/// True when `q` lies inside or on the boundary of CCW triangle `(a, b, c)`.
pub fn closed_contains(a: Point, b: Point, c: Point, q: Point) -> bool {
    orient(a, b, q) >= 0 && orient(b, c, q) >= 0 && orient(c, a, q) >= 0
}

/// True when `q` lies on the closed segment `[u, v]`.
pub fn on_segment(u: Point, v: Point, q: Point) -> bool {
    orient(u, v, q) == 0
        && q.x >= u.x.min(v.x)
        && q.x <= u.x.max(v.x)
        && q.y >= u.y.min(v.y)
        && q.y <= u.y.max(v.y)
}

/// True when the closed segments `[a, b]` and `[c, d]` share at least one point.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
}

/// True when segments `[a, b]` and `[c, d]` share a point interior to at
/// least one of them, or overlap collinearly over positive length.  Contact
/// at shared endpoints alone is not a crossing.
pub fn segments_cross_open(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    // Proper crossing: each segment's endpoints strictly straddle the other.
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return true;
    }
    if o1 == 0 && o2 == 0 {
        // All four points collinear: crossing iff the 1D overlap has positive
        // length.  A single shared point must be an endpoint of both (no
        // crossing) or interior to one (caught by the straddle checks below).
        let key = if a.x != b.x || c.x != d.x { |p: Point| p.x } else { |p: Point| p.y };
        let (lo1, hi1) = (key(a).min(key(b)), key(a).max(key(b)));
        let (lo2, hi2) = (key(c).min(key(d)), key(c).max(key(d)));
        if lo1.max(lo2) < hi1.min(hi2) {
            return true;
        }
    }
    let strictly_inside = |u: Point, v: Point, q: Point| on_segment(u, v, q) && q != u && q != v;
    (o1 == 0 && strictly_inside(a, b, c))
        || (o2 == 0 && strictly_inside(a, b, d))
        || (o3 == 0 && strictly_inside(c, d, a))
        || (o4 == 0 && strictly_inside(c, d, b))
}

/// Exact comparison of directions `u` and `v` by angle counter-clockwise from
/// the positive x-axis.  Vectors must be nonzero; ties (equal directions)
/// compare equal regardless of magnitude.
pub fn angular_cmp(u: (i64, i64), v: (i64, i64)) -> std::cmp::Ordering {
    fn quadrant(p: (i64, i64)) -> u8 {
        match (p.0 >= 0, p.1 >= 0) {
            (true, true) => {
                if p.1 == 0 && p.0 > 0 {
                    0
                } else {
                    1
                }
            }
            (false, true) => 2,
            (false, false) => 3,
            (true, false) => 4,
        }
    }
    let (qu, qv) = (quadrant(u), quadrant(v));
    if qu != qv {
        return qu.cmp(&qv);
    }
    // Positive cross: turning from u to v is a left turn, so u comes first.
    let cross = u.0 as i128 * v.1 as i128 - u.1 as i128 * v.0 as i128;
    0i128.cmp(&cross)
}

/// Interleaved z-order (Morton) key of a point relative to an origin.
///
/// Offsets are clamped into `[0, 2^31)`; inputs respecting [`MAX_COORD`]
/// never clamp for any origin at or below the bounding-box minimum.
pub fn morton_key(p: Point, origin: Point) -> u64 {
    fn spread(v: u32) -> u64 {
        let mut x = v as u64;
        x = (x | (x << 16)) & 0x0000_FFFF_0000_FFFF;
        x = (x | (x << 8)) & 0x00FF_00FF_00FF_00FF;
        x = (x | (x << 4)) & 0x0F0F_0F0F_0F0F_0F0F;
        x = (x | (x << 2)) & 0x3333_3333_3333_3333;
        x = (x | (x << 1)) & 0x5555_5555_5555_5555;
        x
    }
    let dx = (p.x - origin.x).clamp(0, (1 << 31) - 1) as u32;
    let dy = (p.y - origin.y).clamp(0, (1 << 31) - 1) as u32;
    spread(dx) | (spread(dy) << 1)
}
