//! Logarithmic point location over a triangulation via an independent-set
//! coarsening hierarchy.
//!
//! The structure repeatedly removes a maximal independent set of low-degree
//! interior vertices, retriangulates each star hole, and links every new
//! face to the star faces it replaced.  A query descends from the single
//! top-level triangle through those links, testing closed containment
//! exactly, and resolves boundary ties by smallest face id.  Faces are kept
//! as vertex *labels* only — coordinates always come from the caller.

use crate::error::{Result, SgiError};
use crate::geom::{closed_contains, Point};
use crate::mesh::Triangulation;
use crate::polygon;
use std::collections::HashMap;

/// Degree threshold for removable vertices; every triangulation with
/// interior vertices contains an interior vertex of degree ≤ 8, so using a
/// slightly larger bound only speeds up coarsening.
const MAX_REMOVABLE_DEGREE: u32 = 11;

/// One coarsening level: faces (as vertex labels) and, per face, the faces
/// of the previous (finer) level it replaced, in CSR layout.
struct Level {
    faces: Vec<[u32; 3]>,
    link_off: Vec<u32>,
    links: Vec<u32>,
}

/// Point-location hierarchy with per-face integer tags.
///
/// Stores no coordinates; all geometry is evaluated against the point slice
/// passed to [`PlStructure::locate`].
pub struct PlStructure {
    /// levels[0] = the input triangulation's faces; the last level is the
    /// outer triangle alone.  Level 0 needs no links.
    levels: Vec<Level>,
    tags: Vec<u32>,
    outer: [u32; 3],
}

/// Result of a location query.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlAnswer {
    /// Face id in the original triangulation (smallest id among all faces
    /// whose closed triangle contains the query).
    pub face: u32,
    /// The tag stored for that face.
    pub tag: u32,
    /// Number of orientation tests this query spent.
    pub orients: u32,
}

impl PlStructure {
    /// Number of coarsening levels (including the input level).
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Total number of faces stored across all levels.
    pub fn total_faces(&self) -> usize {
        self.levels.iter().map(|l| l.faces.len()).sum()
    }

    /// Locates `q`, reading coordinates for vertex labels from `points`.
    ///
    /// Returns the smallest-id face of the input triangulation whose closed
    /// triangle contains `q`, with its tag; fails with
    /// [`SgiError::OutsideHull`] when `q` lies strictly outside the outer
    /// triangle.
    pub fn locate(&self, points: &[Point], q: Point) -> Result<PlAnswer> {
        let mut orients: u32 = 0;
        let mut contains = |f: &[u32; 3]| -> bool {
            orients += 3;
            closed_contains(
                points[f[0] as usize],
                points[f[1] as usize],
                points[f[2] as usize],
                q,
            )
        };
        let top = self.levels.last().expect("hierarchy nonempty");
        let mut current: Vec<u32> = (0..top.faces.len() as u32)
            .filter(|&i| contains(&top.faces[i as usize]))
            .collect();
        if current.is_empty() {
            return Err(SgiError::OutsideHull);
        }
        for depth in (0..self.levels.len() - 1).rev() {
            let coarse = &self.levels[depth + 1];
            let fine = &self.levels[depth];
            let mut next: Vec<u32> = Vec::with_capacity(4);
            for &cf in &current {
                let lo = coarse.link_off[cf as usize] as usize;
                let hi = coarse.link_off[cf as usize + 1] as usize;
                for &ff in &coarse.links[lo..hi] {
                    if !next.contains(&ff) && contains(&fine.faces[ff as usize]) {
                        next.push(ff);
                    }
                }
            }
            debug_assert!(!next.is_empty(), "containment cannot vanish while descending");
            current = next;
        }
        let face = *current.iter().min().expect("nonempty candidate set");
        Ok(PlAnswer { face, tag: self.tags[face as usize], orients })
    }
}

/// Builds the hierarchy for `mesh` with one integer tag per face.
pub fn build_pl(mesh: &Triangulation, tags: &[u32]) -> Result<PlStructure> {
    if tags.len() != mesh.f() {
        return Err(SgiError::TagArityMismatch { faces: mesh.f(), tags: tags.len() });
    }
    let points = mesh.points();
    let outer = mesh.outer();
    let mut levels: Vec<Level> = vec![Level {
        faces: mesh.tris().to_vec(),
        link_off: Vec::new(),
        links: Vec::new(),
    }];
    loop {
        let cur: &[[u32; 3]] = &levels.last().unwrap().faces;
        if cur.len() == 1 {
            break;
        }
        let (faces, link_off, links) = coarsen(points, cur, outer)?;
        levels.push(Level { faces, link_off, links });
    }
    Ok(PlStructure { levels, tags: tags.to_vec(), outer })
}

/// One coarsening step: removes a maximal independent set of low-degree
/// interior vertices and returns the new faces with their links into `cur`.
#[allow(clippy::type_complexity)]
fn coarsen(
    points: &[Point],
    cur: &[[u32; 3]],
    outer: [u32; 3],
) -> Result<(Vec<[u32; 3]>, Vec<u32>, Vec<u32>)> {
    // Directed edge -> face index; one incidence per vertex; degrees.
    let mut edge_face: HashMap<(u32, u32), u32> = HashMap::with_capacity(cur.len() * 3);
    let mut degree: HashMap<u32, u32> = HashMap::new();
    let mut incident: HashMap<u32, (u32, usize)> = HashMap::new();
    for (t, vs) in cur.iter().enumerate() {
        for s in 0..3 {
            let (a, b) = (vs[s], vs[(s + 1) % 3]);
            edge_face.insert((a, b), t as u32);
            *degree.entry(a).or_insert(0) += 1;
            incident.entry(vs[s]).or_insert((t as u32, s));
        }
    }
    // Outgoing edge counting misses the hull edge arriving at each outer
    // corner; the exact degree is irrelevant there since outer corners are
    // never removed.
    let mut candidates: Vec<u32> = degree
        .iter()
        .filter(|&(&v, &d)| d <= MAX_REMOVABLE_DEGREE && !outer.contains(&v))
        .map(|(&v, _)| v)
        .collect();
    candidates.sort_unstable();
    let mut blocked: HashMap<u32, bool> = HashMap::new();
    let mut removed: Vec<u32> = Vec::new();
    // Link cycle of a vertex: CCW neighbors, via directed-edge rotation.
    let link_of = |v: u32| -> Vec<u32> {
        let &(t0, s0) = incident.get(&v).expect("vertex incident to a face");
        let mut link = Vec::new();
        let (mut t, mut s) = (t0, s0);
        loop {
            let vs = cur[t as usize];
            debug_assert_eq!(vs[s], v);
            link.push(vs[(s + 1) % 3]);
            // CCW-next face around v shares edge (v, third vertex).
            let third = vs[(s + 2) % 3];
            let nt = edge_face[&(v, third)];
            let ns = cur[nt as usize].iter().position(|&w| w == v).unwrap();
            t = nt;
            s = ns;
            if t == t0 {
                break;
            }
        }
        link
    };
    for &v in &candidates {
        if blocked.get(&v).copied().unwrap_or(false) {
            continue;
        }
        removed.push(v);
        for w in link_of(v) {
            blocked.insert(w, true);
        }
    }
    assert!(
        !removed.is_empty(),
        "every triangulation with interior vertices has a removable one"
    );
    // Replace each removed vertex's star with a retriangulation of its link.
    let mut replaced = vec![false; cur.len()];
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut link_off: Vec<u32> = vec![0];
    let mut links: Vec<u32> = Vec::new();
    for &v in &removed {
        let link = link_of(v);
        // Star face ids in the same CCW order as the link.
        let star: Vec<u32> = (0..link.len())
            .map(|i| edge_face[&(v, link[i])])
            .collect();
        for &t in &star {
            debug_assert!(!replaced[t as usize]);
            replaced[t as usize] = true;
        }
        for face in polygon::clip_nodes(points, &link)? {
            faces.push(face);
            links.extend_from_slice(&star);
            link_off.push(links.len() as u32);
        }
    }
    for (t, vs) in cur.iter().enumerate() {
        if !replaced[t] {
            faces.push(*vs);
            links.push(t as u32);
            link_off.push(links.len() as u32);
        }
    }
    Ok((faces, link_off, links))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn t4() -> Triangulation {
        Triangulation::parse("4 3\n0 0\n10 0\n5 9\n5 3\n1 2 4\n2 3 4\n3 1 4\n").unwrap()
    }

    /// Oracle: smallest-id face whose closed triangle contains q.
    fn oracle(mesh: &Triangulation, q: Point) -> Option<u32> {
        (0..mesh.f() as u32).find(|&t| {
            let [a, b, c] = mesh.tri_points(t);
            closed_contains(a, b, c, q)
        })
    }

    #[test]
    fn t4_interior_query_returns_tag() {
        let mesh = t4();
        let pl = build_pl(&mesh, &[1, 0, 2]).unwrap();
        let ans = pl.locate(mesh.points(), Point::new(5, 1)).unwrap();
        assert_eq!(ans.face, 0);
        assert_eq!(ans.tag, 1);
    }

    #[test]
    fn outside_query_fails() {
        let mesh = t4();
        let pl = build_pl(&mesh, &[0, 0, 0]).unwrap();
        assert!(matches!(
            pl.locate(mesh.points(), Point::new(100, 100)),
            Err(SgiError::OutsideHull)
        ));
        assert!(matches!(
            pl.locate(mesh.points(), Point::new(0, -1)),
            Err(SgiError::OutsideHull)
        ));
    }

    #[test]
    fn shared_edge_resolves_to_smaller_face_id() {
        let mesh = t4();
        let pl = build_pl(&mesh, &[10, 11, 12]).unwrap();
        // Faces 1 and 2 share edge (2,3): x = 5, y in (3, 9).
        let ans = pl.locate(mesh.points(), Point::new(5, 6)).unwrap();
        assert_eq!(ans.face, 1);
        assert_eq!(ans.tag, 11);
        // The interior vertex (5,3) belongs to all three faces.
        let ans = pl.locate(mesh.points(), Point::new(5, 3)).unwrap();
        assert_eq!(ans.face, 0);
    }

    #[test]
    fn tag_arity_checked() {
        let mesh = t4();
        assert!(matches!(
            build_pl(&mesh, &[1, 2]),
            Err(SgiError::TagArityMismatch { faces: 3, tags: 2 })
        ));
    }

    #[test]
    fn hierarchy_shrinks_to_outer_triangle() {
        let mesh = Triangulation::gen_random(500, 11).unwrap();
        let tags: Vec<u32> = (0..mesh.f() as u32).collect();
        let pl = build_pl(&mesh, &tags).unwrap();
        assert_eq!(pl.levels.last().unwrap().faces.len(), 1);
        assert_eq!(
            {
                let f = pl.levels.last().unwrap().faces[0];
                let mut s = f.to_vec();
                s.sort_unstable();
                s
            },
            vec![0, 1, 2]
        );
        // Linear total size: stored faces ≤ 4× input faces.
        assert!(pl.total_faces() <= 4 * mesh.f());
    }

    #[test]
    fn agrees_with_oracle_on_random_queries() {
        let mesh = Triangulation::gen_random(2000, 42).unwrap();
        let tags: Vec<u32> = (0..mesh.f() as u32).collect();
        let pl = build_pl(&mesh, &tags).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        let b = 1i64 << 28;
        let mut total_orients = 0u64;
        let mut queries = 0u64;
        for _ in 0..2000 {
            let q = Point::new(rng.gen_range(-b..3 * b), rng.gen_range(-b..3 * b));
            let expect = oracle(&mesh, q);
            match pl.locate(mesh.points(), q) {
                Ok(ans) => {
                    assert_eq!(Some(ans.face), expect, "disagrees at {q:?}");
                    assert_eq!(ans.tag, ans.face);
                    total_orients += ans.orients as u64;
                    queries += 1;
                }
                Err(SgiError::OutsideHull) => assert_eq!(expect, None),
                Err(e) => panic!("unexpected error {e}"),
            }
        }
        assert!(queries > 0);
        let mean = total_orients as f64 / queries as f64;
        let lg = (mesh.f() as f64).log2();
        assert!(
            mean <= 40.0 * lg,
            "mean orient count {mean:.1} not logarithmic (lg f = {lg:.1})"
        );
    }

    #[test]
    fn vertex_and_edge_queries_agree_with_oracle() {
        let mesh = Triangulation::gen_random(400, 9).unwrap();
        let tags: Vec<u32> = vec![0; mesh.f()];
        let pl = build_pl(&mesh, &tags).unwrap();
        // Every vertex is a worst-case tie query.
        for v in 0..mesh.n() as u32 {
            let q = mesh.point(v);
            let ans = pl.locate(mesh.points(), q).unwrap();
            assert_eq!(Some(ans.face), oracle(&mesh, q), "vertex {v}");
        }
        // Edge midpoints that happen to be integral are exact on-edge ties.
        let mut checked = 0;
        for t in 0..mesh.f() as u32 {
            let vs = mesh.tri(t);
            for e in 0..3 {
                let (a, b) = (mesh.point(vs[e]), mesh.point(vs[(e + 1) % 3]));
                if (a.x + b.x) % 2 == 0 && (a.y + b.y) % 2 == 0 {
                    let q = Point::new((a.x + b.x) / 2, (a.y + b.y) / 2);
                    let ans = pl.locate(mesh.points(), q).unwrap();
                    assert_eq!(Some(ans.face), oracle(&mesh, q));
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }
}
