//! Balanced separators on planar graphs and triangulation face sets.
//!
//! [`vertex_separator`] removes a vertex set so that no remaining connected
//! component exceeds a `t` fraction of the total weight, using recursive
//! BFS-level splitting followed by a greedy re-absorption pass that returns
//! unneeded separator vertices to their neighborhoods.  [`face_separator`]
//! applies it to a triangulation's dual graph and extracts, per surviving
//! face component, its boundary cycles (walked with the component on the
//! left, so pieces are CCW and holes CW).

use crate::error::{Result, SgiError};
use crate::mesh::{Triangulation, OUTER};

/// A face component left after separator removal: its faces and the vertex
/// cycles bounding it.
#[derive(Debug, Clone)]
pub struct FaceComponent {
    /// Face ids, ascending.
    pub faces: Vec<u32>,
    /// Boundary cycles (vertex ids), component kept on the left; pairwise
    /// edge-disjoint.  Cycles may revisit pinch vertices.
    pub boundaries: Vec<Vec<u32>>,
}

/// Result of [`face_separator`]: separator faces plus the components they
/// cut the triangulation into.
#[derive(Debug, Clone)]
pub struct FacePartition {
    /// The target fraction used.
    pub t: f64,
    /// Separator face ids, ascending.
    pub separator: Vec<u32>,
    /// Components of the remaining faces, ordered by smallest face id.
    pub components: Vec<FaceComponent>,
}

/// Summary counters over a [`FacePartition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartitionStats {
    /// Number of components.
    pub component_count: usize,
    /// Total boundary occurrences over all components (each cycle position
    /// counts one duplication).
    pub duplication_sum: usize,
    /// Faces in the separator.
    pub separator_size: usize,
    /// Largest component face count.
    pub max_component_faces: usize,
}

/// Computes a weighted `t`-separator of a planar graph given by adjacency
/// lists: after removing the returned vertices (mask `true`), every
/// connected component weighs at most `t` times the total weight.
/// Disconnected inputs are handled per component.
pub fn vertex_separator(adj: &[Vec<u32>], weights: &[u64], t: f64) -> Result<Vec<bool>> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(SgiError::ParamError(format!("t = {t} not in (0, 1]")));
    }
    let n = adj.len();
    if weights.len() != n {
        return Err(SgiError::ParamError(format!(
            "weight count {} != vertex count {n}",
            weights.len()
        )));
    }
    let total: u128 = weights.iter().map(|&w| w as u128).sum();
    let cap: u128 = (t * total as f64).floor() as u128;
    let mut in_sep = vec![false; n];
    if n == 0 {
        return Ok(in_sep);
    }
    let keep = vec![true; n];
    let mut work: Vec<Vec<u32>> = components(adj, &keep);
    // Scratch arrays reused across splits, stamped by generation.
    let mut stamp = vec![0u32; n];
    let mut level = vec![0u32; n];
    let mut generation = 0u32;
    while let Some(set) = work.pop() {
        let w: u128 = set.iter().map(|&v| weights[v as usize] as u128).sum();
        if w <= cap {
            continue;
        }
        generation += 1;
        split_set(adj, weights, &set, w, &mut in_sep, &mut stamp, &mut level, generation);
        // Flood the set minus the new separator vertices into sub-components.
        generation += 1;
        for &v in &set {
            if !in_sep[v as usize] {
                stamp[v as usize] = generation;
            }
        }
        for &v in &set {
            if in_sep[v as usize] || stamp[v as usize] != generation {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = vec![v];
            stamp[v as usize] = generation + 1;
            while let Some(u) = queue.pop() {
                comp.push(u);
                for &x in &adj[u as usize] {
                    if stamp[x as usize] == generation {
                        stamp[x as usize] = generation + 1;
                        queue.push(x);
                    }
                }
            }
            work.push(comp);
        }
        generation += 1;
    }
    trim(adj, weights, cap, &mut in_sep);
    Ok(in_sep)
}

/// Chooses a BFS level of `set` as separator material and marks it.
#[allow(clippy::too_many_arguments)]
fn split_set(
    adj: &[Vec<u32>],
    weights: &[u64],
    set: &[u32],
    set_weight: u128,
    in_sep: &mut [bool],
    stamp: &mut [u32],
    level: &mut [u32],
    generation: u32,
) {
    for &v in set {
        stamp[v as usize] = generation;
    }
    // Double sweep: BFS from an arbitrary member, restart from the farthest
    // vertex found (pseudo-peripheral start flattens the level profile).
    let bfs = |start: u32, level: &mut [u32], seen_mark: &mut Vec<bool>| -> (u32, u32) {
        for &v in set {
            seen_mark[v as usize] = false;
        }
        let mut queue = std::collections::VecDeque::new();
        queue.push_back(start);
        seen_mark[start as usize] = true;
        level[start as usize] = 0;
        let mut last = start;
        let mut max_level = 0;
        while let Some(u) = queue.pop_front() {
            last = u;
            max_level = level[u as usize];
            for &x in &adj[u as usize] {
                if stamp[x as usize] == generation && !seen_mark[x as usize] {
                    seen_mark[x as usize] = true;
                    level[x as usize] = level[u as usize] + 1;
                    queue.push_back(x);
                }
            }
        }
        (last, max_level)
    };
    let mut seen = vec![false; adj.len()];
    let (far, _) = bfs(set[0], level, &mut seen);
    let (_, max_level) = bfs(far, level, &mut seen);
    // Level weights and sizes.
    let levels = max_level as usize + 1;
    let mut lw = vec![0u128; levels];
    let mut lc = vec![0usize; levels];
    for &v in set {
        lw[level[v as usize] as usize] += weights[v as usize] as u128;
        lc[level[v as usize] as usize] += 1;
    }
    // Pick the level whose removal best balances the two sides: among levels
    // leaving both sides ≤ 3/4 of the set weight, the thinnest; otherwise
    // the most balanced.
    let mut prefix = 0u128;
    let mut best: Option<(bool, u128, usize, usize)> = None; // (unbalanced, key, count, idx)
    for l in 0..levels {
        let below = prefix;
        prefix += lw[l];
        let above = set_weight - prefix;
        let side = below.max(above);
        let balanced = side * 4 <= set_weight * 3;
        let cand = if balanced {
            (false, lc[l] as u128, lc[l], l)
        } else {
            (true, side, lc[l], l)
        };
        if best.map_or(true, |b| cand < b) {
            best = Some(cand);
        }
    }
    let chosen = best.expect("nonempty set has a level").3 as u32;
    for &v in set {
        if level[v as usize] == chosen {
            in_sep[v as usize] = true;
        }
    }
}

/// Greedy pass returning separator vertices whose re-absorption keeps every
/// merged component within `cap`.
fn trim(adj: &[Vec<u32>], weights: &[u64], cap: u128, in_sep: &mut [bool]) {
    let n = adj.len();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut comp_w: Vec<u128> = weights.iter().map(|&w| w as u128).collect();
    fn find(parent: &mut [u32], mut v: u32) -> u32 {
        while parent[v as usize] != v {
            parent[v as usize] = parent[parent[v as usize] as usize];
            v = parent[v as usize];
        }
        v
    }
    for v in 0..n as u32 {
        if in_sep[v as usize] {
            continue;
        }
        for &u in &adj[v as usize] {
            if u < v && !in_sep[u as usize] {
                let (a, b) = (find(&mut parent, v), find(&mut parent, u));
                if a != b {
                    parent[a as usize] = b;
                    comp_w[b as usize] += comp_w[a as usize];
                }
            }
        }
    }
    loop {
        let mut changed = false;
        for v in 0..n as u32 {
            if !in_sep[v as usize] {
                continue;
            }
            let mut roots: Vec<u32> = adj[v as usize]
                .iter()
                .filter(|&&u| !in_sep[u as usize])
                .map(|&u| find(&mut parent, u))
                .collect();
            roots.sort_unstable();
            roots.dedup();
            let total: u128 = weights[v as usize] as u128
                + roots.iter().map(|&r| comp_w[r as usize]).sum::<u128>();
            if total <= cap {
                in_sep[v as usize] = false;
                let mut acc = find(&mut parent, v);
                for &r in &roots {
                    let rr = find(&mut parent, r);
                    if rr != acc {
                        parent[rr as usize] = acc;
                        comp_w[acc as usize] += comp_w[rr as usize];
                        acc = find(&mut parent, acc);
                    }
                }
                comp_w[acc as usize] = total;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
}

/// Connected components of the subgraph induced by `include`, each sorted
/// ascending; components ordered by smallest member.
pub fn components(adj: &[Vec<u32>], include: &[bool]) -> Vec<Vec<u32>> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for s in 0..n as u32 {
        if !include[s as usize] || seen[s as usize] {
            continue;
        }
        let mut comp = vec![];
        let mut queue = vec![s];
        seen[s as usize] = true;
        while let Some(u) = queue.pop() {
            comp.push(u);
            for &x in &adj[u as usize] {
                if include[x as usize] && !seen[x as usize] {
                    seen[x as usize] = true;
                    queue.push(x);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Boundary cycles of the face set marked by `in_set`, each walked with the
/// set on its left.  Starts are ordered by (vertex, successor vertex) so the
/// output is deterministic.
pub fn face_set_boundaries(mesh: &Triangulation, in_set: &[bool]) -> Vec<Vec<u32>> {
    let faces: Vec<u32> = (0..mesh.f() as u32).filter(|&t| in_set[t as usize]).collect();
    boundaries_of(mesh, in_set, &faces)
}

/// [`face_set_boundaries`] with the member faces already listed, so the scan
/// cost is proportional to the subset rather than the whole mesh.
fn boundaries_of(mesh: &Triangulation, in_set: &[bool], faces: &[u32]) -> Vec<Vec<u32>> {
    let is_boundary = |t: u32, e: usize| -> bool {
        let nb = mesh.neighbor(t, e);
        nb == OUTER || !in_set[nb as usize]
    };
    let mut starts: Vec<(u32, usize)> = Vec::new();
    for &t in faces {
        debug_assert!(in_set[t as usize]);
        for e in 0..3 {
            if is_boundary(t, e) {
                starts.push((t, e));
            }
        }
    }
    starts.sort_by_key(|&(t, e)| {
        let tri = mesh.tri(t);
        (tri[e], tri[(e + 1) % 3], t, e as u32)
    });
    let mut visited = std::collections::HashSet::new();
    let mut cycles = Vec::new();
    for &start in &starts {
        if visited.contains(&start) {
            continue;
        }
        let mut cycle = Vec::new();
        let (mut ct, mut ce) = start;
        loop {
            visited.insert((ct, ce));
            cycle.push(mesh.tri(ct)[ce]);
            // Rotate around the edge's head until the next boundary edge.
            let mut ft = ct;
            let mut fe = (ce + 1) % 3;
            while !is_boundary(ft, fe) {
                let nb = mesh.neighbor(ft, fe);
                let v = mesh.tri(ft)[(fe + 1) % 3];
                // The crossed edge appears in `nb` reversed, so the slot of
                // its head there is followed by our pivot vertex.
                let s = mesh.slot_of(nb, v);
                ft = nb;
                fe = (s + 1) % 3;
            }
            ct = ft;
            ce = fe;
            if (ct, ce) == start {
                break;
            }
        }
        cycles.push(cycle);
    }
    cycles
}

/// Computes a `t`-face separator of the triangulation: removes internal
/// faces so no remaining edge-connected face component exceeds `t·f` faces
/// (or `t` times the total weight when `face_weights` is given), and
/// extracts each component's boundary cycles.
pub fn face_separator(
    mesh: &Triangulation,
    t: f64,
    face_weights: Option<&[u64]>,
) -> Result<FacePartition> {
    partition_face_subset(mesh, None, t, face_weights)
}

/// [`face_separator`] restricted to the faces marked in `subset` (`None`
/// means all faces): the separator is drawn from the subset, components are
/// edge-connected within it, and the weight/`t` bound applies to the
/// subset's total weight.
///
/// After the cut, components are repaired until every component's area is a
/// manifold with boundary: wherever a boundary vertex is visited twice (the
/// component pinches at a vertex, or a hole touches the outline), one
/// incident component face is moved into the separator and components are
/// recomputed.  The loop strictly shrinks the component face set, so it
/// terminates; in practice one or two rounds suffice.  The guarantee lets
/// callers triangulate each component's area from simple, pairwise
/// vertex-disjoint cycles.
pub fn partition_face_subset(
    mesh: &Triangulation,
    subset: Option<&[bool]>,
    t: f64,
    face_weights: Option<&[u64]>,
) -> Result<FacePartition> {
    let f = mesh.f();
    if let Some(s) = subset {
        if s.len() != f {
            return Err(SgiError::ParamError(format!(
                "subset mask length {} != face count {f}",
                s.len()
            )));
        }
    }
    let in_subset = |t_: usize| subset.is_none_or(|s| s[t_]);
    let weights: Vec<u64> = match face_weights {
        Some(w) => {
            if w.len() != f {
                return Err(SgiError::ParamError(format!(
                    "face weight count {} != face count {f}",
                    w.len()
                )));
            }
            (0..f).map(|t_| if in_subset(t_) { w[t_] } else { 0 }).collect()
        }
        None => (0..f).map(|t_| u64::from(in_subset(t_))).collect(),
    };
    let mut dual = mesh.dual_graph();
    if subset.is_some() {
        for (t_, adj) in dual.iter_mut().enumerate() {
            if in_subset(t_) {
                adj.retain(|&nb| in_subset(nb as usize));
            } else {
                adj.clear();
            }
        }
    }
    let sep = vertex_separator(&dual, &weights, t)?;
    let mut keep: Vec<bool> = (0..f).map(|t_| in_subset(t_) && !sep[t_]).collect();
    let mut in_set = vec![false; f];
    let mut components_out;
    loop {
        let comps = components(&dual, &keep);
        components_out = Vec::with_capacity(comps.len());
        let mut evicted = false;
        for faces in comps {
            for &fc in &faces {
                in_set[fc as usize] = true;
            }
            let boundaries = boundaries_of(mesh, &in_set, &faces);
            assert!(!boundaries.is_empty(), "face component must have a boundary");
            // A vertex visited more than once across the component's cycles
            // is a pinch.  Repair by evicting the smallest fan of component
            // faces around it.
            let mut occ: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
            for cycle in &boundaries {
                for &v in cycle {
                    *occ.entry(v).or_insert(0) += 1;
                }
            }
            let pinch_verts: std::collections::BTreeSet<u32> =
                occ.iter().filter(|&(_, &c)| c >= 2).map(|(&v, _)| v).collect();
            let mut anchor: std::collections::HashMap<u32, u32> = std::collections::HashMap::new();
            for &fc in &faces {
                for v in mesh.tri(fc) {
                    if pinch_verts.contains(&v) {
                        let e = anchor.entry(v).or_insert(fc);
                        *e = (*e).min(fc);
                    }
                }
            }
            for &v in &pinch_verts {
                let fc = anchor[&v];
                if !in_set[fc as usize] {
                    continue; // already evicted this round
                }
                if evict_smallest_fan(mesh, v, fc, &mut keep, &mut in_set) {
                    evicted = true;
                }
            }
            for &fc in &faces {
                in_set[fc as usize] = false;
            }
            components_out.push(FaceComponent { faces, boundaries });
        }
        if !evicted {
            break;
        }
    }
    let separator: Vec<u32> =
        (0..f as u32).filter(|&t_| in_subset(t_ as usize) && !keep[t_ as usize]).collect();
    Ok(FacePartition { t, separator, components: components_out })
}

/// Repairs one pinch: among the maximal fans of member faces (`in_set`)
/// around `v`, evicts the smallest from both masks.  Returns whether
/// anything was evicted (false when the pinch already resolved itself this
/// round).
fn evict_smallest_fan(
    mesh: &Triangulation,
    v: u32,
    member_face: u32,
    keep: &mut [bool],
    in_set: &mut [bool],
) -> bool {
    let s = mesh.slot_of(member_face, v);
    let (star, closed) = mesh.star(v, member_face, s as u8);
    let member: Vec<bool> = star.iter().map(|&t| in_set[t as usize]).collect();
    // Maximal runs of member faces in rotation order.
    let mut runs: Vec<Vec<u32>> = Vec::new();
    for (i, &t) in star.iter().enumerate() {
        if !member[i] {
            continue;
        }
        if i == 0 || !member[i - 1] {
            runs.push(Vec::new());
        }
        runs.last_mut().unwrap().push(t);
    }
    // A closed star wraps: merge the last run into the first.
    if closed && runs.len() >= 2 && member[0] && member[star.len() - 1] {
        let tail = runs.pop().unwrap();
        runs.first_mut().unwrap().splice(0..0, tail);
    }
    if runs.len() < 2 {
        return false;
    }
    let smallest = runs
        .iter()
        .min_by_key(|r| (r.len(), r.iter().copied().min()))
        .unwrap();
    for &t in smallest {
        keep[t as usize] = false;
        in_set[t as usize] = false;
    }
    true
}

/// Counts components and boundary duplication over a partition.
pub fn component_stats(p: &FacePartition) -> PartitionStats {
    let duplication_sum = p
        .components
        .iter()
        .flat_map(|c| c.boundaries.iter())
        .map(|b| b.len())
        .sum();
    PartitionStats {
        component_count: p.components.len(),
        duplication_sum,
        separator_size: p.separator.len(),
        max_component_faces: p.components.iter().map(|c| c.faces.len()).max().unwrap_or(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::cycle_area2;

    fn path_graph(n: usize) -> Vec<Vec<u32>> {
        (0..n)
            .map(|i| {
                let mut a = Vec::new();
                if i > 0 {
                    a.push(i as u32 - 1);
                }
                if i + 1 < n {
                    a.push(i as u32 + 1);
                }
                a
            })
            .collect()
    }

    fn check_bound(adj: &[Vec<u32>], weights: &[u64], t: f64, sep: &[bool]) {
        let total: u128 = weights.iter().map(|&w| w as u128).sum();
        let keep: Vec<bool> = sep.iter().map(|&s| !s).collect();
        for comp in components(adj, &keep) {
            let w: u128 = comp.iter().map(|&v| weights[v as usize] as u128).sum();
            assert!(
                w as f64 <= t * total as f64,
                "component weight {w} exceeds {t} of {total}"
            );
        }
    }

    #[test]
    fn dominant_weight_vertex_lands_in_separator() {
        let adj = path_graph(3);
        let weights = [1u64, 18, 1];
        let sep = vertex_separator(&adj, &weights, 0.5).unwrap();
        assert!(sep[1], "overweight vertex can belong to no component");
        check_bound(&adj, &weights, 0.5, &sep);
    }

    #[test]
    fn unit_path_splits_with_one_vertex() {
        let adj = path_graph(8);
        let weights = [1u64; 8];
        let sep = vertex_separator(&adj, &weights, 0.5).unwrap();
        check_bound(&adj, &weights, 0.5, &sep);
        let count = sep.iter().filter(|&&s| s).count();
        assert!(count <= 2, "a middle vertex suffices, got {count}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let adj = path_graph(4);
        assert!(matches!(
            vertex_separator(&adj, &[1; 4], 0.0),
            Err(SgiError::ParamError(_))
        ));
        assert!(matches!(
            vertex_separator(&adj, &[1; 4], 1.5),
            Err(SgiError::ParamError(_))
        ));
        assert!(matches!(
            vertex_separator(&adj, &[1; 3], 0.5),
            Err(SgiError::ParamError(_))
        ));
    }

    #[test]
    fn disconnected_graph_handled_per_component() {
        // Two disjoint paths of 6.
        let mut adj = path_graph(6);
        let other = path_graph(6);
        let off = 6u32;
        for a in other {
            adj.push(a.into_iter().map(|v| v + off).collect());
        }
        let weights = [1u64; 12];
        let sep = vertex_separator(&adj, &weights, 0.25).unwrap();
        check_bound(&adj, &weights, 0.25, &sep);
    }

    #[test]
    fn random_mesh_dual_respects_bound() {
        let mesh = Triangulation::gen_random(1500, 99).unwrap();
        let dual = mesh.dual_graph();
        let weights = vec![1u64; mesh.f()];
        let t = 0.01;
        let sep = vertex_separator(&dual, &weights, t).unwrap();
        check_bound(&dual, &weights, t, &sep);
        let size = sep.iter().filter(|&&s| s).count();
        let bound = 8.0 * (mesh.f() as f64 / t).sqrt();
        assert!(
            (size as f64) <= bound,
            "separator size {size} above soft bound {bound:.0}"
        );
    }

    #[test]
    fn t4_full_fraction_gives_empty_separator() {
        let mesh = Triangulation::gen_random(4, 7).unwrap();
        let part = face_separator(&mesh, 1.0, None).unwrap();
        assert!(part.separator.is_empty());
        assert_eq!(part.components.len(), 1);
        assert_eq!(part.components[0].faces.len(), 3);
        let stats = component_stats(&part);
        assert_eq!(stats.component_count, 1);
        // Single component covering everything: its only boundary is the
        // outer cycle of length 3.
        assert_eq!(stats.duplication_sum, 3);
    }

    #[test]
    fn t4_one_third_fraction_isolates_faces() {
        let mesh = Triangulation::gen_random(4, 7).unwrap();
        let part = face_separator(&mesh, 1.0 / 3.0, None).unwrap();
        for c in &part.components {
            assert!(c.faces.len() <= 1);
        }
    }

    #[test]
    fn t4_single_face_separator_leaves_one_component() {
        // All three faces of the minimal mesh are pairwise adjacent, so
        // removing any single face leaves the other two connected.
        let mesh = Triangulation::gen_random(4, 7).unwrap();
        let dual = mesh.dual_graph();
        let keep: Vec<bool> = (0..3).map(|i| i != 1).collect();
        let comps = components(&dual, &keep);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].len(), 2);
    }

    #[test]
    fn star_and_complement_boundaries() {
        let mesh = Triangulation::gen_random(300, 5).unwrap();
        // Find an interior vertex whose neighborhood avoids the outer
        // corners, so the complement's hole does not pinch the hull.
        let incidence = mesh.vertex_incidence();
        let degrees = mesh.degrees();
        let v = (3..mesh.n() as u32)
            .find(|&v| {
                let (t0, s0) = incidence[v as usize];
                let (faces, closed) = mesh.star(v, t0, s0);
                closed
                    && degrees[v as usize] >= 5
                    && faces
                        .iter()
                        .all(|&t| mesh.tri(t).iter().all(|&w| w >= 3))
            })
            .expect("interior vertex exists");
        let (t0, s0) = incidence[v as usize];
        let (star_faces, closed) = mesh.star(v, t0, s0);
        assert!(closed);
        let mut in_star = vec![false; mesh.f()];
        for &t in &star_faces {
            in_star[t as usize] = true;
        }
        // The star of an interior vertex is a disk: one CCW boundary cycle
        // of length = degree.
        let cycles = face_set_boundaries(&mesh, &in_star);
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].len(), degrees[v as usize] as usize);
        assert!(cycle_area2(mesh.points(), &cycles[0]) > 0);
        assert!(!cycles[0].contains(&v));
        // The complement has the outer hull cycle (CCW) plus the star hole
        // (CW).
        let in_rest: Vec<bool> = in_star.iter().map(|&b| !b).collect();
        let rest_cycles = face_set_boundaries(&mesh, &in_rest);
        assert_eq!(rest_cycles.len(), 2);
        let mut pos = 0;
        let mut neg = 0;
        for c in &rest_cycles {
            let a = cycle_area2(mesh.points(), c);
            if a > 0 {
                pos += 1;
                assert_eq!(c.len(), 3, "outer boundary is the hull triangle");
            } else {
                neg += 1;
                assert_eq!(c.len(), degrees[v as usize] as usize);
            }
        }
        assert_eq!((pos, neg), (1, 1));
        // Edge-disjointness across all cycles of one component.
        let mut seen = std::collections::HashSet::new();
        for c in &rest_cycles {
            for i in 0..c.len() {
                let (a, b) = (c[i], c[(i + 1) % c.len()]);
                assert!(seen.insert((a.min(b), a.max(b))), "edge repeated");
            }
        }
    }

    #[test]
    fn boundary_walk_conserves_area_with_pinches() {
        // Vertex 3 of this mesh is adjacent to outer corners, so removing
        // its star produces a complement whose hole pinches the hull; the
        // walk must still tile areas exactly.
        let mesh = Triangulation::gen_random(300, 5).unwrap();
        let incidence = mesh.vertex_incidence();
        let (t0, s0) = incidence[3];
        let (star_faces, closed) = mesh.star(3, t0, s0);
        assert!(closed);
        let mut in_star = vec![false; mesh.f()];
        for &t in &star_faces {
            in_star[t as usize] = true;
        }
        let star_area: i128 = face_set_boundaries(&mesh, &in_star)
            .iter()
            .map(|c| cycle_area2(mesh.points(), c))
            .sum();
        let in_rest: Vec<bool> = in_star.iter().map(|&b| !b).collect();
        let rest_area: i128 = face_set_boundaries(&mesh, &in_rest)
            .iter()
            .map(|c| cycle_area2(mesh.points(), c))
            .sum();
        let hull = mesh.outer();
        let hull_area = crate::geom::signed_area2(
            mesh.point(hull[0]),
            mesh.point(hull[1]),
            mesh.point(hull[2]),
        );
        assert_eq!(star_area + rest_area, hull_area);
    }

    #[test]
    fn face_separator_partition_is_exact() {
        let mesh = Triangulation::gen_random(2000, 21).unwrap();
        let t = 0.02;
        let part = face_separator(&mesh, t, None).unwrap();
        let mut seen = vec![false; mesh.f()];
        for &f in &part.separator {
            assert!(!seen[f as usize]);
            seen[f as usize] = true;
        }
        for c in &part.components {
            assert!(c.faces.len() as f64 <= t * mesh.f() as f64);
            for &f in &c.faces {
                assert!(!seen[f as usize], "face in two parts");
                seen[f as usize] = true;
            }
        }
        assert!(seen.iter().all(|&s| s), "every face accounted for");
        let stats = component_stats(&part);
        let bound = 8.0 * (mesh.f() as f64 / t).sqrt();
        assert!((stats.separator_size as f64) <= bound);
        assert!((stats.component_count as f64) <= bound);
    }

    #[test]
    fn weighted_faces_respect_weighted_bound() {
        let mesh = Triangulation::gen_random(500, 3).unwrap();
        // Skewed weights: face id + 1.
        let weights: Vec<u64> = (0..mesh.f() as u64).map(|i| i + 1).collect();
        let t = 0.1;
        let part = face_separator(&mesh, t, Some(&weights)).unwrap();
        let total: u128 = weights.iter().map(|&w| w as u128).sum();
        for c in &part.components {
            let w: u128 = c.faces.iter().map(|&f| weights[f as usize] as u128).sum();
            assert!(w as f64 <= t * total as f64);
        }
    }
}
