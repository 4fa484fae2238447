//! Temporary scratch probe for sizing the index layers.  Not part of the
//! test suite; run with `--ignored --nocapture`.  Delete before release.

use sgi::mesh::Triangulation;
use sgi::pointloc;
use sgi::polygon;
use sgi::separator::{self, FaceComponent, FacePartition};
use std::collections::BTreeSet;
use std::time::Instant;

const TARGET: usize = 2048; // subregion size floor
const GATE_MULT: f64 = 2.8; // whole-region cutoff multiplier
const CAP_FACE_MULT: f64 = 5.0; // bottom-level face-count cap multiplier

fn ceil_log2(n: usize) -> u32 {
    usize::BITS - n.saturating_sub(1).leading_zeros()
}

/// Collects the distinct vertices of a component's boundary cycles.
fn boundary_verts(comp: &FaceComponent) -> BTreeSet<u32> {
    comp.boundaries.iter().flatten().copied().collect()
}

/// Vertices covered by a component's faces.
fn face_verts(faces: &[u32], mesh: &Triangulation) -> BTreeSet<u32> {
    faces.iter().flat_map(|&f| mesh.tri(f)).collect()
}

/// Triangulates a component's area from its boundary cycles: the largest
/// cycle by absolute area is the outline, the rest are holes.
fn coarse_cover(mesh: &Triangulation, comp: &FaceComponent) -> sgi::error::Result<Vec<[u32; 3]>> {
    let outer_idx = comp
        .boundaries
        .iter()
        .enumerate()
        .max_by_key(|(_, b)| sgi::mesh::cycle_area2(mesh.points(), b).abs())
        .map(|(i, _)| i)
        .unwrap();
    let holes: Vec<Vec<u32>> = comp
        .boundaries
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != outer_idx)
        .map(|(_, b)| b.clone())
        .collect();
    polygon::triangulate_region(mesh.points(), &comp.boundaries[outer_idx], &holes)
}

/// Assembles the top search triangulation: separator faces first (tag 0),
/// then each region's coarse cover (tag = region id).  Returns the local
/// mesh, tags, and local->graph vertex map.
fn build_top_carrier(
    mesh: &Triangulation,
    part: &FacePartition,
) -> sgi::error::Result<(Triangulation, Vec<u32>, Vec<u32>)> {
    let mut verts: BTreeSet<u32> = BTreeSet::new();
    for &s in &part.separator {
        verts.extend(mesh.tri(s));
    }
    for comp in &part.components {
        verts.extend(boundary_verts(comp));
    }
    // Corners must come first so the carrier's outer face is [0,1,2].
    let mut order: Vec<u32> = vec![0, 1, 2];
    order.extend(verts.iter().copied().filter(|&v| v >= 3));
    assert!(verts.contains(&0) && verts.contains(&1) && verts.contains(&2));
    let mut local = vec![u32::MAX; mesh.n()];
    for (i, &v) in order.iter().enumerate() {
        local[v as usize] = i as u32;
    }
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut tags: Vec<u32> = Vec::new();
    for &s in &part.separator {
        let t = mesh.tri(s);
        faces.push([local[t[0] as usize], local[t[1] as usize], local[t[2] as usize]]);
        tags.push(0);
    }
    for (ci, comp) in part.components.iter().enumerate() {
        for t in coarse_cover(mesh, comp)? {
            faces.push([
                local[t[0] as usize],
                local[t[1] as usize],
                local[t[2] as usize],
            ]);
            tags.push(ci as u32 + 1);
        }
    }
    let points: Vec<_> = order.iter().map(|&v| mesh.point(v)).collect();
    let carrier = Triangulation::from_faces(points, faces)?;
    Ok((carrier, tags, order))
}

#[test]
#[ignore]
fn probe_partition() {
    for &n in &[1usize << 14, 1 << 17] {
        let t0 = Instant::now();
        let mesh = Triangulation::gen_random(n, 7).unwrap();
        let gen_s = t0.elapsed().as_secs_f64();
        let f = mesh.f();
        let lgf = (f as f64).log2();
        let t = (lgf.powi(3) / f as f64).min(1.0);
        let t1 = Instant::now();
        let part = separator::partition_face_subset(&mesh, None, t, None).unwrap();
        let sep_s = t1.elapsed().as_secs_f64();
        let stats = separator::component_stats(&part);
        let soft = 8.0 * (f as f64 / t).sqrt();
        println!(
            "n={n} f={f} t={t:.5} cap={} gen={gen_s:.2}s sep={sep_s:.2}s",
            (t * f as f64) as usize
        );
        println!(
            "  |S|={} comps={} dup={} maxfaces={} soft_bound={}",
            stats.separator_size,
            stats.component_count,
            stats.duplication_sum,
            stats.max_component_faces,
            soft as usize
        );

        // Top carrier: assemble + validate + hierarchy.
        let t2 = Instant::now();
        let (carrier, tags, order) = build_top_carrier(&mesh, &part).unwrap();
        let asm_s = t2.elapsed().as_secs_f64();
        let t3 = Instant::now();
        let pl = pointloc::build_pl(&carrier, &tags).unwrap();
        let pl_s = t3.elapsed().as_secs_f64();
        let bits_faces = carrier.f() * 3 * ceil_log2(carrier.n()) as usize;
        let bits_map = order.len() * ceil_log2(mesh.n()) as usize;
        let bits_tags = carrier.f() * ceil_log2(part.components.len() + 1) as usize;
        println!(
            "  S' verts={} faces={} asm={asm_s:.2}s pl={pl_s:.2}s levels={} bits(faces+map+tags)={} = {:.2} bpv",
            carrier.n(),
            carrier.f(),
            pl.depth(),
            bits_faces + bits_map + bits_tags,
            (bits_faces + bits_map + bits_tags) as f64 / n as f64
        );

        // Bottom level: partition every big region, count subregion sizes.
        let t4 = Instant::now();
        let gate = (GATE_MULT * TARGET as f64) as usize;
        let mut sub_sizes: Vec<usize> = Vec::new();
        let mut bot_sep_faces = 0usize;
        let mut bot_fail = 0usize;
        for comp in &part.components {
            let nverts = face_verts(&comp.faces, &mesh).len();
            if nverts <= gate {
                sub_sizes.push(nverts);
                continue;
            }
            let mut subset = vec![false; f];
            for &fc in &comp.faces {
                subset[fc as usize] = true;
            }
            let cap = CAP_FACE_MULT * TARGET as f64;
            let ti = (cap / comp.faces.len() as f64).min(1.0);
            let bp = separator::partition_face_subset(&mesh, Some(&subset), ti, None).unwrap();
            bot_sep_faces += bp.separator.len();
            for sub in &bp.components {
                sub_sizes.push(face_verts(&sub.faces, &mesh).len());
                if coarse_cover(&mesh, sub).is_err() {
                    bot_fail += 1;
                }
            }
        }
        let bot_s = t4.elapsed().as_secs_f64();
        sub_sizes.sort_unstable();
        let above = sub_sizes.iter().filter(|&&s| s >= 2045).count();
        println!(
            "  subregions={} sizes min={} med={} max={} >=2045: {above} ({:.0}%) bot_sep={bot_sep_faces} bot_coarse_fail={bot_fail} time={bot_s:.2}s",
            sub_sizes.len(),
            sub_sizes.first().unwrap(),
            sub_sizes[sub_sizes.len() / 2],
            sub_sizes.last().unwrap(),
            100.0 * above as f64 / sub_sizes.len() as f64
        );
        let max_allowed = 3 * TARGET;
        let over = sub_sizes.iter().filter(|&&s| s > max_allowed).count();
        println!("  law: subregions over 3*target: {over}");
    }
}
