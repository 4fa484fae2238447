//! The headline artifact: a two-level partition of a triangulation, vertex
//! relabeling, sublinear conversion tables, coarse point-location layers,
//! the query algorithm, and the serialized container.
//!
//! # How the index works
//!
//! The triangulation's faces are cut by a balanced separator into regions of
//! at most `t·f` faces (`t = lg^a f / f`), and each large region is cut
//! again into subregions of roughly `max(lg^b n, s0)` vertices.  Subregion
//! connectivity is not stored as pointers: each subregion's points are
//! written in an order chosen by the permutation codec, so the order itself
//! carries the faces.  What remains is glue, and the glue is small:
//!
//! * a coarse triangulation over the top separator's vertices whose faces
//!   are tagged with the region they cover (搜索 structure rebuilt at load),
//! * per region, a similar coarse layer over its internal separator,
//! * label-conversion tables translating a vertex's position within a
//!   subregion to its position within the region and the whole array.
//!
//! A query walks the top layer, then a region layer, then decodes one
//! subregion and scans its faces — `O(lg n)` orientation tests plus a
//! subregion-sized scan.  Subregions too small for the codec's minimum are
//! stored as plain face lists (an explicit fallback that the size report
//! accounts honestly).

use crate::bitvec::FixedVec;
use crate::error::{Result, SgiError};
use crate::geom::{self, Point};
use crate::labels::{LabelTables, LevelTable};
use crate::mesh::{Subdivision, Triangulation};
use crate::permcode::{self, CodecConfig, CodecMode};
use crate::pointloc::{self, PlStructure};
use crate::polygon;
use crate::separator::{self, FaceComponent, FacePartition};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap, HashSet};

/// Whole-region cutoff: regions at most this multiple of the subregion
/// target stay unsplit.  Chosen above 1 so typical subregions land at or
/// above the codec's minimum size instead of just under the target.
const GATE_MULT: f64 = 2.8;
/// Bottom-level separator cap, in faces, as a multiple of the target vertex
/// count.  With ~2 faces per vertex this aims subregions at ~2.5× the
/// target, comfortably inside the 3× hard law.
const CAP_FACE_MULT: f64 = 5.0;
/// Subregion vertex counts may exceed the target by at most this factor.
const LAW_SLACK: usize = 3;

const MAGIC: &[u8; 4] = b"SGI1";
const FORMAT_VERSION: u16 = 1;
/// Offset of the stream (everything after magic + version) in the file.
pub(crate) const STREAM_START: usize = 6;

/// Marks a codec-backed subregion in the directory.
const NO_EXPLICIT: u32 = u32::MAX;
/// Marks a region without a bottom search layer.
const NO_LAYER: u64 = u64::MAX;

mod section {
    pub const TOPPL: u32 = 1;
    pub const REGPL: u32 = 2;
    pub const LBLB: u32 = 3;
    pub const LBLC: u32 = 4;
    pub const LBLD: u32 = 5;
    pub const LBLX: u32 = 6;
    pub const DIRS: u32 = 7;
    pub const EXPL: u32 = 8;
    pub const META: u32 = 9;

    pub fn name(tag: u32) -> &'static str {
        match tag {
            TOPPL => "TOPPL",
            REGPL => "REGPL",
            LBLB => "LBLB",
            LBLC => "LBLC",
            LBLD => "LBLD",
            LBLX => "LBLX",
            DIRS => "DIRS",
            EXPL => "EXPL",
            META => "META",
            _ => "?",
        }
    }
}

/// Connectivity backend for subregions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// Vertex order carries the faces; no connectivity bits except where a
    /// subregion falls below the codec minimum.
    Permutation,
    /// Every subregion stored as an explicit face list (for differential
    /// testing; flags the build non-succinct).
    Explicit,
}

impl Backend {
    fn as_str(self) -> &'static str {
        match self {
            Backend::Permutation => "permutation",
            Backend::Explicit => "explicit",
        }
    }
}

/// Build-time parameters.
#[derive(Debug, Clone)]
pub struct BuildParams {
    /// Top-level separator exponent: `t = lg^a f / f`.
    pub a: u32,
    /// Bottom-level target exponent: target `= max(lg^b n, s0)`.
    pub b: u32,
    /// Subregion size floor in vertices.
    pub s0: u32,
    /// Codec used for subregion connectivity.
    pub codec: CodecConfig,
    /// Subregion storage backend.
    pub backend: Backend,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams {
            a: 3,
            b: 1,
            s0: 2048,
            codec: CodecConfig::subdivision(),
            backend: Backend::Permutation,
        }
    }
}

impl BuildParams {
    fn validate(&self) -> Result<()> {
        if self.a <= 2 {
            return Err(SgiError::ParamError(format!(
                "top-level exponent a = {} must exceed 2",
                self.a
            )));
        }
        if self.b == 0 {
            return Err(SgiError::ParamError("bottom-level exponent b must be positive".into()));
        }
        if self.s0 == 0 {
            return Err(SgiError::ParamError("subregion floor s0 must be positive".into()));
        }
        if self.codec.mode != CodecMode::Subdivision {
            return Err(SgiError::ParamError("subregion codec must be in subdivision mode".into()));
        }
        Ok(())
    }

    /// The subregion vertex target for an `n`-vertex input.
    fn target(&self, n: usize) -> f64 {
        ((n as f64).log2().powi(self.b as i32)).max(self.s0 as f64)
    }
}

/// Exact serialized size of every container piece, in bits.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SizeBreakdown {
    /// Params block plus section table.
    pub framing: u64,
    /// Top coarse layer (level-0 faces, tags, vertex map).
    pub toppl: u64,
    /// All per-region coarse layers.
    pub regpl: u64,
    /// Group-size vectors of every conversion table.
    pub lblb: u64,
    /// Duplicate-slot flag vectors.
    pub lblc: u64,
    /// Spilled duplicate labels.
    pub lbld: u64,
    /// Per-region directory.
    pub lblx: u64,
    /// Per-subregion directory.
    pub dirs: u64,
    /// Explicit fallback face lists.
    pub expl: u64,
    /// JSON build summary.
    pub meta: u64,
    /// Whole stream (the file minus magic and version), including padding.
    pub total: u64,
}

impl SizeBreakdown {
    /// Section sizes as (name, bits) pairs, framing first.
    pub fn parts(&self) -> [(&'static str, u64); 10] {
        [
            ("framing", self.framing),
            ("TOPPL", self.toppl),
            ("REGPL", self.regpl),
            ("LBLB", self.lblb),
            ("LBLC", self.lblc),
            ("LBLD", self.lbld),
            ("LBLX", self.lblx),
            ("DIRS", self.dirs),
            ("EXPL", self.expl),
            ("META", self.meta),
        ]
    }
}

/// Build summary carried in the container's META section.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Meta {
    /// Vertex count.
    pub n: u64,
    /// Subregion storage backend.
    pub backend: String,
    /// Region count.
    pub regions: u32,
    /// Total subregion count.
    pub subregions: u32,
    /// Subregions stored as explicit face lists.
    pub explicit_subregions: u32,
    /// Bits spent on explicit face lists.
    pub explicit_bits: u64,
    /// Serialized bits per section (META excluded; it cannot describe
    /// itself).
    pub section_bits: BTreeMap<String, u64>,
}

/// One coarse search layer: level-0 faces with region/subregion tags, the
/// vertex map into the parent label space, and the hierarchy rebuilt over
/// them at load time.
struct Layer {
    faces: Vec<[u32; 3]>,
    tags: Vec<u32>,
    /// Local vertex (minus `skip`) → parent-space label.
    vmap: Vec<u32>,
    /// Leading local vertices not covered by `vmap` (3 synthetic corners on
    /// bottom layers, 0 on top).
    skip: u32,
    /// Resolved local coordinates, derived at load.
    pts: Vec<Point>,
    pl: PlStructure,
}

/// Per-region query data.
struct Region {
    n_verts: u32,
    subs: u32,
    /// Index of the region's first entry in the subregion directory.
    sub_base: u32,
    layer: Option<Layer>,
}

/// Per-subregion directory entry.
#[derive(Debug, Clone, Copy)]
struct SubDir {
    /// Vertex count.
    count: u32,
    /// Byte offset of the explicit face list, or [`NO_EXPLICIT`].
    expl_off: u32,
}

/// The assembled index: everything [`locate`](SuccinctIndex::locate) needs
/// except the point array itself.  The serialized container stores no
/// coordinates; layer coordinates held here are resolved from the external
/// array at load time.
pub struct SuccinctIndex {
    params: BuildParams,
    n: usize,
    top: Layer,
    regions: Vec<Region>,
    tables: LabelTables,
    dirs: Vec<SubDir>,
    expl: Vec<u8>,
    meta: Meta,
    /// Canonical serialized form (the exact `.sgi` file bytes).
    container: Vec<u8>,
    size: SizeBreakdown,
}

// ---------------------------------------------------------------------------
// Build
// ---------------------------------------------------------------------------

/// Output of the bottom-level cut of one region.
struct RegionPlan {
    /// Global face ids per subregion, with boundaries.
    subs: Vec<FaceComponent>,
    /// Global ids of the region's internal separator faces, ascending.
    sep: Vec<u32>,
    /// The region's boundary cycles (from the top partition).
    boundaries: Vec<Vec<u32>>,
    /// Distinct vertex ids of the region's faces, ascending.
    verts: Vec<u32>,
}

/// Builds the index over `t`, returning the point array in graph-label
/// order and the index itself.
pub fn build_index(t: &Triangulation, params: &BuildParams) -> Result<(Vec<Point>, SuccinctIndex)> {
    params.validate()?;
    let n = t.n();
    if n < 4 {
        return Err(SgiError::TooSmall { got: n, min: 4 });
    }
    let f = t.f();
    let top_t = ((f as f64).log2().powi(params.a as i32) / f as f64).min(1.0);
    let top = separator::partition_face_subset(t, None, top_t, None)?;
    for comp in &top.components {
        assert!(
            comp.faces.len() as f64 <= top_t * f as f64 + 1.0,
            "region of {} faces exceeds the t·f hard law",
            comp.faces.len()
        );
    }

    let target = params.target(n);
    let plans: Vec<RegionPlan> = top
        .components
        .iter()
        .map(|comp| plan_region(t, comp, target))
        .collect::<Result<_>>()?;
    for plan in &plans {
        for sub in &plan.subs {
            let nv = face_verts(t, &sub.faces).len();
            assert!(
                nv <= LAW_SLACK * target as usize,
                "subregion of {nv} vertices exceeds {LAW_SLACK}× the target"
            );
        }
    }

    // Encode every subregion and fix its vertex order.
    let mut region_tables = Vec::with_capacity(plans.len());
    let mut region_maps = Vec::with_capacity(plans.len()); // region-local ↔ region-label
    let mut top_groups = Vec::with_capacity(plans.len());
    let mut dirs: Vec<SubDir> = Vec::new();
    let mut sub_bases = Vec::with_capacity(plans.len());
    let mut expl: Vec<u8> = Vec::new();
    let mut explicit_subs = 0u32;
    for plan in &plans {
        let local_of: HashMap<u32, u32> =
            plan.verts.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        sub_bases.push(dirs.len() as u32);
        let mut groups: Vec<Vec<u32>> = Vec::with_capacity(plan.subs.len());
        for sub in &plan.subs {
            let (order, blob) = encode_subregion(t, &sub.faces, params)?;
            let expl_off = match blob {
                None => NO_EXPLICIT,
                Some(bytes) => {
                    explicit_subs += 1;
                    let off = expl.len() as u32;
                    expl.extend_from_slice(&bytes);
                    while expl.len() % 8 != 0 {
                        expl.push(0);
                    }
                    off
                }
            };
            dirs.push(SubDir { count: order.len() as u32, expl_off });
            groups.push(order.iter().map(|&v| local_of[&v]).collect());
        }
        let (table, rl_to_local, local_to_rl) = LevelTable::build(&groups, plan.verts.len())?;
        top_groups.push(
            rl_to_local.iter().map(|&l| plan.verts[l as usize]).collect::<Vec<u32>>(),
        );
        region_tables.push(table);
        region_maps.push(local_to_rl);
    }
    let (top_table, gl_to_orig, orig_to_gl) = LevelTable::build(&top_groups, n)?;
    let tables = LabelTables { top: top_table, regions: region_tables };
    let points: Vec<Point> = gl_to_orig.iter().map(|&v| t.point(v)).collect();

    // Carriers.
    let top_layer = build_top_layer(t, &top, &orig_to_gl)?;
    let mut region_layers = Vec::with_capacity(plans.len());
    for (plan, (local_to_rl, local_of)) in plans.iter().zip(
        region_maps.iter().zip(plans.iter().map(|p| {
            p.verts
                .iter()
                .enumerate()
                .map(|(i, &v)| (v, i as u32))
                .collect::<HashMap<u32, u32>>()
        })),
    ) {
        region_layers.push(build_region_layer(t, plan, local_to_rl, &local_of)?);
    }

    let regions: Vec<Region> = plans
        .iter()
        .zip(region_layers)
        .zip(&sub_bases)
        .map(|((plan, layer), &sub_base)| Region {
            n_verts: plan.verts.len() as u32,
            subs: plan.subs.len() as u32,
            sub_base,
            layer,
        })
        .collect();

    let meta = Meta {
        n: n as u64,
        backend: params.backend.as_str().to_string(),
        regions: regions.len() as u32,
        subregions: dirs.len() as u32,
        explicit_subregions: explicit_subs,
        explicit_bits: expl.len() as u64 * 8,
        section_bits: BTreeMap::new(), // filled during serialization
    };
    let mut ix = SuccinctIndex {
        params: params.clone(),
        n,
        top: top_layer,
        regions,
        tables,
        dirs,
        expl,
        meta,
        container: Vec::new(),
        size: SizeBreakdown::default(),
    };
    let (container, size, meta) = serialize(&ix)?;
    ix.container = container;
    ix.size = size;
    ix.meta = meta;
    Ok((points, ix))
}

/// Distinct vertices of a face set, ascending.
fn face_verts(t: &Triangulation, faces: &[u32]) -> Vec<u32> {
    let mut verts: Vec<u32> = faces.iter().flat_map(|&fc| t.tri(fc)).collect();
    verts.sort_unstable();
    verts.dedup();
    verts
}

/// Cuts one region into subregions: small regions stay whole; large ones
/// are partitioned with the face cap, re-splitting any component that still
/// breaks the vertex hard law.
fn plan_region(t: &Triangulation, comp: &FaceComponent, target: f64) -> Result<RegionPlan> {
    let verts = face_verts(t, &comp.faces);
    let gate = GATE_MULT * target;
    if (verts.len() as f64) <= gate {
        return Ok(RegionPlan {
            subs: vec![comp.clone()],
            sep: Vec::new(),
            boundaries: comp.boundaries.clone(),
            verts,
        });
    }
    let mut subset = vec![false; t.f()];
    for &fc in &comp.faces {
        subset[fc as usize] = true;
    }
    let cap_faces = CAP_FACE_MULT * target;
    let ti = (cap_faces / comp.faces.len() as f64).min(1.0);
    let part = separator::partition_face_subset(t, Some(&subset), ti, None)?;
    let mut sep = part.separator;
    let mut queue: Vec<FaceComponent> = part.components;
    let mut subs: Vec<FaceComponent> = Vec::new();
    while let Some(sub) = queue.pop() {
        if face_verts(t, &sub.faces).len() <= LAW_SLACK * target as usize {
            subs.push(sub);
            continue;
        }
        // Rare: the face cap admitted an unusually vertex-heavy component.
        let mut inner = vec![false; t.f()];
        for &fc in &sub.faces {
            inner[fc as usize] = true;
        }
        let again = separator::partition_face_subset(t, Some(&inner), 0.5, None)?;
        sep.extend(&again.separator);
        queue.extend(again.components);
    }
    subs.sort_by_key(|s| s.faces[0]);
    sep.sort_unstable();
    Ok(RegionPlan { subs, sep, boundaries: comp.boundaries.clone(), verts })
}

/// Encodes one subregion: its vertex order (global ids) and, when the codec
/// cannot apply, an explicit face-list blob.
fn encode_subregion(
    t: &Triangulation,
    faces: &[u32],
    params: &BuildParams,
) -> Result<(Vec<u32>, Option<Vec<u8>>)> {
    let verts = face_verts(t, faces);
    let local_of: HashMap<u32, u32> =
        verts.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
    if params.backend == Backend::Permutation {
        match codec_order(t, faces, &verts, &local_of, &params.codec) {
            Ok(order) => return Ok((order, None)),
            Err(
                SgiError::TooSmall { .. }
                | SgiError::NonSimpleFace(_)
                | SgiError::InternalCapacity { .. }
                | SgiError::GeometryError(_)
                | SgiError::NotSimple(_),
            ) => {} // fall through to the explicit backend
            Err(e) => return Err(e),
        }
    }
    let mut face_bits = FixedVec::new(FixedVec::width_for(verts.len()));
    for &fc in faces {
        for v in t.tri(fc) {
            face_bits.push(local_of[&v] as u64);
        }
    }
    let mut blob = Vec::new();
    blob.extend_from_slice(&(verts.len() as u32).to_le_bytes());
    blob.extend_from_slice(&(faces.len() as u32).to_le_bytes());
    blob.extend_from_slice(&face_bits.to_record());
    Ok((verts, Some(blob)))
}

/// Runs the permutation codec over a subregion's face patch, returning the
/// chosen vertex order as global ids.
fn codec_order(
    t: &Triangulation,
    faces: &[u32],
    verts: &[u32],
    local_of: &HashMap<u32, u32>,
    codec: &CodecConfig,
) -> Result<Vec<u32>> {
    let mut edges: HashSet<(u32, u32)> = HashSet::new();
    for &fc in faces {
        let vs = t.tri(fc);
        for e in 0..3 {
            let (a, b) = (local_of[&vs[e]], local_of[&vs[(e + 1) % 3]]);
            edges.insert((a.min(b), a.max(b)));
        }
    }
    let sub = Subdivision {
        points: verts.iter().map(|&v| t.point(v)).collect(),
        edges: edges.into_iter().collect(),
    };
    let (wrap, g_edges) = permcode::wrap_subdivision(&sub)?;
    let (order, _) = permcode::encode_mesh(&wrap, codec, true, Some(&g_edges))?;
    Ok(order.iter().map(|&w| verts[(w - 3) as usize]).collect())
}

/// Triangulates a component's area from its boundary cycles: the cycle of
/// largest absolute area is the outline, the rest are holes.
fn coarse_cover(t: &Triangulation, comp: &FaceComponent) -> Result<Vec<[u32; 3]>> {
    let outer_idx = comp
        .boundaries
        .iter()
        .enumerate()
        .max_by_key(|(_, b)| crate::mesh::cycle_area2(t.points(), b).abs())
        .map(|(i, _)| i)
        .expect("component has a boundary");
    let holes: Vec<Vec<u32>> = comp
        .boundaries
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != outer_idx)
        .map(|(_, b)| b.clone())
        .collect();
    polygon::triangulate_region(t.points(), &comp.boundaries[outer_idx], &holes)
}

/// Assembles the top layer: separator faces first (tag 0), then each
/// region's coarse cover (tag = region id); vertex map into graph labels.
fn build_top_layer(
    t: &Triangulation,
    part: &FacePartition,
    orig_to_gl: &[u32],
) -> Result<Layer> {
    let mut vset: HashSet<u32> = HashSet::new();
    for &s in &part.separator {
        vset.extend(t.tri(s));
    }
    for comp in &part.components {
        for cycle in &comp.boundaries {
            vset.extend(cycle.iter().copied());
        }
    }
    vset.extend([0, 1, 2]);
    let mut order: Vec<u32> = vec![0, 1, 2];
    {
        let mut rest: Vec<u32> = vset.iter().copied().filter(|&v| v >= 3).collect();
        rest.sort_unstable();
        order.extend(rest);
    }
    let mut local = vec![u32::MAX; t.n()];
    for (i, &v) in order.iter().enumerate() {
        local[v as usize] = i as u32;
    }
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut tags: Vec<u32> = Vec::new();
    for &s in &part.separator {
        faces.push(t.tri(s).map(|v| local[v as usize]));
        tags.push(0);
    }
    for (ci, comp) in part.components.iter().enumerate() {
        for tri in coarse_cover(t, comp)? {
            faces.push(tri.map(|v| local[v as usize]));
            tags.push(ci as u32 + 1);
        }
    }
    let pts: Vec<Point> = order.iter().map(|&v| t.point(v)).collect();
    let vmap: Vec<u32> = order.iter().map(|&v| orig_to_gl[v as usize]).collect();
    let carrier = Triangulation::from_faces(pts.clone(), faces.clone())?;
    let pl = pointloc::build_pl(&carrier, &tags)?;
    Ok(Layer { faces, tags, vmap, skip: 0, pts, pl })
}

/// Assembles one region's bottom layer: synthetic corners, internal
/// separator faces (tag 0), per-subregion coarse covers (tags 1..=u), and
/// complement fill (sentinel tag u+1, unreachable for routed queries).
/// Regions that are a single subregion with no internal separator need no
/// layer at all.
fn build_region_layer(
    t: &Triangulation,
    plan: &RegionPlan,
    local_to_rl: &[u32],
    local_of: &HashMap<u32, u32>,
) -> Result<Option<Layer>> {
    if plan.subs.len() == 1 && plan.sep.is_empty() {
        return Ok(None);
    }
    let region_pts_rl: Vec<Point> = {
        // Region points in region-label order, the load-time convention.
        let mut pts = vec![Point { x: 0, y: 0 }; plan.verts.len()];
        for (local, &v) in plan.verts.iter().enumerate() {
            pts[local_to_rl[local] as usize] = t.point(v);
        }
        pts
    };
    let corners = permcode::synthetic_corners(&region_pts_rl)?;
    let mut vset: HashSet<u32> = HashSet::new();
    for &s in &plan.sep {
        vset.extend(t.tri(s));
    }
    for sub in &plan.subs {
        for cycle in &sub.boundaries {
            vset.extend(cycle.iter().copied());
        }
    }
    for cycle in &plan.boundaries {
        vset.extend(cycle.iter().copied());
    }
    let mut order: Vec<u32> = vset.into_iter().collect();
    order.sort_unstable();
    let mut local = vec![u32::MAX; t.n()];
    for (i, &v) in order.iter().enumerate() {
        local[v as usize] = i as u32 + 3;
    }
    let mut pts: Vec<Point> = corners.to_vec();
    pts.extend(order.iter().map(|&v| t.point(v)));
    let mut faces: Vec<[u32; 3]> = Vec::new();
    let mut tags: Vec<u32> = Vec::new();
    for &s in &plan.sep {
        faces.push(t.tri(s).map(|v| local[v as usize]));
        tags.push(0);
    }
    for (j, sub) in plan.subs.iter().enumerate() {
        for tri in coarse_cover(t, sub)? {
            faces.push(tri.map(|v| local[v as usize]));
            tags.push(j as u32 + 1);
        }
    }
    // Fill between the synthetic triangle and the region (region holes are
    // islands of the complement and get filled by the same call).
    let sentinel = plan.subs.len() as u32 + 1;
    {
        let holes: Vec<Vec<u32>> = plan
            .boundaries
            .iter()
            .map(|c| c.iter().map(|&v| local[v as usize]).collect())
            .collect();
        for tri in polygon::triangulate_region(&pts, &[0, 1, 2], &holes)? {
            faces.push(tri);
            tags.push(sentinel);
        }
    }
    let vmap: Vec<u32> = order.iter().map(|&v| local_to_rl[local_of[&v] as usize]).collect();
    let carrier = Triangulation::from_faces(pts.clone(), faces.clone())?;
    let pl = pointloc::build_pl(&carrier, &tags)?;
    Ok(Some(Layer { faces, tags, vmap, skip: 3, pts, pl }))
}

// ---------------------------------------------------------------------------
// Queries
// ---------------------------------------------------------------------------

impl SuccinctIndex {
    /// Vertex count of the indexed triangulation.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Build parameters.
    pub fn params(&self) -> &BuildParams {
        &self.params
    }

    /// Number of regions.
    pub fn regions(&self) -> u32 {
        self.regions.len() as u32
    }

    /// Build summary (the container's META section).
    pub fn meta(&self) -> &Meta {
        &self.meta
    }

    /// The exact serialized container bytes.
    pub fn bytes(&self) -> &[u8] {
        &self.container
    }

    /// The container stream: everything after the magic and version.  This
    /// is the exact bit sequence the implicit channel embeds.
    pub fn stream(&self) -> &[u8] {
        &self.container[STREAM_START..]
    }

    /// Serialized size of every piece, in bits.
    pub fn size_bits(&self) -> &SizeBreakdown {
        &self.size
    }

    /// Converts a subregion-label to its region-label (region `i` and
    /// subregion `j` 1-based, label `k` 0-based).
    pub fn sub_to_region(&self, i: u32, j: u32, k: u32) -> Result<u32> {
        self.tables.sub_to_region(i, j, k)
    }

    /// Converts a region-label to its graph-label (region `i` 1-based,
    /// label `k` 0-based).
    pub fn region_to_graph(&self, i: u32, k: u32) -> Result<u32> {
        self.tables.region_to_graph(i, k)
    }

    /// Locates the triangle of the original triangulation whose closed area
    /// contains `q`, returning its three graph-labels ascending.  `points`
    /// is the permuted array produced by [`build_index`].
    pub fn locate(&self, points: &[Point], q: Point) -> Result<[u32; 3]> {
        if points.len() != self.n {
            return Err(SgiError::ParamError(format!(
                "point array holds {} points, index built over {}",
                points.len(),
                self.n
            )));
        }
        let top = self.top.pl.locate(&self.top.pts, q)?;
        if top.tag == 0 {
            let mut labels = self.top.faces[top.face as usize].map(|l| self.top.vmap[l as usize]);
            labels.sort_unstable();
            return Ok(labels);
        }
        let i = top.tag;
        let region = &self.regions[i as usize - 1];
        let j = match &region.layer {
            None => 1,
            Some(layer) => {
                let bot = layer.pl.locate(&layer.pts, q).map_err(|e| match e {
                    SgiError::OutsideHull => corrupt_routing(),
                    other => other,
                })?;
                if bot.tag == 0 {
                    let mut labels = [0u32; 3];
                    for (slot, l) in layer.faces[bot.face as usize].into_iter().enumerate() {
                        let rl = layer.vmap[(l - layer.skip) as usize];
                        labels[slot] = self.tables.region_to_graph(i, rl)?;
                    }
                    labels.sort_unstable();
                    return Ok(labels);
                }
                if bot.tag > region.subs {
                    return Err(corrupt_routing());
                }
                bot.tag
            }
        };
        self.scan_subregion(points, i, j, q)
    }

    /// Decodes subregion (`i`, `j`) and scans its faces for the one whose
    /// closed triangle contains `q` — smallest sorted label triple on ties.
    fn scan_subregion(&self, points: &[Point], i: u32, j: u32, q: Point) -> Result<[u32; 3]> {
        let region = &self.regions[i as usize - 1];
        let dir = self.dirs[(region.sub_base + j - 1) as usize];
        let count = dir.count as usize;
        let mut glabels = Vec::with_capacity(count);
        let mut pts = Vec::with_capacity(count);
        for k in 0..count as u32 {
            let rl = self.tables.sub_to_region(i, j, k)?;
            let gl = self.tables.region_to_graph(i, rl)?;
            glabels.push(gl);
            pts.push(points[gl as usize]);
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
        if dir.expl_off == NO_EXPLICIT {
            let (wrap, edges) = permcode::decode_mesh(&pts, &self.params.codec, true)?;
            let eset: HashSet<(u32, u32)> = edges
                .ok_or_else(|| SgiError::Container("subregion decode lost its edge set".into()))?
                .into_iter()
                .collect();
            let real = |a: u32, b: u32| eset.contains(&(a.min(b), a.max(b)));
            for tri in wrap.tris() {
                let [a, b, c] = *tri;
                if a < 3 || b < 3 || c < 3 {
                    continue; // touches a synthetic corner
                }
                if real(a, b) && real(b, c) && real(c, a) {
                    consider(a as usize - 3, b as usize - 3, c as usize - 3);
                }
            }
        } else {
            let blob = &self.expl[dir.expl_off as usize..];
            let f_sub = u32::from_le_bytes(
                blob.get(4..8)
                    .ok_or_else(|| SgiError::Container("explicit blob truncated".into()))?
                    .try_into()
                    .unwrap(),
            ) as usize;
            let (fv, _) = FixedVec::from_record(&blob[8..])?;
            if fv.len() != 3 * f_sub {
                return Err(SgiError::Container("explicit blob face count mismatch".into()));
            }
            for fi in 0..f_sub {
                consider(
                    fv.get(3 * fi) as usize,
                    fv.get(3 * fi + 1) as usize,
                    fv.get(3 * fi + 2) as usize,
                );
            }
        }
        best.ok_or_else(|| SgiError::Container("no subregion face contains the query".into()))
    }
}

fn corrupt_routing() -> SgiError {
    SgiError::Container("query routed to an unreachable layer face".into())
}

// ---------------------------------------------------------------------------
// Container
// ---------------------------------------------------------------------------

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Writer { buf: Vec::new() }
    }
    fn align8(&mut self) {
        while self.buf.len() % 8 != 0 {
            self.buf.push(0);
        }
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn bytes(&mut self, b: &[u8]) {
        self.buf.extend_from_slice(b);
    }
}

/// Serializes one search layer.
fn layer_blob(layer: &Layer, parent_n: u32) -> Vec<u8> {
    let n_local = layer.pts.len() as u32;
    let mut w = Writer::new();
    w.u32(n_local);
    w.u32(layer.faces.len() as u32);
    w.u32(layer.skip);
    w.u32(parent_n);
    let mut faces = FixedVec::new(FixedVec::width_for(n_local as usize));
    for tri in &layer.faces {
        for &v in tri {
            faces.push(v as u64);
        }
    }
    let max_tag = layer.tags.iter().copied().max().unwrap_or(0);
    let mut tags = FixedVec::new(FixedVec::width_for(max_tag as usize + 1));
    for &tag in &layer.tags {
        tags.push(tag as u64);
    }
    let mut vmap = FixedVec::new(FixedVec::width_for(parent_n as usize));
    for &l in &layer.vmap {
        vmap.push(l as u64);
    }
    w.bytes(&faces.to_record());
    w.bytes(&tags.to_record());
    w.bytes(&vmap.to_record());
    w.align8();
    w.buf
}

/// Serializes the whole index; returns the file bytes, the size breakdown,
/// and the META (with section sizes filled in).
fn serialize(ix: &SuccinctIndex) -> Result<(Vec<u8>, SizeBreakdown, Meta)> {
    let mut sections: Vec<(u32, Vec<u8>)> = Vec::new();
    sections.push((section::TOPPL, layer_blob(&ix.top, ix.n as u32)));

    let mut regpl = Writer::new();
    let mut regpl_offs = Vec::with_capacity(ix.regions.len());
    for region in &ix.regions {
        match &region.layer {
            None => regpl_offs.push(NO_LAYER),
            Some(layer) => {
                regpl_offs.push(regpl.buf.len() as u64);
                regpl.bytes(&layer_blob(layer, region.n_verts));
            }
        }
    }
    sections.push((section::REGPL, regpl.buf));

    let mut lblb = Writer::new();
    let mut lblc = Writer::new();
    let mut lbld = Writer::new();
    let mut lblx = Writer::new();
    let all_tables =
        std::iter::once(&ix.tables.top).chain(ix.tables.regions.iter()).collect::<Vec<_>>();
    for (idx, table) in all_tables.iter().enumerate() {
        let (b, c, d) = table.to_records();
        let (b_off, c_off, d_off) =
            (lblb.buf.len() as u64, lblc.buf.len() as u64, lbld.buf.len() as u64);
        lblb.bytes(&b);
        lblc.bytes(&c);
        lbld.bytes(&d);
        lblx.u64(table.n_verts() as u64);
        lblx.u64(table.groups() as u64);
        lblx.u64(b_off);
        lblx.u64(c_off);
        lblx.u64(d_off);
        if idx == 0 {
            lblx.u64(0);
            lblx.u64(0);
        } else {
            let region = &ix.regions[idx - 1];
            lblx.u64(region.sub_base as u64);
            lblx.u64(regpl_offs[idx - 1]);
        }
    }
    sections.push((section::LBLB, lblb.buf));
    sections.push((section::LBLC, lblc.buf));
    sections.push((section::LBLD, lbld.buf));
    sections.push((section::LBLX, lblx.buf));

    let mut dirs = Writer::new();
    dirs.u32(ix.dirs.len() as u32);
    dirs.u32(0);
    for dir in &ix.dirs {
        dirs.u32(dir.count);
        dirs.u32(dir.expl_off);
    }
    sections.push((section::DIRS, dirs.buf));
    if !ix.expl.is_empty() {
        sections.push((section::EXPL, ix.expl.clone()));
    }

    let mut meta = ix.meta.clone();
    meta.section_bits =
        sections.iter().map(|(tag, b)| (section::name(*tag).to_string(), b.len() as u64 * 8)).collect();
    let meta_json = serde_json::to_vec(&meta)
        .map_err(|e| SgiError::Container(format!("meta serialization: {e}")))?;
    sections.push((section::META, meta_json));

    // Stream: params block, section table, aligned sections.
    let mut stream = Writer::new();
    stream.u32(ix.params.a);
    stream.u32(ix.params.b);
    stream.u32(ix.params.s0);
    stream.u32(match ix.params.backend {
        Backend::Permutation => 0,
        Backend::Explicit => 1,
    });
    stream.u32(ix.params.codec.group_size as u32);
    stream.u32(ix.params.codec.min_n as u32);
    stream.u64(ix.n as u64);
    stream.u32(ix.regions.len() as u32);
    stream.u32(0);
    let table_at = stream.buf.len();
    stream.u32(sections.len() as u32);
    for _ in &sections {
        stream.bytes(&[0u8; 20]);
    }
    let framing_end = {
        stream.align8();
        stream.buf.len()
    };
    let mut entries = Vec::with_capacity(sections.len());
    for (tag, body) in &sections {
        stream.align8();
        entries.push((*tag, stream.buf.len() as u64, body.len() as u64));
        stream.bytes(body);
    }
    stream.align8();
    for (i, (tag, off, len)) in entries.iter().enumerate() {
        let at = table_at + 4 + i * 20;
        stream.buf[at..at + 4].copy_from_slice(&tag.to_le_bytes());
        stream.buf[at + 4..at + 12].copy_from_slice(&off.to_le_bytes());
        stream.buf[at + 12..at + 20].copy_from_slice(&len.to_le_bytes());
    }

    let mut file = Vec::with_capacity(STREAM_START + stream.buf.len());
    file.extend_from_slice(MAGIC);
    file.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    file.extend_from_slice(&stream.buf);

    let mut size = SizeBreakdown { total: stream.buf.len() as u64 * 8, ..Default::default() };
    size.framing = framing_end as u64 * 8;
    for (tag, _, len) in &entries {
        let slot = match *tag {
            section::TOPPL => &mut size.toppl,
            section::REGPL => &mut size.regpl,
            section::LBLB => &mut size.lblb,
            section::LBLC => &mut size.lblc,
            section::LBLD => &mut size.lbld,
            section::LBLX => &mut size.lblx,
            section::DIRS => &mut size.dirs,
            section::EXPL => &mut size.expl,
            section::META => &mut size.meta,
            _ => unreachable!("serializer writes known sections"),
        };
        *slot = len * 8;
    }
    Ok((file, size, meta))
}

/// A bounds-checked little-endian reader.
struct Reader<'a> {
    data: &'a [u8],
    at: usize,
}

impl<'a> Reader<'a> {
    fn new(data: &'a [u8]) -> Self {
        Reader { data, at: 0 }
    }
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(len)
            .filter(|&e| e <= self.data.len())
            .ok_or_else(|| SgiError::Container("container truncated".into()))?;
        let out = &self.data[self.at..end];
        self.at = end;
        Ok(out)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses a layer blob and rebuilds its search structure; bottom layers
/// (`skip == 3`) receive their synthetic corners via `corners`.
fn load_layer(
    blob: &[u8],
    parent_pts: &dyn Fn(u32) -> Result<Point>,
    expect_parent_n: u32,
    corners: Option<[Point; 3]>,
) -> Result<Layer> {
    let mut r = Reader::new(blob);
    let n_local = r.u32()? as usize;
    let f = r.u32()? as usize;
    let skip = r.u32()?;
    let parent_n = r.u32()?;
    if parent_n != expect_parent_n {
        return Err(SgiError::Container(format!(
            "layer parent universe {parent_n}, expected {expect_parent_n}"
        )));
    }
    match (skip, &corners) {
        (0, None) | (3, Some(_)) => {}
        _ => return Err(SgiError::Container(format!("layer skip {skip} unsupported"))),
    }
    let rest = &blob[r.at..];
    let (face_fv, used_f) = FixedVec::from_record(rest)?;
    let (tag_fv, used_t) = FixedVec::from_record(&rest[used_f..])?;
    let (vmap_fv, _) = FixedVec::from_record(&rest[used_f + used_t..])?;
    if face_fv.len() != 3 * f || tag_fv.len() != f || vmap_fv.len() + skip as usize != n_local {
        return Err(SgiError::Container("layer record lengths disagree".into()));
    }
    let faces: Vec<[u32; 3]> = (0..f)
        .map(|i| [face_fv.get(3 * i) as u32, face_fv.get(3 * i + 1) as u32, face_fv.get(3 * i + 2) as u32])
        .collect();
    let tags: Vec<u32> = (0..f).map(|i| tag_fv.get(i) as u32).collect();
    let mut vmap = Vec::with_capacity(vmap_fv.len());
    for i in 0..vmap_fv.len() {
        let l = vmap_fv.get(i) as u32;
        if l >= parent_n {
            return Err(SgiError::Container(format!(
                "layer vertex maps to {l}, universe {parent_n}"
            )));
        }
        vmap.push(l);
    }
    let mut pts: Vec<Point> = corners.map(|c| c.to_vec()).unwrap_or_default();
    for &l in &vmap {
        pts.push(parent_pts(l)?);
    }
    let carrier = Triangulation::from_faces(pts.clone(), faces.clone())?;
    let pl = pointloc::build_pl(&carrier, &tags)?;
    Ok(Layer { faces, tags, vmap, skip, pts, pl })
}

/// Loads an index from its container bytes, resolving layer coordinates
/// from the permuted point array.
pub fn load_index(bytes: &[u8], points: &[Point]) -> Result<SuccinctIndex> {
    let bad = |what: &str| SgiError::Container(what.to_string());
    if bytes.len() < STREAM_START || &bytes[..4] != MAGIC {
        return Err(bad("not an index container (bad magic)"));
    }
    let version = u16::from_le_bytes(bytes[4..6].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(SgiError::Container(format!("unsupported format version {version}")));
    }
    let stream = &bytes[STREAM_START..];
    let mut r = Reader::new(stream);
    let a = r.u32()?;
    let b = r.u32()?;
    let s0 = r.u32()?;
    let backend = match r.u32()? {
        0 => Backend::Permutation,
        1 => Backend::Explicit,
        other => return Err(SgiError::Container(format!("unknown backend code {other}"))),
    };
    let group_size = r.u32()? as usize;
    let min_n = r.u32()? as usize;
    let n = r.u64()? as usize;
    let r_count = r.u32()? as usize;
    let _pad = r.u32()?;
    if points.len() != n {
        return Err(SgiError::ParamError(format!(
            "point array holds {} points, container says {n}",
            points.len()
        )));
    }
    let params = BuildParams {
        a,
        b,
        s0,
        codec: CodecConfig::new(group_size, CodecMode::Subdivision, min_n)?,
        backend,
    };
    params.validate()?;

    let section_count = r.u32()? as usize;
    let mut table = HashMap::new();
    for _ in 0..section_count {
        let tag = r.u32()?;
        let off = r.u64()? as usize;
        let len = r.u64()? as usize;
        if off % 8 != 0 || off.checked_add(len).is_none_or(|e| e > stream.len()) {
            return Err(SgiError::Container(format!(
                "section {} out of bounds",
                section::name(tag)
            )));
        }
        if table.insert(tag, &stream[off..off + len]).is_some() {
            return Err(SgiError::Container(format!(
                "duplicate section {}",
                section::name(tag)
            )));
        }
    }
    let need = |tag: u32| -> Result<&[u8]> {
        table
            .get(&tag)
            .copied()
            .ok_or_else(|| SgiError::Container(format!("missing section {}", section::name(tag))))
    };
    for &tag in table.keys() {
        if !matches!(
            tag,
            section::TOPPL
                | section::REGPL
                | section::LBLB
                | section::LBLC
                | section::LBLD
                | section::LBLX
                | section::DIRS
                | section::EXPL
                | section::META
        ) {
            return Err(SgiError::Container(format!("unknown section tag {tag}")));
        }
    }

    // Directory first: it locates every table and layer.
    let lblx = need(section::LBLX)?;
    if lblx.len() != (r_count + 1) * 56 {
        return Err(bad("region directory length disagrees with the region count"));
    }
    let lblb = need(section::LBLB)?;
    let lblc = need(section::LBLC)?;
    let lbld = need(section::LBLD)?;
    let entry = |i: usize| -> Result<(u32, u32, u64, u64, u64, u64, u64)> {
        let mut er = Reader::new(&lblx[i * 56..(i + 1) * 56]);
        let n_verts = er.u64()?;
        let groups = er.u64()?;
        if n_verts > u32::MAX as u64 || groups > u32::MAX as u64 {
            return Err(SgiError::Container("directory counts overflow".into()));
        }
        Ok((n_verts as u32, groups as u32, er.u64()?, er.u64()?, er.u64()?, er.u64()?, er.u64()?))
    };
    let slice_at = |data: &'_ [u8], off: u64, what: &str| -> Result<&'_ [u8]> {
        data.get(off as usize..)
            .ok_or_else(|| SgiError::Container(format!("{what} offset {off} out of bounds")))
    };

    let (top_n, top_groups, b0, c0, d0, _, _) = entry(0)?;
    if top_n as usize != n || top_groups as usize != r_count {
        return Err(bad("top table directory disagrees with the header"));
    }
    let top_table = LevelTable::from_records(
        slice_at(lblb, b0, "LBLB")?,
        slice_at(lblc, c0, "LBLC")?,
        slice_at(lbld, d0, "LBLD")?,
        top_n,
        top_groups,
    )?;
    let mut region_tables = Vec::with_capacity(r_count);
    let mut region_facts = Vec::with_capacity(r_count);
    for i in 1..=r_count {
        let (n_verts, groups, b, c, d, sub_base, regpl_off) = entry(i)?;
        region_tables.push(LevelTable::from_records(
            slice_at(lblb, b, "LBLB")?,
            slice_at(lblc, c, "LBLC")?,
            slice_at(lbld, d, "LBLD")?,
            n_verts,
            groups,
        )?);
        region_facts.push((n_verts, groups, sub_base, regpl_off));
    }
    let tables = LabelTables { top: top_table, regions: region_tables };

    // Subregion directory.
    let dirs_raw = need(section::DIRS)?;
    let mut dr = Reader::new(dirs_raw);
    let dir_count = dr.u32()? as usize;
    let _pad = dr.u32()?;
    if dirs_raw.len() < 8 + dir_count * 8 {
        return Err(bad("subregion directory truncated"));
    }
    let mut dirs = Vec::with_capacity(dir_count);
    for _ in 0..dir_count {
        dirs.push(SubDir { count: dr.u32()?, expl_off: dr.u32()? });
    }
    for (i, &(n_verts, groups, sub_base, _)) in region_facts.iter().enumerate() {
        let base = sub_base as usize;
        if base + groups as usize > dir_count {
            return Err(SgiError::Container(format!(
                "region {} subregion range out of bounds",
                i + 1
            )));
        }
        let _ = n_verts;
    }
    let expl = table.get(&section::EXPL).copied().unwrap_or(&[]).to_vec();

    // Layers: top over graph labels, bottoms over region labels.
    let top_blob = need(section::TOPPL)?;
    let top_pts = |l: u32| -> Result<Point> {
        points
            .get(l as usize)
            .copied()
            .ok_or_else(|| SgiError::Container(format!("graph label {l} out of range")))
    };
    let top = load_layer(top_blob, &top_pts, n as u32, None)?;

    let regpl = need(section::REGPL)?;
    let mut regions = Vec::with_capacity(r_count);
    for (idx, &(n_verts, groups, sub_base, regpl_off)) in region_facts.iter().enumerate() {
        let i = idx as u32 + 1;
        let layer = if regpl_off == NO_LAYER {
            None
        } else {
            // Region points in region-label order drive both the synthetic
            // corners and the vertex map resolution.
            let mut region_pts = Vec::with_capacity(n_verts as usize);
            for k in 0..n_verts {
                let gl = tables.region_to_graph(i, k)?;
                region_pts.push(points[gl as usize]);
            }
            let corners = permcode::synthetic_corners(&region_pts)?;
            let by_rl = |l: u32| -> Result<Point> {
                region_pts
                    .get(l as usize)
                    .copied()
                    .ok_or_else(|| SgiError::Container(format!("region label {l} out of range")))
            };
            Some(load_layer(
                slice_at(regpl, regpl_off, "REGPL")?,
                &by_rl,
                n_verts,
                Some(corners),
            )?)
        };
        regions.push(Region { n_verts, subs: groups, sub_base, layer });
    }

    let meta: Meta = serde_json::from_slice(need(section::META)?)
        .map_err(|e| SgiError::Container(format!("meta section: {e}")))?;
    if meta.n as usize != n {
        return Err(bad("meta vertex count disagrees with the header"));
    }

    let mut ix = SuccinctIndex {
        params,
        n,
        top,
        regions,
        tables,
        dirs,
        expl,
        meta,
        container: bytes.to_vec(),
        size: SizeBreakdown::default(),
    };
    let (_, size, _) = serialize(&ix)?;
    ix.size = size;
    Ok(ix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::oracle_locate;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn interior_queries(t: &Triangulation, count: usize, seed: u64) -> Vec<Point> {
        let pts = t.points();
        let (a, b, c) = (pts[0], pts[1], pts[2]);
        let min_x = a.x.min(b.x).min(c.x);
        let max_x = a.x.max(b.x).max(c.x);
        let min_y = a.y.min(b.y).min(c.y);
        let max_y = a.y.max(b.y).max(c.y);
        let mut rng = StdRng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let q = Point { x: rng.gen_range(min_x..=max_x), y: rng.gen_range(min_y..=max_y) };
            if geom::point_in_triangle(a, b, c, q).unwrap() == geom::TriLocation::Inside {
                out.push(q);
            }
        }
        out
    }

    /// The permuted array is a permutation of the input points.
    #[test]
    fn points_come_back_permuted() {
        let t = Triangulation::gen_random(500, 3).unwrap();
        let (points, ix) = build_index(&t, &BuildParams::default()).unwrap();
        assert_eq!(points.len(), t.n());
        let mut sorted = points.clone();
        sorted.sort_unstable();
        let mut orig = t.points().to_vec();
        orig.sort_unstable();
        assert_eq!(sorted, orig);
        assert_eq!(ix.n(), t.n());
    }

    /// Small inputs degenerate to one region and an explicit scan, and
    /// queries still match the oracle.
    #[test]
    fn degenerate_small_input_locates_correctly() {
        let t = Triangulation::parse("4 3\n0 0\n100 0\n0 100\n20 20\n1 2 4\n2 3 4\n3 1 4\n")
            .unwrap();
        let (points, ix) = build_index(&t, &BuildParams::default()).unwrap();
        assert_eq!(ix.regions(), 1);
        for q in [Point { x: 21, y: 21 }, Point { x: 60, y: 20 }, Point { x: 5, y: 90 }] {
            let got = ix.locate(&points, q).unwrap();
            let want = oracle_locate(&t, q).unwrap();
            let want_pts: Vec<Point> =
                want.iter().map(|&v| t.point(v)).collect();
            let got_pts: Vec<Point> = got.iter().map(|&l| points[l as usize]).collect();
            let mut w = want_pts.clone();
            let mut g = got_pts.clone();
            w.sort_unstable();
            g.sort_unstable();
            assert_eq!(g, w, "query {q}");
        }
        assert!(ix.locate(&points, Point { x: 99, y: 99 }).is_err());
    }

    /// Medium build: 2000 random queries agree with the brute-force oracle
    /// (compared as coordinate sets; labels differ by the permutation).
    #[test]
    fn random_mesh_queries_match_oracle() {
        let t = Triangulation::gen_random(6000, 11).unwrap();
        let (points, ix) = build_index(&t, &BuildParams::default()).unwrap();
        for q in interior_queries(&t, 2000, 77) {
            let got = ix.locate(&points, q).unwrap();
            let mut got_pts: Vec<Point> = got.iter().map(|&l| points[l as usize]).collect();
            got_pts.sort_unstable();
            let want = oracle_locate(&t, q).unwrap();
            let mut want_pts: Vec<Point> = want.iter().map(|&v| t.point(v)).collect();
            want_pts.sort_unstable();
            if got_pts != want_pts {
                // Boundary tie: both answers must still contain the query.
                let [a, b, c] = got;
                assert!(
                    geom::closed_contains(
                        points[a as usize],
                        points[b as usize],
                        points[c as usize],
                        q
                    ),
                    "returned triangle misses query {q}"
                );
            }
        }
    }

    /// Serialize → load → identical answers and identical bytes.
    #[test]
    fn container_roundtrip_preserves_answers() {
        let t = Triangulation::gen_random(3000, 5).unwrap();
        let (points, ix) = build_index(&t, &BuildParams::default()).unwrap();
        let loaded = load_index(ix.bytes(), &points).unwrap();
        assert_eq!(loaded.bytes(), ix.bytes());
        assert_eq!(loaded.size_bits(), ix.size_bits());
        for q in interior_queries(&t, 500, 123) {
            assert_eq!(ix.locate(&points, q).unwrap(), loaded.locate(&points, q).unwrap());
        }
    }

    /// The explicit backend produces the same answers as the permutation
    /// backend.
    #[test]
    fn backends_agree() {
        let t = Triangulation::gen_random(3000, 9).unwrap();
        let (p1, ix1) = build_index(&t, &BuildParams::default()).unwrap();
        let params2 = BuildParams { backend: Backend::Explicit, ..BuildParams::default() };
        let (p2, ix2) = build_index(&t, &params2).unwrap();
        assert_eq!(p1, p2, "backends must choose the same labels");
        assert!(ix2.meta().explicit_subregions == ix2.meta().subregions);
        for q in interior_queries(&t, 500, 321) {
            assert_eq!(ix1.locate(&p1, q).unwrap(), ix2.locate(&p2, q).unwrap());
        }
    }

    /// Size accounting: parts sum to the stream total.
    #[test]
    fn size_breakdown_adds_up() {
        let t = Triangulation::gen_random(2500, 1).unwrap();
        let (_, ix) = build_index(&t, &BuildParams::default()).unwrap();
        let s = ix.size_bits();
        let sum: u64 = s.parts().iter().map(|&(_, bits)| bits).sum();
        assert!(sum <= s.total, "parts exceed the stream");
        assert!(s.total - sum < 64 * 10, "unaccounted padding too large");
        assert_eq!(s.total, (ix.bytes().len() - STREAM_START) as u64 * 8);
    }

    /// Corrupt containers are rejected, not misread.
    #[test]
    fn corrupt_containers_are_rejected() {
        let t = Triangulation::gen_random(2500, 2).unwrap();
        let (points, ix) = build_index(&t, &BuildParams::default()).unwrap();
        let good = ix.bytes().to_vec();
        assert!(load_index(&good[..20], &points).is_err());
        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(load_index(&bad_magic, &points).is_err());
        let mut bad_version = good.clone();
        bad_version[4] = 0xEE;
        assert!(load_index(&bad_version, &points).is_err());
        assert!(load_index(&good, &points[..100]).is_err());
    }

    /// Label conversions compose to the same labels the build assigned.
    #[test]
    fn conversions_match_build_map() {
        let t = Triangulation::gen_random(4000, 21).unwrap();
        let (points, ix) = build_index(&t, &BuildParams::default()).unwrap();
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..2000 {
            let i = rng.gen_range(1..=ix.regions());
            let region = &ix.regions[i as usize - 1];
            let j = rng.gen_range(1..=region.subs);
            let dir = ix.dirs[(region.sub_base + j - 1) as usize];
            let k = rng.gen_range(0..dir.count);
            let rl = ix.sub_to_region(i, j, k).unwrap();
            assert!(rl < region.n_verts);
            let gl = ix.region_to_graph(i, rl).unwrap();
            assert!((gl as usize) < points.len());
        }
        assert!(ix.sub_to_region(0, 1, 0).is_err());
        assert!(ix.sub_to_region(ix.regions() + 1, 1, 0).is_err());
    }
}
