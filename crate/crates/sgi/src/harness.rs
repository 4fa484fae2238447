//! Ground-truth oracle, query workloads, benchmark driver, and the
//! command-line interface.

use crate::error::{Result, SgiError};
use crate::geom::{self, Point};
use crate::implicit::ImplicitArray;
use crate::index::{self, Backend, BuildParams, SuccinctIndex};
use crate::mesh::Triangulation;
use crate::permcode::{self, CodecConfig};
use clap::{Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

// ---------------------------------------------------------------------------
// Oracle
// ---------------------------------------------------------------------------

/// Brute force: the smallest-id face whose closed triangle contains `q`.
pub fn oracle_locate(t: &Triangulation, q: Point) -> Result<u32> {
    for (id, tri) in t.tris().iter().enumerate() {
        let [a, b, c] = tri.map(|v| t.point(v));
        if geom::closed_contains(a, b, c, q) {
            return Ok(id as u32);
        }
    }
    Err(SgiError::OutsideHull)
}

/// Bucketed oracle: identical answers to [`oracle_locate`] (smallest id
/// wins, buckets keep ids ascending) at near-constant query cost.
pub struct FaceGrid {
    side: usize,
    min: Point,
    cell_w: i64,
    cell_h: i64,
    buckets: Vec<Vec<u32>>,
}

impl FaceGrid {
    pub fn build(t: &Triangulation) -> Self {
        let pts = t.points();
        let min = Point {
            x: pts.iter().map(|p| p.x).min().unwrap(),
            y: pts.iter().map(|p| p.y).min().unwrap(),
        };
        let max = Point {
            x: pts.iter().map(|p| p.x).max().unwrap(),
            y: pts.iter().map(|p| p.y).max().unwrap(),
        };
        let side = (t.f() as f64).sqrt().ceil() as usize;
        let cell_w = ((max.x - min.x) / side as i64 + 1).max(1);
        let cell_h = ((max.y - min.y) / side as i64 + 1).max(1);
        let mut grid = FaceGrid { side, min, cell_w, cell_h, buckets: vec![Vec::new(); side * side] };
        for (id, tri) in t.tris().iter().enumerate() {
            let [a, b, c] = tri.map(|v| t.point(v));
            let (cx0, cy0) = grid.cell_of(Point { x: a.x.min(b.x).min(c.x), y: a.y.min(b.y).min(c.y) });
            let (cx1, cy1) = grid.cell_of(Point { x: a.x.max(b.x).max(c.x), y: a.y.max(b.y).max(c.y) });
            for cy in cy0..=cy1 {
                for cx in cx0..=cx1 {
                    grid.buckets[cy * side + cx].push(id as u32);
                }
            }
        }
        grid
    }

    fn cell_of(&self, p: Point) -> (usize, usize) {
        let cx = ((p.x - self.min.x) / self.cell_w).clamp(0, self.side as i64 - 1) as usize;
        let cy = ((p.y - self.min.y) / self.cell_h).clamp(0, self.side as i64 - 1) as usize;
        (cx, cy)
    }

    /// Smallest-id face closed-containing `q`.
    pub fn locate(&self, t: &Triangulation, q: Point) -> Result<u32> {
        let (cx, cy) = self.cell_of(q);
        for &id in &self.buckets[cy * self.side + cx] {
            let [a, b, c] = t.tri(id).map(|v| t.point(v));
            if geom::closed_contains(a, b, c, q) {
                return Ok(id);
            }
        }
        Err(SgiError::OutsideHull)
    }
}

/// `count` points uniform over the interior of the outer triangle, by
/// rejection sampling from its bounding box.
pub fn interior_queries(t: &Triangulation, count: usize, seed: u64) -> Vec<Point> {
    let pts = t.points();
    let (a, b, c) = (pts[0], pts[1], pts[2]);
    let (min_x, max_x) = (a.x.min(b.x).min(c.x), a.x.max(b.x).max(c.x));
    let (min_y, max_y) = (a.y.min(b.y).min(c.y), a.y.max(b.y).max(c.y));
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let q = Point { x: rng.gen_range(min_x..=max_x), y: rng.gen_range(min_y..=max_y) };
        if geom::point_in_triangle(a, b, c, q).expect("outer corners are a proper triangle")
            == geom::TriLocation::Inside
        {
            out.push(q);
        }
    }
    out
}

/// Checks one located answer against the oracle: label triples are
/// compared as coordinate sets (labels live in the permuted array), and a
/// boundary tie is accepted when the returned triangle still
/// closed-contains the query.
pub fn answer_matches(
    t: &Triangulation,
    permuted: &[Point],
    labels: [u32; 3],
    oracle_face: u32,
    q: Point,
) -> bool {
    let mut got: Vec<Point> = labels.iter().map(|&l| permuted[l as usize]).collect();
    let mut want: Vec<Point> = t.tri(oracle_face).map(|v| t.point(v)).to_vec();
    got.sort_unstable();
    want.sort_unstable();
    if got == want {
        return true;
    }
    geom::closed_contains(got[0], got[1], got[2], q)
}

// ---------------------------------------------------------------------------
// Codec roundtrip check
// ---------------------------------------------------------------------------

/// Encodes `t` through the permutation codec and decodes it back,
/// verifying exact face-set and coordinate equality up to the chosen
/// relabeling.  Returns the codec's vertex order.
pub fn codec_roundtrip(t: &Triangulation, cfg: &CodecConfig) -> Result<Vec<u32>> {
    let (order, _) = permcode::encode_mesh(t, cfg, false, None)?;
    let stored: Vec<Point> = order.iter().map(|&v| t.point(v)).collect();
    let (back, edges) = permcode::decode_mesh(&stored, cfg, false)?;
    if edges.is_some() {
        return Err(SgiError::GeometryError("triangulation decode produced edge flags".into()));
    }
    if back.points() != stored.as_slice() {
        return Err(SgiError::GeometryError("decode changed coordinates".into()));
    }
    let mut pos = vec![0u32; t.n()];
    for (i, &v) in order.iter().enumerate() {
        pos[v as usize] = i as u32;
    }
    let canon = |tri: &[u32; 3]| {
        let mut s = *tri;
        s.sort_unstable();
        s
    };
    let mut want: Vec<[u32; 3]> = t.tris().iter().map(|tri| canon(&tri.map(|v| pos[v as usize]))).collect();
    let mut got: Vec<[u32; 3]> = back.tris().iter().map(canon).collect();
    want.sort_unstable();
    got.sort_unstable();
    if want != got {
        return Err(SgiError::GeometryError("decode changed the face set".into()));
    }
    Ok(order)
}

// ---------------------------------------------------------------------------
// Bench driver
// ---------------------------------------------------------------------------

/// One benchmark cell: a build plus a query workload at a given size and
/// seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchRun {
    pub n: u64,
    pub seed: u64,
    /// Serialized container stream bits.
    pub bits: u64,
    /// Bits per vertex.
    pub bpv: f64,
    pub build_s: f64,
    pub q_ns_mean: f64,
    pub q_ns_p99: f64,
    /// Mean orientation predicate calls per query.
    pub orient_mean: f64,
    pub backend: String,
}

/// The JSON benchmark report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchReport {
    pub runs: Vec<BenchRun>,
}

/// Generates, builds, and queries one cell.
pub fn bench_cell(n: usize, seed: u64, queries: usize, backend: Backend) -> Result<BenchRun> {
    let t = Triangulation::gen_random(n, seed)?;
    let params = BuildParams { backend, ..BuildParams::default() };
    let started = Instant::now();
    let (points, ix) = index::build_index(&t, &params)?;
    let build_s = started.elapsed().as_secs_f64();
    let qs = interior_queries(&t, queries, seed ^ 0x9E37_79B9_7F4A_7C15);
    let mut times_ns = Vec::with_capacity(qs.len());
    let orient_before = geom::orient_count();
    for &q in &qs {
        let one = Instant::now();
        ix.locate(&points, q)?;
        times_ns.push(one.elapsed().as_nanos() as f64);
    }
    let orient_mean = (geom::orient_count() - orient_before) as f64 / qs.len().max(1) as f64;
    times_ns.sort_unstable_by(f64::total_cmp);
    let q_ns_mean = times_ns.iter().sum::<f64>() / times_ns.len().max(1) as f64;
    let q_ns_p99 = times_ns
        .get(((times_ns.len() as f64 * 0.99).ceil() as usize).saturating_sub(1))
        .copied()
        .unwrap_or(0.0);
    let bits = ix.size_bits().total;
    Ok(BenchRun {
        n: n as u64,
        seed,
        bits,
        bpv: bits as f64 / n as f64,
        build_s,
        q_ns_mean,
        q_ns_p99,
        orient_mean,
        backend: match backend {
            Backend::Permutation => "permutation",
            Backend::Explicit => "explicit",
        }
        .to_string(),
    })
}

// ---------------------------------------------------------------------------
// Point files
// ---------------------------------------------------------------------------

/// Renders a point array: one `x y` line per point, order significant.
pub fn format_pts(points: &[Point]) -> String {
    let mut out = String::new();
    for p in points {
        out.push_str(&format!("{} {}\n", p.x, p.y));
    }
    out
}

/// Parses a point file written by [`format_pts`].
pub fn parse_pts(text: &str) -> Result<Vec<Point>> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace();
        let parse_coord = |tok: Option<&str>| -> Result<i64> {
            tok.ok_or_else(|| SgiError::Parse(format!("line {}: expected `x y`", ln + 1)))?
                .parse::<i64>()
                .map_err(|e| SgiError::Parse(format!("line {}: {e}", ln + 1)))
        };
        let x = parse_coord(it.next())?;
        let y = parse_coord(it.next())?;
        if it.next().is_some() {
            return Err(SgiError::Parse(format!("line {}: trailing input", ln + 1)));
        }
        out.push(Point { x, y });
    }
    Ok(out)
}

/// Parses a `"x y"` coordinate argument.
fn parse_at(s: &str) -> Result<Point> {
    let pts = parse_pts(s)?;
    match pts.as_slice() {
        [p] => Ok(*p),
        _ => Err(SgiError::Parse(format!("expected a single `x y` pair, got {s:?}"))),
    }
}

// ---------------------------------------------------------------------------
// CLI
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "sgi",
    version,
    about = "Succinct geometric indexes: planar point location from a permuted point set",
    long_about = "Builds and queries a planar point-location structure whose subregion \
connectivity is carried by the order of the stored points.  Labels printed by query \
commands are 0-based positions in the permuted point file."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendArg {
    /// Connectivity from the point order (succinct).
    Perm,
    /// Explicit per-subregion face lists (diagnostic).
    Explicit,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Backend {
        match b {
            BackendArg::Perm => Backend::Permutation,
            BackendArg::Explicit => Backend::Explicit,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a random triangulation file.
    Gen {
        /// Vertex count (≥ 4).
        #[arg(long)]
        n: usize,
        /// RNG seed.
        #[arg(long)]
        seed: u64,
        /// Output triangulation path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build an index: a permuted point file plus a container.
    Build {
        /// Input triangulation.
        #[arg(long)]
        input: PathBuf,
        /// Output permuted point file.
        #[arg(long = "out-points")]
        out_points: PathBuf,
        /// Output index container.
        #[arg(long = "out-index")]
        out_index: PathBuf,
        /// Top-level separator exponent.
        #[arg(long, default_value_t = 3)]
        a: u32,
        /// Bottom-level target exponent.
        #[arg(long, default_value_t = 1)]
        b: u32,
        /// Subregion size floor in vertices.
        #[arg(long, default_value_t = 2048)]
        s0: u32,
        /// Subregion storage backend.
        #[arg(long, value_enum, default_value_t = BackendArg::Perm)]
        backend: BackendArg,
    },
    /// Locate one point; prints three 0-based labels ascending.
    Query {
        /// Permuted point file from `build`.
        #[arg(long)]
        points: PathBuf,
        /// Index container from `build`.
        #[arg(long)]
        index: PathBuf,
        /// Query coordinates, e.g. "31250 -8".
        #[arg(long)]
        at: String,
    },
    /// Locate every `x y` line of a file; one answer line each.
    BatchQuery {
        /// Permuted point file from `build`.
        #[arg(long)]
        points: PathBuf,
        /// Index container from `build`.
        #[arg(long)]
        index: PathBuf,
        /// Query file, one `x y` per line.
        #[arg(long)]
        queries: PathBuf,
    },
    /// Validate a triangulation file, its codec roundtrip, and an oracle
    /// query sweep over a fresh build.
    Verify {
        /// Input triangulation.
        #[arg(long)]
        input: PathBuf,
        /// Sweep 2000 queries instead of 200.
        #[arg(long)]
        full: bool,
    },
    /// Measure builds and queries; write a JSON report.
    Bench {
        /// Comma-separated vertex counts.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Queries per cell.
        #[arg(long, default_value_t = 10000)]
        queries: usize,
        /// Seeds per size (0..seeds).
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Report output path.
        #[arg(long)]
        report: PathBuf,
        /// Subregion storage backend.
        #[arg(long, value_enum, default_value_t = BackendArg::Perm)]
        backend: BackendArg,
    },
    /// Embed the index into pair order: the point file becomes the whole
    /// structure.  Refuses when the stream exceeds the n/2-bit channel.
    ImplicitBuild {
        /// Input triangulation.
        #[arg(long)]
        input: PathBuf,
        /// Output pair-encoded point file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Locate using nothing but a pair-encoded point file.
    ImplicitQuery {
        /// Pair-encoded point file from `implicit-build`.
        #[arg(long)]
        points: PathBuf,
        /// Query coordinates, e.g. "31250 -8".
        #[arg(long)]
        at: String,
    },
}

/// Parses and executes one invocation; returns the process exit code
/// (0 success, 1 validation failure, 2 usage error).
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return if code == 0 { 0 } else { 2.min(code).max(code.min(2)) };
        }
    };
    match dispatch(cli.cmd) {
        Ok(()) => 0,
        Err(msg) => {
            eprintln!("{msg}");
            1
        }
    }
}

fn read_file(path: &Path) -> std::result::Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, data: &[u8]) -> std::result::Result<(), String> {
    std::fs::write(path, data).map_err(|e| format!("{}: {e}", path.display()))
}

fn friendly(e: SgiError) -> String {
    match e {
        SgiError::OutsideHull => "outside hull".to_string(),
        other => other.to_string(),
    }
}

fn load_pair(points: &Path, index_path: &Path) -> std::result::Result<(Vec<Point>, SuccinctIndex), String> {
    let pts = parse_pts(&read_file(points)?).map_err(friendly)?;
    let bytes = std::fs::read(index_path).map_err(|e| format!("{}: {e}", index_path.display()))?;
    let ix = index::load_index(&bytes, &pts).map_err(friendly)?;
    Ok((pts, ix))
}

fn dispatch(cmd: Cmd) -> std::result::Result<(), String> {
    match cmd {
        Cmd::Gen { n, seed, out } => {
            let t = Triangulation::gen_random(n, seed).map_err(friendly)?;
            write_file(&out, t.to_text().as_bytes())?;
            eprintln!("wrote {} ({} vertices, {} faces)", out.display(), t.n(), t.f());
            Ok(())
        }
        Cmd::Build { input, out_points, out_index, a, b, s0, backend } => {
            let t = Triangulation::parse(&read_file(&input)?).map_err(friendly)?;
            let params = BuildParams {
                a,
                b,
                s0,
                backend: backend.into(),
                ..BuildParams::default()
            };
            let started = Instant::now();
            let (points, ix) = index::build_index(&t, &params).map_err(friendly)?;
            let secs = started.elapsed().as_secs_f64();
            write_file(&out_points, format_pts(&points).as_bytes())?;
            write_file(&out_index, ix.bytes())?;
            let meta = ix.meta();
            eprintln!(
                "built n={} regions={} subregions={} ({} explicit) {:.2} bits/vertex in {:.2}s",
                ix.n(),
                meta.regions,
                meta.subregions,
                meta.explicit_subregions,
                ix.size_bits().total as f64 / ix.n() as f64,
                secs
            );
            Ok(())
        }
        Cmd::Query { points, index, at } => {
            let (pts, ix) = load_pair(&points, &index)?;
            let q = parse_at(&at).map_err(friendly)?;
            let [l0, l1, l2] = ix.locate(&pts, q).map_err(friendly)?;
            println!("{l0} {l1} {l2}");
            Ok(())
        }
        Cmd::BatchQuery { points, index, queries } => {
            let (pts, ix) = load_pair(&points, &index)?;
            let qs = parse_pts(&read_file(&queries)?).map_err(friendly)?;
            let mut missed = 0usize;
            for q in qs {
                match ix.locate(&pts, q) {
                    Ok([l0, l1, l2]) => println!("{l0} {l1} {l2}"),
                    Err(SgiError::OutsideHull) => {
                        println!("outside hull");
                        missed += 1;
                    }
                    Err(e) => return Err(friendly(e)),
                }
            }
            if missed > 0 {
                Err(format!("{missed} queries outside hull"))
            } else {
                Ok(())
            }
        }
        Cmd::Verify { input, full } => verify(&input, full),
        Cmd::Bench { sizes, queries, seeds, report, backend } => {
            let mut runs = Vec::new();
            for &n in &sizes {
                for seed in 0..seeds.max(1) {
                    let run = bench_cell(n, seed, queries, backend.into()).map_err(friendly)?;
                    eprintln!(
                        "n={} seed={} {:.2} bits/vertex build {:.2}s query mean {:.0}ns p99 {:.0}ns orient {:.1}",
                        run.n, run.seed, run.bpv, run.build_s, run.q_ns_mean, run.q_ns_p99, run.orient_mean
                    );
                    runs.push(run);
                }
            }
            let json = serde_json::to_string_pretty(&BenchReport { runs })
                .map_err(|e| format!("report serialization: {e}"))?;
            write_file(&report, json.as_bytes())?;
            eprintln!("wrote {}", report.display());
            Ok(())
        }
        Cmd::ImplicitBuild { input, out } => {
            let t = Triangulation::parse(&read_file(&input)?).map_err(friendly)?;
            let (points, ix) = index::build_index(&t, &BuildParams::default()).map_err(friendly)?;
            let bits = ix.stream().len() as u64 * 8;
            let arr = ImplicitArray::encode(&points, ix.stream(), bits).map_err(|e| {
                format!(
                    "{}\nthe pair channel of {} points holds {} bits; this index needs {} \
                     ({:.2} bits/vertex, capacity 0.5)",
                    friendly(e),
                    ix.n(),
                    ix.n() as u64 / 2,
                    bits,
                    bits as f64 / ix.n() as f64
                )
            })?;
            write_file(&out, format_pts(arr.points()).as_bytes())?;
            eprintln!("wrote {} ({} points, {} embedded bits)", out.display(), arr.n(), bits);
            Ok(())
        }
        Cmd::ImplicitQuery { points, at } => {
            let pts = parse_pts(&read_file(&points)?).map_err(friendly)?;
            let arr = ImplicitArray::from_points(pts).map_err(friendly)?;
            let q = parse_at(&at).map_err(friendly)?;
            let [l0, l1, l2] = arr.locate(q).map_err(friendly)?;
            println!("{l0} {l1} {l2}");
            Ok(())
        }
    }
}

fn verify(input: &Path, full: bool) -> std::result::Result<(), String> {
    let t = Triangulation::parse(&read_file(input)?).map_err(friendly)?;
    eprintln!("structure: ok ({} vertices, {} faces)", t.n(), t.f());

    let cfg = CodecConfig::triangulation();
    if t.n() >= cfg.min_n.max(permcode::MIN_SUPPORTED_N) {
        codec_roundtrip(&t, &cfg).map_err(|e| format!("codec roundtrip failed: {e}"))?;
        eprintln!("codec roundtrip: ok");
    } else {
        eprintln!("codec roundtrip: skipped (below the codec's minimum size)");
    }

    let (points, ix) = index::build_index(&t, &BuildParams::default()).map_err(friendly)?;
    let grid = FaceGrid::build(&t);
    let sweep = if full { 2000 } else { 200 };
    for (i, q) in interior_queries(&t, sweep, 0xACCE55).into_iter().enumerate() {
        let labels = ix.locate(&points, q).map_err(friendly)?;
        let face = grid.locate(&t, q).map_err(friendly)?;
        if !answer_matches(&t, &points, labels, face, q) {
            return Err(format!("query sweep mismatch at case {i}: {q}"));
        }
    }
    eprintln!("query sweep: ok ({sweep} queries)");
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t4() -> Triangulation {
        Triangulation::parse("4 3\n0 0\n100 0\n0 100\n20 20\n1 2 4\n2 3 4\n3 1 4\n").unwrap()
    }

    /// Hand-checked interior hits on the four-point triangulation.
    #[test]
    fn oracle_answers_t4_by_hand() {
        let t = t4();
        // Face 0 = (0,1,3), face 1 = (1,2,3), face 2 = (2,0,3).
        assert_eq!(oracle_locate(&t, Point { x: 50, y: 10 }).unwrap(), 0);
        assert_eq!(oracle_locate(&t, Point { x: 40, y: 40 }).unwrap(), 1);
        assert_eq!(oracle_locate(&t, Point { x: 5, y: 50 }).unwrap(), 2);
        assert!(matches!(
            oracle_locate(&t, Point { x: 90, y: 90 }),
            Err(SgiError::OutsideHull)
        ));
    }

    /// Edge queries resolve to the smaller face id.
    #[test]
    fn oracle_breaks_ties_toward_smaller_ids() {
        let t = t4();
        // (20,20)-(100,0) separates faces 0 and 1; a point on it hits 0.
        assert_eq!(oracle_locate(&t, Point { x: 60, y: 10 }).unwrap(), 0);
        // The shared vertex itself belongs to face 0 as well.
        assert_eq!(oracle_locate(&t, Point { x: 20, y: 20 }).unwrap(), 0);
    }

    /// The bucketed oracle agrees with the linear scan everywhere.
    #[test]
    fn grid_matches_linear_scan() {
        let t = Triangulation::gen_random(800, 13).unwrap();
        let grid = FaceGrid::build(&t);
        for q in interior_queries(&t, 3000, 99) {
            assert_eq!(grid.locate(&t, q).unwrap(), oracle_locate(&t, q).unwrap(), "at {q}");
        }
    }

    /// An independent containment formulation (barycentric signs) agrees
    /// with the oracle's predicate on random cases.
    #[test]
    fn oracle_agrees_with_barycentric_signs() {
        let t = Triangulation::gen_random(300, 7).unwrap();
        let contains_bary = |a: Point, b: Point, c: Point, q: Point| {
            let d1 = geom::orient(q, a, b);
            let d2 = geom::orient(q, b, c);
            let d3 = geom::orient(q, c, a);
            let has_neg = d1 < 0 || d2 < 0 || d3 < 0;
            let has_pos = d1 > 0 || d2 > 0 || d3 > 0;
            !(has_neg && has_pos)
        };
        for q in interior_queries(&t, 10_000, 41) {
            let face = oracle_locate(&t, q).unwrap();
            let [a, b, c] = t.tri(face).map(|v| t.point(v));
            assert!(contains_bary(a, b, c, q));
            // And the oracle's own predicate agrees face by face.
            for id in 0..t.f() as u32 {
                let [x, y, z] = t.tri(id).map(|v| t.point(v));
                assert_eq!(
                    geom::closed_contains(x, y, z, q),
                    contains_bary(x, y, z, q),
                    "face {id} at {q}"
                );
            }
        }
    }

    /// Point files round-trip and reject malformed lines.
    #[test]
    fn point_files_roundtrip() {
        let pts = vec![Point { x: -5, y: 3 }, Point { x: 0, y: 0 }, Point { x: 31, y: -2 }];
        assert_eq!(parse_pts(&format_pts(&pts)).unwrap(), pts);
        assert!(parse_pts("1 2 3\n").is_err());
        assert!(parse_pts("1\n").is_err());
        assert!(parse_pts("a b\n").is_err());
        assert_eq!(parse_at("4 -7").unwrap(), Point { x: 4, y: -7 });
        assert!(parse_at("4").is_err());
        assert!(parse_at("4 5\n6 7").is_err());
    }

    /// Bench cells produce well-formed, internally consistent rows.
    #[test]
    fn bench_cell_fields_are_consistent() {
        let run = bench_cell(600, 1, 50, Backend::Permutation).unwrap();
        assert_eq!(run.n, 600);
        assert!(run.bits > 0);
        assert!((run.bpv - run.bits as f64 / 600.0).abs() < 1e-9);
        assert!(run.build_s >= 0.0 && run.q_ns_mean > 0.0 && run.q_ns_p99 >= run.q_ns_mean * 0.1);
        assert!(run.orient_mean > 0.0);
        assert_eq!(run.backend, "permutation");
        let json = serde_json::to_string(&BenchReport { runs: vec![run] }).unwrap();
        let back: BenchReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back.runs.len(), 1);
    }
}
