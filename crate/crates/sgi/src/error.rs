//! Crate-wide error type.

use thiserror::Error;

/// All errors surfaced by this crate.
#[derive(Debug, Error)]
pub enum SgiError {
    /// Two input points share the same coordinates.
    #[error("duplicate point: indexes {0} and {1} have identical coordinates")]
    DuplicatePoint(usize, usize),

    /// A face record does not have three distinct vertices.
    #[error("face {0} is not a triangle with three distinct vertices")]
    NonTriangleFace(usize),

    /// A face is not counter-clockwise or is degenerate.
    #[error("face {0} is degenerate or clockwise; faces must be counter-clockwise")]
    BadOrientation(usize),

    /// Face or edge counts violate Euler's relation for a full triangulation.
    #[error(
        "Euler violation: {n} vertices require {} faces and {} edges, found {faces} faces{}",
        2 * n - 5,
        3 * n - 6,
        if *edges > 0 { format!(", {edges} edges") } else { String::new() }
    )]
    EulerViolation {
        /// Number of vertices.
        n: usize,
        /// Face count found.
        faces: usize,
        /// Edge count found (0 when the face count already failed).
        edges: usize,
    },

    /// A geometric consistency requirement failed.
    #[error("geometry error: {0}")]
    GeometryError(String),

    /// An edge is shared by more than two faces, or adjacency is inconsistent.
    #[error("broken adjacency at edge ({0}, {1})")]
    BrokenAdjacency(u32, u32),

    /// A coordinate lies outside the supported range.
    #[error("coordinate overflow at point {index}: |{value}| exceeds 2^30")]
    CoordinateOverflow {
        /// Index of the offending point.
        index: usize,
        /// The offending coordinate value.
        value: i64,
    },

    /// Three collinear or coincident corners where a proper triangle is required.
    #[error("degenerate triangle: corners are collinear or coincident")]
    DegenerateTriangle,

    /// A rank/select structure was built over an empty bit sequence.
    #[error("empty bit vector")]
    EmptyBitVector,

    /// A 1-based bit position lies outside `1..=length`.
    #[error("position {pos} out of range for bit vector of length {len}")]
    PositionOutOfRange {
        /// Queried position (1-based).
        pos: usize,
        /// Length of the bit sequence.
        len: usize,
    },

    /// A select rank argument exceeds the number of occurrences of the label.
    #[error("rank {pos} out of range: label occurs {len} times")]
    RankOutOfRange {
        /// Requested occurrence number (1-based).
        pos: usize,
        /// Number of occurrences of the label.
        len: usize,
    },

    /// A polygon expected to be simple self-intersects or is malformed.
    #[error("polygon is not simple: {0}")]
    NotSimple(String),

    /// A subdivision face is not a simple polygon.
    #[error("face {0} is not a simple polygon")]
    NonSimpleFace(usize),

    /// An algorithm parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    ParamError(String),

    /// A query point lies outside the outer triangle.
    #[error("query point lies outside the outer triangle")]
    OutsideHull,

    /// The number of per-face tags does not match the number of faces.
    #[error("tag count {tags} does not match face count {faces}")]
    TagArityMismatch {
        /// Faces in the structure.
        faces: usize,
        /// Tags supplied.
        tags: usize,
    },

    /// The input is too small for the requested operation.
    #[error("input too small: {got} points, need at least {min}")]
    TooSmall {
        /// Points supplied.
        got: usize,
        /// Minimum supported.
        min: usize,
    },

    /// A region, subregion, or label identifier is outside its valid range.
    #[error("{what} {got} out of range (maximum {max})")]
    IdOutOfRange {
        /// Which identifier was invalid.
        what: &'static str,
        /// The value supplied.
        got: u64,
        /// The largest valid value.
        max: u64,
    },

    /// A sequence expected to be a permutation of `0..k` is not one.
    #[error("not a permutation of 0..{0}")]
    NotAPermutation(usize),

    /// A permutation being decoded is not a valid encoding of any triangulation.
    #[error("corrupt permutation: {0}")]
    CorruptPermutation(String),

    /// The encoder could not fit its bit stream into the permutation's capacity.
    #[error("internal capacity exceeded: need {need} bits, capacity {have}")]
    InternalCapacity {
        /// Bits required.
        need: u64,
        /// Bits available.
        have: u64,
    },

    /// Payload does not fit the implicit channel of the point set.
    #[error("capacity exceeded: payload of {need} bits, channel holds {have}")]
    CapacityExceeded {
        /// Bits required.
        need: u64,
        /// Bits available.
        have: u64,
    },

    /// Malformed text or binary input.
    #[error("parse error: {0}")]
    Parse(String),

    /// Malformed serialized index container.
    #[error("container error: {0}")]
    Container(String),

    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Shorthand result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, SgiError>;
