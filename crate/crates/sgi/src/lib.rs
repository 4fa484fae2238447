//! Succinct geometric indexes for planar point location.
//!
//! A triangulation of `n` points is stored as nothing but a permutation of
//! those points (plus `o(n)` extra bits of index), yet admits `O(log n)`-time
//! point-location queries.  The crate provides:
//!
//! * exact integer predicates over 64-bit coordinates ([`geom`]),
//! * succinct rank/select bit vectors ([`bitvec`]),
//! * triangulation containers, I/O and random generation ([`mesh`]),
//! * polygon and region triangulation by ear clipping ([`polygon`]),
//! * small weighted separators for planar subdivisions ([`separator`]),
//! * the order-of-points codec that serializes a triangulation into a
//!   permutation of its vertex set ([`permcode`]),
//! * a point-location hierarchy over small meshes ([`pointloc`]),
//! * vertex-label translation tables ([`labels`]),
//! * the two-level succinct index itself ([`index`]),
//! * a fully implicit variant that hides the index bits inside the ordering
//!   of consecutive point pairs ([`implicit`]),
//! * brute-force oracles and benchmark drivers ([`harness`]).

pub mod bitvec;
pub mod error;
pub mod geom;
pub mod harness;
pub mod implicit;
pub mod index;
pub mod labels;
pub mod mesh;
pub mod permcode;
pub mod pointloc;
pub mod polygon;
pub mod separator;

pub use error::SgiError;
