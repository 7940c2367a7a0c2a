//! Random twisted hypercubes.
//!
//! A twisted hypercube of dimension `n` lives on the labels `0..2^n`. It is
//! built recursively: two copies of the `(n-1)`-dimensional graph are joined
//! by a uniformly random perfect matching. The crate covers seeded
//! construction under several coupling policies, the level-indexed neighbor
//! oracle, two routing procedures, exact and sampled diameter measurement,
//! executable structural checks and a reproducible sweep harness.
//!
//! Labels follow a fixed bit convention: coordinate `k` (1-indexed) is bit
//! `k - 1`, so the "final" coordinates are the high bits and the highest
//! differing coordinate of two labels is a leading-zero count away.

pub mod cube;
pub mod error;
pub mod format;
pub mod harness;
pub mod label;
pub mod metrics;
pub mod policy;
pub mod rng;
pub mod routing;
pub mod verify;

pub use cube::{BuildOptions, MatchingLevel, TwistedCube, DEFAULT_MEM_BUDGET, MAX_DIMENSION};
pub use error::{Error, FormatError, Result};
pub use label::{alpha, Vertex};
pub use policy::CouplingPolicy;
pub use routing::{Path, Phase, RouterParams};
