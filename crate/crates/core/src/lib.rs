//! Upper bounds on the minimum distance of codes under general, possibly
//! infinite-valued, symbol distances.
//!
//! The bounds come from generalized Lovász theta functions of the similarity
//! graph `g = e^{-d}`, solved as small convex programs over Gram matrices.
//! Exhaustive oracles for short block lengths check every finite-size
//! inequality against ground truth.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod channels;
pub mod cli;
pub mod distances;
pub mod embedding;
pub mod error;
pub mod ext;
pub mod format;
pub mod oracle;
pub mod simplex;
pub mod theta;

pub use distances::{Code, DistanceMatrix, WeightedGraph};
pub use error::{Error, Result};
pub use ext::ExtReal;
pub use simplex::{Composition, StochasticMatrix};
