//! Graph edit distance under general edit costs, computed exactly by
//! enumerating node permutations of a quadratic assignment objective and
//! approximately by a trainable set-divergence model built on Sinkhorn
//! alignments.

pub mod align;
pub mod assignment;
pub mod autodiff;
pub mod checkpoint;
pub mod dataset;
pub mod divergence;
pub mod edit_path;
pub mod encoder;
pub mod error;
pub mod exact;
pub mod gradcheck;
pub mod graph;
pub mod matrix;
pub mod metrics;
pub mod train;

pub use error::{GedError, Result};
pub use graph::{pad_pair, CostConfig, Graph, NamedGraph, PaddedPair};
pub use matrix::Matrix;
