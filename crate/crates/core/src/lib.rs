//! Maximum inner product search over sparse and hybrid vectors.
//!
//! Sparse vectors are sketched into a low-dimensional space, the sketches
//! are partitioned with (spherical) KMeans, and queries probe the
//! best-scoring partitions until a document budget `ℓ` is covered. The
//! probed partitions are scored exactly, either by scanning their members
//! or through an inverted index whose posting lists are segmented by
//! partition.

pub(crate) mod codec;
pub mod cli;
pub mod error;
pub mod eval;
pub mod format;
pub mod hash;
pub mod inverted;
pub mod ivf;
pub mod kmeans;
pub mod sketch;
pub mod topk;
pub mod vector;

pub use error::{Error, Result};
pub use topk::{ScoredDoc, TopK, TopKResult};
pub use vector::{dot_hybrid, dot_sparse, DenseVector, HybridVector, SparseVector, VectorDataset};
