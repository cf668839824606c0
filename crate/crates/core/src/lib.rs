//! Influence minimization by node blocking under the independent-cascade
//! model.
//!
//! Given a directed graph with edge probabilities, a set of misinformation
//! seeds and a budget `k`, pick `k` non-seed nodes to block so that the
//! expected number of nodes the seeds reach drops as much as possible.

pub mod baselines;
pub mod diffusion;
pub mod domtree;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod harness;
pub mod optimize;
pub mod oracle;
pub mod rng;
pub mod sampling;
pub mod sandwich;

pub use error::{Error, Result};
pub use graph::{BlockerSet, Graph, NodeId, SeedSet, UnifiedGraph};
pub use rng::SeedStream;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/graphs.md")]
    struct Graphs;
    #[doc = include_str!("../../../book/src/spread.md")]
    struct Spread;
    #[doc = include_str!("../../../book/src/dominators.md")]
    struct Dominators;
    #[doc = include_str!("../../../book/src/bounds.md")]
    struct Bounds;
    #[doc = include_str!("../../../book/src/sampling.md")]
    struct Sampling;
    #[doc = include_str!("../../../book/src/algorithms.md")]
    struct Algorithms;
    #[doc = include_str!("../../../book/src/harness.md")]
    struct Harness;
}
