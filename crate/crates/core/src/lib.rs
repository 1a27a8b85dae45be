//! Nonlinear Cheeger-type estimates for the `p`-Laplacian on weighted graphs
//! with intrinsic metrics.
//!
//! The crate computes `p`-energies and Rayleigh quotients, isoperimetric
//! constants measured in an edge length `d`, numerical first eigenvalues,
//! and the lower and upper estimates that tie them together.

pub mod bounds;
pub mod brooks;
pub mod cheeger;
pub mod eigensolver;
pub mod energy;
pub mod error;
pub mod generators;
pub mod graph;
pub mod metrics;
pub mod numeric;
pub mod partition;

pub use error::{Error, Result};
pub use graph::{parse_graph, write_graph, PairWeight, VertexSet, WeightedGraph};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/cheeger.md")]
    mod cheeger {}
    #[doc = include_str!("../../../book/src/eigenvalues.md")]
    mod eigenvalues {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/brooks.md")]
    mod brooks {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
