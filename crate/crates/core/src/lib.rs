//! Sampling and coupling toolkit for random graphs with a prescribed degree
//! sequence.
//!
//! * [`graph`]: degree sequences, simple graphs, probability matrices.
//! * [`oracle`]: exact enumeration for small `n`.
//! * [`samplers`]: `G(n,W)`, the Poissonized sequential sampler and the
//!   sequential degree-sequence sampler.
//! * [`coupling`]: the coupled construction of `(G_L, G)` with `G_L ⊆ G`.
//! * [`stats`]: goodness-of-fit and marginal checks.
//! * [`experiment`]: configuration, generators and the experiment runner
//!   behind the `degseq` binary.

pub mod coupling;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod oracle;
pub mod samplers;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{DegreeSequence, Edge, SimpleGraph, SymmetricProbMatrix};
