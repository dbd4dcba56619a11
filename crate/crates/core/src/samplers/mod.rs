//! Randomness primitives and the sequential generators.

mod poisson;
mod proposal;
mod rng;
mod seq;
mod state;

pub use poisson::sample_poisson;
pub use proposal::{sample_weighted_edge, PairProposal};
pub use rng::RandomSource;
pub use seq::{sample_gnw, seq_approx_p, seq_sample_d, SeqApproxP, SeqSampleOutput, SeqSampler, MAX_RESTARTS};
pub use state::{ProbModel, SeqSampleMode, WorkingGraph};

