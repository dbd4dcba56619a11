use rand::Rng;

use super::poisson::sample_poisson;
use super::proposal::PairProposal;
use super::state::{ProbModel, SeqSampleMode, WorkingGraph};
use crate::error::{Error, Result};
use crate::graph::{all_pairs, DegreeSequence, SimpleGraph, SymmetricProbMatrix};
use crate::oracle::OracleConfig;

/// `G(n,W)`: every pair independently with probability `W_{jk}`. One uniform
/// is consumed per pair.
pub fn sample_gnw<R: Rng + ?Sized>(w: &SymmetricProbMatrix, rng: &mut R) -> SimpleGraph {
    let mut g = SimpleGraph::empty(w.n());
    for (e, &p) in all_pairs(w.n()).zip(w.upper()) {
        if rng.random::<f64>() < p {
            g.insert(e);
        }
    }
    g
}

/// SeqApprox-P: `Po(λ)` proposals from `Q(d)`, each kept with probability
/// `Λ_{jk}`. The output law is `G(n, f_c(Λ ⊙ Q(d)))` with `f(x) = 1 - exp(-λx)`.
#[derive(Clone, Debug)]
pub struct SeqApproxP {
    proposal: PairProposal,
    lambda: f64,
    accept: SymmetricProbMatrix,
}

impl SeqApproxP {
    pub fn new(d: &DegreeSequence, lambda: f64, accept: SymmetricProbMatrix) -> Result<Self> {
        let proposal = PairProposal::new(d)?;
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(Error::InvalidParameter(format!("lambda {lambda} must be finite and >= 0")));
        }
        if accept.n() != d.len() {
            return Err(Error::DimensionMismatch(accept.n(), d.len()));
        }
        Ok(SeqApproxP {
            proposal,
            lambda,
            accept,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> SimpleGraph {
        let steps = sample_poisson(self.lambda, rng).expect("lambda validated");
        let mut g = SimpleGraph::empty(self.accept.n());
        for _ in 0..steps {
            let e = self.proposal.sample(rng);
            if rng.random::<f64>() < self.accept.at(e) {
                g.insert(e);
            }
        }
        g
    }
}

pub fn seq_approx_p<R: Rng + ?Sized>(
    d: &DegreeSequence,
    lambda: f64,
    accept: &SymmetricProbMatrix,
    rng: &mut R,
) -> Result<SimpleGraph> {
    Ok(SeqApproxP::new(d, lambda, accept.clone())?.sample(rng))
}

/// Output of one SeqSample-D run.
#[derive(Clone, Debug, PartialEq)]
pub struct SeqSampleOutput {
    pub graph: SimpleGraph,
    /// `(m, G_m)` for each requested checkpoint, in request order.
    pub snapshots: Vec<(usize, SimpleGraph)>,
    /// Restarts after the asymptotic kernel reached a dead end.
    pub restarts: u32,
}

/// Restarts allowed before an asymptotic run gives up.
pub const MAX_RESTARTS: u32 = 1000;

/// SeqSample-D: `‖d‖₁/2` insertions, each a non-edge drawn with probability
/// proportional to `P(jk ∈ G(n,d) | G_{i-1})`.
#[derive(Clone, Debug)]
pub struct SeqSampler {
    d: DegreeSequence,
    model: ProbModel,
}

impl SeqSampler {
    pub fn new(d: &DegreeSequence, mode: SeqSampleMode, cfg: &OracleConfig) -> Result<Self> {
        if !d.is_graphical() {
            return Err(Error::NotGraphical);
        }
        Ok(SeqSampler {
            d: d.clone(),
            model: ProbModel::new(d, mode, cfg)?,
        })
    }

    pub fn mode(&self) -> SeqSampleMode {
        self.model.mode()
    }

    pub fn model(&self) -> &ProbModel {
        &self.model
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, checkpoints: &[usize]) -> Result<SeqSampleOutput> {
        let target = self.d.edge_target();
        if let Some(&m) = checkpoints.iter().find(|&&m| m > target) {
            return Err(Error::EdgeCountOutOfRange { m, max: target });
        }
        let mut restarts = 0;
        loop {
            let mut state = WorkingGraph::new(&self.d);
            let mut snaps: Vec<Option<SimpleGraph>> = vec![None; checkpoints.len()];
            let record = |state: &WorkingGraph, snaps: &mut Vec<Option<SimpleGraph>>| {
                let m = state.edge_count();
                for (slot, &c) in snaps.iter_mut().zip(checkpoints) {
                    if c == m {
                        *slot = Some(state.to_graph());
                    }
                }
            };
            record(&state, &mut snaps);
            let mut stuck = false;
            while state.edge_count() < target {
                match self.model.sample_next(&state, rng) {
                    Some(e) => state.insert(e),
                    None => {
                        stuck = true;
                        break;
                    }
                }
                record(&state, &mut snaps);
            }
            if !stuck {
                return Ok(SeqSampleOutput {
                    graph: state.to_graph(),
                    snapshots: checkpoints.iter().copied().zip(snaps.into_iter().map(Option::unwrap)).collect(),
                    restarts,
                });
            }
            if self.mode() == SeqSampleMode::ExactOracle {
                return Err(Error::Invariant("oracle kernel reached a dead end".into()));
            }
            restarts += 1;
            if restarts > MAX_RESTARTS {
                return Err(Error::Invariant(format!("sequential sampler stuck after {MAX_RESTARTS} restarts")));
            }
        }
    }
}

pub fn seq_sample_d<R: Rng + ?Sized>(
    d: &DegreeSequence,
    mode: SeqSampleMode,
    rng: &mut R,
    checkpoints: &[usize],
    cfg: &OracleConfig,
) -> Result<SeqSampleOutput> {
    SeqSampler::new(d, mode, cfg)?.sample(rng, checkpoints)
}
