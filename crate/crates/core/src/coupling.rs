//! Coupled construction of `(G_L, G)` with `G_L ~ G(n, f_c(Λ ⊙ Q))`,
//! `G ~ G(n,d)` and `G_L ⊆ G` whenever the fallback branch is not taken.
//!
//! Each step proposes `jk ~ Q(d)`. A proposal already in `G` only toggles
//! `G_L` (probability `Λ_jk`). Otherwise it is accepted into `G` with
//! probability `η = ρ(jk) / max ρ`, where `ρ(jk) = P(jk ∈ G(n,d) | G) / (d_j d_k)`;
//! the first `Λ_jk` of that mass also goes to `G_L`. Since the proposal has
//! mass proportional to `d_j d_k`, the insertion probability of `jk` is
//! proportional to the conditional probability, which is the SeqSample-D
//! kernel. If `η < Λ_jk` the branch table would be negative and the run
//! returns an independent pair instead.
//!
//! With [`EtaDenominatorMode::CertifiedBound`] the maximum is replaced by any
//! `B >= max ρ` that does not depend on the proposed pair. Acceptance stays
//! proportional to `ρ` within a step, so the law of `G` is unchanged; only the
//! rejection and fallback rates move.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{f_c_transform, hadamard, q_matrix, DegreeSequence, Edge, SimpleGraph, SymmetricProbMatrix};
use crate::oracle::{GraphFamily, OracleConfig};
use crate::samplers::{
    sample_gnw, sample_poisson, PairProposal, ProbModel, SeqSampleMode, SeqSampler, WorkingGraph,
};

/// How the normalizer of `η` is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaDenominatorMode {
    /// Maximum of `ρ` over all non-edges; `O(n²)` per step.
    ExactMax,
    /// Pair-independent upper bound on `ρ`.
    CertifiedBound,
}

/// Constants of the finite-`n` slack schedule. The asymptotic conditions only
/// fix orders of growth, so each constant is a tunable choice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScheduleConstants {
    /// `ζ' >= ‖d‖₁^{-zeta_prime_total_exp}`.
    pub zeta_prime_total_exp: f64,
    /// `ζ' >= (J/‖d‖₁)^{zeta_prime_j_exp}`.
    pub zeta_prime_j_exp: f64,
    /// `ξ = (log n / (ζ' δ))^{xi_exp}`.
    pub xi_exp: f64,
    pub xi_max: f64,
    /// `ζ = min(zeta_max, zeta_c (J/(ζ'‖d‖₁) + ξ))`.
    pub zeta_c: f64,
    pub zeta_max: f64,
}

impl Default for ScheduleConstants {
    fn default() -> Self {
        ScheduleConstants {
            zeta_prime_total_exp: 0.25,
            zeta_prime_j_exp: 0.5,
            xi_exp: 1.0 / 3.0,
            xi_max: 0.5,
            zeta_c: 3.0,
            zeta_max: 0.5,
        }
    }
}

/// `(ξ, ζ, ζ', λ, Λ)` with `λ = (1-ζ')‖d‖₁/2` and
/// `Λ_jk = (1-ζ)‖d‖₁/(‖d‖₁ + d_j d_k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CouplingParams {
    pub xi: f64,
    pub zeta: f64,
    pub zeta_prime: f64,
    pub lambda: f64,
    #[serde(skip)]
    pub accept: SymmetricProbMatrix,
    /// Reasons the schedule is outside its intended regime; empty when clean.
    pub warnings: Vec<String>,
}

fn check_slack(name: &str, v: f64) -> Result<()> {
    if !(0.0..1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!("{name} = {v} must lie in [0,1)")));
    }
    Ok(())
}

impl CouplingParams {
    /// Derives `λ` and `Λ` from explicit slack values.
    pub fn from_slack(d: &DegreeSequence, xi: f64, zeta: f64, zeta_prime: f64) -> Result<Self> {
        check_slack("xi", xi)?;
        check_slack("zeta", zeta)?;
        check_slack("zeta_prime", zeta_prime)?;
        let total = d.total() as f64;
        if total == 0.0 {
            return Err(Error::Degenerate);
        }
        let deg = d.degrees();
        let accept = SymmetricProbMatrix::from_fn(d.len(), |j, k| {
            (1.0 - zeta) * total / (total + deg[j] as f64 * deg[k] as f64)
        })?;
        Ok(CouplingParams {
            xi,
            zeta,
            zeta_prime,
            lambda: (1.0 - zeta_prime) * total / 2.0,
            accept,
            warnings: Vec::new(),
        })
    }

    pub fn out_of_regime(&self) -> bool {
        !self.warnings.is_empty()
    }
}

pub fn default_params(d: &DegreeSequence) -> Result<CouplingParams> {
    default_params_with(d, &ScheduleConstants::default())
}

/// Concrete schedule:
/// `ζ' = max(‖d‖₁^{-1/4}, (J/‖d‖₁)^{1/2})`,
/// `ξ = (log n / (ζ' δ))^{1/3}` clamped to `(0, 1/2]`,
/// `ζ = min(1/2, 3 (J/(ζ'‖d‖₁) + ξ))`, exponents and constants from `c`.
pub fn default_params_with(d: &DegreeSequence, c: &ScheduleConstants) -> Result<CouplingParams> {
    let stats = d.stats();
    if stats.min == 0 {
        return Err(Error::InvalidParameter("minimum degree is 0; schedule undefined".into()));
    }
    let total = stats.sum as f64;
    let j_ratio = stats.j as f64 / total;
    let n = d.len() as f64;
    let mut warnings = Vec::new();
    if stats.j >= stats.sum {
        warnings.push(format!("J(d) = {} >= ||d||_1 = {}", stats.j, stats.sum));
    }

    let mut zeta_prime = total.powf(-c.zeta_prime_total_exp).max(j_ratio.powf(c.zeta_prime_j_exp));
    if zeta_prime >= 1.0 {
        warnings.push(format!("zeta' = {zeta_prime} clamped below 1"));
        zeta_prime = 1.0 - 1e-9;
    }

    let xi_raw = (n.ln() / (zeta_prime * stats.min as f64)).powf(c.xi_exp);
    let xi = if xi_raw > c.xi_max {
        warnings.push(format!("xi = {xi_raw:.4} clamped to {}", c.xi_max));
        c.xi_max
    } else {
        xi_raw.max(f64::EPSILON)
    };

    let zeta_raw = c.zeta_c * (j_ratio / zeta_prime + xi);
    let zeta = if zeta_raw > c.zeta_max {
        warnings.push(format!("zeta = {zeta_raw:.4} clamped to {}", c.zeta_max));
        c.zeta_max
    } else {
        zeta_raw
    };

    let mut params = CouplingParams::from_slack(d, xi, zeta, zeta_prime)?;
    params.warnings = warnings;
    Ok(params)
}

/// `ρ(jk) = P(jk ∈ G(n,d) | state) / (d_j d_k)`.
pub fn rho(d: &DegreeSequence, state: &SimpleGraph, jk: Edge, mode: SeqSampleMode, cfg: &OracleConfig) -> Result<f64> {
    if state.contains(jk) {
        return Err(Error::EdgeInCondition(jk.lo(), jk.hi()));
    }
    if d.get(jk.lo()) == 0 || d.get(jk.hi()) == 0 {
        return Err(Error::InvalidParameter(format!("pair {jk} has a zero-degree endpoint")));
    }
    let (model, work) = prepare(d, state, mode, cfg)?;
    rho_in(&model, &work, jk)
}

/// Normalizer of `η` at `state`.
pub fn eta_denominator(
    d: &DegreeSequence,
    state: &SimpleGraph,
    mode: EtaDenominatorMode,
    prob_mode: SeqSampleMode,
    cfg: &OracleConfig,
) -> Result<f64> {
    let (model, work) = prepare(d, state, prob_mode, cfg)?;
    if work.eligible_pairs().is_empty() {
        return Err(Error::NoEligiblePair);
    }
    match mode {
        EtaDenominatorMode::ExactMax => exact_max_rho(&model, &work),
        EtaDenominatorMode::CertifiedBound => match model {
            ProbModel::Asymptotic => {
                let mut tracker = RatioTracker::new(&work);
                asymptotic_bound(&work, &mut tracker)
            }
            ProbModel::Oracle(_) => oracle_bound(&work),
        },
    }
}

fn prepare(
    d: &DegreeSequence,
    state: &SimpleGraph,
    mode: SeqSampleMode,
    cfg: &OracleConfig,
) -> Result<(ProbModel, WorkingGraph)> {
    if state.n() != d.len() {
        return Err(Error::DimensionMismatch(state.n(), d.len()));
    }
    crate::graph::remaining_degrees(d, state)?;
    let model = match mode {
        SeqSampleMode::Asymptotic => ProbModel::Asymptotic,
        SeqSampleMode::ExactOracle => {
            let fam = crate::oracle::enumerate_graphs(d, &[], &[], cfg)?;
            ProbModel::Oracle(fam)
        }
    };
    let mut work = WorkingGraph::new(d);
    for e in state.edges() {
        work.insert(e);
    }
    Ok((model, work))
}

fn rho_in(model: &ProbModel, state: &WorkingGraph, e: Edge) -> Result<f64> {
    let prod = state.degree(e.lo()) as f64 * state.degree(e.hi()) as f64;
    if prod == 0.0 {
        return Ok(0.0);
    }
    Ok(model.cond_prob(state, e)? / prod)
}

fn exact_max_rho(model: &ProbModel, state: &WorkingGraph) -> Result<f64> {
    let mut best = 0.0f64;
    for e in state.eligible_pairs() {
        best = best.max(rho_in(model, state, e)?);
    }
    if best > 0.0 {
        Ok(best)
    } else {
        Err(Error::NoEligiblePair)
    }
}

/// `(max_h t_h/d_h)² / ‖t‖₁`. Valid because
/// `ρ = t_h t_ℓ / (d_h d_ℓ (‖t‖₁ + t_h t_ℓ)) <= (t_h/d_h)(t_ℓ/d_ℓ) / ‖t‖₁`.
fn asymptotic_bound(state: &WorkingGraph, tracker: &mut RatioTracker) -> Result<f64> {
    let total = state.remaining_total();
    let r = tracker.max_ratio(state);
    if total == 0 || r == 0.0 {
        return Err(Error::NoEligiblePair);
    }
    Ok(r * r / total as f64)
}

/// `max 1/(d_j d_k)` over eligible pairs; valid since the conditional probability is at most 1.
fn oracle_bound(state: &WorkingGraph) -> Result<f64> {
    state
        .eligible_pairs()
        .into_iter()
        .map(|e| 1.0 / (state.degree(e.lo()) as f64 * state.degree(e.hi()) as f64))
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.max(x))))
        .ok_or(Error::NoEligiblePair)
}

/// Max-heap of `t_v / d_v` with lazy invalidation; `t` only decreases.
struct RatioTracker {
    heap: BinaryHeap<RatioEntry>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
struct RatioEntry {
    t: u32,
    d: u32,
    v: u32,
}

impl Ord for RatioEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs = self.t as u64 * other.d as u64;
        let rhs = other.t as u64 * self.d as u64;
        lhs.cmp(&rhs).then_with(|| other.v.cmp(&self.v))
    }
}

impl PartialOrd for RatioEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl RatioTracker {
    fn new(state: &WorkingGraph) -> Self {
        let heap = (0..state.n())
            .filter(|&v| state.degree(v) > 0)
            .map(|v| RatioEntry {
                t: state.remaining(v),
                d: state.degree(v),
                v: v as u32,
            })
            .collect();
        RatioTracker { heap }
    }

    fn update(&mut self, state: &WorkingGraph, v: usize) {
        self.heap.push(RatioEntry {
            t: state.remaining(v),
            d: state.degree(v),
            v: v as u32,
        });
    }

    fn max_ratio(&mut self, state: &WorkingGraph) -> f64 {
        while let Some(top) = self.heap.peek() {
            if state.remaining(top.v as usize) == top.t {
                return top.t as f64 / top.d as f64;
            }
            self.heap.pop();
        }
        0.0
    }
}

/// Why a run returned the independent pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FallbackReason {
    /// `η < Λ_jk` at some step.
    EtaBelowLambda,
    /// The asymptotic completion kernel kept reaching dead ends.
    CompletionStuck,
}

/// Per-run diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingTrace {
    /// Poisson step budget `I`.
    #[serde(rename = "I")]
    pub steps_budget: u64,
    pub fallback: bool,
    pub fallback_step: Option<u64>,
    pub fallback_reason: Option<FallbackReason>,
    /// Main-loop steps executed plus completion insertions.
    pub steps_total: u64,
    /// Smallest `η` over non-duplicate steps (1 when there were none).
    pub eta_min: f64,
    /// Non-edge proposals rejected by `G`.
    pub rejections_g: u64,
    /// Proposals inserted into `G` but not `G_L`.
    pub rejections_l_only: u64,
    /// Proposals already present in `G`.
    pub duplicate_hits: u64,
    /// Insertions into `G` during the main loop, i.e. `|E(G_I)|`.
    pub loop_insertions: u64,
    pub completion_insertions: u64,
    pub completion_restarts: u32,
    /// `(step, p_m)` samples over the main loop.
    pub p_m_checkpoints: Vec<(u64, f64)>,
    pub prob_mode: SeqSampleMode,
    pub denom_mode: EtaDenominatorMode,
    /// True when any part of the output relied on the asymptotic kernel.
    pub approximate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingOutcome {
    pub g_l: SimpleGraph,
    pub g: SimpleGraph,
    pub trace: CouplingTrace,
}

/// Independent pair returned by the fallback branch.
#[derive(Clone, Debug, PartialEq)]
pub struct IndSample {
    pub g_l: SimpleGraph,
    pub g: SimpleGraph,
    /// `G` came from the asymptotic sampler rather than exact enumeration.
    pub approximate: bool,
}

/// Completion retries from `G_I` before the asymptotic kernel gives up.
pub const COMPLETION_RETRIES: u32 = 50;

const P_M_SAMPLES: u64 = 16;

/// Reusable coupling engine for one `(d, params, modes)` combination.
#[derive(Clone, Debug)]
pub struct Coupler {
    d: DegreeSequence,
    params: CouplingParams,
    model: ProbModel,
    denom: EtaDenominatorMode,
    proposal: PairProposal,
    l_law: SymmetricProbMatrix,
    exact_family: Option<GraphFamily>,
    fallback_sampler: SeqSampler,
}

impl Coupler {
    pub fn new(
        d: &DegreeSequence,
        params: CouplingParams,
        prob_mode: SeqSampleMode,
        denom: EtaDenominatorMode,
        cfg: &OracleConfig,
    ) -> Result<Self> {
        if !d.is_graphical() {
            return Err(Error::NotGraphical);
        }
        if params.accept.n() != d.len() {
            return Err(Error::DimensionMismatch(params.accept.n(), d.len()));
        }
        let proposal = PairProposal::new(d)?;
        let l_law = coupled_law(d, &params)?;
        let model = ProbModel::new(d, prob_mode, cfg)?;
        let exact_family = match &model {
            ProbModel::Oracle(f) => Some(f.clone()),
            ProbModel::Asymptotic if cfg.admits(d.len()) => crate::oracle::enumerate_graphs(d, &[], &[], cfg).ok(),
            ProbModel::Asymptotic => None,
        };
        Ok(Coupler {
            d: d.clone(),
            params,
            model,
            denom,
            proposal,
            l_law,
            exact_family,
            fallback_sampler: SeqSampler::new(d, SeqSampleMode::Asymptotic, cfg)?,
        })
    }

    pub fn params(&self) -> &CouplingParams {
        &self.params
    }

    /// `f_c(Λ ⊙ Q)` with `f(x) = 1 - exp(-λx)`: the target law of `G_L`.
    pub fn l_law(&self) -> &SymmetricProbMatrix {
        &self.l_law
    }

    pub fn ind_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<IndSample> {
        let (g, approximate) = match &self.exact_family {
            Some(fam) => (fam.sample(rng)?, false),
            None => (self.fallback_sampler.sample(rng, &[])?.graph, true),
        };
        let g_l = sample_gnw(&self.l_law, rng);
        Ok(IndSample { g_l, g, approximate })
    }

    fn eta(&self, state: &WorkingGraph, e: Edge, tracker: &mut Option<RatioTracker>) -> Result<f64> {
        let r = rho_in(&self.model, state, e)?;
        let denom = match (self.denom, &self.model) {
            (EtaDenominatorMode::ExactMax, _) => exact_max_rho(&self.model, state),
            (EtaDenominatorMode::CertifiedBound, ProbModel::Asymptotic) => {
                asymptotic_bound(state, tracker.as_mut().expect("tracker present"))
            }
            (EtaDenominatorMode::CertifiedBound, ProbModel::Oracle(_)) => oracle_bound(state),
        };
        match denom {
            Ok(b) => Ok((r / b).min(1.0)),
            // every non-edge has conditional probability 0
            Err(Error::NoEligiblePair) => Ok(0.0),
            Err(e) => Err(e),
        }
    }

    pub fn run<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CouplingOutcome> {
        let n = self.d.len();
        let budget = sample_poisson(self.params.lambda, rng)?;
        let mut trace = CouplingTrace {
            steps_budget: budget,
            fallback: false,
            fallback_step: None,
            fallback_reason: None,
            steps_total: 0,
            eta_min: 1.0,
            rejections_g: 0,
            rejections_l_only: 0,
            duplicate_hits: 0,
            loop_insertions: 0,
            completion_insertions: 0,
            completion_restarts: 0,
            p_m_checkpoints: Vec::new(),
            prob_mode: self.model.mode(),
            denom_mode: self.denom,
            approximate: self.model.mode() == SeqSampleMode::Asymptotic,
        };
        let mut state = WorkingGraph::new(&self.d);
        let mut l = SimpleGraph::empty(n);
        let mut tracker = match (self.denom, &self.model) {
            (EtaDenominatorMode::CertifiedBound, ProbModel::Asymptotic) => Some(RatioTracker::new(&state)),
            _ => None,
        };
        let stride = (budget / P_M_SAMPLES).max(1);

        for step in 1..=budget {
            trace.steps_total = step;
            let e = self.proposal.sample(rng);
            let u: f64 = rng.random();
            let lam = self.params.accept.at(e);
            if state.contains(e) {
                trace.duplicate_hits += 1;
                if u < lam {
                    l.insert(e);
                }
            } else {
                let eta = self.eta(&state, e, &mut tracker)?;
                trace.eta_min = trace.eta_min.min(eta);
                if eta < lam {
                    trace.fallback = true;
                    trace.fallback_step = Some(step);
                    trace.fallback_reason = Some(FallbackReason::EtaBelowLambda);
                    return self.fallback(trace, rng);
                }
                if u < eta {
                    state.insert(e);
                    trace.loop_insertions += 1;
                    if let Some(t) = tracker.as_mut() {
                        t.update(&state, e.lo());
                        t.update(&state, e.hi());
                    }
                    if u < lam {
                        l.insert(e);
                    } else {
                        trace.rejections_l_only += 1;
                    }
                } else {
                    trace.rejections_g += 1;
                }
            }
            if u < lam && !state.contains(e) {
                return Err(Error::Invariant(format!("edge {e} entered G_L without G at step {step}")));
            }
            if step % stride == 0 || step == budget {
                trace.p_m_checkpoints.push((step, state.p_m()));
            }
        }

        let target = self.d.edge_target();
        let after_loop = state.clone();
        loop {
            let mut stuck = false;
            while state.edge_count() < target {
                match self.model.sample_next(&state, rng) {
                    Some(e) => state.insert(e),
                    None => {
                        stuck = true;
                        break;
                    }
                }
            }
            if !stuck {
                break;
            }
            if self.model.mode() == SeqSampleMode::ExactOracle {
                return Err(Error::Invariant("oracle completion reached a dead end".into()));
            }
            trace.completion_restarts += 1;
            if trace.completion_restarts > COMPLETION_RETRIES {
                trace.fallback = true;
                trace.fallback_step = Some(budget);
                trace.fallback_reason = Some(FallbackReason::CompletionStuck);
                return self.fallback(trace, rng);
            }
            state = after_loop.clone();
        }
        trace.completion_insertions = (state.edge_count() - after_loop.edge_count()) as u64;
        trace.steps_total = budget + trace.completion_insertions;

        let g = state.to_graph();
        if !l.is_subgraph_of(&g) {
            return Err(Error::Invariant("G_L is not contained in G".into()));
        }
        Ok(CouplingOutcome { g_l: l, g, trace })
    }

    fn fallback<R: Rng + ?Sized>(&self, mut trace: CouplingTrace, rng: &mut R) -> Result<CouplingOutcome> {
        let ind = self.ind_sample(rng)?;
        trace.approximate |= ind.approximate;
        Ok(CouplingOutcome {
            g_l: ind.g_l,
            g: ind.g,
            trace,
        })
    }
}

/// `f_c(Λ ⊙ Q(d))` with `f(x) = 1 - exp(-λx)`.
pub fn coupled_law(d: &DegreeSequence, params: &CouplingParams) -> Result<SymmetricProbMatrix> {
    f_c_transform(&hadamard(&params.accept, &q_matrix(d)?)?, params.lambda)
}

pub fn run_coupling<R: Rng + ?Sized>(
    d: &DegreeSequence,
    params: &CouplingParams,
    prob_mode: SeqSampleMode,
    denom_mode: EtaDenominatorMode,
    rng: &mut R,
    cfg: &OracleConfig,
) -> Result<CouplingOutcome> {
    Coupler::new(d, params.clone(), prob_mode, denom_mode, cfg)?.run(rng)
}

/// IndSample: independent `G_L ~ G(n, f_c(Λ⊙Q))` and `G ~ G(n,d)`, the latter
/// exact when `n` is within the oracle cap.
pub fn ind_sample<R: Rng + ?Sized>(
    d: &DegreeSequence,
    params: &CouplingParams,
    rng: &mut R,
    cfg: &OracleConfig,
) -> Result<IndSample> {
    Coupler::new(d, params.clone(), SeqSampleMode::Asymptotic, EtaDenominatorMode::CertifiedBound, cfg)?
        .ind_sample(rng)
}
