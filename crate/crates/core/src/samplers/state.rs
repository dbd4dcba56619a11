//! Mutable partial graph shared by the sequential samplers and the coupling,
//! and the two conditional edge-probability models that drive them.

use std::collections::{BTreeSet, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::proposal::Fenwick;
use crate::error::{Error, Result};
use crate::graph::{pair_count, DegreeSequence, Edge, SimpleGraph};
use crate::oracle::{enumerate_graphs, GraphFamily, OracleConfig};

/// Source of `P(jk ∈ G(n,d) | G ⊇ H)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeqSampleMode {
    /// Exact conditionals from full enumeration; `n` must be within the oracle cap.
    #[serde(alias = "exact")]
    ExactOracle,
    /// `t_j t_k / (‖t‖₁ + t_j t_k)` on remaining degrees; approximate.
    Asymptotic,
}

/// Partial graph `H` with remaining degrees `t = d - d^H` kept in sync.
#[derive(Clone, Debug)]
pub struct WorkingGraph {
    n: usize,
    d: Vec<u32>,
    t: Vec<u32>,
    weights: Fenwick,
    edges: HashSet<Edge>,
    order: Vec<Edge>,
    mask: u64,
    small: bool,
}

impl WorkingGraph {
    pub fn new(d: &DegreeSequence) -> Self {
        let n = d.len();
        WorkingGraph {
            n,
            d: d.degrees().to_vec(),
            t: d.degrees().to_vec(),
            weights: Fenwick::new(d.degrees()),
            edges: HashSet::new(),
            order: Vec::new(),
            mask: 0,
            small: pair_count(n) <= 64,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn contains(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.order.len()
    }

    #[inline]
    pub fn degree(&self, v: usize) -> u32 {
        self.d[v]
    }

    #[inline]
    pub fn remaining(&self, v: usize) -> u32 {
        self.t[v]
    }

    pub fn remaining_all(&self) -> &[u32] {
        &self.t
    }

    /// `‖t‖₁`.
    #[inline]
    pub fn remaining_total(&self) -> u64 {
        self.weights.total()
    }

    /// `p_m = (‖d‖₁ - 2m) / ‖d‖₁`.
    pub fn p_m(&self) -> f64 {
        let total: u64 = self.d.iter().map(|&x| x as u64).sum();
        if total == 0 {
            0.0
        } else {
            self.remaining_total() as f64 / total as f64
        }
    }

    /// Bitmask of the edge set; meaningful only when `n` has at most 64 pairs.
    #[inline]
    pub(crate) fn mask(&self) -> u64 {
        self.mask
    }

    /// Inserts a non-edge whose endpoints both have remaining degree.
    pub fn insert(&mut self, e: Edge) {
        let (j, k) = (e.lo(), e.hi());
        assert!(self.t[j] > 0 && self.t[k] > 0, "edge {e} exceeds a target degree");
        let fresh = self.edges.insert(e);
        assert!(fresh, "edge {e} inserted twice");
        self.order.push(e);
        self.t[j] -= 1;
        self.t[k] -= 1;
        self.weights.decrement(j);
        self.weights.decrement(k);
        if self.small {
            self.mask |= 1u64 << e.pair_index(self.n);
        }
    }

    /// Edges in insertion order.
    pub fn insertion_order(&self) -> &[Edge] {
        &self.order
    }

    pub fn to_graph(&self) -> SimpleGraph {
        SimpleGraph::from_edge_set(self.n, self.order.iter().copied().collect::<BTreeSet<_>>())
    }

    #[inline]
    pub(crate) fn sample_vertex_by_remaining<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.weights.sample(rng)
    }

    /// Non-edges `{j,k}` with `t_j, t_k >= 1`.
    pub fn eligible_pairs(&self) -> Vec<Edge> {
        let open: Vec<usize> = (0..self.n).filter(|&v| self.t[v] > 0).collect();
        let mut out = Vec::new();
        for (a, &j) in open.iter().enumerate() {
            for &k in &open[a + 1..] {
                let e = Edge::new(j, k);
                if !self.contains(e) {
                    out.push(e);
                }
            }
        }
        out
    }
}

/// Consecutive rejected proposals before the asymptotic kernel falls back to
/// an explicit scan of eligible pairs.
const SCAN_AFTER: u32 = 256;

/// Conditional edge-probability model, resolved once per degree sequence.
#[derive(Clone, Debug)]
pub enum ProbModel {
    Oracle(GraphFamily),
    Asymptotic,
}

impl ProbModel {
    pub fn new(d: &DegreeSequence, mode: SeqSampleMode, cfg: &OracleConfig) -> Result<Self> {
        match mode {
            SeqSampleMode::Asymptotic => Ok(ProbModel::Asymptotic),
            SeqSampleMode::ExactOracle => {
                let fam = enumerate_graphs(d, &[], &[], cfg)?;
                if fam.is_empty() {
                    return Err(Error::NotGraphical);
                }
                Ok(ProbModel::Oracle(fam))
            }
        }
    }

    pub fn mode(&self) -> SeqSampleMode {
        match self {
            ProbModel::Oracle(_) => SeqSampleMode::ExactOracle,
            ProbModel::Asymptotic => SeqSampleMode::Asymptotic,
        }
    }

    /// `P(e ∈ G(n,d) | G ⊇ state)` for a non-edge `e`.
    pub fn cond_prob(&self, state: &WorkingGraph, e: Edge) -> Result<f64> {
        match self {
            ProbModel::Oracle(fam) => fam.conditional_edge_prob(state.mask(), e),
            ProbModel::Asymptotic => Ok(asymptotic_prob(state, e)),
        }
    }

    /// Draws the next SeqSample-D edge: a non-edge with probability
    /// proportional to its conditional probability. `None` when no non-edge
    /// carries positive weight.
    pub fn sample_next<R: Rng + ?Sized>(&self, state: &WorkingGraph, rng: &mut R) -> Option<Edge> {
        match self {
            ProbModel::Oracle(fam) => oracle_next(fam, state, rng),
            ProbModel::Asymptotic => asymptotic_next(state, rng),
        }
    }
}

#[inline]
pub(crate) fn asymptotic_prob(state: &WorkingGraph, e: Edge) -> f64 {
    let tj = state.remaining(e.lo()) as f64;
    let tk = state.remaining(e.hi()) as f64;
    if tj == 0.0 || tk == 0.0 {
        return 0.0;
    }
    let prod = tj * tk;
    prod / (state.remaining_total() as f64 + prod)
}

fn oracle_next<R: Rng + ?Sized>(fam: &GraphFamily, state: &WorkingGraph, rng: &mut R) -> Option<Edge> {
    let n = state.n();
    let cond = state.mask();
    let mut counts = vec![0u64; pair_count(n)];
    for &m in fam.masks().iter().filter(|&&m| m & cond == cond) {
        let mut rest = m & !cond;
        while rest != 0 {
            counts[rest.trailing_zeros() as usize] += 1;
            rest &= rest - 1;
        }
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return None;
    }
    let mut target = rng.random_range(0..total);
    for (idx, &c) in counts.iter().enumerate() {
        if target < c {
            return Some(Edge::from_pair_index(n, idx));
        }
        target -= c;
    }
    unreachable!("target below total")
}

/// Rejection sampler: propose `{j,k}` with probability proportional to
/// `t_j t_k`, drop loops and existing edges, accept with
/// `‖t‖₁ / (‖t‖₁ + t_j t_k)`. Accepted pairs have law proportional to
/// `t_j t_k / (‖t‖₁ + t_j t_k)` over eligible non-edges.
fn asymptotic_next<R: Rng + ?Sized>(state: &WorkingGraph, rng: &mut R) -> Option<Edge> {
    if state.remaining_total() == 0 {
        return None;
    }
    let total = state.remaining_total() as f64;
    for _ in 0..SCAN_AFTER {
        let j = state.sample_vertex_by_remaining(rng);
        let k = state.sample_vertex_by_remaining(rng);
        if j == k {
            continue;
        }
        let e = Edge::new(j, k);
        if state.contains(e) {
            continue;
        }
        let prod = state.remaining(j) as f64 * state.remaining(k) as f64;
        if rng.random::<f64>() * (total + prod) < total {
            return Some(e);
        }
    }
    let pairs = state.eligible_pairs();
    if pairs.is_empty() {
        return None;
    }
    let weights: Vec<f64> = pairs.iter().map(|&e| asymptotic_prob(state, e)).collect();
    let sum: f64 = weights.iter().sum();
    let mut target = rng.random::<f64>() * sum;
    for (e, w) in pairs.iter().zip(&weights) {
        if target < *w {
            return Some(*e);
        }
        target -= w;
    }
    pairs.last().copied()
}
