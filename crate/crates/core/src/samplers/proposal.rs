use rand::distr::Distribution;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;

use crate::error::{Error, Result};
use crate::graph::{DegreeSequence, Edge};

/// Draws unordered pairs `{j,k}` with probability `Q(d)_{jk}`.
///
/// Two independent vertex draws proportional to degree, retried while they
/// coincide. Conditioning the ordered pair on `j != k` leaves mass
/// `2 d_j d_k / (‖d‖₁² - Σ d_i²)` on `{j,k}`, which is exactly `Q(d)`.
#[derive(Clone, Debug)]
pub struct PairProposal {
    alias: WeightedAliasIndex<u64>,
}

impl PairProposal {
    pub fn new(d: &DegreeSequence) -> Result<Self> {
        if d.positive_count() < 2 {
            return Err(Error::Degenerate);
        }
        let weights: Vec<u64> = d.degrees().iter().map(|&x| x as u64).collect();
        let alias = WeightedAliasIndex::new(weights).map_err(|_| Error::Degenerate)?;
        Ok(PairProposal { alias })
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Edge {
        loop {
            let j = self.alias.sample(rng);
            let k = self.alias.sample(rng);
            if j != k {
                return Edge::new(j, k);
            }
        }
    }
}

/// One draw from `Q(d)`.
pub fn sample_weighted_edge<R: Rng + ?Sized>(d: &DegreeSequence, rng: &mut R) -> Result<Edge> {
    Ok(PairProposal::new(d)?.sample(rng))
}

/// Fenwick tree over integer vertex weights supporting point updates and
/// sampling proportional to weight.
#[derive(Clone, Debug)]
pub(crate) struct Fenwick {
    tree: Vec<u64>,
    total: u64,
    top: usize,
}

impl Fenwick {
    pub(crate) fn new(weights: &[u32]) -> Self {
        let n = weights.len();
        let mut tree = vec![0u64; n + 1];
        for (i, &w) in weights.iter().enumerate() {
            tree[i + 1] += w as u64;
            let parent = (i + 1) + ((i + 1) & (i + 1).wrapping_neg());
            if parent <= n {
                tree[parent] += tree[i + 1];
            }
        }
        let top = if n == 0 { 0 } else { 1 << (usize::BITS - 1 - n.leading_zeros()) };
        Fenwick {
            tree,
            total: weights.iter().map(|&w| w as u64).sum(),
            top,
        }
    }

    #[inline]
    pub(crate) fn total(&self) -> u64 {
        self.total
    }

    pub(crate) fn decrement(&mut self, i: usize) {
        self.total -= 1;
        let mut pos = i + 1;
        while pos < self.tree.len() {
            self.tree[pos] -= 1;
            pos += pos & pos.wrapping_neg();
        }
    }

    /// Index `i` such that prefix(i) <= target < prefix(i+1).
    pub(crate) fn find(&self, mut target: u64) -> usize {
        debug_assert!(target < self.total);
        let mut pos = 0usize;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos
    }

    #[inline]
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.find(rng.random_range(0..self.total))
    }
}
