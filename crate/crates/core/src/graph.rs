//! Degree sequences, labeled simple graphs and symmetric edge-probability
//! matrices, together with the closed-form matrix constructors.
//!
//! Vertices are zero-based everywhere.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Unordered vertex pair `{lo, hi}` with `lo < hi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    lo: u32,
    hi: u32,
}

impl Edge {
    /// Builds the pair `{j, k}` in either order.
    ///
    /// Panics when `j == k`; use [`Edge::try_new`] for untrusted input.
    pub fn new(j: usize, k: usize) -> Self {
        Self::try_new(j, k).expect("edge endpoints must differ")
    }

    pub fn try_new(j: usize, k: usize) -> Result<Self> {
        if j == k {
            return Err(Error::SelfLoop(j));
        }
        let (lo, hi) = if j < k { (j, k) } else { (k, j) };
        Ok(Edge {
            lo: lo as u32,
            hi: hi as u32,
        })
    }

    #[inline]
    pub fn lo(self) -> usize {
        self.lo as usize
    }

    #[inline]
    pub fn hi(self) -> usize {
        self.hi as usize
    }

    /// Position of this pair in the row-major upper triangle of an `n x n`
    /// matrix, i.e. `(0,1), (0,2), .., (0,n-1), (1,2), ..`.
    #[inline]
    pub fn pair_index(self, n: usize) -> usize {
        pair_index(n, self.lo(), self.hi())
    }

    /// Inverse of [`Edge::pair_index`].
    pub fn from_pair_index(n: usize, mut idx: usize) -> Self {
        let mut lo = 0;
        loop {
            let row = n - lo - 1;
            if idx < row {
                return Edge::new(lo, lo + 1 + idx);
            }
            idx -= row;
            lo += 1;
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.lo, self.hi)
    }
}

#[inline]
pub(crate) fn pair_index(n: usize, lo: usize, hi: usize) -> usize {
    debug_assert!(lo < hi && hi < n);
    lo * (2 * n - lo - 1) / 2 + (hi - lo - 1)
}

/// Number of unordered pairs on `n` vertices.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Iterates all pairs of `[n]` in lexicographic order.
pub fn all_pairs(n: usize) -> impl Iterator<Item = Edge> {
    (0..n).flat_map(move |j| (j + 1..n).map(move |k| Edge::new(j, k)))
}

/// Summary statistics of a degree sequence, computed on a descending-sorted copy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub sum: u64,
    pub max: u32,
    pub min: u32,
    /// Sum of the `max` largest degrees.
    pub j: u64,
}

/// A degree sequence `d` on `n = d.len()` vertices. Every entry is below `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct DegreeSequence(Vec<u32>);

impl TryFrom<Vec<u32>> for DegreeSequence {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        DegreeSequence::new(v)
    }
}

impl From<DegreeSequence> for Vec<u32> {
    fn from(d: DegreeSequence) -> Self {
        d.0
    }
}

impl DegreeSequence {
    pub fn new(degrees: Vec<u32>) -> Result<Self> {
        let n = degrees.len();
        if let Some((vertex, &degree)) = degrees.iter().enumerate().find(|(_, &x)| x as usize >= n) {
            return Err(Error::DegreeOutOfRange { vertex, degree, n });
        }
        Ok(DegreeSequence(degrees))
    }

    /// `d`-regular sequence on `n` vertices.
    pub fn regular(n: usize, d: u32) -> Result<Self> {
        Self::new(vec![d; n])
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn degrees(&self) -> &[u32] {
        &self.0
    }

    #[inline]
    pub fn get(&self, v: usize) -> u32 {
        self.0[v]
    }

    /// `‖d‖₁`.
    pub fn total(&self) -> u64 {
        self.0.iter().map(|&x| x as u64).sum()
    }

    pub fn has_even_sum(&self) -> bool {
        self.total().is_multiple_of(2)
    }

    /// Number of edges of any realization, `‖d‖₁ / 2`.
    pub fn edge_target(&self) -> usize {
        (self.total() / 2) as usize
    }

    /// Number of strictly positive entries.
    pub fn positive_count(&self) -> usize {
        self.0.iter().filter(|&&x| x > 0).count()
    }

    pub fn stats(&self) -> DegreeStats {
        let mut sorted = self.0.clone();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        let max = sorted.first().copied().unwrap_or(0);
        let min = sorted.last().copied().unwrap_or(0);
        let j = sorted.iter().take(max as usize).map(|&x| x as u64).sum();
        DegreeStats {
            sum: self.total(),
            max,
            min,
            j,
        }
    }

    /// Erdős–Gallai test: true iff a simple graph on `n` vertices realizes `d`.
    pub fn is_graphical(&self) -> bool {
        is_graphical(&self.0)
    }

    /// `Σ_{k<ℓ} d_k d_ℓ`, the normalizer of the proposal law.
    pub fn pair_product_sum(&self) -> f64 {
        let s = self.total() as f64;
        let sq: f64 = self.0.iter().map(|&x| (x as f64) * (x as f64)).sum();
        (s * s - sq) / 2.0
    }
}

/// Erdős–Gallai criterion on an arbitrary non-negative sequence.
pub fn is_graphical(degrees: &[u32]) -> bool {
    let n = degrees.len();
    let mut d: Vec<u64> = degrees.iter().map(|&x| x as u64).collect();
    d.sort_unstable_by(|a, b| b.cmp(a));
    let total: u64 = d.iter().sum();
    if !total.is_multiple_of(2) {
        return false;
    }
    if d.first().is_some_and(|&x| x as usize >= n.max(1)) && total > 0 {
        return false;
    }
    let mut prefix = 0u64;
    for k in 1..=n {
        prefix += d[k - 1];
        let k64 = k as u64;
        let tail: u64 = d[k..].iter().map(|&x| x.min(k64)).sum();
        if prefix > k64 * (k64 - 1) + tail {
            return false;
        }
    }
    true
}

/// Labeled simple graph on `n` vertices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SimpleGraph {
    n: usize,
    edges: BTreeSet<Edge>,
}

impl SimpleGraph {
    pub fn empty(n: usize) -> Self {
        SimpleGraph {
            n,
            edges: BTreeSet::new(),
        }
    }

    /// Builds a graph, rejecting loops, out-of-range vertices and repeated pairs.
    pub fn from_pairs<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = SimpleGraph::empty(n);
        for (j, k) in pairs {
            for v in [j, k] {
                if v >= n {
                    return Err(Error::VertexOutOfRange { vertex: v, n });
                }
            }
            let e = Edge::try_new(j, k)?;
            if !g.edges.insert(e) {
                return Err(Error::DuplicateEdge(e.lo(), e.hi()));
            }
        }
        Ok(g)
    }

    pub(crate) fn from_edge_set(n: usize, edges: BTreeSet<Edge>) -> Self {
        SimpleGraph { n, edges }
    }

    /// Graph whose edge set is the set bits of `mask` under [`Edge::pair_index`].
    pub fn from_mask(n: usize, mask: u64) -> Self {
        let mut edges = BTreeSet::new();
        let mut m = mask;
        while m != 0 {
            let bit = m.trailing_zeros() as usize;
            edges.insert(Edge::from_pair_index(n, bit));
            m &= m - 1;
        }
        SimpleGraph { n, edges }
    }

    /// Bitmask encoding; `None` when `n` has more than 64 pairs.
    pub fn to_mask(&self) -> Option<u64> {
        if pair_count(self.n) > 64 {
            return None;
        }
        Some(
            self.edges
                .iter()
                .fold(0u64, |acc, e| acc | (1u64 << e.pair_index(self.n))),
        )
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn contains(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    /// Adds `e`; returns false if it was already present.
    pub fn insert(&mut self, e: Edge) -> bool {
        assert!(e.hi() < self.n, "edge {e} out of range for n = {}", self.n);
        self.edges.insert(e)
    }

    pub fn remove(&mut self, e: Edge) -> bool {
        self.edges.remove(&e)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0u32; self.n];
        for e in &self.edges {
            deg[e.lo()] += 1;
            deg[e.hi()] += 1;
        }
        deg
    }

    pub fn is_subgraph_of(&self, other: &SimpleGraph) -> bool {
        self.n == other.n && self.edges.is_subset(&other.edges)
    }

    /// First edge of `self` missing from `other`.
    pub fn first_edge_not_in(&self, other: &SimpleGraph) -> Option<Edge> {
        self.edges.iter().copied().find(|e| !other.contains(*e))
    }
}

/// Symmetric `n x n` matrix with zero diagonal and entries in `[0,1]`,
/// stored as the strict upper triangle in row-major order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricProbMatrix {
    n: usize,
    upper: Vec<f64>,
}

impl SymmetricProbMatrix {
    pub fn zeros(n: usize) -> Self {
        SymmetricProbMatrix {
            n,
            upper: vec![0.0; pair_count(n)],
        }
    }

    pub fn constant(n: usize, value: f64) -> Result<Self> {
        Self::from_fn(n, |_, _| value)
    }

    /// Fills entry `(j,k)`, `j < k`, with `f(j,k)`; every value must lie in `[0,1]`.
    pub fn from_fn<F>(n: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> f64,
    {
        let mut upper = Vec::with_capacity(pair_count(n));
        for j in 0..n {
            for k in j + 1..n {
                let value = f(j, k);
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::EntryOutOfRange { i: j, j: k, value });
                }
                upper.push(value);
            }
        }
        Ok(SymmetricProbMatrix { n, upper })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `(i,j)`; zero on the diagonal.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.upper[pair_index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.upper[pair_index(self.n, j, i)],
        }
    }

    #[inline]
    pub fn at(&self, e: Edge) -> f64 {
        self.upper[e.pair_index(self.n)]
    }

    /// Upper-triangle entries in [`Edge::pair_index`] order.
    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn iter(&self) -> impl Iterator<Item = (Edge, f64)> + '_ {
        all_pairs(self.n).zip(self.upper.iter().copied())
    }

    /// Sum over unordered pairs.
    pub fn pair_sum(&self) -> f64 {
        self.upper.iter().sum()
    }

    fn map_entries<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        SymmetricProbMatrix {
            n: self.n,
            upper: self.upper.iter().map(|&x| f(x)).collect(),
        }
    }
}

/// `P(d)`: entry `d_i d_j / (‖d‖₁ + d_i d_j)`.
pub fn p_matrix(d: &DegreeSequence) -> SymmetricProbMatrix {
    let s = d.total() as f64;
    let deg = d.degrees();
    SymmetricProbMatrix::from_fn(d.len(), |j, k| {
        let prod = deg[j] as f64 * deg[k] as f64;
        if prod == 0.0 {
            0.0
        } else {
            prod / (s + prod)
        }
    })
    .expect("P(d) entries lie in [0,1)")
}

/// `Q(d)`: entry `d_i d_j / Σ_{k<ℓ} d_k d_ℓ`, a probability law over pairs.
pub fn q_matrix(d: &DegreeSequence) -> Result<SymmetricProbMatrix> {
    if d.positive_count() < 2 {
        return Err(Error::Degenerate);
    }
    let norm = d.pair_product_sum();
    let deg = d.degrees();
    SymmetricProbMatrix::from_fn(d.len(), |j, k| {
        (deg[j] as f64 * deg[k] as f64 / norm).min(1.0)
    })
}

/// Clamped Chung–Lu matrix `min(w_j w_k / ‖w‖₁, 1)`.
pub fn chung_lu_matrix(w: &[f64]) -> Result<SymmetricProbMatrix> {
    if let Some(&bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidParameter(format!("weight {bad} is not a non-negative real")));
    }
    let total: f64 = w.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroWeights);
    }
    SymmetricProbMatrix::from_fn(w.len(), |j, k| (w[j] * w[k] / total).min(1.0))
}

/// Entrywise `1 - exp(-scale * m)`.
pub fn f_c_transform(m: &SymmetricProbMatrix, scale: f64) -> Result<SymmetricProbMatrix> {
    if !(scale >= 0.0) {
        return Err(Error::InvalidParameter(format!("scale {scale} must be >= 0")));
    }
    Ok(m.map_entries(|x| -(-scale * x).exp_m1()))
}

/// Entrywise product.
pub fn hadamard(a: &SymmetricProbMatrix, b: &SymmetricProbMatrix) -> Result<SymmetricProbMatrix> {
    if a.n != b.n {
        return Err(Error::DimensionMismatch(a.n, b.n));
    }
    Ok(SymmetricProbMatrix {
        n: a.n,
        upper: a.upper.iter().zip(&b.upper).map(|(x, y)| x * y).collect(),
    })
}

/// Remaining degrees `t = d - d^H` and the mass fraction `p_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct Remaining {
    pub t: DegreeSequence,
    pub p_m: f64,
}

pub fn remaining_degrees(d: &DegreeSequence, h: &SimpleGraph) -> Result<Remaining> {
    if h.n() != d.len() {
        return Err(Error::DimensionMismatch(h.n(), d.len()));
    }
    let used = h.degrees();
    let mut t = Vec::with_capacity(d.len());
    for (vertex, (&dv, &hv)) in d.degrees().iter().zip(&used).enumerate() {
        if hv > dv {
            return Err(Error::NotPartialGraph { vertex, degree: dv });
        }
        t.push(dv - hv);
    }
    let total = d.total();
    let p_m = if total == 0 {
        0.0
    } else {
        (total as f64 - 2.0 * h.edge_count() as f64) / total as f64
    };
    Ok(Remaining {
        t: DegreeSequence(t),
        p_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ds(v: &[u32]) -> DegreeSequence {
        DegreeSequence::new(v.to_vec()).unwrap()
    }

    /// Exhaustive existence search over all graphs on `n` vertices.
    /// Every degree vector realized by some graph on `n` vertices.
    fn realizable_brute(n: usize) -> std::collections::HashSet<Vec<u32>> {
        let pairs: Vec<Edge> = all_pairs(n).collect();
        (0u64..1 << pairs.len())
            .map(|mask| {
                let mut deg = vec![0u32; n];
                for (b, e) in pairs.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        deg[e.lo()] += 1;
                        deg[e.hi()] += 1;
                    }
                }
                deg
            })
            .collect()
    }

    #[test]
    fn graphical_examples() {
        assert!(ds(&[3, 1, 1, 1]).is_graphical());
        assert!(ds(&[2, 2, 2]).is_graphical());
        assert!(!ds(&[3, 3, 1, 1]).is_graphical());
        assert!(!realizable_brute(4).contains(&vec![3, 3, 1, 1]));
        assert!(!ds(&[1, 0]).is_graphical());
        assert!(ds(&[]).is_graphical());
    }

    #[test]
    fn graphical_matches_exhaustive_search_up_to_six() {
        for n in 1..=6usize {
            let real = realizable_brute(n);
            let mut d = vec![0u32; n];
            loop {
                assert_eq!(is_graphical(&d), real.contains(&d), "{d:?}");
                let mut i = 0;
                while i < n && d[i] as usize == n - 1 {
                    d[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
                d[i] += 1;
            }
        }
    }

    #[test]
    fn stats_examples() {
        let s = ds(&[2, 2, 2]).stats();
        assert_eq!((s.sum, s.max, s.min, s.j), (6, 2, 2, 4));
        let s = ds(&[0, 0, 0]).stats();
        assert_eq!((s.sum, s.max, s.min, s.j), (0, 0, 0, 0));
        // unsorted input gives the same answer as the sorted one
        let s = ds(&[2, 1, 3, 2, 2]).stats();
        assert_eq!((s.sum, s.max, s.min, s.j), (10, 3, 1, 7));
    }

    #[test]
    fn degree_out_of_range_rejected() {
        assert!(matches!(
            DegreeSequence::new(vec![1, 2]),
            Err(Error::DegreeOutOfRange { vertex: 1, .. })
        ));
    }

    #[test]
    fn pair_index_roundtrip() {
        for n in 2..9 {
            for (i, e) in all_pairs(n).enumerate() {
                assert_eq!(e.pair_index(n), i);
                assert_eq!(Edge::from_pair_index(n, i), e);
            }
        }
    }

    #[test]
    fn p_matrix_examples() {
        let p = p_matrix(&ds(&[2, 2, 2]));
        for (_, v) in p.iter() {
            assert_relative_eq!(v, 0.4);
        }
        assert_eq!(p.get(1, 1), 0.0);
        assert_relative_eq!(p_matrix(&ds(&[1, 1])).get(0, 1), 1.0 / 3.0);
        let p = p_matrix(&ds(&[3, 3, 1, 1]));
        assert_relative_eq!(p.get(0, 1), 9.0 / 17.0);
    }

    #[test]
    fn q_matrix_examples() {
        let q = q_matrix(&ds(&[2, 2, 2])).unwrap();
        for (_, v) in q.iter() {
            assert_relative_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
        assert_relative_eq!(q_matrix(&ds(&[1, 1])).unwrap().get(0, 1), 1.0);
        let q = q_matrix(&ds(&[2, 1, 1])).unwrap();
        assert_relative_eq!(q.get(0, 1), 0.4, epsilon = 1e-15);
        assert_relative_eq!(q.get(0, 2), 0.4, epsilon = 1e-15);
        assert_relative_eq!(q.get(1, 2), 0.2, epsilon = 1e-15);
        assert!(matches!(q_matrix(&ds(&[1, 0, 0])), Err(Error::Degenerate)));
    }

    #[test]
    fn chung_lu_examples() {
        let w = chung_lu_matrix(&[2.0, 2.0, 2.0]).unwrap();
        assert_relative_eq!(w.get(0, 2), 4.0 / 6.0);
        assert_eq!(chung_lu_matrix(&[10.0, 10.0]).unwrap().get(0, 1), 1.0);
        assert_relative_eq!(chung_lu_matrix(&[1.0; 4]).unwrap().get(1, 3), 0.25);
        assert!(matches!(chung_lu_matrix(&[0.0, 0.0]), Err(Error::ZeroWeights)));
    }

    #[test]
    fn f_c_examples() {
        let z = SymmetricProbMatrix::zeros(4);
        assert_eq!(f_c_transform(&z, 3.0).unwrap(), z);
        let m = SymmetricProbMatrix::constant(3, 0.18).unwrap();
        // 1 - exp(-0.432), evaluated with mpmath at 30 digits
        assert_relative_eq!(f_c_transform(&m, 2.4).unwrap().get(0, 1), 0.350790623314853, epsilon = 1e-14);
        assert_eq!(f_c_transform(&m, 0.0).unwrap(), SymmetricProbMatrix::zeros(3));
        assert!(f_c_transform(&m, -1.0).is_err());
    }

    #[test]
    fn hadamard_examples() {
        let a = p_matrix(&ds(&[2, 2, 2]));
        let ones = SymmetricProbMatrix::constant(3, 1.0).unwrap();
        assert_eq!(hadamard(&a, &ones).unwrap(), a);
        let z = SymmetricProbMatrix::zeros(3);
        assert_eq!(hadamard(&a, &z).unwrap(), z);
        let q = q_matrix(&ds(&[2, 2, 2])).unwrap();
        assert_relative_eq!(hadamard(&a, &q).unwrap().get(0, 1), 2.0 / 15.0, epsilon = 1e-15);
        assert!(hadamard(&a, &SymmetricProbMatrix::zeros(4)).is_err());
    }

    #[test]
    fn remaining_examples() {
        let d = ds(&[1, 1, 1, 1]);
        let h = SimpleGraph::from_pairs(4, [(0, 1)]).unwrap();
        let r = remaining_degrees(&d, &h).unwrap();
        assert_eq!(r.t.degrees(), &[0, 0, 1, 1]);
        assert_relative_eq!(r.p_m, 0.5);

        let r = remaining_degrees(&d, &SimpleGraph::empty(4)).unwrap();
        assert_eq!(r.t, d);
        assert_eq!(r.p_m, 1.0);

        let tri = SimpleGraph::from_pairs(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let r = remaining_degrees(&ds(&[2, 2, 2]), &tri).unwrap();
        assert_eq!(r.t.degrees(), &[0, 0, 0]);
        assert_eq!(r.p_m, 0.0);

        let h = SimpleGraph::from_pairs(4, [(0, 1), (0, 2)]).unwrap();
        assert!(matches!(
            remaining_degrees(&d, &h),
            Err(Error::NotPartialGraph { vertex: 0, .. })
        ));
    }

    #[test]
    fn graph_construction_errors() {
        assert!(matches!(SimpleGraph::from_pairs(3, [(1, 1)]), Err(Error::SelfLoop(1))));
        assert!(matches!(
            SimpleGraph::from_pairs(3, [(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(0, 1))
        ));
        assert!(SimpleGraph::from_pairs(3, [(0, 3)]).is_err());
    }

    #[test]
    fn mask_roundtrip() {
        let g = SimpleGraph::from_pairs(5, [(0, 4), (1, 2), (3, 4)]).unwrap();
        assert_eq!(SimpleGraph::from_mask(5, g.to_mask().unwrap()), g);
        assert!(SimpleGraph::empty(12).to_mask().is_none());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn degree_vec() -> impl Strategy<Value = Vec<u32>> {
            (2usize..12).prop_flat_map(|n| proptest::collection::vec(0u32..n as u32, n))
        }

        proptest! {
            #[test]
            fn q_sums_to_one(d in degree_vec()) {
                let d = DegreeSequence::new(d).unwrap();
                prop_assume!(d.positive_count() >= 2);
                let q = q_matrix(&d).unwrap();
                prop_assert!((q.pair_sum() - 1.0).abs() < 1e-12);
            }

            #[test]
            fn f_c_in_unit_interval_and_monotone(
                d in degree_vec(),
                s1 in 0.0f64..50.0,
                s2 in 0.0f64..50.0,
            ) {
                let p = p_matrix(&DegreeSequence::new(d).unwrap());
                let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
                let a = f_c_transform(&p, lo).unwrap();
                let b = f_c_transform(&p, hi).unwrap();
                for (x, y) in a.upper().iter().zip(b.upper()) {
                    prop_assert!((0.0..1.0).contains(x));
                    prop_assert!(x <= y);
                }
            }

            #[test]
            fn remaining_plus_used_is_d(mask in any::<u64>(), n in 2usize..12) {
                let pairs = pair_count(n);
                let mask = if pairs >= 64 { mask } else { mask & ((1u64 << pairs) - 1) };
                let h = SimpleGraph::from_mask(n, mask);
                let d = DegreeSequence::new(h.degrees()).unwrap();
                let r = remaining_degrees(&d, &h).unwrap();
                prop_assert!(r.t.degrees().iter().all(|&x| x == 0));
                let mut g = h.clone();
                let first = h.edges().next();
                if let Some(e) = first {
                    g.remove(e);
                    let r = remaining_degrees(&d, &g).unwrap();
                    let used = g.degrees();
                    for v in 0..n {
                        prop_assert_eq!(r.t.get(v) + used[v], d.get(v));
                    }
                }
            }
        }
    }

    #[test]
    fn p_and_q_increase_with_product() {
        let base = ds(&[3, 2, 2, 1, 1, 1]);
        let bumped = ds(&[3, 2, 2, 2, 1, 1]);
        // P(d) entry (0,3) with denominator inputs ‖d‖₁ fixed at the bumped value
        let s = bumped.total() as f64;
        let f = |x: f64| x / (s + x);
        assert!(f(3.0 * 2.0) > f(3.0 * 1.0));
        assert!(p_matrix(&bumped).get(0, 3) > p_matrix(&base).get(0, 3));
        let qb = q_matrix(&bumped).unwrap();
        assert!(qb.get(0, 3) > qb.get(0, 4));
    }
}
