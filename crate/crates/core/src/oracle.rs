//! Exact ground truth for small `n`: enumerate every graph with a given
//! degree sequence and read off marginals, conditionals and sub-laws.
//!
//! Graphs are encoded as `u64` bitmasks over [`Edge::pair_index`], which
//! bounds `n` at 11 (55 pairs). The default cap is 10.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{all_pairs, pair_count, DegreeSequence, Edge, SimpleGraph, SymmetricProbMatrix};

/// Environment variable overriding [`OracleConfig::max_n`].
pub const ORACLE_CAP_ENV: &str = "DEGSEQ_ORACLE_CAP";

const HARD_MAX_N: usize = 11;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    pub max_n: usize,
    pub max_family: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_n: 10,
            max_family: 5_000_000,
        }
    }
}

impl OracleConfig {
    /// Default caps, with `max_n` taken from `DEGSEQ_ORACLE_CAP` when set.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Some(n) = std::env::var(ORACLE_CAP_ENV).ok().and_then(|v| v.trim().parse().ok()) {
            cfg.max_n = n;
        }
        cfg
    }

    pub fn check_n(&self, n: usize) -> Result<()> {
        let cap = self.max_n.min(HARD_MAX_N);
        if n > cap {
            return Err(Error::OracleCapExceeded { n, cap });
        }
        Ok(())
    }

    pub fn admits(&self, n: usize) -> bool {
        self.check_n(n).is_ok()
    }
}

/// All graphs with a fixed degree sequence, sorted by bitmask.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphFamily {
    n: usize,
    masks: Vec<u64>,
}

impl GraphFamily {
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }

    pub fn members(&self) -> impl Iterator<Item = SimpleGraph> + '_ {
        self.masks.iter().map(move |&m| SimpleGraph::from_mask(self.n, m))
    }

    /// Number of members containing every edge of `sub`.
    pub fn count_containing(&self, sub: u64) -> u64 {
        self.masks.iter().filter(|&&m| m & sub == sub).count() as u64
    }

    /// Members containing `sub`, as a new family.
    pub fn restrict(&self, sub: u64) -> GraphFamily {
        GraphFamily {
            n: self.n,
            masks: self.masks.iter().copied().filter(|&m| m & sub == sub).collect(),
        }
    }

    /// Per-pair membership counts, indexed by pair index.
    pub fn edge_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; pair_count(self.n)];
        for &m in &self.masks {
            let mut rest = m;
            while rest != 0 {
                counts[rest.trailing_zeros() as usize] += 1;
                rest &= rest - 1;
            }
        }
        counts
    }

    /// `P(e ∈ G | G ⊇ cond)` for a uniform member `G`.
    pub fn conditional_edge_prob(&self, cond: u64, e: Edge) -> Result<f64> {
        let bit = 1u64 << e.pair_index(self.n);
        if cond & bit != 0 {
            return Err(Error::EdgeInCondition(e.lo(), e.hi()));
        }
        let base = self.count_containing(cond);
        if base == 0 {
            return Err(Error::EmptyConditioning);
        }
        Ok(self.count_containing(cond | bit) as f64 / base as f64)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SimpleGraph> {
        if self.masks.is_empty() {
            return Err(Error::NotGraphical);
        }
        let idx = rng.random_range(0..self.masks.len());
        Ok(SimpleGraph::from_mask(self.n, self.masks[idx]))
    }
}

fn constraint_mask(n: usize, edges: &[Edge]) -> Result<u64> {
    let mut mask = 0u64;
    for e in edges {
        if e.hi() >= n {
            return Err(Error::VertexOutOfRange { vertex: e.hi(), n });
        }
        mask |= 1u64 << e.pair_index(n);
    }
    Ok(mask)
}

/// Backtracking enumeration over pairs in lexicographic order, pruning any
/// branch where a vertex needs more edges than it has undecided pairs left.
pub fn enumerate_graphs(
    d: &DegreeSequence,
    forced: &[Edge],
    forbidden: &[Edge],
    cfg: &OracleConfig,
) -> Result<GraphFamily> {
    let n = d.len();
    cfg.check_n(n)?;
    let forced = constraint_mask(n, forced)?;
    let forbidden = constraint_mask(n, forbidden)?;
    if forced & forbidden != 0 {
        return Err(Error::ConflictingConstraints);
    }
    let pairs: Vec<(usize, usize)> = all_pairs(n).map(|e| (e.lo(), e.hi())).collect();
    let mut search = Backtrack {
        pairs: &pairs,
        forced,
        forbidden,
        rem: d.degrees().iter().map(|&x| x as i64).collect(),
        open: vec![n.saturating_sub(1) as i64; n],
        out: Vec::new(),
        cap: cfg.max_family,
    };
    if d.has_even_sum() && search.rem.iter().zip(&search.open).all(|(r, o)| r <= o) {
        search.run(0, 0)?;
    }
    let mut masks = search.out;
    masks.sort_unstable();
    Ok(GraphFamily { n, masks })
}

struct Backtrack<'a> {
    pairs: &'a [(usize, usize)],
    forced: u64,
    forbidden: u64,
    rem: Vec<i64>,
    open: Vec<i64>,
    out: Vec<u64>,
    cap: usize,
}

impl Backtrack<'_> {
    fn run(&mut self, idx: usize, mask: u64) -> Result<()> {
        if idx == self.pairs.len() {
            if self.rem.iter().all(|&r| r == 0) {
                if self.out.len() >= self.cap {
                    return Err(Error::FamilyCapExceeded { cap: self.cap });
                }
                self.out.push(mask);
            }
            return Ok(());
        }
        let (j, k) = self.pairs[idx];
        let bit = 1u64 << idx;
        self.open[j] -= 1;
        self.open[k] -= 1;

        if self.forbidden & bit == 0 && self.rem[j] > 0 && self.rem[k] > 0 {
            self.rem[j] -= 1;
            self.rem[k] -= 1;
            if self.rem[j] <= self.open[j] && self.rem[k] <= self.open[k] {
                self.run(idx + 1, mask | bit)?;
            }
            self.rem[j] += 1;
            self.rem[k] += 1;
        }
        if self.forced & bit == 0 && self.rem[j] <= self.open[j] && self.rem[k] <= self.open[k] {
            self.run(idx + 1, mask)?;
        }

        self.open[j] += 1;
        self.open[k] += 1;
        Ok(())
    }
}

/// Independent cross-check: scan all `2^(n choose 2)` edge subsets. Only for `n <= 7`.
pub fn enumerate_graphs_raw(d: &DegreeSequence, forced: &[Edge], forbidden: &[Edge]) -> Result<GraphFamily> {
    let n = d.len();
    if n > 7 {
        return Err(Error::OracleCapExceeded { n, cap: 7 });
    }
    let forced = constraint_mask(n, forced)?;
    let forbidden = constraint_mask(n, forbidden)?;
    if forced & forbidden != 0 {
        return Err(Error::ConflictingConstraints);
    }
    let pairs: Vec<Edge> = all_pairs(n).collect();
    let target = d.degrees();
    let mut masks = Vec::new();
    let mut deg = vec![0u32; n];
    for mask in 0u64..(1u64 << pairs.len()) {
        if mask & forced != forced || mask & forbidden != 0 {
            continue;
        }
        deg.iter_mut().for_each(|x| *x = 0);
        for (b, e) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                deg[e.lo()] += 1;
                deg[e.hi()] += 1;
            }
        }
        if deg == target {
            masks.push(mask);
        }
    }
    Ok(GraphFamily { n, masks })
}

/// Raw scan of every graph on `n <= 7` vertices, bucketed by degree vector.
pub fn enumerate_all_by_degrees(n: usize) -> Result<BTreeMap<Vec<u32>, Vec<u64>>> {
    if n > 7 {
        return Err(Error::OracleCapExceeded { n, cap: 7 });
    }
    let pairs: Vec<Edge> = all_pairs(n).collect();
    let mut out: BTreeMap<Vec<u32>, Vec<u64>> = BTreeMap::new();
    for mask in 0u64..(1u64 << pairs.len()) {
        let mut deg = vec![0u32; n];
        for (b, e) in pairs.iter().enumerate() {
            if mask >> b & 1 == 1 {
                deg[e.lo()] += 1;
                deg[e.hi()] += 1;
            }
        }
        out.entry(deg).or_default().push(mask);
    }
    Ok(out)
}

fn full_family(d: &DegreeSequence, cfg: &OracleConfig) -> Result<GraphFamily> {
    let fam = enumerate_graphs(d, &[], &[], cfg)?;
    if fam.is_empty() {
        return Err(Error::NotGraphical);
    }
    Ok(fam)
}

/// `W*(d)`: fraction of realizations containing each pair.
pub fn exact_edge_marginals(d: &DegreeSequence, cfg: &OracleConfig) -> Result<SymmetricProbMatrix> {
    let fam = full_family(d, cfg)?;
    Ok(marginals_of(&fam))
}

pub(crate) fn marginals_of(fam: &GraphFamily) -> SymmetricProbMatrix {
    let counts = fam.edge_counts();
    let total = fam.len() as f64;
    let mut it = counts.into_iter();
    SymmetricProbMatrix::from_fn(fam.n(), |_, _| it.next().unwrap() as f64 / total)
        .expect("fractions lie in [0,1]")
}

/// `P(jk ∈ G(n,d) | G(n,d) ⊇ H)`.
pub fn exact_conditional_edge_prob(d: &DegreeSequence, h: &SimpleGraph, jk: Edge, cfg: &OracleConfig) -> Result<f64> {
    cfg.check_n(d.len())?;
    if h.n() != d.len() {
        return Err(Error::DimensionMismatch(h.n(), d.len()));
    }
    if h.contains(jk) {
        return Err(Error::EdgeInCondition(jk.lo(), jk.hi()));
    }
    let forced: Vec<Edge> = h.edges().collect();
    let fam = enumerate_graphs(d, &forced, &[], cfg)?;
    if fam.is_empty() {
        return Err(Error::EmptyConditioning);
    }
    let bit = 1u64 << jk.pair_index(d.len());
    Ok(fam.count_containing(bit) as f64 / fam.len() as f64)
}

/// Uniform draw from `G(n,d)` by enumeration.
pub fn exact_uniform_sample<R: Rng + ?Sized>(d: &DegreeSequence, rng: &mut R, cfg: &OracleConfig) -> Result<SimpleGraph> {
    full_family(d, cfg)?.sample(rng)
}

/// Exact law of a graph-valued random variable.
#[derive(Clone, Debug, PartialEq)]
pub struct GraphLaw {
    n: usize,
    masses: BTreeMap<SimpleGraph, f64>,
}

impl GraphLaw {
    pub fn new(n: usize, masses: BTreeMap<SimpleGraph, f64>) -> Self {
        GraphLaw { n, masses }
    }

    /// Uniform law over a family.
    pub fn uniform(fam: &GraphFamily) -> Self {
        let p = 1.0 / fam.len() as f64;
        GraphLaw {
            n: fam.n(),
            masses: fam.members().map(|g| (g, p)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support_size(&self) -> usize {
        self.masses.len()
    }

    pub fn mass(&self, g: &SimpleGraph) -> f64 {
        self.masses.get(g).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SimpleGraph, f64)> {
        self.masses.iter().map(|(g, &p)| (g, p))
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.values().sum()
    }
}

/// Law of `G(n,d,m)`: a uniform `m`-edge subgraph of a uniform realization.
/// Counts `(member, subset)` pairs in integers and divides once at the end.
pub fn exact_subgraph_law(d: &DegreeSequence, m: usize, cfg: &OracleConfig) -> Result<GraphLaw> {
    let max = d.edge_target();
    if m > max {
        return Err(Error::EdgeCountOutOfRange { m, max });
    }
    let fam = full_family(d, cfg)?;
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    let mut total = 0u64;
    for &member in fam.masks() {
        let bits: Vec<u32> = (0..64).filter(|b| member >> b & 1 == 1).collect();
        for_each_subset(bits.len(), m, |sel| {
            let sub = sel.iter().fold(0u64, |acc, &i| acc | 1u64 << bits[i]);
            *counts.entry(sub).or_default() += 1;
            total += 1;
        });
    }
    let n = d.len();
    let masses = counts
        .into_iter()
        .map(|(mask, c)| (SimpleGraph::from_mask(n, mask), c as f64 / total as f64))
        .collect();
    Ok(GraphLaw { n, masses })
}

/// Calls `f` with each `m`-subset of `0..len` in lexicographic order.
fn for_each_subset<F: FnMut(&[usize])>(len: usize, m: usize, mut f: F) {
    if m > len {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        f(&idx);
        let mut i = m;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + len - m {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..m {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ds(v: &[u32]) -> DegreeSequence {
        DegreeSequence::new(v.to_vec()).unwrap()
    }

    fn cfg() -> OracleConfig {
        OracleConfig::default()
    }

    #[test]
    fn family_sizes() {
        assert_eq!(enumerate_graphs(&ds(&[1, 1, 1, 1]), &[], &[], &cfg()).unwrap().len(), 3);
        assert_eq!(enumerate_graphs(&ds(&[2, 2, 2, 2]), &[], &[], &cfg()).unwrap().len(), 3);
        assert_eq!(enumerate_graphs(&ds(&[2, 2, 2, 2, 2]), &[], &[], &cfg()).unwrap().len(), 12);
        // 3-regular graphs on 6 labeled vertices
        assert_eq!(enumerate_graphs(&ds(&[3; 6]), &[], &[], &cfg()).unwrap().len(), 70);
        assert!(enumerate_graphs(&ds(&[3, 3, 1, 1]), &[], &[], &cfg()).unwrap().is_empty());
        assert!(enumerate_graphs(&ds(&[1, 1, 1]), &[], &[], &cfg()).unwrap().is_empty());
    }

    #[test]
    fn backtracking_matches_raw_scan() {
        for d in [vec![1, 1, 1, 1], vec![2, 2, 2, 2, 2], vec![3, 2, 2, 2, 1], vec![3, 3, 2, 2, 1, 1]] {
            let d = ds(&d);
            let a = enumerate_graphs(&d, &[], &[], &cfg()).unwrap();
            let b = enumerate_graphs_raw(&d, &[], &[]).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn forced_equals_filtered_subfamily() {
        let d = ds(&[2, 2, 2, 2, 1, 1]);
        let all = enumerate_graphs(&d, &[], &[], &cfg()).unwrap();
        for forced in [vec![Edge::new(0, 1)], vec![Edge::new(0, 1), Edge::new(2, 3)], vec![Edge::new(4, 5)]] {
            let f = enumerate_graphs(&d, &forced, &[], &cfg()).unwrap();
            let mask = forced.iter().fold(0, |a, e| a | 1u64 << e.pair_index(6));
            assert_eq!(f, all.restrict(mask));
            assert_eq!(f, enumerate_graphs_raw(&d, &forced, &[]).unwrap());
        }
        let forb = [Edge::new(0, 1)];
        let f = enumerate_graphs(&d, &[], &forb, &cfg()).unwrap();
        assert_eq!(f.len() as u64, all.len() as u64 - all.count_containing(1));
    }

    #[test]
    fn constraint_errors() {
        let d = ds(&[1, 1, 1, 1]);
        let e = [Edge::new(0, 1)];
        assert!(matches!(enumerate_graphs(&d, &e, &e, &cfg()), Err(Error::ConflictingConstraints)));
        let big = DegreeSequence::regular(11, 2).unwrap();
        assert!(matches!(
            enumerate_graphs(&big, &[], &[], &cfg()),
            Err(Error::OracleCapExceeded { n: 11, cap: 10 })
        ));
        let tiny = OracleConfig { max_n: 10, max_family: 2 };
        assert!(matches!(
            enumerate_graphs(&ds(&[2, 2, 2, 2]), &[], &[], &tiny),
            Err(Error::FamilyCapExceeded { cap: 2 })
        ));
    }

    #[test]
    fn marginals_examples() {
        assert_eq!(exact_edge_marginals(&ds(&[1, 1]), &cfg()).unwrap().get(0, 1), 1.0);
        let w = exact_edge_marginals(&ds(&[1, 1, 1, 1]), &cfg()).unwrap();
        for (_, v) in w.iter() {
            assert_relative_eq!(v, 1.0 / 3.0);
        }
        let w = exact_edge_marginals(&ds(&[2, 2, 2, 2]), &cfg()).unwrap();
        for (_, v) in w.iter() {
            assert_relative_eq!(v, 2.0 / 3.0);
        }
        assert!(matches!(exact_edge_marginals(&ds(&[3, 3, 1, 1]), &cfg()), Err(Error::NotGraphical)));
    }

    #[test]
    fn marginal_row_sums_equal_degrees() {
        for d in [vec![3, 2, 2, 2, 1], vec![2, 2, 2, 2, 2, 2, 2], vec![4, 3, 3, 2, 2, 1, 1]] {
            let d = ds(&d);
            let fam = enumerate_graphs(&d, &[], &[], &cfg()).unwrap();
            let counts = fam.edge_counts();
            let n = d.len();
            for j in 0..n {
                let row: u64 = (0..n).filter(|&k| k != j).map(|k| counts[Edge::new(j, k).pair_index(n)]).sum();
                assert_eq!(row, d.get(j) as u64 * fam.len() as u64);
            }
        }
    }

    #[test]
    fn conditional_examples() {
        let h = SimpleGraph::from_pairs(4, [(0, 1)]).unwrap();
        assert_eq!(exact_conditional_edge_prob(&ds(&[1, 1, 1, 1]), &h, Edge::new(2, 3), &cfg()).unwrap(), 1.0);
        let d = ds(&[2, 2, 2, 2]);
        let w = exact_edge_marginals(&d, &cfg()).unwrap();
        for e in all_pairs(4) {
            let p = exact_conditional_edge_prob(&d, &SimpleGraph::empty(4), e, &cfg()).unwrap();
            assert_relative_eq!(p, 2.0 / 3.0);
            assert_eq!(p, w.at(e));
        }
        let h = SimpleGraph::from_pairs(3, [(0, 1)]).unwrap();
        assert_eq!(exact_conditional_edge_prob(&ds(&[2, 2, 2]), &h, Edge::new(0, 2), &cfg()).unwrap(), 1.0);

        let h = SimpleGraph::from_pairs(4, [(0, 1), (0, 2)]).unwrap();
        assert!(matches!(
            exact_conditional_edge_prob(&ds(&[1, 1, 1, 1]), &h, Edge::new(2, 3), &cfg()),
            Err(Error::EmptyConditioning)
        ));
        let h = SimpleGraph::from_pairs(4, [(0, 1)]).unwrap();
        assert!(exact_conditional_edge_prob(&ds(&[1, 1, 1, 1]), &h, Edge::new(0, 1), &cfg()).is_err());
    }

    #[test]
    fn uniform_sample_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let single = SimpleGraph::from_pairs(2, [(0, 1)]).unwrap();
        assert_eq!(exact_uniform_sample(&ds(&[1, 1]), &mut rng, &cfg()).unwrap(), single);
        assert_eq!(exact_uniform_sample(&ds(&[0, 0, 0]), &mut rng, &cfg()).unwrap(), SimpleGraph::empty(3));

        let d = ds(&[2, 2, 2, 2]);
        let fam = enumerate_graphs(&d, &[], &[], &cfg()).unwrap();
        let mut counts = BTreeMap::new();
        for _ in 0..30_000 {
            *counts.entry(fam.sample(&mut rng).unwrap()).or_insert(0u32) += 1;
        }
        assert_eq!(counts.len(), 3);
        for (_, c) in counts {
            assert!((9_500..=10_500).contains(&c), "{c}");
        }
    }

    #[test]
    fn subgraph_law_examples() {
        let d = ds(&[1, 1, 1, 1]);
        let law = exact_subgraph_law(&d, 1, &cfg()).unwrap();
        assert_eq!(law.support_size(), 6);
        for (_, p) in law.iter() {
            assert_relative_eq!(p, 1.0 / 6.0);
        }
        let law = exact_subgraph_law(&d, 0, &cfg()).unwrap();
        assert_eq!(law.support_size(), 1);
        assert_eq!(law.mass(&SimpleGraph::empty(4)), 1.0);

        let d = ds(&[2, 2, 2, 2]);
        let full = exact_subgraph_law(&d, 4, &cfg()).unwrap();
        let fam = enumerate_graphs(&d, &[], &[], &cfg()).unwrap();
        assert_eq!(full, GraphLaw::uniform(&fam));

        // two-edge subgraphs of 4-cycles: 12 paths in one cycle each, 3 matchings in two each
        let law = exact_subgraph_law(&d, 2, &cfg()).unwrap();
        assert_eq!(law.support_size(), 15);
        let matching = SimpleGraph::from_pairs(4, [(0, 1), (2, 3)]).unwrap();
        let path = SimpleGraph::from_pairs(4, [(0, 1), (1, 2)]).unwrap();
        assert_relative_eq!(law.mass(&matching), 2.0 / 18.0);
        assert_relative_eq!(law.mass(&path), 1.0 / 18.0);
        assert!((law.total_mass() - 1.0).abs() < 1e-12);

        assert!(matches!(exact_subgraph_law(&d, 5, &cfg()), Err(Error::EdgeCountOutOfRange { .. })));
    }

    #[test]
    fn subset_iteration() {
        let mut seen = Vec::new();
        for_each_subset(4, 2, |s| seen.push(s.to_vec()));
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 1]);
        assert_eq!(seen[5], vec![2, 3]);
        let mut count = 0;
        for_each_subset(3, 0, |s| {
            assert!(s.is_empty());
            count += 1
        });
        assert_eq!(count, 1);
        let mut count = 0;
        for_each_subset(5, 5, |_| count += 1);
        assert_eq!(count, 1);
    }
}
