//! Verification statistics: edge marginals, chi-square goodness of fit,
//! pairwise edge covariances, containment and remaining-degree concentration.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use crate::coupling::CouplingParams;
use crate::error::{Error, Result};
use crate::graph::{all_pairs, p_matrix, pair_count, DegreeSequence, Edge, SimpleGraph, SymmetricProbMatrix};
use crate::oracle::GraphLaw;

/// Pass/fail thresholds used by every verification suite.
///
/// False-alarm rates under the null, per check: `|z| < 4.5` is about `7e-6`
/// per edge; `p > 0.01` is `0.01` per test; a `3σ` covariance band is about
/// `2.7e-3` per pair. Suites run with fixed seeds, so an outcome is
/// reproducible rather than re-drawn on each CI run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub z_max: f64,
    pub p_min: f64,
    pub cov_sigmas: f64,
    /// Chi-square categories with smaller expected count are pooled.
    pub min_expected: f64,
    /// Soft bound on the fraction of vertices outside the concentration band.
    pub concentration_max_fraction: f64,
}

pub const THRESHOLDS: Thresholds = Thresholds {
    z_max: 4.5,
    p_min: 0.01,
    cov_sigmas: 3.0,
    min_expected: 5.0,
    concentration_max_fraction: 0.01,
};

const EXACT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeMarginal {
    pub j: usize,
    pub k: usize,
    pub frequency: f64,
    pub reference: f64,
    /// `None` when the reference is 0 or 1.
    pub z: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalReport {
    pub edges: Vec<EdgeMarginal>,
    pub worst_abs_z: f64,
    /// Edges with reference 0 or 1 whose frequency differs from it.
    pub exact_mismatches: usize,
    pub n_runs: usize,
}

impl MarginalReport {
    pub fn passes(&self, z_max: f64) -> bool {
        self.exact_mismatches == 0 && self.worst_abs_z < z_max
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "j,k,frequency,reference,z")?;
        for e in &self.edges {
            let z = e.z.map(|z| z.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{},{},{}", e.j, e.k, e.frequency, e.reference, z)?;
        }
        Ok(())
    }
}

/// Streaming edge-indicator counts, so large runs need not keep every graph.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalCounter {
    n: usize,
    runs: usize,
    counts: Vec<u64>,
}

impl MarginalCounter {
    pub fn new(n: usize) -> Self {
        MarginalCounter {
            n,
            runs: 0,
            counts: vec![0; pair_count(n)],
        }
    }

    pub fn add(&mut self, g: &SimpleGraph) -> Result<()> {
        if g.n() != self.n {
            return Err(Error::MixedVertexCount);
        }
        self.runs += 1;
        for e in g.edges() {
            self.counts[e.pair_index(self.n)] += 1;
        }
        Ok(())
    }

    pub fn runs(&self) -> usize {
        self.runs
    }

    pub fn report(&self, reference: &SymmetricProbMatrix) -> Result<MarginalReport> {
        if reference.n() != self.n {
            return Err(Error::DimensionMismatch(reference.n(), self.n));
        }
        if self.runs == 0 {
            return Err(Error::InvalidParameter("no samples".into()));
        }
        let runs = self.runs as f64;
        let mut edges = Vec::with_capacity(self.counts.len());
        let mut worst = 0.0f64;
        let mut mismatches = 0;
        for ((e, p), &c) in reference.iter().zip(&self.counts) {
            let freq = c as f64 / runs;
            let z = if p <= EXACT_TOL || p >= 1.0 - EXACT_TOL {
                if (freq - p.round()).abs() > 0.0 {
                    mismatches += 1;
                }
                None
            } else {
                let z = (freq - p) / (p * (1.0 - p) / runs).sqrt();
                worst = worst.max(z.abs());
                Some(z)
            };
            edges.push(EdgeMarginal {
                j: e.lo(),
                k: e.hi(),
                frequency: freq,
                reference: p,
                z,
            });
        }
        Ok(MarginalReport {
            edges,
            worst_abs_z: worst,
            exact_mismatches: mismatches,
            n_runs: self.runs,
        })
    }
}

/// Per-edge frequencies against `reference`, z-scored with Bernoulli variance.
pub fn empirical_marginals(samples: &[SimpleGraph], reference: &SymmetricProbMatrix) -> Result<MarginalReport> {
    if samples.len() < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 samples, got {}", samples.len())));
    }
    let mut counter = MarginalCounter::new(reference.n());
    for g in samples {
        counter.add(g)?;
    }
    counter.report(reference)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GofReport {
    pub categories: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub n_runs: usize,
}

impl GofReport {
    pub fn passes(&self, p_min: f64) -> bool {
        self.p_value > p_min
    }
}

/// Pearson test of observed counts against category probabilities. Categories
/// whose expected count is below the pooling threshold are merged, smallest first.
pub fn chi_square_counts(observed: &[u64], probs: &[f64]) -> Result<GofReport> {
    if observed.len() != probs.len() {
        return Err(Error::DimensionMismatch(observed.len(), probs.len()));
    }
    let total: u64 = observed.iter().sum();
    let runs = total as f64;
    let mut cells: Vec<(f64, f64)> = observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| (o as f64, p * runs))
        .collect();
    cells.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut merged: Vec<(f64, f64)> = Vec::new();
    let mut pool = (0.0, 0.0);
    for (o, e) in cells {
        if pool.1 < THRESHOLDS.min_expected && (pool.1 > 0.0 || e < THRESHOLDS.min_expected) {
            pool.0 += o;
            pool.1 += e;
            continue;
        }
        merged.push((o, e));
    }
    if pool.1 > 0.0 || pool.0 > 0.0 {
        if pool.1 < THRESHOLDS.min_expected && !merged.is_empty() {
            merged[0].0 += pool.0;
            merged[0].1 += pool.1;
        } else {
            merged.push(pool);
        }
    }

    let categories = merged.len();
    let statistic: f64 = merged
        .iter()
        .map(|&(o, e)| if e > 0.0 { (o - e).powi(2) / e } else if o > 0.0 { f64::INFINITY } else { 0.0 })
        .sum();
    let p_value = if categories < 2 || statistic == 0.0 {
        1.0
    } else if statistic.is_infinite() {
        0.0
    } else {
        gamma_ur((categories - 1) as f64 / 2.0, statistic / 2.0).clamp(0.0, 1.0)
    };
    Ok(GofReport {
        categories,
        statistic,
        p_value,
        n_runs: total as usize,
    })
}

/// Chi-square test of graph samples against an exact law.
pub fn chi_square_gof(samples: &[SimpleGraph], law: &GraphLaw) -> Result<GofReport> {
    let index: BTreeMap<&SimpleGraph, usize> = law
        .iter()
        .filter(|(_, p)| *p > 0.0)
        .enumerate()
        .map(|(i, (g, _))| (g, i))
        .collect();
    let probs: Vec<f64> = law.iter().filter(|(_, p)| *p > 0.0).map(|(_, p)| p).collect();
    let mut observed = vec![0u64; probs.len()];
    for g in samples {
        match index.get(g) {
            Some(&i) => observed[i] += 1,
            None => return Err(Error::OutOfSupport),
        }
    }
    chi_square_counts(&observed, &probs)
}

/// Kolmogorov-Smirnov distance between a sample and Uniform(0,1).
pub fn ks_uniform_statistic(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n))
        .fold(0.0, f64::max)
}

/// Asymptotic 1% critical value of the one-sample KS statistic.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.628 / (n as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceEntry {
    pub a: Edge,
    pub b: Edge,
    pub covariance: f64,
    /// Standard error under independence; 0 when either indicator is constant.
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceReport {
    pub entries: Vec<CovarianceEntry>,
    pub n_runs: usize,
}

impl CovarianceReport {
    pub fn violations(&self, sigmas: f64) -> Vec<&CovarianceEntry> {
        self.entries
            .iter()
            .filter(|c| c.covariance.abs() > sigmas * c.sigma + EXACT_TOL)
            .collect()
    }

    pub fn worst_ratio(&self) -> f64 {
        self.entries
            .iter()
            .filter(|c| c.sigma > 0.0)
            .map(|c| c.covariance.abs() / c.sigma)
            .fold(0.0, f64::max)
    }
}

/// Empirical covariance of the indicators of every pair of distinct edges,
/// with null standard error `sqrt(p_a(1-p_a)p_b(1-p_b)/N)`. Intended for
/// `N >= 10⁴` and small `n`: the output has `C(C(n,2),2)` entries.
pub fn pairwise_covariance(samples: &[SimpleGraph]) -> CovarianceReport {
    let n_runs = samples.len();
    let Some(first) = samples.first() else {
        return CovarianceReport {
            entries: Vec::new(),
            n_runs,
        };
    };
    let n = first.n();
    let pairs: Vec<Edge> = all_pairs(n).collect();
    let c = pairs.len();
    let mut single = vec![0u64; c];
    let mut joint = vec![0u64; c * c];
    let mut present = Vec::with_capacity(c);
    for g in samples {
        present.clear();
        present.extend(g.edges().map(|e| e.pair_index(n)));
        for (a, &i) in present.iter().enumerate() {
            single[i] += 1;
            for &j in &present[a + 1..] {
                joint[i * c + j] += 1;
            }
        }
    }
    let runs = n_runs as f64;
    let mut entries = Vec::with_capacity(c * (c.saturating_sub(1)) / 2);
    for i in 0..c {
        for j in i + 1..c {
            let pi = single[i] as f64 / runs;
            let pj = single[j] as f64 / runs;
            let pij = joint[i * c + j] as f64 / runs;
            entries.push(CovarianceEntry {
                a: pairs[i],
                b: pairs[j],
                covariance: pij - pi * pj,
                sigma: (pi * (1.0 - pi) * pj * (1.0 - pj) / runs).sqrt(),
            });
        }
    }
    CovarianceReport { entries, n_runs }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgraphViolation {
    pub index: usize,
    /// An edge of the first graph missing from the second; `None` when the
    /// vertex counts differ.
    pub witness: Option<Edge>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgraphReport {
    pub checked: usize,
    pub contained: usize,
    pub violations: Vec<SubgraphViolation>,
}

pub fn subgraph_check(pairs: &[(SimpleGraph, SimpleGraph)]) -> SubgraphReport {
    let mut violations = Vec::new();
    for (index, (a, b)) in pairs.iter().enumerate() {
        if a.n() != b.n() {
            violations.push(SubgraphViolation { index, witness: None });
        } else if let Some(e) = a.first_edge_not_in(b) {
            violations.push(SubgraphViolation {
                index,
                witness: Some(e),
            });
        }
    }
    SubgraphReport {
        checked: pairs.len(),
        contained: pairs.len() - violations.len(),
        violations,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationRow {
    pub m: usize,
    pub p_m: f64,
    /// Fraction of positive-degree vertices with `|t_j - p_m d_j| > ξ p_m d_j`.
    pub violation_fraction: f64,
    /// `max_j |t_j - p_m d_j| / (p_m d_j)`.
    pub worst_relative_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub xi: f64,
    pub rows: Vec<ConcentrationRow>,
    pub max_violation_fraction: f64,
}

/// Soft diagnostic: how far remaining degrees stray from `p_m d` at each checkpoint.
pub fn degree_concentration_check(
    d: &DegreeSequence,
    checkpoints: &[(usize, SimpleGraph)],
    xi: f64,
) -> ConcentrationReport {
    let total = d.total() as f64;
    let rows: Vec<ConcentrationRow> = checkpoints
        .iter()
        .map(|(m, g)| {
            let p_m = if total > 0.0 { (total - 2.0 * *m as f64) / total } else { 0.0 };
            let used = g.degrees();
            let mut bad = 0usize;
            let mut counted = 0usize;
            let mut worst = 0.0f64;
            for (v, &dv) in d.degrees().iter().enumerate().filter(|(_, &dv)| dv > 0) {
                counted += 1;
                let t = dv as f64 - used.get(v).copied().unwrap_or(0) as f64;
                let centre = p_m * dv as f64;
                let dev = (t - centre).abs();
                if dev > xi * centre + EXACT_TOL {
                    bad += 1;
                }
                let rel = if centre > 0.0 {
                    dev / centre
                } else if dev > EXACT_TOL {
                    f64::INFINITY
                } else {
                    0.0
                };
                worst = worst.max(rel);
            }
            ConcentrationRow {
                m: *m,
                p_m,
                violation_fraction: if counted == 0 { 0.0 } else { bad as f64 / counted as f64 },
                worst_relative_deviation: worst,
            }
        })
        .collect();
    let max_violation_fraction = rows.iter().map(|r| r.violation_fraction).fold(0.0, f64::max);
    ConcentrationReport {
        xi,
        rows,
        max_violation_fraction,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FcpComparison {
    pub max_relative_error: f64,
    pub mean_relative_error: f64,
    pub zeta: f64,
    pub zeta_prime: f64,
    /// `Δ / ‖d‖₁`.
    pub max_degree_ratio: f64,
    /// `ζ + ζ' + Δ/‖d‖₁`.
    pub driver: f64,
}

/// Entrywise relative error of `1 - exp(-λ Λ_jk Q_jk)` against `1 - exp(-P_jk)`
/// over pairs with `d_j d_k > 0`.
pub fn compare_w_to_fcp(d: &DegreeSequence, params: &CouplingParams) -> Result<FcpComparison> {
    if params.accept.n() != d.len() {
        return Err(Error::DimensionMismatch(params.accept.n(), d.len()));
    }
    let denom = d.pair_product_sum();
    if denom == 0.0 {
        return Err(Error::Degenerate);
    }
    let p = p_matrix(d);
    let deg = d.degrees();
    let mut max = 0.0f64;
    let mut sum = 0.0;
    let mut count = 0usize;
    for ((e, lam), (_, pv)) in params.accept.iter().zip(p.iter()) {
        let prod = deg[e.lo()] as f64 * deg[e.hi()] as f64;
        if prod == 0.0 {
            continue;
        }
        let w = -(-params.lambda * lam * prod / denom).exp_m1();
        let f = -(-pv).exp_m1();
        let rel = (w - f).abs() / f;
        max = max.max(rel);
        sum += rel;
        count += 1;
    }
    let stats = d.stats();
    let ratio = stats.max as f64 / stats.sum as f64;
    Ok(FcpComparison {
        max_relative_error: max,
        mean_relative_error: if count == 0 { 0.0 } else { sum / count as f64 },
        zeta: params.zeta,
        zeta_prime: params.zeta_prime,
        max_degree_ratio: ratio,
        driver: params.zeta + params.zeta_prime + ratio,
    })
}
