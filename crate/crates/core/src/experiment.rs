//! Experiment runner: resolves a config into a degree sequence and
//! parameters, runs replicas in parallel and writes artifacts.
//!
//! Output directory layout:
//! - `metadata.json`: resolved config and parameters, seed, version, wall time
//! - `traces.ndjson`: one coupling trace per line (`couple`)
//! - `marginals.csv`: per-edge frequency, reference and z-score
//! - `gof.json`: chi-square report when an exact law is available
//! - `graphs/`: edge lists when `write_graphs` is set
//! - `family.txt`, `w_star.csv`: oracle output
//! - `verify.json`: acceptance battery results

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::coupling::{
    coupled_law, default_params_with, Coupler, CouplingParams, CouplingTrace, EtaDenominatorMode, ScheduleConstants,
};
use crate::error::{Error, Result};
use crate::graph::{p_matrix, pair_count, DegreeSequence, SimpleGraph, SymmetricProbMatrix};
use crate::io::{format_family, read_degrees, read_matrix_file, write_edges, write_matrix_csv};
use crate::oracle::{enumerate_graphs, marginals_of, GraphFamily, GraphLaw, OracleConfig};
use crate::samplers::{sample_gnw, RandomSource, SeqApproxP, SeqSampleMode, SeqSampler};
use crate::stats::{chi_square_gof, degree_concentration_check, subgraph_check, MarginalCounter, MarginalReport};
use crate::verify::{fallback_fraction, replicate, run_all, CriterionResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SampleGnd,
    SampleGnw,
    SeqApproxP,
    Couple,
    Oracle,
    VerifySuite,
}

/// Where the degree sequence comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DegreeSource {
    File { path: PathBuf },
    List { degrees: Vec<u32> },
    Regular { n: usize, d: u32 },
    Powerlaw { n: usize, exponent: f64, d_min: u32, d_max: u32 },
    PerturbedRegular { n: usize, d: u32, fraction: f64, seed: u64 },
}

impl DegreeSource {
    /// Parses `regular:n,d`, `powerlaw:n,exp,dmin,dmax`,
    /// `perturbed-regular:n,d,fraction,seed`, `list:d1,d2,...` or a file path.
    pub fn parse(spec: &str) -> Result<Self> {
        let Some((kind, args)) = spec.split_once(':') else {
            return Ok(DegreeSource::File { path: spec.into() });
        };
        let bad = || Error::Parse(format!("bad degree source {spec:?}"));
        let fields: Vec<&str> = args.split(',').map(str::trim).collect();
        fn num<T: std::str::FromStr>(s: &str, bad: impl Fn() -> Error) -> Result<T> {
            s.parse().map_err(|_| bad())
        }
        match (kind, fields.as_slice()) {
            ("regular", [n, d]) => Ok(DegreeSource::Regular {
                n: num(n, bad)?,
                d: num(d, bad)?,
            }),
            ("powerlaw", [n, e, lo, hi]) => Ok(DegreeSource::Powerlaw {
                n: num(n, bad)?,
                exponent: num(e, bad)?,
                d_min: num(lo, bad)?,
                d_max: num(hi, bad)?,
            }),
            ("perturbed-regular", [n, d, f, s]) => Ok(DegreeSource::PerturbedRegular {
                n: num(n, bad)?,
                d: num(d, bad)?,
                fraction: num(f, bad)?,
                seed: num(s, bad)?,
            }),
            ("list", items) => Ok(DegreeSource::List {
                degrees: items.iter().map(|s| num(s, bad)).collect::<Result<_>>()?,
            }),
            ("regular" | "powerlaw" | "perturbed-regular", _) => Err(bad()),
            _ => Ok(DegreeSource::File { path: spec.into() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratedDegrees {
    pub sequence: DegreeSequence,
    /// An entry was decremented to make the sum even.
    pub parity_adjusted: bool,
}

/// Stream reserved for degree generation, away from replica streams.
const GENERATOR_STREAM: u64 = u64::MAX;

fn even_sum(mut v: Vec<u32>) -> (Vec<u32>, bool) {
    let sum: u64 = v.iter().map(|&x| x as u64).sum();
    if sum.is_multiple_of(2) {
        return (v, false);
    }
    if let Some(x) = v.iter_mut().rev().find(|x| **x > 0) {
        *x -= 1;
    }
    (v, true)
}

/// Deterministic for fixed `(source, seed)`; output is checked for graphicality.
pub fn generate_degree_sequence(src: &DegreeSource, seed: u64) -> Result<GeneratedDegrees> {
    let infeasible = |msg: String| Error::InvalidParameter(msg);
    let (raw, adjusted) = match src {
        DegreeSource::File { path } => (read_degrees(path)?.degrees().to_vec(), false),
        DegreeSource::List { degrees } => (degrees.clone(), false),
        &DegreeSource::Regular { n, d } => {
            if d as usize >= n.max(1) {
                return Err(infeasible(format!("regular degree {d} must be below n = {n}")));
            }
            even_sum(vec![d; n])
        }
        &DegreeSource::Powerlaw {
            n,
            exponent,
            d_min,
            d_max,
        } => {
            if exponent <= 1.0 || d_min == 0 || d_min > d_max || d_max as usize >= n {
                return Err(infeasible(format!(
                    "powerlaw needs exponent > 1 and 1 <= d_min <= d_max < n, got ({n}, {exponent}, {d_min}, {d_max})"
                )));
            }
            let weights: Vec<f64> = (d_min..=d_max).map(|k| (k as f64).powf(-exponent)).collect();
            let dist = WeightedIndex::new(&weights).map_err(|e| infeasible(e.to_string()))?;
            let mut rng = RandomSource::new(seed, GENERATOR_STREAM);
            even_sum((0..n).map(|_| d_min + dist.sample(&mut rng) as u32).collect())
        }
        &DegreeSource::PerturbedRegular { n, d, fraction, seed } => perturbed_regular(n, d, fraction, seed)?,
    };
    let sequence = DegreeSequence::new(raw)?;
    if !sequence.is_graphical() {
        return Err(Error::NotGraphical);
    }
    Ok(GeneratedDegrees {
        sequence,
        parity_adjusted: adjusted,
    })
}

/// `⌊fraction·n⌋` random vertices get degree `d-1` or `d-2`; the last of them
/// absorbs the parity fix, so the count of lowered entries is exact.
fn perturbed_regular(n: usize, d: u32, fraction: f64, seed: u64) -> Result<(Vec<u32>, bool)> {
    if !(0.0..=1.0).contains(&fraction) || d as usize >= n.max(1) {
        return Err(Error::InvalidParameter(format!(
            "perturbed-regular needs d < n and fraction in [0,1], got ({n}, {d}, {fraction})"
        )));
    }
    let k = (fraction * n as f64).floor() as usize;
    let mut rng = RandomSource::new(seed, GENERATOR_STREAM);
    let mut chosen = sample_indices(&mut rng, n, k).into_vec();
    chosen.sort_unstable();
    let mut v = vec![d; n];
    for &i in &chosen {
        let drop = if d >= 2 { rng.random_range(1..=2) } else { d };
        v[i] = d - drop;
    }
    let sum: u64 = v.iter().map(|&x| x as u64).sum();
    if sum % 2 == 1 && d >= 2 {
        if let Some(&last) = chosen.last() {
            v[last] = if v[last] == d - 1 { d - 2 } else { d - 1 };
            return Ok((v, false));
        }
    }
    Ok(even_sum(v))
}

/// Optional slack overrides on top of the default schedule.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParamOverrides {
    pub xi: Option<f64>,
    pub zeta: Option<f64>,
    pub zeta_prime: Option<f64>,
    pub schedule: ScheduleConstants,
}

pub fn resolve_params(d: &DegreeSequence, o: &ParamOverrides) -> Result<CouplingParams> {
    match default_params_with(d, &o.schedule) {
        Ok(base) => {
            if o.xi.is_none() && o.zeta.is_none() && o.zeta_prime.is_none() {
                return Ok(base);
            }
            let mut p = CouplingParams::from_slack(
                d,
                o.xi.unwrap_or(base.xi),
                o.zeta.unwrap_or(base.zeta),
                o.zeta_prime.unwrap_or(base.zeta_prime),
            )?;
            p.warnings = base.warnings;
            Ok(p)
        }
        Err(e) => match (o.xi, o.zeta, o.zeta_prime) {
            (Some(xi), Some(z), Some(zp)) => CouplingParams::from_slack(d, xi, z, zp),
            _ => Err(e),
        },
    }
}

fn default_runs() -> usize {
    1
}

fn default_out() -> PathBuf {
    PathBuf::from("degseq-out")
}

fn default_mode() -> SeqSampleMode {
    SeqSampleMode::Asymptotic
}

fn default_denom() -> EtaDenominatorMode {
    EtaDenominatorMode::CertifiedBound
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub degrees: Option<DegreeSource>,
    /// `G(n,W)` matrix CSV for `sample-gnw`; `P(d)` is used when absent.
    #[serde(default)]
    pub matrix: Option<PathBuf>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub params: ParamOverrides,
    #[serde(default = "default_mode")]
    pub mode: SeqSampleMode,
    #[serde(default = "default_denom")]
    pub denom: EtaDenominatorMode,
    #[serde(default)]
    pub checkpoints: Vec<usize>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub write_graphs: bool,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            degrees: None,
            matrix: None,
            runs: default_runs(),
            seed: 0,
            params: ParamOverrides::default(),
            mode: default_mode(),
            denom: default_denom(),
            checkpoints: Vec::new(),
            out: default_out(),
            write_graphs: false,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub metadata: Value,
    /// False only when `verify-suite` rejects a criterion.
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

/// Marginal CSVs are skipped above this many pairs.
const MAX_CSV_PAIRS: usize = 200_000;

struct Artifacts {
    dir: PathBuf,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Artifacts { dir: dir.to_path_buf() })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn json(&self, name: &str, v: &impl Serialize) -> Result<()> {
        let text = serde_json::to_string_pretty(v).map_err(|e| Error::Invariant(e.to_string()))?;
        fs::write(self.path(name), text + "\n")?;
        Ok(())
    }

    fn marginals(&self, r: &MarginalReport) -> Result<()> {
        r.write_csv(BufWriter::new(fs::File::create(self.path("marginals.csv"))?))
    }

    fn graph(&self, name: &str, g: &SimpleGraph) -> Result<()> {
        let dir = self.path("graphs");
        fs::create_dir_all(&dir)?;
        write_edges(&dir.join(name), g)
    }
}

fn degree_summary(gen: &GeneratedDegrees) -> Value {
    let s = gen.sequence.stats();
    json!({
        "n": gen.sequence.len(),
        "sum": s.sum,
        "max": s.max,
        "min": s.min,
        "J": s.j,
        "parity_adjusted": gen.parity_adjusted,
    })
}

/// Exact family when `n` is within the oracle cap and the family is small enough.
fn try_family(d: &DegreeSequence, cfg: &OracleConfig) -> Option<GraphFamily> {
    if !cfg.admits(d.len()) {
        return None;
    }
    enumerate_graphs(d, &[], &[], cfg).ok().filter(|f| !f.is_empty())
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with(cfg, &OracleConfig::from_env())
}

pub fn run_experiment_with(cfg: &ExperimentConfig, oracle: &OracleConfig) -> Result<ExperimentOutcome> {
    let start = Instant::now();
    if cfg.runs == 0 {
        return Err(Error::InvalidParameter("runs must be at least 1".into()));
    }
    let out = Artifacts::new(&cfg.out)?;
    let mut meta = json!({
        "kind": cfg.kind,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": cfg.seed,
        "runs": cfg.runs,
        "config": cfg,
        "oracle_cap": oracle.max_n,
    });
    let mut passed = true;
    let mut criteria = Vec::new();

    if cfg.kind == ExperimentKind::VerifySuite {
        let results = run_all(cfg.seed)?;
        passed = results.iter().all(|r| r.passed);
        out.json("verify.json", &results)?;
        meta["criteria"] = json!(results.iter().map(|r| json!({"id": r.id, "passed": r.passed})).collect::<Vec<_>>());
        meta["passed"] = json!(passed);
        criteria = results;
    } else {
        let src = cfg
            .degrees
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("a degree source is required".into()))?;
        let gen = generate_degree_sequence(src, cfg.seed)?;
        meta["degrees"] = degree_summary(&gen);
        let d = &gen.sequence;
        let extra = match cfg.kind {
            ExperimentKind::SampleGnd => sample_gnd(cfg, d, oracle, &out)?,
            ExperimentKind::SampleGnw => sample_gnw_runs(cfg, d, &out)?,
            ExperimentKind::SeqApproxP => seq_approx_runs(cfg, d, &out)?,
            ExperimentKind::Couple => couple_runs(cfg, d, oracle, &out)?,
            ExperimentKind::Oracle => oracle_dump(d, oracle, &out)?,
            ExperimentKind::VerifySuite => unreachable!(),
        };
        if let (Value::Object(m), Value::Object(e)) = (&mut meta, extra) {
            m.extend(e);
        }
    }
    meta["wall_time_s"] = json!(start.elapsed().as_secs_f64());
    out.json("metadata.json", &meta)?;
    Ok(ExperimentOutcome {
        metadata: meta,
        passed,
        criteria,
    })
}

fn marginals_section(out: &Artifacts, graphs: &[&SimpleGraph], reference: &SymmetricProbMatrix) -> Result<Value> {
    let n = reference.n();
    if pair_count(n) > MAX_CSV_PAIRS {
        return Ok(json!({ "marginals": "skipped: too many pairs" }));
    }
    let mut counter = MarginalCounter::new(n);
    for g in graphs {
        counter.add(g)?;
    }
    let r = counter.report(reference)?;
    out.marginals(&r)?;
    Ok(json!({ "marginals": { "worst_abs_z": r.worst_abs_z, "exact_mismatches": r.exact_mismatches } }))
}

fn merge(a: &mut Value, b: Value) {
    if let (Value::Object(x), Value::Object(y)) = (a, b) {
        x.extend(y);
    }
}

fn sample_gnd(cfg: &ExperimentConfig, d: &DegreeSequence, oracle: &OracleConfig, out: &Artifacts) -> Result<Value> {
    let sampler = SeqSampler::new(d, cfg.mode, oracle)?;
    let outs = replicate(cfg.seed, cfg.runs, |_, rng| sampler.sample(rng, &cfg.checkpoints))?;
    if cfg.write_graphs {
        for (i, o) in outs.iter().enumerate() {
            out.graph(&format!("run_{i:05}.txt"), &o.graph)?;
        }
    }
    let graphs: Vec<&SimpleGraph> = outs.iter().map(|o| &o.graph).collect();
    let family = try_family(d, oracle);
    let reference = match &family {
        Some(f) => marginals_of(f),
        None => p_matrix(d),
    };
    let mut meta = json!({
        "mode": cfg.mode,
        "marginal_reference": if family.is_some() { "exact" } else { "P(d)" },
        "restarts": outs.iter().map(|o| o.restarts as u64).sum::<u64>(),
    });
    merge(&mut meta, marginals_section(out, &graphs, &reference)?);
    if let Some(f) = &family {
        let owned: Vec<SimpleGraph> = outs.iter().map(|o| o.graph.clone()).collect();
        let gof = chi_square_gof(&owned, &GraphLaw::uniform(f))?;
        out.json("gof.json", &gof)?;
        meta["gof_p_value"] = json!(gof.p_value);
    }
    if !cfg.checkpoints.is_empty() {
        let xi = cfg.params.xi.unwrap_or(0.2);
        let reports: Vec<_> = outs
            .iter()
            .map(|o| degree_concentration_check(d, &o.snapshots, xi))
            .collect();
        out.json("concentration.json", &reports)?;
        meta["max_violation_fraction"] =
            json!(reports.iter().map(|r| r.max_violation_fraction).fold(0.0, f64::max));
    }
    Ok(meta)
}

fn sample_gnw_runs(cfg: &ExperimentConfig, d: &DegreeSequence, out: &Artifacts) -> Result<Value> {
    let w = match &cfg.matrix {
        Some(path) => read_matrix_file(path, d.len())?,
        None => p_matrix(d),
    };
    let graphs = replicate(cfg.seed, cfg.runs, |_, rng| Ok(sample_gnw(&w, rng)))?;
    if cfg.write_graphs {
        for (i, g) in graphs.iter().enumerate() {
            out.graph(&format!("run_{i:05}.txt"), g)?;
        }
    }
    let refs: Vec<&SimpleGraph> = graphs.iter().collect();
    let mut meta = json!({ "matrix": if cfg.matrix.is_some() { "file" } else { "P(d)" } });
    merge(&mut meta, marginals_section(out, &refs, &w)?);
    Ok(meta)
}

fn seq_approx_runs(cfg: &ExperimentConfig, d: &DegreeSequence, out: &Artifacts) -> Result<Value> {
    let params = resolve_params(d, &cfg.params)?;
    let target = coupled_law(d, &params)?;
    let sampler = SeqApproxP::new(d, params.lambda, params.accept.clone())?;
    let graphs = replicate(cfg.seed, cfg.runs, |_, rng| Ok(sampler.sample(rng)))?;
    if cfg.write_graphs {
        for (i, g) in graphs.iter().enumerate() {
            out.graph(&format!("run_{i:05}.txt"), g)?;
        }
    }
    let refs: Vec<&SimpleGraph> = graphs.iter().collect();
    let mut meta = json!({ "params": params });
    merge(&mut meta, marginals_section(out, &refs, &target)?);
    Ok(meta)
}

#[derive(Serialize)]
struct TraceRecord<'a> {
    run: usize,
    stream: u64,
    #[serde(flatten)]
    trace: &'a CouplingTrace,
    edges_l: usize,
    edges_g: usize,
    contained: bool,
}

fn couple_runs(cfg: &ExperimentConfig, d: &DegreeSequence, oracle: &OracleConfig, out: &Artifacts) -> Result<Value> {
    let params = resolve_params(d, &cfg.params)?;
    let coupler = Coupler::new(d, params.clone(), cfg.mode, cfg.denom, oracle)?;
    let outs = replicate(cfg.seed, cfg.runs, |_, rng| coupler.run(rng))?;

    let mut w = BufWriter::new(fs::File::create(out.path("traces.ndjson"))?);
    for (i, o) in outs.iter().enumerate() {
        let rec = TraceRecord {
            run: i,
            stream: i as u64,
            trace: &o.trace,
            edges_l: o.g_l.edge_count(),
            edges_g: o.g.edge_count(),
            contained: o.g_l.is_subgraph_of(&o.g),
        };
        serde_json::to_writer(&mut w, &rec).map_err(|e| Error::Invariant(e.to_string()))?;
        writeln!(w)?;
    }
    w.flush()?;
    if cfg.write_graphs {
        for (i, o) in outs.iter().enumerate() {
            out.graph(&format!("run_{i:05}_L.txt"), &o.g_l)?;
            out.graph(&format!("run_{i:05}_G.txt"), &o.g)?;
        }
    }

    let pairs: Vec<(SimpleGraph, SimpleGraph)> = outs
        .iter()
        .filter(|o| !o.trace.fallback)
        .map(|o| (o.g_l.clone(), o.g.clone()))
        .collect();
    let sub = subgraph_check(&pairs);
    let mut meta = json!({
        "params": params,
        "mode": cfg.mode,
        "denom": cfg.denom,
        "fallback_fraction": fallback_fraction(&outs),
        "non_fallback_runs": sub.checked,
        "containment_violations": sub.violations.len(),
    });
    let ls: Vec<&SimpleGraph> = outs.iter().map(|o| &o.g_l).collect();
    merge(&mut meta, marginals_section(out, &ls, coupler.l_law())?);
    if let Some(f) = try_family(d, oracle) {
        let gs: Vec<SimpleGraph> = outs.iter().map(|o| o.g.clone()).collect();
        let gof = chi_square_gof(&gs, &GraphLaw::uniform(&f))?;
        out.json("gof.json", &gof)?;
        meta["gof_p_value"] = json!(gof.p_value);
    }
    Ok(meta)
}

fn oracle_dump(d: &DegreeSequence, oracle: &OracleConfig, out: &Artifacts) -> Result<Value> {
    oracle.check_n(d.len())?;
    let fam = enumerate_graphs(d, &[], &[], oracle)?;
    if fam.is_empty() {
        return Err(Error::NotGraphical);
    }
    let members: Vec<SimpleGraph> = fam.members().collect();
    fs::write(out.path("family.txt"), format_family(&members))?;
    let w = marginals_of(&fam);
    write_matrix_csv(BufWriter::new(fs::File::create(out.path("w_star.csv"))?), &w)?;
    Ok(json!({ "family_size": fam.len() }))
}
