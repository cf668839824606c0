//! Experiment plumbing behind the `imin` binary: algorithm dispatch, seed
//! selection, Monte-Carlo evaluation, CSV rows, benchmark sweeps and the
//! oracle self-check.
//!
//! # CSV schema
//!
//! One row per repeat, header included:
//!
//! | column | meaning |
//! |---|---|
//! | `dataset` | dataset name as given |
//! | `algo` | algorithm name |
//! | `k` | budget |
//! | `seeds` | number of seeds |
//! | `epsilon`, `delta`, `beta`, `gamma` | parameters used |
//! | `repeat` | repeat index from 0 |
//! | `decrease` | Monte-Carlo spread decrease of the returned blockers |
//! | `runtime_ms` | algorithm wall time; empty unless timings were requested |
//! | `samples` | samples drawn by the bound maximizers; empty for baselines |
//! | `ratio` | empirical approximation ratio; empty when not available |
//! | `seed_nodes`, `blockers` | space-separated node labels |
//!
//! Without timings every field is a function of the graph, the flags and the
//! RNG seed, so two runs give byte-identical files.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{ag, gr, mc_greedy};
use crate::diffusion::{coupled_decrease, monte_carlo_spread, stopping_rule_spread};
use crate::error::{Error, Result};
use crate::fixtures::{self, Fixture};
use crate::graph::{unify_seeds, BlockerSet, Graph, NodeId, SeedSet, UnifiedGraph};
use crate::optimize::{gsbm, lsbm, AlgoParams, Certificate};
use crate::oracle::{Objective, Oracle};
use crate::rng::SeedStream;
use crate::sampling::{compute_population, CpCollection, LrrCollection};
use crate::sandwich::{lhga, sand_imin, sand_imin_minus, PhaseTimes, SandwichResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Algo {
    SandImin,
    SandIminMinus,
    Lsbm,
    Gsbm,
    Lhga,
    Ag,
    Gr,
    McGreedy,
}

impl Algo {
    pub const ALL: [Algo; 8] = [
        Algo::SandImin,
        Algo::SandIminMinus,
        Algo::Lsbm,
        Algo::Gsbm,
        Algo::Lhga,
        Algo::Ag,
        Algo::Gr,
        Algo::McGreedy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::SandImin => "sandimin",
            Algo::SandIminMinus => "sandimin-minus",
            Algo::Lsbm => "lsbm",
            Algo::Gsbm => "gsbm",
            Algo::Lhga => "lhga",
            Algo::Ag => "ag",
            Algo::Gr => "gr",
            Algo::McGreedy => "mc-greedy",
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Algo> {
        let lower = s.to_ascii_lowercase();
        let alias = match lower.as_str() {
            "sandimin-" => "sandimin-minus",
            "greedy" => "mc-greedy",
            other => other,
        };
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == alias)
            .ok_or_else(|| Error::UnknownAlgorithm(s.to_string()))
    }
}

/// How seeds are chosen for each repeat.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SeedSpec {
    /// These node labels, every repeat.
    Explicit(Vec<u64>),
    /// This many seeds drawn uniformly from the influential pool, fresh per
    /// repeat.
    Count(usize),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: String,
    pub algo: Algo,
    pub k: usize,
    pub seeds: SeedSpec,
    pub epsilon: f64,
    /// `None` means `1/n`.
    pub delta: Option<f64>,
    pub beta: f64,
    pub gamma: f64,
    pub repeats: usize,
    pub rng_seed: u64,
    /// Realizations per round for AG and GR.
    pub realizations: usize,
    /// Monte-Carlo samples per round for plain greedy.
    pub greedy_trials: usize,
    pub eval_trials: usize,
    pub pool_size: usize,
    pub pool_trials: usize,
    #[serde(skip)]
    pub pool_cache: Option<PathBuf>,
    pub timings: bool,
}

impl RunConfig {
    pub fn new(dataset: &str, algo: Algo, k: usize, seeds: SeedSpec) -> RunConfig {
        RunConfig {
            dataset: dataset.to_string(),
            algo,
            k,
            seeds,
            epsilon: 0.2,
            delta: None,
            beta: 0.1,
            gamma: 0.1,
            repeats: 1,
            rng_seed: 0,
            realizations: 10_000,
            greedy_trials: 10_000,
            eval_trials: 100_000,
            pool_size: 200,
            pool_trials: 1000,
            pool_cache: None,
            timings: false,
        }
    }

    pub fn params(&self, n: usize) -> AlgoParams {
        AlgoParams {
            k: self.k,
            epsilon: self.epsilon,
            delta: self.delta.unwrap_or(1.0 / n.max(2) as f64),
            beta: self.beta,
            gamma: self.gamma,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub dataset: String,
    pub algo: String,
    pub k: usize,
    pub seeds: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub beta: f64,
    pub gamma: f64,
    pub repeat: usize,
    pub decrease: f64,
    pub runtime_ms: Option<f64>,
    pub samples: Option<usize>,
    pub ratio: Option<f64>,
    pub seed_nodes: String,
    pub blockers: String,
}

/// Everything known about one repeat.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepeatReport {
    pub row: Row,
    pub certificate: Option<Certificate>,
    pub sandwich: Option<SandwichResult>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub nodes: usize,
    pub edges: usize,
    pub repeats: Vec<RepeatReport>,
}

impl RunReport {
    pub fn rows(&self) -> Vec<Row> {
        self.repeats.iter().map(|r| r.row.clone()).collect()
    }

    pub fn mean_decrease(&self) -> f64 {
        let n = self.repeats.len().max(1) as f64;
        self.repeats.iter().map(|r| r.row.decrease).sum::<f64>() / n
    }
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_bytes(rows: &[Row]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    if rows.is_empty() {
        // the csv writer only emits a header with the first record
        buf.extend_from_slice(
            b"dataset,algo,k,seeds,epsilon,delta,beta,gamma,repeat,decrease,runtime_ms,samples,ratio,seed_nodes,blockers\n",
        );
    }
    Ok(buf)
}

/// Maps node labels to ids.
pub fn resolve_labels(g: &Graph, labels: &[u64]) -> Result<Vec<NodeId>> {
    let index: HashMap<u64, NodeId> = g.labels().iter().enumerate().map(|(i, &l)| (l, i as NodeId)).collect();
    labels
        .iter()
        .map(|l| index.get(l).copied().ok_or(Error::UnknownSeed(*l)))
        .collect()
}

fn label_list(g: &Graph, ids: &[NodeId]) -> String {
    ids.iter().map(|&v| g.label(v).to_string()).collect::<Vec<_>>().join(" ")
}

/// Fixed stream for the seed pool so a cached pool fits every RNG seed.
const POOL_SEED: u64 = 0x5EED_9001;

/// The `size` nodes with the largest Monte-Carlo singleton spread, `trials`
/// cascades each, best first. Ties go to the lower id.
pub fn seed_pool(g: &Graph, size: usize, trials: usize) -> Result<Vec<NodeId>> {
    let mut scored = (0..g.n() as NodeId)
        .into_par_iter()
        .map(|v| {
            let mut stream = SeedStream::new(POOL_SEED.wrapping_add((v as u64) << 20));
            let ug = unify_seeds(g, &SeedSet::new([v], g.n())?)?;
            Ok((monte_carlo_spread(&ug.unblocked(), trials, &mut stream)?, v))
        })
        .collect::<Result<Vec<(f64, NodeId)>>>()?;
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    Ok(scored.into_iter().take(size).map(|(_, v)| v).collect())
}

#[derive(Debug, Serialize, Deserialize)]
struct PoolCache {
    nodes: usize,
    edges: usize,
    size: usize,
    trials: usize,
    pool: Vec<u64>,
}

/// [`seed_pool`], read from `cache` when it was built for the same graph
/// shape and settings, and written there otherwise.
pub fn load_or_build_pool(g: &Graph, size: usize, trials: usize, cache: Option<&Path>) -> Result<Vec<NodeId>> {
    if let Some(path) = cache {
        if let Ok(bytes) = std::fs::read(path) {
            let c: PoolCache = serde_json::from_slice(&bytes)?;
            if c.nodes == g.n() && c.edges == g.m() && c.size == size && c.trials == trials {
                return resolve_labels(g, &c.pool);
            }
        }
    }
    let pool = seed_pool(g, size, trials)?;
    if let Some(path) = cache {
        let c = PoolCache {
            nodes: g.n(),
            edges: g.m(),
            size,
            trials,
            pool: pool.iter().map(|&v| g.label(v)).collect(),
        };
        std::fs::write(path, serde_json::to_vec(&c)?)?;
    }
    Ok(pool)
}

/// Builds the pool when `cfg` asks for counted seeds.
pub fn prepare_pool(g: &Graph, cfg: &RunConfig) -> Result<Option<Vec<NodeId>>> {
    match cfg.seeds {
        SeedSpec::Explicit(_) => Ok(None),
        SeedSpec::Count(_) => load_or_build_pool(g, cfg.pool_size, cfg.pool_trials, cfg.pool_cache.as_deref()).map(Some),
    }
}

struct Outcome {
    blockers: BlockerSet,
    samples: Option<usize>,
    ratio: Option<f64>,
    certificate: Option<Certificate>,
    sandwich: Option<SandwichResult>,
}

fn dispatch(ug: &UnifiedGraph, cfg: &RunConfig, params: &AlgoParams, stream: &mut SeedStream) -> Result<Outcome> {
    let plain = |blockers| Outcome {
        blockers,
        samples: None,
        ratio: None,
        certificate: None,
        sandwich: None,
    };
    Ok(match cfg.algo {
        Algo::SandImin | Algo::SandIminMinus => {
            let mut r = if cfg.algo == Algo::SandImin {
                sand_imin(ug, params, stream)?
            } else {
                sand_imin_minus(ug, params, stream)?
            };
            if !cfg.timings {
                r.times = PhaseTimes::default();
            }
            Outcome {
                blockers: r.chosen.clone(),
                samples: Some(r.samples()),
                ratio: r.empirical_ratio,
                certificate: None,
                sandwich: Some(r),
            }
        }
        Algo::Lsbm | Algo::Gsbm => {
            let r = if cfg.algo == Algo::Lsbm {
                lsbm(ug, params, stream)?
            } else {
                gsbm(ug, params, stream)?
            };
            Outcome {
                blockers: r.blockers,
                samples: Some(r.certificate.samples),
                ratio: None,
                certificate: Some(r.certificate),
                sandwich: None,
            }
        }
        Algo::Lhga => plain(lhga(ug, cfg.k)),
        Algo::Ag => plain(ag(ug, cfg.k, cfg.realizations, stream)?),
        Algo::Gr => plain(gr(ug, cfg.k, cfg.realizations, stream)?),
        Algo::McGreedy => plain(mc_greedy(ug, cfg.k, cfg.greedy_trials, stream)?),
    })
}

fn check_config(g: &Graph, cfg: &RunConfig) -> Result<()> {
    if cfg.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if cfg.repeats == 0 {
        return Err(Error::InvalidParameter("repeats must be at least 1".into()));
    }
    if let SeedSpec::Explicit(labels) = &cfg.seeds {
        SeedSet::new(resolve_labels(g, labels)?, g.n())?;
    }
    cfg.params(g.n()).validate()
}

/// Runs `cfg.repeats` repeats of one algorithm. Each repeat draws its own
/// seeds (when counted), runs the algorithm and measures the decrease with
/// `cfg.eval_trials` coupled cascades.
pub fn run_experiment(g: &Graph, cfg: &RunConfig) -> Result<RunReport> {
    check_config(g, cfg)?;
    let pool = prepare_pool(g, cfg)?;
    run_with_pool(g, cfg, pool.as_deref())
}

/// [`run_experiment`] with a precomputed pool.
pub fn run_with_pool(g: &Graph, cfg: &RunConfig, pool: Option<&[NodeId]>) -> Result<RunReport> {
    check_config(g, cfg)?;
    let params = cfg.params(g.n());
    let mut stream = SeedStream::new(cfg.rng_seed);
    let mut repeats = Vec::with_capacity(cfg.repeats);
    for repeat in 0..cfg.repeats {
        let mut rs = stream.fork();
        let seeds = match &cfg.seeds {
            SeedSpec::Explicit(labels) => SeedSet::new(resolve_labels(g, labels)?, g.n())?,
            SeedSpec::Count(c) => {
                let pool = pool.ok_or_else(|| Error::InvalidParameter("seed pool missing".into()))?;
                if *c == 0 || *c > pool.len() {
                    return Err(Error::InvalidParameter(format!(
                        "cannot draw {c} seeds from a pool of {}",
                        pool.len()
                    )));
                }
                let picks = sample(&mut rs.rng(), pool.len(), *c);
                SeedSet::new(picks.into_iter().map(|i| pool[i]), g.n())?
            }
        };
        let ug = unify_seeds(g, &seeds)?;
        let t = Instant::now();
        let out = dispatch(&ug, cfg, &params, &mut rs.fork())?;
        let runtime = t.elapsed().as_secs_f64() * 1e3;
        let decrease = coupled_decrease(&ug.unblocked(), &ug.block(&out.blockers)?, cfg.eval_trials, &mut rs.fork())?;
        let row = Row {
            dataset: cfg.dataset.clone(),
            algo: cfg.algo.to_string(),
            k: cfg.k,
            seeds: seeds.len(),
            epsilon: params.epsilon,
            delta: params.delta,
            beta: params.beta,
            gamma: params.gamma,
            repeat,
            decrease,
            runtime_ms: cfg.timings.then_some(runtime),
            samples: out.samples,
            ratio: out.ratio,
            seed_nodes: label_list(g, seeds.as_slice()),
            blockers: label_list(g, out.blockers.as_slice()),
        };
        repeats.push(RepeatReport {
            row,
            certificate: out.certificate,
            sandwich: out.sandwich,
        });
    }
    Ok(RunReport {
        config: cfg.clone(),
        nodes: g.n(),
        edges: g.m(),
        repeats,
    })
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub base: RunConfig,
    pub algos: Vec<Algo>,
    pub k_list: Vec<usize>,
    pub seeds_list: Vec<usize>,
    pub epsilon_list: Vec<f64>,
}

/// The rows of one sweep; `name` is `k`, `seeds` or `epsilon`.
#[derive(Clone, Debug)]
pub struct Sweep {
    pub name: &'static str,
    pub rows: Vec<Row>,
}

/// One sweep per non-empty list. Every other setting stays at `base`.
pub fn bench(g: &Graph, cfg: &BenchConfig) -> Result<Vec<Sweep>> {
    let needs_pool = matches!(cfg.base.seeds, SeedSpec::Count(_)) || !cfg.seeds_list.is_empty();
    let pool = if needs_pool {
        Some(load_or_build_pool(
            g,
            cfg.base.pool_size,
            cfg.base.pool_trials,
            cfg.base.pool_cache.as_deref(),
        )?)
    } else {
        None
    };
    let mut sweeps = Vec::new();
    let mut sweep = |name, configs: Vec<RunConfig>| -> Result<()> {
        let mut rows = Vec::new();
        for c in &configs {
            rows.extend(run_with_pool(g, c, pool.as_deref())?.rows());
        }
        sweeps.push(Sweep { name, rows });
        Ok(())
    };
    let per_algo = |f: &dyn Fn(&mut RunConfig, usize), len: usize| -> Vec<RunConfig> {
        let mut out = Vec::new();
        for &algo in &cfg.algos {
            for i in 0..len {
                let mut c = cfg.base.clone();
                c.algo = algo;
                f(&mut c, i);
                out.push(c);
            }
        }
        out
    };
    if !cfg.k_list.is_empty() {
        sweep("k", per_algo(&|c, i| c.k = cfg.k_list[i], cfg.k_list.len()))?;
    }
    if !cfg.seeds_list.is_empty() {
        sweep("seeds", per_algo(&|c, i| c.seeds = SeedSpec::Count(cfg.seeds_list[i]), cfg.seeds_list.len()))?;
    }
    if !cfg.epsilon_list.is_empty() {
        sweep("epsilon", per_algo(&|c, i| c.epsilon = cfg.epsilon_list[i], cfg.epsilon_list.len()))?;
    }
    Ok(sweeps)
}

/// One line of the oracle self-check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckLine {
    pub fixture: String,
    pub check: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn line(f: &Fixture, check: &'static str, passed: bool, detail: String) -> CheckLine {
    CheckLine {
        fixture: f.name.clone(),
        check,
        passed,
        detail,
    }
}

/// Bound ordering, estimator bias, stopping-rule coverage and the LSBM
/// guarantee on every corpus fixture.
///
/// Estimates must land within 4 standard deviations since the table makes
/// about thirty comparisons. The guarantee is checked with a budget below
/// the number of seed out-neighbors, where LSBM actually samples.
pub fn oracle_check(rng_seed: u64) -> Result<Vec<CheckLine>> {
    const DELTA: f64 = 0.1;
    let mut stream = SeedStream::new(rng_seed);
    let mut out = Vec::new();
    for f in fixtures::corpus() {
        let g = f.unified();
        let oracle = Oracle::new(&g)?;
        let k = 2.min(oracle.candidates().len()).max(1);

        let sets = oracle.subsets(k);
        let values = oracle.evaluate(&sets)?;
        let bad = values
            .iter()
            .filter(|e| !(e.lower <= e.decrease + 1e-9 && e.decrease <= e.upper + 1e-9))
            .count();
        out.push(line(&f, "lower <= decrease <= upper", bad == 0, format!("{} sets, {bad} violations", sets.len())));

        let trials = 10_000;
        let (bl, exact_l) = oracle.optimal_blockers(k, Objective::Lower)?;
        let cp = CpCollection::generate(&g, trials, &mut stream.fork());
        let est = cp.estimate(&bl);
        let room = (g.base_n() - g.seeds().len()) as f64;
        let sigma = (exact_l * (room - exact_l).max(0.0) / trials as f64).sqrt();
        out.push(line(
            &f,
            "CP estimate unbiased",
            (est - exact_l).abs() <= 4.0 * sigma + 1e-9,
            format!("{est:.4} vs {exact_l:.4} (4 sd {:.4})", 4.0 * sigma),
        ));

        let population = compute_population(&g);
        if population.is_empty() {
            out.push(line(&f, "LRR estimate unbiased", true, "empty population".into()));
        } else {
            let (bu, exact_u) = oracle.optimal_blockers(k, Objective::Upper)?;
            let lrr = LrrCollection::generate(&g, &population, trials, &mut stream.fork())?;
            let est = lrr.estimate(&bu);
            let n = population.len() as f64;
            let p = exact_u / n;
            let sigma = n * (p * (1.0 - p) / trials as f64).sqrt();
            out.push(line(
                &f,
                "LRR estimate unbiased",
                (est - exact_u).abs() <= 4.0 * sigma + 1e-9,
                format!("{est:.4} vs {exact_u:.4} (4 sd {:.4})", 4.0 * sigma),
            ));
        }

        let spread = oracle.exact(&[])?.residual;
        let runs = 100;
        let need = (1.0 - DELTA) - 3.0 * (DELTA * (1.0 - DELTA) / runs as f64).sqrt();
        let mut hits = 0;
        for _ in 0..runs {
            let e = stopping_rule_spread(&g.unblocked(), 0.1, DELTA, &mut stream.fork())?;
            hits += ((e.value - spread).abs() <= 0.1 * spread + 1e-9) as usize;
        }
        out.push(line(
            &f,
            "stopping rule coverage",
            hits as f64 / runs as f64 >= need,
            format!("{hits}/{runs} within 10%"),
        ));

        let on = g.seed_neighbors().len();
        let gk = if on > k { k } else { on.saturating_sub(1) };
        if gk == 0 {
            out.push(line(&f, "LSBM guarantee", true, "skipped: budget covers every seed out-neighbor".into()));
            continue;
        }
        let params = AlgoParams {
            k: gk,
            epsilon: 0.2,
            delta: DELTA,
            beta: 0.1,
            gamma: 0.1,
        };
        let (_, best) = oracle.optimal_blockers(gk, Objective::Lower)?;
        let runs = 20;
        let need = (1.0 - DELTA) - 3.0 * (DELTA * (1.0 - DELTA) / runs as f64).sqrt();
        let target = (1.0 - 1.0 / std::f64::consts::E - params.epsilon) * best;
        let mut hits = 0;
        for _ in 0..runs {
            let b = lsbm(&g, &params, &mut stream.fork())?.blockers;
            hits += (oracle.exact(b.as_slice())?.lower >= target - 1e-9) as usize;
        }
        out.push(line(
            &f,
            "LSBM guarantee",
            hits as f64 / runs as f64 >= need,
            format!("{hits}/{runs} reach {target:.4} with k = {gk}"),
        ));
    }
    Ok(out)
}

/// Fixed-width table of check lines.
pub fn format_checks(lines: &[CheckLine]) -> String {
    let fw = lines.iter().map(|l| l.fixture.len()).max().unwrap_or(7).max(7);
    let cw = lines.iter().map(|l| l.check.len()).max().unwrap_or(5).max(5);
    let mut s = format!("{:fw$}  {:cw$}  result  detail\n", "fixture", "check");
    for l in lines {
        let r = if l.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!("{:fw$}  {:cw$}  {r:6}  {}\n", l.fixture, l.check, l.detail));
    }
    s
}
