//! `imin`: run blocking algorithms on edge-list graphs, sweep parameters and
//! self-check against exact enumeration.
//!
//! Exit codes: 0 success, 1 other failure, 2 usage, 3 unknown algorithm,
//! 4 invalid budget, 5 seed not in the graph, 6 I/O or malformed graph.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use imin_core::graph::{assign_wc_probabilities, load_edge_list};
use imin_core::harness::{
    bench, csv_bytes, format_checks, oracle_check, run_experiment, Algo, BenchConfig, RunConfig, SeedSpec,
};
use imin_core::{fixtures, Error, Graph};

#[derive(Parser)]
#[command(name = "imin", version, about = "Influence minimization by node blocking")]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "IMIN_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm and write one CSV row per repeat.
    Run(RunArgs),
    /// Check estimators and bounds against exact values on the bundled fixtures.
    OracleCheck {
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
    },
    /// Sweep k, seed count or epsilon and write one CSV per sweep.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GraphArgs {
    /// Edge-list file, or `fixture:NAME` for a bundled graph.
    #[arg(long)]
    graph: String,

    /// Name written to the dataset column; defaults to the file stem.
    #[arg(long)]
    dataset: Option<String>,

    /// Treat every line as two directed edges.
    #[arg(long)]
    undirected: bool,

    /// Edge probabilities: `wc` (1/in-degree), `file` (third column) or
    /// `const:P`. Files default to `wc`, fixtures to `file`.
    #[arg(long)]
    prob: Option<String>,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Seed count drawn from the influential pool, or a comma-separated list
    /// of node labels (`ids:7` for a single label). Fixtures default to their
    /// own seeds.
    #[arg(long)]
    seeds: Option<String>,

    /// Size of the influential-node pool seeds are drawn from.
    #[arg(long, default_value_t = 200)]
    seed_rank_pool: usize,

    /// Cascades per node when ranking the pool.
    #[arg(long, default_value_t = 1000)]
    pool_trials: usize,

    /// JSON file holding the pool between runs.
    #[arg(long)]
    pool_cache: Option<PathBuf>,

    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,

    /// Defaults to 1/n.
    #[arg(long)]
    delta: Option<f64>,

    #[arg(long, default_value_t = 0.1)]
    beta: f64,

    #[arg(long, default_value_t = 0.1)]
    gamma: f64,

    #[arg(long, default_value_t = 1)]
    repeats: usize,

    #[arg(long, default_value_t = 0)]
    rng_seed: u64,

    /// Realizations per round for AG and GR.
    #[arg(long, default_value_t = 10_000)]
    realizations: usize,

    /// Cascades per round for mc-greedy.
    #[arg(long, default_value_t = 10_000)]
    greedy_trials: usize,

    /// Cascades used to evaluate the returned blockers.
    #[arg(long, default_value_t = 100_000)]
    eval_trials: usize,

    /// Fill the runtime_ms column (makes output run-dependent).
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    graph: GraphArgs,

    #[command(flatten)]
    exp: ExperimentArgs,

    /// sandimin, sandimin-minus, lsbm, gsbm, lhga, ag, gr or mc-greedy.
    #[arg(long)]
    algo: String,

    #[arg(long, allow_hyphen_values = true)]
    k: i64,

    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Full JSON report destination.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    graph: GraphArgs,

    #[command(flatten)]
    exp: ExperimentArgs,

    /// Comma-separated algorithms.
    #[arg(long, default_value = "sandimin,lhga")]
    algos: String,

    /// Budget used by the sweeps that do not vary it.
    #[arg(long, default_value_t = 10, allow_hyphen_values = true)]
    k: i64,

    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    k_list: Vec<i64>,

    #[arg(long, value_delimiter = ',')]
    seeds_list: Vec<usize>,

    #[arg(long, value_delimiter = ',')]
    epsilon_list: Vec<f64>,

    /// Directory receiving bench_<sweep>.csv files.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug)]
struct Coded(u8, String);

impl std::fmt::Display for Coded {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.1)
    }
}

impl std::error::Error for Coded {}

fn coded(code: u8, msg: impl Into<String>) -> anyhow::Error {
    Coded(code, msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(Coded(code, _)) = cause.downcast_ref::<Coded>() {
            return *code;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::UnknownAlgorithm(_) => 3,
                Error::UnknownSeed(_) | Error::NodeOutOfRange { .. } => 5,
                Error::Io(_) | Error::Parse { .. } | Error::EmptyGraph | Error::InvalidGraph(_) | Error::Cache(_) => 6,
                _ => 1,
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 6;
        }
    }
    1
}

struct Loaded {
    graph: Graph,
    dataset: String,
    seeds: Option<Vec<u64>>,
}

fn load(args: &GraphArgs) -> Result<Loaded> {
    let (graph, default_prob, seeds, stem) = if let Some(name) = args.graph.strip_prefix("fixture:") {
        let f = fixtures::by_name(name).ok_or_else(|| coded(6, format!("no bundled fixture named `{name}`")))?;
        let seeds = f.seeds.iter().map(|&v| f.graph.label(v)).collect();
        (f.graph, "file", Some(seeds), f.name)
    } else {
        let g = load_edge_list(&args.graph, !args.undirected)
            .with_context(|| format!("cannot load graph `{}`", args.graph))?;
        let stem = Path::new(&args.graph)
            .file_stem()
            .map_or_else(|| args.graph.clone(), |s| s.to_string_lossy().into_owned());
        (g, "wc", None, stem)
    };
    let graph = match args.prob.as_deref().unwrap_or(default_prob) {
        "wc" => assign_wc_probabilities(&graph),
        "file" => graph,
        other => match other.strip_prefix("const:").map(str::parse::<f64>) {
            Some(Ok(p)) if (0.0..=1.0).contains(&p) => graph.map_probabilities(|_, _, _| p)?,
            _ => return Err(coded(2, format!("invalid --prob `{other}`"))),
        },
    };
    Ok(Loaded {
        graph,
        dataset: args.dataset.clone().unwrap_or(stem),
        seeds,
    })
}

fn parse_seeds(arg: Option<&str>, fixture_seeds: Option<Vec<u64>>) -> Result<SeedSpec> {
    let Some(arg) = arg else {
        return fixture_seeds
            .map(SeedSpec::Explicit)
            .ok_or_else(|| coded(2, "--seeds is required for graph files"));
    };
    let list = arg.strip_prefix("ids:");
    if list.is_none() && !arg.contains(',') {
        let c: usize = arg.parse().map_err(|_| coded(2, format!("invalid --seeds `{arg}`")))?;
        return Ok(SeedSpec::Count(c));
    }
    list.unwrap_or(arg)
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<i64>()
                .ok()
                .and_then(|v| u64::try_from(v).ok())
                .ok_or_else(|| coded(5, format!("seed `{s}` is not a node label")))
        })
        .collect::<Result<Vec<u64>>>()
        .map(SeedSpec::Explicit)
}

fn budget(k: i64) -> Result<usize> {
    if k <= 0 {
        return Err(coded(4, format!("k must be positive, got {k}")));
    }
    Ok(k as usize)
}

fn config(loaded: &Loaded, exp: &ExperimentArgs, algo: Algo, k: usize) -> Result<RunConfig> {
    let mut c = RunConfig::new(&loaded.dataset, algo, k, parse_seeds(exp.seeds.as_deref(), loaded.seeds.clone())?);
    c.epsilon = exp.epsilon;
    c.delta = exp.delta;
    c.beta = exp.beta;
    c.gamma = exp.gamma;
    c.repeats = exp.repeats;
    c.rng_seed = exp.rng_seed;
    c.realizations = exp.realizations;
    c.greedy_trials = exp.greedy_trials;
    c.eval_trials = exp.eval_trials;
    c.pool_size = exp.seed_rank_pool;
    c.pool_trials = exp.pool_trials;
    c.pool_cache = exp.pool_cache.clone();
    c.timings = exp.timings;
    Ok(c)
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("cannot write `{}`", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let algo: Algo = args.algo.parse()?;
    let k = budget(args.k)?;
    let loaded = load(&args.graph)?;
    let cfg = config(&loaded, &args.exp, algo, k)?;
    let report = run_experiment(&loaded.graph, &cfg)?;
    let csv = csv_bytes(&report.rows())?;
    let json = serde_json::to_vec_pretty(&report)?;
    write_out(args.out.as_deref(), &csv)?;
    if let Some(p) = &args.json {
        std::fs::write(p, json).with_context(|| format!("cannot write `{}`", p.display()))?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let algos = args
        .algos
        .split(',')
        .map(|a| a.trim().parse::<Algo>())
        .collect::<Result<Vec<_>, _>>()?;
    let k = budget(args.k)?;
    let k_list = args.k_list.iter().map(|&k| budget(k)).collect::<Result<Vec<_>>>()?;
    if k_list.is_empty() && args.seeds_list.is_empty() && args.epsilon_list.is_empty() {
        bail!(coded(2, "give at least one of --k-list, --seeds-list, --epsilon-list"));
    }
    let loaded = load(&args.graph)?;
    let base = config(&loaded, &args.exp, algos[0], k)?;
    let cfg = BenchConfig {
        base,
        algos,
        k_list,
        seeds_list: args.seeds_list,
        epsilon_list: args.epsilon_list,
    };
    let sweeps = bench(&loaded.graph, &cfg)?;
    std::fs::create_dir_all(&args.out_dir)?;
    for s in sweeps {
        let path = args.out_dir.join(format!("bench_{}.csv", s.name));
        write_out(Some(&path), &csv_bytes(&s.rows)?)?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_oracle_check(rng_seed: u64) -> Result<bool> {
    let lines = oracle_check(rng_seed)?;
    print!("{}", format_checks(&lines));
    Ok(lines.iter().all(|l| l.passed))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Bench(a) => cmd_bench(a),
        Command::OracleCheck { rng_seed } => match cmd_oracle_check(rng_seed) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
