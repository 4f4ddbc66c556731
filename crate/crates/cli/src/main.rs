mod error;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ibp_core::bench::{bench, solve, trace_csv, Algorithm, SolveConfig};
use ibp_core::generate::{GeneratorSpec, ProblemClass, DEFAULT_MIS_PENALTY};
use ibp_core::oracle::{
    brute_force_min, exact_marginals, tree_dp_min, DISTRIBUTION_LIMIT, MIN_ENUMERATION_LIMIT,
};
use ibp_core::QuboInstance;
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "ibp",
    version,
    about = "QUBO solving with iterative belief propagation and simulated annealing"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random instance and write it in the text instance format.
    Gen(GenArgs),
    /// Run one solver and emit checkpoint CSV plus a JSON summary.
    Solve(SolveArgs),
    /// Run several solvers on the same instance with equal spin-update budgets.
    Bench(BenchArgs),
    /// Exact minimum (and optionally marginals) of a small or tree-shaped instance.
    Verify(VerifyArgs),
}

fn probability(s: &str) -> Result<f64, String> {
    let p: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(format!("{p} is not in [0, 1]"))
    }
}

fn class(s: &str) -> Result<ProblemClass, String> {
    s.parse().map_err(|e: ibp_core::Error| e.to_string())
}

fn algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: ibp_core::Error| e.to_string())
}

#[derive(Debug, Args)]
struct GeneratorArgs {
    /// Problem class: maxcut, mis or random.
    #[arg(long, value_parser = class, default_value = "maxcut")]
    class: ProblemClass,
    /// Number of variables.
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability of the G(n, p) graph.
    #[arg(long, value_parser = probability)]
    p: Option<f64>,
    /// Penalty on edges inside the set for the mis class.
    #[arg(long, default_value_t = DEFAULT_MIS_PENALTY)]
    penalty: f64,
}

impl GeneratorArgs {
    fn spec(&self, seed: u64) -> CliResult<GeneratorSpec> {
        match (self.n, self.p) {
            (Some(n), Some(p)) => Ok(GeneratorSpec {
                class: self.class,
                n,
                p,
                seed,
                penalty: self.penalty,
            }),
            _ => Err(CliError::Usage(
                "need an instance file or both --n and --p".into(),
            )),
        }
    }
}

#[derive(Debug, Args)]
struct GenArgs {
    #[command(flatten)]
    gen: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance output path; standard output if omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write the underlying graph as an edge list.
    #[arg(long)]
    graph_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct InstanceArgs {
    /// Instance file. Without one, an instance is generated from the flags below.
    instance: Option<PathBuf>,
    #[command(flatten)]
    gen: GeneratorArgs,
    /// Seed of the generated instance; defaults to --seed.
    #[arg(long)]
    instance_seed: Option<u64>,
}

#[derive(Debug, Serialize)]
struct InstanceEcho {
    source: String,
    n: usize,
    couplings: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    class: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl InstanceArgs {
    fn load(&self, seed: u64) -> CliResult<(QuboInstance, InstanceEcho)> {
        if let Some(path) = &self.instance {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let q = QuboInstance::load(&text).map_err(|source| CliError::Instance {
                path: path.clone(),
                source,
            })?;
            let echo = InstanceEcho {
                source: path.display().to_string(),
                n: q.n(),
                couplings: q.num_couplings(),
                class: None,
                p: None,
                seed: None,
            };
            return Ok((q, echo));
        }
        let spec = self.gen.spec(self.instance_seed.unwrap_or(seed))?;
        let (_, q) = spec.build()?;
        let echo = InstanceEcho {
            source: "generated".into(),
            n: q.n(),
            couplings: q.num_couplings(),
            class: Some(spec.class.name()),
            p: Some(spec.p),
            seed: Some(spec.seed),
        };
        Ok((q, echo))
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Number of replicas.
    #[arg(long, default_value_t = 64)]
    replicas: usize,
    #[arg(long, default_value_t = 0.1)]
    beta_start: f64,
    #[arg(long, default_value_t = 10.0)]
    beta_end: f64,
    /// Spin updates per replica.
    #[arg(long, default_value_t = 100_000)]
    budget: u64,
    /// Number of evenly spaced checkpoints.
    #[arg(long, default_value_t = 100)]
    checkpoints: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads for replica updates; 0 picks the number of cores.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// CSV output path; standard output if omitted.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Summary JSON path; standard error if omitted.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct RunEcho {
    replicas: usize,
    beta_start: f64,
    beta_end: f64,
    budget: u64,
    checkpoints: u64,
    threads: usize,
}

impl RunArgs {
    fn config(&self) -> SolveConfig {
        SolveConfig {
            replicas: self.replicas,
            beta_start: self.beta_start,
            beta_end: self.beta_end,
            budget: self.budget,
            checkpoints: self.checkpoints,
            seed: self.seed,
        }
    }

    fn echo(&self) -> RunEcho {
        RunEcho {
            replicas: self.replicas,
            beta_start: self.beta_start,
            beta_end: self.beta_end,
            budget: self.budget,
            checkpoints: self.checkpoints,
            threads: self.threads,
        }
    }

    fn pool(&self) -> CliResult<rayon::ThreadPool> {
        Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()?)
    }
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Solver: ibp or sa.
    #[arg(long, value_parser = algorithm, default_value = "ibp")]
    algo: Algorithm,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Comma-separated solvers to compare.
    #[arg(long, value_parser = algorithm, value_delimiter = ',', default_value = "ibp,sa")]
    algos: Vec<Algorithm>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also report exact marginals P(x_i = 1) at this inverse temperature.
    #[arg(long)]
    beta: Option<f64>,
    /// Output path; standard output if omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e)),
    }
}

fn write_summary(path: Option<&Path>, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("summary serializes") + "\n";
    match path {
        Some(p) => fs::write(p, text).map_err(|e| CliError::io(p, e)),
        None => std::io::stderr()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stderr>", e)),
    }
}

fn run_gen(args: &GenArgs) -> CliResult<()> {
    let spec = args.gen.spec(args.seed)?;
    let (g, q) = spec.build()?;
    write_out(args.output.as_deref(), &q.save())?;
    if let Some(path) = &args.graph_out {
        fs::write(path, g.to_edge_list()).map_err(|e| CliError::io(path, e))?;
    }
    let report = json!({
        "class": spec.class.name(),
        "n": q.n(),
        "nnz": q.num_couplings(),
        "seed": spec.seed,
    });
    if args.output.is_some() {
        println!("{report}");
    } else {
        eprintln!("{report}");
    }
    Ok(())
}

fn run_solve(args: &SolveArgs) -> CliResult<()> {
    let (q, instance) = args.instance.load(args.run.seed)?;
    let config = args.run.config();
    let start = Instant::now();
    let out = args.run.pool()?.install(|| solve(&q, args.algo, &config))?;
    let wall = start.elapsed().as_secs_f64();
    write_out(args.run.csv.as_deref(), &trace_csv(&out.trace))?;
    let t = &out.trace;
    let last = t
        .checkpoints
        .last()
        .expect("a run has an initial checkpoint");
    let summary = json!({
        "algo": args.algo.name(),
        "best_energy": t.best_energy,
        "best_assignment": t.best_state.to_string(),
        "final_median": last.median,
        "final_p01": last.p01,
        "spin_updates": t.total_spin_updates(),
        "iterations": t.iterations,
        "schedule_len": out.schedule_len,
        "wall_time_s": wall,
        "seed": args.run.seed,
        "instance": instance,
        "config": args.run.echo(),
    });
    write_summary(args.run.summary.as_deref(), &summary)
}

fn run_bench(args: &BenchArgs) -> CliResult<()> {
    if args.run.budget == 0 {
        return Err(CliError::Usage("bench needs --budget > 0".into()));
    }
    let (q, instance) = args.instance.load(args.run.seed)?;
    let config = args.run.config();
    let start = Instant::now();
    let out = args
        .run
        .pool()?
        .install(|| bench(&q, &args.algos, &config))?;
    let wall = start.elapsed().as_secs_f64();
    write_out(args.run.csv.as_deref(), &out.csv())?;
    let runs: Vec<_> = out
        .runs
        .iter()
        .map(|r| {
            let last = r
                .trace
                .checkpoints
                .last()
                .expect("a run has an initial checkpoint");
            json!({
                "algo": r.algorithm.name(),
                "best_energy": r.trace.best_energy,
                "best_assignment": r.trace.best_state.to_string(),
                "final_median": last.median,
                "final_p01": last.p01,
                "spin_updates": r.trace.total_spin_updates(),
                "iterations": r.trace.iterations,
                "schedule_len": r.schedule_len,
            })
        })
        .collect();
    let summary = json!({
        "runs": runs,
        "sa_to_ibp_ratio": out.sa_to_ibp_ratio(),
        "wall_time_s": wall,
        "seed": args.run.seed,
        "instance": instance,
        "config": args.run.echo(),
    });
    write_summary(args.run.summary.as_deref(), &summary)
}

fn run_verify(args: &VerifyArgs) -> CliResult<()> {
    let (q, instance) = args.instance.load(args.seed)?;
    let n = q.n();
    let forest_min = tree_dp_min(&q).ok();
    let exhaustive = if n <= MIN_ENUMERATION_LIMIT {
        Some(brute_force_min(&q)?)
    } else {
        None
    };
    if forest_min.is_none() && exhaustive.is_none() {
        return Err(CliError::Core(ibp_core::Error::Capacity {
            n,
            limit: MIN_ENUMERATION_LIMIT,
        }));
    }
    let marginals = match args.beta {
        Some(beta) if n <= DISTRIBUTION_LIMIT => Some(exact_marginals(&q, beta)?),
        Some(_) => {
            return Err(CliError::Core(ibp_core::Error::Capacity {
                n,
                limit: DISTRIBUTION_LIMIT,
            }))
        }
        None => None,
    };
    let min_energy = exhaustive.as_ref().map(|e| e.1).or(forest_min);
    let report = json!({
        "min_energy": min_energy,
        "argmin": exhaustive.as_ref().map(|e| e.0.to_string()),
        "forest": forest_min.is_some(),
        "tree_dp_min": forest_min,
        "beta": args.beta,
        "marginals": marginals,
        "instance": instance,
    });
    let text = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
    write_out(args.output.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::Gen(a) => run_gen(a),
        Command::Solve(a) => run_solve(a),
        Command::Bench(a) => run_bench(a),
        Command::Verify(a) => run_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
