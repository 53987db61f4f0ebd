//! `spikeopt` command line: solve, oracle, bench, convert, gen.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spikeopt_cli::{
    bench_rows_to_csv, cmd_bench, cmd_convert, cmd_gen, cmd_oracle, cmd_solve, exit_code,
    record_to_json, CliError, GenSpec, ProblemKind, RunSpec, Solver, SuiteEntry,
};

#[derive(Parser)]
#[command(name = "spikeopt", version, about = "Spiking-network optimization benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver on one problem and write the result record JSON.
    Solve {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        kind: ProblemKindArg,
        #[arg(long)]
        solver: SolverArg,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Tick/iteration budget override.
        #[arg(long)]
        budget: Option<u64>,
        /// SSSP source node.
        #[arg(long)]
        source: Option<u32>,
        /// Color count for graph-coloring CSPs.
        #[arg(long)]
        colors: Option<usize>,
        /// Trajectory CSV path (swarm members / QP convergence).
        #[arg(long)]
        trajectories: Option<PathBuf>,
        /// Output path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Exhaustive optimum of a small instance.
    Oracle {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        kind: ProblemKindArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run a suite of (problem, solver, config) entries over seeds.
    Bench {
        #[arg(long)]
        suite: PathBuf,
        /// Seeds, e.g. `--seeds 0..20` or `--seeds 1,2,3`.
        #[arg(long, default_value = "0..5")]
        seeds: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Summary JSON path.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// QUBO text -> Ising JSON, or Ising JSON -> QUBO text.
    Convert {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        kind: ProblemKindArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a random instance.
    Gen {
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Clause count (cnf), constraint count (qp).
        #[arg(long, default_value_t = 40)]
        m: usize,
        #[arg(long, default_value_t = -8)]
        lo: i64,
        #[arg(long, default_value_t = 8)]
        hi: i64,
        #[arg(long, default_value_t = 0.15)]
        p: f64,
        #[arg(long, default_value_t = 10)]
        w_max: u32,
        #[arg(long, default_value_t = 20)]
        width: usize,
        #[arg(long, default_value_t = 20)]
        height: usize,
        #[arg(long, default_value_t = false)]
        lp: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone)]
struct ProblemKindArg(ProblemKind);

impl std::str::FromStr for ProblemKindArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<ProblemKind>().map(ProblemKindArg).map_err(|e| e.message)
    }
}

#[derive(Clone)]
struct SolverArg(Solver);

impl std::str::FromStr for SolverArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.parse::<Solver>().map(SolverArg).map_err(|e| e.message)
    }
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, CliError> {
    let text = text.trim();
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: u64 = lo.parse().map_err(|_| bad_seeds(text))?;
        let hi: u64 = hi.parse().map_err(|_| bad_seeds(text))?;
        return Ok((lo..hi).collect());
    }
    text.split(',')
        .map(|t| t.trim().parse().map_err(|_| bad_seeds(text)))
        .collect()
}

fn bad_seeds(text: &str) -> CliError {
    CliError { code: exit_code::CONFIG, message: format!("bad seed list '{text}'") }
}

fn write_out(path: Option<&PathBuf>, content: &str) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, content).map_err(|e| CliError {
            code: exit_code::OTHER,
            message: format!("cannot write {}: {e}", p.display()),
        }),
        None => {
            println!("{content}");
            Ok(())
        }
    }
}

fn run() -> Result<(), CliError> {
    env_logger::Builder::from_env(env_logger::Env::new().filter("SPIKEOPT_LOG")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Solve { problem, kind, solver, config, seed, budget, source, colors, trajectories, output } => {
            let spec = RunSpec {
                problem_path: problem,
                kind: kind.0,
                solver: solver.0,
                config_path: config,
                seed,
                budget,
                source,
                colors,
                trajectories,
            };
            let record = cmd_solve(&spec)?;
            write_out(output.as_ref(), &record_to_json(&record))
        }
        Command::Oracle { problem, kind, output } => {
            let record = cmd_oracle(&problem, kind.0)?;
            let json = serde_json::to_string_pretty(&record).expect("oracle record serializes");
            write_out(output.as_ref(), &json)
        }
        Command::Bench { suite, seeds, jobs, output, summary } => {
            let text = std::fs::read_to_string(&suite).map_err(|e| CliError {
                code: exit_code::PARSE,
                message: format!("cannot read {}: {e}", suite.display()),
            })?;
            let entries: Vec<SuiteEntry> = serde_json::from_str(&text).map_err(|e| CliError {
                code: exit_code::PARSE,
                message: format!("bad suite: {e}"),
            })?;
            let seeds = parse_seeds(&seeds)?;
            let (rows, summary_rec) = cmd_bench(&entries, &seeds, jobs.max(1))?;
            write_out(output.as_ref(), &bench_rows_to_csv(&rows))?;
            if let Some(path) = summary {
                let json = serde_json::to_string_pretty(&summary_rec).expect("summary serializes");
                write_out(Some(&path), &json)?;
            }
            Ok(())
        }
        Command::Convert { problem, kind, output } => {
            let (text, residual) = cmd_convert(&problem, kind.0)?;
            if let Some(r) = residual {
                log::info!("inverse conversion residual constant: {r}");
            }
            write_out(output.as_ref(), &text)
        }
        Command::Gen { kind, seed, n, m, lo, hi, p, w_max, width, height, lp, output } => {
            let spec = match kind.as_str() {
                "qubo" => GenSpec::Qubo { n, lo, hi },
                "cnf" => GenSpec::Cnf { n, m },
                "tsp" => GenSpec::Tsp { n },
                "qp" => GenSpec::Qp { l: n, m, lp },
                "graph" => GenSpec::Graph { n, p, w_max },
                "grid" => GenSpec::Grid { width, height, p },
                other => {
                    return Err(CliError {
                        code: exit_code::CONFIG,
                        message: format!("unknown generator kind '{other}'"),
                    })
                }
            };
            write_out(output.as_ref(), &cmd_gen(&spec, seed)?)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}
