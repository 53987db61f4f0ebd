//! Benchmark harness: load instances, run solvers, compare against oracles,
//! and emit machine-readable results.
//!
//! Every run is captured as a [`ResultRecord`] whose fields (other than wall
//! time) are fully determined by the run specification, and whose
//! `best_objective` can be re-derived from `best_solution` plus the instance
//! file alone.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use spikeopt::anneal::{
    anneal_traced, iterated_anneal, sat_default_config, solve_sat_traced, AnnealConfig,
};
use spikeopt::error::Error as CoreError;
use spikeopt::metrics::{estimate_energy_from_counts, EnergyBreakdown, EnergyModel};
use spikeopt::problems::{self, qubo_objective, tour_length, CspInstance};
use spikeopt::qp::{solve_qp, QpSchedule};
use spikeopt::swarm::{aco_tsp_solve, collaborative_solve, osnn_solve, AcoConfig, OsnnConfig, SwarmConfig};
use spikeopt::wavefront::{build_graph_network, parse_graph_str, parse_grid_str, plan_path, sssp_traced};
use spikeopt::wta::{
    build_csp_network, build_tsp_network, solve_csp, solve_tsp_traced, tsp_default_city_penalty,
    CSP_DEFAULT_PENALTY,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Process exit codes of the harness.
pub mod exit_code {
    pub const OK: i32 = 0;
    pub const PARSE: i32 = 2;
    pub const INCOMPATIBLE: i32 = 3;
    pub const CONFIG: i32 = 4;
    pub const ORACLE_CAP: i32 = 5;
    pub const OTHER: i32 = 1;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}

impl CliError {
    fn parse(msg: impl Into<String>) -> Self {
        Self { code: exit_code::PARSE, message: msg.into() }
    }

    fn config(msg: impl Into<String>) -> Self {
        Self { code: exit_code::CONFIG, message: msg.into() }
    }

    fn incompatible(msg: impl Into<String>) -> Self {
        Self { code: exit_code::INCOMPATIBLE, message: msg.into() }
    }
}

fn core_parse_err(e: CoreError) -> CliError {
    CliError::parse(e.to_string())
}

fn core_config_err(e: CoreError) -> CliError {
    CliError::config(e.to_string())
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Problem kinds the harness understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Qubo,
    Ising,
    Cnf,
    Csp,
    Coloring,
    Tsp,
    Qp,
    Graph,
    Grid,
    Function,
}

impl std::str::FromStr for ProblemKind {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "qubo" => Self::Qubo,
            "ising" => Self::Ising,
            "cnf" => Self::Cnf,
            "csp" => Self::Csp,
            "coloring" => Self::Coloring,
            "tsp" => Self::Tsp,
            "qp" => Self::Qp,
            "graph" => Self::Graph,
            "grid" => Self::Grid,
            "function" => Self::Function,
            other => return Err(CliError::parse(format!("unknown problem kind '{other}'"))),
        })
    }
}

/// Solvers the harness can dispatch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Anneal,
    Iterated,
    Sat,
    Csp,
    TspWta,
    Swarm,
    Osnn,
    Aco,
    Qp,
    Sssp,
    Plan,
}

impl Solver {
    pub fn name(&self) -> &'static str {
        match self {
            Solver::Anneal => "anneal",
            Solver::Iterated => "iterated",
            Solver::Sat => "sat",
            Solver::Csp => "csp",
            Solver::TspWta => "tsp-wta",
            Solver::Swarm => "swarm",
            Solver::Osnn => "osnn",
            Solver::Aco => "aco",
            Solver::Qp => "qp",
            Solver::Sssp => "sssp",
            Solver::Plan => "plan",
        }
    }

    /// The problem kinds each solver accepts.
    pub fn accepts(&self, kind: ProblemKind) -> bool {
        use ProblemKind::*;
        match self {
            Solver::Anneal | Solver::Iterated | Solver::Swarm => matches!(kind, Qubo | Ising),
            Solver::Sat => matches!(kind, Cnf),
            Solver::Csp => matches!(kind, Csp | Coloring),
            Solver::TspWta | Solver::Aco => matches!(kind, Tsp),
            Solver::Osnn => matches!(kind, Function),
            Solver::Qp => matches!(kind, Qp),
            Solver::Sssp => matches!(kind, Graph),
            Solver::Plan => matches!(kind, Grid),
        }
    }
}

impl std::str::FromStr for Solver {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "anneal" => Self::Anneal,
            "iterated" => Self::Iterated,
            "sat" => Self::Sat,
            "csp" => Self::Csp,
            "tsp-wta" => Self::TspWta,
            "swarm" => Self::Swarm,
            "osnn" => Self::Osnn,
            "aco" => Self::Aco,
            "qp" => Self::Qp,
            "sssp" => Self::Sssp,
            "plan" => Self::Plan,
            other => return Err(CliError::parse(format!("unknown solver '{other}'"))),
        })
    }
}

/// One run: problem, solver, config, seed, budget.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub problem_path: PathBuf,
    pub kind: ProblemKind,
    pub solver: Solver,
    pub config_path: Option<PathBuf>,
    pub seed: u64,
    /// Overrides the configured tick/iteration budget when set.
    pub budget: Option<u64>,
    /// Extra solver parameters (e.g. `source` for SSSP, `colors` for coloring).
    pub source: Option<u32>,
    pub colors: Option<usize>,
    /// Swarm runs dump per-member trajectories here (CSV: tick, member,
    /// best_objective); QP runs dump convergence rows (iter, f, max_violation).
    pub trajectories: Option<PathBuf>,
}

/// Solver configuration file: every section optional, defaults applied.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ConfigDoc {
    pub anneal: Option<AnnealConfig>,
    pub swarm: Option<SwarmConfig>,
    pub osnn: Option<OsnnConfig>,
    pub aco: Option<AcoConfig>,
    pub qp: Option<QpSchedule>,
    pub csp_penalty: Option<f64>,
    pub tsp_excitation: Option<f64>,
    pub tsp_city_penalty: Option<f64>,
    pub restarts: Option<u32>,
    pub energy: Option<EnergyModel>,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

/// Continuous objective spec for the OSNN solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub function: String,
    pub dims: usize,
    pub lower: f64,
    pub upper: f64,
}

pub type ObjectiveFn = Box<dyn Fn(&[f64]) -> f64 + Sync>;

impl FunctionSpec {
    pub fn objective(&self) -> CliResult<ObjectiveFn> {
        match self.function.as_str() {
            "sphere" => Ok(Box::new(|x: &[f64]| x.iter().map(|a| a * a).sum())),
            "rastrigin" => Ok(Box::new(|x: &[f64]| {
                10.0 * x.len() as f64
                    + x.iter()
                        .map(|&a| a * a - 10.0 * (2.0 * std::f64::consts::PI * a).cos())
                        .sum::<f64>()
            })),
            "shifted-quadratic" => Ok(Box::new(|x: &[f64]| {
                x.iter().map(|&a| (a - 3.0) * (a - 3.0)).sum()
            })),
            other => Err(CliError::parse(format!("unknown objective function '{other}'"))),
        }
    }
}

/// The captured outcome of a run. `wall_time_ms` is the only field excluded
/// from the determinism guarantee.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultRecord {
    pub version: u32,
    pub problem_id: String,
    pub problem_hash: String,
    pub solver: String,
    pub config_hash: String,
    pub seed: u64,
    pub best_objective: f64,
    pub best_solution: serde_json::Value,
    pub feasible: bool,
    pub ticks_to_best: u64,
    pub spikes_total: u64,
    pub synaptic_events: u64,
    pub energy: EnergyBreakdown,
    pub wall_time_ms: u64,
    /// Unknown fields from older/newer schemas survive a read-write cycle.
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hex::encode(hasher.finalize())
}

fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::parse(format!("cannot read {}: {e}", path.display())))
}

pub fn load_config(path: Option<&Path>) -> CliResult<(ConfigDoc, String)> {
    match path {
        None => Ok((ConfigDoc::default(), sha256_hex(b"{}"))),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::config(format!("cannot read {}: {e}", p.display())))?;
            let doc: ConfigDoc = serde_json::from_str(&text)
                .map_err(|e| CliError::config(format!("bad config {}: {e}", p.display())))?;
            Ok((doc, sha256_hex(text.as_bytes())))
        }
    }
}

fn problem_id(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

/// Runs one spec end to end and produces the result record.
pub fn cmd_solve(spec: &RunSpec) -> CliResult<ResultRecord> {
    if !spec.solver.accepts(spec.kind) {
        return Err(CliError::incompatible(format!(
            "solver '{}' does not accept problem kind '{:?}'",
            spec.solver.name(),
            spec.kind
        )));
    }
    let started = Instant::now();
    let problem_text = read_file(&spec.problem_path)?;
    let problem_hash = sha256_hex(problem_text.as_bytes());
    let (config, config_hash) = load_config(spec.config_path.as_deref())?;
    let energy_model = config.energy.unwrap_or_default();

    let outcome = dispatch(spec, &problem_text, &config)?;
    let energy = estimate_energy_from_counts(
        outcome.n_neurons,
        outcome.ticks,
        outcome.spikes_total,
        outcome.synaptic_events,
        outcome.injected_spikes,
        &energy_model,
    )
    .map_err(core_config_err)?;

    Ok(ResultRecord {
        version: SCHEMA_VERSION,
        problem_id: problem_id(&spec.problem_path),
        problem_hash,
        solver: spec.solver.name().to_string(),
        config_hash,
        seed: spec.seed,
        best_objective: outcome.best_objective,
        best_solution: outcome.best_solution,
        feasible: outcome.feasible,
        ticks_to_best: outcome.ticks_to_best,
        spikes_total: outcome.spikes_total,
        synaptic_events: outcome.synaptic_events,
        energy,
        wall_time_ms: started.elapsed().as_millis() as u64,
        extra: BTreeMap::new(),
    })
}

struct SolveOutcome {
    best_objective: f64,
    best_solution: serde_json::Value,
    feasible: bool,
    ticks_to_best: u64,
    spikes_total: u64,
    synaptic_events: u64,
    injected_spikes: u64,
    n_neurons: usize,
    ticks: u64,
}

fn load_qubo(kind: ProblemKind, text: &str) -> CliResult<problems::QuboInstance> {
    match kind {
        ProblemKind::Qubo => problems::parse_qubo_str(text).map_err(core_parse_err),
        ProblemKind::Ising => {
            let ising: problems::IsingInstance =
                serde_json::from_str(text).map_err(|e| CliError::parse(e.to_string()))?;
            let (qubo, _residual) = problems::ising_to_qubo(&ising).map_err(core_parse_err)?;
            Ok(qubo)
        }
        _ => unreachable!("guarded by Solver::accepts"),
    }
}

fn anneal_config(config: &ConfigDoc, solver: Solver, budget: Option<u64>) -> AnnealConfig {
    let mut base = config.anneal.unwrap_or_else(|| {
        if solver == Solver::Sat {
            sat_default_config()
        } else {
            AnnealConfig::default()
        }
    });
    if let Some(ticks) = budget {
        base.ticks = ticks;
    }
    base
}

fn dispatch(spec: &RunSpec, text: &str, config: &ConfigDoc) -> CliResult<SolveOutcome> {
    match spec.solver {
        Solver::Anneal | Solver::Iterated => {
            let inst = load_qubo(spec.kind, text)?;
            let cfg = anneal_config(config, spec.solver, spec.budget);
            let result = if spec.solver == Solver::Anneal {
                anneal_traced(&inst, &cfg, spec.seed).map_err(core_config_err)?.0
            } else {
                let restarts = config.restarts.unwrap_or(5);
                iterated_anneal(&inst, &cfg, restarts, spec.seed).map_err(core_config_err)?
            };
            let check = qubo_objective(&inst, &result.best_solution).map_err(core_config_err)?;
            debug_assert_eq!(check, result.best_objective);
            Ok(SolveOutcome {
                best_objective: result.best_objective,
                best_solution: serde_json::json!(result.best_solution),
                feasible: true,
                ticks_to_best: result.tick_found,
                spikes_total: result.spikes_total,
                synaptic_events: result.synaptic_events,
                injected_spikes: result.injected_spikes,
                n_neurons: inst.n(),
                ticks: cfg.ticks,
            })
        }
        Solver::Swarm => {
            let inst = load_qubo(spec.kind, text)?;
            let mut cfg = config.swarm.unwrap_or_default();
            if let Some(anneal) = config.anneal {
                cfg.base = anneal;
            }
            if let Some(ticks) = spec.budget {
                cfg.base.ticks = ticks;
            }
            let swarm = collaborative_solve(&inst, &cfg, spec.seed).map_err(core_config_err)?;
            if let Some(path) = &spec.trajectories {
                let mut csv = String::from("tick,member,best_objective\n");
                for (member, trajectory) in swarm.member_trajectories.iter().enumerate() {
                    for (tick, best) in trajectory {
                        csv.push_str(&format!("{tick},{member},{best}\n"));
                    }
                }
                std::fs::write(path, csv).map_err(|e| {
                    CliError { code: exit_code::OTHER, message: format!("cannot write {}: {e}", path.display()) }
                })?;
            }
            let result = swarm.result;
            Ok(SolveOutcome {
                best_objective: result.best_objective,
                best_solution: serde_json::json!(result.best_solution),
                feasible: true,
                ticks_to_best: result.tick_found,
                spikes_total: result.spikes_total,
                synaptic_events: result.synaptic_events,
                injected_spikes: result.injected_spikes,
                n_neurons: inst.n() * cfg.m,
                ticks: cfg.base.ticks,
            })
        }
        Solver::Sat => {
            let formula = problems::parse_dimacs_str(text).map_err(core_parse_err)?;
            let cfg = anneal_config(config, spec.solver, spec.budget);
            let (result, _) = solve_sat_traced(&formula, &cfg, spec.seed).map_err(core_config_err)?;
            let (satisfied, all) = problems::cnf_eval(&formula, &result.best_solution).map_err(core_config_err)?;
            debug_assert_eq!((formula.clauses.len() - satisfied) as f64, result.best_objective);
            Ok(SolveOutcome {
                best_objective: result.best_objective,
                best_solution: serde_json::json!(result.best_solution),
                feasible: all,
                ticks_to_best: result.tick_found,
                spikes_total: result.spikes_total,
                synaptic_events: result.synaptic_events,
                injected_spikes: result.injected_spikes,
                n_neurons: formula.n_vars + formula.clauses.len(),
                ticks: cfg.ticks,
            })
        }
        Solver::Csp => {
            let inst = load_csp(spec, text)?;
            let cfg = anneal_config(config, spec.solver, spec.budget);
            let penalty = config.csp_penalty.unwrap_or(CSP_DEFAULT_PENALTY);
            let mut net = build_csp_network(&inst, penalty).map_err(core_config_err)?;
            let result = solve_csp(&mut net, &cfg, spec.seed).map_err(core_config_err)?;
            let n_neurons = net.energy_net.n_neurons();
            Ok(SolveOutcome {
                best_objective: result.violations as f64,
                best_solution: serde_json::json!(result.assignment),
                feasible: result.satisfied,
                ticks_to_best: result.tick_found,
                spikes_total: result.spikes_total,
                synaptic_events: result.synaptic_events,
                injected_spikes: 0,
                n_neurons,
                ticks: cfg.ticks,
            })
        }
        Solver::TspWta => {
            let inst = problems::parse_tsp_str(text).map_err(core_parse_err)?;
            let cfg = anneal_config(config, spec.solver, spec.budget);
            let excitation = config.tsp_excitation.unwrap_or(1.0);
            let penalty = config
                .tsp_city_penalty
                .unwrap_or_else(|| tsp_default_city_penalty(inst.n(), excitation));
            let mut net = build_tsp_network(&inst, excitation, penalty).map_err(core_config_err)?;
            let (result, _) = solve_tsp_traced(&mut net, &cfg, spec.seed).map_err(core_config_err)?;
            let feasible = result.best_tour.is_some();
            let solution = match &result.best_tour {
                Some(tour) => serde_json::json!(tour),
                None => serde_json::Value::Null,
            };
            Ok(SolveOutcome {
                best_objective: result.best_length,
                best_solution: solution,
                feasible,
                ticks_to_best: result.tick_found,
                spikes_total: result.spikes_total,
                synaptic_events: result.synaptic_events,
                injected_spikes: 0,
                n_neurons: inst.n() * inst.n(),
                ticks: cfg.ticks,
            })
        }
        Solver::Aco => {
            let inst = problems::parse_tsp_str(text).map_err(core_parse_err)?;
            let mut cfg = config.aco.unwrap_or_default();
            if let Some(iters) = spec.budget {
                cfg.iterations = iters;
            }
            let result = aco_tsp_solve(&inst, &cfg, spec.seed).map_err(core_config_err)?;
            let check = tour_length(&inst, &result.best_tour).map_err(core_config_err)?;
            debug_assert_eq!(check, result.best_length);
            Ok(SolveOutcome {
                best_objective: result.best_length,
                best_solution: serde_json::json!(result.best_tour),
                feasible: true,
                ticks_to_best: result.iteration_found,
                spikes_total: cfg.n_agents as u64 * inst.n() as u64 * cfg.iterations,
                synaptic_events: 0,
                injected_spikes: 0,
                n_neurons: inst.n(),
                ticks: cfg.iterations,
            })
        }
        Solver::Osnn => {
            let func: FunctionSpec =
                serde_json::from_str(text).map_err(|e| CliError::parse(e.to_string()))?;
            let objective = func.objective()?;
            let mut cfg = config.osnn.unwrap_or_default();
            cfg.dims = func.dims;
            if let Some(iters) = spec.budget {
                cfg.iterations = iters;
            }
            let bounds = vec![(func.lower, func.upper); func.dims];
            let result = osnn_solve(&*objective, &bounds, &cfg, spec.seed).map_err(core_config_err)?;
            let ticks_to_best = result.gb_trajectory.last().map_or(0, |&(t, _)| t);
            Ok(SolveOutcome {
                best_objective: result.objective,
                best_solution: serde_json::json!(result.best),
                feasible: true,
                ticks_to_best,
                spikes_total: result.spikes_total,
                synaptic_events: result.spikes_total, // one-way ring: one synapse per spike
                injected_spikes: 0,
                n_neurons: cfg.n_particles * cfg.dims,
                ticks: result.sweeps,
            })
        }
        Solver::Qp => {
            let inst = problems::parse_qp_str(text).map_err(core_parse_err)?;
            let mut sched = config.qp.unwrap_or_default();
            if let Some(iters) = spec.budget {
                sched.max_iters = iters as usize;
            }
            let solution = solve_qp(&inst, &sched).map_err(core_config_err)?;
            if let Some(path) = &spec.trajectories {
                let mut csv = String::from("iter,f,max_violation\n");
                for (iter, f, violation) in &solution.residuals {
                    csv.push_str(&format!("{iter},{f},{violation}\n"));
                }
                std::fs::write(path, csv).map_err(|e| {
                    CliError { code: exit_code::OTHER, message: format!("cannot write {}: {e}", path.display()) }
                })?;
            }
            Ok(SolveOutcome {
                best_objective: solution.objective,
                best_solution: serde_json::json!(solution.state.x),
                feasible: solution.max_violation <= 1e-3,
                ticks_to_best: solution.iterations as u64,
                spikes_total: 0,
                synaptic_events: 0,
                injected_spikes: 0,
                n_neurons: inst.l + inst.m,
                ticks: solution.iterations as u64,
            })
        }
        Solver::Sssp => {
            let graph = parse_graph_str(text, false).map_err(core_parse_err)?;
            let source = spec.source.unwrap_or(0);
            let mut net = build_graph_network(&graph).map_err(core_config_err)?;
            let (table, trace) = sssp_traced(&mut net, source).map_err(core_config_err)?;
            let reachable_total: u64 = table.times.iter().flatten().sum();
            let furthest = table.times.iter().flatten().max().copied().unwrap_or(0);
            Ok(SolveOutcome {
                best_objective: reachable_total as f64,
                best_solution: serde_json::json!(table.times),
                feasible: true,
                ticks_to_best: furthest,
                spikes_total: trace.total_spikes(),
                synaptic_events: trace.delivered_events,
                injected_spikes: trace.injected_spikes,
                n_neurons: graph.n,
                ticks: trace.ticks,
            })
        }
        Solver::Plan => {
            let world = parse_grid_str(text).map_err(core_parse_err)?;
            let path = plan_path(&world).map_err(core_config_err)?;
            let n_neurons = world.obstacles.iter().filter(|&&b| !b).count();
            match path {
                Some(cells) => Ok(SolveOutcome {
                    best_objective: (cells.len() - 1) as f64,
                    best_solution: serde_json::json!(cells),
                    feasible: true,
                    ticks_to_best: (cells.len() - 1) as u64,
                    spikes_total: 0,
                    synaptic_events: 0,
                    injected_spikes: 0,
                    n_neurons,
                    ticks: 0,
                }),
                None => Ok(SolveOutcome {
                    best_objective: f64::INFINITY,
                    best_solution: serde_json::Value::Null,
                    feasible: false,
                    ticks_to_best: 0,
                    spikes_total: 0,
                    synaptic_events: 0,
                    injected_spikes: 0,
                    n_neurons,
                    ticks: 0,
                }),
            }
        }
    }
}

fn load_csp(spec: &RunSpec, text: &str) -> CliResult<CspInstance> {
    match spec.kind {
        ProblemKind::Csp => problems::parse_csp_str(text).map_err(core_parse_err),
        ProblemKind::Coloring => {
            let (n, edges) = problems::parse_dimacs_graph_str(text).map_err(core_parse_err)?;
            let k = spec.colors.ok_or_else(|| {
                CliError::config("graph coloring needs --colors".to_string())
            })?;
            CspInstance::graph_coloring(n, &edges, k).map_err(core_parse_err)
        }
        _ => unreachable!("guarded by Solver::accepts"),
    }
}

/// Serializes a record with stable field order, `Infinity` mapped to null.
pub fn record_to_json(record: &ResultRecord) -> String {
    serde_json::to_string_pretty(record).expect("record serializes")
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

/// Brute-force oracle output.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleRecord {
    pub version: u32,
    pub problem_id: String,
    pub problem_hash: String,
    pub kind: String,
    pub optimum: f64,
    pub solution: serde_json::Value,
}

pub fn cmd_oracle(path: &Path, kind: ProblemKind) -> CliResult<OracleRecord> {
    let text = read_file(path)?;
    let hash = sha256_hex(text.as_bytes());
    let cap_err = |e: CoreError| match e {
        CoreError::TooLarge(msg) => CliError { code: exit_code::ORACLE_CAP, message: msg },
        other => CliError::parse(other.to_string()),
    };
    let (optimum, solution, kind_name) = match kind {
        ProblemKind::Qubo => {
            let inst = problems::parse_qubo_str(&text).map_err(core_parse_err)?;
            let (x, obj) = problems::brute_force_qubo(&inst).map_err(cap_err)?;
            (obj, serde_json::json!(x), "qubo")
        }
        ProblemKind::Cnf => {
            let f = problems::parse_dimacs_str(&text).map_err(core_parse_err)?;
            let (a, satisfied, _) = problems::brute_force_cnf(&f).map_err(cap_err)?;
            ((f.clauses.len() - satisfied) as f64, serde_json::json!(a), "cnf")
        }
        ProblemKind::Csp => {
            let inst = problems::parse_csp_str(&text).map_err(core_parse_err)?;
            let (a, violations) = problems::brute_force_csp(&inst).map_err(cap_err)?;
            (violations as f64, serde_json::json!(a), "csp")
        }
        ProblemKind::Tsp => {
            let inst = problems::parse_tsp_str(&text).map_err(core_parse_err)?;
            let (tour, len) = problems::brute_force_tsp(&inst).map_err(cap_err)?;
            (len, serde_json::json!(tour), "tsp")
        }
        other => {
            return Err(CliError::incompatible(format!(
                "no brute-force oracle for problem kind {other:?}"
            )))
        }
    };
    Ok(OracleRecord {
        version: SCHEMA_VERSION,
        problem_id: problem_id(path),
        problem_hash: hash,
        kind: kind_name.to_string(),
        optimum,
        solution,
    })
}

// ---------------------------------------------------------------------------
// convert
// ---------------------------------------------------------------------------

/// QUBO text to Ising JSON, or Ising JSON back to QUBO text (plus the
/// residual constant of the inverse substitution).
pub fn cmd_convert(path: &Path, kind: ProblemKind) -> CliResult<(String, Option<f64>)> {
    let text = read_file(path)?;
    match kind {
        ProblemKind::Qubo => {
            let inst = problems::parse_qubo_str(&text).map_err(core_parse_err)?;
            let ising = problems::qubo_to_ising(&inst);
            Ok((serde_json::to_string_pretty(&ising).expect("serializes"), None))
        }
        ProblemKind::Ising => {
            let ising: problems::IsingInstance =
                serde_json::from_str(&text).map_err(|e| CliError::parse(e.to_string()))?;
            let (qubo, residual) = problems::ising_to_qubo(&ising).map_err(core_parse_err)?;
            Ok((problems::write_qubo_str(&qubo), Some(residual)))
        }
        other => Err(CliError::incompatible(format!("convert expects qubo or ising, got {other:?}"))),
    }
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

/// One suite entry: a (problem, solver, config) triple.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteEntry {
    pub problem: PathBuf,
    pub kind: ProblemKind,
    pub solver: Solver,
    #[serde(default)]
    pub config: Option<PathBuf>,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub colors: Option<usize>,
    #[serde(default)]
    pub source: Option<u32>,
}

/// One bench row; wall time is intentionally not part of the CSV.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub problem: String,
    pub kind: ProblemKind,
    pub solver: Solver,
    pub seed: u64,
    pub record: Option<ResultRecord>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BenchSummary {
    pub version: u32,
    pub rows: usize,
    pub success_rate: f64,
    pub median_ticks_to_best: f64,
    pub mean_energy_joules: f64,
}

pub const BENCH_CSV_HEADER: &str =
    "problem,kind,solver,seed,best_objective,feasible,ticks_to_best,spikes_total,synaptic_events,failure";

pub fn bench_rows_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for row in rows {
        let kind = serde_json::to_value(row.kind).expect("kind serializes");
        let base = format!(
            "{},{},{},{}",
            row.problem,
            kind.as_str().expect("kind is a string"),
            row.solver.name(),
            row.seed
        );
        match (&row.record, &row.failure) {
            (Some(r), None) => {
                out.push_str(&format!(
                    "{base},{},{},{},{},{},\n",
                    r.best_objective, r.feasible, r.ticks_to_best, r.spikes_total, r.synaptic_events
                ));
            }
            (_, Some(err)) => {
                let clean = err.replace([',', '\n'], ";");
                out.push_str(&format!("{base},,,,,,{clean}\n"));
            }
            _ => out.push_str(&format!("{base},,,,,,unknown\n")),
        }
    }
    out
}

/// Runs every (entry, seed) pair, optionally across worker threads; rows
/// keep suite order regardless of parallelism.
pub fn cmd_bench(suite: &[SuiteEntry], seeds: &[u64], jobs: usize) -> CliResult<(Vec<BenchRow>, BenchSummary)> {
    let mut tasks = Vec::new();
    for entry in suite {
        for &seed in seeds {
            tasks.push((entry.clone(), seed));
        }
    }
    let run_one = |(entry, seed): &(SuiteEntry, u64)| -> BenchRow {
        let spec = RunSpec {
            problem_path: entry.problem.clone(),
            kind: entry.kind,
            solver: entry.solver,
            config_path: entry.config.clone(),
            seed: *seed,
            budget: entry.budget,
            source: entry.source,
            colors: entry.colors,
            trajectories: None,
        };
        let (record, failure) = match cmd_solve(&spec) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.message)),
        };
        BenchRow {
            problem: problem_id(&entry.problem),
            kind: entry.kind,
            solver: entry.solver,
            seed: *seed,
            record,
            failure,
        }
    };
    let rows: Vec<BenchRow> = if jobs > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliError { code: exit_code::OTHER, message: e.to_string() })?;
        pool.install(|| tasks.par_iter().map(run_one).collect())
    } else {
        tasks.iter().map(run_one).collect()
    };

    let successes = rows
        .iter()
        .filter(|r| r.failure.is_none() && r.record.as_ref().is_some_and(|rec| rec.feasible))
        .count();
    let mut ticks: Vec<u64> = rows
        .iter()
        .filter_map(|r| r.record.as_ref().map(|rec| rec.ticks_to_best))
        .collect();
    ticks.sort_unstable();
    let median_ticks = if ticks.is_empty() { 0.0 } else { ticks[ticks.len() / 2] as f64 };
    let energies: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.record.as_ref().map(|rec| rec.energy.total))
        .collect();
    let mean_energy = if energies.is_empty() {
        0.0
    } else {
        energies.iter().sum::<f64>() / energies.len() as f64
    };
    let summary = BenchSummary {
        version: SCHEMA_VERSION,
        rows: rows.len(),
        success_rate: successes as f64 / rows.len().max(1) as f64,
        median_ticks_to_best: median_ticks,
        mean_energy_joules: mean_energy,
    };
    Ok((rows, summary))
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

/// Instance generator parameters.
#[derive(Debug, Clone)]
pub enum GenSpec {
    Qubo { n: usize, lo: i64, hi: i64 },
    Cnf { n: usize, m: usize },
    Tsp { n: usize },
    Qp { l: usize, m: usize, lp: bool },
    Graph { n: usize, p: f64, w_max: u32 },
    Grid { width: usize, height: usize, p: f64 },
}

/// Writes a random instance in its file format.
pub fn cmd_gen(spec: &GenSpec, seed: u64) -> CliResult<String> {
    use rand::{Rng, SeedableRng};
    Ok(match spec {
        GenSpec::Qubo { n, lo, hi } => {
            problems::write_qubo_str(&problems::gen_random_qubo(*n, *lo, *hi, seed))
        }
        GenSpec::Cnf { n, m } => problems::write_dimacs_str(&problems::gen_random_3sat(*n, *m, seed)),
        GenSpec::Tsp { n } => problems::write_tsp_str(&problems::gen_random_tsp(*n, seed)),
        GenSpec::Qp { l, m, lp } => problems::write_qp_str(&problems::gen_random_qp(*l, *m, *lp, seed)),
        GenSpec::Graph { n, p, w_max } => {
            // undirected convention: each edge stored once as u < v
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for u in 0..*n {
                for v in (u + 1)..*n {
                    if rng.gen::<f64>() < *p {
                        edges.push((u, v, rng.gen_range(1..=*w_max)));
                    }
                }
            }
            let graph = spikeopt::wavefront::WeightedGraph::new(*n, edges, false)
                .map_err(core_config_err)?;
            spikeopt::wavefront::write_graph_str(&graph)
        }
        GenSpec::Grid { width, height, p } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut cells: Vec<Vec<char>> = (0..*height)
                .map(|_| (0..*width).map(|_| if rng.gen::<f64>() < *p { '#' } else { '.' }).collect())
                .collect();
            let free: Vec<(usize, usize)> = (0..width * height)
                .map(|i| (i % width, i / width))
                .filter(|&(x, y)| cells[y][x] == '.')
                .collect();
            if free.len() < 2 {
                return Err(CliError::config("grid too dense: fewer than two free cells"));
            }
            let s = free[rng.gen_range(0..free.len())];
            let mut g = s;
            while g == s {
                g = free[rng.gen_range(0..free.len())];
            }
            cells[s.1][s.0] = 'S';
            cells[g.1][g.0] = 'G';
            cells.into_iter().map(|row| row.into_iter().collect::<String>() + "\n").collect()
        }
    })
}
