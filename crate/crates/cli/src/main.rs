//! Command-line front end for the shrink-and-solve pipeline.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Value};

use qshrink::feasibility::{self, ConstraintPenalty, ViolationMetric};
use qshrink::instances::{parse_metadata, ProblemInstance, ProblemKind};
use qshrink::maxcut::{maxcut_to_qubo, qubo_to_maxcut, MaxCutGraph};
use qshrink::pipeline::{self, bench_csv, bench_jobs, run_bench, PipelineConfig, Strategy};
use qshrink::qubo::{build_parts, decision_bits, recommend_penalty, PenaltyPolicy, QuboModel};
use qshrink::reconstruct::lift_and_decode;
use qshrink::shrink::{run_shrink, steps_to_jsonl, MergePenalty, NoPenalty, RecalcPolicy, ShrinkConfig, ShrinkResult, StopRule};
use qshrink::solvers::{SaSchedule, SolverConfig, VqeConfig, EXACT_MAX_VARS};
use qshrink::spectral::{EnergyOrder, WeightMode};
use qshrink::Execution;

/// Exit status for a run that finished but left an infeasible solution.
const EXIT_INFEASIBLE: u8 = 2;

#[derive(Parser)]
#[command(name = "qshrink", version, about = "Constraint-aware QUBO shrinking and solving")]
struct Cli {
    /// Top-level seed for every random stream.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// TOML file mirroring the pipeline configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the penalized QUBO of a problem instance.
    BuildQubo {
        #[command(flatten)]
        problem: ProblemArgs,
        #[command(flatten)]
        penalty: PenaltyArgs,
    },
    /// Map a QUBO document to its weighted Max-Cut graph.
    ToMaxcut {
        /// QUBO JSON document.
        input: PathBuf,
    },
    /// Shrink a graph by correlation-guided contraction.
    Shrink {
        /// QUBO or graph JSON document.
        input: PathBuf,
        /// Target node count, reference node included.
        #[arg(long, conflicts_with = "alpha")]
        k: Option<usize>,
        /// Spectral energy retention threshold.
        #[arg(long)]
        alpha: Option<f64>,
        /// Instance file enabling constraint-aware merging; requires a QUBO input.
        #[arg(long, requires = "kind")]
        problem: Option<PathBuf>,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
        /// Write the merge log as JSON lines.
        #[arg(long)]
        steps: Option<PathBuf>,
        #[command(flatten)]
        shrink: ShrinkArgs,
    },
    /// Solve a QUBO, a graph, or the reduced graph of a shrink result.
    Solve {
        /// QUBO, graph, or shrink-result JSON document.
        input: PathBuf,
        /// Original QUBO used to lift a shrink result back to its variables.
        #[arg(long)]
        original: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run the full workflow on one instance and emit a JSON report.
    Pipeline {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(long, value_enum, conflicts_with_all = ["k", "alpha"])]
        strategy: Option<StrategyArg>,
        /// Target number of QUBO variables.
        #[arg(long, conflicts_with = "alpha")]
        k: Option<usize>,
        /// Spectral energy retention threshold.
        #[arg(long)]
        alpha: Option<f64>,
        /// Known optimum used for the quality metric.
        #[arg(long)]
        optimum: Option<f64>,
        #[arg(long)]
        no_local_search: bool,
        #[command(flatten)]
        penalty: PenaltyArgs,
        #[command(flatten)]
        shrink: ShrinkArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Run every instance of a directory under several strategies and emit CSV.
    Bench {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Directory of instance files.
        dir: PathBuf,
        /// Known optima as `name value` lines; defaults to `metadata.txt` in the directory.
        #[arg(long)]
        metadata: Option<PathBuf>,
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [StrategyArg::TwoThirds, StrategyArg::Half, StrategyArg::Adaptive])]
        strategies: Vec<StrategyArg>,
        /// Merge-penalty weights to sweep; defaults to the configured one.
        #[arg(long, value_delimiter = ',')]
        lambdas: Vec<f64>,
        /// Leave timing columns empty so reruns are byte-identical.
        #[arg(long)]
        no_timings: bool,
        #[command(flatten)]
        penalty: PenaltyArgs,
        #[command(flatten)]
        shrink: ShrinkArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check a solution document against its instance.
    Verify {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Solution JSON `{instance, bits}`.
        solution: PathBuf,
    },
    /// Make a solution feasible with the greedy repair of its problem kind.
    Repair {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Solution JSON `{instance, bits}`.
        solution: PathBuf,
        /// How the most violated knapsack row is chosen.
        #[arg(long, value_enum, default_value_t = MetricArg::Absolute)]
        metric: MetricArg,
    },
}

#[derive(Args)]
struct ProblemArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    /// Instance file in the native format of its kind.
    instance: PathBuf,
}

#[derive(Args)]
struct PenaltyArgs {
    /// Penalty multiplier; the per-kind default when omitted.
    #[arg(long)]
    multiplier: Option<f64>,
    /// Encode knapsack inequalities with binary slack variables.
    #[arg(long)]
    slack: bool,
}

#[derive(Args)]
struct ShrinkArgs {
    /// Weight of the constraint penalty in the merge score.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_enum)]
    recalc: Option<RecalcArg>,
    /// Merges between full re-solves.
    #[arg(long)]
    r: Option<usize>,
    /// Relative edge-count change that triggers a re-solve.
    #[arg(long)]
    delta: Option<f64>,
    /// Correlation floor that triggers a re-solve.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long, value_enum)]
    weight_mode: Option<WeightModeArg>,
    #[arg(long, value_enum)]
    energy_order: Option<EnergyOrderArg>,
    #[arg(long)]
    sdp_tol: Option<f64>,
    #[arg(long)]
    sdp_rank: Option<usize>,
    #[arg(long)]
    sdp_max_sweeps: Option<usize>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum)]
    backend: Option<BackendArg>,
    /// Largest model the exact backend accepts.
    #[arg(long)]
    max_vars: Option<usize>,
    #[arg(long)]
    t_start: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    sweeps: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    shots: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Mdkp,
    Mis,
    Qap,
}

impl From<KindArg> for ProblemKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Mdkp => ProblemKind::Mdkp,
            KindArg::Mis => ProblemKind::Mis,
            KindArg::Qap => ProblemKind::Qap,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum StrategyArg {
    TwoThirds,
    Half,
    Adaptive,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecalcArg {
    Fixed,
    Delta,
    Tau,
    Local,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightModeArg {
    Absolute,
    Raw,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnergyOrderArg {
    Ascending,
    Descending,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Sa,
    Vqe,
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    Absolute,
    Relative,
}

#[derive(Deserialize)]
struct SolutionDoc {
    instance: String,
    bits: Vec<u8>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let mut base = load_config(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        base.seed = seed;
    }
    if cli.sequential {
        base.exec = Execution::Sequential;
    }
    let out = cli.out.as_deref();

    match cli.command {
        Command::BuildQubo { problem, penalty } => {
            let (_, inst) = load_instance(&problem)?;
            let policy = penalty.apply(base.penalty, inst.kind());
            let p = recommend_penalty(&inst, &policy);
            let model = build_parts(&inst, p, policy.use_slack)?.combined();
            emit(out, &serde_json::to_string_pretty(&model)?)?;
        }
        Command::ToMaxcut { input } => {
            let model: QuboModel = read_json(&input)?;
            emit(out, &serde_json::to_string_pretty(&qubo_to_maxcut(&model))?)?;
        }
        Command::Shrink { input, k, alpha, problem, kind, steps, shrink } => {
            let mut cfg = base.shrink.clone();
            shrink.apply(&mut cfg)?;
            cfg.seed = base.seed;
            cfg.sdp.seed = base.seed;
            cfg.exec = base.exec;
            if let Some(k) = k {
                cfg.stop = StopRule::Size { k };
            } else if let Some(alpha) = alpha {
                cfg.stop = StopRule::Spectral { alpha, weight_mode: shrink.weight_mode(), order: shrink.energy_order() };
            }
            let (graph, model) = match read_document(&input)? {
                Document::Qubo(m) => (qubo_to_maxcut(&m), Some(m)),
                Document::Graph(g) => (g, None),
                Document::Shrink(_) => bail!("{} is already a shrink result", input.display()),
            };
            let inst = match (problem, kind) {
                (Some(path), Some(kind)) => Some(load_instance(&ProblemArgs { kind, instance: path })?.1),
                _ => None,
            };
            let result = match (&inst, &model) {
                (Some(inst), Some(model)) if cfg.lambda > 0.0 => {
                    let pi = ConstraintPenalty::new(inst, graph.var_map(), model.semantics());
                    run_shrink(&graph, &cfg, &pi)?
                }
                (Some(_), None) => bail!("constraint-aware shrinking needs the QUBO document as input"),
                _ => run_shrink(&graph, &cfg, &NoPenalty as &dyn MergePenalty)?,
            };
            if let Some(path) = steps {
                write_file(&path, &steps_to_jsonl(&result.steps)?)?;
            }
            emit(out, &serde_json::to_string_pretty(&result)?)?;
        }
        Command::Solve { input, original, solver } => {
            let cfg = solver.apply(base.solver);
            let name = stem(&input);
            let doc = match read_document(&input)? {
                Document::Qubo(model) => {
                    let sol = cfg.solve(&model, base.seed, base.exec)?;
                    json!({
                        "instance": name,
                        "bits": decision_bits(&model, &sol.bits),
                        "qubo_bits": sol.bits,
                        "energy": sol.energy,
                        "backend": sol.backend,
                        "evals_or_sweeps": sol.evals_or_sweeps,
                    })
                }
                Document::Graph(graph) => {
                    let model = maxcut_to_qubo(&graph);
                    let sol = cfg.solve(&model, base.seed, base.exec)?;
                    json!({ "instance": name, "bits": sol.bits, "energy": sol.energy, "backend": sol.backend })
                }
                Document::Shrink(result) => {
                    let path = original.context("solving a shrink result needs --original <qubo.json>")?;
                    let model: QuboModel = read_json(&path)?;
                    let graph = qubo_to_maxcut(&model);
                    let reduced = maxcut_to_qubo(&result.reduced);
                    let sol = cfg.solve(&reduced, base.seed, base.exec)?;
                    let lifted = lift_and_decode(&model, &graph, &result, &sol)?;
                    json!({
                        "instance": stem(&path),
                        "bits": lifted.decision,
                        "qubo_bits": lifted.bits,
                        "energy": lifted.energy,
                        "reduced_energy": sol.energy,
                        "backend": sol.backend,
                        "problem_solution": lifted.problem_solution,
                    })
                }
            };
            emit(out, &serde_json::to_string_pretty(&doc)?)?;
        }
        Command::Pipeline { problem, strategy, k, alpha, optimum, no_local_search, penalty, shrink, solver } => {
            let (name, mut inst) = load_instance(&problem)?;
            if let Some(opt) = optimum {
                inst.set_known_optimum(opt);
            }
            let mut cfg = base;
            cfg.penalty = Some(penalty.apply(cfg.penalty, inst.kind()));
            shrink.apply(&mut cfg.shrink)?;
            cfg.solver = solver.apply(cfg.solver);
            if no_local_search {
                cfg.local_search = false;
            }
            if let Some(s) = strategy {
                cfg.strategy = Some(s.resolve(&shrink));
            } else if let Some(k) = k {
                cfg.strategy = Some(Strategy::Vars { k });
            } else if let Some(alpha) = alpha {
                cfg.strategy = Some(Strategy::Adaptive { alpha, weight_mode: shrink.weight_mode(), order: shrink.energy_order() });
            }
            let report = pipeline::run_pipeline(&name, &inst, &cfg)?;
            emit(out, &serde_json::to_string_pretty(&report)?)?;
            if !report.feasible_after {
                return Ok(ExitCode::from(EXIT_INFEASIBLE));
            }
        }
        Command::Bench { kind, dir, metadata, strategies, lambdas, no_timings, penalty, shrink, solver } => {
            let mut cfg = base;
            cfg.penalty = Some(penalty.apply(cfg.penalty, kind.into()));
            shrink.apply(&mut cfg.shrink)?;
            cfg.solver = solver.apply(cfg.solver);
            let instances = load_directory(kind.into(), &dir, metadata.as_deref())?;
            let strategies: Vec<Strategy> = strategies.iter().map(|s| s.resolve(&shrink)).collect();
            let lambdas = if lambdas.is_empty() { vec![cfg.shrink.lambda] } else { lambdas };
            let exec = cfg.exec;
            // Jobs run side by side; each pipeline stays on its own thread.
            cfg.exec = Execution::Sequential;
            let jobs = bench_jobs(&instances, &strategies, &lambdas, &cfg);
            let rows = run_bench(&jobs, exec);
            for row in &rows {
                if let Err(e) = &row.outcome {
                    log::warn!("{} ({}): {e}", row.name, row.strategy);
                }
            }
            emit(out, &bench_csv(&rows, no_timings)?)?;
        }
        Command::Verify { problem, solution } => {
            let (_, inst) = load_instance(&problem)?;
            let doc: SolutionDoc = read_json(&solution)?;
            let feasible = feasibility::verify(&inst, &doc.bits)?;
            let objective = pipeline::objective(&inst, &doc.bits)?;
            let body = json!({ "instance": doc.instance, "feasible": feasible, "objective": objective });
            emit(out, &serde_json::to_string_pretty(&body)?)?;
            if !feasible {
                return Ok(ExitCode::from(EXIT_INFEASIBLE));
            }
        }
        Command::Repair { problem, solution, metric } => {
            let (_, inst) = load_instance(&problem)?;
            let doc: SolutionDoc = read_json(&solution)?;
            let (bits, report) = match (&inst, metric) {
                (ProblemInstance::Mdkp(m), MetricArg::Relative) => {
                    feasibility::repair_mdkp_with(m, &doc.bits, ViolationMetric::Relative)?
                }
                _ => feasibility::repair(&inst, &doc.bits)?,
            };
            let body = json!({ "instance": doc.instance, "bits": bits, "repair": report });
            emit(out, &serde_json::to_string_pretty(&body)?)?;
            if !report.final_feasible {
                return Ok(ExitCode::from(EXIT_INFEASIBLE));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

impl PenaltyArgs {
    fn apply(&self, configured: Option<PenaltyPolicy>, kind: ProblemKind) -> PenaltyPolicy {
        let mut policy = configured.unwrap_or_else(|| PenaltyPolicy::default_for(kind));
        if let Some(m) = self.multiplier {
            policy.multiplier = m;
        }
        policy.use_slack |= self.slack;
        policy
    }
}

impl ShrinkArgs {
    fn weight_mode(&self) -> WeightMode {
        match self.weight_mode {
            Some(WeightModeArg::Raw) => WeightMode::Raw,
            _ => WeightMode::Absolute,
        }
    }

    fn energy_order(&self) -> EnergyOrder {
        match self.energy_order {
            Some(EnergyOrderArg::Descending) => EnergyOrder::Descending,
            _ => EnergyOrder::Ascending,
        }
    }

    fn apply(&self, cfg: &mut ShrinkConfig) -> Result<()> {
        if let Some(lambda) = self.lambda {
            cfg.lambda = lambda;
        }
        let mode = self.recalc.or(if self.r.is_some() {
            Some(RecalcArg::Fixed)
        } else if self.delta.is_some() {
            Some(RecalcArg::Delta)
        } else if self.tau.is_some() {
            Some(RecalcArg::Tau)
        } else {
            None
        });
        let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| anyhow!("--recalc {flag} needs --{flag}"));
        match mode {
            Some(RecalcArg::Fixed) => cfg.recalc = RecalcPolicy::Fixed { r: self.r.unwrap_or(10) },
            Some(RecalcArg::Delta) => cfg.recalc = RecalcPolicy::Delta { delta: need(self.delta, "delta")? },
            Some(RecalcArg::Tau) => cfg.recalc = RecalcPolicy::Tau { tau: need(self.tau, "tau")? },
            Some(RecalcArg::Local) => cfg.recalc = RecalcPolicy::Local,
            None => {}
        }
        if let StopRule::Spectral { weight_mode, order, .. } = &mut cfg.stop {
            if self.weight_mode.is_some() {
                *weight_mode = self.weight_mode();
            }
            if self.energy_order.is_some() {
                *order = self.energy_order();
            }
        }
        if let Some(tol) = self.sdp_tol {
            cfg.sdp.tol = tol;
        }
        if let Some(rank) = self.sdp_rank {
            cfg.sdp.rank = Some(rank);
        }
        if let Some(sweeps) = self.sdp_max_sweeps {
            cfg.sdp.max_sweeps = sweeps;
        }
        Ok(())
    }
}

impl StrategyArg {
    fn resolve(self, shrink: &ShrinkArgs) -> Strategy {
        match self {
            StrategyArg::TwoThirds => Strategy::TwoThirds,
            StrategyArg::Half => Strategy::Half,
            StrategyArg::Adaptive => match Strategy::adaptive() {
                Strategy::Adaptive { alpha, .. } => {
                    Strategy::Adaptive { alpha, weight_mode: shrink.weight_mode(), order: shrink.energy_order() }
                }
                other => other,
            },
        }
    }
}

impl SolverArgs {
    fn apply(&self, configured: SolverConfig) -> SolverConfig {
        let mut cfg = match (self.backend, configured) {
            (None, c) => c,
            (Some(BackendArg::Exact), c @ SolverConfig::Exact { .. }) => c,
            (Some(BackendArg::Sa), c @ SolverConfig::Sa { .. }) => c,
            (Some(BackendArg::Vqe), c @ SolverConfig::Vqe { .. }) => c,
            (Some(BackendArg::Exact), _) => SolverConfig::Exact { max_vars: EXACT_MAX_VARS },
            (Some(BackendArg::Sa), _) => SolverConfig::Sa { schedule: SaSchedule::default() },
            (Some(BackendArg::Vqe), _) => {
                let d = VqeConfig::default();
                SolverConfig::Vqe { layers: d.layers, shots: d.shots, max_iters: d.max_iters }
            }
        };
        match &mut cfg {
            SolverConfig::Exact { max_vars } => {
                if let Some(m) = self.max_vars {
                    *max_vars = m;
                }
            }
            SolverConfig::Sa { schedule } => {
                schedule.t_start = self.t_start.or(schedule.t_start);
                schedule.t_end = self.t_end.or(schedule.t_end);
                schedule.sweeps = self.sweeps.or(schedule.sweeps);
            }
            SolverConfig::Vqe { layers, shots, max_iters } => {
                *layers = self.layers.unwrap_or(*layers);
                *shots = self.shots.unwrap_or(*shots);
                *max_iters = self.max_iters.unwrap_or(*max_iters);
            }
        }
        cfg
    }
}

enum Document {
    Qubo(QuboModel),
    Graph(MaxCutGraph),
    Shrink(Box<ShrinkResult>),
}

/// Tells the three JSON documents apart by their distinguishing key.
fn read_document(path: &Path) -> Result<Document> {
    let value: Value = read_json(path)?;
    let parse = |v: Value| -> Result<Document> {
        if v.get("reduced").is_some() {
            Ok(Document::Shrink(Box::new(serde_json::from_value(v)?)))
        } else if v.get("n_nodes").is_some() {
            Ok(Document::Graph(serde_json::from_value(v)?))
        } else if v.get("n_vars").is_some() {
            Ok(Document::Qubo(serde_json::from_value(v)?))
        } else {
            bail!("not a QUBO, graph, or shrink-result document")
        }
    };
    parse(value).with_context(|| format!("reading {}", path.display()))
}

fn load_config(path: Option<&Path>) -> Result<PipelineConfig> {
    let Some(path) = path else {
        return Ok(PipelineConfig::default());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

fn load_instance(args: &ProblemArgs) -> Result<(String, ProblemInstance)> {
    let text = std::fs::read_to_string(&args.instance).with_context(|| format!("reading {}", args.instance.display()))?;
    let inst = ProblemInstance::parse(args.kind.into(), &text).with_context(|| format!("parsing {}", args.instance.display()))?;
    Ok((stem(&args.instance), inst))
}

/// Every regular file of `dir` except the metadata sidecar, sorted by name.
fn load_directory(kind: ProblemKind, dir: &Path, metadata: Option<&Path>) -> Result<Vec<(String, ProblemInstance)>> {
    let sidecar = metadata.map(Path::to_path_buf).unwrap_or_else(|| dir.join("metadata.txt"));
    let optima = if sidecar.is_file() {
        parse_metadata(&std::fs::read_to_string(&sidecar)?).with_context(|| format!("parsing {}", sidecar.display()))?
    } else if metadata.is_some() {
        bail!("metadata file {} does not exist", sidecar.display());
    } else {
        Default::default()
    };
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && !same_file(&path, &sidecar) {
            paths.push(path);
        }
    }
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(&path)?;
        let mut inst = ProblemInstance::parse(kind, &text).with_context(|| format!("parsing {}", path.display()))?;
        let name = stem(&path);
        if let Some(&opt) = optima.get(&name) {
            inst.set_known_optimum(opt);
        }
        out.push((name, inst));
    }
    Ok(out)
}

fn same_file(a: &Path, b: &Path) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(a), Ok(b)) => a == b,
        _ => false,
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, body: &str) -> Result<()> {
    let body = if body.ends_with('\n') { body.to_owned() } else { format!("{body}\n") };
    match out {
        Some(path) => write_file(path, &body),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}
