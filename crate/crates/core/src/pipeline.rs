//! End-to-end runs: build, reduce, shrink, solve, lift, repair, polish and
//! score, plus batch benchmarking with CSV output.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::feasibility::{self, bits_to_permutation, permutation_bits, ConstraintPenalty};
use crate::instances::{MdkpInstance, MisInstance, ProblemInstance, ProblemKind, QapInstance};
use crate::maxcut::{maxcut_to_qubo, qubo_to_maxcut};
use crate::qubo::{build_parts, recommend_penalty, PenaltyPolicy};
use crate::reconstruct::lift_and_decode;
use crate::shrink::{self, MergePenalty, NoPenalty, ShrinkConfig, StopRule};
use crate::solvers::SolverConfig;
use crate::spectral::{EnergyOrder, WeightMode};

/// How far to shrink, in QUBO variables of the reduced problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "snake_case")]
pub enum Strategy {
    /// `floor(2n/3)` variables.
    TwoThirds,
    /// `floor(n/2)` variables.
    Half,
    /// Spectral energy retention on the initial graph.
    Adaptive {
        #[serde(default = "default_alpha")]
        alpha: f64,
        #[serde(default)]
        weight_mode: WeightMode,
        #[serde(default)]
        order: EnergyOrder,
    },
    /// Explicit number of variables.
    Vars { k: usize },
}

fn default_alpha() -> f64 {
    0.9
}

impl Strategy {
    pub fn adaptive() -> Self {
        Strategy::Adaptive { alpha: default_alpha(), weight_mode: WeightMode::Absolute, order: EnergyOrder::Ascending }
    }

    pub fn label(&self) -> String {
        match self {
            Strategy::TwoThirds => "2/3 GS".into(),
            Strategy::Half => "1/2 GS".into(),
            Strategy::Adaptive { .. } => "Adap GS".into(),
            Strategy::Vars { k } => format!("k={k}"),
        }
    }

    /// Stop rule on a graph with `n_vars + 1` nodes; the reference node is
    /// not counted as a variable.
    pub fn stop_rule(&self, n_vars: usize) -> StopRule {
        let nodes = |vars: usize| StopRule::Size { k: vars + 1 };
        match *self {
            Strategy::TwoThirds => nodes(2 * n_vars / 3),
            Strategy::Half => nodes(n_vars / 2),
            Strategy::Adaptive { alpha, weight_mode, order } => StopRule::Spectral { alpha, weight_mode, order },
            Strategy::Vars { k } => nodes(k),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// Penalty policy; the per-kind default when unset.
    pub penalty: Option<PenaltyPolicy>,
    /// Overrides `shrink.stop` when set.
    pub strategy: Option<Strategy>,
    pub shrink: ShrinkConfig,
    pub solver: SolverConfig,
    pub local_search: bool,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            penalty: None,
            strategy: None,
            shrink: ShrinkConfig::default(),
            solver: SolverConfig::default(),
            local_search: true,
            seed: 0,
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub correlation: f64,
    pub shrinking: f64,
    pub solving: f64,
    pub repair: f64,
    pub local_search: f64,
}

impl PhaseTimings {
    pub fn sum(&self) -> f64 {
        self.correlation + self.shrinking + self.solving + self.repair + self.local_search
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub instance: String,
    pub kind: ProblemKind,
    pub strategy: String,
    pub constraint_aware: bool,
    pub penalty: f64,
    /// QUBO variables before shrinking.
    pub initial_size: usize,
    /// QUBO variables handed to the solver.
    pub final_size: usize,
    pub merges: usize,
    pub recalculations: usize,
    pub final_objective: f64,
    pub feasible_before_repair: bool,
    pub feasible_after: bool,
    pub repair_iterations: usize,
    pub optimality_gap: Option<f64>,
    pub rsq: Option<f64>,
    pub phase_timings: PhaseTimings,
    pub total_time: f64,
    pub seed: u64,
    pub solution: Vec<u8>,
    pub config: PipelineConfig,
}

/// Objective sense for gap orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

impl Sense {
    pub fn of(kind: ProblemKind) -> Self {
        match kind {
            ProblemKind::Qap => Sense::Minimize,
            _ => Sense::Maximize,
        }
    }
}

/// Percentage gap, nonnegative when `obtained` is no better than `best`.
pub fn optimality_gap(best: f64, obtained: f64, sense: Sense) -> Result<f64> {
    if best == 0.0 {
        return Err(Error::UndefinedMetric("optimality gap against a zero optimum".into()));
    }
    Ok(match sense {
        Sense::Maximize => (best - obtained) / best * 100.0,
        Sense::Minimize => (obtained - best) / best * 100.0,
    })
}

/// Relative solution quality `obtained / best * 100`.
pub fn rsq(best: f64, obtained: f64) -> Result<f64> {
    if best <= 0.0 {
        return Err(Error::UndefinedMetric(format!("relative quality against optimum {best}")));
    }
    Ok(obtained / best * 100.0)
}

/// Problem-level objective of a decision vector.
pub fn objective(inst: &ProblemInstance, x: &[u8]) -> Result<f64> {
    if x.len() != inst.decision_len() {
        return Err(Error::contract("solution length does not match the instance"));
    }
    Ok(match inst {
        ProblemInstance::Mdkp(i) => i.profit(x),
        ProblemInstance::Mis(_) => x.iter().filter(|&&b| b == 1).count() as f64,
        ProblemInstance::Qap(i) => {
            let perm = bits_to_permutation(i.n(), x)
                .ok_or_else(|| Error::contract("assignment matrix is not a permutation"))?;
            i.cost(&perm)
        }
    })
}

/// First-improvement hill climbing that keeps the solution feasible.
pub fn local_search(inst: &ProblemInstance, x: &[u8]) -> Result<Vec<u8>> {
    if !feasibility::verify(inst, x)? {
        return Err(Error::contract("local search needs a feasible starting point"));
    }
    Ok(match inst {
        ProblemInstance::Mdkp(i) => local_search_mdkp(i, x),
        ProblemInstance::Mis(i) => local_search_mis(i, x),
        ProblemInstance::Qap(i) => local_search_qap(i, x),
    })
}

fn local_search_mdkp(inst: &MdkpInstance, x: &[u8]) -> Vec<u8> {
    let mut x = x.to_vec();
    let mut loads = inst.loads(&x);
    for i in 0..inst.n() {
        if x[i] == 1 || inst.profits()[i] <= 0.0 {
            continue;
        }
        let fits = (0..inst.m()).all(|j| loads[j] + inst.weights()[j][i] <= inst.capacities()[j]);
        if fits {
            x[i] = 1;
            for (j, load) in loads.iter_mut().enumerate() {
                *load += inst.weights()[j][i];
            }
        }
    }
    x
}

fn local_search_mis(inst: &MisInstance, x: &[u8]) -> Vec<u8> {
    let mut x = x.to_vec();
    let neighbors = inst.neighbors();
    for v in 0..inst.n() {
        if x[v] == 0 && neighbors[v].iter().all(|&u| x[u] == 0) {
            x[v] = 1;
        }
    }
    x
}

fn local_search_qap(inst: &QapInstance, x: &[u8]) -> Vec<u8> {
    let n = inst.n();
    let Some(mut perm) = bits_to_permutation(n, x) else {
        return x.to_vec();
    };
    let mut cost = inst.cost(&perm);
    'outer: loop {
        for a in 0..n {
            for b in a + 1..n {
                perm.swap(a, b);
                let c = inst.cost(&perm);
                if c < cost {
                    cost = c;
                    continue 'outer;
                }
                perm.swap(a, b);
            }
        }
        break;
    }
    permutation_bits(&perm)
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(name))
}

/// Runs the full workflow on one instance.
pub fn run_pipeline(name: &str, inst: &ProblemInstance, config: &PipelineConfig) -> Result<Report> {
    let started = Instant::now();
    let kind = inst.kind();
    let policy = config.penalty.unwrap_or_else(|| PenaltyPolicy::default_for(kind));
    let p = recommend_penalty(inst, &policy);
    let parts = stage("qubo", build_parts(inst, p, policy.use_slack))?;
    let model = parts.combined();
    let graph = qubo_to_maxcut(&model);
    let n_vars = model.n_vars();

    let mut shrink_cfg = config.shrink.clone();
    if let Some(strategy) = config.strategy {
        shrink_cfg.stop = strategy.stop_rule(n_vars);
    }
    shrink_cfg.seed = config.seed;
    shrink_cfg.sdp.seed = config.seed;
    shrink_cfg.exec = config.exec;
    let constraint_aware = shrink_cfg.lambda > 0.0;
    let aware = ConstraintPenalty::new(inst, graph.var_map(), model.semantics());
    let pi: &dyn MergePenalty = if constraint_aware { &aware } else { &NoPenalty };
    let shrunk = stage("shrink", shrink::run_shrink(&graph, &shrink_cfg, pi))?;

    let reduced = maxcut_to_qubo(&shrunk.reduced);
    if let Some(cap) = config.solver.capacity() {
        if reduced.n_vars() > cap {
            return Err(Error::Capacity { what: "reduced problem", size: reduced.n_vars(), limit: cap }.in_stage("solve"));
        }
    }
    let t = Instant::now();
    let solution = stage("solve", config.solver.solve(&reduced, config.seed, config.exec))?;
    let lifted = stage("reconstruct", lift_and_decode(&model, &graph, &shrunk, &solution))?;
    let solving = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let feasible_before_repair = stage("verify", feasibility::verify(inst, &lifted.decision))?;
    let (mut x, repair_iterations) = if feasible_before_repair {
        (lifted.decision.clone(), 0)
    } else {
        let (x, report) = stage("repair", feasibility::repair(inst, &lifted.decision))?;
        (x, report.iterations)
    };
    let repair = t.elapsed().as_secs_f64();

    let t = Instant::now();
    if config.local_search {
        x = stage("local_search", local_search(inst, &x))?;
    }
    let local = t.elapsed().as_secs_f64();

    let feasible_after = stage("verify", feasibility::verify(inst, &x))?;
    let final_objective = stage("metrics", objective(inst, &x))?;
    let (optimality_gap_pct, rsq_pct) = match (kind, inst.known_optimum()) {
        (_, None) => (None, None),
        (ProblemKind::Mis, Some(best)) => (None, Some(stage("metrics", rsq(best, final_objective))?)),
        (k, Some(best)) => (Some(stage("metrics", optimality_gap(best, final_objective, Sense::of(k)))?), None),
    };

    Ok(Report {
        instance: name.to_string(),
        kind,
        strategy: config.strategy.map_or_else(|| "custom".into(), |s| s.label()),
        constraint_aware,
        penalty: p,
        initial_size: n_vars,
        final_size: reduced.n_vars(),
        merges: shrunk.stats.merges,
        recalculations: shrunk.stats.recalculations,
        final_objective,
        feasible_before_repair,
        feasible_after,
        repair_iterations,
        optimality_gap: optimality_gap_pct,
        rsq: rsq_pct,
        phase_timings: PhaseTimings {
            correlation: shrunk.stats.correlation_secs,
            shrinking: shrunk.stats.shrinking_secs,
            solving,
            repair,
            local_search: local,
        },
        total_time: started.elapsed().as_secs_f64(),
        seed: config.seed,
        solution: x,
        config: config.clone(),
    })
}

#[derive(Debug, Clone)]
pub struct BenchJob {
    pub name: String,
    pub instance: ProblemInstance,
    pub config: PipelineConfig,
}

/// Outcome of one benchmark job; failures keep the job's identity.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub name: String,
    pub kind: ProblemKind,
    pub strategy: String,
    pub constraint_aware: bool,
    pub initial_size: usize,
    pub outcome: std::result::Result<Report, String>,
}

/// One job per (instance, strategy, constraint-aware flag), in that order.
pub fn bench_jobs(
    instances: &[(String, ProblemInstance)],
    strategies: &[Strategy],
    lambdas: &[f64],
    base: &PipelineConfig,
) -> Vec<BenchJob> {
    let mut jobs = Vec::new();
    for (name, inst) in instances {
        for &strategy in strategies {
            for &lambda in lambdas {
                let mut config = base.clone();
                config.strategy = Some(strategy);
                config.shrink.lambda = lambda;
                jobs.push(BenchJob { name: name.clone(), instance: inst.clone(), config });
            }
        }
    }
    jobs
}

/// Runs the jobs across a worker pool; rows come back in job order.
pub fn run_bench(jobs: &[BenchJob], exec: Execution) -> Vec<BenchRow> {
    exec.map_slice(jobs, |job| BenchRow {
        name: job.name.clone(),
        kind: job.instance.kind(),
        strategy: job.config.strategy.map_or_else(|| "custom".into(), |s| s.label()),
        constraint_aware: job.config.shrink.lambda > 0.0,
        initial_size: job.instance.decision_len(),
        outcome: run_pipeline(&job.name, &job.instance, &job.config).map_err(|e| e.to_string()),
    })
}

pub const CSV_COLUMNS: [&str; 17] = [
    "Instance",
    "Kind",
    "Strategy",
    "ConstraintAware",
    "InitialSize",
    "FinalSize",
    "FinalObjective",
    "Feasible",
    "TotalTime_s",
    "Gap_pct",
    "RSQ_pct",
    "Correlation_s",
    "Shrinking_s",
    "Solving_s",
    "Repair_s",
    "LocalSearch_s",
    "Status",
];

/// Aggregate CSV. With `omit_timings` the time columns are left empty so
/// reruns with equal seeds are byte-identical.
pub fn bench_csv(rows: &[BenchRow], omit_timings: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS)?;
    let num = |v: f64| format!("{v:.6}");
    let time = |v: f64| if omit_timings { String::new() } else { format!("{v:.6}") };
    let opt = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_default();
    for row in rows {
        let mut rec = vec![
            row.name.clone(),
            row.kind.to_string(),
            row.strategy.clone(),
            row.constraint_aware.to_string(),
        ];
        match &row.outcome {
            Ok(r) => {
                let t = r.phase_timings;
                rec.extend([
                    r.initial_size.to_string(),
                    r.final_size.to_string(),
                    num(r.final_objective),
                    r.feasible_after.to_string(),
                    time(r.total_time),
                    opt(r.optimality_gap),
                    opt(r.rsq),
                    time(t.correlation),
                    time(t.shrinking),
                    time(t.solving),
                    time(t.repair),
                    time(t.local_search),
                    "ok".into(),
                ]);
            }
            Err(e) => {
                rec.push(row.initial_size.to_string());
                rec.extend(std::iter::repeat_n(String::new(), 11));
                rec.push(format!("error: {e}"));
            }
        }
        w.write_record(&rec)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
