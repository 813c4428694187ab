//! Penalized QUBO construction and energy evaluation.
//!
//! Energies are `sum_{i<j} quad[(i,j)] x_i x_j + sum_i lin[i] x_i + offset`.
//! Each unordered pair is stored once with the full pair coefficient, so a
//! symmetric `x^T Q x` term `Q_ij x_i x_j + Q_ji x_j x_i` lands as
//! `quad[(i,j)] = Q_ij + Q_ji`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{MdkpInstance, MisInstance, ProblemInstance, ProblemKind, QapInstance};

/// What a QUBO variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VarSemantics {
    Item { item: usize },
    Slack { constraint: usize, bit: usize },
    Vertex { vertex: usize },
    Assignment { facility: usize, location: usize },
    /// Variable of a reduced model, standing for a Max-Cut node.
    Node { node: usize },
}

impl VarSemantics {
    pub fn is_decision(&self) -> bool {
        matches!(
            self,
            VarSemantics::Item { .. } | VarSemantics::Vertex { .. } | VarSemantics::Assignment { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "QuboJson", try_from = "QuboJson")]
pub struct QuboModel {
    n_vars: usize,
    quad: BTreeMap<(usize, usize), f64>,
    lin: Vec<f64>,
    offset: f64,
    semantics: Vec<VarSemantics>,
}

impl QuboModel {
    /// Empty model over the given variables.
    pub fn new(semantics: Vec<VarSemantics>) -> Self {
        Self {
            n_vars: semantics.len(),
            quad: BTreeMap::new(),
            lin: vec![0.0; semantics.len()],
            offset: 0.0,
            semantics,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.quad
    }

    pub fn linear(&self) -> &[f64] {
        &self.lin
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn semantics(&self) -> &[VarSemantics] {
        &self.semantics
    }

    pub fn quad_coef(&self, i: usize, j: usize) -> f64 {
        self.quad
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    /// Adds to the pair coefficient; zero results are removed.
    pub fn add_quadratic(&mut self, i: usize, j: usize, w: f64) {
        assert!(i != j && i < self.n_vars && j < self.n_vars, "bad pair ({i}, {j})");
        let key = (i.min(j), i.max(j));
        let entry = self.quad.entry(key).or_insert(0.0);
        *entry += w;
        if *entry == 0.0 {
            self.quad.remove(&key);
        }
    }

    pub fn add_linear(&mut self, i: usize, w: f64) {
        self.lin[i] += w;
    }

    pub fn add_offset(&mut self, w: f64) {
        self.offset += w;
    }

    /// Largest coefficient magnitude over linear and quadratic terms.
    pub fn max_abs_coefficient(&self) -> f64 {
        self.lin
            .iter()
            .chain(self.quad.values())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Adjacency view: for each variable, `(neighbor, coefficient)`.
    pub fn neighbors(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n_vars];
        for (&(i, j), &w) in &self.quad {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        adj
    }

    /// Term-wise sum of two models over the same variables.
    pub fn sum(&self, other: &QuboModel) -> QuboModel {
        assert_eq!(self.semantics, other.semantics, "summing models over different variables");
        let mut out = self.clone();
        for (&(i, j), &w) in &other.quad {
            out.add_quadratic(i, j, w);
        }
        for (i, &w) in other.lin.iter().enumerate() {
            out.lin[i] += w;
        }
        out.offset += other.offset;
        out
    }
}

/// Energy of a binary assignment.
pub fn evaluate_qubo(model: &QuboModel, x: &[u8]) -> Result<f64> {
    if x.len() != model.n_vars {
        return Err(Error::contract(format!(
            "assignment has {} entries, model has {} variables",
            x.len(),
            model.n_vars
        )));
    }
    let mut energy = 0.0;
    for (&(i, j), &w) in &model.quad {
        if x[i] == 1 && x[j] == 1 {
            energy += w;
        }
    }
    for (i, &w) in model.lin.iter().enumerate() {
        if x[i] == 1 {
            energy += w;
        }
    }
    Ok(energy + model.offset)
}

#[derive(Serialize, Deserialize)]
struct QuboJson {
    n_vars: usize,
    linear: Vec<f64>,
    quadratic: Vec<(usize, usize, f64)>,
    offset: f64,
    semantics: Vec<VarSemantics>,
}

impl From<QuboModel> for QuboJson {
    fn from(m: QuboModel) -> Self {
        QuboJson {
            n_vars: m.n_vars,
            linear: m.lin,
            quadratic: m.quad.into_iter().map(|((i, j), w)| (i, j, w)).collect(),
            offset: m.offset,
            semantics: m.semantics,
        }
    }
}

impl TryFrom<QuboJson> for QuboModel {
    type Error = String;

    fn try_from(j: QuboJson) -> std::result::Result<Self, String> {
        if j.linear.len() != j.n_vars || j.semantics.len() != j.n_vars {
            return Err(format!(
                "n_vars = {} but {} linear terms and {} semantics entries",
                j.n_vars,
                j.linear.len(),
                j.semantics.len()
            ));
        }
        let mut model = QuboModel::new(j.semantics);
        model.lin = j.linear;
        model.offset = j.offset;
        for (a, b, w) in j.quadratic {
            if a >= b || b >= j.n_vars {
                return Err(format!("quadratic key ({a}, {b}) is not i < j < n_vars"));
            }
            model.add_quadratic(a, b, w);
        }
        Ok(model)
    }
}

/// Penalty multiplier policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyPolicy {
    pub multiplier: f64,
    #[serde(default)]
    pub use_slack: bool,
}

impl PenaltyPolicy {
    /// Lowest end of each recommended range: MDKP 10, MIS 3, QAP 10.
    pub fn default_for(kind: ProblemKind) -> Self {
        let multiplier = match kind {
            ProblemKind::Mdkp => 10.0,
            ProblemKind::Mis => 3.0,
            ProblemKind::Qap => 10.0,
        };
        Self {
            multiplier,
            use_slack: false,
        }
    }
}

/// Penalty strength `P` for an instance under a multiplier policy.
pub fn recommend_penalty(instance: &ProblemInstance, policy: &PenaltyPolicy) -> f64 {
    let lambda = policy.multiplier;
    match instance {
        ProblemInstance::Mdkp(inst) => {
            let pmax = inst.profits().iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if pmax.is_finite() {
                lambda * pmax
            } else {
                lambda
            }
        }
        ProblemInstance::Mis(_) => lambda,
        ProblemInstance::Qap(inst) => {
            let fmax = max_abs(inst.flow());
            let dmax = max_abs(inst.distance());
            lambda * fmax * dmax
        }
    }
}

fn max_abs(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()))
}

/// Objective and constraint-penalty halves of a penalized model. Their sum
/// is the model handed to the solvers; keeping them apart lets the Max-Cut
/// edges be attributed to their origin.
#[derive(Debug, Clone)]
pub struct QuboParts {
    pub objective: QuboModel,
    pub penalty: QuboModel,
}

impl QuboParts {
    pub fn combined(&self) -> QuboModel {
        self.objective.sum(&self.penalty)
    }
}

/// Number of slack bits for capacity `c`: `floor(log2(c + 1))`.
pub fn slack_bits(capacity: f64) -> usize {
    (capacity + 1.0).log2().floor().max(0.0) as usize
}

/// Adds `p * (sum_k coef_k x_k - rhs)^2` expanded with `x^2 = x`.
fn add_squared_penalty(model: &mut QuboModel, p: f64, terms: &[(usize, f64)], rhs: f64) {
    for (a, &(i, wi)) in terms.iter().enumerate() {
        model.add_linear(i, p * (wi * wi - 2.0 * rhs * wi));
        for &(j, wj) in &terms[a + 1..] {
            model.add_quadratic(i, j, 2.0 * p * wi * wj);
        }
    }
    model.add_offset(p * rhs * rhs);
}

pub fn build_mdkp_parts(inst: &MdkpInstance, p: f64, use_slack: bool) -> QuboParts {
    let n = inst.n();
    let mut semantics: Vec<VarSemantics> = (0..n).map(|item| VarSemantics::Item { item }).collect();
    let mut slack_ranges = Vec::with_capacity(inst.m());
    if use_slack {
        for (j, &c) in inst.capacities().iter().enumerate() {
            let start = semantics.len();
            for bit in 0..slack_bits(c) {
                semantics.push(VarSemantics::Slack { constraint: j, bit });
            }
            slack_ranges.push(start..semantics.len());
        }
    }

    let mut objective = QuboModel::new(semantics.clone());
    for (i, &profit) in inst.profits().iter().enumerate() {
        objective.add_linear(i, -profit);
    }

    let mut penalty = QuboModel::new(semantics);
    for (j, row) in inst.weights().iter().enumerate() {
        let mut terms: Vec<(usize, f64)> = row
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(i, &w)| (i, w))
            .collect();
        if use_slack {
            terms.extend(
                slack_ranges[j]
                    .clone()
                    .enumerate()
                    .map(|(bit, var)| (var, (1u64 << bit) as f64)),
            );
        }
        add_squared_penalty(&mut penalty, p, &terms, inst.capacities()[j]);
    }
    QuboParts { objective, penalty }
}

pub fn build_mdkp_qubo(inst: &MdkpInstance, p: f64, use_slack: bool) -> QuboModel {
    build_mdkp_parts(inst, p, use_slack).combined()
}

pub fn build_mis_parts(inst: &MisInstance, p: f64) -> QuboParts {
    if p <= 1.0 {
        log::warn!("MIS penalty {p} <= 1 does not dominate the gain of an adjacent pair");
    }
    let semantics: Vec<VarSemantics> = (0..inst.n()).map(|vertex| VarSemantics::Vertex { vertex }).collect();
    let mut objective = QuboModel::new(semantics.clone());
    for v in 0..inst.n() {
        objective.add_linear(v, -1.0);
    }
    let mut penalty = QuboModel::new(semantics);
    for &(u, v) in inst.edges() {
        penalty.add_quadratic(u, v, p);
    }
    QuboParts { objective, penalty }
}

pub fn build_mis_qubo(inst: &MisInstance, p: f64) -> QuboModel {
    build_mis_parts(inst, p).combined()
}

pub fn build_qap_parts(inst: &QapInstance, p: f64) -> QuboParts {
    let n = inst.n();
    let var = |i: usize, j: usize| i * n + j;
    let semantics: Vec<VarSemantics> = (0..n * n)
        .map(|v| VarSemantics::Assignment {
            facility: v / n,
            location: v % n,
        })
        .collect();
    let (f, d) = (inst.flow(), inst.distance());

    let mut objective = QuboModel::new(semantics.clone());
    for a in 0..n * n {
        let (i, j) = (a / n, a % n);
        objective.add_linear(a, f[i][i] * d[j][j]);
        for b in a + 1..n * n {
            let (k, l) = (b / n, b % n);
            let w = f[i][k] * d[j][l] + f[k][i] * d[l][j];
            if w != 0.0 {
                objective.add_quadratic(a, b, w);
            }
        }
    }

    let mut penalty = QuboModel::new(semantics);
    for i in 0..n {
        let row: Vec<(usize, f64)> = (0..n).map(|j| (var(i, j), 1.0)).collect();
        add_squared_penalty(&mut penalty, p, &row, 1.0);
        let col: Vec<(usize, f64)> = (0..n).map(|r| (var(r, i), 1.0)).collect();
        add_squared_penalty(&mut penalty, p, &col, 1.0);
    }
    QuboParts { objective, penalty }
}

pub fn build_qap_qubo(inst: &QapInstance, p: f64) -> QuboModel {
    build_qap_parts(inst, p).combined()
}

/// Builds the penalized model for any instance with an explicit `P`.
pub fn build_parts(instance: &ProblemInstance, p: f64, use_slack: bool) -> Result<QuboParts> {
    if !(p > 0.0) {
        return Err(Error::contract(format!("penalty strength must be positive, got {p}")));
    }
    Ok(match instance {
        ProblemInstance::Mdkp(i) => build_mdkp_parts(i, p, use_slack),
        ProblemInstance::Mis(i) => build_mis_parts(i, p),
        ProblemInstance::Qap(i) => build_qap_parts(i, p),
    })
}

/// Problem-level decision vector extracted from QUBO bits via semantics.
/// Slack and node variables are dropped.
pub fn decision_bits(model: &QuboModel, bits: &[u8]) -> Vec<u8> {
    model
        .semantics
        .iter()
        .zip(bits)
        .filter(|(s, _)| s.is_decision())
        .map(|(_, &b)| b)
        .collect()
}
