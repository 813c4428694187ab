//! Constraint machinery: merge penalties, verification and greedy repair.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instances::{MdkpInstance, MisInstance, ProblemInstance, QapInstance};
use crate::qubo::VarSemantics;
use crate::shrink::{MergePenalty, SuperNode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairReport {
    pub was_feasible_before: bool,
    pub iterations: usize,
    /// Decision-variable indices that were cleared or changed.
    pub removed_or_changed: Vec<usize>,
    pub final_feasible: bool,
}

/// Decision variables referenced by a set of Max-Cut nodes.
fn decisions<'a>(
    s: &'a SuperNode,
    var_map: &'a [Option<usize>],
    semantics: &'a [VarSemantics],
) -> impl Iterator<Item = VarSemantics> + 'a {
    s.members.iter().filter_map(move |m| {
        let var = var_map.get(m.node).copied().flatten()?;
        let sem = *semantics.get(var)?;
        sem.is_decision().then_some(sem)
    })
}

/// `(1/m) sum_k (sum_{l in items} W_kl) / C_k`.
pub fn pi_mdkp(items: &[usize], inst: &MdkpInstance) -> f64 {
    if inst.m() == 0 {
        return 0.0;
    }
    let total: f64 = inst
        .weights()
        .iter()
        .zip(inst.capacities())
        .map(|(row, &c)| {
            let used: f64 = items.iter().map(|&l| row[l]).sum();
            if c > 0.0 {
                used / c
            } else if used > 0.0 {
                f64::INFINITY
            } else {
                0.0
            }
        })
        .sum();
    total / inst.m() as f64
}

/// 1 iff some vertex of `a` is adjacent to some vertex of `b`.
pub fn pi_mis(a: &[usize], b: &[usize], inst: &MisInstance) -> f64 {
    let hit = a.iter().any(|&u| b.iter().any(|&v| inst.has_edge(u, v)));
    if hit { 1.0 } else { 0.0 }
}

/// 1 iff some assignment of `a` shares a facility or a location with one
/// of `b`.
pub fn pi_qap(a: &[(usize, usize)], b: &[(usize, usize)]) -> f64 {
    let hit = a
        .iter()
        .any(|&(i1, j1)| b.iter().any(|&(i2, j2)| i1 == i2 || j1 == j2));
    if hit { 1.0 } else { 0.0 }
}

/// Problem-specific merge penalty over Max-Cut supernodes. Members that
/// are the reference node or slack variables contribute nothing.
#[derive(Debug, Clone)]
pub struct ConstraintPenalty<'a> {
    instance: &'a ProblemInstance,
    var_map: Vec<Option<usize>>,
    semantics: Vec<VarSemantics>,
}

impl<'a> ConstraintPenalty<'a> {
    pub fn new(instance: &'a ProblemInstance, var_map: &[Option<usize>], semantics: &[VarSemantics]) -> Self {
        Self {
            instance,
            var_map: var_map.to_vec(),
            semantics: semantics.to_vec(),
        }
    }

    fn sems<'s>(&'s self, s: &'s SuperNode) -> impl Iterator<Item = VarSemantics> + 's {
        decisions(s, &self.var_map, &self.semantics)
    }
}

impl MergePenalty for ConstraintPenalty<'_> {
    fn penalty(&self, a: &SuperNode, b: &SuperNode) -> f64 {
        match self.instance {
            ProblemInstance::Mdkp(inst) => {
                let items: Vec<usize> = self
                    .sems(a)
                    .chain(self.sems(b))
                    .filter_map(|s| match s {
                        VarSemantics::Item { item } => Some(item),
                        _ => None,
                    })
                    .collect();
                pi_mdkp(&items, inst)
            }
            ProblemInstance::Mis(inst) => {
                let vertices = |s| {
                    self.sems(s)
                        .filter_map(|v| match v {
                            VarSemantics::Vertex { vertex } => Some(vertex),
                            _ => None,
                        })
                        .collect::<Vec<_>>()
                };
                pi_mis(&vertices(a), &vertices(b), inst)
            }
            ProblemInstance::Qap(_) => {
                let cells = |s| {
                    self.sems(s)
                        .filter_map(|v| match v {
                            VarSemantics::Assignment { facility, location } => Some((facility, location)),
                            _ => None,
                        })
                        .collect::<Vec<_>>()
                };
                pi_qap(&cells(a), &cells(b))
            }
        }
    }
}

fn check_len(x: &[u8], expected: usize) -> Result<()> {
    if x.len() != expected {
        return Err(Error::contract(format!(
            "solution has {} entries, instance expects {expected}",
            x.len()
        )));
    }
    Ok(())
}

pub fn verify_mdkp(inst: &MdkpInstance, x: &[u8]) -> Result<bool> {
    check_len(x, inst.n())?;
    Ok(inst.loads(x).iter().zip(inst.capacities()).all(|(l, c)| l <= c))
}

pub fn verify_mis(inst: &MisInstance, x: &[u8]) -> Result<bool> {
    check_len(x, inst.n())?;
    Ok(inst.edges().iter().all(|&(u, v)| x[u] == 0 || x[v] == 0))
}

/// Row-major `x[i * n + j]` is facility `i` at location `j`.
pub fn verify_qap(inst: &QapInstance, x: &[u8]) -> Result<bool> {
    let n = inst.n();
    check_len(x, n * n)?;
    let rows = (0..n).all(|i| (0..n).map(|j| u32::from(x[i * n + j])).sum::<u32>() == 1);
    let cols = (0..n).all(|j| (0..n).map(|i| u32::from(x[i * n + j])).sum::<u32>() == 1);
    Ok(rows && cols)
}

pub fn verify(inst: &ProblemInstance, x: &[u8]) -> Result<bool> {
    match inst {
        ProblemInstance::Mdkp(i) => verify_mdkp(i, x),
        ProblemInstance::Mis(i) => verify_mis(i, x),
        ProblemInstance::Qap(i) => verify_qap(i, x),
    }
}

/// How the most violated capacity row is chosen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViolationMetric {
    /// `(Wx)_j - C_j`
    #[default]
    Absolute,
    /// `((Wx)_j - C_j) / C_j`
    Relative,
}

/// Removes the least efficient item from the most violated row until the
/// selection fits.
pub fn repair_mdkp(inst: &MdkpInstance, x: &[u8]) -> Result<(Vec<u8>, RepairReport)> {
    repair_mdkp_with(inst, x, ViolationMetric::Absolute)
}

pub fn repair_mdkp_with(inst: &MdkpInstance, x: &[u8], metric: ViolationMetric) -> Result<(Vec<u8>, RepairReport)> {
    check_len(x, inst.n())?;
    let mut x: Vec<u8> = x.iter().map(|&b| u8::from(b != 0)).collect();
    let was_feasible_before = verify_mdkp(inst, &x)?;
    let mut removed = Vec::new();
    loop {
        let loads = inst.loads(&x);
        let mut worst: Option<(usize, f64)> = None;
        for (j, (&load, &cap)) in loads.iter().zip(inst.capacities()).enumerate() {
            if load <= cap {
                continue;
            }
            let over = match metric {
                ViolationMetric::Absolute => load - cap,
                ViolationMetric::Relative if cap > 0.0 => (load - cap) / cap,
                ViolationMetric::Relative => f64::INFINITY,
            };
            if worst.is_none_or(|(_, w)| over > w) {
                worst = Some((j, over));
            }
        }
        let Some((row, _)) = worst else { break };
        let weights = &inst.weights()[row];
        let victim = (0..inst.n())
            .filter(|&i| x[i] == 1 && weights[i] != 0.0)
            .map(|i| (i, inst.profits()[i] / weights[i]))
            .fold(None, |best: Option<(usize, f64)>, (i, rho)| match best {
                Some((_, r)) if r <= rho => best,
                _ => Some((i, rho)),
            });
        let Some((i, _)) = victim else {
            return Err(Error::Numerical(format!("capacity row {row} is violated by zero-weight items")));
        };
        x[i] = 0;
        removed.push(i);
    }
    let report = RepairReport {
        was_feasible_before,
        iterations: removed.len(),
        removed_or_changed: removed,
        final_feasible: true,
    };
    Ok((x, report))
}

/// Resolves conflict edges in lexicographic order, dropping the endpoint
/// of higher degree (the higher index on equal degree).
pub fn repair_mis(inst: &MisInstance, x: &[u8]) -> Result<(Vec<u8>, RepairReport)> {
    check_len(x, inst.n())?;
    let mut x: Vec<u8> = x.iter().map(|&b| u8::from(b != 0)).collect();
    let was_feasible_before = verify_mis(inst, &x)?;
    let degree = inst.degrees();
    let mut removed = Vec::new();
    // edges are sorted, so one ordered pass visits conflicts lexicographically
    for &(u, v) in inst.edges() {
        if x[u] == 1 && x[v] == 1 {
            let drop = if degree[u] > degree[v] { u } else { v };
            x[drop] = 0;
            removed.push(drop);
        }
    }
    let report = RepairReport {
        was_feasible_before,
        iterations: removed.len(),
        removed_or_changed: removed,
        final_feasible: true,
    };
    Ok((x, report))
}

/// Minimum-cost assignment `row -> perm[row]` for a square matrix. Among
/// optimal assignments the lexicographically smallest is returned.
pub fn hungarian(cost: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = cost.len();
    if cost.iter().any(|r| r.len() != n) {
        return Err(Error::contract("assignment cost matrix must be square"));
    }
    if cost.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::contract("assignment cost matrix must be finite"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let (best, _) = assignment(cost, &vec![None; n]);
    let scale = cost.iter().flatten().fold(1.0_f64, |a, c| a.max(c.abs()));
    let eps = 1e-9 * scale * n as f64;

    // fix rows in order to the smallest column that keeps the optimum
    let mut fixed: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    for row in 0..n {
        for col in 0..n {
            if used[col] {
                continue;
            }
            fixed[row] = Some(col);
            let (value, _) = assignment(cost, &fixed);
            if value <= best + eps {
                used[col] = true;
                break;
            }
        }
    }
    Ok(fixed.into_iter().map(|c| c.expect("every row is fixed")).collect())
}

/// Optimal value and assignment with some rows forced to given columns.
fn assignment(cost: &[Vec<f64>], fixed: &[Option<usize>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    let big = cost.iter().flatten().fold(0.0_f64, |a, c| a.max(c.abs())) * (n as f64 + 1.0) * 4.0 + 1.0;
    let c = |i: usize, j: usize| match fixed[i] {
        Some(col) if col != j => big,
        _ if fixed.iter().enumerate().any(|(r, &f)| r != i && f == Some(j)) => big,
        _ => cost[i][j],
    };
    let perm = hungarian_core(n, c);
    let value = (0..n).map(|i| cost[i][perm[i]]).sum();
    (value, perm)
}

/// O(n^3) shortest augmenting path formulation with potentials.
fn hungarian_core(n: usize, cost: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            perm[p[j] - 1] = j - 1;
        }
    }
    perm
}

/// Row-major permutation matrix of `perm`.
pub fn permutation_bits(perm: &[usize]) -> Vec<u8> {
    let n = perm.len();
    let mut x = vec![0u8; n * n];
    for (i, &j) in perm.iter().enumerate() {
        x[i * n + j] = 1;
    }
    x
}

/// Permutation encoded by a feasible row-major assignment matrix.
pub fn bits_to_permutation(n: usize, x: &[u8]) -> Option<Vec<usize>> {
    (0..n)
        .map(|i| (0..n).find(|&j| x[i * n + j] == 1))
        .collect()
}

/// Nearest permutation matrix to the voted assignments `x`.
pub fn repair_qap(inst: &QapInstance, x: &[u8]) -> Result<(Vec<u8>, RepairReport)> {
    let n = inst.n();
    check_len(x, n * n)?;
    let was_feasible_before = verify_qap(inst, x)?;
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if x[i * n + j] != 0 { -1.0 } else { 0.0 }).collect())
        .collect();
    let perm = hungarian(&cost)?;
    let out = permutation_bits(&perm);
    let changed: Vec<usize> = (0..n * n).filter(|&k| u8::from(x[k] != 0) != out[k]).collect();
    let report = RepairReport {
        was_feasible_before,
        iterations: usize::from(!changed.is_empty()),
        removed_or_changed: changed,
        final_feasible: true,
    };
    Ok((out, report))
}

pub fn repair(inst: &ProblemInstance, x: &[u8]) -> Result<(Vec<u8>, RepairReport)> {
    match inst {
        ProblemInstance::Mdkp(i) => repair_mdkp(i, x),
        ProblemInstance::Mis(i) => repair_mis(i, x),
        ProblemInstance::Qap(i) => repair_qap(i, x),
    }
}
