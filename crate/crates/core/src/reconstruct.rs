//! Lifting reduced solutions back to the original problem.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxcut::{binary_to_spins, maxcut_to_qubo, spins_to_binary, MaxCutGraph, SpinAssignment};
use crate::qubo::{evaluate_qubo, QuboModel, VarSemantics};
use crate::shrink::{MergeStep, ShrinkResult};
use crate::solvers::Solution;

/// Problem-level reading of a QUBO bitstring.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "lowercase")]
pub enum ProblemSolution {
    /// Selected knapsack items.
    Items(Vec<usize>),
    /// Vertices in the independent set.
    Vertices(Vec<usize>),
    /// Row-major `n x n` facility/location matrix.
    Assignment(Vec<Vec<u8>>),
    /// Model without decision semantics.
    Raw(Vec<u8>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedSolution {
    pub spins: SpinAssignment,
    /// Bits over the original QUBO variables, slack included.
    pub bits: Vec<u8>,
    /// Bits over decision variables only.
    pub decision: Vec<u8>,
    pub problem_solution: ProblemSolution,
    /// Original-QUBO energy of `bits`.
    pub energy: f64,
    /// Global orientation (+1 or -1) of the replayed spins that was kept.
    pub gauge: i8,
}

/// Assigns every absorbed node from its survivor, newest step first.
/// `spins[v]` holds `Some` for every node that survived shrinking.
pub fn replay(steps: &[MergeStep], spins: &mut [Option<i8>]) -> Result<()> {
    for step in steps.iter().rev() {
        let get = |v: usize| spins.get(v).copied();
        let Some(Some(zj)) = get(step.j) else {
            return Err(Error::CorruptedLog(format!(
                "step {} reads node {} before it is assigned",
                step.order, step.j
            )));
        };
        match get(step.i) {
            Some(None) => spins[step.i] = Some(step.sigma * zj),
            Some(Some(_)) => {
                return Err(Error::CorruptedLog(format!(
                    "step {} assigns node {} twice",
                    step.order, step.i
                )))
            }
            None => {
                return Err(Error::CorruptedLog(format!(
                    "step {} names node {} outside the graph",
                    step.order, step.i
                )))
            }
        }
    }
    Ok(())
}

/// Full original spin vector from spins on the reduced nodes.
pub fn replay_result(result: &ShrinkResult, reduced: &SpinAssignment) -> Result<SpinAssignment> {
    if reduced.len() != result.node_ids.len() {
        return Err(Error::contract(format!(
            "{} reduced spins for {} reduced nodes",
            reduced.len(),
            result.node_ids.len()
        )));
    }
    let mut spins = vec![None; result.original_nodes];
    for (&id, &z) in result.node_ids.iter().zip(reduced.spins()) {
        spins[id] = Some(z);
    }
    replay(&result.steps, &mut spins)?;
    let full: Option<Vec<i8>> = spins.into_iter().collect();
    let full = full.ok_or_else(|| Error::CorruptedLog("some original node was never assigned".into()))?;
    SpinAssignment::new(full)
}

/// Decodes bits through the model semantics.
pub fn decode(model: &QuboModel, bits: &[u8]) -> Result<ProblemSolution> {
    if bits.len() != model.n_vars() {
        return Err(Error::contract(format!(
            "{} bits for a model with {} variables",
            bits.len(),
            model.n_vars()
        )));
    }
    let sems = model.semantics();
    let on = |i: usize| bits[i] == 1;
    let first = sems.iter().find(|s| s.is_decision());
    Ok(match first {
        Some(VarSemantics::Item { .. }) => ProblemSolution::Items(
            sems.iter()
                .enumerate()
                .filter_map(|(i, s)| match s {
                    VarSemantics::Item { item } if on(i) => Some(*item),
                    _ => None,
                })
                .collect(),
        ),
        Some(VarSemantics::Vertex { .. }) => ProblemSolution::Vertices(
            sems.iter()
                .enumerate()
                .filter_map(|(i, s)| match s {
                    VarSemantics::Vertex { vertex } if on(i) => Some(*vertex),
                    _ => None,
                })
                .collect(),
        ),
        Some(VarSemantics::Assignment { .. }) => {
            let cells: Vec<(usize, usize, u8)> = sems
                .iter()
                .enumerate()
                .filter_map(|(i, s)| match s {
                    VarSemantics::Assignment { facility, location } => Some((*facility, *location, bits[i])),
                    _ => None,
                })
                .collect();
            let n = cells.iter().map(|c| c.0.max(c.1) + 1).max().unwrap_or(0);
            let mut matrix = vec![vec![0u8; n]; n];
            for (f, l, b) in cells {
                matrix[f][l] = b;
            }
            ProblemSolution::Assignment(matrix)
        }
        _ => ProblemSolution::Raw(bits.to_vec()),
    })
}

/// Reduced QUBO bits -> reduced spins -> replay -> gauge fix on node 0 ->
/// original bits -> decoded solution. Both global spin orientations are
/// evaluated on the original QUBO and the lower-energy one is kept.
pub fn lift_and_decode(
    original_qubo: &QuboModel,
    original_graph: &MaxCutGraph,
    result: &ShrinkResult,
    reduced_solution: &Solution,
) -> Result<LiftedSolution> {
    if original_graph.n_nodes() != result.original_nodes {
        return Err(Error::contract("shrink result does not belong to this graph"));
    }
    if original_graph.n_vars() != original_qubo.n_vars() {
        return Err(Error::contract("graph and QUBO disagree on the variable count"));
    }
    let reduced_spins = binary_to_spins(&result.reduced, &reduced_solution.bits)?;
    let spins = replay_result(result, &reduced_spins)?;

    let mut best: Option<(f64, i8, SpinAssignment, Vec<u8>)> = None;
    for (gauge, candidate) in [(1i8, spins.clone()), (-1i8, spins.flipped())] {
        let bits = spins_to_binary(original_graph, &candidate)?;
        let energy = evaluate_qubo(original_qubo, &bits)?;
        if best.as_ref().is_none_or(|b| energy < b.0) {
            best = Some((energy, gauge, candidate, bits));
        }
    }
    let (energy, gauge, spins, bits) = best.expect("two candidates evaluated");
    Ok(LiftedSolution {
        decision: crate::qubo::decision_bits(original_qubo, &bits),
        problem_solution: decode(original_qubo, &bits)?,
        spins,
        bits,
        energy,
        gauge,
    })
}

/// Energy of the reduced solution on the QUBO derived from the reduced
/// graph; equals the lifted energy on the original QUBO.
pub fn reduced_energy(result: &ShrinkResult, bits: &[u8]) -> Result<f64> {
    evaluate_qubo(&maxcut_to_qubo(&result.reduced), bits)
}
