//! QUBO to weighted Max-Cut reduction with a reference node.
//!
//! With `x_i = (1 - z_0 z_i) / 2` and the cut indicator
//! `y_ab = (1 - z_a z_b) / 2`, a pair term satisfies
//! `x_i x_j = (y_0i + y_0j - y_ij) / 2`. Collecting terms gives
//!
//! ```text
//! w_ij = q_ij / 2                       (i, j >= 1)
//! w_0i = -(c_i + 1/2 sum_j q_ij)
//! E(x) = offset - cut(z)
//! ```
//!
//! where `q_ij` is the stored pair coefficient and `c_i` the linear term.
//! Node `k >= 1` carries QUBO variable `k - 1`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qubo::{QuboModel, QuboParts, VarSemantics};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "GraphJson", try_from = "GraphJson")]
pub struct MaxCutGraph {
    n_nodes: usize,
    edges: BTreeMap<(usize, usize), f64>,
    offset: f64,
    var_map: Vec<Option<usize>>,
}

impl MaxCutGraph {
    /// Graph with `n_nodes` nodes where node 0 is the reference and node
    /// `k` carries variable `k - 1`.
    pub fn with_reference(n_nodes: usize) -> Self {
        assert!(n_nodes >= 1, "a Max-Cut graph needs its reference node");
        Self {
            n_nodes,
            edges: BTreeMap::new(),
            offset: 0.0,
            var_map: (0..n_nodes).map(|k| k.checked_sub(1)).collect(),
        }
    }

    /// Builds a graph from explicit weighted edges; zero weights are dropped
    /// and repeated pairs accumulate.
    pub fn from_edges(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut g = Self::with_reference(n_nodes.max(1));
        for (a, b, w) in edges {
            if a == b || a >= n_nodes || b >= n_nodes {
                return Err(Error::contract(format!("edge ({a}, {b}) invalid for {n_nodes} nodes")));
            }
            if !w.is_finite() {
                return Err(Error::contract(format!("edge ({a}, {b}) has non-finite weight")));
            }
            g.add_edge(a, b, w);
        }
        Ok(g)
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn edges(&self) -> &BTreeMap<(usize, usize), f64> {
        &self.edges
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn var_map(&self) -> &[Option<usize>] {
        &self.var_map
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.edges.get(&(a.min(b), a.max(b))).copied().unwrap_or(0.0)
    }

    pub(crate) fn set_offset(&mut self, offset: f64) {
        self.offset = offset;
    }

    pub(crate) fn add_edge(&mut self, a: usize, b: usize, w: f64) {
        let key = (a.min(b), a.max(b));
        let e = self.edges.entry(key).or_insert(0.0);
        *e += w;
        if *e == 0.0 {
            self.edges.remove(&key);
        }
    }

    /// Adjacency lists `(neighbor, weight)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for (&(a, b), &w) in &self.edges {
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        adj
    }

    /// Number of QUBO variables carried by the graph.
    pub fn n_vars(&self) -> usize {
        self.var_map.iter().flatten().count()
    }
}

/// A `{-1, +1}` spin per graph node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpinAssignment(Vec<i8>);

impl SpinAssignment {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(s) = spins.iter().find(|s| **s != 1 && **s != -1) {
            return Err(Error::contract(format!("spin value {s} is not +-1")));
        }
        Ok(Self(spins))
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }
}

/// Reduces a QUBO to an equivalent Max-Cut graph on `n_vars + 1` nodes.
pub fn qubo_to_maxcut(model: &QuboModel) -> MaxCutGraph {
    let mut g = MaxCutGraph::with_reference(model.n_vars() + 1);
    let mut reference = vec![0.0; model.n_vars()];
    for (i, &c) in model.linear().iter().enumerate() {
        reference[i] -= c;
    }
    for (&(i, j), &q) in model.quadratic() {
        g.add_edge(i + 1, j + 1, q / 2.0);
        reference[i] -= q / 2.0;
        reference[j] -= q / 2.0;
    }
    for (i, w) in reference.into_iter().enumerate() {
        if w != 0.0 {
            g.add_edge(0, i + 1, w);
        }
    }
    g.offset = model.offset();
    g
}

/// Inverse reduction with node 0 as reference: variable `k - 1` stands for
/// node `k`. Used to hand a reduced graph to a QUBO backend.
pub fn maxcut_to_qubo(graph: &MaxCutGraph) -> QuboModel {
    let n = graph.n_nodes - 1;
    let mut model = QuboModel::new((1..=n).map(|node| VarSemantics::Node { node }).collect());
    for (&(a, b), &w) in &graph.edges {
        if a == 0 {
            model.add_linear(b - 1, -w);
        } else {
            model.add_linear(a - 1, -w);
            model.add_linear(b - 1, -w);
            model.add_quadratic(a - 1, b - 1, 2.0 * w);
        }
    }
    model.add_offset(graph.offset);
    model
}

/// `1/2 sum w_ab (1 - z_a z_b)`.
pub fn cut_value(graph: &MaxCutGraph, spins: &SpinAssignment) -> Result<f64> {
    if spins.len() != graph.n_nodes {
        return Err(Error::contract(format!(
            "{} spins for a graph with {} nodes",
            spins.len(),
            graph.n_nodes
        )));
    }
    let z = spins.spins();
    Ok(graph
        .edges
        .iter()
        .filter(|(&(a, b), _)| z[a] != z[b])
        .map(|(_, &w)| w)
        .sum())
}

/// Binary assignment after fixing the gauge on node 0.
pub fn spins_to_binary(graph: &MaxCutGraph, spins: &SpinAssignment) -> Result<Vec<u8>> {
    if spins.len() != graph.n_nodes {
        return Err(Error::contract(format!(
            "{} spins for a graph with {} nodes",
            spins.len(),
            graph.n_nodes
        )));
    }
    let z = spins.spins();
    let gauge = z[0];
    let mut x = vec![0u8; graph.n_vars()];
    for (node, var) in graph.var_map.iter().enumerate() {
        if let Some(v) = var {
            x[*v] = u8::from(z[node] * gauge == -1);
        }
    }
    Ok(x)
}

/// Spins with `z_0 = +1` for a binary assignment.
pub fn binary_to_spins(graph: &MaxCutGraph, x: &[u8]) -> Result<SpinAssignment> {
    if x.len() != graph.n_vars() {
        return Err(Error::contract(format!(
            "{} bits for a graph carrying {} variables",
            x.len(),
            graph.n_vars()
        )));
    }
    let spins = graph
        .var_map
        .iter()
        .map(|var| match var {
            Some(v) if x[*v] == 1 => -1,
            _ => 1,
        })
        .collect();
    Ok(SpinAssignment(spins))
}

/// Edge magnitudes split by origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dominance {
    /// Smallest `|w|` contributed by constraint penalties.
    pub min_constraint: Option<f64>,
    /// Largest `|w|` contributed by the objective.
    pub max_objective: Option<f64>,
}

impl Dominance {
    /// Whether every constraint-derived edge outweighs every objective edge.
    pub fn holds(&self) -> bool {
        match (self.min_constraint, self.max_objective) {
            (Some(c), Some(o)) => c > o,
            _ => true,
        }
    }
}

/// Reduces each half of a penalized model separately (the reduction is
/// linear) and compares constraint-derived against objective-derived edges.
pub fn constraint_dominance(parts: &QuboParts) -> Dominance {
    let objective = qubo_to_maxcut(&parts.objective);
    let penalty = qubo_to_maxcut(&parts.penalty);
    let fold = |g: &MaxCutGraph, f: fn(f64, f64) -> f64| {
        g.edges.values().map(|w| w.abs()).reduce(f)
    };
    Dominance {
        min_constraint: fold(&penalty, f64::min),
        max_objective: fold(&objective, f64::max),
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n_nodes: usize,
    edges: Vec<(usize, usize, f64)>,
    offset: f64,
    var_map: Vec<Option<usize>>,
}

impl From<MaxCutGraph> for GraphJson {
    fn from(g: MaxCutGraph) -> Self {
        GraphJson {
            n_nodes: g.n_nodes,
            edges: g.edges.into_iter().map(|((a, b), w)| (a, b, w)).collect(),
            offset: g.offset,
            var_map: g.var_map,
        }
    }
}

impl TryFrom<GraphJson> for MaxCutGraph {
    type Error = String;

    fn try_from(j: GraphJson) -> std::result::Result<Self, String> {
        if j.n_nodes == 0 || j.var_map.len() != j.n_nodes {
            return Err(format!(
                "n_nodes = {} with var_map of length {}",
                j.n_nodes,
                j.var_map.len()
            ));
        }
        if j.var_map[0].is_some() {
            return Err("reference node 0 must not carry a variable".into());
        }
        let mut g = MaxCutGraph::from_edges(j.n_nodes, j.edges).map_err(|e| e.to_string())?;
        g.offset = j.offset;
        g.var_map = j.var_map;
        Ok(g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::evaluate_qubo;
    use proptest::prelude::*;

    fn vars(n: usize) -> Vec<VarSemantics> {
        (0..n).map(|node| VarSemantics::Node { node }).collect()
    }

    fn all_states(n: usize) -> impl Iterator<Item = Vec<u8>> {
        (0u32..1 << n).map(move |s| (0..n).map(|b| ((s >> b) & 1) as u8).collect())
    }

    fn assert_equivalent(model: &QuboModel) {
        let g = qubo_to_maxcut(model);
        for x in all_states(model.n_vars()) {
            let z = binary_to_spins(&g, &x).unwrap();
            let lhs = evaluate_qubo(model, &x).unwrap();
            assert_eq!(lhs, g.offset() - cut_value(&g, &z).unwrap(), "x = {x:?}");
        }
    }

    #[test]
    fn single_pair_term() {
        let mut m = QuboModel::new(vars(2));
        m.add_quadratic(0, 1, 1.0);
        assert_equivalent(&m);
        let g = qubo_to_maxcut(&m);
        assert_eq!(g.weight(1, 2), 0.5);
    }

    #[test]
    fn single_linear_term() {
        let mut m = QuboModel::new(vars(1));
        m.add_linear(0, 2.0);
        let g = qubo_to_maxcut(&m);
        assert_eq!(g.n_nodes(), 2);
        assert_eq!(g.weight(0, 1), -2.0);
        let zero = binary_to_spins(&g, &[0]).unwrap();
        assert_eq!(evaluate_qubo(&m, &[0]).unwrap(), g.offset() - cut_value(&g, &zero).unwrap());
        assert_equivalent(&m);
    }

    #[test]
    fn empty_model() {
        let mut m = QuboModel::new(vec![]);
        m.add_offset(3.5);
        let g = qubo_to_maxcut(&m);
        assert_eq!(g.n_nodes(), 1);
        assert_eq!(g.offset(), 3.5);
        assert!(g.edges().is_empty());
    }

    #[test]
    fn cut_values() {
        let g = MaxCutGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        assert_eq!(cut_value(&g, &SpinAssignment::new(vec![1, -1]).unwrap()).unwrap(), 1.0);
        assert_eq!(cut_value(&g, &SpinAssignment::new(vec![1, 1]).unwrap()).unwrap(), 0.0);
        // Fig. 1 graph relabelled 1..4 -> 0..3, partition {1} vs {2,3,4}
        let fig = MaxCutGraph::from_edges(4, [(0, 1, 5.0), (0, 2, 2.0), (1, 3, 3.0), (2, 3, 4.0)]).unwrap();
        let z = SpinAssignment::new(vec![-1, 1, 1, 1]).unwrap();
        assert_eq!(cut_value(&fig, &z).unwrap(), 7.0);
        assert!(cut_value(&fig, &SpinAssignment::new(vec![1]).unwrap()).is_err());
    }

    #[test]
    fn spin_binary_conversions() {
        let g = MaxCutGraph::with_reference(4);
        let s = |v: Vec<i8>| SpinAssignment::new(v).unwrap();
        assert_eq!(spins_to_binary(&g, &s(vec![1, 1, 1, 1])).unwrap(), vec![0, 0, 0]);
        assert_eq!(spins_to_binary(&g, &s(vec![-1, 1, 1, 1])).unwrap(), vec![1, 1, 1]);
        assert_eq!(spins_to_binary(&g, &s(vec![1, 1, -1, 1])).unwrap(), vec![0, 1, 0]);
        assert_eq!(binary_to_spins(&g, &[0, 0, 0]).unwrap(), s(vec![1, 1, 1, 1]));
        assert_eq!(binary_to_spins(&g, &[1, 1, 1]).unwrap(), s(vec![1, -1, -1, -1]));
        assert!(SpinAssignment::new(vec![1, 0]).is_err());
    }

    #[test]
    fn json_shape() {
        let g = MaxCutGraph::from_edges(3, [(0, 1, 2.0), (1, 2, -1.0)]).unwrap();
        let v = serde_json::to_value(&g).unwrap();
        assert_eq!(v["var_map"], serde_json::json!([null, 0, 1]));
        assert_eq!(v["edges"][1], serde_json::json!([1, 2, -1.0]));
        let back: MaxCutGraph = serde_json::from_value(v).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn round_trip_through_inverse_reduction() {
        let g = MaxCutGraph::from_edges(4, [(0, 1, 2.0), (1, 2, -1.5), (2, 3, 4.0), (0, 3, 1.0)]).unwrap();
        let m = maxcut_to_qubo(&g);
        for x in all_states(3) {
            let z = binary_to_spins(&g, &x).unwrap();
            assert_eq!(evaluate_qubo(&m, &x).unwrap(), g.offset() - cut_value(&g, &z).unwrap());
        }
    }

    fn random_model() -> impl Strategy<Value = QuboModel> {
        (1usize..7).prop_flat_map(|n| {
            (
                prop::collection::vec(-9i32..10, n),
                prop::collection::vec(-9i32..10, n * (n - 1) / 2),
                -9i32..10,
            )
                .prop_map(move |(lin, quad, off)| {
                    let mut m = QuboModel::new(vars(n));
                    let mut k = 0;
                    for i in 0..n {
                        m.add_linear(i, f64::from(lin[i]));
                        for j in i + 1..n {
                            m.add_quadratic(i, j, f64::from(quad[k]));
                            k += 1;
                        }
                    }
                    m.add_offset(f64::from(off));
                    m
                })
        })
    }

    proptest! {
        #[test]
        fn reduction_is_exact(m in random_model()) {
            assert_equivalent(&m);
            let g = qubo_to_maxcut(&m);
            prop_assert!(g.edges().values().all(|w| *w != 0.0));
        }

        #[test]
        fn gauge_symmetry(m in random_model(), raw in prop::collection::vec(prop::bool::ANY, 7)) {
            let g = qubo_to_maxcut(&m);
            let z = SpinAssignment::new(raw[..g.n_nodes()].iter().map(|&b| if b { 1 } else { -1 }).collect()).unwrap();
            prop_assert_eq!(cut_value(&g, &z).unwrap(), cut_value(&g, &z.flipped()).unwrap());
            prop_assert_eq!(spins_to_binary(&g, &z).unwrap(), spins_to_binary(&g, &z.flipped()).unwrap());
        }

        #[test]
        fn binary_spin_round_trip(bits in prop::collection::vec(0u8..2, 0..10)) {
            let g = MaxCutGraph::with_reference(bits.len() + 1);
            let z = binary_to_spins(&g, &bits).unwrap();
            prop_assert_eq!(spins_to_binary(&g, &z).unwrap(), bits);
        }
    }
}
