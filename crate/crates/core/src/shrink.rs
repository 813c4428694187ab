//! Correlation-guided, constraint-aware graph shrinking.
//!
//! Each step picks the pair of supernodes with the best merge score
//! `|E[X_uv]| - lambda * Pi(a, b)`, fixes the absorbed node's spin to
//! `sigma` times the survivor's, and folds its edges into the survivor with
//! `w_jk += sigma * w_ik`. The constant part of the cut that the merge
//! freezes is accumulated so that, for every spin assignment of the reduced
//! graph, `cut_original = cut_reduced + cut_constant`.
//!
//! Correlations are stored at original-node granularity. After a re-solve
//! on the reduced graph the block between two supernodes is filled with
//! the sign-adjusted new correlation, so the member-pair mean of any block
//! equals the correlation of the two representatives.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::maxcut::MaxCutGraph;
use crate::rng::{self, Stream};
use crate::sdp::{self, CorrelationMatrix, SdpConfig};
use crate::spectral::{self, EnergyOrder, WeightMode};

/// Ties in merge score closer than this are broken by the seeded rng.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Member {
    pub node: usize,
    /// Spin relative to the supernode representative.
    pub sign: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperNode {
    /// Surviving graph node.
    pub id: usize,
    pub members: Vec<Member>,
}

impl SuperNode {
    pub fn singleton(id: usize) -> Self {
        Self {
            id,
            members: vec![Member { node: id, sign: 1 }],
        }
    }

    pub fn contains(&self, node: usize) -> bool {
        self.members.iter().any(|m| m.node == node)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeStep {
    pub order: usize,
    /// Absorbed node.
    pub i: usize,
    /// Surviving node.
    pub j: usize,
    pub sigma: i8,
}

/// Penalty oracle `Pi(a, b) >= 0` for a prospective merge.
pub trait MergePenalty: Sync {
    fn penalty(&self, a: &SuperNode, b: &SuperNode) -> f64;
}

/// Constraint-blind merging.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoPenalty;

impl MergePenalty for NoPenalty {
    fn penalty(&self, _: &SuperNode, _: &SuperNode) -> f64 {
        0.0
    }
}

/// Sign-adjusted mean correlation between the members of two supernodes.
pub fn effective_correlation(a: &SuperNode, b: &SuperNode, x: &CorrelationMatrix) -> f64 {
    let mut sum = 0.0;
    for u in &a.members {
        for v in &b.members {
            sum += f64::from(u.sign * v.sign) * x.get(u.node, v.node);
        }
    }
    (sum / (a.members.len() * b.members.len()) as f64).clamp(-1.0, 1.0)
}

pub fn merge_score(a: &SuperNode, b: &SuperNode, x: &CorrelationMatrix, lambda: f64, pi: &dyn MergePenalty) -> f64 {
    let corr = effective_correlation(a, b, x).abs();
    if lambda == 0.0 {
        corr
    } else {
        corr - lambda * pi.penalty(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeChoice {
    pub absorbed: usize,
    pub survivor: usize,
    pub sigma: i8,
    pub score: f64,
    pub correlation: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SelectOptions {
    /// Node that may survive a merge but never be absorbed.
    pub protected: Option<usize>,
    /// Candidates scoring at or below this are ineligible.
    pub score_floor: Option<f64>,
    pub exec: Execution,
}

/// Highest-scoring pair of supernodes; ties go to the seeded rng.
///
/// Within a pair the lower node id is absorbed into the higher one unless
/// the lower one is protected.
pub fn select_merge<R: Rng>(
    supernodes: &[SuperNode],
    x: &CorrelationMatrix,
    lambda: f64,
    pi: &dyn MergePenalty,
    rng: &mut R,
    opts: &SelectOptions,
) -> Option<MergeChoice> {
    let n = supernodes.len();
    if n < 2 {
        return None;
    }
    let rows: Vec<Vec<(f64, f64)>> = opts.exec.map_range(n, |a| {
        (a + 1..n)
            .map(|b| {
                let corr = effective_correlation(&supernodes[a], &supernodes[b], x);
                let score = if lambda == 0.0 {
                    corr.abs()
                } else {
                    corr.abs() - lambda * pi.penalty(&supernodes[a], &supernodes[b])
                };
                (score, corr)
            })
            .collect()
    });

    let mut best = f64::NEG_INFINITY;
    let mut ties: Vec<(usize, usize, f64)> = Vec::new();
    for (a, row) in rows.iter().enumerate() {
        for (off, &(score, corr)) in row.iter().enumerate() {
            let b = a + 1 + off;
            if opts.score_floor.is_some_and(|f| score <= f) {
                continue;
            }
            if score > best + TIE_EPS {
                best = score;
                ties.clear();
                ties.push((a, b, corr));
            } else if (score - best).abs() <= TIE_EPS {
                ties.push((a, b, corr));
            }
        }
    }
    let &(a, b, corr) = match ties.len() {
        0 => return None,
        1 => &ties[0],
        len => &ties[rng.random_range(0..len)],
    };
    let (lo, hi) = {
        let (p, q) = (supernodes[a].id, supernodes[b].id);
        (p.min(q), p.max(q))
    };
    let (absorbed, survivor) = if opts.protected == Some(lo) { (hi, lo) } else { (lo, hi) };
    Some(MergeChoice {
        absorbed,
        survivor,
        sigma: if corr < 0.0 { -1 } else { 1 },
        score: best,
        correlation: corr,
    })
}

/// Mutable adjacency keyed by stable node ids.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkGraph {
    adj: Vec<BTreeMap<usize, f64>>,
    alive: Vec<bool>,
    n_alive: usize,
    n_edges: usize,
}

impl WorkGraph {
    pub fn new(graph: &MaxCutGraph) -> Self {
        let n = graph.n_nodes();
        let mut adj = vec![BTreeMap::new(); n];
        for (&(a, b), &w) in graph.edges() {
            adj[a].insert(b, w);
            adj[b].insert(a, w);
        }
        Self {
            adj,
            alive: vec![true; n],
            n_alive: n,
            n_edges: graph.edges().len(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.adj.len()
    }

    pub fn node_count(&self) -> usize {
        self.n_alive
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    pub fn is_alive(&self, node: usize) -> bool {
        self.alive.get(node).copied().unwrap_or(false)
    }

    pub fn alive_nodes(&self) -> Vec<usize> {
        (0..self.adj.len()).filter(|&v| self.alive[v]).collect()
    }

    pub fn weight(&self, a: usize, b: usize) -> f64 {
        self.adj[a].get(&b).copied().unwrap_or(0.0)
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adj[node].iter().map(|(&k, &w)| (k, w))
    }

    /// Weighted degree `sum_k |w_nk|`.
    pub fn degree(&self, node: usize) -> f64 {
        self.adj[node].values().map(|w| w.abs()).sum()
    }

    fn add(&mut self, a: usize, b: usize, w: f64) {
        let cur = self.weight(a, b);
        let new = cur + w;
        match (cur == 0.0, new == 0.0) {
            (true, false) => self.n_edges += 1,
            (false, true) => self.n_edges -= 1,
            _ => {}
        }
        if new == 0.0 {
            self.adj[a].remove(&b);
            self.adj[b].remove(&a);
        } else {
            self.adj[a].insert(b, new);
            self.adj[b].insert(a, new);
        }
    }

    /// Absorbs node `i` into `j` with `z_i = sigma * z_j`. Returns the cut
    /// constant frozen by the merge.
    pub fn contract(&mut self, i: usize, j: usize, sigma: i8) -> Result<f64> {
        if i == j || !self.is_alive(i) || !self.is_alive(j) {
            return Err(Error::contract(format!("cannot contract {i} into {j}")));
        }
        if sigma != 1 && sigma != -1 {
            return Err(Error::contract(format!("sigma must be +-1, got {sigma}")));
        }
        let edges: Vec<(usize, f64)> = self.adj[i].iter().map(|(&k, &w)| (k, w)).collect();
        let mut constant = 0.0;
        for (k, w) in edges {
            self.adj[k].remove(&i);
            self.n_edges -= 1;
            if sigma == -1 {
                constant += w;
            }
            if k != j {
                self.add(j, k, f64::from(sigma) * w);
            }
        }
        self.adj[i].clear();
        self.alive[i] = false;
        self.n_alive -= 1;
        Ok(constant)
    }

    /// Dense view of the alive nodes with `order` listing the ids.
    pub fn adjacency_for(&self, order: &[usize]) -> Vec<Vec<(usize, f64)>> {
        let mut index = vec![usize::MAX; self.adj.len()];
        for (pos, &id) in order.iter().enumerate() {
            index[id] = pos;
        }
        order
            .iter()
            .map(|&id| self.adj[id].iter().map(|(&k, &w)| (index[k], w)).collect())
            .collect()
    }
}

/// Local correlation estimate `w_jk / sqrt(d_j d_k)` on a post-merge graph;
/// zero when either degree vanishes.
pub fn local_correlation(graph: &WorkGraph, j: usize, k: usize) -> f64 {
    let (dj, dk) = (graph.degree(j), graph.degree(k));
    if dj == 0.0 || dk == 0.0 {
        return 0.0;
    }
    (graph.weight(j, k) / (dj * dk).sqrt()).clamp(-1.0, 1.0)
}

/// Rewrites `X_jk` for every `k` in `neighborhood` from the post-merge
/// graph and clears row and column `i`. `x` is indexed by node id.
pub fn local_correlation_update(x: &mut CorrelationMatrix, graph_after: &WorkGraph, i: usize, j: usize, neighborhood: &[usize]) {
    for &k in neighborhood {
        if k != j && k != i {
            x.set(j, k, local_correlation(graph_after, j, k));
        }
    }
    for k in 0..x.n() {
        if k != i {
            x.set(i, k, 0.0);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum StopRule {
    /// Stop at this many graph nodes.
    Size { k: usize },
    /// Spectral energy retention on the initial graph.
    Spectral {
        alpha: f64,
        #[serde(default)]
        weight_mode: WeightMode,
        #[serde(default)]
        order: EnergyOrder,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum RecalcPolicy {
    /// Full SDP re-solve every `r` merges.
    Fixed { r: usize },
    /// Re-solve when the relative edge-count change since the last solve
    /// exceeds `delta`.
    Delta { delta: f64 },
    /// Re-solve when the strongest remaining candidate correlation drops
    /// below `tau`.
    Tau { tau: f64 },
    /// Never re-solve; patch correlations around each merge.
    Local,
}

impl Default for RecalcPolicy {
    fn default() -> Self {
        RecalcPolicy::Fixed { r: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ShrinkConfig {
    pub stop: StopRule,
    pub lambda: f64,
    pub recalc: RecalcPolicy,
    pub seed: u64,
    pub reference_protected: bool,
    pub sdp: SdpConfig,
    pub score_floor: Option<f64>,
    pub exec: Execution,
}

impl Default for ShrinkConfig {
    fn default() -> Self {
        Self {
            stop: StopRule::Spectral {
                alpha: 0.9,
                weight_mode: WeightMode::Absolute,
                order: EnergyOrder::Ascending,
            },
            lambda: 1.5,
            recalc: RecalcPolicy::default(),
            seed: 0,
            reference_protected: true,
            sdp: SdpConfig::default(),
            score_floor: None,
            exec: Execution::default(),
        }
    }
}

impl ShrinkConfig {
    fn validate(&self) -> Result<()> {
        match self.recalc {
            RecalcPolicy::Fixed { r: 0 } => return Err(Error::contract("recalc interval r must be >= 1")),
            RecalcPolicy::Delta { delta } if !(delta > 0.0) => return Err(Error::contract("delta must be positive")),
            RecalcPolicy::Tau { tau } if !(tau > 0.0 && tau < 1.0) => return Err(Error::contract("tau must lie in (0, 1)")),
            _ => {}
        }
        match self.stop {
            StopRule::Size { k: 0 } => Err(Error::contract("target size k must be >= 1")),
            StopRule::Spectral { alpha, .. } if !(0.0..=1.0).contains(&alpha) => {
                Err(Error::contract("alpha must lie in [0, 1]"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShrinkStats {
    pub merges: usize,
    /// SDP solves after the initial one.
    pub recalculations: usize,
    pub correlation_secs: f64,
    pub shrinking_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkResult {
    /// Reduced graph; index 0 is the supernode holding original node 0.
    pub reduced: MaxCutGraph,
    /// Original id of each reduced node.
    pub node_ids: Vec<usize>,
    pub steps: Vec<MergeStep>,
    /// Supernodes in reduced-node order.
    pub supernodes: Vec<SuperNode>,
    /// `cut_original = cut_reduced + cut_constant` for lifted spins.
    pub cut_constant: f64,
    pub original_nodes: usize,
    pub target_nodes: usize,
    pub stats: ShrinkStats,
}

/// Step-by-step shrinking state. [`run_shrink`] drives it from
/// correlations; tests and tools can drive it with explicit merges.
#[derive(Debug, Clone)]
pub struct Shrinker {
    graph: WorkGraph,
    supernodes: BTreeMap<usize, SuperNode>,
    steps: Vec<MergeStep>,
    cut_constant: f64,
    offset: f64,
    reference_protected: bool,
}

impl Shrinker {
    pub fn new(graph: &MaxCutGraph, reference_protected: bool) -> Self {
        Self {
            graph: WorkGraph::new(graph),
            supernodes: (0..graph.n_nodes()).map(|v| (v, SuperNode::singleton(v))).collect(),
            steps: Vec::new(),
            cut_constant: 0.0,
            offset: graph.offset(),
            reference_protected,
        }
    }

    pub fn graph(&self) -> &WorkGraph {
        &self.graph
    }

    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    pub fn steps(&self) -> &[MergeStep] {
        &self.steps
    }

    pub fn supernode(&self, id: usize) -> Option<&SuperNode> {
        self.supernodes.get(&id)
    }

    /// Current supernodes in ascending id order.
    pub fn supernodes(&self) -> Vec<SuperNode> {
        self.supernodes.values().cloned().collect()
    }

    pub fn protected(&self) -> Option<usize> {
        self.reference_protected.then_some(0)
    }

    /// Absorbs `i` into `j` with `z_i = sigma * z_j` and logs the step.
    pub fn merge(&mut self, i: usize, j: usize, sigma: i8) -> Result<()> {
        if self.reference_protected && i == 0 {
            return Err(Error::contract("the protected reference node cannot be absorbed"));
        }
        self.cut_constant += self.graph.contract(i, j, sigma)?;
        let absorbed = self.supernodes.remove(&i).expect("alive node has a supernode");
        let survivor = self.supernodes.get_mut(&j).expect("alive node has a supernode");
        survivor.members.extend(absorbed.members.into_iter().map(|m| Member {
            node: m.node,
            sign: m.sign * sigma,
        }));
        self.steps.push(MergeStep {
            order: self.steps.len(),
            i,
            j,
            sigma,
        });
        Ok(())
    }

    /// Reduced graph with the reference supernode first and the remaining
    /// survivors in ascending id order.
    pub fn reduced_graph(&self) -> (MaxCutGraph, Vec<usize>) {
        let reference = self
            .supernodes
            .values()
            .find(|s| s.contains(0))
            .map_or(0, |s| s.id);
        let mut order = vec![reference];
        order.extend(self.supernodes.keys().copied().filter(|&id| id != reference));
        let mut index = vec![usize::MAX; self.graph.capacity()];
        for (pos, &id) in order.iter().enumerate() {
            index[id] = pos;
        }
        let mut reduced = MaxCutGraph::with_reference(order.len());
        for &id in &order {
            for (k, w) in self.graph.neighbors(id) {
                if id < k {
                    reduced.add_edge(index[id], index[k], w);
                }
            }
        }
        reduced.set_offset(self.offset - self.cut_constant);
        (reduced, order)
    }

    pub fn finish(self, target_nodes: usize, stats: ShrinkStats) -> ShrinkResult {
        let (reduced, node_ids) = self.reduced_graph();
        let supernodes = node_ids.iter().map(|id| self.supernodes[id].clone()).collect();
        ShrinkResult {
            reduced,
            node_ids,
            steps: self.steps,
            supernodes,
            cut_constant: self.cut_constant,
            original_nodes: self.graph.capacity(),
            target_nodes,
            stats,
        }
    }
}

/// Target node count from the stop rule, computed on the initial graph.
pub fn target_size(graph: &MaxCutGraph, stop: &StopRule) -> Result<usize> {
    match *stop {
        StopRule::Size { k } => Ok(k),
        StopRule::Spectral { alpha, weight_mode, order } => {
            let spectrum = spectral::laplacian_spectrum(graph, weight_mode)?;
            Ok(spectral::select_target_size(&spectrum, alpha, order).max(1))
        }
    }
}

/// Solves the SDP on `graph` and shrinks it.
pub fn run_shrink(graph: &MaxCutGraph, config: &ShrinkConfig, pi: &dyn MergePenalty) -> Result<ShrinkResult> {
    config.validate()?;
    if graph.n_nodes() > 0 && target_size(graph, &config.stop)? >= graph.n_nodes() {
        let n = graph.n_nodes();
        return run_shrink_with_correlations(graph, CorrelationMatrix::identity(n), config, pi);
    }
    let started = Instant::now();
    let vecs = sdp::solve_maxcut_sdp(graph, &config.sdp)?;
    let x = sdp::extract_correlations(&vecs);
    let sdp_secs = started.elapsed().as_secs_f64();
    let mut result = run_shrink_with_correlations(graph, x, config, pi)?;
    result.stats.correlation_secs += sdp_secs;
    Ok(result)
}

/// Shrinks `graph` starting from a supplied correlation matrix.
pub fn run_shrink_with_correlations(
    graph: &MaxCutGraph,
    mut x: CorrelationMatrix,
    config: &ShrinkConfig,
    pi: &dyn MergePenalty,
) -> Result<ShrinkResult> {
    config.validate()?;
    if graph.n_nodes() == 0 {
        return Err(Error::contract("cannot shrink an empty graph"));
    }
    if x.n() != graph.n_nodes() {
        return Err(Error::contract("correlation matrix does not match graph size"));
    }
    let started = Instant::now();
    let mut stats = ShrinkStats::default();
    let target = target_size(graph, &config.stop)?;

    let mut shrinker = Shrinker::new(graph, config.reference_protected);
    let mut ties = rng::stream(config.seed, Stream::MergeTies, 0);
    let opts = SelectOptions {
        protected: shrinker.protected(),
        score_floor: config.score_floor,
        exec: config.exec,
    };
    let mut since_solve = 0usize;
    let mut edges_at_solve = shrinker.graph().edge_count();

    let resolve = |shrinker: &Shrinker, x: &mut CorrelationMatrix, stats: &mut ShrinkStats| -> Result<()> {
        let t = Instant::now();
        stats.recalculations += 1;
        let order = shrinker.graph().alive_nodes();
        let adj = shrinker.graph().adjacency_for(&order);
        let cfg = SdpConfig {
            seed: config.sdp.seed.wrapping_add(stats.recalculations as u64),
            ..config.sdp
        };
        let (vecs, _) = sdp::solve_adjacency(&adj, &cfg)?;
        let reduced_x = sdp::extract_correlations(&vecs);
        let groups: Vec<&SuperNode> = order.iter().map(|id| shrinker.supernode(*id).unwrap()).collect();
        for (a, ga) in groups.iter().enumerate() {
            for (b, gb) in groups.iter().enumerate().skip(a + 1) {
                let c = reduced_x.get(a, b);
                for u in &ga.members {
                    for v in &gb.members {
                        x.set(u.node, v.node, f64::from(u.sign * v.sign) * c);
                    }
                }
            }
        }
        stats.correlation_secs += t.elapsed().as_secs_f64();
        Ok(())
    };

    while shrinker.node_count() > target {
        let supernodes = shrinker.supernodes();
        let mut choice = select_merge(&supernodes, &x, config.lambda, pi, &mut ties, &opts);

        if let RecalcPolicy::Tau { tau } = config.recalc {
            let strongest = strongest_correlation(&supernodes, &x, config.exec);
            if strongest < tau && since_solve > 0 {
                resolve(&shrinker, &mut x, &mut stats)?;
                since_solve = 0;
                edges_at_solve = shrinker.graph().edge_count();
                choice = select_merge(&supernodes, &x, config.lambda, pi, &mut ties, &opts);
            }
        }
        let Some(choice) = choice else { break };

        let before_j = shrinker.supernode(choice.survivor).cloned().unwrap();
        let neighborhood: Vec<usize> = shrinker
            .graph()
            .neighbors(choice.absorbed)
            .chain(shrinker.graph().neighbors(choice.survivor))
            .map(|(k, _)| k)
            .collect();
        shrinker.merge(choice.absorbed, choice.survivor, choice.sigma)?;
        stats.merges += 1;
        since_solve += 1;

        if shrinker.node_count() <= target {
            break;
        }
        match config.recalc {
            RecalcPolicy::Fixed { r } => {
                if since_solve >= r {
                    resolve(&shrinker, &mut x, &mut stats)?;
                    since_solve = 0;
                }
            }
            RecalcPolicy::Delta { delta } => {
                let now = shrinker.graph().edge_count();
                let change = if edges_at_solve == 0 {
                    if now == 0 { 0.0 } else { f64::INFINITY }
                } else {
                    (now as f64 - edges_at_solve as f64).abs() / edges_at_solve as f64
                };
                if change > delta {
                    resolve(&shrinker, &mut x, &mut stats)?;
                    since_solve = 0;
                    edges_at_solve = now;
                }
            }
            RecalcPolicy::Tau { .. } => {}
            RecalcPolicy::Local => {
                let merged = shrinker.supernode(choice.survivor).unwrap().clone();
                let mut is_neighbor = vec![false; shrinker.graph().capacity()];
                for k in neighborhood {
                    is_neighbor[k] = true;
                }
                for other in shrinker.supernodes() {
                    if other.id == merged.id {
                        continue;
                    }
                    let c = if is_neighbor[other.id] {
                        local_correlation(shrinker.graph(), merged.id, other.id)
                    } else {
                        effective_correlation(&before_j, &other, &x)
                    };
                    for u in &merged.members {
                        for v in &other.members {
                            x.set(u.node, v.node, f64::from(u.sign * v.sign) * c);
                        }
                    }
                }
            }
        }
    }

    stats.shrinking_secs = (started.elapsed().as_secs_f64() - stats.correlation_secs).max(0.0);
    Ok(shrinker.finish(target, stats))
}

fn strongest_correlation(supernodes: &[SuperNode], x: &CorrelationMatrix, exec: Execution) -> f64 {
    let n = supernodes.len();
    exec.map_range(n, |a| {
        (a + 1..n)
            .map(|b| effective_correlation(&supernodes[a], &supernodes[b], x).abs())
            .fold(0.0_f64, f64::max)
    })
    .into_iter()
    .fold(0.0, f64::max)
}

/// JSON-lines step log, one `{order,i,j,sigma}` object per line.
pub fn steps_to_jsonl(steps: &[MergeStep]) -> Result<String> {
    let mut out = String::new();
    for s in steps {
        out.push_str(&serde_json::to_string(s)?);
        out.push('\n');
    }
    Ok(out)
}
