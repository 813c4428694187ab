//! Max-Cut SDP relaxation solved by low-rank coordinate ascent (the
//! "mixing" method), plus correlation extraction.
//!
//! Each node holds a unit vector `v_i` of dimension `rank`. A sweep visits
//! nodes in ascending order and replaces `v_i` by `-g / |g|` with
//! `g = sum_j w_ij v_j`, which is the exact maximizer of the relaxed cut
//! over `v_i` with all other vectors held fixed.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxcut::MaxCutGraph;
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdpConfig {
    /// Embedding dimension; `None` picks `ceil(sqrt(2n)) + 1`.
    pub rank: Option<usize>,
    pub tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for SdpConfig {
    fn default() -> Self {
        Self {
            rank: None,
            tol: 1e-6,
            max_sweeps: 1000,
            seed: 0,
        }
    }
}

pub fn default_rank(n_nodes: usize) -> usize {
    (((2 * n_nodes) as f64).sqrt().ceil() as usize + 1).max(2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVectors {
    rank: usize,
    data: Vec<f64>,
}

impl EmbeddingVectors {
    /// Builds an embedding from explicit vectors, normalizing each.
    pub fn from_vectors(vectors: &[Vec<f64>]) -> Result<Self> {
        let rank = vectors.first().map_or(2, Vec::len);
        if rank < 2 {
            return Err(Error::contract("embedding rank must be at least 2"));
        }
        let mut data = Vec::with_capacity(vectors.len() * rank);
        for v in vectors {
            if v.len() != rank {
                return Err(Error::contract("embedding vectors differ in dimension"));
            }
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::contract("embedding vector has zero or non-finite norm"));
            }
            data.extend(v.iter().map(|c| c / norm));
        }
        Ok(Self { rank, data })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.rank
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.rank..(i + 1) * self.rank]
    }

    fn dot(&self, i: usize, j: usize) -> f64 {
        self.vector(i).iter().zip(self.vector(j)).map(|(a, b)| a * b).sum()
    }
}

/// Symmetric matrix of pairwise correlations with unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    data: Vec<f64>,
}

impl CorrelationMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    /// Builds from explicit rows; checks symmetry, unit diagonal and range.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::identity(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::contract("correlation matrix is not square"));
            }
            for (j, &v) in row.iter().enumerate() {
                if i == j && (v - 1.0).abs() > 1e-9 {
                    return Err(Error::contract(format!("diagonal entry {i} is {v}, expected 1")));
                }
                if v.abs() > 1.0 + 1e-9 || (v - rows[j][i]).abs() > 1e-12 {
                    return Err(Error::contract(format!("entry ({i}, {j}) = {v} is out of range or asymmetric")));
                }
                if i != j {
                    m.data[i * n + j] = v;
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }
}

/// Per-run diagnostics of the mixing method.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpTrace {
    pub sweeps: usize,
    pub converged: bool,
    /// Relaxed cut value after initialization and after every sweep.
    pub objective_history: Vec<f64>,
}

/// Solves the relaxation for a Max-Cut graph.
pub fn solve_maxcut_sdp(graph: &MaxCutGraph, config: &SdpConfig) -> Result<EmbeddingVectors> {
    solve_adjacency(&graph.adjacency(), config).map(|(v, _)| v)
}

/// As [`solve_maxcut_sdp`], also returning the sweep trace.
pub fn solve_maxcut_sdp_traced(
    graph: &MaxCutGraph,
    config: &SdpConfig,
) -> Result<(EmbeddingVectors, SdpTrace)> {
    solve_adjacency(&graph.adjacency(), config)
}

/// Mixing method over adjacency lists `adj[i] = [(j, w_ij), ...]`.
pub fn solve_adjacency(
    adj: &[Vec<(usize, f64)>],
    config: &SdpConfig,
) -> Result<(EmbeddingVectors, SdpTrace)> {
    let n = adj.len();
    let rank = config.rank.unwrap_or_else(|| default_rank(n));
    if rank < 2 {
        return Err(Error::contract(format!("SDP rank must be >= 2, got {rank}")));
    }
    if !(config.tol > 0.0) {
        return Err(Error::contract(format!("SDP tolerance must be positive, got {}", config.tol)));
    }
    if adj.iter().flatten().any(|(_, w)| !w.is_finite()) {
        return Err(Error::contract("graph has non-finite edge weights"));
    }

    let mut rng = rng::stream(config.seed, Stream::Sdp, 0);
    let mut data = vec![0.0; n * rank];
    for v in data.chunks_mut(rank) {
        loop {
            for c in v.iter_mut() {
                *c = rng.sample(StandardNormal);
            }
            let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm > 1e-12 {
                v.iter_mut().for_each(|c| *c /= norm);
                break;
            }
        }
    }
    let mut emb = EmbeddingVectors { rank, data };

    let mut history = vec![relaxed_cut(adj, &emb)];
    let mut g = vec![0.0; rank];
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < config.max_sweeps {
        sweeps += 1;
        let mut max_move = 0.0_f64;
        for i in 0..n {
            g.iter_mut().for_each(|c| *c = 0.0);
            for &(j, w) in &adj[i] {
                for (gc, vc) in g.iter_mut().zip(emb.vector(j)) {
                    *gc += w * vc;
                }
            }
            let norm = g.iter().map(|c| c * c).sum::<f64>().sqrt();
            if norm < 1e-12 {
                continue;
            }
            let vi = &mut emb.data[i * rank..(i + 1) * rank];
            let mut moved = 0.0;
            for (vc, gc) in vi.iter_mut().zip(&g) {
                let new = -gc / norm;
                moved += (new - *vc) * (new - *vc);
                *vc = new;
            }
            max_move = max_move.max(moved.sqrt());
        }
        history.push(relaxed_cut(adj, &emb));
        if max_move < config.tol {
            converged = true;
            break;
        }
    }
    Ok((
        emb,
        SdpTrace {
            sweeps,
            converged,
            objective_history: history,
        },
    ))
}

fn relaxed_cut(adj: &[Vec<(usize, f64)>], emb: &EmbeddingVectors) -> f64 {
    let mut total = 0.0;
    for (i, row) in adj.iter().enumerate() {
        for &(j, w) in row {
            if i < j {
                total += 0.5 * w * (1.0 - emb.dot(i, j));
            }
        }
    }
    total
}

/// Gram matrix of the embedding, clamped to `[-1, 1]`.
pub fn extract_correlations(vecs: &EmbeddingVectors) -> CorrelationMatrix {
    let n = vecs.len();
    let mut m = CorrelationMatrix::identity(n);
    for i in 0..n {
        for j in i + 1..n {
            m.set(i, j, vecs.dot(i, j).clamp(-1.0, 1.0));
        }
    }
    m
}

/// `1/2 sum_{(i,j) in E} w_ij (1 - X_ij)`.
pub fn sdp_objective(graph: &MaxCutGraph, x: &CorrelationMatrix) -> Result<f64> {
    if x.n() != graph.n_nodes() {
        return Err(Error::contract(format!(
            "correlation matrix is {}x{}, graph has {} nodes",
            x.n(),
            x.n(),
            graph.n_nodes()
        )));
    }
    Ok(graph
        .edges()
        .iter()
        .map(|(&(i, j), &w)| 0.5 * w * (1.0 - x.get(i, j)))
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> MaxCutGraph {
        MaxCutGraph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn single_edge_anti_aligns() {
        let g = MaxCutGraph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let v = solve_maxcut_sdp(&g, &SdpConfig::default()).unwrap();
        let x = extract_correlations(&v);
        assert!((x.get(0, 1) + 1.0).abs() < 1e-9);
        assert!((sdp_objective(&g, &x).unwrap() - 1.0).abs() < 1e-9);
    }

    /// Symmetric triangle embeddings are parametrized by the common pairwise
    /// correlation c in [-1/2, 1]; a fine grid locates the optimum of
    /// 3/2 (1 - c).
    #[test]
    fn triangle_matches_grid_search() {
        let g = triangle();
        let best_grid = (0..=30000)
            .map(|k| -0.5 + 1.5 * f64::from(k) / 30000.0)
            .map(|c| 1.5 * (1.0 - c))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best_grid - 2.25).abs() < 1e-12);

        let cfg = SdpConfig { tol: 1e-9, ..SdpConfig::default() };
        let x = extract_correlations(&solve_maxcut_sdp(&g, &cfg).unwrap());
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            assert!((x.get(i, j) + 0.5).abs() < 1e-6, "X_{i}{j} = {}", x.get(i, j));
        }
        assert!((sdp_objective(&g, &x).unwrap() - best_grid).abs() < 1e-9);
    }

    #[test]
    fn edgeless_graph_keeps_initialization() {
        let g = MaxCutGraph::with_reference(4);
        let cfg = SdpConfig { seed: 7, ..SdpConfig::default() };
        let (v, trace) = solve_maxcut_sdp_traced(&g, &cfg).unwrap();
        let (init, _) = solve_adjacency(&vec![Vec::new(); 4], &SdpConfig { max_sweeps: 0, ..cfg }).unwrap();
        assert_eq!(v, init);
        assert_eq!(sdp_objective(&g, &extract_correlations(&v)).unwrap(), 0.0);
        assert!(trace.converged);
    }

    #[test]
    fn correlations_of_explicit_vectors() {
        let v = EmbeddingVectors::from_vectors(&[vec![1.0, 0.0], vec![1.0, 0.0], vec![-2.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let x = extract_correlations(&v);
        assert_eq!(x.get(0, 1), 1.0);
        assert_eq!(x.get(0, 2), -1.0);
        assert_eq!(x.get(0, 3), 0.0);
        assert_eq!(x.get(3, 3), 1.0);
    }

    #[test]
    fn objective_substitutions() {
        let edge = MaxCutGraph::from_edges(2, [(0, 1, 2.0)]).unwrap();
        assert_eq!(sdp_objective(&edge, &CorrelationMatrix::identity(2)).unwrap(), 1.0);
        let ones = CorrelationMatrix::from_rows(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]).unwrap();
        assert_eq!(sdp_objective(&triangle(), &ones).unwrap(), 0.0);
        let half = CorrelationMatrix::from_rows(&[
            vec![1.0, -0.5, -0.5],
            vec![-0.5, 1.0, -0.5],
            vec![-0.5, -0.5, 1.0],
        ])
        .unwrap();
        assert_eq!(sdp_objective(&triangle(), &half).unwrap(), 2.25);
    }

    #[test]
    fn deterministic_and_monotone() {
        let g = MaxCutGraph::from_edges(
            5,
            [(0, 1, 3.0), (1, 2, -2.0), (2, 3, 1.5), (3, 4, 2.0), (0, 4, -1.0), (1, 3, 0.5)],
        )
        .unwrap();
        let cfg = SdpConfig { seed: 42, ..SdpConfig::default() };
        let (a, trace) = solve_maxcut_sdp_traced(&g, &cfg).unwrap();
        let (b, _) = solve_maxcut_sdp_traced(&g, &cfg).unwrap();
        assert_eq!(a, b);
        for w in trace.objective_history.windows(2) {
            assert!(w[1] >= w[0] - 1e-12);
        }
        for i in 0..a.len() {
            let norm: f64 = a.vector(i).iter().map(|c| c * c).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_config() {
        let g = triangle();
        assert!(solve_maxcut_sdp(&g, &SdpConfig { rank: Some(1), ..SdpConfig::default() }).is_err());
        assert!(solve_maxcut_sdp(&g, &SdpConfig { tol: 0.0, ..SdpConfig::default() }).is_err());
    }
}
