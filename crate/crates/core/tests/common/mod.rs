//! Shared generators and brute-force oracles for the integration suites.
#![allow(dead_code)]

use std::path::PathBuf;

use qshrink::instances::{MdkpInstance, MisInstance, ProblemInstance, ProblemKind, QapInstance};
use qshrink::maxcut::{cut_value, MaxCutGraph, SpinAssignment};
use qshrink::qubo::{QuboModel, VarSemantics};
use rand::{Rng, SeedableRng};

pub type TestRng = rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    TestRng::seed_from_u64(seed)
}

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data").join(name)
}

/// Loads a fixture graph with its known optimum from the sidecar file.
pub fn load_mis(name: &str) -> ProblemInstance {
    let text = std::fs::read_to_string(data_path(&format!("{name}.txt"))).unwrap();
    let mut inst = ProblemInstance::parse(ProblemKind::Mis, &text).unwrap();
    let meta = qshrink::instances::parse_metadata(&std::fs::read_to_string(data_path("metadata.txt")).unwrap()).unwrap();
    if let Some(&opt) = meta.get(name) {
        inst.set_known_optimum(opt);
    }
    inst
}

/// Random QUBO with integer coefficients in [-9, 9].
pub fn random_qubo(n: usize, r: &mut TestRng) -> QuboModel {
    let mut m = QuboModel::new((0..n).map(|node| VarSemantics::Node { node }).collect());
    for i in 0..n {
        m.add_linear(i, f64::from(r.random_range(-9i32..=9)));
        for j in i + 1..n {
            if r.random_bool(0.6) {
                m.add_quadratic(i, j, f64::from(r.random_range(-9i32..=9)));
            }
        }
    }
    m.add_offset(f64::from(r.random_range(-9i32..=9)));
    m
}

/// Random graph with integer weights in [-9, 9] \ {0}.
pub fn random_graph(n: usize, density: f64, r: &mut TestRng) -> MaxCutGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if r.random_bool(density) {
                let mut w = 0;
                while w == 0 {
                    w = r.random_range(-9i32..=9);
                }
                edges.push((a, b, f64::from(w)));
            }
        }
    }
    MaxCutGraph::from_edges(n, edges).unwrap()
}

pub fn spins_of(n: usize, mask: u64) -> SpinAssignment {
    SpinAssignment::new((0..n).map(|b| if (mask >> b) & 1 == 1 { -1 } else { 1 }).collect()).unwrap()
}

pub fn brute_max_cut(g: &MaxCutGraph) -> f64 {
    let n = g.n_nodes();
    (0..1u64 << n)
        .map(|m| cut_value(g, &spins_of(n, m)).unwrap())
        .fold(f64::NEG_INFINITY, f64::max)
}

pub fn bits_of(n: usize, mask: u64) -> Vec<u8> {
    (0..n).map(|b| ((mask >> b) & 1) as u8).collect()
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Maximum independent set size by branching on a highest-degree vertex.
pub fn max_independent_set(inst: &MisInstance) -> usize {
    fn go(alive: u128, adj: &[u128]) -> usize {
        if alive == 0 {
            return 0;
        }
        let mut best_v = None;
        let mut best_deg = 0;
        for v in 0..adj.len() {
            if alive >> v & 1 == 1 {
                let d = (adj[v] & alive).count_ones();
                if best_v.is_none() || d > best_deg {
                    best_v = Some(v);
                    best_deg = d;
                }
            }
        }
        let v = best_v.unwrap();
        if best_deg == 0 {
            return alive.count_ones() as usize;
        }
        let take = 1 + go(alive & !(1u128 << v) & !adj[v], adj);
        let skip = go(alive & !(1u128 << v), adj);
        take.max(skip)
    }
    assert!(inst.n() <= 128);
    let mut adj = vec![0u128; inst.n()];
    for &(u, v) in inst.edges() {
        adj[u] |= 1 << v;
        adj[v] |= 1 << u;
    }
    let all = if inst.n() == 128 { u128::MAX } else { (1u128 << inst.n()) - 1 };
    go(all, &adj)
}

pub fn random_mis(n: usize, density: f64, r: &mut TestRng) -> MisInstance {
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .collect::<Vec<_>>()
        .into_iter()
        .filter(|_| r.random_bool(density))
        .collect();
    MisInstance::new(n, edges).unwrap()
}

/// Random MDKP with integer data and capacities around half the row sums.
pub fn random_mdkp(n: usize, m: usize, r: &mut TestRng) -> MdkpInstance {
    let profits = (0..n).map(|_| f64::from(r.random_range(1u32..=30))).collect();
    let weights: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| f64::from(r.random_range(0u32..=9))).collect()).collect();
    let capacities = weights.iter().map(|row| (row.iter().sum::<f64>() / 2.0).floor()).collect();
    MdkpInstance::new(profits, weights, capacities, None).unwrap()
}

/// Exact two-constraint knapsack optimum by dynamic programming.
pub fn mdkp2_optimum(inst: &MdkpInstance) -> f64 {
    assert_eq!(inst.m(), 2);
    let (c0, c1) = (inst.capacities()[0] as usize, inst.capacities()[1] as usize);
    let mut dp = vec![vec![0.0_f64; c1 + 1]; c0 + 1];
    for i in 0..inst.n() {
        let (w0, w1) = (inst.weights()[0][i] as usize, inst.weights()[1][i] as usize);
        let p = inst.profits()[i];
        for a in (w0..=c0).rev() {
            for b in (w1..=c1).rev() {
                dp[a][b] = dp[a][b].max(dp[a - w0][b - w1] + p);
            }
        }
    }
    dp[c0][c1]
}

pub fn random_qap(n: usize, r: &mut TestRng) -> QapInstance {
    let mut sym = |max: u32| {
        let mut m = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f64::from(r.random_range(0..=max));
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        m
    };
    let flow = sym(5);
    let dist = sym(9);
    QapInstance::new(flow, dist).unwrap()
}

pub fn qap_optimum(inst: &QapInstance) -> f64 {
    permutations(inst.n()).iter().map(|p| inst.cost(p)).fold(f64::INFINITY, f64::min)
}
