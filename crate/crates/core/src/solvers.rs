//! Backends for the reduced QUBO: exhaustive enumeration, simulated
//! annealing and a small statevector variational solver.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::qubo::{evaluate_qubo, QuboModel};
use crate::rng::{self, Stream};

pub const EXACT_MAX_VARS: usize = 24;
pub const VQE_MAX_VARS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Exact,
    Sa,
    Vqe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub bits: Vec<u8>,
    /// Always `evaluate_qubo(model, bits)`.
    pub energy: f64,
    pub backend: Backend,
    pub evals_or_sweeps: u64,
}

impl Solution {
    fn new(model: &QuboModel, bits: Vec<u8>, backend: Backend, evals_or_sweeps: u64) -> Result<Self> {
        let energy = evaluate_qubo(model, &bits)?;
        Ok(Self { bits, energy, backend, evals_or_sweeps })
    }
}

/// Anything that turns a QUBO into a candidate solution.
pub trait QuboSolver {
    fn solve(&self, model: &QuboModel) -> Result<Solution>;
}

/// Energy of `x` and the local fields `lin_i + sum_j q_ij x_j`.
fn energy_and_fields(model: &QuboModel, adj: &[Vec<(usize, f64)>], x: &[u8]) -> (f64, Vec<f64>) {
    let mut fields = model.linear().to_vec();
    for (i, row) in adj.iter().enumerate() {
        for &(j, w) in row {
            if x[j] == 1 {
                fields[i] += w;
            }
        }
    }
    let mut e = model.offset();
    for (i, &xi) in x.iter().enumerate() {
        if xi == 1 {
            e += model.linear()[i];
            for &(j, w) in &adj[i] {
                if j > i && x[j] == 1 {
                    e += w;
                }
            }
        }
    }
    (e, fields)
}

/// Flips `x[i]`, updating the fields; returns the energy change.
fn flip(adj: &[Vec<(usize, f64)>], x: &mut [u8], fields: &mut [f64], i: usize) -> f64 {
    let delta = if x[i] == 0 { fields[i] } else { -fields[i] };
    let step = if x[i] == 0 { 1.0 } else { -1.0 };
    x[i] ^= 1;
    for &(j, w) in &adj[i] {
        fields[j] += step * w;
    }
    delta
}

fn flip_delta(x: &[u8], fields: &[f64], i: usize) -> f64 {
    if x[i] == 0 { fields[i] } else { -fields[i] }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactSolver {
    pub max_vars: usize,
    #[serde(default)]
    pub exec: Execution,
}

impl Default for ExactSolver {
    fn default() -> Self {
        Self { max_vars: EXACT_MAX_VARS, exec: Execution::default() }
    }
}

impl QuboSolver for ExactSolver {
    fn solve(&self, model: &QuboModel) -> Result<Solution> {
        solve_exact_with(model, self.max_vars, self.exec)
    }
}

pub fn solve_exact(model: &QuboModel) -> Result<Solution> {
    solve_exact_with(model, EXACT_MAX_VARS, Execution::default())
}

/// Exhaustive Gray-code scan. The state space is split on the high bits
/// into chunks whose minima are reduced in chunk order, so the result does
/// not depend on the execution mode. Among equal energies the state with
/// the lowest `sum_i x_i 2^i` wins.
pub fn solve_exact_with(model: &QuboModel, max_vars: usize, exec: Execution) -> Result<Solution> {
    let n = model.n_vars();
    if n > max_vars.min(63) {
        return Err(Error::Capacity { what: "exact solver input", size: n, limit: max_vars.min(63) });
    }
    let adj = model.neighbors();
    let high = if n > 12 { (n - 12).min(10) } else { 0 };
    let low = n - high;
    let tol = 1e-9 * model.max_abs_coefficient().max(1.0);

    let better = |(e, v): (f64, u64), (be, bv): (f64, u64)| e < be - tol || (e <= be + tol && v < bv);

    let chunks: Vec<(f64, u64)> = exec.map_range(1usize << high, |h| {
        let mut x = vec![0u8; n];
        for b in 0..high {
            x[low + b] = ((h >> b) & 1) as u8;
        }
        let (mut e, mut fields) = energy_and_fields(model, &adj, &x);
        let base = (h as u64) << low;
        let mut best = (e, base);
        for t in 1u64..(1u64 << low) {
            let bit = t.trailing_zeros() as usize;
            e += flip(&adj, &mut x, &mut fields, bit);
            let cand = (e, base | (t ^ (t >> 1)));
            if better(cand, best) {
                best = cand;
            }
        }
        best
    });
    let mut best = chunks[0];
    for &c in &chunks[1..] {
        if better(c, best) {
            best = c;
        }
    }
    let bits = (0..n).map(|i| ((best.1 >> i) & 1) as u8).collect();
    Solution::new(model, bits, Backend::Exact, 1u64 << n)
}

/// Annealing schedule; unset fields take data-driven defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SaSchedule {
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub sweeps: Option<usize>,
}

impl SaSchedule {
    /// `(t_start, t_end, sweeps)` with defaults `max|coef|`, `1e-3 t_start`
    /// and `200 n`.
    pub fn resolve(&self, model: &QuboModel) -> Result<(f64, f64, usize)> {
        let scale = model.max_abs_coefficient();
        let t_start = self.t_start.unwrap_or(if scale > 0.0 { scale } else { 1.0 });
        let t_end = self.t_end.unwrap_or(1e-3 * t_start);
        let sweeps = self.sweeps.unwrap_or(200 * model.n_vars()).max(1);
        if !(t_start > t_end && t_end > 0.0) {
            return Err(Error::contract(format!(
                "annealing needs t_start > t_end > 0, got {t_start} and {t_end}"
            )));
        }
        if self.sweeps == Some(0) {
            return Err(Error::contract("annealing needs at least one sweep"));
        }
        Ok((t_start, t_end, sweeps))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SaSolver {
    pub schedule: SaSchedule,
    pub seed: u64,
}

impl QuboSolver for SaSolver {
    fn solve(&self, model: &QuboModel) -> Result<Solution> {
        solve_sa(model, &self.schedule, self.seed)
    }
}

/// Single-flip Metropolis annealing with a geometric schedule, returning
/// the best state seen.
pub fn solve_sa(model: &QuboModel, schedule: &SaSchedule, seed: u64) -> Result<Solution> {
    let (t_start, t_end, sweeps) = schedule.resolve(model)?;
    let n = model.n_vars();
    let mut rng = rng::stream(seed, Stream::Annealing, 0);
    let adj = model.neighbors();
    let mut x: Vec<u8> = (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect();
    let (mut e, mut fields) = energy_and_fields(model, &adj, &x);
    let mut best_e = e;
    let mut best_x = x.clone();
    let ratio = t_end / t_start;
    for s in 0..sweeps {
        let frac = if sweeps > 1 { s as f64 / (sweeps - 1) as f64 } else { 1.0 };
        let t = t_start * ratio.powf(frac);
        for i in 0..n {
            let delta = flip_delta(&x, &fields, i);
            if delta <= 0.0 || rng.random::<f64>() < (-delta / t).exp() {
                e += flip(&adj, &mut x, &mut fields, i);
                if e < best_e {
                    best_e = e;
                    best_x.copy_from_slice(&x);
                }
            }
        }
    }
    Solution::new(model, best_x, Backend::Sa, sweeps as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VqeConfig {
    pub layers: usize,
    pub shots: usize,
    /// Coordinate sweeps per restart.
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for VqeConfig {
    fn default() -> Self {
        Self { layers: 2, shots: 1024, max_iters: 20, restarts: 3, seed: 0 }
    }
}

impl QuboSolver for VqeConfig {
    fn solve(&self, model: &QuboModel) -> Result<Solution> {
        solve_vqe_sim(model, self)
    }
}

/// Real statevector of the ansatz: `layers` rounds of per-qubit RY
/// rotations each followed by a ring of CZ gates, starting from |0...0>.
pub fn ansatz_state(n: usize, layers: usize, params: &[f64]) -> Vec<f64> {
    let dim = 1usize << n;
    let mut psi = vec![0.0; dim];
    psi[0] = 1.0;
    for l in 0..layers {
        for q in 0..n {
            let (s, c) = (params[l * n + q] / 2.0).sin_cos();
            let mask = 1usize << q;
            for b in 0..dim {
                if b & mask == 0 {
                    let (a0, a1) = (psi[b], psi[b | mask]);
                    psi[b] = c * a0 - s * a1;
                    psi[b | mask] = s * a0 + c * a1;
                }
            }
        }
        let pairs: Vec<(usize, usize)> = match n {
            0 | 1 => vec![],
            2 => vec![(0, 1)],
            _ => (0..n).map(|q| (q, (q + 1) % n)).collect(),
        };
        for (a, b) in pairs {
            let mask = (1usize << a) | (1usize << b);
            for (idx, amp) in psi.iter_mut().enumerate() {
                if idx & mask == mask {
                    *amp = -*amp;
                }
            }
        }
    }
    psi
}

fn diagonal(model: &QuboModel) -> Result<Vec<f64>> {
    let n = model.n_vars();
    let adj = model.neighbors();
    let mut x = vec![0u8; n];
    let (mut e, mut fields) = energy_and_fields(model, &adj, &x);
    let mut diag = vec![0.0; 1usize << n];
    diag[0] = e;
    let mut state = 0usize;
    for t in 1usize..(1usize << n) {
        let bit = t.trailing_zeros() as usize;
        e += flip(&adj, &mut x, &mut fields, bit);
        state ^= 1 << bit;
        diag[state] = e;
    }
    Ok(diag)
}

fn expectation(psi: &[f64], diag: &[f64]) -> f64 {
    psi.iter().zip(diag).map(|(a, e)| a * a * e).sum()
}

/// Variational minimisation of the diagonal QUBO Hamiltonian on a dense
/// statevector, optimised by exact single-parameter line searches.
pub fn solve_vqe_sim(model: &QuboModel, cfg: &VqeConfig) -> Result<Solution> {
    let n = model.n_vars();
    if n > VQE_MAX_VARS {
        return Err(Error::Capacity { what: "variational solver input", size: n, limit: VQE_MAX_VARS });
    }
    if cfg.layers == 0 || cfg.shots == 0 {
        return Err(Error::contract("variational solver needs layers >= 1 and shots >= 1"));
    }
    let diag = diagonal(model)?;
    let n_params = cfg.layers * n;
    let mut rng = rng::stream(cfg.seed, Stream::Variational, 0);
    let mut evals = 0u64;
    let mut energy_of = |p: &[f64]| {
        evals += 1;
        expectation(&ansatz_state(n, cfg.layers, p), &diag)
    };

    let mut best_params = vec![0.0; n_params];
    let mut best_value = f64::INFINITY;
    for _ in 0..cfg.restarts.max(1) {
        let mut p: Vec<f64> = (0..n_params).map(|_| rng.random_range(-PI..PI)).collect();
        let mut value = energy_of(&p);
        for _ in 0..cfg.max_iters {
            let before = value;
            for k in 0..n_params {
                // the energy is a + b cos(theta) + c sin(theta) in each angle
                let theta = p[k];
                p[k] = theta + FRAC_PI_2;
                let plus = energy_of(&p);
                p[k] = theta - FRAC_PI_2;
                let minus = energy_of(&p);
                let center = value;
                let opt = theta - FRAC_PI_2 - (2.0 * center - plus - minus).atan2(plus - minus);
                p[k] = opt;
                value = energy_of(&p);
                if value > center {
                    p[k] = theta;
                    value = center;
                }
            }
            if before - value <= 1e-12 * before.abs().max(1.0) {
                break;
            }
        }
        if value < best_value {
            best_value = value;
            best_params = p;
        }
    }

    let psi = ansatz_state(n, cfg.layers, &best_params);
    let probs: Vec<f64> = psi.iter().map(|a| a * a).collect();
    let mut sampler = rng::stream(cfg.seed, Stream::Sampling, 0);
    let argmax = (0..probs.len()).fold(0, |b, s| if probs[s] > probs[b] { s } else { b });
    let mut best_state = argmax;
    let cumulative: Vec<f64> = probs
        .iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect();
    let total = *cumulative.last().unwrap_or(&1.0);
    for _ in 0..cfg.shots {
        let r = sampler.random::<f64>() * total;
        let s = cumulative.partition_point(|&c| c <= r).min(probs.len() - 1);
        if diag[s] < diag[best_state] || (diag[s] == diag[best_state] && s < best_state) {
            best_state = s;
        }
    }
    let bits = (0..n).map(|i| ((best_state >> i) & 1) as u8).collect();
    Solution::new(model, bits, Backend::Vqe, evals)
}

/// Serializable backend choice used by the pipeline and CLI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "lowercase")]
pub enum SolverConfig {
    Exact {
        #[serde(default = "default_exact_cap")]
        max_vars: usize,
    },
    Sa {
        #[serde(default)]
        schedule: SaSchedule,
    },
    Vqe {
        #[serde(default = "default_layers")]
        layers: usize,
        #[serde(default = "default_shots")]
        shots: usize,
        #[serde(default = "default_iters")]
        max_iters: usize,
    },
}

fn default_exact_cap() -> usize {
    EXACT_MAX_VARS
}
fn default_layers() -> usize {
    VqeConfig::default().layers
}
fn default_shots() -> usize {
    VqeConfig::default().shots
}
fn default_iters() -> usize {
    VqeConfig::default().max_iters
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::Exact { max_vars: EXACT_MAX_VARS }
    }
}

impl SolverConfig {
    pub fn backend(&self) -> Backend {
        match self {
            SolverConfig::Exact { .. } => Backend::Exact,
            SolverConfig::Sa { .. } => Backend::Sa,
            SolverConfig::Vqe { .. } => Backend::Vqe,
        }
    }

    /// Largest model the backend accepts, if bounded.
    pub fn capacity(&self) -> Option<usize> {
        match *self {
            SolverConfig::Exact { max_vars } => Some(max_vars),
            SolverConfig::Sa { .. } => None,
            SolverConfig::Vqe { .. } => Some(VQE_MAX_VARS),
        }
    }

    pub fn solve(&self, model: &QuboModel, seed: u64, exec: Execution) -> Result<Solution> {
        match *self {
            SolverConfig::Exact { max_vars } => solve_exact_with(model, max_vars, exec),
            SolverConfig::Sa { schedule } => solve_sa(model, &schedule, seed),
            SolverConfig::Vqe { layers, shots, max_iters } => solve_vqe_sim(
                model,
                &VqeConfig { layers, shots, max_iters, seed, ..VqeConfig::default() },
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{parse_mdkp, MisInstance};
    use crate::qubo::{build_mdkp_qubo, build_mis_qubo, VarSemantics};
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn triangle(p: f64) -> QuboModel {
        build_mis_qubo(&MisInstance::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap(), p)
    }

    fn random_model(n: usize, seed: u64) -> QuboModel {
        let mut r = crate::rng::Rng::seed_from_u64(seed);
        let mut m = QuboModel::new((0..n).map(|node| VarSemantics::Node { node }).collect());
        for i in 0..n {
            m.add_linear(i, f64::from(r.random_range(-9i32..=9)));
            for j in i + 1..n {
                if r.random_bool(0.5) {
                    m.add_quadratic(i, j, f64::from(r.random_range(-9i32..=9)));
                }
            }
        }
        m.add_offset(f64::from(r.random_range(-5i32..=5)));
        m
    }

    /// Independent scan that evaluates every state from scratch.
    fn naive_min(model: &QuboModel) -> (f64, Vec<u8>) {
        let n = model.n_vars();
        let mut best = (f64::INFINITY, vec![]);
        for s in 0u64..(1 << n) {
            let x: Vec<u8> = (0..n).map(|i| ((s >> i) & 1) as u8).collect();
            let e = evaluate_qubo(model, &x).unwrap();
            if e < best.0 {
                best = (e, x);
            }
        }
        best
    }

    #[test]
    fn exact_examples() {
        let s = solve_exact(&triangle(2.0)).unwrap();
        assert_eq!(s.energy, -1.0);
        assert_eq!(s.bits.iter().map(|&b| u32::from(b)).sum::<u32>(), 1);
        assert_eq!(s.bits, vec![1, 0, 0]);

        let mdkp = build_mdkp_qubo(&parse_mdkp("3 1 0  5 7 4  2 3 4  5").unwrap(), 70.0, false);
        let s = solve_exact(&mdkp).unwrap();
        assert_eq!((s.bits.clone(), s.energy), (vec![1, 1, 0], -12.0));

        let mut empty = QuboModel::new(vec![]);
        empty.add_offset(4.5);
        let s = solve_exact(&empty).unwrap();
        assert_eq!((s.bits.len(), s.energy), (0, 4.5));
    }

    #[test]
    fn exact_capacity() {
        let m = QuboModel::new(vec![VarSemantics::Node { node: 0 }; 5]);
        assert!(matches!(solve_exact_with(&m, 4, Execution::Sequential), Err(Error::Capacity { .. })));
    }

    #[test]
    fn exact_modes_agree_on_chunked_space() {
        let m = random_model(15, 9);
        let a = solve_exact_with(&m, 24, Execution::Sequential).unwrap();
        let b = solve_exact_with(&m, 24, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.energy, naive_min(&m).0);
    }

    #[test]
    fn sa_examples() {
        for seed in 0..5 {
            let schedule = SaSchedule { sweeps: Some(200), ..SaSchedule::default() };
            let s = solve_sa(&triangle(2.0), &schedule, seed).unwrap();
            assert_eq!(s.energy, -1.0);
            assert_eq!(s, solve_sa(&triangle(2.0), &schedule, seed).unwrap());
        }
        let greedy = SaSchedule { t_start: Some(1e-9), t_end: Some(1e-12), sweeps: Some(1) };
        let m = random_model(8, 3);
        let s = solve_sa(&m, &greedy, 1).unwrap();
        let mut r = rng::stream(1, Stream::Annealing, 0);
        let init: Vec<u8> = (0..8).map(|_| u8::from(r.random_bool(0.5))).collect();
        assert!(s.energy <= evaluate_qubo(&m, &init).unwrap());
        let bad = SaSchedule { t_start: Some(1.0), t_end: Some(2.0), sweeps: None };
        assert!(solve_sa(&m, &bad, 0).is_err());
    }

    #[test]
    fn vqe_examples() {
        let mut one = QuboModel::new(vec![VarSemantics::Node { node: 0 }]);
        one.add_linear(0, -1.0);
        let cfg = VqeConfig { layers: 1, ..VqeConfig::default() };
        let s = solve_vqe_sim(&one, &cfg).unwrap();
        assert_eq!((s.bits.clone(), s.energy), (vec![1], -1.0));

        let tri = triangle(2.0);
        let s = solve_vqe_sim(&tri, &VqeConfig::default()).unwrap();
        assert!(s.energy >= -1.0);
        assert_eq!(s.energy, evaluate_qubo(&tri, &s.bits).unwrap());

        let mut zero = QuboModel::new(vec![VarSemantics::Node { node: 0 }; 2]);
        zero.add_offset(3.0);
        assert_eq!(solve_vqe_sim(&zero, &cfg).unwrap().energy, 3.0);

        let big = QuboModel::new(vec![VarSemantics::Node { node: 0 }; 17]);
        assert!(matches!(solve_vqe_sim(&big, &cfg), Err(Error::Capacity { .. })));
    }

    #[test]
    fn statevector_stays_normalised() {
        let mut r = crate::rng::Rng::seed_from_u64(4);
        for n in 1..=8 {
            let params: Vec<f64> = (0..3 * n).map(|_| r.random_range(-PI..PI)).collect();
            let psi = ansatz_state(n, 3, &params);
            let norm: f64 = psi.iter().map(|a| a * a).sum();
            assert!((norm - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn solver_config_serde() {
        let cfg: SolverConfig = serde_json::from_str(r#"{"backend":"sa"}"#).unwrap();
        assert_eq!(cfg.backend(), Backend::Sa);
        let cfg: SolverConfig = serde_json::from_str(r#"{"backend":"exact"}"#).unwrap();
        assert_eq!(cfg.capacity(), Some(EXACT_MAX_VARS));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn exact_matches_naive_and_bounds_heuristics(n in 0usize..=10, seed in any::<u64>()) {
            let m = random_model(n, seed);
            let exact = solve_exact(&m).unwrap();
            let (e, x) = naive_min(&m);
            prop_assert_eq!(exact.energy, e);
            // the naive scan keeps the first minimiser in binary order
            prop_assert_eq!(&exact.bits, &x);
            prop_assert_eq!(exact.energy, evaluate_qubo(&m, &exact.bits).unwrap());
            let sa = solve_sa(&m, &SaSchedule::default(), seed).unwrap();
            prop_assert!(sa.energy >= exact.energy);
            prop_assert_eq!(sa.energy, evaluate_qubo(&m, &sa.bits).unwrap());
        }
    }

    #[test]
    fn vqe_bounded_by_exact() {
        for seed in 0..4 {
            let m = random_model(6, seed);
            let cfg = VqeConfig { max_iters: 5, restarts: 1, seed, ..VqeConfig::default() };
            let v = solve_vqe_sim(&m, &cfg).unwrap();
            assert!(v.energy >= solve_exact(&m).unwrap().energy);
        }
    }
}
