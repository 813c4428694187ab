//! Sequential against rayon execution for the data-parallel hot loops.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qshrink::instances::{MisInstance, ProblemInstance};
use qshrink::maxcut::qubo_to_maxcut;
use qshrink::pipeline::{bench_jobs, run_bench, PipelineConfig, Strategy};
use qshrink::qubo::{QuboModel, VarSemantics};
use qshrink::sdp::{extract_correlations, solve_maxcut_sdp, SdpConfig};
use qshrink::shrink::{select_merge, NoPenalty, SelectOptions, SuperNode};
use qshrink::solvers::solve_exact_with;
use qshrink::Execution;

const MODES: [Execution; 2] = [Execution::Sequential, Execution::Parallel];

fn random_qubo(n: usize, seed: u64) -> QuboModel {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let mut m = QuboModel::new((0..n).map(|node| VarSemantics::Node { node }).collect());
    for i in 0..n {
        m.add_linear(i, r.random_range(-5.0..5.0));
        for j in i + 1..n {
            if r.random_bool(0.5) {
                m.add_quadratic(i, j, r.random_range(-5.0..5.0));
            }
        }
    }
    m
}

fn random_mis(n: usize, seed: u64) -> ProblemInstance {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<_> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
        .filter(|_| r.random_bool(0.3))
        .collect();
    ProblemInstance::Mis(MisInstance::new(n, edges).unwrap())
}

fn exact_enumeration(c: &mut Criterion) {
    let model = random_qubo(20, 1);
    let mut group = c.benchmark_group("exact_20_vars");
    group.sample_size(10);
    for exec in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| solve_exact_with(&model, 24, exec).unwrap())
        });
    }
    group.finish();
}

fn merge_scoring(c: &mut Criterion) {
    let graph = qubo_to_maxcut(&random_qubo(199, 2));
    let x = extract_correlations(&solve_maxcut_sdp(&graph, &SdpConfig::default()).unwrap());
    let supernodes: Vec<SuperNode> = (0..graph.n_nodes()).map(SuperNode::singleton).collect();
    let mut group = c.benchmark_group("merge_scoring_200_nodes");
    for exec in MODES {
        let opts = SelectOptions { protected: Some(0), score_floor: None, exec };
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &opts, |b, opts| {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            b.iter(|| select_merge(&supernodes, &x, 1.5, &NoPenalty, &mut rng, opts))
        });
    }
    group.finish();
}

fn benchmark_sweep(c: &mut Criterion) {
    let instances: Vec<_> = (0..8).map(|s| (format!("mis{s}"), random_mis(18, s))).collect();
    let strategies = [Strategy::TwoThirds, Strategy::Half];
    let base = PipelineConfig { exec: Execution::Sequential, ..PipelineConfig::default() };
    let jobs = bench_jobs(&instances, &strategies, &[0.0, 1.5], &base);
    let mut group = c.benchmark_group("bench_sweep_32_jobs");
    group.sample_size(10);
    for exec in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &exec, |b, &exec| {
            b.iter(|| run_bench(&jobs, exec))
        });
    }
    group.finish();
}

criterion_group!(benches, exact_enumeration, merge_scoring, benchmark_sweep);
criterion_main!(benches);
