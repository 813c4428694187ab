//! The bundled code graphs match their construction and known optima.

mod common;

use common::*;
use qshrink::instances::ProblemInstance;

/// Words of length `len` are adjacent when one adjacent transposition
/// (or none) can turn both into a common word.
fn expected_edges(len: u32) -> Vec<(usize, usize)> {
    let n = 1usize << len;
    let ball = |w: usize| {
        let mut out = vec![w];
        for i in 0..len - 1 {
            let (a, b) = ((w >> i) & 1, (w >> (i + 1)) & 1);
            if a != b {
                out.push(w ^ (0b11 << i));
            }
        }
        out
    };
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if ball(u).iter().any(|x| ball(v).contains(x)) {
                edges.push((u, v));
            }
        }
    }
    edges
}

#[test]
fn code_graphs_match_construction_and_optima() {
    for (len, optimum) in [(3, 4), (4, 8), (5, 12), (6, 20)] {
        let name = format!("1tc.{}", 1 << len);
        let ProblemInstance::Mis(inst) = load_mis(&name) else { panic!("not a graph") };
        assert_eq!(inst.n(), 1 << len);
        // the file numbers words most significant bit first, a bit reversal
        // of the labels used above
        let mut expected = expected_edges(len);
        let rev = |w: usize| (0..len).fold(0, |acc, b| acc | (((w >> b) & 1) << (len - 1 - b)));
        expected = expected.into_iter().map(|(u, v)| (rev(u).min(rev(v)), rev(u).max(rev(v)))).collect();
        expected.sort();
        assert_eq!(inst.edges(), expected.as_slice(), "{name}");
        assert_eq!(inst.known_optimum(), Some(optimum));
        assert_eq!(max_independent_set(&inst), optimum as usize, "{name}");
    }
}
