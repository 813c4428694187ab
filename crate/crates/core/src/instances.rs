//! Benchmark instance models and their text formats.
//!
//! * MDKP: OR-Library SAC-94 layout, `n m opt` header followed by profits,
//!   the `m x n` weight matrix and the capacities. `opt = 0` means unknown.
//! * MIS: plain edge list, first line `n`, then `u v` pairs (1-based).
//! * QAP: QAPLIB layout, `n` followed by the flow and distance matrices.
//!
//! Known optima for formats without a header slot come from a sidecar
//! metadata file of `name value` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdkpInstance {
    profits: Vec<f64>,
    /// Row-major `m x n`: `weights[j][i]` is the load of item `i` on resource `j`.
    weights: Vec<Vec<f64>>,
    capacities: Vec<f64>,
    known_optimum: Option<f64>,
}

impl MdkpInstance {
    pub fn new(
        profits: Vec<f64>,
        weights: Vec<Vec<f64>>,
        capacities: Vec<f64>,
        known_optimum: Option<f64>,
    ) -> Result<Self> {
        let n = profits.len();
        if weights.len() != capacities.len() {
            return Err(Error::Validation(format!(
                "{} weight rows but {} capacities",
                weights.len(),
                capacities.len()
            )));
        }
        for (j, row) in weights.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "weight row {j} has {} entries, expected {n}",
                    row.len()
                )));
            }
            if let Some(w) = row.iter().find(|w| !w.is_finite() || **w < 0.0) {
                return Err(Error::Validation(format!(
                    "weight {w} in row {j} is not a nonnegative number"
                )));
            }
        }
        if let Some(p) = profits.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::Validation(format!(
                "profit {p} is not a nonnegative number"
            )));
        }
        if let Some(c) = capacities.iter().find(|c| !c.is_finite() || **c <= 0.0) {
            return Err(Error::Validation(format!("capacity {c} is not positive")));
        }
        Ok(Self {
            profits,
            weights,
            capacities,
            known_optimum,
        })
    }

    pub fn n(&self) -> usize {
        self.profits.len()
    }

    pub fn m(&self) -> usize {
        self.capacities.len()
    }

    pub fn profits(&self) -> &[f64] {
        &self.profits
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn capacities(&self) -> &[f64] {
        &self.capacities
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    pub fn with_known_optimum(mut self, opt: Option<f64>) -> Self {
        self.known_optimum = opt;
        self
    }

    /// Resource usage `W x` for a selection.
    pub fn loads(&self, x: &[u8]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .filter(|(_, &b)| b == 1)
                    .map(|(w, _)| w)
                    .sum()
            })
            .collect()
    }

    pub fn profit(&self, x: &[u8]) -> f64 {
        self.profits
            .iter()
            .zip(x)
            .filter(|(_, &b)| b == 1)
            .map(|(p, _)| p)
            .sum()
    }

    /// Canonical SAC-94 text.
    pub fn to_sac94(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {}",
            self.n(),
            self.m(),
            self.known_optimum.unwrap_or(0.0)
        );
        out.push_str(&join(&self.profits));
        out.push('\n');
        for row in &self.weights {
            out.push_str(&join(row));
            out.push('\n');
        }
        out.push_str(&join(&self.capacities));
        out.push('\n');
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MisInstance {
    n: usize,
    /// Sorted, deduplicated, each pair stored as `(u, v)` with `u < v`.
    edges: Vec<(usize, usize)>,
    known_optimum: Option<u64>,
}

impl MisInstance {
    /// Normalizes the edge list; reversed and repeated pairs collapse.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut normalized = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Validation(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            if u == v {
                return Err(Error::SelfLoop { line: 0, vertex: u });
            }
            normalized.push((u.min(v), u.max(v)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        Ok(Self {
            n,
            edges: normalized,
            known_optimum: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn known_optimum(&self) -> Option<u64> {
        self.known_optimum
    }

    pub fn with_known_optimum(mut self, opt: Option<u64>) -> Self {
        self.known_optimum = opt;
        self
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    /// Canonical edge-list text (1-based).
    pub fn to_edgelist(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{} {}", u + 1, v + 1);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QapInstance {
    n: usize,
    flow: Vec<Vec<f64>>,
    distance: Vec<Vec<f64>>,
    known_optimum: Option<f64>,
}

impl QapInstance {
    pub fn new(flow: Vec<Vec<f64>>, distance: Vec<Vec<f64>>) -> Result<Self> {
        let n = flow.len();
        for (name, mat) in [("flow", &flow), ("distance", &distance)] {
            if mat.len() != n || mat.iter().any(|row| row.len() != n) {
                return Err(Error::Validation(format!("{name} matrix is not {n}x{n}")));
            }
            if let Some(v) = mat.iter().flatten().find(|v| !v.is_finite() || **v < 0.0) {
                return Err(Error::Validation(format!(
                    "{name} entry {v} is not a nonnegative number"
                )));
            }
        }
        Ok(Self {
            n,
            flow,
            distance,
            known_optimum: None,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn flow(&self) -> &[Vec<f64>] {
        &self.flow
    }

    pub fn distance(&self) -> &[Vec<f64>] {
        &self.distance
    }

    pub fn known_optimum(&self) -> Option<f64> {
        self.known_optimum
    }

    pub fn with_known_optimum(mut self, opt: Option<f64>) -> Self {
        self.known_optimum = opt;
        self
    }

    /// `sum_{i,k} F[i][k] * D[perm[i]][perm[k]]`.
    pub fn cost(&self, perm: &[usize]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            for k in 0..self.n {
                total += self.flow[i][k] * self.distance[perm[i]][perm[k]];
            }
        }
        total
    }

    pub fn to_qaplib(&self) -> String {
        let mut out = format!("{}\n\n", self.n);
        for row in &self.flow {
            out.push_str(&join(row));
            out.push('\n');
        }
        out.push('\n');
        for row in &self.distance {
            out.push_str(&join(row));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Mdkp,
    Mis,
    Qap,
}

impl std::fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProblemKind::Mdkp => "mdkp",
            ProblemKind::Mis => "mis",
            ProblemKind::Qap => "qap",
        })
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mdkp" => Ok(ProblemKind::Mdkp),
            "mis" => Ok(ProblemKind::Mis),
            "qap" => Ok(ProblemKind::Qap),
            other => Err(Error::Validation(format!("unknown problem kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProblemInstance {
    Mdkp(MdkpInstance),
    Mis(MisInstance),
    Qap(QapInstance),
}

impl ProblemInstance {
    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemInstance::Mdkp(_) => ProblemKind::Mdkp,
            ProblemInstance::Mis(_) => ProblemKind::Mis,
            ProblemInstance::Qap(_) => ProblemKind::Qap,
        }
    }

    pub fn parse(kind: ProblemKind, text: &str) -> Result<Self> {
        Ok(match kind {
            ProblemKind::Mdkp => ProblemInstance::Mdkp(parse_mdkp(text)?),
            ProblemKind::Mis => ProblemInstance::Mis(parse_mis_edgelist(text)?),
            ProblemKind::Qap => ProblemInstance::Qap(parse_qaplib(text)?),
        })
    }

    /// Length of a problem-level solution vector.
    pub fn decision_len(&self) -> usize {
        match self {
            ProblemInstance::Mdkp(i) => i.n(),
            ProblemInstance::Mis(i) => i.n(),
            ProblemInstance::Qap(i) => i.n() * i.n(),
        }
    }

    pub fn known_optimum(&self) -> Option<f64> {
        match self {
            ProblemInstance::Mdkp(i) => i.known_optimum(),
            ProblemInstance::Mis(i) => i.known_optimum().map(|v| v as f64),
            ProblemInstance::Qap(i) => i.known_optimum(),
        }
    }

    /// Overrides the known optimum (sidecar metadata wins over headers).
    pub fn set_known_optimum(&mut self, opt: f64) {
        match self {
            ProblemInstance::Mdkp(i) => i.known_optimum = Some(opt),
            ProblemInstance::Mis(i) => i.known_optimum = Some(opt.round().max(0.0) as u64),
            ProblemInstance::Qap(i) => i.known_optimum = Some(opt),
        }
    }
}

struct Tokens<'a> {
    iter: std::iter::Enumerate<std::str::SplitWhitespace<'a>>,
    consumed: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            iter: text.split_whitespace().enumerate(),
            consumed: 0,
        }
    }

    fn next_f64(&mut self, what: &str) -> Result<f64> {
        let (pos, tok) = self.iter.next().ok_or_else(|| Error::Parse {
            position: self.consumed,
            message: format!("unexpected end of input, expected {what}"),
        })?;
        self.consumed = pos + 1;
        let value: f64 = tok.parse().map_err(|_| Error::Parse {
            position: pos,
            message: format!("`{tok}` is not a number ({what})"),
        })?;
        if !value.is_finite() {
            return Err(Error::Parse {
                position: pos,
                message: format!("`{tok}` is not finite ({what})"),
            });
        }
        Ok(value)
    }

    fn next_count(&mut self, what: &str) -> Result<usize> {
        let (pos, tok) = self.iter.next().ok_or_else(|| Error::Parse {
            position: self.consumed,
            message: format!("unexpected end of input, expected {what}"),
        })?;
        self.consumed = pos + 1;
        tok.parse().map_err(|_| Error::Parse {
            position: pos,
            message: format!("`{tok}` is not a nonnegative integer ({what})"),
        })
    }

    fn vector(&mut self, len: usize, what: &str) -> Result<Vec<f64>> {
        (0..len).map(|_| self.next_f64(what)).collect()
    }

    fn finish(mut self) -> Result<()> {
        match self.iter.next() {
            None => Ok(()),
            Some((pos, tok)) => Err(Error::Parse {
                position: pos,
                message: format!("unexpected trailing token `{tok}`"),
            }),
        }
    }
}

/// Parses the SAC-94 multidimensional knapsack layout.
pub fn parse_mdkp(text: &str) -> Result<MdkpInstance> {
    let mut t = Tokens::new(text);
    let n = t.next_count("item count")?;
    let m = t.next_count("constraint count")?;
    let opt = t.next_f64("optimum")?;
    let profits = t.vector(n, "profit")?;
    let weights = (0..m)
        .map(|_| t.vector(n, "weight"))
        .collect::<Result<Vec<_>>>()?;
    let capacities = t.vector(m, "capacity")?;
    t.finish()?;
    let known = (opt != 0.0).then_some(opt);
    MdkpInstance::new(profits, weights, capacities, known)
}

/// Parses a 1-based edge list. Blank lines and `#` comments are skipped.
pub fn parse_mis_edgelist(text: &str) -> Result<MisInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(no, l)| (no + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (first_no, header) = lines.next().ok_or(Error::Parse {
        position: 0,
        message: "empty edge list, expected vertex count".into(),
    })?;
    let mut header_tokens = header.split_whitespace();
    let n: usize = header_tokens
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse {
            position: first_no,
            message: format!("line {first_no}: `{header}` is not a vertex count"),
        })?;

    let mut edges = Vec::new();
    for (no, line) in lines {
        let mut toks = line.split_whitespace();
        let mut endpoint = || -> Result<usize> {
            let tok = toks.next().ok_or_else(|| Error::Parse {
                position: no,
                message: format!("line {no}: expected two vertex indices"),
            })?;
            tok.parse::<usize>().map_err(|_| Error::Parse {
                position: no,
                message: format!("line {no}: `{tok}` is not a vertex index"),
            })
        };
        let u = endpoint()?;
        let v = endpoint()?;
        if let Some(extra) = toks.next() {
            return Err(Error::Parse {
                position: no,
                message: format!("line {no}: unexpected token `{extra}`"),
            });
        }
        for idx in [u, v] {
            if idx == 0 || idx > n {
                return Err(Error::Validation(format!(
                    "line {no}: vertex {idx} outside 1..={n}"
                )));
            }
        }
        if u == v {
            return Err(Error::SelfLoop {
                line: no,
                vertex: u,
            });
        }
        edges.push((u - 1, v - 1));
    }
    MisInstance::new(n, edges)
}

/// Parses the QAPLIB layout: `n`, then `F` and `D` row-major.
pub fn parse_qaplib(text: &str) -> Result<QapInstance> {
    let mut t = Tokens::new(text);
    let n = t.next_count("problem size")?;
    let mut matrix = |what: &str| -> Result<Vec<Vec<f64>>> {
        (0..n).map(|_| t.vector(n, what)).collect()
    };
    let flow = matrix("flow entry")?;
    let distance = matrix("distance entry")?;
    t.finish()?;
    QapInstance::new(flow, distance)
}

/// Parses a `name value` sidecar file of known optima.
pub fn parse_metadata(text: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let (Some(name), Some(value), None) = (toks.next(), toks.next(), toks.next()) else {
            return Err(Error::Parse {
                position: no + 1,
                message: format!("line {}: expected `name value`", no + 1),
            });
        };
        let value: f64 = value.parse().map_err(|_| Error::Parse {
            position: no + 1,
            message: format!("line {}: `{value}` is not a number", no + 1),
        })?;
        out.insert(name.to_string(), value);
    }
    Ok(out)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mdkp_worked_example() {
        let inst = parse_mdkp("3 1 0  5 7 4  2 3 4  5").unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.m(), 1);
        assert_eq!(inst.profits(), &[5.0, 7.0, 4.0]);
        assert_eq!(inst.weights(), &[vec![2.0, 3.0, 4.0]]);
        assert_eq!(inst.capacities(), &[5.0]);
        assert_eq!(inst.known_optimum(), None);
    }

    #[test]
    fn mdkp_header_optimum() {
        let inst = parse_mdkp("1 1 7  7  1  1").unwrap();
        assert_eq!(inst.known_optimum(), Some(7.0));
    }

    #[test]
    fn mdkp_degenerate_single_item() {
        let inst = parse_mdkp("1 1 0  0  0  1").unwrap();
        assert_eq!(inst.n(), 1);
        assert_eq!(inst.loads(&[1]), vec![0.0]);
    }

    #[test]
    fn mdkp_truncated_is_parse_error() {
        let err = parse_mdkp("3 1 0  5 7 4  2 3 4").unwrap_err();
        assert!(matches!(err, Error::Parse { position: 9, .. }), "{err}");
    }

    #[test]
    fn mdkp_negative_weight_rejected() {
        let err = parse_mdkp("2 1 0  1 1  -1 1  3").unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn mdkp_trailing_tokens_rejected() {
        assert!(matches!(
            parse_mdkp("1 1 0  1  1  1  9"),
            Err(Error::Parse { position: 6, .. })
        ));
    }

    #[test]
    fn mis_triangle() {
        let inst = parse_mis_edgelist("3\n1 2\n2 3\n1 3").unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.edges(), &[(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn mis_dedups_reversed_pairs() {
        let inst = parse_mis_edgelist("2\n1 2\n2 1").unwrap();
        assert_eq!(inst.edges(), &[(0, 1)]);
    }

    #[test]
    fn mis_index_out_of_range() {
        assert!(matches!(
            parse_mis_edgelist("2\n1 3"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn mis_self_loop() {
        assert!(matches!(
            parse_mis_edgelist("3\n1 2\n2 2"),
            Err(Error::SelfLoop { line: 3, vertex: 2 })
        ));
    }

    #[test]
    fn qap_worked_example() {
        let inst = parse_qaplib("2  0 5 5 0  0 2 2 0").unwrap();
        assert_eq!(inst.n(), 2);
        assert_eq!(inst.flow(), &[vec![0.0, 5.0], vec![5.0, 0.0]]);
        assert_eq!(inst.distance(), &[vec![0.0, 2.0], vec![2.0, 0.0]]);
        assert_eq!(inst.cost(&[0, 1]), 20.0);
    }

    #[test]
    fn qap_trivial_and_truncated() {
        assert_eq!(parse_qaplib("1  0  0").unwrap().n(), 1);
        assert!(matches!(
            parse_qaplib("2  0 5 5 0  0 2"),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn metadata_sidecar() {
        let meta = parse_metadata("# optima\n1tc.8 4\n1tc.16  8\n\n").unwrap();
        assert_eq!(meta.get("1tc.8"), Some(&4.0));
        assert_eq!(meta.len(), 2);
        assert!(parse_metadata("lonely").is_err());
    }

    fn mdkp_strategy() -> impl Strategy<Value = MdkpInstance> {
        (1usize..6, 1usize..4).prop_flat_map(|(n, m)| {
            (
                prop::collection::vec(0u32..100, n),
                prop::collection::vec(prop::collection::vec(0u32..50, n), m),
                prop::collection::vec(1u32..200, m),
                prop::option::of(1u32..1000),
            )
                .prop_map(|(p, w, c, opt)| {
                    MdkpInstance::new(
                        p.into_iter().map(f64::from).collect(),
                        w.into_iter()
                            .map(|r| r.into_iter().map(f64::from).collect())
                            .collect(),
                        c.into_iter().map(f64::from).collect(),
                        opt.map(f64::from),
                    )
                    .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn mdkp_round_trip(inst in mdkp_strategy()) {
            prop_assert_eq!(parse_mdkp(&inst.to_sac94()).unwrap(), inst);
        }

        #[test]
        fn mis_round_trip(n in 1usize..12, raw in prop::collection::vec((0usize..12, 0usize..12), 0..30)) {
            let edges: Vec<_> = raw.into_iter().filter(|(u, v)| u < &n && v < &n && u != v).collect();
            let inst = MisInstance::new(n, edges).unwrap();
            prop_assert_eq!(parse_mis_edgelist(&inst.to_edgelist()).unwrap(), inst);
        }

        #[test]
        fn qap_round_trip(n in 1usize..5, seed in prop::collection::vec(0u32..20, 32)) {
            let mat = |off: usize| (0..n).map(|i| (0..n).map(|j| f64::from(seed[off + i * n + j])).collect()).collect::<Vec<Vec<f64>>>();
            let inst = QapInstance::new(mat(0), mat(16)).unwrap();
            let text = inst.to_qaplib();
            prop_assert_eq!(parse_qaplib(&text).unwrap(), inst.clone());
            prop_assert_eq!(parse_qaplib(&text).unwrap(), parse_qaplib(&text).unwrap());
        }
    }
}
