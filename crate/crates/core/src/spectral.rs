//! Laplacian spectra and the spectral-energy target size.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxcut::MaxCutGraph;

/// Dense symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::contract("matrix is not square"));
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(row);
        }
        for i in 0..n {
            for j in 0..i {
                if (m.get(i, j) - m.get(j, i)).abs() > 1e-10 {
                    return Err(Error::contract(format!("matrix is not symmetric at ({i}, {j})")));
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

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightMode {
    /// `A_ij = |w_ij|`, which keeps the Laplacian positive semidefinite.
    #[default]
    Absolute,
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyOrder {
    /// Accumulate the smallest eigenvalues first.
    #[default]
    Ascending,
    Descending,
}

/// `L = diag(A 1) - A`.
pub fn laplacian(graph: &MaxCutGraph, mode: WeightMode) -> SymMatrix {
    let mut l = SymMatrix::zeros(graph.n_nodes());
    for (&(a, b), &w) in graph.edges() {
        let w = match mode {
            WeightMode::Absolute => w.abs(),
            WeightMode::Raw => w,
        };
        l.set(a, b, l.get(a, b) - w);
        l.set(b, a, l.get(b, a) - w);
        l.set(a, a, l.get(a, a) + w);
        l.set(b, b, l.get(b, b) + w);
    }
    l
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    total: f64,
}

impl Spectrum {
    pub fn new(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let total = eigenvalues.iter().sum();
        Self { eigenvalues, total }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `Energy_k` for `k = 1..=n`. A spectrum with zero total energy is
    /// only fully retained at `k = n`.
    pub fn energy_profile(&self, order: EnergyOrder) -> Vec<f64> {
        if self.total == 0.0 {
            let n = self.eigenvalues.len();
            return (1..=n).map(|k| if k == n { 1.0 } else { 0.0 }).collect();
        }
        let mut acc = 0.0;
        let mut visit = |v: &f64| {
            acc += v;
            acc / self.total
        };
        match order {
            EnergyOrder::Ascending => self.eigenvalues.iter().map(&mut visit).collect(),
            EnergyOrder::Descending => self.eigenvalues.iter().rev().map(&mut visit).collect(),
        }
    }
}

pub const JACOBI_MAX_SWEEPS: usize = 100;

/// All eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
///
/// Iterates until the off-diagonal Frobenius norm drops below `tol`;
/// off-diagonal entries negligible against both diagonal entries are
/// zeroed outright so the sweep count stays bounded in floating point.
pub fn symmetric_eigenvalues(m: &SymMatrix, tol: f64) -> Result<Spectrum> {
    let n = m.n();
    let mut a = m.clone();
    let off_norm = |a: &SymMatrix| {
        let mut s = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                s += 2.0 * a.get(i, j) * a.get(i, j);
            }
        }
        s.sqrt()
    };

    let mut sweep = 0;
    loop {
        let off = off_norm(&a);
        if off < tol || off == 0.0 {
            break;
        }
        if sweep == JACOBI_MAX_SWEEPS {
            return Err(Error::Numerical(format!(
                "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (off-diagonal norm {off:e})"
            )));
        }
        sweep += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a.get(p, p), a.get(q, q));
                let g = 100.0 * apq.abs();
                if sweep > 4 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    a.set(p, q, 0.0);
                    a.set(q, p, 0.0);
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
            }
        }
    }
    Ok(Spectrum::new((0..n).map(|i| a.get(i, i)).collect()))
}

/// Laplacian spectrum of a graph. In absolute mode the Laplacian is PSD, so
/// round-off negatives are clamped to zero.
pub fn laplacian_spectrum(graph: &MaxCutGraph, mode: WeightMode) -> Result<Spectrum> {
    let spectrum = symmetric_eigenvalues(&laplacian(graph, mode), 1e-9)?;
    Ok(match mode {
        WeightMode::Absolute => Spectrum::new(spectrum.eigenvalues.iter().map(|v| v.max(0.0)).collect()),
        WeightMode::Raw => spectrum,
    })
}

/// Slack on the energy comparison so eigenvalue round-off cannot push the
/// selected size up by one.
const ENERGY_TOL: f64 = 1e-9;

/// Smallest `k` whose cumulative spectral energy reaches `alpha`.
pub fn select_target_size(spectrum: &Spectrum, alpha: f64, order: EnergyOrder) -> usize {
    let n = spectrum.len();
    if n == 0 || spectrum.total == 0.0 {
        return n;
    }
    spectrum
        .energy_profile(order)
        .iter()
        .position(|&e| e >= alpha - ENERGY_TOL)
        .map_or(n, |k| k + 1)
}
