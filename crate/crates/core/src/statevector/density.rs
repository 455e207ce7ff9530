use alloc::vec::Vec;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::QuantumState;
use crate::error::{ensure, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Reduced density matrix over `kept` qubits; `kept[0]` is the least
/// significant bit of the row/column index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub kept: Vec<usize>,
    pub matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Largest |ρ_ij − conj(ρ_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

/// Traces out every qubit not listed in `keep`.
pub fn reduced_density_matrix(state: &QuantumState, keep: &[usize]) -> Result<DensityMatrix> {
    let n = state.n_qubits();
    ensure!(!keep.is_empty(), "keep set is empty");
    ensure!(keep.len() < n, "keep set covers the whole register");
    for (i, &q) in keep.iter().enumerate() {
        ensure!(q < n, "qubit {q} out of range");
        ensure!(!keep[..i].contains(&q), "qubit {q} listed twice");
    }
    let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
    let dk = 1usize << keep.len();
    let dt = 1usize << traced.len();
    let scatter = |bits: usize, qubits: &[usize]| -> usize {
        qubits.iter().enumerate().fold(0, |acc, (k, &q)| acc | (((bits >> k) & 1) << q))
    };
    let kept_offsets: Vec<usize> = (0..dk).map(|k| scatter(k, keep)).collect();
    let traced_offsets: Vec<usize> = (0..dt).map(|t| scatter(t, &traced)).collect();

    // A[k, t] = ψ(k ⊕ t);  ρ = A A†.
    let amps = state.amplitudes();
    let a = DMatrix::from_fn(dk, dt, |k, t| amps[kept_offsets[k] | traced_offsets[t]]);
    let matrix = &a * a.adjoint();
    Ok(DensityMatrix {
        kept: keep.to_vec(),
        matrix,
    })
}

/// `−Σ λ ln λ` in nats, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    let defect = rho.hermiticity_defect();
    ensure!(defect < 1e-9, "density matrix is not Hermitian (defect {defect:e})");
    Ok(entropy_of_spectrum(&rho.eigenvalues()))
}

pub(crate) fn entropy_of_spectrum(eigenvalues: &[f64]) -> f64 {
    let s: f64 = eigenvalues
        .iter()
        .filter(|&&l| l > 1e-300)
        .map(|&l| -l * l.ln())
        .sum();
    s.max(0.0)
}
