//! Hamiltonians as weighted Pauli strings.

mod arccos;
mod pauli;
mod rescale;
mod xyz;

pub use arccos::{
    arccos_coefficients, arccos_error_budget, error_estimates, gaussian_parameters_from_moments,
    updated_st_parameters, UpdatedCouplings,
};
pub use pauli::{Pauli, PauliTerm};
pub use rescale::{coefficient_norm_bounds, rescale, RescaleParams, SpectralBounds};
pub use xyz::{build_xyz_staggered, XyzCouplings};

use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;

use crate::error::{ensure, Result};
use crate::statevector::QuantumState;

/// `H = identity_offset · I + Σ_t c_t P_t` on `n_qubits` qubits.
///
/// The identity offset is kept out of the term list so that rescaled
/// Hamiltonians can carry `−a/b` as metadata; circuits realise it as a
/// phase on the ancilla.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianSpec {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
    pub identity_offset: f64,
    /// Set by the XYZ builder; `None` for hand-made term lists.
    pub couplings: Option<XyzCouplings>,
    pub periodic: bool,
}

/// Which product-formula group a term belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondGroup {
    /// Bonds `(i, i+1)` with `i` even, plus single-site terms.
    Even,
    /// Bonds `(i, i+1 mod L)` with `i` odd.
    Odd,
}

impl HamiltonianSpec {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        ensure!(n_qubits >= 1 && n_qubits <= 63, "unsupported register size {n_qubits}");
        for t in &terms {
            if let Some(&(q, _)) = t.factors().last() {
                ensure!(q < n_qubits, "term {t} acts outside {n_qubits} qubits");
            }
        }
        Ok(Self {
            n_qubits,
            terms,
            identity_offset: 0.0,
            couplings: None,
            periodic: false,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Offset plus the coefficients of any explicit identity terms.
    pub fn identity_coefficient(&self) -> f64 {
        self.identity_offset
            + self
                .terms
                .iter()
                .filter(|t| t.is_identity())
                .map(|t| t.coefficient)
                .sum::<f64>()
    }

    /// Non-identity terms only.
    pub fn pauli_terms(&self) -> impl Iterator<Item = &PauliTerm> {
        self.terms.iter().filter(|t| !t.is_identity())
    }

    /// `tr(H) / 2^L`.
    pub fn normalized_trace(&self) -> f64 {
        self.identity_coefficient()
    }

    /// `H|ψ⟩`, term by term, without normalisation.
    pub fn apply(&self, psi: &QuantumState) -> Result<QuantumState> {
        let mut out = crate::statevector::zeros(psi.dim());
        self.apply_into(psi.amplitudes(), &mut out)?;
        QuantumState::from_amplitudes(out)
    }

    /// `out = H ψ` on raw amplitude slices.
    pub fn apply_into(&self, psi: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        ensure!(
            psi.len() == self.dim() && out.len() == self.dim(),
            "state of dimension {} does not match a {}-qubit Hamiltonian",
            psi.len(),
            self.n_qubits
        );
        let id = self.identity_offset;
        for (o, p) in out.iter_mut().zip(psi) {
            *o = p * id;
        }
        for t in &self.terms {
            t.accumulate(t.coefficient, psi, out);
        }
        Ok(())
    }

    /// Product-formula group of term `t`; `None` for terms the two-group
    /// splitting cannot host (weight above two or non-adjacent sites).
    pub fn bond_group(&self, t: &PauliTerm) -> Option<BondGroup> {
        let f = t.factors();
        match f.len() {
            0 | 1 => Some(BondGroup::Even),
            2 => {
                let (i, j) = (f[0].0, f[1].0);
                let l = self.n_qubits;
                let left = if j == i + 1 {
                    i
                } else if self.periodic && i == 0 && j == l - 1 {
                    l - 1
                } else {
                    return None;
                };
                Some(if left % 2 == 0 { BondGroup::Even } else { BondGroup::Odd })
            }
            _ => None,
        }
    }

    /// Serialised term list, one `coeff site:letter …` line per term.
    pub fn to_term_text(&self) -> String {
        let mut s = String::new();
        if self.identity_offset != 0.0 {
            s.push_str(&alloc::format!("{}\n", self.identity_offset));
        }
        for t in &self.terms {
            s.push_str(&alloc::format!("{t}\n"));
        }
        s
    }

    /// Inverse of [`to_term_text`](Self::to_term_text). Lines with no
    /// factors accumulate into the identity offset.
    pub fn from_term_text(n_qubits: usize, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        let mut offset = 0.0;
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let t: PauliTerm = line.parse()?;
            if t.is_identity() {
                offset += t.coefficient;
            } else {
                terms.push(t);
            }
        }
        let mut h = Self::new(n_qubits, terms)?;
        h.identity_offset = offset;
        Ok(h)
    }

    /// Same operator with every coefficient (and the offset) mapped.
    pub(crate) fn map_coefficients(&self, f: impl Fn(f64) -> f64) -> Self {
        let mut h = self.clone();
        for t in &mut h.terms {
            t.coefficient = f(t.coefficient);
        }
        h.identity_offset = f(h.identity_offset);
        h
    }

    pub fn with_terms(&self, terms: Vec<PauliTerm>, identity_offset: f64) -> Self {
        Self {
            n_qubits: self.n_qubits,
            terms,
            identity_offset,
            couplings: self.couplings,
            periodic: self.periodic,
        }
    }

    /// Sum of absolute term coefficients (offset excluded).
    pub fn coefficient_one_norm(&self) -> f64 {
        self.pauli_terms().map(|t| t.coefficient.abs()).sum()
    }
}

#[cfg(test)]
pub(crate) mod dense_oracle {
    //! Kronecker-product construction used only to check the sparse path.
    use super::*;
    use nalgebra::DMatrix;

    fn letter(p: Pauli) -> DMatrix<Complex64> {
        let o = Complex64::new(0.0, 0.0);
        let r = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match p {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[r, o, o, r]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[o, r, r, o]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[r, o, o, -r]),
        }
    }

    pub fn dense(h: &HamiltonianSpec) -> DMatrix<Complex64> {
        let n = h.n_qubits();
        let mut m = DMatrix::<Complex64>::identity(h.dim(), h.dim()) * Complex64::new(h.identity_offset, 0.0);
        for t in h.terms() {
            let mut k = DMatrix::<Complex64>::identity(1, 1);
            // Highest qubit is the leftmost Kronecker factor.
            for q in (0..n).rev() {
                k = k.kronecker(&letter(t.letter(q)));
            }
            m += k * Complex64::new(t.coefficient, 0.0);
        }
        m
    }
}
