//! Dense statevector simulation.
//!
//! Basis index convention: qubit `q` is bit `q` of the index, so qubit 0 is
//! the least-significant bit. Gate application works in place over strided
//! amplitude pairs; no operator matrix is ever materialised.

mod circuit;
mod density;
mod gate;

pub use circuit::{Circuit, GateCounts};
pub use density::{reduced_density_matrix, von_neumann_entropy, DensityMatrix};
pub use gate::GateOp;

use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{ensure, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 26;

/// Ancilla measurement basis of a Hadamard test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    X,
    Y,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl QuantumState {
    /// `|index⟩` on `n_qubits` qubits.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        ensure!(n_qubits >= 1, "a state needs at least one qubit");
        if n_qubits > MAX_QUBITS {
            return Err(crate::Error::Resource(alloc::format!(
                "{n_qubits} qubits exceeds the statevector cap of {MAX_QUBITS}"
            )));
        }
        let dim = 1usize << n_qubits;
        ensure!(index < dim, "basis index {index} out of range for {n_qubits} qubits");
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amps })
    }

    /// `|0…0⟩`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// Wraps raw amplitudes. The vector is taken as is (not renormalised).
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        ensure!(dim >= 2 && dim.is_power_of_two(), "amplitude count {dim} is not 2^L with L >= 1");
        Ok(Self {
            n_qubits: dim.trailing_zeros() as usize,
            amps,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        ensure!(
            self.n_qubits == other.n_qubits,
            "inner product of {}- and {}-qubit states",
            self.n_qubits,
            other.n_qubits
        );
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        gate.apply_unchecked(&mut self.amps);
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<()> {
        ensure!(
            circuit.n_qubits() == self.n_qubits,
            "circuit on {} qubits applied to a {}-qubit state",
            circuit.n_qubits(),
            self.n_qubits
        );
        for op in circuit.ops() {
            self.apply(op)?;
        }
        Ok(())
    }

    /// Tensor product `self ⊗ |bit⟩` with the new qubit as most significant.
    pub fn with_ancilla(&self, bit: bool) -> Result<Self> {
        ensure!(self.n_qubits < MAX_QUBITS, "no room for an ancilla");
        let dim = self.dim();
        let mut amps = vec![Complex64::new(0.0, 0.0); 2 * dim];
        let offset = if bit { dim } else { 0 };
        amps[offset..offset + dim].copy_from_slice(&self.amps);
        Ok(Self {
            n_qubits: self.n_qubits + 1,
            amps,
        })
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        ensure!(q < self.n_qubits, "qubit {q} out of range for {} qubits", self.n_qubits);
        Ok(())
    }

    /// `(⟨X⟩, ⟨Y⟩)` of qubit `q`.
    pub fn ancilla_xy_expectation(&self, q: usize) -> Result<(f64, f64)> {
        self.check_qubit(q)?;
        // ρ_10 = Σ ψ(…1…) ψ*(…0…);  ⟨X⟩ = 2 Re ρ_10, ⟨Y⟩ = 2 Im ρ_10.
        let mask = 1usize << q;
        let mut rho10 = Complex64::new(0.0, 0.0);
        for (i, a0) in self.amps.iter().enumerate() {
            if i & mask == 0 {
                rho10 += self.amps[i | mask] * a0.conj();
            }
        }
        Ok((2.0 * rho10.re, 2.0 * rho10.im))
    }

    /// `⟨Z⟩` of qubit `q`.
    pub fn z_expectation(&self, q: usize) -> Result<f64> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        Ok(self
            .amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum())
    }

    /// Draws `shots` projective measurements of qubit `q` in `basis` and
    /// returns the `(+1, −1)` outcome counts.
    pub fn sample_ancilla<R: Rng + ?Sized>(
        &self,
        q: usize,
        basis: Basis,
        shots: u64,
        rng: &mut R,
    ) -> Result<(u64, u64)> {
        ensure!(shots >= 1, "at least one shot is required");
        let (x, y) = self.ancilla_xy_expectation(q)?;
        let mean = match basis {
            Basis::X => x,
            Basis::Y => y,
        };
        Ok(sample_pm(mean, shots, rng))
    }
}

/// Samples `shots` ±1 outcomes whose expectation is `mean`.
pub fn sample_pm<R: Rng + ?Sized>(mean: f64, shots: u64, rng: &mut R) -> (u64, u64) {
    let p_plus = (0.5 * (1.0 + mean)).clamp(0.0, 1.0);
    let mut plus = 0u64;
    for _ in 0..shots {
        if rng.random::<f64>() < p_plus {
            plus += 1;
        }
    }
    (plus, shots - plus)
}

/// Applies a 2×2 matrix `[[m00, m01], [m10, m11]]` to qubit `q`, restricted
/// to basis states whose `control` bit (if any) is set.
pub(crate) fn apply_1q(amps: &mut [Complex64], q: usize, control: Option<usize>, m: [Complex64; 4]) {
    let step = 1usize << q;
    let cmask = control.map_or(0, |c| 1usize << c);
    let dim = amps.len();
    let mut base = 0;
    while base < dim {
        for i in base..base + step {
            if i & cmask != cmask {
                continue;
            }
            let j = i + step;
            let (a0, a1) = (amps[i], amps[j]);
            amps[i] = m[0] * a0 + m[1] * a1;
            amps[j] = m[2] * a0 + m[3] * a1;
        }
        base += 2 * step;
    }
}

/// Multiplies each amplitude by `phase(index)`, restricted to the control.
pub(crate) fn apply_diagonal<F>(amps: &mut [Complex64], control: Option<usize>, phase: F)
where
    F: Fn(usize) -> Complex64,
{
    let cmask = control.map_or(0, |c| 1usize << c);
    for (i, a) in amps.iter_mut().enumerate() {
        if i & cmask == cmask {
            *a *= phase(i);
        }
    }
}

pub(crate) fn cis(theta: f64) -> Complex64 {
    Complex64::new(theta.cos(), theta.sin())
}

#[allow(dead_code)]
pub(crate) fn zeros(n: usize) -> Vec<Complex64> {
    vec![Complex64::new(0.0, 0.0); n]
}
