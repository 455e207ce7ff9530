//! Hadamard-test moment circuits and their classical counterparts.
//!
//! With `H_K` the truncated arc-cosine operator, the ancilla of the test
//! circuit reads `Re` and `Im` of `⟨r|e^{inH_K}|r⟩`, and
//! `T_n(H) ≈ cos(n(π/2 − H_K))` turns those into moments.

mod cost;
mod trotter;

pub use cost::{hqc_cost, CostReport};
pub use trotter::build_controlled_trotter;

use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
use num_complex::Complex64;

use crate::error::{ensure, Result};
use crate::hamiltonian::{updated_st_parameters, HamiltonianSpec, RescaleParams};
use crate::kpm::{MomentSet, Provenance};
use crate::random::{build_random_circuit, prepare_random_state, RandomCircuitSpec};
use crate::rng::{shot_index, stream, Domain};
use crate::statevector::{sample_pm, Basis, Circuit, GateOp, QuantumState};

#[allow(unused_imports)]
use num_traits::Float;

/// One moment circuit: which moment, how it is compiled and measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentCircuitPlan {
    pub n: usize,
    /// Arc-cosine order, 0 or 1.
    pub k_order: usize,
    pub steps: usize,
    pub basis: Basis,
    pub random: RandomCircuitSpec,
    pub beta_id: f64,
}

impl MomentCircuitPlan {
    /// Basis chosen by parity: X for even `n`, Y for odd.
    pub fn new(n: usize, k_order: usize, steps: usize, random: RandomCircuitSpec, beta_id: f64) -> Self {
        let basis = if n % 2 == 0 { Basis::X } else { Basis::Y };
        Self { n, k_order, steps, basis, random, beta_id }
    }
}

/// The operator whose evolution the circuits implement: `h_tilde` for
/// `K = 0`, the cubic-corrected couplings for `K = 1`.
pub fn hamiltonian_for_order(h_tilde: &HamiltonianSpec, params: &RescaleParams, k_order: usize) -> Result<HamiltonianSpec> {
    match k_order {
        0 => Ok(h_tilde.clone()),
        1 => {
            let c = h_tilde
                .couplings
                .ok_or_else(|| crate::Error::Domain("order 1 needs the staggered ring couplings".into()))?;
            ensure!(
                (c.jz + c.lambda - c.jx).abs() <= 1e-12 * c.jx.abs().max(1.0),
                "order 1 is only defined for Jz + lambda = Jx"
            );
            let u = updated_st_parameters(c.jx / params.b, c.jy / params.b, params.beta_id, h_tilde.n_qubits());
            let mut h = u.to_hamiltonian(h_tilde.n_qubits())?;
            h.couplings = h_tilde.couplings;
            Ok(h)
        }
        _ => Err(crate::Error::Domain(alloc::format!("arc-cosine order {k_order} is not supported"))),
    }
}

/// Random circuit on qubits `0..L`, Hadamard on ancilla `L`, controlled
/// evolution, basis change, ancilla measurement.
pub fn build_moment_circuit(plan: &MomentCircuitPlan, h_k: &HamiltonianSpec) -> Result<Circuit> {
    let l = h_k.n_qubits();
    ensure!(plan.random.n_qubits == l, "random circuit and Hamiltonian sizes differ");
    let mut c = Circuit::new(l + 1);
    let identity: Vec<usize> = (0..l).collect();
    c.append_mapped(&build_random_circuit(&plan.random)?, &identity)?;
    c.push(GateOp::H { q: l })?;
    c.extend(&build_controlled_trotter(h_k, plan.n, plan.steps)?)?;
    if plan.basis == Basis::Y {
        c.push(GateOp::Z { q: l, theta: -FRAC_PI_2 })?;
    }
    c.push(GateOp::H { q: l })?;
    c.push(GateOp::Measure { q: l })?;
    let meta = [
        ("scheme", plan.random.scheme.to_string()),
        ("seed", plan.random.seed.to_string()),
        ("replica", plan.random.replica.to_string()),
        ("n", plan.n.to_string()),
        ("K", plan.k_order.to_string()),
        ("steps", plan.steps.to_string()),
        ("basis", (if plan.basis == Basis::X { "X" } else { "Y" }).to_string()),
    ];
    for (k, v) in meta {
        c.metadata.insert(k.into(), v);
    }
    Ok(c)
}

/// `μ̂_n = (−1)^⌊n/2⌋ · (x if n even, y if n odd)`.
pub fn moment_postprocess(n: usize, x_mean: f64, y_mean: f64) -> f64 {
    let v = if n % 2 == 0 { x_mean } else { y_mean };
    if (n / 2) % 2 == 0 {
        v
    } else {
        -v
    }
}

/// `|r⟩ ⊗ |+⟩` with the ancilla as the most significant qubit.
fn plus_ancilla(r: &QuantumState) -> Result<QuantumState> {
    let s = core::f64::consts::FRAC_1_SQRT_2;
    let mut amps: Vec<Complex64> = r.amplitudes().iter().map(|a| a * s).collect();
    amps.extend_from_within(..);
    QuantumState::from_amplitudes(amps)
}

/// Exact ancilla `(⟨X⟩, ⟨Y⟩)` for moments `0..=M` of one random state,
/// by running the controlled circuits on `L + 1` qubits.
pub fn circuit_expectations(h_k: &HamiltonianSpec, r: &QuantumState, m_max: usize, steps: usize) -> Result<Vec<(f64, f64)>> {
    let l = h_k.n_qubits();
    ensure!(r.n_qubits() == l, "state and Hamiltonian sizes differ");
    let start = plus_ancilla(r)?;
    (0..=m_max)
        .map(|n| {
            let mut psi = start.clone();
            psi.apply_circuit(&build_controlled_trotter(h_k, n, steps)?)?;
            psi.ancilla_xy_expectation(l)
        })
        .collect()
}

/// Per-replica exact moments.
pub fn replica_moments_exact(h_k: &HamiltonianSpec, r: &QuantumState, m_max: usize, steps: usize) -> Result<Vec<f64>> {
    Ok(circuit_expectations(h_k, r, m_max, steps)?
        .into_iter()
        .enumerate()
        .map(|(n, (x, y))| moment_postprocess(n, x, y))
        .collect())
}

/// Infinite-shot circuit moments averaged over replicas `0..R` of `random`.
pub fn estimate_moments_exact(
    h_k: &HamiltonianSpec,
    random: &RandomCircuitSpec,
    replicas: usize,
    m_max: usize,
    steps: usize,
) -> Result<MomentSet> {
    ensure!(replicas >= 1, "need at least one replica");
    let sets = (0..replicas)
        .map(|r| {
            let psi = prepare_random_state(&random.with_replica(r as u64))?;
            Ok(MomentSet::exact(replica_moments_exact(h_k, &psi, m_max, steps)?, Provenance::CircuitExact))
        })
        .collect::<Result<Vec<_>>>()?;
    MomentSet::average(&sets, Provenance::CircuitExact)
}

/// Samples the parity-selected ancilla basis for every moment of one
/// replica, `shots` times each, from exact expectations.
pub fn sample_replica_moments(expectations: &[(f64, f64)], shots: u64, shot_seed: u64, replica: u32) -> Result<Vec<f64>> {
    ensure!(shots >= 1, "at least one shot is required");
    Ok(expectations
        .iter()
        .enumerate()
        .map(|(n, &(x, y))| {
            let basis_y = n % 2 == 1;
            let mut rng = stream(shot_seed, Domain::Shots, shot_index(replica, n as u32, basis_y));
            let (plus, minus) = sample_pm(if basis_y { y } else { x }, shots, &mut rng);
            let mean = (plus as f64 - minus as f64) / shots as f64;
            moment_postprocess(n, mean, mean)
        })
        .collect())
}

/// Combines per-replica shot moments. `std_errors` is the projection-noise
/// floor `√((1 − μ̂²)/(R·shots))`; the replica scatter is kept apart.
pub fn aggregate_shot_moments(per_replica: &[Vec<f64>], shots: u64) -> Result<MomentSet> {
    let sets: Vec<MomentSet> = per_replica
        .iter()
        .map(|v| MomentSet::exact(v.clone(), Provenance::CircuitShots))
        .collect();
    let mut m = MomentSet::average(&sets, Provenance::CircuitShots)?;
    let denom = (per_replica.len() as u64 * shots) as f64;
    m.std_errors = m.values.iter().map(|mu| ((1.0 - mu * mu).max(0.0) / denom).sqrt()).collect();
    m.shots = shots;
    Ok(m)
}

#[allow(clippy::too_many_arguments)]
pub fn estimate_moments_shots(
    h_k: &HamiltonianSpec,
    random: &RandomCircuitSpec,
    replicas: usize,
    m_max: usize,
    steps: usize,
    shots: u64,
    shot_seed: u64,
) -> Result<MomentSet> {
    ensure!(replicas >= 1, "need at least one replica");
    let per = (0..replicas)
        .map(|r| {
            let psi = prepare_random_state(&random.with_replica(r as u64))?;
            let e = circuit_expectations(h_k, &psi, m_max, steps)?;
            sample_replica_moments(&e, shots, shot_seed, r as u32)
        })
        .collect::<Result<Vec<_>>>()?;
    aggregate_shot_moments(&per, shots)
}

/// Moments statistically consistent with zero, `|μ̂| < 2σ`.
pub fn zero_flags(m: &MomentSet) -> Vec<bool> {
    m.values.iter().zip(&m.std_errors).map(|(v, e)| v.abs() < 2.0 * e).collect()
}

/// `e^{iθP}|ψ⟩ = cos θ |ψ⟩ + i sin θ P|ψ⟩`, term by term.
fn apply_pauli_exponential(t: &crate::hamiltonian::PauliTerm, theta: f64, psi: &mut [Complex64], scratch: &mut [Complex64]) {
    for s in scratch.iter_mut() {
        *s = Complex64::new(0.0, 0.0);
    }
    t.accumulate(1.0, psi, scratch);
    let (c, s) = (theta.cos(), Complex64::new(0.0, theta.sin()));
    for (p, q) in psi.iter_mut().zip(scratch.iter()) {
        *p = *p * c + s * q;
    }
}

/// First-order product formula for `e^{i t H}` applied to `psi`, with the
/// same term order as the circuits.
pub fn st_evolve(h: &HamiltonianSpec, psi: &QuantumState, time: f64, steps: usize) -> Result<QuantumState> {
    ensure!(steps >= 1, "need at least one product-formula step");
    ensure!(psi.n_qubits() == h.n_qubits(), "state and Hamiltonian sizes differ");
    let groups = trotter::grouped_terms(h)?;
    let mut amps = psi.amplitudes().to_vec();
    let mut scratch = alloc::vec![Complex64::new(0.0, 0.0); amps.len()];
    let tau = time / steps as f64;
    for _ in 0..steps {
        for g in &groups {
            for t in g {
                apply_pauli_exponential(t, tau * t.coefficient, &mut amps, &mut scratch);
            }
        }
    }
    let phase = Complex64::from_polar(1.0, time * h.identity_coefficient());
    for a in &mut amps {
        *a *= phase;
    }
    QuantumState::from_amplitudes(amps)
}

/// Classical product-formula moments of one state, no circuit involved.
pub fn st_replica_moments(h_k: &HamiltonianSpec, r: &QuantumState, m_max: usize, steps: usize) -> Result<Vec<f64>> {
    (0..=m_max)
        .map(|n| {
            let u = r.inner(&st_evolve(h_k, r, n as f64, steps)?)?;
            Ok(moment_postprocess(n, u.re, u.im))
        })
        .collect()
}

/// `(1/D) Σ_k cos(n(π/2 − e_k))` over the spectrum of `H_K`: the
/// arc-cosine approximation evaluated exactly.
pub fn arccos_moments_from_spectrum(eigenvalues: &[f64], m_max: usize) -> Result<MomentSet> {
    ensure!(!eigenvalues.is_empty(), "empty spectrum");
    let d = eigenvalues.len() as f64;
    let values = (0..=m_max)
        .map(|n| {
            eigenvalues
                .iter()
                .map(|&e| (n as f64 * (FRAC_PI_2 - e)).cos())
                .sum::<f64>()
                / d
        })
        .collect();
    Ok(MomentSet::exact(values, Provenance::Arccos))
}
