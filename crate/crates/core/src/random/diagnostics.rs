use alloc::vec::Vec;

use super::{build_random_layers, prepare_random_state, RandomCircuitSpec, Scheme};
use crate::error::{ensure, Result};
use crate::statevector::{reduced_density_matrix, von_neumann_entropy, QuantumState};

#[allow(unused_imports)]
use num_traits::Float;

/// Mean half-chain entropy of a random pure state, `(L/2) ln 2 − 1/2`.
pub fn page_value(l: usize) -> Result<f64> {
    ensure!(l >= 2 && l % 2 == 0, "page value needs an even chain, got {l}");
    Ok(l as f64 / 2.0 * core::f64::consts::LN_2 - 0.5)
}

/// Von Neumann entropy (nats) of qubits `0..L/2`.
pub fn half_chain_entropy(psi: &QuantumState) -> Result<f64> {
    let keep: Vec<usize> = (0..psi.n_qubits() / 2).collect();
    von_neumann_entropy(&reduced_density_matrix(psi, &keep)?)
}

/// `2^L Σ_i |c_i|⁴`; equals 2 on average for Gaussian coefficients.
pub fn fourth_moment(psi: &QuantumState) -> f64 {
    let s: f64 = psi.amplitudes().iter().map(|c| c.norm_sqr() * c.norm_sqr()).sum();
    s * psi.dim() as f64
}

/// [`fourth_moment`] averaged over replicas `0..n_states` of `spec`.
pub fn fourth_moment_diagnostic(spec: &RandomCircuitSpec, n_states: usize) -> Result<f64> {
    ensure!(n_states >= 1, "need at least one state");
    let mut acc = 0.0;
    for r in 0..n_states {
        acc += fourth_moment(&prepare_random_state(&spec.with_replica(r as u64))?);
    }
    Ok(acc / n_states as f64)
}

/// Statistics over states after the first `depth` layers.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkPoint {
    pub depth: usize,
    /// Cumulative two-qubit gates of one circuit up to `depth`.
    pub two_qubit_gates: u64,
    pub mean_entropy: f64,
    pub min_entropy: f64,
    pub max_entropy: f64,
    pub mean_fourth_moment: f64,
    pub entropies: Vec<f64>,
}

/// Half-chain entropy and fourth moment versus depth for replicas
/// `0..n_states`. Depth `d` is the state after the first `d` layers of the
/// `max_layers` circuit, so the jump pattern is that of the full circuit.
pub fn entropy_benchmark(
    scheme: Scheme,
    l: usize,
    s: Option<usize>,
    seed: u64,
    n_states: usize,
    max_layers: usize,
) -> Result<Vec<BenchmarkPoint>> {
    ensure!(n_states >= 1, "need at least one state");
    let mut spec = RandomCircuitSpec::new(l, scheme, max_layers, seed);
    spec.s = s;
    let mut ent = alloc::vec![Vec::with_capacity(n_states); max_layers];
    let mut kappa = alloc::vec![0.0; max_layers];
    let mut gates = alloc::vec![0u64; max_layers];
    for r in 0..n_states {
        let layers = build_random_layers(&spec.with_replica(r as u64))?;
        let mut psi = QuantumState::zero(l)?;
        let mut g = 0;
        for (d, layer) in layers.iter().enumerate() {
            psi.apply_circuit(layer)?;
            g += layer.gate_counts().two_qubit;
            gates[d] = g;
            ent[d].push(half_chain_entropy(&psi)?);
            kappa[d] += fourth_moment(&psi);
        }
    }
    Ok(ent
        .into_iter()
        .enumerate()
        .map(|(d, e)| BenchmarkPoint {
            depth: d + 1,
            two_qubit_gates: gates[d],
            mean_entropy: e.iter().sum::<f64>() / n_states as f64,
            min_entropy: e.iter().copied().fold(f64::INFINITY, f64::min),
            max_entropy: e.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_fourth_moment: kappa[d] / n_states as f64,
            entropies: e,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use num_complex::Complex64;

    #[test]
    fn page_values() {
        assert!((page_value(2).unwrap() - 0.193147).abs() < 1e-5);
        assert!((page_value(12).unwrap() - 3.658883).abs() < 1e-5);
        assert!((page_value(18).unwrap() - 5.738325).abs() < 1e-5);
        assert!(page_value(5).is_err());
    }

    #[test]
    fn fourth_moment_limits() {
        assert_eq!(fourth_moment(&QuantumState::basis(6, 9).unwrap()), 64.0);
        let u = QuantumState::from_amplitudes(vec![Complex64::new(0.125, 0.0); 64]).unwrap();
        assert!((fourth_moment(&u) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn par_l10_approaches_page() {
        let pts = entropy_benchmark(Scheme::Par, 10, None, 1, 20, 12).unwrap();
        let page = page_value(10).unwrap();
        let last = pts.last().unwrap();
        assert!((last.mean_entropy - page).abs() / page < 0.1);
        assert!((last.mean_fourth_moment - 2.0).abs() < 0.1);
        assert_eq!(last.two_qubit_gates, 60);
        // Rising until saturation, never above the dimension bound.
        for w in pts.windows(2).take(5) {
            assert!(w[1].mean_entropy >= w[0].mean_entropy);
        }
        for p in &pts {
            assert!(p.max_entropy <= 5.0 * core::f64::consts::LN_2 + 1e-9);
            assert!(p.mean_entropy <= page + 0.05);
        }
    }
}
