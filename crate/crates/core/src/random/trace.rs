use alloc::vec::Vec;
use num_complex::Complex64;

use super::{prepare_random_state, RandomCircuitSpec};
use crate::error::{ensure, Result};
use crate::statevector::QuantumState;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceMode {
    /// `tr[X] / 2^L`
    #[default]
    Normalized,
    /// `tr[X]`
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEstimate {
    pub mean: Complex64,
    /// Sample standard deviation over replicas divided by `√R`.
    pub std_error: f64,
    pub replicas: usize,
    pub samples: Vec<Complex64>,
}

impl TraceEstimate {
    /// Aggregate per-replica values `⟨r|X|r⟩`, scaled by `scale`.
    pub fn from_samples(samples: Vec<Complex64>, scale: f64) -> Result<Self> {
        ensure!(!samples.is_empty(), "need at least one replica");
        let r = samples.len();
        let samples: Vec<Complex64> = samples.into_iter().map(|s| s * scale).collect();
        let mean = samples.iter().sum::<Complex64>() / r as f64;
        let std_error = if r > 1 {
            let var = samples.iter().map(|s| (s - mean).norm_sqr()).sum::<f64>() / (r - 1) as f64;
            (var / r as f64).sqrt()
        } else {
            0.0
        };
        Ok(Self { mean, std_error, replicas: r, samples })
    }
}

/// `⟨r|X|r⟩` for the state of `spec`.
pub fn trace_sample<F>(apply_op: &mut F, spec: &RandomCircuitSpec) -> Result<Complex64>
where
    F: FnMut(&QuantumState) -> Result<QuantumState>,
{
    let r = prepare_random_state(spec)?;
    let xr = apply_op(&r)?;
    r.inner(&xr)
}

/// Stochastic trace over replicas `0..replicas` of `spec`.
pub fn stochastic_trace<F>(mut apply_op: F, spec: &RandomCircuitSpec, replicas: usize, mode: TraceMode) -> Result<TraceEstimate>
where
    F: FnMut(&QuantumState) -> Result<QuantumState>,
{
    ensure!(replicas >= 1, "need at least one replica");
    let samples = (0..replicas)
        .map(|r| trace_sample(&mut apply_op, &spec.with_replica(r as u64)))
        .collect::<Result<Vec<_>>>()?;
    let scale = match mode {
        TraceMode::Normalized => 1.0,
        TraceMode::Raw => (1u64 << spec.n_qubits) as f64,
    };
    TraceEstimate::from_samples(samples, scale)
}

#[cfg(test)]
mod tests {
    use super::super::Scheme;
    use super::*;
    use crate::hamiltonian::build_xyz_staggered;

    #[test]
    fn identity_is_exact() {
        let spec = RandomCircuitSpec::new(6, Scheme::Par, 6, 2);
        let est = stochastic_trace(|p| Ok(p.clone()), &spec, 5, TraceMode::Normalized).unwrap();
        for s in &est.samples {
            assert!((s - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        let raw = stochastic_trace(|p| Ok(p.clone()), &spec, 2, TraceMode::Raw).unwrap();
        assert!((raw.mean.re - 64.0).abs() < 1e-9);
    }

    #[test]
    fn traceless_hamiltonian() {
        let h = build_xyz_staggered(10, 1.0, 1.0 / 3.0, 0.5, 0.5).unwrap();
        let spec = RandomCircuitSpec::new(10, Scheme::Par, 10, 4);
        let est = stochastic_trace(|p| h.apply(p), &spec, 16, TraceMode::Normalized).unwrap();
        assert!(est.mean.norm() < 4.0 * est.std_error + 1e-12);
        assert!(est.mean.im.abs() < 1e-12);
    }
}
