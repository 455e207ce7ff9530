//! Layered random circuits used to prepare pseudo-random states.
//!
//! A layer is one sublayer of single-qubit rotations followed by one
//! sublayer of `ZZ(π/2)` gates. No qubit receives the same rotation kind in
//! two consecutive layers.

mod diagnostics;
mod trace;

pub use diagnostics::{
    entropy_benchmark, fourth_moment, fourth_moment_diagnostic, half_chain_entropy, page_value, BenchmarkPoint,
};
pub use trace::{stochastic_trace, trace_sample, TraceEstimate, TraceMode};

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use core::fmt;
use core::str::FromStr;

use crate::error::{ensure, Error, Result};
use crate::rng::{stream, Domain, Rng, StreamRng};
use crate::statevector::{Circuit, GateOp, QuantumState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Parallel matchings `(2i, 2i + p_ℓ mod L)` with alternating jumps.
    Par,
    /// Nearest-neighbour staircase along the open chain.
    Seq,
    /// Brick-wall even-odd / odd-even ring.
    Ric,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Par => "par",
            Scheme::Seq => "seq",
            Scheme::Ric => "ric",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "par" => Ok(Scheme::Par),
            "seq" => Ok(Scheme::Seq),
            "ric" => Ok(Scheme::Ric),
            _ => Err(Error::Domain(alloc::format!("unknown random-circuit scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomCircuitSpec {
    pub n_qubits: usize,
    pub scheme: Scheme,
    pub n_layers: usize,
    /// Jump stride for `Par`; `None` picks [`default_jump_stride`].
    pub s: Option<usize>,
    pub seed: u64,
    /// Stream index under `seed`; replicas of one run differ only here.
    pub replica: u64,
}

impl RandomCircuitSpec {
    pub fn new(n_qubits: usize, scheme: Scheme, n_layers: usize, seed: u64) -> Self {
        Self { n_qubits, scheme, n_layers, s: None, seed, replica: 0 }
    }

    pub fn with_replica(self, replica: u64) -> Self {
        Self { replica, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        ensure!(self.n_layers >= 1, "a random circuit needs at least one layer");
        ensure!(
            self.n_qubits >= 2 && self.n_qubits <= crate::statevector::MAX_QUBITS,
            "unsupported register size {}",
            self.n_qubits
        );
        if self.scheme != Scheme::Seq {
            ensure!(self.n_qubits % 2 == 0, "{} scheme needs an even number of qubits", self.scheme);
        }
        Ok(())
    }

    pub fn stride(&self) -> usize {
        self.s.unwrap_or_else(|| default_jump_stride(self.n_qubits, self.n_layers))
    }
}

/// Jumps `p_ℓ` for an even number of layers: `−(−1)^ℓ (2sℓ + 1)` on the
/// first half, then the first half reversed with signs flipped.
pub fn jump_sequence(l: usize, s: usize, n_layers: usize) -> Result<Vec<i64>> {
    ensure!(l >= 2 && l % 2 == 0, "jump sequence needs an even ring, got {l}");
    ensure!(n_layers % 2 == 0, "jump sequence needs an even number of layers, got {n_layers}");
    let half: Vec<i64> = (0..n_layers / 2)
        .map(|k| {
            let p = 2 * (s * k) as i64 + 1;
            if k % 2 == 0 {
                -p
            } else {
                p
            }
        })
        .collect();
    let mut out = half.clone();
    out.extend(half.iter().rev().map(|p| -p));
    Ok(out)
}

/// Jumps for any layer count: odd counts take the leading entries of the
/// next even-length sequence.
fn jumps_for(l: usize, s: usize, n_layers: usize) -> Result<Vec<i64>> {
    let mut j = jump_sequence(l, s, n_layers + n_layers % 2)?;
    j.truncate(n_layers);
    Ok(j)
}

/// Smallest `s ≥ 1` whose first-half jumps are pairwise distinct modulo
/// `l`, so no matching repeats before the mirrored half. Falls back to 1.
pub fn default_jump_stride(l: usize, n_layers: usize) -> usize {
    let h = n_layers.div_ceil(2);
    let l = l.max(1) as i64;
    (1..=l as usize)
        .find(|&s| {
            let mut seen: Vec<i64> = (0..h)
                .map(|k| {
                    let p = 2 * (s * k) as i64 + 1;
                    (if k % 2 == 0 { -p } else { p }).rem_euclid(l)
                })
                .collect();
            seen.sort_unstable();
            seen.windows(2).all(|w| w[0] != w[1])
        })
        .unwrap_or(1)
}

/// Rotation gate of kind `k ∈ {0, 1, 2}` (X, Y, Z) for `scheme`.
fn rotation(scheme: Scheme, k: u8, q: usize) -> GateOp {
    let (x, y, z) = match scheme {
        Scheme::Par | Scheme::Seq => (FRAC_PI_2, FRAC_PI_4, FRAC_PI_2),
        Scheme::Ric => (FRAC_PI_2, FRAC_PI_2, FRAC_PI_4),
    };
    match k {
        0 => GateOp::U1q { q, theta: x, phi: 0.0 },
        1 => GateOp::U1q { q, theta: y, phi: FRAC_PI_2 },
        _ => GateOp::Z { q, theta: z },
    }
}

fn draw_kind(rng: &mut StreamRng, prev: Option<u8>) -> u8 {
    match prev {
        None => rng.random_range(0..3u8),
        Some(p) => (p + 1 + rng.random_range(0..2u8)) % 3,
    }
}

fn zz_pairs(spec: &RandomCircuitSpec, layer: usize, jumps: &[i64]) -> Vec<(usize, usize)> {
    let l = spec.n_qubits;
    match spec.scheme {
        Scheme::Par => {
            let p = jumps[layer];
            (0..l / 2)
                .map(|i| (2 * i, (2 * i as i64 + p).rem_euclid(l as i64) as usize))
                .collect()
        }
        Scheme::Seq => (0..l - 1).map(|i| (i, i + 1)).collect(),
        Scheme::Ric => {
            let off = layer % 2;
            (0..l / 2).map(|i| (2 * i + off, (2 * i + off + 1) % l)).collect()
        }
    }
}

/// The circuit split into its layers, in order.
pub fn build_random_layers(spec: &RandomCircuitSpec) -> Result<Vec<Circuit>> {
    spec.validate()?;
    let l = spec.n_qubits;
    let jumps = if spec.scheme == Scheme::Par {
        jumps_for(l, spec.stride(), spec.n_layers)?
    } else {
        Vec::new()
    };
    let mut rng = stream(spec.seed, Domain::Circuit, spec.replica);
    let mut prev: Vec<Option<u8>> = vec![None; l];
    let mut layers = Vec::with_capacity(spec.n_layers);
    for layer in 0..spec.n_layers {
        let mut c = Circuit::new(l);
        let kinds: Vec<u8> = prev.iter().map(|&p| draw_kind(&mut rng, p)).collect();
        let pairs = zz_pairs(spec, layer, &jumps);
        if spec.scheme == Scheme::Seq {
            // Staircase: each rotation is placed just before the first ZZ touching its qubit.
            c.push(rotation(spec.scheme, kinds[0], 0))?;
            for &(a, b) in &pairs {
                c.push(rotation(spec.scheme, kinds[b], b))?;
                c.push(GateOp::ZZ { a, b, theta: FRAC_PI_2 })?;
            }
        } else {
            for (q, &k) in kinds.iter().enumerate() {
                c.push(rotation(spec.scheme, k, q))?;
            }
            for &(a, b) in &pairs {
                c.push(GateOp::ZZ { a, b, theta: FRAC_PI_2 })?;
            }
        }
        for (p, k) in prev.iter_mut().zip(kinds) {
            *p = Some(k);
        }
        layers.push(c);
    }
    Ok(layers)
}

pub fn build_random_circuit(spec: &RandomCircuitSpec) -> Result<Circuit> {
    let mut c = Circuit::new(spec.n_qubits);
    for layer in build_random_layers(spec)? {
        c.extend(&layer)?;
    }
    c.metadata.insert("scheme".into(), spec.scheme.to_string());
    c.metadata.insert("layers".into(), spec.n_layers.to_string());
    if spec.scheme == Scheme::Par {
        c.metadata.insert("s".into(), spec.stride().to_string());
    }
    c.metadata.insert("seed".into(), spec.seed.to_string());
    c.metadata.insert("replica".into(), spec.replica.to_string());
    Ok(c)
}

/// `|r⟩ = C |0…0⟩`.
pub fn prepare_random_state(spec: &RandomCircuitSpec) -> Result<QuantumState> {
    let mut psi = QuantumState::zero(spec.n_qubits)?;
    for layer in build_random_layers(spec)? {
        psi.apply_circuit(&layer)?;
    }
    Ok(psi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_jumps() {
        let j = jump_sequence(12, 1, 6).unwrap();
        assert_eq!(j, [-1, 3, -5, 5, -3, 1]);
        assert!(j.iter().all(|p| p % 2 != 0));
        assert!(jump_sequence(12, 1, 5).is_err());
        assert!(jump_sequence(12, 0, 8).unwrap().iter().all(|p| p.abs() == 1));
    }

    #[test]
    fn default_strides() {
        assert_eq!(default_jump_stride(10, 10), 1);
        assert_eq!(default_jump_stride(12, 10), 2);
        assert_eq!(default_jump_stride(14, 10), 1);
        assert_eq!(default_jump_stride(12, 6), 1);
    }

    #[test]
    fn par_gate_count() {
        let mut spec = RandomCircuitSpec::new(12, Scheme::Par, 6, 3);
        spec.s = Some(1);
        let c = build_random_circuit(&spec).unwrap();
        assert_eq!(c.gate_counts().two_qubit, 36);
        assert_eq!(c.gate_counts().one_qubit, 72);
    }

    #[test]
    fn deterministic() {
        let spec = RandomCircuitSpec::new(8, Scheme::Ric, 5, 11);
        assert_eq!(build_random_circuit(&spec).unwrap(), build_random_circuit(&spec).unwrap());
        let other = build_random_circuit(&spec.with_replica(1)).unwrap();
        assert_ne!(build_random_circuit(&spec).unwrap().ops(), other.ops());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(build_random_circuit(&RandomCircuitSpec::new(8, Scheme::Par, 0, 1)).is_err());
        assert!(build_random_circuit(&RandomCircuitSpec::new(7, Scheme::Par, 2, 1)).is_err());
        assert!("brick".parse::<Scheme>().is_err());
    }

    #[test]
    fn normalized() {
        for scheme in [Scheme::Par, Scheme::Seq, Scheme::Ric] {
            let psi = prepare_random_state(&RandomCircuitSpec::new(8, scheme, 6, 5)).unwrap();
            assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        }
    }

    fn kinds_by_layer(spec: &RandomCircuitSpec) -> Vec<Vec<(usize, u8)>> {
        build_random_layers(spec)
            .unwrap()
            .iter()
            .map(|c| {
                c.ops()
                    .iter()
                    .filter_map(|op| match *op {
                        GateOp::U1q { q, phi, .. } => Some((q, if phi == 0.0 { 0 } else { 1 })),
                        GateOp::Z { q, .. } => Some((q, 2)),
                        _ => None,
                    })
                    .collect()
            })
            .collect()
    }

    proptest::proptest! {
        #[test]
        fn structure(seed in 0u64..500, half in 1usize..5, layers in 1usize..9, s in 0usize..4, which in 0usize..3) {
            let l = 2 * half + 2;
            let scheme = [Scheme::Par, Scheme::Seq, Scheme::Ric][which];
            let mut spec = RandomCircuitSpec::new(l, scheme, layers, seed);
            spec.s = Some(s);
            let allowed: &[GateOp] = &[rotation(scheme, 0, 0), rotation(scheme, 1, 0), rotation(scheme, 2, 0)];
            for c in build_random_layers(&spec).unwrap() {
                let mut touched = vec![0usize; l];
                for op in c.ops() {
                    match *op {
                        GateOp::ZZ { a, b, theta } => {
                            proptest::prop_assert_eq!(theta, FRAC_PI_2);
                            touched[a] += 1;
                            touched[b] += 1;
                        }
                        _ => proptest::prop_assert!(allowed.contains(&op.remap(|_| 0))),
                    }
                }
                if scheme == Scheme::Par {
                    // Perfect matching.
                    proptest::prop_assert!(touched.iter().all(|&t| t == 1), "{:?}", touched);
                }
            }
            let kinds = kinds_by_layer(&spec);
            for w in kinds.windows(2) {
                for q in 0..l {
                    let a = w[0].iter().find(|x| x.0 == q).unwrap().1;
                    let b = w[1].iter().find(|x| x.0 == q).unwrap().1;
                    proptest::prop_assert_ne!(a, b);
                }
            }
        }
    }
}
