use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use num_complex::Complex64;

use crate::error::{ensure, Error, Result};
use crate::hamiltonian::{HamiltonianSpec, RescaleParams};
use crate::statevector::QuantumState;

#[allow(unused_imports)]
use num_traits::Float;

/// How a moment set was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Ed,
    Recursion,
    Arccos,
    St,
    CircuitExact,
    CircuitShots,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Ed => "ED",
            Provenance::Recursion => "RECURSION",
            Provenance::Arccos => "ARCCOS",
            Provenance::St => "ST",
            Provenance::CircuitExact => "CIRCUIT-EXACT",
            Provenance::CircuitShots => "CIRCUIT-SHOTS",
        })
    }
}

impl FromStr for Provenance {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_uppercase().replace('_', "-").as_str() {
            "ED" => Provenance::Ed,
            "RECURSION" => Provenance::Recursion,
            "ARCCOS" => Provenance::Arccos,
            "ST" => Provenance::St,
            "CIRCUIT-EXACT" => Provenance::CircuitExact,
            "CIRCUIT-SHOTS" => Provenance::CircuitShots,
            _ => return Err(Error::Domain(alloc::format!("unknown provenance {s:?}"))),
        })
    }
}

/// Chebyshev moments `μ_0..μ_M` of a rescaled operator.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    pub values: Vec<f64>,
    /// Standard error per moment; zero for exact paths. For shot-sampled
    /// sets this is the projection-noise floor.
    pub std_errors: Vec<f64>,
    /// Standard error of the replica mean, when more than one replica was used.
    pub replica_scatter: Option<Vec<f64>>,
    pub provenance: Provenance,
    pub replicas: usize,
    pub shots: u64,
    pub rescale: Option<RescaleParams>,
}

impl MomentSet {
    pub fn exact(values: Vec<f64>, provenance: Provenance) -> Self {
        let n = values.len();
        Self {
            values,
            std_errors: alloc::vec![0.0; n],
            replica_scatter: None,
            provenance,
            replicas: 0,
            shots: 0,
            rescale: None,
        }
    }

    /// Highest index `M`.
    pub fn order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Copy with moments beyond `n` set to zero (and the length kept).
    pub fn truncated(&self, n: usize) -> Self {
        let mut out = self.clone();
        for (k, (v, e)) in out.values.iter_mut().zip(out.std_errors.iter_mut()).enumerate() {
            if k > n {
                *v = 0.0;
                *e = 0.0;
            }
        }
        out
    }

    /// Copy extended with zeros (or cut) to `M + 1` entries.
    pub fn resized(&self, m: usize) -> Self {
        let mut out = self.clone();
        out.values.resize(m + 1, 0.0);
        out.std_errors.resize(m + 1, 0.0);
        if let Some(s) = &mut out.replica_scatter {
            s.resize(m + 1, 0.0);
        }
        out
    }

    /// Mean of per-replica sets; the standard error is the sample
    /// deviation over `√R`.
    pub fn average(sets: &[MomentSet], provenance: Provenance) -> Result<Self> {
        ensure!(!sets.is_empty(), "no moment sets to average");
        let n = sets[0].len();
        ensure!(sets.iter().all(|s| s.len() == n), "moment sets of different lengths");
        let r = sets.len() as f64;
        let mut mean = alloc::vec![0.0; n];
        for s in sets {
            for (m, v) in mean.iter_mut().zip(&s.values) {
                *m += v / r;
            }
        }
        let se: Vec<f64> = (0..n)
            .map(|k| {
                if sets.len() < 2 {
                    return 0.0;
                }
                let var = sets.iter().map(|s| (s.values[k] - mean[k]).powi(2)).sum::<f64>() / (r - 1.0);
                (var / r).sqrt()
            })
            .collect();
        Ok(Self {
            values: mean,
            std_errors: se.clone(),
            replica_scatter: Some(se),
            provenance,
            replicas: sets.len(),
            shots: sets[0].shots,
            rescale: sets[0].rescale,
        })
    }

    /// Checks `μ_0 ≈ 1` and `|μ_m| ≤ 1 + 3σ` with an absolute slack `tol`.
    pub fn check_invariants(&self, tol: f64) -> Result<()> {
        ensure!(!self.values.is_empty(), "empty moment set");
        ensure!(
            (self.values[0] - 1.0).abs() <= 3.0 * self.std_errors[0] + tol,
            "mu_0 = {} is not 1",
            self.values[0]
        );
        for (m, (v, e)) in self.values.iter().zip(&self.std_errors).enumerate() {
            ensure!(v.abs() <= 1.0 + 3.0 * e + tol, "|mu_{m}| = {} exceeds 1", v.abs());
        }
        Ok(())
    }
}

/// `Re⟨r|T_m(H)|r⟩` for `m = 0..=M`, by the two-vector recursion.
pub fn recursion_moments_raw(h: &HamiltonianSpec, r: &QuantumState, m_max: usize) -> Result<Vec<f64>> {
    let dim = r.dim();
    ensure!(dim == h.dim(), "state and Hamiltonian sizes differ");
    let r0 = r.amplitudes();
    let norm = r.norm_sqr();
    let mut out = alloc::vec![norm];
    if m_max == 0 {
        return Ok(out);
    }
    let dot = |v: &[Complex64]| -> f64 { r0.iter().zip(v).map(|(a, b)| (a.conj() * b).re).sum() };
    let mut prev = r0.to_vec();
    let mut cur = alloc::vec![Complex64::new(0.0, 0.0); dim];
    h.apply_into(&prev, &mut cur)?;
    out.push(dot(&cur));
    let mut next = alloc::vec![Complex64::new(0.0, 0.0); dim];
    for m in 2..=m_max {
        h.apply_into(&cur, &mut next)?;
        for (n, p) in next.iter_mut().zip(&prev) {
            *n = 2.0 * *n - p;
        }
        let mu = dot(&next);
        ensure!(
            mu.abs() <= 10.0 * norm,
            "moment {m} = {mu} diverges; the operator does not look rescaled"
        );
        out.push(mu);
        core::mem::swap(&mut prev, &mut cur);
        core::mem::swap(&mut cur, &mut next);
    }
    Ok(out)
}

/// Single-state moments; the identity offset of `h_tilde` is included in
/// every application.
pub fn moments_by_recursion(h_tilde: &HamiltonianSpec, r: &QuantumState, m_max: usize) -> Result<MomentSet> {
    let mut s = MomentSet::exact(recursion_moments_raw(h_tilde, r, m_max)?, Provenance::Recursion);
    s.replicas = 1;
    Ok(s)
}

/// `μ_m = (1/D) Σ_k T_m(E_k)` from a rescaled spectrum.
pub fn moments_by_ed(eigenvalues: &[f64], m_max: usize) -> Result<MomentSet> {
    ensure!(!eigenvalues.is_empty(), "empty spectrum");
    for &e in eigenvalues {
        ensure!(e.abs() <= 1.0 + 1e-12, "eigenvalue {e} outside [-1, 1]; rescale first");
    }
    let d = eigenvalues.len() as f64;
    let mut mu = alloc::vec![0.0; m_max + 1];
    for &e in eigenvalues {
        let x = e.clamp(-1.0, 1.0);
        let (mut t0, mut t1) = (1.0, x);
        mu[0] += 1.0;
        if m_max >= 1 {
            mu[1] += x;
        }
        for v in mu.iter_mut().skip(2) {
            let t2 = 2.0 * x * t1 - t0;
            *v += t2;
            t0 = t1;
            t1 = t2;
        }
    }
    for v in &mut mu {
        *v /= d;
    }
    debug_assert!((mu[0] - 1.0).abs() < 1e-12);
    Ok(MomentSet::exact(mu, Provenance::Ed))
}
