use core::fmt;

use crate::statevector::Circuit;

/// Credit cost `5 + shots/5000 · (N_1q + 10 N_2q + 5 N_m)`, kept as an
/// exact fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CostReport {
    pub n_1q: u64,
    pub n_2q: u64,
    pub n_m: u64,
    pub shots: u64,
    numer: u128,
    denom: u128,
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl CostReport {
    pub fn new(n_1q: u64, n_2q: u64, n_m: u64, shots: u64) -> Self {
        let weighted = n_1q as u128 + 10 * n_2q as u128 + 5 * n_m as u128;
        let numer = 5 * 5000 + shots as u128 * weighted;
        let g = gcd(numer, 5000);
        Self { n_1q, n_2q, n_m, shots, numer: numer / g, denom: 5000 / g }
    }

    /// Reduced `(numerator, denominator)`.
    pub fn hqc_exact(&self) -> (u128, u128) {
        (self.numer, self.denom)
    }

    pub fn hqc(&self) -> f64 {
        self.numer as f64 / self.denom as f64
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom == 1 {
            write!(f, "{}", self.numer)
        } else {
            write!(f, "{}/{}", self.numer, self.denom)
        }
    }
}

/// Counts from gate enumeration: controlled and two-qubit operations are
/// billed as entangling, measurement markers as `N_m`.
pub fn hqc_cost(circuit: &Circuit, shots: u64) -> CostReport {
    let g = circuit.gate_counts();
    CostReport::new(g.one_qubit, g.entangling(), g.measurements, shots)
}
