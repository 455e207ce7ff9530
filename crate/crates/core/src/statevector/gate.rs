use core::fmt;
use core::str::FromStr;

use alloc::string::ToString;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::{apply_1q, apply_diagonal, cis};
use crate::error::{domain, ensure, Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// One operation of the native gate set, optionally controlled.
///
/// - `ZZ(θ) = exp(−iθ/2 Z⊗Z)`
/// - `Z(θ) = exp(−iθ/2 Z)`
/// - `U1q(θ, φ) = exp(−iθ/2 (cos φ X + sin φ Y))`
///
/// Controlled variants apply the gate on the control-|1⟩ subspace and the
/// identity elsewhere. `Measure` is a marker: it does not alter the state
/// and only feeds the cost accounting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateOp {
    ZZ { a: usize, b: usize, theta: f64 },
    Z { q: usize, theta: f64 },
    U1q { q: usize, theta: f64, phi: f64 },
    H { q: usize },
    CZZ { control: usize, a: usize, b: usize, theta: f64 },
    CZ { control: usize, q: usize, theta: f64 },
    CU1q { control: usize, q: usize, theta: f64, phi: f64 },
    Measure { q: usize },
}

/// Width of an operation, used by gate counting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Arity {
    One,
    Two,
    Three,
    Measurement,
}

impl GateOp {
    /// Every qubit the operation touches, control first.
    pub fn qubits(&self) -> Vec<usize> {
        use GateOp::*;
        match *self {
            ZZ { a, b, .. } => alloc::vec![a, b],
            Z { q, .. } | U1q { q, .. } | H { q } | Measure { q } => alloc::vec![q],
            CZZ { control, a, b, .. } => alloc::vec![control, a, b],
            CZ { control, q, .. } | CU1q { control, q, .. } => alloc::vec![control, q],
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            GateOp::CZZ { control, .. } | GateOp::CZ { control, .. } | GateOp::CU1q { control, .. } => Some(control),
            _ => None,
        }
    }

    pub(crate) fn arity(&self) -> Arity {
        use GateOp::*;
        match self {
            Z { .. } | U1q { .. } | H { .. } => Arity::One,
            ZZ { .. } | CZ { .. } | CU1q { .. } => Arity::Two,
            CZZ { .. } => Arity::Three,
            Measure { .. } => Arity::Measurement,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            ensure!(q < n_qubits, "{self}: qubit {q} out of range for {n_qubits} qubits");
            ensure!(!qs[..i].contains(&q), "{self}: repeated qubit {q}");
        }
        Ok(())
    }

    /// Same operation with every qubit index remapped through `f`.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> GateOp {
        use GateOp::*;
        match *self {
            ZZ { a, b, theta } => ZZ { a: f(a), b: f(b), theta },
            Z { q, theta } => Z { q: f(q), theta },
            U1q { q, theta, phi } => U1q { q: f(q), theta, phi },
            H { q } => H { q: f(q) },
            CZZ { control, a, b, theta } => CZZ { control: f(control), a: f(a), b: f(b), theta },
            CZ { control, q, theta } => CZ { control: f(control), q: f(q), theta },
            CU1q { control, q, theta, phi } => CU1q { control: f(control), q: f(q), theta, phi },
            Measure { q } => Measure { q: f(q) },
        }
    }

    /// 2×2 matrix (row-major) of the single-qubit part, if any.
    pub fn single_qubit_matrix(&self) -> Option<[Complex64; 4]> {
        use GateOp::*;
        match *self {
            Z { theta, .. } | CZ { theta, .. } => {
                let zero = Complex64::new(0.0, 0.0);
                Some([cis(-theta / 2.0), zero, zero, cis(theta / 2.0)])
            }
            U1q { theta, phi, .. } | CU1q { theta, phi, .. } => Some(u1q_matrix(theta, phi)),
            H { .. } => {
                let h = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, 0.0);
                Some([h, h, h, -h])
            }
            _ => None,
        }
    }

    pub(crate) fn apply_unchecked(&self, amps: &mut [Complex64]) {
        use GateOp::*;
        match *self {
            ZZ { a, b, theta } => apply_zz(amps, None, a, b, theta),
            CZZ { control, a, b, theta } => apply_zz(amps, Some(control), a, b, theta),
            Z { q, theta } => apply_z(amps, None, q, theta),
            CZ { control, q, theta } => apply_z(amps, Some(control), q, theta),
            U1q { q, .. } | H { q } => apply_1q(amps, q, None, self.single_qubit_matrix().unwrap()),
            CU1q { control, q, .. } => apply_1q(amps, q, Some(control), self.single_qubit_matrix().unwrap()),
            Measure { .. } => {}
        }
    }
}

pub(crate) fn u1q_matrix(theta: f64, phi: f64) -> [Complex64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    let mis = Complex64::new(0.0, -s);
    [Complex64::new(c, 0.0), mis * cis(-phi), mis * cis(phi), Complex64::new(c, 0.0)]
}

fn apply_zz(amps: &mut [Complex64], control: Option<usize>, a: usize, b: usize, theta: f64) {
    let same = cis(-theta / 2.0);
    let diff = cis(theta / 2.0);
    apply_diagonal(amps, control, |i| if ((i >> a) ^ (i >> b)) & 1 == 0 { same } else { diff });
}

fn apply_z(amps: &mut [Complex64], control: Option<usize>, q: usize, theta: f64) {
    let up = cis(-theta / 2.0);
    let down = cis(theta / 2.0);
    apply_diagonal(amps, control, |i| if (i >> q) & 1 == 0 { up } else { down });
}

impl fmt::Display for GateOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use GateOp::*;
        // f64 Display prints the shortest string that parses back exactly.
        match *self {
            ZZ { a, b, theta } => write!(f, "ZZ {a} {b} {theta}"),
            Z { q, theta } => write!(f, "Z {q} {theta}"),
            U1q { q, theta, phi } => write!(f, "U1q {q} {theta} {phi}"),
            H { q } => write!(f, "H {q}"),
            CZZ { control, a, b, theta } => write!(f, "CZZ {control} {a} {b} {theta}"),
            CZ { control, q, theta } => write!(f, "CZ {control} {q} {theta}"),
            CU1q { control, q, theta, phi } => write!(f, "CU1q {control} {q} {theta} {phi}"),
            Measure { q } => write!(f, "MEASURE {q}"),
        }
    }
}

impl FromStr for GateOp {
    type Err = Error;

    fn from_str(line: &str) -> Result<Self> {
        let mut it = line.split_whitespace();
        let name = it.next().ok_or_else(|| domain!("empty gate line"))?;
        let args: Vec<&str> = it.collect();
        let want = |n: usize| -> Result<()> {
            ensure!(args.len() == n, "{name}: expected {n} arguments, got {}", args.len());
            Ok(())
        };
        let q = |i: usize| -> Result<usize> {
            args[i].parse().map_err(|_| domain!("{name}: bad qubit index {:?}", args[i]))
        };
        let x = |i: usize| -> Result<f64> {
            args[i].parse().map_err(|_| domain!("{name}: bad angle {:?}", args[i]))
        };
        use GateOp::*;
        let op = match name {
            "ZZ" => {
                want(3)?;
                ZZ { a: q(0)?, b: q(1)?, theta: x(2)? }
            }
            "Z" => {
                want(2)?;
                Z { q: q(0)?, theta: x(1)? }
            }
            "U1q" => {
                want(3)?;
                U1q { q: q(0)?, theta: x(1)?, phi: x(2)? }
            }
            "H" => {
                want(1)?;
                H { q: q(0)? }
            }
            "CZZ" => {
                want(4)?;
                CZZ { control: q(0)?, a: q(1)?, b: q(2)?, theta: x(3)? }
            }
            "CZ" => {
                want(3)?;
                CZ { control: q(0)?, q: q(1)?, theta: x(2)? }
            }
            "CU1q" => {
                want(4)?;
                CU1q { control: q(0)?, q: q(1)?, theta: x(2)?, phi: x(3)? }
            }
            "MEASURE" => {
                want(1)?;
                Measure { q: q(0)? }
            }
            other => return Err(domain!("unknown gate {:?}", other.to_string())),
        };
        Ok(op)
    }
}
