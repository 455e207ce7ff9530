//! Controlled first-order product formula in the native gate set.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use crate::error::{ensure, Result};
use crate::hamiltonian::{BondGroup, HamiltonianSpec, Pauli, PauliTerm};
use crate::statevector::{Circuit, GateOp};

/// Basis change taking `p` to `Z`: `(pre, post)` with `P = pre† Z pre`,
/// so `pre · e^{iθZ…} · post` in circuit order realises `e^{iθP…}`.
fn to_z(p: Pauli, q: usize) -> Option<(GateOp, GateOp)> {
    match p {
        Pauli::X => Some((
            GateOp::U1q { q, theta: -FRAC_PI_2, phi: FRAC_PI_2 },
            GateOp::U1q { q, theta: FRAC_PI_2, phi: FRAC_PI_2 },
        )),
        Pauli::Y => Some((
            GateOp::U1q { q, theta: FRAC_PI_2, phi: 0.0 },
            GateOp::U1q { q, theta: -FRAC_PI_2, phi: 0.0 },
        )),
        Pauli::Z | Pauli::I => None,
    }
}

/// `e^{iφ Z_c Z_a Z_b}`.
fn three_body_zzz(c: &mut Circuit, ctrl: usize, a: usize, b: usize, phi: f64) -> Result<()> {
    // The first three gates map Z_b to −Z_a Z_b; the last three undo them.
    c.push(GateOp::U1q { q: b, theta: FRAC_PI_2, phi: FRAC_PI_2 })?;
    c.push(GateOp::ZZ { a, b, theta: -FRAC_PI_2 })?;
    c.push(GateOp::U1q { q: b, theta: FRAC_PI_2, phi: 0.0 })?;
    c.push(GateOp::ZZ { a: ctrl, b, theta: 2.0 * phi })?;
    c.push(GateOp::U1q { q: b, theta: -FRAC_PI_2, phi: 0.0 })?;
    c.push(GateOp::ZZ { a, b, theta: FRAC_PI_2 })?;
    c.push(GateOp::U1q { q: b, theta: -FRAC_PI_2, phi: FRAC_PI_2 })
}

/// Appends controlled `e^{iθ P}` for a weight-one or weight-two term.
fn controlled_term(c: &mut Circuit, ctrl: usize, t: &PauliTerm, theta: f64) -> Result<()> {
    let f = t.factors();
    let changes: Vec<(GateOp, GateOp)> = f.iter().filter_map(|&(q, p)| to_z(p, q)).collect();
    for (pre, _) in &changes {
        c.push(*pre)?;
    }
    match *f {
        [(a, _)] => {
            // e^{iθZ_a} on |1⟩_c  =  e^{iθ/2 Z_a} e^{−iθ/2 Z_c Z_a}
            c.push(GateOp::Z { q: a, theta: -theta })?;
            c.push(GateOp::ZZ { a: ctrl, b: a, theta })?;
        }
        [(a, _), (b, _)] => {
            // e^{iθ Z_a Z_b} on |1⟩_c  =  e^{iθ/2 Z_a Z_b} e^{−iθ/2 Z_c Z_a Z_b}
            c.push(GateOp::ZZ { a, b, theta: -theta })?;
            three_body_zzz(c, ctrl, a, b, -theta / 2.0)?;
        }
        _ => unreachable!("term shape checked by the caller"),
    }
    for (_, post) in changes.iter().rev() {
        c.push(*post)?;
    }
    Ok(())
}

/// Term indices of each product-formula group, even bonds first.
pub(crate) fn grouped_terms(h: &HamiltonianSpec) -> Result<[Vec<&PauliTerm>; 2]> {
    let mut even = Vec::new();
    let mut odd = Vec::new();
    for t in h.pauli_terms() {
        match h.bond_group(t) {
            Some(BondGroup::Even) => even.push(t),
            Some(BondGroup::Odd) => odd.push(t),
            None => ensure!(false, "term {t} is neither a site nor a nearest-neighbour bond"),
        }
    }
    Ok([even, odd])
}

/// Controlled `e^{i n H}` on register qubits `0..L` with the control on
/// qubit `L`, split into `steps` first-order steps of time `n/steps`. The
/// identity part of `h` becomes a final `Z(n·β)` on the control.
pub fn build_controlled_trotter(h: &HamiltonianSpec, n: usize, steps: usize) -> Result<Circuit> {
    ensure!(steps >= 1, "need at least one product-formula step");
    let l = h.n_qubits();
    let ctrl = l;
    let mut c = Circuit::new(l + 1);
    if n == 0 {
        return Ok(c);
    }
    let groups = grouped_terms(h)?;
    let tau = n as f64 / steps as f64;
    for _ in 0..steps {
        for g in &groups {
            for t in g {
                controlled_term(&mut c, ctrl, t, tau * t.coefficient)?;
            }
        }
    }
    let beta = h.identity_coefficient();
    if beta != 0.0 {
        c.push(GateOp::Z { q: ctrl, theta: n as f64 * beta })?;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_xyz_staggered, dense_oracle};
    use crate::rng::{stream, Domain, Rng};
    use crate::statevector::QuantumState;
    use alloc::vec;
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    /// Scaling-and-squaring Taylor exponential, independent of any closed form.
    pub(crate) fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let norm: f64 = a.iter().map(|z| z.norm()).sum();
        let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0);
        let a = a / Complex64::new(2f64.powi(s), 0.0);
        let n = a.nrows();
        let mut term = DMatrix::<Complex64>::identity(n, n);
        let mut sum = term.clone();
        for k in 1..30 {
            term = &term * &a / Complex64::new(k as f64, 0.0);
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    pub(crate) fn circuit_unitary(c: &Circuit) -> DMatrix<Complex64> {
        let d = 1 << c.n_qubits();
        let mut u = DMatrix::<Complex64>::zeros(d, d);
        for j in 0..d {
            let mut psi = QuantumState::basis(c.n_qubits(), j).unwrap();
            psi.apply_circuit(c).unwrap();
            for (i, a) in psi.amplitudes().iter().enumerate() {
                u[(i, j)] = *a;
            }
        }
        u
    }

    /// `diag(I, U)` with the control as the most significant qubit.
    fn controlled(u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = u.nrows();
        let mut m = DMatrix::<Complex64>::identity(2 * d, 2 * d);
        m.view_mut((d, d), (d, d)).copy_from(u);
        m
    }

    fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn bond_exponential_matches_dense() {
        let mut rng = stream(17, Domain::Aux, 0);
        for _ in 0..100 {
            let (a, b, g): (f64, f64, f64) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let terms = vec![
                PauliTerm::new(a, &[(0, Pauli::X), (1, Pauli::X)]).unwrap(),
                PauliTerm::new(b, &[(0, Pauli::Y), (1, Pauli::Y)]).unwrap(),
                PauliTerm::new(g, &[(0, Pauli::Z), (1, Pauli::Z)]).unwrap(),
            ];
            let h = HamiltonianSpec::new(2, terms).unwrap();
            let c = build_controlled_trotter(&h, 1, 1).unwrap();
            let want = controlled(&expm(&(dense_oracle::dense(&h) * Complex64::new(0.0, 1.0))));
            // Exact equality: the decomposition carries no global phase.
            assert!(max_diff(&circuit_unitary(&c), &want) < 1e-10);
        }
    }

    #[test]
    fn single_site_terms() {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let h = HamiltonianSpec::new(1, vec![PauliTerm::new(0.37, &[(0, p)]).unwrap()]).unwrap();
            let c = build_controlled_trotter(&h, 2, 1).unwrap();
            let want = controlled(&expm(&(dense_oracle::dense(&h) * Complex64::new(0.0, 2.0))));
            assert!(max_diff(&circuit_unitary(&c), &want) < 1e-10);
        }
    }

    #[test]
    fn block_structure_at_l4() {
        let mut h = build_xyz_staggered(4, 0.3, 0.1, 0.15, 0.15).unwrap();
        h.identity_offset = -0.05;
        let (n, steps) = (3, 2);
        let c = build_controlled_trotter(&h, n, steps).unwrap();
        // Product formula from dense exponentials of each bond term.
        let tau = Complex64::new(0.0, n as f64 / steps as f64);
        let [even, odd] = grouped_terms(&h).unwrap();
        let mut step = DMatrix::<Complex64>::identity(16, 16);
        for t in even.iter().chain(odd.iter()) {
            let ht = HamiltonianSpec::new(4, vec![(*t).clone()]).unwrap();
            step = expm(&(dense_oracle::dense(&ht) * tau)) * step;
        }
        let mut u = DMatrix::<Complex64>::identity(16, 16);
        for _ in 0..steps {
            u = &step * u;
        }
        u *= Complex64::from_polar(1.0, n as f64 * -0.05);
        // Z(nβ) on the control is diag(1, e^{inβ}) times the global phase e^{−inβ/2}.
        let got = circuit_unitary(&c) * Complex64::from_polar(1.0, n as f64 * -0.05 / 2.0);
        assert!(max_diff(&got.view((0, 0), (16, 16)).into_owned(), &DMatrix::identity(16, 16)) < 1e-10);
        assert!(max_diff(&got.view((16, 16), (16, 16)).into_owned(), &u) < 1e-10);
        assert!(got.view((0, 16), (16, 16)).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn native_gates_only() {
        let h = build_xyz_staggered(6, 1.0, 1.0 / 3.0, 0.5, 0.5).unwrap();
        let c = build_controlled_trotter(&h, 5, 2).unwrap();
        assert!(c.ops().iter().all(|op| matches!(op, GateOp::ZZ { .. } | GateOp::Z { .. } | GateOp::U1q { .. })));
        assert!(build_controlled_trotter(&h, 1, 0).is_err());
        assert!(build_controlled_trotter(&h, 0, 1).unwrap().is_empty());
        let far = HamiltonianSpec::new(4, vec![PauliTerm::new(1.0, &[(0, Pauli::X), (2, Pauli::X)]).unwrap()]).unwrap();
        assert!(build_controlled_trotter(&far, 1, 1).is_err());
    }
}
