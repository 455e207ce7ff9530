use alloc::vec::Vec;

use super::{HamiltonianSpec, Pauli, PauliTerm};
use crate::error::{ensure, Result};

/// Couplings of the staggered XYZ ring.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XyzCouplings {
    pub jx: f64,
    pub jy: f64,
    pub jz: f64,
    pub lambda: f64,
}

/// Periodic ring, bond `(i, i+1 mod L)` carrying `Jx XX + Jy YY + (Jz + (−1)^i Λ) ZZ`.
///
/// Terms are emitted bond by bond in the order XX, YY, ZZ. Zero
/// coefficients are dropped and, on the two-site ring where both bonds
/// coincide, equal strings are merged.
pub fn build_xyz_staggered(l: usize, jx: f64, jy: f64, jz: f64, lambda: f64) -> Result<HamiltonianSpec> {
    ensure!(l >= 2 && l % 2 == 0, "staggered ring needs an even length, got {l}");
    ensure!(
        [jx, jy, jz, lambda].iter().all(|c| c.is_finite()),
        "couplings must be finite"
    );
    let mut terms: Vec<PauliTerm> = Vec::with_capacity(3 * l);
    for i in 0..l {
        let j = (i + 1) % l;
        let stagger = if i % 2 == 0 { lambda } else { -lambda };
        for (p, c) in [(Pauli::X, jx), (Pauli::Y, jy), (Pauli::Z, jz + stagger)] {
            if c == 0.0 {
                continue;
            }
            let t = PauliTerm::new(c, &[(i, p), (j, p)])?;
            match terms.iter_mut().find(|u| u.same_string(&t)) {
                Some(u) => u.coefficient += c,
                None => terms.push(t),
            }
        }
    }
    terms.retain(|t| t.coefficient != 0.0);
    let mut h = HamiltonianSpec::new(l, terms)?;
    h.couplings = Some(XyzCouplings { jx, jy, jz, lambda });
    h.periodic = true;
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::super::{dense_oracle, BondGroup};
    use super::*;

    #[test]
    fn default_couplings_at_l4() {
        let h = build_xyz_staggered(4, 1.0, 1.0 / 3.0, 0.5, 0.5).unwrap();
        for t in h.terms() {
            let f = t.factors();
            if f[0].1 == Pauli::Z {
                let left = if f[1].0 == f[0].0 + 1 { f[0].0 } else { f[1].0 };
                assert_eq!(left % 2, 0, "ZZ on an odd bond");
                assert_eq!(t.coefficient, 1.0);
            }
        }
        assert_eq!(h.terms().len(), 4 * 2 + 2);
    }

    #[test]
    fn odd_length_rejected() {
        assert!(build_xyz_staggered(5, 1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn two_site_ring_doubles() {
        let h = build_xyz_staggered(2, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(h.terms().len(), 1);
        assert_eq!(h.terms()[0].coefficient, 2.0);
    }

    #[test]
    fn traceless() {
        let h = build_xyz_staggered(6, 0.7, -1.1, 0.4, 0.9).unwrap();
        let d = dense_oracle::dense(&h);
        assert!(d.trace().norm() < 1e-12);
    }

    #[test]
    fn coefficient_norm_at_l12() {
        let h = build_xyz_staggered(12, 1.0, 1.0 / 3.0, 0.5, 0.5).unwrap();
        assert!((h.coefficient_one_norm() - 22.0).abs() < 1e-12);
    }

    #[test]
    fn wrap_bond_is_odd() {
        let h = build_xyz_staggered(6, 1.0, 0.0, 0.0, 0.0).unwrap();
        let groups: Vec<_> = h.terms().iter().map(|t| h.bond_group(t).unwrap()).collect();
        assert_eq!(groups.iter().filter(|g| **g == BondGroup::Odd).count(), 3);
        assert_eq!(groups[5], BondGroup::Odd);
    }
}
