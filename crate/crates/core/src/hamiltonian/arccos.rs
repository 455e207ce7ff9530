use alloc::vec::Vec;

use super::{HamiltonianSpec, Pauli, PauliTerm};
use crate::error::{ensure, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// Taylor coefficients of `π/2 − arccos(x) = Σ_k c_k x^{2k+1}`.
pub fn arccos_coefficients(k_max: usize) -> Vec<f64> {
    // c_k = binom(2k, k) / 4^k / (2k+1), with the central ratio built up
    // incrementally to avoid factorial overflow.
    let mut out = Vec::with_capacity(k_max + 1);
    let mut r = 1.0;
    for k in 0..=k_max {
        if k > 0 {
            r *= (2 * k - 1) as f64 / (2 * k) as f64;
        }
        out.push(r / (2 * k + 1) as f64);
    }
    out
}

/// Couplings of `H + H³/6` restricted to the operators already in `H`,
/// for the staggered ring with `Jz + Λ = Jx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdatedCouplings {
    pub jx_even: f64,
    pub jx_odd: f64,
    pub jy_even: f64,
    pub jy_odd: f64,
    pub jz_even: f64,
    pub identity: f64,
}

/// `jx`, `jy` are the rescaled couplings and `beta_id` the identity
/// coefficient of the rescaled operator.
pub fn updated_st_parameters(jx: f64, jy: f64, beta_id: f64, l: usize) -> UpdatedCouplings {
    let l = l as f64;
    // The coupling formulas are written in terms of the spectrum midpoint
    // over the scale, which is −beta_id.
    let b = -beta_id;
    let (x2, y2, b2) = (jx * jx, jy * jy, b * b);
    let jx_even = jx * (1.0 + ((4.5 * l - 2.0) * x2 + (3.0 * l - 4.0) * y2 + 3.0 * b2 + 6.0 * jy * b) / 6.0);
    let jx_odd = jx * (1.0 + ((4.5 * l - 6.0) * x2 + (3.0 * l - 4.0) * y2 + 3.0 * b2) / 6.0);
    let jy_even = jy + ((3.0 * l - 2.0) * y2 * jy + (4.5 * l - 4.0) * jy * x2 + 3.0 * jy * b2 + 6.0 * x2 * b) / 6.0;
    let jy_odd = jy * (1.0 + ((3.0 * l - 2.0) * y2 + (4.5 * l - 8.0) * x2 + 3.0 * b2) / 6.0);
    let jz_even = jx * (1.0 + ((4.5 * l - 6.0) * x2 + (3.0 * l - 4.0) * y2 + 3.0 * b2 + 6.0 * jy * b) / 6.0);
    // Identity part of H + H³/6: tr(H³)/2^L over 6, with tr(H²)/2^L = β² + L(3/2·jx² + jy²)
    // for this coupling pattern and tr of the XX·YY·ZZ triple products contributing −3L·jx²·jy.
    let identity = beta_id + (beta_id.powi(3) + 3.0 * beta_id * (1.5 * l * x2 + l * y2) - 3.0 * l * x2 * jy) / 6.0;
    UpdatedCouplings { jx_even, jx_odd, jy_even, jy_odd, jz_even, identity }
}

impl UpdatedCouplings {
    /// Rebuild the ring with these couplings, using the same two-group bond
    /// convention as the plain operator.
    pub fn to_hamiltonian(&self, l: usize) -> Result<HamiltonianSpec> {
        ensure!(l >= 4 && l % 2 == 0, "updated couplings need an even ring of length at least 4, got {l}");
        let mut terms = Vec::with_capacity(3 * l);
        for i in 0..l {
            let j = (i + 1) % l;
            let even = i % 2 == 0;
            let (cx, cy, cz) = if even {
                (self.jx_even, self.jy_even, self.jz_even)
            } else {
                (self.jx_odd, self.jy_odd, 0.0)
            };
            for (p, c) in [(Pauli::X, cx), (Pauli::Y, cy), (Pauli::Z, cz)] {
                if c != 0.0 {
                    terms.push(PauliTerm::new(c, &[(i, p), (j, p)])?);
                }
            }
        }
        let mut h = HamiltonianSpec::new(l, terms)?;
        h.identity_offset = self.identity;
        h.periodic = true;
        Ok(h)
    }
}

/// First neglected contributions of the arc-cosine truncation at moment
/// `m`, for a Gaussian density of mean `e_bar` and width `delta`.
pub fn error_estimates(m: usize, e_bar: f64, delta: f64) -> (f64, f64) {
    let m = m as f64;
    let (e2, d2) = (e_bar * e_bar, delta * delta);
    let eps_odd = (2.0 * m + 1.0) / 6.0 * e_bar * (e2 + 3.0 * d2);
    let eps_even = m * m / 18.0 * (e2 * e2 * e2 + 15.0 * d2 * e2 * e2 + 45.0 * d2 * d2 * e2 + 15.0 * d2 * d2 * d2);
    (eps_odd, eps_even)
}

/// Combined first-order budget for moment `n`.
pub fn arccos_error_budget(n: usize, e_bar: f64, delta: f64) -> f64 {
    let (o, e) = error_estimates(n, e_bar, delta);
    o.abs() + e.abs()
}

/// Mean and width of the rescaled density from its first two moments.
pub fn gaussian_parameters_from_moments(mu1: f64, mu2: f64) -> (f64, f64) {
    // ⟨x²⟩ = (1 + T₂)/2
    let var = (1.0 + mu2) / 2.0 - mu1 * mu1;
    (mu1, var.max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_xyz_staggered, dense_oracle};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    #[test]
    fn coefficients_closed_form() {
        assert_eq!(arccos_coefficients(0), [1.0]);
        let c = arccos_coefficients(2);
        assert!((c[1] - 1.0 / 6.0).abs() < 1e-16 && (c[2] - 3.0 / 40.0).abs() < 1e-16);
        let x: f64 = 0.1;
        let s: f64 = arccos_coefficients(10).iter().enumerate().map(|(k, c)| c * x.powi(2 * k as i32 + 1)).sum();
        assert!((s - (core::f64::consts::FRAC_PI_2 - num_traits::Float::acos(x))).abs() < 1e-12);
    }

    #[test]
    fn coefficients_positive_decreasing() {
        let c = arccos_coefficients(60);
        assert!(c.iter().all(|&v| v > 0.0));
        assert!(c.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn zero_couplings_give_zero() {
        let u = updated_st_parameters(0.0, 0.0, 0.0, 12);
        assert_eq!(u, UpdatedCouplings { jx_even: 0.0, jx_odd: 0.0, jy_even: 0.0, jy_odd: 0.0, jz_even: 0.0, identity: 0.0 });
    }

    #[test]
    fn error_estimate_limits() {
        let (o, e) = error_estimates(4, 0.0, 0.3);
        assert_eq!(o, 0.0);
        assert!((e - 16.0 / 18.0 * 15.0 * 0.3f64.powi(6)).abs() < 1e-16);
        assert_eq!(error_estimates(0, 0.2, 0.3).1, 0.0);
        // Ē=0.1, Δ=0.3, m=3, evaluated by hand in exact fractions:
        // odd = 7/6 · 0.1 · 0.28 = 0.0326666…, even = 1/2 · 0.00051241 + ... see below.
        let (o, e) = error_estimates(3, 0.1, 0.3);
        assert!((o - 7.0 / 6.0 * 0.028).abs() < 1e-15);
        let inner = 1e-6 + 15.0 * 0.09 * 1e-4 + 45.0 * 0.0081 * 0.01 + 15.0 * 0.000729;
        assert!((e - 0.5 * inner).abs() < 1e-15);
    }

    fn pauli_coefficient(m: &DMatrix<Complex64>, p: &DMatrix<Complex64>) -> f64 {
        (p * m).trace().re / m.nrows() as f64
    }

    /// Extract the coefficients of H + H³/6 on the operators present in H
    /// from a dense L=8 construction and compare with the closed forms.
    #[test]
    fn matches_dense_cubic_extraction() {
        let l = 8;
        let h = build_xyz_staggered(l, 1.0, 1.0 / 3.0, 0.5, 0.5).unwrap();
        // Arbitrary asymmetric scale so the identity coefficient is non-zero.
        let (b, a) = (9.0, 1.3);
        let mut ht = h.map_coefficients(|c| c / b);
        ht.identity_offset = -a / b;
        let d = dense_oracle::dense(&ht);
        let f = &d + &d * &d * &d / Complex64::new(6.0, 0.0);
        let u = updated_st_parameters(1.0 / b, 1.0 / 3.0 / b, -a / b, l);
        let probe = |i: usize, p: Pauli| {
            let t = PauliTerm::new(1.0, &[(i, p), ((i + 1) % l, p)]).unwrap();
            let h1 = HamiltonianSpec::new(l, alloc::vec![t]).unwrap();
            pauli_coefficient(&f, &dense_oracle::dense(&h1))
        };
        let id = f.trace().re / f.nrows() as f64;
        for (got, want) in [
            (probe(0, Pauli::X), u.jx_even),
            (probe(1, Pauli::X), u.jx_odd),
            (probe(2, Pauli::Y), u.jy_even),
            (probe(7, Pauli::Y), u.jy_odd),
            (probe(4, Pauli::Z), u.jz_even),
            (id, u.identity),
        ] {
            assert!((got - want).abs() < 1e-13, "{got} vs {want}");
        }
    }
}
