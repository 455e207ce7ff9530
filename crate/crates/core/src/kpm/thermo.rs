use alloc::vec::Vec;

use super::DosCurve;
use crate::error::{ensure, Result};

#[allow(unused_imports)]
use num_traits::Float;

/// Energy scale for thermodynamic integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EnergyUnits {
    /// `Z(β) = ∫ e^{−βx} g(x) dx`, so `Z(0) = 1`.
    Rescaled,
    /// `Z(β) = 2^L ∫ e^{−β(bx + a)} g(x) dx`, the full-Hilbert-space sum.
    Physical { a: f64, b: f64, n_qubits: usize },
}

/// `log Z(β)`, with negative density values clipped to zero. Returns the
/// number of clipped grid points alongside.
fn log_z_clipped(dos: &DosCurve, beta: f64, units: EnergyUnits) -> (f64, usize) {
    let (a, b, offset) = match units {
        EnergyUnits::Rescaled => (0.0, 1.0, 0.0),
        EnergyUnits::Physical { a, b, n_qubits } => (a, b, n_qubits as f64 * core::f64::consts::LN_2),
    };
    let expo = |x: f64| -beta * (b * x + a);
    // Shift by the largest exponent so large |β| does not overflow.
    let shift = dos.grid.points.iter().map(|&x| expo(x)).fold(f64::NEG_INFINITY, f64::max);
    let mut clipped = 0;
    let mut s = 0.0;
    for ((&x, w), &g) in dos.grid.points.iter().zip(&dos.grid.weights).zip(&dos.values) {
        if g < 0.0 {
            clipped += 1;
            continue;
        }
        s += w * g * (expo(x) - shift).exp();
    }
    (offset + shift + s.ln(), clipped)
}

pub fn log_partition_function(dos: &DosCurve, beta: f64, units: EnergyUnits) -> Result<f64> {
    ensure!(beta.is_finite(), "beta must be finite");
    Ok(log_z_clipped(dos, beta, units).0)
}

pub fn partition_function(dos: &DosCurve, beta: f64, units: EnergyUnits) -> Result<f64> {
    Ok(log_partition_function(dos, beta, units)?.exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoRow {
    pub beta: f64,
    pub z: f64,
    pub log_z: f64,
    /// `−log Z / β`; at `β = 0` the limit value (see [`thermodynamics`]).
    pub free_energy: f64,
    pub energy: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermoTable {
    pub rows: Vec<ThermoRow>,
    /// Grid points with negative density that were clipped to zero.
    pub clipped_points: usize,
}

/// `E = −∂_β log Z` by a centred difference with step `h` (default
/// `1e-4 · max(1, |β|)`), `F = −log Z / β`, `S = β E + log Z`.
///
/// At `β = 0`, `F` is its limit: `E(0)` when `log Z(0) = 0` (rescaled
/// units) and `−∞` otherwise.
pub fn thermodynamics(dos: &DosCurve, betas: &[f64], units: EnergyUnits, h: Option<f64>) -> Result<ThermoTable> {
    ensure!(betas.iter().all(|b| b.is_finite()), "beta grid must be finite");
    let (_, clipped_points) = log_z_clipped(dos, 0.0, units);
    let rows = betas
        .iter()
        .map(|&beta| {
            let step = h.unwrap_or(1e-4 * beta.abs().max(1.0));
            let log_z = log_z_clipped(dos, beta, units).0;
            let energy =
                -(log_z_clipped(dos, beta + step, units).0 - log_z_clipped(dos, beta - step, units).0) / (2.0 * step);
            let free_energy = if beta != 0.0 {
                -log_z / beta
            } else if log_z.abs() < 1e-12 {
                energy
            } else {
                f64::NEG_INFINITY
            };
            ThermoRow { beta, z: log_z.exp(), log_z, free_energy, energy, entropy: beta * energy + log_z }
        })
        .collect();
    Ok(ThermoTable { rows, clipped_points })
}

#[cfg(test)]
mod tests {
    use super::super::{jackson_kernel, kpm_reconstruct, moments_by_ed, Grid, MomentSet, Provenance};
    use super::*;

    fn arcsine() -> DosCurve {
        let mu = MomentSet::exact(alloc::vec![1.0], Provenance::Ed);
        kpm_reconstruct(&mu, &[1.0], &Grid::chebyshev(2048).unwrap()).unwrap()
    }

    #[test]
    fn bessel_value() {
        let z = partition_function(&arcsine(), 1.0, EnergyUnits::Rescaled).unwrap();
        // I_0(1) to 16 digits.
        assert!((z - 1.2660658777520082).abs() < 1e-12);
        assert!((partition_function(&arcsine(), 0.0, EnergyUnits::Rescaled).unwrap() - 1.0).abs() < 1e-12);
        let zm = partition_function(&arcsine(), -2.0, EnergyUnits::Rescaled).unwrap();
        assert!((zm - partition_function(&arcsine(), 2.0, EnergyUnits::Rescaled).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn zero_beta_row() {
        let mu = moments_by_ed(&[-0.6, -0.2, 0.1, 0.5, 0.55], 30).unwrap();
        let d = kpm_reconstruct(&mu, &jackson_kernel(30), &Grid::chebyshev(2048).unwrap()).unwrap();
        let t = thermodynamics(&d, &[0.0, 1.0], EnergyUnits::Rescaled, None).unwrap();
        let g1 = jackson_kernel(30)[1];
        assert!((t.rows[0].energy - g1 * mu.values[1]).abs() < 1e-6);
        assert_eq!(t.rows[0].free_energy, t.rows[0].energy);
        assert!(t.rows[0].entropy.abs() < 1e-12);
        let p = thermodynamics(&d, &[0.0], EnergyUnits::Physical { a: 0.0, b: 3.0, n_qubits: 4 }, None).unwrap();
        assert!((p.rows[0].entropy - 4.0 * core::f64::consts::LN_2).abs() < 1e-9);
        assert_eq!(p.rows[0].free_energy, f64::NEG_INFINITY);
    }

    #[test]
    fn symmetric_dos_zero_energy() {
        let t = thermodynamics(&arcsine(), &[0.0], EnergyUnits::Rescaled, None).unwrap();
        assert!(t.rows[0].energy.abs() < 1e-10);
    }
}
