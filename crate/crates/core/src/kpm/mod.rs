//! Chebyshev moments, kernel damping and density-of-states reconstruction.

mod dos;
mod kernel;
mod moments;
mod thermo;

pub use dos::{dos_compare, dos_histogram_from_ed, histogram_bins_for_order, kpm_reconstruct, DosCurve, Grid, GridKind};
pub use kernel::{dirichlet_kernel, jackson_kernel, Kernel};
pub use moments::{moments_by_ed, moments_by_recursion, recursion_moments_raw, MomentSet, Provenance};
pub use thermo::{log_partition_function, partition_function, thermodynamics, EnergyUnits, ThermoRow, ThermoTable};

use crate::error::{ensure, Result};

/// `T_m(x)` by the three-term recursion.
pub fn chebyshev_t(m: usize, x: f64) -> Result<f64> {
    ensure!(x.abs() <= 1.0, "Chebyshev argument {x} outside [-1, 1]");
    Ok(chebyshev_t_unchecked(m, x))
}

pub(crate) fn chebyshev_t_unchecked(m: usize, x: f64) -> f64 {
    let (mut t0, mut t1) = (1.0, x);
    if m == 0 {
        return t0;
    }
    for _ in 1..m {
        let t2 = 2.0 * x * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    t1
}
