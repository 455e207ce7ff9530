use alloc::vec::Vec;
use core::f64::consts::PI;

use super::{Kernel, MomentSet, Provenance};
use crate::error::{ensure, Result};
use crate::hamiltonian::RescaleParams;

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// Chebyshev nodes with Gauss–Chebyshev weights.
    Chebyshev,
    /// Arbitrary increasing points, trapezoid weights.
    Custom,
    /// Bin centres, weights equal to bin widths.
    Histogram,
}

/// Quadrature grid on `(−1, 1)`, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: GridKind,
}

impl Grid {
    /// `x_j = cos(π(j + ½)/N)` with weights `π√(1 − x_j²)/N`, so that
    /// `Σ w_j f(x_j)` integrates `f` exactly for `f·√(1−x²)` polynomial.
    pub fn chebyshev(n: usize) -> Result<Self> {
        ensure!(n >= 2, "grid needs at least two points");
        let mut points: Vec<f64> = (0..n).map(|j| (PI * (j as f64 + 0.5) / n as f64).cos()).collect();
        points.reverse();
        let weights = points.iter().map(|x| PI / n as f64 * (1.0 - x * x).sqrt()).collect();
        Ok(Self { points, weights, kind: GridKind::Chebyshev })
    }

    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        ensure!(points.len() >= 2, "grid needs at least two points");
        ensure!(points.iter().all(|x| x.abs() < 1.0), "grid points must lie strictly inside (-1, 1)");
        ensure!(points.windows(2).all(|w| w[1] > w[0]), "grid points must be strictly increasing");
        let n = points.len();
        let weights = (0..n)
            .map(|i| {
                let lo = if i == 0 { points[0] } else { points[i - 1] };
                let hi = if i + 1 == n { points[n - 1] } else { points[i + 1] };
                (hi - lo) / 2.0
            })
            .collect();
        Ok(Self { points, weights, kind: GridKind::Custom })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// A density of states sampled on a grid in rescaled units.
#[derive(Debug, Clone, PartialEq)]
pub struct DosCurve {
    pub grid: Grid,
    /// May dip slightly below zero from truncation.
    pub values: Vec<f64>,
    pub order: usize,
    pub kernel: Option<Kernel>,
    pub provenance: Option<Provenance>,
    pub rescale: Option<RescaleParams>,
}

impl DosCurve {
    pub fn energies(&self) -> &[f64] {
        &self.grid.points
    }

    pub fn integral(&self) -> f64 {
        self.grid.weights.iter().zip(&self.values).map(|(w, g)| w * g).sum()
    }

    /// `∫ x g(x) dx`.
    pub fn mean(&self) -> f64 {
        self.grid
            .weights
            .iter()
            .zip(&self.values)
            .zip(&self.grid.points)
            .map(|((w, g), x)| w * g * x)
            .sum()
    }

    /// Grid mapped back to energy units, `b x + a`.
    pub fn physical_energies(&self) -> Option<Vec<f64>> {
        let p = self.rescale?;
        Some(self.grid.points.iter().map(|&x| p.to_physical(x)).collect())
    }

    /// Density per unit physical energy, `g(x)/b`.
    pub fn physical_values(&self) -> Option<Vec<f64>> {
        let p = self.rescale?;
        Some(self.values.iter().map(|g| g / p.b).collect())
    }

    /// Linear interpolation at `x`, clamped to the end values.
    pub fn interpolate(&self, x: f64) -> f64 {
        let p = &self.grid.points;
        let v = &self.values;
        if x <= p[0] {
            return v[0];
        }
        if x >= p[p.len() - 1] {
            return v[v.len() - 1];
        }
        let i = p.partition_point(|&q| q <= x);
        let (x0, x1) = (p[i - 1], p[i]);
        v[i - 1] + (v[i] - v[i - 1]) * (x - x0) / (x1 - x0)
    }
}

/// `g(x) = [γ_0 μ_0 + 2 Σ_{m≥1} γ_m μ_m T_m(x)] / (π √(1 − x²))`.
pub fn kpm_reconstruct(moments: &MomentSet, kernel: &[f64], grid: &Grid) -> Result<DosCurve> {
    ensure!(!moments.is_empty(), "no moments");
    ensure!(
        kernel.len() >= moments.len(),
        "kernel has {} factors for {} moments",
        kernel.len(),
        moments.len()
    );
    ensure!(grid.points.iter().all(|x| x.abs() < 1.0), "grid points must lie strictly inside (-1, 1)");
    let c: Vec<f64> = moments
        .values
        .iter()
        .zip(kernel)
        .enumerate()
        .map(|(m, (mu, g))| if m == 0 { mu * g } else { 2.0 * mu * g })
        .collect();
    let values = grid
        .points
        .iter()
        .map(|&x| {
            let (mut t0, mut t1) = (1.0, x);
            let mut s = c[0];
            for (m, cm) in c.iter().enumerate().skip(1) {
                if m > 1 {
                    let t2 = 2.0 * x * t1 - t0;
                    t0 = t1;
                    t1 = t2;
                }
                s += cm * t1;
            }
            s / (PI * (1.0 - x * x).sqrt())
        })
        .collect();
    let kernel_id = if kernel.iter().take(moments.len()).all(|&g| g == 1.0) {
        Kernel::Dirichlet
    } else {
        Kernel::Jackson
    };
    Ok(DosCurve {
        grid: grid.clone(),
        values,
        order: moments.order(),
        kernel: Some(kernel_id),
        provenance: Some(moments.provenance),
        rescale: moments.rescale,
    })
}

/// Bins matched to the Jackson resolution `π/(M+1)` on `[−1, 1]`.
pub fn histogram_bins_for_order(m: usize) -> usize {
    (2.0 * (m + 1) as f64 / PI).ceil() as usize
}

/// Normalised histogram of a rescaled spectrum on `n_bins` equal bins of `[−1, 1]`.
pub fn dos_histogram_from_ed(eigenvalues: &[f64], n_bins: usize) -> Result<DosCurve> {
    ensure!(n_bins >= 2, "need at least two bins");
    ensure!(!eigenvalues.is_empty(), "empty spectrum");
    ensure!(eigenvalues.iter().all(|e| e.abs() <= 1.0 + 1e-12), "eigenvalue outside [-1, 1]");
    let width = 2.0 / n_bins as f64;
    let mut counts = alloc::vec![0usize; n_bins];
    for &e in eigenvalues {
        let k = (((e + 1.0) / width) as usize).min(n_bins - 1);
        counts[k] += 1;
    }
    let n = eigenvalues.len() as f64;
    Ok(DosCurve {
        grid: Grid {
            points: (0..n_bins).map(|k| -1.0 + (k as f64 + 0.5) * width).collect(),
            weights: alloc::vec![width; n_bins],
            kind: GridKind::Histogram,
        },
        values: counts.iter().map(|&c| c as f64 / (n * width)).collect(),
        order: 0,
        kernel: None,
        provenance: Some(Provenance::Ed),
        rescale: None,
    })
}

/// `∫ |g_a − g_b| dx` on the grid with more points, the other curve
/// linearly interpolated onto it.
pub fn dos_compare(a: &DosCurve, b: &DosCurve) -> Result<f64> {
    let (fine, coarse) = if a.grid.len() >= b.grid.len() { (a, b) } else { (b, a) };
    let (fl, fh) = (fine.grid.points[0], fine.grid.points[fine.grid.len() - 1]);
    let (cl, ch) = (coarse.grid.points[0], coarse.grid.points[coarse.grid.len() - 1]);
    ensure!(fl <= ch && cl <= fh, "curves are defined on disjoint ranges");
    Ok(fine
        .grid
        .points
        .iter()
        .zip(&fine.grid.weights)
        .zip(&fine.values)
        .map(|((&x, w), g)| w * (g - coarse.interpolate(x)).abs())
        .sum())
}
