use super::HamiltonianSpec;
use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub e_min: f64,
    pub e_max: f64,
}

/// Affine map into the Chebyshev domain, `H ↦ (H − a)/b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaleParams {
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    /// `−a/b`, the identity coefficient of the rescaled operator.
    pub beta_id: f64,
}

impl RescaleParams {
    pub fn to_rescaled(&self, e: f64) -> f64 {
        (e - self.a) / self.b
    }

    pub fn to_physical(&self, x: f64) -> f64 {
        self.b * x + self.a
    }
}

/// `[−Σ|c|, Σ|c|]` shifted by the identity coefficient. Always encloses the spectrum.
pub fn coefficient_norm_bounds(h: &HamiltonianSpec) -> SpectralBounds {
    let s = h.coefficient_one_norm();
    let id = h.identity_coefficient();
    SpectralBounds { e_min: id - s, e_max: id + s }
}

/// Rescale `h` given spectral bounds. The returned operator has its Pauli
/// coefficients divided by `b` and identity offset `−a/b` (plus any
/// offset `h` already carried, likewise rescaled).
pub fn rescale(h: &HamiltonianSpec, bounds: SpectralBounds, epsilon: f64) -> Result<(HamiltonianSpec, RescaleParams)> {
    ensure!(epsilon > 0.0 && epsilon < 1.0, "epsilon must lie in (0, 1), got {epsilon}");
    let SpectralBounds { e_min, e_max } = bounds;
    ensure!(e_min.is_finite() && e_max.is_finite(), "spectral bounds must be finite");
    ensure!(e_max > e_min, "trivial or inverted spectrum [{e_min}, {e_max}]");
    let a = (e_max + e_min) / 2.0;
    let b = (e_max - e_min) / (2.0 - epsilon);
    let beta_id = -a / b;
    let mut ht = h.map_coefficients(|c| c / b);
    ht.identity_offset += beta_id;
    Ok((ht, RescaleParams { a, b, epsilon, beta_id }))
}
