use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    #[default]
    Jackson,
    /// No damping.
    Dirichlet,
}

impl Kernel {
    pub fn coefficients(self, m: usize) -> Vec<f64> {
        match self {
            Kernel::Jackson => jackson_kernel(m),
            Kernel::Dirichlet => dirichlet_kernel(m),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Jackson => "jackson",
            Kernel::Dirichlet => "dirichlet",
        })
    }
}

impl FromStr for Kernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "jackson" => Ok(Kernel::Jackson),
            "dirichlet" | "none" => Ok(Kernel::Dirichlet),
            _ => Err(Error::Domain(alloc::format!("unknown kernel {s:?}"))),
        }
    }
}

/// Jackson damping factors `γ_0..γ_M`.
pub fn jackson_kernel(m_max: usize) -> Vec<f64> {
    let n = (m_max + 1) as f64;
    let q = PI / n;
    let cot = q.cos() / q.sin();
    (0..=m_max)
        .map(|m| {
            let a = q * m as f64;
            ((n - m as f64) * a.cos() + a.sin() * cot) / n
        })
        .collect()
}

pub fn dirichlet_kernel(m_max: usize) -> Vec<f64> {
    alloc::vec![1.0; m_max + 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jackson_properties() {
        for m in [0, 1, 5, 25, 100] {
            let g = jackson_kernel(m);
            assert!((g[0] - 1.0).abs() < 1e-14);
            assert!(g.iter().all(|&v| v > 0.0 && v <= 1.0 + 1e-14));
            assert!(g.windows(2).all(|w| w[1] < w[0]));
        }
        // M=1: (1·cos(π/2) + sin(π/2)·cot(π/2)) / 2 = 0 up to rounding of cot(π/2).
        let g1 = jackson_kernel(1);
        assert!(g1[1].abs() < 1e-15 && g1[1] > 0.0);
        // M=2, m=1: (2·cos(π/3) + sin(π/3)·cot(π/3)) / 3 = (1 + 1/2) / 3.
        assert!((jackson_kernel(2)[1] - 0.5).abs() < 1e-15);
    }
}
