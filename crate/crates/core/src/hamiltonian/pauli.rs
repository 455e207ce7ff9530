use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use num_complex::Complex64;

use crate::error::{ensure, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

impl TryFrom<char> for Pauli {
    type Error = Error;
    fn try_from(c: char) -> Result<Self> {
        Ok(match c.to_ascii_uppercase() {
            'I' => Pauli::I,
            'X' => Pauli::X,
            'Y' => Pauli::Y,
            'Z' => Pauli::Z,
            _ => return Err(Error::Domain(alloc::format!("unknown Pauli letter {c:?}"))),
        })
    }
}

/// A real coefficient times a Pauli string.
///
/// Factors are kept sorted by site with identities dropped; the bit masks
/// are derived from them and make application a single XOR per amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    factors: Vec<(usize, Pauli)>,
    x_mask: u64,
    z_mask: u64,
    n_y: u32,
}

impl PauliTerm {
    pub fn new(coefficient: f64, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut f: Vec<(usize, Pauli)> = factors.iter().copied().filter(|&(_, p)| p != Pauli::I).collect();
        f.sort_by_key(|&(q, _)| q);
        for w in f.windows(2) {
            ensure!(w[0].0 != w[1].0, "site {} appears twice in a Pauli string", w[0].0);
        }
        ensure!(
            factors.is_empty() || !f.is_empty(),
            "term has only identity letters; use PauliTerm::identity"
        );
        let (mut x_mask, mut z_mask, mut n_y) = (0u64, 0u64, 0u32);
        for &(q, p) in &f {
            ensure!(q < 63, "site {q} out of range");
            match p {
                Pauli::X => x_mask |= 1 << q,
                Pauli::Y => {
                    x_mask |= 1 << q;
                    z_mask |= 1 << q;
                    n_y += 1;
                }
                Pauli::Z => z_mask |= 1 << q,
                Pauli::I => {}
            }
        }
        Ok(Self { coefficient, factors: f, x_mask, z_mask, n_y })
    }

    pub fn identity(coefficient: f64) -> Self {
        Self { coefficient, factors: Vec::new(), x_mask: 0, z_mask: 0, n_y: 0 }
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(usize, Pauli)] {
        &self.factors
    }

    pub fn weight(&self) -> usize {
        self.factors.len()
    }

    pub fn letter(&self, q: usize) -> Pauli {
        self.factors.iter().find(|&&(s, _)| s == q).map_or(Pauli::I, |&(_, p)| p)
    }

    /// Same string, ignoring the coefficient.
    pub fn same_string(&self, other: &Self) -> bool {
        self.factors == other.factors
    }

    /// `out += c · P ψ`.
    pub(crate) fn accumulate(&self, c: f64, psi: &[Complex64], out: &mut [Complex64]) {
        // P|i⟩ = i^{n_Y} (−1)^{|i ∧ z|} |i ⊕ x⟩
        let phase = match self.n_y % 4 {
            0 => Complex64::new(c, 0.0),
            1 => Complex64::new(0.0, c),
            2 => Complex64::new(-c, 0.0),
            _ => Complex64::new(0.0, -c),
        };
        let (x, z) = (self.x_mask as usize, self.z_mask as usize);
        for (i, a) in psi.iter().enumerate() {
            let v = phase * a;
            if (i & z).count_ones() % 2 == 0 {
                out[i ^ x] += v;
            } else {
                out[i ^ x] -= v;
            }
        }
    }
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.coefficient)?;
        for &(q, p) in &self.factors {
            write!(f, " {q}:{}", p.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliTerm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut it = s.split_whitespace();
        let c: f64 = it
            .next()
            .ok_or_else(|| Error::Domain("empty term line".into()))?
            .parse()
            .map_err(|_| Error::Domain(alloc::format!("bad coefficient in {s:?}")))?;
        let mut factors = Vec::new();
        for tok in it {
            let (q, p) = tok
                .split_once(':')
                .ok_or_else(|| Error::Domain(alloc::format!("bad factor {tok:?}")))?;
            let q: usize = q.parse().map_err(|_| Error::Domain(alloc::format!("bad site {q:?}")))?;
            let mut chars = p.chars();
            let letter = match (chars.next(), chars.next()) {
                (Some(ch), None) => Pauli::try_from(ch)?,
                _ => return Err(Error::Domain(alloc::format!("bad letter {p:?}"))),
            };
            factors.push((q, letter));
        }
        if factors.iter().all(|&(_, p)| p == Pauli::I) {
            Ok(Self::identity(c))
        } else {
            Self::new(c, &factors)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicate_sites() {
        assert!(PauliTerm::new(1.0, &[(0, Pauli::X), (0, Pauli::Z)]).is_err());
    }

    #[test]
    fn parse_and_print() {
        let t: PauliTerm = "-0.5 3:Y 1:x".parse().unwrap();
        assert_eq!(t.factors(), &[(1, Pauli::X), (3, Pauli::Y)]);
        assert_eq!(alloc::format!("{t}"), "-0.5 1:X 3:Y");
        assert!("1.0 2:Q".parse::<PauliTerm>().is_err());
        assert!("0.25".parse::<PauliTerm>().unwrap().is_identity());
    }
}
