//! Exact arithmetic in Z_(p) and the matrix algorithms every page computation
//! rests on.

mod matrix;
mod scalar;
mod smith;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use matrix::PLocalMatrix;
pub use scalar::{int_valuation, is_prime, PLocal, PLocalRing, ScalarOp};
pub use smith::{
    cokernel_iso_type, column_span_basis, kernel_basis, smith_normal_form, solve_many, solve_mod_image,
    SmithForm,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("{0} is not in Z_(p)")]
    NotPLocal(String),
    #[error("{0} is not a prime")]
    NotPrime(u64),
}

/// Isomorphism class of a finitely generated Z_(p)-module:
/// `Z_(p)^free_rank + sum_k Z/p^k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct IsoType {
    pub free_rank: usize,
    /// Exponents `k` of the cyclic summands `Z/p^k`, non-decreasing.
    pub torsion: Vec<u32>,
}

impl IsoType {
    pub fn new(free_rank: usize, mut torsion: Vec<u32>) -> Self {
        torsion.retain(|&k| k > 0);
        torsion.sort_unstable();
        IsoType { free_rank, torsion }
    }

    pub fn zero() -> Self {
        IsoType::default()
    }

    pub fn cyclic(k: u32) -> Self {
        IsoType::new(0, vec![k])
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    pub fn is_torsion(&self) -> bool {
        self.free_rank == 0
    }

    pub fn torsion_part(&self) -> IsoType {
        IsoType::new(0, self.torsion.clone())
    }

    /// Direct sum.
    pub fn sum(&self, other: &IsoType) -> IsoType {
        let mut t = self.torsion.clone();
        t.extend_from_slice(&other.torsion);
        IsoType::new(self.free_rank + other.free_rank, t)
    }

    /// Order of the torsion part as a power of p.
    pub fn torsion_length(&self) -> u32 {
        self.torsion.iter().sum()
    }

    /// Renders as `0`, `Z(p)^k`, `Z/p^k`, with summands joined by `+`.
    /// Exponents equal to one are omitted, e.g. `Z(3)`, `Z/3`, `Z/3^2`.
    pub fn render(&self, p: u64) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push(format!("Z({p})")),
            k => parts.push(format!("Z({p})^{k}")),
        }
        for &k in &self.torsion {
            if k == 1 {
                parts.push(format!("Z/{p}"));
            } else {
                parts.push(format!("Z/{p}^{k}"));
            }
        }
        parts.join("+")
    }
}

impl fmt::Display for IsoType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.free_rank > 0 {
            parts.push(format!("Z(p)^{}", self.free_rank));
        }
        for &k in &self.torsion {
            parts.push(format!("Z/p^{k}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iso_rendering() {
        assert_eq!(IsoType::zero().render(3), "0");
        assert_eq!(IsoType::cyclic(1).render(3), "Z/3");
        assert_eq!(IsoType::cyclic(2).render(3), "Z/3^2");
        assert_eq!(IsoType::new(2, vec![1, 1]).render(5), "Z(5)^2+Z/5+Z/5");
        assert_eq!(IsoType::new(1, vec![]).render(7), "Z(7)");
    }

    #[test]
    fn iso_canonical_order() {
        assert_eq!(IsoType::new(0, vec![3, 1, 0, 2]).torsion, vec![1, 2, 3]);
    }
}
