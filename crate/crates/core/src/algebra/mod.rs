//! Homogeneous polynomial arithmetic over `Z[c_1..c_n]`, `Z[v_1..v_n]` and the
//! primed basis, plus the ring maps comparing them.

mod maps;
mod partitions;
mod poly;

use thiserror::Error;

pub use maps::{
    b_phi_star, chern_divergence, collect_by_vn, divergence, elementary_symmetric, express_symmetric_in_c,
    from_primed_basis, is_symmetric, primed_vn_coefficient, psi_star, psi_star_at_vn_zero, to_primed_basis,
};
pub use partitions::{chern_order, exponent_vectors, partitions};
pub use poly::{truncated_chern_count, Alphabet, GradedPoly, Monomial};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("alphabet mismatch")]
    AlphabetMismatch,
    #[error("expected a polynomial over {expected:?}, found {found:?}")]
    WrongAlphabet { expected: Alphabet, found: Alphabet },
    #[error("polynomial is not symmetric")]
    NotSymmetric,
    #[error("symmetric polynomial has no expression in elementary symmetric polynomials")]
    NotExpressible,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plocal::PLocal;

    #[test]
    fn arithmetic_examples() {
        let c1 = GradedPoly::chern(3, 1);
        let sq = c1.mul(&c1).unwrap();
        assert_eq!(sq.degree(), 4);
        assert_eq!(sq.render(), "c_1^2");

        let v1 = GradedPoly::torus_var(2, 1);
        let v2 = GradedPoly::torus_var(2, 2);
        let prod = v1.add(&v2).unwrap().mul(&v1.sub(&v2).unwrap()).unwrap();
        assert_eq!(prod, v1.pow(2).sub(&v2.pow(2)).unwrap());

        assert!(GradedPoly::chern(3, 2).scale(&PLocal::zero()).is_zero());
    }

    #[test]
    fn arithmetic_errors() {
        let c1 = GradedPoly::chern(3, 1);
        let c2 = GradedPoly::chern(3, 2);
        assert_eq!(c1.add(&c2), Err(AlgebraError::DegreeMismatch(2, 4)));
        let v1 = GradedPoly::torus_var(3, 1);
        assert_eq!(c1.add(&v1), Err(AlgebraError::AlphabetMismatch));
        assert_eq!(c1.mul(&v1), Err(AlgebraError::AlphabetMismatch));
    }

    #[test]
    fn rendering() {
        let f = GradedPoly::chern_product(3, &[3, 1])
            .sub(&GradedPoly::chern(3, 2).pow(2).scale(&PLocal::from(2)))
            .unwrap();
        assert_eq!(f.render(), "c_3c_1 - 2c_2^2");
        assert_eq!(GradedPoly::torus_var(1, 1).pow(3).render(), "v^3");
        assert_eq!(GradedPoly::primed_var(3, 1).mul(&GradedPoly::primed_var(3, 3)).unwrap().render(), "v'_1v_3");
    }
}
