//! Smith normal form over the discrete valuation ring Z_(p).
//!
//! Z_(p) is local, so an entry of minimal valuation divides every other entry
//! and elimination never needs a gcd step. Elementary divisors come out as
//! pure powers of p.

use super::{IsoType, PLocal, PLocalMatrix, PLocalRing};

/// Result of [`smith_normal_form`]: `u * a * v == d`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub u: PLocalMatrix,
    pub d: PLocalMatrix,
    pub v: PLocalMatrix,
    pub u_inv: PLocalMatrix,
    pub v_inv: PLocalMatrix,
    /// Valuations of the nonzero diagonal entries, non-decreasing.
    pub exponents: Vec<u32>,
}

impl SmithForm {
    pub fn rank(&self) -> usize {
        self.exponents.len()
    }
}

/// Smith normal form of a matrix with p-local entries.
///
/// Pivot: an entry of minimal valuation in the remaining block, ties broken
/// by smallest `(row, col)`. The pivot is normalized to `p^k`.
pub fn smith_normal_form(ring: &PLocalRing, a: &PLocalMatrix) -> SmithForm {
    let (m, n) = a.shape();
    let mut d = a.clone();
    let mut u = PLocalMatrix::identity(m);
    let mut u_inv = PLocalMatrix::identity(m);
    let mut v = PLocalMatrix::identity(n);
    let mut v_inv = PLocalMatrix::identity(n);
    let mut exponents = Vec::new();

    for k in 0..m.min(n) {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in k..m {
            for j in k..n {
                if let Some(val) = ring.valuation(d.get(i, j)) {
                    if best.map_or(true, |(bv, _, _)| val < bv) {
                        best = Some((val, i, j));
                        if val == 0 {
                            break;
                        }
                    }
                }
            }
            if matches!(best, Some((0, _, _))) {
                break;
            }
        }
        let Some((val, pi, pj)) = best else { break };

        if pi != k {
            d.swap_rows(pi, k);
            u.swap_rows(pi, k);
            u_inv.swap_cols(pi, k);
        }
        if pj != k {
            d.swap_cols(pj, k);
            v.swap_cols(pj, k);
            v_inv.swap_rows(pj, k);
        }

        let (_, unit) = ring.unit_part(d.get(k, k)).expect("pivot is nonzero");
        if !unit.is_one() {
            let inv = unit.recip().expect("unit is nonzero");
            d.scale_row(k, &inv);
            u.scale_row(k, &inv);
            u_inv.scale_col(k, &unit);
        }
        let pivot = ring.p_power(val);

        for i in k + 1..m {
            if d.get(i, k).is_zero() {
                continue;
            }
            let c = -d.get(i, k).checked_div(&pivot).expect("pivot nonzero");
            d.add_row_multiple(i, k, &c);
            u.add_row_multiple(i, k, &c);
            u_inv.add_col_multiple(k, i, &-&c);
        }
        for j in k + 1..n {
            if d.get(k, j).is_zero() {
                continue;
            }
            let c = -d.get(k, j).checked_div(&pivot).expect("pivot nonzero");
            d.add_col_multiple(j, k, &c);
            v.add_col_multiple(j, k, &c);
            v_inv.add_row_multiple(k, j, &-&c);
        }
        exponents.push(val);
    }

    SmithForm {
        u,
        d,
        v,
        u_inv,
        v_inv,
        exponents,
    }
}

/// Isomorphism type of `Z_(p)^g / colspan(relations)` where `g = relations.rows()`.
pub fn cokernel_iso_type(ring: &PLocalRing, relations: &PLocalMatrix) -> IsoType {
    let snf = smith_normal_form(ring, relations);
    let free_rank = relations.rows() - snf.rank();
    let torsion = snf.exponents.iter().copied().filter(|&e| e > 0).collect();
    IsoType::new(free_rank, torsion)
}

/// Solves `a * x = b` over Z_(p), or `None` when no p-local solution exists.
pub fn solve_mod_image(ring: &PLocalRing, a: &PLocalMatrix, b: &[PLocal]) -> Option<Vec<PLocal>> {
    let snf = smith_normal_form(ring, a);
    solve_with(ring, &snf, b)
}

/// Solves `a * X = b` column by column with a single factorization.
pub fn solve_many(ring: &PLocalRing, a: &PLocalMatrix, b: &PLocalMatrix) -> Option<PLocalMatrix> {
    assert_eq!(a.rows(), b.rows(), "shape mismatch in solve");
    let snf = smith_normal_form(ring, a);
    let cols = b
        .columns()
        .iter()
        .map(|col| solve_with(ring, &snf, col))
        .collect::<Option<Vec<_>>>()?;
    Some(PLocalMatrix::from_columns(a.cols(), &cols))
}

pub(crate) fn solve_with(ring: &PLocalRing, snf: &SmithForm, b: &[PLocal]) -> Option<Vec<PLocal>> {
    let (m, n) = snf.d.shape();
    assert_eq!(m, b.len(), "shape mismatch in solve");
    let c = snf.u.mul_vec(b);
    let rank = snf.rank();
    if c[rank..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    let mut y = vec![PLocal::zero(); n];
    for i in 0..rank {
        let q = c[i].checked_div(&ring.p_power(snf.exponents[i])).expect("p^k nonzero");
        if !ring.is_local(&q) {
            return None;
        }
        y[i] = q;
    }
    Some(snf.v.mul_vec(&y))
}

/// Basis of the kernel of `a` (as columns), a saturated free submodule.
pub fn kernel_basis(ring: &PLocalRing, a: &PLocalMatrix) -> PLocalMatrix {
    let snf = smith_normal_form(ring, a);
    let idx: Vec<usize> = (snf.rank()..a.cols()).collect();
    snf.v.select_columns(&idx)
}

/// Basis of the column span of `a`.
pub fn column_span_basis(ring: &PLocalRing, a: &PLocalMatrix) -> PLocalMatrix {
    let snf = smith_normal_form(ring, a);
    let mut out = PLocalMatrix::zeros(a.rows(), snf.rank());
    for (j, &e) in snf.exponents.iter().enumerate() {
        let scale = ring.p_power(e);
        for i in 0..a.rows() {
            out.set(i, j, snf.u_inv.get(i, j) * &scale);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64) -> PLocalRing {
        PLocalRing::new(p).unwrap()
    }

    fn diag(snf: &SmithForm) -> Vec<PLocal> {
        let (m, n) = snf.d.shape();
        (0..m.min(n)).map(|i| snf.d.get(i, i).clone()).collect()
    }

    #[test]
    fn identity_is_fixed() {
        let r = ring(3);
        let snf = smith_normal_form(&r, &PLocalMatrix::identity(2));
        assert_eq!(snf.d, PLocalMatrix::identity(2));
    }

    #[test]
    fn units_at_three() {
        // det = -16, a 3-unit; the gcd of entries is 2, also a unit.
        let r = ring(3);
        let a = PLocalMatrix::from_i64(&[&[2, 4], &[6, 8]]);
        let snf = smith_normal_form(&r, &a);
        assert_eq!(diag(&snf), vec![PLocal::one(), PLocal::one()]);
        assert_eq!(snf.u.mul(&a).mul(&snf.v), snf.d);
    }

    #[test]
    fn already_diagonal() {
        let r = ring(3);
        let a = PLocalMatrix::from_i64(&[&[3, 0], &[0, 9]]);
        let snf = smith_normal_form(&r, &a);
        assert_eq!(diag(&snf), vec![PLocal::from(3), PLocal::from(9)]);
    }

    #[test]
    fn cokernels() {
        let r = ring(3);
        let iso = cokernel_iso_type(&r, &PLocalMatrix::from_i64(&[&[9]]));
        assert_eq!(iso, IsoType::new(0, vec![2]));
        let iso = cokernel_iso_type(&r, &PLocalMatrix::zeros(2, 0));
        assert_eq!(iso, IsoType::new(2, vec![]));
        let iso = cokernel_iso_type(&r, &PLocalMatrix::from_i64(&[&[30]]));
        assert_eq!(iso, IsoType::new(0, vec![1]));
    }

    #[test]
    fn solves() {
        let r = ring(3);
        let a = PLocalMatrix::from_i64(&[&[3]]);
        assert_eq!(solve_mod_image(&r, &a, &[PLocal::from(30)]), Some(vec![PLocal::from(10)]));
        assert_eq!(solve_mod_image(&r, &a, &[PLocal::one()]), None);
        let a = PLocalMatrix::from_i64(&[&[1, 0], &[0, 3]]);
        assert_eq!(
            solve_mod_image(&r, &a, &[PLocal::from(5), PLocal::from(6)]),
            Some(vec![PLocal::from(5), PLocal::from(2)])
        );
    }

    #[test]
    fn inverses_are_tracked() {
        let r = ring(5);
        let a = PLocalMatrix::from_i64(&[&[5, 10, 3], &[25, 1, 0], &[0, 0, 50]]);
        let snf = smith_normal_form(&r, &a);
        assert_eq!(snf.u.mul(&snf.u_inv), PLocalMatrix::identity(3));
        assert_eq!(snf.v.mul(&snf.v_inv), PLocalMatrix::identity(3));
    }

    #[test]
    fn kernel_and_span() {
        let r = ring(3);
        let a = PLocalMatrix::from_i64(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = kernel_basis(&r, &a);
        assert_eq!(k.cols(), 2);
        assert!(a.mul(&k).is_zero());
        let span = column_span_basis(&r, &PLocalMatrix::from_i64(&[&[3, 6], &[0, 0]]));
        assert_eq!(span.cols(), 1);
        assert_eq!(cokernel_iso_type(&r, &span), IsoType::new(1, vec![1]));
    }

    #[test]
    fn empty_shapes() {
        let r = ring(3);
        let snf = smith_normal_form(&r, &PLocalMatrix::zeros(0, 3));
        assert_eq!(snf.rank(), 0);
        assert_eq!(kernel_basis(&r, &PLocalMatrix::zeros(0, 3)).cols(), 3);
        assert_eq!(solve_mod_image(&r, &PLocalMatrix::zeros(2, 0), &[PLocal::zero(), PLocal::zero()]), Some(vec![]));
    }
}
