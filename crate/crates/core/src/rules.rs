//! Differential formulas for the three sequences.
//!
//! `d_3` is the divergence (Chern: the derivation `c_k -> (n-k+1) c_{k-1}`)
//! times `x_1`. `d_{2p-1}` on `x_1`-classes sends `x_1 v^m` to
//! `v^{m-p+1} y_{p,0}` when `p | m+1`; on the torus it acts through the
//! primed basis, whose `v'` variables are permanent cycles, and on the
//! unitary sequence it is pulled back along the restriction to the torus.

use num_bigint::BigInt;
use thiserror::Error;

use crate::algebra::{
    chern_divergence, collect_by_vn, divergence, exponent_vectors, express_symmetric_in_c, from_primed_basis,
    is_symmetric, partitions, primed_vn_coefficient, psi_star, psi_star_at_vn_zero, to_primed_basis, AlgebraError,
    Alphabet, GradedPoly, Monomial,
};
use crate::plocal::{PLocal, PLocalRing};
use crate::sseq::{Class, KZ3Class, Sequence};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("no differential formula for page {0} in the supported window")]
    UnsupportedPage(u32),
    #[error("d_{r} has no rule on classes over {base:?}")]
    NotApplicable { r: u32, base: KZ3Class },
    #[error("transported differential is not symmetric; the transport is inconsistent")]
    NotSymmetric,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn factorial(m: u32) -> BigInt {
    (1..=m).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i))
}

/// `C(n, k)` as an exact integer.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn d3_target(base: KZ3Class) -> Option<KZ3Class> {
    match base {
        KZ3Class::Unit => Some(KZ3Class::X1),
        KZ3Class::Yp0 => Some(KZ3Class::X1Yp0),
        KZ3Class::X1 | KZ3Class::X1Yp0 => None,
    }
}

fn finish(ring: &PLocalRing, fiber: GradedPoly, base: KZ3Class) -> Class {
    let fiber = if base.is_torsion() { fiber.reduce_mod_p(ring) } else { fiber };
    Class::new(fiber, base)
}

fn d3_with(
    ring: &PLocalRing,
    class: &Class,
    derive: impl Fn(&GradedPoly) -> Result<GradedPoly, AlgebraError>,
) -> Result<Class, RuleError> {
    let target = d3_target(class.base).ok_or(RuleError::NotApplicable { r: 3, base: class.base })?;
    Ok(finish(ring, derive(&class.fiber)?, target))
}

/// Path fibration: `d_3(v^t) = t v^{t-1} x_1`.
pub fn k_d3(ring: &PLocalRing, class: &Class) -> Result<Class, RuleError> {
    d3_with(ring, class, divergence)
}

/// Torus: `d_3(f) = div(f) x_1`.
pub fn t_d3(ring: &PLocalRing, class: &Class) -> Result<Class, RuleError> {
    d3_with(ring, class, divergence)
}

/// Unitary: `d_3(c_k) = (n-k+1) c_{k-1} x_1`, extended as a derivation.
pub fn u_d3(ring: &PLocalRing, class: &Class) -> Result<Class, RuleError> {
    d3_with(ring, class, chern_divergence)
}

fn check_higher(p: u64, r: u32, base: KZ3Class) -> Result<(), RuleError> {
    if r as u64 != 2 * p - 1 {
        return Err(RuleError::UnsupportedPage(r));
    }
    if base != KZ3Class::X1 {
        return Err(RuleError::NotApplicable { r, base });
    }
    Ok(())
}

fn hits_bottom(p: u64, m: u32) -> bool {
    (m as u64 + 1) % p == 0
}

/// `d_{2p-1}(x_1 v^m) = v^{m-p+1} y_{p,0}` when `p | m+1`, zero otherwise.
pub fn k_higher(ring: &PLocalRing, r: u32, class: &Class) -> Result<Class, RuleError> {
    let p = ring.prime();
    check_higher(p, r, class.base)?;
    let f = &class.fiber;
    let shift = (p - 1) as u32;
    let mut out = GradedPoly::zero(Alphabet::Torus, 1, f.degree().saturating_sub(2 * shift));
    for (e, c) in f.terms() {
        if hits_bottom(p, e[0]) {
            out.add_term(vec![e[0] - shift], c.clone());
        }
    }
    Ok(finish(ring, out, KZ3Class::Yp0))
}

/// For `p` not dividing `m+1`, the class `x_1 v^m` is `d_3` of
/// `v^{m+1}/(m+1)`. Returns that preimage.
pub fn k_boundary_witness(p: u64, m: u32) -> Option<GradedPoly> {
    if hits_bottom(p, m) {
        return None;
    }
    let c = PLocal::new(1, m as i64 + 1);
    Some(GradedPoly::term(Alphabet::Torus, vec![m + 1], c))
}

fn bottom_powers(p: u64, degree: u32) -> impl Iterator<Item = u32> {
    let p = p as u32;
    (p - 1..=degree / 2).step_by(p as usize)
}

fn vn_power(n: usize, k: u32) -> GradedPoly {
    GradedPoly::primed_var(n, n).pow(k)
}

/// Torus `d_{2p-1}` on `f x_1`, via the `v_n`-Taylor coefficients of `f`.
pub fn t_d2pm1(ring: &PLocalRing, r: u32, class: &Class) -> Result<Class, RuleError> {
    let p = ring.prime();
    check_higher(p, r, class.base)?;
    let f = &class.fiber;
    let n = f.nvars();
    let shift = (p - 1) as u32;
    let mut primed = GradedPoly::zero(Alphabet::Primed, n, f.degree().saturating_sub(2 * shift));
    for m in bottom_powers(p, f.degree()) {
        let coeff = primed_vn_coefficient(f, m)?;
        primed.add_scaled(&coeff.mul(&vn_power(n, m - shift))?, &PLocal::one())?;
    }
    Ok(finish(ring, from_primed_basis(&primed)?, KZ3Class::Yp0))
}

/// Literal version of [`t_d2pm1`]: full primed expansion, then collection by
/// powers of `v_n`.
pub fn t_d2pm1_literal(ring: &PLocalRing, r: u32, class: &Class) -> Result<Class, RuleError> {
    let p = ring.prime();
    check_higher(p, r, class.base)?;
    let f = &class.fiber;
    let n = f.nvars();
    let shift = (p - 1) as u32;
    let mut primed = GradedPoly::zero(Alphabet::Primed, n, f.degree().saturating_sub(2 * shift));
    for (m, coeff) in collect_by_vn(&to_primed_basis(f)?)? {
        if hits_bottom(p, m) {
            primed.add_scaled(&coeff.mul(&vn_power(n, m - shift))?, &PLocal::one())?;
        }
    }
    Ok(finish(ring, from_primed_basis(&primed)?, KZ3Class::Yp0))
}

/// Preimages under `d_3` of the `x_1 v'^a v_n^m` pieces with `p` not
/// dividing `m+1`; each is `g v_n^{m+1}/(m+1)` for the `v'`-coefficient `g`.
pub fn t_boundary_witnesses(ring: &PLocalRing, class: &Class) -> Result<Vec<GradedPoly>, RuleError> {
    let p = ring.prime();
    let f = &class.fiber;
    let n = f.nvars();
    let mut out = Vec::new();
    for (m, coeff) in collect_by_vn(&to_primed_basis(f)?)? {
        if hits_bottom(p, m) {
            continue;
        }
        let g = coeff.mul(&vn_power(n, m + 1))?.scale(&PLocal::new(1, m as i64 + 1));
        out.push(from_primed_basis(&g)?);
    }
    Ok(out)
}

fn pull_back(ring: &PLocalRing, torus: GradedPoly) -> Result<Class, RuleError> {
    let torus = torus.reduce_mod_p(ring);
    if !is_symmetric(&torus) {
        return Err(RuleError::NotSymmetric);
    }
    let chern = express_symmetric_in_c(&torus)?;
    Ok(finish(ring, chern, KZ3Class::Yp0))
}

/// Unitary `d_{2p-1}` on `f x_1`: restrict to the torus, apply the torus
/// rule, and read the (symmetric) answer back in Chern classes.
///
/// Uses `coefficient of v_n^m = psi_star(D^m f / m!)|_{v_n = 0}` with `D` the
/// Chern derivation, so nothing of the size of `psi_star(f)` is expanded.
pub fn u_d2pm1(ring: &PLocalRing, r: u32, class: &Class) -> Result<Class, RuleError> {
    let p = ring.prime();
    check_higher(p, r, class.base)?;
    let f = &class.fiber;
    let n = f.nvars();
    let shift = (p - 1) as u32;
    let mut primed = GradedPoly::zero(Alphabet::Primed, n, f.degree().saturating_sub(2 * shift));
    let mut derived = f.clone();
    let mut done = 0;
    for m in bottom_powers(p, f.degree()) {
        while done < m {
            derived = chern_divergence(&derived)?;
            done += 1;
        }
        let inv = PLocal::one().checked_div(&PLocal::from(factorial(m))).expect("m! nonzero");
        let coeff = psi_star_at_vn_zero(&derived)?.scale(&inv);
        primed.add_scaled(&coeff.mul(&vn_power(n, m - shift))?, &PLocal::one())?;
    }
    pull_back(ring, from_primed_basis(&primed)?)
}

/// Literal version of [`u_d2pm1`]: expands `psi_star(f)` in full.
pub fn u_d2pm1_literal(ring: &PLocalRing, r: u32, class: &Class) -> Result<Class, RuleError> {
    let torus = Class::new(psi_star(&class.fiber)?, class.base);
    let image = t_d2pm1_literal(ring, r, &torus)?;
    pull_back(ring, image.fiber)
}

/// Differential formulas of one sequence.
pub trait DifferentialRules: Send + Sync {
    fn sequence(&self) -> Sequence;

    fn ring(&self) -> &PLocalRing;

    /// Number of fiber variables.
    fn rank(&self) -> usize;

    /// `E_2` fiber generators in degree `t`.
    fn fiber_basis(&self, t: u32) -> Vec<Monomial>;

    /// Name of the formula for `d_r` out of column `s`, if there is one.
    fn rule_name(&self, r: u32, s: u32) -> Option<&'static str>;

    fn apply(&self, r: u32, class: &Class) -> Result<Class, RuleError>;

    /// Whether column-0 classes surviving `d_3` are known permanent cycles.
    fn column_zero_degenerates(&self) -> bool;

    /// Human-readable preimages showing that the discarded parts of a
    /// `d_{2p-1}` computation were already boundaries.
    fn boundary_witnesses(&self, _r: u32, _class: &Class) -> Result<Vec<String>, RuleError> {
        Ok(Vec::new())
    }
}

fn is_higher(p: u64, r: u32, s: u32) -> bool {
    r as u64 == 2 * p - 1 && s == 3
}

fn is_d3(p: u64, r: u32, s: u32) -> bool {
    r == 3 && (s == 0 || s as u64 == 2 * p + 2)
}

pub struct URules {
    ring: PLocalRing,
    n: usize,
}

pub struct TRules {
    ring: PLocalRing,
    n: usize,
}

pub struct KRules {
    ring: PLocalRing,
}

impl URules {
    pub fn new(ring: PLocalRing, n: usize) -> Self {
        URules { ring, n }
    }
}

impl TRules {
    pub fn new(ring: PLocalRing, n: usize) -> Self {
        TRules { ring, n }
    }
}

impl KRules {
    pub fn new(ring: PLocalRing) -> Self {
        KRules { ring }
    }
}

impl DifferentialRules for URules {
    fn sequence(&self) -> Sequence {
        Sequence::U
    }

    fn ring(&self) -> &PLocalRing {
        &self.ring
    }

    fn rank(&self) -> usize {
        self.n
    }

    fn fiber_basis(&self, t: u32) -> Vec<Monomial> {
        let half = t / 2;
        partitions(half, half.min(self.n as u32))
            .iter()
            .map(|parts| Monomial::chern_from_parts(self.n, parts))
            .collect()
    }

    fn rule_name(&self, r: u32, s: u32) -> Option<&'static str> {
        let p = self.ring.prime();
        if is_d3(p, r, s) {
            Some("u_d3")
        } else if is_higher(p, r, s) {
            Some("u_d2pm1")
        } else {
            None
        }
    }

    fn apply(&self, r: u32, class: &Class) -> Result<Class, RuleError> {
        if r == 3 {
            u_d3(&self.ring, class)
        } else {
            u_d2pm1(&self.ring, r, class)
        }
    }

    fn column_zero_degenerates(&self) -> bool {
        false
    }
}

impl DifferentialRules for TRules {
    fn sequence(&self) -> Sequence {
        Sequence::T
    }

    fn ring(&self) -> &PLocalRing {
        &self.ring
    }

    fn rank(&self) -> usize {
        self.n
    }

    fn fiber_basis(&self, t: u32) -> Vec<Monomial> {
        exponent_vectors(t / 2, self.n)
            .into_iter()
            .map(|e| Monomial::new(Alphabet::Torus, e))
            .collect()
    }

    fn rule_name(&self, r: u32, s: u32) -> Option<&'static str> {
        let p = self.ring.prime();
        if is_d3(p, r, s) {
            Some("t_d3")
        } else if is_higher(p, r, s) {
            Some("t_d2pm1")
        } else {
            None
        }
    }

    fn apply(&self, r: u32, class: &Class) -> Result<Class, RuleError> {
        if r == 3 {
            t_d3(&self.ring, class)
        } else {
            t_d2pm1(&self.ring, r, class)
        }
    }

    fn column_zero_degenerates(&self) -> bool {
        true
    }

    fn boundary_witnesses(&self, r: u32, class: &Class) -> Result<Vec<String>, RuleError> {
        if r == 3 {
            return Ok(Vec::new());
        }
        Ok(t_boundary_witnesses(&self.ring, class)?.iter().map(GradedPoly::render).collect())
    }
}

impl DifferentialRules for KRules {
    fn sequence(&self) -> Sequence {
        Sequence::K
    }

    fn ring(&self) -> &PLocalRing {
        &self.ring
    }

    fn rank(&self) -> usize {
        1
    }

    fn fiber_basis(&self, t: u32) -> Vec<Monomial> {
        vec![Monomial::new(Alphabet::Torus, vec![t / 2])]
    }

    fn rule_name(&self, r: u32, s: u32) -> Option<&'static str> {
        let p = self.ring.prime();
        if is_d3(p, r, s) {
            Some("k_d3")
        } else if is_higher(p, r, s) {
            Some("k_higher")
        } else {
            None
        }
    }

    fn apply(&self, r: u32, class: &Class) -> Result<Class, RuleError> {
        if r == 3 {
            k_d3(&self.ring, class)
        } else {
            k_higher(&self.ring, r, class)
        }
    }

    fn column_zero_degenerates(&self) -> bool {
        true
    }

    fn boundary_witnesses(&self, r: u32, class: &Class) -> Result<Vec<String>, RuleError> {
        if r == 3 {
            return Ok(Vec::new());
        }
        let p = self.ring.prime();
        Ok(class
            .fiber
            .terms()
            .filter_map(|(e, _)| k_boundary_witness(p, e[0]))
            .map(|g| g.render())
            .collect())
    }
}

pub fn rules_for(sequence: Sequence, ring: PLocalRing, n: usize) -> Box<dyn DifferentialRules> {
    match sequence {
        Sequence::U => Box::new(URules::new(ring, n)),
        Sequence::T => Box::new(TRules::new(ring, n)),
        Sequence::K => Box::new(KRules::new(ring)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64) -> PLocalRing {
        PLocalRing::new(p).unwrap()
    }

    fn v(m: u32) -> GradedPoly {
        GradedPoly::torus_var(1, 1).pow(m)
    }

    fn chern(n: usize, parts: &[usize]) -> GradedPoly {
        GradedPoly::chern_product(n, parts)
    }

    #[test]
    fn k_d3_examples() {
        let r = ring(3);
        let d = k_d3(&r, &Class::new(v(1), KZ3Class::Unit)).unwrap();
        assert_eq!(d, Class::new(v(0), KZ3Class::X1));
        let d = k_d3(&r, &Class::new(v(3), KZ3Class::Unit)).unwrap();
        assert_eq!(d, Class::new(v(2).scale(&PLocal::from(3)), KZ3Class::X1));
        assert!(k_d3(&r, &Class::new(v(2), KZ3Class::X1)).is_err());
    }

    #[test]
    fn k_higher_examples() {
        for p in [3u64, 5, 7] {
            let r = ring(p);
            let page = 2 * p as u32 - 1;
            let top = k_higher(&r, page, &Class::new(v(p as u32 - 1), KZ3Class::X1)).unwrap();
            assert_eq!(top, Class::new(v(0), KZ3Class::Yp0));
            let below = k_higher(&r, page, &Class::new(v(p as u32 - 2), KZ3Class::X1)).unwrap();
            assert!(below.is_zero());
            let w = k_boundary_witness(p, p as u32 - 2).unwrap();
            assert_eq!(divergence(&w).unwrap(), v(p as u32 - 2));
        }
        let r = ring(3);
        let d = k_higher(&r, 5, &Class::new(v(5), KZ3Class::X1)).unwrap();
        assert_eq!(d, Class::new(v(3), KZ3Class::Yp0));
        assert_eq!(
            k_higher(&r, 7, &Class::new(v(5), KZ3Class::X1)),
            Err(RuleError::UnsupportedPage(7))
        );
        assert_eq!(
            k_higher(&r, 17, &Class::new(v(5), KZ3Class::X1)),
            Err(RuleError::UnsupportedPage(17))
        );
    }

    #[test]
    fn t_d3_examples() {
        let r = ring(3);
        let v1 = GradedPoly::torus_var(2, 1);
        let v2 = GradedPoly::torus_var(2, 2);
        let d = t_d3(&r, &Class::new(v1.mul(&v2).unwrap(), KZ3Class::Unit)).unwrap();
        assert_eq!(d, Class::new(v1.add(&v2).unwrap(), KZ3Class::X1));
        let d = t_d3(&r, &Class::new(v1.sub(&v2).unwrap(), KZ3Class::Unit)).unwrap();
        assert!(d.is_zero());
        let d = t_d3(&r, &Class::new(GradedPoly::one(Alphabet::Torus, 2), KZ3Class::Unit)).unwrap();
        assert!(d.is_zero());
    }

    #[test]
    fn u_d3_examples() {
        let r = ring(3);
        for n in [3usize, 4, 6] {
            let d = u_d3(&r, &Class::new(chern(n, &[1]), KZ3Class::Unit)).unwrap();
            assert_eq!(d.fiber, GradedPoly::one(Alphabet::Chern, n).scale(&PLocal::from(n as i64)));
            assert_eq!(d.base, KZ3Class::X1);

            let d = u_d3(&r, &Class::new(chern(n, &[2, 1]), KZ3Class::Unit)).unwrap();
            let expect = chern(n, &[1, 1])
                .scale(&PLocal::from(n as i64 - 1))
                .add(&chern(n, &[2]).scale(&PLocal::from(n as i64)))
                .unwrap();
            assert_eq!(d.fiber, expect);
        }
        // n = p: c_p -> c_{p-1}
        let d = u_d3(&r, &Class::new(chern(3, &[3]), KZ3Class::Unit)).unwrap();
        assert_eq!(d.fiber, chern(3, &[2]));
    }

    #[test]
    fn u_d3_on_torsion_row_reduces_mod_p() {
        let r = ring(3);
        let d = u_d3(&r, &Class::new(chern(3, &[1]), KZ3Class::Yp0)).unwrap();
        assert!(d.is_zero());
        assert_eq!(d.base, KZ3Class::X1Yp0);
    }

    #[test]
    fn t_d2pm1_examples() {
        for (p, n) in [(3u64, 2usize), (3, 3), (5, 2)] {
            let r = ring(p);
            let page = 2 * p as u32 - 1;
            let vn = GradedPoly::torus_var(n, n);
            let d = t_d2pm1(&r, page, &Class::new(vn.pow(p as u32 - 1), KZ3Class::X1)).unwrap();
            assert_eq!(d, Class::new(GradedPoly::one(Alphabet::Torus, n), KZ3Class::Yp0));

            let d = t_d2pm1(&r, page, &Class::new(vn.pow(p as u32 - 2), KZ3Class::X1)).unwrap();
            assert!(d.is_zero());

            let v1p = GradedPoly::torus_var(n, 1).sub(&vn).unwrap();
            let f = v1p.mul(&vn.pow(p as u32 - 1)).unwrap();
            let d = t_d2pm1(&r, page, &Class::new(f, KZ3Class::X1)).unwrap();
            assert_eq!(d.fiber, v1p.reduce_mod_p(&r));
        }
    }

    #[test]
    fn torus_routes_agree() {
        let r = ring(3);
        let n = 3;
        let basis = exponent_vectors(4, n);
        for e in basis {
            let f = GradedPoly::term(Alphabet::Torus, e, PLocal::one());
            let c = Class::new(f, KZ3Class::X1);
            assert_eq!(t_d2pm1(&r, 5, &c).unwrap(), t_d2pm1_literal(&r, 5, &c).unwrap());
        }
    }

    #[test]
    fn transport_identities() {
        for (p, n) in [(3u64, 3usize), (3, 6), (5, 5)] {
            let r = ring(p);
            let page = 2 * p as u32 - 1;
            let pp = p as usize;
            let coeff = PLocal::from(binomial(n as u64 - 1, p - 1));
            for (src, tgt) in [(vec![pp, 1], vec![1, 1]), (vec![pp, 1, 1], vec![1, 1, 1])] {
                let d = u_d2pm1(&r, page, &Class::new(chern(n, &src), KZ3Class::X1)).unwrap();
                let expect = chern(n, &tgt).scale(&coeff).reduce_mod_p(&r);
                assert_eq!(d, Class::new(expect, KZ3Class::Yp0));
                assert!(!d.is_zero());
            }
        }
    }

    #[test]
    fn unitary_routes_agree() {
        let r = ring(3);
        for parts in partitions(5, 3) {
            let f = chern(4, &parts.iter().map(|&i| i as usize).collect::<Vec<_>>());
            let c = Class::new(f, KZ3Class::X1);
            assert_eq!(u_d2pm1(&r, 5, &c).unwrap(), u_d2pm1_literal(&r, 5, &c).unwrap());
        }
    }

    #[test]
    fn witnesses_are_preimages() {
        let r = ring(3);
        let n = 2;
        let f = GradedPoly::torus_var(n, 1).pow(3);
        let c = Class::new(f, KZ3Class::X1);
        let ws = t_boundary_witnesses(&r, &c).unwrap();
        assert!(!ws.is_empty());
        for w in ws {
            assert_eq!(divergence(&w).unwrap().degree(), 6);
        }
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), BigInt::from(10));
        assert_eq!(binomial(2, 3), BigInt::from(0));
    }
}
