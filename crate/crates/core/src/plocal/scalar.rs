use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::LinalgError;

/// An exact rational number.
///
/// Every coefficient in the engine is one of these. Membership in the
/// localization Z_(p) is not a property of the value alone, so the prime lives
/// in a [`PLocalRing`] that checks locality wherever an operation could leave
/// the ring (division, valuations, reduction mod p).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PLocal(BigRational);

impl PLocal {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        PLocal(BigRational::new(num.into(), den.into()))
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        PLocal(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        PLocal(BigRational::zero())
    }

    pub fn one() -> Self {
        PLocal(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        PLocal(self.0.abs())
    }

    /// Exact rational division, with no locality check.
    pub fn checked_div(&self, other: &PLocal) -> Option<PLocal> {
        if other.is_zero() {
            None
        } else {
            Some(PLocal(&self.0 / &other.0))
        }
    }

    pub fn recip(&self) -> Option<PLocal> {
        PLocal::one().checked_div(self)
    }

    pub fn pow(&self, e: u32) -> PLocal {
        let mut acc = PLocal::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    /// Serialized form used in reports: "num/den" with den > 0.
    pub fn to_pair_string(&self) -> String {
        format!("{}/{}", self.0.numer(), self.0.denom())
    }

}

impl fmt::Debug for PLocal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for PLocal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl From<i64> for PLocal {
    fn from(n: i64) -> Self {
        PLocal::from_int(n)
    }
}

impl From<BigInt> for PLocal {
    fn from(n: BigInt) -> Self {
        PLocal::from_int(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl<'a> $tr<&'a PLocal> for &'a PLocal {
            type Output = PLocal;
            fn $method(self, rhs: &'a PLocal) -> PLocal {
                PLocal(&self.0 $op &rhs.0)
            }
        }
        impl $tr<PLocal> for PLocal {
            type Output = PLocal;
            fn $method(self, rhs: PLocal) -> PLocal {
                PLocal(self.0 $op rhs.0)
            }
        }
        impl<'a> $tr<&'a PLocal> for PLocal {
            type Output = PLocal;
            fn $method(self, rhs: &'a PLocal) -> PLocal {
                PLocal(self.0 $op &rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);

impl<'a> AddAssign<&'a PLocal> for PLocal {
    fn add_assign(&mut self, rhs: &'a PLocal) {
        self.0 += &rhs.0;
    }
}

impl<'a> SubAssign<&'a PLocal> for PLocal {
    fn sub_assign(&mut self, rhs: &'a PLocal) {
        self.0 -= &rhs.0;
    }
}

impl<'a> MulAssign<&'a PLocal> for PLocal {
    fn mul_assign(&mut self, rhs: &'a PLocal) {
        self.0 *= &rhs.0;
    }
}

impl Neg for PLocal {
    type Output = PLocal;
    fn neg(self) -> PLocal {
        PLocal(-self.0)
    }
}

impl<'a> Neg for &'a PLocal {
    type Output = PLocal;
    fn neg(self) -> PLocal {
        PLocal(-&self.0)
    }
}

/// Arithmetic operation selector for [`PLocalRing::arith`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalarOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// The ring Z_(p) for a fixed prime p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PLocalRing {
    p: u64,
    p_big: BigInt,
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Exponent of `p` in the nonzero integer `n`.
pub fn int_valuation(n: &BigInt, p: &BigInt) -> u32 {
    debug_assert!(!n.is_zero());
    let mut k = 0;
    let mut m = n.abs();
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return k;
        }
        m = q;
        k += 1;
    }
}

impl PLocalRing {
    pub fn new(p: u64) -> Result<Self, LinalgError> {
        if !is_prime(p) {
            return Err(LinalgError::NotPrime(p));
        }
        Ok(PLocalRing {
            p,
            p_big: BigInt::from(p),
        })
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn is_local(&self, a: &PLocal) -> bool {
        !a.denom().is_multiple_of(&self.p_big)
    }

    /// Builds `num/den`, rejecting values outside Z_(p).
    pub fn scalar(&self, num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<PLocal, LinalgError> {
        let den = den.into();
        if den.is_zero() {
            return Err(LinalgError::DivisionByZero);
        }
        let x = PLocal::new(num, den);
        self.check(x)
    }

    pub fn check(&self, a: PLocal) -> Result<PLocal, LinalgError> {
        if self.is_local(&a) {
            Ok(a)
        } else {
            Err(LinalgError::NotPLocal(a.to_pair_string()))
        }
    }

    pub fn arith(&self, a: &PLocal, b: &PLocal, op: ScalarOp) -> Result<PLocal, LinalgError> {
        match op {
            ScalarOp::Add => Ok(a + b),
            ScalarOp::Sub => Ok(a - b),
            ScalarOp::Mul => Ok(a * b),
            ScalarOp::Div => self.div(a, b),
        }
    }

    pub fn div(&self, a: &PLocal, b: &PLocal) -> Result<PLocal, LinalgError> {
        let q = a.checked_div(b).ok_or(LinalgError::DivisionByZero)?;
        self.check(q)
    }

    /// p-adic valuation of a p-local number; `None` stands for +infinity.
    pub fn valuation(&self, a: &PLocal) -> Option<u32> {
        if a.is_zero() {
            return None;
        }
        debug_assert!(self.is_local(a), "valuation of non-local {a}");
        Some(int_valuation(a.numer(), &self.p_big))
    }

    /// Valuation of an arbitrary nonzero rational (may be negative).
    pub fn rational_valuation(&self, a: &PLocal) -> Option<i64> {
        if a.is_zero() {
            return None;
        }
        Some(int_valuation(a.numer(), &self.p_big) as i64 - int_valuation(a.denom(), &self.p_big) as i64)
    }

    pub fn is_unit(&self, a: &PLocal) -> bool {
        self.valuation(a) == Some(0)
    }

    pub fn p_power(&self, k: u32) -> PLocal {
        PLocal::from_int(self.p_big.pow(k))
    }

    /// Splits a nonzero `a` as `p^k * u` with `u` a unit.
    pub fn unit_part(&self, a: &PLocal) -> Option<(u32, PLocal)> {
        let k = self.valuation(a)?;
        let u = a.checked_div(&self.p_power(k)).expect("p^k is nonzero");
        Some((k, u))
    }

    /// Canonical representative of `a` modulo p, in `0..p`.
    pub fn reduce_mod_p(&self, a: &PLocal) -> PLocal {
        PLocal::from_int(self.residue(a))
    }

    /// Residue class of `a` in Z/p as an integer in `0..p`.
    pub fn residue(&self, a: &PLocal) -> BigInt {
        debug_assert!(self.is_local(a));
        let num = a.numer().mod_floor(&self.p_big);
        let den = a.denom().mod_floor(&self.p_big);
        // den is invertible mod p; Fermat inverse.
        let inv = den.modpow(&(&self.p_big - 2u32), &self.p_big);
        (num * inv).mod_floor(&self.p_big)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64) -> PLocalRing {
        PLocalRing::new(p).unwrap()
    }

    #[test]
    fn half_plus_half() {
        let r = ring(3);
        let h = r.scalar(1, 2).unwrap();
        assert_eq!(r.arith(&h, &h, ScalarOp::Add).unwrap(), PLocal::one());
    }

    #[test]
    fn one_over_p_is_not_local() {
        let r = ring(3);
        let err = r.arith(&PLocal::one(), &PLocal::from(3), ScalarOp::Div).unwrap_err();
        assert!(matches!(err, LinalgError::NotPLocal(_)));
        assert!(matches!(
            r.div(&PLocal::one(), &PLocal::zero()),
            Err(LinalgError::DivisionByZero)
        ));
    }

    #[test]
    fn exact_cancellation() {
        let r = ring(3);
        let a = r.scalar(2, 5).unwrap();
        let b = r.scalar(5, 4).unwrap();
        assert_eq!(r.arith(&a, &b, ScalarOp::Mul).unwrap(), PLocal::new(1, 2));
    }

    #[test]
    fn valuations() {
        assert_eq!(ring(5).valuation(&PLocal::zero()), None);
        assert_eq!(ring(3).valuation(&PLocal::from(30)), Some(1));
        assert_eq!(ring(3).valuation(&PLocal::new(9, 2)), Some(2));
        assert_eq!(ring(3).rational_valuation(&PLocal::new(2, 9)), Some(-2));
    }

    #[test]
    fn zero_is_canonical() {
        let z = PLocal::new(0, 7);
        assert_eq!(z.numer(), &BigInt::from(0));
        assert_eq!(z.denom(), &BigInt::from(1));
        assert_eq!(z, PLocal::zero());
    }

    #[test]
    fn residues() {
        let r = ring(5);
        assert_eq!(r.reduce_mod_p(&PLocal::new(1, 2)), PLocal::from(3));
        assert_eq!(r.reduce_mod_p(&PLocal::from(-1)), PLocal::from(4));
        assert_eq!(r.reduce_mod_p(&PLocal::from(10)), PLocal::zero());
    }

    #[test]
    fn rejects_composites() {
        assert!(PLocalRing::new(9).is_err());
        assert!(PLocalRing::new(1).is_err());
        assert!(PLocalRing::new(7).is_ok());
    }
}
