use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use super::AlgebraError;
use crate::plocal::{PLocal, PLocalRing};

/// Which polynomial ring a monomial lives in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Alphabet {
    /// Chern classes `c_1..c_n`, `|c_i| = 2i`.
    Chern,
    /// Torus classes `v_1..v_n`, `|v_i| = 2`. With one variable this is the
    /// ring Z[v] of the path fibration.
    Torus,
    /// `v'_1..v'_{n-1}` (where `v'_i = v_i - v_n`) together with `v_n`, which
    /// occupies the last slot.
    Primed,
}

static TRUNCATED_CHERN: AtomicU64 = AtomicU64::new(0);

/// Number of times a Chern class `c_i` with `i > n` was requested and
/// replaced by zero.
pub fn truncated_chern_count() -> u64 {
    TRUNCATED_CHERN.load(Ordering::Relaxed)
}

/// A monomial over one of the three alphabets. `exponents[i]` is the exponent
/// of the `(i+1)`-th variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial {
    pub alphabet: Alphabet,
    pub exponents: Vec<u32>,
}

pub(crate) fn exps_degree(alphabet: Alphabet, exps: &[u32]) -> u32 {
    match alphabet {
        Alphabet::Chern => exps.iter().enumerate().map(|(i, &e)| 2 * (i as u32 + 1) * e).sum(),
        Alphabet::Torus | Alphabet::Primed => exps.iter().map(|&e| 2 * e).sum(),
    }
}

impl Monomial {
    pub fn new(alphabet: Alphabet, exponents: Vec<u32>) -> Self {
        Monomial { alphabet, exponents }
    }

    pub fn one(alphabet: Alphabet, nvars: usize) -> Self {
        Monomial::new(alphabet, vec![0; nvars])
    }

    /// Chern monomial `c_{i_1} ... c_{i_l}` from its parts.
    pub fn chern_from_parts(nvars: usize, parts: &[u32]) -> Self {
        let mut exps = vec![0; nvars];
        for &i in parts {
            assert!(i >= 1 && (i as usize) <= nvars, "c_{i} does not exist for n = {nvars}");
            exps[i as usize - 1] += 1;
        }
        Monomial::new(Alphabet::Chern, exps)
    }

    /// Parts of a Chern monomial in ascending order.
    pub fn chern_parts(&self) -> Vec<u32> {
        let mut parts = Vec::new();
        for (i, &e) in self.exponents.iter().enumerate() {
            for _ in 0..e {
                parts.push(i as u32 + 1);
            }
        }
        parts
    }

    pub fn degree(&self) -> u32 {
        exps_degree(self.alphabet, &self.exponents)
    }

    pub fn nvars(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_one(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    pub fn render(&self) -> String {
        render_monomial(self.alphabet, &self.exponents)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

fn render_monomial(alphabet: Alphabet, exps: &[u32]) -> String {
    let n = exps.len();
    let mut out = String::new();
    let mut push = |name: String, e: u32| {
        if e == 1 {
            out.push_str(&name);
        } else if e > 1 {
            out.push_str(&format!("{name}^{e}"));
        }
    };
    match alphabet {
        Alphabet::Chern => {
            for (i, &e) in exps.iter().enumerate().rev() {
                push(format!("c_{}", i + 1), e);
            }
        }
        Alphabet::Torus if n == 1 => push("v".to_string(), exps[0]),
        Alphabet::Torus => {
            for (i, &e) in exps.iter().enumerate() {
                push(format!("v_{}", i + 1), e);
            }
        }
        Alphabet::Primed => {
            for (i, &e) in exps.iter().enumerate() {
                if i + 1 == n {
                    push(format!("v_{n}"), e);
                } else {
                    push(format!("v'_{}", i + 1), e);
                }
            }
        }
    }
    if out.is_empty() {
        "1".to_string()
    } else {
        out
    }
}

/// Sparse homogeneous polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq)]
pub struct GradedPoly {
    alphabet: Alphabet,
    nvars: usize,
    degree: u32,
    terms: BTreeMap<Vec<u32>, PLocal>,
}

impl GradedPoly {
    pub fn zero(alphabet: Alphabet, nvars: usize, degree: u32) -> Self {
        GradedPoly {
            alphabet,
            nvars,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(alphabet: Alphabet, nvars: usize) -> Self {
        Self::constant(alphabet, nvars, PLocal::one())
    }

    pub fn constant(alphabet: Alphabet, nvars: usize, c: PLocal) -> Self {
        let mut p = Self::zero(alphabet, nvars, 0);
        p.add_term(vec![0; nvars], c);
        p
    }

    pub fn from_monomial(m: &Monomial, c: PLocal) -> Self {
        let mut p = Self::zero(m.alphabet, m.nvars(), m.degree());
        p.add_term(m.exponents.clone(), c);
        p
    }

    pub fn term(alphabet: Alphabet, exps: Vec<u32>, c: PLocal) -> Self {
        let degree = exps_degree(alphabet, &exps);
        let mut p = Self::zero(alphabet, exps.len(), degree);
        p.add_term(exps, c);
        p
    }

    /// The Chern class `c_i` in `H*(BU_n)`; `c_0 = 1` and `c_i = 0` for `i > n`.
    pub fn chern(n: usize, i: usize) -> Self {
        if i == 0 {
            return Self::one(Alphabet::Chern, n);
        }
        if i > n {
            TRUNCATED_CHERN.fetch_add(1, Ordering::Relaxed);
            return Self::zero(Alphabet::Chern, n, 2 * i as u32);
        }
        let mut exps = vec![0; n];
        exps[i - 1] = 1;
        Self::term(Alphabet::Chern, exps, PLocal::one())
    }

    /// Product `c_{i_1} ... c_{i_l}`, zero if some part exceeds `n`.
    pub fn chern_product(n: usize, parts: &[usize]) -> Self {
        let mut acc = Self::one(Alphabet::Chern, n);
        for &i in parts {
            acc = acc.mul(&Self::chern(n, i)).expect("same alphabet");
        }
        acc
    }

    /// The variable `v_i` (1-based) of the torus alphabet in `n` variables.
    pub fn torus_var(n: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= n);
        let mut exps = vec![0; n];
        exps[i - 1] = 1;
        Self::term(Alphabet::Torus, exps, PLocal::one())
    }

    /// `v'_i` for `i < n`, or `v_n` for `i == n`, in the primed alphabet.
    pub fn primed_var(n: usize, i: usize) -> Self {
        assert!(i >= 1 && i <= n);
        let mut exps = vec![0; n];
        exps[i - 1] = 1;
        Self::term(Alphabet::Primed, exps, PLocal::one())
    }

    pub(crate) fn add_term(&mut self, exps: Vec<u32>, c: PLocal) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(exps.len(), self.nvars);
        debug_assert_eq!(exps_degree(self.alphabet, &exps), self.degree, "inhomogeneous term");
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += &c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &PLocal)> {
        self.terms.iter()
    }

    pub fn monomials(&self) -> impl Iterator<Item = (Monomial, &PLocal)> {
        let a = self.alphabet;
        self.terms.iter().map(move |(e, c)| (Monomial::new(a, e.clone()), c))
    }

    pub fn coeff(&self, exps: &[u32]) -> PLocal {
        self.terms.get(exps).cloned().unwrap_or_else(PLocal::zero)
    }

    pub fn coeff_of(&self, m: &Monomial) -> PLocal {
        debug_assert_eq!(m.alphabet, self.alphabet);
        self.coeff(&m.exponents)
    }

    /// Lexicographically largest monomial (graded lex, as all terms share
    /// one degree).
    pub fn leading(&self) -> Option<(&Vec<u32>, &PLocal)> {
        self.terms.iter().next_back()
    }

    fn check_compatible(&self, other: &GradedPoly) -> Result<(), AlgebraError> {
        if self.alphabet != other.alphabet || self.nvars != other.nvars {
            return Err(AlgebraError::AlphabetMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &GradedPoly) -> Result<GradedPoly, AlgebraError> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            return Err(AlgebraError::DegreeMismatch(self.degree, other.degree));
        }
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &GradedPoly) -> Result<GradedPoly, AlgebraError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &GradedPoly) -> Result<GradedPoly, AlgebraError> {
        self.check_compatible(other)?;
        let mut out = GradedPoly::zero(self.alphabet, self.nvars, self.degree + other.degree);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> GradedPoly {
        let mut acc = GradedPoly::one(self.alphabet, self.nvars);
        for _ in 0..e {
            acc = acc.mul(self).expect("same alphabet");
        }
        acc
    }

    pub fn scale(&self, c: &PLocal) -> GradedPoly {
        let mut out = GradedPoly::zero(self.alphabet, self.nvars, self.degree);
        if c.is_zero() {
            return out;
        }
        for (e, x) in &self.terms {
            out.terms.insert(e.clone(), x * c);
        }
        out
    }

    pub fn neg(&self) -> GradedPoly {
        self.scale(&PLocal::from(-1))
    }

    /// Adds `c * other` in place.
    pub fn add_scaled(&mut self, other: &GradedPoly, c: &PLocal) -> Result<(), AlgebraError> {
        self.check_compatible(other)?;
        if other.is_zero() || c.is_zero() {
            return Ok(());
        }
        if self.degree != other.degree {
            return Err(AlgebraError::DegreeMismatch(self.degree, other.degree));
        }
        for (e, x) in &other.terms {
            self.add_term(e.clone(), x * c);
        }
        Ok(())
    }

    /// Reduces every coefficient to its residue in `0..p`.
    pub fn reduce_mod_p(&self, ring: &PLocalRing) -> GradedPoly {
        let mut out = GradedPoly::zero(self.alphabet, self.nvars, self.degree);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), ring.reduce_mod_p(c));
        }
        out
    }

    /// True when all coefficients lie in Z_(p).
    pub fn is_local(&self, ring: &PLocalRing) -> bool {
        self.terms.values().all(|c| ring.is_local(c))
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (e, c)) in self.terms.iter().rev().enumerate() {
            let mono = render_monomial(self.alphabet, e);
            let neg = c.numer().sign() == num_bigint::Sign::Minus;
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            match (mag.is_one(), mono.as_str()) {
                (true, m) => out.push_str(m),
                (false, "1") => out.push_str(&mag.to_string()),
                (false, m) if mag.is_integer() => out.push_str(&format!("{mag}{m}")),
                (false, m) => out.push_str(&format!("({mag}){m}")),
            }
        }
        out
    }
}

impl fmt::Debug for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Display for GradedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}
