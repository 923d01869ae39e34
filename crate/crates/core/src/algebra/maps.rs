//! Ring maps between the three alphabets, the formal divergence and the
//! symmetric-function dictionary.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;

use super::{AlgebraError, Alphabet, GradedPoly};
use crate::plocal::PLocal;

fn require(f: &GradedPoly, alphabet: Alphabet) -> Result<(), AlgebraError> {
    if f.alphabet() == alphabet {
        Ok(())
    } else {
        Err(AlgebraError::WrongAlphabet {
            expected: alphabet,
            found: f.alphabet(),
        })
    }
}

fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let mut acc = BigInt::from(1);
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn factorial(m: u32) -> BigInt {
    (1..=m).fold(BigInt::from(1), |acc, i| acc * BigInt::from(i))
}

/// `sigma_i` over the given (1-based) variables of an alphabet with `nvars`
/// slots. `sigma_0 = 1`, and `sigma_i = 0` once `i` exceeds the variable count.
pub fn elementary_symmetric(alphabet: Alphabet, nvars: usize, i: usize, vars: &[usize]) -> GradedPoly {
    let deg = match alphabet {
        Alphabet::Chern => panic!("elementary symmetric polynomials live in the torus alphabets"),
        _ => 2 * i as u32,
    };
    // sigma_j(vars[..k+1]) = sigma_j(vars[..k]) + x_k * sigma_{j-1}(vars[..k])
    let mut table: Vec<GradedPoly> = (0..=i)
        .map(|j| {
            if j == 0 {
                GradedPoly::one(alphabet, nvars)
            } else {
                GradedPoly::zero(alphabet, nvars, 2 * j as u32)
            }
        })
        .collect();
    for &v in vars {
        let mut exps = vec![0; nvars];
        exps[v - 1] = 1;
        let x = GradedPoly::term(alphabet, exps, PLocal::one());
        for j in (1..=i).rev() {
            let prod = table[j - 1].mul(&x).expect("same alphabet");
            table[j] = table[j].add(&prod).expect("same degree");
        }
    }
    let out = table.pop().expect("nonempty table");
    debug_assert_eq!(out.degree(), deg);
    out
}

/// Elementary symmetric polynomials `sigma_0..sigma_n` of an alphabet,
/// cached for repeated substitution.
struct SigmaTable {
    sigma: Vec<GradedPoly>,
}

impl SigmaTable {
    fn new(alphabet: Alphabet, nvars: usize, vars: &[usize], top: usize) -> Self {
        SigmaTable {
            sigma: (0..=top).map(|i| elementary_symmetric(alphabet, nvars, i, vars)).collect(),
        }
    }

    /// Substitutes `c_i -> sigma_i` into a Chern monomial.
    fn substitute(&self, chern_exps: &[u32], alphabet: Alphabet, nvars: usize) -> GradedPoly {
        let mut acc = GradedPoly::one(alphabet, nvars);
        for (i, &e) in chern_exps.iter().enumerate() {
            for _ in 0..e {
                acc = acc.mul(&self.sigma[i + 1]).expect("same alphabet");
            }
        }
        acc
    }

    fn substitute_poly(&self, f: &GradedPoly, alphabet: Alphabet, nvars: usize) -> GradedPoly {
        let mut out = GradedPoly::zero(alphabet, nvars, f.degree());
        for (e, c) in f.terms() {
            let img = self.substitute(e, alphabet, nvars);
            out.add_scaled(&img, c).expect("homogeneous image");
        }
        out
    }
}

/// Restriction to the maximal torus: `c_i -> sigma_i(v_1, .., v_n)`.
pub fn psi_star(f: &GradedPoly) -> Result<GradedPoly, AlgebraError> {
    require(f, Alphabet::Chern)?;
    let n = f.nvars();
    let vars: Vec<usize> = (1..=n).collect();
    let table = SigmaTable::new(Alphabet::Torus, n, &vars, n);
    Ok(table.substitute_poly(f, Alphabet::Torus, n))
}

/// `psi_star(f)` evaluated at `v_n = 0` and read in the primed alphabet:
/// `c_i -> sigma_i(v'_1, .., v'_{n-1})`.
pub fn psi_star_at_vn_zero(f: &GradedPoly) -> Result<GradedPoly, AlgebraError> {
    require(f, Alphabet::Chern)?;
    let n = f.nvars();
    let vars: Vec<usize> = (1..n).collect();
    let table = SigmaTable::new(Alphabet::Primed, n, &vars, n);
    Ok(table.substitute_poly(f, Alphabet::Primed, n))
}

/// Restriction along the diagonal circle: every `v_i -> v`.
pub fn b_phi_star(f: &GradedPoly) -> Result<GradedPoly, AlgebraError> {
    require(f, Alphabet::Torus)?;
    let mut out = GradedPoly::zero(Alphabet::Torus, 1, f.degree());
    for (e, c) in f.terms() {
        out.add_term(vec![e.iter().sum()], c.clone());
    }
    Ok(out)
}

/// Rewrites a torus polynomial in `v'_i = v_i - v_n` (i < n) and `v_n`.
pub fn to_primed_basis(f: &GradedPoly) -> Result<GradedPoly, AlgebraError> {
    require(f, Alphabet::Torus)?;
    Ok(shift_basis(f, Alphabet::Primed, 1))
}

/// Inverse of [`to_primed_basis`]: substitutes `v'_i = v_i - v_n`.
pub fn from_primed_basis(f: &GradedPoly) -> Result<GradedPoly, AlgebraError> {
    require(f, Alphabet::Primed)?;
    Ok(shift_basis(f, Alphabet::Torus, -1))
}

/// Substitutes `x_i -> y_i + sign * y_n` for `i < n` and `x_n -> y_n`.
fn shift_basis(f: &GradedPoly, target: Alphabet, sign: i64) -> GradedPoly {
    let n = f.nvars();
    let mut out = GradedPoly::zero(target, n, f.degree());
    for (e, c) in f.terms() {
        let mut partial: BTreeMap<Vec<u32>, PLocal> = BTreeMap::new();
        let mut start = vec![0u32; n];
        start[n - 1] = e[n - 1];
        partial.insert(start, c.clone());
        for i in 0..n - 1 {
            let a = e[i];
            if a == 0 {
                continue;
            }
            let mut next = BTreeMap::new();
            for (pe, pc) in &partial {
                for j in 0..=a {
                    // (y_i + sign*y_n)^a = sum_j C(a,j) y_i^j (sign*y_n)^(a-j)
                    let mut coeff = PLocal::from(binomial(a, j)) * pc;
                    if sign < 0 && (a - j) % 2 == 1 {
                        coeff = -coeff;
                    }
                    let mut ne = pe.clone();
                    ne[i] += j;
                    ne[n - 1] += a - j;
                    let slot: &mut PLocal = next.entry(ne).or_insert_with(PLocal::zero);
                    *slot += &coeff;
                }
            }
            partial = next;
        }
        for (pe, pc) in partial {
            out.add_term(pe, pc);
        }
    }
    out
}

/// Splits a primed polynomial as `sum_m coefficient[m] * v_n^m` with
/// coefficients free of `v_n`. Zero coefficients are omitted.
pub fn collect_by_vn(f: &GradedPoly) -> Result<BTreeMap<u32, GradedPoly>, AlgebraError> {
    require(f, Alphabet::Primed)?;
    let n = f.nvars();
    let mut out: BTreeMap<u32, GradedPoly> = BTreeMap::new();
    for (e, c) in f.terms() {
        let m = e[n - 1];
        let mut rest = e.clone();
        rest[n - 1] = 0;
        out.entry(m)
            .or_insert_with(|| GradedPoly::zero(Alphabet::Primed, n, f.degree() - 2 * m))
            .add_term(rest, c.clone());
    }
    out.retain(|_, g| !g.is_zero());
    Ok(out)
}

/// The coefficient of `v_n^m` in `to_primed_basis(f)`, computed without the
/// full expansion: by Taylor's formula in `v_n` it is
/// `(div^m f / m!)(v'_1, .., v'_{n-1}, 0)`.
pub fn primed_vn_coefficient(f: &GradedPoly, m: u32) -> Result<GradedPoly, AlgebraError> {
    require(f, Alphabet::Torus)?;
    let n = f.nvars();
    if 2 * m > f.degree() {
        return Ok(GradedPoly::zero(Alphabet::Primed, n, 0));
    }
    let mut g = f.clone();
    for _ in 0..m {
        g = divergence(&g)?;
    }
    let inv = PLocal::one().checked_div(&PLocal::from(factorial(m))).expect("m! nonzero");
    let mut out = GradedPoly::zero(Alphabet::Primed, n, g.degree());
    for (e, c) in g.terms() {
        if e[n - 1] == 0 {
            out.add_term(e.clone(), c * &inv);
        }
    }
    Ok(out)
}

/// Formal divergence `sum_i d/dv_i`.
pub fn divergence(f: &GradedPoly) -> Result<GradedPoly, AlgebraError> {
    require(f, Alphabet::Torus)?;
    let mut out = GradedPoly::zero(Alphabet::Torus, f.nvars(), f.degree().saturating_sub(2));
    for (e, c) in f.terms() {
        for i in 0..e.len() {
            if e[i] > 0 {
                let mut ne = e.clone();
                ne[i] -= 1;
                out.add_term(ne, c * &PLocal::from(e[i] as i64));
            }
        }
    }
    Ok(out)
}

/// The derivation of `Z[c_1..c_n]` with `c_k -> (n-k+1) c_{k-1}`, `c_0 = 1`.
/// It is the divergence pulled back along [`psi_star`].
pub fn chern_divergence(f: &GradedPoly) -> Result<GradedPoly, AlgebraError> {
    require(f, Alphabet::Chern)?;
    let n = f.nvars();
    let mut out = GradedPoly::zero(Alphabet::Chern, n, f.degree().saturating_sub(2));
    for (e, c) in f.terms() {
        for k in 1..=n {
            let ek = e[k - 1];
            if ek == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[k - 1] -= 1;
            if k > 1 {
                ne[k - 2] += 1;
            }
            let factor = PLocal::from((ek as i64) * (n as i64 - k as i64 + 1));
            out.add_term(ne, c * &factor);
        }
    }
    Ok(out)
}

fn permutation_count(sorted: &[u32]) -> u128 {
    let n = sorted.len() as u128;
    let mut total: u128 = (1..=n).product();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let mult = (j - i) as u128;
        total /= (1..=mult).product::<u128>();
        i = j;
    }
    total
}

/// True when the polynomial is invariant under permuting the variables.
pub fn is_symmetric(f: &GradedPoly) -> bool {
    if f.alphabet() != Alphabet::Torus {
        return false;
    }
    let mut orbits: HashMap<Vec<u32>, (u128, &PLocal)> = HashMap::new();
    for (e, c) in f.terms() {
        let mut key = e.clone();
        key.sort_unstable_by(|a, b| b.cmp(a));
        match orbits.get_mut(&key) {
            Some((count, coeff)) => {
                if *coeff != c {
                    return false;
                }
                *count += 1;
            }
            None => {
                orbits.insert(key, (1, c));
            }
        }
    }
    orbits.iter().all(|(key, (count, _))| *count == permutation_count(key))
}

/// Writes a symmetric torus polynomial in the elementary symmetric
/// polynomials, i.e. as a Chern polynomial `g` with `psi_star(g) == f`.
///
/// Reduction by leading monomials in lex order: a leading exponent vector
/// `lambda` (non-increasing for symmetric input) is cancelled by
/// `prod_j sigma_j^(lambda_j - lambda_{j+1})`.
pub fn express_symmetric_in_c(f: &GradedPoly) -> Result<GradedPoly, AlgebraError> {
    require(f, Alphabet::Torus)?;
    if !is_symmetric(f) {
        return Err(AlgebraError::NotSymmetric);
    }
    let n = f.nvars();
    let vars: Vec<usize> = (1..=n).collect();
    let table = SigmaTable::new(Alphabet::Torus, n, &vars, n);
    let mut rest = f.clone();
    let mut out = GradedPoly::zero(Alphabet::Chern, n, f.degree());
    while let Some((lead, c)) = rest.leading() {
        let lead = lead.clone();
        let c = c.clone();
        if lead.windows(2).any(|w| w[0] < w[1]) {
            return Err(AlgebraError::NotExpressible);
        }
        let chern_exps: Vec<u32> = (0..n)
            .map(|j| lead[j] - if j + 1 < n { lead[j + 1] } else { 0 })
            .collect();
        let img = table.substitute(&chern_exps, Alphabet::Torus, n);
        rest.add_scaled(&img, &-&c)?;
        out.add_term(chern_exps, c);
    }
    Ok(out)
}
