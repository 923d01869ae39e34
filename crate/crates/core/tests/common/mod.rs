//! Checks shared by the property suites and the acceptance run.
#![allow(dead_code)]

use bpu_core::algebra::{
    chern_divergence, divergence, express_symmetric_in_c, partitions, psi_star, Alphabet, GradedPoly,
};
use bpu_core::plocal::{smith_normal_form, PLocal, PLocalMatrix, PLocalRing};
use rand::Rng;

pub const PRIMES: [u64; 3] = [3, 5, 7];

/// A random p-local matrix: small integers, some scaled by powers of p, some
/// divided by units.
pub fn random_matrix(rng: &mut impl Rng, p: u64, rows: usize, cols: usize) -> PLocalMatrix {
    let mut m = PLocalMatrix::zeros(rows, cols);
    let sparse = rng.gen_bool(0.3);
    for i in 0..rows {
        for j in 0..cols {
            if sparse && rng.gen_bool(0.6) {
                continue;
            }
            let num = rng.gen_range(-9i64..=9) * (p as i64).pow(rng.gen_range(0..3));
            let mut den = rng.gen_range(1i64..=4);
            if den as u64 % p == 0 {
                den += 1;
            }
            m.set(i, j, PLocal::new(num, den));
        }
    }
    m
}

pub fn check_snf(ring: &PLocalRing, a: &PLocalMatrix) -> Result<(), String> {
    let f = smith_normal_form(ring, a);
    if f.u.mul(a).mul(&f.v) != f.d {
        return Err("u a v != d".into());
    }
    if !ring.is_unit(&f.u.determinant()) || !ring.is_unit(&f.v.determinant()) {
        return Err("transform determinant is not a unit".into());
    }
    if f.u.mul(&f.u_inv) != PLocalMatrix::identity(a.rows()) || f.v.mul(&f.v_inv) != PLocalMatrix::identity(a.cols()) {
        return Err("stored inverses are wrong".into());
    }
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let x = f.d.get(i, j);
            let want = match f.exponents.get(i) {
                Some(&k) if i == j => ring.p_power(k),
                _ => PLocal::zero(),
            };
            if *x != want {
                return Err(format!("d[{i}][{j}] = {x}, expected {want}"));
            }
        }
    }
    if f.exponents.windows(2).any(|w| w[0] > w[1]) {
        return Err("diagonal does not form a divisibility chain".into());
    }
    Ok(())
}

/// A random Chern polynomial of degree `2k` in `n` variables.
pub fn random_chern(rng: &mut impl Rng, n: usize, k: u32) -> GradedPoly {
    let mut f = GradedPoly::zero(Alphabet::Chern, n, 2 * k);
    for parts in partitions(k, n as u32) {
        if rng.gen_bool(0.5) {
            continue;
        }
        let c = PLocal::new(rng.gen_range(-6i64..=6), rng.gen_range(1i64..=3));
        let parts: Vec<usize> = parts.iter().map(|&i| i as usize).collect();
        f = f.add(&GradedPoly::chern_product(n, &parts).scale(&c)).unwrap();
    }
    f
}

/// A random torus polynomial of degree `2k` in `n` variables.
pub fn random_torus(rng: &mut impl Rng, n: usize, k: u32) -> GradedPoly {
    let mut f = GradedPoly::zero(Alphabet::Torus, n, 2 * k);
    for e in bpu_core::algebra::exponent_vectors(k, n) {
        if rng.gen_bool(0.6) {
            continue;
        }
        let c = PLocal::from(rng.gen_range(-5i64..=5));
        f = f.add(&GradedPoly::term(Alphabet::Torus, e, c)).unwrap();
    }
    f
}

pub fn check_psi_star(f: &GradedPoly, g: &GradedPoly) -> Result<(), String> {
    let lhs = psi_star(&f.mul(g).unwrap()).unwrap();
    let rhs = psi_star(f).unwrap().mul(&psi_star(g).unwrap()).unwrap();
    if lhs != rhs {
        return Err(format!("psi_star not multiplicative on {} * {}", f.render(), g.render()));
    }
    if f.degree() == g.degree() {
        let lhs = psi_star(&f.add(g).unwrap()).unwrap();
        let rhs = psi_star(f).unwrap().add(&psi_star(g).unwrap()).unwrap();
        if lhs != rhs {
            return Err("psi_star not additive".into());
        }
    }
    let back = express_symmetric_in_c(&psi_star(f).unwrap()).map_err(|e| e.to_string())?;
    if &back != f {
        return Err(format!("express(psi({})) = {}", f.render(), back.render()));
    }
    Ok(())
}

pub fn check_divergence(f: &GradedPoly, g: &GradedPoly) -> Result<(), String> {
    let lhs = divergence(&f.mul(g).unwrap()).unwrap();
    let rhs = divergence(f)
        .unwrap()
        .mul(g)
        .unwrap()
        .add(&f.mul(&divergence(g).unwrap()).unwrap())
        .unwrap();
    if lhs != rhs {
        return Err(format!("Leibniz rule fails on {} * {}", f.render(), g.render()));
    }
    Ok(())
}

/// `chern_divergence` is the divergence seen through `psi_star`.
pub fn check_chern_divergence(f: &GradedPoly) -> Result<(), String> {
    let lhs = psi_star(&chern_divergence(f).unwrap()).unwrap();
    let rhs = divergence(&psi_star(f).unwrap()).unwrap();
    if lhs != rhs {
        return Err(format!("divergence does not commute with psi_star on {}", f.render()));
    }
    Ok(())
}
