//! Monomial bases of the fiber rows.

use std::cmp::Ordering;

/// Partitions of `total` into parts `<= max_part`, each listed in ascending
/// order, sorted by [`chern_order`].
pub fn partitions(total: u32, max_part: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill(total, 1, max_part.min(total.max(1)), &mut current, &mut out);
    out.sort_by(|a, b| chern_order(a, b));
    out
}

fn fill(rest: u32, min_part: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if rest == 0 {
        out.push(current.clone());
        return;
    }
    for part in min_part..=max_part.min(rest) {
        current.push(part);
        fill(rest - part, part, max_part, current, out);
        current.pop();
    }
}

/// Total order on ascending part lists: fewer parts first; with equally many
/// parts, compare at the first differing position, smaller part first.
pub fn chern_order(a: &[u32], b: &[u32]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

/// Exponent vectors of total degree `total` in `nvars` variables, lex
/// descending.
pub fn exponent_vectors(total: u32, nvars: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut current = vec![0; nvars];
    compositions(total, 0, &mut current, &mut out);
    out
}

fn compositions(rest: u32, idx: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if idx + 1 == current.len() {
        current[idx] = rest;
        out.push(current.clone());
        return;
    }
    for e in (0..=rest).rev() {
        current[idx] = e;
        compositions(rest - e, idx + 1, current, out);
    }
    current[idx] = 0;
}
