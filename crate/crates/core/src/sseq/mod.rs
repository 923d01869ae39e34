//! Pages of the p-local Serre spectral sequences as presented Z_(p)-modules.
//!
//! An entry `E_r^{s,t}` is stored as a subquotient `Z_r / B_r` of its `E_2`
//! term: `Z_r` by a basis of cycles and `B_r` by generators, both as columns
//! in `E_2` coordinates. Torsion rows start with `B_2 = p * E_2`.

mod engine;
mod report;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, GradedPoly, Monomial};
use crate::plocal::{
    cokernel_iso_type, smith_normal_form, solve_many, IsoType, LinalgError, PLocal, PLocalMatrix, PLocalRing,
};

pub use engine::{
    build_e2, build_e2_with, compute, default_t_max, turn_page, validate, AxiomUse, Computation, ConsistencyCheck, EngineConfig,
    PageSnapshot, UnresolvedPolicy,
};
pub use report::{assemble_report, split_n, CohomologyReport, DegreeReport, DegreeStatus};

/// The three fibrations over K(Z,3): the projective unitary one, its maximal
/// torus, and the path fibration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sequence {
    U,
    T,
    K,
}

impl fmt::Display for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Sequence::U => "U",
            Sequence::T => "T",
            Sequence::K => "K",
        };
        write!(f, "{s}")
    }
}

/// Generators of `H*(K(Z,3))_(p)` in degrees up to `2p+8`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KZ3Class {
    Unit,
    X1,
    Yp0,
    X1Yp0,
}

impl KZ3Class {
    pub const ALL: [KZ3Class; 4] = [KZ3Class::Unit, KZ3Class::X1, KZ3Class::Yp0, KZ3Class::X1Yp0];

    pub fn degree(self, p: u64) -> u32 {
        let p = p as u32;
        match self {
            KZ3Class::Unit => 0,
            KZ3Class::X1 => 3,
            KZ3Class::Yp0 => 2 * p + 2,
            KZ3Class::X1Yp0 => 2 * p + 5,
        }
    }

    /// `Some(p)` for the `Z/p` classes, `None` for the `Z_(p)` ones.
    pub fn torsion_order(self, p: u64) -> Option<u64> {
        match self {
            KZ3Class::Unit | KZ3Class::X1 => None,
            KZ3Class::Yp0 | KZ3Class::X1Yp0 => Some(p),
        }
    }

    pub fn is_torsion(self) -> bool {
        matches!(self, KZ3Class::Yp0 | KZ3Class::X1Yp0)
    }

    pub fn at_column(s: u32, p: u64) -> Option<KZ3Class> {
        KZ3Class::ALL.into_iter().find(|c| c.degree(p) == s)
    }

    pub fn render(self, p: u64) -> String {
        match self {
            KZ3Class::Unit => String::new(),
            KZ3Class::X1 => "x_1".into(),
            KZ3Class::Yp0 => format!("y_{{{p},0}}"),
            KZ3Class::X1Yp0 => format!("x_1y_{{{p},0}}"),
        }
    }
}

/// Nonzero columns `s` of every `E_2` page in the window.
pub fn columns(p: u64) -> [u32; 4] {
    KZ3Class::ALL.map(|c| c.degree(p))
}

/// Pages on which some differential between two columns can be nonzero.
pub fn relevant_pages(p: u64) -> Vec<u32> {
    let cols = columns(p);
    let mut pages: Vec<u32> = cols
        .iter()
        .flat_map(|&a| cols.iter().filter(move |&&b| b > a).map(move |&b| b - a))
        .filter(|&r| r >= 2)
        .collect();
    pages.sort_unstable();
    pages.dedup();
    pages
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bidegree {
    pub s: u32,
    pub t: u32,
}

impl Bidegree {
    pub fn new(s: u32, t: u32) -> Self {
        Bidegree { s, t }
    }

    pub fn total(self) -> u32 {
        self.s + self.t
    }

    /// Target of `d_r`, if it has nonnegative `t`.
    pub fn shifted(self, r: u32) -> Option<Bidegree> {
        (self.t + 1).checked_sub(r).map(|t| Bidegree::new(self.s + r, t))
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.s, self.t)
    }
}

/// `E_2` generator: a fiber monomial tensored with a base class.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GeneratorLabel {
    pub fiber: Monomial,
    pub base: KZ3Class,
}

impl GeneratorLabel {
    pub fn bidegree(&self, p: u64) -> Bidegree {
        Bidegree::new(self.base.degree(p), self.fiber.degree())
    }

    pub fn render(&self, p: u64) -> String {
        let fiber = self.fiber.render();
        let base = self.base.render(p);
        match (fiber.as_str(), base.is_empty()) {
            ("1", true) => "1".into(),
            ("1", false) => base,
            (f, _) => format!("{f}{base}"),
        }
    }
}

/// An element of an `E_2` column: fiber polynomial times a base class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Class {
    pub fiber: GradedPoly,
    pub base: KZ3Class,
}

impl Class {
    pub fn new(fiber: GradedPoly, base: KZ3Class) -> Self {
        Class { fiber, base }
    }

    pub fn is_zero(&self) -> bool {
        self.fiber.is_zero()
    }

    pub fn render(&self, p: u64) -> String {
        if self.fiber.is_zero() {
            return "0".into();
        }
        let base = self.base.render(p);
        if base.is_empty() {
            return self.fiber.render();
        }
        if self.fiber.len() == 1 {
            let f = self.fiber.render();
            return if f == "1" { base } else { format!("{f}{base}") };
        }
        format!("({}){}", self.fiber.render(), base)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Page {
    Finite(u32),
    Infinity,
}

impl fmt::Display for Page {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Page::Finite(r) => write!(f, "{r}"),
            Page::Infinity => write!(f, "inf"),
        }
    }
}

/// How a computed entry relates to the true one when some differential
/// touching it could not be resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Bound {
    Exact,
    /// The true entry is a quotient of the computed one (an incoming
    /// differential is unknown).
    QuotientOf,
    /// The true entry is a submodule of the computed one (an outgoing
    /// differential is unknown).
    SubmoduleOf,
    Subquotient,
}

impl Bound {
    pub fn with_unknown_incoming(self) -> Bound {
        match self {
            Bound::Exact | Bound::QuotientOf => Bound::QuotientOf,
            _ => Bound::Subquotient,
        }
    }

    pub fn with_unknown_outgoing(self) -> Bound {
        match self {
            Bound::Exact | Bound::SubmoduleOf => Bound::SubmoduleOf,
            _ => Bound::Subquotient,
        }
    }
}

/// Declared external inputs the engine may use to settle differentials it
/// has no rule for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axiom {
    /// `_pH^{2p+5}(BPU_p) = Z/p`, detected by `y_{p,0} x_1` surviving; carried
    /// to every `n` divisible by `p` along the block-diagonal inclusion.
    Vistoli,
}

impl Axiom {
    pub fn name(self) -> &'static str {
        match self {
            Axiom::Vistoli => "vistoli",
        }
    }

    pub fn statement(self) -> &'static str {
        match self {
            Axiom::Vistoli => "_pH^{2p+5}(BPU_n) is nonzero for p | n, detected by survival of y_{p,0}x_1",
        }
    }
}

/// Where the matrix of a differential came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Rule(String),
    /// Source or target is already zero on this page.
    Trivial,
    AssumedZero(String),
    Axiom(Axiom),
    Unresolved(String),
}

impl Provenance {
    pub fn is_resolved(&self) -> bool {
        !matches!(self, Provenance::Unresolved(_))
    }

    pub fn render(&self) -> String {
        match self {
            Provenance::Rule(name) => format!("rule: {name}"),
            Provenance::Trivial => "zero: trivial source or target".into(),
            Provenance::AssumedZero(why) => format!("assumed zero: {why}"),
            Provenance::Axiom(a) => format!("axiom: {}", a.name()),
            Provenance::Unresolved(why) => format!("unresolved: {why}"),
        }
    }
}

/// One spot `E_r^{s,t}`.
#[derive(Clone, Debug)]
pub struct PageEntry {
    pub sequence: Sequence,
    pub page: Page,
    pub bidegree: Bidegree,
    /// `E_2` generators; coordinates below refer to this list.
    pub basis: Vec<GeneratorLabel>,
    /// Basis of the cycles `Z_r`, as columns.
    pub cycles: PLocalMatrix,
    /// Generators of the boundaries `B_r`, as columns. Always inside `Z_r`.
    pub boundaries: PLocalMatrix,
    pub bound: Bound,
    /// False for entries just past the window, whose outgoing differentials
    /// are not computed.
    pub outgoing_known: bool,
}

impl PageEntry {
    pub fn s(&self) -> u32 {
        self.bidegree.s
    }

    pub fn t(&self) -> u32 {
        self.bidegree.t
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn base(&self) -> KZ3Class {
        self.basis.first().map_or(KZ3Class::Unit, |g| g.base)
    }

    /// Relations among the cycle generators: `boundaries = cycles * relations`.
    pub fn relations(&self, ring: &PLocalRing) -> PLocalMatrix {
        solve_many(ring, &self.cycles, &self.boundaries).expect("boundaries lie inside the cycles")
    }

    pub fn iso_type(&self, ring: &PLocalRing) -> IsoType {
        cokernel_iso_type(ring, &self.relations(ring))
    }

    /// Generators of `Z_r / B_r` after diagonalizing the relations, with
    /// their orders: `Some(k)` for `Z/p^k`, `None` for free summands.
    pub fn minimal_generators(&self, ring: &PLocalRing) -> Vec<(Vec<PLocal>, Option<u32>)> {
        let rel = self.relations(ring);
        let snf = smith_normal_form(ring, &rel);
        let lifts = self.cycles.mul(&snf.u_inv);
        let mut out = Vec::new();
        for i in 0..lifts.cols() {
            let order = snf.exponents.get(i).copied();
            if order == Some(0) {
                continue;
            }
            out.push((lifts.column(i), order));
        }
        out
    }

    /// The class with the given `E_2` coordinates.
    pub fn class_of(&self, coords: &[PLocal]) -> Class {
        let first = &self.basis[0].fiber;
        let mut fiber = GradedPoly::zero(first.alphabet, first.nvars(), self.t());
        for (g, c) in self.basis.iter().zip(coords) {
            fiber.add_term(g.fiber.exponents.clone(), c.clone());
        }
        Class::new(fiber, self.base())
    }

    /// `E_2` coordinates of a class, or `None` if it has a monomial outside
    /// this entry's basis.
    pub fn coordinates_of(&self, class: &Class) -> Option<Vec<PLocal>> {
        let mut coords = vec![PLocal::zero(); self.dim()];
        if class.is_zero() {
            return Some(coords);
        }
        if class.base != self.base() {
            return None;
        }
        for (exps, c) in class.fiber.terms() {
            let idx = self.basis.iter().position(|g| &g.fiber.exponents == exps)?;
            coords[idx] = c.clone();
        }
        Some(coords)
    }

    pub fn render_coords(&self, coords: &[PLocal], p: u64) -> String {
        self.class_of(coords).render(p)
    }
}

/// A differential `d_r` between two entries of one page.
#[derive(Clone, Debug)]
pub struct DifferentialMap {
    pub sequence: Sequence,
    pub r: u32,
    pub source: Bidegree,
    pub target: Bidegree,
    /// Images of the source cycle basis, as columns in target `E_2`
    /// coordinates. `None` unless the provenance is a rule.
    pub matrix: Option<PLocalMatrix>,
    /// The source cycle basis the matrix acts on.
    pub source_cycles: PLocalMatrix,
    pub target_torsion: bool,
    pub provenance: Provenance,
    /// True when the map is nonzero on `E_r`.
    pub nonzero: bool,
}

impl DifferentialMap {
    pub fn is_zero_map(&self) -> bool {
        !self.nonzero
    }
}

/// Applies a differential to a source class given by `E_2` coordinates of a
/// cycle representative. Images in torsion rows are reduced mod p.
pub fn apply_differential(
    ring: &PLocalRing,
    d: &DifferentialMap,
    class: &[PLocal],
) -> Result<Vec<PLocal>, SseqError> {
    if let Provenance::Unresolved(why) = &d.provenance {
        return Err(SseqError::UnresolvedDifferential {
            r: d.r,
            at: d.source,
            reason: why.clone(),
        });
    }
    let Some(matrix) = &d.matrix else {
        return Ok(vec![PLocal::zero(); target_dim(d)]);
    };
    let y = crate::plocal::solve_mod_image(ring, &d.source_cycles, class).ok_or(SseqError::NotACycle {
        r: d.r,
        at: d.source,
    })?;
    let mut image = matrix.mul_vec(&y);
    if d.target_torsion {
        for x in &mut image {
            *x = ring.reduce_mod_p(x);
        }
    }
    Ok(image)
}

fn target_dim(d: &DifferentialMap) -> usize {
    d.matrix.as_ref().map_or(0, PLocalMatrix::rows)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SseqError {
    #[error("p must be an odd prime, got {0}")]
    InvalidPrime(u64),
    #[error("n must be positive")]
    InvalidRank,
    #[error("t_max = {t_max} must be even and at most 2p+8 = {limit}")]
    InvalidWindow { t_max: u32, limit: u32 },
    #[error("unresolved d_{r} out of {at}: {reason}")]
    UnresolvedDifferential { r: u32, at: Bidegree, reason: String },
    #[error("class is not a cycle for d_{r} out of {at}")]
    NotACycle { r: u32, at: Bidegree },
    #[error("differential image has a monomial outside the target basis at {0}")]
    ImageOutsideTarget(Bidegree),
    #[error(transparent)]
    Rule(#[from] crate::rules::RuleError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn page_list_from_column_gaps() {
        assert_eq!(relevant_pages(3), vec![3, 5, 8, 11]);
        assert_eq!(relevant_pages(7), vec![3, 13, 16, 19]);
    }

    #[test]
    fn kz3_classes() {
        assert_eq!(KZ3Class::Yp0.degree(5), 12);
        assert_eq!(KZ3Class::X1Yp0.degree(5), 15);
        assert_eq!(KZ3Class::at_column(3, 5), Some(KZ3Class::X1));
        assert_eq!(KZ3Class::at_column(4, 5), None);
        assert_eq!(KZ3Class::X1.torsion_order(5), None);
        assert_eq!(KZ3Class::Yp0.torsion_order(5), Some(5));
    }

    #[test]
    fn shifted_bidegrees() {
        assert_eq!(Bidegree::new(0, 4).shifted(3), Some(Bidegree::new(3, 2)));
        assert_eq!(Bidegree::new(0, 0).shifted(3), None);
    }
}
