use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{
    columns, relevant_pages, Axiom, Bidegree, Bound, DifferentialMap, GeneratorLabel, KZ3Class, Page,
    PageEntry, Provenance, Sequence, SseqError,
};
use crate::exec::Exec;
use crate::plocal::{column_span_basis, is_prime, kernel_basis, solve_mod_image, PLocal, PLocalMatrix, PLocalRing};
use crate::rules::{rules_for, DifferentialRules};

/// What to do with a differential no rule or axiom determines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum UnresolvedPolicy {
    Strict,
    /// Keep going and weaken the bounds of the touched entries.
    Lenient,
}

#[derive(Clone, Debug)]
pub struct EngineConfig {
    pub sequence: Sequence,
    pub p: u64,
    pub n: usize,
    pub t_max: u32,
    pub policy: UnresolvedPolicy,
    pub axioms: BTreeSet<Axiom>,
    pub exec: Exec,
}

impl EngineConfig {
    /// Full window, lenient, with the bottom-class axiom.
    pub fn new(sequence: Sequence, p: u64, n: usize) -> Self {
        EngineConfig {
            sequence,
            p,
            n,
            t_max: default_t_max(p),
            policy: UnresolvedPolicy::Lenient,
            axioms: [Axiom::Vistoli].into_iter().collect(),
            exec: Exec::default(),
        }
    }

    pub fn without_axioms(mut self) -> Self {
        self.axioms.clear();
        self
    }

    pub fn with_policy(mut self, policy: UnresolvedPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn with_t_max(mut self, t_max: u32) -> Self {
        self.t_max = t_max;
        self
    }
}

pub fn default_t_max(p: u64) -> u32 {
    2 * p as u32 + 8
}

/// Checks `p`, `n` and the window bound; returns the ring on success.
pub fn validate(p: u64, n: usize, t_max: u32) -> Result<PLocalRing, SseqError> {
    if p == 2 || !is_prime(p) {
        return Err(SseqError::InvalidPrime(p));
    }
    if n == 0 {
        return Err(SseqError::InvalidRank);
    }
    let limit = default_t_max(p);
    if t_max % 2 != 0 || t_max > limit {
        return Err(SseqError::InvalidWindow { t_max, limit });
    }
    Ok(PLocalRing::new(p)?)
}

/// One page: every entry of the window, sorted by bidegree.
#[derive(Clone, Debug)]
pub struct PageSnapshot {
    pub page: Page,
    pub entries: Vec<PageEntry>,
}

impl PageSnapshot {
    pub fn get(&self, b: Bidegree) -> Option<&PageEntry> {
        self.entries
            .binary_search_by(|e| e.bidegree.cmp(&b))
            .ok()
            .map(|i| &self.entries[i])
    }
}

/// A failed or passed internal consistency check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsistencyCheck {
    pub name: String,
    pub r: u32,
    pub at: Bidegree,
    pub ok: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AxiomUse {
    pub axiom: Axiom,
    pub r: u32,
    pub source: Bidegree,
    pub target: Bidegree,
}

/// All pages of one sequence in one window.
#[derive(Clone, Debug)]
pub struct Computation {
    pub sequence: Sequence,
    pub p: u64,
    pub n: usize,
    pub t_max: u32,
    pub ring: PLocalRing,
    /// `E_3`, then `E_r` for each later page with a possible differential,
    /// then `E_inf`.
    pub pages: Vec<PageSnapshot>,
    pub differentials: Vec<DifferentialMap>,
    pub witnesses: Vec<(u32, Bidegree, Vec<String>)>,
    pub checks: Vec<ConsistencyCheck>,
    pub axiom_uses: Vec<AxiomUse>,
}

impl Computation {
    /// `E_r` for any `r >= 3`; pages between two stored ones are equal to the
    /// next stored one.
    pub fn page(&self, r: Page) -> &PageSnapshot {
        self.pages
            .iter()
            .find(|s| s.page >= r)
            .unwrap_or_else(|| self.pages.last().expect("at least one page"))
    }

    pub fn entry(&self, r: Page, b: Bidegree) -> Option<&PageEntry> {
        self.page(r).get(b)
    }

    pub fn infinity(&self) -> &PageSnapshot {
        self.pages.last().expect("at least one page")
    }

    pub fn unresolved(&self) -> impl Iterator<Item = &DifferentialMap> {
        self.differentials.iter().filter(|d| !d.provenance.is_resolved())
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn differential(&self, r: u32, source: Bidegree) -> Option<&DifferentialMap> {
        self.differentials.iter().find(|d| d.r == r && d.source == source)
    }
}

fn in_window(s: u32, t: u32, t_max: u32) -> bool {
    t % 2 == 0 && t <= t_max && s + t <= t_max + 1
}

/// `E_2` (equal to `E_3`) on the window of total degree `<= t_max + 1`.
pub fn build_e2(sequence: Sequence, p: u64, n: usize, t_max: u32) -> Result<Vec<PageEntry>, SseqError> {
    let ring = validate(p, n, t_max)?;
    let rules = rules_for(sequence, ring.clone(), n);
    Ok(build_e2_with(rules.as_ref(), t_max))
}

pub fn build_e2_with(rules: &dyn DifferentialRules, t_max: u32) -> Vec<PageEntry> {
    let ring = rules.ring();
    let p = ring.prime();
    let mut out = Vec::new();
    for base in KZ3Class::ALL {
        let s = base.degree(p);
        let mut t = 0;
        while in_window(s, t, t_max) {
            let basis: Vec<GeneratorLabel> = rules
                .fiber_basis(t)
                .into_iter()
                .map(|fiber| GeneratorLabel { fiber, base })
                .collect();
            let dim = basis.len();
            let boundaries = if base.is_torsion() {
                let mut b = PLocalMatrix::identity(dim);
                let pp = ring.p_power(1);
                for i in 0..dim {
                    b.set(i, i, pp.clone());
                }
                b
            } else {
                PLocalMatrix::zeros(dim, 0)
            };
            out.push(PageEntry {
                sequence: rules.sequence(),
                page: Page::Finite(2),
                bidegree: Bidegree::new(s, t),
                basis,
                cycles: PLocalMatrix::identity(dim),
                boundaries,
                bound: Bound::Exact,
                outgoing_known: s + t <= t_max,
            });
            t += 2;
        }
    }
    out.sort_by_key(|e| e.bidegree);
    out
}

fn is_zero_module(ring: &PLocalRing, e: &PageEntry) -> bool {
    e.cycles.cols() == 0 || e.iso_type(ring).is_zero()
}

fn in_span(ring: &PLocalRing, span: &PLocalMatrix, v: &[PLocal]) -> bool {
    if v.iter().all(PLocal::is_zero) {
        return true;
    }
    if span.cols() == 0 {
        return false;
    }
    solve_mod_image(ring, span, v).is_some()
}

struct Ctx<'a> {
    rules: &'a dyn DifferentialRules,
    ring: &'a PLocalRing,
    config: &'a EngineConfig,
}

impl Ctx<'_> {
    fn p(&self) -> u64 {
        self.ring.prime()
    }

    fn divides_n(&self) -> bool {
        self.config.n as u64 % self.p() == 0
    }

    /// Column-0 classes hitting the bottom `x_1 y_{p,0}` spot on the last page.
    fn axiom_covers(&self, source: Bidegree, target: Bidegree) -> Option<Axiom> {
        let bottom = Bidegree::new(KZ3Class::X1Yp0.degree(self.p()), 0);
        let ok = self.rules.sequence() == Sequence::U
            && self.config.axioms.contains(&Axiom::Vistoli)
            && source.s == 0
            && target == bottom
            && self.divides_n();
        ok.then_some(Axiom::Vistoli)
    }

    fn differential(
        &self,
        r: u32,
        src: &PageEntry,
        tgt: &PageEntry,
    ) -> Result<(DifferentialMap, Vec<String>), SseqError> {
        let mut d = DifferentialMap {
            sequence: self.rules.sequence(),
            r,
            source: src.bidegree,
            target: tgt.bidegree,
            matrix: None,
            source_cycles: src.cycles.clone(),
            target_torsion: tgt.base().is_torsion(),
            provenance: Provenance::Trivial,
            nonzero: false,
        };
        if is_zero_module(self.ring, src) || is_zero_module(self.ring, tgt) {
            return Ok((d, Vec::new()));
        }
        if let Some(name) = self.rules.rule_name(r, src.s()) {
            if r > 3 && !self.injects_into_e2(tgt) {
                d.provenance = Provenance::Unresolved(format!(
                    "target {} received an earlier differential, so it does not embed in E_2",
                    tgt.bidegree
                ));
                return Ok((d, Vec::new()));
            }
            let mut cols = Vec::with_capacity(src.cycles.cols());
            let mut witnesses = Vec::new();
            for j in 0..src.cycles.cols() {
                let class = src.class_of(&src.cycles.column(j));
                let image = self.rules.apply(r, &class)?;
                witnesses.extend(self.rules.boundary_witnesses(r, &class)?);
                let mut coords = tgt
                    .coordinates_of(&image)
                    .ok_or(SseqError::ImageOutsideTarget(tgt.bidegree))?;
                if d.target_torsion {
                    for x in &mut coords {
                        *x = self.ring.reduce_mod_p(x);
                    }
                }
                cols.push(coords);
            }
            let m = PLocalMatrix::from_columns(tgt.dim(), &cols);
            d.nonzero = cols.iter().any(|c| !in_span(self.ring, &tgt.boundaries, c));
            d.matrix = Some(m);
            d.provenance = Provenance::Rule(name.to_string());
            return Ok((d, witnesses));
        }
        if src.s() == 0 && r > 3 {
            if self.rules.column_zero_degenerates() {
                d.provenance = Provenance::AssumedZero(
                    "column-0 classes left by d_3 are permanent cycles (torus degeneration)".into(),
                );
                return Ok((d, Vec::new()));
            }
            if let Some(axiom) = self.axiom_covers(src.bidegree, tgt.bidegree) {
                d.provenance = Provenance::Axiom(axiom);
                return Ok((d, Vec::new()));
            }
            d.provenance =
                Provenance::Unresolved("no formula for higher differentials out of column 0".into());
            return Ok((d, Vec::new()));
        }
        d.provenance = Provenance::Unresolved(format!("no formula for d_{r} out of column {}", src.s()));
        Ok((d, Vec::new()))
    }

    /// True when `E_r` of a torsion entry is still all of `E_2`, so a class
    /// computed in `E_2` coordinates determines its value on this page.
    fn injects_into_e2(&self, tgt: &PageEntry) -> bool {
        let dim = tgt.dim();
        if tgt.cycles.cols() != dim {
            return false;
        }
        if !tgt.base().is_torsion() {
            return tgt.boundaries.is_zero();
        }
        (0..tgt.boundaries.rows())
            .all(|i| (0..tgt.boundaries.cols()).all(|j| self.ring.valuation(tgt.boundaries.get(i, j)) != Some(0)))
    }
}

/// Source cycle coordinates whose image lands in the target boundaries.
fn kernel_mod_boundaries(ring: &PLocalRing, m: &PLocalMatrix, target_b: &PLocalMatrix) -> PLocalMatrix {
    let k = m.cols();
    let stacked = m.hstack(target_b);
    let ker = kernel_basis(ring, &stacked);
    let top: Vec<usize> = (0..k).collect();
    let proj = ker.select_rows(&top);
    column_span_basis(ring, &proj)
}

/// Turns one page. `entries` is `E_r`; returns `E_{r+1}` together with the
/// differentials `d_r` and their witnesses.
pub fn turn_page(
    rules: &dyn DifferentialRules,
    config: &EngineConfig,
    r: u32,
    entries: &[PageEntry],
) -> Result<(Vec<PageEntry>, Vec<DifferentialMap>, Vec<(u32, Bidegree, Vec<String>)>), SseqError> {
    let ring = rules.ring();
    let ctx = Ctx { rules, ring, config };
    let index: BTreeMap<Bidegree, usize> = entries.iter().enumerate().map(|(i, e)| (e.bidegree, i)).collect();
    let pairs: Vec<(usize, usize)> = entries
        .iter()
        .enumerate()
        .filter(|(_, e)| e.outgoing_known)
        .filter_map(|(i, e)| e.bidegree.shifted(r).and_then(|b| index.get(&b)).map(|&j| (i, j)))
        .collect();

    let computed = config
        .exec
        .map(&pairs, |&(i, j)| ctx.differential(r, &entries[i], &entries[j]));
    let mut diffs = Vec::with_capacity(computed.len());
    let mut witnesses = Vec::new();
    for res in computed {
        let (d, w) = res?;
        if !d.provenance.is_resolved() && config.policy == UnresolvedPolicy::Strict {
            let Provenance::Unresolved(reason) = &d.provenance else { unreachable!() };
            return Err(SseqError::UnresolvedDifferential {
                r,
                at: d.source,
                reason: reason.clone(),
            });
        }
        if !w.is_empty() {
            witnesses.push((r, d.source, w));
        }
        diffs.push(d);
    }

    let out_of: BTreeMap<Bidegree, &DifferentialMap> = diffs.iter().map(|d| (d.source, d)).collect();
    let into: BTreeMap<Bidegree, &DifferentialMap> = diffs.iter().map(|d| (d.target, d)).collect();

    let next = config.exec.map(entries, |e| {
        let mut e2 = e.clone();
        e2.page = Page::Finite(r + 1);
        if let Some(d) = out_of.get(&e.bidegree) {
            if !d.provenance.is_resolved() {
                e2.bound = e2.bound.with_unknown_outgoing();
            } else if d.nonzero {
                let tgt = &entries[index[&d.target]];
                let m = d.matrix.as_ref().expect("nonzero maps carry a matrix");
                let keep = kernel_mod_boundaries(ring, m, &tgt.boundaries);
                e2.cycles = e.cycles.mul(&keep);
            }
        }
        if let Some(d) = into.get(&e.bidegree) {
            if !d.provenance.is_resolved() {
                e2.bound = e2.bound.with_unknown_incoming();
            } else if d.nonzero {
                let m = d.matrix.as_ref().expect("nonzero maps carry a matrix");
                e2.boundaries = column_span_basis(ring, &e.boundaries.hstack(m));
            }
        }
        e2
    });
    Ok((next, diffs, witnesses))
}

fn check_page(
    ring: &PLocalRing,
    r: u32,
    entries: &[PageEntry],
    diffs: &[DifferentialMap],
    exec: Exec,
) -> Vec<ConsistencyCheck> {
    let index: BTreeMap<Bidegree, &PageEntry> = entries.iter().map(|e| (e.bidegree, e)).collect();
    let by_source: BTreeMap<Bidegree, &DifferentialMap> = diffs.iter().map(|d| (d.source, d)).collect();
    let active: Vec<&DifferentialMap> = diffs.iter().filter(|d| d.matrix.is_some()).collect();
    let per_map = exec.map(&active, |d| {
        let m = d.matrix.as_ref().expect("filtered");
        let src = index[&d.source];
        let tgt = index[&d.target];
        let mut out = Vec::new();

        let cycles_ok = m.columns().iter().all(|c| in_span(ring, &tgt.cycles, c));
        out.push(ConsistencyCheck { name: "image-in-cycles".into(), r, at: d.source, ok: cycles_ok });

        let well_defined = src.boundaries.columns().iter().all(|b| {
            let Some(y) = solve_mod_image(ring, &src.cycles, b) else { return false };
            let mut img = m.mul_vec(&y);
            if d.target_torsion {
                img.iter_mut().for_each(|x| *x = ring.reduce_mod_p(x));
            }
            in_span(ring, &tgt.boundaries, &img)
        });
        out.push(ConsistencyCheck { name: "boundaries-to-boundaries".into(), r, at: d.source, ok: well_defined });

        if let Some(next) = by_source.get(&d.target).filter(|n| n.matrix.is_some()) {
            let m2 = next.matrix.as_ref().expect("filtered");
            let far = index[&next.target];
            let ok = m.columns().iter().all(|c| {
                let Some(y) = solve_mod_image(ring, &tgt.cycles, c) else { return false };
                let mut img = m2.mul_vec(&y);
                if next.target_torsion {
                    img.iter_mut().for_each(|x| *x = ring.reduce_mod_p(x));
                }
                in_span(ring, &far.boundaries, &img)
            });
            out.push(ConsistencyCheck { name: "d-squared-zero".into(), r, at: d.source, ok });
        }
        out
    });
    per_map.into_iter().flatten().collect()
}

/// Runs a sequence from `E_3` to `E_inf`.
pub fn compute(config: &EngineConfig) -> Result<Computation, SseqError> {
    let ring = validate(config.p, config.n, config.t_max)?;
    let rules = rules_for(config.sequence, ring.clone(), config.n);
    let p = config.p;
    let mut entries = build_e2_with(rules.as_ref(), config.t_max);
    for e in &mut entries {
        e.page = Page::Finite(3);
    }
    let mut pages = Vec::new();
    let mut differentials = Vec::new();
    let mut witnesses = Vec::new();
    let mut checks = Vec::new();
    let mut axiom_uses = Vec::new();
    let page_list = relevant_pages(p);
    debug_assert!(columns(p).contains(&(2 * p as u32 + 5)));
    for (idx, &r) in page_list.iter().enumerate() {
        for e in &mut entries {
            e.page = Page::Finite(r);
        }
        pages.push(PageSnapshot { page: Page::Finite(r), entries: entries.clone() });
        let (next, diffs, w) = turn_page(rules.as_ref(), config, r, &entries)?;
        checks.extend(check_page(&ring, r, &entries, &diffs, config.exec));
        for d in &diffs {
            if let Provenance::Axiom(axiom) = d.provenance {
                axiom_uses.push(AxiomUse { axiom, r, source: d.source, target: d.target });
            }
        }
        differentials.extend(diffs);
        witnesses.extend(w);
        entries = next;
        if idx + 1 == page_list.len() {
            for e in &mut entries {
                e.page = Page::Infinity;
            }
            pages.push(PageSnapshot { page: Page::Infinity, entries: entries.clone() });
        }
    }
    Ok(Computation {
        sequence: config.sequence,
        p,
        n: config.n,
        t_max: config.t_max,
        ring,
        pages,
        differentials,
        witnesses,
        checks,
        axiom_uses,
    })
}
