use serde::Serialize;

use super::engine::Computation;
use super::{Axiom, Bidegree, Bound, Provenance, Sequence};
use crate::plocal::{int_valuation, IsoType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegreeStatus {
    Complete,
    ExtensionAmbiguous,
    HasUnresolvedDifferentials,
}

impl DegreeStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            DegreeStatus::Complete => "complete",
            DegreeStatus::ExtensionAmbiguous => "extension-ambiguous",
            DegreeStatus::HasUnresolvedDifferentials => "has-unresolved-differentials",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeReport {
    pub degree: u32,
    /// Nonzero `E_inf` entries on this anti-diagonal.
    pub entries: Vec<(Bidegree, IsoType, Bound)>,
    /// Sum of the torsion parts; the actual group when `status` is complete,
    /// the associated graded otherwise.
    pub p_primary: IsoType,
    pub status: DegreeStatus,
    pub axioms_used: Vec<Axiom>,
    /// Differentials on this anti-diagonal taken to be zero without a rule.
    pub assumptions: Vec<String>,
    /// Unresolved differentials touching this anti-diagonal. They affect the
    /// status only through the bounds of nonzero entries.
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CohomologyReport {
    pub sequence: Sequence,
    pub p: u64,
    pub n: usize,
    /// `n = p^r m` with `p` not dividing `m`.
    pub r: u32,
    pub m: u64,
    pub t_max: u32,
    pub degrees: Vec<DegreeReport>,
}

impl CohomologyReport {
    pub fn degree(&self, s: u32) -> Option<&DegreeReport> {
        self.degrees.iter().find(|d| d.degree == s)
    }

    pub fn all_complete(&self) -> bool {
        self.degrees.iter().all(|d| d.status == DegreeStatus::Complete)
    }
}

pub fn split_n(p: u64, n: usize) -> (u32, u64) {
    let r = int_valuation(&(n as u64).into(), &p.into());
    (r, n as u64 / p.pow(r))
}

/// Reads the cohomology of the total space in degrees `0..=t_max` off
/// `E_inf`.
pub fn assemble_report(c: &Computation) -> CohomologyReport {
    let (r, m) = split_n(c.p, c.n);
    let inf = c.infinity();
    let mut degrees = Vec::new();
    for degree in 0..=c.t_max {
        let line: Vec<_> = inf.entries.iter().filter(|e| e.bidegree.total() == degree).collect();
        let mut entries = Vec::new();
        let mut p_primary = IsoType::zero();
        let mut torsion_pieces = 0;
        let mut free_above_bottom = false;
        let mut unresolved = false;
        for e in &line {
            let iso = e.iso_type(&c.ring);
            if iso.is_zero() {
                continue;
            }
            // A free column-0 entry that may shrink stays free; the torsion
            // below it is unaffected.
            let harmless = e.s() == 0 && e.bound == Bound::SubmoduleOf;
            unresolved |= e.bound != Bound::Exact && !harmless;
            if !iso.torsion.is_empty() {
                torsion_pieces += 1;
            }
            // Column 0 is the top quotient; any free piece below it can
            // swallow torsion in an extension.
            if iso.free_rank > 0 && e.s() > 0 {
                free_above_bottom = true;
            }
            p_primary = p_primary.sum(&iso.torsion_part());
            entries.push((e.bidegree, iso, e.bound));
        }
        let touching = c
            .differentials
            .iter()
            .filter(|d| d.source.total() == degree || d.target.total() == degree);
        let mut axioms_used = Vec::new();
        let mut assumptions = Vec::new();
        let mut notes = Vec::new();
        for d in touching {
            match &d.provenance {
                Provenance::Unresolved(why) => notes.push(format!("d_{} {}->{} unresolved: {}", d.r, d.source, d.target, why)),
                Provenance::Axiom(a) if !axioms_used.contains(a) => axioms_used.push(*a),
                Provenance::AssumedZero(why) => {
                    assumptions.push(format!("d_{} {}->{}: {}", d.r, d.source, d.target, why))
                }
                _ => {}
            }
        }
        let status = if unresolved {
            DegreeStatus::HasUnresolvedDifferentials
        } else if torsion_pieces > 1 || (torsion_pieces > 0 && free_above_bottom) {
            DegreeStatus::ExtensionAmbiguous
        } else {
            DegreeStatus::Complete
        };
        degrees.push(DegreeReport {
            degree,
            entries,
            p_primary,
            status,
            axioms_used,
            assumptions,
            notes,
        });
    }
    CohomologyReport {
        sequence: c.sequence,
        p: c.p,
        n: c.n,
        r,
        m,
        t_max: c.t_max,
        degrees,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sseq::{compute, EngineConfig};

    fn report(p: u64, n: usize) -> CohomologyReport {
        assemble_report(&compute(&EngineConfig::new(Sequence::U, p, n)).unwrap())
    }

    #[test]
    fn split() {
        assert_eq!(split_n(3, 18), (2, 2));
        assert_eq!(split_n(5, 4), (0, 4));
    }

    #[test]
    fn degree_seven_vanishes_for_three_three() {
        let rep = report(3, 3);
        assert!(rep.degree(7).unwrap().p_primary.is_zero());
    }

    #[test]
    fn degree_three_for_nine() {
        let rep = report(3, 9);
        assert_eq!(rep.degree(3).unwrap().p_primary, IsoType::cyclic(2));
    }

    #[test]
    fn coprime_rank_is_all_zero() {
        let rep = report(3, 4);
        for d in &rep.degrees {
            assert!(d.p_primary.is_zero(), "degree {}", d.degree);
            assert!(d.axioms_used.is_empty());
        }
    }
}
