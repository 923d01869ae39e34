//! Machine-readable documents and ASCII charts.
//!
//! Documents are built as `serde_json::Value` with sorted object keys and
//! only integers and strings as scalars, so parsing and re-serializing a
//! document reproduces it byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::plocal::IsoType;
use crate::sseq::{
    columns, Bidegree, CohomologyReport, Computation, DifferentialMap, Page, PageEntry, Provenance, Sequence,
};
use crate::verify::Verification;

/// Everything one run has to say, in the output schema.
#[derive(Clone, Debug, Default)]
pub struct Document {
    pub p: u64,
    pub n: usize,
    pub sequence: Option<Sequence>,
    pub t_max: u32,
    pub entries: Vec<Value>,
    pub differentials: Vec<Value>,
    pub cohomology: Vec<Value>,
    pub verifications: Vec<Value>,
}

impl Document {
    pub fn new(p: u64, n: usize, t_max: u32) -> Self {
        Document { p, n, t_max, ..Default::default() }
    }

    /// Adds the nonzero entries of every stored page and the differentials
    /// that carry information.
    pub fn with_computation(mut self, c: &Computation) -> Self {
        self.sequence = Some(c.sequence);
        for snap in &c.pages {
            for e in &snap.entries {
                if e.bidegree.total() > c.t_max + 1 {
                    continue;
                }
                let iso = e.iso_type(&c.ring);
                if iso.is_zero() {
                    continue;
                }
                self.entries.push(entry_json(c, e, snap.page, &iso));
            }
        }
        self.differentials = c.differentials.iter().filter(|d| is_informative(d)).map(differential_json).collect();
        self
    }

    pub fn with_report(mut self, report: &CohomologyReport) -> Self {
        self.sequence = Some(report.sequence);
        self.cohomology = report
            .degrees
            .iter()
            .map(|d| {
                json!({
                    "degree": d.degree,
                    "p_primary": d.p_primary.render(report.p),
                    "status": d.status.as_str(),
                    "axioms_used": d.axioms_used.iter().map(|a| a.name()).collect::<Vec<_>>(),
                })
            })
            .collect();
        self
    }

    pub fn with_verification(mut self, v: &Verification) -> Self {
        self.verifications.push(json!({
            "name": v.name,
            "result": v.result(),
            "details": v.details,
        }));
        self
    }

    pub fn to_value(&self) -> Value {
        let (r, m) = crate::sseq::split_n(self.p, self.n);
        let mut window = BTreeMap::new();
        window.insert("t_max", json!(self.t_max));
        window.insert("total_max", json!(self.t_max + 1));
        if let Some(seq) = self.sequence {
            window.insert("sequence", json!(seq.to_string()));
        }
        json!({
            "p": self.p,
            "n": self.n,
            "r": r,
            "m": m,
            "window": window,
            "entries": self.entries,
            "differentials": self.differentials,
            "cohomology": self.cohomology,
            "verifications": self.verifications,
        })
    }

    /// Compact canonical form.
    pub fn to_json(&self) -> String {
        canonical(&self.to_value())
    }
}

/// Serializes with sorted keys and no whitespace.
pub fn canonical(v: &Value) -> String {
    serde_json::to_string(v).expect("values built here always serialize")
}

fn is_informative(d: &DifferentialMap) -> bool {
    match &d.provenance {
        Provenance::Trivial => false,
        Provenance::Rule(_) => d.nonzero,
        _ => true,
    }
}

fn entry_json(c: &Computation, e: &PageEntry, page: Page, iso: &IsoType) -> Value {
    let generators: Vec<Value> = e
        .minimal_generators(&c.ring)
        .into_iter()
        .map(|(coords, order)| {
            let order = match order {
                None => format!("Z({})", c.p),
                Some(1) => format!("Z/{}", c.p),
                Some(k) => format!("Z/{}^{k}", c.p),
            };
            json!({
                "class": e.render_coords(&coords, c.p),
                "coords": coords.iter().map(|x| x.to_pair_string()).collect::<Vec<_>>(),
                "order": order,
            })
        })
        .collect();
    json!({
        "s": e.s(),
        "t": e.t(),
        "page": page.to_string(),
        "generators": generators,
        "iso": iso.render(c.p),
    })
}

fn differential_json(d: &DifferentialMap) -> Value {
    json!({
        "r": d.r,
        "from": [d.source.s, d.source.t],
        "to": [d.target.s, d.target.t],
        "provenance": d.provenance.render(),
    })
}

/// Short cell text: `.` for zero, `Z` or `Zk` for free rank, `/p` or
/// `/p^k` per torsion summand.
pub fn glyph(iso: &IsoType, p: u64) -> String {
    if iso.is_zero() {
        return ".".into();
    }
    let mut s = String::new();
    match iso.free_rank {
        0 => {}
        1 => s.push('Z'),
        k => {
            let _ = write!(s, "Z{k}");
        }
    }
    for &k in &iso.torsion {
        if !s.is_empty() {
            s.push('+');
        }
        if k == 1 {
            let _ = write!(s, "/{p}");
        } else {
            let _ = write!(s, "/{p}^{k}");
        }
    }
    s
}

/// The chart of one page: `s` across, `t` up, then the nonzero `d_3` and
/// `d_{2p-1}` arrows with their provenance.
pub fn chart(c: &Computation, page: Page) -> String {
    let p = c.p;
    let snap = c.page(page);
    let cols = columns(p);
    let width = 9;
    let mut out = String::new();
    let _ = writeln!(out, "E_{} of the {} sequence, p={} n={}", snap.page, c.sequence, p, c.n);
    for t in (0..=c.t_max).rev().step_by(2) {
        let _ = write!(out, "{t:>4} |");
        for &s in &cols {
            let cell = match snap.get(Bidegree::new(s, t)) {
                Some(e) if e.bidegree.total() <= c.t_max + 1 => {
                    let mut g = glyph(&e.iso_type(&c.ring), p);
                    if e.bound != crate::sseq::Bound::Exact {
                        g.push('?');
                    }
                    g
                }
                _ => " ".into(),
            };
            let _ = write!(out, "{cell:>width$}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "     +{}", "-".repeat(width * cols.len()));
    let _ = write!(out, "      ");
    for &s in &cols {
        let _ = write!(out, "{s:>width$}");
    }
    out.push('\n');
    let shown = [3, 2 * p as u32 - 1];
    let arrows: Vec<&DifferentialMap> =
        c.differentials.iter().filter(|d| shown.contains(&d.r) && d.nonzero).collect();
    if !arrows.is_empty() {
        out.push('\n');
    }
    for d in arrows {
        let _ = writeln!(out, "  {} --d_{}--> {}   [{}]", d.source, d.r, d.target, d.provenance.render());
    }
    for d in c.unresolved() {
        let _ = writeln!(out, "  {} ..d_{}..> {}   [{}]", d.source, d.r, d.target, d.provenance.render());
    }
    out
}

/// The degree-by-degree table of a report.
pub fn theorem_table(report: &CohomologyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "p={} n={} (r={}, m={})", report.p, report.n, report.r, report.m);
    let _ = writeln!(out, "{:>6}  {:<12} {:<30} axioms", "degree", "p-primary", "status");
    for d in &report.degrees {
        let axioms: Vec<&str> = d.axioms_used.iter().map(|a| a.name()).collect();
        let _ = writeln!(
            out,
            "{:>6}  {:<12} {:<30} {}",
            d.degree,
            d.p_primary.render(report.p),
            d.status.as_str(),
            if axioms.is_empty() { "-".to_string() } else { axioms.join(",") }
        );
    }
    out
}

/// One verification as text lines.
pub fn verification_text(v: &Verification) -> String {
    let mut out = format!("{} {}\n", v.result(), v.name);
    for d in &v.details {
        let _ = writeln!(out, "    {d}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sseq::{assemble_report, compute, EngineConfig};

    #[test]
    fn round_trip_is_byte_identical() {
        let c = compute(&EngineConfig::new(Sequence::U, 3, 3)).unwrap();
        let doc = Document::new(3, 3, c.t_max).with_computation(&c).with_report(&assemble_report(&c));
        let text = doc.to_json();
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(canonical(&back), text);
        assert!(text.contains(r#"{"axioms_used":[],"degree":3,"p_primary":"Z/3","status":"complete"}"#));
    }

    #[test]
    fn glyphs() {
        assert_eq!(glyph(&IsoType::zero(), 3), ".");
        assert_eq!(glyph(&IsoType::new(2, vec![1]), 3), "Z2+/3");
        assert_eq!(glyph(&IsoType::cyclic(2), 5), "/5^2");
    }

    #[test]
    fn chart_shows_first_differential() {
        let c = compute(&EngineConfig::new(Sequence::U, 3, 3)).unwrap();
        let text = chart(&c, Page::Finite(3));
        assert!(text.contains("(0,2) --d_3--> (3,0)"));
    }
}
