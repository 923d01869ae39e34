//! One line per acceptance criterion. Runs without the test harness so the
//! lines always print; exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use bpu_core::algebra::exponent_vectors;
use bpu_core::exec::Exec;
use bpu_core::plocal::PLocalRing;
use bpu_core::rules::binomial;
use bpu_core::sseq::{compute, Axiom, Bidegree, EngineConfig, Page, Sequence};
use bpu_core::verify::{
    expected_p_primary, verify_lemma_cbar, verify_lemma_witnesses, verify_prop_vanishing, verify_theorem,
    verify_transport, Verification,
};
use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIVISIBLE: [(u64, usize); 7] = [(3, 3), (3, 6), (3, 9), (3, 12), (5, 5), (5, 10), (7, 7)];
const COPRIME: [(u64, usize); 4] = [(3, 4), (3, 5), (5, 6), (7, 10)];

struct Outcome {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { failures: Vec::new(), notes: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn verification(&mut self, v: &Verification) {
        if !v.passed {
            let bad: Vec<&String> = v.details.iter().filter(|d| d.starts_with("FAIL")).collect();
            self.failures.push(format!("{}: {bad:?}", v.name));
        }
    }
}

fn theorem_divisible() -> Outcome {
    let mut out = Outcome::new();
    for (p, n) in DIVISIBLE {
        let start = Instant::now();
        let res = verify_theorem(p, n);
        let took = start.elapsed();
        let Ok((v, report)) = res else {
            out.failures.push(format!("p={p} n={n}: engine error"));
            continue;
        };
        out.verification(&v);
        for d in &report.degrees {
            out.check(d.p_primary == expected_p_primary(p, n, d.degree), format!("p={p} n={n} degree {}", d.degree));
        }
        let top = report.degree(2 * p as u32 + 5).unwrap();
        out.check(top.axioms_used.contains(&Axiom::Vistoli), format!("p={p} n={n}: axiom not recorded"));
        out.check(took < Duration::from_secs(60), format!("p={p} n={n} took {took:?}"));
        out.notes.push(format!("({p},{n}) {:.2}s", took.as_secs_f64()));
    }
    out
}

fn theorem_coprime() -> Outcome {
    let mut out = Outcome::new();
    for (p, n) in COPRIME {
        match verify_theorem(p, n) {
            Ok((v, report)) => {
                out.verification(&v);
                for d in &report.degrees {
                    out.check(d.p_primary.is_zero(), format!("p={p} n={n} degree {} nonzero", d.degree));
                    out.check(d.axioms_used.is_empty(), format!("p={p} n={n} degree {} used an axiom", d.degree));
                }
            }
            Err(e) => out.failures.push(format!("p={p} n={n}: {e}")),
        }
    }
    out
}

fn per_divisible_pair(f: impl Fn(u64, usize) -> Vec<Verification>) -> Outcome {
    let mut out = Outcome::new();
    for (p, n) in DIVISIBLE {
        for v in f(p, n) {
            out.verification(&v);
        }
    }
    out
}

fn contractibility() -> Outcome {
    let mut out = Outcome::new();
    for p in PRIMES {
        let c = compute(&EngineConfig::new(Sequence::K, p, 1)).expect("K sequence");
        for e in &c.infinity().entries {
            let total = e.bidegree.total();
            if (1..=2 * p as u32 + 8).contains(&total) {
                out.check(e.iso_type(&c.ring).is_zero(), format!("p={p}: E_inf{} nonzero", e.bidegree));
            }
        }
        out.check(c.unresolved().next().is_none(), format!("p={p}: unresolved differential"));
    }
    out
}

fn property_suites() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for i in 0..500 {
        let p = PRIMES[i % 3];
        let ring = PLocalRing::new(p).unwrap();
        let (rows, cols) = (rng.gen_range(1..=12), rng.gen_range(1..=12));
        let a = random_matrix(&mut rng, p, rows, cols);
        if let Err(e) = check_snf(&ring, &a) {
            out.failures.push(format!("smith #{i}: {e}"));
        }
    }
    for i in 0..200 {
        let n = rng.gen_range(1..=4);
        let k = rng.gen_range(0..=3);
        let f = random_chern(&mut rng, n, k);
        let k = rng.gen_range(0..=3);
        let g = random_chern(&mut rng, n, k);
        if let Err(e) = check_psi_star(&f, &g) {
            out.failures.push(format!("psi_star #{i}: {e}"));
        }
        let k = rng.gen_range(1..=3);
        let f = random_torus(&mut rng, n, k);
        let k = rng.gen_range(1..=3);
        let g = random_torus(&mut rng, n, k);
        if let Err(e) = check_divergence(&f, &g) {
            out.failures.push(format!("divergence #{i}: {e}"));
        }
    }
    let mut runs = Vec::new();
    for (p, n) in DIVISIBLE.iter().chain(&COPRIME) {
        runs.push(EngineConfig::new(Sequence::U, *p, *n));
        runs.push(EngineConfig::new(Sequence::U, *p, *n).without_axioms());
        runs.push(EngineConfig::new(Sequence::T, *p, (*n).min(3)));
    }
    for p in PRIMES {
        runs.push(EngineConfig::new(Sequence::K, p, 1));
    }
    let results = Exec::default().map(&runs, |cfg| compute(cfg).map(|c| (c.all_checks_pass(), c.checks.len())));
    let mut checked = 0;
    for (cfg, res) in runs.iter().zip(results) {
        match res {
            Ok((ok, count)) => {
                checked += count;
                out.check(ok, format!("{} p={} n={}: page consistency", cfg.sequence, cfg.p, cfg.n));
            }
            Err(e) => out.failures.push(format!("{} p={} n={}: {e}", cfg.sequence, cfg.p, cfg.n)),
        }
    }
    out.notes.push(format!("{checked} page checks"));
    out
}

fn torus_degeneration() -> Outcome {
    let mut out = Outcome::new();
    for (p, n) in [(3u64, 2usize), (3, 3), (3, 4), (5, 3), (5, 4), (7, 3)] {
        let c = compute(&EngineConfig::new(Sequence::T, p, n)).expect("T sequence");
        for t in (0..=2 * p as u32 + 8).step_by(2) {
            let Some(e) = c.entry(Page::Finite(4), Bidegree::new(0, t)) else {
                out.failures.push(format!("p={p} n={n}: no entry (0,{t})"));
                continue;
            };
            let rank = e.iso_type(&c.ring).free_rank as u64;
            let want = binomial(t as u64 / 2 + n as u64 - 2, n as u64 - 2);
            let direct = exponent_vectors(t / 2, n - 1).len() as u64;
            out.check(
                rank == direct && want == direct.into(),
                format!("p={p} n={n} t={t}: rank {rank}, expected {want}"),
            );
        }
    }
    out
}

fn main() {
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("1 theorem table, p | n", Box::new(theorem_divisible)),
        ("2 theorem table, p does not divide n", Box::new(theorem_coprime)),
        (
            "3 vanishing of key E_inf entries",
            Box::new(|| per_divisible_pair(|p, n| vec![verify_prop_vanishing(p, n).expect("engine")])),
        ),
        (
            "4 bar change of basis is triangular",
            Box::new(|| {
                per_divisible_pair(|p, n| vec![verify_lemma_cbar(p as u32 + 1, p, n), verify_lemma_cbar(p as u32 + 2, p, n)])
            }),
        ),
        (
            "5 explicit d_3 boundaries",
            Box::new(|| per_divisible_pair(|p, n| vec![verify_lemma_witnesses(p, n).expect("coefficients")])),
        ),
        (
            "6 transported differentials",
            Box::new(|| per_divisible_pair(|p, n| vec![verify_transport(p, n).expect("rules")])),
        ),
        ("7 path fibration is contractible", Box::new(contractibility)),
        ("8 property suites and d o d = 0", Box::new(property_suites)),
        ("9 torus column 0 on E_4", Box::new(torus_degeneration)),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let out = run();
        let status = if out.failures.is_empty() { "PASS" } else { "FAIL" };
        let notes = if out.notes.is_empty() { String::new() } else { format!(" [{}]", out.notes.join(", ")) };
        println!("{status} criterion {name} ({:.1}s){notes}", start.elapsed().as_secs_f64());
        for f in &out.failures {
            println!("    {f}");
        }
        if !out.failures.is_empty() {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
