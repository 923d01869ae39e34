use std::io::Write;
use std::process::ExitCode;

use bpu_core::exec::Exec;
use bpu_core::render::{chart, theorem_table, verification_text, Document};
use bpu_core::sseq::{
    assemble_report, compute, default_t_max, validate, CohomologyReport, DegreeStatus, EngineConfig, Page, Sequence,
};
use bpu_core::verify::{
    theorem_from, verify_lemma_cbar, verify_lemma_witnesses, verify_prop_vanishing, verify_transport, Verification,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "bpu", about = "p-local cohomology of BPU_n in low degrees via Serre spectral sequences")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// All pages of a spectral sequence and the cohomology read off E_inf.
    Compute(Common),
    /// Triangularity of the bar change of basis in degree 2t.
    VerifyLemmaCbar {
        #[command(flatten)]
        common: Common,
        /// Fiber degree index; defaults to both p+1 and p+2.
        #[arg(long)]
        t: Option<u32>,
    },
    /// The three explicit d_3 boundaries.
    VerifyWitnesses(Common),
    /// Vanishing of the key E_inf entries and the transported differentials.
    VerifyProps(Common),
    /// The cohomology table against the expected answer.
    VerifyTheorem(Common),
    /// ASCII chart of one page.
    Chart {
        #[command(flatten)]
        common: Common,
        /// Page number or `inf`.
        #[arg(long, default_value = "3")]
        page: String,
    },
}

#[derive(clap::Args, Debug, Clone)]
struct Common {
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    n: Option<usize>,
    /// Even bound on fiber degree; defaults to 2p+8.
    #[arg(long)]
    t_max: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Run without the declared axiom.
    #[arg(long)]
    no_vistoli: bool,
    #[arg(long, value_enum, default_value_t = SeqArg::U)]
    sequence: SeqArg,
    /// Comma-separated `p:n` pairs, run in parallel.
    #[arg(long)]
    batch: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Json,
    Text,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SeqArg {
    #[value(name = "U")]
    U,
    #[value(name = "T")]
    T,
    #[value(name = "K")]
    K,
}

impl From<SeqArg> for Sequence {
    fn from(s: SeqArg) -> Self {
        match s {
            SeqArg::U => Sequence::U,
            SeqArg::T => Sequence::T,
            SeqArg::K => Sequence::K,
        }
    }
}

struct Job {
    p: u64,
    n: usize,
    t_max: u32,
}

/// Output of one job: the document, its text form, and whether it failed.
struct Outcome {
    doc: Document,
    text: String,
    failed: bool,
}

#[derive(Debug)]
struct InputError(String);

fn parse_batch(list: &str) -> Result<Vec<(u64, usize)>, InputError> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let (p, n) = pair.trim().split_once(':').ok_or_else(|| InputError(format!("bad batch item {pair:?}, expected p:n")))?;
            let p = p.parse().map_err(|_| InputError(format!("bad p in {pair:?}")))?;
            let n = n.parse().map_err(|_| InputError(format!("bad n in {pair:?}")))?;
            Ok((p, n))
        })
        .collect()
}

fn jobs(common: &Common) -> Result<Vec<Job>, InputError> {
    let pairs = match (&common.batch, common.p, common.n) {
        (Some(b), _, _) => parse_batch(b)?,
        (None, Some(p), Some(n)) => vec![(p, n)],
        _ => return Err(InputError("--p and --n are required (or --batch)".into())),
    };
    if pairs.is_empty() {
        return Err(InputError("empty batch".into()));
    }
    pairs
        .into_iter()
        .map(|(p, n)| {
            let t_max = common.t_max.unwrap_or_else(|| default_t_max(p));
            validate(p, n, t_max).map_err(|e| InputError(e.to_string()))?;
            Ok(Job { p, n, t_max })
        })
        .collect()
}

fn config(common: &Common, job: &Job) -> EngineConfig {
    let mut cfg = EngineConfig::new(common.sequence.into(), job.p, job.n).with_t_max(job.t_max);
    if common.no_vistoli {
        cfg = cfg.without_axioms();
    }
    cfg
}

fn unresolved(report: &CohomologyReport) -> bool {
    report.degrees.iter().any(|d| d.status == DegreeStatus::HasUnresolvedDifferentials)
}

fn with_verifications(mut doc: Document, vs: &[Verification]) -> (Document, String, bool) {
    let mut text = String::new();
    let mut failed = false;
    for v in vs {
        doc = doc.with_verification(v);
        text.push_str(&verification_text(v));
        failed |= !v.passed;
    }
    (doc, text, failed)
}

fn parse_page(s: &str) -> Result<Page, InputError> {
    if s == "inf" {
        return Ok(Page::Infinity);
    }
    match s.parse::<u32>() {
        Ok(r) if r >= 2 => Ok(Page::Finite(r)),
        _ => Err(InputError(format!("page must be an integer >= 2 or inf, got {s:?}"))),
    }
}

fn run_job(command: &Command, common: &Common, job: &Job) -> Result<Outcome, String> {
    let (p, n) = (job.p, job.n);
    let doc = Document::new(p, n, job.t_max);
    let out = match command {
        Command::Compute(_) => {
            let c = compute(&config(common, job)).map_err(|e| e.to_string())?;
            let report = assemble_report(&c);
            let text = format!("{}\n{}", chart(&c, Page::Infinity), theorem_table(&report));
            Outcome { doc: doc.with_computation(&c).with_report(&report), text, failed: unresolved(&report) }
        }
        Command::Chart { page, .. } => {
            let page = parse_page(page).map_err(|e| e.0)?;
            let c = compute(&config(common, job)).map_err(|e| e.to_string())?;
            let report = assemble_report(&c);
            Outcome { doc: doc.with_computation(&c).with_report(&report), text: chart(&c, page), failed: false }
        }
        Command::VerifyLemmaCbar { t, .. } => {
            let ts = match t {
                Some(t) => vec![*t],
                None => vec![p as u32 + 1, p as u32 + 2],
            };
            let vs: Vec<_> = ts.into_iter().map(|t| verify_lemma_cbar(t, p, n)).collect();
            let (doc, text, failed) = with_verifications(doc, &vs);
            Outcome { doc, text, failed }
        }
        Command::VerifyWitnesses(_) => {
            let v = verify_lemma_witnesses(p, n).map_err(|e| e.to_string())?;
            let (doc, text, failed) = with_verifications(doc, &[v]);
            Outcome { doc, text, failed }
        }
        Command::VerifyProps(_) => {
            let vs = vec![
                verify_prop_vanishing(p, n).map_err(|e| e.to_string())?,
                verify_transport(p, n).map_err(|e| e.to_string())?,
            ];
            let (doc, text, failed) = with_verifications(doc, &vs);
            Outcome { doc, text, failed }
        }
        Command::VerifyTheorem(_) => {
            let c = compute(&config(common, job)).map_err(|e| e.to_string())?;
            let report = assemble_report(&c);
            let v = theorem_from(&report);
            let (doc, text, failed) = with_verifications(doc.with_report(&report), &[v]);
            Outcome { doc, text: format!("{}{}", theorem_table(&report), text), failed }
        }
    };
    Ok(out)
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Compute(c) | Command::VerifyWitnesses(c) | Command::VerifyProps(c) | Command::VerifyTheorem(c) => c,
        Command::VerifyLemmaCbar { common, .. } | Command::Chart { common, .. } => common,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = common(&cli.command);
    let jobs = match jobs(common) {
        Ok(j) => j,
        Err(InputError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    let results = Exec::default().map(&jobs, |job| run_job(&cli.command, common, job));
    let mut code = 0u8;
    let mut docs = Vec::new();
    let mut stdout = std::io::stdout().lock();
    for (job, res) in jobs.iter().zip(results) {
        match res {
            Ok(out) => {
                if out.failed {
                    code = code.max(1);
                }
                match common.format {
                    Format::Json => docs.push(out.doc.to_value()),
                    Format::Text => {
                        let _ = write!(stdout, "{}", out.text);
                    }
                }
            }
            Err(msg) => {
                eprintln!("error: p={} n={}: {msg}", job.p, job.n);
                code = 2;
            }
        }
    }
    if common.format == Format::Json && (common.batch.is_some() || !docs.is_empty()) {
        let value = if common.batch.is_some() { serde_json::Value::Array(docs) } else { docs.pop().unwrap_or_default() };
        let _ = writeln!(stdout, "{}", bpu_core::render::canonical(&value));
    }
    ExitCode::from(code)
}
