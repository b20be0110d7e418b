//! `kahler`: Delta-property checks and identity suites for catalog Kähler metrics.
//!
//! Exit codes: 0 success (or expectation met), 2 expectation mismatch or a
//! failing suite, 1 usage or construction error.

mod report;
mod suites;

use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use kahler_core::catalog::{catalog_entries, PotentialSpec};
use kahler_core::delta::{verify_property, DeltaReport, VerifyConfig};
use kahler_core::geometry::metric_from_potential;
use kahler_core::laplace::LaplacianBudget;

use report::{
    q, CatalogDocument, CatalogEntry, CheckDocument, ConfigEcho, ReproduceDocument, VerdictBlock, VERSION,
};
use suites::Target;

#[derive(Parser, Debug)]
#[command(name = "kahler", version, about = "Exact Delta-property checks for Kähler potentials")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Infer or refute p_k for k = 1..K on a catalog metric.
    Check {
        /// Catalog spec, e.g. `hyp:2`, `type1:2,2`, `product(flat:1,hyp:1)`.
        spec: String,
        #[arg(long, default_value_t = 3)]
        max_k: u32,
        /// Jet truncation order; defaults to 2 * max_k + 2.
        #[arg(long)]
        order: Option<u32>,
        /// Seed for the random re-verification polynomials.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// `consistent` or `refuted-at:K`.
        #[arg(long)]
        expect: Option<Expectation>,
        /// Record wall-clock time in the report (makes output run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Run a fixed identity suite.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// List catalog entries with dimensions, ranks and Einstein constants.
    Catalog {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Expectation {
    Consistent,
    RefutedAt(u32),
}

impl FromStr for Expectation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "consistent" {
            return Ok(Expectation::Consistent);
        }
        match s.strip_prefix("refuted-at:").map(str::parse::<u32>) {
            Some(Ok(k)) if k >= 1 => Ok(Expectation::RefutedAt(k)),
            _ => Err(format!("expected `consistent` or `refuted-at:K`, got `{s}`")),
        }
    }
}

impl std::fmt::Display for Expectation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Expectation::Consistent => write!(f, "consistent"),
            Expectation::RefutedAt(k) => write!(f, "refuted-at:{k}"),
        }
    }
}

impl Expectation {
    fn matches(&self, report: &DeltaReport) -> bool {
        match self {
            Expectation::Consistent => report.all_consistent(),
            Expectation::RefutedAt(k) => report.refuted_at() == Some(*k),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Check { spec, max_k, order, seed, format, expect, timing } => {
            check(&spec, max_k, order, seed, format, expect, timing)
        }
        Command::Reproduce { target, format } => reproduce(target, format),
        Command::Catalog { format } => catalog(format),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}

fn to_json<T: serde::Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("report documents serialize")
}

fn check(
    spec_text: &str,
    max_k: u32,
    order: Option<u32>,
    seed: u64,
    format: Format,
    expect: Option<Expectation>,
    timing: bool,
) -> Result<u8, String> {
    if max_k == 0 {
        return Err("--max-k must be at least 1".into());
    }
    let minimal = LaplacianBudget::required_order(max_k);
    if let Some(d) = order {
        if d < minimal {
            return Err(format!("order {d} is too small for --max-k {max_k}; the minimal order is {minimal}"));
        }
    }
    let spec = PotentialSpec::from_str(spec_text).map_err(|e| e.to_string())?;
    let config = VerifyConfig { max_k, order, seed, random_checks: 8 };
    let started = Instant::now();
    let report = verify_property(&spec, &config).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();

    let echo = ConfigEcho {
        spec: spec.to_string(),
        max_k,
        order: config.effective_order(),
        seed,
        expect: expect.as_ref().map(ToString::to_string),
    };
    let mut doc = CheckDocument::new(echo, &report);
    let met = expect.as_ref().map(|e| e.matches(&report));
    doc.expectation_met = met;
    if timing {
        doc.timing_ms = Some(elapsed.as_millis() as u64);
    }
    match format {
        Format::Json => println!("{}", to_json(&doc)),
        Format::Text => print!("{}", render_check(&doc)),
    }
    Ok(if met == Some(false) { 2 } else { 0 })
}

fn render_check(doc: &CheckDocument) -> String {
    let mut s = String::new();
    let c = &doc.config;
    s += &format!("spec: {}  (dim {}, order {}, seed {})\n", c.spec, doc.dim, c.order, c.seed);
    s += &format!("variables: {}\n", doc.variables.join(" "));
    let e = &doc.einstein;
    match &e.lambda {
        Some(l) => s += &format!("einstein: yes, lambda = {l} (checked through degree {})\n", e.checked_degree),
        None => s += &format!("einstein: no (Ric_11/g_11 at 0 = {})\n", e.ratio),
    }
    for v in &doc.verdicts {
        s += &render_verdict(v);
    }
    if let Some(r) = &doc.reproduction {
        s += &format!("frame: {}\n", r.frame.join(" "));
        s += &format!("  D^3(|w1|^4)(0) = {}  (offset from 12*lambda: {})\n", r.d3_z1_4, r.comp1_offset);
        if let (Some(v), Some(cross)) = (&r.d3_z1z2_sq, &r.cross_terms) {
            s += &format!("  D^3(|w1 w2|^2)(0) = {v}  cross terms: {}\n", cross.join(", "));
        }
        if let Some(h) = r.relation_holds {
            s += &format!("  D^3(|w1|^4)(0) = 2 D^3(|w1 w2|^2)(0): {h}\n");
        }
    }
    s += &format!("note: {}\n", doc.scope);
    if let Some(met) = doc.expectation_met {
        let e = c.expect.as_deref().unwrap_or("");
        s += &format!("expectation {e}: {}\n", if met { "met" } else { "NOT met" });
    }
    if let Some(ms) = doc.timing_ms {
        s += &format!("time: {ms} ms\n");
    }
    s
}

fn render_verdict(v: &VerdictBlock) -> String {
    let mut s = format!("k={}: {}", v.k, v.status);
    if let Some(p) = &v.p_k {
        s += &format!("  p_{} = {}", v.k, p.display);
    }
    if let Some(free) = &v.free {
        let list: Vec<String> = free.iter().map(|j| format!("a_{j}")).collect();
        s += &format!("  free: {}", list.join(", "));
    }
    s.push('\n');
    for row in v.witness.iter().flatten() {
        let bideg: Vec<String> = row.terms.iter().map(|t| format!("({},{})", t.bidegree[0], t.bidegree[1])).collect();
        s += &format!(
            "  witness {}  bidegree {}  D^{}(0) = {}  Dc^j(0) = [{}]",
            row.function,
            bideg.join(" "),
            v.k,
            row.kahler,
            row.euclidean.join(", ")
        );
        if let Some(f) = &row.forces {
            s += &format!("  forces a_{} = {}", f.j, f.value);
        }
        s.push('\n');
    }
    s
}

fn reproduce(target: Target, format: Format) -> Result<u8, String> {
    let doc = suites::run(target).map_err(|e| e.to_string())?;
    match format {
        Format::Json => println!("{}", to_json(&doc)),
        Format::Text => print!("{}", render_reproduce(&doc)),
    }
    Ok(if doc.pass { 0 } else { 2 })
}

fn render_reproduce(doc: &ReproduceDocument) -> String {
    let mut s = format!("reproduce {}\n", doc.target);
    for i in &doc.instances {
        s += &format!("{} {}\n", if i.pass { "PASS" } else { "FAIL" }, i.label);
        for v in &i.values {
            s += &format!("    {} = {}\n", v.name, v.value);
        }
    }
    for n in &doc.notes {
        s += &format!("note: {n}\n");
    }
    s += &format!("overall: {}\n", if doc.pass { "PASS" } else { "FAIL" });
    s
}

fn catalog(format: Format) -> Result<u8, String> {
    let mut entries = Vec::new();
    for spec in catalog_entries() {
        let built = spec.potential(8).and_then(|p| metric_from_potential(&p)).and_then(|m| m.einstein());
        let (status, is_einstein, lambda) = match built {
            Ok(e) => ("ok".to_string(), Some(e.is_einstein), e.lambda().map(q)),
            Err(err) => (err.to_string(), None, None),
        };
        entries.push(CatalogEntry {
            spec: spec.to_string(),
            dim: spec.dim(),
            rank: spec.rank(),
            optional: spec.is_optional(),
            status,
            is_einstein,
            lambda,
        });
    }
    let doc = CatalogDocument { version: VERSION, entries };
    match format {
        Format::Json => println!("{}", to_json(&doc)),
        Format::Text => {
            println!("{:<16} {:>3} {:>4} {:>8}  status", "spec", "dim", "rank", "lambda");
            for e in &doc.entries {
                let rank = e.rank.map(|r| r.to_string()).unwrap_or_else(|| "-".into());
                let lambda = e.lambda.clone().unwrap_or_else(|| "-".into());
                let status = if e.optional { format!("{} (optional, gated)", e.status) } else { e.status.clone() };
                println!("{:<16} {:>3} {:>4} {:>8}  {}", e.spec, e.dim, rank, lambda, status);
            }
        }
    }
    Ok(0)
}
