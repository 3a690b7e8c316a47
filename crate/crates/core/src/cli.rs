//! Command-line front end.
//!
//! Exit codes: 0 ok or pseudoconvex-at-samples, 2 input error,
//! 3 nonpseudoconvex, 4 degenerate, 5 pipeline failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::catalog::{self, DomainFile, Expected};
use crate::error::Error;
use crate::expr;
use crate::hormander::QuadraticVerification;
use crate::levi::{self, Domain, Verdict};
use crate::linalg::C64;
use crate::pipeline::{self, Classification, ForwardStage, PipelineError, TheoremConfig};
use crate::sampling::SamplingBox;
use crate::slicing::{self, Slice, WitnessCertificate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NONPSEUDOCONVEX: i32 = 3;
pub const EXIT_DEGENERATE: i32 = 4;
pub const EXIT_PIPELINE: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "levislice",
    version,
    about = "Levi pseudoconvexity checks and witness slices for domains in C^n"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a domain by sampling its boundary.
    Check(DomainArgs),
    /// Classify the slice of a domain by the plane w -> a + b w1 + c w2.
    Slice(SliceArgs),
    /// Check that the domain's verdict agrees with its two-dimensional slices.
    VerifyTheorem(DomainArgs),
    /// List the built-in domains.
    Catalog {
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
pub struct DomainArgs {
    /// Domain file, or the name of a built-in domain.
    pub domain: String,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SliceArgs {
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Base point, as re:im pairs separated by commas.
    #[arg(long, allow_hyphen_values = true)]
    pub a: String,
    #[arg(long, allow_hyphen_values = true)]
    pub b: String,
    #[arg(long, allow_hyphen_values = true)]
    pub c: String,
    /// Center of the w window.
    #[arg(long, default_value = "0:0,0:0", allow_hyphen_values = true)]
    pub center: String,
    /// Half-width of the w window in every real coordinate.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Write a K x K grid of rho_h over (re w1, re w2) in the window.
    #[arg(long, requires = "out")]
    pub grid: Option<usize>,
    #[arg(long, requires = "grid")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug, Serialize)]
struct ErrorEcho {
    stage: String,
    message: String,
}

#[derive(Debug, Serialize)]
struct SliceEcho {
    slice: Slice,
    window: Vec<(f64, f64)>,
    rho_h: String,
    grid: Option<GridEcho>,
}

#[derive(Debug, Serialize)]
struct GridEcho {
    k: usize,
    rows: usize,
    path: String,
}

#[derive(Debug, Serialize)]
struct WitnessSliceEcho {
    #[serde(rename = "box")]
    bounds: Vec<(f64, f64)>,
    classification: Classification,
}

#[derive(Debug, Serialize)]
struct Timing {
    elapsed_ms: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    command: String,
    args: Vec<String>,
    tool_version: &'static str,
    domain: Option<DomainFile>,
    samples: Option<usize>,
    seed: Option<u64>,
    verdict: Option<Verdict>,
    expected_match: Option<bool>,
    classification: Option<Classification>,
    slice: Option<SliceEcho>,
    certificate: Option<WitnessCertificate>,
    hormander: Option<QuadraticVerification>,
    witness_slice: Option<WitnessSliceEcho>,
    forward: Option<ForwardStage>,
    consistent: Option<bool>,
    error: Option<ErrorEcho>,
    exit_code: i32,
    // Kept last so that determinism checks can cut it off.
    timing: Timing,
}

impl Report {
    fn new(command: &str, args: Vec<String>) -> Self {
        Report {
            command: command.to_string(),
            args,
            tool_version: env!("CARGO_PKG_VERSION"),
            domain: None,
            samples: None,
            seed: None,
            verdict: None,
            expected_match: None,
            classification: None,
            slice: None,
            certificate: None,
            hormander: None,
            witness_slice: None,
            forward: None,
            consistent: None,
            error: None,
            exit_code: EXIT_OK,
            timing: Timing { elapsed_ms: 0.0 },
        }
    }

    fn fail(&mut self, stage: &str, err: &Error) {
        self.error = Some(ErrorEcho {
            stage: stage.to_string(),
            message: err.to_string(),
        });
        self.exit_code = exit_for_error(err);
    }
}

/// Input problems map to 2; anything that goes wrong mid-computation to 5.
pub fn exit_for_error(err: &Error) -> i32 {
    match err {
        Error::Syntax { .. }
        | Error::ZeroVariableIndex { .. }
        | Error::UnknownFunction { .. }
        | Error::DimensionMismatch { .. }
        | Error::NotRealValued { .. }
        | Error::DependentVectors
        | Error::InvalidDomain(_) => EXIT_INPUT,
        _ => EXIT_PIPELINE,
    }
}

pub fn verdict_exit(v: Verdict) -> i32 {
    match v {
        Verdict::PseudoconvexAtSamples => EXIT_OK,
        Verdict::Nonpseudoconvex => EXIT_NONPSEUDOCONVEX,
        Verdict::Degenerate => EXIT_DEGENERATE,
    }
}

/// Reads a domain file; a path that does not exist falls back to the catalog.
pub fn load_domain(arg: &str) -> Result<DomainFile, Error> {
    let path = Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidDomain(format!("cannot read {arg}: {e}")))?;
        return DomainFile::parse(&text);
    }
    catalog::builtin(arg).ok_or_else(|| {
        Error::InvalidDomain(format!(
            "{arg}: no such file and no built-in domain of that name"
        ))
    })
}

fn expected_match(expected: Option<Expected>, verdict: Verdict) -> Option<bool> {
    expected.map(|e| match e {
        Expected::Pseudoconvex => verdict == Verdict::PseudoconvexAtSamples,
        Expected::Nonpseudoconvex => verdict == Verdict::Nonpseudoconvex,
    })
}

fn fmt_c(z: &C64) -> String {
    format!("{}{:+}i", z.re, z.im)
}

fn fmt_cvec(v: &[C64]) -> String {
    let parts: Vec<String> = v.iter().map(fmt_c).collect();
    format!("({})", parts.join(", "))
}

fn summarize(text: &mut String, c: &Classification) {
    let _ = writeln!(text, "verdict: {}", c.verdict.as_str());
    let _ = writeln!(
        text,
        "probes: {} of {} (degenerate {}, failed {})",
        c.probes, c.requested, c.degenerate, c.failed
    );
    if let Some(w) = &c.worst {
        let _ = writeln!(text, "worst lambda: {:.12e}", w.lambda_min);
        let _ = writeln!(text, "worst point: {}", fmt_cvec(&w.point));
        let _ = writeln!(text, "worst direction: {}", fmt_cvec(&w.direction));
    }
}

pub fn run<I, T>(argv: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Output {
                    code: EXIT_INPUT,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Output {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let args: Vec<String> = argv
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let start = Instant::now();
    match cli.command {
        Command::Catalog { json } => cmd_catalog(json),
        Command::Check(a) => finish(cmd_check(&a, args), a.json, start),
        Command::Slice(a) => {
            let json = a.domain.json;
            finish(cmd_slice(&a, args), json, start)
        }
        Command::VerifyTheorem(a) => finish(cmd_verify_theorem(&a, args), a.json, start),
    }
}

fn finish((mut report, text): (Report, String), json: bool, start: Instant) -> Output {
    report.timing.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let code = report.exit_code;
    let stderr = match &report.error {
        Some(e) => format!("error in {}: {}\n", e.stage, e.message),
        None => String::new(),
    };
    let stdout = if json {
        let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
        s.push('\n');
        s
    } else {
        text
    };
    Output {
        code,
        stdout,
        stderr,
    }
}

struct Prepared {
    file: DomainFile,
    domain: Domain,
    samples: usize,
    seed: u64,
}

fn prepare(a: &DomainArgs, report: &mut Report) -> Option<Prepared> {
    let file = match load_domain(&a.domain) {
        Ok(f) => f,
        Err(e) => {
            report.fail("load", &e);
            return None;
        }
    };
    let samples = a.samples.unwrap_or_else(|| file.samples_or_default());
    let seed = a.seed.unwrap_or_else(|| file.seed_or_default());
    report.domain = Some(file.clone());
    report.samples = Some(samples);
    report.seed = Some(seed);
    if samples == 0 {
        report.fail(
            "load",
            &Error::InvalidDomain("--samples must be positive".into()),
        );
        return None;
    }
    match file.to_domain() {
        Ok(domain) => Some(Prepared {
            file,
            domain,
            samples,
            seed,
        }),
        Err(e) => {
            report.fail("load", &e);
            None
        }
    }
}

fn cmd_check(a: &DomainArgs, args: Vec<String>) -> (Report, String) {
    let mut report = Report::new("check", args);
    let mut text = String::new();
    let Some(p) = prepare(a, &mut report) else {
        return (report, text);
    };
    let _ = writeln!(text, "domain: {} (n = {})", p.file.name, p.file.n);
    match levi::classify(&p.domain, p.samples, p.seed) {
        Ok(r) => {
            let c = Classification::from(&r);
            summarize(&mut text, &c);
            report.verdict = Some(r.verdict);
            report.expected_match = expected_match(p.file.expected, r.verdict);
            report.exit_code = verdict_exit(r.verdict);
            report.classification = Some(c);
        }
        Err(e) => report.fail("classify", &e),
    }
    (report, text)
}

fn window(center: &[C64; 2], radius: f64) -> Result<SamplingBox, Error> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(Error::InvalidDomain("--radius must be positive".into()));
    }
    SamplingBox::around(&center[..], &[radius; 4])
        .ok_or_else(|| Error::InvalidDomain("window has zero volume".into()))
}

fn linspace(lo: f64, hi: f64, k: usize, i: usize) -> f64 {
    if k == 1 {
        0.5 * (lo + hi)
    } else {
        lo + (hi - lo) * i as f64 / (k - 1) as f64
    }
}

/// CSV of rho_h on a K x K grid over (re w1, re w2); the imaginary parts sit
/// at the window center.
pub fn grid_csv(rho_h: &expr::Ast, center: &[C64; 2], radius: f64, k: usize) -> String {
    let mut out = String::from("re_w1,im_w1,re_w2,im_w2,rho_h\n");
    for i in 0..k {
        let x = linspace(center[0].re - radius, center[0].re + radius, k, i);
        for j in 0..k {
            let y = linspace(center[1].re - radius, center[1].re + radius, k, j);
            let w = [C64::new(x, center[0].im), C64::new(y, center[1].im)];
            let v = expr::eval_value(rho_h, &w).map_or(f64::NAN, |v| v.re);
            let _ = writeln!(out, "{},{},{},{},{}", w[0].re, w[0].im, w[1].re, w[1].im, v);
        }
    }
    out
}

fn cmd_slice(a: &SliceArgs, args: Vec<String>) -> (Report, String) {
    let mut report = Report::new("slice", args);
    let mut text = String::new();
    let Some(p) = prepare(&a.domain, &mut report) else {
        return (report, text);
    };
    let parsed = (|| {
        let va = catalog::parse_complex_vector(&a.a)?;
        let vb = catalog::parse_complex_vector(&a.b)?;
        let vc = catalog::parse_complex_vector(&a.c)?;
        for v in [&va, &vb, &vc] {
            if v.len() != p.file.n {
                return Err(Error::DimensionMismatch {
                    expected: p.file.n,
                    got: v.len(),
                });
            }
        }
        let center = catalog::parse_complex_vector(&a.center)?;
        let center: [C64; 2] = center.try_into().map_err(|v: Vec<C64>| {
            Error::InvalidDomain(format!("--center needs 2 entries, got {}", v.len()))
        })?;
        if a.grid == Some(0) {
            return Err(Error::InvalidDomain("--grid must be positive".into()));
        }
        let slice = slicing::make_slice(va, vb, vc)?;
        let bounds = window(&center, a.radius)?;
        Ok((slice, center, bounds))
    })();
    let (slice, center, bounds) = match parsed {
        Ok(t) => t,
        Err(e) => {
            report.fail("slice", &e);
            return (report, text);
        }
    };
    let rho_h = match slice.compose(p.domain.ast()) {
        Ok(r) => r,
        Err(e) => {
            report.fail("compose", &e);
            return (report, text);
        }
    };
    let _ = writeln!(text, "domain: {} (n = {})", p.file.name, p.file.n);
    let _ = writeln!(text, "rho_h: {rho_h}");
    let mut echo = SliceEcho {
        slice: slice.clone(),
        window: bounds.bounds().to_vec(),
        rho_h: rho_h.to_string(),
        grid: None,
    };
    if let (Some(k), Some(path)) = (a.grid, &a.out) {
        let csv = grid_csv(&rho_h, &center, a.radius, k);
        if let Err(e) = std::fs::write(path, csv) {
            report.slice = Some(echo);
            report.fail(
                "grid",
                &Error::InvalidDomain(format!("cannot write {}: {e}", path.display())),
            );
            return (report, text);
        }
        let _ = writeln!(text, "grid: {} rows written to {}", k * k, path.display());
        echo.grid = Some(GridEcho {
            k,
            rows: k * k,
            path: path.display().to_string(),
        });
    }
    report.slice = Some(echo);
    let classified = slice
        .domain(&p.domain, bounds)
        .and_then(|d| levi::classify(&d, p.samples, p.seed));
    match classified {
        Ok(r) => {
            let c = Classification::from(&r);
            summarize(&mut text, &c);
            report.verdict = Some(r.verdict);
            report.exit_code = verdict_exit(r.verdict);
            report.classification = Some(c);
        }
        Err(e) => report.fail("classify", &e),
    }
    (report, text)
}

fn cmd_verify_theorem(a: &DomainArgs, args: Vec<String>) -> (Report, String) {
    let mut report = Report::new("verify-theorem", args);
    let mut text = String::new();
    let Some(p) = prepare(a, &mut report) else {
        return (report, text);
    };
    let _ = writeln!(text, "domain: {} (n = {})", p.file.name, p.file.n);
    let cfg = TheoremConfig::new(p.samples, p.seed);
    let outcome = match pipeline::verify_theorem(&p.domain, &cfg) {
        Ok(o) => o,
        Err(PipelineError { stage, source }) => {
            report.fail(stage, &source);
            report.exit_code = EXIT_PIPELINE;
            return (report, text);
        }
    };
    let verdict = outcome.classification.verdict;
    summarize(&mut text, &outcome.classification);
    report.verdict = Some(verdict);
    report.expected_match = expected_match(p.file.expected, verdict);
    report.classification = Some(outcome.classification);
    if let Some(w) = outcome.witness {
        let cert = &w.certificate;
        let _ = writeln!(text, "witness p0: {}", fmt_cvec(&cert.p0));
        let _ = writeln!(
            text,
            "witness slice lambda: {:.12e} (levi at M {:.12e})",
            cert.lambda_slice, cert.levi_at_m
        );
        let _ = writeln!(
            text,
            "hormander checks: {} (radius {:e}, {} samples)",
            if w.hormander.all_passed() {
                "pass"
            } else {
                "FAIL"
            },
            w.hormander.radius,
            w.hormander.samples
        );
        let _ = writeln!(
            text,
            "witness slice verdict: {} (worst lambda {:.12e})",
            w.slice_classification.verdict.as_str(),
            w.slice_classification
                .worst
                .as_ref()
                .map_or(f64::NAN, |p| p.lambda_min)
        );
        report.certificate = Some(w.certificate);
        report.hormander = Some(w.hormander);
        report.witness_slice = Some(WitnessSliceEcho {
            bounds: w.slice_bounds,
            classification: w.slice_classification,
        });
    }
    if let Some(f) = &outcome.forward {
        let _ = writeln!(
            text,
            "random slices: {} checked, {} skipped, {} not pseudoconvex-at-samples",
            f.slices_checked, f.slices_skipped, f.violations
        );
    }
    report.forward = outcome.forward;
    report.consistent = Some(outcome.consistent);
    let _ = writeln!(text, "consistent: {}", outcome.consistent);
    report.exit_code = match verdict {
        Verdict::Degenerate => EXIT_DEGENERATE,
        _ if outcome.consistent => EXIT_OK,
        _ => EXIT_PIPELINE,
    };
    (report, text)
}

#[derive(Debug, Serialize)]
struct CatalogEntry {
    name: String,
    n: usize,
    rho: String,
    expected: Option<Expected>,
    #[serde(rename = "box")]
    bounds: Vec<(f64, f64)>,
}

fn cmd_catalog(json: bool) -> Output {
    let entries: Vec<CatalogEntry> = catalog::builtins()
        .into_iter()
        .map(|f| CatalogEntry {
            name: f.name,
            n: f.n,
            rho: f.rho,
            expected: f.expected,
            bounds: f.bounds,
        })
        .collect();
    let stdout = if json {
        let mut s = serde_json::to_string_pretty(&entries).expect("catalog serializes");
        s.push('\n');
        s
    } else {
        let mut s = String::new();
        for e in &entries {
            let expected = e.expected.map(|x| x.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{:<10} n={}  {:<16} {}", e.name, e.n, expected, e.rho);
        }
        s
    };
    Output {
        code: EXIT_OK,
        stdout,
        stderr: String::new(),
    }
}
