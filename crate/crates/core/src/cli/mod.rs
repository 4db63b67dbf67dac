//! Command-line entry point. Each invocation reads one `.sys` file, runs one
//! analysis and writes one JSON report.
//!
//! Exit codes: 0 positive verdict or all checks pass, 1 negative verdict or a
//! failed check, 2 inconclusive, 3 rank not constant on the samples, 64 usage
//! or input error, 66 unreadable input, 70 internal error.

pub mod report;
pub mod sysfile;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use crate::classify::{
    check_mr_flatness, check_static_feedback_linearizable, classify, search_result, ClassificationResult, Verdict,
};
use crate::error::Error;
use crate::expr::ExprError;
use crate::flatout::{verify_flat_outputs, verify_parametrization, BrunovskyIndices};
use crate::geometry::SampleSet;
use crate::prolong::{check_p2_conditions, search_minimal_prolongation, P2Report, ProlongationOrder, SearchOutcome};

use report::{ErrorInfo, IndicesSection, InputInfo, Report, SearchSection, TraceStep, VerifySection};
use sysfile::{Loaded, SysFileError, SystemFile};

pub const EXIT_POSITIVE: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_SINGULAR: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_NOINPUT: i32 = 66;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Debug, Parser)]
#[command(
    name = "pureflat",
    version,
    about = "Flatness by pure prolongation for driftless systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Apply the closed-form criterion for the system's (m, n).
    Classify(Common),
    /// Search for the minimal prolongation order on the tower.
    Search(Common),
    /// Check the flat outputs and parametrization given in the file.
    Verify(Common),
    /// Brunovsky indices at the given or minimal order.
    Indices(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// System file.
    pub path: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of sample points.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Relative tolerance for the float rank path.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Largest |j| visited by the search.
    #[arg(long)]
    pub max_total: Option<usize>,
    /// Include tower evidence for every visited order.
    #[arg(long)]
    pub trace: bool,
    /// Prolongation order, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<usize>>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Classify(_) => "classify",
        Command::Search(_) => "search",
        Command::Verify(_) => "verify",
        Command::Indices(_) => "indices",
    }
}

/// Why a command stopped early.
enum Failure {
    Io(String),
    File(SysFileError),
    Lib(Error),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn info(&self) -> (i32, ErrorInfo) {
        let info = |kind, message: String| ErrorInfo {
            kind,
            message,
            line: None,
            ranks: None,
        };
        match self {
            Failure::Io(m) => (EXIT_NOINPUT, info("io", m.clone())),
            Failure::Usage(m) => (EXIT_USAGE, info("usage", m.clone())),
            Failure::File(e) => (
                EXIT_USAGE,
                ErrorInfo {
                    line: (e.line > 0).then_some(e.line),
                    ..info("system_file", e.message.clone())
                },
            ),
            Failure::Lib(e) => {
                let msg = e.to_string();
                match e {
                    Error::SingularityDetected { ranks, .. } => (
                        EXIT_SINGULAR,
                        ErrorInfo {
                            ranks: Some(ranks.clone()),
                            ..info("singularity", msg)
                        },
                    ),
                    Error::NoValidSamples { .. } => (EXIT_SINGULAR, info("no_valid_samples", msg)),
                    Error::Ambiguous(_) => (EXIT_INCONCLUSIVE, info("ambiguous", msg)),
                    Error::Precondition(_) => (EXIT_USAGE, info("precondition", msg)),
                    Error::InvalidSystem(_) | Error::ChartMismatch => (EXIT_USAGE, info("invalid_system", msg)),
                    Error::Expr(ExprError::Syntax { .. } | ExprError::UndeclaredSymbol { .. }) => {
                        (EXIT_USAGE, info("expression", msg))
                    }
                    Error::Expr(_) => (EXIT_INTERNAL, info("evaluation", msg)),
                }
            }
        }
    }
}

pub fn verdict_exit(v: Verdict) -> i32 {
    if v.is_positive() {
        EXIT_POSITIVE
    } else if v.is_negative() {
        EXIT_NEGATIVE
    } else {
        EXIT_INCONCLUSIVE
    }
}

/// Parses arguments, runs the command, writes the report and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_POSITIVE };
        }
    };
    let (report, text) = execute(&cli.command);
    let opts = common(&cli.command);
    match &opts.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("pureflat: cannot write {}: {e}", p.display());
                return EXIT_NOINPUT;
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            let _ = writeln!(out, "{text}");
        }
    }
    eprintln!("{}", summary_line(&report));
    report.exit_code
}

fn common(c: &Command) -> &Common {
    match c {
        Command::Classify(o) | Command::Search(o) | Command::Verify(o) | Command::Indices(o) => o,
    }
}

fn summary_line(r: &Report) -> String {
    let mut parts = vec![format!("{}: {}", r.command, r.input.name)];
    if let Some(v) = r.verdict {
        parts.push(
            serde_json::to_value(v)
                .map(|v| v.as_str().unwrap_or("").to_string())
                .unwrap_or_default(),
        );
    }
    if let Some(t) = &r.theorem {
        parts.push(t.clone());
    }
    if let Some(j) = &r.order {
        parts.push(format!("j = {j}"));
    }
    if let Some(k) = &r.kappa {
        parts.push(format!("kappa = {k:?}"));
    }
    if let Some(v) = &r.verify {
        parts.push(if v.passed { "pass".into() } else { "fail".into() });
    }
    if let Some(e) = &r.error {
        parts.push(format!("error: {}", e.message));
    }
    parts.join(", ")
}

/// Runs a command and returns its report with the serialized text. The
/// text is deterministic apart from `timing_ms`.
pub fn execute(cmd: &Command) -> (Report, String) {
    let start = Instant::now();
    let opts = common(cmd);
    let mut report = Report {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command_name(cmd),
        input: InputInfo {
            name: opts.path.display().to_string(),
            sha256: String::new(),
            n: None,
            m: None,
        },
        seed: 0,
        samples: 0,
        tol: 0.0,
        verdict: None,
        theorem: None,
        order: None,
        kappa: None,
        ranks: Vec::new(),
        analyses: Vec::new(),
        search: None,
        indices: None,
        verify: None,
        error: None,
        exit_code: EXIT_INTERNAL,
        timing_ms: 0.0,
    };
    let outcome = load(opts, &mut report).and_then(|(loaded, s)| match cmd {
        Command::Classify(_) => cmd_classify(&loaded, &s, &mut report),
        Command::Search(o) => cmd_search(&loaded, &s, o, &mut report),
        Command::Verify(o) => cmd_verify(&loaded, &s, o, &mut report),
        Command::Indices(o) => cmd_indices(&loaded, &s, o, &mut report),
    });
    report.exit_code = match outcome {
        Ok(code) => code,
        Err(f) => {
            let (code, info) = f.info();
            report.error = Some(info);
            code
        }
    };
    report.timing_ms = (start.elapsed().as_secs_f64() * 1e3 * 1e3).round() / 1e3;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    (report, text)
}

fn load(opts: &Common, report: &mut Report) -> Result<(Loaded, SampleSet), Failure> {
    let bytes = std::fs::read(&opts.path).map_err(|e| Failure::Io(format!("{}: {e}", opts.path.display())))?;
    report.input.sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|_| Failure::Usage("system file is not UTF-8".into()))?;
    let file = SystemFile::parse(&text).map_err(Failure::File)?;
    let defaults = SampleSet::default();
    let mut s = SampleSet::new(
        opts.seed.or(file.seed).unwrap_or(defaults.seed),
        opts.samples.or(file.samples).unwrap_or(defaults.count),
    );
    if let Some(t) = opts.tol.or(file.tol) {
        s = s.with_tol(t);
    }
    report.seed = s.seed;
    report.samples = s.count;
    report.tol = s.tol;
    let loaded = file.build().map_err(Failure::File)?;
    if !file.name.is_empty() {
        report.input.name = file.name.clone();
    }
    report.input.n = Some(loaded.system.n());
    report.input.m = Some(loaded.system.m());
    Ok((loaded, s))
}

fn take_report(r: &mut ClassificationResult, report: &mut Report) {
    if let Some(p2) = r.report.take() {
        report.ranks = p2.levels;
    }
}

fn cmd_classify(l: &Loaded, s: &SampleSet, report: &mut Report) -> Result<i32, Failure> {
    let sys = &l.system;
    let mut primary = classify(sys, s)?.ok_or_else(|| {
        Failure::Usage(format!(
            "no closed-form criterion for m = {}, n = {}; use `search`",
            sys.m(),
            sys.n()
        ))
    })?;
    take_report(&mut primary, report);
    report.verdict = Some(primary.verdict);
    report.theorem = Some(primary.label());
    report.order = primary.order.clone();
    report.kappa = primary.kappa.clone();
    let code = verdict_exit(primary.verdict);
    report.analyses.push(primary);
    if sys.m() < sys.n() {
        report.analyses.push(check_mr_flatness(sys, s)?);
    }
    report.analyses.push(check_static_feedback_linearizable(sys, s)?);
    Ok(code)
}

fn search_section(out: &SearchOutcome, trace: bool, l: &Loaded, s: &SampleSet) -> Result<SearchSection, Failure> {
    let mut sec = SearchSection::summary(out);
    if trace {
        for step in &out.steps {
            let rep = check_p2_conditions(&l.system, &step.j, s, None)?;
            sec.trace.push(TraceStep::from_report(&rep));
        }
    }
    Ok(sec)
}

fn record_found(rep: &P2Report, report: &mut Report) -> Result<(), Failure> {
    let idx = BrunovskyIndices::from_report(rep)?;
    report.order = Some(rep.j.clone());
    report.kappa = Some(idx.kappa);
    report.ranks = rep.levels.clone();
    Ok(())
}

fn cmd_search(l: &Loaded, s: &SampleSet, o: &Common, report: &mut Report) -> Result<i32, Failure> {
    let out = search_minimal_prolongation(&l.system, s, o.max_total)?;
    let mut r = search_result(&l.system, &out, s)?;
    if let Some(rep) = &out.found {
        record_found(rep, report)?;
    }
    r.report = None;
    report.search = Some(search_section(&out, o.trace, l, s)?);
    report.verdict = Some(r.verdict);
    report.theorem = Some(r.label());
    let code = verdict_exit(r.verdict);
    report.analyses.push(r);
    Ok(code)
}

/// The order from `--order`, the file, or the search, with its passing report.
fn resolve_order(l: &Loaded, s: &SampleSet, o: &Common, report: &mut Report) -> Result<Option<P2Report>, Failure> {
    let m = l.system.m();
    let given = match &o.order {
        Some(v) => Some(ProlongationOrder(v.clone())),
        None => l.order.clone(),
    };
    if let Some(j) = given {
        if j.0.len() != m {
            return Err(Failure::Usage(format!(
                "order {j} has {} entries for {m} inputs",
                j.0.len()
            )));
        }
        let rep = check_p2_conditions(&l.system, &j, s, None)?;
        report.order = Some(j);
        report.ranks = rep.levels.clone();
        return Ok(Some(rep));
    }
    let out = search_minimal_prolongation(&l.system, s, o.max_total)?;
    report.search = Some(search_section(&out, o.trace, l, s)?);
    if let Some(rep) = &out.found {
        report.order = Some(rep.j.clone());
        report.ranks = rep.levels.clone();
    }
    Ok(out.found)
}

fn cmd_indices(l: &Loaded, s: &SampleSet, o: &Common, report: &mut Report) -> Result<i32, Failure> {
    let Some(rep) = resolve_order(l, s, o, report)? else {
        report.verdict = Some(Verdict::Inconclusive);
        return Ok(EXIT_INCONCLUSIVE);
    };
    if !rep.passed() {
        report.verdict = Some(Verdict::NotP2Flat);
        return Ok(EXIT_NEGATIVE);
    }
    let idx = BrunovskyIndices::from_report(&rep)?;
    report.verdict = Some(Verdict::P2Flat);
    report.kappa = Some(idx.kappa.clone());
    report.indices = Some(IndicesSection {
        kappa_sum: idx.kappa.iter().sum(),
        linear_system: idx.linear_system(),
        rho: idx.rho,
        kappa: idx.kappa,
        g_rank: idx.g_rank,
        delta_rank: idx.delta_rank,
    });
    Ok(EXIT_POSITIVE)
}

fn cmd_verify(l: &Loaded, s: &SampleSet, o: &Common, report: &mut Report) -> Result<i32, Failure> {
    if l.outputs.is_empty() {
        return Err(Failure::Usage("verify needs an [outputs] section".into()));
    }
    let mut sec = VerifySection {
        flat_outputs: None,
        parametrization: None,
        passed: true,
    };
    match resolve_order(l, s, o, report)? {
        Some(rep) if rep.passed() => {
            let fo = verify_flat_outputs(&l.system, &rep.j, &l.outputs, s)?;
            report.kappa = Some(fo.kappa.clone());
            sec.passed &= fo.passed;
            sec.flat_outputs = Some(fo);
        }
        _ => sec.passed = false,
    }
    if let Some(spec) = &l.parametrization {
        let pr = verify_parametrization(&l.system, &l.outputs, spec, l.trajectory.as_ref(), s)?;
        sec.passed &= pr.passed;
        sec.parametrization = Some(pr);
    }
    let code = if sec.passed { EXIT_POSITIVE } else { EXIT_NEGATIVE };
    report.verify = Some(sec);
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        let singular = Failure::Lib(Error::SingularityDetected {
            context: "G2".into(),
            ranks: vec![3, 3, 2],
        });
        let (code, info) = singular.info();
        assert_eq!((code, info.kind), (EXIT_SINGULAR, "singularity"));
        assert_eq!(info.ranks, Some(vec![3, 3, 2]));
        assert_eq!(
            Failure::Lib(Error::NoValidSamples { attempts: 9 }).info().0,
            EXIT_SINGULAR
        );
        assert_eq!(Failure::Lib(Error::Ambiguous("x".into())).info().0, EXIT_INCONCLUSIVE);
        assert_eq!(Failure::Lib(Error::Precondition("x".into())).info().0, EXIT_USAGE);
    }
}
