//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when `--assert-member` sees a non-member,
//! 2 on usage, parse and runtime errors. Diagnostics go to stderr; data goes
//! to the output path or stdout.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::classifiers::{certify_with, CertifyOptions, ClassSpec, DiskGrid, Status};
use crate::error::{Error, Result};
use crate::functions::{AnalyticFunction, DEFAULT_SERIES_ORDER};
use crate::harness::{
    run_all, run_theorem, CatalogReport, CompanionChoice, ExperimentConfig, ExperimentReport,
    Outcome, ParameterGrid, SummaryRow, TheoremId, DEFAULT_REFINEMENT_LEVELS, DEFAULT_SAMPLE_COUNT,
};
use crate::operators::{apply_multiplier, run_identity_suite, IdentityId, OperatorSpec};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SCHLICHT_THREADS";

#[derive(Parser, Debug)]
#[command(name = "schlicht", version, about = "Integral operators and class certification on the unit disk")]
struct Cli {
    /// JSON run configuration used instead of a subcommand.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Certify membership of a function in a class.
    Classify(ClassifyArgs),
    /// Apply an operator and write the resulting series.
    Apply(ApplyArgs),
    /// Check the operator identities on random series.
    Identities(IdentitiesArgs),
    /// Run inclusion-theorem experiments.
    VerifyTheorem(VerifyArgs),
    /// Summarize a saved experiment report.
    Report(ReportArgs),
}

#[derive(Args, Debug, Clone)]
struct ClassifyArgs {
    /// Function, e.g. `koebe:lambda=0,x=1`, `poly:a2=0.1`, `series:path=f.json`.
    #[arg(long = "fn", value_name = "SPEC")]
    function: String,
    /// Class, e.g. `starlike:lambda=0.5` or `convex:lambda=0,c=1`.
    #[arg(long, value_name = "SPEC")]
    class: String,
    #[arg(long, value_name = "SPEC")]
    companion: Option<String>,
    /// `default`, `default:angles=512` or `custom:r=0.1/0.5,angles=64`.
    #[arg(long, default_value = "default")]
    grid: String,
    #[arg(long, default_value_t = DEFAULT_SERIES_ORDER)]
    order: usize,
    /// Also certify the companion in its required class.
    #[arg(long)]
    strict: bool,
    /// Write the verdict as JSON (to the file if given, else stdout).
    #[arg(long, value_name = "PATH", num_args = 0..=1)]
    json: Option<Option<PathBuf>>,
    /// Exit with status 1 unless the verdict is Member.
    #[arg(long)]
    assert_member: bool,
}

#[derive(Args, Debug, Clone)]
struct ApplyArgs {
    /// `bernardi:c=1` or `jks:sigma=0.5`.
    #[arg(long, value_name = "SPEC")]
    op: String,
    #[arg(long = "fn", value_name = "SPEC")]
    function: String,
    #[arg(long, default_value_t = 64)]
    order: usize,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Args, Debug, Clone)]
struct IdentitiesArgs {
    /// Check every identity (default when no --id is given).
    #[arg(long)]
    all: bool,
    #[arg(long = "id", value_name = "NAME")]
    ids: Vec<String>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    order: usize,
    #[arg(long = "c", value_delimiter = ',', default_values_t = vec![-0.5, 0.0, 1.0, 2.5])]
    cs: Vec<f64>,
    #[arg(long = "sigma", value_delimiter = ',', default_values_t = vec![0.5, 1.0, 2.0])]
    sigmas: Vec<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    report: Format,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct VerifyArgs {
    #[arg(long, value_name = "ID", conflicts_with = "all", required_unless_present = "all")]
    id: Option<String>,
    #[arg(long)]
    all: bool,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_COUNT)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value = "default")]
    grid: String,
    #[arg(long = "refine", default_value_t = DEFAULT_REFINEMENT_LEVELS)]
    refinement_levels: usize,
    #[arg(long, default_value_t = DEFAULT_SERIES_ORDER)]
    order: usize,
    /// Companion class in the reverse close-to-convex inclusion.
    #[arg(long, value_enum, default_value = "as-stated")]
    companion: CompanionArg,
    /// Write the full JSON report here.
    #[arg(long, value_name = "PATH")]
    json: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum CompanionArg {
    AsStated,
    Lifted,
}

#[derive(Args, Debug, Clone)]
struct ReportArgs {
    #[arg(long, value_name = "PATH")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "pretty")]
    format: Format,
}

/// File form of a single invocation. Keys mirror the command-line flags.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default)]
    pub function: Option<String>,
    #[serde(default)]
    pub class: Option<String>,
    #[serde(default)]
    pub companion: Option<String>,
    #[serde(default)]
    pub op: Option<String>,
    #[serde(default)]
    pub grid: Option<String>,
    #[serde(default)]
    pub order: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub format: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub theorem: Option<String>,
    #[serde(default)]
    pub refinement_levels: Option<usize>,
    #[serde(default)]
    pub companion_class: Option<String>,
    #[serde(default)]
    pub assert_member: bool,
    #[serde(default)]
    pub strict: bool,
}

impl RunConfig {
    fn into_argv(self) -> Result<Vec<String>> {
        let mut argv = vec!["schlicht".to_string(), self.command.clone()];
        fn flag(argv: &mut Vec<String>, name: &str, v: Option<String>) {
            if let Some(v) = v {
                argv.push(format!("--{name}"));
                argv.push(v);
            }
        }
        let path = |p: Option<PathBuf>| p.map(|p| p.display().to_string());
        flag(&mut argv, "fn", self.function);
        flag(&mut argv, "class", self.class);
        flag(&mut argv, "companion", self.companion);
        flag(&mut argv, "op", self.op);
        flag(&mut argv, "grid", self.grid);
        flag(&mut argv, "order", self.order.map(|o| o.to_string()));
        flag(&mut argv, "seed", self.seed.map(|s| s.to_string()));
        flag(&mut argv, "samples", self.samples.map(|s| s.to_string()));
        flag(&mut argv, "trials", self.trials.map(|s| s.to_string()));
        flag(&mut argv, "refine", self.refinement_levels.map(|s| s.to_string()));
        flag(&mut argv, "input", path(self.input));
        match self.command.as_str() {
            "classify" | "verify-theorem" => flag(&mut argv, "json", path(self.output)),
            "apply" | "identities" => flag(&mut argv, "out", path(self.output)),
            "report" => {}
            other => return Err(Error::Config(format!("unknown command '{other}'"))),
        }
        match (self.command.as_str(), self.format) {
            ("identities", Some(f)) => flag(&mut argv, "report", Some(f)),
            ("report", Some(f)) => flag(&mut argv, "format", Some(f)),
            (_, Some(f)) => return Err(Error::Config(format!("format '{f}' is not used by {}", self.command))),
            _ => {}
        }
        if self.command == "verify-theorem" {
            match self.theorem.as_deref() {
                Some("all") | None => argv.push("--all".into()),
                Some(id) => flag(&mut argv, "id", Some(id.to_string())),
            }
            flag(&mut argv, "companion", self.companion_class);
        } else if self.theorem.is_some() || self.companion_class.is_some() {
            return Err(Error::Config("theorem settings only apply to verify-theorem".into()));
        }
        if self.assert_member {
            argv.push("--assert-member".into());
        }
        if self.strict {
            argv.push("--strict".into());
        }
        Ok(argv)
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 2, message: format!("i/o error: {e}") }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            if f.code == 2 {
                let _ = writeln!(err, "hint: run `schlicht --help` for usage");
            }
            f.code
        }
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<i32, Failure> {
    configure_threads()?;
    let command = match (cli.config, cli.command) {
        (Some(_), Some(_)) => return Err(usage("give either --config or a subcommand, not both")),
        (None, None) => return Err(usage("missing subcommand")),
        (None, Some(c)) => c,
        (Some(path), None) => {
            let text = std::fs::read_to_string(&path)?;
            let rc: RunConfig = serde_json::from_str(&text)
                .map_err(|e| usage(format!("{}: line {}: {e}", path.display(), e.line())))?;
            let argv = rc.into_argv()?;
            let parsed = Cli::try_parse_from(argv).map_err(|e| usage(e.to_string().trim().to_string()))?;
            parsed.command.ok_or_else(|| usage("configuration names no command"))?
        }
    };
    match command {
        Command::Classify(a) => classify(a, out),
        Command::Apply(a) => apply(a, out),
        Command::Identities(a) => identities(a, out),
        Command::VerifyTheorem(a) => verify(a, out, err),
        Command::Report(a) => report(a, out),
    }
}

fn configure_threads() -> std::result::Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // A pool may already exist when called more than once in one process.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn write_output(path: Option<&Path>, out: &mut dyn Write, bytes: &[u8]) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes),
        None => out.write_all(bytes),
    }
}

/// Compact form for large experiment reports.
fn to_compact_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec(value).expect("serializable");
    bytes.push(b'\n');
    bytes
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("serializable");
    bytes.push(b'\n');
    bytes
}

fn classify(a: ClassifyArgs, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let f: AnalyticFunction = a.function.parse()?;
    let spec: ClassSpec = a.class.parse()?;
    let grid: DiskGrid = a.grid.parse()?;
    let companion = a.companion.as_deref().map(str::parse::<AnalyticFunction>).transpose()?;
    let opts = CertifyOptions { order: a.order, strict: a.strict };
    let verdict = certify_with(&f, &spec, &grid, companion.as_ref(), &opts)?;
    match &a.json {
        Some(path) => write_output(path.as_deref(), out, &to_json(&verdict))?,
        None => {
            let mut line = format!(
                "{} {}: {:?} margin={:e} witness=[{:.6}, {:.6}]",
                f.label, verdict.class, verdict.status, verdict.margin, verdict.witness.re, verdict.witness.im
            );
            if let Some(r) = &verdict.reason {
                line.push_str(&format!(" ({r})"));
            }
            writeln!(out, "{line}")?;
        }
    }
    Ok(if a.assert_member && verdict.status != Status::Member { 1 } else { 0 })
}

fn apply(a: ApplyArgs, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let op: OperatorSpec = a.op.parse()?;
    let f: AnalyticFunction = a.function.parse()?;
    let series = apply_multiplier(&op, &f.to_series(a.order)?)?;
    write_output(a.out.as_deref(), out, &to_json(&series))?;
    Ok(0)
}

fn identities(a: IdentitiesArgs, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let ids: Vec<IdentityId> = if a.all || a.ids.is_empty() {
        IdentityId::ALL.to_vec()
    } else {
        a.ids.iter().map(|s| s.parse()).collect::<Result<_>>()?
    };
    if a.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let rows = run_identity_suite(&ids, a.trials, a.seed, a.order, &a.cs, &a.sigmas)?;
    let bytes = match a.report {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in &rows {
                w.serialize(r).map_err(|e| usage(format!("csv: {e}")))?;
            }
            w.into_inner().map_err(|e| usage(format!("csv: {e}")))?
        }
        Format::Pretty => {
            let mut s = String::new();
            for r in &rows {
                s.push_str(&format!(
                    "{:<28} c={:<5} sigma={:<4} max_rel_residual={:.3e}\n",
                    r.identity, r.c, r.sigma, r.max_relative_residual
                ));
            }
            s.into_bytes()
        }
    };
    write_output(a.out.as_deref(), out, &bytes)?;
    Ok(0)
}

fn verify(a: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let grid: DiskGrid = a.grid.parse()?;
    let companion = match a.companion {
        CompanionArg::AsStated => CompanionChoice::AsStated,
        CompanionArg::Lifted => CompanionChoice::Lifted,
    };
    let theorem = match &a.id {
        Some(id) => id.parse::<TheoremId>()?,
        None => TheoremId::T2_3,
    };
    let template = ExperimentConfig {
        sample_count: a.samples,
        grid,
        refinement_levels: a.refinement_levels,
        order: a.order,
        companion,
        ..ExperimentConfig::new(theorem, a.seed)
    };
    let (summary, bytes, flagged) = if a.all {
        let report = run_all(&template, &ParameterGrid::default())?;
        let flagged = flagged_lines(report.experiments.iter());
        (report.summary.clone(), to_compact_json(&report), flagged)
    } else {
        let report = run_theorem(&template)?;
        let flagged = flagged_lines(std::iter::once(&report));
        (vec![crate::harness::summarize(&report)], to_compact_json(&report), flagged)
    };
    match &a.json {
        Some(path) => {
            std::fs::write(path, &bytes)?;
            out.write_all(render_summary(&summary).as_bytes())?;
        }
        None => out.write_all(&bytes)?,
    }
    if !flagged.is_empty() {
        writeln!(err, "COUNTEREXAMPLES FLAGGED: {}", flagged.len())?;
        for line in flagged {
            writeln!(err, "  {line}")?;
        }
    }
    Ok(0)
}

fn flagged_lines<'a>(reports: impl Iterator<Item = &'a ExperimentReport>) -> Vec<String> {
    reports
        .flat_map(|r| {
            r.flagged().map(move |(p, rec)| {
                format!(
                    "{} params={} sample={} seed={} fn={} margin={:e}",
                    r.theorem,
                    serde_json::to_string(p).expect("serializable"),
                    rec.index,
                    rec.seed,
                    rec.function,
                    rec.conclusion.as_ref().map_or(f64::NAN, |v| v.margin)
                )
            })
        })
        .collect()
}

fn render_summary(rows: &[SummaryRow]) -> String {
    let mut s = format!(
        "{:<10} {:>6} {:>8} {:>9} {:>7} {:>12} {:>7} {:>8} {:>10}\n",
        "theorem", "points", "samples", "confirmed", "vacuous", "inconclusive", "flagged", "hit_rate", "unconfirmed"
    );
    for r in rows {
        s.push_str(&format!(
            "{:<10} {:>6} {:>8} {:>9} {:>7} {:>12} {:>7} {:>8.3} {:>10}\n",
            r.theorem.name(),
            r.points,
            r.counts.total(),
            r.counts.confirmed,
            r.counts.vacuous,
            r.counts.inconclusive,
            r.counts.counterexample_flagged,
            r.hypothesis_hit_rate,
            r.points_without_confirmation
        ));
    }
    s
}

fn report(a: ReportArgs, out: &mut dyn Write) -> std::result::Result<i32, Failure> {
    let text = std::fs::read_to_string(&a.input)?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: line {}: {e}", a.input.display(), e.line())))?;
    let parse_err = |e: serde_json::Error| Error::Parse(format!("{}: {e}", a.input.display()));
    let rows = if value.get("experiments").is_some() {
        serde_json::from_value::<CatalogReport>(value).map_err(parse_err)?.summary
    } else {
        vec![crate::harness::summarize(&serde_json::from_value::<ExperimentReport>(value).map_err(parse_err)?)]
    };
    let bytes = match a.format {
        Format::Pretty => render_summary(&rows).into_bytes(),
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["theorem", "points", "samples", "confirmed", "vacuous", "inconclusive", "counterexample_flagged", "hypothesis_hit_rate"])
                .map_err(|e| usage(format!("csv: {e}")))?;
            for r in &rows {
                w.write_record([
                    r.theorem.name().to_string(),
                    r.points.to_string(),
                    r.counts.total().to_string(),
                    r.counts.confirmed.to_string(),
                    r.counts.vacuous.to_string(),
                    r.counts.inconclusive.to_string(),
                    r.counts.counterexample_flagged.to_string(),
                    r.hypothesis_hit_rate.to_string(),
                ])
                .map_err(|e| usage(format!("csv: {e}")))?;
            }
            w.into_inner().map_err(|e| usage(format!("csv: {e}")))?
        }
    };
    out.write_all(&bytes)?;
    Ok(0)
}

/// Counts a report's outcomes of one kind; convenient in scripts and tests.
pub fn count_outcomes(report: &ExperimentReport, outcome: Outcome) -> usize {
    report
        .points
        .iter()
        .flat_map(|p| &p.records)
        .filter(|r| r.outcome == outcome)
        .count()
}
