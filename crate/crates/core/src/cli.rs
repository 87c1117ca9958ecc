//! The `arp` command line.

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::engine::{self, EnumOptions, Enumeration, RevisionOutcome, Semantics};
use crate::isomorphism::PairIso;
use crate::syntax::{self, SyntaxKind};
use crate::textio::{self, json as tj, writer, Document};
use crate::valuation::{self, PairValuation};

/// Exit status for a completed command with a positive answer.
pub const EXIT_OK: u8 = 0;
/// Completed, but the answer is negative (not verified, not a model, ...).
pub const EXIT_NEGATIVE: u8 = 1;
/// Bad input or a refused computation.
pub const EXIT_ERROR: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "arp", version, about = "Justified revisions of annotated revision programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub config: Config,
}

#[derive(Debug, Clone, Args)]
pub struct Config {
    /// Which reduct to use.
    #[arg(long, global = true, value_enum, default_value_t = SemanticsArg::Mpt)]
    pub semantics: SemanticsArg,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Largest number of candidate valuations `revise` may examine.
    #[arg(long, global = true, default_value_t = engine::DEFAULT_CAP)]
    pub cap: u64,
    /// Worker threads for `revise`.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
    /// Let `revise` search the unit chain over the closure of the constants
    /// occurring in the input. Not known to be complete.
    #[arg(long, global = true)]
    pub experimental_closure: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SemanticsArg {
    Mpt,
    Fitting,
    Both,
}

impl SemanticsArg {
    fn list(self) -> Vec<Semantics> {
        match self {
            SemanticsArg::Mpt => vec![Semantics::Mpt],
            SemanticsArg::Fitting => vec![Semantics::Fitting],
            SemanticsArg::Both => vec![Semantics::Mpt, Semantics::Fitting],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SyntaxArg {
    Old,
    New,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Init,
    Candidate,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Necessary change of the program.
    Nc { file: PathBuf },
    /// Model and s-model checks of the candidate (or init) valuation.
    Check {
        file: PathBuf,
        /// Valuation to check; defaults to the candidate when present.
        #[arg(long, value_enum)]
        target: Option<Target>,
    },
    /// Is the candidate a justified revision of init?
    Verify { file: PathBuf },
    /// Enumerate all justified revisions of init.
    Revise { file: PathBuf },
    /// Rewrite the program in the other syntax.
    Translate {
        file: PathBuf,
        #[arg(long, value_enum)]
        to: SyntaxArg,
    },
    /// Apply an isomorphism to program and valuations.
    Shift {
        file: PathBuf,
        /// File holding an `iso { ... }` block; defaults to the document's own.
        #[arg(long)]
        iso: Option<PathBuf>,
    },
    /// Least change valuation turning init into the candidate.
    Diff { file: PathBuf },
    /// Parse and validate a document.
    Validate { file: PathBuf },
}

#[derive(Debug)]
struct Failure(String);

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Failure {
        Failure(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

/// Output collected for one command.
struct Report {
    text: String,
    json: Value,
    status: u8,
    notes: Vec<String>,
}

impl Report {
    fn new(text: String, json: Value, status: u8) -> Report {
        Report { text, json, status, notes: Vec::new() }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let status = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(rendered.as_bytes());
            } else {
                let _ = out.write_all(rendered.as_bytes());
            }
            return status;
        }
    };
    run(&cli, out, err)
}

pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> u8 {
    match execute(&cli.command, &cli.config) {
        Ok(report) => {
            for n in &report.notes {
                let _ = writeln!(err, "note: {n}");
            }
            let body = match cli.config.format {
                Format::Text => report.text,
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&report.json).expect("json rendering");
                    s.push('\n');
                    s
                }
            };
            let _ = out.write_all(body.as_bytes());
            report.status
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn load(path: &Path) -> Res<Document> {
    let src = std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    textio::parse(&src).map_err(|e| Failure(format!("{}:{e}", path.display())))
}

fn need<'a>(v: &'a Option<PairValuation>, block: &str) -> Res<&'a PairValuation> {
    v.as_ref().ok_or_else(|| Failure(format!("the input has no `{block}` block")))
}

fn indented(v: &PairValuation) -> String {
    writer::valuation_lines(v).iter().map(|l| format!("  {l}\n")).collect()
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn execute(cmd: &Command, cfg: &Config) -> Res<Report> {
    match cmd {
        Command::Nc { file } => nc(&load(file)?),
        Command::Check { file, target } => check(&load(file)?, *target),
        Command::Verify { file } => verify(&load(file)?, cfg),
        Command::Revise { file } => revise(&load(file)?, cfg),
        Command::Translate { file, to } => translate(&load(file)?, *to),
        Command::Shift { file, iso } => {
            let doc = load(file)?;
            let iso = match iso {
                Some(path) => {
                    let src =
                        std::fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
                    textio::parse_iso(&src, &doc.lattice, &doc.universe)
                        .map_err(|e| Failure(format!("{}:{e}", path.display())))?
                }
                None => doc
                    .iso
                    .clone()
                    .ok_or_else(|| Failure("no isomorphism given: pass --iso or add an `iso` block".into()))?,
            };
            shift(&doc, &iso)
        }
        Command::Diff { file } => diff(&load(file)?),
        Command::Validate { file } => validate(&load(file)?),
    }
}

fn nc(doc: &Document) -> Res<Report> {
    let fix = engine::necessary_change(&doc.program)?;
    let text = format!("necessary change ({} applications):\n{}", fix.applications, indented(&fix.value));
    let json = json!({
        "necessary_change": tj::valuation(&fix.value),
        "applications": fix.applications,
        "trace": fix.trace,
    });
    Ok(Report::new(text, json, EXIT_OK))
}

fn check(doc: &Document, target: Option<Target>) -> Res<Report> {
    let (name, v) = match target {
        Some(Target::Init) => ("init", need(&doc.init, "init")?),
        Some(Target::Candidate) => ("candidate", need(&doc.candidate, "candidate")?),
        None => match &doc.candidate {
            Some(c) => ("candidate", c),
            None => ("init", need(&doc.init, "init or candidate")?),
        },
    };
    let model = engine::is_model(&doc.program, v)?;
    let smodel = engine::is_smodel(&doc.program, v)?;
    let consistent = v.is_consistent();
    let text = format!("target: {name}\nmodel: {}\ns-model: {}\nconsistent: {}\n", yes(model), yes(smodel), yes(consistent));
    let json = json!({ "target": name, "model": model, "s_model": smodel, "consistent": consistent });
    Ok(Report::new(text, json, if model { EXIT_OK } else { EXIT_NEGATIVE }))
}

fn outcome_text(o: &RevisionOutcome) -> String {
    format!(
        "semantics: {}\nverified: {}\nnecessary change:\n{}",
        o.semantics,
        yes(o.verified),
        indented(&o.necessary_change)
    )
}

fn verify(doc: &Document, cfg: &Config) -> Res<Report> {
    let bi = need(&doc.init, "init")?;
    let br = need(&doc.candidate, "candidate")?;
    let outcomes: Vec<RevisionOutcome> = cfg
        .semantics
        .list()
        .into_iter()
        .map(|s| engine::is_justified_revision(&doc.program, bi, br, s))
        .collect::<Result<_, _>>()?;
    let all = outcomes.iter().all(|o| o.verified);
    let mut text: String = outcomes.iter().map(outcome_text).collect::<Vec<_>>().join("\n");
    let mut results: Vec<Value> = outcomes
        .iter()
        .map(|o| {
            let mut v = tj::outcome(o);
            v["semantics"] = json!(o.semantics.name());
            v
        })
        .collect();
    let json = if outcomes.len() == 2 {
        let agree = outcomes[0].verified == outcomes[1].verified;
        text.push_str(&format!("\nsemantics agree: {}\n", yes(agree)));
        json!({ "semantics": "both", "results": results, "agree": agree })
    } else {
        results.remove(0)
    };
    Ok(Report::new(text, json, if all { EXIT_OK } else { EXIT_NEGATIVE }))
}

fn enumeration_text(e: &Enumeration, sem: Semantics) -> String {
    let mut s = format!("semantics: {sem}\nrevisions: {} (of {} candidates)\n", e.revisions.len(), e.space);
    for (i, o) in e.revisions.iter().enumerate() {
        s.push_str(&format!("revision {}:\n{}", i + 1, indented(&o.candidate)));
    }
    s
}

fn revise(doc: &Document, cfg: &Config) -> Res<Report> {
    let bi = need(&doc.init, "init")?;
    let opts = EnumOptions { cap: cfg.cap, jobs: cfg.jobs as usize, experimental_closure: cfg.experimental_closure };
    let sems = cfg.semantics.list();
    let runs: Vec<(Semantics, Enumeration)> = sems
        .iter()
        .map(|&s| engine::enumerate_revisions(&doc.program, bi, s, &opts).map(|e| (s, e)))
        .collect::<Result<_, _>>()?;
    let mut report = if let [(s, e)] = runs.as_slice() {
        let status = if e.revisions.is_empty() { EXIT_NEGATIVE } else { EXIT_OK };
        Report::new(enumeration_text(e, *s), tj::enumeration(e, s.name()), status)
    } else {
        let same = |a: &Enumeration, b: &Enumeration| {
            a.revisions.iter().map(|o| &o.candidate).eq(b.revisions.iter().map(|o| &o.candidate))
        };
        let agree = same(&runs[0].1, &runs[1].1);
        let mut text = runs.iter().map(|(s, e)| enumeration_text(e, *s)).collect::<Vec<_>>().join("\n");
        text.push_str(&format!("\nsemantics agree: {}\n", yes(agree)));
        let json = json!({
            "semantics": "both",
            "results": runs.iter().map(|(s, e)| tj::enumeration(e, s.name())).collect::<Vec<_>>(),
            "agree": agree,
        });
        let none = runs.iter().all(|(_, e)| e.revisions.is_empty());
        Report::new(text, json, if none { EXIT_NEGATIVE } else { EXIT_OK })
    };
    if cfg.experimental_closure && !doc.lattice.is_finite() {
        report.notes.push("unit-chain search restricted to the closure of occurring constants".into());
    }
    Ok(report)
}

fn translate(doc: &Document, to: SyntaxArg) -> Res<Report> {
    let program = match (doc.syntax(), to) {
        (SyntaxKind::Old, SyntaxArg::New) => syntax::tr1(&doc.program)?,
        (SyntaxKind::New, SyntaxArg::Old) => syntax::tr2(&doc.program)?,
        _ => doc.program.clone(),
    };
    let mut out = doc.with_program(program);
    let mut notes = Vec::new();
    if out.syntax() == SyntaxKind::Old && out.iso.take().is_some() {
        notes.push("dropped the `iso` block: isomorphisms apply to new-syntax programs only".to_string());
    }
    let text = writer::to_text(&out);
    let json = json!({ "document": text });
    let mut r = Report::new(text, json, EXIT_OK);
    r.notes = notes;
    Ok(r)
}

fn shift(doc: &Document, iso: &PairIso) -> Res<Report> {
    let mut notes = Vec::new();
    let program = if doc.syntax() == SyntaxKind::Old {
        notes.push("old-syntax program translated to new syntax before shifting".to_string());
        syntax::tr1(&doc.program)?
    } else {
        doc.program.clone()
    };
    let preserves = iso.preserves_conflation();
    if !preserves {
        notes.push("the isomorphism does not preserve conflation; justified revisions need not carry over".into());
    }
    let map = |v: &Option<PairValuation>| v.as_ref().map(|v| iso.apply_valuation(v)).transpose();
    let shifted = Document {
        lattice: doc.lattice.clone(),
        universe: doc.universe.clone(),
        program: iso.apply_program(&program)?,
        init: map(&doc.init)?,
        candidate: map(&doc.candidate)?,
        iso: None,
    };
    let text = writer::to_text(&shifted);
    let json = json!({ "document": text, "preserves_conflation": preserves });
    let mut r = Report::new(text, json, EXIT_OK);
    r.notes = notes;
    Ok(r)
}

fn diff(doc: &Document) -> Res<Report> {
    let bi = need(&doc.init, "init")?;
    let br = need(&doc.candidate, "candidate")?;
    let ok = valuation::transformable(bi, br)?;
    let d = valuation::diff(br, bi)?;
    let mut text = format!("transformable: {}\ndiff:\n{}", yes(ok), indented(&d));
    if !ok {
        text.push_str("no change valuation turns init into the candidate; diff is the top valuation\n");
    }
    let json = json!({ "transformable": ok, "diff": tj::valuation(&d) });
    Ok(Report::new(text, json, if ok { EXIT_OK } else { EXIT_NEGATIVE }))
}

fn validate(doc: &Document) -> Res<Report> {
    let lat = &doc.lattice;
    let size = lat.size().map_or_else(|| "infinite".to_string(), |n| format!("{n} elements"));
    let text = format!(
        "lattice: {} ({size}{}{})\nsyntax: {}\natoms: {}\nrules: {}\ninit: {}\ncandidate: {}\niso: {}\nok\n",
        lat.kind_name(),
        if lat.is_linear() { ", linear" } else { "" },
        if lat.is_boolean() { ", boolean" } else { "" },
        doc.syntax(),
        doc.universe.len(),
        doc.program.len(),
        yes(doc.init.is_some()),
        yes(doc.candidate.is_some()),
        yes(doc.iso.is_some()),
    );
    let json = json!({
        "lattice": lat.kind_name(),
        "size": lat.size(),
        "linear": lat.is_linear(),
        "boolean": lat.is_boolean(),
        "syntax": doc.syntax().to_string(),
        "atoms": doc.universe.len(),
        "rules": doc.program.len(),
        "valid": true,
    });
    Ok(Report::new(text, json, EXIT_OK))
}
