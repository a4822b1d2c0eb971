//! Command-line surface of the toolkit: argument parsing, file formats and
//! the corpus runner. `main.rs` is a thin wrapper around [`run`].

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use jreal_core::calculus::{
    annotate_proof, check_proof, decompose_impl, erase_proof, proof_from_json, proof_to_json, search, DerivationTree,
    RuleId, SearchOutcome,
};
use jreal_core::jl_hilbert::{check, JLProof};
use jreal_core::nested::{fm, Rhs, Sequent};
use jreal_core::realiser::{Realised, Realiser, RealiserError};
use jreal_core::syntax::{
    erase, forget, is_normal, parse_annotated, parse_jformula, parse_modal, AnnotatedFormula, Logic, ModalFormula,
    ParseError,
};

pub const DEFAULT_DEPTH: usize = 12;
pub const DEFAULT_GLUE_BUDGET: usize = jreal_core::realiser::DEFAULT_GLUE_BUDGET;

/// Environment variable holding the first constant index handed out by the
/// realiser (and the RNG seed of the acceptance runner).
pub const SEED_VAR: &str = "JREAL_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unknown: {0}")]
    Unknown(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Unknown(_) => 2,
            CliError::Internal(_) => 3,
        }
    }
}

impl From<RealiserError> for CliError {
    fn from(e: RealiserError) -> Self {
        match e {
            RealiserError::Unknown(m) => CliError::Unknown(m),
            RealiserError::Invariant(m) => CliError::Internal(m),
            RealiserError::Input(m) => CliError::Invalid(m),
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "jreal", version, about = "Nested-sequent proof search and justification realisation")]
pub struct Cli {
    /// Modal logic (ik, ikt, ik4, is4). Defaults to ik, or to the logic recorded in an input file.
    #[arg(long, global = true, value_parser = parse_logic)]
    pub logic: Option<Logic>,
    /// Maximal proof height tried by the search.
    #[arg(long, global = true, default_value_t = DEFAULT_DEPTH)]
    pub depth: usize,
    /// Node budget of each propositional glue search.
    #[arg(long, global = true, default_value_t = DEFAULT_GLUE_BUDGET)]
    pub glue_budget: usize,
    /// Also write the produced artifact (JSON) to this file.
    #[arg(long, global = true)]
    pub emit: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a modal, annotated or justification formula and print it back.
    Parse { formula: String },
    /// Search for a nested-sequent proof of a modal formula.
    Prove { formula: String },
    /// Check a nested-sequent proof file.
    CheckProof { proof: PathBuf },
    /// Decompose implication steps and annotate a proof file.
    Annotate { proof: PathBuf },
    /// Realise a proof file and emit the realisation with its certificate.
    Realise { proof: PathBuf },
    /// Check a Hilbert certificate (or the output of `realise`).
    CheckJl { cert: PathBuf },
    /// Print the forgetful projection of a justification formula.
    Forget { formula: String },
    /// Run the whole pipeline on every formula of a file.
    Corpus { file: PathBuf },
}

fn parse_logic(s: &str) -> Result<Logic, String> {
    Logic::parse(s).ok_or_else(|| format!("unknown logic `{s}` (expected ik, ikt, ik4 or is4)"))
}

/// First constant index, from [`SEED_VAR`] when set.
pub fn seed_from_env() -> Result<u32> {
    match std::env::var(SEED_VAR) {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Invalid(format!("{SEED_VAR} must be a natural number"))),
        Err(_) => Ok(0),
    }
}

// ---------------------------------------------------------------------------
// Pipeline

/// Pipeline settings shared by the subcommands and the corpus runner.
#[derive(Clone, Copy, Debug)]
pub struct Options {
    pub logic: Logic,
    pub depth: usize,
    pub glue_budget: usize,
    pub first_const: u32,
}

impl Default for Options {
    fn default() -> Self {
        Options { logic: Logic::IK, depth: DEFAULT_DEPTH, glue_budget: DEFAULT_GLUE_BUDGET, first_const: 0 }
    }
}

pub fn prove(f: &ModalFormula, opts: &Options) -> Result<DerivationTree<()>> {
    match search(&Sequent::goal(f.clone()), opts.logic, opts.depth) {
        SearchOutcome::Proved(d) => {
            check_proof(&d, opts.logic).map_err(|e| CliError::Internal(format!("search returned a bad proof: {e}")))?;
            Ok(d)
        }
        SearchOutcome::Unknown => {
            Err(CliError::Unknown(format!("no proof of height <= {} found in {}", opts.depth, opts.logic)))
        }
    }
}

/// Decomposes implication steps and annotates; the result is re-checked.
pub fn annotate(d: &DerivationTree<()>, logic: Logic) -> Result<DerivationTree<u32>> {
    let dec = decompose_impl(d).map_err(|e| CliError::Invalid(e.to_string()))?;
    let a = annotate_proof(&dec).map_err(|e| CliError::Invalid(e.to_string()))?;
    check_proof(&a, logic).map_err(|e| CliError::Internal(format!("annotated proof rejected: {e}")))?;
    Ok(a)
}

/// The root formula `A` of an annotated proof of `A◦`.
pub fn root_formula(d: &DerivationTree<u32>) -> Result<AnnotatedFormula> {
    match (&d.conclusion.lhs[..], &d.conclusion.rhs) {
        ([], Rhs::Out(a)) => Ok(a.clone()),
        _ => Err(CliError::Invalid("endsequent must be a single output formula".into())),
    }
}

pub fn realise(d: &DerivationTree<u32>, opts: &Options) -> Result<Realised> {
    let mut r = Realiser::new(opts.logic, opts.glue_budget, opts.first_const);
    Ok(r.realise_proof(d)?)
}

/// Independent re-validation of a realisation: the certificate checks and
/// proves the realised formula, which projects back onto `a`.
pub fn validate(res: &Realised, a: &AnnotatedFormula) -> Result<()> {
    let proved = check(&res.certificate).map_err(|e| CliError::Internal(format!("certificate rejected: {e}")))?;
    if proved != res.formula {
        return Err(CliError::Internal(format!("certificate proves `{proved}`, not `{}`", res.formula)));
    }
    if forget(&res.formula) != erase(a) {
        return Err(CliError::Internal("forgetful projection differs from the input".into()));
    }
    if !is_normal(&res.realisation, a) {
        return Err(CliError::Internal("realisation is not normal".into()));
    }
    Ok(())
}

pub fn realisation_json(res: &Realised) -> Value {
    let map: serde_json::Map<String, Value> =
        res.realisation.iter().map(|(i, t)| (i.to_string(), Value::String(t.to_string()))).collect();
    json!({
        "realisation": map,
        "formula": res.formula.to_string(),
        "certificate": res.certificate.to_json(),
    })
}

// ---------------------------------------------------------------------------
// Corpus

/// One corpus line: the formula and the logic it is run in.
#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub source: String,
    pub formula: ModalFormula,
    pub logic: Logic,
}

/// Reads a corpus: one formula per line, optionally prefixed by `logic:`.
/// Blank lines and lines starting with `%` are skipped.
pub fn parse_corpus(text: &str, default: Logic) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let (logic, src) = match line.split_once(':') {
            Some((l, rest)) if Logic::parse(l.trim()).is_some() => (Logic::parse(l.trim()).unwrap(), rest.trim()),
            _ => (default, line),
        };
        let formula = parse_modal(src).map_err(|e| CliError::Invalid(format!("line {}: {e}", n + 1)))?;
        out.push(CorpusEntry { source: src.to_string(), formula, logic });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusRow {
    pub formula: String,
    pub logic: String,
    pub proof_found: bool,
    pub realisation_ok: bool,
    pub cert_ok: bool,
    pub round_trip_ok: bool,
    /// Failure description; empty when every check passed.
    pub note: String,
    pub millis: u128,
}

impl CorpusRow {
    pub fn ok(&self) -> bool {
        self.proof_found && self.realisation_ok && self.cert_ok && self.round_trip_ok
    }

    fn severity(&self) -> i32 {
        if self.ok() {
            0
        } else if self.note.starts_with("internal") {
            3
        } else {
            2
        }
    }
}

pub fn corpus_row(e: &CorpusEntry, opts: &Options) -> CorpusRow {
    let start = Instant::now();
    let mut row = CorpusRow {
        formula: e.source.clone(),
        logic: e.logic.to_string(),
        proof_found: false,
        realisation_ok: false,
        cert_ok: false,
        round_trip_ok: false,
        note: String::new(),
        millis: 0,
    };
    let opts = Options { logic: e.logic, ..*opts };
    let outcome = (|| -> Result<()> {
        let d = prove(&e.formula, &opts)?;
        row.proof_found = true;
        let a = annotate(&d, opts.logic)?;
        let res = realise(&a, &opts)?;
        let root = root_formula(&a)?;
        row.realisation_ok = is_normal(&res.realisation, &root);
        row.cert_ok = check(&res.certificate).map(|f| f == res.formula).unwrap_or(false);
        row.round_trip_ok = forget(&res.formula) == e.formula;
        if !row.ok() {
            return Err(CliError::Internal("realisation failed re-validation".into()));
        }
        Ok(())
    })();
    if let Err(err) = outcome {
        row.note = err.to_string();
    }
    row.millis = start.elapsed().as_millis();
    row
}

/// Runs every entry, spreading the work over the available cores.
pub fn run_corpus(entries: &[CorpusEntry], opts: &Options) -> Vec<CorpusRow> {
    // Formulas share structure through `Rc`, so workers re-parse the sources.
    let jobs: Vec<(String, Logic)> = entries.iter().map(|e| (e.formula.to_string(), e.logic)).collect();
    let sources: Vec<&str> = entries.iter().map(|e| e.source.as_str()).collect();
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let rows = Mutex::new(vec![None; jobs.len()]);
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((src, logic)) = jobs.get(i) else { break };
                let formula = parse_modal(src).expect("printed formulas parse");
                let e = CorpusEntry { source: sources[i].to_string(), formula, logic: *logic };
                let row = corpus_row(&e, opts);
                rows.lock().expect("corpus rows")[i] = Some(row);
            });
        }
    });
    rows.into_inner().expect("corpus rows").into_iter().map(|r| r.expect("every row filled")).collect()
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn render_table(rows: &[CorpusRow]) -> String {
    let header = ["formula", "logic", "proof found", "realisation ok", "cert ok", "round-trip ok"];
    let body: Vec<[String; 6]> = rows
        .iter()
        .map(|r| {
            [
                r.formula.clone(),
                r.logic.clone(),
                yes(r.proof_found).into(),
                yes(r.realisation_ok).into(),
                yes(r.cert_ok).into(),
                yes(r.round_trip_ok).into(),
            ]
        })
        .collect();
    let mut width = header.map(str::len);
    for r in &body {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells.iter().zip(width).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join(" | ").trim_end().to_string()
    };
    let mut out = vec![line(header.to_vec())];
    out.push(width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
    for r in &body {
        out.push(line(r.iter().map(String::as_str).collect()));
    }
    for r in rows.iter().filter(|r| !r.note.is_empty()) {
        out.push(format!("  {}: {}", r.formula, r.note));
    }
    out.join("\n")
}

// ---------------------------------------------------------------------------
// Proof files

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

/// A proof file, annotated or not.
pub enum ProofFile {
    Plain(DerivationTree<()>),
    Annotated(DerivationTree<u32>),
}

pub fn read_proof(v: &Value) -> Result<(ProofFile, Option<Logic>)> {
    match proof_from_json::<()>(v) {
        Ok((d, l)) => Ok((ProofFile::Plain(d), l)),
        Err(plain) => match proof_from_json::<u32>(v) {
            Ok((d, l)) => Ok((ProofFile::Annotated(d), l)),
            Err(ann) => Err(CliError::Invalid(format!("not a proof: {plain}; as an annotated proof: {ann}"))),
        },
    }
}

fn pick_logic(flag: Option<Logic>, file: Option<Logic>) -> Result<Logic> {
    match (flag, file) {
        (Some(a), Some(b)) if a != b => Err(CliError::Invalid(format!("--logic {a} conflicts with the file's logic {b}"))),
        (a, b) => Ok(a.or(b).unwrap_or(Logic::IK)),
    }
}

pub fn render_proof<A: jreal_core::syntax::Ann>(d: &DerivationTree<A>) -> String {
    fn go<A: jreal_core::syntax::Ann>(d: &DerivationTree<A>, indent: usize, out: &mut Vec<String>) {
        out.push(format!("{}{}  {}", "  ".repeat(indent), d.rule, d.conclusion));
        for p in &d.premises {
            go(p, indent + 1, out);
        }
    }
    let mut out = Vec::new();
    go(d, 0, &mut out);
    out.join("\n")
}

// ---------------------------------------------------------------------------
// Entry point

struct Io<'a> {
    out: &'a mut dyn Write,
    emit: Option<&'a Path>,
    format: Format,
}

impl Io<'_> {
    fn say(&mut self, s: impl AsRef<str>) -> Result<()> {
        match writeln!(self.out, "{}", s.as_ref()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Internal(e.to_string())),
            _ => Ok(()),
        }
    }

    /// Writes the artifact to `--emit` and prints it in json mode, or
    /// prints `text` otherwise.
    fn artifact(&mut self, v: &Value, text: impl AsRef<str>) -> Result<()> {
        let pretty = serde_json::to_string_pretty(v).expect("json");
        if let Some(p) = self.emit {
            std::fs::write(p, &pretty).map_err(|e| CliError::Invalid(format!("{}: {e}", p.display())))?;
        }
        match self.format {
            Format::Json => self.say(pretty),
            Format::Text => self.say(text),
        }
    }
}

/// Parses `argv` (including the program name), runs the command and
/// returns the exit code. Errors are reported on `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return 1;
            }
            let _ = write!(out, "{}", e.render());
            return 0;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let mut io = Io { out, emit: cli.emit.as_deref(), format: cli.format };
    let opts = |logic: Logic| -> Result<Options> {
        Ok(Options { logic, depth: cli.depth, glue_budget: cli.glue_budget, first_const: seed_from_env()? })
    };
    match &cli.command {
        Command::Parse { formula } => parse_cmd(formula, &mut io)?,
        Command::Prove { formula } => {
            let logic = pick_logic(cli.logic, None)?;
            let f = parse_modal(formula)?;
            let d = prove(&f, &opts(logic)?)?;
            io.artifact(&proof_to_json(&d, Some(logic)), render_proof(&d))?;
        }
        Command::CheckProof { proof } => {
            let (p, file_logic) = read_proof(&read_json(proof)?)?;
            let logic = pick_logic(cli.logic, file_logic)?;
            let (res, concl) = match &p {
                ProofFile::Plain(d) => (check_proof(d, logic), d.conclusion.to_string()),
                ProofFile::Annotated(d) => (check_proof(d, logic), d.conclusion.to_string()),
            };
            res.map_err(|e| CliError::Invalid(format!("proof rejected {e}")))?;
            io.artifact(&json!({"valid": true, "logic": logic.name(), "conclusion": concl}), format!("valid in {logic}: {concl}"))?;
        }
        Command::Annotate { proof } => {
            let (p, file_logic) = read_proof(&read_json(proof)?)?;
            let logic = pick_logic(cli.logic, file_logic)?;
            let a = annotated_from(p, logic)?;
            io.artifact(&proof_to_json(&a, Some(logic)), render_proof(&a))?;
        }
        Command::Realise { proof } => {
            let (p, file_logic) = read_proof(&read_json(proof)?)?;
            let logic = pick_logic(cli.logic, file_logic)?;
            let a = annotated_from(p, logic)?;
            let root = root_formula(&a)?;
            let res = realise(&a, &opts(logic)?)?;
            validate(&res, &root)?;
            let mut text = vec![format!("annotated: {root}"), format!("realised:  {}", res.formula)];
            text.extend(res.realisation.iter().map(|(i, t)| format!("  r({i}) = {t}")));
            text.push(format!("certificate: {} steps, checked", res.certificate.steps.len()));
            io.artifact(&realisation_json(&res), text.join("\n"))?;
        }
        Command::CheckJl { cert } => {
            let v = read_json(cert)?;
            let (proof_v, claimed) = match v.get("certificate") {
                Some(c) => (c.clone(), v.get("formula").and_then(Value::as_str).map(parse_jformula).transpose()?),
                None => (v, None),
            };
            let p = JLProof::from_json(&proof_v).map_err(CliError::Invalid)?;
            if let Some(l) = cli.logic {
                if l != p.logic {
                    return Err(CliError::Invalid(format!("--logic {l} conflicts with the certificate's logic")));
                }
            }
            let thm = check(&p).map_err(|e| CliError::Invalid(format!("certificate rejected: {e}")))?;
            if let Some(c) = claimed {
                if c != thm {
                    return Err(CliError::Invalid(format!("certificate proves `{thm}`, file claims `{c}`")));
                }
            }
            io.artifact(&json!({"valid": true, "theorem": thm.to_string()}), thm.to_string())?;
        }
        Command::Forget { formula } => {
            let f = parse_jformula(formula)?;
            let g = forget(&f);
            io.artifact(&json!({"formula": f.to_string(), "projection": g.to_string()}), g.to_string())?;
        }
        Command::Corpus { file } => {
            let text = std::fs::read_to_string(file).map_err(|e| CliError::Invalid(format!("{}: {e}", file.display())))?;
            let entries = parse_corpus(&text, pick_logic(cli.logic, None)?)?;
            let start = Instant::now();
            let rows = run_corpus(&entries, &opts(Logic::IK)?);
            let elapsed: Duration = start.elapsed();
            let passed = rows.iter().filter(|r| r.ok()).count();
            let v = json!({ "rows": rows, "passed": passed, "total": rows.len(), "millis": elapsed.as_millis() });
            let summary = format!("{}\n{passed}/{} passed in {:.2?}", render_table(&rows), rows.len(), elapsed);
            io.artifact(&v, summary)?;
            return Ok(rows.iter().map(CorpusRow::severity).max().unwrap_or(0));
        }
    }
    Ok(0)
}

/// Brings a proof file into the shape the realiser wants: checked,
/// implication steps decomposed, annotated.
fn annotated_from(p: ProofFile, logic: Logic) -> Result<DerivationTree<u32>> {
    match p {
        ProofFile::Annotated(d) => {
            check_proof(&d, logic).map_err(|e| CliError::Invalid(format!("proof rejected {e}")))?;
            if d.rules().contains(&RuleId::ImpL) {
                annotate(&erase_proof(&d), logic)
            } else {
                Ok(d)
            }
        }
        ProofFile::Plain(d) => {
            check_proof(&d, logic).map_err(|e| CliError::Invalid(format!("proof rejected {e}")))?;
            annotate(&d, logic)
        }
    }
}

fn parse_cmd(src: &str, io: &mut Io<'_>) -> Result<()> {
    if let Ok(f) = parse_modal(src) {
        let v = json!({"kind": "modal", "formula": f.to_string(), "depth": f.depth(), "modalities": f.modal_count()});
        return io.artifact(&v, f.to_string());
    }
    if let Ok(f) = parse_annotated(src) {
        let v = json!({"kind": "annotated", "formula": f.to_string(), "erased": erase(&f).to_string(), "sequent_formula": fm(&Sequent::goal(f.clone())).to_string()});
        return io.artifact(&v, f.to_string());
    }
    match parse_jformula(src) {
        Ok(f) => io.artifact(&json!({"kind": "justification", "formula": f.to_string()}), f.to_string()),
        Err(je) => {
            // Report whichever reading got furthest.
            let me = parse_modal(src).unwrap_err();
            let ae = parse_annotated(src).unwrap_err();
            let best = [me, ae, je].into_iter().max_by_key(|e| (e.line, e.col)).expect("three errors");
            Err(best.into())
        }
    }
}
