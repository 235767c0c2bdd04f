//! `reqspec` command-line tool.
//!
//! Exit codes: 0 success, 1 lint findings at or above `--fail-on`,
//! 2 parse, config or I/O error, 3 unknown requirement, release or
//! development.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use walkdir::WalkDir;

use reqspec::dataset::{extract_all, extract_release_dataset, write_datasets, DatasetConfig, DatasetError};
use reqspec::index::{
    build_index, query_behavior, query_deployment, query_dev_changes, query_release_diff, query_requirements, IndexEntry,
    IndexError, SpecIndex,
};
use reqspec::lexicon::{load_lexicon, Lexicon};
use reqspec::lint::{lint_corpus, to_jsonl, to_text, LintConfig, Severity};
use reqspec::parser::parse_document_lossy;
use reqspec::resolver::{materialize, BehaviorDiff, ResolveError};
use reqspec::synth::{generate, SynthConfig};
use reqspec::{
    parse_registry, validate_corpus, DeploymentScope, DeploymentType, DevelopmentId, DevelopmentRegistry, ParseError,
    ReleaseId, SpecDocument,
};

#[derive(Parser)]
#[command(name = "reqspec", version, about = "Parse, resolve, lint and query tagged requirement specifications")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FailOn {
    High,
    Medium,
    Low,
    None,
}

#[derive(Args, Clone)]
struct CorpusArgs {
    /// Specification files or directories of `.spec` files.
    paths: Vec<PathBuf>,
    /// Development registry (`<DevelopmentId> <ReleaseId>` per line).
    #[arg(long)]
    registry: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct LexiconArg {
    /// Procedure lexicon (JSON object of canonical name to aliases).
    #[arg(long)]
    lexicon: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and cross-check a corpus.
    Validate(CorpusArgs),
    /// Print the effective text of one requirement at a release.
    Resolve {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long)]
        id: String,
        #[arg(long)]
        release: ReleaseId,
        /// `both`, `SA` or `NSA`.
        #[arg(long, default_value = "both")]
        deployment: DeploymentScope,
    },
    /// Report specification quality findings.
    Lint {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        lexicon: LexiconArg,
        /// Lint settings (JSON).
        #[arg(long, env = "REQSPEC_CONFIG")]
        config: Option<PathBuf>,
        /// Lowest severity that makes the command exit with status 1.
        #[arg(long, value_enum, default_value_t = FailOn::High)]
        fail_on: FailOn,
    },
    /// Build a query index file.
    Index {
        #[command(subcommand)]
        command: IndexCommand,
    },
    /// Ask one of the five procedure questions.
    Query {
        #[command(subcommand)]
        query: Query,
    },
    /// Write per-release JSON Lines datasets.
    Extract {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[arg(long, conflicts_with = "all", required_unless_present = "all")]
        release: Option<ReleaseId>,
        #[arg(long)]
        all: bool,
        #[arg(long)]
        out: PathBuf,
        /// Records with fewer tokens are dropped as headers.
        #[arg(long, default_value_t = DatasetConfig::default().min_tokens)]
        min_tokens: usize,
    },
    /// Generate a synthetic corpus with known defects and its ground truth.
    GenCorpus {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 200)]
        requirements: usize,
        #[arg(long, default_value_t = 4)]
        documents: usize,
        #[arg(long, default_value_t = 12)]
        sections: usize,
        #[arg(long, default_value_t = 10)]
        dups: usize,
        #[arg(long, default_value_t = 8)]
        over_length: usize,
        #[arg(long, default_value_t = 12)]
        aliases: usize,
        #[arg(long, default_value_t = 3)]
        dispersed: usize,
    },
}

#[derive(Subcommand)]
enum IndexCommand {
    Build {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        lexicon: LexiconArg,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Clone)]
struct Source {
    /// Prebuilt index; when absent the index is built from the corpus.
    #[arg(long)]
    index: Option<PathBuf>,
    #[command(flatten)]
    corpus: CorpusArgs,
    #[command(flatten)]
    lexicon: LexiconArg,
    /// Procedure name or alias.
    #[arg(long = "proc")]
    procedure: String,
}

#[derive(Subcommand)]
enum Query {
    /// How does the procedure behave in a release?
    Behavior {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        release: ReleaseId,
    },
    /// How did the procedure change between two releases?
    Diff {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        from: ReleaseId,
        #[arg(long)]
        to: ReleaseId,
    },
    /// How did a development modify the procedure?
    Dev {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        dev: DevelopmentId,
    },
    /// Which requirements relate to the procedure?
    Reqs {
        #[command(flatten)]
        source: Source,
    },
    /// How does the procedure behave under one deployment?
    Deployment {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        dep: DeploymentType,
        /// Defaults to the latest release.
        #[arg(long)]
        release: Option<ReleaseId>,
    },
}

enum Failure {
    /// Parse, config or I/O problem.
    Input(String),
    /// Unknown requirement, release or development.
    Unknown(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Unknown(_) => 3,
        }
    }
}

impl From<IndexError> for Failure {
    fn from(e: IndexError) -> Self {
        match e {
            IndexError::UnknownRelease(_) | IndexError::UnknownDevelopment(_) => Failure::Unknown(e.to_string()),
            IndexError::Resolve(_) | IndexError::Format(_) => Failure::Input(e.to_string()),
        }
    }
}

impl From<DatasetError> for Failure {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::UnknownRelease(_) => Failure::Unknown(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<ResolveError> for Failure {
    fn from(e: ResolveError) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

/// Writes to stdout, ignoring errors so a closed pipe ends output quietly.
macro_rules! say {
    (raw $($arg:tt)*) => {{
        let _ = write!(std::io::stdout().lock(), $($arg)*);
    }};
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($arg)*);
    }};
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn spec_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    if paths.is_empty() {
        return Err(Failure::Input("no corpus paths given".into()));
    }
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            for entry in WalkDir::new(p).sort_by_file_name() {
                let entry = entry.map_err(|e| Failure::Input(e.to_string()))?;
                if entry.file_type().is_file() && entry.path().extension().is_some_and(|x| x == "spec") {
                    files.push(entry.into_path());
                }
            }
        } else if p.is_file() {
            files.push(p.clone());
        } else {
            return Err(Failure::Input(format!("{}: no such file or directory", p.display())));
        }
    }
    Ok(files)
}

struct Corpus {
    docs: Vec<SpecDocument>,
    /// Document name to source path, for error reports.
    paths: BTreeMap<String, String>,
    reg: DevelopmentRegistry,
}

/// Parses every file, returning the documents and all parse errors with
/// their file path as location.
fn parse_corpus(args: &CorpusArgs) -> Result<(Corpus, Vec<ParseError>), Failure> {
    if let Some(r) = &args.registry {
        if !r.is_file() {
            return Err(Failure::Input(format!("{}: no such file", r.display())));
        }
    }
    let files = spec_files(&args.paths)?;
    let reg = match &args.registry {
        Some(p) => parse_registry(&read(p)?).map_err(|e| Failure::Input(format!("{}:{e}", p.display())))?,
        None => DevelopmentRegistry::new(),
    };
    let mut docs = Vec::new();
    let mut paths = BTreeMap::new();
    let mut errors = Vec::new();
    for f in files {
        let shown = f.display().to_string();
        let (mut doc, errs) = parse_document_lossy(&read(&f)?);
        if doc.name.is_empty() {
            doc.name = f.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        }
        errors.extend(errs.into_iter().map(|e| e.in_document(shown.clone())));
        paths.insert(doc.name.clone(), shown);
        docs.push(doc);
    }
    Ok((Corpus { docs, paths, reg }, errors))
}

/// Parses and validates; any error (not warning) is fatal.
fn load_corpus(args: &CorpusArgs) -> Result<Corpus, Failure> {
    let (corpus, mut errors) = parse_corpus(args)?;
    errors.extend(corpus_errors(&corpus));
    let fatal: Vec<String> = errors.iter().filter(|e| !e.kind.is_warning()).map(ToString::to_string).collect();
    if fatal.is_empty() {
        Ok(corpus)
    } else {
        Err(Failure::Input(fatal.join("\n")))
    }
}

fn corpus_errors(corpus: &Corpus) -> Vec<ParseError> {
    validate_corpus(&corpus.docs, &corpus.reg)
        .into_iter()
        .map(|mut e| {
            if let Some(p) = e.document.as_ref().and_then(|d| corpus.paths.get(d)) {
                e.document = Some(p.clone());
            }
            e
        })
        .collect()
}

fn load_lexicon_arg(arg: &LexiconArg) -> Result<Lexicon, Failure> {
    match &arg.lexicon {
        Some(p) => load_lexicon(&read(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => Ok(Lexicon::new()),
    }
}

fn json_line(value: &impl serde::Serialize) -> String {
    serde_json::to_string(value).expect("output serializes")
}

fn cmd_validate(args: &CorpusArgs, format: Format) -> Outcome {
    let (corpus, mut errors) = parse_corpus(args)?;
    errors.extend(corpus_errors(&corpus));
    for e in &errors {
        match format {
            Format::Text => {
                let label = if e.kind.is_warning() { "warning" } else { "error" };
                say!("{label}: {e}");
            }
            Format::Json => say!("{}", json_line(e)),
        }
    }
    Ok(if errors.iter().any(|e| !e.kind.is_warning()) { 2 } else { 0 })
}

fn cmd_resolve(corpus: &CorpusArgs, id: &str, release: ReleaseId, dep: DeploymentScope, format: Format) -> Outcome {
    let c = load_corpus(corpus)?;
    let req = c.docs.iter().find_map(|d| d.find(id)).ok_or_else(|| Failure::Unknown(format!("unknown requirement {id}")))?;
    let resolved = materialize(req, release, dep, &c.reg)?
        .ok_or_else(|| Failure::Unknown(format!("{id} has no version valid at {release}")))?;
    match format {
        Format::Text => say!("{}", resolved.text),
        Format::Json => say!("{}", json_line(&resolved)),
    }
    Ok(0)
}

fn cmd_lint(corpus: &CorpusArgs, lexicon: &LexiconArg, config: Option<&Path>, fail_on: FailOn, format: Format) -> Outcome {
    let config = match config {
        Some(p) => LintConfig::from_json(&read(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?,
        None => LintConfig::default(),
    };
    let c = load_corpus(corpus)?;
    let lex = load_lexicon_arg(lexicon)?;
    let findings = lint_corpus(&c.docs, &c.reg, &lex, &config);
    match format {
        Format::Text => say!(raw "{}", to_text(&findings)),
        Format::Json => say!(raw "{}", to_jsonl(&findings)),
    }
    let threshold = match fail_on {
        FailOn::High => Some(Severity::High),
        FailOn::Medium => Some(Severity::Medium),
        FailOn::Low => Some(Severity::Low),
        FailOn::None => None,
    };
    Ok(u8::from(threshold.is_some_and(|t| findings.iter().any(|f| f.severity >= t))))
}

fn open_index(source: &Source) -> Result<SpecIndex, Failure> {
    if let Some(p) = &source.index {
        return Ok(SpecIndex::from_json(&read(p)?)?);
    }
    let c = load_corpus(&source.corpus)?;
    let lex = load_lexicon_arg(&source.lexicon)?;
    Ok(build_index(&c.docs, &c.reg, &lex)?)
}

fn print_entries(entries: &[IndexEntry], format: Format) {
    for e in entries {
        match format {
            Format::Text => say!("{}: {}", e.id, e.text),
            Format::Json => say!("{}", json_line(e)),
        }
    }
}

fn print_diffs(diffs: &[BehaviorDiff], format: Format) {
    use reqspec::diff::SegmentKind;
    for d in diffs {
        match format {
            Format::Text => {
                let causes: Vec<&str> = d.causes.iter().map(DevelopmentId::as_str).collect();
                let causes = if causes.is_empty() { "none".to_string() } else { causes.join(", ") };
                say!("{} {} -> {} (causes: {causes})", d.id, d.release_a, d.release_b);
                for s in &d.segments {
                    let mark = match s.kind {
                        SegmentKind::Added => '+',
                        SegmentKind::Removed => '-',
                        SegmentKind::Unchanged => ' ',
                    };
                    say!("  {mark} {}", s.text);
                }
            }
            Format::Json => say!("{}", json_line(d)),
        }
    }
}

fn cmd_query(query: &Query, format: Format) -> Outcome {
    match query {
        Query::Behavior { source, release } => {
            let ix = open_index(source)?;
            print_entries(&query_behavior(&ix, &source.procedure, *release)?, format);
        }
        Query::Diff { source, from, to } => {
            let ix = open_index(source)?;
            print_diffs(&query_release_diff(&ix, &source.procedure, *from, *to)?, format);
        }
        Query::Dev { source, dev } => {
            let ix = open_index(source)?;
            print_diffs(&query_dev_changes(&ix, &source.procedure, dev)?, format);
        }
        Query::Reqs { source } => {
            let ix = open_index(source)?;
            for id in query_requirements(&ix, &source.procedure) {
                match format {
                    Format::Text => say!("{id}"),
                    Format::Json => say!("{}", json_line(&serde_json::json!({ "id": id }))),
                }
            }
        }
        Query::Deployment { source, dep, release } => {
            let ix = open_index(source)?;
            print_entries(&query_deployment(&ix, &source.procedure, *dep, *release)?, format);
        }
    }
    Ok(0)
}

fn cmd_extract(corpus: &CorpusArgs, release: Option<ReleaseId>, out: &Path, min_tokens: usize, format: Format) -> Outcome {
    let c = load_corpus(corpus)?;
    let config = DatasetConfig { min_tokens };
    let datasets = match release {
        Some(r) => vec![extract_release_dataset(&c.docs, r, &c.reg, &config)?],
        None => extract_all(&c.docs, &c.reg, &config)?,
    };
    write_datasets(out, &datasets, &c.docs)?;
    for ds in &datasets {
        match format {
            Format::Text => say!(
                "{}: {} records ({} requirements, {} headers dropped, {} duplicates dropped)",
                ds.release,
                ds.records.len(),
                ds.stats.total,
                ds.stats.dropped_headers,
                ds.stats.dropped_duplicates
            ),
            Format::Json => say!("{}", json_line(&serde_json::json!({ "release": ds.release, "records": ds.records.len(), "stats": ds.stats }))),
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Outcome {
    let format = cli.format;
    match cli.command {
        Command::Validate(args) => cmd_validate(&args, format),
        Command::Resolve { corpus, id, release, deployment } => cmd_resolve(&corpus, &id, release, deployment, format),
        Command::Lint { corpus, lexicon, config, fail_on } => cmd_lint(&corpus, &lexicon, config.as_deref(), fail_on, format),
        Command::Index { command: IndexCommand::Build { corpus, lexicon, out } } => {
            let c = load_corpus(&corpus)?;
            let lex = load_lexicon_arg(&lexicon)?;
            let ix = build_index(&c.docs, &c.reg, &lex)?;
            fs::write(&out, ix.to_json() + "\n").map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
            if format == Format::Text {
                say!("indexed {} requirements, {} procedures -> {}", ix.requirements.len(), ix.proc_req.len(), out.display());
            }
            Ok(0)
        }
        Command::Query { query } => cmd_query(&query, format),
        Command::Extract { corpus, release, all: _, out, min_tokens } => cmd_extract(&corpus, release, &out, min_tokens, format),
        Command::GenCorpus { seed, out, requirements, documents, sections, dups, over_length, aliases, dispersed } => {
            let cfg = SynthConfig {
                seed,
                requirements,
                documents,
                sections,
                near_duplicates: dups,
                over_length,
                alias_usages: aliases,
                dispersed,
                ..SynthConfig::default()
            };
            let corpus = generate(&cfg).map_err(|e| Failure::Input(e.to_string()))?;
            corpus.write_to(&out).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
            if format == Format::Text {
                say!("wrote {} documents to {}", corpus.documents.len(), out.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            let msg = match &f {
                Failure::Input(m) | Failure::Unknown(m) => m,
            };
            eprintln!("reqspec: {msg}");
            ExitCode::from(f.code())
        }
    }
}
