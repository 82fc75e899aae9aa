//! Batch front end for narrative consolidation. Subcommands cover the whole
//! workflow: generate or load a corpus, consolidate it (or run the sentence
//! baseline), score the output, and aggregate scores across runs.
//!
//! Exit codes are stable: 0 success, 1 usage, 2 I/O, 3 schema or invariant
//! violation. Standard output carries data; diagnostics go to standard error.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use chrono::{SecondsFormat, Utc};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use taeg_core::centrality::{CentralityError, LexrankScope, PowerIterationConfig};
use taeg_core::consolidate::{
    run_baseline, run_consolidation, BaselineConfig, BaselineOrder, ConsolidateError,
    ConsolidationConfig, MethodParams, Narrative, Segment,
};
use taeg_core::corpus::{
    align, load_corpus, load_timeline, save_corpus, save_timeline, Alignment, CorpusError,
    Document, EventIndex,
};
use taeg_core::eval::{comparison_table, csv_header, evaluate, EvalReport, RougeLMode};
use taeg_core::graph::GraphError;
use taeg_core::synth::{degrade_timeline, generate, SynthConfig, RNG_ALGORITHM};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_SCHEMA: u8 = 3;

/// A command failure carrying the process exit code and a message for
/// standard error.
struct Failure {
    code: u8,
    message: String,
}

type CliResult<T = ()> = Result<T, Failure>;

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

fn io_failure(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_IO, message: message.into() }
}

fn schema(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_SCHEMA, message: message.into() }
}

impl From<CorpusError> for Failure {
    fn from(err: CorpusError) -> Self {
        match err {
            CorpusError::Io { .. } => io_failure(err.to_string()),
            _ => schema(err.to_string()),
        }
    }
}

impl From<ConsolidateError> for Failure {
    fn from(err: ConsolidateError) -> Self {
        match err {
            // Bad flag values surface from inside the pipeline.
            ConsolidateError::Graph(GraphError::InvalidThreshold(_))
            | ConsolidateError::Centrality(CentralityError::InvalidConfig(_)) => {
                usage(err.to_string())
            }
            _ => schema(err.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "taeg", version, about = "Consolidate overlapping accounts into one narrative")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: GlobalFlags,
}

#[derive(Args)]
struct GlobalFlags {
    /// Output format for evaluation and report data.
    #[arg(long, global = true, default_value = "table", value_parser = parse_format)]
    format: OutputFormat,
    /// Seed for every randomized command.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Minimum cosine similarity for baseline graph edges.
    #[arg(long, global = true, default_value_t = 0.1)]
    threshold: f64,
    /// Damping factor for power iteration.
    #[arg(long, global = true, default_value_t = 0.85)]
    damping: f64,
    /// L1 convergence tolerance for power iteration.
    #[arg(long, global = true, default_value_t = 1e-8)]
    epsilon: f64,
    /// Iteration cap for power iteration.
    #[arg(long, global = true, default_value_t = 200)]
    max_iter: usize,
    /// Baseline summary length in sentences.
    #[arg(long, global = true, default_value_t = 750)]
    sentences: usize,
    /// Baseline segment ordering (`by-score` or `by-source`).
    #[arg(long, global = true, default_value = "by-score", value_parser = parse_ordering)]
    ordering: BaselineOrder,
    /// ROUGE-L computation mode (`summary` or `corpus`).
    #[arg(long, global = true, default_value = "summary", value_parser = parse_rouge_l_mode)]
    rouge_l_mode: RougeLMode,
    /// Centrality scope over the event graph (`global` or `per-event`).
    #[arg(long, global = true, default_value = "global", value_parser = parse_scope)]
    lexrank_scope: LexrankScope,
}

impl GlobalFlags {
    fn power(&self) -> PowerIterationConfig {
        PowerIterationConfig {
            damping: self.damping,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Consolidate a corpus along its timeline into one narrative.
    Consolidate {
        corpus: PathBuf,
        timeline: PathBuf,
        /// Narrative text output; sidecar and manifest are written next to it.
        out: PathBuf,
    },
    /// Rank sentences on a similarity graph and keep the top k.
    Baseline {
        corpus: PathBuf,
        /// Narrative text output; sidecar and manifest are written next to it.
        out: PathBuf,
        /// Optional timeline used to tag output sentences with events.
        #[arg(long)]
        timeline: Option<PathBuf>,
    },
    /// Score a candidate narrative against a reference text.
    Evaluate {
        /// Narrative sidecar JSON, or plain text with one segment per line.
        candidate: PathBuf,
        /// Reference text, one sentence per line.
        reference: PathBuf,
        /// Corpus used to recover event tags for plain-text candidates.
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// Timeline used to recover event tags for plain-text candidates.
        #[arg(long)]
        timeline: Option<PathBuf>,
        /// Also write the report as JSON (consumed by `report`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run name in tables and CSV; defaults to the candidate file name.
        #[arg(long)]
        label: Option<String>,
    },
    /// Generate a synthetic corpus bundle into a directory.
    Synth {
        out_dir: PathBuf,
        /// Number of timeline events.
        #[arg(long, default_value_t = 12)]
        events: usize,
        /// Number of documents.
        #[arg(long, default_value_t = 3)]
        docs: usize,
        /// Probability that a document covers an event.
        #[arg(long, default_value_t = 0.8)]
        coverage: f64,
        /// Vocabulary size.
        #[arg(long, default_value_t = 120)]
        vocab: usize,
        /// Per-token paraphrase probability between versions.
        #[arg(long, default_value_t = 0.25)]
        noise: f64,
    },
    /// Remove a random fraction of timeline events.
    Degrade {
        timeline: PathBuf,
        out: PathBuf,
        /// Fraction of events to remove, in [0, 1).
        #[arg(long)]
        fraction: f64,
    },
    /// Aggregate saved evaluation reports into one comparison.
    Report {
        /// Report JSON files, or directories scanned for `*.report.json`.
        runs: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum OutputFormat {
    Table,
    Json,
    Csv,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "table" => Ok(OutputFormat::Table),
        "json" => Ok(OutputFormat::Json),
        "csv" => Ok(OutputFormat::Csv),
        other => Err(format!("unknown format `{other}` (expected `table`, `json`, or `csv`)")),
    }
}

fn parse_ordering(s: &str) -> Result<BaselineOrder, String> {
    BaselineOrder::from_str(s)
}

fn parse_rouge_l_mode(s: &str) -> Result<RougeLMode, String> {
    RougeLMode::from_str(s)
}

fn parse_scope(s: &str) -> Result<LexrankScope, String> {
    LexrankScope::from_str(s)
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    let flags = &cli.flags;
    match cli.command {
        Command::Consolidate { corpus, timeline, out } => {
            cmd_consolidate(&corpus, &timeline, &out, flags)
        }
        Command::Baseline { corpus, out, timeline } => {
            cmd_baseline(&corpus, timeline.as_deref(), &out, flags)
        }
        Command::Evaluate { candidate, reference, corpus, timeline, out, label } => cmd_evaluate(
            &candidate,
            &reference,
            corpus.as_deref(),
            timeline.as_deref(),
            out.as_deref(),
            label,
            flags,
        ),
        Command::Synth { out_dir, events, docs, coverage, vocab, noise } => {
            cmd_synth(&out_dir, events, docs, coverage, vocab, noise, flags)
        }
        Command::Degrade { timeline, out, fraction } => {
            cmd_degrade(&timeline, &out, fraction, flags)
        }
        Command::Report { runs } => cmd_report(&runs, flags),
    }
}

// ---------------------------------------------------------------------------
// Artifact plumbing

/// Everything needed to re-run a command bit-identically: the command, its
/// inputs and outputs, and every parameter that affects the result.
#[derive(Serialize)]
struct RunManifest {
    command: &'static str,
    inputs: Vec<String>,
    outputs: Vec<String>,
    parameters: serde_json::Value,
    tool_version: &'static str,
    timestamp: String,
}

impl RunManifest {
    fn new(
        command: &'static str,
        inputs: &[&Path],
        outputs: &[&Path],
        parameters: serde_json::Value,
    ) -> Self {
        RunManifest {
            command,
            inputs: inputs.iter().map(|p| p.display().to_string()).collect(),
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION"),
            timestamp: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
        }
    }
}

/// `narrative.txt` gets siblings `narrative.txt.segments.json` and
/// `narrative.txt.manifest.json`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{}{suffix}", path.display()))
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|err| io_failure(format!("failed to read `{}`: {err}", path.display())))
}

fn write_text(path: &Path, text: &str) -> CliResult {
    fs::write(path, text)
        .map_err(|err| io_failure(format!("failed to write `{}`: {err}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult {
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|err| schema(format!("failed to serialize `{}`: {err}", path.display())))?;
    body.push('\n');
    write_text(path, &body)
}

fn file_label(path: &Path) -> String {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned());
    let mut label = name.unwrap_or_else(|| path.display().to_string());
    for suffix in [".report.json", ".segments.json", ".json", ".txt"] {
        if let Some(stripped) = label.strip_suffix(suffix) {
            label = stripped.to_owned();
            break;
        }
    }
    label
}

// ---------------------------------------------------------------------------
// Subcommands

fn cmd_consolidate(
    corpus_path: &Path,
    timeline_path: &Path,
    out: &Path,
    flags: &GlobalFlags,
) -> CliResult {
    let documents = load_corpus(corpus_path)?;
    let timeline = load_timeline(timeline_path)?;
    let alignment = align(&documents, &timeline)?;
    let config = ConsolidationConfig { power: flags.power(), scope: flags.lexrank_scope };
    let outcome = run_consolidation(&documents, &timeline, &alignment, &config)?;

    write_text(out, &outcome.narrative.render())?;
    let segments_path = sibling(out, ".segments.json");
    write_json(&segments_path, &outcome.narrative)?;
    let manifest = RunManifest::new(
        "consolidate",
        &[corpus_path, timeline_path],
        &[out, &segments_path],
        json!({
            "damping": flags.damping,
            "epsilon": flags.epsilon,
            "max_iter": flags.max_iter,
            "lexrank_scope": flags.lexrank_scope.to_string(),
        }),
    );
    write_json(&sibling(out, ".manifest.json"), &manifest)?;
    eprintln!(
        "consolidated {} events into {}",
        outcome.narrative.len(),
        out.display()
    );
    Ok(())
}

fn cmd_baseline(
    corpus_path: &Path,
    timeline_path: Option<&Path>,
    out: &Path,
    flags: &GlobalFlags,
) -> CliResult {
    if flags.sentences == 0 {
        return Err(usage("--sentences must be at least 1"));
    }
    let documents = load_corpus(corpus_path)?;
    let timeline = timeline_path.map(load_timeline).transpose()?;
    let alignment = match &timeline {
        Some(timeline) => Some(align(&documents, timeline)?),
        None => None,
    };
    let config = BaselineConfig {
        threshold: flags.threshold,
        k: flags.sentences,
        ordering: flags.ordering,
        power: flags.power(),
    };
    let outcome = run_baseline(&documents, alignment.as_ref(), &config)?;

    write_text(out, &outcome.narrative.render())?;
    let segments_path = sibling(out, ".segments.json");
    write_json(&segments_path, &outcome.narrative)?;
    let mut inputs = vec![corpus_path];
    if let Some(path) = timeline_path {
        inputs.push(path);
    }
    let manifest = RunManifest::new(
        "baseline",
        &inputs,
        &[out, &segments_path],
        json!({
            "sentences": flags.sentences,
            "ordering": flags.ordering.to_string(),
            "threshold": flags.threshold,
            "damping": flags.damping,
            "epsilon": flags.epsilon,
            "max_iter": flags.max_iter,
        }),
    );
    write_json(&sibling(out, ".manifest.json"), &manifest)?;
    eprintln!(
        "kept {} of {} sentences in {}",
        outcome.narrative.len(),
        documents.iter().map(|d| d.sentences.len()).sum::<usize>(),
        out.display()
    );
    Ok(())
}

fn cmd_evaluate(
    candidate_path: &Path,
    reference_path: &Path,
    corpus_path: Option<&Path>,
    timeline_path: Option<&Path>,
    out: Option<&Path>,
    label: Option<String>,
    flags: &GlobalFlags,
) -> CliResult {
    let candidate_raw = read_text(candidate_path)?;
    let narrative = parse_candidate(&candidate_raw, corpus_path, timeline_path)?;
    let reference: Vec<String> = read_text(reference_path)?
        .lines()
        .filter(|line| !line.trim().is_empty())
        .map(str::to_owned)
        .collect();
    let report = evaluate(&narrative, &reference, flags.rouge_l_mode)
        .map_err(|err| schema(err.to_string()))?;

    let label = label.unwrap_or_else(|| file_label(candidate_path));
    match flags.format {
        OutputFormat::Table => println!("{}", comparison_table(&[(label.clone(), report.clone())])),
        OutputFormat::Json => println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        ),
        OutputFormat::Csv => {
            println!("{}", csv_header());
            println!("{}", report.csv_row(&label));
        }
    }

    if let Some(out) = out {
        write_json(out, &report)?;
        let mut inputs = vec![candidate_path, reference_path];
        inputs.extend(corpus_path);
        inputs.extend(timeline_path);
        let manifest = RunManifest::new(
            "evaluate",
            &inputs,
            &[out],
            json!({
                "label": label,
                "rouge_l_mode": flags.rouge_l_mode.to_string(),
                "tau_variant": "b",
            }),
        );
        write_json(&sibling(out, ".manifest.json"), &manifest)?;
    }
    Ok(())
}

/// Accepts either a narrative sidecar (JSON) or plain text with one segment
/// per line. Plain-text segments carry no event tags; when a corpus and
/// timeline are supplied, tags are recovered by matching each line against
/// the corpus's sentence and version texts.
fn parse_candidate(
    raw: &str,
    corpus_path: Option<&Path>,
    timeline_path: Option<&Path>,
) -> CliResult<Narrative> {
    if let Ok(narrative) = serde_json::from_str::<Narrative>(raw) {
        return Ok(narrative);
    }

    let lookup = match (corpus_path, timeline_path) {
        (Some(corpus_path), Some(timeline_path)) => {
            let documents = load_corpus(corpus_path)?;
            let timeline = load_timeline(timeline_path)?;
            let alignment = align(&documents, &timeline)?;
            event_text_lookup(&documents, &alignment)
        }
        _ => HashMap::new(),
    };

    let segments: Vec<Segment> = raw
        .lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| Segment {
            text: line.to_owned(),
            event_index: lookup.get(line.trim()).copied(),
            doc_id: String::new(),
            sentence_ids: Vec::new(),
            score: 0.0,
        })
        .collect();
    Ok(Narrative { segments, params: MethodParams::External })
}

/// Maps sentence texts and whole version texts to their event, so re-read
/// narrative lines can be tagged again.
fn event_text_lookup(
    documents: &[Document],
    alignment: &Alignment,
) -> HashMap<String, EventIndex> {
    let mut lookup = HashMap::new();
    let sentences: Vec<_> = documents.iter().flat_map(|d| d.sentences.iter()).collect();
    for sentence in &sentences {
        if let Some(event) = alignment.event_of(sentence.id) {
            lookup.insert(sentence.text.trim().to_owned(), event);
        }
    }
    for ((event, _), ids) in &alignment.event_versions {
        let text = ids
            .iter()
            .map(|id| sentences[id.0].text.trim())
            .collect::<Vec<_>>()
            .join(" ");
        lookup.insert(text, *event);
    }
    lookup
}

fn cmd_synth(
    out_dir: &Path,
    events: usize,
    docs: usize,
    coverage: f64,
    vocab: usize,
    noise: f64,
    flags: &GlobalFlags,
) -> CliResult {
    let defaults = SynthConfig::default();
    let config = SynthConfig {
        seed: flags.seed,
        num_events: events,
        num_docs: docs,
        coverage_prob: coverage,
        vocab_size: vocab,
        paraphrase_noise: noise,
        ..defaults
    };
    let bundle = generate(&config).map_err(|err| usage(err.to_string()))?;

    fs::create_dir_all(out_dir)
        .map_err(|err| io_failure(format!("failed to create `{}`: {err}", out_dir.display())))?;
    let corpus_path = out_dir.join("corpus.json");
    let timeline_path = out_dir.join("timeline.json");
    let golden_path = out_dir.join("golden.txt");
    save_corpus(&bundle.documents, &corpus_path)?;
    save_timeline(&bundle.timeline, &timeline_path)?;
    write_text(&golden_path, &bundle.golden)?;
    let manifest = RunManifest::new(
        "synth",
        &[],
        &[&corpus_path, &timeline_path, &golden_path],
        json!({
            "seed": flags.seed,
            "events": events,
            "docs": docs,
            "coverage": coverage,
            "vocab": vocab,
            "noise": noise,
            "tokens_per_sentence": config.tokens_per_sentence,
            "sentences_per_version": config.sentences_per_version,
            "rng_algorithm": RNG_ALGORITHM,
        }),
    );
    write_json(&out_dir.join("manifest.json"), &manifest)?;
    eprintln!(
        "generated {} events across {} documents in {}",
        events,
        docs,
        out_dir.display()
    );
    Ok(())
}

fn cmd_degrade(timeline_path: &Path, out: &Path, fraction: f64, flags: &GlobalFlags) -> CliResult {
    if !(0.0..1.0).contains(&fraction) {
        return Err(usage(format!("--fraction {fraction} must lie in [0, 1)")));
    }
    let timeline = load_timeline(timeline_path)?;
    let total = timeline.events.len();
    let degraded = degrade_timeline(&timeline, fraction, flags.seed);
    save_timeline(&degraded, out)?;
    let manifest = RunManifest::new(
        "degrade",
        &[timeline_path],
        &[out],
        json!({
            "fraction": fraction,
            "seed": flags.seed,
            "rng_algorithm": RNG_ALGORITHM,
        }),
    );
    write_json(&sibling(out, ".manifest.json"), &manifest)?;
    eprintln!(
        "kept {} of {total} events in {}",
        degraded.events.len(),
        out.display()
    );
    Ok(())
}

fn cmd_report(runs: &[PathBuf], flags: &GlobalFlags) -> CliResult {
    let mut entries: Vec<(String, EvalReport)> = Vec::new();
    for path in expand_runs(runs)? {
        let raw = read_text(&path)?;
        let report: EvalReport = serde_json::from_str(&raw)
            .map_err(|err| schema(format!("`{}` is not an evaluation report: {err}", path.display())))?;
        entries.push((file_label(&path), report));
    }
    if entries.is_empty() {
        return Err(usage("at least one evaluation report is required"));
    }

    match flags.format {
        OutputFormat::Table => println!("{}", comparison_table(&entries)),
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = entries
                .iter()
                .map(|(label, report)| json!({ "label": label, "report": report }))
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows).expect("reports serialize"));
        }
        OutputFormat::Csv => {
            println!("{}", csv_header());
            for (label, report) in &entries {
                println!("{}", report.csv_row(label));
            }
        }
    }
    Ok(())
}

/// Files pass through; directories are scanned for `*.report.json`.
fn expand_runs(paths: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for path in paths {
        let meta = fs::metadata(path)
            .map_err(|err| io_failure(format!("failed to read `{}`: {err}", path.display())))?;
        if meta.is_dir() {
            let entries = fs::read_dir(path)
                .map_err(|err| io_failure(format!("failed to read `{}`: {err}", path.display())))?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| {
                    p.file_name()
                        .map(|n| n.to_string_lossy().ends_with(".report.json"))
                        .unwrap_or(false)
                })
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(path.clone());
        }
    }
    Ok(files)
}
