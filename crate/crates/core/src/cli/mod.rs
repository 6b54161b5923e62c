//! Command-line front end. [`run`] parses arguments, dispatches to the
//! library and maps failures to exit codes: 0 on success, 2 for usage and
//! input validation errors, 1 for anything else.

pub mod grid;

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::corpus::{create_text, read_documents_file, read_qrels_file, read_run_file, read_topics_file, write_run};
use crate::error::{Error, Result};
use crate::index::{Field, InvertedIndex};
use crate::ireval::{evaluate_run, EvalOptions, Gain, DEFAULT_CUTOFFS};
use crate::judge::server::{serve, ServerConfig};
use crate::pool::{build_pools, PoolConfig};
use crate::rank::{Model, RankParams, Searcher, DEFAULT_K};
use crate::stemeval::{evaluate as evaluate_stemmers, ConceptGroups, DEFAULT_TRUNCATION_LENGTHS};
use crate::stemmer::{StemVariant, Stemmer};
use crate::stopwords::{self, Method, StopwordAnalysis, StopwordList};
use crate::textnorm::{NormConfig, Normalizer};
use grid::{run_grid, ExperimentGrid};

#[derive(Debug, Parser)]
#[command(name = "tetun-ir", version, about = "Tetun ad-hoc retrieval toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an inverted index over one document field.
    Index(IndexArgs),
    /// Rank documents for topics or a single query and print a TREC run.
    Search(SearchArgs),
    /// Score a TREC run against qrels.
    Eval(EvalArgs),
    /// Stem words, or score the stemmer variants against concept groups.
    Stem(StemArgs),
    /// Rank stopword candidates from a corpus.
    Stopwords(StopwordArgs),
    /// Build judgment pools by interleaving two models.
    Pool(PoolArgs),
    /// Run the relevance judgment HTTP service.
    JudgeServe(JudgeArgs),
    /// Run a preprocessing ablation grid.
    Grid(GridArgs),
}

/// Normalization flags. A `--norm-config` file is read first and the
/// switches below are applied on top.
#[derive(Debug, Args)]
struct NormArgs {
    /// key=value normalization file.
    #[arg(long)]
    norm_config: Option<PathBuf>,
    /// Start from a label such as `apostrophes+hyphens` or `stem=light`.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    strip_apostrophes: bool,
    #[arg(long)]
    fold_accents: bool,
    #[arg(long)]
    split_hyphens: bool,
    #[arg(long)]
    remove_stopwords: bool,
    #[arg(long)]
    keep_case: bool,
    #[arg(long, value_name = "VARIANT")]
    stem: Option<StemVariant>,
    #[arg(long)]
    max_token_len: Option<usize>,
}

impl NormArgs {
    fn config(&self) -> Result<NormConfig> {
        let mut c = match (&self.norm_config, &self.preset) {
            (Some(_), Some(_)) => return Err(Error::invalid("use either --norm-config or --preset")),
            (Some(path), None) => {
                NormConfig::from_kv(&fs::read_to_string(path).map_err(|e| Error::file(path, e))?)?
            }
            (None, Some(label)) => NormConfig::from_label(label)?,
            (None, None) => NormConfig::default(),
        };
        c.strip_apostrophes |= self.strip_apostrophes;
        c.fold_accents |= self.fold_accents;
        c.split_hyphens |= self.split_hyphens;
        c.remove_stopwords |= self.remove_stopwords;
        if self.keep_case {
            c.lowercase = false;
        }
        if self.stem.is_some() {
            c.stemmer = self.stem;
        }
        if let Some(n) = self.max_token_len {
            c.max_token_len = n;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, default_value = "bm25")]
    model: Model,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
}

impl ModelArgs {
    fn params(&self) -> Result<RankParams> {
        let mut p = RankParams::new(self.model);
        if let Some(v) = self.k1 {
            p.k1 = v;
        }
        if let Some(v) = self.b {
            p.b = v;
        }
        if let Some(v) = self.mu {
            p.mu = v;
        }
        if let Some(v) = self.lambda {
            p.lambda = v;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Args)]
struct IndexArgs {
    /// TREC-style document file (`.gz` accepted).
    #[arg(long)]
    documents: PathBuf,
    #[arg(long, default_value = "content")]
    field: Field,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    norm: NormArgs,
}

#[derive(Debug, Args)]
struct SearchArgs {
    #[arg(long)]
    index: PathBuf,
    /// Topic file; each topic title is a query.
    #[arg(long, conflicts_with = "query", required_unless_present = "query")]
    topics: Option<PathBuf>,
    /// A single query.
    #[arg(long)]
    query: Option<String>,
    /// Topic id printed for `--query`.
    #[arg(long, default_value_t = 1)]
    topic_id: u32,
    #[command(flatten)]
    model: ModelArgs,
    /// Documents per topic.
    #[arg(short = 'k', long, default_value_t = DEFAULT_K)]
    depth: usize,
    /// Defaults to the model name.
    #[arg(long)]
    run_tag: Option<String>,
    /// Write the run here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Csv,
    Markdown,
    Json,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    run: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CUTOFFS)]
    cutoffs: Vec<usize>,
    #[arg(long, default_value = "linear")]
    gain: Gain,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
}

#[derive(Debug, Args)]
struct StemArgs {
    #[arg(long, default_value = "light")]
    variant: StemVariant,
    /// Match accent-folded input.
    #[arg(long)]
    fold_accents: bool,
    /// Print a JSON trace of regions and removals per word.
    #[arg(long)]
    trace: bool,
    /// Score all variants against a concept-group file instead.
    #[arg(long, value_name = "GROUPS")]
    evaluate: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_TRUNCATION_LENGTHS)]
    truncation: Vec<usize>,
    #[arg(long, value_enum, default_value = "text")]
    format: ReportFormat,
    /// Words to stem; read from stdin when absent.
    words: Vec<String>,
}

#[derive(Debug, Args)]
struct StopwordArgs {
    /// Print the bundled list and exit.
    #[arg(long, conflicts_with = "documents")]
    bundled: bool,
    #[arg(long, required_unless_present = "bundled")]
    documents: Option<PathBuf>,
    #[arg(long, default_value = "content")]
    field: Field,
    #[arg(long, default_value = "degree")]
    method: Method,
    #[arg(short = 'n', long, default_value_t = 100)]
    top: usize,
    /// Reference list; prints precision at the cutoffs.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = stopwords::DEFAULT_CUTOFFS)]
    cutoffs: Vec<usize>,
}

#[derive(Debug, Args)]
struct PoolArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    topics: PathBuf,
    #[arg(long, default_value_t = crate::pool::DEFAULT_DEPTH)]
    depth: usize,
    #[arg(long, default_value = "bm25")]
    model_a: Model,
    #[arg(long, default_value = "dirichlet_lm")]
    model_b: Model,
    /// Write the pools here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct JudgeArgs {
    /// Service TOML file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `bind` from the config.
    #[arg(long)]
    bind: Option<String>,
}

#[derive(Debug, Args)]
#[command(after_help = "Relative data paths in the grid file resolve against $TETUN_IR_DATA_DIR when it is set.")]
struct GridArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Exit status for an error: 2 when the input or arguments are at fault.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse { .. }
        | Error::Validation { .. }
        | Error::InvalidArgument(_)
        | Error::Incomplete { .. }
        | Error::IndexMismatch(_)
        | Error::NotFound(_) => 2,
        Error::File { source, .. } if source.kind() == io::ErrorKind::NotFound => 2,
        _ => 1,
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// status. Output goes to stdout, diagnostics to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match dispatch(cli.command, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn output<'a>(path: Option<&Path>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    match path {
        Some(p) => create_text(p).map(|w| w as Box<dyn Write>),
        None => Ok(Box::new(stdout)),
    }
}

fn dispatch(command: Command, stdout: &mut dyn Write) -> Result<()> {
    match command {
        Command::Index(a) => index(a, stdout),
        Command::Search(a) => search(a, stdout),
        Command::Eval(a) => eval(a, stdout),
        Command::Stem(a) => stem(a, stdout),
        Command::Stopwords(a) => stopwords_cmd(a, stdout),
        Command::Pool(a) => pool(a, stdout),
        Command::JudgeServe(a) => judge_serve(a),
        Command::Grid(a) => grid_cmd(a, stdout),
    }
}

fn index(a: IndexArgs, out: &mut dyn Write) -> Result<()> {
    let config = a.norm.config()?;
    let docs = read_documents_file(&a.documents)?;
    let ix = InvertedIndex::build(&docs, a.field, &config)?;
    let m = ix.save(&a.out)?;
    writeln!(
        out,
        "indexed {} documents ({} field, {}): {} terms, {} tokens",
        m.documents, m.field, m.config_label, m.vocabulary, m.total_tokens
    )?;
    writeln!(out, "fingerprint {}", ix.fingerprint())?;
    Ok(())
}

fn search(a: SearchArgs, stdout: &mut dyn Write) -> Result<()> {
    let params = a.model.params()?;
    let ix = InvertedIndex::load(&a.index)?;
    let searcher = Searcher::new(&ix)?;
    let tag = a.run_tag.unwrap_or_else(|| params.model.to_string());
    let queries: Vec<(u32, String)> = match (&a.topics, &a.query) {
        (Some(path), _) => read_topics_file(path)?.into_iter().map(|t| (t.topic_id, t.title)).collect(),
        (None, Some(q)) => vec![(a.topic_id, q.clone())],
        (None, None) => return Err(Error::invalid("give --topics or --query")),
    };
    let mut run = Vec::new();
    for (id, text) in queries {
        let ranked = searcher.search(&text, &params, a.depth)?;
        if ranked.empty_query {
            eprintln!("warning: query for topic {id} has no terms after normalization");
        }
        run.extend(ranked.to_run(id, &tag));
    }
    let mut w = output(a.out.as_deref(), stdout)?;
    write_run(&mut w, &run)?;
    w.flush()?;
    Ok(())
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<()> {
    let run = read_run_file(&a.run)?;
    let qrels = read_qrels_file(&a.qrels)?;
    let opts = EvalOptions {
        cutoffs: a.cutoffs,
        gain: a.gain,
    };
    let report = evaluate_run(&run, &qrels, &opts)?.with_qrels_tag(a.qrels.display().to_string());
    let text = match a.format {
        ReportFormat::Text => report.to_text(),
        ReportFormat::Csv => report.to_csv(),
        ReportFormat::Markdown => report.to_markdown(),
        ReportFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn stem(a: StemArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(path) = &a.evaluate {
        let groups = ConceptGroups::parse(&fs::read_to_string(path).map_err(|e| Error::file(path, e))?)?;
        let stemmers: Vec<(String, Stemmer)> = StemVariant::ALL
            .iter()
            .map(|v| (v.to_string(), Stemmer::new(*v).with_folded_accents(a.fold_accents)))
            .collect();
        let fns: Vec<(String, _)> = stemmers
            .iter()
            .map(|(l, s)| (l.clone(), move |w: &str| s.stem(w)))
            .collect();
        let report = evaluate_stemmers(&groups, &fns, &a.truncation)?;
        let text = match a.format {
            ReportFormat::Csv => report.to_csv(),
            ReportFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
            _ => report.to_text(),
        };
        out.write_all(text.as_bytes())?;
        return Ok(());
    }
    let stemmer = Stemmer::new(a.variant).with_folded_accents(a.fold_accents);
    let words: Vec<String> = if a.words.is_empty() {
        let mut v = Vec::new();
        for line in io::stdin().lock().lines() {
            v.extend(line?.split_whitespace().map(str::to_string));
        }
        v
    } else {
        a.words
    };
    for w in words {
        if a.trace {
            writeln!(out, "{}", serde_json::to_string(&stemmer.stem_traced(&w))?)?;
        } else {
            writeln!(out, "{}", stemmer.stem(&w))?;
        }
    }
    Ok(())
}

fn stopwords_cmd(a: StopwordArgs, out: &mut dyn Write) -> Result<()> {
    if a.bundled {
        out.write_all(StopwordList::bundled().to_text().as_bytes())?;
        return Ok(());
    }
    let path = a.documents.as_ref().ok_or_else(|| Error::invalid("--documents is required"))?;
    let docs = read_documents_file(path)?;
    let norm = Normalizer::new(NormConfig::default())?;
    let corpus: Vec<Vec<String>> = docs.iter().map(|d| norm.normalize(a.field.text(d))).collect();
    let analysis = StopwordAnalysis::build(&corpus)?;
    let candidates = analysis.rank_candidates(a.method, a.top)?;
    for c in &candidates {
        writeln!(out, "{c}")?;
    }
    if let Some(truth) = &a.truth {
        let list = StopwordList::read(truth, None)?;
        for (n, p) in stopwords::precision_at(&candidates, &list, &a.cutoffs)? {
            writeln!(out, "# P@{n}\t{p:.4}")?;
        }
    }
    Ok(())
}

fn pool(a: PoolArgs, stdout: &mut dyn Write) -> Result<()> {
    let ix = InvertedIndex::load(&a.index)?;
    let topics = read_topics_file(&a.topics)?;
    let config = PoolConfig {
        model_a: RankParams::new(a.model_a),
        model_b: RankParams::new(a.model_b),
        depth: a.depth,
    };
    let set = build_pools(&topics, &ix, &config)?;
    let mut w = output(a.out.as_deref(), stdout)?;
    set.write_json(&mut w)?;
    w.flush()?;
    Ok(())
}

fn judge_serve(a: JudgeArgs) -> Result<()> {
    let mut config = ServerConfig::load(&a.config)?;
    if let Some(b) = a.bind {
        config.bind = b;
    }
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(serve(config))
}

fn grid_cmd(a: GridArgs, out: &mut dyn Write) -> Result<()> {
    let mut grid = ExperimentGrid::load(&a.config)?;
    if let Some(w) = a.workers {
        grid.workers = w;
    }
    if let Some(o) = a.out {
        grid.out = o;
    }
    let outcome = run_grid(&grid)?;
    out.write_all(outcome.report.to_markdown().as_bytes())?;
    eprintln!(
        "{} cells computed, {} reused; {} indexes built, {} reused; reports in {}",
        outcome.cells_computed,
        outcome.cells_reused,
        outcome.indexes_built,
        outcome.indexes_reused,
        grid.out.display()
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["tetun-ir", "bogus"]), 2);
        assert_eq!(run(["tetun-ir", "stem", "--no-such-flag"]), 2);
        assert_eq!(run(["tetun-ir", "stem", "--variant", "extreme", "x"]), 2);
        assert_eq!(run(["tetun-ir", "eval", "--run", "/nonexistent", "--qrels", "/nonexistent"]), 2);
    }

    #[test]
    fn stem_subcommand() {
        assert_eq!(run(["tetun-ir", "stem", "--variant", "light", "komunikasaun"]), 0);
    }

    #[test]
    fn norm_flags_override_preset() {
        let a = NormArgs {
            norm_config: None,
            preset: Some("apostrophes".into()),
            strip_apostrophes: false,
            fold_accents: false,
            split_hyphens: true,
            remove_stopwords: false,
            keep_case: false,
            stem: Some(StemVariant::Light),
            max_token_len: None,
        };
        assert_eq!(a.config().unwrap().label(), "apostrophes+hyphens+stem=light");
    }
}
