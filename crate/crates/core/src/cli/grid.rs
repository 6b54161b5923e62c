//! Preprocessing ablation grid.
//!
//! A grid crosses indexed fields, normalization configurations and ranking
//! models. Every cell indexes (once per field and configuration), retrieves
//! the topic titles and evaluates against the qrels. Results land in
//! `<out>/grid.csv` and `<out>/grid.md`; the markdown has one table per
//! field with deltas against the baseline configuration and a marker on
//! every value below it.
//!
//! Re-running skips work whose inputs are unchanged: saved indexes are
//! reused when their manifest fingerprint matches, and each finished cell
//! leaves `<out>/cells/<id>.json` keyed by a hash of its inputs. Wall-clock
//! timings go only to `<out>/grid.log`, so reports are byte-identical
//! across reruns and worker counts.
//!
//! ```toml
//! version = 1
//! documents = "docs.xml"
//! topics = "topics.xml"
//! qrels = "qrels.txt"
//! out = "grid-out"
//! fields = ["title", "content"]
//! configs = ["baseline", "apostrophes", "hyphens", "apostrophes+hyphens", "stem=light"]
//! baseline = "baseline"
//! models = ["bm25", "dfr_bm25", "tfidf", "dirichlet_lm", "hiemstra_lm"]
//! cutoffs = [5, 10, 20]
//! depth = 1000
//! workers = 4
//!
//! [params]
//! mu = 2500.0
//! ```

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{read_documents_file, read_qrels_file, read_topics_file, write_run, Document, Qrel, Topic};
use crate::error::{Error, Result};
use crate::index::{self, corpus_hash, sha256_hex, Field, InvertedIndex};
use crate::ireval::{evaluate_run, EvalOptions, Gain, DEFAULT_CUTOFFS};
use crate::rank::{Model, RankParams, Searcher, DEFAULT_K};
use crate::textnorm::NormConfig;

pub const GRID_VERSION: u32 = 1;
/// Data paths in a grid file are relative to this directory when set,
/// otherwise to the grid file's own directory.
pub const DATA_DIR_ENV: &str = "TETUN_IR_DATA_DIR";

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamOverrides {
    k1: Option<f64>,
    b: Option<f64>,
    mu: Option<f64>,
    lambda: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    version: u32,
    documents: PathBuf,
    topics: PathBuf,
    qrels: PathBuf,
    out: Option<PathBuf>,
    fields: Vec<String>,
    configs: Vec<String>,
    baseline: Option<String>,
    models: Vec<String>,
    cutoffs: Option<Vec<usize>>,
    gain: Option<String>,
    depth: Option<usize>,
    workers: Option<usize>,
    #[serde(default)]
    params: ParamOverrides,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentGrid {
    pub documents: PathBuf,
    pub topics: PathBuf,
    pub qrels: PathBuf,
    pub out: PathBuf,
    pub fields: Vec<Field>,
    /// The baseline comes first.
    pub configs: Vec<NormConfig>,
    pub models: Vec<RankParams>,
    pub eval: EvalOptions,
    /// Documents retrieved per topic.
    pub depth: usize,
    pub workers: usize,
}

/// One (field, configuration, model) combination.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub field: Field,
    pub config: NormConfig,
    pub params: RankParams,
}

impl Cell {
    /// File-name-safe identifier, e.g. `title.apostrophes_hyphens.bm25`.
    pub fn id(&self) -> String {
        let label: String = self
            .config
            .label()
            .chars()
            .map(|c| match c {
                '+' => '_',
                '=' => '-',
                c if c.is_ascii_alphanumeric() || c == '-' || c == '_' => c,
                _ => '~',
            })
            .collect();
        format!("{}.{label}.{}", self.field, self.params.model)
    }
}

impl ExperimentGrid {
    /// Parses a grid file. Relative data paths resolve against `data_base`,
    /// the output directory against `config_dir`.
    pub fn parse(text: &str, config_dir: &Path, data_base: Option<&Path>) -> Result<Self> {
        let f: GridFile = toml::from_str(text).map_err(|e| Error::validation(None, format!("grid config: {e}")))?;
        if f.version != GRID_VERSION {
            return Err(Error::validation(None, format!("unsupported grid version {}", f.version)));
        }
        let data_base = data_base.unwrap_or(config_dir);
        let resolve = |p: PathBuf, base: &Path| if p.is_relative() { base.join(p) } else { p };

        let fields = f.fields.iter().map(|s| s.parse()).collect::<Result<Vec<Field>>>()?;
        let mut configs = f
            .configs
            .iter()
            .map(|s| NormConfig::from_label(s))
            .collect::<Result<Vec<NormConfig>>>()?;
        let baseline = match &f.baseline {
            Some(label) => NormConfig::from_label(label)?,
            None => configs
                .first()
                .cloned()
                .ok_or_else(|| Error::validation(None, "grid lists no configs"))?,
        };
        let pos = configs
            .iter()
            .position(|c| *c == baseline)
            .ok_or_else(|| Error::validation(None, format!("baseline {} is not among the configs", baseline.label())))?;
        let base = configs.remove(pos);
        configs.insert(0, base);

        let mut template = RankParams::default();
        if let Some(v) = f.params.k1 {
            template.k1 = v;
        }
        if let Some(v) = f.params.b {
            template.b = v;
        }
        if let Some(v) = f.params.mu {
            template.mu = v;
        }
        if let Some(v) = f.params.lambda {
            template.lambda = v;
        }
        let models = f
            .models
            .iter()
            .map(|s| {
                s.parse::<Model>().map(|model| RankParams {
                    model,
                    ..template
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let eval = EvalOptions {
            cutoffs: f.cutoffs.unwrap_or_else(|| DEFAULT_CUTOFFS.to_vec()),
            gain: match f.gain {
                Some(g) => g.parse::<Gain>()?,
                None => Gain::Linear,
            },
        };
        let grid = ExperimentGrid {
            documents: resolve(f.documents, data_base),
            topics: resolve(f.topics, data_base),
            qrels: resolve(f.qrels, data_base),
            out: resolve(f.out.unwrap_or_else(|| PathBuf::from("grid-out")), config_dir),
            fields,
            configs,
            models,
            eval,
            depth: f.depth.unwrap_or(DEFAULT_K),
            workers: f.workers.unwrap_or(1),
        };
        grid.validate()?;
        Ok(grid)
    }

    /// Reads a grid file, honouring [`DATA_DIR_ENV`].
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::file(path, e))?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let data = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
        Self::parse(&text, dir, data.as_deref())
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |m: String| Err(Error::validation(None, m));
        if self.fields.is_empty() || self.configs.is_empty() || self.models.is_empty() {
            return invalid("a grid needs at least one field, config and model".into());
        }
        let mut seen = HashSet::new();
        for c in &self.configs {
            c.validate()?;
            if !seen.insert(c.label()) {
                return invalid(format!("config {} is listed twice", c.label()));
            }
        }
        if self.fields.iter().collect::<HashSet<_>>().len() != self.fields.len() {
            return invalid("a field is listed twice".into());
        }
        for m in &self.models {
            m.validate()?;
        }
        if self.models.iter().map(|m| m.model).collect::<HashSet<_>>().len() != self.models.len() {
            return invalid("a model is listed twice".into());
        }
        if self.eval.cutoffs.is_empty() || self.eval.cutoffs.contains(&0) {
            return invalid("cutoffs must be non-empty and at least 1".into());
        }
        if self.depth == 0 || self.workers == 0 {
            return invalid("depth and workers must be at least 1".into());
        }
        Ok(())
    }

    /// Cells in report order: field, then config, then model.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &field in &self.fields {
            for config in &self.configs {
                for params in &self.models {
                    out.push(Cell {
                        field,
                        config: config.clone(),
                        params: *params,
                    });
                }
            }
        }
        out
    }

    pub fn baseline(&self) -> &NormConfig {
        &self.configs[0]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub id: String,
    pub field: Field,
    pub config: String,
    pub model: Model,
    pub metrics: Vec<String>,
    pub means: Vec<f64>,
    /// Hash of every input the cell depends on.
    pub input_sha256: String,
    pub run_sha256: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridReport {
    pub metrics: Vec<String>,
    pub baseline: String,
    /// In [`ExperimentGrid::cells`] order.
    pub rows: Vec<CellResult>,
}

fn sign_pct(v: f64) -> String {
    format!("{}{:.2}%", if v < 0.0 { "-" } else { "+" }, v.abs())
}

impl GridReport {
    fn baseline_row(&self, row: &CellResult) -> Option<&CellResult> {
        self.rows
            .iter()
            .find(|r| r.field == row.field && r.model == row.model && r.config == self.baseline)
    }

    /// Indices of metrics where `row` is below its baseline row.
    pub fn below_baseline(&self, row: &CellResult) -> Vec<usize> {
        match self.baseline_row(row) {
            Some(b) if b.config != row.config => (0..row.means.len())
                .filter(|&i| row.means[i] < b.means[i])
                .collect(),
            _ => Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("field,config,model,{},below_baseline\n", self.metrics.join(","));
        for r in &self.rows {
            let vals: Vec<String> = r.means.iter().map(|v| format!("{v:.4}")).collect();
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.field,
                r.config,
                r.model,
                vals.join(","),
                self.below_baseline(r).len()
            );
        }
        s
    }

    /// One table per field. Non-baseline values carry their relative change
    /// against the baseline row of the same model; `▼` marks a drop.
    pub fn to_markdown(&self) -> String {
        let mut s = String::from("# Preprocessing grid\n\n");
        let _ = writeln!(
            s,
            "Baseline: `{}`. Values are means over evaluated topics; parentheses give the change relative to the baseline with the same model, and ▼ marks a value below it.",
            self.baseline
        );
        let mut fields: Vec<Field> = Vec::new();
        for r in &self.rows {
            if !fields.contains(&r.field) {
                fields.push(r.field);
            }
        }
        for field in fields {
            let _ = write!(s, "\n## {field}\n\n| Strategy | Model | {} |\n|---|---|", self.metrics.join(" | "));
            s.push_str(&"---:|".repeat(self.metrics.len()));
            s.push('\n');
            for r in self.rows.iter().filter(|r| r.field == field) {
                let base = self.baseline_row(r).filter(|b| b.config != r.config);
                let cells: Vec<String> = r
                    .means
                    .iter()
                    .enumerate()
                    .map(|(i, v)| match base {
                        None => format!("{v:.4}"),
                        Some(b) => {
                            let bv = b.means[i];
                            let delta = if bv == 0.0 {
                                "n/a".to_string()
                            } else {
                                sign_pct(100.0 * (v - bv) / bv)
                            };
                            let flag = if *v < bv { " ▼" } else { "" };
                            format!("{v:.4} ({delta}){flag}")
                        }
                    })
                    .collect();
                let _ = writeln!(s, "| {} | {} | {} |", r.config, r.model, cells.join(" | "));
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub report: GridReport,
    pub cells_computed: usize,
    pub cells_reused: usize,
    pub indexes_built: usize,
    pub indexes_reused: usize,
}

fn index_dir(out: &Path, field: Field, config: &NormConfig) -> PathBuf {
    let id = Cell {
        field,
        config: config.clone(),
        params: RankParams::default(),
    }
    .id();
    let stem = id.rsplit_once('.').map_or(id.as_str(), |(a, _)| a);
    out.join("indexes").join(stem)
}

/// Loads the saved index if its fingerprint matches, else builds and saves.
fn index_for(docs: &[Document], corpus_sha: &str, dir: &Path, field: Field, config: &NormConfig) -> Result<(InvertedIndex, bool)> {
    let want = index::fingerprint(corpus_sha, field, config);
    if let Ok(m) = InvertedIndex::read_manifest(dir) {
        if m.fingerprint() == want {
            if let Ok(ix) = InvertedIndex::load(dir) {
                return Ok((ix, true));
            }
        }
    }
    let ix = InvertedIndex::build(docs, field, config)?;
    ix.save(dir)?;
    Ok((ix, false))
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::file(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::file(path, e))
}

fn cell_input_hash(fingerprint: &str, topics_sha: &str, qrels_sha: &str, cell: &Cell, grid: &ExperimentGrid) -> String {
    let params = serde_json::to_string(&cell.params).expect("params serialize");
    let eval = serde_json::to_string(&grid.eval).expect("options serialize");
    sha256_hex(format!("{fingerprint}\n{topics_sha}\n{qrels_sha}\n{params}\n{eval}\n{}", grid.depth).as_bytes())
}

fn run_cell(
    cell: &Cell,
    index: &InvertedIndex,
    topics: &[Topic],
    qrels: &[Qrel],
    grid: &ExperimentGrid,
    input: &str,
) -> Result<CellResult> {
    let id = cell.id();
    let searcher = Searcher::new(index)?;
    let mut run = Vec::new();
    for t in topics {
        run.extend(searcher.search(&t.title, &cell.params, grid.depth)?.to_run(t.topic_id, &id));
    }
    let mut run_bytes = Vec::new();
    write_run(&mut run_bytes, &run)?;
    let report = evaluate_run(&run, qrels, &grid.eval)?;
    let runs = grid.out.join("runs");
    let evals = grid.out.join("evals");
    write_atomic(&runs.join(format!("{id}.run")), &run_bytes)?;
    write_atomic(&evals.join(format!("{id}.csv")), report.to_csv().as_bytes())?;
    Ok(CellResult {
        id,
        field: cell.field,
        config: cell.config.label(),
        model: cell.params.model,
        metrics: report.metrics.clone(),
        means: report.means.clone(),
        input_sha256: input.to_string(),
        run_sha256: sha256_hex(&run_bytes),
    })
}

fn reusable(path: &Path, input: &str, metrics: &[String]) -> Option<CellResult> {
    let bytes = fs::read(path).ok()?;
    let r: CellResult = serde_json::from_slice(&bytes).ok()?;
    (r.input_sha256 == input && r.metrics == metrics).then_some(r)
}

/// Runs every cell on a pool of `grid.workers` threads and writes the
/// reports. Cells already finished with identical inputs are not redone.
pub fn run_grid(grid: &ExperimentGrid) -> Result<GridOutcome> {
    grid.validate()?;
    let docs = read_documents_file(&grid.documents)?;
    let topics = read_topics_file(&grid.topics)?;
    let qrels = read_qrels_file(&grid.qrels)?;
    let topics_sha = sha256_hex(&fs::read(&grid.topics).map_err(|e| Error::file(&grid.topics, e))?);
    let qrels_sha = sha256_hex(&fs::read(&grid.qrels).map_err(|e| Error::file(&grid.qrels, e))?);
    let corpus_sha = corpus_hash(&docs);
    for sub in ["indexes", "runs", "evals", "cells"] {
        let d = grid.out.join(sub);
        fs::create_dir_all(&d).map_err(|e| Error::file(&d, e))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(grid.workers)
        .build()
        .map_err(|e| Error::invalid(format!("worker pool: {e}")))?;
    let mut log: Vec<String> = Vec::new();

    let keys: Vec<(Field, NormConfig)> = grid
        .fields
        .iter()
        .flat_map(|&f| grid.configs.iter().map(move |c| (f, c.clone())))
        .collect();
    let built: Vec<(Arc<InvertedIndex>, bool, u128)> = pool.install(|| {
        keys.par_iter()
            .map(|(field, config)| {
                let start = Instant::now();
                let dir = index_dir(&grid.out, *field, config);
                let (ix, reused) = index_for(&docs, &corpus_sha, &dir, *field, config)?;
                Ok((Arc::new(ix), reused, start.elapsed().as_millis()))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut indexes: BTreeMap<String, Arc<InvertedIndex>> = BTreeMap::new();
    let (mut indexes_built, mut indexes_reused) = (0, 0);
    for ((field, config), (ix, reused, ms)) in keys.iter().zip(&built) {
        if *reused {
            indexes_reused += 1;
        } else {
            indexes_built += 1;
        }
        log.push(format!(
            "index {field} {} {} {ms}ms",
            config.label(),
            if *reused { "reused" } else { "built" }
        ));
        indexes.insert(format!("{field}\n{}", config.label()), ix.clone());
    }

    let cells = grid.cells();
    let metrics = grid.eval.metric_names();
    let results: Vec<(CellResult, bool, u128)> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let start = Instant::now();
                let ix = &indexes[&format!("{}\n{}", cell.field, cell.config.label())];
                let input = cell_input_hash(&ix.fingerprint(), &topics_sha, &qrels_sha, cell, grid);
                let path = grid.out.join("cells").join(format!("{}.json", cell.id()));
                if let Some(r) = reusable(&path, &input, &metrics) {
                    return Ok((r, true, start.elapsed().as_millis()));
                }
                let r = run_cell(cell, ix, &topics, &qrels, grid, &input)?;
                let mut json = serde_json::to_vec_pretty(&r)?;
                json.push(b'\n');
                write_atomic(&path, &json)?;
                Ok((r, false, start.elapsed().as_millis()))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let (mut cells_computed, mut cells_reused) = (0, 0);
    let mut rows = Vec::with_capacity(results.len());
    for (r, reused, ms) in results {
        if reused {
            cells_reused += 1;
        } else {
            cells_computed += 1;
        }
        log.push(format!("cell {} {} {ms}ms", r.id, if reused { "reused" } else { "computed" }));
        rows.push(r);
    }
    let report = GridReport {
        metrics,
        baseline: grid.baseline().label(),
        rows,
    };
    write_atomic(&grid.out.join("grid.csv"), report.to_csv().as_bytes())?;
    write_atomic(&grid.out.join("grid.md"), report.to_markdown().as_bytes())?;

    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let log_path = grid.out.join("grid.log");
    let mut f = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&log_path)
        .map_err(|e| Error::file(&log_path, e))?;
    for line in log {
        writeln!(f, "{stamp} {line}")?;
    }
    Ok(GridOutcome {
        report,
        cells_computed,
        cells_reused,
        indexes_built,
        indexes_reused,
    })
}
