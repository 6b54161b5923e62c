//! Graded-relevance evaluation: precision, average precision and NDCG at
//! cutoffs plus uncut MAP and NDCG.
//!
//! A document is relevant when its grade is at least 1; unjudged documents
//! have grade 0. Average precision divides by the total number of relevant
//! documents for the topic, not by `min(R, k)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Qrel, RunEntry};
use crate::error::{Error, Result};

pub const DEFAULT_CUTOFFS: [usize; 3] = [5, 10, 20];

/// Grade → gain mapping for NDCG.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gain {
    /// gain = grade
    #[default]
    Linear,
    /// gain = 2^grade − 1
    Exponential,
}

impl Gain {
    pub fn apply(self, grade: u8) -> f64 {
        match self {
            Gain::Linear => grade as f64,
            Gain::Exponential => (1u32 << grade) as f64 - 1.0,
        }
    }
}

impl fmt::Display for Gain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Gain::Linear => "linear",
            Gain::Exponential => "exponential",
        })
    }
}

impl FromStr for Gain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(Gain::Linear),
            "exponential" | "exp" => Ok(Gain::Exponential),
            other => Err(Error::invalid(format!(
                "unknown gain {other:?} (expected linear or exponential)"
            ))),
        }
    }
}

/// Grades of one topic's judged documents.
pub type TopicQrels = HashMap<String, u8>;

fn grade(qrels: &TopicQrels, docno: &str) -> u8 {
    qrels.get(docno).copied().unwrap_or(0)
}

pub fn relevant_count(qrels: &TopicQrels) -> usize {
    qrels.values().filter(|&&g| g >= 1).count()
}

/// Fraction of the first `k` ranks holding a relevant document. Missing
/// ranks count as irrelevant.
pub fn precision_at_k<S: AsRef<str>>(ranked: &[S], qrels: &TopicQrels, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let hits = ranked
        .iter()
        .take(k)
        .filter(|d| grade(qrels, d.as_ref()) >= 1)
        .count();
    hits as f64 / k as f64
}

/// Average precision over the first `k` ranks (`None` = whole ranking).
/// `None` when the topic has no relevant documents.
pub fn average_precision<S: AsRef<str>>(ranked: &[S], qrels: &TopicQrels, k: Option<usize>) -> Option<f64> {
    let r = relevant_count(qrels);
    if r == 0 {
        return None;
    }
    let limit = k.unwrap_or(usize::MAX);
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (i, d) in ranked.iter().take(limit).enumerate() {
        if grade(qrels, d.as_ref()) >= 1 {
            hits += 1;
            sum += hits as f64 / (i + 1) as f64;
        }
    }
    Some(sum / r as f64)
}

/// NDCG over the first `k` ranks (`None` = whole ranking) with a log2(i+1)
/// discount. The ideal ranking sorts all judged grades descending. 0 when
/// the ideal gain is 0.
pub fn ndcg_at_k<S: AsRef<str>>(ranked: &[S], qrels: &TopicQrels, k: Option<usize>, gain: Gain) -> f64 {
    let limit = k.unwrap_or(usize::MAX);
    let discount = |i: usize| ((i + 2) as f64).log2();
    let dcg: f64 = ranked
        .iter()
        .take(limit)
        .enumerate()
        .map(|(i, d)| gain.apply(grade(qrels, d.as_ref())) / discount(i))
        .sum();
    let mut ideal: Vec<u8> = qrels.values().copied().filter(|&g| g > 0).collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal
        .iter()
        .take(limit)
        .enumerate()
        .map(|(i, &g)| gain.apply(g) / discount(i))
        .sum();
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub cutoffs: Vec<usize>,
    pub gain: Gain,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            cutoffs: DEFAULT_CUTOFFS.to_vec(),
            gain: Gain::Linear,
        }
    }
}

impl EvalOptions {
    /// Column names: P@k…, MAP@k…, NDCG@k…, MAP, NDCG.
    pub fn metric_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for prefix in ["P", "MAP", "NDCG"] {
            for k in &self.cutoffs {
                names.push(format!("{prefix}@{k}"));
            }
        }
        names.push("MAP".into());
        names.push("NDCG".into());
        names
    }

    fn validate(&self) -> Result<()> {
        if self.cutoffs.is_empty() || self.cutoffs.contains(&0) {
            return Err(Error::invalid("cutoffs must be non-empty and at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopicMetrics {
    pub topic_id: u32,
    pub relevant: usize,
    pub retrieved: usize,
    /// Aligned with [`MetricReport::metrics`].
    pub values: Vec<f64>,
    /// The topic had no entries in the run and was scored as all zeros.
    pub missing_from_run: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedTopic {
    pub topic_id: u32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub run_tag: String,
    pub qrels_tag: String,
    pub gain: Gain,
    pub metrics: Vec<String>,
    pub topics: Vec<TopicMetrics>,
    /// Arithmetic means over evaluated topics; zeros when there are none.
    pub means: Vec<f64>,
    pub skipped: Vec<SkippedTopic>,
}

/// Metric values for one ranking, in [`EvalOptions::metric_names`] order.
pub fn topic_values<S: AsRef<str>>(ranked: &[S], qrels: &TopicQrels, opts: &EvalOptions) -> Vec<f64> {
    let mut v = Vec::with_capacity(opts.cutoffs.len() * 3 + 2);
    for &k in &opts.cutoffs {
        v.push(precision_at_k(ranked, qrels, k));
    }
    for &k in &opts.cutoffs {
        v.push(average_precision(ranked, qrels, Some(k)).unwrap_or(0.0));
    }
    for &k in &opts.cutoffs {
        v.push(ndcg_at_k(ranked, qrels, Some(k), opts.gain));
    }
    v.push(average_precision(ranked, qrels, None).unwrap_or(0.0));
    v.push(ndcg_at_k(ranked, qrels, None, opts.gain));
    v
}

/// Groups qrels by topic.
pub fn qrels_by_topic(qrels: &[Qrel]) -> BTreeMap<u32, TopicQrels> {
    let mut out: BTreeMap<u32, TopicQrels> = BTreeMap::new();
    for q in qrels {
        out.entry(q.topic_id)
            .or_default()
            .insert(q.docno.clone(), q.grade.value());
    }
    out
}

/// Ranked docnos per topic, ordered by rank, keeping the first occurrence
/// of a repeated docno.
pub fn run_by_topic(run: &[RunEntry]) -> BTreeMap<u32, Vec<String>> {
    let mut grouped: BTreeMap<u32, Vec<&RunEntry>> = BTreeMap::new();
    for e in run {
        grouped.entry(e.topic_id).or_default().push(e);
    }
    grouped
        .into_iter()
        .map(|(t, mut es)| {
            es.sort_by_key(|e| e.rank);
            let mut seen = HashSet::new();
            let docs = es
                .into_iter()
                .filter(|e| seen.insert(e.docno.as_str()))
                .map(|e| e.docno.clone())
                .collect();
            (t, docs)
        })
        .collect()
}

/// Evaluates every qrels topic that has at least one relevant document.
/// Such topics missing from the run score zero and are marked. Run topics
/// absent from the qrels, and qrels topics without relevant documents, are
/// listed as skipped.
pub fn evaluate_run(run: &[RunEntry], qrels: &[Qrel], opts: &EvalOptions) -> Result<MetricReport> {
    opts.validate()?;
    let judged = qrels_by_topic(qrels);
    let ranked = run_by_topic(run);
    let empty: Vec<String> = Vec::new();

    let mut skipped = Vec::new();
    for t in ranked.keys().filter(|t| !judged.contains_key(t)) {
        skipped.push(SkippedTopic {
            topic_id: *t,
            reason: "not in qrels".into(),
        });
    }
    let mut evaluated = Vec::new();
    for (t, q) in &judged {
        if relevant_count(q) == 0 {
            skipped.push(SkippedTopic {
                topic_id: *t,
                reason: "no relevant documents".into(),
            });
        } else {
            evaluated.push((*t, q));
        }
    }
    skipped.sort_by_key(|s| s.topic_id);

    let topics: Vec<TopicMetrics> = evaluated
        .par_iter()
        .map(|&(t, q)| {
            let docs = ranked.get(&t).unwrap_or(&empty);
            TopicMetrics {
                topic_id: t,
                relevant: relevant_count(q),
                retrieved: docs.len(),
                values: topic_values(docs, q, opts),
                missing_from_run: !ranked.contains_key(&t),
            }
        })
        .collect();

    let metrics = opts.metric_names();
    let means = (0..metrics.len())
        .map(|i| {
            if topics.is_empty() {
                0.0
            } else {
                topics.iter().map(|t| t.values[i]).sum::<f64>() / topics.len() as f64
            }
        })
        .collect();
    let run_tags: BTreeSet<&str> = run.iter().map(|e| e.run_tag.as_str()).collect();
    Ok(MetricReport {
        run_tag: run_tags.into_iter().collect::<Vec<_>>().join("+"),
        qrels_tag: String::new(),
        gain: opts.gain,
        metrics,
        topics,
        means,
        skipped,
    })
}

impl MetricReport {
    pub fn with_qrels_tag(mut self, tag: impl Into<String>) -> Self {
        self.qrels_tag = tag.into();
        self
    }

    pub fn mean(&self, metric: &str) -> Option<f64> {
        self.metrics.iter().position(|m| m == metric).map(|i| self.means[i])
    }

    pub fn topic(&self, topic_id: u32) -> Option<&TopicMetrics> {
        self.topics.iter().find(|t| t.topic_id == topic_id)
    }

    pub fn value(&self, topic_id: u32, metric: &str) -> Option<f64> {
        let i = self.metrics.iter().position(|m| m == metric)?;
        self.topic(topic_id).map(|t| t.values[i])
    }

    fn header_note(&self) -> String {
        format!(
            "run={} qrels={} relevant=grade>=1 gain={} topics={}",
            self.run_tag,
            self.qrels_tag,
            self.gain,
            self.topics.len()
        )
    }

    /// One row per topic and a final `mean` row, values to 4 decimals.
    pub fn to_csv(&self) -> String {
        let mut s = format!("topic,{}\n", self.metrics.join(","));
        let row = |s: &mut String, label: &str, vals: &[f64]| {
            let cells: Vec<String> = vals.iter().map(|v| format!("{v:.4}")).collect();
            let _ = writeln!(s, "{label},{}", cells.join(","));
        };
        for t in &self.topics {
            row(&mut s, &t.topic_id.to_string(), &t.values);
        }
        row(&mut s, "mean", &self.means);
        s
    }

    /// Aligned table with a header note, followed by flagged topics.
    pub fn to_text(&self) -> String {
        let mut s = format!("# {}\n", self.header_note());
        let width = self.metrics.iter().map(|m| m.len()).max().unwrap_or(6).max(6);
        let _ = write!(s, "{:<8}", "topic");
        for m in &self.metrics {
            let _ = write!(s, " {m:>width$}");
        }
        s.push('\n');
        let mut row = |label: &str, vals: &[f64]| {
            let _ = write!(s, "{label:<8}");
            for v in vals {
                let _ = write!(s, " {v:>width$.4}");
            }
            s.push('\n');
        };
        for t in &self.topics {
            row(&t.topic_id.to_string(), &t.values);
        }
        row("mean", &self.means);
        for t in self.topics.iter().filter(|t| t.missing_from_run) {
            let _ = writeln!(s, "# topic {} missing from run, scored 0", t.topic_id);
        }
        for sk in &self.skipped {
            let _ = writeln!(s, "# topic {} skipped: {}", sk.topic_id, sk.reason);
        }
        s
    }

    /// Means only, as a markdown table.
    pub fn to_markdown(&self) -> String {
        let mut s = format!("| run | {} |\n|---|", self.metrics.join(" | "));
        s.push_str(&"---:|".repeat(self.metrics.len()));
        s.push('\n');
        let cells: Vec<String> = self.means.iter().map(|v| format!("{v:.4}")).collect();
        let _ = writeln!(s, "| {} | {} |", self.run_tag, cells.join(" | "));
        s
    }
}
