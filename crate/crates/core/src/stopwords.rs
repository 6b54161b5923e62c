//! Stopword lists, the variant corrector, and candidate detection by term
//! weighting (tf, idf, tf-idf) and by degree in a word co-occurrence graph.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::LazyLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::open_text;
use crate::error::{Error, Result};

const BUNDLED_LIST: &str = include_str!("../data/stopwords.txt");
const BUNDLED_VARIANTS: &str = include_str!("../data/stopword_variants.tsv");

pub const DEFAULT_CUTOFFS: [usize; 9] = [10, 25, 50, 75, 100, 250, 500, 750, 1000];

static BUNDLED: LazyLock<StopwordList> = LazyLock::new(|| {
    StopwordList::parse(BUNDLED_LIST, Some(BUNDLED_VARIANTS)).expect("bundled stopword list")
});

/// Canonical stopwords in file order plus a misspelling → canonical map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StopwordList {
    terms: Vec<String>,
    set: HashSet<String>,
    variants: BTreeMap<String, String>,
}

impl StopwordList {
    /// The bundled 160-term Tetun list with its variant map.
    pub fn bundled() -> &'static StopwordList {
        &BUNDLED
    }

    pub fn new<I, S>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut list = StopwordList {
            terms: Vec::new(),
            set: HashSet::new(),
            variants: BTreeMap::new(),
        };
        for (i, t) in terms.into_iter().enumerate() {
            let t: String = t.into();
            if t.is_empty() {
                continue;
            }
            if !list.set.insert(t.clone()) {
                return Err(Error::validation(Some(i + 1), format!("duplicate stopword {t:?}")));
            }
            list.terms.push(t);
        }
        Ok(list)
    }

    /// Parses a one-term-per-line list and an optional `variant<TAB>canonical`
    /// file. Blank lines and `#` comments are ignored.
    pub fn parse(list: &str, variants: Option<&str>) -> Result<Self> {
        let mut terms = Vec::new();
        let mut seen = HashSet::new();
        for (i, line) in list.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            if !seen.insert(t) {
                return Err(Error::validation(Some(i + 1), format!("duplicate stopword {t:?}")));
            }
            terms.push(t.to_string());
        }
        let mut out = StopwordList::new(terms)?;
        if let Some(v) = variants {
            for (i, line) in v.lines().enumerate() {
                let line = line.trim_end_matches('\r');
                if line.trim().is_empty() || line.starts_with('#') {
                    continue;
                }
                let Some((variant, canonical)) = line.split_once('\t') else {
                    return Err(Error::parse(i + 1, None, "expected variant<TAB>canonical"));
                };
                out.add_variant(variant.trim(), canonical.trim())
                    .map_err(|e| Error::validation(Some(i + 1), e.to_string()))?;
            }
        }
        Ok(out)
    }

    pub fn read(list: &Path, variants: Option<&Path>) -> Result<Self> {
        let read = |p: &Path| -> Result<String> {
            let mut s = String::new();
            std::io::Read::read_to_string(&mut open_text(p)?, &mut s).map_err(|e| Error::file(p, e))?;
            Ok(s)
        };
        let l = read(list)?;
        let v = variants.map(read).transpose()?;
        Self::parse(&l, v.as_deref())
    }

    /// Registers a misspelling. The canonical form must be in the list and
    /// the variant must not itself be canonical, which keeps correction
    /// idempotent.
    pub fn add_variant(&mut self, variant: &str, canonical: &str) -> Result<()> {
        if !self.set.contains(canonical) {
            return Err(Error::invalid(format!(
                "variant {variant:?} maps to {canonical:?}, which is not in the list"
            )));
        }
        if self.set.contains(variant) {
            return Err(Error::invalid(format!("variant {variant:?} is itself a stopword")));
        }
        self.variants.insert(variant.to_string(), canonical.to_string());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, term: &str) -> bool {
        self.set.contains(term)
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }

    pub fn variants(&self) -> impl Iterator<Item = (&str, &str)> {
        self.variants.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Maps a known misspelling to its canonical stopword.
    pub fn correct_variants<'a>(&'a self, token: &'a str) -> &'a str {
        self.variants.get(token).map_or(token, String::as_str)
    }

    /// Rewrites every term and variant with `f`, merging entries that
    /// collide. Used to match stopwords against tokens that went through the
    /// same character toggles.
    pub fn map_terms(&self, f: impl Fn(&str) -> String) -> StopwordList {
        let mut out = StopwordList {
            terms: Vec::new(),
            set: HashSet::new(),
            variants: BTreeMap::new(),
        };
        for t in &self.terms {
            let m = f(t);
            if !m.is_empty() && out.set.insert(m.clone()) {
                out.terms.push(m);
            }
        }
        for (v, c) in &self.variants {
            let (v, c) = (f(v), f(c));
            if !out.set.contains(&v) {
                out.variants.insert(v, c);
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.terms {
            s.push_str(t);
            s.push('\n');
        }
        s
    }
}

/// Free-function form of [`StopwordList::correct_variants`].
pub fn correct_variants<'a>(token: &'a str, list: &'a StopwordList) -> &'a str {
    list.correct_variants(token)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermScore {
    pub term: String,
    pub tf: u64,
    pub df: u64,
    pub idf: f64,
    pub tfidf: f64,
}

/// Raw per-term counts; partitions merge by addition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TermStats {
    pub docs: u64,
    counts: HashMap<String, (u64, u64)>,
}

impl TermStats {
    pub fn add_document<S: AsRef<str>>(&mut self, tokens: &[S]) {
        self.docs += 1;
        let mut local: HashMap<&str, u64> = HashMap::new();
        for t in tokens {
            *local.entry(t.as_ref()).or_default() += 1;
        }
        for (t, n) in local {
            let e = self.counts.entry(t.to_string()).or_default();
            e.0 += n;
            e.1 += 1;
        }
    }

    pub fn merge(mut self, other: TermStats) -> TermStats {
        self.docs += other.docs;
        for (t, (tf, df)) in other.counts {
            let e = self.counts.entry(t).or_default();
            e.0 += tf;
            e.1 += df;
        }
        self
    }

    pub fn vocabulary_size(&self) -> usize {
        self.counts.len()
    }

    /// Scores sorted by term.
    pub fn scores(&self) -> Result<Vec<TermScore>> {
        if self.docs == 0 {
            return Err(Error::invalid("cannot score terms of an empty corpus"));
        }
        let n = self.docs as f64;
        let mut out: Vec<TermScore> = self
            .counts
            .iter()
            .map(|(term, &(tf, df))| {
                let idf = (n / df as f64).ln();
                TermScore {
                    term: term.clone(),
                    tf,
                    df,
                    idf,
                    tfidf: tf as f64 * idf,
                }
            })
            .collect();
        out.sort_by(|a, b| a.term.cmp(&b.term));
        Ok(out)
    }
}

/// Counts tf and df over the corpus in parallel and derives idf = ln(N/df)
/// and the corpus-level tf-idf = tf × idf.
pub fn score_terms<S: AsRef<str> + Sync>(corpus: &[Vec<S>]) -> Result<Vec<TermScore>> {
    if corpus.is_empty() {
        return Err(Error::invalid("cannot score terms of an empty corpus"));
    }
    term_stats(corpus).scores()
}

pub fn term_stats<S: AsRef<str> + Sync>(corpus: &[Vec<S>]) -> TermStats {
    corpus
        .par_iter()
        .fold(TermStats::default, |mut acc, doc| {
            acc.add_document(doc);
            acc
        })
        .reduce(TermStats::default, TermStats::merge)
}

/// Directed graph over the vocabulary with an edge `a → b` whenever `b`
/// directly follows `a` inside a document. Repeated pairs are one edge; a
/// word followed by itself gives a self-loop.
#[derive(Debug, Clone, Default)]
pub struct CooccurrenceGraph {
    ids: HashMap<String, u32>,
    names: Vec<String>,
    edges: HashSet<(u32, u32)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Degrees {
    pub in_degree: usize,
    pub out_degree: usize,
    pub degree: usize,
}

impl CooccurrenceGraph {
    fn intern(&mut self, term: &str) -> u32 {
        if let Some(&id) = self.ids.get(term) {
            return id;
        }
        let id = self.names.len() as u32;
        self.names.push(term.to_string());
        self.ids.insert(term.to_string(), id);
        id
    }

    pub fn add_document<S: AsRef<str>>(&mut self, tokens: &[S]) {
        let ids: Vec<u32> = tokens.iter().map(|t| self.intern(t.as_ref())).collect();
        for w in ids.windows(2) {
            self.edges.insert((w[0], w[1]));
        }
    }

    pub fn merge(mut self, other: CooccurrenceGraph) -> CooccurrenceGraph {
        let remap: Vec<u32> = other.names.iter().map(|n| self.intern(n)).collect();
        for (a, b) in other.edges {
            self.edges.insert((remap[a as usize], remap[b as usize]));
        }
        self
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_edge(&self, from: &str, to: &str) -> bool {
        match (self.ids.get(from), self.ids.get(to)) {
            (Some(&a), Some(&b)) => self.edges.contains(&(a, b)),
            _ => false,
        }
    }

    /// Edges as sorted term pairs.
    pub fn edges(&self) -> BTreeSet<(&str, &str)> {
        self.edges
            .iter()
            .map(|&(a, b)| (self.names[a as usize].as_str(), self.names[b as usize].as_str()))
            .collect()
    }

    /// Degrees of every node, keyed by term.
    pub fn degrees(&self) -> BTreeMap<&str, Degrees> {
        let mut ins = vec![0usize; self.names.len()];
        let mut outs = vec![0usize; self.names.len()];
        for &(a, b) in &self.edges {
            outs[a as usize] += 1;
            ins[b as usize] += 1;
        }
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                (
                    n.as_str(),
                    Degrees {
                        in_degree: ins[i],
                        out_degree: outs[i],
                        degree: ins[i] + outs[i],
                    },
                )
            })
            .collect()
    }
}

pub fn build_graph<S: AsRef<str> + Sync>(corpus: &[Vec<S>]) -> CooccurrenceGraph {
    corpus
        .par_iter()
        .fold(CooccurrenceGraph::default, |mut g, doc| {
            g.add_document(doc);
            g
        })
        .reduce(CooccurrenceGraph::default, CooccurrenceGraph::merge)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Tf,
    Idf,
    Tfidf,
    InDegree,
    OutDegree,
    Degree,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Tf,
        Method::Idf,
        Method::Tfidf,
        Method::InDegree,
        Method::OutDegree,
        Method::Degree,
    ];
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Tf => "tf",
            Method::Idf => "idf",
            Method::Tfidf => "tfidf",
            Method::InDegree => "in_degree",
            Method::OutDegree => "out_degree",
            Method::Degree => "degree",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.to_string() == s.trim().to_ascii_lowercase().replace('-', "_"))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown method {s:?} (expected tf, idf, tfidf, in_degree, out_degree or degree)"
                ))
            })
    }
}

/// Term scores and co-occurrence graph for one corpus.
#[derive(Debug, Clone)]
pub struct StopwordAnalysis {
    pub scores: Vec<TermScore>,
    pub graph: CooccurrenceGraph,
}

impl StopwordAnalysis {
    pub fn build<S: AsRef<str> + Sync>(corpus: &[Vec<S>]) -> Result<Self> {
        let (scores, graph) = rayon::join(|| score_terms(corpus), || build_graph(corpus));
        Ok(StopwordAnalysis {
            scores: scores?,
            graph,
        })
    }

    /// The top `n` terms under `method`. idf ranks ascending (most common
    /// first); every other method ranks descending. Ties go to the
    /// lexicographically smaller term.
    pub fn rank_candidates(&self, method: Method, n: usize) -> Result<Vec<String>> {
        if n < 1 {
            return Err(Error::invalid("candidate count must be at least 1"));
        }
        let mut scored: Vec<(&str, f64)> = match method {
            Method::Tf => self.scores.iter().map(|s| (s.term.as_str(), s.tf as f64)).collect(),
            Method::Idf => self.scores.iter().map(|s| (s.term.as_str(), -s.idf)).collect(),
            Method::Tfidf => self.scores.iter().map(|s| (s.term.as_str(), s.tfidf)).collect(),
            Method::InDegree | Method::OutDegree | Method::Degree => self
                .graph
                .degrees()
                .into_iter()
                .map(|(t, d)| {
                    let v = match method {
                        Method::InDegree => d.in_degree,
                        Method::OutDegree => d.out_degree,
                        _ => d.degree,
                    };
                    (t, v as f64)
                })
                .collect(),
        };
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        Ok(scored.into_iter().take(n).map(|(t, _)| t.to_string()).collect())
    }
}

/// P@n = |top-n ∩ truth| / n for each cutoff. A candidate list shorter
/// than n still divides by n.
pub fn precision_at<S: AsRef<str>>(
    candidates: &[S],
    truth: &StopwordList,
    cutoffs: &[usize],
) -> Result<BTreeMap<usize, f64>> {
    if truth.is_empty() {
        return Err(Error::invalid("ground-truth stopword list is empty"));
    }
    let mut out = BTreeMap::new();
    for &n in cutoffs {
        if n == 0 {
            return Err(Error::invalid("cutoff must be at least 1"));
        }
        let hits = candidates
            .iter()
            .take(n)
            .filter(|c| truth.contains(c.as_ref()))
            .count();
        out.insert(n, hits as f64 / n as f64);
    }
    Ok(out)
}
