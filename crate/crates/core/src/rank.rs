//! Ranking models and top-k retrieval.
//!
//! Per-term weights, with `dl` the document length, `avdl` the average
//! length, `N` the document count, `|C|` the collection length and `cf` the
//! collection frequency of the term. All logarithms are natural except in
//! DFR BM25.
//!
//! | model | weight |
//! |---|---|
//! | `bm25` | `max(0, ln((N−df+0.5)/(df+0.5))) · tf(k1+1)/(tf + K)` |
//! | `tfidf` | `tf/(tf + K) · ln(1 + N/df)` |
//! | `dfr_bm25` | `log2((N+1)/(df+0.5)) · tf(k1+1)/(tf + K)` |
//! | `dirichlet_lm` | `ln((tf + mu·cf/|C|)/(dl + mu))` |
//! | `hiemstra_lm` | `ln(1 + λ·tf·|C| / ((1−λ)·cf·dl))` |
//!
//! where `K = k1·(1 − b + b·dl/avdl)`. Each weight is multiplied by the
//! query term frequency. A document is a candidate when it contains at
//! least one query term; its score sums the weights of every query term
//! that occurs in the collection, including terms the document lacks
//! (which only matters for `dirichlet_lm`).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::RunEntry;
use crate::error::{Error, Result};
use crate::index::{CollectionStats, InvertedIndex};
use crate::textnorm::Normalizer;

pub const DEFAULT_K: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Tfidf,
    Bm25,
    DfrBm25,
    DirichletLm,
    HiemstraLm,
}

impl Model {
    pub const ALL: [Model; 5] = [
        Model::Tfidf,
        Model::Bm25,
        Model::DfrBm25,
        Model::DirichletLm,
        Model::HiemstraLm,
    ];
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::Tfidf => "tfidf",
            Model::Bm25 => "bm25",
            Model::DfrBm25 => "dfr_bm25",
            Model::DirichletLm => "dirichlet_lm",
            Model::HiemstraLm => "hiemstra_lm",
        })
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Model::ALL
            .into_iter()
            .find(|m| m.to_string() == key)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown model {s:?} (expected tfidf, bm25, dfr_bm25, dirichlet_lm or hiemstra_lm)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankParams {
    pub model: Model,
    pub k1: f64,
    pub b: f64,
    pub mu: f64,
    pub lambda: f64,
}

impl Default for RankParams {
    fn default() -> Self {
        RankParams {
            model: Model::Bm25,
            k1: 1.2,
            b: 0.75,
            mu: 2500.0,
            lambda: 0.15,
        }
    }
}

impl RankParams {
    pub fn new(model: Model) -> Self {
        RankParams {
            model,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |c: bool, msg: &str| if c { Ok(()) } else { Err(Error::invalid(msg)) };
        ok(self.k1.is_finite() && self.k1 > 0.0, "k1 must be > 0")?;
        ok((0.0..=1.0).contains(&self.b), "b must be in [0, 1]")?;
        ok(self.mu.is_finite() && self.mu > 0.0, "mu must be > 0")?;
        ok(self.lambda > 0.0 && self.lambda < 1.0, "lambda must be in (0, 1)")
    }
}

/// Collection statistics of one query term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QueryTerm {
    pub term: String,
    pub qtf: u32,
    pub df: u64,
    pub cf: u64,
}

/// Weight of one query term in one document, before the qtf factor.
pub fn term_weight(params: &RankParams, stats: &CollectionStats, df: u64, cf: u64, tf: u32, dl: u32) -> f64 {
    if df == 0 {
        return 0.0;
    }
    let n = stats.documents as f64;
    let df = df as f64;
    let tf = tf as f64;
    let dl = dl as f64;
    let k = params.k1 * (1.0 - params.b + params.b * dl / stats.avdl);
    match params.model {
        Model::Bm25 => {
            let idf = ((n - df + 0.5) / (df + 0.5)).ln().max(0.0);
            idf * tf * (params.k1 + 1.0) / (tf + k)
        }
        Model::Tfidf => tf / (tf + k) * (1.0 + n / df).ln(),
        Model::DfrBm25 => ((n + 1.0) / (df + 0.5)).log2() * tf * (params.k1 + 1.0) / (tf + k),
        Model::DirichletLm => {
            let c = stats.total_tokens as f64;
            ((tf + params.mu * cf as f64 / c) / (dl + params.mu)).ln()
        }
        Model::HiemstraLm => {
            let c = stats.total_tokens as f64;
            let l = params.lambda;
            (1.0 + l * tf * c / ((1.0 - l) * cf as f64 * dl)).ln()
        }
    }
}

/// Score of one document: `tfs[i]` is the document's frequency of
/// `terms[i]`.
pub fn score(params: &RankParams, stats: &CollectionStats, terms: &[QueryTerm], tfs: &[u32], dl: u32) -> f64 {
    terms
        .iter()
        .zip(tfs)
        .filter(|(t, _)| t.df > 0)
        .map(|(t, &tf)| t.qtf as f64 * term_weight(params, stats, t.df, t.cf, tf, dl))
        .sum()
}

/// A normalized query bound to the index it was prepared against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PreparedQuery {
    pub index_fingerprint: String,
    /// Distinct terms in byte order.
    pub terms: Vec<QueryTerm>,
}

impl PreparedQuery {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hit {
    pub docno: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct RankedList {
    /// By score descending, then docno ascending.
    pub hits: Vec<Hit>,
    /// The query normalized to no terms at all.
    pub empty_query: bool,
}

impl RankedList {
    pub fn to_run(&self, topic_id: u32, run_tag: &str) -> Vec<RunEntry> {
        self.hits
            .iter()
            .enumerate()
            .map(|(i, h)| RunEntry {
                topic_id,
                docno: h.docno.clone(),
                rank: i as u32 + 1,
                score: h.score,
                run_tag: run_tag.to_string(),
            })
            .collect()
    }

    pub fn docnos(&self) -> Vec<&str> {
        self.hits.iter().map(|h| h.docno.as_str()).collect()
    }
}

/// Query processing against one index, reusing its normalizer.
#[derive(Debug, Clone)]
pub struct Searcher<'a> {
    index: &'a InvertedIndex,
    normalizer: Normalizer,
    fingerprint: String,
    stats: CollectionStats,
}

impl<'a> Searcher<'a> {
    pub fn new(index: &'a InvertedIndex) -> Result<Self> {
        Ok(Searcher {
            index,
            normalizer: index.normalizer()?,
            fingerprint: index.fingerprint(),
            stats: index.stats(),
        })
    }

    pub fn index(&self) -> &InvertedIndex {
        self.index
    }

    pub fn prepare(&self, text: &str) -> PreparedQuery {
        let mut qtf: BTreeMap<String, u32> = BTreeMap::new();
        for t in self.normalizer.normalize(text) {
            *qtf.entry(t).or_default() += 1;
        }
        PreparedQuery {
            index_fingerprint: self.fingerprint.clone(),
            terms: qtf
                .into_iter()
                .map(|(term, qtf)| QueryTerm {
                    df: self.index.df(&term) as u64,
                    cf: self.index.cf(&term),
                    term,
                    qtf,
                })
                .collect(),
        }
    }

    pub fn search(&self, text: &str, params: &RankParams, k: usize) -> Result<RankedList> {
        self.search_prepared(&self.prepare(text), params, k)
    }

    pub fn search_prepared(&self, query: &PreparedQuery, params: &RankParams, k: usize) -> Result<RankedList> {
        if k < 1 {
            return Err(Error::invalid("k must be at least 1"));
        }
        params.validate()?;
        if query.index_fingerprint != self.fingerprint {
            return Err(Error::IndexMismatch(format!(
                "query was prepared for index {} but is scored against {}",
                short(&query.index_fingerprint),
                short(&self.fingerprint)
            )));
        }
        if query.is_empty() {
            return Ok(RankedList {
                hits: Vec::new(),
                empty_query: true,
            });
        }
        let nterms = query.terms.len();
        let mut tfs: HashMap<u32, Vec<u32>> = HashMap::new();
        for (i, t) in query.terms.iter().enumerate() {
            for p in self.index.postings(&t.term) {
                tfs.entry(p.doc).or_insert_with(|| vec![0; nterms])[i] = p.tf;
            }
        }
        let mut hits: Vec<Hit> = tfs
            .into_iter()
            .map(|(doc, tf)| Hit {
                docno: self.index.docno(doc).to_string(),
                score: score(params, &self.stats, &query.terms, &tf, self.index.doc_len(doc)),
            })
            .collect();
        sort_hits(&mut hits);
        hits.truncate(k);
        Ok(RankedList {
            hits,
            empty_query: false,
        })
    }
}

/// Score descending, then docno ascending.
pub fn sort_hits(hits: &mut [Hit]) {
    hits.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.docno.cmp(&b.docno)));
}

fn short(fingerprint: &str) -> &str {
    &fingerprint[..fingerprint.len().min(12)]
}

/// One-shot search.
pub fn search(index: &InvertedIndex, text: &str, params: &RankParams, k: usize) -> Result<RankedList> {
    Searcher::new(index)?.search(text, params, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Document;
    use crate::index::Field;
    use crate::textnorm::NormConfig;

    fn index(contents: &[&str]) -> InvertedIndex {
        let docs: Vec<Document> = contents
            .iter()
            .enumerate()
            .map(|(i, c)| Document::new(format!("doc{}", i + 1), "", *c))
            .collect();
        InvertedIndex::build(&docs, Field::Content, &NormConfig::baseline()).unwrap()
    }

    #[test]
    fn absent_term_scores_nothing() {
        let ix = index(&["a b", "b c"]);
        for m in Model::ALL {
            let r = search(&ix, "zzz", &RankParams::new(m), 10).unwrap();
            assert!(r.hits.is_empty());
            assert!(!r.empty_query);
        }
    }

    #[test]
    fn empty_query_is_flagged() {
        let ix = index(&["a b"]);
        let r = search(&ix, " ,. ", &RankParams::default(), 10).unwrap();
        assert!(r.empty_query && r.hits.is_empty());
    }

    #[test]
    fn bm25_hand_value() {
        // N = 3, df(a) = 1, dl = 2, avdl = 7/3.
        let ix = index(&["a b", "b c", "c d e"]);
        let r = search(&ix, "a", &RankParams::default(), 10).unwrap();
        let idf = ((3.0 - 1.0 + 0.5) / 1.5f64).ln();
        let k = 1.2 * (0.25 + 0.75 * 2.0 / (7.0 / 3.0));
        assert!((r.hits[0].score - idf * 2.2 / (1.0 + k)).abs() < 1e-12);
    }

    #[test]
    fn ties_break_on_docno() {
        let ix = index(&["x y", "x y", "q"]);
        for m in Model::ALL {
            let r = search(&ix, "x", &RankParams::new(m), 10).unwrap();
            assert_eq!(r.docnos(), ["doc1", "doc2"], "{m}");
            assert_eq!(r.hits[0].score, r.hits[1].score);
        }
    }

    #[test]
    fn k_truncates_and_validates() {
        let ix = index(&["x", "x x", "x y"]);
        let r = search(&ix, "x", &RankParams::default(), 2).unwrap();
        assert_eq!(r.hits.len(), 2);
        assert!(search(&ix, "x", &RankParams::default(), 0).is_err());
    }

    #[test]
    fn mismatched_index_is_rejected() {
        let a = index(&["x y"]);
        let b = index(&["x z"]);
        let q = Searcher::new(&a).unwrap().prepare("x");
        let err = Searcher::new(&b).unwrap().search_prepared(&q, &RankParams::default(), 5);
        assert!(matches!(err, Err(Error::IndexMismatch(_))));
    }

    #[test]
    fn params_validation() {
        assert!(RankParams { b: 1.5, ..Default::default() }.validate().is_err());
        assert!(RankParams { lambda: 1.0, ..Default::default() }.validate().is_err());
        assert!(RankParams { k1: 0.0, ..Default::default() }.validate().is_err());
        assert!(RankParams { mu: -1.0, ..Default::default() }.validate().is_err());
        assert!(RankParams::default().validate().is_ok());
    }

    #[test]
    fn model_names() {
        for m in Model::ALL {
            assert_eq!(m.to_string().parse::<Model>().unwrap(), m);
        }
        assert!("lm".parse::<Model>().is_err());
    }
}
