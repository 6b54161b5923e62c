//! Judgment pools built by balanced interleaving of two ranked lists.
//!
//! The two lists take turns, list A first. On its turn a list contributes
//! its highest-ranked document not already pooled; once one list has
//! nothing left to give the other fills the remaining slots. The start side
//! is fixed so pools are reproducible.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Topic;
use crate::error::{Error, Result};
use crate::index::InvertedIndex;
use crate::rank::{Model, RankParams, Searcher};

pub const DEFAULT_DEPTH: usize = 100;
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub docno: String,
    /// The list whose turn added the document.
    pub drawn_from: Source,
    /// 1-based rank in each list, if present there.
    pub rank_a: Option<u32>,
    pub rank_b: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pool {
    pub topic_id: u32,
    pub docnos: Vec<String>,
    /// Aligned with `docnos`.
    pub provenance: Vec<Provenance>,
    /// Neither list retrieved anything.
    #[serde(default)]
    pub empty: bool,
}

impl Pool {
    pub fn len(&self) -> usize {
        self.docnos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docnos.is_empty()
    }

    pub fn contains(&self, docno: &str) -> bool {
        self.docnos.iter().any(|d| d == docno)
    }
}

fn ranks<S: AsRef<str>>(list: &[S]) -> HashMap<&str, u32> {
    let mut m = HashMap::new();
    for (i, d) in list.iter().enumerate() {
        m.entry(d.as_ref()).or_insert(i as u32 + 1);
    }
    m
}

/// Interleaves `a` and `b` into at most `depth` distinct docnos.
pub fn balanced_interleave<S: AsRef<str>>(topic_id: u32, a: &[S], b: &[S], depth: usize) -> Pool {
    let (ra, rb) = (ranks(a), ranks(b));
    let mut pooled: HashSet<&str> = HashSet::new();
    let mut pool = Pool {
        topic_id,
        docnos: Vec::new(),
        provenance: Vec::new(),
        empty: a.is_empty() && b.is_empty(),
    };
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut turn = Source::A;
    let next = |list: &[S], i: &mut usize, pooled: &HashSet<&str>| -> Option<usize> {
        while *i < list.len() {
            let k = *i;
            *i += 1;
            if !pooled.contains(list[k].as_ref()) {
                return Some(k);
            }
        }
        None
    };
    while pool.docnos.len() < depth {
        let (first, second) = match turn {
            Source::A => (Source::A, Source::B),
            Source::B => (Source::B, Source::A),
        };
        let mut picked = None;
        for side in [first, second] {
            let found = match side {
                Source::A => next(a, &mut ia, &pooled).map(|k| a[k].as_ref()),
                Source::B => next(b, &mut ib, &pooled).map(|k| b[k].as_ref()),
            };
            if let Some(d) = found {
                picked = Some((side, d));
                break;
            }
        }
        let Some((side, docno)) = picked else { break };
        pooled.insert(docno);
        pool.docnos.push(docno.to_string());
        pool.provenance.push(Provenance {
            docno: docno.to_string(),
            drawn_from: side,
            rank_a: ra.get(docno).copied(),
            rank_b: rb.get(docno).copied(),
        });
        turn = match side {
            Source::A => Source::B,
            Source::B => Source::A,
        };
    }
    pool
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolConfig {
    pub model_a: RankParams,
    pub model_b: RankParams,
    pub depth: usize,
}

impl Default for PoolConfig {
    fn default() -> Self {
        PoolConfig {
            model_a: RankParams::new(Model::Bm25),
            model_b: RankParams::new(Model::DirichletLm),
            depth: DEFAULT_DEPTH,
        }
    }
}

/// Pools as persisted for the judge service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolSet {
    pub schema_version: u32,
    pub depth: usize,
    pub model_a: String,
    pub model_b: String,
    /// Always `a`: list A takes the first turn.
    pub first_pick: Source,
    pub pools: Vec<Pool>,
}

impl PoolSet {
    pub fn pool(&self, topic_id: u32) -> Option<&Pool> {
        self.pools.iter().find(|p| p.topic_id == topic_id)
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_json<R: Read>(input: R) -> Result<Self> {
        let set: PoolSet = serde_json::from_reader(input)?;
        if set.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported pool schema version {}",
                set.schema_version
            )));
        }
        let mut ids = HashSet::new();
        for p in &set.pools {
            if !ids.insert(p.topic_id) {
                return Err(Error::validation(None, format!("duplicate pool for topic {}", p.topic_id)));
            }
            let mut seen = HashSet::new();
            if let Some(d) = p.docnos.iter().find(|d| !seen.insert(d.as_str())) {
                return Err(Error::validation(
                    None,
                    format!("pool for topic {} repeats docno {d}", p.topic_id),
                ));
            }
        }
        Ok(set)
    }
}

/// Retrieves `depth` documents per topic title with both models and
/// interleaves them. Topics are processed in parallel; output follows
/// topic order.
pub fn build_pools(topics: &[Topic], index: &InvertedIndex, config: &PoolConfig) -> Result<PoolSet> {
    if config.depth < 1 {
        return Err(Error::invalid("pool depth must be at least 1"));
    }
    config.model_a.validate()?;
    config.model_b.validate()?;
    let searcher = Searcher::new(index)?;
    let pools = topics
        .par_iter()
        .map(|t| {
            let q = searcher.prepare(&t.title);
            let a = searcher.search_prepared(&q, &config.model_a, config.depth)?;
            let b = searcher.search_prepared(&q, &config.model_b, config.depth)?;
            Ok(balanced_interleave(t.topic_id, &a.docnos(), &b.docnos(), config.depth))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PoolSet {
        schema_version: SCHEMA_VERSION,
        depth: config.depth,
        model_a: config.model_a.model.to_string(),
        model_b: config.model_b.model.to_string(),
        first_pick: Source::A,
        pools,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternation() {
        let p = balanced_interleave(1, &["1", "2"], &["3", "4"], 4);
        assert_eq!(p.docnos, ["1", "3", "2", "4"]);
        let src: Vec<Source> = p.provenance.iter().map(|x| x.drawn_from).collect();
        assert_eq!(src, [Source::A, Source::B, Source::A, Source::B]);
    }

    #[test]
    fn duplicates_are_skipped() {
        let p = balanced_interleave(1, &["1", "2"], &["2", "3"], 3);
        assert_eq!(p.docnos, ["1", "2", "3"]);
        assert_eq!(p.provenance[1].rank_a, Some(2));
        assert_eq!(p.provenance[1].rank_b, Some(1));
    }

    #[test]
    fn identical_lists_and_exhaustion() {
        let a = ["x", "y", "z"];
        assert_eq!(balanced_interleave(1, &a, &a, 2).docnos, ["x", "y"]);
        assert_eq!(balanced_interleave(1, &a, &a, 10).docnos, a);
        let p = balanced_interleave(1, &["1"], &["2", "3", "4"], 10);
        assert_eq!(p.docnos, ["1", "2", "3", "4"]);
        let empty: [&str; 0] = [];
        let p = balanced_interleave(1, &empty, &empty, 10);
        assert!(p.empty && p.is_empty());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let set = PoolSet {
            schema_version: SCHEMA_VERSION,
            depth: 2,
            model_a: "bm25".into(),
            model_b: "dirichlet_lm".into(),
            first_pick: Source::A,
            pools: vec![balanced_interleave(3, &["a"], &["b"], 2)],
        };
        let mut buf = Vec::new();
        set.write_json(&mut buf).unwrap();
        assert_eq!(PoolSet::read_json(&buf[..]).unwrap(), set);
        let text = String::from_utf8(buf).unwrap().replace("\"b\"", "\"a\"");
        assert!(PoolSet::read_json(text.as_bytes()).is_err());
    }
}
