//! Majority voting over assessor grades, tie detection and the second
//! round that settles ties.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::JudgmentRecord;
use crate::corpus::Grade;
use crate::error::{Error, Result};

pub const DEFAULT_ASSESSORS: usize = 5;
pub const DEFAULT_SECOND_ROUND_VOTES: usize = 3;

/// Vote counts indexed by grade.
pub type Histogram = [u32; 4];

pub fn histogram(grades: &[Grade]) -> Histogram {
    let mut h = [0u32; 4];
    for g in grades {
        h[g.value() as usize] += 1;
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// One grade had more than half of the first-round votes.
    Majority,
    /// The combined first- and second-round votes had a unique mode.
    SecondRound,
    /// Settled by preferring the higher grade.
    TieBroken,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Majority => "majority",
            Status::SecondRound => "second_round",
            Status::TieBroken => "tie_broken",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregatedQrel {
    pub topic_id: u32,
    pub docno: String,
    pub grade: Grade,
    pub status: Status,
    pub round1: Histogram,
    pub round2: Histogram,
}

/// Outcome of the first round for one (topic, docno) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RoundOne {
    Majority(Grade),
    /// No majority. The options are the two most frequent grades, most
    /// frequent first, the higher grade first among equals.
    Tie([Grade; 2]),
}

/// Classifies `m` first-round votes.
pub fn first_round(votes: &[Grade], m: usize) -> Result<RoundOne> {
    if votes.len() != m || m == 0 {
        return Err(Error::invalid(format!("expected {m} first-round votes, got {}", votes.len())));
    }
    let h = histogram(votes);
    let mut order: Vec<Grade> = Grade::ALL.into_iter().collect();
    order.sort_by(|a, b| {
        h[b.value() as usize]
            .cmp(&h[a.value() as usize])
            .then(b.cmp(a))
    });
    let top = order[0];
    if 2 * h[top.value() as usize] as usize > m {
        return Ok(RoundOne::Majority(top));
    }
    Ok(RoundOne::Tie([order[0], order[1]]))
}

/// Merges the second-round votes with the first-round votes and takes the
/// mode; a tied mode goes to the higher grade.
pub fn resolve_second_round(round1: &[Grade], options: [Grade; 2], round2: &[Grade]) -> Result<(Grade, Status)> {
    if let Some(g) = round2.iter().find(|g| !options.contains(g)) {
        return Err(Error::invalid(format!(
            "second-round grade {g} is not one of the options {} and {}",
            options[0], options[1]
        )));
    }
    if options[0] == options[1] {
        return Ok((options[0], Status::SecondRound));
    }
    let mut all = round1.to_vec();
    all.extend_from_slice(round2);
    let h = histogram(&all);
    let max = *h.iter().max().unwrap_or(&0);
    let modes: Vec<Grade> = Grade::ALL
        .into_iter()
        .filter(|g| h[g.value() as usize] == max)
        .collect();
    let best = *modes.iter().max().expect("at least one grade has the maximum");
    let status = if modes.len() == 1 {
        Status::SecondRound
    } else {
        Status::TieBroken
    };
    Ok((best, status))
}

/// Settles a tie without a second round by taking the higher option.
pub fn break_tie(options: [Grade; 2]) -> Grade {
    options[0].max(options[1])
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TiedPair {
    pub pair: String,
    pub topic_id: u32,
    pub docno: String,
    pub options: [Grade; 2],
    pub round1: Histogram,
    /// Second-round votes so far, by assessor.
    pub round2: BTreeMap<String, Grade>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IncompletePair {
    pub topic_id: u32,
    pub docno: String,
    pub votes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Aggregation {
    /// Settled pairs, by (topic, docno).
    pub qrels: Vec<AggregatedQrel>,
    /// Tied pairs still waiting for second-round votes.
    pub ties: Vec<TiedPair>,
    /// Pairs without exactly `m` first-round votes.
    pub incomplete: Vec<IncompletePair>,
}

impl Aggregation {
    pub fn status_counts(&self) -> BTreeMap<Status, usize> {
        let mut out = BTreeMap::new();
        for q in &self.qrels {
            *out.entry(q.status).or_default() += 1;
        }
        out
    }

    /// Pairs whose first round ended in a tie, settled or not.
    pub fn tie_count(&self) -> usize {
        self.ties.len()
            + self
                .qrels
                .iter()
                .filter(|q| q.status != Status::Majority)
                .count()
    }
}

pub fn pair_id(topic_id: u32, docno: &str) -> String {
    format!("{topic_id}:{docno}")
}

pub fn parse_pair_id(pair: &str) -> Result<(u32, String)> {
    let (t, d) = pair
        .split_once(':')
        .ok_or_else(|| Error::invalid(format!("pair {pair:?} is not topic:docno")))?;
    let topic = t
        .parse()
        .map_err(|_| Error::invalid(format!("pair {pair:?} has a non-numeric topic")))?;
    if d.is_empty() {
        return Err(Error::invalid(format!("pair {pair:?} has an empty docno")));
    }
    Ok((topic, d.to_string()))
}

/// Aggregates judgment records. A tied pair is settled once it has
/// `second_round_votes` second-round votes.
pub fn aggregate(records: &[JudgmentRecord], m: usize, second_round_votes: usize) -> Result<Aggregation> {
    if m == 0 || second_round_votes == 0 {
        return Err(Error::invalid("assessor and vote counts must be at least 1"));
    }
    type Votes = (Vec<Grade>, BTreeMap<String, Grade>);
    let mut pairs: BTreeMap<(u32, &str), Votes> = BTreeMap::new();
    for r in records {
        let e = pairs.entry((r.topic_id, r.docno.as_str())).or_default();
        match r.round {
            1 => e.0.push(r.grade),
            2 => {
                e.1.insert(r.assessor_id.clone(), r.grade);
            }
            other => return Err(Error::invalid(format!("unknown round {other}"))),
        }
    }
    let mut out = Aggregation::default();
    for ((topic_id, docno), (r1, r2)) in pairs {
        if r1.len() != m {
            out.incomplete.push(IncompletePair {
                topic_id,
                docno: docno.to_string(),
                votes: r1.len(),
            });
            continue;
        }
        let h1 = histogram(&r1);
        match first_round(&r1, m)? {
            RoundOne::Majority(grade) => out.qrels.push(AggregatedQrel {
                topic_id,
                docno: docno.to_string(),
                grade,
                status: Status::Majority,
                round1: h1,
                round2: [0; 4],
            }),
            RoundOne::Tie(options) if r2.len() >= second_round_votes => {
                let v2: Vec<Grade> = r2.values().copied().collect();
                let (grade, status) = resolve_second_round(&r1, options, &v2)?;
                out.qrels.push(AggregatedQrel {
                    topic_id,
                    docno: docno.to_string(),
                    grade,
                    status,
                    round1: h1,
                    round2: histogram(&v2),
                });
            }
            RoundOne::Tie(options) => out.ties.push(TiedPair {
                pair: pair_id(topic_id, docno),
                topic_id,
                docno: docno.to_string(),
                options,
                round1: h1,
                round2: r2,
            }),
        }
    }
    Ok(out)
}

/// Settles every open tie with [`break_tie`].
pub fn break_open_ties(agg: &Aggregation) -> Vec<AggregatedQrel> {
    let mut all = agg.qrels.clone();
    for t in &agg.ties {
        let v2: Vec<Grade> = t.round2.values().copied().collect();
        all.push(AggregatedQrel {
            topic_id: t.topic_id,
            docno: t.docno.clone(),
            grade: break_tie(t.options),
            status: Status::TieBroken,
            round1: t.round1,
            round2: histogram(&v2),
        });
    }
    all.sort_by(|a, b| (a.topic_id, &a.docno).cmp(&(b.topic_id, &b.docno)));
    all
}
