//! Final qrels export with topic exclusion by relevant-document count.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::aggregate::AggregatedQrel;
use crate::corpus::{write_qrels, Qrel};
use crate::error::{Error, Result};

/// Topics whose relevant count (grade ≥ 1) is below `min_relevant` or at
/// least `max_relevant` are dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExclusionRule {
    pub min_relevant: usize,
    pub max_relevant: usize,
}

impl Default for ExclusionRule {
    fn default() -> Self {
        ExclusionRule {
            min_relevant: 10,
            max_relevant: 100,
        }
    }
}

impl ExclusionRule {
    pub fn excludes(&self, relevant: usize) -> Option<&'static str> {
        if relevant < self.min_relevant {
            Some("too few relevant documents")
        } else if relevant >= self.max_relevant {
            Some("too many relevant documents")
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcludedTopic {
    pub topic_id: u32,
    pub relevant: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportReport {
    pub rule: ExclusionRule,
    pub qrels: Vec<Qrel>,
    pub kept_topics: Vec<u32>,
    pub excluded: Vec<ExcludedTopic>,
    /// Kept qrels per grade.
    pub histogram: [u64; 4],
    /// `histogram` as percentages of the kept qrels.
    pub shares: [f64; 4],
}

impl ExportReport {
    pub fn qrels_text(&self) -> String {
        let mut buf = Vec::new();
        write_qrels(&mut buf, &self.qrels).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("qrels are UTF-8")
    }
}

pub fn export_qrels(aggregated: &[AggregatedQrel], rule: ExclusionRule) -> Result<ExportReport> {
    if rule.min_relevant > rule.max_relevant {
        return Err(Error::invalid("min_relevant exceeds max_relevant"));
    }
    let mut by_topic: BTreeMap<u32, Vec<&AggregatedQrel>> = BTreeMap::new();
    for q in aggregated {
        by_topic.entry(q.topic_id).or_default().push(q);
    }
    let mut report = ExportReport {
        rule,
        qrels: Vec::new(),
        kept_topics: Vec::new(),
        excluded: Vec::new(),
        histogram: [0; 4],
        shares: [0.0; 4],
    };
    for (topic_id, pairs) in by_topic {
        let relevant = pairs.iter().filter(|q| q.grade.is_relevant()).count();
        if let Some(reason) = rule.excludes(relevant) {
            report.excluded.push(ExcludedTopic {
                topic_id,
                relevant,
                reason: reason.into(),
            });
            continue;
        }
        report.kept_topics.push(topic_id);
        for q in pairs {
            report.histogram[q.grade.value() as usize] += 1;
            report.qrels.push(Qrel::new(topic_id, q.docno.clone(), q.grade));
        }
    }
    report.qrels.sort_by(|a, b| (a.topic_id, &a.docno).cmp(&(b.topic_id, &b.docno)));
    let total: u64 = report.histogram.iter().sum();
    if total > 0 {
        for i in 0..4 {
            report.shares[i] = 100.0 * report.histogram[i] as f64 / total as f64;
        }
    }
    Ok(report)
}
