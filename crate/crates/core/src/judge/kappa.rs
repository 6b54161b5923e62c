//! Cohen's kappa between assessors over the four relevance grades.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::JudgmentRecord;
use crate::corpus::Grade;
use crate::error::{Error, Result};

/// One assessor's first-round labels keyed by (topic, docno).
pub type Labels = BTreeMap<(u32, String), Grade>;

/// Kappa over the pairs both assessors labelled. When chance agreement is
/// 1 (both gave the same single grade throughout) kappa is 1.
pub fn cohen_kappa(a: &Labels, b: &Labels) -> Result<f64> {
    let shared: Vec<(Grade, Grade)> = a
        .iter()
        .filter_map(|(k, ga)| b.get(k).map(|gb| (*ga, *gb)))
        .collect();
    if shared.is_empty() {
        return Err(Error::invalid("the two assessors share no judged pairs"));
    }
    let n = shared.len() as f64;
    let mut ma = [0f64; 4];
    let mut mb = [0f64; 4];
    let mut agree = 0f64;
    for (x, y) in &shared {
        ma[x.value() as usize] += 1.0;
        mb[y.value() as usize] += 1.0;
        if x == y {
            agree += 1.0;
        }
    }
    let po = agree / n;
    let pe: f64 = (0..4).map(|i| (ma[i] / n) * (mb[i] / n)).sum();
    if pe == 1.0 {
        return Ok(1.0);
    }
    Ok((po - pe) / (1.0 - pe))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairKappa {
    pub a: String,
    pub b: String,
    pub shared: usize,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub assessors: Vec<String>,
    /// `matrix[i][j]` is kappa between assessors i and j; the diagonal and
    /// pairs with nothing in common are empty.
    pub matrix: Vec<Vec<Option<f64>>>,
    pub pairs: Vec<PairKappa>,
    /// Mean over the upper triangle; absent when no pair shares labels.
    pub average: Option<f64>,
}

/// First-round labels of every assessor.
pub fn labels_by_assessor(records: &[JudgmentRecord]) -> BTreeMap<String, Labels> {
    let mut out: BTreeMap<String, Labels> = BTreeMap::new();
    for r in records.iter().filter(|r| r.round == 1) {
        out.entry(r.assessor_id.clone())
            .or_default()
            .insert((r.topic_id, r.docno.clone()), r.grade);
    }
    out
}

pub fn agreement_report(records: &[JudgmentRecord]) -> AgreementReport {
    let labels = labels_by_assessor(records);
    let assessors: Vec<String> = labels.keys().cloned().collect();
    let n = assessors.len();
    let mut matrix = vec![vec![None; n]; n];
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&labels[&assessors[i]], &labels[&assessors[j]]);
            if let Ok(k) = cohen_kappa(a, b) {
                matrix[i][j] = Some(k);
                matrix[j][i] = Some(k);
                pairs.push(PairKappa {
                    a: assessors[i].clone(),
                    b: assessors[j].clone(),
                    shared: a.keys().filter(|k| b.contains_key(*k)).count(),
                    kappa: k,
                });
            }
        }
    }
    let average = (!pairs.is_empty()).then(|| pairs.iter().map(|p| p.kappa).sum::<f64>() / pairs.len() as f64);
    AgreementReport {
        assessors,
        matrix,
        pairs,
        average,
    }
}
