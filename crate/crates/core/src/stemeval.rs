//! Intrinsic stemmer evaluation with Paice's understemming index (UI),
//! overstemming index (OI), stemming weight (SW = OI/UI) and the error rate
//! relative to truncation (ERRT).

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// Concept groups: a root label and the words that should conflate to it.
/// Every word belongs to exactly one group.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ConceptGroups {
    groups: Vec<(String, Vec<String>)>,
}

const QUOTES: [char; 6] = ['\'', '"', '`', '‘', '’', '´'];

fn unquote(s: &str) -> &str {
    let s = s.trim();
    let s = s.strip_prefix(QUOTES).unwrap_or(s);
    s.strip_suffix(QUOTES).unwrap_or(s).trim()
}

impl ConceptGroups {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a group. Repeated members within the group are merged; a word
    /// already present in another group is an error.
    pub fn add(&mut self, root: &str, members: &[&str]) -> Result<()> {
        if members.is_empty() {
            return Err(Error::invalid(format!("group {root:?} has no members")));
        }
        if self.groups.iter().any(|(r, _)| r == root) {
            return Err(Error::invalid(format!("repeated group {root:?}")));
        }
        let mut words: Vec<String> = Vec::new();
        for &m in members {
            if m.is_empty() {
                return Err(Error::invalid(format!("group {root:?} has an empty member")));
            }
            if let Some((other, _)) = self.groups.iter().find(|(_, ws)| ws.iter().any(|w| w == m)) {
                return Err(Error::invalid(format!(
                    "word {m:?} is in both {other:?} and {root:?}"
                )));
            }
            if !words.iter().any(|w| w == m) {
                words.push(m.to_string());
            }
        }
        self.groups.push((root.to_string(), words));
        Ok(())
    }

    /// Parses lines of the form `'root': ['member', 'member']`. Any of
    /// `' " ` ‘ ’` may quote an item, quotes may be mixed, and enclosing
    /// `{`/`}` lines, trailing commas, blank lines and `#` comments are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ConceptGroups::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim().trim_end_matches(',').trim();
            if line.is_empty() || line.starts_with('#') || line == "{" || line == "}" {
                continue;
            }
            let line = line.strip_prefix('{').unwrap_or(line);
            let line = line.strip_suffix('}').unwrap_or(line).trim().trim_end_matches(',');
            let Some(open) = line.find('[') else {
                return Err(Error::parse(line_no, None, "expected `root: [members]`"));
            };
            let head = line[..open].trim_end();
            let Some(head) = head.strip_suffix(':') else {
                return Err(Error::parse(line_no, None, "expected ':' before '['"));
            };
            let root = unquote(head);
            let Some(body) = line[open + 1..].trim_end().strip_suffix(']') else {
                return Err(Error::parse(line_no, Some(root.to_string()), "unterminated member list"));
            };
            let members: Vec<&str> = body
                .split(',')
                .map(unquote)
                .filter(|m| !m.is_empty())
                .collect();
            if root.is_empty() {
                return Err(Error::parse(line_no, None, "empty root"));
            }
            out.add(root, &members)
                .map_err(|e| Error::validation(Some(line_no), e.to_string()))?;
        }
        if out.groups.is_empty() {
            return Err(Error::invalid("no concept groups found"));
        }
        Ok(out)
    }

    pub fn groups(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.groups.iter().map(|(r, m)| (r.as_str(), m.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn word_count(&self) -> usize {
        self.groups.iter().map(|(_, m)| m.len()).sum()
    }
}

/// Pair counts behind the indices. All fields hold twice the pair count
/// so that every sum stays integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct PaiceCounts {
    pub gdmt2: u64,
    pub gumt2: u64,
    pub gdnt2: u64,
    pub gwmt2: u64,
}

impl PaiceCounts {
    pub fn ui(&self) -> f64 {
        ratio(self.gumt2, self.gdmt2)
    }

    pub fn oi(&self) -> f64 {
        ratio(self.gwmt2, self.gdnt2)
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PaiceIndices {
    pub ui: f64,
    pub oi: f64,
    /// OI/UI; absent when UI is zero.
    pub sw: Option<f64>,
}

impl From<PaiceCounts> for PaiceIndices {
    fn from(c: PaiceCounts) -> Self {
        let (ui, oi) = (c.ui(), c.oi());
        PaiceIndices {
            ui,
            oi,
            sw: (ui > 0.0).then(|| oi / ui),
        }
    }
}

/// Stems every word and returns the four pair counts.
pub fn paice_counts<F>(groups: &ConceptGroups, stemmer: F) -> PaiceCounts
where
    F: Fn(&str) -> String + Sync,
{
    let w = groups.word_count() as u64;
    // Per group: stems of its members.
    let stemmed: Vec<Vec<String>> = groups
        .groups
        .par_iter()
        .map(|(_, members)| members.iter().map(|m| stemmer(m)).collect())
        .collect();

    let mut counts = PaiceCounts::default();
    // stem → (group index → members of that group with this stem)
    let mut by_stem: HashMap<&str, HashMap<usize, u64>> = HashMap::new();
    for (gi, stems) in stemmed.iter().enumerate() {
        let n = stems.len() as u64;
        counts.gdmt2 += n * (n - 1);
        counts.gdnt2 += n * (w - n);
        let mut within: HashMap<&str, u64> = HashMap::new();
        for s in stems {
            *within.entry(s.as_str()).or_default() += 1;
        }
        counts.gumt2 += within.values().map(|&u| u * (n - u)).sum::<u64>();
        for (s, u) in within {
            *by_stem.entry(s).or_default().entry(gi).or_default() += u;
        }
    }
    for per_group in by_stem.values() {
        let ns: u64 = per_group.values().sum();
        counts.gwmt2 += per_group.values().map(|&v| v * (ns - v)).sum::<u64>();
    }
    counts
}

pub fn paice_indices<F>(groups: &ConceptGroups, stemmer: F) -> PaiceIndices
where
    F: Fn(&str) -> String + Sync,
{
    paice_counts(groups, stemmer).into()
}

/// Keeps the first `n` characters of a word.
pub fn truncate(word: &str, n: usize) -> String {
    word.chars().take(n).collect()
}

/// Indices of the truncation stemmer that keeps the first `n` characters.
pub fn truncation_baseline(groups: &ConceptGroups, n: usize) -> Result<PaiceIndices> {
    if n < 1 {
        return Err(Error::invalid("truncation length must be at least 1"));
    }
    Ok(paice_indices(groups, |w| truncate(w, n)))
}

fn cross(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

/// ERRT = |OP| / |OT| where T is where the ray from the origin through
/// `point` meets the truncation line. The line joins the given (UI, OI)
/// points in UI order, and its first and last segments extend without
/// bound. When the ray meets the line more than once the nearest crossing
/// is used.
pub fn errt(point: (f64, f64), line: &[(f64, f64)]) -> Result<f64> {
    let finite = |p: &(f64, f64)| p.0.is_finite() && p.1.is_finite() && p.0 >= 0.0 && p.1 >= 0.0;
    if !finite(&point) || point == (0.0, 0.0) {
        return Err(Error::invalid(format!(
            "ERRT needs a non-origin point with finite non-negative coordinates, got {point:?}"
        )));
    }
    let mut pts: Vec<(f64, f64)> = line.to_vec();
    if pts.iter().any(|p| !finite(p)) {
        return Err(Error::invalid("truncation line has invalid coordinates"));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    pts.dedup();
    if pts.len() < 2 {
        return Err(Error::invalid("truncation line needs at least two distinct points"));
    }
    if pts.contains(&point) {
        return Ok(1.0);
    }
    let last = pts.len() - 2;
    let mut best: Option<f64> = None;
    for (i, seg) in pts.windows(2).enumerate() {
        let (a, b) = (seg[0], seg[1]);
        let d = (b.0 - a.0, b.1 - a.1);
        let denom = cross(point, d);
        if denom == 0.0 {
            continue;
        }
        let t = cross(a, d) / denom;
        let s = cross(a, point) / denom;
        let lo_ok = i == 0 || s >= 0.0;
        let hi_ok = i == last || s <= 1.0;
        if t > 0.0 && lo_ok && hi_ok && best.is_none_or(|bt| t < bt) {
            best = Some(t);
        }
    }
    match best {
        Some(t) => Ok(1.0 / t),
        None => Err(Error::invalid(format!(
            "ray through ({}, {}) misses the truncation line spanning UI {}..{} and OI {}..{}",
            point.0,
            point.1,
            pts[0].0,
            pts[pts.len() - 1].0,
            pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
            pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationPoint {
    pub n: usize,
    pub ui: f64,
    pub oi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PaiceReport {
    pub label: String,
    pub ui: f64,
    pub oi: f64,
    pub sw: Option<f64>,
    pub errt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StemEvalReport {
    pub words: usize,
    pub groups: usize,
    pub truncation: Vec<TruncationPoint>,
    pub rows: Vec<PaiceReport>,
}

pub const DEFAULT_TRUNCATION_LENGTHS: [usize; 3] = [7, 8, 9];

/// Evaluates labelled stemmers against the groups and the truncation line
/// built from `truncation_lengths`. ERRT is left empty when it cannot be
/// computed (for example a stemmer at the origin).
pub fn evaluate<F>(
    groups: &ConceptGroups,
    stemmers: &[(String, F)],
    truncation_lengths: &[usize],
) -> Result<StemEvalReport>
where
    F: Fn(&str) -> String + Sync,
{
    let truncation = truncation_lengths
        .iter()
        .map(|&n| {
            truncation_baseline(groups, n).map(|p| TruncationPoint {
                n,
                ui: p.ui,
                oi: p.oi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let line: Vec<(f64, f64)> = truncation.iter().map(|t| (t.ui, t.oi)).collect();
    let rows = stemmers
        .iter()
        .map(|(label, f)| {
            let p = paice_indices(groups, f);
            PaiceReport {
                label: label.clone(),
                ui: p.ui,
                oi: p.oi,
                sw: p.sw,
                errt: errt((p.ui, p.oi), &line).ok(),
            }
        })
        .collect();
    Ok(StemEvalReport {
        words: groups.word_count(),
        groups: groups.len(),
        truncation,
        rows,
    })
}

fn fmt6(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"))
}

impl StemEvalReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} words in {} concept groups", self.words, self.groups);
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<12} {:>10} {:>10} {:>10} {:>10}", "stemmer", "UI", "OI", "SW", "ERRT");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{:<12} {:>10} {:>10} {:>10} {:>10}",
                r.label,
                fmt6(Some(r.ui)),
                fmt6(Some(r.oi)),
                fmt6(r.sw),
                fmt6(r.errt)
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<12} {:>10} {:>10}", "truncation", "UI", "OI");
        for t in &self.truncation {
            let _ = writeln!(s, "{:<12} {:>10.6} {:>10.6}", format!("first {}", t.n), t.ui, t.oi);
        }
        s
    }

    /// One row per stemmer and per truncation length.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("kind,label,ui,oi,sw,errt\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "stemmer,{},{:.6},{:.6},{},{}",
                r.label,
                r.ui,
                r.oi,
                r.sw.map_or(String::new(), |v| format!("{v:.6}")),
                r.errt.map_or(String::new(), |v| format!("{v:.6}"))
            );
        }
        for t in &self.truncation {
            let _ = writeln!(s, "truncation,{},{:.6},{:.6},,", t.n, t.ui, t.oi);
        }
        s
    }
}

/// Groups whose members did not all reach one stem, with the stems seen.
/// Useful when inspecting understemming.
pub fn split_groups<F>(groups: &ConceptGroups, stemmer: F) -> BTreeMap<String, Vec<(String, String)>>
where
    F: Fn(&str) -> String,
{
    let mut out = BTreeMap::new();
    for (root, members) in groups.groups() {
        let pairs: Vec<(String, String)> = members.iter().map(|m| (m.clone(), stemmer(m))).collect();
        let distinct: HashSet<&str> = pairs.iter().map(|(_, s)| s.as_str()).collect();
        if distinct.len() > 1 {
            out.insert(root.to_string(), pairs);
        }
    }
    out
}
