use std::collections::HashSet;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Graded relevance: 0 irrelevant, 1 marginally relevant, 2 relevant,
/// 3 highly relevant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Grade(u8);

impl Grade {
    pub const IRRELEVANT: Grade = Grade(0);
    pub const MARGINAL: Grade = Grade(1);
    pub const RELEVANT: Grade = Grade(2);
    pub const HIGHLY_RELEVANT: Grade = Grade(3);
    pub const ALL: [Grade; 4] = [Grade(0), Grade(1), Grade(2), Grade(3)];

    pub fn new(value: u8) -> Option<Grade> {
        (value <= 3).then_some(Grade(value))
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Binary relevance used by precision and MAP: any grade >= 1.
    pub fn is_relevant(self) -> bool {
        self.0 >= 1
    }
}

impl TryFrom<u8> for Grade {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        Grade::new(v).ok_or_else(|| format!("grade {v} outside 0..=3"))
    }
}

impl From<Grade> for u8 {
    fn from(g: Grade) -> u8 {
        g.0
    }
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Qrel {
    pub topic_id: u32,
    pub docno: String,
    pub grade: Grade,
}

impl Qrel {
    pub fn new(topic_id: u32, docno: impl Into<String>, grade: Grade) -> Self {
        Qrel {
            topic_id,
            docno: docno.into(),
            grade,
        }
    }
}

/// Parses the 4-column `topic_id iteration docno grade` format.
pub fn parse_qrels(text: &str) -> Result<Vec<Qrel>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(Error::parse(
                lineno,
                None,
                format!("expected 4 columns, found {}", cols.len()),
            ));
        }
        let topic_id: u32 = cols[0]
            .parse()
            .map_err(|_| Error::parse(lineno, None, format!("bad topic id {:?}", cols[0])))?;
        let raw_grade: i64 = cols[3]
            .parse()
            .map_err(|_| Error::parse(lineno, None, format!("bad grade {:?}", cols[3])))?;
        let grade = u8::try_from(raw_grade)
            .ok()
            .and_then(Grade::new)
            .ok_or_else(|| {
                Error::validation(Some(lineno), format!("grade {raw_grade} outside {{0,1,2,3}}"))
            })?;
        if !seen.insert((topic_id, cols[2].to_string())) {
            return Err(Error::validation(
                Some(lineno),
                format!("duplicate judgment for topic {topic_id}, docno {}", cols[2]),
            ));
        }
        out.push(Qrel::new(topic_id, cols[2], grade));
    }
    Ok(out)
}

/// Writes qrels ordered by topic then docno, single-space separated.
pub fn write_qrels<W: Write>(mut out: W, qrels: &[Qrel]) -> Result<()> {
    let mut sorted: Vec<&Qrel> = qrels.iter().collect();
    sorted.sort_by(|a, b| (a.topic_id, &a.docno).cmp(&(b.topic_id, &b.docno)));
    for q in sorted {
        writeln!(out, "{} 0 {} {}", q.topic_id, q.docno, q.grade)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_field_mapping() {
        let q = parse_qrels("7 0 doc42 3\n").unwrap();
        assert_eq!(q, vec![Qrel::new(7, "doc42", Grade::HIGHLY_RELEVANT)]);
    }

    #[test]
    fn canonical_file_round_trips_byte_for_byte() {
        let canonical = "\
1 0 d01 0
1 0 d02 3
1 0 d03 1
2 0 d01 2
2 0 d04 0
2 0 d09 1
3 0 a 3
3 0 b 2
3 0 c 0
10 0 d01 1
";
        let parsed = parse_qrels(canonical).unwrap();
        let mut buf = Vec::new();
        write_qrels(&mut buf, &parsed).unwrap();
        assert_eq!(std::str::from_utf8(&buf).unwrap(), canonical);
    }

    #[test]
    fn grade_out_of_range_names_line() {
        let err = parse_qrels("1 0 a 1\n1 0 b 4\n").unwrap_err();
        assert!(matches!(err, Error::Validation { line: Some(2), .. }), "{err:?}");
        let err = parse_qrels("1 0 a -1\n").unwrap_err();
        assert!(matches!(err, Error::Validation { line: Some(1), .. }));
    }

    #[test]
    fn duplicate_pair_rejected() {
        let err = parse_qrels("1 0 a 1\n1 0 a 2\n").unwrap_err();
        assert!(matches!(err, Error::Validation { line: Some(2), .. }));
    }

    #[test]
    fn wrong_column_count() {
        assert!(matches!(parse_qrels("1 0 a\n"), Err(Error::Parse { line: 1, .. })));
    }
}
