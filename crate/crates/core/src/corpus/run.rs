use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One line of a TREC run: `topic_id Q0 docno rank score tag`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub topic_id: u32,
    pub docno: String,
    pub rank: u32,
    pub score: f64,
    pub run_tag: String,
}

/// Parses a 6-column run. Within each topic ranks must be exactly 1..n and
/// scores must not increase with rank.
pub fn parse_run(text: &str) -> Result<Vec<RunEntry>> {
    let mut entries = Vec::new();
    let mut lines_of = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 6 {
            return Err(Error::parse(
                lineno,
                None,
                format!("expected 6 columns, found {}", cols.len()),
            ));
        }
        let topic_id = cols[0]
            .parse()
            .map_err(|_| Error::parse(lineno, None, format!("bad topic id {:?}", cols[0])))?;
        let rank = cols[3]
            .parse()
            .map_err(|_| Error::parse(lineno, None, format!("bad rank {:?}", cols[3])))?;
        let score: f64 = cols[4]
            .parse()
            .map_err(|_| Error::parse(lineno, None, format!("bad score {:?}", cols[4])))?;
        if !score.is_finite() {
            return Err(Error::validation(Some(lineno), "score is not finite"));
        }
        entries.push(RunEntry {
            topic_id,
            docno: cols[2].to_string(),
            rank,
            score,
            run_tag: cols[5].to_string(),
        });
        lines_of.push(lineno);
    }
    validate(&entries, &lines_of)?;
    Ok(entries)
}

fn validate(entries: &[RunEntry], lines: &[usize]) -> Result<()> {
    let mut by_topic: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, e) in entries.iter().enumerate() {
        by_topic.entry(e.topic_id).or_default().push(i);
    }
    for (topic, mut idxs) in by_topic {
        idxs.sort_by_key(|&i| entries[i].rank);
        for (pos, pair) in idxs.iter().enumerate() {
            let e = &entries[*pair];
            if e.rank as usize != pos + 1 {
                return Err(Error::validation(
                    Some(lines[*pair]),
                    format!("topic {topic}: expected rank {}, found {}", pos + 1, e.rank),
                ));
            }
            if pos > 0 && entries[idxs[pos - 1]].score < e.score {
                return Err(Error::validation(
                    Some(lines[*pair]),
                    format!("topic {topic}: score increases at rank {}", e.rank),
                ));
            }
        }
    }
    Ok(())
}

/// Writes run lines ordered by topic then rank.
pub fn write_run<W: Write>(mut out: W, entries: &[RunEntry]) -> Result<()> {
    let mut sorted: Vec<&RunEntry> = entries.iter().collect();
    sorted.sort_by_key(|e| (e.topic_id, e.rank));
    for e in sorted {
        writeln!(
            out,
            "{} Q0 {} {} {} {}",
            e.topic_id, e.docno, e.rank, e.score, e.run_tag
        )?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "1 Q0 d3 1 12.5 bm25\n1 Q0 d1 2 3.25 bm25\n2 Q0 d9 1 -4.125 bm25\n";
        let run = parse_run(text).unwrap();
        assert_eq!(run.len(), 3);
        let mut buf = Vec::new();
        write_run(&mut buf, &run).unwrap();
        assert_eq!(std::str::from_utf8(&buf).unwrap(), text);
    }

    #[test]
    fn rank_gap_rejected() {
        let err = parse_run("1 Q0 a 1 2 t\n1 Q0 b 3 1 t\n").unwrap_err();
        assert!(matches!(err, Error::Validation { line: Some(2), .. }), "{err:?}");
    }

    #[test]
    fn increasing_score_rejected() {
        let err = parse_run("1 Q0 a 1 1 t\n1 Q0 b 2 5 t\n").unwrap_err();
        assert!(matches!(err, Error::Validation { line: Some(2), .. }));
    }
}
