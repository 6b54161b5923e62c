use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::markup::{line_at, tags, Tag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topic {
    pub topic_id: u32,
    /// The short query (typically three to five words).
    pub title: String,
    pub description: String,
    pub narrative: String,
}

const FIELDS: [&str; 4] = ["num", "title", "desc", "narr"];

/// Parses `<top>` blocks. Both the closed form (`<title>…</title>`) and the
/// classic TREC form where a field runs until the next tag are accepted.
/// Conventional labels such as `Number:` or `Description:` are stripped.
pub fn parse_topics(text: &str) -> Result<Vec<Topic>> {
    let mut topics = Vec::new();
    let mut ids = HashSet::new();
    let all: Vec<Tag<'_>> = tags(text).collect();
    let mut i = 0;
    while i < all.len() {
        let tag = &all[i];
        if !(tag.is("top") && !tag.closing) {
            i += 1;
            continue;
        }
        let start_line = line_at(text, 1, tag.start);
        let Some(close_idx) = all[i + 1..]
            .iter()
            .position(|t| t.is("top") && t.closing)
            .map(|p| p + i + 1)
        else {
            return Err(Error::parse(start_line, None, "unclosed <top>"));
        };
        let topic = parse_top(text, &all[i + 1..close_idx], all[close_idx].start, start_line)?;
        if !ids.insert(topic.topic_id) {
            return Err(Error::validation(
                Some(start_line),
                format!("duplicate topic id {}", topic.topic_id),
            ));
        }
        topics.push(topic);
        i = close_idx + 1;
    }
    Ok(topics)
}

fn parse_top(text: &str, inner: &[Tag<'_>], block_end: usize, line: usize) -> Result<Topic> {
    let mut values: [Option<String>; 4] = Default::default();
    for (k, tag) in inner.iter().enumerate() {
        if tag.closing {
            continue;
        }
        let Some(slot) = FIELDS.iter().position(|f| tag.is(f)) else {
            continue;
        };
        let end = inner
            .get(k + 1)
            .map(|next| next.start)
            .unwrap_or(block_end);
        let raw = text[tag.end..end].trim();
        let value = strip_label(raw, FIELDS[slot]);
        values[slot] = Some(value.to_string());
    }
    let [num, title, desc, narr] = values;
    let num = num.ok_or_else(|| Error::parse(line, None, "topic without <num>"))?;
    let topic_id: u32 = num
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| Error::parse(line, None, format!("topic number {num:?} is not an integer >= 1")))?;
    let title = title.unwrap_or_default();
    if title.is_empty() {
        return Err(Error::validation(
            Some(line),
            format!("topic {topic_id} has an empty title"),
        ));
    }
    Ok(Topic {
        topic_id,
        title,
        description: desc.unwrap_or_default(),
        narrative: narr.unwrap_or_default(),
    })
}

fn strip_label<'a>(raw: &'a str, field: &str) -> &'a str {
    let label = match field {
        "num" => "number:",
        "desc" => "description:",
        "narr" => "narrative:",
        _ => return raw,
    };
    match raw.get(..label.len()) {
        Some(prefix) if prefix.eq_ignore_ascii_case(label) => raw[label.len()..].trim(),
        _ => raw,
    }
}

/// Writes topics in closed-tag canonical form, ordered by topic id.
pub fn write_topics<W: Write>(mut out: W, topics: &[Topic]) -> Result<()> {
    let mut sorted: Vec<&Topic> = topics.iter().collect();
    sorted.sort_by_key(|t| t.topic_id);
    for t in sorted {
        writeln!(out, "<top>")?;
        writeln!(out, "<num>{}</num>", t.topic_id)?;
        writeln!(out, "<title>{}</title>", t.title.trim())?;
        writeln!(out, "<desc>{}</desc>", t.description.trim())?;
        writeln!(out, "<narr>{}</narr>", t.narrative.trim())?;
        writeln!(out, "</top>")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form() {
        let text = "<top>\n<num>7</num>\n<title>problema lixu iha Dili</title>\n<desc>Informasaun kona-ba lixu.</desc>\n<narr>Dokumentu relevante koalia kona-ba lixu.</narr>\n</top>";
        let t = &parse_topics(text).unwrap()[0];
        assert_eq!(t.topic_id, 7);
        assert_eq!(t.title, "problema lixu iha Dili");
        assert_eq!(t.description, "Informasaun kona-ba lixu.");
    }

    #[test]
    fn classic_open_form_with_labels() {
        let text = "<top>\n<num> Number: 12\n<title> konsumu tabaku\n\n<desc> Description:\nDadus konsumu tabaku.\n\n<narr> Narrative:\nRelevante se iha dadus.\n</top>\n";
        let t = &parse_topics(text).unwrap()[0];
        assert_eq!(t.topic_id, 12);
        assert_eq!(t.title, "konsumu tabaku");
        assert_eq!(t.description, "Dadus konsumu tabaku.");
        assert_eq!(t.narrative, "Relevante se iha dadus.");
    }

    #[test]
    fn round_trip() {
        let topics = vec![
            Topic {
                topic_id: 2,
                title: "b".into(),
                description: "d2".into(),
                narrative: "n2".into(),
            },
            Topic {
                topic_id: 1,
                title: "a".into(),
                description: "d1".into(),
                narrative: "n1".into(),
            },
        ];
        let mut buf = Vec::new();
        write_topics(&mut buf, &topics).unwrap();
        let parsed = parse_topics(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(parsed[0], topics[1]);
        assert_eq!(parsed[1], topics[0]);
    }

    #[test]
    fn duplicate_and_invalid_ids() {
        let dup = "<top><num>1</num><title>a</title></top><top><num>1</num><title>b</title></top>";
        assert!(matches!(parse_topics(dup), Err(Error::Validation { .. })));
        let zero = "<top><num>0</num><title>a</title></top>";
        assert!(matches!(parse_topics(zero), Err(Error::Parse { .. })));
        let empty_title = "<top><num>3</num><title> </title></top>";
        assert!(matches!(parse_topics(empty_title), Err(Error::Validation { .. })));
    }
}
