use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::markup::{find_close, find_open, line_at, tags};
use crate::error::{Error, Result};

/// Per-record size limit applied while scanning for `</DOC>`.
pub const DEFAULT_MAX_RECORD_BYTES: usize = 64 * 1024 * 1024;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub docno: String,
    pub title: String,
    pub url: String,
    pub source: String,
    /// Kept as published; never validated as a calendar date.
    pub date: String,
    pub content: String,
    /// Unrecognized child elements, in input order. Carried through the
    /// writer but ignored by every other component.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra: Vec<(String, String)>,
}

impl Document {
    pub fn new(docno: impl Into<String>, title: impl Into<String>, content: impl Into<String>) -> Self {
        Document {
            docno: docno.into(),
            title: title.into(),
            content: content.into(),
            ..Default::default()
        }
    }
}

/// Streaming reader over concatenated `<DOC>…</DOC>` blocks.
///
/// Memory use is bounded by one record (see [`DocumentReader::with_max_record_bytes`]).
/// Docnos are checked for uniqueness across the whole stream.
pub struct DocumentReader<R> {
    reader: R,
    line: usize,
    carry: Option<(String, usize)>,
    max_record_bytes: usize,
    seen: HashSet<String>,
    failed: bool,
}

impl<R: BufRead> DocumentReader<R> {
    pub fn new(reader: R) -> Self {
        DocumentReader {
            reader,
            line: 0,
            carry: None,
            max_record_bytes: DEFAULT_MAX_RECORD_BYTES,
            seen: HashSet::new(),
            failed: false,
        }
    }

    pub fn with_max_record_bytes(mut self, cap: usize) -> Self {
        self.max_record_bytes = cap;
        self
    }

    /// Next physical line (with its 1-based number), or `None` at EOF.
    fn next_line(&mut self) -> Result<Option<(String, usize)>> {
        if let Some(carried) = self.carry.take() {
            return Ok(Some(carried));
        }
        let mut bytes = Vec::new();
        let n = self.reader.read_until(b'\n', &mut bytes)?;
        if n == 0 {
            return Ok(None);
        }
        self.line += 1;
        let text = String::from_utf8(bytes)
            .map_err(|_| Error::parse(self.line, None, "invalid UTF-8 byte sequence"))?;
        Ok(Some((text, self.line)))
    }

    fn read_document(&mut self) -> Result<Option<Document>> {
        // Outside any block: skip blank lines, expect <DOC>.
        let (mut block, block_line) = loop {
            let Some((line, lineno)) = self.next_line()? else {
                return Ok(None);
            };
            match find_open(&line, "doc") {
                Some(tag) => {
                    if !line[..tag.start].trim().is_empty() {
                        return Err(Error::parse(lineno, None, "text outside <DOC> block"));
                    }
                    break (line[tag.end..].to_string(), lineno);
                }
                None if line.trim().is_empty() => continue,
                None => return Err(Error::parse(lineno, None, "text outside <DOC> block")),
            }
        };

        let close = loop {
            if let Some(tag) = find_close(&block, "doc") {
                break tag;
            }
            if block.len() > self.max_record_bytes {
                return Err(Error::parse(
                    block_line,
                    docno_hint(&block),
                    format!("record exceeds {} bytes without </DOC>", self.max_record_bytes),
                ));
            }
            match self.next_line()? {
                Some((line, _)) => block.push_str(&line),
                None => {
                    return Err(Error::parse(
                        block_line,
                        docno_hint(&block),
                        "unclosed <DOC> at end of input",
                    ))
                }
            }
        };
        let (close_start, close_end) = (close.start, close.end);
        let rest = block[close_end..].to_string();
        if !rest.trim().is_empty() {
            let rest_line = line_at(&block, block_line, close_end);
            self.carry = Some((rest, rest_line));
        }
        block.truncate(close_start);
        let doc = parse_block(&block, block_line)?;
        if !self.seen.insert(doc.docno.clone()) {
            return Err(Error::validation(
                Some(block_line),
                format!("duplicate docno {:?}", doc.docno),
            ));
        }
        Ok(Some(doc))
    }
}

impl<R: BufRead> Iterator for DocumentReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.read_document() {
            Ok(Some(doc)) => Some(Ok(doc)),
            Ok(None) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

fn docno_hint(block: &str) -> Option<String> {
    let open = find_open(block, "docno")?;
    let after = &block[open.end..];
    let close = find_close(after, "docno")?;
    Some(format!("docno {}", after[..close.start].trim()))
}

fn parse_block(body: &str, first_line: usize) -> Result<Document> {
    let mut doc = Document::default();
    let mut have_docno = false;
    let mut seen_fields: HashSet<String> = HashSet::new();
    let mut pos = 0;
    while pos < body.len() {
        let Some(open) = tags(&body[pos..]).next() else {
            if !body[pos..].trim().is_empty() {
                return Err(Error::parse(
                    line_at(body, first_line, pos),
                    docno_hint(body),
                    "stray text inside <DOC>",
                ));
            }
            break;
        };
        let open_start = pos + open.start;
        let open_end = pos + open.end;
        if !body[pos..open_start].trim().is_empty() {
            return Err(Error::parse(
                line_at(body, first_line, pos),
                docno_hint(body),
                "stray text inside <DOC>",
            ));
        }
        if open.closing {
            return Err(Error::parse(
                line_at(body, first_line, open_start),
                docno_hint(body),
                format!("unexpected closing tag </{}>", open.name),
            ));
        }
        let name = open.name.to_string();
        let Some(close) = find_close(&body[open_end..], &name) else {
            return Err(Error::parse(
                line_at(body, first_line, open_start),
                docno_hint(body),
                format!("unclosed <{name}>"),
            ));
        };
        let text = body[open_end..open_end + close.start].trim().to_string();
        pos = open_end + close.end;

        let key = name.to_ascii_lowercase();
        if !seen_fields.insert(key.clone()) {
            return Err(Error::parse(
                line_at(body, first_line, open_start),
                docno_hint(body),
                format!("repeated <{name}>"),
            ));
        }
        match key.as_str() {
            "docno" => {
                doc.docno = text;
                have_docno = true;
            }
            "title" => doc.title = text,
            "url" => doc.url = text,
            "source" => doc.source = text,
            "date" => doc.date = text,
            "content" => doc.content = text,
            _ => doc.extra.push((name, text)),
        }
    }
    if !have_docno || doc.docno.is_empty() {
        return Err(Error::parse(first_line, None, "missing or empty <DOCNO>"));
    }
    Ok(doc)
}

/// Parses a whole in-memory document stream.
pub fn parse_documents(text: &str) -> Result<Vec<Document>> {
    DocumentReader::new(text.as_bytes()).collect()
}

/// Writes documents in canonical form: one child element per line, field
/// text trimmed, extra elements after `<CONTENT>`.
pub fn write_documents<'a, W: Write>(
    mut out: W,
    docs: impl IntoIterator<Item = &'a Document>,
) -> Result<()> {
    for doc in docs {
        writeln!(out, "<DOC>")?;
        writeln!(out, "<DOCNO>{}</DOCNO>", doc.docno.trim())?;
        writeln!(out, "<TITLE>{}</TITLE>", doc.title.trim())?;
        writeln!(out, "<URL>{}</URL>", doc.url.trim())?;
        writeln!(out, "<SOURCE>{}</SOURCE>", doc.source.trim())?;
        writeln!(out, "<DATE>{}</DATE>", doc.date.trim())?;
        writeln!(out, "<CONTENT>{}</CONTENT>", doc.content.trim())?;
        for (name, text) in &doc.extra {
            writeln!(out, "<{name}>{}</{name}>", text.trim())?;
        }
        writeln!(out, "</DOC>")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "<DOC>
<DOCNO>tet-001</DOCNO>
<TITLE> Governu lansa programa foun </TITLE>
<URL>https://example.tl/1</URL>
<SOURCE>Timor News</SOURCE>
<DATE>2023-05-07</DATE>
<CONTENT>
Governu lansa programa foun ba komunidade.
Programa ne'e sei ajuda ema barak.
</CONTENT>
</DOC>
";

    #[test]
    fn one_block_maps_fields() {
        let docs = parse_documents(SAMPLE).unwrap();
        assert_eq!(docs.len(), 1);
        let d = &docs[0];
        assert_eq!(d.docno, "tet-001");
        assert_eq!(d.title, "Governu lansa programa foun");
        assert_eq!(d.source, "Timor News");
        assert!(d.content.starts_with("Governu lansa"));
        assert!(d.content.ends_with("ema barak."));
    }

    #[test]
    fn empty_stream() {
        assert!(parse_documents("").unwrap().is_empty());
        assert!(parse_documents("\n  \n").unwrap().is_empty());
    }

    #[test]
    fn round_trip_through_writer() {
        let docs = parse_documents(SAMPLE).unwrap();
        let mut buf = Vec::new();
        write_documents(&mut buf, &docs).unwrap();
        let again = parse_documents(std::str::from_utf8(&buf).unwrap()).unwrap();
        assert_eq!(docs, again);
    }

    #[test]
    fn tags_are_case_insensitive_and_whitespace_tolerant() {
        let text = "<doc><DocNo >d1</ docno><title>a</TITLE>< /doc >";
        let docs = parse_documents(text).unwrap();
        assert_eq!(docs[0].docno, "d1");
        assert_eq!(docs[0].title, "a");
        assert_eq!(docs[0].content, "");
    }

    #[test]
    fn several_blocks_on_one_line() {
        let text = "<DOC><DOCNO>a</DOCNO></DOC><DOC><DOCNO>b</DOCNO></DOC>\n<DOC><DOCNO>c</DOCNO></DOC>";
        let ids: Vec<_> = parse_documents(text)
            .unwrap()
            .into_iter()
            .map(|d| d.docno)
            .collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    #[test]
    fn unknown_tags_preserved() {
        let text = "<DOC><DOCNO>a</DOCNO><CATEGORY>news</CATEGORY></DOC>";
        let doc = &parse_documents(text).unwrap()[0];
        assert_eq!(doc.extra, vec![("CATEGORY".to_string(), "news".to_string())]);
    }

    #[test]
    fn unclosed_doc_reports_line_and_docno() {
        let text = "\n<DOC>\n<DOCNO>x9</DOCNO>\n<TITLE>t</TITLE>\n";
        let err = parse_documents(text).unwrap_err();
        match err {
            Error::Parse { line, context, .. } => {
                assert_eq!(line, 2);
                assert_eq!(context.as_deref(), Some("docno x9"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unclosed_field_tag() {
        let text = "<DOC>\n<DOCNO>x1</DOCNO>\n<TITLE>broken\n</DOC>";
        let err = parse_documents(text).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn missing_docno() {
        let err = parse_documents("<DOC><TITLE>t</TITLE></DOC>").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }));
    }

    #[test]
    fn duplicate_docno_rejected() {
        let text = "<DOC><DOCNO>a</DOCNO></DOC><DOC><DOCNO>a</DOCNO></DOC>";
        assert!(matches!(
            parse_documents(text).unwrap_err(),
            Error::Validation { .. }
        ));
    }

    #[test]
    fn invalid_utf8_is_hard_error() {
        let bytes: &[u8] = b"<DOC><DOCNO>a</DOCNO>\n<TITLE>\xff</TITLE></DOC>";
        let err = DocumentReader::new(bytes).collect::<Result<Vec<_>>>().unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn record_cap_stops_unterminated_block() {
        let mut text = String::from("<DOC><DOCNO>big</DOCNO><CONTENT>\n");
        for _ in 0..1000 {
            text.push_str("liafuan barak tebes\n");
        }
        let err = DocumentReader::new(text.as_bytes())
            .with_max_record_bytes(1024)
            .collect::<Result<Vec<_>>>()
            .unwrap_err();
        assert!(err.to_string().contains("exceeds 1024 bytes"), "{err}");
    }
}
