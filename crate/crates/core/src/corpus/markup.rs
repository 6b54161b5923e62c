use std::sync::LazyLock;

use regex::Regex;

static TAG: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"<\s*(/?)\s*([A-Za-z][A-Za-z0-9_]*)\s*>").unwrap());

/// An SGML-ish tag occurrence. Matching is case-insensitive and tolerates
/// whitespace inside the angle brackets; attributes are not recognized.
#[derive(Debug, Clone)]
pub(crate) struct Tag<'a> {
    pub start: usize,
    pub end: usize,
    pub closing: bool,
    pub name: &'a str,
}

impl Tag<'_> {
    pub fn is(&self, name: &str) -> bool {
        self.name.eq_ignore_ascii_case(name)
    }
}

pub(crate) fn tags(text: &str) -> impl Iterator<Item = Tag<'_>> {
    TAG.captures_iter(text).map(|c| {
        let whole = c.get(0).unwrap();
        Tag {
            start: whole.start(),
            end: whole.end(),
            closing: !c[1].is_empty(),
            name: c.get(2).unwrap().as_str(),
        }
    })
}

pub(crate) fn find_open<'a>(text: &'a str, name: &str) -> Option<Tag<'a>> {
    tags(text).find(|t| !t.closing && t.is(name))
}

pub(crate) fn find_close<'a>(text: &'a str, name: &str) -> Option<Tag<'a>> {
    tags(text).find(|t| t.closing && t.is(name))
}

/// 1-based line number of byte offset `pos` given the line of `text[0]`.
pub(crate) fn line_at(text: &str, first_line: usize, pos: usize) -> usize {
    first_line + text[..pos].bytes().filter(|&b| b == b'\n').count()
}
