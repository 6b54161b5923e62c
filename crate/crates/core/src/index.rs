//! Inverted index over one document field, its collection statistics, and a
//! byte-deterministic on-disk layout.
//!
//! An index directory holds four files:
//!
//! * `manifest.json`: format version, field, normalization config, corpus
//!   SHA-256, counts, and the SHA-256 of each data file.
//! * `dictionary.bin`: terms in byte order, front-coded against the previous
//!   term, each followed by df, cf and the byte length of its postings.
//! * `postings.bin`: per term, (document-id gap, tf) pairs as LEB128 varints.
//! * `docs.bin`: per document, docno and token length.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{write_documents, Document};
use crate::error::{Error, Result};
use crate::textnorm::{NormConfig, Normalizer};

pub const FORMAT_VERSION: u32 = 1;

const MANIFEST: &str = "manifest.json";
const DICTIONARY: &str = "dictionary.bin";
const POSTINGS: &str = "postings.bin";
const DOCS: &str = "docs.bin";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Title,
    Content,
}

impl Field {
    pub fn text(self, doc: &Document) -> &str {
        match self {
            Field::Title => &doc.title,
            Field::Content => &doc.content,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Field::Title => "title",
            Field::Content => "content",
        })
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "title" => Ok(Field::Title),
            "content" => Ok(Field::Content),
            other => Err(Error::invalid(format!(
                "unknown field {other:?} (expected title or content)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Posting {
    pub doc: u32,
    pub tf: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CollectionStats {
    pub documents: usize,
    /// Average document length in tokens; 0 for an empty collection.
    pub avdl: f64,
    pub total_tokens: u64,
    pub vocabulary: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub name: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub field: Field,
    pub config: NormConfig,
    pub config_label: String,
    pub corpus_sha256: String,
    pub documents: usize,
    pub total_tokens: u64,
    pub vocabulary: usize,
    pub files: Vec<FileDigest>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvertedIndex {
    field: Field,
    config: NormConfig,
    corpus_sha256: String,
    docnos: Vec<String>,
    doc_lens: Vec<u32>,
    /// Sorted by term bytes.
    terms: Vec<String>,
    cfs: Vec<u64>,
    postings: Vec<Vec<Posting>>,
    total_tokens: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Fingerprint an index built from this corpus, field and configuration
/// would have; lets callers check a saved index without loading it.
pub fn fingerprint(corpus_sha256: &str, field: Field, config: &NormConfig) -> String {
    sha256_hex(format!("{corpus_sha256}\n{field}\n{}", config.to_kv()).as_bytes())
}

impl Manifest {
    pub fn fingerprint(&self) -> String {
        fingerprint(&self.corpus_sha256, self.field, &self.config)
    }
}

/// SHA-256 of the canonical serialization of the documents.
pub fn corpus_hash(docs: &[Document]) -> String {
    let mut buf = Vec::new();
    write_documents(&mut buf, docs).expect("writing to memory cannot fail");
    sha256_hex(&buf)
}

impl InvertedIndex {
    /// Normalizes `field` of every document in parallel, then merges the
    /// per-document term counts on one thread in document order.
    pub fn build(docs: &[Document], field: Field, config: &NormConfig) -> Result<Self> {
        let normalizer = Normalizer::new(config.clone())?;
        let mut seen = HashMap::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if let Some(prev) = seen.insert(d.docno.as_str(), i) {
                return Err(Error::validation(
                    None,
                    format!("duplicate docno {:?} (documents {} and {})", d.docno, prev + 1, i + 1),
                ));
            }
        }
        if docs.len() > u32::MAX as usize {
            return Err(Error::invalid("too many documents for one index"));
        }

        let per_doc: Vec<(BTreeMap<String, u32>, u32)> = docs
            .par_iter()
            .map(|d| {
                let tokens = normalizer.normalize(field.text(d));
                let len = tokens.len() as u32;
                let mut counts = BTreeMap::new();
                for t in tokens {
                    *counts.entry(t).or_insert(0u32) += 1;
                }
                (counts, len)
            })
            .collect();

        let mut merged: BTreeMap<String, Vec<Posting>> = BTreeMap::new();
        let mut doc_lens = Vec::with_capacity(docs.len());
        for (doc, (counts, len)) in per_doc.into_iter().enumerate() {
            doc_lens.push(len);
            for (term, tf) in counts {
                merged.entry(term).or_default().push(Posting {
                    doc: doc as u32,
                    tf,
                });
            }
        }
        let mut terms = Vec::with_capacity(merged.len());
        let mut cfs = Vec::with_capacity(merged.len());
        let mut postings = Vec::with_capacity(merged.len());
        for (term, list) in merged {
            cfs.push(list.iter().map(|p| p.tf as u64).sum());
            terms.push(term);
            postings.push(list);
        }
        Ok(InvertedIndex {
            field,
            config: config.clone(),
            corpus_sha256: corpus_hash(docs),
            docnos: docs.iter().map(|d| d.docno.clone()).collect(),
            total_tokens: doc_lens.iter().map(|&l| l as u64).sum(),
            doc_lens,
            terms,
            cfs,
            postings,
        })
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn config(&self) -> &NormConfig {
        &self.config
    }

    pub fn corpus_sha256(&self) -> &str {
        &self.corpus_sha256
    }

    /// Identifies the index contents: corpus, field and normalization.
    pub fn fingerprint(&self) -> String {
        fingerprint(&self.corpus_sha256, self.field, &self.config)
    }

    pub fn stats(&self) -> CollectionStats {
        let n = self.docnos.len();
        CollectionStats {
            documents: n,
            avdl: if n == 0 {
                0.0
            } else {
                self.total_tokens as f64 / n as f64
            },
            total_tokens: self.total_tokens,
            vocabulary: self.terms.len(),
        }
    }

    pub fn document_count(&self) -> usize {
        self.docnos.len()
    }

    pub fn vocabulary_size(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }

    fn term_id(&self, term: &str) -> Option<usize> {
        self.terms.binary_search_by(|t| t.as_str().cmp(term)).ok()
    }

    pub fn postings(&self, term: &str) -> &[Posting] {
        self.term_id(term).map_or(&[], |i| &self.postings[i])
    }

    pub fn df(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub fn cf(&self, term: &str) -> u64 {
        self.term_id(term).map_or(0, |i| self.cfs[i])
    }

    pub fn docno(&self, doc: u32) -> &str {
        &self.docnos[doc as usize]
    }

    pub fn docnos(&self) -> &[String] {
        &self.docnos
    }

    pub fn doc_id(&self, docno: &str) -> Option<u32> {
        self.docnos.iter().position(|d| d == docno).map(|i| i as u32)
    }

    pub fn doc_len(&self, doc: u32) -> u32 {
        self.doc_lens[doc as usize]
    }

    /// Normalizer configured like the one used to build the index.
    pub fn normalizer(&self) -> Result<Normalizer> {
        Normalizer::new(self.config.clone())
    }

    fn encode(&self) -> (Vec<u8>, Vec<u8>, Vec<u8>) {
        let mut dict = Vec::new();
        let mut post = Vec::new();
        let mut prev: &[u8] = &[];
        for (i, term) in self.terms.iter().enumerate() {
            let bytes = term.as_bytes();
            let shared = prev.iter().zip(bytes).take_while(|(a, b)| a == b).count();
            write_varint(&mut dict, shared as u64);
            write_varint(&mut dict, (bytes.len() - shared) as u64);
            dict.extend_from_slice(&bytes[shared..]);
            let start = post.len();
            let mut last = 0u32;
            for (k, p) in self.postings[i].iter().enumerate() {
                let gap = if k == 0 { p.doc } else { p.doc - last };
                write_varint(&mut post, gap as u64);
                write_varint(&mut post, p.tf as u64);
                last = p.doc;
            }
            write_varint(&mut dict, self.postings[i].len() as u64);
            write_varint(&mut dict, self.cfs[i]);
            write_varint(&mut dict, (post.len() - start) as u64);
            prev = bytes;
        }
        let mut docs = Vec::new();
        for (docno, &len) in self.docnos.iter().zip(&self.doc_lens) {
            write_varint(&mut docs, docno.len() as u64);
            docs.extend_from_slice(docno.as_bytes());
            write_varint(&mut docs, len as u64);
        }
        (dict, post, docs)
    }

    pub fn manifest(&self) -> Manifest {
        let (dict, post, docs) = self.encode();
        self.manifest_for(&dict, &post, &docs)
    }

    fn manifest_for(&self, dict: &[u8], post: &[u8], docs: &[u8]) -> Manifest {
        let digest = |name: &str, bytes: &[u8]| FileDigest {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len() as u64,
        };
        Manifest {
            format_version: FORMAT_VERSION,
            field: self.field,
            config: self.config.clone(),
            config_label: self.config.label(),
            corpus_sha256: self.corpus_sha256.clone(),
            documents: self.docnos.len(),
            total_tokens: self.total_tokens,
            vocabulary: self.terms.len(),
            files: vec![
                digest(DICTIONARY, dict),
                digest(POSTINGS, post),
                digest(DOCS, docs),
            ],
        }
    }

    /// Writes the index into `dir`, creating it if needed. Each file is
    /// written to a temporary name and renamed, manifest last.
    pub fn save(&self, dir: &Path) -> Result<Manifest> {
        fs::create_dir_all(dir).map_err(|e| Error::file(dir, e))?;
        let (dict, post, docs) = self.encode();
        let manifest = self.manifest_for(&dict, &post, &docs);
        let mut json = serde_json::to_vec_pretty(&manifest)?;
        json.push(b'\n');
        for (name, bytes) in [(DICTIONARY, &dict), (POSTINGS, &post), (DOCS, &docs), (MANIFEST, &json)] {
            write_atomic(&dir.join(name), bytes)?;
        }
        Ok(manifest)
    }

    pub fn read_manifest(dir: &Path) -> Result<Manifest> {
        let path = dir.join(MANIFEST);
        let bytes = fs::read(&path).map_err(|e| Error::file(&path, e))?;
        let manifest: Manifest = serde_json::from_slice(&bytes)?;
        if manifest.format_version != FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "{}: unsupported index format {}",
                path.display(),
                manifest.format_version
            )));
        }
        Ok(manifest)
    }

    /// Loads an index, checking every data file against its manifest digest.
    pub fn load(dir: &Path) -> Result<Self> {
        let manifest = Self::read_manifest(dir)?;
        let mut files: HashMap<&str, Vec<u8>> = HashMap::new();
        for name in [DICTIONARY, POSTINGS, DOCS] {
            let path = dir.join(name);
            let bytes = fs::read(&path).map_err(|e| Error::file(&path, e))?;
            let expected = manifest
                .files
                .iter()
                .find(|f| f.name == name)
                .ok_or_else(|| Error::invalid(format!("manifest lists no {name}")))?;
            if sha256_hex(&bytes) != expected.sha256 {
                return Err(Error::invalid(format!(
                    "{} does not match its manifest digest",
                    path.display()
                )));
            }
            files.insert(name, bytes);
        }
        let corrupt = |what: &str| Error::invalid(format!("corrupt index in {}: {what}", dir.display()));

        let mut docnos = Vec::with_capacity(manifest.documents);
        let mut doc_lens = Vec::with_capacity(manifest.documents);
        let mut r = Reader::new(&files[DOCS]);
        while !r.done() {
            let n = r.varint().ok_or_else(|| corrupt("docs"))? as usize;
            let docno = r.utf8(n).ok_or_else(|| corrupt("docno"))?;
            docnos.push(docno);
            doc_lens.push(r.varint().ok_or_else(|| corrupt("doc length"))? as u32);
        }

        let mut terms: Vec<String> = Vec::with_capacity(manifest.vocabulary);
        let mut cfs = Vec::with_capacity(manifest.vocabulary);
        let mut postings = Vec::with_capacity(manifest.vocabulary);
        let mut d = Reader::new(&files[DICTIONARY]);
        let mut p = Reader::new(&files[POSTINGS]);
        let mut prev: Vec<u8> = Vec::new();
        while !d.done() {
            let shared = d.varint().ok_or_else(|| corrupt("dictionary"))? as usize;
            let rest = d.varint().ok_or_else(|| corrupt("dictionary"))? as usize;
            let suffix = d.bytes(rest).ok_or_else(|| corrupt("dictionary"))?;
            if shared > prev.len() {
                return Err(corrupt("front coding"));
            }
            let mut term = prev[..shared].to_vec();
            term.extend_from_slice(suffix);
            let df = d.varint().ok_or_else(|| corrupt("df"))? as usize;
            let cf = d.varint().ok_or_else(|| corrupt("cf"))?;
            let _len = d.varint().ok_or_else(|| corrupt("postings length"))?;
            let mut list = Vec::with_capacity(df);
            let mut doc = 0u64;
            for k in 0..df {
                let gap = p.varint().ok_or_else(|| corrupt("postings"))?;
                doc = if k == 0 { gap } else { doc + gap };
                let tf = p.varint().ok_or_else(|| corrupt("postings"))? as u32;
                if doc as usize >= docnos.len() {
                    return Err(corrupt("posting beyond last document"));
                }
                list.push(Posting { doc: doc as u32, tf });
            }
            let text = String::from_utf8(term.clone()).map_err(|_| corrupt("term is not UTF-8"))?;
            terms.push(text);
            prev = term;
            cfs.push(cf);
            postings.push(list);
        }
        if docnos.len() != manifest.documents || terms.len() != manifest.vocabulary {
            return Err(corrupt("counts differ from manifest"));
        }
        let total_tokens = doc_lens.iter().map(|&l| l as u64).sum();
        if total_tokens != manifest.total_tokens {
            return Err(corrupt("token total differs from manifest"));
        }
        Ok(InvertedIndex {
            field: manifest.field,
            config: manifest.config,
            corpus_sha256: manifest.corpus_sha256,
            docnos,
            doc_lens,
            terms,
            cfs,
            postings,
            total_tokens,
        })
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(|e| Error::file(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::file(path, e))
}

fn write_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }

    fn done(&self) -> bool {
        self.pos >= self.buf.len()
    }

    fn varint(&mut self) -> Option<u64> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = *self.buf.get(self.pos)?;
            self.pos += 1;
            v |= ((b & 0x7f) as u64) << shift;
            if b & 0x80 == 0 {
                return Some(v);
            }
        }
        None
    }

    fn bytes(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.buf.get(self.pos..self.pos.checked_add(n)?)?;
        self.pos += n;
        Some(s)
    }

    fn utf8(&mut self, n: usize) -> Option<String> {
        self.bytes(n).and_then(|b| String::from_utf8(b.to_vec()).ok())
    }
}

/// Index compression factor: the percentage by which `variant_terms` is
/// smaller than `baseline_terms`, rounded to two decimals.
pub fn icf(baseline_terms: usize, variant_terms: usize) -> Result<f64> {
    if baseline_terms == 0 {
        return Err(Error::invalid("baseline vocabulary must not be empty"));
    }
    let raw = 100.0 * (baseline_terms as f64 - variant_terms as f64) / baseline_terms as f64;
    Ok((raw * 100.0).round() / 100.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn docs() -> Vec<Document> {
        vec![
            Document::new("d1", "a b", "Uma boot iha Dili"),
            Document::new("d2", "b c", "Eskola foun iha Baucau, eskola"),
            Document::new("d3", "", "Ema-barak"),
        ]
    }

    #[test]
    fn hand_inventory() {
        let ix = InvertedIndex::build(&docs(), Field::Title, &NormConfig::baseline()).unwrap();
        assert_eq!(ix.df("b"), 2);
        assert_eq!(ix.postings("b").iter().map(|p| p.doc).collect::<Vec<_>>(), [0, 1]);
        assert_eq!(ix.doc_len(2), 0);
        let s = ix.stats();
        assert_eq!((s.documents, s.total_tokens, s.vocabulary), (3, 4, 3));
        assert!((s.avdl - 4.0 / 3.0).abs() < 1e-12);
        assert_eq!(ix.df("zzz"), 0);
    }

    #[test]
    fn conservation() {
        let ix = InvertedIndex::build(&docs(), Field::Content, &NormConfig::baseline()).unwrap();
        let tf_sum: u64 = ix.terms().map(|t| ix.postings(t).iter().map(|p| p.tf as u64).sum::<u64>()).sum();
        assert_eq!(tf_sum, ix.stats().total_tokens);
        assert_eq!(ix.cf("eskola"), 2);
        for t in ix.terms() {
            assert_eq!(ix.cf(t), ix.postings(t).iter().map(|p| p.tf as u64).sum::<u64>());
        }
    }

    #[test]
    fn duplicate_docno() {
        let mut d = docs();
        d.push(Document::new("d1", "x", "y"));
        assert!(matches!(
            InvertedIndex::build(&d, Field::Title, &NormConfig::baseline()),
            Err(Error::Validation { .. })
        ));
    }

    #[test]
    fn save_load_round_trip_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = NormConfig {
            split_hyphens: true,
            ..NormConfig::baseline()
        };
        let ix = InvertedIndex::build(&docs(), Field::Content, &cfg).unwrap();
        let a = dir.path().join("a");
        let b = dir.path().join("b");
        ix.save(&a).unwrap();
        InvertedIndex::build(&docs(), Field::Content, &cfg).unwrap().save(&b).unwrap();
        for f in [MANIFEST, DICTIONARY, POSTINGS, DOCS] {
            assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
        }
        let back = InvertedIndex::load(&a).unwrap();
        assert_eq!(back, ix);
        assert_eq!(back.fingerprint(), ix.fingerprint());
    }

    #[test]
    fn tampered_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let ix = InvertedIndex::build(&docs(), Field::Content, &NormConfig::baseline()).unwrap();
        ix.save(dir.path()).unwrap();
        let p = dir.path().join(POSTINGS);
        let mut bytes = fs::read(&p).unwrap();
        bytes[0] ^= 1;
        fs::write(&p, bytes).unwrap();
        assert!(InvertedIndex::load(dir.path()).is_err());
    }

    #[test]
    fn varint_round_trip() {
        for v in [0u64, 1, 127, 128, 300, u32::MAX as u64, u64::MAX] {
            let mut buf = Vec::new();
            write_varint(&mut buf, v);
            assert_eq!(Reader::new(&buf).varint(), Some(v));
        }
    }

    #[test]
    fn compression_factor() {
        assert_eq!(icf(25412, 17596).unwrap(), 30.76);
        assert_eq!(icf(25412, 25258).unwrap(), 0.61);
        assert_eq!(icf(7, 7).unwrap(), 0.0);
        assert!(icf(0, 0).is_err());
    }
}
