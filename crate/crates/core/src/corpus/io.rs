use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::MultiGzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;

use super::{parse_qrels, parse_run, parse_topics, Document, DocumentReader, Qrel, RunEntry, Topic};
use crate::error::{Error, Result};

fn is_gzip(path: &Path) -> bool {
    path.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("gz"))
}

/// Opens a text file for buffered reading, transparently decompressing `.gz`.
pub fn open_text(path: impl AsRef<Path>) -> Result<Box<dyn BufRead + Send>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::file(path, e))?;
    if is_gzip(path) {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Creates a text file for writing; `.gz` paths are gzip-compressed.
pub fn create_text(path: impl AsRef<Path>) -> Result<Box<dyn Write + Send>> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::file(path, e))?;
    if is_gzip(path) {
        Ok(Box::new(BufWriter::new(GzEncoder::new(file, Compression::default()))))
    } else {
        Ok(Box::new(BufWriter::new(file)))
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    let mut reader = open_text(path)?;
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| Error::file(path, e))?;
    String::from_utf8(bytes).map_err(|e| {
        let valid = &e.as_bytes()[..e.utf8_error().valid_up_to()];
        let line = valid.iter().filter(|&&b| b == b'\n').count() + 1;
        Error::parse(line, Some(path.display().to_string()), "invalid UTF-8")
    })
}

pub fn read_documents_file(path: impl AsRef<Path>) -> Result<Vec<Document>> {
    DocumentReader::new(open_text(path)?).collect()
}

pub fn read_topics_file(path: impl AsRef<Path>) -> Result<Vec<Topic>> {
    parse_topics(&read_to_string(path.as_ref())?)
}

pub fn read_qrels_file(path: impl AsRef<Path>) -> Result<Vec<Qrel>> {
    parse_qrels(&read_to_string(path.as_ref())?)
}

pub fn read_run_file(path: impl AsRef<Path>) -> Result<Vec<RunEntry>> {
    parse_run(&read_to_string(path.as_ref())?)
}
