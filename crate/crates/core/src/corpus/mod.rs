//! TREC-style collection artifacts: documents, topics, qrels and runs.
//!
//! All readers accept plain or gzip-compressed input; compression is chosen
//! by the `.gz` extension in [`open_text`] / [`create_text`].

mod documents;
mod io;
mod markup;
mod qrels;
mod run;
mod topics;

pub use documents::{
    parse_documents, write_documents, Document, DocumentReader, DEFAULT_MAX_RECORD_BYTES,
};
pub use io::{create_text, open_text, read_documents_file, read_qrels_file, read_run_file, read_topics_file};
pub use qrels::{parse_qrels, write_qrels, Grade, Qrel};
pub use run::{parse_run, write_run, RunEntry};
pub use topics::{parse_topics, write_topics, Topic};
