//! Ad-hoc text retrieval toolkit for Tetun.
//!
//! The crate covers the whole pipeline needed to build and evaluate a
//! retrieval baseline for a low-resource language:
//!
//! * [`corpus`]: TREC-style documents, topics, qrels and runs.
//! * [`textnorm`]: staged normalization (apostrophes, accents, hyphens,
//!   stopwords, stemming).
//! * [`stopwords`]: frequency and co-occurrence-graph stopword detection,
//!   precision at n, and the stopword variant corrector.
//! * [`stemmer`]: the light / moderate / heavy suffix-stripping stemmer.
//! * [`stemeval`]: Paice understemming / overstemming indices and ERRT.
//! * [`index`]: inverted index with a deterministic on-disk layout.
//! * [`rank`]: TF-IDF, BM25, DFR BM25, Dirichlet LM and Hiemstra LM.
//! * [`ireval`]: P@k, MAP@k and NDCG@k over graded qrels.
//! * [`pool`]: balanced interleaving of two ranked lists into judgment pools.
//! * [`judge`]: the relevance-assessment service and vote aggregation.
//! * [`cli`]: subcommands and the preprocessing ablation grid.

pub mod cli;
pub mod corpus;
pub mod error;
pub mod index;
pub mod ireval;
pub mod judge;
pub mod pool;
pub mod rank;
pub mod stemeval;
pub mod stemmer;
pub mod stopwords;
pub mod textnorm;

pub use error::{Error, Result};
