// Retrieves the fixture topics with BM25 and scores the run.

use std::error::Error;
use std::path::Path;

use tetun_ir::corpus::{read_documents_file, read_qrels_file, read_topics_file};
use tetun_ir::index::{Field, InvertedIndex};
use tetun_ir::ireval::{evaluate_run, EvalOptions, Gain};
use tetun_ir::rank::{RankParams, Searcher};
use tetun_ir::textnorm::NormConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let docs = read_documents_file(fixtures.join("docs.xml"))?;
    let topics = read_topics_file(fixtures.join("topics.xml"))?;
    let qrels = read_qrels_file(fixtures.join("qrels.txt"))?;

    let ix = InvertedIndex::build(&docs, Field::Title, &NormConfig::default())?;
    let searcher = Searcher::new(&ix)?;
    let mut run = Vec::new();
    for t in &topics {
        run.extend(searcher.search(&t.title, &RankParams::default(), 100)?.to_run(t.topic_id, "bm25-title"));
    }
    let report = evaluate_run(&run, &qrels, &EvalOptions::default())?;
    print!("{}", report.to_text());

    let exp = EvalOptions {
        gain: Gain::Exponential,
        ..EvalOptions::default()
    };
    let report = evaluate_run(&run, &qrels, &exp)?;
    print!("{}", report.to_markdown());
    Ok(())
}

fn main() {
    run_example().unwrap();
}
