// Runs one query against the fixture titles with each ranking model.

use std::error::Error;
use std::path::Path;

use tetun_ir::corpus::read_documents_file;
use tetun_ir::index::{Field, InvertedIndex};
use tetun_ir::rank::{Model, RankParams, Searcher};
use tetun_ir::textnorm::NormConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let docs = read_documents_file(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/docs.xml"))?;
    let ix = InvertedIndex::build(&docs, Field::Content, &NormConfig::from_label("apostrophes+hyphens")?)?;
    let searcher = Searcher::new(&ix)?;
    let query = searcher.prepare("udan boot no inundasaun");
    for model in Model::ALL {
        let params = RankParams { mu: 50.0, ..RankParams::new(model) };
        let ranked = searcher.search_prepared(&query, &params, 3)?;
        let top: Vec<String> = ranked.hits.iter().map(|h| format!("{} {:.3}", h.docno, h.score)).collect();
        println!("{:<13} {}", model.to_string(), top.join(" | "));
    }

    // Runs come out as TREC lines.
    let run = searcher.search("folin kafé", &RankParams::default(), 2)?.to_run(3, "bm25");
    let mut buf = Vec::new();
    tetun_ir::corpus::write_run(&mut buf, &run)?;
    print!("{}", String::from_utf8(buf)?);
    Ok(())
}

fn main() {
    run_example().unwrap();
}
