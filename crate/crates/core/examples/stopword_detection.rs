// Ranks stopword candidates from the fixture corpus by each scoring
// method and checks them against the bundled list.

use std::error::Error;
use std::path::Path;

use tetun_ir::corpus::read_documents_file;
use tetun_ir::stopwords::{precision_at, Method, StopwordAnalysis, StopwordList};
use tetun_ir::textnorm::{NormConfig, Normalizer};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let docs = read_documents_file(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/docs.xml"))?;
    let norm = Normalizer::new(NormConfig::default())?;
    let corpus: Vec<Vec<String>> = docs.iter().map(|d| norm.normalize(&d.content)).collect();
    let analysis = StopwordAnalysis::build(&corpus)?;
    println!(
        "{} terms, co-occurrence graph with {} edges",
        analysis.scores.len(),
        analysis.graph.edge_count()
    );

    let truth = StopwordList::bundled();
    for method in Method::ALL {
        let top = analysis.rank_candidates(method, 10)?;
        let p = precision_at(&top, truth, &[10])?[&10];
        println!("{:<11} P@10 {p:.2}  {}", method.to_string(), top.join(" "));
    }
    Ok(())
}

fn main() {
    run_example().unwrap();
}
