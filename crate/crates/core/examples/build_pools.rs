// Pools the top documents of BM25 and Dirichlet LM for each topic.

use std::error::Error;
use std::path::Path;

use tetun_ir::corpus::{read_documents_file, read_topics_file};
use tetun_ir::index::{Field, InvertedIndex};
use tetun_ir::pool::{balanced_interleave, build_pools, PoolConfig, Source};
use tetun_ir::textnorm::NormConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let p = balanced_interleave(1, &["d1", "d2", "d3"], &["d2", "d4"], 4);
    println!("interleaved: {}", p.docnos.join(" "));

    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let docs = read_documents_file(fixtures.join("docs.xml"))?;
    let topics = read_topics_file(fixtures.join("topics.xml"))?;
    let ix = InvertedIndex::build(&docs, Field::Content, &NormConfig::default())?;
    let config = PoolConfig {
        depth: 6,
        ..PoolConfig::default()
    };
    let set = build_pools(&topics, &ix, &config)?;
    for pool in &set.pools {
        let a = pool.provenance.iter().filter(|p| p.drawn_from == Source::A).count();
        println!(
            "topic {}: {} docs ({a} from {}, {} from {})",
            pool.topic_id,
            pool.len(),
            set.model_a,
            pool.len() - a,
            set.model_b
        );
    }
    let mut json = Vec::new();
    set.write_json(&mut json)?;
    println!("{} bytes of pool JSON", json.len());
    Ok(())
}

fn main() {
    run_example().unwrap();
}
