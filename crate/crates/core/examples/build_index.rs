// Builds title and content indexes, saves and reloads one, and compares
// vocabulary sizes with the index compression factor.

use std::error::Error;
use std::path::Path;

use tetun_ir::corpus::read_documents_file;
use tetun_ir::index::{icf, Field, InvertedIndex};
use tetun_ir::textnorm::NormConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let docs = read_documents_file(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/docs.xml"))?;
    let baseline = InvertedIndex::build(&docs, Field::Content, &NormConfig::default())?;
    println!("{:<28} {:>6} terms", "baseline", baseline.vocabulary_size());
    for label in ["apostrophes+hyphens", "stopwords", "stem=light", "stem=heavy"] {
        let ix = InvertedIndex::build(&docs, Field::Content, &NormConfig::from_label(label)?)?;
        let f = icf(baseline.vocabulary_size(), ix.vocabulary_size())?;
        println!("{label:<28} {:>6} terms  ICF {f:.2}%", ix.vocabulary_size());
    }
    println!("postings for \"eskola\": {:?}", baseline.postings("eskola"));

    let dir = tempfile::tempdir()?;
    let manifest = baseline.save(dir.path())?;
    let loaded = InvertedIndex::load(dir.path())?;
    assert_eq!(loaded, baseline);
    println!("saved {} files, fingerprint {}", manifest.files.len(), &loaded.fingerprint()[..16]);
    Ok(())
}

fn main() {
    run_example().unwrap();
}
