// Reads the fixture collection and writes one document back out in
// canonical form.

use std::error::Error;
use std::path::Path;

use tetun_ir::corpus::{read_documents_file, read_qrels_file, read_topics_file, write_documents};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let docs = read_documents_file(fixtures.join("docs.xml"))?;
    let topics = read_topics_file(fixtures.join("topics.xml"))?;
    let qrels = read_qrels_file(fixtures.join("qrels.txt"))?;
    println!("{} documents, {} topics, {} judgments", docs.len(), topics.len(), qrels.len());
    for t in &topics {
        let relevant = qrels.iter().filter(|q| q.topic_id == t.topic_id && q.grade.is_relevant()).count();
        println!("topic {}: {:?} ({relevant} relevant)", t.topic_id, t.title);
    }

    let mut out = Vec::new();
    write_documents(&mut out, &docs[..1])?;
    print!("{}", String::from_utf8(out)?);
    assert_eq!(docs.len(), 20);
    Ok(())
}

fn main() {
    run_example().unwrap();
}
