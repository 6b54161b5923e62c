// Paice understemming/overstemming indices for the three variants, with
// ERRT against a truncation line.

use std::error::Error;
use std::path::Path;

use tetun_ir::stemeval::{evaluate, split_groups, ConceptGroups, DEFAULT_TRUNCATION_LENGTHS};
use tetun_ir::stemmer::{StemVariant, Stemmer};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/concept_groups.txt");
    let groups = ConceptGroups::parse(&std::fs::read_to_string(path)?)?;
    let stemmers: Vec<(String, Stemmer)> = StemVariant::ALL
        .iter()
        .map(|v| (v.to_string(), Stemmer::new(*v)))
        .collect();
    let fns: Vec<(String, _)> = stemmers
        .iter()
        .map(|(label, s)| (label.clone(), move |w: &str| s.stem(w)))
        .collect();
    let report = evaluate(&groups, &fns, &DEFAULT_TRUNCATION_LENGTHS)?;
    print!("{}", report.to_text());

    println!("\ngroups the light stemmer leaves split:");
    let light = Stemmer::new(StemVariant::Light);
    for (root, pairs) in split_groups(&groups, |w| light.stem(w)) {
        let shown: Vec<String> = pairs.iter().map(|(w, s)| format!("{w}→{s}")).collect();
        println!("  {root}: {}", shown.join(", "));
    }
    Ok(())
}

fn main() {
    run_example().unwrap();
}
