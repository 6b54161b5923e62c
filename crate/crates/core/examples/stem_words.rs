// Stems a few words with each variant and prints one trace.

use std::error::Error;

use tetun_ir::stemmer::{stem, StemVariant, Stemmer};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let words = ["komunikasaun", "akontesimentu", "hemudór", "hadame", "nakfera", "sala-na'in", "uma"];
    println!("{:<14} {:<12} {:<12} {:<12}", "word", "light", "moderate", "heavy");
    for w in words {
        println!(
            "{w:<14} {:<12} {:<12} {:<12}",
            stem(w, StemVariant::Light),
            stem(w, StemVariant::Moderate),
            stem(w, StemVariant::Heavy)
        );
    }

    let trace = Stemmer::new(StemVariant::Light).stem_traced("selebrasaun");
    println!("{}", serde_json::to_string_pretty(&trace)?);
    assert_eq!(trace.output, "selebr");

    // Accent-folded text needs the folded suffix table.
    let folded = Stemmer::new(StemVariant::Moderate).with_folded_accents(true);
    assert_eq!(folded.stem("hemudor"), "hemu");
    Ok(())
}

fn main() {
    run_example().unwrap();
}
