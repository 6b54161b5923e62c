// Tokenizes one sentence under several normalization settings.

use std::error::Error;

use tetun_ir::stemmer::StemVariant;
use tetun_ir::textnorm::{NormConfig, Normalizer};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let text = "Sala-na'in sira iha Díli la hatene ne'ebé mak komunikasaun di'ak.";
    let configs = [
        NormConfig::default(),
        NormConfig::from_label("apostrophes")?,
        NormConfig::from_label("hyphens")?,
        NormConfig::from_label("accents")?,
        NormConfig::from_label("stopwords")?,
        NormConfig {
            stemmer: Some(StemVariant::Moderate),
            ..NormConfig::from_label("apostrophes+hyphens")?
        },
    ];
    for config in configs {
        let tokens = Normalizer::new(config.clone())?.normalize(text);
        println!("{:<32} {}", config.label(), tokens.join(" "));
    }

    // The key=value form is what `tetun-ir index --norm-config` reads.
    let cfg = NormConfig::from_label("apostrophes+stem=light")?;
    print!("{}", cfg.to_kv());
    assert_eq!(NormConfig::from_kv(&cfg.to_kv())?, cfg);
    Ok(())
}

fn main() {
    run_example().unwrap();
}
