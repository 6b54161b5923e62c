//! Suffix-stripping stemmer for Tetun in three strengths.
//!
//! * `light` removes Portuguese-derived suffixes using a single chain of
//!   suffix classes gated by the R1, R2 and RV regions. The first class
//!   whose suffix ends the word decides the outcome: if the region test
//!   fails the word is returned unchanged and later classes are not tried.
//! * `moderate` adds one more arm at the end of that chain for the native
//!   suffixes `n`, `-nain`, `-teen` and `dór`, kept only when at least three
//!   characters remain.
//! * `heavy` additionally strips one native prefix (`ha`, `nak`, `nam`) when
//!   at least two characters remain. A word carrying a native prefix is
//!   treated as a native word, so the prefix arm is tried before the suffix
//!   chain (`hadame` → `dame`, not `hadam`).
//!
//! Words shorter than four characters are never changed. Exactly one
//! removal pathway fires per word.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, LazyLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::textnorm::fold_accents;

const BUNDLED_TABLE: &str = include_str!("../data/suffixes.txt");

const MIN_STEM_LEN: usize = 4;
const NATIVE_SUFFIX_MIN_REMAINDER: usize = 3;
const NATIVE_PREFIX_MIN_REMAINDER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StemVariant {
    Light,
    Moderate,
    Heavy,
}

impl StemVariant {
    pub const ALL: [StemVariant; 3] = [StemVariant::Light, StemVariant::Moderate, StemVariant::Heavy];
}

impl fmt::Display for StemVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StemVariant::Light => "light",
            StemVariant::Moderate => "moderate",
            StemVariant::Heavy => "heavy",
        })
    }
}

impl FromStr for StemVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "light" => Ok(StemVariant::Light),
            "moderate" => Ok(StemVariant::Moderate),
            "heavy" => Ok(StemVariant::Heavy),
            other => Err(Error::invalid(format!(
                "unknown stemmer variant {other:?} (expected light, moderate or heavy)"
            ))),
        }
    }
}

pub fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'á' | 'é' | 'í' | 'ó' | 'ú')
}

/// Character offsets where R1, R2 and RV begin. An offset equal to the word
/// length is the empty region at the end of the word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StemRegions {
    pub r1_start: usize,
    pub r2_start: usize,
    pub rv_start: usize,
}

/// Position just after the first non-vowel that follows a vowel, searching
/// from `from`; `chars.len()` if there is none.
fn region_after(chars: &[char], from: usize) -> usize {
    (from + 1..chars.len())
        .find(|&i| is_vowel(chars[i - 1]) && !is_vowel(chars[i]))
        .map_or(chars.len(), |i| i + 1)
}

fn rv_start(chars: &[char]) -> usize {
    let len = chars.len();
    if len < 2 {
        return len;
    }
    if !is_vowel(chars[1]) {
        (2..len).find(|&i| is_vowel(chars[i])).map_or(len, |i| i + 1)
    } else if is_vowel(chars[0]) {
        (2..len).find(|&i| !is_vowel(chars[i])).map_or(len, |i| i + 1)
    } else {
        3.min(len)
    }
}

fn regions_of(chars: &[char]) -> StemRegions {
    let r1_start = region_after(chars, 0);
    StemRegions {
        r1_start,
        r2_start: region_after(chars, r1_start),
        rv_start: rv_start(chars),
    }
}

pub fn compute_regions(word: &str) -> Result<StemRegions> {
    let chars: Vec<char> = word.chars().collect();
    if chars.is_empty() {
        return Err(Error::invalid("cannot compute regions of an empty word"));
    }
    Ok(regions_of(&chars))
}

/// An affix class: entries kept longest-first so matching picks the
/// longest suffix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AffixClass {
    entries: Vec<Vec<char>>,
}

impl AffixClass {
    fn new(items: &[String]) -> Self {
        let mut entries: Vec<Vec<char>> = Vec::new();
        for item in items {
            let chars: Vec<char> = item.chars().collect();
            if !entries.contains(&chars) {
                entries.push(chars);
            }
        }
        // Stable: equal lengths keep file order.
        entries.sort_by_key(|e| std::cmp::Reverse(e.len()));
        AffixClass { entries }
    }

    pub fn entries(&self) -> impl Iterator<Item = String> + '_ {
        self.entries.iter().map(|e| e.iter().collect())
    }

    fn longest_suffix(&self, word: &[char]) -> Option<usize> {
        self.entries
            .iter()
            .find(|s| word.ends_with(s))
            .map(|s| word.len() - s.len())
    }

    fn longest_prefix(&self, word: &[char]) -> Option<usize> {
        self.entries
            .iter()
            .find(|p| word.starts_with(p))
            .map(|p| p.len())
    }

    fn folded(&self) -> AffixClass {
        let items: Vec<String> = self.entries().map(|e| fold_accents(&e)).collect();
        AffixClass::new(&items)
    }
}

/// The suffix and affix classes, loaded from a sectioned text file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixTable {
    pub general_suf: AffixClass,
    pub lojia_suf: AffixClass,
    pub usaun_suf: AffixClass,
    pub ensia_suf: AffixClass,
    pub amente_suf: AffixClass,
    pub iv_suf: AffixClass,
    pub at_suf: AffixClass,
    pub ozikad_suf: AffixClass,
    pub mente_suf: AffixClass,
    pub ante_suf: AffixClass,
    pub idade_suf: AffixClass,
    pub abil_suf: AffixClass,
    pub iva_suf: AffixClass,
    pub verb_suf: AffixClass,
    pub residual_suf: AffixClass,
    pub native_prefixes: AffixClass,
    /// Native suffixes plus their accepted spellings (`nain`, `na'in`, …).
    pub native_suffixes: AffixClass,
}

const SECTIONS: [&str; 18] = [
    "general_suf",
    "lojia_suf",
    "usaun_suf",
    "ensia_suf",
    "amente_suf",
    "iv_suf",
    "at_suf",
    "ozikad_suf",
    "mente_suf",
    "ante_suf",
    "idade_suf",
    "abil_suf",
    "iva_suf",
    "verb_suf",
    "residual_suf",
    "native_prefixes",
    "native_suffixes",
    "native_suffix_aliases",
];

static BUNDLED: LazyLock<Arc<SuffixTable>> =
    LazyLock::new(|| Arc::new(SuffixTable::parse(BUNDLED_TABLE).expect("bundled suffix table")));
static BUNDLED_FOLDED: LazyLock<Arc<SuffixTable>> = LazyLock::new(|| Arc::new(BUNDLED.folded()));

impl SuffixTable {
    pub fn bundled() -> Arc<SuffixTable> {
        Arc::clone(&BUNDLED)
    }

    /// Raw per-section entries of a table file, in file order.
    pub fn parse_sections(text: &str) -> Result<Vec<(String, Vec<String>)>> {
        let mut sections: Vec<(String, Vec<String>)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.contains(&name) {
                    return Err(Error::parse(idx + 1, None, format!("unknown section [{name}]")));
                }
                if sections.iter().any(|(n, _)| n == name) {
                    return Err(Error::parse(idx + 1, None, format!("repeated section [{name}]")));
                }
                sections.push((name.to_string(), Vec::new()));
                continue;
            }
            match sections.last_mut() {
                Some((_, items)) => items.push(line.to_string()),
                None => return Err(Error::parse(idx + 1, None, "entry before first section")),
            }
        }
        Ok(sections)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let sections = Self::parse_sections(text)?;
        let get = |name: &str| -> Result<Vec<String>> {
            sections
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, items)| items.clone())
                .ok_or_else(|| Error::invalid(format!("suffix table lacks [{name}]")))
        };
        let class = |name: &str| get(name).map(|items| AffixClass::new(&items));
        let mut native = get("native_suffixes")?;
        native.extend(get("native_suffix_aliases").unwrap_or_default());
        Ok(SuffixTable {
            general_suf: class("general_suf")?,
            lojia_suf: class("lojia_suf")?,
            usaun_suf: class("usaun_suf")?,
            ensia_suf: class("ensia_suf")?,
            amente_suf: class("amente_suf")?,
            iv_suf: class("iv_suf")?,
            at_suf: class("at_suf")?,
            ozikad_suf: class("ozikad_suf")?,
            mente_suf: class("mente_suf")?,
            ante_suf: class("ante_suf")?,
            idade_suf: class("idade_suf")?,
            abil_suf: class("abil_suf")?,
            iva_suf: class("iva_suf")?,
            verb_suf: class("verb_suf")?,
            residual_suf: class("residual_suf")?,
            native_prefixes: class("native_prefixes")?,
            native_suffixes: AffixClass::new(&native),
        })
    }

    /// The same table with every entry accent-folded, for use after the
    /// accent-folding normalization stage (`dór` is then matched as `dor`).
    pub fn folded(&self) -> SuffixTable {
        SuffixTable {
            general_suf: self.general_suf.folded(),
            lojia_suf: self.lojia_suf.folded(),
            usaun_suf: self.usaun_suf.folded(),
            ensia_suf: self.ensia_suf.folded(),
            amente_suf: self.amente_suf.folded(),
            iv_suf: self.iv_suf.folded(),
            at_suf: self.at_suf.folded(),
            ozikad_suf: self.ozikad_suf.folded(),
            mente_suf: self.mente_suf.folded(),
            ante_suf: self.ante_suf.folded(),
            idade_suf: self.idade_suf.folded(),
            abil_suf: self.abil_suf.folded(),
            iva_suf: self.iva_suf.folded(),
            verb_suf: self.verb_suf.folded(),
            residual_suf: self.residual_suf.folded(),
            native_prefixes: self.native_prefixes.folded(),
            native_suffixes: self.native_suffixes.folded(),
        }
    }
}

/// Region a removal was checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    R1,
    R2,
    Rv,
    /// Native affixes carry a remainder-length guard instead of a region.
    Guard,
}

/// One deletion or replacement performed while stemming.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Removal {
    pub class: &'static str,
    /// Character offset of the removed affix in the input word; for a prefix
    /// this is 0 and `len` gives its length.
    pub start: usize,
    pub len: usize,
    pub region: Region,
    pub replacement: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StemTrace {
    pub input: String,
    pub output: String,
    pub regions: Option<StemRegions>,
    /// Class whose arm was taken, even if nothing was removed.
    pub arm: Option<&'static str>,
    pub removals: Vec<Removal>,
}

enum Arm {
    Taken {
        class: &'static str,
        stem: Vec<char>,
        removals: Vec<Removal>,
    },
    NoMatch,
}

#[derive(Debug, Clone)]
pub struct Stemmer {
    variant: StemVariant,
    table: Arc<SuffixTable>,
}

impl Stemmer {
    pub fn new(variant: StemVariant) -> Self {
        Stemmer {
            variant,
            table: SuffixTable::bundled(),
        }
    }

    pub fn with_table(variant: StemVariant, table: Arc<SuffixTable>) -> Self {
        Stemmer { variant, table }
    }

    /// Switches to the accent-folded bundled table. Only meaningful with the
    /// bundled table; custom tables should be folded by the caller.
    pub fn with_folded_accents(mut self, folded: bool) -> Self {
        if folded && Arc::ptr_eq(&self.table, &BUNDLED) {
            self.table = Arc::clone(&BUNDLED_FOLDED);
        }
        self
    }

    pub fn variant(&self) -> StemVariant {
        self.variant
    }

    pub fn stem(&self, word: &str) -> String {
        self.stem_traced(word).output
    }

    pub fn stem_traced(&self, word: &str) -> StemTrace {
        let chars: Vec<char> = word.chars().collect();
        let mut trace = StemTrace {
            input: word.to_string(),
            output: word.to_string(),
            regions: None,
            arm: None,
            removals: Vec::new(),
        };
        if chars.len() < MIN_STEM_LEN {
            return trace;
        }
        let regions = regions_of(&chars);
        trace.regions = Some(regions);

        let t = &*self.table;
        if self.variant == StemVariant::Heavy {
            if let Some(plen) = t.native_prefixes.longest_prefix(&chars) {
                if chars.len() - plen >= NATIVE_PREFIX_MIN_REMAINDER {
                    trace.arm = Some("native_prefixes");
                    trace.output = chars[plen..].iter().collect();
                    trace.removals.push(Removal {
                        class: "native_prefixes",
                        start: 0,
                        len: plen,
                        region: Region::Guard,
                        replacement: None,
                    });
                    return trace;
                }
            }
        }

        let arm = match portuguese_chain(t, &chars, regions) {
            Arm::NoMatch if self.variant != StemVariant::Light => native_suffix_arm(t, &chars),
            other => other,
        };
        if let Arm::Taken {
            class,
            stem,
            removals,
        } = arm
        {
            trace.arm = Some(class);
            trace.output = stem.into_iter().collect();
            trace.removals = removals;
        }
        trace
    }
}

fn native_suffix_arm(t: &SuffixTable, w: &[char]) -> Arm {
    let Some(start) = t.native_suffixes.longest_suffix(w) else {
        return Arm::NoMatch;
    };
    if start < NATIVE_SUFFIX_MIN_REMAINDER {
        return Arm::Taken {
            class: "native_suffixes",
            stem: w.to_vec(),
            removals: vec![],
        };
    }
    Arm::Taken {
        class: "native_suffixes",
        stem: w[..start].to_vec(),
        removals: vec![Removal {
            class: "native_suffixes",
            start,
            len: w.len() - start,
            region: Region::Guard,
            replacement: None,
        }],
    }
}

fn region_start(regions: StemRegions, region: Region) -> usize {
    match region {
        Region::R1 => regions.r1_start,
        Region::R2 => regions.r2_start,
        Region::Rv => regions.rv_start,
        Region::Guard => 0,
    }
}

/// Shared shape of the simple arms: match, region test, delete or replace.
fn simple_arm(
    class: &'static str,
    suffixes: &AffixClass,
    region: Region,
    replacement: Option<&'static str>,
    w: &[char],
    regions: StemRegions,
) -> Option<Arm> {
    let start = suffixes.longest_suffix(w)?;
    if start < region_start(regions, region) {
        return Some(Arm::Taken {
            class,
            stem: w.to_vec(),
            removals: vec![],
        });
    }
    let mut stem = w[..start].to_vec();
    if let Some(r) = replacement {
        stem.extend(r.chars());
    }
    Some(Arm::Taken {
        class,
        stem,
        removals: vec![Removal {
            class,
            start,
            len: w.len() - start,
            region,
            replacement,
        }],
    })
}

/// Optional follow-up deletion inside an already shortened stem.
fn follow_up(
    class: &'static str,
    suffixes: &AffixClass,
    stem: &mut Vec<char>,
    removals: &mut Vec<Removal>,
    regions: StemRegions,
) -> bool {
    match suffixes.longest_suffix(stem) {
        Some(start) if start >= regions.r2_start => {
            removals.push(Removal {
                class,
                start,
                len: stem.len() - start,
                region: Region::R2,
                replacement: None,
            });
            stem.truncate(start);
            true
        }
        _ => false,
    }
}

/// A deletion arm with nested follow-up removals.
fn compound_arm(
    class: &'static str,
    suffixes: &AffixClass,
    region: Region,
    w: &[char],
    regions: StemRegions,
    then: impl FnOnce(&mut Vec<char>, &mut Vec<Removal>),
) -> Option<Arm> {
    let arm = simple_arm(class, suffixes, region, None, w, regions)?;
    Some(match arm {
        Arm::Taken {
            class,
            mut stem,
            mut removals,
        } => {
            if !removals.is_empty() {
                then(&mut stem, &mut removals);
            }
            Arm::Taken {
                class,
                stem,
                removals,
            }
        }
        Arm::NoMatch => Arm::NoMatch,
    })
}

fn portuguese_chain(t: &SuffixTable, w: &[char], g: StemRegions) -> Arm {
    let arm = simple_arm("general_suf", &t.general_suf, Region::R2, None, w, g)
        .or_else(|| simple_arm("lojia_suf", &t.lojia_suf, Region::R2, Some("loj"), w, g))
        .or_else(|| simple_arm("usaun_suf", &t.usaun_suf, Region::R2, Some("u"), w, g))
        .or_else(|| simple_arm("ensia_suf", &t.ensia_suf, Region::R2, Some("ente"), w, g))
        .or_else(|| {
            compound_arm("amente_suf", &t.amente_suf, Region::R1, w, g, |stem, rm| {
                if follow_up("iv_suf", &t.iv_suf, stem, rm, g) {
                    follow_up("at_suf", &t.at_suf, stem, rm, g);
                } else {
                    follow_up("ozikad_suf", &t.ozikad_suf, stem, rm, g);
                }
            })
        })
        .or_else(|| {
            compound_arm("mente_suf", &t.mente_suf, Region::R2, w, g, |stem, rm| {
                follow_up("ante_suf", &t.ante_suf, stem, rm, g);
            })
        })
        .or_else(|| {
            compound_arm("idade_suf", &t.idade_suf, Region::R2, w, g, |stem, rm| {
                follow_up("abil_suf", &t.abil_suf, stem, rm, g);
            })
        })
        .or_else(|| {
            compound_arm("iva_suf", &t.iva_suf, Region::R2, w, g, |stem, rm| {
                follow_up("at_suf", &t.at_suf, stem, rm, g);
            })
        })
        .or_else(|| simple_arm("verb_suf", &t.verb_suf, Region::Rv, None, w, g))
        .or_else(|| simple_arm("residual_suf", &t.residual_suf, Region::Rv, None, w, g));
    arm.unwrap_or(Arm::NoMatch)
}

/// Stems with the bundled table.
pub fn stem(word: &str, variant: StemVariant) -> String {
    Stemmer::new(variant).stem(word)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regions(w: &str) -> (usize, usize, usize) {
        let r = compute_regions(w).unwrap();
        (r.r1_start, r.r2_start, r.rv_start)
    }

    #[test]
    fn region_examples() {
        let (r1, r2, _) = regions("selebrasaun");
        assert_eq!((r1, r2), (3, 5));
        assert_eq!(regions("aa"), (2, 2, 2));
        let (r1, r2, _) = regions("komunikasaun");
        assert_eq!((r1, r2), (3, 5));
        // Second letter consonant: RV after the next vowel.
        assert_eq!(regions("akontese").2, 3);
        // Consonant-vowel start: RV after the third letter.
        assert_eq!(regions("hadame").2, 3);
        // Two vowels: RV after the next consonant.
        assert_eq!(regions("aileu").2, 3);
        assert!(compute_regions("").is_err());
    }

    #[test]
    fn accented_vowels_are_vowels() {
        assert_eq!(regions("ónra").0, 2);
    }

    #[test]
    fn bundled_table_matches_source_lists() {
        let sections = SuffixTable::parse_sections(BUNDLED_TABLE).unwrap();
        let get = |n: &str| sections.iter().find(|(s, _)| s == n).unwrap().1.join(", ");
        assert_eq!(
            get("general_suf"),
            "eza, ezas, iku, ika, ikus, ikas, izmu, izmus, ável, ível, ista, istas, ozu, oza, ozus, ozas, amentu, amentus, imentu, imentus, adora, adór, asaun, adoras, adores, asoens, ante, antes, ánsia, atória, atóriu, atórias, atórius, amentál"
        );
        assert_eq!(get("lojia_suf"), "lojia, lojias");
        assert_eq!(get("usaun_suf"), "usaun, usoens");
        assert_eq!(get("ensia_suf"), "énsia, énsias");
        assert_eq!(get("amente_suf"), "amente");
        assert_eq!(get("iv_suf"), "iv");
        assert_eq!(get("at_suf"), "at");
        assert_eq!(get("ozikad_suf"), "oz, ik, ad");
        assert_eq!(get("mente_suf"), "mente");
        assert_eq!(get("ante_suf"), "ante, avel, ivel");
        assert_eq!(get("idade_suf"), "idade, idades");
        assert_eq!(get("abil_suf"), "abil, is, iv");
        assert_eq!(get("iva_suf"), "iva, ivu, ivas, ivus");
        assert_eq!(
            get("verb_suf"),
            "ada, adu, adas, adus, ida, idu, idas, idus, ária, áriu, árias, árius"
        );
        assert_eq!(get("residual_suf"), "a, e, i, u, us, as");
        assert_eq!(get("native_prefixes"), "ha, nak, nam");
        assert_eq!(get("native_suffixes"), "n, -nain, -teen, dór");
    }

    #[test]
    fn short_words_are_fixed_points() {
        for v in StemVariant::ALL {
            for w in ["ba", "iha", "n", "han", "dór"] {
                assert_eq!(stem(w, v), w);
            }
        }
    }

    #[test]
    fn light_examples() {
        assert_eq!(stem("komunikasaun", StemVariant::Light), "komunik");
        assert_eq!(stem("selebrasaun", StemVariant::Light), "selebr");
        assert_eq!(stem("akontesimentu", StemVariant::Light), "akontes");
    }

    #[test]
    fn native_variants() {
        assert_eq!(stem("hemudór", StemVariant::Light), "hemudór");
        assert_eq!(stem("hemudór", StemVariant::Moderate), "hemu");
        assert_eq!(stem("hadame", StemVariant::Heavy), "dame");
        assert_eq!(stem("nakfera", StemVariant::Heavy), "fera");
        assert_eq!(stem("namkari", StemVariant::Heavy), "kari");
        assert_eq!(stem("susun", StemVariant::Moderate), "susu");
        assert_eq!(stem("sala-na'in", StemVariant::Moderate), "sala");
        assert_eq!(stem("nakar-teen", StemVariant::Moderate), "nakar");
    }

    #[test]
    fn native_guards() {
        // "nain": removing any native suffix would leave fewer than 3 chars.
        assert_eq!(stem("nain", StemVariant::Moderate), "nain");
        // Prefix guard: "hatu" -> "tu" keeps 2 characters, allowed.
        assert_eq!(stem("hatu", StemVariant::Heavy), "tu");
        // "nama" matches "nam" but would leave one character; falls through
        // to the suffix chain (residual "a" in RV).
        assert_eq!(stem("nama", StemVariant::Heavy), "nam");
    }

    #[test]
    fn failed_region_test_stops_the_chain() {
        // "adór" matches the general class but starts before R2.
        let t = Stemmer::new(StemVariant::Moderate).stem_traced("tokadór");
        assert_eq!(t.arm, Some("general_suf"));
        assert_eq!(t.output, "tokadór");
    }

    #[test]
    fn folded_table_accepts_dor() {
        let s = Stemmer::new(StemVariant::Moderate).with_folded_accents(true);
        assert_eq!(s.stem("hemudor"), "hemu");
        assert_eq!(s.stem("kompetensia"), "kompetente");
    }

    #[test]
    fn variant_parsing() {
        assert_eq!("Heavy".parse::<StemVariant>().unwrap(), StemVariant::Heavy);
        assert!("none".parse::<StemVariant>().is_err());
    }
}
