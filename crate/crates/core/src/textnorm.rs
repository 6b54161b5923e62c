//! Staged text preprocessing.
//!
//! [`Normalizer::normalize`] applies the stages in this fixed order:
//!
//! 1. apostrophe unification (`‘ ’ ʼ ` ´` become `'`),
//! 2. lowercasing,
//! 3. tokenization into maximal runs of letters and digits; a `'` or `-`
//!    is kept only when it sits between two letters,
//! 4. per-token toggles: hyphen splitting, apostrophe stripping, accent
//!    folding,
//! 5. the length filter (`max_token_len`, in characters),
//! 6. stopword-variant correction and stopword removal,
//! 7. stemming.
//!
//! The same pipeline is used for documents and queries.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stemmer::{StemVariant, Stemmer};
use crate::stopwords::StopwordList;

pub const DEFAULT_MAX_TOKEN_LEN: usize = 60;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormConfig {
    /// Always on; kept so the serialized config is self-describing.
    pub lowercase: bool,
    pub strip_apostrophes: bool,
    pub fold_accents: bool,
    pub split_hyphens: bool,
    pub remove_stopwords: bool,
    pub stemmer: Option<StemVariant>,
    pub max_token_len: usize,
}

impl Default for NormConfig {
    fn default() -> Self {
        NormConfig {
            lowercase: true,
            strip_apostrophes: false,
            fold_accents: false,
            split_hyphens: false,
            remove_stopwords: false,
            stemmer: None,
            max_token_len: DEFAULT_MAX_TOKEN_LEN,
        }
    }
}

impl NormConfig {
    /// Standard preprocessing only.
    pub fn baseline() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lowercase {
            return Err(Error::invalid("lowercase cannot be disabled"));
        }
        if self.max_token_len < 1 {
            return Err(Error::invalid("max_token_len must be >= 1"));
        }
        Ok(())
    }

    /// Short human-readable name, e.g. `baseline` or `apostrophes+hyphens+stem=light`.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.strip_apostrophes {
            parts.push("apostrophes".to_string());
        }
        if self.fold_accents {
            parts.push("accents".to_string());
        }
        if self.split_hyphens {
            parts.push("hyphens".to_string());
        }
        if self.remove_stopwords {
            parts.push("stopwords".to_string());
        }
        if let Some(v) = self.stemmer {
            parts.push(format!("stem={v}"));
        }
        if self.max_token_len != DEFAULT_MAX_TOKEN_LEN {
            parts.push(format!("maxlen={}", self.max_token_len));
        }
        if parts.is_empty() {
            "baseline".to_string()
        } else {
            parts.join("+")
        }
    }

    /// Inverse of [`NormConfig::label`].
    pub fn from_label(label: &str) -> Result<Self> {
        let mut cfg = NormConfig::default();
        if label.trim() == "baseline" {
            return Ok(cfg);
        }
        for part in label.split('+').map(str::trim) {
            match part {
                "apostrophes" => cfg.strip_apostrophes = true,
                "accents" => cfg.fold_accents = true,
                "hyphens" => cfg.split_hyphens = true,
                "stopwords" => cfg.remove_stopwords = true,
                _ => {
                    if let Some(v) = part.strip_prefix("stem=") {
                        cfg.stemmer = parse_stemmer(v)?;
                    } else if let Some(v) = part.strip_prefix("maxlen=") {
                        cfg.max_token_len = v
                            .parse()
                            .map_err(|_| Error::invalid(format!("bad maxlen {v:?}")))?;
                    } else {
                        return Err(Error::invalid(format!("unknown preprocessing toggle {part:?}")));
                    }
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Flat `key=value` form, one key per line, fixed key order.
    pub fn to_kv(&self) -> String {
        format!(
            "lowercase={}\nstrip_apostrophes={}\nfold_accents={}\nsplit_hyphens={}\nremove_stopwords={}\nstemmer={}\nmax_token_len={}\n",
            self.lowercase,
            self.strip_apostrophes,
            self.fold_accents,
            self.split_hyphens,
            self.remove_stopwords,
            self.stemmer.map_or("none".to_string(), |v| v.to_string()),
            self.max_token_len
        )
    }

    /// Parses the `key=value` form. Missing keys keep their defaults; `#`
    /// starts a comment line.
    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = NormConfig::default();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(idx + 1, None, "expected key=value"))?;
            let (key, value) = (key.trim(), value.trim());
            let flag = || -> Result<bool> {
                value
                    .parse()
                    .map_err(|_| Error::parse(idx + 1, None, format!("{key}: expected true/false")))
            };
            match key {
                "lowercase" => cfg.lowercase = flag()?,
                "strip_apostrophes" => cfg.strip_apostrophes = flag()?,
                "fold_accents" => cfg.fold_accents = flag()?,
                "split_hyphens" => cfg.split_hyphens = flag()?,
                "remove_stopwords" => cfg.remove_stopwords = flag()?,
                "stemmer" => cfg.stemmer = parse_stemmer(value)?,
                "max_token_len" => {
                    cfg.max_token_len = value
                        .parse()
                        .map_err(|_| Error::parse(idx + 1, None, "max_token_len: expected integer"))?
                }
                other => return Err(Error::parse(idx + 1, None, format!("unknown key {other:?}"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_stemmer(value: &str) -> Result<Option<StemVariant>> {
    if value == "none" {
        Ok(None)
    } else {
        StemVariant::from_str(value).map(Some)
    }
}

impl fmt::Display for NormConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Maps the apostrophe look-alikes seen in web text to U+0027.
pub fn unify_apostrophes(text: &str) -> String {
    text.chars()
        .map(|c| match c {
            '\u{2018}' | '\u{2019}' | '\u{02BC}' | '`' | '\u{00B4}' => '\'',
            other => other,
        })
        .collect()
}

fn is_connector(c: char) -> bool {
    c == '\'' || c == '-'
}

/// Splits text into word and number tokens. Apostrophes and hyphens are
/// kept only between two letters, so digits never join letters across them.
pub fn tokenize(text: &str) -> Vec<String> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let joins = is_connector(c)
            && !current.is_empty()
            && chars[i - 1].is_alphabetic()
            && chars.get(i + 1).is_some_and(|n| n.is_alphabetic());
        if c.is_alphanumeric() || joins {
            current.push(c);
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// á→a, é→e, í→i, ó→o, ú→u, ñ→n. Idempotent.
pub fn fold_accents(token: &str) -> String {
    token
        .chars()
        .map(|c| match c {
            'á' => 'a',
            'é' => 'e',
            'í' => 'i',
            'ó' => 'o',
            'ú' => 'u',
            'ñ' => 'n',
            other => other,
        })
        .collect()
}

pub fn strip_apostrophes(token: &str) -> String {
    token.chars().filter(|&c| c != '\'').collect()
}

/// Splits at every `-`, discarding empty pieces.
pub fn split_hyphens(token: &str) -> Vec<String> {
    token
        .split('-')
        .filter(|p| !p.is_empty())
        .map(str::to_string)
        .collect()
}

/// A configured pipeline. Construction resolves the stopword list and the
/// stemmer for the chosen toggles; [`Normalizer::normalize`] is then pure.
#[derive(Debug, Clone)]
pub struct Normalizer {
    config: NormConfig,
    stopwords: Option<EffectiveStopwords>,
    stemmer: Option<Stemmer>,
}

/// The stopword list as it looks after the per-token toggles, so that
/// matching happens in the same character space as the tokens.
#[derive(Debug, Clone)]
struct EffectiveStopwords {
    list: StopwordList,
    terms: HashSet<String>,
}

impl Normalizer {
    pub fn new(config: NormConfig) -> Result<Self> {
        Self::with_stopwords(config, StopwordList::bundled().clone())
    }

    pub fn with_stopwords(config: NormConfig, list: StopwordList) -> Result<Self> {
        config.validate()?;
        let stopwords = config.remove_stopwords.then(|| {
            let list = list.map_terms(|t| apply_char_toggles(t, &config));
            let terms = list.terms().map(str::to_string).collect();
            EffectiveStopwords { list, terms }
        });
        let stemmer = config
            .stemmer
            .map(|v| Stemmer::new(v).with_folded_accents(config.fold_accents));
        Ok(Normalizer {
            config,
            stopwords,
            stemmer,
        })
    }

    pub fn config(&self) -> &NormConfig {
        &self.config
    }

    pub fn normalize(&self, text: &str) -> Vec<String> {
        let lowered = unify_apostrophes(text).to_lowercase();
        let mut out = Vec::new();
        for token in tokenize(&lowered) {
            let pieces = if self.config.split_hyphens {
                split_hyphens(&token)
            } else {
                vec![token]
            };
            for piece in pieces {
                let mut t = piece;
                if self.config.strip_apostrophes {
                    t = strip_apostrophes(&t);
                }
                if self.config.fold_accents {
                    t = fold_accents(&t);
                }
                if t.is_empty() || t.chars().count() > self.config.max_token_len {
                    continue;
                }
                if let Some(sw) = &self.stopwords {
                    let corrected = sw.list.correct_variants(&t);
                    if sw.terms.contains(corrected) {
                        continue;
                    }
                }
                if let Some(stemmer) = &self.stemmer {
                    t = stemmer.stem(&t);
                }
                out.push(t);
            }
        }
        out
    }
}

/// The apostrophe and accent toggles applied to a single term (no splitting).
fn apply_char_toggles(term: &str, config: &NormConfig) -> String {
    let mut t = term.to_string();
    if config.strip_apostrophes {
        t = strip_apostrophes(&t);
    }
    if config.fold_accents {
        t = fold_accents(&t);
    }
    t
}

/// One-shot convenience wrapper around [`Normalizer`].
pub fn normalize(text: &str, config: &NormConfig) -> Result<Vec<String>> {
    Ok(Normalizer::new(config.clone())?.normalize(text))
}
