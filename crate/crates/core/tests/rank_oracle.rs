use std::collections::HashMap;

use proptest::prelude::*;
use rand::{rngs::StdRng, seq::SliceRandom, SeedableRng};
use tetun_ir::corpus::Document;
use tetun_ir::index::{Field, InvertedIndex};
use tetun_ir::rank::{search, term_weight, Model, RankParams};
use tetun_ir::textnorm::NormConfig;

fn index(docs: &[(&str, &str)]) -> InvertedIndex {
    let docs: Vec<Document> = docs.iter().map(|(id, text)| Document::new(*id, "", *text)).collect();
    InvertedIndex::build(&docs, Field::Content, &NormConfig::baseline()).unwrap()
}

/// Scores written out from the textbook formulas over raw token lists.
fn hand_scores(docs: &[(&str, &str)], query: &str, p: &RankParams) -> HashMap<String, f64> {
    let toks: Vec<Vec<&str>> = docs.iter().map(|(_, t)| t.split_whitespace().collect()).collect();
    let n = docs.len() as f64;
    let total: f64 = toks.iter().map(|d| d.len() as f64).sum();
    let avdl = total / n;
    let mut qtf: HashMap<&str, f64> = HashMap::new();
    for q in query.split_whitespace() {
        *qtf.entry(q).or_default() += 1.0;
    }
    let mut out = HashMap::new();
    for (i, d) in toks.iter().enumerate() {
        if !qtf.keys().any(|q| d.contains(q)) {
            continue;
        }
        let dl = d.len() as f64;
        let mut s = 0.0;
        for (q, &w) in &qtf {
            let df = toks.iter().filter(|x| x.contains(q)).count() as f64;
            if df == 0.0 {
                continue;
            }
            let cf = toks.iter().flatten().filter(|t| *t == q).count() as f64;
            let tf = d.iter().filter(|t| *t == q).count() as f64;
            let big_k = p.k1 * ((1.0 - p.b) + p.b * (dl / avdl));
            let sat = tf * (p.k1 + 1.0) / (tf + big_k);
            let term = match p.model {
                Model::Bm25 => f64::max(0.0, f64::ln((n - df + 0.5) / (df + 0.5))) * sat,
                Model::Tfidf => (tf / (tf + big_k)) * f64::ln(1.0 + n / df),
                Model::DfrBm25 => (f64::ln((n + 1.0) / (df + 0.5)) / std::f64::consts::LN_2) * sat,
                Model::DirichletLm => f64::ln((tf + p.mu * (cf / total)) / (dl + p.mu)),
                Model::HiemstraLm => {
                    f64::ln(1.0 + (p.lambda * tf * total) / ((1.0 - p.lambda) * cf * dl))
                }
            };
            s += w * term;
        }
        out.insert(docs[i].0.to_string(), s);
    }
    out
}

const DOCS: [(&str, &str); 5] = [
    ("d1", "udan boot iha dili udan"),
    ("d2", "eskola foun iha dili"),
    ("d3", "kafé ermera kafé kafé folin"),
    ("d4", "udan tun iha ermera no kafé aat"),
    ("d5", "ema barak la iha uma"),
];

#[test]
fn all_models_match_hand_formulas() {
    let idx = index(&DOCS);
    let queries = ["udan iha dili", "kafé ermera", "iha iha udan", "folin kafé uma"];
    for model in Model::ALL {
        let params = RankParams {
            mu: 10.0,
            ..RankParams::new(model)
        };
        for q in queries {
            let got = search(&idx, q, &params, 100).unwrap();
            let want = hand_scores(&DOCS, q, &params);
            assert_eq!(got.hits.len(), want.len(), "{model} {q}");
            for h in &got.hits {
                let w = want[&h.docno];
                assert!((h.score - w).abs() < 1e-9, "{model} {q} {}: {} vs {w}", h.docno, h.score);
            }
        }
    }
}

#[test]
fn ties_break_on_docno_whatever_the_input_order() {
    let mut docs: Vec<(&str, &str)> = vec![
        ("b", "udan boot"),
        ("a", "udan boot"),
        ("c", "udan boot"),
        ("z", "kafé"),
        ("e", "udan boot"),
    ];
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..20 {
        docs.shuffle(&mut rng);
        let idx = index(&docs);
        for model in Model::ALL {
            let got = search(&idx, "udan", &RankParams::new(model), 10).unwrap();
            assert_eq!(got.docnos(), ["a", "b", "c", "e"], "{model}");
        }
    }
}

#[test]
fn dirichlet_with_tiny_mu_prefers_full_matches() {
    let docs = [
        ("d1", "udan udan udan udan boot"),
        ("d2", "udan boot"),
        ("d3", "udan udan udan udan udan"),
    ];
    let idx = index(&docs);
    let params = RankParams {
        mu: 1e-9,
        ..RankParams::new(Model::DirichletLm)
    };
    let got = search(&idx, "udan boot", &params, 10).unwrap();
    assert_eq!(got.docnos(), ["d2", "d1", "d3"]);
    // Maximum likelihood limit: ln(1/2) + ln(1/2).
    assert!((got.hits[0].score - 2.0 * 0.5f64.ln()).abs() < 1e-6);
}

#[test]
fn hiemstra_ignores_missing_terms() {
    let idx = index(&DOCS);
    let p = RankParams::new(Model::HiemstraLm);
    let one = search(&idx, "kafé", &p, 10).unwrap();
    let two = search(&idx, "kafé dili", &p, 10).unwrap();
    // d3 has no "dili": its score is unchanged by adding the term.
    let score = |l: &tetun_ir::rank::RankedList, d: &str| l.hits.iter().find(|h| h.docno == d).unwrap().score;
    assert_eq!(score(&one, "d3"), score(&two, "d3"));
    assert_eq!(
        term_weight(&p, &idx.stats(), 2, 3, 0, 5),
        0.0,
        "zero tf contributes nothing"
    );
}

#[test]
fn unknown_query_terms_give_no_hits() {
    let idx = index(&DOCS);
    for model in Model::ALL {
        let got = search(&idx, "lafaek", &RankParams::new(model), 10).unwrap();
        assert!(got.hits.is_empty() && !got.empty_query);
    }
}

proptest! {
    #[test]
    fn weight_grows_with_tf(tf in 1u32..50, dl in 50u32..200, df in 1u64..40, model_i in 0usize..5) {
        let idx = index(&DOCS);
        let mut stats = idx.stats();
        stats.documents = 100;
        stats.avdl = 80.0;
        stats.total_tokens = 8000;
        let p = RankParams::new(Model::ALL[model_i]);
        let cf = df * 3;
        let a = term_weight(&p, &stats, df, cf, tf, dl);
        let b = term_weight(&p, &stats, df, cf, tf + 1, dl);
        prop_assert!(b > a, "{} {} -> {}", Model::ALL[model_i], a, b);
    }

    #[test]
    fn bm25_weight_shrinks_with_length(tf in 1u32..20, dl in 1u32..300, df in 1u64..40) {
        let idx = index(&DOCS);
        let mut stats = idx.stats();
        stats.documents = 100;
        stats.avdl = 80.0;
        let p = RankParams::new(Model::Bm25);
        let a = term_weight(&p, &stats, df, df, tf, dl);
        let b = term_weight(&p, &stats, df, df, tf, dl + 10);
        prop_assert!(b <= a);
    }
}
