use proptest::prelude::*;
use tetun_ir::stopwords::{build_graph, precision_at, score_terms, Method, StopwordAnalysis, StopwordList};

const VOCAB: &[&str] = &["no", "iha", "ba", "sira", "uma", "eskola", "udan", "kafé", "foun", "boot"];

fn corpus_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
    let doc = prop::collection::vec(prop::sample::select(VOCAB), 0..12)
        .prop_map(|d| d.into_iter().map(String::from).collect::<Vec<_>>());
    prop::collection::vec(doc, 1..50)
}

fn vocabulary(corpus: &[Vec<String>]) -> Vec<String> {
    let mut v: Vec<String> = corpus.iter().flatten().cloned().collect();
    v.sort();
    v.dedup();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn counts_match_direct_scan(corpus in corpus_strategy()) {
        let scores = score_terms(&corpus).unwrap();
        let vocab = vocabulary(&corpus);
        prop_assert_eq!(scores.len(), vocab.len());
        let n = corpus.len() as f64;
        for (s, term) in scores.iter().zip(&vocab) {
            prop_assert_eq!(&s.term, term);
            let tf = corpus.iter().flatten().filter(|t| *t == term).count() as u64;
            let df = corpus.iter().filter(|d| d.contains(term)).count() as u64;
            prop_assert_eq!(s.tf, tf);
            prop_assert_eq!(s.df, df);
            let idf = (n / df as f64).ln();
            prop_assert!((s.idf - idf).abs() < 1e-12);
            prop_assert!((s.tfidf - tf as f64 * idf).abs() < 1e-9);
        }
    }

    #[test]
    fn degrees_match_direct_scan(corpus in corpus_strategy()) {
        let graph = build_graph(&corpus);
        let mut pairs: Vec<(&str, &str)> = Vec::new();
        for d in &corpus {
            for i in 1..d.len() {
                let p = (d[i - 1].as_str(), d[i].as_str());
                if !pairs.contains(&p) {
                    pairs.push(p);
                }
            }
        }
        prop_assert_eq!(graph.edge_count(), pairs.len());
        let degrees = graph.degrees();
        for term in vocabulary(&corpus) {
            let out = pairs.iter().filter(|p| p.0 == term).count();
            let inn = pairs.iter().filter(|p| p.1 == term).count();
            let d = degrees[term.as_str()];
            prop_assert_eq!(d.out_degree, out);
            prop_assert_eq!(d.in_degree, inn);
            prop_assert_eq!(d.degree, inn + out);
        }
    }

    #[test]
    fn idf_ranking_is_ascending(corpus in corpus_strategy()) {
        let a = StopwordAnalysis::build(&corpus).unwrap();
        let ranked = a.rank_candidates(Method::Idf, 100).unwrap();
        let idf = |t: &str| a.scores.iter().find(|s| s.term == t).unwrap().idf;
        for w in ranked.windows(2) {
            prop_assert!(idf(&w[0]) <= idf(&w[1]));
        }
    }
}

#[test]
fn self_loops_count_once_each_way() {
    let corpus = vec![vec!["ba", "ba", "ba"]];
    let g = build_graph(&corpus);
    assert!(g.contains_edge("ba", "ba"));
    let d = g.degrees()["ba"];
    assert_eq!((d.in_degree, d.out_degree, d.degree), (1, 1, 2));
}

#[test]
fn frequent_function_words_reach_full_precision() {
    let function = ["no", "iha", "ba", "sira", "ne'e", "la", "hodi", "ho", "mak", "atu"];
    let mut corpus = Vec::new();
    for i in 0..40 {
        let mut doc = vec![format!("titulu{i}")];
        for (j, f) in function.iter().enumerate() {
            doc.push(f.to_string());
            doc.push(format!("liafuan{}", i * 10 + j));
        }
        corpus.push(doc);
    }
    let truth = StopwordList::new(function).unwrap();
    let a = StopwordAnalysis::build(&corpus).unwrap();
    for method in Method::ALL.into_iter().filter(|&m| m != Method::Tfidf) {
        let top = a.rank_candidates(method, 10).unwrap();
        let p = precision_at(&top, &truth, &[10]).unwrap();
        assert_eq!(p[&10], 1.0, "{method}");
    }
    // Words present in every document get idf 0, so tf-idf ranks them last.
    let top = a.rank_candidates(Method::Tfidf, 10).unwrap();
    assert_eq!(precision_at(&top, &truth, &[10]).unwrap()[&10], 0.0);
}
