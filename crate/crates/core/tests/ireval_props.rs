use proptest::prelude::*;
use rand::{rngs::StdRng, seq::SliceRandom, Rng, SeedableRng};
use tetun_ir::corpus::{Grade, Qrel, RunEntry};
use tetun_ir::ireval::{
    average_precision, evaluate_run, ndcg_at_k, precision_at_k, EvalOptions, Gain, TopicQrels,
};

fn qrels(pairs: &[(&str, u8)]) -> TopicQrels {
    pairs.iter().map(|(d, g)| (d.to_string(), *g)).collect()
}

fn naive_ap(ranked: &[String], q: &TopicQrels) -> f64 {
    let r = q.values().filter(|&&g| g > 0).count() as f64;
    let mut total = 0.0;
    for (i, d) in ranked.iter().enumerate() {
        if q.get(d).copied().unwrap_or(0) > 0 {
            let above = ranked[..=i].iter().filter(|x| q.get(*x).copied().unwrap_or(0) > 0).count();
            total += above as f64 / (i + 1) as f64;
        }
    }
    total / r
}

fn naive_ndcg(ranked: &[String], q: &TopicQrels, k: usize) -> f64 {
    let dcg = |grades: Vec<u8>| -> f64 {
        grades
            .iter()
            .take(k)
            .enumerate()
            .map(|(i, &g)| g as f64 / (i as f64 + 2.0).log2())
            .sum()
    };
    let got = dcg(ranked.iter().map(|d| q.get(d).copied().unwrap_or(0)).collect());
    let mut ideal: Vec<u8> = q.values().copied().collect();
    ideal.sort_by(|a, b| b.cmp(a));
    let best = dcg(ideal);
    if best == 0.0 {
        0.0
    } else {
        got / best
    }
}

#[test]
fn average_precision_fixture() {
    let q = qrels(&[("a", 1), ("c", 2), ("x", 0)]);
    let ap = average_precision(&["a", "b", "c"], &q, None).unwrap();
    assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-12);
    // Unretrieved relevant documents still count in the denominator.
    let ap = average_precision(&["a"], &q, None).unwrap();
    assert!((ap - 0.5).abs() < 1e-12);
    assert_eq!(average_precision(&["a"], &qrels(&[("a", 0)]), None), None);
}

#[test]
fn precision_divides_by_k() {
    let q = qrels(&[("a", 1), ("b", 1)]);
    assert_eq!(precision_at_k(&["a", "b"], &q, 5), 0.4);
}

#[test]
fn topics_missing_from_the_run_score_zero() {
    let g = |v| Grade::new(v).unwrap();
    let qrels = vec![Qrel::new(1, "a", g(2)), Qrel::new(2, "b", g(1))];
    let run = vec![RunEntry {
        topic_id: 1,
        docno: "a".into(),
        rank: 1,
        score: 1.0,
        run_tag: "t".into(),
    }];
    let report = evaluate_run(&run, &qrels, &EvalOptions::default()).unwrap();
    let t2 = report.topic(2).unwrap();
    assert!(t2.missing_from_run);
    assert!(t2.values.iter().all(|&v| v == 0.0));
    assert_eq!(report.mean("MAP"), Some(0.5));
    assert_eq!(report.mean("NDCG"), Some(0.5));
}

fn random_case(rng: &mut StdRng) -> (Vec<String>, TopicQrels) {
    let n = rng.gen_range(1..25);
    let mut docs: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
    docs.shuffle(rng);
    let mut q = TopicQrels::new();
    for d in &docs {
        if rng.gen_bool(0.7) {
            q.insert(d.clone(), rng.gen_range(0..=3));
        }
    }
    // Some judged documents are never retrieved.
    for i in 0..rng.gen_range(0..4) {
        q.insert(format!("extra{i}"), rng.gen_range(0..=3));
    }
    let keep = rng.gen_range(0..=docs.len());
    docs.truncate(keep);
    (docs, q)
}

#[test]
fn metrics_match_direct_computation_and_swaps_help() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..1000 {
        let (ranked, q) = random_case(&mut rng);
        let has_rel = q.values().any(|&g| g > 0);
        if has_rel {
            let ap = average_precision(&ranked, &q, None).unwrap();
            assert!((ap - naive_ap(&ranked, &q)).abs() < 1e-12);
        }
        for k in [1, 5, 10, 1000] {
            let nd = ndcg_at_k(&ranked, &q, Some(k), Gain::Linear);
            assert!((nd - naive_ndcg(&ranked, &q, k)).abs() < 1e-12);
            assert!((0.0..=1.0 + 1e-12).contains(&nd));
        }
        if ranked.len() < 2 {
            continue;
        }
        // Moving a better document above a worse neighbour never hurts.
        let i = rng.gen_range(0..ranked.len() - 1);
        let grade = |d: &String| q.get(d).copied().unwrap_or(0);
        let mut better = ranked.clone();
        if grade(&better[i]) < grade(&better[i + 1]) {
            better.swap(i, i + 1);
        }
        for gain in [Gain::Linear, Gain::Exponential] {
            assert!(ndcg_at_k(&better, &q, None, gain) >= ndcg_at_k(&ranked, &q, None, gain) - 1e-12);
            assert!(ndcg_at_k(&better, &q, Some(5), gain) >= ndcg_at_k(&ranked, &q, Some(5), gain) - 1e-12);
        }
        if has_rel {
            let before = average_precision(&ranked, &q, None).unwrap();
            let after = average_precision(&better, &q, None).unwrap();
            assert!(after >= before - 1e-12);
        }
        for k in [1, 3, 10] {
            assert!(precision_at_k(&better, &q, k) >= precision_at_k(&ranked, &q, k));
        }
    }
}

proptest! {
    #[test]
    fn ideal_ranking_has_unit_ndcg(grades in prop::collection::vec(0u8..=3, 1..30), gain_exp in any::<bool>()) {
        prop_assume!(grades.iter().any(|&g| g > 0));
        let q: TopicQrels = grades.iter().enumerate().map(|(i, &g)| (format!("d{i}"), g)).collect();
        let mut ranked: Vec<(String, u8)> = q.iter().map(|(d, &g)| (d.clone(), g)).collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let ranked: Vec<String> = ranked.into_iter().map(|(d, _)| d).collect();
        let gain = if gain_exp { Gain::Exponential } else { Gain::Linear };
        for k in [None, Some(1), Some(5), Some(10)] {
            prop_assert!((ndcg_at_k(&ranked, &q, k, gain) - 1.0).abs() < 1e-12);
        }
        prop_assert!((average_precision(&ranked, &q, None).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_grade_swaps_change_nothing(grades in prop::collection::vec(0u8..=3, 2..20), i in 0usize..20, j in 0usize..20) {
        let n = grades.len();
        let (i, j) = (i % n, j % n);
        prop_assume!(grades[i] == grades[j]);
        let q: TopicQrels = grades.iter().enumerate().map(|(k, &g)| (format!("d{k}"), g)).collect();
        let ranked: Vec<String> = (0..n).map(|k| format!("d{k}")).collect();
        let mut swapped = ranked.clone();
        swapped.swap(i, j);
        prop_assert_eq!(ndcg_at_k(&ranked, &q, None, Gain::Linear), ndcg_at_k(&swapped, &q, None, Gain::Linear));
        prop_assert_eq!(average_precision(&ranked, &q, None), average_precision(&swapped, &q, None));
        prop_assert_eq!(precision_at_k(&ranked, &q, 5), precision_at_k(&swapped, &q, 5));
    }
}
