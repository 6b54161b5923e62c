// Aggregates five assessors' votes, settles a tie with second-round
// votes, measures agreement and exports qrels.

use std::error::Error;

use tetun_ir::corpus::Grade;
use tetun_ir::judge::aggregate::{aggregate, first_round, RoundOne};
use tetun_ir::judge::{agreement_report, export_qrels, ExclusionRule, JudgmentRecord};

fn grades(v: &[u8]) -> Vec<Grade> {
    v.iter().map(|&g| Grade::new(g).unwrap()).collect()
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    for votes in [[3, 3, 3, 1, 0], [3, 3, 1, 1, 0], [2, 2, 0, 0, 1]] {
        match first_round(&grades(&votes), 5)? {
            RoundOne::Majority(g) => println!("{votes:?} -> majority {g}"),
            RoundOne::Tie([a, b]) => println!("{votes:?} -> tie, second round chooses {a} or {b}"),
        }
    }

    let mut records = Vec::new();
    let round1 = [("a1", [3, 0, 2]), ("a2", [3, 1, 2]), ("a3", [1, 0, 2]), ("a4", [1, 0, 3]), ("a5", [0, 0, 2])];
    for (who, gs) in round1 {
        for (i, g) in gs.iter().enumerate() {
            records.push(JudgmentRecord {
                assessor_id: who.into(),
                topic_id: 1,
                docno: format!("d{i}"),
                grade: Grade::new(*g).unwrap(),
                round: 1,
                timestamp: 0,
            });
        }
    }
    let agg = aggregate(&records, 5, 3)?;
    println!("{} settled, {} tied", agg.qrels.len(), agg.tie_count());
    for (who, g) in [("a1", 3), ("a3", 3), ("a5", 1)] {
        records.push(JudgmentRecord {
            assessor_id: who.into(),
            topic_id: 1,
            docno: "d0".into(),
            grade: Grade::new(g).unwrap(),
            round: 2,
            timestamp: 1,
        });
    }
    let agg = aggregate(&records, 5, 3)?;
    for q in &agg.qrels {
        println!("{} {} -> {} ({})", q.topic_id, q.docno, q.grade, q.status);
    }

    let kappa = agreement_report(&records);
    println!("average kappa {:.4}", kappa.average.unwrap_or(f64::NAN));

    let rule = ExclusionRule {
        min_relevant: 1,
        max_relevant: 100,
    };
    let export = export_qrels(&agg.qrels, rule)?;
    print!("{}", export.qrels_text());
    Ok(())
}

fn main() {
    run_example().unwrap();
}
