//! Every example under examples/ runs to completion.

#[allow(dead_code)]
mod read_collection {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/read_collection.rs"));
}

#[test]
fn read_collection_runs() {
    read_collection::run_example().expect("read_collection example should run");
}

#[allow(dead_code)]
mod normalize_text {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/normalize_text.rs"));
}

#[test]
fn normalize_text_runs() {
    normalize_text::run_example().expect("normalize_text example should run");
}

#[allow(dead_code)]
mod stem_words {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/stem_words.rs"));
}

#[test]
fn stem_words_runs() {
    stem_words::run_example().expect("stem_words example should run");
}

#[allow(dead_code)]
mod stemmer_evaluation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/stemmer_evaluation.rs"));
}

#[test]
fn stemmer_evaluation_runs() {
    stemmer_evaluation::run_example().expect("stemmer_evaluation example should run");
}

#[allow(dead_code)]
mod stopword_detection {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/stopword_detection.rs"));
}

#[test]
fn stopword_detection_runs() {
    stopword_detection::run_example().expect("stopword_detection example should run");
}

#[allow(dead_code)]
mod build_index {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/build_index.rs"));
}

#[test]
fn build_index_runs() {
    build_index::run_example().expect("build_index example should run");
}

#[allow(dead_code)]
mod rank_documents {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/rank_documents.rs"));
}

#[test]
fn rank_documents_runs() {
    rank_documents::run_example().expect("rank_documents example should run");
}

#[allow(dead_code)]
mod evaluate_run {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/evaluate_run.rs"));
}

#[test]
fn evaluate_run_runs() {
    evaluate_run::run_example().expect("evaluate_run example should run");
}

#[allow(dead_code)]
mod build_pools {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/build_pools.rs"));
}

#[test]
fn build_pools_runs() {
    build_pools::run_example().expect("build_pools example should run");
}

#[allow(dead_code)]
mod judge_aggregation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/judge_aggregation.rs"));
}

#[test]
fn judge_aggregation_runs() {
    judge_aggregation::run_example().expect("judge_aggregation example should run");
}

#[allow(dead_code)]
mod judge_service {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/judge_service.rs"));
}

#[test]
fn judge_service_runs() {
    judge_service::run_example().expect("judge_service example should run");
}

#[allow(dead_code)]
mod preprocessing_grid {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/preprocessing_grid.rs"));
}

#[test]
fn preprocessing_grid_runs() {
    preprocessing_grid::run_example().expect("preprocessing_grid example should run");
}
