// Runs a small preprocessing grid over the fixture collection, then runs
// it again to show that finished cells are reused.

use std::error::Error;
use std::path::Path;

use tetun_ir::cli::grid::{run_grid, ExperimentGrid};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let text = r#"
        version = 1
        documents = "docs.xml"
        topics = "topics.xml"
        qrels = "qrels.txt"
        fields = ["title"]
        configs = ["baseline", "hyphens", "stopwords", "stem=light"]
        models = ["bm25", "hiemstra_lm"]
        cutoffs = [5, 10]
        depth = 100
        workers = 2
    "#;
    let mut grid = ExperimentGrid::parse(text, &fixtures, None)?;
    let out = tempfile::tempdir()?;
    grid.out = out.path().to_path_buf();

    let first = run_grid(&grid)?;
    print!("{}", first.report.to_markdown());
    let second = run_grid(&grid)?;
    println!(
        "\nrerun: {} cells reused, {} recomputed",
        second.cells_reused, second.cells_computed
    );
    assert_eq!(first.report, second.report);
    Ok(())
}

fn main() {
    run_example().unwrap();
}
