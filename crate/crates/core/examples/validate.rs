//! Validates the bundled sundial layouts and prints their reports.
//!
//! cargo run --example validate [-- layout.json case [max_nodes]]

use std::path::{Path, PathBuf};

use trussforge::document::read_layout;
use trussforge::report::ValidationReport;
use trussforge::testbeds::resolve_case;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/layouts");
    let jobs: Vec<(PathBuf, String, Option<usize>)> = match args.as_slice() {
        [layout, case, rest @ ..] => vec![(layout.into(), case.clone(), rest.first().map(|p| p.parse().expect("max nodes")))],
        _ => (7..=9)
            .map(|p| (data.join(format!("sundial-p{p}.json")), "sundial".to_string(), Some(p)))
            .collect(),
    };
    for (path, case, p) in jobs {
        let case = resolve_case(&case, p).expect("case");
        let layout = read_layout(&path).expect("readable").expect("well-formed layout");
        println!("== {}", path.display());
        print!("{}", ValidationReport::new(&layout, &case).to_text());
    }
}
