//! Runs the search stage on a bundled case and prints the lightest layouts found.
//!
//! cargo run --release --example search -- ten-bar-load1 20000 7

use std::time::Instant;

use trussforge::search::{Search, SearchParams};
use trussforge::testbeds::load_case;

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "ten-bar-load1".into());
    let budget: u64 = args.next().map(|s| s.parse().expect("budget")).unwrap_or(20_000);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(7);

    let case = load_case(&name, None).expect("bundled case");
    let mut search = Search::seeded(&case, SearchParams::default(), seed);
    let start = Instant::now();
    let mut valid = 0u64;
    let report_every = (budget / 10).max(1);
    for i in 1..=budget {
        if search.iterate().classification == trussforge::Classification::Valid {
            valid += 1;
        }
        if i % report_every == 0 {
            println!(
                "iter {i:>8}  valid rollouts {valid:>7}  topologies {:>5}  best {:>10.2} kg  tree {:>7}  {:.1}s",
                search.diverse().topology_count(),
                search.diverse().best_mass().unwrap_or(f64::NAN),
                search.tree().len(),
                start.elapsed().as_secs_f64()
            );
        }
    }
    for (rank, entry) in search.diverse().global().iter().enumerate() {
        println!("#{} {:.2} kg  {}", rank + 1, entry.mass, entry.layout.topology_key());
    }
}
