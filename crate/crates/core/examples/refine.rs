//! Search, then refine the stored layouts with the soft actor-critic agent.
//!
//! cargo run --release --example refine -- ten-bar-load1 50000 20000 1

use std::time::Instant;

use trussforge::refine::{refine_rng, run_refinement, RefineParams};
use trussforge::search::{run_search, SearchParams};
use trussforge::testbeds::load_case;

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "ten-bar-load1".into());
    let budget: u64 = args.next().map(|s| s.parse().expect("search budget")).unwrap_or(50_000);
    let rl_steps: u64 = args.next().map(|s| s.parse().expect("rl steps")).unwrap_or(20_000);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(1);

    let case = load_case(&name, None).expect("bundled case");
    let clock = Instant::now();
    let searched = run_search(&case, SearchParams::default(), budget, seed, 1);
    let Some(before) = searched.diverse.best_mass() else {
        println!("search found no valid layout; nothing to refine");
        return;
    };
    println!(
        "search: {} topologies, best {before:.2} kg ({:.1}s)",
        searched.diverse.topology_count(),
        clock.elapsed().as_secs_f64()
    );

    let params = RefineParams {
        rl_steps,
        ..RefineParams::default()
    };
    let mut rng = refine_rng(seed);
    let mut last_print = 0;
    let outcome = run_refinement(&case, &searched.diverse, searched.kappa, &params, &mut rng, |r| {
        if r.step >= last_print + rl_steps / 20 {
            last_print = r.step;
            println!(
                "step {:>6}  episode {:>5}  return {:>9.2}  best {:>9.2} kg  alpha {:.3}  {:.1}s",
                r.step,
                r.episode,
                r.episode_return,
                r.best_mass,
                r.alpha,
                clock.elapsed().as_secs_f64()
            );
        }
    })
    .expect("non-empty start set");
    let after = outcome.refined.best_mass().expect("non-empty");
    println!(
        "refine: best {before:.2} kg -> {after:.2} kg ({:+.1}%) in {:.1}s",
        100.0 * (after - before) / before,
        clock.elapsed().as_secs_f64()
    );
}
