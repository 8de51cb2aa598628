//! Search, refinement, checkpoints and a drawing of the result, end to end.
//!
//! cargo run --release --example pipeline -- ten-bar-load1 20000 5000 1 run-dir

use std::path::PathBuf;

use trussforge::checkpoint::{Checkpoint, RngDescriptor, FORMAT_VERSION};
use trussforge::refine::{refine_rng, run_refinement, RefineParams};
use trussforge::render::{render_svg, RenderStyle};
use trussforge::report::ValidationReport;
use trussforge::search::{run_search, SearchParams};
use trussforge::testbeds::load_case;

fn main() {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "ten-bar-load1".into());
    let budget: u64 = args.next().map(|s| s.parse().expect("search budget")).unwrap_or(20_000);
    let rl_steps: u64 = args.next().map(|s| s.parse().expect("rl steps")).unwrap_or(5_000);
    let seed: u64 = args.next().map(|s| s.parse().expect("seed")).unwrap_or(1);
    let out: PathBuf = args.next().unwrap_or_else(|| "pipeline-run".into()).into();

    let case = load_case(&name, None).expect("bundled case");
    let searched = run_search(&case, SearchParams::default(), budget, seed, 1);
    let checkpoint = Checkpoint {
        format: FORMAT_VERSION,
        case: name.clone(),
        max_nodes: case.max_nodes,
        seed,
        jobs: 1,
        kappa: searched.kappa,
        search_iterations: searched.iterations,
        rl_steps: 0,
        rng: RngDescriptor::chacha8(seed, searched.rng_words.iter().copied()),
        diverse: searched.diverse.to_document(),
        agent: None,
        replay: None,
    };
    checkpoint.write(&out.join("search.json")).expect("write checkpoint");
    let Some(before) = searched.diverse.best_mass() else {
        println!("no valid layout after {budget} iterations");
        return;
    };
    println!("search: {} topologies, best {before:.2} kg", searched.diverse.topology_count());

    let params = RefineParams {
        rl_steps,
        ..RefineParams::default()
    };
    let mut rng = refine_rng(seed);
    let outcome = run_refinement(&case, &searched.diverse, searched.kappa, &params, &mut rng, |_| {})
        .expect("non-empty start set");
    let refined = Checkpoint {
        rl_steps,
        rng: RngDescriptor::chacha8(seed, [rng.get_word_pos()]),
        diverse: outcome.refined.to_document(),
        agent: outcome.agent.as_ref().map(|a| a.weights()),
        replay: Some(outcome.replay),
        ..checkpoint
    };
    refined.write(&out.join("refined.json")).expect("write checkpoint");

    let best = outcome.refined.best().expect("non-empty");
    println!("refine: {} episodes, best {:.2} kg", outcome.episodes, best.mass);
    print!("{}", ValidationReport::new(&best.layout, &case).to_text());
    let svg = out.join("best.svg");
    std::fs::write(&svg, render_svg(&best.layout, &case, &RenderStyle::default())).expect("write svg");
    println!("wrote {}", svg.display());
}
