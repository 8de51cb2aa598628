//! Lists the bundled test cases and their resolved settings.
//!
//! cargo run --example cases

use trussforge::testbeds::{case_names, load_case};
use trussforge::validity::AreaRule;

fn main() {
    for name in case_names() {
        let case = load_case(name, None).expect("bundled case");
        let sections = match case.sections() {
            AreaRule::Range { min, max } => format!("continuous {:.2}..{:.2} cm²", min * 1e4, max * 1e4),
            AreaRule::Catalog(c) => format!("catalog of {} tubes", c.len()),
        };
        println!("{name}");
        println!("  {}D, fixed nodes {} ({})", case.dim.count(), case.fixed_nodes.len(), case.node_labels.join(","));
        println!("  node counts {:?}, default {}", case.allowed_node_counts, case.max_nodes);
        println!("  sections: {sections}");
        println!("  reference mass {:.1} kg, kappa {:.4e}", case.reference_mass, case.kappa());
    }
}
