//! Solves a two-bar truss and checks it against the closed-form answer.
//!
//! cargo run --example fea

use trussforge::fea::{assemble_and_solve, MaterialSpec};
use trussforge::model::{Bar, CrossSection, Dim, NodeSpec, TrussLayout};

fn main() {
    // Symmetric V: supports at (±3, 4), loaded apex at the origin.
    let load = -1.0e5;
    let area = 1.0e-3;
    let material = MaterialSpec {
        youngs_modulus: 2.0e11,
        density: 7850.0,
        gravity: 9.81,
        include_self_weight: false,
    };
    let support = |x: f64| NodeSpec {
        is_support: true,
        is_fixed: true,
        ..NodeSpec::free([x, 4.0, 0.0])
    };
    let apex = NodeSpec {
        load: [0.0, load, 0.0],
        is_fixed: true,
        ..NodeSpec::free([0.0, 0.0, 0.0])
    };
    let layout = TrussLayout::new(
        Dim::Two,
        vec![support(-3.0), support(3.0), apex],
        vec![Bar::new(0, 2, CrossSection::flat(area)), Bar::new(1, 2, CrossSection::flat(area))],
    )
    .expect("well-formed layout");

    let result = assemble_and_solve(&layout, &material);
    assert!(result.solvable);
    // Each bar carries P / (2 cos θ) with cos θ = 4/5; vertical drop is P·L / (2·E·A·cos²θ).
    let (len, cos) = (5.0, 0.8);
    let force = -load / (2.0 * cos);
    let drop = -load * len / (2.0 * material.youngs_modulus * area * cos * cos);
    println!("apex displacement  {:?} m", &result.displacements[2][..2]);
    println!("closed form drop   {:.6e} m", drop);
    for (i, s) in result.axial_stress.iter().enumerate() {
        println!(
            "bar {i}: stress {:+.3} MPa (closed form {:+.3}), buckling limit {:.1} MPa, slenderness {:.1}",
            s / 1e6,
            force / area / 1e6,
            result.buckling_limit[i] / 1e6,
            result.slenderness[i]
        );
    }
}
