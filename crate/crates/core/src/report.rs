//! Machine-readable reports and their plain-text summaries.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::model::TrussLayout;
use crate::testbeds::CaseConfig;
use crate::validity::{self, Classification, Constraint, StabilityDetail, Status};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintRow {
    pub constraint: String,
    pub status: Status,
    /// Worst violation in SI units; `null` when the structure could not be analysed.
    pub violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarRow {
    pub index: usize,
    pub u: usize,
    pub v: usize,
    /// m.
    pub length: f64,
    /// m².
    pub area: f64,
    /// Pa, tension positive.
    pub stress: f64,
    /// Pa.
    pub buckling_limit: f64,
    pub slenderness: f64,
}

/// Everything `validate` prints about one layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub case: String,
    pub node_count: usize,
    pub bar_count: usize,
    pub classification: Classification,
    /// kg.
    pub mass: f64,
    /// m; `null` when unsolvable.
    pub max_displacement: f64,
    pub stability: StabilityDetail,
    pub constraints: Vec<ConstraintRow>,
    pub bars: Vec<BarRow>,
}

impl ValidationReport {
    pub fn new(layout: &TrussLayout, case: &CaseConfig) -> Self {
        let eval = validity::evaluate(layout, case);
        let a = &eval.analysis;
        let constraints = Constraint::ALL
            .into_iter()
            .map(|c| ConstraintRow {
                constraint: c.to_string(),
                status: eval.report.status(c),
                violation: eval.report.violation[c.index()],
            })
            .collect();
        let bars = layout
            .bars()
            .iter()
            .enumerate()
            .map(|(i, b)| BarRow {
                index: i,
                u: b.u,
                v: b.v,
                length: layout.bar_length(i),
                area: b.section.area(),
                stress: if a.solvable { a.axial_stress[i] } else { f64::NAN },
                buckling_limit: a.buckling_limit[i],
                slenderness: a.slenderness[i],
            })
            .collect();
        Self {
            case: case.name.clone(),
            node_count: layout.node_count(),
            bar_count: layout.bar_count(),
            classification: eval.report.classification,
            mass: case.mass(layout),
            max_displacement: if a.solvable { a.max_displacement() } else { f64::NAN },
            stability: eval.report.stability,
            constraints,
            bars,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.classification == Classification::Valid
    }

    pub fn failing(&self) -> Vec<&str> {
        self.constraints
            .iter()
            .filter(|c| c.status == Status::Fail)
            .map(|c| c.constraint.as_str())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let class = match self.classification {
            Classification::Valid => "valid",
            Classification::InvalidStructural => "invalid (structural)",
            Classification::InvalidOther => "invalid (other)",
        };
        let _ = writeln!(s, "case {}: {} nodes, {} bars", self.case, self.node_count, self.bar_count);
        let _ = writeln!(s, "classification: {class}");
        let _ = writeln!(s, "mass: {:.3} kg", self.mass);
        if self.max_displacement.is_finite() {
            let _ = writeln!(s, "max displacement: {:.3} mm", self.max_displacement * 1e3);
        }
        let st = &self.stability;
        let _ = writeln!(
            s,
            "stability: maxwell {}, positive definite {}, crossing pairs {}",
            yes_no(st.maxwell_count),
            yes_no(st.positive_definite),
            st.crossing_pairs
        );
        for c in &self.constraints {
            let status = match c.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::Inactive => "-",
            };
            if c.status == Status::Fail {
                let _ = writeln!(s, "  {:<3} {status:<4} violation {:.4e}", c.constraint, c.violation);
            } else {
                let _ = writeln!(s, "  {:<3} {status}", c.constraint);
            }
        }
        let _ = writeln!(
            s,
            "{:>4} {:>4} {:>4} {:>9} {:>11} {:>11} {:>11} {:>9}",
            "bar", "u", "v", "length m", "area mm2", "stress MPa", "buckle MPa", "lambda"
        );
        for b in &self.bars {
            let _ = writeln!(
                s,
                "{:>4} {:>4} {:>4} {:>9.4} {:>11.2} {:>11.3} {:>11.3} {:>9.1}",
                b.index,
                b.u,
                b.v,
                b.length,
                b.area * 1e6,
                b.stress / 1e6,
                b.buckling_limit / 1e6,
                b.slenderness
            );
        }
        s
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Ablation and scheduling switches of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFlags {
    pub jobs: usize,
    pub no_diverse: bool,
    pub max_invalid: usize,
    pub episode_len: usize,
}

/// Inputs and counters of one command invocation.
///
/// The inputs alone reproduce the run when `flags.jobs` is 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub case: String,
    pub max_nodes: usize,
    pub seed: u64,
    pub search_iterations: u64,
    pub rl_steps: u64,
    pub kappa: f64,
    pub flags: RunFlags,
    pub out_dir: PathBuf,
    pub wall_clock_seconds: f64,
    pub iterations_done: u64,
    pub rl_steps_done: u64,
    pub episodes: u64,
    pub best_mass: Option<f64>,
    pub topology_count: usize,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifests always serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::read_layout;
    use crate::testbeds::load_case;
    use std::path::Path;

    fn sundial_p7() -> (TrussLayout, CaseConfig) {
        let layout = read_layout(Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/data/layouts/sundial-p7.json")))
            .unwrap()
            .unwrap();
        (layout, load_case("sundial", Some(7)).unwrap())
    }

    #[test]
    fn valid_layout_report() {
        let (layout, case) = sundial_p7();
        let r = ValidationReport::new(&layout, &case);
        assert!(r.is_valid());
        assert!(r.failing().is_empty());
        assert_eq!(r.bars.len(), layout.bar_count());
        assert_eq!(r.constraints.len(), 8);
        let text = r.to_text();
        assert!(text.contains("classification: valid"));
        assert!(text.contains(&format!("{:.3} kg", r.mass)));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["classification"], "valid");
        assert_eq!(json["bars"].as_array().unwrap().len(), layout.bar_count());
    }

    #[test]
    fn bare_supports_report_structural_failure() {
        let case = load_case("ten-bar-load1", None).unwrap();
        let r = ValidationReport::new(&case.initial_layout(), &case);
        assert_eq!(r.classification, Classification::InvalidStructural);
        assert!(r.failing().contains(&"g0"));
        assert!(r.to_text().contains("invalid (structural)"));
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert!(json["max_displacement"].is_null());
    }
}
