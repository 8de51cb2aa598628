//! Observations fed to the networks and the mapping from squashed actions to layout edits.

use crate::model::{CrossSection, Dim, TrussLayout};
use crate::testbeds::CaseConfig;
use crate::validity::AreaRule;

use super::autodiff::Matrix;

/// Largest node displacement per axis, in metres.
pub const MAX_MOVE: f64 = 0.5;

/// Node or bar the policy is asked to adjust.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Node(usize),
    Bar(usize),
}

impl Target {
    pub fn is_node(self) -> bool {
        matches!(self, Target::Node(_))
    }
}

/// Network input for one state.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    /// One row per node: normalized position, support flag, normalized load, fixed flag.
    pub nodes: Matrix,
    /// One row per bar: both endpoint positions and the normalized section.
    pub bars: Matrix,
    /// `adjacency[i][j]` is 1 when node `i` is an endpoint of bar `j`.
    pub adjacency: Matrix,
    pub target: Target,
}

impl Observation {
    pub fn token_count(&self) -> usize {
        self.nodes.rows + self.bars.rows
    }

    /// Additive attention bias over the node-then-bar token sequence: node–bar pairs that are
    /// not incident are masked out, every other pair attends freely.
    pub fn attention_bias(&self) -> Matrix {
        let (n, m) = (self.nodes.rows, self.bars.rows);
        let t = n + m;
        let mut bias = Matrix::zeros(t, t);
        for i in 0..n {
            for j in 0..m {
                if self.adjacency.get(i, j) == 0.0 {
                    bias.data[i * t + n + j] = MASKED;
                    bias.data[(n + j) * t + i] = MASKED;
                }
            }
        }
        bias
    }

    /// Row of the target token in the node-then-bar sequence.
    pub fn target_token(&self) -> usize {
        match self.target {
            Target::Node(i) => i,
            Target::Bar(j) => self.nodes.rows + j,
        }
    }
}

const MASKED: f64 = -1e9;

/// Case-specific feature scaling and action decoding.
#[derive(Debug, Clone, PartialEq)]
pub struct Featurizer {
    dim: Dim,
    center: [f64; 3],
    half_extent: [f64; 3],
    load_scale: f64,
    sections: SectionScale,
}

#[derive(Debug, Clone, PartialEq)]
enum SectionScale {
    Area { min: f64, max: f64 },
    Tube { diameter: (f64, f64), thickness: (f64, f64) },
}

fn unit(value: f64, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        2.0 * (value - lo) / (hi - lo) - 1.0
    } else {
        0.0
    }
}

/// Moves `value` toward `hi` for positive `u` and toward `lo` for negative `u`, proportionally.
fn stretch(value: f64, u: f64, (lo, hi): (f64, f64)) -> f64 {
    if u >= 0.0 {
        value + u * (hi - value).max(0.0)
    } else {
        value + u * (value - lo).max(0.0)
    }
}

impl Featurizer {
    pub fn new(case: &CaseConfig) -> Self {
        let b = &case.proposal_box;
        let mut center = [0.0; 3];
        let mut half_extent = [1.0; 3];
        for a in 0..case.dim.count() {
            center[a] = 0.5 * (b.min[a] + b.max[a]);
            let h = 0.5 * b.extent(a);
            half_extent[a] = if h > 0.0 { h } else { 1.0 };
        }
        let load_scale = case
            .fixed_nodes
            .iter()
            .flat_map(|n| n.load)
            .fold(0.0f64, |m, c| m.max(c.abs()));
        let sections = match &case.bounds.area {
            AreaRule::Range { min, max } => SectionScale::Area { min: *min, max: *max },
            AreaRule::Catalog(c) => SectionScale::Tube {
                diameter: c.diameter_range(),
                thickness: c.thickness_range(),
            },
        };
        Self {
            dim: case.dim,
            center,
            half_extent,
            load_scale: if load_scale > 0.0 { load_scale } else { 1.0 },
            sections,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim.count()
    }

    pub fn node_features(&self) -> usize {
        2 * self.dim() + 2
    }

    pub fn section_features(&self) -> usize {
        match self.sections {
            SectionScale::Area { .. } => 1,
            SectionScale::Tube { .. } => 2,
        }
    }

    pub fn bar_features(&self) -> usize {
        2 * self.dim() + self.section_features()
    }

    /// Payload size of the action for `target`.
    pub fn action_dim(&self, target: Target) -> usize {
        match target {
            Target::Node(_) => self.dim(),
            Target::Bar(_) => self.section_features(),
        }
    }

    /// Widest action payload over both target kinds.
    pub fn max_action_dim(&self) -> usize {
        self.dim().max(self.section_features())
    }

    fn position(&self, p: &[f64; 3], out: &mut Vec<f64>) {
        for a in 0..self.dim() {
            out.push((p[a] - self.center[a]) / self.half_extent[a]);
        }
    }

    fn section(&self, s: &CrossSection, out: &mut Vec<f64>) {
        match (&self.sections, s) {
            (SectionScale::Tube { diameter, thickness }, CrossSection::Tube3D { outer_diameter, thickness: t }) => {
                out.push(unit(*outer_diameter, *diameter));
                out.push(unit(*t, *thickness));
            }
            (SectionScale::Area { min, max }, s) => out.push(unit(s.area(), (*min, *max))),
            (SectionScale::Tube { .. }, s) => {
                out.push(0.0);
                out.push(0.0);
                debug_assert!(false, "flat section {s:?} in a tube case");
            }
        }
    }

    pub fn observe(&self, layout: &TrussLayout, target: Target) -> Observation {
        let (n, m) = (layout.node_count(), layout.bar_count());
        let mut nodes = Vec::with_capacity(n * self.node_features());
        for node in layout.nodes() {
            self.position(&node.position, &mut nodes);
            nodes.push(if node.is_support { 1.0 } else { 0.0 });
            for a in 0..self.dim() {
                nodes.push(node.load[a] / self.load_scale);
            }
            nodes.push(if node.is_fixed { 1.0 } else { 0.0 });
        }
        let mut bars = Vec::with_capacity(m * self.bar_features());
        let mut adjacency = Matrix::zeros(n, m);
        for (j, bar) in layout.bars().iter().enumerate() {
            self.position(&layout.node(bar.u).position, &mut bars);
            self.position(&layout.node(bar.v).position, &mut bars);
            self.section(&bar.section, &mut bars);
            adjacency.data[bar.u * m + j] = 1.0;
            adjacency.data[bar.v * m + j] = 1.0;
        }
        Observation {
            nodes: Matrix::from_vec(n, self.node_features(), nodes),
            bars: Matrix::from_vec(m, self.bar_features(), bars),
            adjacency,
            target,
        }
    }

    /// Applies a squashed action `u ∈ (−1, 1)^k` to `target`.
    ///
    /// Node moves scale `u` by [`MAX_MOVE`]. Section changes move each section parameter toward
    /// its upper bound for positive `u` and toward its lower bound for negative `u`; tube sections
    /// are then rounded up to the catalog. Returns `None` when no catalog entry fits.
    pub fn apply(&self, layout: &TrussLayout, case: &CaseConfig, target: Target, u: &[f64]) -> Option<TrussLayout> {
        assert_eq!(u.len(), self.action_dim(target), "action payload size");
        let mut next = layout.clone();
        match target {
            Target::Node(i) => {
                assert!(i < layout.node_count(), "target node out of range");
                let mut p = layout.node(i).position;
                for (a, ua) in u.iter().enumerate() {
                    p[a] += MAX_MOVE * (1.0 - 1e-12) * ua.clamp(-1.0, 1.0);
                }
                next.set_position(i, p);
            }
            Target::Bar(j) => {
                assert!(j < layout.bar_count(), "target bar out of range");
                let current = layout.bar(j).section;
                let section = match (&self.sections, &case.bounds.area) {
                    (SectionScale::Area { min, max }, _) => {
                        CrossSection::flat(stretch(current.area(), u[0], (*min, *max)))
                    }
                    (SectionScale::Tube { diameter, thickness }, AreaRule::Catalog(catalog)) => {
                        let CrossSection::Tube3D {
                            outer_diameter,
                            thickness: t,
                        } = current
                        else {
                            return None;
                        };
                        let d = stretch(outer_diameter, u[0], *diameter);
                        let t = stretch(t, u[1], *thickness);
                        catalog.section(catalog.round_up(d, t)?)
                    }
                    (SectionScale::Tube { .. }, AreaRule::Range { .. }) => unreachable!("tube scale implies a catalog"),
                };
                next.set_section(j, section);
            }
        }
        Some(next)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::document::read_layout;
    use crate::testbeds::load_case;

    fn sundial_p7() -> TrussLayout {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/layouts/sundial-p7.json");
        read_layout(std::path::Path::new(path)).unwrap().unwrap()
    }

    #[test]
    fn observation_shapes_and_adjacency() {
        let case = load_case("sundial", Some(7)).unwrap();
        let f = Featurizer::new(&case);
        let layout = sundial_p7();
        let obs = f.observe(&layout, Target::Bar(2));
        assert_eq!((obs.nodes.rows, obs.nodes.cols), (7, 8));
        assert_eq!((obs.bars.rows, obs.bars.cols), (13, 8));
        assert_eq!(obs.token_count(), 20);
        for (j, bar) in layout.bars().iter().enumerate() {
            for i in 0..7 {
                let expected = if i == bar.u || i == bar.v { 1.0 } else { 0.0 };
                assert_eq!(obs.adjacency.get(i, j), expected);
            }
        }
        assert_eq!(obs.target_token(), 9);
        assert_eq!(f.action_dim(Target::Node(0)), 3);
        assert_eq!(f.action_dim(Target::Bar(0)), 2);
    }

    #[test]
    fn node_moves_stay_inside_the_box() {
        let case = load_case("sundial", Some(7)).unwrap();
        let f = Featurizer::new(&case);
        let layout = sundial_p7();
        let next = f.apply(&layout, &case, Target::Node(5), &[1.0, -1.0, 0.3]).unwrap();
        let (a, b) = (layout.node(5).position, next.node(5).position);
        for k in 0..3 {
            assert!((b[k] - a[k]).abs() < MAX_MOVE);
        }
        assert!((b[2] - a[2] - 0.15).abs() < 1e-12);
    }

    #[test]
    fn tube_changes_land_on_the_catalog() {
        let case = load_case("sundial", Some(7)).unwrap();
        let f = Featurizer::new(&case);
        let layout = sundial_p7();
        let cat = case.catalog().unwrap();
        for u in [[-0.9, 0.2], [0.0, 0.0], [0.5, -0.5], [0.99, 0.99]] {
            let next = f.apply(&layout, &case, Target::Bar(7), &u).unwrap();
            assert!(cat.contains(&next.bar(7).section));
        }
        let big = f.apply(&layout, &case, Target::Bar(7), &[0.999_999, 0.999_999]).unwrap();
        assert!(big.bar(7).section.area() >= layout.bar(7).section.area());
    }

    #[test]
    fn area_changes_respect_the_range() {
        let case = load_case("ten-bar-load1", Some(6)).unwrap();
        let f = Featurizer::new(&case);
        let AreaRule::Range { min, max } = case.bounds.area.clone() else { panic!() };
        let mut layout = case.initial_layout();
        layout.push_bar(crate::model::Bar::new(0, 2, CrossSection::flat(0.01))).unwrap();
        let down = f.apply(&layout, &case, Target::Bar(0), &[-1.0]).unwrap();
        assert!((down.bar(0).section.area() - min).abs() < 1e-15);
        let up = f.apply(&layout, &case, Target::Bar(0), &[0.5]).unwrap();
        assert!((up.bar(0).section.area() - (0.01 + 0.5 * (max - 0.01))).abs() < 1e-15);
        assert_eq!(f.apply(&layout, &case, Target::Bar(0), &[0.0]).unwrap(), layout);
    }

    #[test]
    fn masked_pairs_are_exactly_the_non_incident_ones() {
        let case = load_case("sundial", Some(7)).unwrap();
        let f = Featurizer::new(&case);
        let obs = f.observe(&sundial_p7(), Target::Node(4));
        let bias = obs.attention_bias();
        let masked = bias.data.iter().filter(|b| **b != 0.0).count();
        assert_eq!(masked, 2 * (7 * 13 - 2 * 13));
    }
}
