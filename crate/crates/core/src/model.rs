//! Truss data model: nodes, bars, cross-sections and the layout graph.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LayoutError;

/// Point or vector in model space. 2D layouts keep the third component at zero.
pub type Vec3 = [f64; 3];

pub(crate) fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Spatial dimensionality of a layout or case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dim {
    Two,
    Three,
}

impl Dim {
    pub fn count(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Axis that gravity acts along (y in 2D, z in 3D).
    pub fn vertical_axis(self) -> usize {
        self.count() - 1
    }
}

impl TryFrom<u8> for Dim {
    type Error = String;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        match value {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            other => Err(format!("dimension must be 2 or 3, got {other}")),
        }
    }
}

impl From<Dim> for u8 {
    fn from(dim: Dim) -> u8 {
        dim.count() as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeSpec {
    /// Position in metres.
    pub position: Vec3,
    pub is_support: bool,
    /// External load in newtons.
    pub load: Vec3,
    /// Member of the initial layout; never moved or deleted.
    pub is_fixed: bool,
}

impl NodeSpec {
    /// A free node added by search, with no support and no load.
    pub fn free(position: Vec3) -> Self {
        Self {
            position,
            is_support: false,
            load: [0.0; 3],
            is_fixed: false,
        }
    }

    pub fn is_loaded(&self) -> bool {
        self.load.iter().any(|c| *c != 0.0)
    }
}

/// Bar cross-section. 2D bars carry an area directly; 3D bars are hollow round tubes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CrossSection {
    Flat2D { area: f64 },
    Tube3D { outer_diameter: f64, thickness: f64 },
}

impl CrossSection {
    pub fn tube(outer_diameter: f64, thickness: f64) -> Self {
        CrossSection::Tube3D {
            outer_diameter,
            thickness,
        }
    }

    pub fn flat(area: f64) -> Self {
        CrossSection::Flat2D { area }
    }

    /// Cross-sectional area in m². Tubes use the annulus area.
    pub fn area(&self) -> f64 {
        match *self {
            CrossSection::Flat2D { area } => area,
            CrossSection::Tube3D {
                outer_diameter: d,
                thickness: t,
            } => {
                let inner = d - 2.0 * t;
                PI * (d * d - inner * inner) / 4.0
            }
        }
    }

    /// Second moment of area in m⁴.
    ///
    /// Flat 2D sections are treated as solid circles of the same area, `I = z²/(4π)`.
    pub fn moment_of_inertia(&self) -> f64 {
        match *self {
            CrossSection::Flat2D { area } => area * area / (4.0 * PI),
            CrossSection::Tube3D {
                outer_diameter: d,
                thickness: t,
            } => {
                let inner = d - 2.0 * t;
                PI * (d.powi(4) - inner.powi(4)) / 64.0
            }
        }
    }

    pub fn is_well_formed(&self) -> bool {
        match *self {
            CrossSection::Flat2D { area } => area.is_finite() && area > 0.0,
            CrossSection::Tube3D {
                outer_diameter,
                thickness,
            } => {
                outer_diameter.is_finite()
                    && thickness.is_finite()
                    && thickness > 0.0
                    && 2.0 * thickness <= outer_diameter * (1.0 + 1e-12)
            }
        }
    }

    fn matches_dim(&self, dim: Dim) -> bool {
        matches!(
            (self, dim),
            (CrossSection::Flat2D { .. }, Dim::Two) | (CrossSection::Tube3D { .. }, Dim::Three)
        )
    }
}

/// Section area as a free function, mirroring [`CrossSection::area`].
pub fn section_area(section: &CrossSection) -> f64 {
    section.area()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bar {
    pub u: usize,
    pub v: usize,
    pub section: CrossSection,
    pub is_fixed: bool,
}

impl Bar {
    pub fn new(u: usize, v: usize, section: CrossSection) -> Self {
        Self {
            u,
            v,
            section,
            is_fixed: false,
        }
    }

    /// Endpoints as an ordered pair `(min, max)`.
    pub fn key(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }

    pub fn connects(&self, a: usize, b: usize) -> bool {
        self.key() == (a.min(b), a.max(b))
    }

    pub fn touches(&self, node: usize) -> bool {
        self.u == node || self.v == node
    }
}

/// A truss layout `G = (V, E)`.
///
/// Nodes are addressed by list index. Fixed nodes from the originating case occupy the
/// lowest indices so that topology keys are stable under the identity permutation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrussLayout {
    dim: Dim,
    nodes: Vec<NodeSpec>,
    bars: Vec<Bar>,
}

impl TrussLayout {
    pub fn new(dim: Dim, nodes: Vec<NodeSpec>, bars: Vec<Bar>) -> Result<Self, LayoutError> {
        let mut layout = Self {
            dim,
            nodes: Vec::with_capacity(nodes.len()),
            bars: Vec::with_capacity(bars.len()),
        };
        for node in nodes {
            layout.push_node(node)?;
        }
        for bar in bars {
            layout.push_bar(bar)?;
        }
        Ok(layout)
    }

    /// Layout with only nodes and no bars.
    pub fn from_nodes(dim: Dim, nodes: Vec<NodeSpec>) -> Result<Self, LayoutError> {
        Self::new(dim, nodes, Vec::new())
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    pub fn node(&self, index: usize) -> &NodeSpec {
        &self.nodes[index]
    }

    pub fn bar(&self, index: usize) -> &Bar {
        &self.bars[index]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn bar_count(&self) -> usize {
        self.bars.len()
    }

    pub fn push_node(&mut self, node: NodeSpec) -> Result<usize, LayoutError> {
        let n = self.dim.count();
        if node.position[n..].iter().chain(node.load[n..].iter()).any(|c| *c != 0.0) {
            return Err(LayoutError::DimensionMismatch {
                expected: n,
                what: format!("node {}", self.nodes.len()),
            });
        }
        if node.position.iter().chain(node.load.iter()).any(|c| !c.is_finite()) {
            return Err(LayoutError::NonFinite(format!("node {}", self.nodes.len())));
        }
        self.nodes.push(node);
        Ok(self.nodes.len() - 1)
    }

    pub fn push_bar(&mut self, bar: Bar) -> Result<usize, LayoutError> {
        let count = self.nodes.len();
        for index in [bar.u, bar.v] {
            if index >= count {
                return Err(LayoutError::DanglingNode {
                    bar: self.bars.len(),
                    index,
                    node_count: count,
                });
            }
        }
        if bar.u == bar.v {
            return Err(LayoutError::SelfLoop(bar.u));
        }
        if self.has_bar(bar.u, bar.v) {
            let (u, v) = bar.key();
            return Err(LayoutError::DuplicateBar { u, v });
        }
        if !bar.section.matches_dim(self.dim) || !bar.section.is_well_formed() {
            return Err(LayoutError::BadSection(self.bars.len()));
        }
        self.bars.push(bar);
        Ok(self.bars.len() - 1)
    }

    pub fn has_bar(&self, a: usize, b: usize) -> bool {
        self.bars.iter().any(|bar| bar.connects(a, b))
    }

    /// Moves a node. The caller is responsible for keeping fixed nodes in place.
    pub fn set_position(&mut self, node: usize, position: Vec3) {
        let n = self.dim.count();
        let mut p = position;
        for c in p.iter_mut().skip(n) {
            *c = 0.0;
        }
        self.nodes[node].position = p;
    }

    pub fn set_section(&mut self, bar: usize, section: CrossSection) {
        debug_assert!(section.matches_dim(self.dim));
        self.bars[bar].section = section;
    }

    pub fn bar_vector(&self, bar: usize) -> Vec3 {
        let b = &self.bars[bar];
        sub(&self.nodes[b.v].position, &self.nodes[b.u].position)
    }

    pub fn bar_length(&self, bar: usize) -> f64 {
        norm(&self.bar_vector(bar))
    }

    pub fn pair_length(&self, a: usize, b: usize) -> f64 {
        norm(&sub(&self.nodes[a].position, &self.nodes[b].position))
    }

    /// Σ density · area · length over all bars, in kg.
    pub fn mass(&self, density: f64) -> f64 {
        density
            * (0..self.bars.len())
                .map(|i| self.bars[i].section.area() * self.bar_length(i))
                .fold(0.0, |s, m| s + m)
    }

    pub fn topology_key(&self) -> TopologyKey {
        let mut edges: Vec<(usize, usize)> = self.bars.iter().map(Bar::key).collect();
        edges.sort_unstable();
        TopologyKey {
            node_count: self.nodes.len(),
            edges,
        }
    }

    pub fn fixed_node_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_fixed).count()
    }

    pub fn support_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.is_support).count()
    }
}

/// Mass of a layout for the given density (kg/m³).
pub fn mass(layout: &TrussLayout, density: f64) -> f64 {
    layout.mass(density)
}

/// Canonical edge-set encoding under the identity node permutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TopologyKey {
    pub node_count: usize,
    pub edges: Vec<(usize, usize)>,
}

impl fmt::Display for TopologyKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}:", self.node_count)?;
        for (i, (u, v)) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{u}-{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_node_layout(area: f64) -> TrussLayout {
        TrussLayout::new(
            Dim::Two,
            vec![NodeSpec::free([0.0, 0.0, 0.0]), NodeSpec::free([2.0, 0.0, 0.0])],
            vec![Bar::new(0, 1, CrossSection::flat(area))],
        )
        .unwrap()
    }

    #[test]
    fn empty_layout_has_zero_mass() {
        let layout = TrussLayout::from_nodes(Dim::Two, vec![NodeSpec::free([0.0; 3])]).unwrap();
        assert_eq!(layout.mass(2767.99), 0.0);
    }

    #[test]
    fn single_bar_mass() {
        // 10 cm² over 2 m at 2767.99 kg/m³
        let layout = two_node_layout(0.001);
        assert!((layout.mass(2767.99) - 5.53598).abs() < 1e-9);
    }

    #[test]
    fn tube_area_and_solid_limit() {
        let area = CrossSection::tube(0.025, 0.0015).area();
        assert!((area * 1e6 - 110.741_140_5).abs() < 1e-4, "{}", area * 1e6);
        let rod = CrossSection::tube(0.02, 0.01).area();
        assert!((rod - PI * 0.02 * 0.02 / 4.0).abs() < 1e-15);
        assert_eq!(section_area(&CrossSection::flat(0.0025)), 0.0025);
    }

    #[test]
    fn rejects_dangling_duplicate_and_loop() {
        let nodes = vec![NodeSpec::free([0.0; 3]), NodeSpec::free([1.0, 0.0, 0.0])];
        let s = CrossSection::flat(1e-3);
        let err = TrussLayout::new(Dim::Two, nodes.clone(), vec![Bar::new(0, 2, s)]).unwrap_err();
        assert!(matches!(err, LayoutError::DanglingNode { index: 2, .. }));
        let err = TrussLayout::new(Dim::Two, nodes.clone(), vec![Bar::new(0, 1, s), Bar::new(1, 0, s)])
            .unwrap_err();
        assert!(matches!(err, LayoutError::DuplicateBar { u: 0, v: 1 }));
        let err = TrussLayout::new(Dim::Two, nodes, vec![Bar::new(1, 1, s)]).unwrap_err();
        assert!(matches!(err, LayoutError::SelfLoop(1)));
    }

    #[test]
    fn rejects_wrong_section_kind() {
        let nodes = vec![NodeSpec::free([0.0; 3]), NodeSpec::free([1.0, 0.0, 0.0])];
        let err = TrussLayout::new(Dim::Two, nodes, vec![Bar::new(0, 1, CrossSection::tube(0.03, 0.0015))])
            .unwrap_err();
        assert!(matches!(err, LayoutError::BadSection(0)));
    }

    #[test]
    fn topology_key_ignores_order_and_geometry() {
        let nodes = vec![
            NodeSpec::free([0.0; 3]),
            NodeSpec::free([1.0, 0.0, 0.0]),
            NodeSpec::free([0.0, 1.0, 0.0]),
        ];
        let s = CrossSection::flat(1e-3);
        let a = TrussLayout::new(Dim::Two, nodes.clone(), vec![Bar::new(0, 1, s), Bar::new(2, 1, s)]).unwrap();
        let mut moved = nodes.clone();
        moved[2].position = [5.0, 5.0, 0.0];
        let b = TrussLayout::new(
            Dim::Two,
            moved,
            vec![Bar::new(1, 2, CrossSection::flat(7e-3)), Bar::new(1, 0, s)],
        )
        .unwrap();
        assert_eq!(a.topology_key(), b.topology_key());
        let c = TrussLayout::new(Dim::Two, nodes, vec![Bar::new(0, 1, s)]).unwrap();
        assert_ne!(a.topology_key(), c.topology_key());
        assert_eq!(a.topology_key().to_string(), "n3:0-1,1-2");
    }

    proptest! {
        #[test]
        fn mass_grows_with_area_and_length(area in 1e-5f64..1e-2, grow in 1.01f64..3.0, len in 0.1f64..20.0) {
            let base = TrussLayout::new(
                Dim::Two,
                vec![NodeSpec::free([0.0; 3]), NodeSpec::free([len, 0.0, 0.0])],
                vec![Bar::new(0, 1, CrossSection::flat(area))],
            ).unwrap();
            let mut thicker = base.clone();
            thicker.set_section(0, CrossSection::flat(area * grow));
            let mut longer = base.clone();
            longer.set_position(1, [len * grow, 0.0, 0.0]);
            prop_assert!(thicker.mass(1000.0) > base.mass(1000.0));
            prop_assert!(longer.mass(1000.0) > base.mass(1000.0));
        }

        #[test]
        fn tube_area_monotone(d in 0.02f64..0.3, t in 0.001f64..0.005, bump in 1e-4f64..1e-3) {
            prop_assume!(2.0 * (t + bump) <= d);
            let a = CrossSection::tube(d, t).area();
            prop_assert!(CrossSection::tube(d + bump, t).area() > a);
            prop_assert!(CrossSection::tube(d, t + bump).area() > a);
        }

        #[test]
        fn mass_invariant_to_bar_order(seed in 0u64..1000) {
            use rand::{Rng, SeedableRng, seq::SliceRandom};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let nodes: Vec<_> = (0..5).map(|_| NodeSpec::free([rng.random::<f64>(), rng.random::<f64>(), 0.0])).collect();
            let mut bars = Vec::new();
            for u in 0..5 { for v in (u + 1)..5 { bars.push(Bar::new(u, v, CrossSection::flat(rng.random_range(1e-4..1e-2)))); } }
            let a = TrussLayout::new(Dim::Two, nodes.clone(), bars.clone()).unwrap();
            bars.shuffle(&mut rng);
            let b = TrussLayout::new(Dim::Two, nodes, bars).unwrap();
            prop_assert!((a.mass(100.0) - b.mass(100.0)).abs() < 1e-12 * a.mass(100.0));
            prop_assert_eq!(a.topology_key(), b.topology_key());
        }
    }
}
