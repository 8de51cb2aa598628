//! Benchmark cases loaded from TOML case files.
//!
//! A case file lists the fixed nodes, material, constraint bounds and section regime of a
//! problem. Values may be given in engineering units declared in a `[units]` table; they
//! are converted to SI on load. The four bundled cases live in `data/cases/`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalog::SectionCatalog;
use crate::error::CaseError;
use crate::fea::MaterialSpec;
use crate::model::{Dim, NodeSpec, TrussLayout, Vec3};
use crate::validity::{ActiveSet, AreaRule, BoxDomain, ConstraintBounds, DEFAULT_CLEARANCE};

const BUNDLED: [(&str, &str); 4] = [
    ("ten-bar-load1", include_str!("../data/cases/ten-bar-load1.toml")),
    ("ten-bar-load2", include_str!("../data/cases/ten-bar-load2.toml")),
    ("seventeen-bar", include_str!("../data/cases/seventeen-bar.toml")),
    ("sundial", include_str!("../data/cases/sundial.toml")),
];

pub fn case_names() -> impl Iterator<Item = &'static str> {
    BUNDLED.iter().map(|(name, _)| *name)
}

/// A fully resolved problem instance, all quantities SI.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    pub name: String,
    pub dim: Dim,
    /// Initial layout nodes: supports and loaded nodes.
    pub fixed_nodes: Vec<NodeSpec>,
    /// Display label for each fixed node.
    pub node_labels: Vec<String>,
    pub material: MaterialSpec,
    /// Constraint bounds; `bounds.area` doubles as the section regime.
    pub bounds: ConstraintBounds,
    /// Maximum node count of generated layouts.
    pub max_nodes: usize,
    pub allowed_node_counts: Vec<usize>,
    /// Mass used to scale rewards, kg.
    pub reference_mass: f64,
    /// Region from which new node positions are drawn.
    pub proposal_box: BoxDomain,
}

impl CaseConfig {
    /// Reward scale: ten times the squared reference mass.
    pub fn kappa(&self) -> f64 {
        10.0 * self.reference_mass * self.reference_mass
    }

    pub fn sections(&self) -> &AreaRule {
        &self.bounds.area
    }

    pub fn catalog(&self) -> Option<&SectionCatalog> {
        match &self.bounds.area {
            AreaRule::Catalog(c) => Some(c),
            AreaRule::Range { .. } => None,
        }
    }

    pub fn initial_layout(&self) -> TrussLayout {
        TrussLayout::from_nodes(self.dim, self.fixed_nodes.clone()).expect("case nodes are finite")
    }

    pub fn mass(&self, layout: &TrussLayout) -> f64 {
        layout.mass(self.material.density)
    }

    /// Same case with a different node budget.
    pub fn with_max_nodes(mut self, p: usize) -> Result<Self, CaseError> {
        if !self.allowed_node_counts.contains(&p) {
            return Err(CaseError::NodeCount {
                case: self.name.clone(),
                requested: p,
                allowed: self.allowed_node_counts.clone(),
            });
        }
        self.max_nodes = p;
        Ok(self)
    }

    /// Case file equivalent of this config, in SI units.
    pub fn to_file(&self) -> CaseFile {
        let n = self.dim.count();
        let (sections, area) = match &self.bounds.area {
            AreaRule::Range { min, max } => (SectionRegime::Continuous, Some([*min, *max])),
            AreaRule::Catalog(_) => (SectionRegime::Catalog, None),
        };
        let finite_pair = |(lo, hi): (f64, f64)| (lo.is_finite() || hi.is_finite()).then_some([lo, hi]);
        let finite = |v: f64| v.is_finite().then_some(v);
        CaseFile {
            name: self.name.clone(),
            dim: self.dim,
            node_counts: self.allowed_node_counts.clone(),
            reference_mass: self.reference_mass,
            self_weight: self.material.include_self_weight,
            units: Units::default(),
            material: MaterialFile {
                youngs_modulus: self.material.youngs_modulus,
                density: self.material.density,
            },
            sections: SectionsFile { regime: sections, area },
            bounds: BoundsFile {
                active: self.bounds.active,
                domain: self.bounds.domain.map(|d| BoxFile::from_domain(&d, n)),
                stress: finite_pair(self.bounds.stress),
                max_displacement: finite(self.bounds.max_displacement),
                slenderness_tension: finite(self.bounds.slenderness_tension),
                slenderness_compression: finite(self.bounds.slenderness_compression),
                length: finite_pair(self.bounds.length),
                clearance: Some(self.bounds.intersection_clearance),
            },
            proposal_box: Some(BoxFile::from_domain(&self.proposal_box, n)),
            nodes: self
                .fixed_nodes
                .iter()
                .zip(&self.node_labels)
                .map(|(node, label)| NodeFile {
                    label: label.clone(),
                    pos: node.position[..n].to_vec(),
                    support: node.is_support,
                    load: node.is_loaded().then(|| node.load[..n].to_vec()),
                })
                .collect(),
        }
    }
}

/// Loads a bundled case by name. `p = None` takes the smallest published node count.
pub fn load_case(name: &str, p: Option<usize>) -> Result<CaseConfig, CaseError> {
    let text = BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| CaseError::UnknownCase(name.to_string()))?;
    parse_case(text, p)
}

/// Loads a case file from disk.
pub fn load_case_file(path: &Path, p: Option<usize>) -> Result<CaseConfig, CaseError> {
    let text = std::fs::read_to_string(path).map_err(|source| CaseError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_case(&text, p)
}

/// Bundled name, or a path to a `.toml` file.
pub fn resolve_case(name_or_path: &str, p: Option<usize>) -> Result<CaseConfig, CaseError> {
    if BUNDLED.iter().any(|(n, _)| *n == name_or_path) {
        load_case(name_or_path, p)
    } else if name_or_path.ends_with(".toml") || Path::new(name_or_path).exists() {
        load_case_file(Path::new(name_or_path), p)
    } else {
        Err(CaseError::UnknownCase(name_or_path.to_string()))
    }
}

pub fn parse_case(text: &str, p: Option<usize>) -> Result<CaseConfig, CaseError> {
    let file: CaseFile = toml::from_str(text)?;
    let catalog = match file.sections.regime {
        SectionRegime::Catalog => Some(SectionCatalog::from_env()?),
        SectionRegime::Continuous => None,
    };
    let case = file.resolve(catalog)?;
    match p {
        Some(p) => case.with_max_nodes(p),
        None => Ok(case),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LengthUnit {
    #[default]
    #[serde(rename = "m")]
    Metre,
    #[serde(rename = "mm")]
    Millimetre,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ForceUnit {
    #[default]
    #[serde(rename = "N")]
    Newton,
    #[serde(rename = "kN")]
    Kilonewton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum StressUnit {
    #[default]
    #[serde(rename = "Pa")]
    Pascal,
    #[serde(rename = "MPa")]
    Megapascal,
    #[serde(rename = "GPa")]
    Gigapascal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AreaUnit {
    #[default]
    #[serde(rename = "m2")]
    SquareMetre,
    #[serde(rename = "cm2")]
    SquareCentimetre,
    #[serde(rename = "mm2")]
    SquareMillimetre,
}

impl LengthUnit {
    fn to_si(self, v: f64) -> f64 {
        match self {
            LengthUnit::Metre => v,
            LengthUnit::Millimetre => v / 1e3,
        }
    }
}

impl ForceUnit {
    fn to_si(self, v: f64) -> f64 {
        match self {
            ForceUnit::Newton => v,
            ForceUnit::Kilonewton => v * 1e3,
        }
    }
}

impl StressUnit {
    fn to_si(self, v: f64) -> f64 {
        match self {
            StressUnit::Pascal => v,
            StressUnit::Megapascal => v * 1e6,
            StressUnit::Gigapascal => v * 1e9,
        }
    }
}

impl AreaUnit {
    fn to_si(self, v: f64) -> f64 {
        match self {
            AreaUnit::SquareMetre => v,
            AreaUnit::SquareCentimetre => v / 1e4,
            AreaUnit::SquareMillimetre => v / 1e6,
        }
    }
}

/// Unit tags for a case file. Density is always kg/m³.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Units {
    pub length: LengthUnit,
    pub force: ForceUnit,
    /// Applies to stresses and Young's modulus.
    pub stress: StressUnit,
    pub area: AreaUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SectionRegime {
    Continuous,
    Catalog,
}

/// On-disk case layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CaseFile {
    pub name: String,
    pub dim: Dim,
    pub node_counts: Vec<usize>,
    pub reference_mass: f64,
    #[serde(default)]
    pub self_weight: bool,
    #[serde(default)]
    pub units: Units,
    pub material: MaterialFile,
    pub sections: SectionsFile,
    pub bounds: BoundsFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proposal_box: Option<BoxFile>,
    pub nodes: Vec<NodeFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialFile {
    pub youngs_modulus: f64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionsFile {
    pub regime: SectionRegime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsFile {
    pub active: ActiveSet,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<BoxFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stress: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_displacement: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slenderness_tension: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slenderness_compression: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clearance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxFile {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl BoxFile {
    fn from_domain(domain: &BoxDomain, n: usize) -> Self {
        Self {
            min: domain.min[..n].to_vec(),
            max: domain.max[..n].to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeFile {
    pub label: String,
    pub pos: Vec<f64>,
    #[serde(default)]
    pub support: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<Vec<f64>>,
}

impl CaseFile {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("case files always serialize")
    }

    /// Converts to SI and drops fixed nodes that are neither supported nor loaded.
    pub fn resolve(&self, catalog: Option<SectionCatalog>) -> Result<CaseConfig, CaseError> {
        let u = self.units;
        let n = self.dim.count();
        let invalid = |msg: String| CaseError::Invalid(format!("{}: {msg}", self.name));
        let vec = |values: &[f64], what: &str, f: &dyn Fn(f64) -> f64| -> Result<Vec3, CaseError> {
            if values.len() != n {
                return Err(invalid(format!("{what} needs {n} components")));
            }
            let mut out = [0.0; 3];
            for (o, v) in out.iter_mut().zip(values) {
                *o = f(*v);
            }
            Ok(out)
        };
        let len = |v: f64| u.length.to_si(v);
        let boxed = |b: &BoxFile, what: &str| -> Result<BoxDomain, CaseError> {
            let domain = BoxDomain {
                min: vec(&b.min, what, &len)?,
                max: vec(&b.max, what, &len)?,
            };
            if (0..n).any(|a| domain.min[a] > domain.max[a]) {
                return Err(invalid(format!("{what} has min > max")));
            }
            Ok(domain)
        };

        let mut fixed_nodes = Vec::new();
        let mut node_labels = Vec::new();
        for node in &self.nodes {
            let position = vec(&node.pos, &format!("node {}", node.label), &len)?;
            let load = match &node.load {
                Some(load) => vec(load, &format!("load on {}", node.label), &|v| u.force.to_si(v))?,
                None => [0.0; 3],
            };
            let spec = NodeSpec {
                position,
                is_support: node.support,
                load,
                is_fixed: true,
            };
            if spec.is_support || spec.is_loaded() {
                fixed_nodes.push(spec);
                node_labels.push(node.label.clone());
            }
        }
        if fixed_nodes.iter().all(|n| !n.is_support) {
            return Err(invalid("no support nodes".into()));
        }

        let area = match (self.sections.regime, self.sections.area, catalog) {
            (SectionRegime::Continuous, Some([lo, hi]), _) if 0.0 < lo && lo <= hi => AreaRule::Range {
                min: u.area.to_si(lo),
                max: u.area.to_si(hi),
            },
            (SectionRegime::Continuous, _, _) => {
                return Err(invalid("continuous sections need area = [min, max] with 0 < min <= max".into()))
            }
            (SectionRegime::Catalog, _, Some(catalog)) => AreaRule::Catalog(catalog),
            (SectionRegime::Catalog, _, None) => return Err(invalid("catalog regime without a catalog".into())),
        };
        if matches!(area, AreaRule::Catalog(_)) != (self.dim == Dim::Three) {
            return Err(invalid("catalog sections are used exactly for 3D cases".into()));
        }

        let stress = |v: f64| u.stress.to_si(v);
        let b = &self.bounds;
        let pair = |p: Option<[f64; 2]>, f: &dyn Fn(f64) -> f64, default: (f64, f64)| {
            p.map(|[lo, hi]| (f(lo), f(hi))).unwrap_or(default)
        };
        let domain = b.domain.as_ref().map(|d| boxed(d, "domain")).transpose()?;
        let bounds = ConstraintBounds {
            domain,
            area,
            stress: pair(b.stress, &stress, (f64::NEG_INFINITY, f64::INFINITY)),
            max_displacement: b.max_displacement.map(len).unwrap_or(f64::INFINITY),
            slenderness_tension: b.slenderness_tension.unwrap_or(f64::INFINITY),
            slenderness_compression: b.slenderness_compression.unwrap_or(f64::INFINITY),
            length: pair(b.length, &len, (0.0, f64::INFINITY)),
            active: b.active,
            intersection_clearance: b.clearance.map(len).unwrap_or(DEFAULT_CLEARANCE),
        };
        if bounds.stress.0 > bounds.stress.1 || bounds.length.0 > bounds.length.1 {
            return Err(invalid("range bounds need min <= max".into()));
        }

        let proposal_box = match (&self.proposal_box, &domain) {
            (Some(p), _) => boxed(p, "proposal_box")?,
            (None, Some(d)) => *d,
            (None, None) => return Err(invalid("unbounded case needs a proposal_box".into())),
        };

        let mut allowed = self.node_counts.clone();
        allowed.sort_unstable();
        allowed.dedup();
        let max_nodes = *allowed.first().ok_or_else(|| invalid("node_counts is empty".into()))?;
        if max_nodes < fixed_nodes.len() {
            return Err(invalid("node count below the number of fixed nodes".into()));
        }
        if !(self.reference_mass > 0.0) {
            return Err(invalid("reference_mass must be positive".into()));
        }

        Ok(CaseConfig {
            name: self.name.clone(),
            dim: self.dim,
            fixed_nodes,
            node_labels,
            material: MaterialSpec::new(stress(self.material.youngs_modulus), self.material.density, self.self_weight),
            bounds,
            max_nodes,
            allowed_node_counts: allowed,
            reference_mass: self.reference_mass,
            proposal_box,
        })
    }
}
