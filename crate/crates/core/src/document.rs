//! JSON layout documents.
//!
//! ```json
//! { "dim": 2,
//!   "nodes": [{ "pos": [0.0, 0.0], "support": true, "load": [0.0, 0.0], "fixed": true }],
//!   "bars":  [{ "u": 0, "v": 1, "section": { "area": 0.001 } }] }
//! ```
//!
//! All quantities are SI: metres, newtons, square metres. Tube sections use `{"d": .., "t": ..}`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::LayoutError;
use crate::model::{Bar, CrossSection, Dim, NodeSpec, TrussLayout, Vec3};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutDocument {
    pub dim: Dim,
    pub nodes: Vec<NodeDocument>,
    pub bars: Vec<BarDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDocument {
    pub pos: Vec<f64>,
    #[serde(default)]
    pub support: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub load: Option<Vec<f64>>,
    #[serde(default)]
    pub fixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarDocument {
    pub u: usize,
    pub v: usize,
    pub section: SectionDocument,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fixed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SectionDocument {
    Flat { area: f64 },
    Tube { d: f64, t: f64 },
}

impl From<&CrossSection> for SectionDocument {
    fn from(section: &CrossSection) -> Self {
        match *section {
            CrossSection::Flat2D { area } => SectionDocument::Flat { area },
            CrossSection::Tube3D {
                outer_diameter,
                thickness,
            } => SectionDocument::Tube {
                d: outer_diameter,
                t: thickness,
            },
        }
    }
}

impl From<SectionDocument> for CrossSection {
    fn from(doc: SectionDocument) -> Self {
        match doc {
            SectionDocument::Flat { area } => CrossSection::flat(area),
            SectionDocument::Tube { d, t } => CrossSection::tube(d, t),
        }
    }
}

fn to_vec3(values: &[f64], dim: Dim, what: String) -> Result<Vec3, LayoutError> {
    if values.len() != dim.count() {
        return Err(LayoutError::DimensionMismatch {
            expected: dim.count(),
            what,
        });
    }
    let mut out = [0.0; 3];
    out[..values.len()].copy_from_slice(values);
    Ok(out)
}

impl LayoutDocument {
    pub fn from_layout(layout: &TrussLayout) -> Self {
        let n = layout.dim().count();
        let nodes = layout
            .nodes()
            .iter()
            .map(|node| NodeDocument {
                pos: node.position[..n].to_vec(),
                support: node.is_support,
                load: Some(node.load[..n].to_vec()),
                fixed: node.is_fixed,
            })
            .collect();
        let bars = layout
            .bars()
            .iter()
            .map(|bar| BarDocument {
                u: bar.u,
                v: bar.v,
                section: SectionDocument::from(&bar.section),
                fixed: bar.is_fixed,
            })
            .collect();
        Self {
            dim: layout.dim(),
            nodes,
            bars,
        }
    }

    pub fn to_layout(&self) -> Result<TrussLayout, LayoutError> {
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let position = to_vec3(&node.pos, self.dim, format!("node {i} position"))?;
            let load = match &node.load {
                Some(load) => to_vec3(load, self.dim, format!("node {i} load"))?,
                None => [0.0; 3],
            };
            nodes.push(NodeSpec {
                position,
                is_support: node.support,
                load,
                is_fixed: node.fixed,
            });
        }
        let bars = self
            .bars
            .iter()
            .map(|bar| Bar {
                u: bar.u,
                v: bar.v,
                section: bar.section.into(),
                is_fixed: bar.fixed,
            })
            .collect();
        TrussLayout::new(self.dim, nodes, bars)
    }
}

pub fn serialize(layout: &TrussLayout) -> String {
    serde_json::to_string_pretty(&LayoutDocument::from_layout(layout)).expect("layout documents always serialize")
}

pub fn deserialize(text: &str) -> Result<TrussLayout, LayoutError> {
    let doc: LayoutDocument = serde_json::from_str(text)?;
    doc.to_layout()
}

pub fn read_layout(path: &Path) -> std::io::Result<Result<TrussLayout, LayoutError>> {
    Ok(deserialize(&std::fs::read_to_string(path)?))
}
