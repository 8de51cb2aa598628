//! Store of the lightest valid layouts, bucketed by topology.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::document::LayoutDocument;
use crate::error::LayoutError;
use crate::model::{TopologyKey, TrussLayout};

/// Entries kept per topology and in the global list.
pub const CAPACITY: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct DiverseEntry {
    pub layout: TrussLayout,
    /// kg.
    pub mass: f64,
}

/// Per-topology lightest-five lists plus a global lightest-five list.
///
/// Lists are sorted by ascending mass; among equal masses the earlier insertion wins.
/// Callers are responsible for offering only valid layouts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DiverseSet {
    by_topology: BTreeMap<TopologyKey, Vec<DiverseEntry>>,
    global: Vec<DiverseEntry>,
}

fn insert_sorted(list: &mut Vec<DiverseEntry>, entry: &DiverseEntry) -> bool {
    if list.iter().any(|e| e.layout == entry.layout) {
        return false;
    }
    let pos = list.partition_point(|e| e.mass <= entry.mass);
    if pos >= CAPACITY {
        return false;
    }
    list.insert(pos, entry.clone());
    list.truncate(CAPACITY);
    true
}

impl DiverseSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Offers a valid layout. Returns whether either list changed.
    pub fn offer(&mut self, layout: &TrussLayout, mass: f64) -> bool {
        if !mass.is_finite() {
            return false;
        }
        let entry = DiverseEntry {
            layout: layout.clone(),
            mass,
        };
        let bucket = self.by_topology.entry(layout.topology_key()).or_default();
        let in_bucket = insert_sorted(bucket, &entry);
        let in_global = insert_sorted(&mut self.global, &entry);
        in_bucket || in_global
    }

    pub fn is_empty(&self) -> bool {
        self.by_topology.is_empty()
    }

    /// Number of stored layouts across all topologies.
    pub fn len(&self) -> usize {
        self.by_topology.values().map(Vec::len).sum()
    }

    pub fn topology_count(&self) -> usize {
        self.by_topology.len()
    }

    pub fn topologies(&self) -> impl Iterator<Item = (&TopologyKey, &[DiverseEntry])> {
        self.by_topology.iter().map(|(k, v)| (k, v.as_slice()))
    }

    /// All per-topology entries in key order.
    pub fn entries(&self) -> impl Iterator<Item = &DiverseEntry> {
        self.by_topology.values().flatten()
    }

    pub fn global(&self) -> &[DiverseEntry] {
        &self.global
    }

    pub fn best(&self) -> Option<&DiverseEntry> {
        self.global.first()
    }

    pub fn best_mass(&self) -> Option<f64> {
        self.best().map(|e| e.mass)
    }

    /// Uniform draw over all per-topology entries.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<&DiverseEntry> {
        let n = self.len();
        if n == 0 {
            return None;
        }
        self.entries().nth(rng.random_range(0..n))
    }

    /// Set built from the global list only.
    pub fn global_only(&self) -> Self {
        let mut out = Self::new();
        for e in &self.global {
            out.offer(&e.layout, e.mass);
        }
        out
    }

    pub fn to_document(&self) -> DiverseDocument {
        let doc = |e: &DiverseEntry| EntryDocument {
            mass: e.mass,
            layout: LayoutDocument::from_layout(&e.layout),
        };
        DiverseDocument {
            topologies: self
                .by_topology
                .iter()
                .map(|(key, entries)| TopologyDocument {
                    key: key.to_string(),
                    entries: entries.iter().map(doc).collect(),
                })
                .collect(),
            global: self.global.iter().map(doc).collect(),
        }
    }

    /// Rebuilds the set; topology keys are recomputed from the layouts.
    pub fn from_document(doc: &DiverseDocument) -> Result<Self, LayoutError> {
        let entry = |e: &EntryDocument| -> Result<DiverseEntry, LayoutError> {
            Ok(DiverseEntry {
                layout: e.layout.to_layout()?,
                mass: e.mass,
            })
        };
        let mut by_topology = BTreeMap::new();
        for topo in &doc.topologies {
            let entries = topo.entries.iter().map(entry).collect::<Result<Vec<_>, _>>()?;
            let mut list: Vec<DiverseEntry> = Vec::new();
            for e in &entries {
                insert_sorted(&mut list, e);
            }
            if let Some(first) = list.first() {
                by_topology.insert(first.layout.topology_key(), list);
            }
        }
        let mut global = Vec::new();
        for e in doc.global.iter().map(entry) {
            insert_sorted(&mut global, &e?);
        }
        Ok(Self { by_topology, global })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiverseDocument {
    pub topologies: Vec<TopologyDocument>,
    pub global: Vec<EntryDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyDocument {
    pub key: String,
    pub entries: Vec<EntryDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryDocument {
    pub mass: f64,
    pub layout: LayoutDocument,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bar, CrossSection, Dim, NodeSpec};
    use proptest::prelude::*;

    fn layout(edges: &[(usize, usize)], area: f64) -> TrussLayout {
        let nodes = (0..4).map(|i| NodeSpec::free([i as f64, (i * i) as f64, 0.0])).collect();
        let bars = edges.iter().map(|&(u, v)| Bar::new(u, v, CrossSection::flat(area))).collect();
        TrussLayout::new(Dim::Two, nodes, bars).unwrap()
    }

    #[test]
    fn keeps_five_lightest_per_topology() {
        let mut set = DiverseSet::new();
        for i in 0..8 {
            let area = 1e-3 * (8 - i) as f64;
            set.offer(&layout(&[(0, 1), (1, 2)], area), area);
        }
        let (_, entries) = set.topologies().next().unwrap();
        assert_eq!(entries.len(), 5);
        let masses: Vec<f64> = entries.iter().map(|e| e.mass).collect();
        assert_eq!(masses, [1e-3, 2e-3, 3e-3, 4e-3, 5e-3]);
        // heavier than the fifth is a no-op
        assert!(!set.offer(&layout(&[(0, 1), (1, 2)], 9e-3), 9e-3));
        // duplicates are skipped
        assert!(!set.offer(&layout(&[(0, 1), (1, 2)], 1e-3), 1e-3));
    }

    #[test]
    fn global_list_spans_topologies() {
        let mut set = DiverseSet::new();
        set.offer(&layout(&[(0, 1)], 1.0), 3.0);
        set.offer(&layout(&[(0, 2)], 1.0), 1.0);
        set.offer(&layout(&[(0, 3)], 1.0), 2.0);
        assert_eq!(set.topology_count(), 3);
        assert_eq!(set.best_mass(), Some(1.0));
        let g: Vec<f64> = set.global().iter().map(|e| e.mass).collect();
        assert_eq!(g, [1.0, 2.0, 3.0]);
        assert_eq!(set.global_only().len(), 3);
    }

    #[test]
    fn document_round_trip() {
        let mut set = DiverseSet::new();
        set.offer(&layout(&[(0, 1), (2, 3)], 2e-3), 5.0);
        set.offer(&layout(&[(0, 1), (2, 3)], 1e-3), 4.0);
        set.offer(&layout(&[(1, 3)], 1e-3), 1.5);
        let text = serde_json::to_string(&set.to_document()).unwrap();
        let back: DiverseDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(DiverseSet::from_document(&back).unwrap(), set);
    }

    proptest! {
        #[test]
        fn capacity_and_order_hold(offers in prop::collection::vec((0usize..3, 1u32..50), 0..60)) {
            let shapes: [&[(usize, usize)]; 3] = [&[(0, 1)], &[(1, 2)], &[(0, 1), (2, 3)]];
            let mut set = DiverseSet::new();
            let mut best = f64::INFINITY;
            for (shape, m) in offers {
                let mass = m as f64;
                set.offer(&layout(shapes[shape], mass * 1e-4), mass);
                best = best.min(mass);
                prop_assert_eq!(set.best_mass(), Some(best));
                prop_assert!(set.global().len() <= CAPACITY);
                for (_, entries) in set.topologies() {
                    prop_assert!(entries.len() <= CAPACITY);
                    prop_assert!(entries.windows(2).all(|w| w[0].mass <= w[1].mass));
                }
            }
        }
    }
}
