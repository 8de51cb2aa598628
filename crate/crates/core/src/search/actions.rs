//! Search states, actions and the per-phase action samplers.

use rand::Rng;

use crate::fea;
use crate::model::{Bar, CrossSection, NodeSpec, TrussLayout, Vec3};
use crate::testbeds::CaseConfig;
use crate::validity::{pair_crosses_bar, pair_passes_node, AreaRule};

use super::kernel::ActionKey;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    AddNodes,
    AddBars,
    TuneAreas,
    Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SearchAction {
    AddNode { position: Vec3 },
    AddBar { u: usize, v: usize, section: CrossSection },
    /// Sets the section of the bar under the tuning cursor.
    SetSection { section: CrossSection },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchState {
    pub layout: TrussLayout,
    pub phase: Phase,
    /// Next bar to tune during `TuneAreas`.
    pub cursor: usize,
}

/// Case-derived limits shared by every state of one search.
#[derive(Debug, Clone)]
pub struct SearchSpace<'a> {
    pub case: &'a CaseConfig,
    pub max_nodes: usize,
    pub bar_cap: usize,
    area_range: (f64, f64),
}

impl<'a> SearchSpace<'a> {
    pub fn new(case: &'a CaseConfig, bar_cap_factor: usize) -> Self {
        let area_range = match &case.bounds.area {
            AreaRule::Range { min, max } => (*min, *max),
            AreaRule::Catalog(c) => (c.min_area(), c.max_area()),
        };
        Self {
            case,
            max_nodes: case.max_nodes,
            bar_cap: bar_cap_factor * case.max_nodes,
            area_range,
        }
    }

    pub fn root(&self) -> SearchState {
        let mut state = SearchState {
            layout: self.case.initial_layout(),
            phase: Phase::AddNodes,
            cursor: 0,
        };
        self.settle(&mut state);
        state
    }

    /// Whether the layout passes the stability checks used to end bar adding.
    pub fn is_stable(&self, layout: &TrussLayout) -> bool {
        fea::maxwell_count_ok(layout) && fea::stiffness_positive_definite(layout, &self.case.material)
    }

    /// Unconnected node pairs whose bar would respect the length bounds, cross no bar, pass
    /// through no other node, and not join two supports.
    pub fn legal_pairs(&self, layout: &TrussLayout) -> Vec<(usize, usize)> {
        let (lmin, lmax) = self.case.bounds.length;
        let clearance = self.case.bounds.intersection_clearance;
        let n = layout.node_count();
        let mut pairs = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                if layout.has_bar(u, v) || (layout.node(u).is_support && layout.node(v).is_support) {
                    continue;
                }
                let len = layout.pair_length(u, v);
                if len <= 0.0 || len < lmin || len > lmax {
                    continue;
                }
                if (0..layout.bar_count()).any(|b| pair_crosses_bar(layout, u, v, b, clearance)) {
                    continue;
                }
                if (0..n).any(|w| w != u && w != v && pair_passes_node(layout, u, v, w, clearance)) {
                    continue;
                }
                pairs.push((u, v));
            }
        }
        pairs
    }

    /// Moves `state` forward past phases that have nothing left to decide.
    pub fn settle(&self, state: &mut SearchState) {
        loop {
            match state.phase {
                Phase::AddNodes if state.layout.node_count() >= self.max_nodes => state.phase = Phase::AddBars,
                Phase::AddBars
                    if state.layout.bar_count() >= self.bar_cap
                        || self.is_stable(&state.layout)
                        || self.legal_pairs(&state.layout).is_empty() =>
                {
                    state.phase = Phase::TuneAreas;
                    state.cursor = 0;
                }
                Phase::TuneAreas => {
                    let bars = state.layout.bars();
                    while state.cursor < bars.len() && bars[state.cursor].is_fixed {
                        state.cursor += 1;
                    }
                    if state.cursor >= bars.len() {
                        state.phase = Phase::Terminal;
                    }
                    return;
                }
                _ => return,
            }
        }
    }

    /// Applies an action produced for `state` and advances the phase.
    pub fn apply(&self, state: &mut SearchState, action: &SearchAction) {
        apply_to_layout(state, action);
        self.settle(state);
    }

    pub fn sampler(&self, state: &SearchState) -> ActionSampler<'_, 'a> {
        let pairs = match state.phase {
            Phase::AddBars => self.legal_pairs(&state.layout),
            _ => Vec::new(),
        };
        ActionSampler {
            space: self,
            phase: state.phase,
            pairs,
        }
    }

    pub fn random_section<R: Rng + ?Sized>(&self, rng: &mut R) -> CrossSection {
        match &self.case.bounds.area {
            AreaRule::Range { min, max } => CrossSection::flat(rng.random_range(*min..=*max)),
            AreaRule::Catalog(c) => c.section(rng.random_range(0..c.len())),
        }
    }

    pub fn random_position<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec3 {
        let b = &self.case.proposal_box;
        let mut p = [0.0; 3];
        for (a, x) in p.iter_mut().enumerate().take(self.case.dim.count()) {
            *x = if b.max[a] > b.min[a] {
                rng.random_range(b.min[a]..=b.max[a])
            } else {
                b.min[a]
            };
        }
        p
    }

    /// Embedding used by kernel regression: coordinates normalized by the proposal box,
    /// sections by the area range, bars grouped by node pair.
    pub fn key(&self, action: &SearchAction) -> ActionKey {
        let area = |s: &CrossSection| {
            let (lo, hi) = self.area_range;
            if hi > lo {
                (s.area() - lo) / (hi - lo)
            } else {
                0.0
            }
        };
        match action {
            SearchAction::AddNode { position } => {
                let b = &self.case.proposal_box;
                let mut coords = [0.0; 3];
                for (a, c) in coords.iter_mut().enumerate().take(self.case.dim.count()) {
                    let extent = b.extent(a);
                    *c = if extent > 0.0 { (position[a] - b.min[a]) / extent } else { 0.0 };
                }
                ActionKey { group: None, coords }
            }
            SearchAction::AddBar { u, v, section } => ActionKey {
                group: Some((*u, *v)),
                coords: [area(section), 0.0, 0.0],
            },
            SearchAction::SetSection { section } => ActionKey {
                group: None,
                coords: [area(section), 0.0, 0.0],
            },
        }
    }

    /// Completes `state` with uniformly random legal actions.
    pub fn simulate<R: Rng + ?Sized>(&self, state: &mut SearchState, rng: &mut R) {
        while state.phase != Phase::Terminal {
            let action = self
                .sampler(state)
                .sample(rng)
                .expect("settled non-terminal states always have an action");
            self.apply(state, &action);
        }
    }
}

fn apply_to_layout(state: &mut SearchState, action: &SearchAction) {
    match *action {
        SearchAction::AddNode { position } => {
            state.layout.push_node(NodeSpec::free(position)).expect("sampled positions are finite");
        }
        SearchAction::AddBar { u, v, section } => {
            state.layout.push_bar(Bar::new(u, v, section)).expect("sampled pairs are legal");
        }
        SearchAction::SetSection { section } => {
            state.layout.set_section(state.cursor, section);
            state.cursor += 1;
        }
    }
}

/// Replays a stored transition whose resulting phase and cursor are already known.
pub(crate) fn replay(state: &mut SearchState, action: &SearchAction, phase: Phase, cursor: usize) {
    apply_to_layout(state, action);
    state.phase = phase;
    state.cursor = cursor;
}

/// Uniform sampler over one state's legal actions.
pub struct ActionSampler<'s, 'a> {
    space: &'s SearchSpace<'a>,
    phase: Phase,
    pairs: Vec<(usize, usize)>,
}

impl ActionSampler<'_, '_> {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<SearchAction> {
        match self.phase {
            Phase::AddNodes => Some(SearchAction::AddNode {
                position: self.space.random_position(rng),
            }),
            Phase::AddBars => {
                if self.pairs.is_empty() {
                    return None;
                }
                let (u, v) = self.pairs[rng.random_range(0..self.pairs.len())];
                Some(SearchAction::AddBar {
                    u,
                    v,
                    section: self.space.random_section(rng),
                })
            }
            Phase::TuneAreas => Some(SearchAction::SetSection {
                section: self.space.random_section(rng),
            }),
            Phase::Terminal => None,
        }
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testbeds::load_case;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn root_adds_exactly_the_missing_nodes() {
        let case = load_case("ten-bar-load1", Some(6)).unwrap();
        let space = SearchSpace::new(&case, 3);
        let mut state = space.root();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut node_actions = 0;
        while state.phase == Phase::AddNodes {
            let a = space.sampler(&state).sample(&mut rng).unwrap();
            space.apply(&mut state, &a);
            node_actions += 1;
        }
        assert_eq!(node_actions, 2);
        assert_eq!(state.layout.node_count(), 6);
        assert_eq!(state.phase, Phase::AddBars);
    }

    #[test]
    fn legal_pairs_bounded_by_combinatorics() {
        let case = load_case("ten-bar-load1", Some(6)).unwrap();
        let space = SearchSpace::new(&case, 3);
        let layout = case.initial_layout();
        let pairs = space.legal_pairs(&layout);
        assert!(pairs.len() <= 4 * 3 / 2);
        // a-b joins two supports, a-d runs through c
        assert!(!pairs.contains(&(0, 1)));
        assert!(!pairs.contains(&(0, 3)));
        assert!(pairs.contains(&(0, 2)) && pairs.contains(&(1, 3)));
    }

    #[test]
    fn rollouts_terminate_and_respect_the_bar_cap() {
        for name in ["ten-bar-load1", "seventeen-bar", "sundial"] {
            let case = load_case(name, None).unwrap();
            let space = SearchSpace::new(&case, 3);
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for _ in 0..20 {
                let mut state = space.root();
                space.simulate(&mut state, &mut rng);
                assert_eq!(state.phase, Phase::Terminal);
                assert!(state.layout.bar_count() <= 3 * case.max_nodes);
                assert_eq!(state.layout.node_count(), case.max_nodes);
                if let Some(cat) = case.catalog() {
                    assert!(state.layout.bars().iter().all(|b| cat.contains(&b.section)));
                }
            }
        }
    }

    #[test]
    fn rollout_bar_phase_stops_once_stable() {
        let case = load_case("ten-bar-load1", Some(6)).unwrap();
        let space = SearchSpace::new(&case, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let mut state = space.root();
            while state.phase != Phase::TuneAreas {
                let a = space.sampler(&state).sample(&mut rng).unwrap();
                let was_bar = matches!(a, SearchAction::AddBar { .. });
                if was_bar {
                    assert!(!space.is_stable(&state.layout), "bar added to an already stable layout");
                }
                space.apply(&mut state, &a);
            }
        }
    }

    #[test]
    fn seeded_rollout_is_reproducible() {
        let case = load_case("sundial", Some(8)).unwrap();
        let space = SearchSpace::new(&case, 3);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut state = space.root();
            space.simulate(&mut state, &mut rng);
            crate::document::serialize(&state.layout)
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }
}
