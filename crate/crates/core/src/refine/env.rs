//! Episodic refinement environment over valid layouts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::diverse::{DiverseEntry, DiverseSet};
use crate::error::RefineError;
use crate::model::TrussLayout;
use crate::testbeds::CaseConfig;
use crate::validity::{self, Classification, ValidityReport};

use super::obs::{Featurizer, Observation, Target};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub episode_len: usize,
    /// Invalid proposals tolerated per episode; 0 ends the episode at the first one.
    pub max_invalid: usize,
    /// Start only from the global lightest layouts of the search set.
    pub no_diverse: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            episode_len: 20,
            max_invalid: 5,
            no_diverse: false,
        }
    }
}

/// Which pool an episode started from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartPool {
    Search,
    Training,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeState {
    pub layout: TrussLayout,
    pub mass: f64,
    pub steps: usize,
    pub invalid: usize,
    pub target: Target,
    pub pool: StartPool,
}

/// −50 for structural failures, −10 for other failures, `κ/M′² − κ/M²` for valid refinements.
pub fn refine_reward(classification: Classification, mass_before: f64, mass_after: f64, kappa: f64) -> f64 {
    match classification {
        Classification::InvalidStructural => -50.0,
        Classification::InvalidOther => -10.0,
        Classification::Valid => kappa / (mass_after * mass_after) - kappa / (mass_before * mass_before),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub classification: Classification,
    /// `None` when a section change found no catalog entry.
    pub report: Option<ValidityReport>,
    /// Mass of the current layout after the step.
    pub mass: f64,
    pub done: bool,
    /// Ended by the invalid limit rather than the step limit.
    pub terminal: bool,
}

pub struct RefineEnv<'a> {
    case: &'a CaseConfig,
    features: Featurizer,
    kappa: f64,
    config: EnvConfig,
    search_pool: Vec<DiverseEntry>,
    /// Lightest layouts found by this environment.
    found: DiverseSet,
    /// Search set plus every valid layout found, keyed by topology.
    refined: DiverseSet,
    state: Option<EpisodeState>,
}

impl<'a> RefineEnv<'a> {
    pub fn new(case: &'a CaseConfig, start: &DiverseSet, kappa: f64, config: EnvConfig) -> Result<Self, RefineError> {
        let search_pool: Vec<DiverseEntry> = if config.no_diverse {
            start.global().to_vec()
        } else {
            start.entries().cloned().collect()
        };
        if search_pool.is_empty() {
            return Err(RefineError::NothingToRefine);
        }
        Ok(Self {
            case,
            features: Featurizer::new(case),
            kappa,
            config,
            search_pool,
            found: DiverseSet::new(),
            refined: start.clone(),
            state: None,
        })
    }

    pub fn features(&self) -> &Featurizer {
        &self.features
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn state(&self) -> Option<&EpisodeState> {
        self.state.as_ref()
    }

    pub fn refined(&self) -> &DiverseSet {
        &self.refined
    }

    pub fn into_refined(self) -> DiverseSet {
        self.refined
    }

    /// Sizes of the search-stage and training start pools.
    pub fn pool_sizes(&self) -> (usize, usize) {
        (self.search_pool.len(), self.found.global().len())
    }

    fn draw_target<R: Rng + ?Sized>(layout: &TrussLayout, rng: &mut R) -> Target {
        let nodes: Vec<usize> = (0..layout.node_count()).filter(|&i| !layout.node(i).is_fixed).collect();
        let bars: Vec<usize> = (0..layout.bar_count()).filter(|&j| !layout.bar(j).is_fixed).collect();
        let total = nodes.len() + bars.len();
        assert!(total > 0, "layout has nothing to refine");
        let k = rng.random_range(0..total);
        if k < nodes.len() {
            Target::Node(nodes[k])
        } else {
            Target::Bar(bars[k - nodes.len()])
        }
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Observation {
        let training = self.found.global();
        let pool = if training.is_empty() || rng.random_bool(0.5) {
            StartPool::Search
        } else {
            StartPool::Training
        };
        let entry = match pool {
            StartPool::Search => &self.search_pool[rng.random_range(0..self.search_pool.len())],
            StartPool::Training => &training[rng.random_range(0..training.len())],
        };
        let layout = entry.layout.clone();
        let target = Self::draw_target(&layout, rng);
        self.state = Some(EpisodeState {
            mass: entry.mass,
            layout,
            steps: 0,
            invalid: 0,
            target,
            pool,
        });
        self.observe()
    }

    pub fn observe(&self) -> Observation {
        let s = self.state.as_ref().expect("reset before observing");
        self.features.observe(&s.layout, s.target)
    }

    /// Applies `action` to the pending target.
    pub fn step<R: Rng + ?Sized>(&mut self, action: &[f64], rng: &mut R) -> StepOutcome {
        let state = self.state.as_mut().expect("reset before stepping");
        let proposal = self.features.apply(&state.layout, self.case, state.target, action);
        let (classification, report, mass_after) = match &proposal {
            None => (Classification::InvalidOther, None, state.mass),
            Some(layout) => {
                let report = validity::check(layout, self.case);
                (report.classification, Some(report), self.case.mass(layout))
            }
        };
        let reward = refine_reward(classification, state.mass, mass_after, self.kappa);
        if classification == Classification::Valid {
            let layout = proposal.expect("valid proposals exist");
            self.found.offer(&layout, mass_after);
            self.refined.offer(&layout, mass_after);
            state.layout = layout;
            state.mass = mass_after;
        } else {
            state.invalid += 1;
        }
        state.steps += 1;
        let terminal = state.invalid >= self.config.max_invalid.max(1);
        let done = terminal || state.steps >= self.config.episode_len;
        state.target = Self::draw_target(&state.layout, rng);
        StepOutcome {
            reward,
            classification,
            report,
            mass: state.mass,
            done,
            terminal,
        }
    }
}
