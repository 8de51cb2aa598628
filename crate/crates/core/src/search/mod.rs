//! Search stage: continuous-action UCT that grows layouts node by node, bar by bar, then
//! tunes each section, with sampled action selection, kernel-regression smoothing and
//! progressive widening.

pub mod actions;
pub mod kernel;
pub mod tree;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diverse::DiverseSet;
use crate::model::TrussLayout;
use crate::testbeds::CaseConfig;
use crate::validity::{self, Classification};

pub use actions::{Phase, SearchAction, SearchSpace, SearchState};
pub use kernel::{kr_estimate, ActionKey, KrEstimate};
pub use tree::{node_value, ucb_value, widening_limit, Tree, ROOT};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Weight of the mean return in the node value.
    pub beta: f64,
    /// UCB exploration coefficient.
    pub exploration: f64,
    /// Reward scale; `None` uses the case default.
    pub kappa: Option<f64>,
    /// Actions drawn per selection.
    pub samples: usize,
    /// Kernel bandwidth in normalized action units.
    pub bandwidth: f64,
    /// Progressive-widening coefficient.
    pub widening: f64,
    /// Bars per layout are capped at this multiple of the node budget.
    pub bar_cap_factor: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        Self {
            beta: 0.3,
            exploration: 30.0,
            kappa: None,
            samples: 25,
            bandwidth: 0.1,
            widening: 1.0,
            bar_cap_factor: 3,
        }
    }
}

/// −1 for structural failures, 0 for other failures, `κ / M²` for valid layouts.
pub fn uct_reward(classification: Classification, mass: f64, kappa: f64) -> f64 {
    match classification {
        Classification::InvalidStructural => -1.0,
        Classification::InvalidOther => 0.0,
        Classification::Valid => kappa / (mass * mass),
    }
}

/// Outcome of one select–simulate–backpropagate pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Iteration {
    pub reward: f64,
    pub classification: Classification,
    pub mass: f64,
    /// Tree edges followed, including a newly expanded one.
    pub depth: usize,
    pub layout: TrussLayout,
}

enum Choice {
    Existing(usize),
    New(SearchAction, ActionKey),
}

/// Single-owner search tree over one case.
pub struct Search<'a> {
    space: SearchSpace<'a>,
    params: SearchParams,
    kappa: f64,
    tree: Tree,
    root: SearchState,
    rng: ChaCha8Rng,
    diverse: DiverseSet,
    iterations: u64,
}

impl<'a> Search<'a> {
    pub fn new(case: &'a CaseConfig, params: SearchParams, rng: ChaCha8Rng) -> Self {
        let space = SearchSpace::new(case, params.bar_cap_factor);
        let root = space.root();
        Self {
            kappa: params.kappa.unwrap_or_else(|| case.kappa()),
            tree: Tree::new(root.phase, root.cursor),
            space,
            params,
            root,
            rng,
            diverse: DiverseSet::new(),
            iterations: 0,
        }
    }

    pub fn seeded(case: &'a CaseConfig, params: SearchParams, seed: u64) -> Self {
        Self::new(case, params, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn diverse(&self) -> &DiverseSet {
        &self.diverse
    }

    pub fn into_diverse(self) -> DiverseSet {
        self.diverse
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }

    pub fn space(&self) -> &SearchSpace<'a> {
        &self.space
    }

    fn select(&mut self, id: usize, state: &SearchState) -> Choice {
        let p = self.params;
        let node = self.tree.node(id);
        let parent_visits = node.visits as f64;
        let sampler = self.space.sampler(state);
        let mut best: Option<(f64, Choice)> = None;
        for _ in 0..p.samples.max(1) {
            let action = sampler
                .sample(&mut self.rng)
                .expect("settled non-terminal states always have an action");
            let (score, choice) = match node.edges.iter().position(|e| e.action == action) {
                Some(e) => {
                    let edge = &node.edges[e];
                    let score = ucb_value(edge.value(p.beta), parent_visits, edge.visits as f64, p.exploration);
                    (score, Choice::Existing(e))
                }
                None => {
                    let key = self.space.key(&action);
                    let stats = node.edges.iter().map(|e| (&e.key, e.visits as f64, e.value(p.beta)));
                    let score = match kr_estimate(&key, stats, p.bandwidth) {
                        KrEstimate::NoInformation => f64::INFINITY,
                        KrEstimate::Estimate { value, visits } => {
                            ucb_value(value, parent_visits, visits, p.exploration)
                        }
                    };
                    (score, Choice::New(action, key))
                }
            };
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((score, choice));
            }
        }
        match best.expect("at least one sample").1 {
            Choice::New(a, k) if node.edges.len() < widening_limit(node.visits, p.widening) => Choice::New(a, k),
            Choice::Existing(e) => Choice::Existing(e),
            Choice::New(..) => {
                let mut best_edge = 0;
                let mut best_score = f64::NEG_INFINITY;
                for (i, e) in node.edges.iter().enumerate() {
                    let s = ucb_value(e.value(p.beta), parent_visits, e.visits as f64, p.exploration);
                    if s > best_score {
                        best_score = s;
                        best_edge = i;
                    }
                }
                Choice::Existing(best_edge)
            }
        }
    }

    /// Runs one iteration and offers a valid result to the diverse set.
    pub fn iterate(&mut self) -> Iteration {
        let mut state = self.root.clone();
        let mut path: Vec<(usize, Option<usize>)> = Vec::new();
        let mut id = ROOT;
        loop {
            if self.tree.node(id).phase == Phase::Terminal {
                path.push((id, None));
                break;
            }
            match self.select(id, &state) {
                Choice::Existing(e) => {
                    let edge = &self.tree.node(id).edges[e];
                    let child = self.tree.node(edge.child);
                    actions::replay(&mut state, &edge.action, child.phase, child.cursor);
                    path.push((id, Some(e)));
                    id = edge.child;
                }
                Choice::New(action, key) => {
                    self.space.apply(&mut state, &action);
                    let e = self.tree.expand(id, action, key, state.phase, state.cursor);
                    path.push((id, Some(e)));
                    path.push((self.tree.node(id).edges[e].child, None));
                    break;
                }
            }
        }
        let depth = path.len() - 1;
        self.space.simulate(&mut state, &mut self.rng);
        let case = self.space.case;
        let report = validity::check(&state.layout, case);
        let mass = case.mass(&state.layout);
        let reward = uct_reward(report.classification, mass, self.kappa);
        self.tree.backpropagate(&path, reward);
        if report.is_valid() {
            self.diverse.offer(&state.layout, mass);
        }
        self.iterations += 1;
        Iteration {
            reward,
            classification: report.classification,
            mass,
            depth,
            layout: state.layout,
        }
    }

    pub fn run(&mut self, iterations: u64) {
        for _ in 0..iterations {
            self.iterate();
        }
    }
}

/// RNG for search worker `worker` of a run seeded with `seed`.
pub fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    rng
}

/// Result of a complete search run.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub diverse: DiverseSet,
    pub iterations: u64,
    pub kappa: f64,
    /// Final RNG position of each worker.
    pub rng_words: Vec<u128>,
}

/// Runs `budget` iterations split across `jobs` independent trees and merges their stores.
///
/// Each worker owns its tree and RNG stream, and stores are merged in worker order, so the
/// result depends only on `seed` and `jobs`.
pub fn run_search(case: &CaseConfig, params: SearchParams, budget: u64, seed: u64, jobs: usize) -> SearchOutcome {
    let jobs = jobs.max(1);
    let share = |j: usize| budget / jobs as u64 + u64::from((j as u64) < budget % jobs as u64);
    let results: Vec<(DiverseSet, u64, f64, u128)> = if jobs == 1 {
        let mut search = Search::new(case, params, worker_rng(seed, 0));
        search.run(budget);
        vec![(search.diverse.clone(), search.iterations, search.kappa, search.rng.get_word_pos())]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = (0..jobs)
                .map(|j| {
                    scope.spawn(move || {
                        let mut search = Search::new(case, params, worker_rng(seed, j));
                        search.run(share(j));
                        (search.diverse.clone(), search.iterations, search.kappa, search.rng.get_word_pos())
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("search worker panicked")).collect()
        })
    };
    let mut diverse = DiverseSet::new();
    let mut iterations = 0;
    let mut kappa = 0.0;
    let mut rng_words = Vec::new();
    for (set, n, k, word) in results {
        for e in set.entries().chain(set.global()) {
            diverse.offer(&e.layout, e.mass);
        }
        iterations += n;
        kappa = k;
        rng_words.push(word);
    }
    SearchOutcome {
        diverse,
        iterations,
        kappa,
        rng_words,
    }
}
