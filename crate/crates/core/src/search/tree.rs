//! Arena-backed search tree and UCT statistics.

use super::actions::{Phase, SearchAction};
use super::kernel::ActionKey;

/// `β·W_mean + (1 − β)·W_best`.
pub fn node_value(w_mean: f64, w_best: f64, beta: f64) -> f64 {
    beta * w_mean + (1.0 - beta) * w_best
}

/// `Q + c·√(ln n(s) / n(s,a))`.
pub fn ucb_value(q: f64, parent_visits: f64, child_visits: f64, c: f64) -> f64 {
    q + c * (parent_visits.ln() / child_visits).sqrt()
}

/// Number of children a node visited `visits` times may hold.
pub fn widening_limit(visits: u64, coefficient: f64) -> usize {
    (coefficient * ((visits + 1) as f64).sqrt()).floor() as usize
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub action: SearchAction,
    pub key: ActionKey,
    pub child: usize,
    pub visits: u64,
    pub w_mean: f64,
    pub w_best: f64,
}

impl Edge {
    pub fn value(&self, beta: f64) -> f64 {
        node_value(self.w_mean, self.w_best, beta)
    }

    pub fn record(&mut self, reward: f64) {
        self.visits += 1;
        self.w_mean += (reward - self.w_mean) / self.visits as f64;
        self.w_best = self.w_best.max(reward);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    pub visits: u64,
    /// Phase and cursor of the state this node represents.
    pub phase: Phase,
    pub cursor: usize,
    pub edges: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    nodes: Vec<TreeNode>,
}

pub const ROOT: usize = 0;

impl Tree {
    pub fn new(phase: Phase, cursor: usize) -> Self {
        Self {
            nodes: vec![TreeNode {
                visits: 1,
                phase,
                cursor,
                edges: Vec::new(),
            }],
        }
    }

    pub fn node(&self, id: usize) -> &TreeNode {
        &self.nodes[id]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Adds a child under `parent`; returns the edge index.
    pub fn expand(&mut self, parent: usize, action: SearchAction, key: ActionKey, phase: Phase, cursor: usize) -> usize {
        let child = self.nodes.len();
        self.nodes.push(TreeNode {
            visits: 0,
            phase,
            cursor,
            edges: Vec::new(),
        });
        let edges = &mut self.nodes[parent].edges;
        edges.push(Edge {
            action,
            key,
            child,
            visits: 0,
            w_mean: 0.0,
            w_best: f64::NEG_INFINITY,
        });
        edges.len() - 1
    }

    /// Updates statistics along `path`, given as `(node, edge taken)` pairs ending at the leaf.
    pub fn backpropagate(&mut self, path: &[(usize, Option<usize>)], reward: f64) {
        for &(node, edge) in path {
            let n = &mut self.nodes[node];
            n.visits += 1;
            if let Some(e) = edge {
                n.edges[e].record(reward);
            }
        }
    }
}
