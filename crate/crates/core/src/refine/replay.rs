//! Fixed-capacity ring buffer of transitions.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::obs::Observation;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub observation: Observation,
    /// Squashed action in `(−1, 1)^k`.
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_observation: Observation,
    /// The next state has no future value.
    pub terminal: bool,
}

/// Aggregate description of a buffer's contents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReplaySummary {
    pub len: usize,
    pub capacity: usize,
    pub mean_reward: f64,
    pub terminal: usize,
}

#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            items: Vec::new(),
            next: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() < self.capacity {
            self.items.push(t);
        } else {
            self.items[self.next] = t;
        }
        self.next = (self.next + 1) % self.capacity;
    }

    pub fn summary(&self) -> ReplaySummary {
        let n = self.items.len();
        ReplaySummary {
            len: n,
            capacity: self.capacity,
            mean_reward: if n == 0 { 0.0 } else { self.items.iter().map(|t| t.reward).sum::<f64>() / n as f64 },
            terminal: self.items.iter().filter(|t| t.terminal).count(),
        }
    }

    /// `n` transitions drawn uniformly with replacement; empty when the buffer is empty.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<&Transition> {
        if self.items.is_empty() {
            return Vec::new();
        }
        (0..n).map(|_| &self.items[rng.random_range(0..self.items.len())]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::refine::autodiff::Matrix;
    use crate::refine::obs::Target;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(reward: f64) -> Transition {
        let obs = Observation {
            nodes: Matrix::zeros(1, 1),
            bars: Matrix::zeros(0, 1),
            adjacency: Matrix::zeros(1, 0),
            target: Target::Node(0),
        };
        Transition {
            observation: obs.clone(),
            action: vec![0.0],
            reward,
            next_observation: obs,
            terminal: false,
        }
    }

    #[test]
    fn ring_overwrites_the_oldest() {
        let mut buf = ReplayBuffer::new(3);
        for r in 0..5 {
            buf.push(transition(r as f64));
        }
        assert_eq!(buf.len(), 3);
        let mut rewards: Vec<f64> = buf.items.iter().map(|t| t.reward).collect();
        rewards.sort_by(f64::total_cmp);
        assert_eq!(rewards, vec![2.0, 3.0, 4.0]);
        assert_eq!(buf.summary().mean_reward, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(buf.sample(10, &mut rng).len(), 10);
        assert!(ReplayBuffer::new(2).sample(4, &mut rng).is_empty());
    }
}
