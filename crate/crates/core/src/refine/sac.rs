//! Soft actor-critic with twin value networks and a learned temperature.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::autodiff::{Matrix, Tape};
use super::net::{sample_squashed, NetConfig, PolicyNet, ValueNet};
use super::nn::{Adam, ParamStore};
use super::obs::{Featurizer, Observation};
use super::replay::Transition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SacConfig {
    pub gamma: f64,
    /// Target-network averaging rate.
    pub tau: f64,
    pub policy_lr: f64,
    pub value_lr: f64,
    pub temperature_lr: f64,
    pub initial_temperature: f64,
    pub net: NetConfig,
}

impl Default for SacConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.005,
            policy_lr: 3e-4,
            value_lr: 3e-4,
            temperature_lr: 3e-4,
            initial_temperature: 1.0,
            net: NetConfig::desk(),
        }
    }
}

/// Saved network parameters, in store order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentWeights {
    pub policy: Vec<Matrix>,
    pub critics: Vec<Vec<Matrix>>,
    pub targets: Vec<Vec<Matrix>>,
    pub log_alpha: f64,
    pub updates: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("saved weights do not match the network shape")]
pub struct WeightsMismatch;

/// Mean losses of one update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Losses {
    pub value: f64,
    pub policy: f64,
    pub temperature: f64,
    pub alpha: f64,
    /// Mean `−log π` of fresh policy samples.
    pub entropy: f64,
}

pub fn gaussian_noise<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Vec<f64> {
    (0..k).map(|_| rng.sample(StandardNormal)).collect()
}

/// d/d(log α) of the temperature loss `−log α · mean(log π + target entropy)`.
///
/// The target entropy of a `k`-dimensional action is `−k`.
pub fn temperature_gradient(log_probs: &[f64], action_dims: &[usize]) -> f64 {
    let n = log_probs.len() as f64;
    -log_probs
        .iter()
        .zip(action_dims)
        .map(|(lp, k)| lp - *k as f64)
        .sum::<f64>()
        / n
}

#[derive(Debug, Clone)]
pub struct Sac {
    pub config: SacConfig,
    pub features: Featurizer,
    pub policy: PolicyNet,
    pub values: [ValueNet; 2],
    targets: [ValueNet; 2],
    log_alpha: f64,
    policy_opt: Adam,
    value_opts: [Adam; 2],
    alpha_m: f64,
    alpha_v: f64,
    alpha_steps: i32,
    updates: u64,
}

impl Sac {
    pub fn new<R: Rng + ?Sized>(features: Featurizer, config: SacConfig, rng: &mut R) -> Self {
        let policy = PolicyNet::new(&features, &config.net, rng);
        let values = [
            ValueNet::new(&features, &config.net, rng),
            ValueNet::new(&features, &config.net, rng),
        ];
        let targets = values.clone();
        Self {
            policy_opt: Adam::new(&policy.store, config.policy_lr),
            value_opts: [
                Adam::new(&values[0].store, config.value_lr),
                Adam::new(&values[1].store, config.value_lr),
            ],
            log_alpha: config.initial_temperature.ln(),
            alpha_m: 0.0,
            alpha_v: 0.0,
            alpha_steps: 0,
            updates: 0,
            config,
            features,
            policy,
            values,
            targets,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.log_alpha.exp()
    }

    pub fn weights(&self) -> AgentWeights {
        AgentWeights {
            policy: self.policy.store.values().to_vec(),
            critics: self.values.iter().map(|v| v.store.values().to_vec()).collect(),
            targets: self.targets.iter().map(|v| v.store.values().to_vec()).collect(),
            log_alpha: self.log_alpha,
            updates: self.updates,
        }
    }

    /// Copies saved weights into this agent's networks. Optimizer moments restart from zero.
    pub fn load_weights(&mut self, w: &AgentWeights) -> Result<(), WeightsMismatch> {
        fn fits(store: &ParamStore, saved: &[Matrix]) -> bool {
            store.len() == saved.len()
                && store.values().iter().zip(saved).all(|(a, b)| (a.rows, a.cols) == (b.rows, b.cols))
        }
        let ok = fits(&self.policy.store, &w.policy)
            && w.critics.len() == 2
            && w.targets.len() == 2
            && (0..2).all(|i| fits(&self.values[i].store, &w.critics[i]) && fits(&self.targets[i].store, &w.targets[i]));
        if !ok {
            return Err(WeightsMismatch);
        }
        self.policy.store.values_mut().clone_from_slice(&w.policy);
        for i in 0..2 {
            self.values[i].store.values_mut().clone_from_slice(&w.critics[i]);
            self.targets[i].store.values_mut().clone_from_slice(&w.targets[i]);
        }
        self.log_alpha = w.log_alpha;
        self.updates = w.updates;
        Ok(())
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    pub fn targets(&self) -> &[ValueNet; 2] {
        &self.targets
    }

    /// Samples a squashed action for `obs`; the mean action when `deterministic`.
    pub fn act<R: Rng + ?Sized>(&self, obs: &Observation, deterministic: bool, rng: &mut R) -> Vec<f64> {
        let mut tape = Tape::new();
        let out = self.policy.forward(&mut tape, obs);
        let k = tape.value(out.mean).cols;
        if deterministic {
            return tape.value(out.mean).data.iter().map(|m| m.tanh()).collect();
        }
        let noise = gaussian_noise(k, rng);
        let (u, _) = sample_squashed(&mut tape, out, &noise);
        tape.value(u).data.clone()
    }

    /// Bellman target `r + γ·(min target Q − α·log π)` at the next state; `r` alone when terminal.
    fn bellman_target<R: Rng + ?Sized>(&self, t: &Transition, rng: &mut R) -> f64 {
        if t.terminal {
            return t.reward;
        }
        let mut tape = Tape::new();
        let out = self.policy.forward(&mut tape, &t.next_observation);
        let noise = gaussian_noise(tape.value(out.mean).cols, rng);
        let (u, log_prob) = sample_squashed(&mut tape, out, &noise);
        let q1 = self.targets[0].forward(&mut tape, &t.next_observation, u);
        let q2 = self.targets[1].forward(&mut tape, &t.next_observation, u);
        let soft = tape.scalar(q1).min(tape.scalar(q2)) - self.alpha() * tape.scalar(log_prob);
        t.reward + self.config.gamma * soft
    }

    /// Value estimates `(Q₁, Q₂)` of a stored action.
    pub fn q_values(&self, obs: &Observation, action: &[f64]) -> (f64, f64) {
        let mut tape = Tape::new();
        let a = tape.input(Matrix::row_vector(action.to_vec()));
        let q1 = self.values[0].forward(&mut tape, obs, a);
        let q2 = self.values[1].forward(&mut tape, obs, a);
        (tape.scalar(q1), tape.scalar(q2))
    }

    /// One gradient step on the critics, then the actor, then the temperature, followed by
    /// the target average. Returns `None` for an empty batch.
    pub fn update<R: Rng + ?Sized>(&mut self, batch: &[&Transition], rng: &mut R) -> Option<Losses> {
        if batch.is_empty() {
            return None;
        }
        let scale = 1.0 / batch.len() as f64;
        let targets: Vec<f64> = batch.iter().map(|t| self.bellman_target(t, rng)).collect();

        let mut value_grads = [self.values[0].store.zero_grads(), self.values[1].store.zero_grads()];
        let mut value_loss = 0.0;
        for (t, y) in batch.iter().zip(&targets) {
            let mut tape = Tape::new();
            let a = tape.input(Matrix::row_vector(t.action.clone()));
            let mut total = None;
            for k in 0..2 {
                let q = self.values[k].forward(&mut tape, &t.observation, a);
                let d = tape.add_scalar(q, -y);
                let sq = tape.square(d);
                total = Some(match total {
                    Some(prev) => tape.add(prev, sq),
                    None => sq,
                });
            }
            let loss = tape.scale(total.expect("two critics"), scale);
            value_loss += tape.scalar(loss);
            let grads = tape.backward(loss);
            for k in 0..2 {
                grads.accumulate_params(self.values[k].store.tag(), &mut value_grads[k]);
            }
        }
        for k in 0..2 {
            self.value_opts[k].apply(&mut self.values[k].store, &value_grads[k]);
        }

        let alpha = self.alpha();
        let mut policy_grads = self.policy.store.zero_grads();
        let mut policy_loss = 0.0;
        let mut log_probs = Vec::with_capacity(batch.len());
        let mut dims = Vec::with_capacity(batch.len());
        for t in batch {
            let mut tape = Tape::new();
            let out = self.policy.forward(&mut tape, &t.observation);
            let k = tape.value(out.mean).cols;
            let noise = gaussian_noise(k, rng);
            let (u, log_prob) = sample_squashed(&mut tape, out, &noise);
            let q1 = self.values[0].forward(&mut tape, &t.observation, u);
            let q2 = self.values[1].forward(&mut tape, &t.observation, u);
            let q = tape.min(q1, q2);
            let weighted = tape.scale(log_prob, alpha);
            let diff = tape.sub(weighted, q);
            let loss = tape.scale(diff, scale);
            policy_loss += tape.scalar(loss);
            log_probs.push(tape.scalar(log_prob));
            dims.push(k);
            tape.backward(loss).accumulate_params(self.policy.store.tag(), &mut policy_grads);
        }
        self.policy_opt.apply(&mut self.policy.store, &policy_grads);

        let g = temperature_gradient(&log_probs, &dims);
        let temperature_loss = self.log_alpha * g;
        self.step_temperature(g);

        for k in 0..2 {
            self.targets[k].store.soft_update(&self.values[k].store, self.config.tau);
        }
        self.updates += 1;
        Some(Losses {
            value: value_loss,
            policy: policy_loss,
            temperature: temperature_loss,
            alpha: self.alpha(),
            entropy: -log_probs.iter().sum::<f64>() / log_probs.len() as f64,
        })
    }

    fn step_temperature(&mut self, g: f64) {
        let (b1, b2, eps) = (0.9, 0.999, 1e-8);
        self.alpha_steps += 1;
        self.alpha_m = b1 * self.alpha_m + (1.0 - b1) * g;
        self.alpha_v = b2 * self.alpha_v + (1.0 - b2) * g * g;
        let mh = self.alpha_m / (1.0 - b1.powi(self.alpha_steps));
        let vh = self.alpha_v / (1.0 - b2.powi(self.alpha_steps));
        self.log_alpha -= self.config.temperature_lr * mh / (vh.sqrt() + eps);
    }
}
