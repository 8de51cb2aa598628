//! Refinement stage: a soft actor-critic agent nudges node positions and bar sections of
//! the layouts found by search, keeping every lighter valid layout it meets.

pub mod autodiff;
pub mod env;
pub mod net;
pub mod nn;
pub mod obs;
pub mod replay;
pub mod sac;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diverse::DiverseSet;
use crate::error::RefineError;
use crate::testbeds::CaseConfig;

pub use env::{refine_reward, EnvConfig, EpisodeState, RefineEnv, StartPool, StepOutcome};
pub use net::NetConfig;
pub use obs::{Featurizer, Observation, Target};
pub use replay::{ReplayBuffer, ReplaySummary, Transition};
pub use sac::{AgentWeights, Losses, Sac, SacConfig, WeightsMismatch};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineParams {
    pub rl_steps: u64,
    pub env: EnvConfig,
    pub sac: SacConfig,
    pub batch_size: usize,
    pub updates_per_step: usize,
    /// Environment steps between update rounds.
    pub update_interval: u64,
    /// Steps taken with uniform random actions before the policy acts.
    pub warmup_steps: u64,
    pub replay_capacity: usize,
}

impl RefineParams {
    /// Full-size attention network, batch 256, one update per step.
    pub fn full() -> Self {
        Self {
            rl_steps: 20_000,
            env: EnvConfig::default(),
            sac: SacConfig {
                net: NetConfig::full(),
                ..SacConfig::default()
            },
            batch_size: 256,
            updates_per_step: 1,
            update_interval: 1,
            warmup_steps: 1_000,
            replay_capacity: 1_000_000,
        }
    }

    /// Small network and sparser updates, sized for a single CPU core.
    pub fn desk() -> Self {
        Self {
            sac: SacConfig::default(),
            batch_size: 64,
            update_interval: 4,
            ..Self::full()
        }
    }
}

impl Default for RefineParams {
    fn default() -> Self {
        Self::desk()
    }
}

/// RNG of the refinement stage, on a stream no search worker uses.
pub fn refine_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX);
    rng
}

/// One training-log line, written when an episode ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub step: u64,
    pub episode: u64,
    pub episode_return: f64,
    pub episode_steps: usize,
    pub start_pool: StartPool,
    pub best_mass: f64,
    pub alpha: f64,
    pub losses: Option<Losses>,
    pub search_pool: usize,
    pub training_pool: usize,
}

#[derive(Debug, Clone)]
pub struct RefineOutcome {
    pub refined: DiverseSet,
    pub steps: u64,
    pub episodes: u64,
    /// Best stored mass after each episode.
    pub best_mass_trajectory: Vec<f64>,
    /// Trained agent; `None` when no steps ran.
    pub agent: Option<Sac>,
    pub replay: ReplaySummary,
}

/// Trains for `params.rl_steps` environment steps starting from `start`.
///
/// `log` receives one record per finished episode.
pub fn run_refinement<R: Rng + ?Sized>(
    case: &CaseConfig,
    start: &DiverseSet,
    kappa: f64,
    params: &RefineParams,
    rng: &mut R,
    mut log: impl FnMut(&LogRecord),
) -> Result<RefineOutcome, RefineError> {
    let mut env = RefineEnv::new(case, start, kappa, params.env)?;
    if params.rl_steps == 0 {
        return Ok(RefineOutcome {
            refined: start.clone(),
            steps: 0,
            episodes: 0,
            best_mass_trajectory: Vec::new(),
            agent: None,
            replay: ReplayBuffer::new(params.replay_capacity).summary(),
        });
    }
    let mut agent = Sac::new(env.features().clone(), params.sac, rng);
    let mut buffer = ReplayBuffer::new(params.replay_capacity);
    let mut obs = env.reset(rng);
    let mut episode_return = 0.0;
    let mut episodes = 0;
    let mut trajectory = Vec::new();
    let mut last_losses = None;
    for step in 0..params.rl_steps {
        let action: Vec<f64> = if step < params.warmup_steps {
            let k = env.features().action_dim(obs.target);
            (0..k).map(|_| rng.random_range(-1.0..1.0)).collect()
        } else {
            agent.act(&obs, false, rng)
        };
        let start_pool = env.state().expect("episode running").pool;
        let out = env.step(&action, rng);
        let next = env.observe();
        episode_return += out.reward;
        buffer.push(Transition {
            observation: obs,
            action,
            reward: out.reward,
            next_observation: next.clone(),
            terminal: out.terminal,
        });
        if step + 1 >= params.warmup_steps && (step + 1) % params.update_interval.max(1) == 0 {
            for _ in 0..params.updates_per_step {
                let batch = buffer.sample(params.batch_size, rng);
                if let Some(l) = agent.update(&batch, rng) {
                    last_losses = Some(l);
                }
            }
        }
        if out.done {
            episodes += 1;
            let best = env.refined().best_mass().expect("refined set is never empty");
            trajectory.push(best);
            let (search_pool, training_pool) = env.pool_sizes();
            log(&LogRecord {
                step: step + 1,
                episode: episodes,
                episode_return,
                episode_steps: env.state().expect("episode running").steps,
                start_pool,
                best_mass: best,
                alpha: agent.alpha(),
                losses: last_losses,
                search_pool,
                training_pool,
            });
            episode_return = 0.0;
            obs = env.reset(rng);
        } else {
            obs = next;
        }
    }
    Ok(RefineOutcome {
        refined: env.into_refined(),
        steps: params.rl_steps,
        episodes,
        best_mass_trajectory: trajectory,
        agent: Some(agent),
        replay: buffer.summary(),
    })
}
