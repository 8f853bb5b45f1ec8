//! DDPG baseline: deterministic actor, state-action critic, target
//! networks with Polyak soft updates, uniform replay.
//!
//! The critic consumes `concat(obs, action)` (18 inputs) through the
//! same body architecture as the PPO networks, keeping the comparison
//! between algorithms controlled.

use super::gae::Transition;
use super::TrainError;
use crate::env::OBSERVATION_DIM;
use crate::nn::network::{Actor, Critic};
use crate::nn::{AdamState, Matrix, TensorSet, ACTION_DIM};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// DDPG hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DDPGConfig {
    pub gamma: f64,
    /// Polyak soft-update rate.
    pub tau: f64,
    /// Exploration noise standard deviation, in normalized action units.
    pub noise_std: f64,
    pub batch_size: usize,
    /// Steps of uniform-random collection before updates begin.
    pub warmup: usize,
    pub capacity: usize,
    pub actor_lr: f64,
    pub critic_lr: f64,
}

impl Default for DDPGConfig {
    fn default() -> Self {
        Self {
            gamma: 0.99,
            tau: 0.005,
            noise_std: 0.1,
            batch_size: 128,
            warmup: 1000,
            capacity: 100_000,
            actor_lr: 3e-4,
            critic_lr: 3e-4,
        }
    }
}

/// Fixed-capacity ring buffer with uniform sampling.
pub struct ReplayBuffer {
    data: Vec<Transition>,
    capacity: usize,
    head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0);
        Self {
            data: Vec::with_capacity(capacity),
            capacity,
            head: 0,
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.data.len() < self.capacity {
            self.data.push(t);
        } else {
            self.data[self.head] = t;
            self.head = (self.head + 1) % self.capacity;
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.data[i]
    }

    pub fn sample_indices(&self, batch: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
        (0..batch).map(|_| rng.random_range(0..self.data.len())).collect()
    }
}

/// Polyak-average every online tensor into the matching target tensor:
/// `target = tau * online + (1 - tau) * target`.
pub fn soft_update<T: TensorSet>(target: &mut T, online: &T, tau: f64) {
    let target_tensors = target.tensors_mut();
    let online_tensors = online.tensors();
    assert_eq!(target_tensors.len(), online_tensors.len());
    for ((_, _, t), (_, _, o)) in target_tensors.into_iter().zip(online_tensors) {
        for (tv, ov) in t.iter_mut().zip(o.iter()) {
            *tv = tau * ov + (1.0 - tau) * *tv;
        }
    }
}

/// Per-update diagnostics.
#[derive(Debug, Clone, Copy, Default)]
pub struct DDPGUpdateStats {
    pub critic_loss: f64,
    pub actor_objective: f64,
}

fn concat_obs_action(obs: &Matrix, actions: &Matrix) -> Matrix {
    obs.hconcat(actions)
}

/// Critic TD targets for a sampled batch: `y = r + gamma * (1 - done) *
/// Q_target(s', mu_target(s'))`.
pub fn ddpg_targets(
    target_actor: &Actor,
    target_critic: &Critic,
    batch: &[&Transition],
    gamma: f64,
) -> Vec<f64> {
    let n = batch.len();
    let mut next_obs = Matrix::zeros(n, OBSERVATION_DIM);
    for (i, t) in batch.iter().enumerate() {
        next_obs.row_mut(i).copy_from_slice(&t.next_obs);
    }
    let next_actions = target_actor.forward_batch(&next_obs).mean;
    let q_next = target_critic
        .forward_batch(&concat_obs_action(&next_obs, &next_actions))
        .values;
    batch
        .iter()
        .zip(q_next)
        .map(|(t, q)| {
            let not_done = if t.done { 0.0 } else { 1.0 };
            t.reward + gamma * not_done * q
        })
        .collect()
}

/// One DDPG update step: critic regression to the TD target, actor ascent
/// on `Q(s, mu(s))` chained through the critic's input gradient, then
/// soft updates of both targets.
#[allow(clippy::too_many_arguments)]
pub fn ddpg_update(
    actor: &mut Actor,
    critic: &mut Critic,
    target_actor: &mut Actor,
    target_critic: &mut Critic,
    replay: &ReplayBuffer,
    cfg: &DDPGConfig,
    actor_opt: &mut AdamState,
    critic_opt: &mut AdamState,
    rng: &mut ChaCha8Rng,
) -> Result<DDPGUpdateStats, TrainError> {
    assert!(replay.len() >= cfg.warmup, "update before warmup");
    let indices = replay.sample_indices(cfg.batch_size, rng);
    let batch: Vec<&Transition> = indices.iter().map(|&i| replay.get(i)).collect();
    let n = batch.len();
    let inv_n = 1.0 / n as f64;

    let mut obs = Matrix::zeros(n, OBSERVATION_DIM);
    let mut actions = Matrix::zeros(n, ACTION_DIM);
    for (i, t) in batch.iter().enumerate() {
        obs.row_mut(i).copy_from_slice(&t.obs);
        actions.row_mut(i).copy_from_slice(&t.action);
    }

    // Critic regression toward the frozen targets.
    let y = ddpg_targets(target_actor, target_critic, &batch, cfg.gamma);
    let sa = concat_obs_action(&obs, &actions);
    let critic_cache = critic.forward_batch(&sa);
    let critic_loss = super::ppo::value_loss(&critic_cache.values, &y);
    if !critic_loss.is_finite() {
        return Err(TrainError::NonFinite {
            what: "ddpg critic loss",
            update: critic_opt.step_count(),
        });
    }
    let d_q: Vec<f64> = critic_cache
        .values
        .iter()
        .zip(&y)
        .map(|(q, yy)| 2.0 * (q - yy) * inv_n)
        .collect();
    let mut critic_grads = critic.zeros_like();
    critic.backward_batch(&sa, &critic_cache, &d_q, &mut critic_grads);
    critic_opt.step(critic, &critic_grads);

    // Actor ascent through the updated critic.
    let actor_cache = actor.forward_batch(&obs);
    let sa_pi = concat_obs_action(&obs, &actor_cache.mean);
    let q_cache = critic.forward_batch(&sa_pi);
    let actor_objective = q_cache.values.iter().sum::<f64>() * inv_n;
    // Maximize mean Q: seed with -1/n and discard the critic's own grads.
    let d_q_actor = vec![-inv_n; n];
    let mut critic_scratch = critic.zeros_like();
    let d_input = critic.backward_batch(&sa_pi, &q_cache, &d_q_actor, &mut critic_scratch);
    let d_mean = d_input.columns(OBSERVATION_DIM, OBSERVATION_DIM + ACTION_DIM);
    let mut actor_grads = actor.zeros_like();
    actor.backward_batch(&obs, &actor_cache, &d_mean, [0.0; ACTION_DIM], &mut actor_grads);
    actor_opt.step(actor, &actor_grads);

    soft_update(target_actor, actor, cfg.tau);
    soft_update(target_critic, critic, cfg.tau);

    if !actor.all_finite() || !critic.all_finite() {
        return Err(TrainError::NonFinite {
            what: "ddpg parameters",
            update: actor_opt.step_count(),
        });
    }
    Ok(DDPGUpdateStats {
        critic_loss,
        actor_objective,
    })
}
