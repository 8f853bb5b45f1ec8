//! Proximal policy optimization: clipped surrogate objective, value
//! loss, and the epoch/minibatch update loop.
//!
//! ```
//! use navlab::algos::ppo_surrogate;
//!
//! // At ratio 1 the surrogate is the advantage itself.
//! assert_eq!(ppo_surrogate(-0.7, -0.7, 2.5, 0.2), 2.5);
//! // A ratio of 1.5 with positive advantage clips at 1 + 0.2.
//! assert_eq!(ppo_surrogate(1.5_f64.ln(), 0.0, 1.0, 0.2), 1.2);
//! ```

use super::gae::TrajectoryBuffer;
use super::TrainError;
use crate::nn::network::{Actor, ActorCache, Critic, CriticCache};
use crate::nn::{gaussian_logprob, AdamState, Matrix, TensorSet, ACTION_DIM};
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

/// PPO hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PPOConfig {
    /// Probability-ratio clip half-width.
    pub clip_epsilon: f64,
    pub gamma: f64,
    pub gae_lambda: f64,
    pub epochs: usize,
    pub minibatch_size: usize,
    pub value_coef: f64,
    pub entropy_coef: f64,
    /// Environment steps per update.
    pub rollout_len: usize,
    pub lr: f64,
}

impl Default for PPOConfig {
    fn default() -> Self {
        Self {
            clip_epsilon: 0.2,
            gamma: 0.99,
            gae_lambda: 0.95,
            epochs: 10,
            minibatch_size: 64,
            value_coef: 0.5,
            entropy_coef: 0.0,
            rollout_len: 2048,
            lr: 3e-4,
        }
    }
}

/// Per-sample clipped surrogate objective:
/// `min(r * A, clip(r, 1 - eps, 1 + eps) * A)` with
/// `r = exp(log_prob_new - log_prob_old)`.
pub fn ppo_surrogate(log_prob_new: f64, log_prob_old: f64, advantage: f64, epsilon: f64) -> f64 {
    let ratio = (log_prob_new - log_prob_old).exp();
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon);
    (ratio * advantage).min(clipped * advantage)
}

/// Mean squared error between predicted values and empirical returns.
pub fn value_loss(values_pred: &[f64], returns: &[f64]) -> f64 {
    assert_eq!(values_pred.len(), returns.len(), "value loss length mismatch");
    let n = values_pred.len() as f64;
    values_pred
        .iter()
        .zip(returns)
        .map(|(v, r)| (v - r) * (v - r))
        .sum::<f64>()
        / n
}

/// Entropy of the diagonal Gaussian policy (state independent).
pub fn policy_entropy(log_std: &[f64; ACTION_DIM]) -> f64 {
    const HALF_LN_TWO_PI_E: f64 = 1.418_938_533_204_672_7;
    log_std.iter().map(|ls| ls + HALF_LN_TWO_PI_E).sum()
}

/// One minibatch of PPO training data, borrowed from the buffer.
pub struct PpoBatch<'a> {
    pub obs: &'a Matrix,
    pub actions: &'a [[f64; ACTION_DIM]],
    pub old_log_probs: &'a [f64],
    pub advantages: &'a [f64],
    pub returns: &'a [f64],
}

/// Loss values and diagnostics for one minibatch.
#[derive(Debug, Clone, Copy, Default)]
pub struct PpoLossStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub total_loss: f64,
    pub mean_ratio: f64,
    pub clip_fraction: f64,
}

/// Compute the combined PPO loss
/// `-mean(surrogate) + value_coef * value_mse - entropy_coef * entropy`
/// and, when gradient buffers are supplied, its exact gradients.
pub fn ppo_loss_and_grads(
    actor: &Actor,
    critic: &Critic,
    batch: &PpoBatch,
    cfg: &PPOConfig,
    mut grads: Option<(&mut Actor, &mut Critic)>,
) -> PpoLossStats {
    let n = batch.obs.rows();
    assert!(n > 0);
    let inv_n = 1.0 / n as f64;

    let actor_cache: ActorCache = actor.forward_batch(batch.obs);
    let critic_cache: CriticCache = critic.forward_batch(batch.obs);

    let mut policy_objective = 0.0;
    let mut ratio_sum = 0.0;
    let mut clipped_count = 0usize;
    let mut d_mean = Matrix::zeros(n, ACTION_DIM);
    let mut d_log_std = [0.0; ACTION_DIM];

    for i in 0..n {
        let mean = actor_cache.mean.row(i);
        let action = &batch.actions[i];
        let adv = batch.advantages[i];
        let lp_new = gaussian_logprob(mean, &actor.log_std, action);
        let ratio = (lp_new - batch.old_log_probs[i]).exp();
        ratio_sum += ratio;
        if (ratio - 1.0).abs() > cfg.clip_epsilon {
            clipped_count += 1;
        }
        let unclipped = ratio * adv;
        let clipped = ratio.clamp(1.0 - cfg.clip_epsilon, 1.0 + cfg.clip_epsilon) * adv;
        policy_objective += unclipped.min(clipped);

        if grads.is_some() {
            // d surrogate / d lp_new: the active min branch. When the
            // clipped branch is strictly smaller its ratio is saturated,
            // so the derivative vanishes.
            let d_surr_d_lp = if unclipped <= clipped { adv * ratio } else { 0.0 };
            // Loss is the negated mean.
            let d_lp = -inv_n * d_surr_d_lp;
            let row = d_mean.row_mut(i);
            for d in 0..ACTION_DIM {
                let inv_std = (-actor.log_std[d]).exp();
                let z = (action[d] - mean[d]) * inv_std;
                row[d] = d_lp * z * inv_std;
                d_log_std[d] += d_lp * (z * z - 1.0);
            }
        }
    }
    let policy_loss = -policy_objective * inv_n;
    let entropy = policy_entropy(&actor.log_std);
    let v_loss = value_loss(&critic_cache.values, batch.returns);
    let total_loss = policy_loss + cfg.value_coef * v_loss - cfg.entropy_coef * entropy;

    if let Some((actor_grads, critic_grads)) = grads.as_mut() {
        for d in 0..ACTION_DIM {
            d_log_std[d] -= cfg.entropy_coef;
        }
        actor.backward_batch(batch.obs, &actor_cache, &d_mean, d_log_std, actor_grads);

        let d_values: Vec<f64> = critic_cache
            .values
            .iter()
            .zip(batch.returns)
            .map(|(v, r)| cfg.value_coef * 2.0 * (v - r) * inv_n)
            .collect();
        critic.backward_batch(batch.obs, &critic_cache, &d_values, critic_grads);
    }

    PpoLossStats {
        policy_loss,
        value_loss: v_loss,
        entropy,
        total_loss,
        mean_ratio: ratio_sum * inv_n,
        clip_fraction: clipped_count as f64 * inv_n,
    }
}

/// Summary of one PPO update (all epochs and minibatches).
#[derive(Debug, Clone, Copy, Default)]
pub struct PPOUpdateStats {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub mean_ratio: f64,
    pub clip_fraction: f64,
    /// Mean ratio of the very first minibatch, before any parameter
    /// change; identically 1 by construction.
    pub first_minibatch_mean_ratio: f64,
    pub minibatches: usize,
}

/// Run a full PPO update over a finalized buffer: for each epoch,
/// shuffle, split into minibatches, and take one Adam step per
/// minibatch on actor and critic.
pub fn ppo_update(
    actor: &mut Actor,
    critic: &mut Critic,
    actor_opt: &mut AdamState,
    critic_opt: &mut AdamState,
    buffer: &TrajectoryBuffer,
    cfg: &PPOConfig,
    rng: &mut ChaCha8Rng,
) -> Result<PPOUpdateStats, TrainError> {
    assert!(buffer.is_finalized(), "buffer must be finalized before update");
    let n = buffer.len();
    let transitions = buffer.transitions();
    let advantages = buffer.advantages();
    let returns = buffer.returns();

    let mut actor_grads = actor.zeros_like();
    let mut critic_grads = critic.zeros_like();
    let mut indices: Vec<usize> = (0..n).collect();
    let mut stats = PPOUpdateStats::default();
    let mut first = true;

    for _epoch in 0..cfg.epochs {
        indices.shuffle(rng);
        for chunk in indices.chunks(cfg.minibatch_size) {
            let b = chunk.len();
            let mut obs = Matrix::zeros(b, transitions[0].obs.len());
            let mut actions = Vec::with_capacity(b);
            let mut old_log_probs = Vec::with_capacity(b);
            let mut advs = Vec::with_capacity(b);
            let mut rets = Vec::with_capacity(b);
            for (row, &idx) in chunk.iter().enumerate() {
                obs.row_mut(row).copy_from_slice(&transitions[idx].obs);
                actions.push(transitions[idx].action);
                old_log_probs.push(transitions[idx].log_prob);
                advs.push(advantages[idx]);
                rets.push(returns[idx]);
            }
            let batch = PpoBatch {
                obs: &obs,
                actions: &actions,
                old_log_probs: &old_log_probs,
                advantages: &advs,
                returns: &rets,
            };
            actor_grads.zero();
            critic_grads.zero();
            let loss =
                ppo_loss_and_grads(actor, critic, &batch, cfg, Some((&mut actor_grads, &mut critic_grads)));
            if !loss.total_loss.is_finite() {
                return Err(TrainError::NonFinite {
                    what: "ppo loss",
                    update: actor_opt.step_count(),
                });
            }
            actor_opt.step(actor, &actor_grads);
            critic_opt.step(critic, &critic_grads);

            if first {
                stats.first_minibatch_mean_ratio = loss.mean_ratio;
                first = false;
            }
            stats.policy_loss += loss.policy_loss;
            stats.value_loss += loss.value_loss;
            stats.entropy += loss.entropy;
            stats.mean_ratio += loss.mean_ratio;
            stats.clip_fraction += loss.clip_fraction;
            stats.minibatches += 1;
        }
    }
    let k = stats.minibatches as f64;
    stats.policy_loss /= k;
    stats.value_loss /= k;
    stats.entropy /= k;
    stats.mean_ratio /= k;
    stats.clip_fraction /= k;

    if !actor.all_finite() || !critic.all_finite() {
        return Err(TrainError::NonFinite {
            what: "parameters",
            update: actor_opt.step_count(),
        });
    }
    Ok(stats)
}
