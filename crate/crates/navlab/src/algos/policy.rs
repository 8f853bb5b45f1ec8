//! Action selection: stochastic Gaussian sampling for PPO collection,
//! the squashed mean for evaluation, and noisy deterministic actions for
//! DDPG exploration.

use crate::nn::network::Actor;
use crate::nn::{gaussian_logprob, ACTION_DIM};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// How to turn a policy mean into an executable action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ActionMode {
    /// Sample a diagonal Gaussian around the squashed mean, clamp into
    /// the action box, and report the log-density at the returned
    /// (clamped) action. The plain Gaussian density is used; no
    /// truncation correction is applied.
    Stochastic,
    /// The squashed mean itself.
    Deterministic,
    /// Mean plus Gaussian noise of the given std, clamped; no log-prob.
    DdpgExplore { noise_std: f64 },
}

/// Normalized action bounds: linear in [0,1], angular in [-1,1].
pub fn clamp_action(a: [f64; ACTION_DIM]) -> [f64; ACTION_DIM] {
    [a[0].clamp(0.0, 1.0), a[1].clamp(-1.0, 1.0)]
}

/// Select an action for `obs`. Stochastic mode also returns the
/// log-probability the PPO update will compare against.
pub fn select_action(
    actor: &Actor,
    obs: &[f64],
    mode: ActionMode,
    rng: &mut ChaCha8Rng,
) -> ([f64; ACTION_DIM], Option<f64>) {
    let mean = actor.forward(obs);
    match mode {
        ActionMode::Deterministic => (mean, None),
        ActionMode::Stochastic => {
            let mut action = [0.0; ACTION_DIM];
            for d in 0..ACTION_DIM {
                let z: f64 = rng.sample(StandardNormal);
                action[d] = mean[d] + actor.log_std[d].exp() * z;
            }
            let action = clamp_action(action);
            let log_prob = gaussian_logprob(&mean, &actor.log_std, &action);
            (action, Some(log_prob))
        }
        ActionMode::DdpgExplore { noise_std } => {
            let mut action = [0.0; ACTION_DIM];
            for d in 0..ACTION_DIM {
                let z: f64 = rng.sample(StandardNormal);
                action[d] = mean[d] + noise_std * z;
            }
            (clamp_action(action), None)
        }
    }
}
