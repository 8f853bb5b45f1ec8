//! Trajectory storage and generalized advantage estimation.

use crate::env::OBSERVATION_DIM;
use crate::nn::ACTION_DIM;

/// One environment transition as collected during a rollout.
///
/// `log_prob` and `value` are meaningful for on-policy (PPO) collection
/// and zero for DDPG transitions.
#[derive(Debug, Clone, Copy)]
pub struct Transition {
    pub obs: [f64; OBSERVATION_DIM],
    pub action: [f64; ACTION_DIM],
    pub log_prob: f64,
    pub reward: f64,
    pub next_obs: [f64; OBSERVATION_DIM],
    pub done: bool,
    /// State value at collection time.
    pub value: f64,
}

/// TD(lambda) returns and advantages for an ordered rollout segment.
///
/// `bootstrap_value` is the critic's value of the state after the last
/// transition; it only matters when that transition is not `done`.
/// Returns `(returns, advantages)`.
pub fn compute_returns_advantages(
    transitions: &[Transition],
    gamma: f64,
    lambda: f64,
    bootstrap_value: f64,
) -> (Vec<f64>, Vec<f64>) {
    assert!(!transitions.is_empty(), "empty rollout segment");
    let n = transitions.len();
    let mut returns = vec![0.0; n];
    let mut advantages = vec![0.0; n];
    let mut next_advantage = 0.0;
    for t in (0..n).rev() {
        let tr = &transitions[t];
        let not_done = if tr.done { 0.0 } else { 1.0 };
        let next_value = if t + 1 < n {
            transitions[t + 1].value
        } else {
            bootstrap_value
        };
        let delta = tr.reward + gamma * next_value * not_done - tr.value;
        let advantage = delta + gamma * lambda * not_done * next_advantage;
        advantages[t] = advantage;
        returns[t] = advantage + tr.value;
        next_advantage = advantage;
    }
    (returns, advantages)
}

/// Ordered on-policy rollout buffer. Finalization computes returns and
/// advantages and normalizes the advantages to zero mean and unit
/// variance across the batch.
pub struct TrajectoryBuffer {
    transitions: Vec<Transition>,
    returns: Vec<f64>,
    advantages: Vec<f64>,
    finalized: bool,
}

impl Default for TrajectoryBuffer {
    fn default() -> Self {
        Self::new()
    }
}

impl TrajectoryBuffer {
    pub fn new() -> Self {
        Self {
            transitions: Vec::new(),
            returns: Vec::new(),
            advantages: Vec::new(),
            finalized: false,
        }
    }

    pub fn push(&mut self, t: Transition) {
        assert!(!self.finalized, "push after finalize");
        self.transitions.push(t);
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn is_finalized(&self) -> bool {
        self.finalized
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn returns(&self) -> &[f64] {
        assert!(self.finalized, "returns before finalize");
        &self.returns
    }

    pub fn advantages(&self) -> &[f64] {
        assert!(self.finalized, "advantages before finalize");
        &self.advantages
    }

    pub fn finalize(&mut self, gamma: f64, lambda: f64, bootstrap_value: f64) {
        let (returns, mut advantages) =
            compute_returns_advantages(&self.transitions, gamma, lambda, bootstrap_value);
        let n = advantages.len() as f64;
        let mean = advantages.iter().sum::<f64>() / n;
        let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        for a in &mut advantages {
            *a = (*a - mean) / (std + 1e-8);
        }
        self.returns = returns;
        self.advantages = advantages;
        self.finalized = true;
    }

    pub fn clear(&mut self) {
        self.transitions.clear();
        self.returns.clear();
        self.advantages.clear();
        self.finalized = false;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn transition(reward: f64, value: f64, done: bool) -> Transition {
        Transition {
            obs: [0.0; OBSERVATION_DIM],
            action: [0.0; ACTION_DIM],
            log_prob: 0.0,
            reward,
            next_obs: [0.0; OBSERVATION_DIM],
            done,
            value,
        }
    }

    #[test]
    fn single_terminal_step() {
        let (returns, advantages) =
            compute_returns_advantages(&[transition(5.0, 0.0, true)], 1.0, 1.0, 0.0);
        assert_eq!(advantages, vec![5.0]);
        assert_eq!(returns, vec![5.0]);
    }

    #[test]
    fn zero_rewards_zero_values_give_zeros() {
        let ts: Vec<Transition> = (0..10).map(|_| transition(0.0, 0.0, false)).collect();
        let (returns, advantages) = compute_returns_advantages(&ts, 0.99, 0.95, 0.0);
        assert!(returns.iter().all(|&r| r == 0.0));
        assert!(advantages.iter().all(|&a| a == 0.0));
    }

    #[test]
    #[should_panic(expected = "empty rollout")]
    fn empty_buffer_is_contract_violation() {
        compute_returns_advantages(&[], 0.99, 0.95, 0.0);
    }

    #[test]
    fn matches_direct_summation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..50 {
            let n = rng.random_range(1..=12);
            let ts: Vec<Transition> = (0..n)
                .map(|_| {
                    transition(
                        rng.random_range(-2.0..2.0),
                        rng.random_range(-1.0..1.0),
                        rng.random_range(0.0..1.0) < 0.2,
                    )
                })
                .collect();
            let bootstrap = rng.random_range(-1.0..1.0);
            let gamma = 0.97;
            let lambda = 0.9;
            let (_, advantages) = compute_returns_advantages(&ts, gamma, lambda, bootstrap);

            // Oracle: per-step deltas summed with (gamma*lambda)^k decay,
            // truncated at the first done.
            let delta = |t: usize| -> f64 {
                let not_done = if ts[t].done { 0.0 } else { 1.0 };
                let next_value = if t + 1 < n { ts[t + 1].value } else { bootstrap };
                ts[t].reward + gamma * next_value * not_done - ts[t].value
            };
            for t in 0..n {
                let mut total = delta(t);
                let mut weight = 1.0;
                for k in t..n - 1 {
                    if ts[k].done {
                        break;
                    }
                    weight *= gamma * lambda;
                    total += weight * delta(k + 1);
                }
                assert_relative_eq!(advantages[t], total, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn finalize_normalizes_advantages() {
        let mut buffer = TrajectoryBuffer::new();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..256 {
            buffer.push(transition(
                rng.random_range(-3.0..3.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(0.0..1.0) < 0.1,
            ));
        }
        buffer.finalize(0.99, 0.95, 0.3);
        let advantages = buffer.advantages();
        let n = advantages.len() as f64;
        let mean = advantages.iter().sum::<f64>() / n;
        let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 1e-10, "mean {mean}");
        assert!((var - 1.0).abs() < 1e-6, "variance {var}");
    }

    #[test]
    fn returns_equal_advantage_plus_value() {
        let ts: Vec<Transition> = vec![
            transition(1.0, 0.4, false),
            transition(-0.5, 0.2, false),
            transition(2.0, -0.1, true),
        ];
        let (returns, advantages) = compute_returns_advantages(&ts, 0.99, 0.95, 0.0);
        for i in 0..3 {
            assert_relative_eq!(returns[i], advantages[i] + ts[i].value, epsilon = 1e-12);
        }
    }
}
