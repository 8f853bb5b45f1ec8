//! Training algorithms: PPO with generalized advantage estimation, and a
//! DDPG baseline sharing the same network bodies.

pub mod ddpg;
pub mod gae;
pub mod policy;
pub mod ppo;

pub use ddpg::{ddpg_update, soft_update, DDPGConfig, ReplayBuffer};
pub use gae::{compute_returns_advantages, TrajectoryBuffer, Transition};
pub use policy::{select_action, ActionMode};
pub use ppo::{ppo_surrogate, ppo_update, value_loss, PPOConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("non-finite {what} during update {update}; aborting")]
    NonFinite { what: &'static str, update: u64 },
}
