//! A deterministic 2D mapless-navigation laboratory.
//!
//! The crate simulates a differential-drive robot with a forward-facing
//! LiDAR in small walled arenas, and trains it to reach randomized
//! targets with PPO (ResBlock or plain-MLP actor-critic) or DDPG. All
//! numerics are 64-bit, all randomness flows from one seed, and every
//! training artifact (metrics CSV, checkpoints, plots) is reproducible
//! byte for byte.
//!
//! ```
//! use navlab::arenas::simple_arena;
//! use navlab::env::{Env, EnvConfig};
//!
//! let mut env = Env::new(EnvConfig::new(simple_arena()));
//! let mut obs = env.reset(Some(7)).unwrap();
//! for _ in 0..20 {
//!     // Drive forward with a slight left turn.
//!     let step = env.step([1.0, 0.2]).unwrap();
//!     assert_eq!(step.observation.as_vector().len(), 16);
//!     if step.done {
//!         break;
//!     }
//!     obs = step.observation;
//! }
//! assert!(obs.target_distance > 0.0);
//! ```

pub mod algos;
pub mod arenas;
pub mod config;
pub mod env;
pub mod geometry;
pub mod metrics;
pub mod nn;
pub mod plot;
pub mod rewards;
pub mod trainer;
pub mod world;
