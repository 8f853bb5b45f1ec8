//! Run configuration: defaults, the `key = value` config file format and
//! CLI overrides.
//!
//! Files are line oriented with `#` comments; keys use dotted namespaces
//! (`ppo.clip = 0.2`). Command-line flags override file values, which
//! override defaults.

use crate::algos::{DDPGConfig, PPOConfig};
use crate::env::EnvConfig;
use crate::nn::DEFAULT_HIDDEN;
use crate::rewards::{RewardConfig, RewardKind};
use crate::world::World;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Which trainer drives a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    PpoRes,
    PpoMlp,
    Ddpg,
}

impl Algo {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algo::PpoRes => "ppo_res",
            Algo::PpoMlp => "ppo_mlp",
            Algo::Ddpg => "ddpg",
        }
    }

    pub fn parse(s: &str) -> Option<Algo> {
        match s {
            "ppo_res" => Some(Algo::PpoRes),
            "ppo_mlp" => Some(Algo::PpoMlp),
            "ddpg" => Some(Algo::Ddpg),
            _ => None,
        }
    }
}

impl std::fmt::Display for Algo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io error reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("unknown config key {0:?}")]
    UnknownKey(String),
    #[error("bad value for {key}: {value:?}")]
    BadValue { key: String, value: String },
}

/// Everything a training or evaluation run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algo: Algo,
    pub world_path: PathBuf,
    pub reward_kind: RewardKind,
    pub seed: u64,
    pub episodes: u32,
    pub out_dir: Option<PathBuf>,
    /// Record real wall-clock per episode. Off by default: timing makes
    /// metrics files differ between identical runs.
    pub timing: bool,
    pub dt: f64,
    pub max_steps: u32,
    pub max_range: f64,
    pub robot_radius: f64,
    pub min_target_clearance: f64,
    pub reward: RewardConfig,
    pub hidden: usize,
    pub checkpoint_every: u32,
    pub ppo: PPOConfig,
    pub ddpg: DDPGConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            algo: Algo::PpoRes,
            world_path: PathBuf::from("worlds/simple.world"),
            reward_kind: RewardKind::Basic,
            seed: 0,
            episodes: 300,
            out_dir: None,
            timing: false,
            dt: 0.1,
            max_steps: 500,
            max_range: 3.5,
            robot_radius: 0.105,
            min_target_clearance: 0.5,
            reward: RewardConfig::default(),
            hidden: DEFAULT_HIDDEN,
            checkpoint_every: 25,
            ppo: PPOConfig::default(),
            ddpg: DDPGConfig::default(),
        }
    }
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
    })
}

impl RunConfig {
    /// Apply one dotted `key = value` setting.
    pub fn apply_kv(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            key: key.to_string(),
            value: value.to_string(),
        };
        match key {
            "algo" => self.algo = Algo::parse(value).ok_or_else(bad)?,
            "world" => self.world_path = PathBuf::from(value),
            "reward" => {
                self.reward_kind = match value {
                    "basic" => RewardKind::Basic,
                    "advanced" => RewardKind::Advanced,
                    _ => return Err(bad()),
                }
            }
            "seed" => self.seed = parse_as(key, value)?,
            "episodes" => self.episodes = parse_as(key, value)?,
            "env.dt" => self.dt = parse_as(key, value)?,
            "env.max_steps" => self.max_steps = parse_as(key, value)?,
            "env.max_range" => self.max_range = parse_as(key, value)?,
            "env.robot_radius" => self.robot_radius = parse_as(key, value)?,
            "env.min_target_clearance" => self.min_target_clearance = parse_as(key, value)?,
            "reward.r_arrive" => self.reward.r_arrive = parse_as(key, value)?,
            "reward.r_collision" => self.reward.r_collision = parse_as(key, value)?,
            "reward.c_r" => self.reward.c_r = parse_as(key, value)?,
            "reward.c_p" => self.reward.c_p = parse_as(key, value)?,
            "reward.c_d" => self.reward.c_d = parse_as(key, value)?,
            "reward.c_o" => self.reward.c_o = parse_as(key, value)?,
            "nn.hidden" => self.hidden = parse_as(key, value)?,
            "train.checkpoint_every" => self.checkpoint_every = parse_as(key, value)?,
            "train.timing" => self.timing = parse_as(key, value)?,
            "ppo.clip" => self.ppo.clip_epsilon = parse_as(key, value)?,
            "ppo.gamma" => self.ppo.gamma = parse_as(key, value)?,
            "ppo.lambda" => self.ppo.gae_lambda = parse_as(key, value)?,
            "ppo.epochs" => self.ppo.epochs = parse_as(key, value)?,
            "ppo.minibatch" => self.ppo.minibatch_size = parse_as(key, value)?,
            "ppo.value_coef" => self.ppo.value_coef = parse_as(key, value)?,
            "ppo.entropy_coef" => self.ppo.entropy_coef = parse_as(key, value)?,
            "ppo.rollout" => self.ppo.rollout_len = parse_as(key, value)?,
            "ppo.lr" => self.ppo.lr = parse_as(key, value)?,
            "ddpg.gamma" => self.ddpg.gamma = parse_as(key, value)?,
            "ddpg.tau" => self.ddpg.tau = parse_as(key, value)?,
            "ddpg.noise_std" => self.ddpg.noise_std = parse_as(key, value)?,
            "ddpg.batch" => self.ddpg.batch_size = parse_as(key, value)?,
            "ddpg.warmup" => self.ddpg.warmup = parse_as(key, value)?,
            "ddpg.capacity" => self.ddpg.capacity = parse_as(key, value)?,
            "ddpg.actor_lr" => self.ddpg.actor_lr = parse_as(key, value)?,
            "ddpg.critic_lr" => self.ddpg.critic_lr = parse_as(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    pub fn apply_str(&mut self, content: &str, path: &str) -> Result<(), ConfigError> {
        for (idx, raw) in content.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                path: path.to_string(),
                line: idx + 1,
                message: format!("expected `key = value`, got {line:?}"),
            })?;
            self.apply_kv(key.trim(), value.trim())?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let content = std::fs::read_to_string(path)?;
        self.apply_str(&content, &path.display().to_string())
    }

    /// The fully resolved configuration in file format; parsing it back
    /// reproduces this config.
    pub fn to_file_format(&self) -> String {
        let mut s = String::new();
        writeln!(s, "algo = {}", self.algo).unwrap();
        writeln!(s, "world = {}", self.world_path.display()).unwrap();
        let reward = match self.reward_kind {
            RewardKind::Basic => "basic",
            RewardKind::Advanced => "advanced",
        };
        writeln!(s, "reward = {reward}").unwrap();
        writeln!(s, "seed = {}", self.seed).unwrap();
        writeln!(s, "episodes = {}", self.episodes).unwrap();
        writeln!(s, "env.dt = {}", self.dt).unwrap();
        writeln!(s, "env.max_steps = {}", self.max_steps).unwrap();
        writeln!(s, "env.max_range = {}", self.max_range).unwrap();
        writeln!(s, "env.robot_radius = {}", self.robot_radius).unwrap();
        writeln!(s, "env.min_target_clearance = {}", self.min_target_clearance).unwrap();
        writeln!(s, "reward.r_arrive = {}", self.reward.r_arrive).unwrap();
        writeln!(s, "reward.r_collision = {}", self.reward.r_collision).unwrap();
        writeln!(s, "reward.c_r = {}", self.reward.c_r).unwrap();
        writeln!(s, "reward.c_p = {}", self.reward.c_p).unwrap();
        writeln!(s, "reward.c_d = {}", self.reward.c_d).unwrap();
        writeln!(s, "reward.c_o = {}", self.reward.c_o).unwrap();
        writeln!(s, "nn.hidden = {}", self.hidden).unwrap();
        writeln!(s, "train.checkpoint_every = {}", self.checkpoint_every).unwrap();
        writeln!(s, "train.timing = {}", self.timing).unwrap();
        writeln!(s, "ppo.clip = {}", self.ppo.clip_epsilon).unwrap();
        writeln!(s, "ppo.gamma = {}", self.ppo.gamma).unwrap();
        writeln!(s, "ppo.lambda = {}", self.ppo.gae_lambda).unwrap();
        writeln!(s, "ppo.epochs = {}", self.ppo.epochs).unwrap();
        writeln!(s, "ppo.minibatch = {}", self.ppo.minibatch_size).unwrap();
        writeln!(s, "ppo.value_coef = {}", self.ppo.value_coef).unwrap();
        writeln!(s, "ppo.entropy_coef = {}", self.ppo.entropy_coef).unwrap();
        writeln!(s, "ppo.rollout = {}", self.ppo.rollout_len).unwrap();
        writeln!(s, "ppo.lr = {}", self.ppo.lr).unwrap();
        writeln!(s, "ddpg.gamma = {}", self.ddpg.gamma).unwrap();
        writeln!(s, "ddpg.tau = {}", self.ddpg.tau).unwrap();
        writeln!(s, "ddpg.noise_std = {}", self.ddpg.noise_std).unwrap();
        writeln!(s, "ddpg.batch = {}", self.ddpg.batch_size).unwrap();
        writeln!(s, "ddpg.warmup = {}", self.ddpg.warmup).unwrap();
        writeln!(s, "ddpg.capacity = {}", self.ddpg.capacity).unwrap();
        writeln!(s, "ddpg.actor_lr = {}", self.ddpg.actor_lr).unwrap();
        writeln!(s, "ddpg.critic_lr = {}", self.ddpg.critic_lr).unwrap();
        s
    }

    /// Assemble the environment configuration for a parsed world.
    pub fn env_config(&self, mut world: World) -> EnvConfig {
        world.min_target_clearance = self.min_target_clearance;
        EnvConfig {
            world,
            dt: self.dt,
            max_steps: self.max_steps,
            max_range: self.max_range,
            robot_radius: self.robot_radius,
            reward_kind: self.reward_kind,
            reward: self.reward,
            seed: self.seed,
        }
    }

    /// Default run directory name: `<algo>_<world-stem>_<reward>_s<seed>`.
    pub fn run_name(&self) -> String {
        let stem = self
            .world_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "world".into());
        let reward = match self.reward_kind {
            RewardKind::Basic => "basic",
            RewardKind::Advanced => "advanced",
        };
        format!("{}_{}_{}_s{}", self.algo, stem, reward, self.seed)
    }
}
