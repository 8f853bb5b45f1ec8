//! The episodic navigation environment: LiDAR acquisition, observation
//! assembly, action execution, reward evaluation, termination and target
//! respawn.
//!
//! One instance is single-threaded; run independent instances for
//! parallel rollouts.
//!
//! ```
//! use navlab::env::{min_pool, LidarScan, BEAM_COUNT};
//!
//! let mut ranges = [3.5; BEAM_COUNT];
//! ranges[0] = 0.5;
//! ranges[1] = 0.2;
//! ranges[2] = 0.9;
//! let pooled = min_pool(&LidarScan { ranges });
//! // Each pooled sector keeps the nearest return of its three beams.
//! assert_eq!(pooled[0], 0.2);
//! assert_eq!(pooled[1], 3.5);
//! ```

use crate::geometry::{
    self, bearing_to, polar_to_target, step_kinematics, Pose, Vec2,
};
use crate::rewards::{heading_score, RewardConfig, RewardKind, TransitionFacts};
use crate::world::World;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use thiserror::Error;

/// Hard ceiling on the commanded forward speed, m/s.
pub const MAX_LINEAR_SPEED: f64 = 0.25;
/// Hard ceiling on the commanded turn rate, rad/s.
pub const MAX_ANGULAR_SPEED: f64 = 1.0;
/// Number of raw LiDAR beams per scan.
pub const BEAM_COUNT: usize = 30;
/// Number of min-pooled sectors in the observation.
pub const POOLED_COUNT: usize = 10;
/// Total observation dimension.
pub const OBSERVATION_DIM: usize = 16;

/// A bounded velocity command. Construction clamps into
/// [0, MAX_LINEAR_SPEED] x [-MAX_ANGULAR_SPEED, MAX_ANGULAR_SPEED];
/// the platform has no reverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwistCommand {
    linear: f64,
    angular: f64,
}

impl TwistCommand {
    pub fn new(linear: f64, angular: f64) -> Self {
        Self {
            linear: linear.clamp(0.0, MAX_LINEAR_SPEED),
            angular: angular.clamp(-MAX_ANGULAR_SPEED, MAX_ANGULAR_SPEED),
        }
    }

    pub fn linear(&self) -> f64 {
        self.linear
    }

    pub fn angular(&self) -> f64 {
        self.angular
    }
}

/// One LiDAR sweep: 30 ranges uniformly spaced over [-90deg, +90deg]
/// relative to the robot heading, beam 0 on the right.
#[derive(Debug, Clone, PartialEq)]
pub struct LidarScan {
    pub ranges: [f64; BEAM_COUNT],
}

impl LidarScan {
    /// Beam angle offset from the heading for beam `i`.
    pub fn beam_offset(i: usize) -> f64 {
        -PI / 2.0 + i as f64 * (PI / (BEAM_COUNT as f64 - 1.0))
    }

    pub fn min_range(&self) -> f64 {
        self.ranges.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Reduce 30 beams to 10 sector ranges by taking the minimum of each
/// contiguous 3-beam window, preserving angular order.
pub fn min_pool(scan: &LidarScan) -> [f64; POOLED_COUNT] {
    let mut out = [0.0; POOLED_COUNT];
    for (i, window) in scan.ranges.chunks_exact(3).enumerate() {
        out[i] = window[0].min(window[1]).min(window[2]);
    }
    out
}

/// Scale pooled ranges into (0, 1] by the sensor's maximum range.
pub fn normalize_ranges(pooled: &[f64; POOLED_COUNT], max_range: f64) -> [f64; POOLED_COUNT] {
    let mut out = *pooled;
    for v in &mut out {
        *v /= max_range;
    }
    out
}

/// The 16-dimensional observation.
///
/// Component order in [`Observation::as_vector`]: 10 pooled normalized
/// ranges, previous linear and angular velocity (normalized), target
/// distance over the arena diagonal, target bearing / pi, yaw / pi,
/// heading deviation / pi.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub pooled_ranges: [f64; POOLED_COUNT],
    pub prev_linear: f64,
    pub prev_angular: f64,
    pub target_distance: f64,
    pub target_bearing: f64,
    pub yaw: f64,
    pub heading_deviation: f64,
}

impl Observation {
    pub fn as_vector(&self) -> [f64; OBSERVATION_DIM] {
        let mut v = [0.0; OBSERVATION_DIM];
        v[..POOLED_COUNT].copy_from_slice(&self.pooled_ranges);
        v[10] = self.prev_linear;
        v[11] = self.prev_angular;
        v[12] = self.target_distance;
        v[13] = self.target_bearing;
        v[14] = self.yaw;
        v[15] = self.heading_deviation;
        v
    }
}

/// Assemble an observation from raw state.
pub fn build_observation(
    pose: Pose,
    scan: &LidarScan,
    prev_linear: f64,
    prev_angular: f64,
    target: Vec2,
    max_range: f64,
    arena_diagonal: f64,
) -> Observation {
    let pooled = normalize_ranges(&min_pool(scan), max_range);
    let (distance, heading_deviation) = polar_to_target(pose, target);
    Observation {
        pooled_ranges: pooled,
        prev_linear,
        prev_angular,
        target_distance: distance / arena_diagonal,
        target_bearing: bearing_to(pose.position, target) / PI,
        yaw: pose.yaw / PI,
        heading_deviation: heading_deviation / PI,
    }
}

/// What happened during a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    None,
    /// Target reached; a new target was spawned and the episode continues.
    Arrived,
    Collided,
    Timeout,
}

impl std::fmt::Display for StepEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            StepEvent::None => "none",
            StepEvent::Arrived => "arrived",
            StepEvent::Collided => "collided",
            StepEvent::Timeout => "timeout",
        };
        f.write_str(s)
    }
}

/// Result of one environment step. `done` holds exactly for collisions
/// and timeouts; arrivals respawn the target and continue.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub event: StepEvent,
}

/// Environment configuration. The reward thresholds `c_d` / `c_o` live in
/// the nested [`RewardConfig`].
#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub world: World,
    pub dt: f64,
    pub max_steps: u32,
    pub max_range: f64,
    pub robot_radius: f64,
    pub reward_kind: RewardKind,
    pub reward: RewardConfig,
    pub seed: u64,
}

impl EnvConfig {
    pub fn new(world: World) -> Self {
        Self {
            world,
            dt: 0.1,
            max_steps: 500,
            max_range: 3.5,
            robot_radius: 0.105,
            reward_kind: RewardKind::Basic,
            reward: RewardConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("step called before reset")]
    NotReset,
    #[error("step called after the episode finished")]
    EpisodeOver,
    #[error("no valid target position found after {attempts} attempts; spawn region blocked?")]
    TargetSpawnFailed { attempts: u32 },
}

const TARGET_SAMPLE_ATTEMPTS: u32 = 10_000;

/// The navigation environment.
pub struct Env {
    cfg: EnvConfig,
    rng: ChaCha8Rng,
    pose: Pose,
    target: Vec2,
    last_scan: LidarScan,
    prev_linear: f64,
    prev_angular: f64,
    prev_distance: f64,
    steps: u32,
    started: bool,
    done: bool,
}

impl Env {
    pub fn new(cfg: EnvConfig) -> Self {
        let seed = cfg.seed;
        let pose = cfg.world.robot_spawn;
        let target = cfg.world.target;
        Self {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pose,
            target,
            last_scan: LidarScan {
                ranges: [0.0; BEAM_COUNT],
            },
            prev_linear: 0.0,
            prev_angular: 0.0,
            prev_distance: 0.0,
            steps: 0,
            started: false,
            done: false,
        }
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn pose(&self) -> Pose {
        self.pose
    }

    pub fn target(&self) -> Vec2 {
        self.target
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    /// Override the current target. Debug/test hook; respects no
    /// clearance rules.
    pub fn set_target(&mut self, target: Vec2) {
        self.target = target;
        self.prev_distance = self.pose.position.distance(target);
    }

    fn scan(&self) -> LidarScan {
        let mut ranges = [0.0; BEAM_COUNT];
        for (i, r) in ranges.iter_mut().enumerate() {
            let angle = self.pose.yaw + LidarScan::beam_offset(i);
            *r = geometry::ray_cast(
                self.pose.position,
                Vec2::from_angle(angle),
                &self.cfg.world.obstacles,
                self.cfg.max_range,
            );
        }
        LidarScan { ranges }
    }

    fn sample_target(&mut self) -> Result<Vec2, EnvError> {
        let region = self.cfg.world.target_spawn_region;
        for _ in 0..TARGET_SAMPLE_ATTEMPTS {
            let p = Vec2::new(
                self.rng.random_range(region.min.x..=region.max.x),
                self.rng.random_range(region.min.y..=region.max.y),
            );
            if self.cfg.world.clearance(p) >= self.cfg.world.min_target_clearance
                && p.distance(self.pose.position) >= self.cfg.reward.c_d
            {
                return Ok(p);
            }
        }
        Err(EnvError::TargetSpawnFailed {
            attempts: TARGET_SAMPLE_ATTEMPTS,
        })
    }

    fn observation(&self) -> Observation {
        build_observation(
            self.pose,
            &self.last_scan,
            self.prev_linear,
            self.prev_angular,
            self.target,
            self.cfg.max_range,
            self.cfg.world.bounds.diagonal(),
        )
    }

    /// Start a fresh episode. `Some(seed)` reseeds the environment's RNG
    /// first; `None` continues the existing stream (so consecutive
    /// episodes of a seeded run stay deterministic).
    pub fn reset(&mut self, seed: Option<u64>) -> Result<Observation, EnvError> {
        if let Some(s) = seed {
            self.rng = ChaCha8Rng::seed_from_u64(s);
        }
        self.pose = self.cfg.world.robot_spawn;
        self.target = self.sample_target()?;
        self.prev_linear = 0.0;
        self.prev_angular = 0.0;
        self.prev_distance = self.pose.position.distance(self.target);
        self.steps = 0;
        self.started = true;
        self.done = false;
        self.last_scan = self.scan();
        Ok(self.observation())
    }

    /// Execute a normalized action `(a_lin in [0,1], a_ang in [-1,1])`.
    ///
    /// Scales to a [`TwistCommand`], integrates the kinematics over `dt`,
    /// casts a fresh scan and evaluates the configured reward. Arrival
    /// respawns the target without ending the episode; collision and
    /// timeout end it.
    pub fn step(&mut self, action: [f64; 2]) -> Result<StepResult, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.done {
            return Err(EnvError::EpisodeOver);
        }

        let cmd = TwistCommand::new(
            action[0] * MAX_LINEAR_SPEED,
            action[1] * MAX_ANGULAR_SPEED,
        );
        let d_prev = self.prev_distance;

        self.pose = step_kinematics(self.pose, cmd.linear(), cmd.angular(), self.cfg.dt);
        self.last_scan = self.scan();
        self.steps += 1;

        let (d_curr, heading_deviation) = polar_to_target(self.pose, self.target);
        let min_range = self.last_scan.min_range();
        let facts = TransitionFacts {
            d_prev,
            d_curr,
            min_range,
            hd: heading_score(heading_deviation),
        };
        let reward = self.cfg.reward_kind.evaluate(&facts, &self.cfg.reward);

        let disc_hit = geometry::collision(
            self.pose,
            self.cfg.robot_radius,
            &self.cfg.world.obstacles,
            &self.cfg.world.bounds,
        );

        let event = if d_curr < self.cfg.reward.c_d {
            self.target = self.sample_target()?;
            self.prev_distance = self.pose.position.distance(self.target);
            StepEvent::Arrived
        } else if min_range < self.cfg.reward.c_o || disc_hit {
            self.prev_distance = d_curr;
            StepEvent::Collided
        } else if self.steps >= self.cfg.max_steps {
            self.prev_distance = d_curr;
            StepEvent::Timeout
        } else {
            self.prev_distance = d_curr;
            StepEvent::None
        };
        self.done = matches!(event, StepEvent::Collided | StepEvent::Timeout);

        self.prev_linear = cmd.linear() / MAX_LINEAR_SPEED;
        self.prev_angular = cmd.angular() / MAX_ANGULAR_SPEED;

        Ok(StepResult {
            observation: self.observation(),
            reward,
            done: self.done,
            event,
        })
    }
}
