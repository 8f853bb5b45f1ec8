//! Training and evaluation drivers: the episode loop, update cadence,
//! metrics persistence and checkpointing.

use crate::algos::{
    ddpg_update, select_action, ActionMode, DDPGConfig, ReplayBuffer, TrainError,
    TrajectoryBuffer, Transition,
};
use crate::config::{Algo, RunConfig};
use crate::env::{Env, EnvError, Observation, StepEvent, OBSERVATION_DIM};
use crate::metrics::{
    aggregate, EpisodeRecord, MetricsError, MetricsWriter, RunReport,
};
use crate::nn::network::{Actor, Critic};
use crate::nn::{AdamState, ArchKind, Checkpoint, CheckpointError, ACTION_DIM};
use crate::world::{parse_world, WorldError};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

impl HarnessError {
    /// Process exit code: 2 for unparseable configs/worlds, 3 for
    /// numerical aborts, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::World(_) => 2,
            HarnessError::Train(_) => 3,
            _ => 1,
        }
    }
}

/// Result of a completed training or evaluation run.
#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<EpisodeRecord>,
    pub report: RunReport,
}

fn arch_kind(algo: Algo) -> ArchKind {
    match algo {
        Algo::PpoMlp => ArchKind::Mlp,
        _ => ArchKind::Res,
    }
}

struct EpisodeTracker {
    episode: u32,
    cum_reward: f64,
    steps: u32,
    arrivals: u32,
    started: Instant,
}

impl EpisodeTracker {
    fn new(episode: u32) -> Self {
        Self {
            episode,
            cum_reward: 0.0,
            steps: 0,
            arrivals: 0,
            started: Instant::now(),
        }
    }

    fn absorb(&mut self, reward: f64, event: StepEvent) {
        self.cum_reward += reward;
        self.steps += 1;
        if event == StepEvent::Arrived {
            self.arrivals += 1;
        }
    }

    fn finish(&self, event: StepEvent, timing: bool) -> EpisodeRecord {
        EpisodeRecord {
            episode: self.episode,
            cum_reward: self.cum_reward,
            steps: self.steps,
            arrivals: self.arrivals,
            event,
            wall_ms: if timing {
                self.started.elapsed().as_millis() as u64
            } else {
                0
            },
        }
    }
}

fn checkpoint_path(out_dir: &Path, episode: Option<u32>) -> PathBuf {
    match episode {
        Some(ep) => out_dir.join(format!("ckpt_{ep:05}.bin")),
        None => out_dir.join("ckpt_final.bin"),
    }
}

/// Train per the run configuration, writing `metrics.csv`, periodic
/// checkpoints, and `config.resolved` into `out_dir`.
pub fn run_training(cfg: &RunConfig, out_dir: &Path) -> Result<RunOutcome, HarnessError> {
    if cfg.episodes == 0 {
        return Err(HarnessError::Invalid("episodes must be >= 1".into()));
    }
    let world = parse_world(&cfg.world_path)?;
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("config.resolved"), cfg.to_file_format())?;
    let mut env = Env::new(cfg.env_config(world));
    let mut writer = MetricsWriter::create(&out_dir.join("metrics.csv"))?;
    let records = match cfg.algo {
        Algo::PpoRes | Algo::PpoMlp => train_ppo(cfg, &mut env, out_dir, &mut writer)?,
        Algo::Ddpg => train_ddpg(cfg, &mut env, out_dir, &mut writer)?,
    };
    let report = aggregate(&records);
    Ok(RunOutcome { records, report })
}

fn save_ppo_checkpoint(
    path: &Path,
    algo: Algo,
    hidden: usize,
    actor: &Actor,
    critic: &Critic,
    actor_opt: &AdamState,
    critic_opt: &AdamState,
) -> Result<(), CheckpointError> {
    let mut ck = Checkpoint::new(algo.as_str(), hidden);
    ck.push("actor", actor);
    ck.push("critic", critic);
    ck.push("adam_actor", actor_opt);
    ck.push("adam_critic", critic_opt);
    ck.save(path)
}

fn train_ppo(
    cfg: &RunConfig,
    env: &mut Env,
    out_dir: &Path,
    writer: &mut MetricsWriter,
) -> Result<Vec<EpisodeRecord>, HarnessError> {
    let kind = arch_kind(cfg.algo);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut actor = Actor::init(kind, OBSERVATION_DIM, cfg.hidden, &mut rng);
    let mut critic = Critic::init(kind, OBSERVATION_DIM, cfg.hidden, &mut rng);
    let mut actor_opt = AdamState::new(cfg.ppo.lr, &actor);
    let mut critic_opt = AdamState::new(cfg.ppo.lr, &critic);
    let mut buffer = TrajectoryBuffer::new();

    let mut records = Vec::with_capacity(cfg.episodes as usize);
    let mut obs: Observation = env.reset(Some(cfg.seed))?;
    let mut tracker = EpisodeTracker::new(0);

    while records.len() < cfg.episodes as usize {
        let obs_vec = obs.as_vector();
        let (action, log_prob) =
            select_action(&actor, &obs_vec, ActionMode::Stochastic, &mut rng);
        let value = critic.forward(&obs_vec);
        let step = env.step(action)?;
        let next_vec = step.observation.as_vector();
        buffer.push(Transition {
            obs: obs_vec,
            action,
            log_prob: log_prob.expect("stochastic mode returns log-prob"),
            reward: step.reward,
            next_obs: next_vec,
            done: step.done,
            value,
        });
        tracker.absorb(step.reward, step.event);

        if buffer.len() >= cfg.ppo.rollout_len {
            let last_done = buffer.transitions().last().map(|t| t.done).unwrap_or(false);
            let bootstrap = if last_done { 0.0 } else { critic.forward(&next_vec) };
            buffer.finalize(cfg.ppo.gamma, cfg.ppo.gae_lambda, bootstrap);
            ppo_step(
                &mut actor,
                &mut critic,
                &mut actor_opt,
                &mut critic_opt,
                &buffer,
                cfg,
                &mut rng,
            )?;
            buffer.clear();
        }

        if step.done {
            let record = tracker.finish(step.event, cfg.timing);
            writer.append(&record)?;
            records.push(record);
            let finished = records.len() as u32;
            if finished % cfg.checkpoint_every == 0 && finished < cfg.episodes {
                save_ppo_checkpoint(
                    &checkpoint_path(out_dir, Some(finished)),
                    cfg.algo,
                    cfg.hidden,
                    &actor,
                    &critic,
                    &actor_opt,
                    &critic_opt,
                )?;
            }
            if records.len() < cfg.episodes as usize {
                obs = env.reset(None)?;
                tracker = EpisodeTracker::new(finished);
            }
        } else {
            obs = step.observation;
        }
    }
    save_ppo_checkpoint(
        &checkpoint_path(out_dir, None),
        cfg.algo,
        cfg.hidden,
        &actor,
        &critic,
        &actor_opt,
        &critic_opt,
    )?;
    Ok(records)
}

fn ppo_step(
    actor: &mut Actor,
    critic: &mut Critic,
    actor_opt: &mut AdamState,
    critic_opt: &mut AdamState,
    buffer: &TrajectoryBuffer,
    cfg: &RunConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(), TrainError> {
    crate::algos::ppo_update(actor, critic, actor_opt, critic_opt, buffer, &cfg.ppo, rng)?;
    Ok(())
}

fn save_ddpg_checkpoint(
    path: &Path,
    hidden: usize,
    actor: &Actor,
    critic: &Critic,
    target_actor: &Actor,
    target_critic: &Critic,
    actor_opt: &AdamState,
    critic_opt: &AdamState,
) -> Result<(), CheckpointError> {
    let mut ck = Checkpoint::new(Algo::Ddpg.as_str(), hidden);
    ck.push("actor", actor);
    ck.push("critic", critic);
    ck.push("target_actor", target_actor);
    ck.push("target_critic", target_critic);
    ck.push("adam_actor", actor_opt);
    ck.push("adam_critic", critic_opt);
    ck.save(path)
}

fn train_ddpg(
    cfg: &RunConfig,
    env: &mut Env,
    out_dir: &Path,
    writer: &mut MetricsWriter,
) -> Result<Vec<EpisodeRecord>, HarnessError> {
    let ddpg: &DDPGConfig = &cfg.ddpg;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut actor = Actor::init(ArchKind::Res, OBSERVATION_DIM, cfg.hidden, &mut rng);
    let mut critic = Critic::init(
        ArchKind::Res,
        OBSERVATION_DIM + ACTION_DIM,
        cfg.hidden,
        &mut rng,
    );
    let mut target_actor = actor.clone();
    let mut target_critic = critic.clone();
    let mut actor_opt = AdamState::new(ddpg.actor_lr, &actor);
    let mut critic_opt = AdamState::new(ddpg.critic_lr, &critic);
    let mut replay = ReplayBuffer::new(ddpg.capacity);

    let mut records = Vec::with_capacity(cfg.episodes as usize);
    let mut obs: Observation = env.reset(Some(cfg.seed))?;
    let mut tracker = EpisodeTracker::new(0);
    let mut total_steps = 0usize;

    while records.len() < cfg.episodes as usize {
        let obs_vec = obs.as_vector();
        let action = if total_steps < ddpg.warmup {
            [
                rng.random_range(0.0..=1.0),
                rng.random_range(-1.0..=1.0),
            ]
        } else {
            select_action(
                &actor,
                &obs_vec,
                ActionMode::DdpgExplore {
                    noise_std: ddpg.noise_std,
                },
                &mut rng,
            )
            .0
        };
        let step = env.step(action)?;
        replay.push(Transition {
            obs: obs_vec,
            action,
            log_prob: 0.0,
            reward: step.reward,
            next_obs: step.observation.as_vector(),
            done: step.done,
            value: 0.0,
        });
        total_steps += 1;
        tracker.absorb(step.reward, step.event);

        if replay.len() >= ddpg.warmup {
            ddpg_update(
                &mut actor,
                &mut critic,
                &mut target_actor,
                &mut target_critic,
                &replay,
                ddpg,
                &mut actor_opt,
                &mut critic_opt,
                &mut rng,
            )?;
        }

        if step.done {
            let record = tracker.finish(step.event, cfg.timing);
            writer.append(&record)?;
            records.push(record);
            let finished = records.len() as u32;
            if finished % cfg.checkpoint_every == 0 && finished < cfg.episodes {
                save_ddpg_checkpoint(
                    &checkpoint_path(out_dir, Some(finished)),
                    cfg.hidden,
                    &actor,
                    &critic,
                    &target_actor,
                    &target_critic,
                    &actor_opt,
                    &critic_opt,
                )?;
            }
            if records.len() < cfg.episodes as usize {
                obs = env.reset(None)?;
                tracker = EpisodeTracker::new(finished);
            }
        } else {
            obs = step.observation;
        }
    }
    save_ddpg_checkpoint(
        &checkpoint_path(out_dir, None),
        cfg.hidden,
        &actor,
        &critic,
        &target_actor,
        &target_critic,
        &actor_opt,
        &critic_opt,
    )?;
    Ok(records)
}

/// Load the policy (and its algorithm tag) from a checkpoint.
pub fn load_policy(path: &Path) -> Result<(Actor, Algo), HarnessError> {
    let ck = Checkpoint::load(path)?;
    let algo = Algo::parse(&ck.arch).ok_or_else(|| {
        HarnessError::Invalid(format!("unknown architecture tag {:?} in checkpoint", ck.arch))
    })?;
    // Parameter shapes come from the checkpoint itself; the RNG values
    // are immediately overwritten.
    let mut seed_rng = ChaCha8Rng::seed_from_u64(0);
    let mut actor = Actor::init(
        arch_kind(algo),
        OBSERVATION_DIM,
        ck.hidden as usize,
        &mut seed_rng,
    );
    ck.read_into("actor", &mut actor)?;
    Ok((actor, algo))
}

/// Evaluate a checkpointed policy with deterministic actions; no
/// learning. Returns per-episode records and the aggregate report.
pub fn run_eval(
    checkpoint: &Path,
    cfg: &RunConfig,
    expected_algo: Option<Algo>,
) -> Result<RunOutcome, HarnessError> {
    if cfg.episodes == 0 {
        return Err(HarnessError::Invalid("eval requires at least one episode".into()));
    }
    let (actor, algo) = load_policy(checkpoint)?;
    if let Some(expected) = expected_algo {
        if expected != algo {
            return Err(HarnessError::Invalid(format!(
                "checkpoint architecture is {algo}, but {expected} was requested"
            )));
        }
    }
    let world = parse_world(&cfg.world_path)?;
    let mut env = Env::new(cfg.env_config(world));
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut records = Vec::with_capacity(cfg.episodes as usize);
    let mut obs = env.reset(Some(cfg.seed))?;
    let mut tracker = EpisodeTracker::new(0);
    while records.len() < cfg.episodes as usize {
        let (action, _) =
            select_action(&actor, &obs.as_vector(), ActionMode::Deterministic, &mut rng);
        let step = env.step(action)?;
        tracker.absorb(step.reward, step.event);
        if step.done {
            let record = tracker.finish(step.event, cfg.timing);
            records.push(record);
            if records.len() < cfg.episodes as usize {
                obs = env.reset(None)?;
                tracker = EpisodeTracker::new(records.len() as u32);
            }
        } else {
            obs = step.observation;
        }
    }
    let report = aggregate(&records);
    Ok(RunOutcome { records, report })
}

/// Aggregate each run directory's `metrics.csv` into one markdown table.
pub fn compare_runs(dirs: &[PathBuf]) -> Result<String, HarnessError> {
    if dirs.is_empty() {
        return Err(HarnessError::Invalid("compare needs at least one run directory".into()));
    }
    let mut rows = Vec::with_capacity(dirs.len());
    for dir in dirs {
        let csv = dir.join("metrics.csv");
        if !csv.exists() {
            return Err(HarnessError::Invalid(format!(
                "{} does not contain a completed run (no metrics.csv)",
                dir.display()
            )));
        }
        let records = crate::metrics::read_metrics_csv(&csv)?;
        let label = dir
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| dir.display().to_string());
        rows.push((label, aggregate(&records)));
    }
    Ok(crate::metrics::compare_table(rows))
}

/// Render a run report as markdown, including the alternative
/// episodes-per-step-budget reading.
pub fn report_markdown(label: &str, report: &RunReport) -> String {
    format!(
        "| Run | Avg. Reward | Episodes | Success % | Avg. Steps/Ep |\n\
         |---|---|---|---|---|\n\
         | {} | {:.2} | {} | {:.2} | {:.2} |\n\
         \n\
         Episodes completed per 10000 steps: {:.2}\n",
        label,
        report.avg_reward,
        report.episodes,
        report.success_pct,
        report.avg_steps,
        report.episodes_per_10k_steps
    )
}
