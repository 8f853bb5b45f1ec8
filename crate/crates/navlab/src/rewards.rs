//! The two navigation reward functions: a linear-progress form and an
//! exponential-progress form with a heading penalty.
//!
//! Both are pure functions of per-step transition facts. Branch order is
//! fixed: arrival, then collision, then shaping.
//!
//! ```
//! use navlab::rewards::{reward_advanced, reward_basic, RewardConfig, TransitionFacts};
//!
//! let cfg = RewardConfig::default();
//! let facts = TransitionFacts { d_prev: 2.0, d_curr: 1.0, min_range: 3.5, hd: 1.0 };
//! // Linear progress: 10 * (2 - 1) = 10.
//! assert_eq!(reward_basic(&facts, &cfg), 10.0);
//! // Exponential progress: 10 * (2 - 1) * 2^(2/1) = 40, no heading penalty.
//! assert_eq!(reward_advanced(&facts, &cfg), 40.0);
//! ```

/// Constants shared by both reward functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardConfig {
    /// Paid when the robot gets within `c_d` of the target.
    pub r_arrive: f64,
    /// Paid when the closest range reading drops below `c_o`.
    pub r_collision: f64,
    /// Scale on the per-step progress term.
    pub c_r: f64,
    /// Scale on the heading penalty (advanced form only).
    pub c_p: f64,
    /// Target proximity threshold, meters.
    pub c_d: f64,
    /// Collision range threshold, meters.
    pub c_o: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            r_arrive: 100.0,
            r_collision: -100.0,
            c_r: 10.0,
            c_p: 1.0,
            c_d: 0.3,
            c_o: 0.15,
        }
    }
}

/// Which reward function an environment evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RewardKind {
    #[default]
    Basic,
    Advanced,
}

impl RewardKind {
    pub fn evaluate(self, facts: &TransitionFacts, cfg: &RewardConfig) -> f64 {
        match self {
            RewardKind::Basic => reward_basic(facts, cfg),
            RewardKind::Advanced => reward_advanced(facts, cfg),
        }
    }
}

/// Per-step facts a reward function may consult.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionFacts {
    /// Distance to the target before the step, meters.
    pub d_prev: f64,
    /// Distance to the target after the step, meters.
    pub d_curr: f64,
    /// Minimum raw range reading after the step, meters.
    pub min_range: f64,
    /// Heading-alignment score in [0, 1]; see [`heading_score`].
    pub hd: f64,
}

/// Alignment score for a heading deviation in (-pi, pi]: 1 when facing
/// the target, 0 when facing directly away, linear in between.
pub fn heading_score(heading_deviation: f64) -> f64 {
    1.0 - heading_deviation.abs() / std::f64::consts::PI
}

/// Linear-progress reward: arrival bonus, collision penalty, otherwise
/// progress toward the target scaled by `c_r`.
pub fn reward_basic(facts: &TransitionFacts, cfg: &RewardConfig) -> f64 {
    if facts.d_curr < cfg.c_d {
        cfg.r_arrive
    } else if facts.min_range < cfg.c_o {
        cfg.r_collision
    } else {
        cfg.c_r * (facts.d_prev - facts.d_curr)
    }
}

/// Upper bound on the progress-ratio exponent; caps `2^(d_prev/d_curr)`
/// during near-target respawn transients.
pub const MAX_PROGRESS_EXPONENT: f64 = 10.0;

/// Exponential-progress reward with a heading penalty: arrival bonus,
/// collision penalty, otherwise `c_r * (d_prev - d_curr) * 2^(d_prev/d_curr)
/// - c_p * (1 - hd)` with the exponent clamped to
/// [`MAX_PROGRESS_EXPONENT`].
pub fn reward_advanced(facts: &TransitionFacts, cfg: &RewardConfig) -> f64 {
    if facts.d_curr < cfg.c_d {
        cfg.r_arrive
    } else if facts.min_range < cfg.c_o {
        cfg.r_collision
    } else {
        let exponent = (facts.d_prev / facts.d_curr).min(MAX_PROGRESS_EXPONENT);
        cfg.c_r * (facts.d_prev - facts.d_curr) * exponent.exp2() - cfg.c_p * (1.0 - facts.hd)
    }
}
