//! Deep Q-learning: value network, prioritized replay, training loop,
//! convergence phase detection and checkpoints.

mod agent;
mod checkpoint;
mod convergence;
mod network;
mod replay;

pub use agent::{epsilon_at, greedy, select_action, train_step, Learner, QFunction, TabularQ};
pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use convergence::{detect_convergence, ConvergenceParams, ConvergenceReport};
pub use network::{huber, huber_grad, QNetwork, Sample};
pub use replay::{ReplayBuffer, SampledBatch, SumTree, Transition};

use alloc::string::String;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DqnError {
    #[error("input has {got} features, network expects {expected}")]
    DimMismatch { expected: usize, got: usize },
    #[error("replay holds {len} transitions, {need} requested")]
    Underfull { len: usize, need: usize },
    #[error("need at least {need} episodes of history, got {len}")]
    ShortHistory { len: usize, need: usize },
    #[error("checkpoint line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid schedule: {0}")]
    Schedule(&'static str),
}

/// Unit of the target-network synchronisation period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetSync {
    Steps,
    Episodes,
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSchedule {
    pub learning_rate: f64,
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    /// Fraction of the episodes over which ε decays.
    pub epsilon_decay_frac: f64,
    pub target_period: u64,
    pub target_sync: TargetSync,
    pub batch_size: usize,
    pub episodes: u32,
    pub warmup: usize,
    pub buffer_capacity: usize,
    pub priority_alpha: f64,
    pub beta_start: f64,
    pub beta_end: f64,
    pub priority_eps: f64,
    pub dropout: f64,
    pub hidden: [usize; 2],
    pub huber_delta: f64,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            gamma: 0.9,
            epsilon_start: 1.0,
            epsilon_end: 0.05,
            epsilon_decay_frac: 0.4,
            target_period: 1000,
            target_sync: TargetSync::Steps,
            batch_size: 32,
            episodes: 500,
            warmup: 1000,
            buffer_capacity: 50_000,
            priority_alpha: 0.6,
            beta_start: 0.4,
            beta_end: 1.0,
            priority_eps: 1e-3,
            dropout: 0.1,
            hidden: [64, 64],
            huber_delta: 1.0,
        }
    }
}

impl TrainSchedule {
    pub fn validate(&self) -> Result<(), &'static str> {
        let check = |ok: bool, msg| if ok { Ok(()) } else { Err(msg) };
        check(self.learning_rate > 0.0 && self.learning_rate.is_finite(), "learning rate must be positive")?;
        check((0.0..1.0).contains(&self.gamma), "gamma must lie in [0, 1)")?;
        check(
            (0.0..=1.0).contains(&self.epsilon_start) && (0.0..=1.0).contains(&self.epsilon_end),
            "epsilon bounds must lie in [0, 1]",
        )?;
        check(self.epsilon_decay_frac > 0.0 && self.epsilon_decay_frac <= 1.0, "epsilon decay fraction must be in (0, 1]")?;
        check(self.target_period >= 1, "target period must be at least 1")?;
        check(self.batch_size >= 1, "batch size must be at least 1")?;
        check(self.episodes >= 1, "episodes must be at least 1")?;
        check(self.buffer_capacity >= self.batch_size, "buffer smaller than a batch")?;
        check(self.warmup >= self.batch_size && self.warmup <= self.buffer_capacity, "warmup must lie in [batch, capacity]")?;
        check(self.priority_alpha >= 0.0 && self.priority_eps > 0.0, "priority constants out of range")?;
        check(
            (0.0..=1.0).contains(&self.beta_start) && (0.0..=1.0).contains(&self.beta_end),
            "importance exponent must lie in [0, 1]",
        )?;
        check((0.0..1.0).contains(&self.dropout), "dropout must lie in [0, 1)")?;
        check(self.hidden.iter().all(|&h| h >= 1), "hidden layers must be non-empty")?;
        check(self.huber_delta > 0.0, "huber delta must be positive")?;
        Ok(())
    }

    /// Importance exponent annealed linearly over training.
    pub fn beta_at(&self, episode: u32) -> f64 {
        let f = (episode as f64 / self.episodes.max(1) as f64).min(1.0);
        self.beta_start + (self.beta_end - self.beta_start) * f
    }
}
