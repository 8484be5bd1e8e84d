use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::network::{QNetwork, Sample};
use super::replay::{ReplayBuffer, Transition};
use super::{DqnError, TargetSync, TrainSchedule};
use crate::math;
use crate::rng::SimRng;

/// Anything that maps a state to one value per action and can be fitted to
/// regression targets.
pub trait QFunction: Clone {
    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>, DqnError>;

    fn actions(&self) -> usize;

    /// One update toward the batch targets; returns the loss and per-sample
    /// TD errors `Q − target`.
    fn fit(&mut self, batch: &[Sample], schedule: &TrainSchedule, rng: &mut SimRng) -> Result<(f64, Vec<f64>), DqnError>;
}

impl QFunction for QNetwork {
    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>, DqnError> {
        self.forward(state)
    }

    fn actions(&self) -> usize {
        self.output_dim()
    }

    fn fit(&mut self, batch: &[Sample], schedule: &TrainSchedule, rng: &mut SimRng) -> Result<(f64, Vec<f64>), DqnError> {
        let (loss, td, grad) = self.loss_and_grad(batch, schedule.huber_delta, Some(rng))?;
        self.sgd(&grad, schedule.learning_rate);
        Ok((loss, td))
    }
}

/// Lookup-table Q-function; the state vector's first component is the state
/// index.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularQ {
    pub states: usize,
    pub action_count: usize,
    pub q: Vec<f64>,
}

impl TabularQ {
    pub fn new(states: usize, actions: usize) -> Self {
        Self { states, action_count: actions, q: vec![0.0; states * actions] }
    }

    fn index(&self, state: &[f64]) -> Result<usize, DqnError> {
        let s = state.first().copied().unwrap_or(-1.0);
        if !(s >= 0.0) || s as usize >= self.states {
            return Err(DqnError::DimMismatch { expected: self.states, got: s.max(0.0) as usize });
        }
        Ok(s as usize)
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.q[s * self.action_count + a]
    }
}

impl QFunction for TabularQ {
    fn q_values(&self, state: &[f64]) -> Result<Vec<f64>, DqnError> {
        let s = self.index(state)?;
        Ok(self.q[s * self.action_count..(s + 1) * self.action_count].to_vec())
    }

    fn actions(&self) -> usize {
        self.action_count
    }

    /// Squared-error step: `Q(s,a) ← Q(s,a) − lr·w·(Q(s,a) − y)`.
    fn fit(&mut self, batch: &[Sample], schedule: &TrainSchedule, _rng: &mut SimRng) -> Result<(f64, Vec<f64>), DqnError> {
        let mut loss = 0.0;
        let mut td = Vec::with_capacity(batch.len());
        for s in batch {
            let i = self.index(s.state)? * self.action_count + s.action;
            let err = self.q[i] - s.target;
            td.push(err);
            loss += 0.5 * s.weight * err * err;
            self.q[i] -= schedule.learning_rate * s.weight * err;
        }
        Ok((loss / batch.len().max(1) as f64, td))
    }
}

/// Index of the largest value, lowest index on ties.
pub fn greedy(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate() {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// ε-greedy choice over `q`.
pub fn select_action<R: Rng + ?Sized>(q: &[f64], epsilon: f64, rng: &mut R) -> usize {
    if epsilon > 0.0 && rng.gen::<f64>() < epsilon {
        rng.gen_range(0..q.len())
    } else {
        greedy(q)
    }
}

/// Exploration rate for `episode`: exponential decay from start to end over
/// the decay fraction of training, constant afterwards.
pub fn epsilon_at(schedule: &TrainSchedule, episode: u32) -> f64 {
    let horizon = (schedule.episodes as f64 * schedule.epsilon_decay_frac).max(1.0);
    let f = (episode as f64 / horizon).min(1.0);
    if schedule.epsilon_start <= 0.0 || schedule.epsilon_end <= 0.0 {
        return schedule.epsilon_start + (schedule.epsilon_end - schedule.epsilon_start) * f;
    }
    schedule.epsilon_start * math::pow(schedule.epsilon_end / schedule.epsilon_start, f)
}

/// Online and target Q-functions with their replay memory.
#[derive(Debug, Clone)]
pub struct Learner<Q: QFunction> {
    pub online: Q,
    pub target: Q,
    pub schedule: TrainSchedule,
    pub buffer: ReplayBuffer,
    pub steps: u64,
    pub syncs: u64,
}

impl<Q: QFunction> Learner<Q> {
    pub fn new(online: Q, schedule: TrainSchedule) -> Self {
        let buffer = ReplayBuffer::new(schedule.buffer_capacity, schedule.priority_alpha, schedule.priority_eps);
        Self { target: online.clone(), online, schedule, buffer, steps: 0, syncs: 0 }
    }

    pub fn remember(&mut self, t: Transition) {
        self.buffer.push(t);
    }

    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
        self.syncs += 1;
    }

    /// Episode-based target synchronisation hook.
    pub fn end_episode(&mut self, episode: u32) {
        if self.schedule.target_sync == TargetSync::Episodes && (episode as u64 + 1) % self.schedule.target_period == 0 {
            self.sync_target();
        }
    }
}

/// One prioritized TD update. Returns `None` while the buffer is below the
/// warmup size.
pub fn train_step<Q: QFunction>(
    learner: &mut Learner<Q>,
    beta: f64,
    replay_rng: &mut SimRng,
    dropout_rng: &mut SimRng,
) -> Result<Option<f64>, DqnError> {
    let sch = &learner.schedule;
    if learner.buffer.len() < sch.warmup.max(sch.batch_size) {
        return Ok(None);
    }
    let batch = learner.buffer.sample(sch.batch_size, beta, replay_rng)?;
    let mut targets = Vec::with_capacity(batch.indices.len());
    for &i in &batch.indices {
        let t = learner.buffer.get(i);
        let y = if t.done {
            t.reward
        } else {
            let next = learner.target.q_values(&t.next_state)?;
            t.reward + sch.gamma * next.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        };
        targets.push(y);
    }
    let samples: Vec<Sample> = batch
        .indices
        .iter()
        .zip(&targets)
        .zip(&batch.weights)
        .map(|((&i, &target), &weight)| {
            let t = learner.buffer.get(i);
            Sample { state: &t.state, action: t.action, target, weight }
        })
        .collect();
    let (loss, td) = learner.online.fit(&samples, &learner.schedule, dropout_rng)?;
    drop(samples);
    for (&i, e) in batch.indices.iter().zip(td) {
        learner.buffer.update_priority(i, e);
    }
    learner.steps += 1;
    if learner.schedule.target_sync == TargetSync::Steps && learner.steps % learner.schedule.target_period == 0 {
        learner.sync_target();
    }
    Ok(Some(loss))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};

    #[test]
    fn argmax_and_ties() {
        let mut rng = stream(1, Stream::Policy);
        assert_eq!(select_action(&[0.1, 0.9, 0.3], 0.0, &mut rng), 1);
        assert_eq!(select_action(&[0.5, 0.5, 0.5], 0.0, &mut rng), 0);
    }

    #[test]
    fn uniform_exploration_passes_chi_square() {
        let mut rng = stream(2, Stream::Policy);
        let q = [0.0, 5.0, 1.0, 2.0, 3.0];
        let mut counts = [0u64; 5];
        for _ in 0..10_000 {
            counts[select_action(&q, 1.0, &mut rng)] += 1;
        }
        let e = 2000.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e) * (c as f64 - e) / e).sum();
        // p = 0.01 critical value for 4 degrees of freedom
        assert!(chi2 < 13.277, "{chi2}");
    }

    #[test]
    fn epsilon_schedule_endpoints() {
        let s = TrainSchedule { episodes: 100, ..TrainSchedule::default() };
        assert_eq!(epsilon_at(&s, 0), 1.0);
        assert!((epsilon_at(&s, 40) - 0.05).abs() < 1e-12);
        assert!((epsilon_at(&s, 99) - 0.05).abs() < 1e-12);
        assert!(epsilon_at(&s, 10) > epsilon_at(&s, 20));
    }

    fn schedule(gamma: f64) -> TrainSchedule {
        TrainSchedule {
            gamma,
            learning_rate: 0.5,
            batch_size: 4,
            warmup: 4,
            buffer_capacity: 64,
            target_period: 10,
            priority_alpha: 0.0,
            beta_start: 0.0,
            beta_end: 0.0,
            ..TrainSchedule::default()
        }
    }

    fn transition(s: usize, a: usize, r: f64, s2: usize, done: bool) -> Transition {
        Transition { state: vec![s as f64], action: a, reward: r, next_state: vec![s2 as f64], done, priority: 1.0 }
    }

    #[test]
    fn terminal_and_myopic_targets_equal_rewards() {
        let mut rng = stream(3, Stream::Replay);
        let mut drop = stream(3, Stream::Dropout);
        for (gamma, done) in [(0.9, true), (0.0, false)] {
            let mut l = Learner::new(TabularQ::new(2, 2), TrainSchedule { learning_rate: 1.0, ..schedule(gamma) });
            l.target.q = vec![100.0; 4];
            for _ in 0..8 {
                l.remember(transition(0, 1, 2.5, 1, done));
            }
            train_step(&mut l, 0.0, &mut rng, &mut drop).unwrap().unwrap();
            assert_eq!(l.online.get(0, 1), 2.5);
        }
    }

    #[test]
    fn warmup_gates_training() {
        let mut rng = stream(4, Stream::Replay);
        let mut drop = stream(4, Stream::Dropout);
        let mut l = Learner::new(TabularQ::new(2, 2), TrainSchedule { warmup: 10, ..schedule(0.5) });
        for _ in 0..9 {
            l.remember(transition(0, 0, 1.0, 0, false));
        }
        assert_eq!(train_step(&mut l, 0.0, &mut rng, &mut drop).unwrap(), None);
    }

    #[test]
    fn target_stays_frozen_between_syncs() {
        let mut rng = stream(5, Stream::Replay);
        let mut drop = stream(5, Stream::Dropout);
        let mut init = stream(5, Stream::Agent);
        let sch = TrainSchedule { target_period: 7, batch_size: 4, warmup: 8, dropout: 0.0, ..TrainSchedule::default() };
        let mut l = Learner::new(QNetwork::new(&[2, 4, 2], 0.0, &mut init), sch);
        for i in 0..16 {
            let s = vec![i as f64 / 16.0, 1.0];
            l.remember(Transition { state: s.clone(), action: i % 2, reward: 1.0, next_state: s, done: false, priority: 1.0 });
        }
        let mut snapshot = l.target.clone();
        for step in 1..=30u64 {
            train_step(&mut l, 0.4, &mut rng, &mut drop).unwrap();
            if step % 7 == 0 {
                assert_eq!(l.target, l.online);
                snapshot = l.target.clone();
            } else {
                assert_eq!(l.target, snapshot);
            }
        }
        assert_eq!(l.syncs, 4);
    }
}
