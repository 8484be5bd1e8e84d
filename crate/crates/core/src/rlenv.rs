//! Episodic environment around [`Network`]: one tagged user is steered by the
//! agent through its code slot, its cell's power preset and its handover
//! margin.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::ScenarioConfig;
use crate::math;
use crate::netsim::{CodePlan, HandoverCounts, NetError, Network, TickEvents};
use crate::phy::power_profile;

pub const STATE_DIM: usize = 7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EnvError {
    #[error("episode already finished")]
    Done,
    #[error("action {id} outside [0, {size})")]
    BadAction { id: usize, size: usize },
    #[error(transparent)]
    Net(#[from] NetError),
}

/// Normalized observation of one user; every component lies in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvState(pub [f64; STATE_DIM]);

impl EnvState {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// The sequence component is an offset from the slot the user received at
/// attach, so users of one cell that pick the same offset keep distinct codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EnvAction {
    pub sequence: usize,
    pub power: usize,
    /// −1, 0 or +1 margin step.
    pub margin_step: i8,
}

impl EnvAction {
    /// Flattened id `(sequence·P + power)·3 + (margin_step + 1)`.
    pub fn id(&self, powers: usize) -> usize {
        (self.sequence * powers + self.power) * 3 + (self.margin_step + 1) as usize
    }

    pub fn from_id(id: usize, sequences: usize, powers: usize) -> Result<Self, EnvError> {
        let size = sequences * powers * 3;
        if id >= size {
            return Err(EnvError::BadAction { id, size });
        }
        Ok(Self { sequence: id / 3 / powers, power: id / 3 % powers, margin_step: (id % 3) as i8 - 1 })
    }
}

pub fn action_space_size(cfg: &ScenarioConfig) -> usize {
    cfg.action_sequences * cfg.action_power_profiles * 3
}

/// Reward terms before weighting; `total` is the weighted sum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RewardBreakdown {
    pub throughput: f64,
    pub interference: f64,
    pub ho_failure: f64,
    pub qos: f64,
    pub energy: f64,
    pub total: f64,
}

/// Which action components take effect; disabled ones are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Controls {
    pub sequence: bool,
    pub power: bool,
    pub margin: bool,
    /// Preset forced on every cell each tick, overriding `power`.
    pub fixed_power: Option<usize>,
}

impl Controls {
    pub const ALL: Controls = Controls { sequence: true, power: true, margin: true, fixed_power: None };
    pub const NONE: Controls = Controls { sequence: false, power: false, margin: false, fixed_power: None };
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput {
    pub state: EnvState,
    pub reward: RewardBreakdown,
    pub done: bool,
    pub events: TickEvents,
}

/// Per-episode running sums.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpisodeTotals {
    pub ticks: u32,
    pub throughput_mbps: f64,
    pub interference_dbm: f64,
    pub reward: f64,
}

#[derive(Debug, Clone)]
pub struct Environment {
    cfg: ScenarioConfig,
    pub net: Network,
    pub tagged: usize,
    pub controls: Controls,
    pub totals: EpisodeTotals,
    done: bool,
}

const SINR_RANGE: (f64, f64) = (-20.0, 40.0);
const RSRP_RANGE: (f64, f64) = (-120.0, -60.0);
const INTERFERENCE_RANGE: (f64, f64) = (-110.0, -50.0);
/// Spectral efficiency per user used to normalize group throughput.
const RATE_NORM_PER_USER: f64 = 2.0;

impl Environment {
    pub fn reset(cfg: &ScenarioConfig, plan: Arc<CodePlan>, seed: u64, controls: Controls) -> Result<(Self, EnvState), EnvError> {
        let net = Network::new(cfg, plan, seed)?;
        let tagged = net
            .users
            .iter()
            .fold(0, |best, u| if u.velocity_kmh() > net.users[best].velocity_kmh() { u.id } else { best });
        let env = Self { cfg: cfg.clone(), net, tagged, controls, totals: EpisodeTotals::default(), done: false };
        let s = env.observe(tagged);
        Ok((env, s))
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn action_count(&self) -> usize {
        action_space_size(&self.cfg)
    }

    pub fn observe(&self, user: usize) -> EnvState {
        let u = &self.net.users[user];
        let load = self.net.groups[u.serving].len() as f64 / self.cfg.group_max as f64;
        let margin = if u.margin_db.is_finite() { u.margin_db / self.cfg.margin_max_db.max(1e-9) } else { 1.0 };
        let s = [
            math::normalize_clip(u.link.sinr_db, SINR_RANGE.0, SINR_RANGE.1),
            math::normalize_clip(u.serving_rsrp_dbm(), RSRP_RANGE.0, RSRP_RANGE.1),
            (u.velocity_kmh() / 120.0).clamp(0.0, 1.0),
            load.clamp(0.0, 1.0),
            math::normalize_clip(u.interference_dbm(), INTERFERENCE_RANGE.0, INTERFERENCE_RANGE.1),
            if u.qos_ok { 1.0 } else { 0.0 },
            margin.clamp(0.0, 1.0),
        ];
        debug_assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
        EnvState(s)
    }

    fn apply(&mut self, user: usize, a: &EnvAction, votes: &mut [Vec<usize>]) {
        if self.controls.sequence {
            let home = self.net.users[user].home_slot;
            self.net.set_slot(user, home + a.sequence);
        }
        if self.controls.power {
            votes[self.net.users[user].serving][a.power] += 1;
        }
        if self.controls.margin {
            let m = self.net.users[user].margin_db;
            let base = if m.is_finite() { m } else { self.cfg.margin_max_db };
            let next = (base + a.margin_step as f64 * self.cfg.margin_step_db).clamp(self.cfg.margin_min_db, self.cfg.margin_max_db);
            self.net.set_margin(user, next);
        }
    }

    /// Applies the tagged user's action and advances one tick.
    pub fn step(&mut self, action: usize) -> Result<StepOutput, EnvError> {
        let a = EnvAction::from_id(action, self.cfg.action_sequences, self.cfg.action_power_profiles)?;
        let tagged = self.tagged;
        self.step_with(&[(tagged, a)])
    }

    /// Applies one action per listed user, then advances one tick. When
    /// several users of a cell pick a power preset, the most voted preset wins
    /// (lowest index on ties).
    pub fn step_with(&mut self, actions: &[(usize, EnvAction)]) -> Result<StepOutput, EnvError> {
        if self.done {
            return Err(EnvError::Done);
        }
        let cells = self.net.cell_count();
        let mut votes = vec![vec![0usize; self.cfg.action_power_profiles]; cells];
        for (u, a) in actions {
            self.apply(*u, a, &mut votes);
        }
        for (c, v) in votes.iter().enumerate() {
            let best = (0..v.len()).fold(0, |b, p| if v[p] > v[b] { p } else { b });
            if v[best] > 0 {
                self.net.set_profile(c, best);
            }
        }
        if let Some(p) = self.controls.fixed_power {
            for c in 0..cells {
                self.net.set_profile(c, p);
            }
        }
        let mut events = self.net.step();
        self.totals.ticks += 1;
        self.totals.throughput_mbps += self.net.mean_throughput_mbps();
        self.totals.interference_dbm += self.net.mean_interference_dbm();
        if self.totals.ticks >= self.cfg.episode_ticks {
            self.done = true;
            let tail = self.net.finish();
            events.closed.extend(tail.closed);
        }
        let reward = self.reward(&events);
        self.totals.reward += reward.total;
        let state = self.observe(self.tagged);
        assert!(state.0.iter().all(|v| v.is_finite()), "non-finite state");
        Ok(StepOutput { state, reward, done: self.done, events })
    }

    fn reward(&self, events: &TickEvents) -> RewardBreakdown {
        let w = &self.cfg.reward;
        let u = &self.net.users[self.tagged];
        let g = &self.net.groups[u.serving];
        let n = g.len().max(1);
        let sum_rate: f64 = g.members.iter().map(|&m| self.net.users[m].rate_bps_hz).sum();
        let throughput = (sum_rate / (n as f64 * RATE_NORM_PER_USER)).clamp(0.0, 1.0);
        let interference = math::normalize_clip(u.interference_dbm(), INTERFERENCE_RANGE.0, INTERFERENCE_RANGE.1);
        let ho_failure = if events.failures_of(self.tagged) > 0 { 1.0 } else { 0.0 };
        let qos = g.members.iter().filter(|&&m| self.net.users[m].qos_ok).count() as f64 / n as f64;
        let energy = match g.position(self.tagged) {
            Some(k) => {
                let base = power_profile(n, self.cfg.baseline_power_profile, self.cfg.action_power_profiles);
                (g.alphas[k] - base[k]).clamp(0.0, 1.0)
            }
            None => 0.0,
        };
        let total = w.throughput * throughput - w.interference * interference - w.ho_failure * ho_failure + w.qos * qos
            - w.energy * energy;
        RewardBreakdown { throughput, interference, ho_failure, qos, energy, total }
    }

    /// Advances one tick without any agent action.
    pub fn step_idle(&mut self) -> Result<StepOutput, EnvError> {
        self.step_with(&[])
    }

    pub fn counts(&self) -> HandoverCounts {
        self.net.counts()
    }
}
