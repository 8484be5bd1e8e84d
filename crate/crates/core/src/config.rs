//! Scenario configuration shared by the network model, the environment, the
//! learner and the experiment runner. Defaults are the desk-scale scenario.

use crate::dqn::{ConvergenceParams, TrainSchedule};
use crate::math;
use crate::phy::ChannelParams;

/// Reward weights for throughput, interference, handover failure, QoS and
/// energy terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardWeights {
    pub throughput: f64,
    pub interference: f64,
    pub ho_failure: f64,
    pub qos: f64,
    pub energy: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self { throughput: 1.0, interference: 0.5, ho_failure: 2.0, qos: 0.5, energy: 0.2 }
    }
}

impl RewardWeights {
    pub fn zero() -> Self {
        Self { throughput: 0.0, interference: 0.0, ho_failure: 0.0, qos: 0.0, energy: 0.0 }
    }

    pub fn l1(&self) -> f64 {
        math::abs(self.throughput)
            + math::abs(self.interference)
            + math::abs(self.ho_failure)
            + math::abs(self.qos)
            + math::abs(self.energy)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub rings: u32,
    pub isd_m: f64,
    pub users_per_cell: usize,
    pub velocity_kmh_min: f64,
    pub velocity_kmh_max: f64,
    pub tick_ms: f64,
    pub ttt_ticks: u32,
    /// Initial A3 margin; `f64::INFINITY` disables handover.
    pub ho_margin_db: f64,
    pub seed: u64,

    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub pathloss_exponent: f64,
    pub rsrp_filter_coeff: f64,

    pub rlf_sinr_db: f64,
    pub exec_ticks: u32,
    pub pingpong_ticks: u32,
    /// Tolerated handover failure probability; reported, never enforced.
    pub ho_failure_target: f64,
    pub group_min: usize,
    pub group_max: usize,
    pub qos_min_bps_hz: f64,

    pub gold_degree: u32,
    pub kasami_degree: u32,

    pub reward: RewardWeights,
    pub action_sequences: usize,
    pub action_power_profiles: usize,
    pub baseline_power_profile: usize,
    pub episode_ticks: u32,
    pub margin_min_db: f64,
    pub margin_max_db: f64,
    pub margin_step_db: f64,

    pub train: TrainSchedule,
    pub convergence: ConvergenceParams,
    pub eval_episodes: u32,
    pub eval_seeds: u32,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            rings: 1,
            isd_m: 500.0,
            users_per_cell: 4,
            velocity_kmh_min: 3.0,
            velocity_kmh_max: 120.0,
            tick_ms: 100.0,
            ttt_ticks: 3,
            ho_margin_db: 3.0,
            seed: 1,
            carrier_hz: 3.5e9,
            bandwidth_hz: 100e6,
            tx_power_dbm: 46.0,
            noise_dbm: -104.0,
            pathloss_exponent: 3.5,
            rsrp_filter_coeff: 0.5,
            rlf_sinr_db: -8.0,
            exec_ticks: 2,
            pingpong_ticks: 50,
            ho_failure_target: 0.05,
            group_min: 4,
            group_max: 8,
            qos_min_bps_hz: 0.5,
            gold_degree: 6,
            kasami_degree: 6,
            reward: RewardWeights::default(),
            action_sequences: 8,
            action_power_profiles: 5,
            baseline_power_profile: 2,
            episode_ticks: 200,
            margin_min_db: 0.0,
            margin_max_db: 6.0,
            margin_step_db: 1.0,
            train: TrainSchedule::default(),
            convergence: ConvergenceParams::default(),
            eval_episodes: 10,
            eval_seeds: 30,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub &'static str);

impl ScenarioConfig {
    /// Full-scale layout: 19 cells.
    pub fn full_scale() -> Self {
        Self { rings: 2, train: TrainSchedule { episodes: 10_000, ..TrainSchedule::default() }, ..Self::default() }
    }

    pub fn tick_s(&self) -> f64 {
        self.tick_ms / 1000.0
    }

    pub fn tx_power_w(&self) -> f64 {
        math::dbm_to_watts(self.tx_power_dbm)
    }

    pub fn noise_w(&self) -> f64 {
        math::dbm_to_watts(self.noise_dbm)
    }

    pub fn channel(&self) -> ChannelParams {
        ChannelParams::free_space(self.carrier_hz, 1.0, self.pathloss_exponent)
    }

    pub fn cell_count(&self) -> usize {
        match self.rings {
            1 => 7,
            2 => 19,
            _ => 0,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |ok: bool, msg| if ok { Ok(()) } else { Err(ConfigError(msg)) };
        bad(matches!(self.rings, 1 | 2), "rings must be 1 or 2")?;
        bad(self.isd_m > 0.0, "isd_m must be positive")?;
        bad(self.users_per_cell >= 1, "users_per_cell must be at least 1")?;
        bad(self.users_per_cell <= self.group_max, "users_per_cell exceeds group_max")?;
        bad(self.group_min <= self.group_max && self.group_max >= 1, "group bounds are inconsistent")?;
        bad(
            self.velocity_kmh_min >= 3.0 && self.velocity_kmh_max <= 120.0 && self.velocity_kmh_min <= self.velocity_kmh_max,
            "velocity band must lie within [3, 120] km/h",
        )?;
        bad(self.tick_ms > 0.0, "tick_ms must be positive")?;
        bad(self.ttt_ticks >= 1, "ttt_ticks must be at least 1")?;
        bad(!self.ho_margin_db.is_nan(), "ho_margin_db is NaN")?;
        bad(self.pathloss_exponent > 2.0, "pathloss exponent must exceed 2")?;
        bad(self.carrier_hz > 0.0 && self.bandwidth_hz > 0.0, "carrier and bandwidth must be positive")?;
        bad((0.0..=1.0).contains(&self.rsrp_filter_coeff) && self.rsrp_filter_coeff > 0.0, "rsrp_filter_coeff must be in (0, 1]")?;
        bad(self.exec_ticks >= 1, "exec_ticks must be at least 1")?;
        bad(matches!(self.gold_degree, 5..=7), "gold_degree must be 5, 6 or 7")?;
        bad(matches!(self.kasami_degree, 6 | 8), "kasami_degree must be 6 or 8")?;
        bad(self.action_sequences >= 1 && self.action_sequences <= 1 << self.gold_degree, "action.sequences out of range")?;
        bad(self.action_power_profiles >= 1, "action.power_profiles must be at least 1")?;
        bad(self.baseline_power_profile < self.action_power_profiles, "baseline power profile out of range")?;
        bad(self.episode_ticks >= 1, "episode_ticks must be at least 1")?;
        bad(self.margin_min_db <= self.margin_max_db && self.margin_step_db > 0.0, "margin bounds are inconsistent")?;
        self.train.validate().map_err(ConfigError)?;
        self.convergence.validate().map_err(ConfigError)?;
        bad(self.eval_episodes >= 1 && self.eval_seeds >= 1, "evaluation budget must be positive")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        ScenarioConfig::default().validate().unwrap();
        ScenarioConfig::full_scale().validate().unwrap();
        assert_eq!(ScenarioConfig::full_scale().cell_count(), 19);
    }

    #[test]
    fn rejects_bad_values() {
        let c = ScenarioConfig { rings: 3, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ScenarioConfig { velocity_kmh_max: 150.0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = ScenarioConfig { users_per_cell: 9, ..Default::default() };
        assert!(c.validate().is_err());
    }

    #[test]
    fn infinite_margin_is_valid() {
        let c = ScenarioConfig { ho_margin_db: f64::INFINITY, ..Default::default() };
        c.validate().unwrap();
    }
}
