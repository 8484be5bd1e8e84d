//! Flat `key = value` scenario files.
//!
//! ```text
//! # comment
//! include = presets/base.conf
//! rings = 2
//! reward_weights.ho_failure = 3.0
//! train.target_sync = episodes
//! ```
//!
//! `include` paths are relative to the including file and are applied in
//! place, so later lines override earlier ones. Unknown keys are errors.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use seqnoma_core::dqn::TargetSync;
use seqnoma_core::ScenarioConfig;
use sha2::{Digest, Sha256};

trait Value: Sized {
    fn parse_value(s: &str) -> Result<Self>;
    fn show(&self) -> String;
}

macro_rules! plain_value {
    ($($t:ty),*) => {$(
        impl Value for $t {
            fn parse_value(s: &str) -> Result<Self> {
                <$t as FromStr>::from_str(s).map_err(|e| anyhow!("{e}"))
            }
            fn show(&self) -> String {
                format!("{self:?}")
            }
        }
    )*};
}

plain_value!(f64, u32, u64, usize);

impl Value for TargetSync {
    fn parse_value(s: &str) -> Result<Self> {
        match s {
            "steps" => Ok(TargetSync::Steps),
            "episodes" => Ok(TargetSync::Episodes),
            _ => bail!("expected steps or episodes"),
        }
    }
    fn show(&self) -> String {
        match self {
            TargetSync::Steps => "steps".into(),
            TargetSync::Episodes => "episodes".into(),
        }
    }
}

impl Value for [usize; 2] {
    fn parse_value(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            bail!("expected two comma-separated widths");
        }
        Ok([parts[0].parse()?, parts[1].parse()?])
    }
    fn show(&self) -> String {
        format!("{},{}", self[0], self[1])
    }
}

macro_rules! keys {
    ($($key:literal => $($field:ident).+;)*) => {
        /// Every recognised key, in canonical order.
        pub const KEYS: &[&str] = &[$($key),*];

        fn set_key(cfg: &mut ScenarioConfig, key: &str, value: &str) -> Result<()> {
            match key {
                $($key => cfg.$($field).+ = Value::parse_value(value)?,)*
                _ => bail!("unknown key {key:?}"),
            }
            Ok(())
        }

        /// `(key, value)` pairs for every key, in canonical order.
        pub fn dump_pairs(cfg: &ScenarioConfig) -> Vec<(&'static str, String)> {
            vec![$(($key, cfg.$($field).+.show())),*]
        }
    };
}

keys! {
    "rings" => rings;
    "isd_m" => isd_m;
    "users_per_cell" => users_per_cell;
    "velocity_kmh_min" => velocity_kmh_min;
    "velocity_kmh_max" => velocity_kmh_max;
    "tick_ms" => tick_ms;
    "ttt_ticks" => ttt_ticks;
    "ho_margin_db" => ho_margin_db;
    "seed" => seed;
    "carrier_hz" => carrier_hz;
    "bandwidth_hz" => bandwidth_hz;
    "tx_power_dbm" => tx_power_dbm;
    "noise_dbm" => noise_dbm;
    "pathloss_exponent" => pathloss_exponent;
    "rsrp_filter_coeff" => rsrp_filter_coeff;
    "rlf_sinr_db" => rlf_sinr_db;
    "exec_ticks" => exec_ticks;
    "pingpong_ticks" => pingpong_ticks;
    "ho_failure_target" => ho_failure_target;
    "group_min" => group_min;
    "group_max" => group_max;
    "qos_min_bps_hz" => qos_min_bps_hz;
    "gold_degree" => gold_degree;
    "kasami_degree" => kasami_degree;
    "reward_weights.throughput" => reward.throughput;
    "reward_weights.interference" => reward.interference;
    "reward_weights.ho_failure" => reward.ho_failure;
    "reward_weights.qos" => reward.qos;
    "reward_weights.energy" => reward.energy;
    "action.sequences" => action_sequences;
    "action.power_profiles" => action_power_profiles;
    "action.baseline_power_profile" => baseline_power_profile;
    "episode_ticks" => episode_ticks;
    "margin_min_db" => margin_min_db;
    "margin_max_db" => margin_max_db;
    "margin_step_db" => margin_step_db;
    "train.episodes" => train.episodes;
    "train.learning_rate" => train.learning_rate;
    "train.gamma" => train.gamma;
    "train.epsilon_start" => train.epsilon_start;
    "train.epsilon_end" => train.epsilon_end;
    "train.epsilon_decay_frac" => train.epsilon_decay_frac;
    "train.target_period" => train.target_period;
    "train.target_sync" => train.target_sync;
    "train.batch_size" => train.batch_size;
    "train.warmup" => train.warmup;
    "train.buffer_capacity" => train.buffer_capacity;
    "train.priority_alpha" => train.priority_alpha;
    "train.beta_start" => train.beta_start;
    "train.beta_end" => train.beta_end;
    "train.priority_eps" => train.priority_eps;
    "train.dropout" => train.dropout;
    "train.hidden" => train.hidden;
    "train.huber_delta" => train.huber_delta;
    "convergence.window" => convergence.window;
    "convergence.slope_frac" => convergence.slope_frac;
    "convergence.plateau_frac" => convergence.plateau_frac;
    "convergence.exploration_frac" => convergence.exploration_frac;
    "convergence.noise_mult" => convergence.noise_mult;
    "eval.episodes" => eval_episodes;
    "eval.seeds" => eval_seeds;
}

const MAX_INCLUDE_DEPTH: usize = 16;

/// Applies `text` on top of `cfg`. `base` resolves includes.
pub fn apply_text(cfg: &mut ScenarioConfig, text: &str, base: Option<&Path>) -> Result<()> {
    apply(cfg, text, base, 0)
}

fn apply(cfg: &mut ScenarioConfig, text: &str, base: Option<&Path>, depth: usize) -> Result<()> {
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| anyhow!("line {}: expected key = value", i + 1))?;
        let (key, value) = (key.trim(), value.trim());
        if key == "include" {
            if depth >= MAX_INCLUDE_DEPTH {
                bail!("line {}: includes nested too deeply", i + 1);
            }
            let path = base.map_or_else(|| PathBuf::from(value), |b| b.join(value));
            let inner = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            apply(cfg, &inner, path.parent(), depth + 1).with_context(|| format!("in {}", path.display()))?;
            continue;
        }
        set_key(cfg, key, value).with_context(|| format!("line {}: {key}", i + 1))?;
    }
    Ok(())
}

/// Defaults overlaid with the file at `path` (if any), then validated.
pub fn load(path: Option<&Path>) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        apply_text(&mut cfg, &text, p.parent()).with_context(|| format!("in {}", p.display()))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical text form: every key in [`KEYS`] order, one per line.
pub fn dump(cfg: &ScenarioConfig) -> String {
    dump_pairs(cfg).into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// SHA-256 of [`dump`], lowercase hex.
pub fn config_hash(cfg: &ScenarioConfig) -> String {
    format!("{:x}", Sha256::digest(dump(cfg).as_bytes()))
}

/// Sets one key from its text form.
pub fn set(cfg: &mut ScenarioConfig, key: &str, value: impl Display) -> Result<()> {
    set_key(cfg, key, &value.to_string())
}
