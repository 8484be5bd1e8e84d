use std::sync::Arc;

use seqnoma_core::config::RewardWeights;
use seqnoma_core::experiments::*;
use seqnoma_core::rlenv::{Controls, Environment};
use seqnoma_core::rng::{stream, Stream};
use seqnoma_core::dqn::QNetwork;
use seqnoma_core::ScenarioConfig;

fn desk(ticks: u32) -> ScenarioConfig {
    ScenarioConfig { episode_ticks: ticks, eval_episodes: 1, ..Default::default() }
}

#[test]
fn failure_tick_costs_exactly_the_failure_weight() {
    let w = RewardWeights { ho_failure: 1.0, ..RewardWeights::zero() };
    let cfg = ScenarioConfig { reward: w, ho_margin_db: 0.0, ..desk(200) };
    let plan = Arc::new(PolicySpec::GoldOnly.code_plan(&cfg).unwrap());
    let mut failures = 0;
    for seed in 0..20 {
        let (mut env, _) = Environment::reset(&cfg, plan.clone(), seed, Controls::NONE).unwrap();
        while !env.is_done() {
            let out = env.step_idle().unwrap();
            if out.events.failures_of(env.tagged) > 0 {
                failures += 1;
                assert_eq!(out.reward.total, -1.0);
            } else {
                assert_eq!(out.reward.total, 0.0);
            }
        }
    }
    assert!(failures > 0, "no failure tick observed");
}

#[test]
fn resets_differ_across_seeds() {
    let cfg = desk(10);
    let plan = Arc::new(PolicySpec::HybridNoAI.code_plan(&cfg).unwrap());
    let mut layouts = std::collections::HashSet::new();
    for seed in 0..100 {
        let (env, _) = Environment::reset(&cfg, plan.clone(), seed, Controls::ALL).unwrap();
        let key: Vec<u64> = env.net.users.iter().flat_map(|u| [u.pos.x.to_bits(), u.pos.y.to_bits()]).collect();
        layouts.insert(key);
    }
    assert_eq!(layouts.len(), 100);
}

#[test]
fn baselines_never_touch_agent_parameters() {
    let cfg = desk(30);
    let mut init = stream(1, Stream::Agent);
    let net = QNetwork::new(&[7, 64, 64, 120], 0.1, &mut init);
    let checksum = |n: &QNetwork| n.parameters().iter().fold(0u64, |h, p| h.rotate_left(5) ^ p.to_bits());
    let before = checksum(&net);
    for p in [PolicySpec::GoldOnly, PolicySpec::WalshOnly, PolicySpec::KasamiOnly, PolicySpec::HybridNoAI] {
        run_scenario(p, &cfg, &[1, 2], Some(&net), &Sequential).unwrap();
    }
    assert_eq!(checksum(&net), before);
}

#[test]
fn accounting_identity_over_thirty_seeds() {
    let cfg = desk(200);
    let seeds: Vec<u64> = (1..=30).collect();
    for p in [PolicySpec::GoldOnly, PolicySpec::HybridNoAI] {
        for r in run_scenario(p, &cfg, &seeds, None, &Sequential).unwrap() {
            for e in &r.episodes {
                let c = e.counts;
                assert_eq!(c.attempts, c.success + c.rlf + c.pingpong, "{p:?} seed {}", r.seed);
            }
        }
    }
    let never = ScenarioConfig { ho_margin_db: f64::INFINITY, ..cfg };
    for r in run_scenario(PolicySpec::GoldOnly, &never, &seeds, None, &Sequential).unwrap() {
        assert_eq!(r.counts().attempts, 0);
    }
}

#[test]
fn handover_events_grow_with_speed() {
    let cfg = desk(200);
    let seeds: Vec<u64> = (1..=30).collect();
    let speeds = [3.0, 30.0, 60.0, 120.0];
    let points = velocity_sweep(&[PolicySpec::GoldOnly], &speeds, &cfg, &seeds, |_| None, &Sequential).unwrap();
    assert_eq!(points.len(), 4);
    let events: Vec<f64> = points
        .iter()
        .map(|p| p.runs.iter().map(|r| r.attempts_per_episode()).sum::<f64>() / p.runs.len() as f64)
        .collect();
    for w in events.windows(2) {
        assert!(w[0] <= w[1], "{events:?}");
    }
}
