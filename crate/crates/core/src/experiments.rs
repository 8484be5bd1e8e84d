//! Policies, the six-arm comparison, ablations and velocity sweeps.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::config::ScenarioConfig;
use crate::dqn::{
    detect_convergence, epsilon_at, greedy, select_action, train_step, ConvergenceReport, DqnError, Learner, QNetwork,
    Transition,
};
use crate::netsim::{AttachRule, CodePlan, CodebookKind, HandoverCounts, NetError};
use crate::rlenv::{action_space_size, Controls, EnvAction, EnvError, Environment, STATE_DIM};
use crate::rng::{mix, stream, Stream};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExpError {
    #[error("unknown policy {0:?}")]
    UnknownPolicy(alloc::string::String),
    #[error("policy {0} needs a trained agent")]
    MissingAgent(&'static str),
    #[error("{0} must not be empty")]
    Empty(&'static str),
    #[error("agent has {got} outputs, scenario needs {expected}")]
    AgentShape { expected: usize, got: usize },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Dqn(#[from] DqnError),
    #[error(transparent)]
    Config(#[from] crate::config::ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicySpec {
    GoldOnly,
    WalshOnly,
    KasamiOnly,
    HybridNoAI,
    DrlConventional,
    HybridDqn,
    NoDqnPower,
    NoDqnSequence,
    NoGold,
    NoWalsh,
}

impl PolicySpec {
    pub const COMPARE: [PolicySpec; 6] = [
        PolicySpec::GoldOnly,
        PolicySpec::WalshOnly,
        PolicySpec::KasamiOnly,
        PolicySpec::HybridNoAI,
        PolicySpec::DrlConventional,
        PolicySpec::HybridDqn,
    ];

    pub const ABLATION: [PolicySpec; 5] =
        [PolicySpec::HybridDqn, PolicySpec::NoDqnPower, PolicySpec::NoDqnSequence, PolicySpec::NoGold, PolicySpec::NoWalsh];

    pub const ALL: [PolicySpec; 10] = [
        PolicySpec::GoldOnly,
        PolicySpec::WalshOnly,
        PolicySpec::KasamiOnly,
        PolicySpec::HybridNoAI,
        PolicySpec::DrlConventional,
        PolicySpec::HybridDqn,
        PolicySpec::NoDqnPower,
        PolicySpec::NoDqnSequence,
        PolicySpec::NoGold,
        PolicySpec::NoWalsh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicySpec::GoldOnly => "gold-only",
            PolicySpec::WalshOnly => "walsh-only",
            PolicySpec::KasamiOnly => "kasami-only",
            PolicySpec::HybridNoAI => "hybrid-no-ai",
            PolicySpec::DrlConventional => "drl-conventional",
            PolicySpec::HybridDqn => "hybrid-dqn",
            PolicySpec::NoDqnPower => "no-dqn-power",
            PolicySpec::NoDqnSequence => "no-dqn-sequence",
            PolicySpec::NoGold => "no-gold",
            PolicySpec::NoWalsh => "no-walsh",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ExpError> {
        Self::ALL.iter().copied().find(|p| p.name() == s).ok_or_else(|| ExpError::UnknownPolicy(s.into()))
    }

    pub fn codebook(self) -> CodebookKind {
        match self {
            PolicySpec::GoldOnly | PolicySpec::DrlConventional => CodebookKind::Gold,
            PolicySpec::WalshOnly => CodebookKind::Walsh,
            PolicySpec::KasamiOnly => CodebookKind::Kasami,
            PolicySpec::NoGold => CodebookKind::HybridNoGold,
            PolicySpec::NoWalsh => CodebookKind::HybridNoWalsh,
            PolicySpec::HybridNoAI | PolicySpec::HybridDqn | PolicySpec::NoDqnPower | PolicySpec::NoDqnSequence => {
                CodebookKind::Hybrid
            }
        }
    }

    pub fn attach_rule(self) -> AttachRule {
        match self {
            PolicySpec::GoldOnly | PolicySpec::WalshOnly | PolicySpec::KasamiOnly | PolicySpec::DrlConventional => {
                AttachRule::RoundRobin
            }
            _ => AttachRule::LeastCorrelation,
        }
    }

    pub fn uses_agent(self) -> bool {
        !matches!(self, PolicySpec::GoldOnly | PolicySpec::WalshOnly | PolicySpec::KasamiOnly | PolicySpec::HybridNoAI)
    }

    /// The policy whose trained agent this one runs.
    pub fn agent_source(self) -> Option<PolicySpec> {
        match self {
            PolicySpec::DrlConventional => Some(PolicySpec::DrlConventional),
            p if p.uses_agent() => Some(PolicySpec::HybridDqn),
            _ => None,
        }
    }

    pub fn controls(self) -> Controls {
        match self {
            PolicySpec::NoDqnPower => Controls { power: false, fixed_power: Some(0), ..Controls::ALL },
            PolicySpec::NoDqnSequence => Controls { sequence: false, ..Controls::ALL },
            p if p.uses_agent() => Controls::ALL,
            _ => Controls::NONE,
        }
    }

    pub fn code_plan(self, cfg: &ScenarioConfig) -> Result<CodePlan, ExpError> {
        Ok(CodePlan::build(
            self.codebook(),
            self.attach_rule(),
            cfg.cell_count(),
            cfg.action_sequences,
            cfg.gold_degree,
            cfg.kasami_degree,
        )?)
    }
}

/// Metrics of one evaluation or training episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: u32,
    /// Success percentage; `None` without handover attempts.
    pub hsr: Option<f64>,
    pub throughput_mbps: f64,
    pub interference_dbm: f64,
    pub reward: f64,
    pub counts: HandoverCounts,
}

impl EpisodeMetrics {
    fn from_env(episode: u32, env: &Environment) -> Self {
        let t = env.totals;
        let ticks = t.ticks.max(1) as f64;
        let counts = env.counts();
        Self {
            episode,
            hsr: counts.hsr(),
            throughput_mbps: t.throughput_mbps / ticks,
            interference_dbm: t.interference_dbm / ticks,
            reward: t.reward,
            counts,
        }
    }
}

/// All episodes evaluated for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub policy: PolicySpec,
    pub seed: u64,
    pub episodes: Vec<EpisodeMetrics>,
}

impl RunMetrics {
    pub fn counts(&self) -> HandoverCounts {
        let mut c = HandoverCounts::default();
        self.episodes.iter().for_each(|e| c.add(&e.counts));
        c
    }

    /// Success percentage pooled over every episode of the seed.
    pub fn hsr(&self) -> Option<f64> {
        self.counts().hsr()
    }

    fn mean_of(&self, f: impl Fn(&EpisodeMetrics) -> f64) -> f64 {
        self.episodes.iter().map(f).sum::<f64>() / self.episodes.len().max(1) as f64
    }

    pub fn throughput_mbps(&self) -> f64 {
        self.mean_of(|e| e.throughput_mbps)
    }

    pub fn interference_dbm(&self) -> f64 {
        self.mean_of(|e| e.interference_dbm)
    }

    pub fn reward(&self) -> f64 {
        self.mean_of(|e| e.reward)
    }

    /// Handover attempts per episode.
    pub fn attempts_per_episode(&self) -> f64 {
        self.mean_of(|e| e.counts.attempts as f64)
    }
}

/// Seed fan-out. Results come back in input order.
pub trait Executor {
    fn map<T, F>(&self, items: &[u64], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send;
}

/// Runs every item on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, items: &[u64], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        items.iter().map(|&s| f(s)).collect()
    }
}

const TRAIN_SALT: u64 = 0x7472_6169_6e00;

/// Evaluation seeds `cfg.seed, cfg.seed + 1, …`.
pub fn eval_seeds(cfg: &ScenarioConfig) -> Vec<u64> {
    (0..cfg.eval_seeds as u64).map(|i| cfg.seed.wrapping_add(i)).collect()
}

fn check_agent(cfg: &ScenarioConfig, net: &QNetwork) -> Result<(), ExpError> {
    let expected = action_space_size(cfg);
    if net.output_dim() != expected || net.input_dim() != STATE_DIM {
        return Err(ExpError::AgentShape { expected, got: net.output_dim() });
    }
    Ok(())
}

/// One evaluation episode. Agent policies act greedily for every user.
pub fn run_episode(
    policy: PolicySpec,
    cfg: &ScenarioConfig,
    plan: Arc<CodePlan>,
    seed: u64,
    episode: u32,
    agent: Option<&QNetwork>,
) -> Result<EpisodeMetrics, ExpError> {
    let (mut env, _) = Environment::reset(cfg, plan, mix(seed, episode as u64), policy.controls())?;
    let agent = if policy.uses_agent() { Some(agent.ok_or(ExpError::MissingAgent(policy.name()))?) } else { None };
    let users = env.net.users.len();
    let mut actions = Vec::with_capacity(users);
    while !env.is_done() {
        actions.clear();
        if let Some(net) = agent {
            for u in 0..users {
                let q = net.forward(env.observe(u).as_slice())?;
                let a = EnvAction::from_id(greedy(&q), cfg.action_sequences, cfg.action_power_profiles)?;
                actions.push((u, a));
            }
        }
        env.step_with(&actions)?;
    }
    Ok(EpisodeMetrics::from_env(episode, &env))
}

/// Evaluates `policy` on every seed (`cfg.eval_episodes` episodes each).
pub fn run_scenario<E: Executor>(
    policy: PolicySpec,
    cfg: &ScenarioConfig,
    seeds: &[u64],
    agent: Option<&QNetwork>,
    exec: &E,
) -> Result<Vec<RunMetrics>, ExpError> {
    cfg.validate()?;
    if seeds.is_empty() {
        return Err(ExpError::Empty("seed list"));
    }
    if policy.uses_agent() {
        check_agent(cfg, agent.ok_or(ExpError::MissingAgent(policy.name()))?)?;
    }
    let agent = if policy.uses_agent() { agent } else { None };
    let plan = Arc::new(policy.code_plan(cfg)?);
    let runs = exec.map(seeds, |seed| -> Result<RunMetrics, ExpError> {
        let episodes = (0..cfg.eval_episodes)
            .map(|ep| run_episode(policy, cfg, plan.clone(), seed, ep, agent))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RunMetrics { policy, seed, episodes })
    });
    runs.into_iter().collect()
}

/// Result of training one agent.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutcome {
    pub policy: PolicySpec,
    pub net: QNetwork,
    pub episodes: Vec<EpisodeMetrics>,
    pub losses: Vec<f64>,
    pub steps: u64,
    pub target_syncs: u64,
    pub convergence: Option<ConvergenceReport>,
}

impl TrainOutcome {
    pub fn rewards(&self) -> Vec<f64> {
        self.episodes.iter().map(|e| e.reward).collect()
    }
}

/// Trains the agent of `policy` on the tagged user of each episode, seeded by
/// `seed`. `progress` is called after every episode.
pub fn train_agent(
    policy: PolicySpec,
    cfg: &ScenarioConfig,
    seed: u64,
    mut progress: impl FnMut(&EpisodeMetrics),
) -> Result<TrainOutcome, ExpError> {
    cfg.validate()?;
    let sch = cfg.train.clone();
    let actions = action_space_size(cfg);
    let mut init = stream(seed, Stream::Agent);
    let net = QNetwork::new(&[STATE_DIM, sch.hidden[0], sch.hidden[1], actions], sch.dropout, &mut init);
    let mut learner = Learner::new(net, sch.clone());
    let mut policy_rng = stream(seed, Stream::Policy);
    let mut replay_rng = stream(seed, Stream::Replay);
    let mut dropout_rng = stream(seed, Stream::Dropout);
    let plan = Arc::new(policy.code_plan(cfg)?);
    let base = mix(seed, TRAIN_SALT);
    let mut episodes = Vec::with_capacity(sch.episodes as usize);
    let mut losses = Vec::with_capacity(sch.episodes as usize);
    for ep in 0..sch.episodes {
        let (mut env, mut state) = Environment::reset(cfg, plan.clone(), mix(base, ep as u64), policy.controls())?;
        let eps = epsilon_at(&sch, ep);
        let beta = sch.beta_at(ep);
        let (mut loss_sum, mut loss_n) = (0.0, 0u32);
        loop {
            let q = learner.online.forward(state.as_slice())?;
            let a = select_action(&q, eps, &mut policy_rng);
            let out = env.step(a)?;
            learner.remember(Transition {
                state: state.0.to_vec(),
                action: a,
                reward: out.reward.total,
                next_state: out.state.0.to_vec(),
                done: out.done,
                priority: 1.0,
            });
            if let Some(l) = train_step(&mut learner, beta, &mut replay_rng, &mut dropout_rng)? {
                loss_sum += l;
                loss_n += 1;
            }
            state = out.state;
            if out.done {
                break;
            }
        }
        learner.end_episode(ep);
        let m = EpisodeMetrics::from_env(ep, &env);
        progress(&m);
        episodes.push(m);
        losses.push(if loss_n > 0 { loss_sum / loss_n as f64 } else { f64::NAN });
    }
    let rewards: Vec<f64> = episodes.iter().map(|e| e.reward).collect();
    let convergence = detect_convergence(&rewards, &cfg.convergence).ok();
    Ok(TrainOutcome {
        policy,
        net: learner.online,
        episodes,
        losses,
        steps: learner.steps,
        target_syncs: learner.syncs,
        convergence,
    })
}

/// One speed band of a velocity sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub policy: PolicySpec,
    pub speed_kmh: f64,
    pub runs: Vec<RunMetrics>,
}

/// Runs each policy with every user fixed at each speed.
pub fn velocity_sweep<E: Executor>(
    policies: &[PolicySpec],
    speeds: &[f64],
    cfg: &ScenarioConfig,
    seeds: &[u64],
    agent_for: impl Fn(PolicySpec) -> Option<QNetwork>,
    exec: &E,
) -> Result<Vec<SweepPoint>, ExpError> {
    if policies.is_empty() {
        return Err(ExpError::Empty("policy list"));
    }
    if speeds.is_empty() {
        return Err(ExpError::Empty("speed list"));
    }
    let mut out = Vec::new();
    for &policy in policies {
        let agent = agent_for(policy);
        for &speed in speeds {
            let c = ScenarioConfig { velocity_kmh_min: speed, velocity_kmh_max: speed, ..cfg.clone() };
            let runs = run_scenario(policy, &c, seeds, agent.as_ref(), exec)?;
            out.push(SweepPoint { policy, speed_kmh: speed, runs });
        }
    }
    Ok(out)
}

/// Runs the full system and its four ablations on the same seeds with the
/// full system's agent.
pub fn ablation_suite<E: Executor>(
    cfg: &ScenarioConfig,
    seeds: &[u64],
    agent: &QNetwork,
    exec: &E,
) -> Result<Vec<(PolicySpec, Vec<RunMetrics>)>, ExpError> {
    PolicySpec::ABLATION
        .iter()
        .map(|&p| Ok((p, run_scenario(p, cfg, seeds, Some(agent), exec)?)))
        .collect()
}
