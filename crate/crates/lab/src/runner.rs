//! The work behind each command. Every function takes a fully resolved
//! configuration and writes its files into `out`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use seqnoma_core::dqn::QNetwork;
use seqnoma_core::experiments::{
    ablation_suite, eval_seeds, run_scenario, train_agent, velocity_sweep, PolicySpec, RunMetrics, SweepPoint,
    TrainOutcome,
};
use seqnoma_core::netsim::{AttachRule, CodePlan, CodebookKind};
use seqnoma_core::seqlib::{
    correlation_product_report, gold_preferred_pair, generate_gold_family, generate_kasami_small,
    generate_msequence, generate_walsh_family, measure_papr, papr_report, periodic_correlation, write_codebook,
    ChipSequence, Family, LfsrSpec,
};
use seqnoma_core::ScenarioConfig;

use crate::config::config_hash;
use crate::exec::Pool;
use crate::formats::{self, Provenance, Summary};

/// Files written by one command, relative to its output directory.
#[derive(Debug, Clone, Default)]
pub struct Written {
    pub files: Vec<String>,
    /// Human-readable result, printed by the command line.
    pub report: String,
}

fn prov(cfg: &ScenarioConfig, label: impl Into<String>) -> Provenance {
    Provenance { config_hash: config_hash(cfg), seed: cfg.seed, label: label.into() }
}

/// Codebook of `family`. `m` is the register degree, or `log2` of the order
/// for Walsh. Hybrid codes are the ones the scenario's code plan deploys.
pub fn codebook(cfg: &ScenarioConfig, family: Family, m: Option<u32>) -> Result<Vec<ChipSequence>> {
    Ok(match family {
        Family::MSeq => {
            let m = m.unwrap_or(cfg.gold_degree);
            let (taps, _) = gold_preferred_pair(m).with_context(|| format!("no built-in polynomial of degree {m}"))?;
            vec![generate_msequence(&LfsrSpec::new(m, taps, 1))?]
        }
        Family::Gold => generate_gold_family(m.unwrap_or(cfg.gold_degree))?,
        Family::Walsh => {
            let m = m.unwrap_or(cfg.gold_degree);
            if m >= usize::BITS {
                bail!("walsh order 2^{m} is too large");
            }
            generate_walsh_family(1 << m)?
        }
        Family::Kasami => generate_kasami_small(m.unwrap_or(cfg.kasami_degree))?,
        Family::Hybrid => {
            let g = m.unwrap_or(cfg.gold_degree);
            let plan = CodePlan::build(
                CodebookKind::Hybrid,
                AttachRule::LeastCorrelation,
                cfg.cell_count(),
                cfg.action_sequences,
                g,
                cfg.kasami_degree,
            )?;
            plan.codes
        }
    })
}

pub fn seq_gen(cfg: &ScenarioConfig, family: Family, m: Option<u32>, out: &Path) -> Result<Written> {
    let codes = codebook(cfg, family, m)?;
    let degree = m.unwrap_or(if family == Family::Kasami { cfg.kasami_degree } else { cfg.gold_degree });
    let name = format!("codebook_{}_m{degree}.txt", family.name());
    let file = formats::write_file(out, &name, &write_codebook(&codes))?;
    Ok(Written { files: vec![file], report: format!("{} codes of length {}\n", codes.len(), codes[0].len()) })
}

/// Correlation and PAPR report of a codebook, followed by the hybrid
/// product and PAPR comparisons for Gold degree `hybrid_m`.
pub fn analyze(codes: &[ChipSequence], hybrid_m: u32) -> Result<String> {
    if codes.is_empty() {
        bail!("empty codebook");
    }
    let n = codes[0].len();
    if codes.iter().any(|c| c.len() != n) {
        bail!("codebook mixes code lengths");
    }
    let mut r = String::new();
    let _ = writeln!(r, "codes {}", codes.len());
    let _ = writeln!(r, "length {n}");
    let auto_peak = codes.iter().map(|c| periodic_correlation(c, c).map(|p| p.peak_offzero)).collect::<Result<Vec<_>, _>>()?;
    let _ = writeln!(r, "autocorrelation max off-peak |R| {}", auto_peak.iter().max().unwrap_or(&0));
    let mut values = BTreeSet::new();
    let (mut peak, mut orthogonal, mut pairs) = (0i64, 0usize, 0usize);
    for i in 0..codes.len() {
        for j in (i + 1)..codes.len() {
            let p = periodic_correlation(&codes[i], &codes[j])?;
            peak = peak.max(p.values.iter().map(|v| v.abs()).max().unwrap_or(0));
            orthogonal += usize::from(p.values[0] == 0);
            pairs += 1;
            values.extend(p.values.iter().copied());
        }
    }
    if pairs > 0 {
        if values.len() <= 16 {
            let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(r, "cross-correlation values {{{}}}", list.join(", "));
        } else {
            let _ = writeln!(r, "cross-correlation distinct values {}", values.len());
        }
        let rho = peak as f64 / n as f64;
        let _ = writeln!(r, "cross-correlation max |R| {peak} (rho^2 {:.6})", rho * rho);
        let _ = writeln!(r, "zero-lag orthogonal pairs {orthogonal} of {pairs}");
    }
    let paprs: Vec<f64> = codes.iter().map(measure_papr).collect();
    let (lo, hi) = paprs.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &p| (a.min(p), b.max(p)));
    let mean = paprs.iter().sum::<f64>() / paprs.len() as f64;
    let _ = writeln!(r, "papr min {lo:.4} mean {mean:.4} max {hi:.4}");

    let gold = generate_gold_family(hybrid_m)?;
    let walsh = generate_walsh_family(1 << hybrid_m)?;
    let trials = 8.min(walsh.len() - 2);
    let (mut gap, mut equal, mut lags) = (0.0f64, 0usize, 0usize);
    for k in 0..trials {
        let rep = correlation_product_report(&gold[k], &gold[k + 1], &walsh[k + 1], &walsh[k + 2])?;
        gap = gap.max(rep.max_abs_gap);
        equal += rep.lags_equal;
        lags += rep.lags.len();
    }
    let _ = writeln!(r, "hybrid m={hybrid_m}: R_H = R_G*R_W at {equal} of {lags} lags, max gap {gap:.6}");
    let papr_pairs = gold.len().min(walsh.len() - 1);
    let mut held = 0;
    for k in 0..papr_pairs {
        held += usize::from(papr_report(&gold[k], &walsh[k + 1])?.hybrid_not_above_min());
    }
    let _ = writeln!(r, "hybrid m={hybrid_m}: PAPR_H <= min(PAPR_G, PAPR_W) in {held} of {papr_pairs} pairs");
    Ok(r)
}

pub fn seq_analyze(cfg: &ScenarioConfig, codes: &[ChipSequence], hybrid_m: u32, label: &str, out: &Path) -> Result<Written> {
    let report = analyze(codes, hybrid_m)?;
    let text = prov(cfg, format!("seq analyze {label}")).header() + &report;
    let file = formats::write_file(out, "seq_report.txt", &text)?;
    Ok(Written { files: vec![file], report })
}

#[derive(Debug, Clone, Serialize)]
struct TrainReport<'a> {
    format: &'static str,
    policy: &'a str,
    config_hash: String,
    seed: u64,
    episodes: usize,
    steps: u64,
    target_syncs: u64,
    exploration_end: Option<usize>,
    convergence: Option<usize>,
    plateau: Option<f64>,
    /// Mean training loss per episode; `null` before warmup ends.
    losses: &'a [f64],
}

fn trained_names(policy: PolicySpec) -> (String, String, String) {
    let p = policy.name();
    (format!("train_{p}.csv"), format!("agent_{p}.ckpt"), format!("train_{p}.json"))
}

fn write_training(cfg: &ScenarioConfig, t: &TrainOutcome, out: &Path) -> Result<Written> {
    let p = prov(cfg, format!("train policy={}", t.policy.name()));
    let (csv, ckpt, json) = trained_names(t.policy);
    let rep = TrainReport {
        format: "seqnoma-train 1",
        policy: t.policy.name(),
        config_hash: p.config_hash.clone(),
        seed: cfg.seed,
        episodes: t.episodes.len(),
        steps: t.steps,
        target_syncs: t.target_syncs,
        exploration_end: t.convergence.as_ref().and_then(|c| c.exploration_end),
        convergence: t.convergence.as_ref().and_then(|c| c.convergence),
        plateau: t.convergence.as_ref().map(|c| c.plateau),
        losses: &t.losses,
    };
    let files = vec![
        formats::write_file(out, &csv, &formats::training_csv(&p, &t.episodes))?,
        formats::write_file(out, &ckpt, &formats::checkpoint_file(&p, &t.net))?,
        formats::write_file(out, &json, &(serde_json::to_string_pretty(&rep)? + "\n"))?,
    ];
    let report = format!(
        "{}: {} episodes, {} updates, {} target syncs, convergence {}\n",
        t.policy.name(),
        t.episodes.len(),
        t.steps,
        t.target_syncs,
        rep.convergence.map_or_else(|| "not detected".to_string(), |c| format!("at episode {c}"))
    );
    Ok(Written { files, report })
}

fn check_trainable(policy: PolicySpec) -> Result<()> {
    if policy.agent_source() != Some(policy) {
        bail!("{} does not train its own agent; train hybrid-dqn or drl-conventional", policy.name());
    }
    Ok(())
}

pub fn train(cfg: &ScenarioConfig, policy: PolicySpec, out: &Path) -> Result<(TrainOutcome, Written)> {
    check_trainable(policy)?;
    let t = train_agent(policy, cfg, cfg.seed, |_| {})?;
    let w = write_training(cfg, &t, out)?;
    Ok((t, w))
}

/// Per-seed samples of the summary metrics. Seeds without any handover
/// attempt have no HSR and are left out of that metric.
pub fn per_seed(runs: &[RunMetrics]) -> [(&'static str, Vec<f64>); 4] {
    [
        ("hsr", runs.iter().filter_map(|r| r.hsr()).collect()),
        ("throughput_mbps", runs.iter().map(|r| r.throughput_mbps()).collect()),
        ("interference_dbm", runs.iter().map(|r| r.interference_dbm()).collect()),
        ("reward", runs.iter().map(|r| r.reward()).collect()),
    ]
}

fn summarize_arms(cfg: &ScenarioConfig, command: &str, seeds: &[u64], arms: &[(String, &[RunMetrics])]) -> (Summary, String) {
    let names: Vec<&str> = arms.iter().map(|(n, _)| n.as_str()).collect();
    let samples: Vec<[(&str, Vec<f64>); 4]> = arms.iter().map(|(_, r)| per_seed(r)).collect();
    let mut metrics = Vec::new();
    let mut text = String::new();
    for m in 0..4 {
        let groups: Vec<Vec<f64>> = samples.iter().map(|s| s[m].1.clone()).collect();
        let (s, t) = formats::summarize(samples[0][m].0, &names, &groups);
        metrics.push(s);
        text.push_str(&t);
        text.push('\n');
    }
    let summary = Summary {
        format: formats::SUMMARY_FORMAT.to_string(),
        command: command.to_string(),
        config_hash: config_hash(cfg),
        seed: cfg.seed,
        seeds: seeds.to_vec(),
        level: formats::LEVEL,
        metrics,
    };
    (summary, text)
}

fn write_summary(cfg: &ScenarioConfig, prefix: &str, summary: &Summary, text: &str, out: &Path) -> Result<Vec<String>> {
    let header = prov(cfg, format!("{} summary", summary.command)).header();
    Ok(vec![
        formats::write_file(out, &format!("{prefix}_summary.json"), &formats::summary_json(summary))?,
        formats::write_file(out, &format!("{prefix}_summary.txt"), &(header + text))?,
    ])
}

fn write_arm(cfg: &ScenarioConfig, prefix: &str, policy: PolicySpec, runs: &[RunMetrics], out: &Path) -> Result<String> {
    let p = prov(cfg, format!("{prefix} policy={}", policy.name()));
    formats::write_file(out, &format!("{prefix}_{}.csv", policy.name()), &formats::runs_csv(&p, runs))
}

pub fn eval(
    cfg: &ScenarioConfig,
    policy: PolicySpec,
    agent: Option<&QNetwork>,
    out: &Path,
    pool: &Pool,
) -> Result<(Vec<RunMetrics>, Written)> {
    let seeds = eval_seeds(cfg);
    let runs = run_scenario(policy, cfg, &seeds, agent, pool)?;
    let mut files = vec![write_arm(cfg, "eval", policy, &runs, out)?];
    let (summary, text) = summarize_arms(cfg, "eval", &seeds, &[(policy.name().to_string(), &runs)]);
    files.extend(write_summary(cfg, &format!("eval_{}", policy.name()), &summary, &text, out)?);
    Ok((runs, Written { files, report: text }))
}

/// Agents for every trained policy in `policies`: loaded from `agents` when
/// given, trained otherwise (two at a time on the pool).
pub fn agents_for(
    cfg: &ScenarioConfig,
    policies: &[PolicySpec],
    agents: Option<&Path>,
    out: &Path,
    pool: &Pool,
) -> Result<(Vec<(PolicySpec, QNetwork)>, Vec<TrainOutcome>, Written)> {
    let mut needed: Vec<PolicySpec> = Vec::new();
    for p in policies.iter().filter_map(|p| p.agent_source()) {
        if !needed.contains(&p) {
            needed.push(p);
        }
    }
    let mut w = Written::default();
    if let Some(dir) = agents {
        let mut nets = Vec::new();
        for p in needed {
            let path = dir.join(trained_names(p).1);
            nets.push((p, formats::read_checkpoint_file(&path)?));
        }
        return Ok((nets, Vec::new(), w));
    }
    let mut outcomes = Vec::new();
    for chunk in needed.chunks(2) {
        let run = |p: PolicySpec| train_agent(p, cfg, cfg.seed, |_| {});
        match chunk {
            [a, b] => {
                let (ra, rb) = pool.join(|| run(*a), || run(*b));
                outcomes.push(ra?);
                outcomes.push(rb?);
            }
            [a] => outcomes.push(run(*a)?),
            _ => unreachable!(),
        }
    }
    for t in &outcomes {
        let tw = write_training(cfg, t, out)?;
        w.files.extend(tw.files);
        w.report.push_str(&tw.report);
    }
    let nets = outcomes.iter().map(|t| (t.policy, t.net.clone())).collect();
    Ok((nets, outcomes, w))
}

fn agent_of(nets: &[(PolicySpec, QNetwork)], policy: PolicySpec) -> Option<&QNetwork> {
    let src = policy.agent_source()?;
    nets.iter().find(|(p, _)| *p == src).map(|(_, n)| n)
}

/// Results of one comparison battery.
pub struct Battery {
    pub seeds: Vec<u64>,
    pub arms: Vec<(PolicySpec, Vec<RunMetrics>)>,
    pub trained: Vec<TrainOutcome>,
    pub summary: Summary,
}

fn battery(
    cfg: &ScenarioConfig,
    name: &str,
    arms: Vec<(PolicySpec, Vec<RunMetrics>)>,
    trained: Vec<TrainOutcome>,
    mut w: Written,
    out: &Path,
) -> Result<(Battery, Written)> {
    let seeds = eval_seeds(cfg);
    for (p, runs) in &arms {
        w.files.push(write_arm(cfg, name, *p, runs, out)?);
    }
    let named: Vec<(String, &[RunMetrics])> = arms.iter().map(|(p, r)| (p.name().to_string(), r.as_slice())).collect();
    let (summary, text) = summarize_arms(cfg, &format!("suite {name}"), &seeds, &named);
    w.files.extend(write_summary(cfg, name, &summary, &text, out)?);
    w.report.push_str(&text);
    Ok((Battery { seeds, arms, trained, summary }, w))
}

/// The six-arm comparison.
pub fn compare(cfg: &ScenarioConfig, agents: Option<&Path>, out: &Path, pool: &Pool) -> Result<(Battery, Written)> {
    let (nets, trained, w) = agents_for(cfg, &PolicySpec::COMPARE, agents, out, pool)?;
    let seeds = eval_seeds(cfg);
    let arms = PolicySpec::COMPARE
        .iter()
        .map(|&p| Ok((p, run_scenario(p, cfg, &seeds, agent_of(&nets, p), pool)?)))
        .collect::<Result<Vec<_>>>()?;
    battery(cfg, "compare", arms, trained, w, out)
}

/// The full system against its four ablations, all with the full system's
/// agent.
pub fn ablation(cfg: &ScenarioConfig, agents: Option<&Path>, out: &Path, pool: &Pool) -> Result<(Battery, Written)> {
    let (nets, trained, w) = agents_for(cfg, &[PolicySpec::HybridDqn], agents, out, pool)?;
    let agent = agent_of(&nets, PolicySpec::HybridDqn).context("missing hybrid-dqn agent")?;
    let arms = ablation_suite(cfg, &eval_seeds(cfg), agent, pool)?;
    battery(cfg, "ablation", arms, trained, w, out)
}

pub const VELOCITY_COLUMNS: [&str; 10] = [
    "policy",
    "speed_kmh",
    "seed",
    "hsr",
    "throughput_mbps",
    "interference_dbm",
    "ho_attempts_per_episode",
    "ho_success",
    "ho_rlf",
    "ho_pingpong",
];

pub fn velocity_csv(prov: &Provenance, points: &[SweepPoint]) -> String {
    let mut out = prov.header();
    out.push_str(&VELOCITY_COLUMNS.join(","));
    out.push('\n');
    for pt in points {
        for r in &pt.runs {
            let c = r.counts();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                pt.policy.name(),
                pt.speed_kmh,
                r.seed,
                r.hsr().map_or_else(|| "n/a".to_string(), |h| h.to_string()),
                r.throughput_mbps(),
                r.interference_dbm(),
                r.attempts_per_episode(),
                c.success,
                c.rlf,
                c.pingpong
            );
        }
    }
    out
}

pub fn velocity(
    cfg: &ScenarioConfig,
    policies: &[PolicySpec],
    speeds: &[f64],
    agents: Option<&Path>,
    out: &Path,
    pool: &Pool,
) -> Result<(Vec<SweepPoint>, Written)> {
    let (nets, _, mut w) = agents_for(cfg, policies, agents, out, pool)?;
    let seeds = eval_seeds(cfg);
    let points = velocity_sweep(policies, speeds, cfg, &seeds, |p| agent_of(&nets, p).cloned(), pool)?;
    let p = prov(cfg, "suite velocity");
    w.files.push(formats::write_file(out, "velocity.csv", &velocity_csv(&p, &points))?);
    let named: Vec<(String, &[RunMetrics])> =
        points.iter().map(|pt| (format!("{}@{}", pt.policy.name(), pt.speed_kmh), pt.runs.as_slice())).collect();
    let (mut summary, mut text) = summarize_arms(cfg, "suite velocity", &seeds, &named);
    let names: Vec<&str> = named.iter().map(|(n, _)| n.as_str()).collect();
    let events: Vec<Vec<f64>> = points.iter().map(|pt| pt.runs.iter().map(|r| r.attempts_per_episode()).collect()).collect();
    let (s, t) = formats::summarize("ho_attempts_per_episode", &names, &events);
    summary.metrics.push(s);
    text.push_str(&t);
    w.files.extend(write_summary(cfg, "velocity", &summary, &text, out)?);
    w.report.push_str(&text);
    Ok((points, w))
}

/// Statistics over existing metrics CSVs, one arm per file.
pub fn stats(cfg: &ScenarioConfig, inputs: &[&Path], metrics: &[&str], out: &Path) -> Result<Written> {
    if inputs.len() < 2 {
        bail!("stats needs at least two CSV files");
    }
    let mut names = Vec::new();
    let mut tables = Vec::new();
    for p in inputs {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        tables.push(formats::parse_csv(&text).with_context(|| format!("parsing {}", p.display()))?);
        names.push(p.file_stem().map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned()));
    }
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let mut summary = Summary {
        format: formats::SUMMARY_FORMAT.to_string(),
        command: "stats".to_string(),
        config_hash: config_hash(cfg),
        seed: cfg.seed,
        seeds: Vec::new(),
        level: formats::LEVEL,
        metrics: Vec::new(),
    };
    let mut text = String::new();
    for m in metrics {
        let groups = tables.iter().map(|t| t.samples(m)).collect::<Result<Vec<_>>>()?;
        let (s, t) = formats::summarize(m, &name_refs, &groups);
        summary.metrics.push(s);
        text.push_str(&t);
        text.push('\n');
    }
    let files = write_summary(cfg, "stats", &summary, &text, out)?;
    Ok(Written { files, report: text })
}
