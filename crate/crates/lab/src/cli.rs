use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use seqnoma_core::experiments::PolicySpec;
use seqnoma_core::seqlib::{parse_codebook, Family};
use seqnoma_core::ScenarioConfig;

use crate::config;
use crate::exec::Pool;
use crate::formats::{self, Meta};
use crate::runner::{self, Written};

#[derive(Debug, Parser)]
#[command(name = "seqnoma", version, about = "Hybrid spreading-code NOMA handover simulator")]
pub struct Cli {
    /// Base seed; overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Scenario file of `key = value` lines.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for seed fan-out (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Extra `key=value` override, applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spreading-code tools.
    Seq {
        #[command(subcommand)]
        command: SeqCommand,
    },
    /// Train an agent and write its checkpoint and per-episode CSV.
    Train(TrainArgs),
    /// Evaluate one policy over the evaluation seeds.
    Eval(EvalArgs),
    /// Multi-policy experiment batteries.
    Suite {
        #[command(subcommand)]
        command: SuiteCommand,
    },
    /// ANOVA, intervals and pairwise effect sizes over metrics CSVs.
    Stats(StatsArgs),
}

#[derive(Debug, Subcommand)]
pub enum SeqCommand {
    /// Write a codebook file.
    Gen(CodeArgs),
    /// Correlation and PAPR report.
    Analyze {
        #[command(flatten)]
        code: CodeArgs,
        /// Analyze this codebook file instead of generating one.
        #[arg(long, value_name = "FILE")]
        codebook: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct CodeArgs {
    /// mseq, gold, walsh, kasami or hybrid.
    #[arg(long, default_value = "gold", value_parser = parse_family)]
    pub family: Family,
    /// Register degree (log2 of the order for walsh).
    #[arg(long)]
    pub m: Option<u32>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long, default_value = "hybrid-dqn", value_parser = parse_policy)]
    pub policy: PolicySpec,
    /// Training episodes.
    #[arg(long)]
    pub episodes: Option<u32>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_parser = parse_policy)]
    pub policy: PolicySpec,
    /// Agent checkpoint, required by agent policies.
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Number of evaluation seeds.
    #[arg(long)]
    pub seeds: Option<u32>,
    /// Evaluation episodes per seed.
    #[arg(long)]
    pub episodes: Option<u32>,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Number of evaluation seeds.
    #[arg(long)]
    pub seeds: Option<u32>,
    /// Training episodes for agents that are trained here.
    #[arg(long)]
    pub episodes: Option<u32>,
    /// Evaluation episodes per seed.
    #[arg(long)]
    pub eval_episodes: Option<u32>,
    /// Directory holding `agent_<policy>.ckpt` files to use instead of
    /// training.
    #[arg(long, value_name = "DIR")]
    pub agents: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum SuiteCommand {
    /// Gold, Walsh, Kasami, hybrid without AI, conventional DRL, hybrid DQN.
    Compare(SuiteArgs),
    /// The full system and its four ablations.
    Ablation(SuiteArgs),
    /// Policies at fixed user speeds.
    Velocity {
        #[command(flatten)]
        suite: SuiteArgs,
        #[arg(long, value_delimiter = ',', default_value = "3,30,60,120")]
        speeds: Vec<f64>,
        #[arg(long, value_delimiter = ',', value_parser = parse_policy, default_value = "gold-only,hybrid-no-ai,hybrid-dqn")]
        policies: Vec<PolicySpec>,
    },
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Metrics CSVs; each file is one arm.
    #[arg(required = true, num_args = 2..)]
    pub files: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "hsr,throughput_mbps,interference_dbm")]
    pub metric: Vec<String>,
}

fn parse_family(s: &str) -> Result<Family, String> {
    Family::parse(s).ok_or_else(|| format!("unknown family {s:?}"))
}

fn parse_policy(s: &str) -> Result<PolicySpec, String> {
    PolicySpec::parse(s).map_err(|e| e.to_string())
}

fn resolve(cli: &Cli) -> Result<ScenarioConfig> {
    let mut cfg = config::load(cli.config.as_deref())?;
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {kv:?}"))?;
        config::set(&mut cfg, k.trim(), v.trim()).with_context(|| format!("--set {kv}"))?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn suite_overrides(cfg: &mut ScenarioConfig, a: &SuiteArgs) {
    if let Some(n) = a.seeds {
        cfg.eval_seeds = n;
    }
    if let Some(n) = a.episodes {
        cfg.train.episodes = n;
    }
    if let Some(n) = a.eval_episodes {
        cfg.eval_episodes = n;
    }
}

/// Runs a parsed command. Returns the final configuration and what was
/// written; the metadata sidecar is written by [`run`].
pub fn execute(cli: &Cli) -> Result<(ScenarioConfig, String, Written)> {
    let mut cfg = resolve(cli)?;
    let out = cli.out.as_path();
    let pool = || Pool::new(cli.jobs);
    let (slug, w) = match &cli.command {
        Command::Seq { command: SeqCommand::Gen(a) } => {
            cfg.validate()?;
            ("seq-gen".to_string(), runner::seq_gen(&cfg, a.family, a.m, out)?)
        }
        Command::Seq { command: SeqCommand::Analyze { code, codebook } } => {
            cfg.validate()?;
            let (codes, label) = match codebook {
                Some(p) => {
                    let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    (parse_codebook(&text)?, format!("codebook={}", p.display()))
                }
                None => (
                    runner::codebook(&cfg, code.family, code.m)?,
                    format!("family={} m={}", code.family, code.m.unwrap_or(cfg.gold_degree)),
                ),
            };
            let hybrid_m = match code.family {
                Family::Gold | Family::Hybrid => code.m.unwrap_or(cfg.gold_degree),
                _ => cfg.gold_degree,
            };
            ("seq-analyze".to_string(), runner::seq_analyze(&cfg, &codes, hybrid_m, &label, out)?)
        }
        Command::Train(a) => {
            if let Some(n) = a.episodes {
                cfg.train.episodes = n;
            }
            cfg.validate()?;
            (format!("train-{}", a.policy.name()), runner::train(&cfg, a.policy, out)?.1)
        }
        Command::Eval(a) => {
            if let Some(n) = a.seeds {
                cfg.eval_seeds = n;
            }
            if let Some(n) = a.episodes {
                cfg.eval_episodes = n;
            }
            cfg.validate()?;
            let agent = match (&a.checkpoint, a.policy.uses_agent()) {
                (Some(p), true) => Some(formats::read_checkpoint_file(p)?),
                (None, true) => return Err(anyhow!("{} needs --checkpoint", a.policy.name())),
                (_, false) => None,
            };
            (format!("eval-{}", a.policy.name()), runner::eval(&cfg, a.policy, agent.as_ref(), out, &pool()?)?.1)
        }
        Command::Suite { command } => {
            let (slug, a) = match command {
                SuiteCommand::Compare(a) => ("suite-compare", a),
                SuiteCommand::Ablation(a) => ("suite-ablation", a),
                SuiteCommand::Velocity { suite, .. } => ("suite-velocity", suite),
            };
            suite_overrides(&mut cfg, a);
            cfg.validate()?;
            let agents = a.agents.as_deref();
            let w = match command {
                SuiteCommand::Compare(_) => runner::compare(&cfg, agents, out, &pool()?)?.1,
                SuiteCommand::Ablation(_) => runner::ablation(&cfg, agents, out, &pool()?)?.1,
                SuiteCommand::Velocity { speeds, policies, .. } => {
                    runner::velocity(&cfg, policies, speeds, agents, out, &pool()?)?.1
                }
            };
            (slug.to_string(), w)
        }
        Command::Stats(a) => {
            cfg.validate()?;
            let files: Vec<&Path> = a.files.iter().map(PathBuf::as_path).collect();
            let metrics: Vec<&str> = a.metric.iter().map(String::as_str).collect();
            ("stats".to_string(), runner::stats(&cfg, &files, &metrics, out)?)
        }
    };
    Ok((cfg, slug, w))
}

fn unix_now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

/// Runs a command and writes its `meta_<command>.json` sidecar.
pub fn run(cli: &Cli, argv: &[String]) -> Result<Written> {
    let started = unix_now();
    let (cfg, slug, w) = execute(cli)?;
    let meta = Meta {
        command: argv.to_vec(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config::config_hash(&cfg),
        seed: cfg.seed,
        started_unix_s: started,
        finished_unix_s: unix_now(),
        files: w.files.clone(),
    };
    formats::write_file(&cli.out, &format!("meta_{slug}.json"), &formats::meta_json(&meta))?;
    Ok(w)
}

/// Entry point shared by the binary and tests; returns the exit code.
pub fn main_from(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli, &argv) {
        Ok(w) => {
            print!("{}", w.report);
            for f in &w.files {
                println!("wrote {}", cli.out.join(f).display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
