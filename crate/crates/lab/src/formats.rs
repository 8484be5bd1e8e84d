//! Output files. See `docs/formats.md` for the layouts.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use seqnoma_core::dqn::{read_checkpoint, write_checkpoint, QNetwork};
use seqnoma_core::experiments::{EpisodeMetrics, RunMetrics};
use seqnoma_core::stats::{self, AnovaResult, PairwiseRow, SummaryRow};

/// Columns of every metrics CSV after the optional leading `seed`.
pub const COLUMNS: [&str; 8] =
    ["episode", "hsr", "throughput_mbps", "interference_dbm", "reward", "ho_success", "ho_rlf", "ho_pingpong"];

/// Provenance carried by every data file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub label: String,
}

impl Provenance {
    pub fn header(&self) -> String {
        format!("# seqnoma config_hash={} seed={} {}\n", self.config_hash, self.seed, self.label)
    }
}

fn fmt_hsr(h: Option<f64>) -> String {
    h.map_or_else(|| "n/a".to_string(), |v| v.to_string())
}

fn push_row(out: &mut String, e: &EpisodeMetrics) {
    let c = e.counts;
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        e.episode,
        fmt_hsr(e.hsr),
        e.throughput_mbps,
        e.interference_dbm,
        e.reward,
        c.success,
        c.rlf,
        c.pingpong
    );
}

/// Per-episode CSV of one training run.
pub fn training_csv(prov: &Provenance, episodes: &[EpisodeMetrics]) -> String {
    let mut out = prov.header();
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for e in episodes {
        push_row(&mut out, e);
    }
    out
}

/// Evaluation CSV: every episode of every seed, seeds in input order.
pub fn runs_csv(prov: &Provenance, runs: &[RunMetrics]) -> String {
    let mut out = prov.header();
    out.push_str("seed,");
    out.push_str(&COLUMNS.join(","));
    out.push('\n');
    for r in runs {
        for e in &r.episodes {
            let _ = write!(out, "{},", r.seed);
            push_row(&mut out, e);
        }
    }
    out
}

/// A parsed metrics CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    /// `None` marks "n/a".
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| anyhow!("no column {name:?}"))
    }

    /// One sample per seed (the mean of that seed's defined values) when a
    /// `seed` column exists, otherwise one per row. Undefined cells are
    /// skipped.
    pub fn samples(&self, metric: &str) -> Result<Vec<f64>> {
        let m = self.column(metric)?;
        let Ok(s) = self.column("seed") else {
            return Ok(self.rows.iter().filter_map(|r| r[m]).collect());
        };
        let mut out: Vec<(u64, f64, usize)> = Vec::new();
        for r in &self.rows {
            let seed = r[s].ok_or_else(|| anyhow!("missing seed"))? as u64;
            let Some(v) = r[m] else { continue };
            match out.iter_mut().find(|(k, _, _)| *k == seed) {
                Some(e) => {
                    e.1 += v;
                    e.2 += 1;
                }
                None => out.push((seed, v, 1)),
            }
        }
        Ok(out.into_iter().map(|(_, sum, n)| sum / n as f64).collect())
    }
}

pub fn parse_csv(text: &str) -> Result<Table> {
    let mut comments = Vec::new();
    let mut columns: Option<Vec<String>> = None;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if let Some(c) = line.strip_prefix('#') {
            comments.push(c.trim().to_string());
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        match &columns {
            None => columns = Some(cells.iter().map(|s| s.to_string()).collect()),
            Some(cols) => {
                if cells.len() != cols.len() {
                    bail!("line {}: {} fields, header has {}", i + 1, cells.len(), cols.len());
                }
                let row = cells
                    .iter()
                    .map(|c| match *c {
                        "n/a" => Ok(None),
                        v => v.parse::<f64>().map(Some).with_context(|| format!("line {}: bad number {v:?}", i + 1)),
                    })
                    .collect::<Result<Vec<_>>>()?;
                rows.push(row);
            }
        }
    }
    Ok(Table { comments, columns: columns.ok_or_else(|| anyhow!("missing header"))?, rows })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaSummary {
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: f64,
    pub p: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub a: String,
    pub b: String,
    /// `null` when the pooled SD is zero and the means differ.
    pub cohens_d: f64,
    pub welch_t: f64,
    pub welch_df: f64,
    pub p_value: f64,
    pub p: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub arms: Vec<ArmSummary>,
    pub anova: Option<AnovaSummary>,
    /// Pairwise Cohen's d and Welch t, uncorrected.
    pub pairwise: Vec<PairSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub level: f64,
    pub metrics: Vec<MetricSummary>,
}

pub const SUMMARY_FORMAT: &str = "seqnoma-summary 1";
pub const LEVEL: f64 = 0.95;

/// Statistics for one metric across arms, plus the aligned text table.
/// Arms with fewer than two samples get no interval and are left out of the
/// tests.
pub fn summarize(metric: &str, names: &[&str], groups: &[Vec<f64>]) -> (MetricSummary, String) {
    let mut rows: Vec<SummaryRow> = Vec::new();
    let mut kept_names = Vec::new();
    let mut kept = Vec::new();
    for (name, g) in names.iter().zip(groups) {
        if let Ok(r) = SummaryRow::from_samples(name, g, LEVEL) {
            rows.push(r);
            kept_names.push(*name);
            kept.push(g.as_slice());
        }
    }
    let anova: Option<AnovaResult> = stats::one_way_anova(&kept).ok();
    let pairs: Vec<PairwiseRow> = stats::pairwise(&kept_names, &kept).unwrap_or_default();
    let text = stats::render_table(metric, &rows, anova.as_ref(), &pairs);
    let summary = MetricSummary {
        metric: metric.to_string(),
        arms: rows
            .iter()
            .map(|r| ArmSummary { name: r.name.clone(), n: r.n, mean: r.mean, sd: r.sd, ci_lo: r.ci_lo, ci_hi: r.ci_hi })
            .collect(),
        anova: anova.map(|a| AnovaSummary {
            f: a.f,
            df_between: a.df_between,
            df_within: a.df_within,
            p_value: a.p_value,
            p: stats::format_p(a.p_value),
        }),
        pairwise: pairs
            .iter()
            .map(|p| PairSummary {
                a: p.a.clone(),
                b: p.b.clone(),
                cohens_d: p.cohens_d,
                welch_t: p.welch.t,
                welch_df: p.welch.df,
                p_value: p.welch.p_value,
                p: stats::format_p(p.welch.p_value),
            })
            .collect(),
    };
    (summary, text)
}

pub fn summary_json(s: &Summary) -> String {
    let mut text = serde_json::to_string_pretty(s).expect("summary serializes");
    text.push('\n');
    text
}

/// Run metadata that may differ between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub command: Vec<String>,
    pub version: String,
    pub config_hash: String,
    pub seed: u64,
    pub started_unix_s: f64,
    pub finished_unix_s: f64,
    pub files: Vec<String>,
}

pub fn meta_json(m: &Meta) -> String {
    let mut text = serde_json::to_string_pretty(m).expect("meta serializes");
    text.push('\n');
    text
}

/// Checkpoint text behind a provenance comment.
pub fn checkpoint_file(prov: &Provenance, net: &QNetwork) -> String {
    prov.header() + &write_checkpoint(net)
}

pub fn read_checkpoint_file(path: &Path) -> Result<QNetwork> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let body: String = text.lines().filter(|l| !l.starts_with('#')).flat_map(|l| [l, "\n"]).collect();
    read_checkpoint(&body).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<String> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    Ok(name.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqnoma_core::netsim::HandoverCounts;
    use seqnoma_core::experiments::PolicySpec;

    fn ep(episode: u32, hsr: Option<f64>) -> EpisodeMetrics {
        EpisodeMetrics {
            episode,
            hsr,
            throughput_mbps: 100.5,
            interference_dbm: -90.25,
            reward: 12.0,
            counts: HandoverCounts { attempts: 4, success: 2, rlf: 1, pingpong: 1 },
        }
    }

    #[test]
    fn csv_round_trip_and_samples() {
        let prov = Provenance { config_hash: "ab".into(), seed: 3, label: "policy=gold-only".into() };
        let runs = vec![
            RunMetrics { policy: PolicySpec::GoldOnly, seed: 3, episodes: vec![ep(0, Some(50.0)), ep(1, None)] },
            RunMetrics { policy: PolicySpec::GoldOnly, seed: 4, episodes: vec![ep(0, Some(70.0)), ep(1, Some(90.0))] },
        ];
        let t = parse_csv(&runs_csv(&prov, &runs)).unwrap();
        assert_eq!(t.comments, vec!["seqnoma config_hash=ab seed=3 policy=gold-only"]);
        assert_eq!(t.rows.len(), 4);
        assert_eq!(t.samples("hsr").unwrap(), vec![50.0, 80.0]);
        assert_eq!(t.samples("ho_rlf").unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn csv_rejects_ragged_rows() {
        assert!(parse_csv("a,b\n1,2\n3\n").is_err());
        assert!(parse_csv("a,b\n1,x\n").is_err());
        assert!(parse_csv("# only a comment\n").is_err());
    }

    #[test]
    fn summary_skips_short_arms() {
        let (s, text) = summarize("hsr", &["a", "b", "c"], &[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 7.0], vec![1.0]]);
        assert_eq!(s.arms.len(), 2);
        assert_eq!(s.anova.as_ref().unwrap().df_between, 1);
        assert_eq!(s.pairwise.len(), 1);
        assert!(text.starts_with("hsr\n"));
    }
}
