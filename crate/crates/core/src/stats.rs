//! One-way ANOVA, effect sizes, Welch's t test and confidence intervals, with
//! the special functions they need.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("need at least {need} groups, got {got}")]
    TooFewGroups { need: usize, got: usize },
    #[error("group {group} has {len} samples, at least 2 required")]
    TooFewSamples { group: usize, len: usize },
    #[error("confidence level {0} must lie strictly between 0 and 1")]
    BadLevel(f64),
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() as f64 - 1.0)
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = core::f64::consts::PI;
        return math::ln(pi / math::sin(pi * x)) - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = G[0];
    let t = x + 7.5;
    for (i, g) in G.iter().enumerate().skip(1) {
        a += g / (x + i as f64);
    }
    0.5 * math::ln(2.0 * core::f64::consts::PI) + (x + 0.5) * math::ln(t) - t + math::ln(a)
}

/// Continued fraction for the incomplete beta function (modified Lentz).
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if math::abs(d) < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..1000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if math::abs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if math::abs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if math::abs(d) < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if math::abs(c) < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if math::abs(del - 1.0) < 1e-15 {
            break;
        }
    }
    h
}

/// Regularized incomplete beta `I_x(a, b)`.
pub fn inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * math::ln(x) + b * math::ln(1.0 - x);
    let front = math::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn inc_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let ln_front = -x + a * math::ln(x) - ln_gamma(a);
    if x < a + 1.0 {
        let (mut sum, mut term, mut ap) = (1.0 / a, 1.0 / a, a);
        for _ in 0..10_000 {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if math::abs(term) < math::abs(sum) * 1e-16 {
                break;
            }
        }
        sum * math::exp(ln_front)
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if math::abs(d) < TINY {
                d = TINY;
            }
            c = b + an / c;
            if math::abs(c) < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if math::abs(del - 1.0) < 1e-16 {
                break;
            }
        }
        1.0 - math::exp(ln_front) * h
    }
}

/// `P(F > f)` for an F distribution with `(d1, d2)` degrees of freedom.
pub fn f_sf(f: f64, d1: f64, d2: f64) -> f64 {
    if !(f > 0.0) {
        return 1.0;
    }
    inc_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f))
}

/// Student t CDF.
pub fn t_cdf(t: f64, df: f64) -> f64 {
    let tail = 0.5 * inc_beta(df / 2.0, 0.5, df / (df + t * t));
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Student t quantile by bisection on the CDF (absolute error < 1e-10).
pub fn t_quantile(p: f64, df: f64) -> f64 {
    if p == 0.5 {
        return 0.0;
    }
    let (mut lo, mut hi) = (-1.0, 1.0);
    while t_cdf(lo, df) > p {
        lo *= 2.0;
    }
    while t_cdf(hi, df) < p {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_cdf(mid, df) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `P(χ² > x)` with `k` degrees of freedom.
pub fn chi2_sf(x: f64, k: f64) -> f64 {
    1.0 - inc_gamma(k / 2.0, x / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnovaResult {
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p_value: f64,
    pub ss_between: f64,
    pub ss_within: f64,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

pub fn one_way_anova<S: AsRef<[f64]>>(groups: &[S]) -> Result<AnovaResult, StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups { need: 2, got: groups.len() });
    }
    for (i, g) in groups.iter().enumerate() {
        if g.as_ref().len() < 2 {
            return Err(StatsError::TooFewSamples { group: i, len: g.as_ref().len() });
        }
    }
    let total: usize = groups.iter().map(|g| g.as_ref().len()).sum();
    let grand = groups.iter().flat_map(|g| g.as_ref().iter()).sum::<f64>() / total as f64;
    let means: Vec<f64> = groups.iter().map(|g| mean(g.as_ref())).collect();
    let variances: Vec<f64> = groups.iter().map(|g| variance(g.as_ref())).collect();
    let ss_between: f64 =
        groups.iter().zip(&means).map(|(g, m)| g.as_ref().len() as f64 * (m - grand) * (m - grand)).sum();
    let ss_within: f64 =
        groups.iter().zip(&means).map(|(g, m)| g.as_ref().iter().map(|v| (v - m) * (v - m)).sum::<f64>()).sum();
    let df_between = groups.len() - 1;
    let df_within = total - groups.len();
    let ms_b = ss_between / df_between as f64;
    let ms_w = ss_within / df_within as f64;
    let f = if ss_between <= 0.0 {
        0.0
    } else if ms_w <= 0.0 {
        f64::INFINITY
    } else {
        ms_b / ms_w
    };
    let p_value = if f.is_infinite() { 0.0 } else { f_sf(f, df_between as f64, df_within as f64) };
    Ok(AnovaResult { f, df_between, df_within, p_value, ss_between, ss_within, means, variances })
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<(), StatsError> {
    for (i, g) in [a, b].iter().enumerate() {
        if g.len() < 2 {
            return Err(StatsError::TooFewSamples { group: i, len: g.len() });
        }
    }
    Ok(())
}

/// Standardized mean difference with pooled SD. A zero pooled SD gives 0 for
/// equal means and ±∞ otherwise.
pub fn cohens_d(a: &[f64], b: &[f64]) -> Result<f64, StatsError> {
    check_pair(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let pooled = math::sqrt(((na - 1.0) * variance(a) + (nb - 1.0) * variance(b)) / (na + nb - 2.0));
    let diff = mean(a) - mean(b);
    Ok(if pooled > 0.0 {
        diff / pooled
    } else if diff == 0.0 {
        0.0
    } else {
        diff.signum() * f64::INFINITY
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p_value: f64,
}

pub fn welch_t(a: &[f64], b: &[f64]) -> Result<WelchResult, StatsError> {
    check_pair(a, b)?;
    let (va, vb) = (variance(a) / a.len() as f64, variance(b) / b.len() as f64);
    let diff = mean(a) - mean(b);
    let se2 = va + vb;
    if se2 <= 0.0 {
        let p = if diff == 0.0 { 1.0 } else { 0.0 };
        let t = if diff == 0.0 { 0.0 } else { diff.signum() * f64::INFINITY };
        return Ok(WelchResult { t, df: (a.len() + b.len() - 2) as f64, p_value: p });
    }
    let t = diff / math::sqrt(se2);
    let df = se2 * se2 / (va * va / (a.len() as f64 - 1.0) + vb * vb / (b.len() as f64 - 1.0));
    let p_value = inc_beta(df / 2.0, 0.5, df / (df + t * t));
    Ok(WelchResult { t, df, p_value })
}

/// Two-sided t interval for the mean.
pub fn confidence_interval(samples: &[f64], level: f64) -> Result<(f64, f64), StatsError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(StatsError::BadLevel(level));
    }
    if samples.len() < 2 {
        return Err(StatsError::TooFewSamples { group: 0, len: samples.len() });
    }
    let n = samples.len() as f64;
    let m = mean(samples);
    let sd = math::sqrt(variance(samples));
    let half = t_quantile(0.5 + level / 2.0, n - 1.0) * sd / math::sqrt(n);
    Ok((m - half, m + half))
}

/// `p < 0.001` below the threshold, otherwise four significant figures.
pub fn format_p(p: f64) -> String {
    if p < 0.001 {
        String::from("p < 0.001")
    } else {
        format!("p = {}", sig4(p))
    }
}

/// Four significant figures; scientific notation below `1e-4` and from `1e6`.
pub fn sig4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = math::floor(math::log10(math::abs(x))) as i32;
    if !(-4..6).contains(&mag) {
        return format!("{x:.3e}");
    }
    let decimals = (3 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// One row of a per-arm summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl SummaryRow {
    pub fn from_samples(name: &str, samples: &[f64], level: f64) -> Result<Self, StatsError> {
        let (ci_lo, ci_hi) = confidence_interval(samples, level)?;
        Ok(Self {
            name: String::from(name),
            n: samples.len(),
            mean: mean(samples),
            sd: math::sqrt(variance(samples)),
            ci_lo,
            ci_hi,
        })
    }
}

/// Pairwise comparison between two arms. No post-hoc correction is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseRow {
    pub a: String,
    pub b: String,
    pub cohens_d: f64,
    pub welch: WelchResult,
}

pub fn pairwise<S: AsRef<[f64]>>(names: &[&str], groups: &[S]) -> Result<Vec<PairwiseRow>, StatsError> {
    let mut rows = Vec::new();
    for i in 0..groups.len() {
        for j in (i + 1)..groups.len() {
            let (a, b) = (groups[i].as_ref(), groups[j].as_ref());
            rows.push(PairwiseRow {
                a: String::from(names[i]),
                b: String::from(names[j]),
                cohens_d: cohens_d(a, b)?,
                welch: welch_t(a, b)?,
            });
        }
    }
    Ok(rows)
}

/// Aligned plain-text rendering of a metric summary, its ANOVA and the
/// pairwise comparisons.
pub fn render_table(metric: &str, rows: &[SummaryRow], anova: Option<&AnovaResult>, pairs: &[PairwiseRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).chain(Some(8)).max().unwrap_or(8);
    let mut out = String::new();
    let _ = writeln!(out, "{metric}");
    let _ = writeln!(out, "{:<width$}  {:>4}  {:>12}  {:>12}  {:>25}", "arm", "n", "mean", "sd", "95% CI");
    for r in rows {
        let ci = format!("[{}, {}]", sig4(r.ci_lo), sig4(r.ci_hi));
        let _ = writeln!(out, "{:<width$}  {:>4}  {:>12}  {:>12}  {:>25}", r.name, r.n, sig4(r.mean), sig4(r.sd), ci);
    }
    if let Some(a) = anova {
        let _ = writeln!(out, "ANOVA F({}, {}) = {}, {}", a.df_between, a.df_within, sig4(a.f), format_p(a.p_value));
    }
    for p in pairs {
        let _ = writeln!(
            out,
            "{} vs {}: d = {}, Welch t({}) = {}, {}",
            p.a,
            p.b,
            sig4(p.cohens_d),
            sig4(p.welch.df),
            sig4(p.welch.t),
            format_p(p.welch.p_value)
        );
    }
    out
}
