use alloc::vec::Vec;

use super::DqnError;
use crate::math;

/// Settings of the convergence-phase detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceParams {
    /// Moving-average window `W`, in episodes.
    pub window: usize,
    /// Allowed drift over the converged region, as a fraction of the plateau
    /// band.
    pub slope_frac: f64,
    /// Plateau band half-width as a fraction of the moving-average range.
    pub plateau_frac: f64,
    /// Share of the total improvement that ends the exploration phase.
    pub exploration_frac: f64,
    /// Lower bound on the band in standard errors of the moving average,
    /// estimated from the last `2W` rewards.
    pub noise_mult: f64,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        Self { window: 50, slope_frac: 0.5, plateau_frac: 0.05, exploration_frac: 0.1, noise_mult: 3.0 }
    }
}

impl ConvergenceParams {
    pub fn validate(&self) -> Result<(), &'static str> {
        if self.window < 1 {
            return Err("convergence window must be at least 1");
        }
        if !(self.slope_frac > 0.0 && self.plateau_frac > 0.0 && (0.0..1.0).contains(&self.exploration_frac) && self.noise_mult >= 0.0) {
            return Err("convergence thresholds out of range");
        }
        Ok(())
    }
}

/// Phase boundaries as 1-based episode numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub moving_average: Vec<f64>,
    pub plateau: f64,
    /// Last episode of the exploration phase.
    pub exploration_end: Option<usize>,
    /// First converged episode; `None` means "not converged".
    pub convergence: Option<usize>,
}

impl ConvergenceReport {
    pub fn converged(&self) -> bool {
        self.convergence.is_some()
    }
}

/// Finds the exploration / learning / convergence boundaries of a reward
/// history.
///
/// The moving average `ma` over `W` episodes is compared with its final
/// plateau (the mean of the last `W` averages). The convergence episode is the
/// end of the first window from which `ma` stays within the plateau band until
/// the end of the run, the band holds for at least `W` averages, and the
/// least-squares drift over that region stays under `slope_frac` of the band.
/// The band is `plateau_frac` of the moving-average range, widened to
/// `noise_mult` standard errors when the rewards are noisy.
pub fn detect_convergence(rewards: &[f64], p: &ConvergenceParams) -> Result<ConvergenceReport, DqnError> {
    let w = p.window.max(1);
    if rewards.len() < 2 * w {
        return Err(DqnError::ShortHistory { len: rewards.len(), need: 2 * w });
    }
    let mut ma = Vec::with_capacity(rewards.len() + 1 - w);
    let mut acc: f64 = rewards[..w].iter().sum();
    ma.push(acc / w as f64);
    for t in w..rewards.len() {
        acc += rewards[t] - rewards[t - w];
        ma.push(acc / w as f64);
    }
    let n = ma.len();
    let plateau = ma[n - w..].iter().sum::<f64>() / w as f64;
    let (lo, hi) = ma.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let tail = &rewards[rewards.len() - 2 * w..];
    let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let tail_sd = libm::sqrt(tail.iter().map(|r| (r - tail_mean) * (r - tail_mean)).sum::<f64>() / (tail.len() - 1).max(1) as f64);
    let band = (p.plateau_frac * (hi - lo)).max(p.noise_mult * tail_sd / libm::sqrt(w as f64));

    // Suffix statistics for O(1) checks per start index.
    let mut dev = alloc::vec![0.0f64; n + 1];
    let (mut st, mut stt, mut sy, mut sty) = (alloc::vec![0.0f64; n + 1], alloc::vec![0.0f64; n + 1], alloc::vec![0.0f64; n + 1], alloc::vec![0.0f64; n + 1]);
    for i in (0..n).rev() {
        let x = i as f64;
        dev[i] = dev[i + 1].max(math::abs(ma[i] - plateau));
        st[i] = st[i + 1] + x;
        stt[i] = stt[i + 1] + x * x;
        sy[i] = sy[i + 1] + ma[i];
        sty[i] = sty[i + 1] + x * ma[i];
    }
    let mut convergence = None;
    for t0 in 0..=(n - w) {
        if dev[t0] > band {
            continue;
        }
        let m = (n - t0) as f64;
        let denom = m * stt[t0] - st[t0] * st[t0];
        let slope = if denom > 0.0 { (m * sty[t0] - st[t0] * sy[t0]) / denom } else { 0.0 };
        if math::abs(slope) * m <= p.slope_frac * band {
            convergence = Some(t0 + w);
            break;
        }
    }

    let start = ma[0];
    let rise = plateau - start;
    let exploration_end = if rise == 0.0 {
        Some(w)
    } else {
        let cut = start + p.exploration_frac * rise;
        ma.iter().position(|&v| if rise > 0.0 { v >= cut } else { v <= cut }).map(|i| i + w)
    };
    Ok(ConvergenceReport { moving_average: ma, plateau, exploration_end, convergence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn constant_series_converges_at_window() {
        let r = detect_convergence(&vec![3.0; 300], &ConvergenceParams::default()).unwrap();
        assert_eq!(r.convergence, Some(50));
    }

    #[test]
    fn linear_series_never_converges() {
        let rewards: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let r = detect_convergence(&rewards, &ConvergenceParams::default()).unwrap();
        assert_eq!(r.convergence, None);
    }

    #[test]
    fn ramp_then_plateau() {
        let rewards: Vec<f64> = (1..=2000).map(|e| (e as f64 / 500.0).min(1.0)).collect();
        let p = ConvergenceParams::default();
        let r = detect_convergence(&rewards, &p).unwrap();
        let c = r.convergence.unwrap() as i64;
        assert!((c - 500).abs() <= p.window as i64, "{c}");
        let e = r.exploration_end.unwrap();
        assert!(e < c as usize);
    }

    #[test]
    fn noisy_plateau_converges() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let rewards: Vec<f64> =
            (1..=500).map(|e| 100.0 * (e as f64 / 100.0).min(1.0) + rng.gen_range(-40.0..40.0)).collect();
        let r = detect_convergence(&rewards, &ConvergenceParams::default()).unwrap();
        let c = r.convergence.unwrap();
        assert!((100..=300).contains(&c), "{c}");
    }

    #[test]
    fn short_history_is_an_error() {
        assert!(detect_convergence(&[1.0; 99], &ConvergenceParams::default()).is_err());
    }
}
