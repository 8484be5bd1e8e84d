//! Channel realization, NOMA rates under SIC, interference accounting and
//! RSRP measurement.
//!
//! SIC decode order follows power allocation: the user with the weakest
//! channel (largest power share) is decoded first and every user treats the
//! users decoded after it as residual interference, so the last-decoded
//! (strongest) user sees no intra-group interference.

use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

use crate::math;
use crate::rng::complex_normal;

/// Tolerance on `Σα = 1`.
pub const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PhyError {
    #[error("path-loss exponent {0} must exceed 2")]
    BadExponent(f64),
    #[error("distance {0} m is not a valid distance")]
    BadDistance(f64),
    #[error("power factors must lie in [0, 1] and sum to 1 (sum = {sum})")]
    NotOnSimplex { sum: f64 },
    #[error("power factors must be non-increasing along the decode order")]
    NotOrdered,
    #[error("{members} members but {alphas} power factors")]
    SizeMismatch { members: usize, alphas: usize },
}

/// Large-scale propagation constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    /// Linear gain `L0` at the reference distance.
    pub ref_gain: f64,
    pub ref_distance_m: f64,
    pub exponent: f64,
    pub min_distance_m: f64,
}

impl ChannelParams {
    /// Free-space reference gain `(c / 4π f d0)²` at `d0`.
    pub fn free_space(carrier_hz: f64, ref_distance_m: f64, exponent: f64) -> Self {
        let lambda = 299_792_458.0 / carrier_hz;
        let g = lambda / (4.0 * core::f64::consts::PI * ref_distance_m);
        Self { ref_gain: g * g, ref_distance_m, exponent, min_distance_m: 1.0 }
    }

    pub fn validate(&self) -> Result<(), PhyError> {
        if !(self.exponent > 2.0) {
            return Err(PhyError::BadExponent(self.exponent));
        }
        Ok(())
    }

    /// `L0·(d/d0)^(−β)` with `d` clamped to the minimum distance.
    pub fn pathloss_linear(&self, d: f64) -> f64 {
        let d = d.max(self.min_distance_m);
        self.ref_gain * math::pow(d / self.ref_distance_m, -self.exponent)
    }
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self::free_space(3.5e9, 1.0, 3.5)
    }
}

/// One link realization `h = sqrt(pathloss)·g`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    pub distance_m: f64,
    pub fading: Complex64,
    pub pathloss_linear: f64,
}

impl ChannelState {
    pub fn gain(&self) -> Complex64 {
        self.fading * math::sqrt(self.pathloss_linear)
    }

    /// `|h|² = pathloss·|g|²`.
    pub fn power_gain(&self) -> f64 {
        self.pathloss_linear * self.fading.norm_sqr()
    }
}

pub fn sample_channel<R: Rng + ?Sized>(d: f64, params: &ChannelParams, rng: &mut R) -> Result<ChannelState, PhyError> {
    params.validate()?;
    if d.is_nan() || d < 0.0 {
        return Err(PhyError::BadDistance(d));
    }
    let (re, im) = complex_normal(rng);
    Ok(ChannelState {
        distance_m: d.max(params.min_distance_m),
        fading: Complex64::new(re, im),
        pathloss_linear: params.pathloss_linear(d),
    })
}

/// Users sharing one power-domain NOMA resource.
///
/// `members` is the SIC decode order and `alphas[k]` the power share of
/// `members[k]`; shares are non-increasing along the order.
#[derive(Debug, Clone, PartialEq)]
pub struct NomaGroup {
    pub members: Vec<usize>,
    pub alphas: Vec<f64>,
    pub total_power_w: f64,
}

impl NomaGroup {
    pub fn new(members: Vec<usize>, alphas: Vec<f64>, total_power_w: f64) -> Result<Self, PhyError> {
        let g = Self { members, alphas, total_power_w };
        g.validate()?;
        Ok(g)
    }

    pub fn empty(total_power_w: f64) -> Self {
        Self { members: Vec::new(), alphas: Vec::new(), total_power_w }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn position(&self, user: usize) -> Option<usize> {
        self.members.iter().position(|&u| u == user)
    }

    pub fn alpha_of(&self, user: usize) -> Option<f64> {
        self.position(user).map(|k| self.alphas[k])
    }

    pub fn check_simplex(&self) -> Result<(), PhyError> {
        if self.members.len() != self.alphas.len() {
            return Err(PhyError::SizeMismatch { members: self.members.len(), alphas: self.alphas.len() });
        }
        if self.alphas.is_empty() {
            return Ok(());
        }
        let sum: f64 = self.alphas.iter().sum();
        if math::abs(sum - 1.0) > SIMPLEX_TOL || self.alphas.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
            return Err(PhyError::NotOnSimplex { sum });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), PhyError> {
        self.check_simplex()?;
        if self.alphas.windows(2).any(|w| w[1] > w[0]) {
            return Err(PhyError::NotOrdered);
        }
        Ok(())
    }

    /// Re-sorts members into decode order, weakest `gain` first (ties by user
    /// id); power shares stay attached to decode positions.
    pub fn reorder<F: Fn(usize) -> f64>(&mut self, gain: F) {
        self.members.sort_by(|&a, &b| gain(a).total_cmp(&gain(b)).then(a.cmp(&b)));
    }

    /// Renormalizes shares by their sum and restores the non-increasing order.
    pub fn renormalize(&mut self) {
        let sum: f64 = self.alphas.iter().sum();
        if sum > 0.0 {
            for a in &mut self.alphas {
                *a /= sum;
            }
        } else if !self.alphas.is_empty() {
            let u = 1.0 / self.alphas.len() as f64;
            self.alphas.iter_mut().for_each(|a| *a = u);
        }
        self.alphas.sort_by(|a, b| b.total_cmp(a));
    }
}

/// Preset power split for a group of `n` users: shares decay geometrically
/// along the decode order with ratio `1 − 0.6·index/(count − 1)`, so preset 0
/// is uniform and the last preset is the most skewed toward weak users.
pub fn power_profile(n: usize, index: usize, count: usize) -> Vec<f64> {
    if n == 0 {
        return Vec::new();
    }
    let ratio = if count <= 1 { 1.0 } else { 1.0 - 0.6 * index.min(count - 1) as f64 / (count - 1) as f64 };
    let raw: Vec<f64> = (0..n).map(|k| math::pow(ratio, k as f64)).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|a| a / sum).collect()
}

/// Per-user SINR under SIC.
///
/// `gains[k]` is `|ĥ|²` of the user at decode position `k`; `pair_scale(k, j)`
/// scales the residual of later user `j` as seen by user `k`; `inter_w[k]` is
/// that user's inter-cell interference.
///
/// Panics if the power shares are off the simplex.
pub fn sic_sinr<F: Fn(usize, usize) -> f64>(
    group: &NomaGroup,
    gains: &[f64],
    pair_scale: F,
    inter_w: &[f64],
    noise_w: f64,
) -> Vec<f64> {
    if let Err(e) = group.check_simplex() {
        panic!("rate evaluated on an invalid power allocation: {e}");
    }
    let p = group.total_power_w;
    (0..group.len())
        .map(|k| {
            let signal = gains[k] * group.alphas[k] * p;
            let intra: f64 = ((k + 1)..group.len()).map(|j| gains[k] * group.alphas[j] * p * pair_scale(k, j)).sum();
            signal / (intra + inter_w[k] + noise_w)
        })
        .collect()
}

/// Intra-group residual interference seen by each decode position.
pub fn sic_residual<F: Fn(usize, usize) -> f64>(group: &NomaGroup, gains: &[f64], pair_scale: F) -> Vec<f64> {
    let p = group.total_power_w;
    (0..group.len())
        .map(|k| ((k + 1)..group.len()).map(|j| gains[k] * group.alphas[j] * p * pair_scale(k, j)).sum())
        .collect()
}

/// Spectral efficiency `log2(1 + SINR)` per decode position, with
/// `seq_gain[k]` scaling user `k`'s intra-group residual.
pub fn sic_rate(group: &NomaGroup, gains: &[f64], seq_gain: &[f64], inter_w: &[f64], noise_w: f64) -> Vec<f64> {
    sic_sinr(group, gains, |k, _| seq_gain[k], inter_w, noise_w)
        .into_iter()
        .map(|s| math::log2(1.0 + s))
        .collect()
}

/// One interfering cell as seen from a victim.
#[derive(Debug, Clone, Copy)]
pub struct InterferingCell<'a> {
    /// Transmit power times the link power gain to the victim.
    pub rx_power_w: f64,
    /// `(power share, code id)` of each user the cell serves.
    pub users: &'a [(f64, usize)],
}

/// Inter-cell interference: each cell's received power weighted by the
/// power-share-averaged `ρ²` between the victim's code and the codes it serves.
pub fn effective_interference<'a, I, F>(victim_code: usize, cells: I, rho2: F) -> f64
where
    I: IntoIterator<Item = InterferingCell<'a>>,
    F: Fn(usize, usize) -> f64,
{
    cells
        .into_iter()
        .map(|c| c.rx_power_w * c.users.iter().map(|&(a, code)| a * rho2(victim_code, code)).sum::<f64>())
        .sum()
}

/// Exponential (L3-style) smoothing of the fading power `|g|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsrpFilter {
    coeff: f64,
    state: Option<f64>,
}

impl RsrpFilter {
    pub fn new(coeff: f64) -> Self {
        Self { coeff: coeff.clamp(0.0, 1.0), state: None }
    }

    pub fn update(&mut self, fading_power: f64) -> f64 {
        let next = match self.state {
            None => fading_power,
            Some(prev) => (1.0 - self.coeff) * prev + self.coeff * fading_power,
        };
        self.state = Some(next);
        next
    }

    pub fn value(&self) -> Option<f64> {
        self.state
    }
}

/// RSRP in dBm from path loss, smoothed fading power and reference power (W).
pub fn rsrp_dbm(pathloss_linear: f64, smoothed_fading: f64, p_ref_w: f64) -> f64 {
    10.0 * math::log10(pathloss_linear * smoothed_fading * p_ref_w) + 30.0
}

/// Per-user link summary for one tick.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkBudget {
    pub rsrp_dbm: f64,
    pub sinr_db: f64,
    pub intra_interference_w: f64,
    pub inter_interference_w: f64,
    pub noise_w: f64,
}

impl LinkBudget {
    pub fn interference_w(&self) -> f64 {
        self.intra_interference_w + self.inter_interference_w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, Stream};
    use alloc::vec;
    use proptest::prelude::*;

    fn params() -> ChannelParams {
        ChannelParams { ref_gain: 1e-4, ref_distance_m: 10.0, exponent: 3.5, min_distance_m: 1.0 }
    }

    #[test]
    fn reference_distance_gives_reference_gain() {
        assert_eq!(params().pathloss_linear(10.0), 1e-4);
        let d2 = params().pathloss_linear(20.0);
        assert!((d2 - 1e-4 * 2f64.powf(-3.5)).abs() < 1e-18);
    }

    #[test]
    fn zero_distance_clamped() {
        let p = params();
        let mut rng = stream(1, Stream::Fading);
        let c = sample_channel(0.0, &p, &mut rng).unwrap();
        assert_eq!(c.distance_m, 1.0);
        assert_eq!(c.pathloss_linear, p.pathloss_linear(1.0));
        assert!(sample_channel(-1.0, &p, &mut rng).is_err());
        let bad = ChannelParams { exponent: 2.0, ..p };
        assert_eq!(sample_channel(5.0, &bad, &mut rng), Err(PhyError::BadExponent(2.0)));
    }

    #[test]
    fn channel_power_identity_and_unit_fading() {
        let p = params();
        let mut rng = stream(9, Stream::Fading);
        let n = 100_000;
        let mut mean = 0.0;
        for _ in 0..n {
            let c = sample_channel(37.0, &p, &mut rng).unwrap();
            assert!((c.gain().norm_sqr() - c.power_gain()).abs() <= 1e-12 * c.power_gain().max(1e-30));
            mean += c.fading.norm_sqr();
        }
        assert!((mean / n as f64 - 1.0).abs() < 0.02);
    }

    #[test]
    fn sampling_is_deterministic() {
        let p = params();
        let a = sample_channel(50.0, &p, &mut stream(3, Stream::Fading)).unwrap();
        let b = sample_channel(50.0, &p, &mut stream(3, Stream::Fading)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_user_unit_snr() {
        let g = NomaGroup::new(vec![0], vec![1.0], 1.0).unwrap();
        let r = sic_rate(&g, &[1.0], &[1.0], &[0.0], 1.0);
        assert!((r[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_user_hand_evaluation() {
        // Weak user decoded first with 0.8 of the power; |ĥ|²P = 10σ².
        let g = NomaGroup::new(vec![0, 1], vec![0.8, 0.2], 10.0).unwrap();
        let r = sic_rate(&g, &[1.0, 1.0], &[1.0, 1.0], &[0.0, 0.0], 1.0);
        assert!((r[0] - (1.0f64 + 8.0 / 3.0).log2()).abs() < 1e-12);
        assert!((r[0] - 1.874).abs() < 1e-3);
        assert!((r[1] - 3f64.log2()).abs() < 1e-12);
        assert!((r[1] - 1.585).abs() < 1e-3);
    }

    #[test]
    #[should_panic(expected = "invalid power allocation")]
    fn off_simplex_is_a_programming_error() {
        let g = NomaGroup { members: vec![0, 1], alphas: vec![0.7, 0.2], total_power_w: 1.0 };
        sic_rate(&g, &[1.0, 1.0], &[1.0, 1.0], &[0.0, 0.0], 1.0);
    }

    #[test]
    fn empty_group_gives_empty_rates() {
        let g = NomaGroup::empty(1.0);
        assert!(sic_rate(&g, &[], &[], &[], 1.0).is_empty());
    }

    #[test]
    fn group_validation() {
        assert!(NomaGroup::new(vec![0, 1], vec![0.5, 0.6], 1.0).is_err());
        assert_eq!(NomaGroup::new(vec![0, 1], vec![0.3, 0.7], 1.0), Err(PhyError::NotOrdered));
        assert!(matches!(NomaGroup::new(vec![0], vec![0.5, 0.5], 1.0), Err(PhyError::SizeMismatch { .. })));
    }

    #[test]
    fn reorder_weakest_first_ties_by_id() {
        let mut g = NomaGroup::new(vec![4, 2, 9], vec![0.5, 0.3, 0.2], 1.0).unwrap();
        let gains = |u: usize| match u {
            4 => 3.0,
            2 => 1.0,
            _ => 1.0,
        };
        g.reorder(gains);
        assert_eq!(g.members, vec![2, 9, 4]);
    }

    #[test]
    fn renormalize_restores_simplex() {
        let mut g = NomaGroup { members: vec![1, 2, 3], alphas: vec![0.2, 0.5, 0.1], total_power_w: 1.0 };
        g.renormalize();
        g.validate().unwrap();
        assert!((g.alphas[0] - 0.625).abs() < 1e-12);
    }

    #[test]
    fn power_profiles_are_ordered_simplex_points() {
        for n in 1..=8 {
            for p in 0..5 {
                let a = power_profile(n, p, 5);
                let g = NomaGroup::new((0..n).collect(), a.clone(), 1.0).unwrap();
                g.validate().unwrap();
            }
            assert!(power_profile(n, 0, 5).iter().all(|&a| (a - 1.0 / n as f64).abs() < 1e-12));
        }
        assert_eq!(power_profile(4, 0, 1), vec![0.25; 4]);
        assert!(power_profile(0, 0, 5).is_empty());
        let strong = power_profile(4, 4, 5);
        assert!(strong[0] > 0.5);
    }

    #[test]
    fn interference_single_interferer() {
        let users = [(1.0, 3usize)];
        let cells = [InterferingCell { rx_power_w: 2e-9, users: &users }];
        let i = effective_interference(0, cells, |_, _| 0.01);
        assert!((i - 0.01 * 2e-9).abs() < 1e-24);
        assert_eq!(effective_interference(0, [], |_, _| 1.0), 0.0);
    }

    #[test]
    fn interference_identical_code_worst_case() {
        let users = [(0.6, 0usize), (0.4, 1)];
        let cells = [InterferingCell { rx_power_w: 1.0, users: &users }];
        let rho2 = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        assert!((effective_interference(0, cells, rho2) - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rsrp_units() {
        assert!(rsrp_dbm(1e-3, 1.0, 1.0).abs() < 1e-12);
        let a = rsrp_dbm(1e-9, 1.0, 40.0);
        let b = rsrp_dbm(1e-9, 0.5, 40.0);
        assert!((a - b - 3.0103).abs() < 1e-4);
    }

    #[test]
    fn rsrp_filter_degenerate_and_smoothing() {
        let mut f = RsrpFilter::new(1.0);
        f.update(0.3);
        assert_eq!(f.update(2.0), 2.0);
        let mut f = RsrpFilter::new(0.5);
        assert_eq!(f.update(1.0), 1.0);
        assert_eq!(f.update(3.0), 2.0);
        assert_eq!(f.value(), Some(2.0));
    }

    fn random_group(n: usize, seed: u64) -> (NomaGroup, Vec<f64>) {
        let mut raw: Vec<f64> = (0..n).map(|i| 0.05 + (crate::rng::mix(seed, i as u64) % 1000) as f64 / 1000.0).collect();
        let s: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|a| *a /= s);
        raw.sort_by(|a, b| b.total_cmp(a));
        let gains: Vec<f64> = (0..n).map(|i| 0.1 + (crate::rng::mix(seed ^ 77, i as u64) % 997) as f64 / 100.0).collect();
        (NomaGroup { members: (0..n).collect(), alphas: raw, total_power_w: 5.0 }, gains)
    }

    /// Independent evaluator without SIC: every other user's signal counts.
    fn no_sic_rate(g: &NomaGroup, gains: &[f64], inter: &[f64], noise: f64) -> Vec<f64> {
        (0..g.len())
            .map(|k| {
                let s = gains[k] * g.alphas[k] * g.total_power_w;
                let other: f64 = (0..g.len()).filter(|&j| j != k).map(|j| gains[k] * g.alphas[j] * g.total_power_w).sum();
                (1.0 + s / (other + inter[k] + noise)).log2()
            })
            .collect()
    }

    proptest! {
        #[test]
        fn rates_finite_nonnegative(n in 1usize..8, seed in any::<u64>(), inter in 0.0f64..10.0) {
            let (g, gains) = random_group(n, seed);
            let r = sic_rate(&g, &gains, &vec![1.0; n], &vec![inter; n], 0.1);
            prop_assert!(r.iter().all(|x| x.is_finite() && *x >= 0.0));
        }

        #[test]
        fn more_interference_lowers_rate(n in 1usize..8, seed in any::<u64>(), inter in 0.0f64..10.0, extra in 0.01f64..5.0) {
            let (g, gains) = random_group(n, seed);
            let lo = sic_rate(&g, &gains, &vec![1.0; n], &vec![inter; n], 0.1);
            let hi = sic_rate(&g, &gains, &vec![1.0; n], &vec![inter + extra; n], 0.1);
            for (a, b) in lo.iter().zip(&hi) {
                prop_assert!(b < a);
            }
        }

        #[test]
        fn first_decoded_rate_drops_as_later_shares_grow(n in 2usize..8, seed in any::<u64>(), k in 1usize..8, frac in 0.0f64..1.0) {
            let k = 1 + k % (n - 1);
            let (g, gains) = random_group(n, seed);
            let base = sic_rate(&g, &gains, &vec![1.0; n], &vec![0.0; n], 0.1)[0];
            // Shift mass from the first-decoded user to a later one.
            let mut moved = g.clone();
            let d = moved.alphas[0] * frac;
            moved.alphas[0] -= d;
            moved.alphas[k] += d;
            let after = sic_rate(&moved, &gains, &vec![1.0; n], &vec![0.0; n], 0.1)[0];
            prop_assert!(after <= base + 1e-12);
        }

        #[test]
        fn removing_sic_never_helps(n in 1usize..8, seed in any::<u64>(), inter in 0.0f64..3.0) {
            let (g, gains) = random_group(n, seed);
            let with = sic_rate(&g, &gains, &vec![1.0; n], &vec![inter; n], 0.1);
            let without = no_sic_rate(&g, &gains, &vec![inter; n], 0.1);
            for (a, b) in with.iter().zip(&without) {
                prop_assert!(b <= &(a + 1e-12));
            }
        }
    }
}
