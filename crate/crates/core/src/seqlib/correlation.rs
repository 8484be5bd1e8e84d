use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::{ChipSequence, SeqError};
use crate::fft::fft_in_place;
use crate::math;

/// Oversampling factor applied when measuring PAPR.
pub const OVERSAMPLING: usize = 4;

/// Periodic correlation `values[τ] = Σ_n a[n]·b[(n+τ) mod N]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrelationProfile {
    pub values: Vec<i64>,
    /// Largest `|values[τ]|` over `τ ≠ 0`.
    pub peak_offzero: i64,
    pub is_auto: bool,
}

impl CorrelationProfile {
    fn from_values(values: Vec<i64>, is_auto: bool) -> Self {
        let peak_offzero = values.iter().skip(1).map(|v| v.abs()).max().unwrap_or(0);
        Self { values, peak_offzero, is_auto }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(peak_offzero / N)²`.
    pub fn normalized_peak_sq(&self) -> f64 {
        let r = self.peak_offzero as f64 / self.values.len() as f64;
        r * r
    }
}

fn check_lengths(a: &ChipSequence, b: &ChipSequence) -> Result<(), SeqError> {
    if a.len() != b.len() {
        return Err(SeqError::LengthMismatch { left: a.len(), right: b.len() });
    }
    Ok(())
}

/// O(N²) reference implementation.
pub fn periodic_correlation_direct(a: &ChipSequence, b: &ChipSequence) -> Result<CorrelationProfile, SeqError> {
    check_lengths(a, b)?;
    let n = a.len();
    let (ac, bc) = (a.chips(), b.chips());
    let values = (0..n)
        .map(|tau| (0..n).map(|i| (ac[i] * bc[(i + tau) % n]) as i64).sum())
        .collect();
    Ok(CorrelationProfile::from_values(values, ac == bc))
}

/// O(N log N) path: linear cross-correlation through a zero-padded
/// power-of-two FFT, folded back onto the period.
pub fn periodic_correlation(a: &ChipSequence, b: &ChipSequence) -> Result<CorrelationProfile, SeqError> {
    check_lengths(a, b)?;
    let n = a.len();
    let l = (2 * n).next_power_of_two();
    let load = |s: &ChipSequence| {
        let mut buf = vec![Complex64::new(0.0, 0.0); l];
        for (slot, &c) in buf.iter_mut().zip(s.chips()) {
            *slot = Complex64::new(c as f64, 0.0);
        }
        fft_in_place(&mut buf, false);
        buf
    };
    let fa = load(a);
    let mut prod = load(b);
    for (p, x) in prod.iter_mut().zip(&fa) {
        *p *= x.conj();
    }
    fft_in_place(&mut prod, true);
    // prod[k]/l = Σ_i a[i]·b[i+k] for lags k in (−N, N), negative lags wrapped to the top.
    let tol = 1e-6 * n as f64;
    let values = (0..n)
        .map(|tau| {
            let pos = prod[tau].re / l as f64;
            let neg = if tau == 0 { 0.0 } else { prod[l - (n - tau)].re / l as f64 };
            let x = pos + neg;
            let r = math::round(x);
            assert!(math::abs(x - r) < tol, "transform correlation residual {} exceeds {}", x - r, tol);
            r as i64
        })
        .collect();
    Ok(CorrelationProfile::from_values(values, a.chips() == b.chips()))
}

/// Pairwise `ρ²` tables over a codebook.
///
/// The asynchronous table holds `(peak off-zero cross-correlation / N)²` for
/// distinct codes and 1 for a code against itself (or an identical copy). The
/// synchronous table holds the zero-lag value `(R(0) / N)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossTable {
    n: usize,
    rho2: Vec<f64>,
    sync: Vec<f64>,
}

impl CrossTable {
    pub fn build(codes: &[ChipSequence]) -> Result<Self, SeqError> {
        let n = codes.len();
        let mut rho2 = vec![1.0; n * n];
        let mut sync = vec![1.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let (v, z) = if codes[i].chips() == codes[j].chips() {
                    (1.0, 1.0)
                } else {
                    let p = periodic_correlation(&codes[i], &codes[j])?;
                    let r0 = p.values[0] as f64 / p.len() as f64;
                    (p.normalized_peak_sq(), r0 * r0)
                };
                rho2[i * n + j] = v;
                rho2[j * n + i] = v;
                sync[i * n + j] = z;
                sync[j * n + i] = z;
            }
        }
        Ok(Self { n, rho2, sync })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn rho2(&self, a: usize, b: usize) -> f64 {
        self.rho2[a * self.n + b]
    }

    #[inline]
    pub fn sync_rho2(&self, a: usize, b: usize) -> f64 {
        self.sync[a * self.n + b]
    }

    #[inline]
    pub fn rho(&self, a: usize, b: usize) -> f64 {
        math::sqrt(self.rho2(a, b))
    }
}

/// Peak-to-average power ratio (linear) after OFDM-style mapping: chips are
/// placed on consecutive subcarriers (zero-padded to a power of two),
/// oversampled by [`OVERSAMPLING`] and inverse transformed.
pub fn measure_papr(seq: &ChipSequence) -> f64 {
    let carriers = seq.len().next_power_of_two();
    let l = carriers * OVERSAMPLING;
    let mut buf = vec![Complex64::new(0.0, 0.0); l];
    for (slot, &c) in buf.iter_mut().zip(seq.chips()) {
        *slot = Complex64::new(c as f64, 0.0);
    }
    fft_in_place(&mut buf, true);
    let powers = buf.iter().map(|x| x.norm_sqr());
    let (peak, total) = powers.fold((0.0f64, 0.0), |(p, t), x| (p.max(x), t + x));
    peak / (total / l as f64)
}

/// One lag of the correlation-product comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductLag {
    pub lag: usize,
    /// `R_H(τ)/N`.
    pub hybrid: f64,
    /// `(R_G(τ)/N)·(R_W(τ)/N)`.
    pub product: f64,
}

/// Per-lag comparison of the hybrid cross-correlation against the product of
/// the parents' cross-correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductClaimReport {
    pub lags: Vec<ProductLag>,
    pub max_abs_gap: f64,
    pub lags_equal: usize,
    pub hybrid_peak_offzero: i64,
    pub gold_peak_offzero: i64,
    pub walsh_peak_offzero: i64,
}

/// Builds `H_i = G_i ⊙ W_i` and `H_j = G_j ⊙ W_j` and logs both sides of the
/// product relation at every lag. Gold codes are extended to the Walsh length
/// when needed.
pub fn correlation_product_report(
    gi: &ChipSequence,
    gj: &ChipSequence,
    wi: &ChipSequence,
    wj: &ChipSequence,
) -> Result<ProductClaimReport, SeqError> {
    let hi = super::make_hybrid(gi, wi)?;
    let hj = super::make_hybrid(gj, wj)?;
    let n = hi.len();
    let gi = super::extend_periodic(gi, n);
    let gj = super::extend_periodic(gj, n);
    let rh = periodic_correlation(&hi, &hj)?;
    let rg = periodic_correlation(&gi, &gj)?;
    let rw = periodic_correlation(wi, wj)?;
    let nf = n as f64;
    let lags: Vec<ProductLag> = (0..n)
        .map(|lag| ProductLag {
            lag,
            hybrid: rh.values[lag] as f64 / nf,
            product: (rg.values[lag] as f64 / nf) * (rw.values[lag] as f64 / nf),
        })
        .collect();
    let max_abs_gap = lags.iter().map(|l| math::abs(l.hybrid - l.product)).fold(0.0, f64::max);
    let lags_equal = lags.iter().filter(|l| math::abs(l.hybrid - l.product) < 1e-12).count();
    Ok(ProductClaimReport {
        lags,
        max_abs_gap,
        lags_equal,
        hybrid_peak_offzero: rh.peak_offzero,
        gold_peak_offzero: rg.peak_offzero,
        walsh_peak_offzero: rw.peak_offzero,
    })
}

/// PAPR of a hybrid code next to its parents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PaprReport {
    pub gold: f64,
    pub walsh: f64,
    pub hybrid: f64,
}

impl PaprReport {
    /// Whether `PAPR_hybrid ≤ min(PAPR_gold, PAPR_walsh)` held for this pair.
    pub fn hybrid_not_above_min(&self) -> bool {
        self.hybrid <= self.gold.min(self.walsh)
    }
}

pub fn papr_report(g: &ChipSequence, w: &ChipSequence) -> Result<PaprReport, SeqError> {
    let h = super::make_hybrid(g, w)?;
    let g = super::extend_periodic(g, h.len());
    Ok(PaprReport { gold: measure_papr(&g), walsh: measure_papr(w), hybrid: measure_papr(&h) })
}
