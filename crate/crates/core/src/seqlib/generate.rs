use alloc::vec::Vec;

use super::{ChipSequence, Family, SeqError};

/// Fibonacci LFSR definition. `taps` are the exponents of the feedback
/// polynomial (the degree itself included), so `{5, 2}` is `x^5 + x^2 + 1`
/// and drives the recurrence `a[n+5] = a[n+3] ^ a[n]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LfsrSpec {
    pub degree: u32,
    pub taps: Vec<u32>,
    pub seed: u32,
}

impl LfsrSpec {
    pub fn new(degree: u32, taps: &[u32], seed: u32) -> Self {
        Self { degree, taps: taps.to_vec(), seed }
    }

    fn validate(&self) -> Result<(), SeqError> {
        let m = self.degree;
        if !(3..=10).contains(&m) {
            return Err(SeqError::DegreeOutOfRange(m));
        }
        if self.seed == 0 || self.seed >> m != 0 {
            return Err(SeqError::BadSeed { degree: m });
        }
        let mut seen = 0u32;
        for &t in &self.taps {
            if t == 0 || t > m || seen & (1 << t) != 0 {
                return Err(SeqError::InvalidTaps { degree: m });
            }
            seen |= 1 << t;
        }
        if seen & (1 << m) == 0 {
            return Err(SeqError::InvalidTaps { degree: m });
        }
        Ok(())
    }
}

/// Runs the register until its state recurs; returns the output bits of one
/// period.
fn lfsr_cycle(spec: &LfsrSpec) -> Vec<u8> {
    let m = spec.degree;
    let mut reg = spec.seed;
    let mut bits = Vec::new();
    loop {
        bits.push((reg & 1) as u8);
        let fb = spec.taps.iter().fold(0u32, |acc, &t| acc ^ ((reg >> (m - t)) & 1));
        reg = (reg >> 1) | (fb << (m - 1));
        if reg == spec.seed || bits.len() > 1 << m {
            return bits;
        }
    }
}

/// One period of the maximal-length sequence produced by `spec`.
pub fn generate_msequence(spec: &LfsrSpec) -> Result<ChipSequence, SeqError> {
    spec.validate()?;
    let bits = lfsr_cycle(spec);
    let full = (1usize << spec.degree) - 1;
    if bits.len() != full {
        return Err(SeqError::NotPrimitive { degree: spec.degree, period: bits.len() });
    }
    ChipSequence::from_bits(&bits, Family::MSeq, 0)
}

/// Built-in preferred pairs of primitive polynomials.
pub fn gold_preferred_pair(m: u32) -> Option<(&'static [u32], &'static [u32])> {
    match m {
        5 => Some((&[5, 2], &[5, 4, 3, 2])),
        6 => Some((&[6, 1], &[6, 5, 2, 1])),
        7 => Some((&[7, 3], &[7, 3, 2, 1])),
        _ => None,
    }
}

fn kasami_polynomial(m: u32) -> Option<&'static [u32]> {
    match m {
        6 => Some(&[6, 1]),
        8 => Some(&[8, 6, 5, 4]),
        _ => None,
    }
}

/// Gold family of degree `m`: index 0 and 1 are the preferred m-sequences
/// `u`, `v`; index `2 + k` is `u ⊙ v` advanced by `k` chips.
pub fn generate_gold_family(m: u32) -> Result<Vec<ChipSequence>, SeqError> {
    let (pu, pv) = gold_preferred_pair(m).ok_or(SeqError::UnsupportedDegree { family: Family::Gold, m })?;
    let u = generate_msequence(&LfsrSpec::new(m, pu, 1))?;
    let v = generate_msequence(&LfsrSpec::new(m, pv, 1))?;
    let n = u.len();
    let mut family = Vec::with_capacity(n + 2);
    family.push(u.clone().with_identity(Family::Gold, 0));
    family.push(v.clone().with_identity(Family::Gold, 1));
    for k in 0..n {
        family.push(u.product(&v.shifted(k), Family::Gold, 2 + k)?);
    }
    Ok(family)
}

/// Rows of the Sylvester Hadamard matrix of the given order; row `i` has
/// chip `(−1)^popcount(i & j)` at position `j`.
pub fn generate_walsh_family(order: usize) -> Result<Vec<ChipSequence>, SeqError> {
    if !order.is_power_of_two() || !(4..=256).contains(&order) {
        return Err(SeqError::BadWalshOrder(order));
    }
    (0..order)
        .map(|i| {
            let chips = (0..order)
                .map(|j| if (i & j).count_ones() % 2 == 0 { 1 } else { -1 })
                .collect();
            ChipSequence::new(chips, Family::Walsh, i)
        })
        .collect()
}

/// Small Kasami set for even `m`: the m-sequence `u` plus `u ⊙ w` for every
/// shift of the decimated sequence `w[n] = u[q·n]`, `q = 2^(m/2) + 1`.
pub fn generate_kasami_small(m: u32) -> Result<Vec<ChipSequence>, SeqError> {
    let poly = kasami_polynomial(m).ok_or(SeqError::UnsupportedDegree { family: Family::Kasami, m })?;
    let u = generate_msequence(&LfsrSpec::new(m, poly, 1))?;
    let n = u.len();
    let q = (1usize << (m / 2)) + 1;
    let w_chips = (0..n).map(|i| u.chips()[(q * i) % n]).collect();
    let w = ChipSequence::new(w_chips, Family::Kasami, 0)?;
    let shifts = (1usize << (m / 2)) - 1;
    let mut family = Vec::with_capacity(shifts + 1);
    family.push(u.clone().with_identity(Family::Kasami, 0));
    for k in 0..shifts {
        family.push(u.product(&w.shifted(k), Family::Kasami, 1 + k)?);
    }
    Ok(family)
}

/// Extends a sequence to `len` chips by periodic continuation.
pub fn extend_periodic(seq: &ChipSequence, len: usize) -> ChipSequence {
    let n = seq.len();
    let chips = (0..len).map(|i| seq.chips()[i % n]).collect();
    ChipSequence { chips, family: seq.family(), index: seq.index() }
}

/// `H[n] = G[n]·W[n]`. A Gold code one chip shorter than a power-of-two
/// Walsh row is first extended with its own chip 0.
pub fn make_hybrid(g: &ChipSequence, w: &ChipSequence) -> Result<ChipSequence, SeqError> {
    let g_ext;
    let g = if g.len() == w.len() {
        g
    } else if g.len() + 1 == w.len() && w.len().is_power_of_two() {
        g_ext = extend_periodic(g, w.len());
        &g_ext
    } else {
        return Err(SeqError::LengthMismatch { left: g.len(), right: w.len() });
    };
    g.product(w, Family::Hybrid, g.index() * w.len() + w.index())
}
