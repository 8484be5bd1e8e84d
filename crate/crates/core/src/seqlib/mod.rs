//! Spreading-code library: m-sequences, Gold, Walsh-Hadamard, small Kasami and
//! hybrid Gold⊙Walsh codes, plus periodic correlation and PAPR measurement.

use alloc::vec::Vec;
use core::fmt;

mod correlation;
mod generate;
mod text;

pub use correlation::{
    correlation_product_report, measure_papr, papr_report, periodic_correlation,
    periodic_correlation_direct, CorrelationProfile, CrossTable, PaprReport, ProductClaimReport,
    ProductLag, OVERSAMPLING,
};
pub use generate::{
    extend_periodic, generate_gold_family, generate_kasami_small, generate_msequence,
    generate_walsh_family, gold_preferred_pair, make_hybrid, LfsrSpec,
};
pub use text::{parse_codebook, write_codebook};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeqError {
    #[error("LFSR seed must be nonzero and fit in {degree} bits")]
    BadSeed { degree: u32 },
    #[error("LFSR degree {0} outside [3, 10]")]
    DegreeOutOfRange(u32),
    #[error("invalid tap set for degree {degree}")]
    InvalidTaps { degree: u32 },
    #[error("feedback polynomial of degree {degree} is not primitive (period {period})")]
    NotPrimitive { degree: u32, period: usize },
    #[error("no {family} construction for degree {m}")]
    UnsupportedDegree { family: Family, m: u32 },
    #[error("order {0} is not a power of two in [4, 256]")]
    BadWalshOrder(usize),
    #[error("sequence lengths {left} and {right} cannot be reconciled")]
    LengthMismatch { left: usize, right: usize },
    #[error("chip value {0} is not +1 or -1")]
    InvalidChip(i32),
    #[error("empty sequence")]
    Empty,
    #[error("codebook line {line}: {reason}")]
    Parse { line: usize, reason: &'static str },
}

/// Code family a sequence was generated from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    MSeq,
    Gold,
    Walsh,
    Kasami,
    Hybrid,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::MSeq => "mseq",
            Family::Gold => "gold",
            Family::Walsh => "walsh",
            Family::Kasami => "kasami",
            Family::Hybrid => "hybrid",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        Some(match s {
            "mseq" => Family::MSeq,
            "gold" => Family::Gold,
            "walsh" => Family::Walsh,
            "kasami" => Family::Kasami,
            "hybrid" => Family::Hybrid,
            _ => return None,
        })
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A ±1 spreading code.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChipSequence {
    chips: Vec<i8>,
    family: Family,
    index: usize,
}

impl ChipSequence {
    pub fn new(chips: Vec<i8>, family: Family, index: usize) -> Result<Self, SeqError> {
        if chips.is_empty() {
            return Err(SeqError::Empty);
        }
        if let Some(&bad) = chips.iter().find(|&&c| c != 1 && c != -1) {
            return Err(SeqError::InvalidChip(bad as i32));
        }
        Ok(Self { chips, family, index })
    }

    /// Map LFSR output bits onto chips: 0 → +1, 1 → −1.
    pub fn from_bits(bits: &[u8], family: Family, index: usize) -> Result<Self, SeqError> {
        let chips = bits.iter().map(|&b| if b == 0 { 1 } else { -1 }).collect();
        Self::new(chips, family, index)
    }

    pub fn chips(&self) -> &[i8] {
        &self.chips
    }

    pub fn len(&self) -> usize {
        self.chips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chips.is_empty()
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Sequence advanced by `k` chips: `out[n] = self[(n + k) mod N]`.
    pub fn shifted(&self, k: usize) -> Self {
        let n = self.len();
        let chips = (0..n).map(|i| self.chips[(i + k) % n]).collect();
        Self { chips, family: self.family, index: self.index }
    }

    /// Chip-wise product with a sequence of the same length.
    pub fn product(&self, other: &Self, family: Family, index: usize) -> Result<Self, SeqError> {
        if self.len() != other.len() {
            return Err(SeqError::LengthMismatch { left: self.len(), right: other.len() });
        }
        let chips = self.chips.iter().zip(&other.chips).map(|(a, b)| a * b).collect();
        Ok(Self { chips, family, index })
    }

    pub fn dot(&self, other: &Self) -> Result<i64, SeqError> {
        if self.len() != other.len() {
            return Err(SeqError::LengthMismatch { left: self.len(), right: other.len() });
        }
        Ok(self.chips.iter().zip(&other.chips).map(|(&a, &b)| (a * b) as i64).sum())
    }

    /// Count of +1 chips minus count of −1 chips.
    pub fn balance(&self) -> i64 {
        self.chips.iter().map(|&c| c as i64).sum()
    }

    pub(crate) fn with_identity(mut self, family: Family, index: usize) -> Self {
        self.family = family;
        self.index = index;
        self
    }
}
