use alloc::vec::Vec;

use super::NetError;
use crate::seqlib::{
    extend_periodic, generate_gold_family, generate_kasami_small, generate_walsh_family, make_hybrid, ChipSequence,
    CrossTable, Family,
};

/// Which codebook a scenario draws spreading codes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CodebookKind {
    Gold,
    Walsh,
    Kasami,
    /// Cell `c` scrambles Walsh rows with its own extended Gold code.
    Hybrid,
    /// Walsh rows only, identical in every cell.
    HybridNoGold,
    /// Extended Gold codes only, a disjoint subset per cell.
    HybridNoWalsh,
}

impl CodebookKind {
    pub fn name(self) -> &'static str {
        match self {
            CodebookKind::Gold => "gold",
            CodebookKind::Walsh => "walsh",
            CodebookKind::Kasami => "kasami",
            CodebookKind::Hybrid => "hybrid",
            CodebookKind::HybridNoGold => "hybrid-no-gold",
            CodebookKind::HybridNoWalsh => "hybrid-no-walsh",
        }
    }
}

/// How a code slot is picked when a user attaches to a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttachRule {
    /// Per-cell counter modulo the number of slots.
    RoundRobin,
    /// Slot minimising the largest `ρ²` against codes already in the cell;
    /// ties go to the lowest slot.
    LeastCorrelation,
}

/// Codebook plus the per-cell code options (slots) and correlation tables.
#[derive(Debug, Clone, PartialEq)]
pub struct CodePlan {
    pub kind: CodebookKind,
    pub rule: AttachRule,
    pub codes: Vec<ChipSequence>,
    /// `options[cell][slot]` is an index into `codes`.
    pub options: Vec<Vec<usize>>,
    pub table: CrossTable,
}

impl CodePlan {
    pub fn build(
        kind: CodebookKind,
        rule: AttachRule,
        cells: usize,
        slots: usize,
        gold_degree: u32,
        kasami_degree: u32,
    ) -> Result<Self, NetError> {
        let slots = slots.max(1);
        let round_robin = |codes: Vec<ChipSequence>| {
            let n = codes.len();
            let options = (0..cells).map(|c| (0..slots).map(|s| (c * slots + s) % n).collect()).collect();
            (codes, options)
        };
        let extended_gold = || -> Result<Vec<ChipSequence>, NetError> {
            let gold = generate_gold_family(gold_degree)?;
            let len = gold[0].len() + 1;
            Ok(gold.iter().map(|g| extend_periodic(g, len)).collect())
        };
        let (codes, options) = match kind {
            CodebookKind::Gold => round_robin(generate_gold_family(gold_degree)?),
            CodebookKind::Walsh => round_robin(generate_walsh_family(1 << gold_degree)?),
            CodebookKind::Kasami => round_robin(generate_kasami_small(kasami_degree)?),
            CodebookKind::HybridNoWalsh => round_robin(extended_gold()?),
            CodebookKind::HybridNoGold => {
                let walsh = generate_walsh_family(1 << gold_degree)?;
                let n = walsh.len();
                let options = (0..cells).map(|_| (0..slots).map(|s| s % n).collect()).collect();
                (walsh, options)
            }
            CodebookKind::Hybrid => {
                let gold = extended_gold()?;
                let walsh = generate_walsh_family(gold[0].len())?;
                let mut codes = Vec::with_capacity(cells * slots);
                let mut options = Vec::with_capacity(cells);
                for c in 0..cells {
                    let g = &gold[c % gold.len()];
                    let mut row = Vec::with_capacity(slots);
                    for s in 0..slots {
                        let mut h = make_hybrid(g, &walsh[s % walsh.len()])?;
                        debug_assert_eq!(h.family(), Family::Hybrid);
                        h = ChipSequence::new(h.chips().to_vec(), Family::Hybrid, codes.len())?;
                        row.push(codes.len());
                        codes.push(h);
                    }
                    options.push(row);
                }
                (codes, options)
            }
        };
        let table = CrossTable::build(&codes)?;
        Ok(Self { kind, rule, codes, options, table })
    }

    pub fn slots(&self) -> usize {
        self.options.first().map_or(0, Vec::len)
    }

    pub fn code(&self, cell: usize, slot: usize) -> usize {
        let row = &self.options[cell];
        row[slot % row.len()]
    }

    /// Asynchronous (inter-cell) coupling between two codes.
    pub fn rho2(&self, a: usize, b: usize) -> f64 {
        self.table.rho2(a, b)
    }

    /// Synchronous (intra-cell) coupling between two codes.
    pub fn sync_rho2(&self, a: usize, b: usize) -> f64 {
        self.table.sync_rho2(a, b)
    }

    /// Picks a slot in `cell` for a new member given the codes already there.
    pub fn attach(&self, cell: usize, counter: &mut usize, present: &[usize]) -> usize {
        match self.rule {
            AttachRule::RoundRobin => {
                let s = *counter % self.slots();
                *counter += 1;
                s
            }
            AttachRule::LeastCorrelation => {
                let worst = |s: usize| {
                    let code = self.code(cell, s);
                    present.iter().map(|&p| self.rho2(code, p)).fold(0.0, f64::max)
                };
                (0..self.slots()).fold((0, f64::INFINITY), |best, s| {
                    let w = worst(s);
                    if w < best.1 { (s, w) } else { best }
                })
                .0
            }
        }
    }
}
