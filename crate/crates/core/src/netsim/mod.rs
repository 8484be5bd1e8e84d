//! Multi-cell network model: hexagonal layout, mobility, NOMA groups, code
//! assignment and the A3 handover state machine.

mod codeplan;
mod grid;
mod handover;
mod mobility;
mod network;

pub use codeplan::{AttachRule, CodePlan, CodebookKind};
pub use grid::{build_grid, Cell, CellGrid, Point, Rect};
pub use handover::{
    a3_condition, execute_handover, A3Tracker, ExecutionVerdict, FailureModel, HandoverCounts, HandoverExecution,
    HandoverLedger, HandoverOutcome, HandoverRecord, PendingSuccess,
};
pub use mobility::{step_mobility, UserMotion};
pub use network::{rebalance_group, Network, TickEvents, UserState};

use crate::config::ConfigError;
use crate::phy::PhyError;
use crate::seqlib::SeqError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetError {
    #[error("ring count {0} not supported (1 or 2)")]
    BadRings(u32),
    #[error("handover target {0} equals the serving cell")]
    SameCell(usize),
    #[error("cell {0} is full")]
    AdmissionBlocked(usize),
    #[error("unknown user {0}")]
    UnknownUser(usize),
    #[error("unknown cell {0}")]
    UnknownCell(usize),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Phy(#[from] PhyError),
    #[error(transparent)]
    Seq(#[from] SeqError),
}
