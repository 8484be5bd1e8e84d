use alloc::vec::Vec;

use super::NetError;

/// Handover failure model constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureModel {
    pub rlf_sinr_db: f64,
    pub exec_ticks: u32,
    pub pingpong_ticks: u32,
}

impl Default for FailureModel {
    fn default() -> Self {
        Self { rlf_sinr_db: -8.0, exec_ticks: 2, pingpong_ticks: 50 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HandoverOutcome {
    Success,
    FailureRlf,
    FailurePingPong,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoverRecord {
    /// Tick at which the attempt started.
    pub tick: u64,
    pub user: usize,
    pub source: usize,
    pub target: usize,
    pub outcome: HandoverOutcome,
    pub margin_db: f64,
}

/// A3 entering condition `RSRP_target > RSRP_serving + margin`.
pub fn a3_condition(rsrp_target_dbm: f64, rsrp_serving_dbm: f64, margin_db: f64) -> bool {
    rsrp_target_dbm > rsrp_serving_dbm + margin_db
}

/// Time-to-trigger bookkeeping for one user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct A3Tracker {
    candidate: Option<usize>,
    held: u32,
}

impl A3Tracker {
    /// Feeds one tick of RSRP (dBm per cell). Returns the target once the
    /// strongest neighbour has satisfied the A3 condition for `ttt` consecutive
    /// ticks; the timer restarts whenever the condition breaks or the strongest
    /// neighbour changes.
    pub fn update(&mut self, rsrp_dbm: &[f64], serving: usize, margin_db: f64, ttt: u32) -> Option<usize> {
        let best = rsrp_dbm
            .iter()
            .enumerate()
            .filter(|&(c, _)| c != serving)
            .fold(None::<(usize, f64)>, |acc, (c, &r)| match acc {
                Some((_, br)) if br >= r => acc,
                _ => Some((c, r)),
            });
        let Some((cand, r)) = best else {
            self.reset();
            return None;
        };
        if !a3_condition(r, rsrp_dbm[serving], margin_db) {
            self.reset();
            return None;
        }
        if self.candidate != Some(cand) {
            self.candidate = Some(cand);
            self.held = 0;
        }
        self.held += 1;
        if self.held >= ttt.max(1) {
            self.reset();
            Some(cand)
        } else {
            None
        }
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn held(&self) -> u32 {
        self.held
    }
}

/// An in-flight handover, judged over the execution window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoverExecution {
    pub tick: u64,
    pub user: usize,
    pub source: usize,
    pub target: usize,
    pub margin_db: f64,
    observed: u32,
    below: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExecutionVerdict {
    /// Radio link failure: the SINR never rose above the threshold.
    Rlf(HandoverRecord),
    /// Execution completed; the outcome stays open for the ping-pong window.
    Completed(PendingSuccess),
}

pub fn execute_handover(
    tick: u64,
    user: usize,
    source: usize,
    target: usize,
    margin_db: f64,
) -> Result<HandoverExecution, NetError> {
    if source == target {
        return Err(NetError::SameCell(target));
    }
    Ok(HandoverExecution { tick, user, source, target, margin_db, observed: 0, below: 0 })
}

impl HandoverExecution {
    /// Records one tick of post-handover SINR; returns the verdict once the
    /// window is complete.
    pub fn observe(&mut self, sinr_db: f64, model: &FailureModel) -> Option<ExecutionVerdict> {
        self.observed += 1;
        if !(sinr_db >= model.rlf_sinr_db) {
            self.below += 1;
        }
        if self.observed < model.exec_ticks.max(1) {
            return None;
        }
        Some(if self.below == self.observed {
            ExecutionVerdict::Rlf(self.record(HandoverOutcome::FailureRlf))
        } else {
            ExecutionVerdict::Completed(PendingSuccess { exec: *self, completed_tick: self.tick + self.observed as u64 - 1 })
        })
    }

    /// Verdict for a window cut short by the end of the horizon.
    pub fn truncate(&self) -> HandoverRecord {
        let failed = self.observed > 0 && self.below == self.observed;
        self.record(if failed { HandoverOutcome::FailureRlf } else { HandoverOutcome::Success })
    }

    /// Admission was refused at the target.
    pub fn blocked(&self) -> HandoverRecord {
        self.record(HandoverOutcome::FailureRlf)
    }

    fn record(&self, outcome: HandoverOutcome) -> HandoverRecord {
        HandoverRecord {
            tick: self.tick,
            user: self.user,
            source: self.source,
            target: self.target,
            outcome,
            margin_db: self.margin_db,
        }
    }
}

/// A completed handover still inside its ping-pong window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendingSuccess {
    pub exec: HandoverExecution,
    pub completed_tick: u64,
}

impl PendingSuccess {
    /// Called when the user starts a new handover toward `target` at `tick`.
    pub fn on_next_handover(&self, tick: u64, target: usize, model: &FailureModel) -> HandoverRecord {
        let back = target == self.exec.source && tick.saturating_sub(self.completed_tick) <= model.pingpong_ticks as u64;
        self.exec.record(if back { HandoverOutcome::FailurePingPong } else { HandoverOutcome::Success })
    }

    /// Resolves to success once the window has elapsed.
    pub fn expire(&self, tick: u64, model: &FailureModel) -> Option<HandoverRecord> {
        (tick.saturating_sub(self.completed_tick) > model.pingpong_ticks as u64)
            .then(|| self.exec.record(HandoverOutcome::Success))
    }

    /// End of horizon: no return observed, so the handover stands.
    pub fn finish(&self) -> HandoverRecord {
        self.exec.record(HandoverOutcome::Success)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct HandoverCounts {
    pub attempts: u64,
    pub success: u64,
    pub rlf: u64,
    pub pingpong: u64,
}

impl HandoverCounts {
    pub fn add(&mut self, other: &HandoverCounts) {
        self.attempts += other.attempts;
        self.success += other.success;
        self.rlf += other.rlf;
        self.pingpong += other.pingpong;
    }

    /// Attempts whose outcome is settled.
    pub fn resolved(&self) -> u64 {
        self.success + self.rlf + self.pingpong
    }

    /// Success percentage, `None` without resolved attempts.
    pub fn hsr(&self) -> Option<f64> {
        let n = self.resolved();
        (n > 0).then(|| 100.0 * self.success as f64 / n as f64)
    }

    pub fn failures(&self) -> u64 {
        self.rlf + self.pingpong
    }
}

/// Every attempt and its final outcome.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HandoverLedger {
    pub records: Vec<HandoverRecord>,
    pub counts: HandoverCounts,
}

impl HandoverLedger {
    pub fn open(&mut self) {
        self.counts.attempts += 1;
    }

    pub fn close(&mut self, rec: HandoverRecord) {
        match rec.outcome {
            HandoverOutcome::Success => self.counts.success += 1,
            HandoverOutcome::FailureRlf => self.counts.rlf += 1,
            HandoverOutcome::FailurePingPong => self.counts.pingpong += 1,
        }
        self.records.push(rec);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a3_examples() {
        assert!(a3_condition(-80.0, -85.0, 3.0));
        assert!(!a3_condition(-84.0, -85.0, 3.0));
        assert!(!a3_condition(0.0, -200.0, f64::INFINITY));
    }

    #[test]
    fn ttt_requires_consecutive_ticks() {
        let mut t = A3Tracker::default();
        let good = [-85.0, -80.0];
        let bad = [-85.0, -84.0];
        assert_eq!(t.update(&good, 0, 3.0, 3), None);
        assert_eq!(t.update(&good, 0, 3.0, 3), None);
        assert_eq!(t.update(&bad, 0, 3.0, 3), None);
        assert_eq!(t.update(&good, 0, 3.0, 3), None);
        assert_eq!(t.update(&good, 0, 3.0, 3), None);
        assert_eq!(t.update(&good, 0, 3.0, 3), Some(1));
        assert_eq!(t.held(), 0);
    }

    #[test]
    fn candidate_change_restarts_timer() {
        let mut t = A3Tracker::default();
        assert_eq!(t.update(&[-90.0, -80.0, -85.0], 0, 3.0, 2), None);
        assert_eq!(t.update(&[-90.0, -85.0, -80.0], 0, 3.0, 2), None);
        assert_eq!(t.update(&[-90.0, -85.0, -80.0], 0, 3.0, 2), Some(2));
    }

    #[test]
    fn infinite_margin_never_fires() {
        let mut t = A3Tracker::default();
        for _ in 0..100 {
            assert_eq!(t.update(&[-140.0, -40.0], 0, f64::INFINITY, 1), None);
        }
    }

    #[test]
    fn execution_outcomes() {
        let m = FailureModel::default();
        assert_eq!(execute_handover(0, 1, 2, 2, 3.0), Err(NetError::SameCell(2)));

        let mut e = execute_handover(10, 1, 0, 2, 3.0).unwrap();
        assert_eq!(e.observe(10.0, &m), None);
        let Some(ExecutionVerdict::Completed(p)) = e.observe(10.0, &m) else { panic!() };
        assert_eq!(p.completed_tick, 11);
        assert_eq!(p.expire(61, &m), None);
        assert_eq!(p.expire(62, &m).unwrap().outcome, HandoverOutcome::Success);
        assert_eq!(p.on_next_handover(13, 0, &m).outcome, HandoverOutcome::FailurePingPong);
        assert_eq!(p.on_next_handover(13, 5, &m).outcome, HandoverOutcome::Success);
        assert_eq!(p.finish().outcome, HandoverOutcome::Success);

        let mut e = execute_handover(10, 1, 0, 2, 3.0).unwrap();
        e.observe(-20.0, &m);
        let Some(ExecutionVerdict::Rlf(r)) = e.observe(-20.0, &m) else { panic!() };
        assert_eq!(r.outcome, HandoverOutcome::FailureRlf);

        // A single recovered sample is enough to avoid RLF.
        let mut e = execute_handover(10, 1, 0, 2, 3.0).unwrap();
        e.observe(-20.0, &m);
        assert!(matches!(e.observe(-7.0, &m), Some(ExecutionVerdict::Completed(_))));
    }

    #[test]
    fn ledger_identity() {
        let mut l = HandoverLedger::default();
        let e = execute_handover(0, 0, 0, 1, 3.0).unwrap();
        for outcome in [HandoverOutcome::Success, HandoverOutcome::FailureRlf, HandoverOutcome::FailurePingPong] {
            l.open();
            l.close(HandoverRecord { outcome, ..e.blocked() });
        }
        assert_eq!(l.counts.attempts, l.counts.resolved());
        assert!((l.counts.hsr().unwrap() - 100.0 / 3.0).abs() < 1e-12);
        assert_eq!(HandoverCounts::default().hsr(), None);
    }
}
