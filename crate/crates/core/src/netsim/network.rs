use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
use rand::Rng;

use super::codeplan::CodePlan;
use super::grid::{build_grid, CellGrid, Point, Rect};
use super::handover::{
    execute_handover, A3Tracker, ExecutionVerdict, FailureModel, HandoverCounts, HandoverExecution, HandoverLedger,
    HandoverRecord, PendingSuccess,
};
use super::mobility::{step_mobility, UserMotion};
use super::NetError;
use crate::config::ScenarioConfig;
use crate::math;
use crate::phy::{
    effective_interference, power_profile, rsrp_dbm, sic_residual, sic_sinr, ChannelParams, InterferingCell,
    LinkBudget, NomaGroup, RsrpFilter,
};
use crate::rng::{complex_normal, stream, SimRng, Stream};

/// Per-user simulation state.
#[derive(Debug, Clone, PartialEq)]
pub struct UserState {
    pub id: usize,
    pub pos: Point,
    pub motion: UserMotion,
    pub serving: usize,
    /// Slot assigned at attach.
    pub home_slot: usize,
    pub slot: usize,
    /// Index into the code plan's codebook.
    pub code: usize,
    pub margin_db: f64,
    pub qos_ok: bool,
    pub a3: A3Tracker,
    pub exec: Option<HandoverExecution>,
    pub pending: Option<PendingSuccess>,
    pub filters: Vec<RsrpFilter>,
    pub rsrp_dbm: Vec<f64>,
    /// Instantaneous `|h|²` toward every cell.
    pub power_gain: Vec<f64>,
    /// Path loss times filtered fading power, per cell.
    pub smoothed_gain: Vec<f64>,
    pub link: LinkBudget,
    pub rate_bps_hz: f64,
}

impl UserState {
    pub fn velocity_kmh(&self) -> f64 {
        self.motion.speed_kmh
    }

    pub fn serving_rsrp_dbm(&self) -> f64 {
        self.rsrp_dbm[self.serving]
    }

    /// Interference plus noise in dBm.
    pub fn interference_dbm(&self) -> f64 {
        math::watts_to_dbm(self.link.interference_w() + self.link.noise_w)
    }
}

/// What happened during one tick.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TickEvents {
    /// Attempts started this tick, `(user, source, target)`.
    pub started: Vec<(usize, usize, usize)>,
    /// Attempts whose outcome was settled this tick.
    pub closed: Vec<HandoverRecord>,
}

impl TickEvents {
    pub fn failures_of(&self, user: usize) -> usize {
        self.closed.iter().filter(|r| r.user == user && r.outcome != super::HandoverOutcome::Success).count()
    }
}

/// Removes `leaving` and admits `arriving` up to `capacity` members. Each
/// arrival starts from an equal share; shares are then renormalized onto the
/// simplex and re-sorted. Returns the blocked arrivals.
pub fn rebalance_group(group: &mut NomaGroup, leaving: &[usize], arriving: &[usize], capacity: usize) -> Vec<usize> {
    for u in leaving {
        if let Some(k) = group.position(*u) {
            group.members.remove(k);
            group.alphas.remove(k);
        }
    }
    let mut blocked = Vec::new();
    for &u in arriving {
        if group.len() >= capacity || group.position(u).is_some() {
            blocked.push(u);
            continue;
        }
        group.members.push(u);
        group.alphas.push(1.0 / group.members.len() as f64);
    }
    group.renormalize();
    blocked
}

/// The multi-cell network: grid, users, NOMA groups and handover ledger.
#[derive(Debug, Clone)]
pub struct Network {
    pub grid: CellGrid,
    pub bounds: Rect,
    pub plan: Arc<CodePlan>,
    pub users: Vec<UserState>,
    pub groups: Vec<NomaGroup>,
    pub ledger: HandoverLedger,
    pub tick: u64,
    channel: ChannelParams,
    model: FailureModel,
    ttt: u32,
    tick_s: f64,
    tx_w: f64,
    noise_w: f64,
    bandwidth_hz: f64,
    group_max: usize,
    qos_min: f64,
    profiles: usize,
    attach_counter: Vec<usize>,
    mobility_rng: SimRng,
    fading_rng: SimRng,
}

impl Network {
    pub fn new(cfg: &ScenarioConfig, plan: Arc<CodePlan>, seed: u64) -> Result<Self, NetError> {
        cfg.validate()?;
        let grid = build_grid(cfg.rings, cfg.isd_m)?;
        if plan.options.len() < grid.len() {
            return Err(NetError::UnknownCell(plan.options.len()));
        }
        let bounds = grid.bounds();
        let cells = grid.len();
        let mut placement = stream(seed, Stream::Placement);
        let mut users = Vec::with_capacity(cells * cfg.users_per_cell);
        let mut groups = Vec::with_capacity(cells);
        let mut attach_counter = vec![0; cells];
        let r = grid.cell_radius();
        for c in 0..cells {
            let center = grid.cells[c].center;
            let mut members = Vec::new();
            let mut codes = Vec::new();
            for _ in 0..cfg.users_per_cell {
                let pos = loop {
                    let p = Point::new(
                        center.x + placement.gen_range(-r..=r),
                        center.y + placement.gen_range(-r..=r),
                    );
                    if grid.in_cell(c, &p) {
                        break p;
                    }
                };
                let speed = if cfg.velocity_kmh_max > cfg.velocity_kmh_min {
                    placement.gen_range(cfg.velocity_kmh_min..=cfg.velocity_kmh_max)
                } else {
                    cfg.velocity_kmh_min
                };
                let motion = UserMotion::new(&pos, speed, &bounds, &mut placement);
                let slot = plan.attach(c, &mut attach_counter[c], &codes);
                let code = plan.code(c, slot);
                codes.push(code);
                let id = users.len();
                members.push(id);
                users.push(UserState {
                    id,
                    pos,
                    motion,
                    serving: c,
                    home_slot: slot,
                    slot,
                    code,
                    margin_db: cfg.ho_margin_db,
                    qos_ok: false,
                    a3: A3Tracker::default(),
                    exec: None,
                    pending: None,
                    filters: vec![RsrpFilter::new(cfg.rsrp_filter_coeff); cells],
                    rsrp_dbm: vec![0.0; cells],
                    power_gain: vec![0.0; cells],
                    smoothed_gain: vec![0.0; cells],
                    link: LinkBudget::default(),
                    rate_bps_hz: 0.0,
                });
            }
            let alphas = power_profile(members.len(), cfg.baseline_power_profile, cfg.action_power_profiles);
            groups.push(NomaGroup::new(members, alphas, cfg.tx_power_w())?);
        }
        let mut net = Self {
            grid,
            bounds,
            plan,
            users,
            groups,
            ledger: HandoverLedger::default(),
            tick: 0,
            channel: cfg.channel(),
            model: FailureModel {
                rlf_sinr_db: cfg.rlf_sinr_db,
                exec_ticks: cfg.exec_ticks,
                pingpong_ticks: cfg.pingpong_ticks,
            },
            ttt: cfg.ttt_ticks,
            tick_s: cfg.tick_s(),
            tx_w: cfg.tx_power_w(),
            noise_w: cfg.noise_w(),
            bandwidth_hz: cfg.bandwidth_hz,
            group_max: cfg.group_max,
            qos_min: cfg.qos_min_bps_hz,
            profiles: cfg.action_power_profiles,
            attach_counter,
            mobility_rng: stream(seed, Stream::Mobility),
            fading_rng: stream(seed, Stream::Fading),
        };
        net.measure();
        net.reorder_groups();
        net.compute_links();
        Ok(net)
    }

    pub fn cell_count(&self) -> usize {
        self.grid.len()
    }

    pub fn failure_model(&self) -> &FailureModel {
        &self.model
    }

    pub fn counts(&self) -> HandoverCounts {
        self.ledger.counts
    }

    pub fn group_of(&self, user: usize) -> &NomaGroup {
        &self.groups[self.users[user].serving]
    }

    /// Downlink throughput of `user` in Mbps: its spectral efficiency over the
    /// bandwidth share of its cell.
    pub fn throughput_mbps(&self, user: usize) -> f64 {
        let n = self.group_of(user).len().max(1);
        self.users[user].rate_bps_hz * self.bandwidth_hz / n as f64 / 1e6
    }

    pub fn mean_throughput_mbps(&self) -> f64 {
        let n = self.users.len().max(1) as f64;
        (0..self.users.len()).map(|u| self.throughput_mbps(u)).sum::<f64>() / n
    }

    pub fn mean_interference_dbm(&self) -> f64 {
        let n = self.users.len().max(1) as f64;
        self.users.iter().map(UserState::interference_dbm).sum::<f64>() / n
    }

    pub fn set_margin(&mut self, user: usize, margin_db: f64) {
        self.users[user].margin_db = margin_db;
    }

    /// Switches `user` to another code option of its serving cell.
    pub fn set_slot(&mut self, user: usize, slot: usize) {
        let u = &mut self.users[user];
        u.slot = slot % self.plan.slots();
        u.code = self.plan.code(u.serving, u.slot);
    }

    /// Applies power preset `profile` to the group of `cell`.
    pub fn set_profile(&mut self, cell: usize, profile: usize) {
        let g = &mut self.groups[cell];
        g.alphas = power_profile(g.len(), profile, self.profiles);
    }

    /// Advances the network by one tick.
    pub fn step(&mut self) -> TickEvents {
        self.tick += 1;
        let mut ev = TickEvents::default();
        for u in 0..self.users.len() {
            if let Some(rec) = self.users[u].pending.and_then(|p| p.expire(self.tick, &self.model)) {
                self.users[u].pending = None;
                self.close(rec, &mut ev);
            }
        }
        for u in &mut self.users {
            step_mobility(&mut u.pos, &mut u.motion, self.tick_s, &self.bounds, &mut self.mobility_rng);
        }
        self.measure();
        for u in 0..self.users.len() {
            if self.users[u].exec.is_some() {
                continue;
            }
            let (serving, margin) = (self.users[u].serving, self.users[u].margin_db);
            let user = &mut self.users[u];
            if let Some(target) = user.a3.update(&user.rsrp_dbm, serving, margin, self.ttt) {
                self.start_handover(u, target, &mut ev);
            }
        }
        self.reorder_groups();
        self.compute_links();
        for u in 0..self.users.len() {
            let sinr = self.users[u].link.sinr_db;
            let Some(exec) = self.users[u].exec.as_mut() else { continue };
            match exec.observe(sinr, &self.model) {
                None => {}
                Some(ExecutionVerdict::Completed(p)) => {
                    self.users[u].exec = None;
                    self.users[u].pending = Some(p);
                }
                Some(ExecutionVerdict::Rlf(rec)) => {
                    self.users[u].exec = None;
                    self.close(rec, &mut ev);
                    self.reestablish(u);
                }
            }
        }
        ev
    }

    /// Settles every open attempt at the end of the horizon.
    pub fn finish(&mut self) -> TickEvents {
        let mut ev = TickEvents::default();
        for u in 0..self.users.len() {
            if let Some(e) = self.users[u].exec.take() {
                self.close(e.truncate(), &mut ev);
            }
            if let Some(p) = self.users[u].pending.take() {
                self.close(p.finish(), &mut ev);
            }
        }
        ev
    }

    fn close(&mut self, rec: HandoverRecord, ev: &mut TickEvents) {
        self.ledger.close(rec);
        ev.closed.push(rec);
    }

    fn start_handover(&mut self, u: usize, target: usize, ev: &mut TickEvents) {
        let source = self.users[u].serving;
        let exec = match execute_handover(self.tick, u, source, target, self.users[u].margin_db) {
            Ok(e) => e,
            Err(_) => return,
        };
        self.ledger.open();
        ev.started.push((u, source, target));
        if let Some(p) = self.users[u].pending.take() {
            let rec = p.on_next_handover(self.tick, target, &self.model);
            self.close(rec, ev);
        }
        if self.groups[target].len() >= self.group_max {
            self.close(exec.blocked(), ev);
            return;
        }
        self.move_user(u, target);
        self.users[u].exec = Some(exec);
    }

    /// After a radio link failure the user reconnects to the strongest cell
    /// with room; this is not a handover attempt.
    fn reestablish(&mut self, u: usize) {
        let best = (0..self.cell_count())
            .filter(|&c| c == self.users[u].serving || self.groups[c].len() < self.group_max)
            .max_by(|&a, &b| self.users[u].rsrp_dbm[a].total_cmp(&self.users[u].rsrp_dbm[b]).then(b.cmp(&a)));
        if let Some(c) = best {
            if c != self.users[u].serving {
                self.move_user(u, c);
            }
        }
        self.users[u].a3.reset();
    }

    fn move_user(&mut self, u: usize, to: usize) {
        let from = self.users[u].serving;
        rebalance_group(&mut self.groups[from], &[u], &[], self.group_max);
        let blocked = rebalance_group(&mut self.groups[to], &[], &[u], self.group_max);
        debug_assert!(blocked.is_empty());
        let present: Vec<usize> =
            self.groups[to].members.iter().filter(|&&m| m != u).map(|&m| self.users[m].code).collect();
        let slot = self.plan.attach(to, &mut self.attach_counter[to], &present);
        let user = &mut self.users[u];
        user.serving = to;
        user.home_slot = slot;
        user.slot = slot;
        user.code = self.plan.code(to, slot);
        user.a3.reset();
        let key = |m: usize| self.users[m].smoothed_gain[to];
        self.groups[to].reorder(key);
    }

    fn measure(&mut self) {
        for u in &mut self.users {
            for (c, cell) in self.grid.cells.iter().enumerate() {
                let d = u.pos.distance(&cell.center);
                let pl = self.channel.pathloss_linear(d);
                let (re, im) = complex_normal(&mut self.fading_rng);
                let g = Complex64::new(re, im).norm_sqr();
                let smoothed = u.filters[c].update(g);
                u.power_gain[c] = pl * g;
                u.smoothed_gain[c] = pl * smoothed;
                u.rsrp_dbm[c] = rsrp_dbm(pl, smoothed, self.tx_w);
            }
        }
    }

    fn reorder_groups(&mut self) {
        for c in 0..self.groups.len() {
            let users = &self.users;
            self.groups[c].reorder(|m| users[m].smoothed_gain[c]);
        }
    }

    fn compute_links(&mut self) {
        let plan = &*self.plan;
        let served: Vec<Vec<(f64, usize)>> = self
            .groups
            .iter()
            .map(|g| g.members.iter().zip(&g.alphas).map(|(&m, &a)| (a, self.users[m].code)).collect())
            .collect();
        for (c, g) in self.groups.iter().enumerate() {
            if g.is_empty() {
                continue;
            }
            let codes: Vec<usize> = g.members.iter().map(|&m| self.users[m].code).collect();
            let gains: Vec<f64> = g.members.iter().map(|&m| self.users[m].power_gain[c]).collect();
            let inter: Vec<f64> = g
                .members
                .iter()
                .map(|&m| {
                    let user = &self.users[m];
                    let cells = served.iter().enumerate().filter(|(o, s)| *o != c && !s.is_empty()).map(|(o, s)| {
                        InterferingCell { rx_power_w: self.tx_w * user.power_gain[o], users: s }
                    });
                    effective_interference(user.code, cells, |a, b| plan.rho2(a, b))
                })
                .collect();
            let scale = |k: usize, j: usize| plan.sync_rho2(codes[k], codes[j]);
            let sinr = sic_sinr(g, &gains, scale, &inter, self.noise_w);
            let intra = sic_residual(g, &gains, scale);
            for (k, &m) in g.members.iter().enumerate() {
                let u = &mut self.users[m];
                u.link = LinkBudget {
                    rsrp_dbm: u.rsrp_dbm[c],
                    sinr_db: math::linear_to_db(sinr[k]),
                    intra_interference_w: intra[k],
                    inter_interference_w: inter[k],
                    noise_w: self.noise_w,
                };
                u.rate_bps_hz = math::log2(1.0 + sinr[k]);
                u.qos_ok = u.rate_bps_hz >= self.qos_min;
            }
        }
    }

    /// Checks structural invariants; used by tests.
    pub fn check_invariants(&self) -> Result<(), &'static str> {
        let mut seen = vec![0u8; self.users.len()];
        for (c, g) in self.groups.iter().enumerate() {
            if g.check_simplex().is_err() {
                return Err("group off the simplex");
            }
            if g.len() > self.group_max {
                return Err("group above capacity");
            }
            for &m in &g.members {
                seen[m] += 1;
                if self.users[m].serving != c {
                    return Err("member not served by its group's cell");
                }
            }
        }
        if seen.iter().any(|&s| s != 1) {
            return Err("user not in exactly one group");
        }
        if self.users.iter().any(|u| !self.bounds.contains(&u.pos)) {
            return Err("user out of bounds");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::{AttachRule, CodebookKind};
    use alloc::vec;

    fn net(cfg: &ScenarioConfig, seed: u64) -> Network {
        let plan = CodePlan::build(CodebookKind::Gold, AttachRule::RoundRobin, cfg.cell_count(), 8, 6, 6).unwrap();
        Network::new(cfg, Arc::new(plan), seed).unwrap()
    }

    #[test]
    fn placement_counts() {
        let n = net(&ScenarioConfig::default(), 1);
        assert_eq!(n.users.len(), 28);
        assert!(n.groups.iter().all(|g| g.len() == 4));
        n.check_invariants().unwrap();
        for u in &n.users {
            assert!(n.grid.in_cell(u.serving, &u.pos));
            assert!((3.0..=120.0).contains(&u.velocity_kmh()));
        }
    }

    #[test]
    fn rebalance_examples() {
        let mut g = NomaGroup::new((0..8).collect(), vec![0.125; 8], 1.0).unwrap();
        assert_eq!(rebalance_group(&mut g, &[], &[9], 8), vec![9]);
        assert_eq!(g.len(), 8);

        let mut g = NomaGroup::new(vec![3, 1, 4, 5, 9], vec![0.4, 0.2, 0.2, 0.1, 0.1], 1.0).unwrap();
        rebalance_group(&mut g, &[4], &[], 8);
        assert_eq!(g.members, vec![3, 1, 5, 9]);
        assert!((g.alphas.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        g.validate().unwrap();

        rebalance_group(&mut g, &[], &[7], 8);
        assert_eq!(g.len(), 5);
        g.validate().unwrap();
    }

    #[test]
    fn accounting_identity_and_invariants_hold_every_tick() {
        let cfg = ScenarioConfig { velocity_kmh_min: 60.0, ..Default::default() };
        let mut n = net(&cfg, 7);
        for _ in 0..300 {
            n.step();
            n.check_invariants().unwrap();
            let c = n.counts();
            let open = n.users.iter().filter(|u| u.exec.is_some() || u.pending.is_some()).count() as u64;
            assert_eq!(c.attempts, c.resolved() + open);
        }
        n.finish();
        let c = n.counts();
        assert!(c.attempts > 0);
        assert_eq!(c.attempts, c.success + c.rlf + c.pingpong);
        assert_eq!(n.ledger.records.len() as u64, c.attempts);
    }

    #[test]
    fn infinite_margin_means_no_handover() {
        let cfg = ScenarioConfig { ho_margin_db: f64::INFINITY, velocity_kmh_min: 100.0, ..Default::default() };
        let mut n = net(&cfg, 3);
        for _ in 0..300 {
            n.step();
        }
        n.finish();
        assert_eq!(n.counts().attempts, 0);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let cfg = ScenarioConfig::default();
        let (mut a, mut b) = (net(&cfg, 11), net(&cfg, 11));
        for _ in 0..50 {
            a.step();
            b.step();
        }
        assert_eq!(a.users, b.users);
        assert_eq!(a.ledger, b.ledger);
    }

    #[test]
    fn profile_switch_stays_on_simplex() {
        let mut n = net(&ScenarioConfig::default(), 2);
        for p in 0..5 {
            n.set_profile(0, p);
            n.groups[0].validate().unwrap();
        }
        n.set_slot(0, 3);
        assert_eq!(n.users[0].code, n.plan.code(n.users[0].serving, 3));
    }
}
