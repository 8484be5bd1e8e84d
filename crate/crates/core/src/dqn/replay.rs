use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use super::DqnError;
use crate::math;

/// Binary sum-tree over a power-of-two number of leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct SumTree {
    leaves: usize,
    nodes: Vec<f64>,
}

impl SumTree {
    pub fn new(capacity: usize) -> Self {
        let leaves = capacity.max(1).next_power_of_two();
        Self { leaves, nodes: vec![0.0; 2 * leaves] }
    }

    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn get(&self, leaf: usize) -> f64 {
        self.nodes[self.leaves + leaf]
    }

    /// Sets one leaf and recomputes its ancestors from their children.
    pub fn set(&mut self, leaf: usize, value: f64) {
        let mut i = self.leaves + leaf;
        self.nodes[i] = value;
        while i > 1 {
            i /= 2;
            self.nodes[i] = self.nodes[2 * i] + self.nodes[2 * i + 1];
        }
    }

    /// Leaf whose cumulative interval `[Σ_{j<i} p_j, Σ_{j≤i} p_j)` contains
    /// `query`; `query` is clamped into `[0, total)`.
    pub fn find(&self, query: f64) -> usize {
        let mut q = query.clamp(0.0, self.total());
        let mut i = 1;
        while i < self.leaves {
            let left = self.nodes[2 * i];
            if q < left || self.nodes[2 * i + 1] <= 0.0 {
                i *= 2;
            } else {
                q -= left;
                i = 2 * i + 1;
            }
        }
        i - self.leaves
    }

    /// Sum of leaves `0..leaf`, for testing descent intervals.
    pub fn prefix(&self, leaf: usize) -> f64 {
        (0..leaf).map(|j| self.get(j)).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
    /// `|TD error| + ε_pri`; new transitions take the largest value seen.
    pub priority: f64,
}

/// Ring buffer with proportional prioritized sampling.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    items: Vec<Transition>,
    next: usize,
    tree: SumTree,
    alpha: f64,
    eps: f64,
    max_priority: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledBatch {
    pub indices: Vec<usize>,
    /// Importance weights, normalized so the largest is 1.
    pub weights: Vec<f64>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, alpha: f64, eps: f64) -> Self {
        Self {
            capacity: capacity.max(1),
            items: Vec::new(),
            next: 0,
            tree: SumTree::new(capacity),
            alpha,
            eps,
            max_priority: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn tree(&self) -> &SumTree {
        &self.tree
    }

    pub fn get(&self, i: usize) -> &Transition {
        &self.items[i]
    }

    pub fn push(&mut self, mut t: Transition) {
        t.priority = self.max_priority.max(self.eps);
        let slot = self.next;
        self.tree.set(slot, math::pow(t.priority, self.alpha));
        if slot < self.items.len() {
            self.items[slot] = t;
        } else {
            self.items.push(t);
        }
        self.next = (self.next + 1) % self.capacity;
    }

    /// Sets the priority of slot `i` from a TD error.
    pub fn update_priority(&mut self, i: usize, td_error: f64) {
        let p = math::abs(td_error) + self.eps;
        self.max_priority = self.max_priority.max(p);
        self.items[i].priority = p;
        self.tree.set(i, math::pow(p, self.alpha));
    }

    /// Stratified proportional sample of `k` slots with importance weights
    /// `(N·P(i))^(−β)`.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, beta: f64, rng: &mut R) -> Result<SampledBatch, DqnError> {
        if k == 0 || self.items.len() < k {
            return Err(DqnError::Underfull { len: self.items.len(), need: k.max(1) });
        }
        let total = self.tree.total();
        let seg = total / k as f64;
        let n = self.items.len() as f64;
        let mut indices = Vec::with_capacity(k);
        let mut weights = Vec::with_capacity(k);
        for s in 0..k {
            let q = seg * (s as f64 + rng.gen::<f64>());
            let i = self.tree.find(q).min(self.items.len() - 1);
            let p = self.tree.get(i) / total;
            indices.push(i);
            weights.push(math::pow(n * p, -beta));
        }
        let wmax = weights.iter().cloned().fold(0.0, f64::max);
        if wmax > 0.0 && wmax.is_finite() {
            weights.iter_mut().for_each(|w| *w /= wmax);
        }
        Ok(SampledBatch { indices, weights })
    }
}
