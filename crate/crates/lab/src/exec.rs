use anyhow::Result;
use rayon::prelude::*;
use rayon::ThreadPool;
use seqnoma_core::experiments::Executor;

/// Fans seeds out over a bounded rayon pool; results keep input order.
pub struct Pool {
    pool: ThreadPool,
}

impl Pool {
    /// `jobs = None` uses one worker per available core.
    pub fn new(jobs: Option<usize>) -> Result<Self> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = jobs {
            b = b.num_threads(j.max(1));
        }
        Ok(Self { pool: b.build()? })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn join<A, B, RA, RB>(&self, a: A, b: B) -> (RA, RB)
    where
        A: FnOnce() -> RA + Send,
        B: FnOnce() -> RB + Send,
        RA: Send,
        RB: Send,
    {
        self.pool.install(|| rayon::join(a, b))
    }
}

impl Executor for Pool {
    fn map<T, F>(&self, items: &[u64], f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.pool.install(|| items.par_iter().map(|&s| f(s)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqnoma_core::experiments::Sequential;

    #[test]
    fn matches_sequential_order() {
        let items: Vec<u64> = (0..200).collect();
        let f = |s: u64| s.wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(7);
        let pool = Pool::new(Some(4)).unwrap();
        assert_eq!(pool.workers(), 4);
        assert_eq!(pool.map(&items, f), Sequential.map(&items, f));
    }
}
