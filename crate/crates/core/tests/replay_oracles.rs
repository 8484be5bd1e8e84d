use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqnoma_core::dqn::{ReplayBuffer, SumTree, Transition};

fn dummy() -> Transition {
    Transition { state: vec![0.0], action: 0, reward: 0.0, next_state: vec![0.0], done: false, priority: 1.0 }
}

/// Upper 1% point of χ² with 9 degrees of freedom.
const CHI2_9_99: f64 = 21.666;

fn chi_square(counts: &[u64], probs: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts.iter().zip(probs).map(|(&c, &p)| (c as f64 - n as f64 * p).powi(2) / (n as f64 * p)).sum()
}

#[test]
fn sampling_frequencies_follow_priorities() {
    let alpha = 0.6;
    let mut buf = ReplayBuffer::new(10, alpha, 1e-3);
    for _ in 0..10 {
        buf.push(dummy());
    }
    let td = [0.1, 0.5, 1.0, 2.0, 0.05, 3.0, 0.7, 1.5, 0.2, 4.0];
    for (i, e) in td.iter().enumerate() {
        buf.update_priority(i, *e);
    }
    let weights: Vec<f64> = td.iter().map(|e: &f64| (e.abs() + 1e-3).powf(alpha)).collect();
    let total: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / total).collect();
    for k in [1usize, 10] {
        let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
        let mut counts = [0u64; 10];
        for _ in 0..100_000 / k {
            for i in buf.sample(k, 0.4, &mut rng).unwrap().indices {
                counts[i] += 1;
            }
        }
        let x2 = chi_square(&counts, &probs);
        assert!(x2 < CHI2_9_99, "batch {k}: chi2 = {x2}, counts {counts:?}");
    }
}

#[test]
fn sum_tree_agrees_with_naive_sums_under_updates() {
    let n = 1000;
    let mut tree = SumTree::new(n);
    let mut naive = vec![0.0f64; n];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for step in 0..100_000 {
        let i = rng.gen_range(0..n);
        let v = rng.gen_range(0.0..10.0);
        tree.set(i, v);
        naive[i] = v;
        if step % 997 == 0 {
            let total: f64 = naive.iter().sum();
            assert!((tree.total() - total).abs() <= 1e-9 * total.max(1.0));
            for (j, &x) in naive.iter().enumerate() {
                assert_eq!(tree.get(j), x);
            }
            let q = rng.gen_range(0.0..total);
            let leaf = tree.find(q);
            let before: f64 = naive[..leaf].iter().sum();
            assert!(before <= q + 1e-9 && q < before + naive[leaf] + 1e-9, "query {q} landed on {leaf}");
        }
    }
}
