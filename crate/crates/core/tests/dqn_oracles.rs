use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqnoma_core::dqn::*;
use seqnoma_core::rng::{stream, Stream};

/// Two states, two actions. `P[s][a]` is the deterministic next state and
/// `R[s][a]` the reward.
const NEXT: [[usize; 2]; 2] = [[0, 1], [0, 1]];
const REWARD: [[f64; 2]; 2] = [[0.0, 1.0], [2.0, -1.0]];
const GAMMA: f64 = 0.8;

fn value_iteration() -> [[f64; 2]; 2] {
    let mut q = [[0.0f64; 2]; 2];
    for _ in 0..2000 {
        let mut n = q;
        for s in 0..2 {
            for a in 0..2 {
                let s2 = NEXT[s][a];
                n[s][a] = REWARD[s][a] + GAMMA * q[s2][0].max(q[s2][1]);
            }
        }
        q = n;
    }
    q
}

#[test]
fn tabular_mode_matches_value_iteration() {
    let star = value_iteration();
    let sch = TrainSchedule {
        gamma: GAMMA,
        learning_rate: 0.1,
        batch_size: 8,
        warmup: 8,
        buffer_capacity: 4096,
        target_period: 50,
        priority_alpha: 0.0,
        beta_start: 0.0,
        beta_end: 0.0,
        ..TrainSchedule::default()
    };
    let mut l = Learner::new(TabularQ::new(2, 2), sch);
    let mut explore = ChaCha8Rng::seed_from_u64(11);
    let mut replay = stream(11, Stream::Replay);
    let mut drop = stream(11, Stream::Dropout);
    let mut s = 0usize;
    for _ in 0..60_000 {
        let a = explore.gen_range(0..2);
        let s2 = NEXT[s][a];
        l.remember(Transition {
            state: vec![s as f64],
            action: a,
            reward: REWARD[s][a],
            next_state: vec![s2 as f64],
            done: false,
            priority: 1.0,
        });
        train_step(&mut l, 0.0, &mut replay, &mut drop).unwrap();
        s = s2;
    }
    let mut bellman_gap: f64 = 0.0;
    for s in 0..2 {
        for a in 0..2 {
            let got = l.online.get(s, a);
            assert!((got - star[s][a]).abs() < 1e-3, "Q({s},{a}) = {got}, expected {}", star[s][a]);
            let s2 = NEXT[s][a];
            let backup = REWARD[s][a] + GAMMA * l.online.get(s2, 0).max(l.online.get(s2, 1));
            bellman_gap = bellman_gap.max((got - backup).abs());
        }
    }
    assert!(bellman_gap < 1e-3, "{bellman_gap}");
}

#[test]
fn gradients_match_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for trial in 0..10 {
        let sizes = [3, 2 + trial % 4, 3 + trial % 3, 2 + trial % 2];
        let mut init = stream(trial as u64, Stream::Agent);
        let mut net = QNetwork::new(&sizes, 0.0, &mut init);
        // Zero biases can park a pre-activation exactly on the ReLU kink.
        let jitter: Vec<f64> = net.parameters().iter().map(|p| p + rng.gen_range(-0.1..0.1)).collect();
        net.set_parameters(&jitter);
        let states: Vec<Vec<f64>> = (0..4).map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let batch: Vec<Sample> = states
            .iter()
            .map(|s| Sample {
                state: s,
                action: rng.gen_range(0..sizes[3]),
                target: rng.gen_range(-0.5..0.5),
                weight: rng.gen_range(0.5..1.0),
            })
            .collect();
        // Large delta keeps the loss quadratic, so the check sees no kinks.
        let delta = 1e6;
        let (_, _, grad) = net.loss_and_grad::<ChaCha8Rng>(&batch, delta, None).unwrap();
        let theta = net.parameters();
        let h = 1e-6;
        for i in 0..theta.len() {
            let mut p = theta.clone();
            p[i] += h;
            net.set_parameters(&p);
            let up = net.loss(&batch, delta).unwrap();
            p[i] -= 2.0 * h;
            net.set_parameters(&p);
            let down = net.loss(&batch, delta).unwrap();
            net.set_parameters(&theta);
            let numeric = (up - down) / (2.0 * h);
            let scale = numeric.abs().max(grad[i].abs()).max(1e-3);
            assert!((numeric - grad[i]).abs() / scale < 1e-4, "trial {trial} param {i}: {numeric} vs {}", grad[i]);
        }
    }
}
