use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use seqnoma_core::seqlib::*;

fn brute(a: &[i8], b: &[i8]) -> Vec<i64> {
    let n = a.len();
    (0..n).map(|t| (0..n).map(|i| a[i] as i64 * b[(i + t) % n] as i64).sum()).collect()
}

#[test]
fn gold_m5_cross_correlation_is_three_valued() {
    let fam = generate_gold_family(5).unwrap();
    assert_eq!(fam.len(), 33);
    let mut seen = BTreeSet::new();
    for i in 0..fam.len() {
        for j in (i + 1)..fam.len() {
            seen.extend(brute(fam[i].chips(), fam[j].chips()));
        }
    }
    assert_eq!(seen, BTreeSet::from([-9, -1, 7]));
}

#[test]
fn walsh_rows_orthogonal_at_zero_lag() {
    for order in [4, 8, 16, 32, 64, 128, 256] {
        let w = generate_walsh_family(order).unwrap();
        for i in 0..order {
            for j in 0..order {
                let d: i64 = w[i].chips().iter().zip(w[j].chips()).map(|(&a, &b)| a as i64 * b as i64).sum();
                assert_eq!(d, if i == j { order as i64 } else { 0 });
            }
        }
    }
}

#[test]
fn fft_path_equals_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..200 {
        let n = rng.gen_range(1..=256);
        let mut draw = || {
            let chips: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
            ChipSequence::new(chips, Family::Gold, k).unwrap()
        };
        let (a, b) = (draw(), draw());
        let fast = periodic_correlation(&a, &b).unwrap();
        assert_eq!(fast.values, brute(a.chips(), b.chips()), "pair {k}, n = {n}");
        assert_eq!(fast, periodic_correlation_direct(&a, &b).unwrap());
    }
}
