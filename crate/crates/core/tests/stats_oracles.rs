use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use seqnoma_core::stats::*;

/// Exact one-way ANOVA F over integer samples.
fn exact_f(groups: &[&[i64]]) -> Ratio<i64> {
    let all: Vec<i64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    let n = all.len() as i64;
    let k = groups.len() as i64;
    let grand = Ratio::new(all.iter().sum(), n);
    let mut ssb = Ratio::from_integer(0);
    let mut ssw = Ratio::from_integer(0);
    for g in groups {
        let m = Ratio::new(g.iter().sum(), g.len() as i64);
        ssb += (m - grand) * (m - grand) * g.len() as i64;
        for &x in g.iter() {
            ssw += (Ratio::from_integer(x) - m) * (Ratio::from_integer(x) - m);
        }
    }
    (ssb / (k - 1)) / (ssw / (n - k))
}

#[test]
fn anova_matches_rational_arithmetic() {
    let a: &[i64] = &[1, 2, 3, 4];
    let b: &[i64] = &[5, 6, 7, 8];
    let exact = exact_f(&[a, b]);
    assert_eq!(exact, Ratio::new(96, 5));
    let r = one_way_anova(&[[1.0, 2.0, 3.0, 4.0], [5.0, 6.0, 7.0, 8.0]]).unwrap();
    assert!((r.f - 19.2).abs() < 1e-12, "{}", r.f);
    assert_eq!((r.df_between, r.df_within), (1, 6));

    let c: &[i64] = &[2, 9, 4, 4, 1];
    let exact = exact_f(&[a, b, c]);
    let r = one_way_anova(&[vec![1.0, 2.0, 3.0, 4.0], vec![5.0, 6.0, 7.0, 8.0], vec![2.0, 9.0, 4.0, 4.0, 1.0]]).unwrap();
    let expected = *exact.numer() as f64 / *exact.denom() as f64;
    assert!((r.f - expected).abs() < 1e-12 * expected, "{} vs {expected}", r.f);
}

/// `P(F > 4; 1, 10) = P(|T| > 2; 10)`, integrated directly from the
/// unnormalized Student density after mapping `t = tan θ`.
fn f_tail_oracle() -> f64 {
    let dens = |th: f64| {
        let t = th.tan();
        (1.0 + t * t / 10.0).powf(-5.5) / (th.cos() * th.cos())
    };
    let simpson = |a: f64, b: f64, n: usize| {
        let h = (b - a) / n as f64;
        let mut s = dens(a) + dens(b);
        for i in 1..n {
            s += dens(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let top = std::f64::consts::FRAC_PI_2 - 1e-9;
    let whole = simpson(0.0, top, 200_000);
    let tail = simpson(2f64.atan(), top, 200_000);
    tail / whole
}

#[test]
fn f_tail_matches_integration_oracle() {
    let oracle = f_tail_oracle();
    assert!((oracle - 0.0734).abs() < 1e-3, "{oracle}");
    assert!((f_sf(4.0, 1.0, 10.0) - oracle).abs() < 1e-6, "{} vs {oracle}", f_sf(4.0, 1.0, 10.0));
}

#[test]
fn cohens_d_is_antisymmetric_on_random_pairs() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..100 {
        let n = 2 + i % 9;
        let a: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let b: Vec<f64> = (0..n + 1).map(|_| 1.0 + 2.0 * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng)).collect();
        let (ab, ba) = (cohens_d(&a, &b).unwrap(), cohens_d(&b, &a).unwrap());
        assert_eq!(ab, -ba);
    }
}

#[test]
fn confidence_interval_half_width_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x: Vec<f64> = (0..10_000).map(|_| StandardNormal.sample(&mut rng)).collect();
    let (lo, hi) = confidence_interval(&x, 0.95).unwrap();
    let half = (hi - lo) / 2.0;
    assert!((half - 0.0196).abs() < 0.1 * 0.0196, "{half}");

    // Coverage over repeated small samples.
    let mut hits = 0;
    for _ in 0..2000 {
        let s: Vec<f64> = (0..8).map(|_| StandardNormal.sample(&mut rng)).collect();
        let (lo, hi) = confidence_interval(&s, 0.95).unwrap();
        if lo <= 0.0 && 0.0 <= hi {
            hits += 1;
        }
    }
    assert!((1860..=1940).contains(&hits), "{hits}");
}

#[test]
fn interval_width_shrinks_like_inverse_sqrt_n() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let width = |n: usize, rng: &mut ChaCha8Rng| {
        let x: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let (lo, hi) = confidence_interval(&x, 0.95).unwrap();
        hi - lo
    };
    let ratio = width(400, &mut rng) / width(40_000, &mut rng);
    assert!((ratio - 10.0).abs() < 1.5, "{ratio}");
}

fn groups() -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 2..8), 2..5)
}

proptest! {
    #[test]
    fn anova_shift_and_scale_invariant(g in groups(), shift in -50.0f64..50.0, scale in 0.1f64..10.0) {
        let base = one_way_anova(&g).unwrap();
        prop_assume!(base.ss_within > 1e-6);
        let moved: Vec<Vec<f64>> = g.iter().map(|v| v.iter().map(|x| x * scale + shift).collect()).collect();
        let r = one_way_anova(&moved).unwrap();
        prop_assert!((r.f - base.f).abs() <= 1e-6 * base.f.max(1.0), "{} vs {}", r.f, base.f);
    }

    #[test]
    fn cohens_d_antisymmetry(a in prop::collection::vec(-10.0f64..10.0, 2..10), b in prop::collection::vec(-10.0f64..10.0, 2..10)) {
        let (ab, ba) = (cohens_d(&a, &b).unwrap(), cohens_d(&b, &a).unwrap());
        prop_assert!(ab == -ba || (ab.is_nan() && ba.is_nan()));
    }
}
