use odaframe_analytics::deciles;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Order statistic by selection, independent of any full sort.
fn kth(values: &[f64], k: usize) -> f64 {
    let mut v = values.to_vec();
    let (_, x, _) = v.select_nth_unstable_by(k, |a, b| a.total_cmp(b));
    *x
}

fn oracle(values: &[f64]) -> [f64; 11] {
    let n = values.len();
    let mut out = [0.0; 11];
    for (k, slot) in out.iter_mut().enumerate() {
        let pos = (n - 1) as f64 * k as f64 / 10.0;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        let a = kth(values, lo);
        let b = kth(values, hi);
        *slot = a + (b - a) * (pos - lo as f64);
    }
    out
}

#[test]
fn matches_selection_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..1000 {
        let n = if case % 10 == 0 { 2048 } else { rng.random_range(1..600) };
        let values: Vec<f64> = (0..n).map(|_| rng.random_range(-1e3..1e3)).collect();
        let got = deciles(&values).unwrap();
        let want = oracle(&values);
        for k in 0..11 {
            assert!((got[k] - want[k]).abs() <= 1e-9, "case {case} decile {k}: {} vs {}", got[k], want[k]);
        }
    }
}

#[test]
fn grid_and_degenerate() {
    let grid: Vec<f64> = (0..=10).rev().map(f64::from).collect();
    assert_eq!(deciles(&grid).unwrap(), core::array::from_fn(|k| k as f64));
    assert_eq!(deciles(&[4.5]).unwrap(), [4.5; 11]);
    assert!(deciles(&[]).is_none());
}

proptest! {
    #[test]
    fn monotone(values in prop::collection::vec(-1e6f64..1e6, 1..300)) {
        let d = deciles(&values).unwrap();
        for w in d.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        prop_assert_eq!(d[0], values.iter().copied().fold(f64::INFINITY, f64::min));
        prop_assert_eq!(d[10], values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    }
}
