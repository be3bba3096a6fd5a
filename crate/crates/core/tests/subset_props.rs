use pe_numerals::sumcheck::{subset_sum_with, SubsetSumConfig};
use pe_numerals::Rational;
use proptest::prelude::*;

/// Lexicographically smallest sorted index list summing to `target`.
fn brute(values: &[Rational], target: Rational) -> Option<Vec<usize>> {
    let n = values.len();
    let mut best: Option<Vec<usize>> = None;
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sum = idx.iter().fold(Rational::ZERO, |a, &i| a + values[i]);
        if sum == target && best.as_ref().is_none_or(|b| idx < *b) {
            best = Some(idx);
        }
    }
    best
}

fn rationals(max_len: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec(
        (0i128..40, prop::sample::select(vec![1i128, 2, 3, 4, 5, 6, 8, 10, 12, 120])),
        0..=max_len,
    )
    .prop_map(|v| v.into_iter().map(|(n, d)| Rational::new(n, d)).collect())
}

fn dp_only() -> SubsetSumConfig {
    SubsetSumConfig {
        mitm_max_items: 0,
        ..SubsetSumConfig::default()
    }
}

fn mitm_only() -> SubsetSumConfig {
    SubsetSumConfig {
        dp_bound: 0,
        ..SubsetSumConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn both_solvers_agree_with_brute_force(values in rationals(14), pick in any::<u32>(), shift in 0i128..3) {
        let chosen = values.iter().enumerate().filter(|(i, _)| pick & (1 << i) != 0);
        let target = chosen.fold(Rational::ZERO, |a, (_, v)| a + *v) + Rational::new(shift, 4);
        let want = brute(&values, target);
        prop_assert_eq!(subset_sum_with(&values, target, &dp_only()).unwrap(), want.clone());
        prop_assert_eq!(subset_sum_with(&values, target, &mitm_only()).unwrap(), want);
    }
}

#[test]
fn neither_solver_fits() {
    let values: Vec<Rational> = (0..50).map(|i| Rational::from_integer(1_000_000_007 + i)).collect();
    let target = Rational::from_integer(3_000_000_030);
    assert!(subset_sum_with(&values, target, &SubsetSumConfig::default()).is_err());
}
