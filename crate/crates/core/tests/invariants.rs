//! Exhaustive and property-based invariants for the rank transforms, the
//! strategies, and the closed forms.

use num::bigint::BigInt;
use proptest::prelude::*;

use rankdiff::closedform::{
    competitive_ratio, harmonic, op_expected_profit, sum_identity_lhs, sum_identity_rhs,
    HarmonicCache,
};
use rankdiff::permstream::{
    draw_relative_ranks, expected_final_rank, restrict, to_final_ranks, to_relative_ranks,
    Permutation, RandomSource, RelativeRankSequence,
};
use rankdiff::rational::{rat, rat_int, Rational};
use rankdiff::strategies::{
    amortized_profits, half_split_expected_profit, offline_select, profit, StrategyContext,
    StrategyKind,
};

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

/// Calls `f` with every relative-rank stream of length `n`.
fn for_each_stream(n: usize, mut f: impl FnMut(&[usize])) {
    let mut x = vec![1usize; n];
    loop {
        f(&x);
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if x[k] < k + 1 {
                x[k] += 1;
                for v in x[k + 1..].iter_mut() {
                    *v = 1;
                }
                break;
            }
            x[k] = 1;
        }
    }
}

fn stream(ranks: &[usize]) -> RelativeRankSequence {
    RelativeRankSequence::from_ranks(ranks.to_vec()).unwrap()
}

/// Reference implementation of the stream-to-permutation map: each new item
/// displaces upward every earlier item whose current rank is not below it.
fn insertion_final_ranks(x: &RelativeRankSequence) -> Vec<usize> {
    let mut r: Vec<usize> = Vec::new();
    for i in 1..=x.len() {
        let xi = x.rank(i);
        for v in r.iter_mut() {
            if *v >= xi {
                *v += 1;
            }
        }
        r.push(xi);
    }
    r
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

// ---------------------------------------------------------------------------
// Rank transforms
// ---------------------------------------------------------------------------

#[test]
fn round_trip_is_identity_exhaustively() {
    for n in 1..=6 {
        for_each_stream(n, |ranks| {
            let x = stream(ranks);
            let p = to_final_ranks(&x);
            assert_eq!(to_relative_ranks(&p), x);
            assert_eq!(to_final_ranks(&to_relative_ranks(&p)), p);
        });
    }
}

#[test]
fn final_ranks_match_insertion_reference() {
    for n in 1..=7 {
        for_each_stream(n, |ranks| {
            let x = stream(ranks);
            assert_eq!(to_final_ranks(&x).final_ranks(), insertion_final_ranks(&x));
        });
    }
}

#[test]
fn restriction_matches_stream_prefix() {
    for n in 2..=6 {
        for_each_stream(n, |ranks| {
            let x = stream(ranks);
            let p = to_final_ranks(&x);
            let restricted = restrict(&p).unwrap();
            assert_eq!(
                to_relative_ranks(&restricted).ranks(),
                &x.ranks()[..n - 1]
            );
        });
    }
}

#[test]
fn conditional_mean_of_final_rank_is_exact() {
    // Average r_i over all permutations with relative rank x at step i must
    // equal (n+1)x/(i+1), for every (i, x).
    for n in 1..=7 {
        let mut sums = vec![vec![0u64; n + 1]; n + 1]; // [i][x]
        let mut counts = vec![vec![0u64; n + 1]; n + 1];
        for_each_stream(n, |ranks| {
            let x = stream(ranks);
            let p = to_final_ranks(&x);
            for i in 1..=n {
                let xi = x.rank(i);
                sums[i][xi] += p.rank(i) as u64;
                counts[i][xi] += 1;
            }
        });
        for i in 1..=n {
            for xv in 1..=i {
                let mean = rat(sums[i][xv] as i64, counts[i][xv] as i64);
                assert_eq!(
                    mean,
                    expected_final_rank(n, i, xv).unwrap(),
                    "n={n} i={i} x={xv}"
                );
            }
        }
    }
}

#[test]
fn drawn_streams_induce_uniform_permutations() {
    // Frequency of each induced permutation within 3 standard errors of 1/n!.
    for (n, draws) in [(3usize, 60_000u64), (4, 120_000)] {
        let cells = factorial(n);
        let mut counts = std::collections::HashMap::<Vec<usize>, u64>::new();
        let mut rng = RandomSource::new(20_240_817);
        for _ in 0..draws {
            let x = draw_relative_ranks(n, &mut rng).unwrap();
            *counts
                .entry(to_final_ranks(&x).final_ranks().to_vec())
                .or_default() += 1;
        }
        assert_eq!(counts.len() as u64, cells, "every permutation must occur");
        let p = 1.0 / cells as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        for (perm, count) in counts {
            let freq = count as f64 / draws as f64;
            assert!(
                (freq - p).abs() <= 3.0 * se,
                "n={n} perm={perm:?} freq={freq} expected {p} +- {}",
                3.0 * se
            );
        }
    }
}

proptest! {
    #[test]
    fn round_trip_property(ranks in prop_stream(64)) {
        let x = RelativeRankSequence::from_ranks(ranks).unwrap();
        let p = to_final_ranks(&x);
        prop_assert!(Permutation::from_final_ranks(p.final_ranks().to_vec()).is_ok());
        prop_assert_eq!(to_relative_ranks(&p), x);
    }

    #[test]
    fn restriction_drops_exactly_one_item(ranks in prop_stream(32)) {
        prop_assume!(ranks.len() >= 2);
        let x = RelativeRankSequence::from_ranks(ranks).unwrap();
        let p = to_final_ranks(&x);
        let r = restrict(&p).unwrap();
        prop_assert_eq!(r.len(), p.len() - 1);
        let back = to_relative_ranks(&r);
        prop_assert_eq!(back.ranks(), &x.ranks()[..x.len() - 1]);
    }
}

/// Strategy for a valid relative-rank stream of length 1..=max.
fn prop_stream(max: usize) -> impl Strategy<Value = Vec<usize>> {
    (1..=max).prop_flat_map(|n| {
        (1..=n)
            .map(|i| (1..=i).boxed())
            .collect::<Vec<_>>()
            .prop_map(|v| v.to_vec())
    })
}

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

#[test]
fn amortized_profits_telescope_to_profit() {
    for n in 2..=6 {
        let contexts: Vec<StrategyContext> = StrategyKind::ALL
            .iter()
            .map(|&k| StrategyContext::new(k, n).unwrap())
            .collect();
        for_each_stream(n, |ranks| {
            let x = stream(ranks);
            let p = to_final_ranks(&x);
            for ctx in &contexts {
                let rec = ctx.selections(&x).unwrap();
                let amortized = amortized_profits(&rec, &p).unwrap();
                assert_eq!(
                    amortized.iter().sum::<i64>(),
                    profit(&rec, &p).unwrap(),
                    "strategy={} stream={ranks:?}",
                    ctx.kind()
                );
            }
        });
    }
}

#[test]
fn op_interval_activity_probability() {
    // Interval 1 is never active; every later interval is active in exactly
    // half of all n! streams.
    for n in 2..=7 {
        let ctx = StrategyContext::new(StrategyKind::Op, n).unwrap();
        let mut active = vec![0u64; n]; // index j = interval
        for_each_stream(n, |ranks| {
            let x = stream(ranks);
            let rec = ctx.selections(&x).unwrap();
            for (j, slot) in active.iter_mut().enumerate().skip(1) {
                if rec.is_active(j) {
                    *slot += 1;
                }
            }
        });
        let total = factorial(n);
        assert_eq!(active[1], 0, "interval 1 can never be active (n={n})");
        for j in 2..n {
            assert_eq!(active[j], total / 2, "interval {j} of n={n}");
        }
    }
}

#[test]
fn op_interval_conditional_expectations() {
    // Over active streams, the mean amortized profit of interval i is
    // (n+1)/4 * i/(i+1) for even i and (n+1)/4 * (i-1)/i for odd i >= 3.
    for n in 4..=7 {
        let ctx = StrategyContext::new(StrategyKind::Op, n).unwrap();
        let mut sums = vec![0i64; n];
        let mut counts = vec![0u64; n];
        for_each_stream(n, |ranks| {
            let x = stream(ranks);
            let p = to_final_ranks(&x);
            let rec = ctx.selections(&x).unwrap();
            let amortized = amortized_profits(&rec, &p).unwrap();
            for i in 1..n {
                if rec.is_active(i) {
                    sums[i] += amortized[i - 1];
                    counts[i] += 1;
                }
            }
        });
        for i in 2..n {
            let mean = rat(sums[i], counts[i] as i64);
            let expect = if i % 2 == 0 {
                rat(n as i64 + 1, 4) * rat(i as i64, i as i64 + 1)
            } else {
                rat(n as i64 + 1, 4) * rat(i as i64 - 1, i as i64)
            };
            assert_eq!(mean, expect, "n={n} interval={i}");
        }
    }
}

#[test]
fn single_pair_selects_at_most_one_pair_and_never_lows_last() {
    for n in 1..=6 {
        let ctx = StrategyContext::new(StrategyKind::SingleOptimal, n).unwrap();
        for_each_stream(n, |ranks| {
            let x = stream(ranks);
            let rec = ctx.selections(&x).unwrap();
            assert!(rec.pairs().len() <= 1);
            for &(l, _) in rec.pairs() {
                assert!(l < n, "low at the last step can never close");
            }
        });
    }
}

#[test]
fn offline_dominates_every_online_strategy_pointwise() {
    for n in 2..=6 {
        let online: Vec<StrategyContext> = StrategyKind::ONLINE
            .iter()
            .map(|&k| StrategyContext::new(k, n).unwrap())
            .collect();
        for_each_stream(n, |ranks| {
            let x = stream(ranks);
            let p = to_final_ranks(&x);
            let best = profit(&offline_select(&p), &p).unwrap();
            for ctx in &online {
                let got = profit(&ctx.selections(&x).unwrap(), &p).unwrap();
                assert!(
                    best >= got,
                    "offline {best} < {} {got} on {ranks:?}",
                    ctx.kind()
                );
            }
        });
    }
}

#[test]
fn half_split_formula_matches_enumeration() {
    for n in 2..=7 {
        let ctx = StrategyContext::new(StrategyKind::HalfSplit, n).unwrap();
        let mut total: i64 = 0;
        for_each_stream(n, |ranks| {
            let x = stream(ranks);
            let p = to_final_ranks(&x);
            total += profit(&ctx.selections(&x).unwrap(), &p).unwrap();
        });
        let mean = Rational::new(BigInt::from(total), BigInt::from(factorial(n)));
        assert_eq!(mean, half_split_expected_profit(n).unwrap(), "n={n}");
    }
}

#[test]
fn half_split_is_inferior_to_the_optimum() {
    use rankdiff::thresholds::single_pair_value;
    for n in 2..=30 {
        assert!(
            half_split_expected_profit(n).unwrap() <= single_pair_value(n).unwrap(),
            "n={n}"
        );
    }
}

proptest! {
    #[test]
    fn records_are_valid_and_telescoping_holds(ranks in prop_stream(40)) {
        let x = RelativeRankSequence::from_ranks(ranks).unwrap();
        let n = x.len();
        let p = to_final_ranks(&x);
        for kind in StrategyKind::ALL {
            if kind == StrategyKind::HalfSplit && n < 2 {
                continue;
            }
            let ctx = StrategyContext::new(kind, n).unwrap();
            let rec = ctx.selections(&x).unwrap();
            let total = profit(&rec, &p).unwrap();
            if n >= 2 {
                let amortized = amortized_profits(&rec, &p).unwrap();
                prop_assert_eq!(amortized.iter().sum::<i64>(), total);
            } else {
                prop_assert_eq!(total, 0);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

#[test]
fn harmonic_sum_identity_holds() {
    for k in 0..=200 {
        assert_eq!(sum_identity_lhs(k), sum_identity_rhs(k), "k={k}");
    }
}

#[test]
fn op_profit_equals_interval_sum_form() {
    // (n+1)/8 * (sum_{k<=floor((n-2)/2)} 2k/(2k+1) + sum_{k<=floor((n-1)/2)} 2k/(2k+1))
    let max_n = 500usize;
    let cache = HarmonicCache::up_to(max_n);
    let mut prefix = vec![rat_int(0)];
    for k in 1..=(max_n / 2) as i64 {
        let next = prefix.last().unwrap() + rat(2 * k, 2 * k + 1);
        prefix.push(next);
    }
    for n in 1..=max_n {
        let expect = rat(n as i64 + 1, 8)
            * (&prefix[(n.saturating_sub(2)) / 2] + &prefix[(n - 1) / 2]);
        assert_eq!(cache.op_expected_profit(n), expect, "n={n}");
    }
}

#[test]
fn op_profit_respects_harmonic_bounds() {
    // (n+1)(n - H_n - ln 2)/8 <= E <= (n+1)(n - H_n + 1)/8; the lower bound
    // is checked against a rational slightly below ln 2, which only makes it
    // stricter.
    let ln2_low = rat(693_147, 1_000_000);
    let cache = HarmonicCache::up_to(500);
    for n in 3..=500 {
        let e = cache.op_expected_profit(n);
        let base = rat_int(n as i64) - cache.get(n);
        let lower = rat(n as i64 + 1, 8) * (&base - &ln2_low);
        let upper = rat(n as i64 + 1, 8) * (&base + rat_int(1));
        assert!(e >= lower, "lower bound at n={n}");
        assert!(e <= upper, "upper bound at n={n}");
    }
}

#[test]
fn competitive_ratio_decreases_toward_four_thirds() {
    let cache = HarmonicCache::up_to(2000);
    let four_thirds = rat(4, 3);
    let mut prev: Option<Rational> = None;
    for n in 4..=2000 {
        let ratio = rankdiff::closedform::offline_expected_profit(n)
            / cache.op_expected_profit(n);
        assert!(ratio > four_thirds, "ratio must stay above 4/3 at n={n}");
        if let Some(p) = prev {
            assert!(p >= ratio, "ratio must not increase at n={n}");
        }
        prev = Some(ratio);
    }
}

#[test]
fn one_shot_helpers_agree_with_cache() {
    let cache = HarmonicCache::up_to(50);
    for n in 1..=50 {
        assert_eq!(op_expected_profit(n), cache.op_expected_profit(n));
        assert_eq!(harmonic(n), cache.get(n));
    }
    assert_eq!(competitive_ratio(4).unwrap(), rat_int(3));
}
