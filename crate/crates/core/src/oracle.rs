//! Independent ground-truth engines: exhaustive enumeration over all `n!`
//! input streams and exact backward-induction dynamic programs.
//!
//! These never consult the closed forms or the threshold recursions they are
//! used to check. The DP's state sufficiency rests on the amortized
//! accounting: crediting interval `i` with `r_{i+1} - r_i` while a pair is
//! open makes the expected reward of step `i`, conditioned on ending it in
//! the holding state, equal to
//!
//! ```text
//! E[r_{i+1}] - E[r_i | x_i] = (n+1) * (1/2 - x_i/(i+1)),
//! ```
//!
//! which depends on nothing but `(i, x_i, holding)`. Backward induction over
//! those states therefore dominates every deterministic move function, with
//! no need to search the doubly-exponential space of move functions.

use num::bigint::BigInt;
use num::{Integer, Zero};
use rayon::prelude::*;

use crate::closedform;
use crate::error::{Error, Result};
use crate::permstream::{to_final_ranks, RelativeRankSequence};
use crate::rational::{format_rational, rat, rat_int, Rational};
use crate::strategies::{profit, MoveFunction, StrategyContext, StrategyKind};
use crate::thresholds;

/// Largest `n` for which all `n!` streams are enumerated (10! ~ 3.6M).
pub const MAX_ENUM_N: usize = 10;

/// Largest `n` for holding-set construction (enumerates `i!` prefixes).
pub const MAX_HOLDING_N: usize = 8;

// ---------------------------------------------------------------------------
// Stream enumeration
// ---------------------------------------------------------------------------

/// Calls `f` with every relative-rank stream of length `n`, in odometer
/// order, with positions `x_1..=x_prefix` pinned to `prefix`.
fn for_each_stream_with_prefix(
    n: usize,
    prefix: &[usize],
    mut f: impl FnMut(&[usize]),
) {
    let fixed = prefix.len();
    debug_assert!(fixed <= n);
    let mut x = vec![1usize; n];
    x[..fixed].copy_from_slice(prefix);
    loop {
        f(&x);
        // Advance the odometer over positions fixed..n (digit k runs 1..=k+1).
        let mut k = n;
        loop {
            if k == fixed {
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

fn factorial_big(n: usize) -> BigInt {
    (1..=n as u64).map(BigInt::from).product()
}

/// Partition prefixes covering the stream space: the first two free
/// coordinates (`x_2`, `x_3`) when present, else a single serial partition.
fn enumeration_partitions(n: usize) -> Vec<Vec<usize>> {
    match n {
        0 | 1 => vec![vec![1; n]],
        2 => vec![vec![1, 1], vec![1, 2]],
        _ => {
            let mut parts = Vec::with_capacity(6);
            for x2 in 1..=2 {
                for x3 in 1..=3 {
                    parts.push(vec![1, x2, x3]);
                }
            }
            parts
        }
    }
}

/// Result of an exact expectation over all `n!` equally likely streams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationReport {
    pub n: usize,
    pub strategy: String,
    /// Sum of realized profits over every stream.
    pub total_profit: BigInt,
    /// Number of streams, `n!`.
    pub permutations: BigInt,
    /// `total_profit / permutations`.
    pub expectation: Rational,
}

/// Runs `strategy` on every length-`n` stream and averages realized profit
/// exactly. Partitions are processed in parallel; partial sums are exact
/// integers, so the result is independent of scheduling.
pub fn enumerate_expected_profit(
    strategy: StrategyKind,
    n: usize,
) -> Result<EnumerationReport> {
    if n > MAX_ENUM_N {
        return Err(Error::ResourceBound { n, max: MAX_ENUM_N });
    }
    if n == 0 {
        return Err(Error::InvalidSize("enumeration needs n >= 1".into()));
    }
    let ctx = StrategyContext::new(strategy, n)?;
    let total: i128 = enumeration_partitions(n)
        .par_iter()
        .map(|prefix| {
            let mut sum: i128 = 0;
            let mut err = None;
            for_each_stream_with_prefix(n, prefix, |ranks| {
                if err.is_some() {
                    return;
                }
                let x = RelativeRankSequence::from_ranks_unchecked(ranks.to_vec());
                match ctx.selections(&x) {
                    Ok(rec) => {
                        let p = to_final_ranks(&x);
                        sum += profit(&rec, &p).expect("record and stream share n") as i128;
                    }
                    Err(e) => err = Some(e),
                }
            });
            match err {
                Some(e) => Err(e),
                None => Ok(sum),
            }
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;

    let permutations = factorial_big(n);
    let total_profit = BigInt::from(total);
    let expectation = Rational::new(total_profit.clone(), permutations.clone());
    Ok(EnumerationReport {
        n,
        strategy: strategy.name().to_string(),
        total_profit,
        permutations,
        expectation,
    })
}

/// Exact expectation of the off-line *single*-pair optimum
/// `max(0, max_{l<h} (r_h - r_l))`; the off-line player may abstain.
pub fn offline_single_pair_expectation(n: usize) -> Result<Rational> {
    if n > MAX_ENUM_N {
        return Err(Error::ResourceBound { n, max: MAX_ENUM_N });
    }
    if n == 0 {
        return Err(Error::InvalidSize("enumeration needs n >= 1".into()));
    }
    let total: i128 = enumeration_partitions(n)
        .par_iter()
        .map(|prefix| {
            let mut sum: i128 = 0;
            for_each_stream_with_prefix(n, prefix, |ranks| {
                let x = RelativeRankSequence::from_ranks_unchecked(ranks.to_vec());
                let p = to_final_ranks(&x);
                let r = p.final_ranks();
                let mut best = 0i64;
                let mut min_before = i64::MAX;
                for &v in r {
                    let v = v as i64;
                    if min_before != i64::MAX {
                        best = best.max(v - min_before);
                    }
                    min_before = min_before.min(v);
                }
                sum += best as i128;
            });
            sum
        })
        .sum();
    Ok(Rational::new(BigInt::from(total), factorial_big(n)))
}

// ---------------------------------------------------------------------------
// Dynamic programs
// ---------------------------------------------------------------------------

/// Steps between reductions of the DP's shared denominator.
const DP_REDUCE_EVERY: usize = 16;

/// Value table of the multi-pair DP: `free(i)`/`holding(i)` is the optimal
/// expected future amortized profit from step `i` on, entering the step in
/// that state. Index `n+1` is the terminal 0.
#[derive(Debug, Clone)]
pub struct MultiDpTable {
    n: usize,
    values: DpValues,
}

impl MultiDpTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Value of the free state entering step `i` (1-based, up to `n+1`).
    pub fn free(&self, i: usize) -> Rational {
        self.values.first(i)
    }

    /// Value of the holding state entering step `i`.
    pub fn holding(&self, i: usize) -> Rational {
        self.values.second(i)
    }

    /// Optimal expected total profit of the whole game.
    pub fn optimal(&self) -> Rational {
        self.free(1)
    }
}

/// Value table of the single-pair DP, phases before-low / holding / done
/// (done is identically 0 and not stored).
#[derive(Debug, Clone)]
pub struct SingleDpTable {
    n: usize,
    values: DpValues,
}

impl SingleDpTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn before_low(&self, i: usize) -> Rational {
        self.values.first(i)
    }

    pub fn holding(&self, i: usize) -> Rational {
        self.values.second(i)
    }

    /// The done phase has no future reward.
    pub fn done(&self, _i: usize) -> Rational {
        rat_int(0)
    }

    pub fn optimal(&self) -> Rational {
        self.before_low(1)
    }
}

/// Two value columns stored as integer numerators over a per-step shared
/// denominator; reduced to canonical rationals on access.
#[derive(Debug, Clone)]
struct DpValues {
    first_num: Vec<BigInt>,
    second_num: Vec<BigInt>,
    den: Vec<BigInt>,
}

impl DpValues {
    fn first(&self, i: usize) -> Rational {
        Rational::new(self.first_num[i - 1].clone(), self.den[i - 1].clone())
    }

    fn second(&self, i: usize) -> Rational {
        Rational::new(self.second_num[i - 1].clone(), self.den[i - 1].clone())
    }
}

/// Backward induction shared by both games. For every step `i` and every
/// observable rank `x`, takes the exact pointwise best of the two legal
/// moves. The step reward for ending step `i < n` in the holding state is
/// `(n+1)(1/2 - x/(i+1))`; scaled to the common denominator
/// `e = 2(i+1) d` it is `a - b x` with `a = (n+1)(i+1) d`, `b = 2(n+1) d`.
///
/// `single` switches the holding comparison from "high returns to the free
/// value" to "high retires the pair (value 0)", and the first column from
/// the free state to the before-low state.
fn dp_backward(n: usize, single: bool) -> Result<DpValues> {
    if n == 0 {
        return Err(Error::InvalidSize("dp needs n >= 1".into()));
    }
    let np1 = n as u64 + 1;
    let mut first_num = vec![BigInt::zero(); n + 1];
    let mut second_num = vec![BigInt::zero(); n + 1];
    let mut den = vec![BigInt::zero(); n + 1];
    den[n] = BigInt::from(1u32);

    // v1 = free (or before-low), v2 = holding, over shared denominator d.
    let mut v1 = BigInt::zero();
    let mut v2 = BigInt::zero();
    let mut d = BigInt::from(1u32);

    for i in (1..=n).rev() {
        let iu = i as u64;
        let ip1 = iu + 1;
        // Everything below is over e = 2(i+1) d.
        let v1_scaled = &v1 * (2 * ip1);
        let v2_scaled = &v2 * (2 * ip1);
        let (a, b) = if i < n {
            (&d * (np1 * ip1), &d * (2 * np1))
        } else {
            (BigInt::zero(), BigInt::zero()) // no interval n, reward 0
        };

        let mut sum_first = BigInt::zero();
        let mut sum_second = BigInt::zero();
        let mut stay = &a - &b + &v2_scaled; // reward(x) + v_holding at x = 1
        let zero = BigInt::zero();
        for x in 1..=i {
            if x > 1 {
                stay -= &b;
            }
            // First column: wait (keep v1) or open a pair (collect, hold).
            sum_first += (&stay).max(&v1_scaled);
            // Holding: wait (collect, keep holding) or close the pair, which
            // returns to the free state in the multi game and retires the
            // strategy (value 0) in the single game.
            let close = if single { &zero } else { &v1_scaled };
            sum_second += (&stay).max(close);
        }

        v1 = sum_first;
        v2 = sum_second;
        d *= 2 * iu * ip1;
        if i % DP_REDUCE_EVERY == 0 {
            let g = v1.gcd(&v2).gcd(&d);
            v1 /= &g;
            v2 /= &g;
            d /= &g;
        }
        first_num[i - 1] = v1.clone();
        second_num[i - 1] = v2.clone();
        den[i - 1] = d.clone();
    }

    Ok(DpValues {
        first_num,
        second_num,
        den,
    })
}

/// Backward induction for the multi-pair game over states
/// `(step, free|holding)`.
pub fn dp_multi_table(n: usize) -> Result<MultiDpTable> {
    Ok(MultiDpTable {
        n,
        values: dp_backward(n, false)?,
    })
}

/// Optimal expected total profit over all deterministic multi-pair move
/// functions.
pub fn dp_optimal_multi(n: usize) -> Result<Rational> {
    Ok(dp_multi_table(n)?.optimal())
}

/// Backward induction for the single-pair game over states
/// `(step, before-low|holding|done)`: at most one low and one high.
pub fn dp_single_table(n: usize) -> Result<SingleDpTable> {
    Ok(SingleDpTable {
        n,
        values: dp_backward(n, true)?,
    })
}

/// Optimal expected profit over all deterministic single-pair move functions.
pub fn dp_optimal_single(n: usize) -> Result<Rational> {
    Ok(dp_single_table(n)?.optimal())
}

// ---------------------------------------------------------------------------
// Holding sets
// ---------------------------------------------------------------------------

/// Expected amortized profit of interval `i` for an on-line strategy,
/// evaluated through its holding set: the set of `i`-item input prefixes
/// after which the strategy holds an open pair. With `L` that set and
/// `rho(i)` the relative rank of the last arrival,
///
/// ```text
/// E[A(i)] = (n+1)/i! * ( |L|/2 - (1/(i+1)) * sum_{rho in L} rho(i) ).
/// ```
pub fn holding_set_profit(strategy: StrategyKind, n: usize, i: usize) -> Result<Rational> {
    if n > MAX_HOLDING_N {
        return Err(Error::ResourceBound {
            n,
            max: MAX_HOLDING_N,
        });
    }
    if i < 1 || i >= n {
        return Err(Error::InvalidInput(format!(
            "interval {i} out of range 1..={}",
            n.saturating_sub(1)
        )));
    }
    if !strategy.is_online() {
        return Err(Error::InvalidInput(
            "holding sets are defined for on-line strategies only".into(),
        ));
    }
    let ctx = StrategyContext::new(strategy, n)?;

    let mut holding_count: u64 = 0;
    let mut last_rank_sum: u64 = 0;
    for_each_stream_with_prefix(i, &[], |ranks| {
        let mut machine = ctx.machine().expect("on-line strategy");
        for (idx, &x) in ranks.iter().enumerate() {
            machine.next_move(idx + 1, x);
        }
        if machine.holding() {
            holding_count += 1;
            last_rank_sum += ranks[i - 1] as u64;
        }
    });

    let i_fact = factorial_big(i);
    let np1 = rat_int(n as i64 + 1);
    let inner = rat(holding_count as i64, 2)
        - rat(last_rank_sum as i64, i as i64 + 1);
    Ok(np1 / Rational::from_integer(i_fact) * inner)
}

// ---------------------------------------------------------------------------
// Verification suite
// ---------------------------------------------------------------------------

/// One named check of the verification suite.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn equality(name: String, expected: &Rational, actual: &Rational) -> Self {
        let passed = expected == actual;
        let detail = if passed {
            format!("value {}", format_rational(expected))
        } else {
            format!(
                "expected {} got {}",
                format_rational(expected),
                format_rational(actual)
            )
        };
        Self {
            name,
            passed,
            detail,
        }
    }

    fn dominance(name: String, upper: &Rational, lower: &Rational) -> Self {
        let passed = upper >= lower;
        Self {
            name,
            detail: format!(
                "{} vs {}",
                format_rational(upper),
                format_rational(lower)
            ),
            passed,
        }
    }
}

/// Full oracle suite report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct VerificationReport {
    pub max_n: usize,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Cross-checks every formula and both optimality theorems for all
/// `n <= max_n` (capped at the enumeration bound).
pub fn run_verification(max_n: usize) -> Result<VerificationReport> {
    let max_n = max_n.min(MAX_ENUM_N).max(1);
    let mut checks = Vec::new();

    for n in 1..=max_n {
        let op_enum = enumerate_expected_profit(StrategyKind::Op, n)?.expectation;
        checks.push(CheckResult::equality(
            format!("op enumeration = multi-pair closed form (n={n})"),
            &closedform::op_expected_profit(n),
            &op_enum,
        ));

        let off_enum = enumerate_expected_profit(StrategyKind::Offline, n)?.expectation;
        checks.push(CheckResult::equality(
            format!("offline enumeration = (n^2-1)/6 (n={n})"),
            &closedform::offline_expected_profit(n),
            &off_enum,
        ));

        let single_enum =
            enumerate_expected_profit(StrategyKind::SingleOptimal, n)?.expectation;
        let p1 = thresholds::single_pair_value(n)?;
        checks.push(CheckResult::equality(
            format!("single-optimal enumeration = table value (n={n})"),
            &p1,
            &single_enum,
        ));

        let dp_multi = dp_optimal_multi(n)?;
        checks.push(CheckResult::equality(
            format!("multi-pair dp optimum = op enumeration (n={n})"),
            &op_enum,
            &dp_multi,
        ));

        let dp_single = dp_optimal_single(n)?;
        checks.push(CheckResult::equality(
            format!("single-pair dp optimum = table value (n={n})"),
            &p1,
            &dp_single,
        ));

        for kind in StrategyKind::ONLINE {
            if kind == StrategyKind::HalfSplit && n < 2 {
                continue;
            }
            let e = enumerate_expected_profit(kind, n)?.expectation;
            checks.push(CheckResult::dominance(
                format!("multi-pair dp optimum >= {kind} (n={n})"),
                &dp_multi,
                &e,
            ));
        }

        if n >= 2 && n <= MAX_HOLDING_N {
            let mut sum = rat_int(0);
            for i in 1..n {
                sum += holding_set_profit(StrategyKind::Op, n, i)?;
            }
            checks.push(CheckResult::equality(
                format!("sum of op holding-set interval profits = closed form (n={n})"),
                &closedform::op_expected_profit(n),
                &sum,
            ));
        }

        let off_single = offline_single_pair_expectation(n)?;
        checks.push(CheckResult::dominance(
            format!("offline single-pair >= on-line single-pair optimum (n={n})"),
            &off_single,
            &p1,
        ));
    }

    Ok(VerificationReport { max_n, checks })
}
