//! Seeded Monte Carlo estimation of strategy profits.
//!
//! Trial `t` always draws from substream `t` of the seed, and per-trial
//! profits are accumulated as exact integers (sum and sum of squares) in
//! fixed-size batches, so results are bit-identical for any worker count
//! and only the final summary statistics touch floating point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permstream::{draw_relative_ranks, to_final_ranks, RandomSource};
use crate::strategies::{profit, StrategyContext, StrategyKind};

/// Trials per scheduling unit. Fixed so that batching, and therefore
/// the result, never depends on the thread count.
const BATCH_TRIALS: u64 = 1024;

/// Summary statistics of one simulated strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfitSummary {
    pub strategy: String,
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    /// Sample mean profit.
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// `1.96 * sqrt(variance / trials)`.
    pub ci95: f64,
}

#[derive(Clone, Copy, Default)]
struct Accumulator {
    sum: i128,
    sum_sq: i128,
}

impl Accumulator {
    fn add(&mut self, profit: i64) {
        let p = profit as i128;
        self.sum += p;
        self.sum_sq += p * p;
    }

    fn merge(mut self, other: Accumulator) -> Accumulator {
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
        self
    }

    fn summarize(&self, strategy: &str, n: usize, trials: u64, seed: u64) -> ProfitSummary {
        let count = trials as f64;
        let sum = self.sum as f64;
        let sum_sq = self.sum_sq as f64;
        let mean = sum / count;
        let variance = if trials > 1 {
            ((sum_sq - sum * sum / count) / (count - 1.0)).max(0.0)
        } else {
            0.0
        };
        ProfitSummary {
            strategy: strategy.to_string(),
            n,
            trials,
            seed,
            mean,
            variance,
            ci95: 1.96 * (variance / count).sqrt(),
        }
    }
}

/// Estimates the expected profit of one strategy over `trials` independent
/// streams of length `n`.
pub fn simulate(
    strategy: StrategyKind,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<ProfitSummary> {
    Ok(compare(&[strategy], n, trials, seed)?.pop().expect("one summary"))
}

/// Evaluates several strategies on *the same* sampled streams (common random
/// numbers): trial `t` draws one stream from substream `t` and scores every
/// strategy on it, which makes paired comparisons low-variance.
pub fn compare(
    strategies: &[StrategyKind],
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<ProfitSummary>> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be >= 1".into()));
    }
    let contexts: Vec<StrategyContext> = strategies
        .iter()
        .map(|&kind| StrategyContext::new(kind, n))
        .collect::<Result<_>>()?;

    let batches = trials.div_ceil(BATCH_TRIALS);
    let totals: Vec<Accumulator> = (0..batches)
        .into_par_iter()
        .map(|batch| {
            let lo = batch * BATCH_TRIALS;
            let hi = (lo + BATCH_TRIALS).min(trials);
            let mut accs = vec![Accumulator::default(); contexts.len()];
            for t in lo..hi {
                let mut rng = RandomSource::substream(seed, t);
                let x = draw_relative_ranks(n, &mut rng)?;
                let p = to_final_ranks(&x);
                for (ctx, acc) in contexts.iter().zip(accs.iter_mut()) {
                    let rec = ctx.selections(&x)?;
                    acc.add(profit(&rec, &p)?);
                }
            }
            Ok(accs)
        })
        .try_reduce(
            || vec![Accumulator::default(); contexts.len()],
            |a, b| {
                Ok(a.into_iter()
                    .zip(b)
                    .map(|(x, y)| x.merge(y))
                    .collect())
            },
        )?;

    Ok(contexts
        .iter()
        .zip(totals)
        .map(|(ctx, acc)| acc.summarize(ctx.kind().name(), n, trials, seed))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_stream_has_zero_profit() {
        let s = simulate(StrategyKind::Op, 1, 100, 7).unwrap();
        assert_eq!(s.mean, 0.0);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.ci95, 0.0);
    }

    #[test]
    fn identical_arguments_give_identical_summaries() {
        let a = simulate(StrategyKind::Op, 12, 3000, 99).unwrap();
        let b = simulate(StrategyKind::Op, 12, 3000, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn compare_single_matches_simulate() {
        let via_compare = compare(&[StrategyKind::HalfSplit], 8, 2000, 3).unwrap();
        let direct = simulate(StrategyKind::HalfSplit, 8, 2000, 3).unwrap();
        assert_eq!(via_compare, vec![direct]);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(
            simulate(StrategyKind::Op, 5, 0, 1),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn ci_definition_holds() {
        let s = simulate(StrategyKind::Op, 9, 5000, 11).unwrap();
        let expect = 1.96 * (s.variance / s.trials as f64).sqrt();
        assert_eq!(s.ci95, expect);
        assert!(s.variance >= 0.0);
    }
}
