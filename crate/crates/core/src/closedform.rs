//! Closed-form expected profits for the multi-pair game, exact.

use num::bigint::BigInt;
use num::{Integer, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{rat, rat_int, Rational};

/// Prefix cache of harmonic numbers `H_0..H_k` as exact rationals.
///
/// Stored as integer numerators over the running least common denominator,
/// so building the cache is pure machine-word-by-big-integer arithmetic;
/// entries reduce to canonical rationals on access.
#[derive(Debug, Clone)]
pub struct HarmonicCache {
    nums: Vec<BigInt>,
    dens: Vec<BigInt>,
}

impl HarmonicCache {
    /// Computes `H_0..H_k`.
    pub fn up_to(k: usize) -> Self {
        let mut nums = Vec::with_capacity(k + 1);
        let mut dens = Vec::with_capacity(k + 1);
        nums.push(BigInt::zero());
        dens.push(BigInt::from(1u32));
        let mut num = BigInt::zero();
        let mut den = BigInt::from(1u32);
        for j in 1..=k as u64 {
            // H += 1/j over den' = den * j / g with g = gcd(den, j).
            let g = gcd_small(&den, j);
            num = num * (j / g) + &den / g;
            den *= j / g;
            nums.push(num.clone());
            dens.push(den.clone());
        }
        Self { nums, dens }
    }

    pub fn max_index(&self) -> usize {
        self.nums.len() - 1
    }

    /// `H_k`; panics if `k` is beyond the cache.
    pub fn get(&self, k: usize) -> Rational {
        Rational::new(self.nums[k].clone(), self.dens[k].clone())
    }

    /// Expected total profit of the opportunistic multi-pair strategy over a
    /// stream of `n` items, using harmonic numbers from this cache
    /// (requires `max_index() >= n`).
    ///
    /// Even `n`: `(n+1)/8 * (n + H_{(n-2)/2} - 2 H_{n-1})`.
    /// Odd `n`:  `(n+1)/8 * (n + H_{(n-1)/2} - 2 H_n + 1/n)`.
    /// `n = 1` has no interval and yields 0 (the odd formula agrees).
    pub fn op_expected_profit(&self, n: usize) -> Rational {
        if n <= 1 {
            return rat_int(0);
        }
        let scale = rat(n as i64 + 1, 8);
        let body = if n % 2 == 0 {
            rat_int(n as i64) + self.get((n - 2) / 2) - rat_int(2) * self.get(n - 1)
        } else {
            rat_int(n as i64) + self.get((n - 1) / 2) - rat_int(2) * self.get(n)
                + rat(1, n as i64)
        };
        scale * body
    }
}

/// `gcd(den, j)` for machine-word `j >= 1`, via one big-integer remainder.
fn gcd_small(den: &BigInt, j: u64) -> u64 {
    let r = (den % j).to_u64().expect("remainder below a u64 modulus");
    if r == 0 {
        j
    } else {
        r.gcd(&j)
    }
}

/// Exact harmonic number `H_k = 1 + 1/2 + ... + 1/k` (`H_0 = 0`).
pub fn harmonic(k: usize) -> Rational {
    let mut num = BigInt::zero();
    let mut den = BigInt::from(1u32);
    for j in 1..=k as u64 {
        let g = gcd_small(&den, j);
        num = num * (j / g) + &den / g;
        den *= j / g;
    }
    Rational::new(num, den)
}

/// Direct evaluation of `sum_{i=1..k} 2i/(2i+1)`.
pub fn sum_identity_lhs(k: usize) -> Rational {
    let mut num = BigInt::zero();
    let mut den = BigInt::from(1u32);
    for i in 1..=k as u64 {
        // += 2i/(2i+1)
        let q = 2 * i + 1;
        let g = gcd_small(&den, q);
        num = num * (q / g) + (&den / g) * (2 * i);
        den *= q / g;
    }
    Rational::new(num, den)
}

/// Closed form of the same sum: `k + 1 + H_k/2 - H_{2k+1}`.
pub fn sum_identity_rhs(k: usize) -> Rational {
    let cache = HarmonicCache::up_to(2 * k + 1);
    rat_int(k as i64 + 1) + cache.get(k) / rat_int(2) - cache.get(2 * k + 1)
}

/// Expected total profit of the opportunistic multi-pair strategy.
pub fn op_expected_profit(n: usize) -> Rational {
    HarmonicCache::up_to(n).op_expected_profit(n)
}

/// Expected profit of the off-line optimum (select every maximal increasing
/// run): exactly `(n^2 - 1) / 6`.
pub fn offline_expected_profit(n: usize) -> Rational {
    rat(n as i64 * n as i64 - 1, 6)
}

/// Off-line over on-line expected profit; tends to 4/3 from above.
pub fn competitive_ratio(n: usize) -> Result<Rational> {
    let op = op_expected_profit(n);
    if op <= rat_int(0) {
        return Err(Error::UndefinedRatio(n));
    }
    Ok(offline_expected_profit(n) / op)
}
