//! Exact threshold and value tables for the single-pair selection game.
//!
//! Backward recursion from step `n` down to 1, entirely in exact rational
//! arithmetic:
//!
//! * `h[i]` — least relative rank worth taking as the high selection at
//!   step `i` (take iff `x_i >= h[i]`); `h[n] = 0` forces the last item.
//! * `r[i]` — expected final rank of the high selection when play starts at
//!   step `i`; `r[n] = (n+1)/2`.
//! * `l[i]` — greatest relative rank worth taking as the low selection at
//!   step `i` (take iff `x_i <= l[i]`); `l[n] = 0` forbids a last-step low.
//! * `p[i]` — expected high-minus-low rank difference under optimal play
//!   from step `i`; `p[n] = 0`.
//!
//! Floor/ceil decisions sit exactly on integer boundaries for many inputs,
//! so the tables are never computed in floating point. Internally the
//! recursion runs on raw integer numerator/denominator pairs over a shared
//! denominator, with reduction deferred to every few steps; every update is
//! a big-integer-by-machine-word operation, which keeps a full build at
//! `n = 10^4` in the sub-second range. Values are reduced to canonical
//! rationals on access.

use num::bigint::BigInt;
use num::{Integer, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{rat, Rational};

/// Steps between reductions of the shared denominator. Each step adds about
/// `3 log2(n)` bits before cancellation, so this bounds transient growth.
const REDUCE_EVERY: usize = 16;

/// Exact decision thresholds and value-to-go tables for one horizon `n`.
///
/// Immutable once built; share freely across threads.
#[derive(Debug, Clone)]
pub struct ThresholdTables {
    n: usize,
    h: Vec<u64>,
    l: Vec<u64>,
    /// Numerators of `r` and `p` over the per-step denominator `den`.
    r_num: Vec<BigInt>,
    p_num: Vec<BigInt>,
    den: Vec<BigInt>,
}

impl ThresholdTables {
    /// Builds the tables for horizon `n` by backward recursion.
    pub fn build(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("tables need n >= 1".into()));
        }
        let np1 = n as u64 + 1;

        let mut h = vec![0u64; n];
        let mut l = vec![0u64; n];
        let mut r_num = vec![BigInt::zero(); n];
        let mut p_num = vec![BigInt::zero(); n];
        let mut den = vec![BigInt::zero(); n];

        // r(n) = (n+1)/2, p(n) = 0, over shared denominator d.
        let mut rn = BigInt::from(np1);
        let mut pn = BigInt::zero();
        let mut d = BigInt::from(2u32);
        r_num[n - 1] = rn.clone();
        p_num[n - 1] = pn.clone();
        den[n - 1] = d.clone();

        for i in (1..n).rev() {
            let iu = i as u64;
            let ip1 = iu + 1;

            // h_i = ceil((i+1) r_{i+1} / (n+1)); quotient is at most n+1.
            let hi = ceil_div(&(&rn * ip1), &(&d * np1))
                .to_u64()
                .expect("threshold fits in u64");

            // l_i = floor((i+1)(r_{i+1} - p_{i+1}) / (n+1)).
            let gap = &rn - &pn; // >= 0
            let li = (&gap * ip1 / (&d * np1))
                .to_u64()
                .expect("threshold fits in u64");

            // Shared update over the new denominator d' = 2 i (i+1) d:
            //   r_i = (h-1)/i * (r - (n+1) h / (2(i+1))) + (n+1)/2
            //       = [ (h-1)(2(i+1) r_num - (n+1) h d) + (n+1) i (i+1) d ] / d'
            //   p_i = p + l/i * (r - p - (n+1)(l+1)/(2(i+1)))
            //       = [ l (2(i+1) gap - (n+1)(l+1) d) + 2 i (i+1) p_num ] / d'
            let two_ip1_r: BigInt = &rn * (2 * ip1);
            let new_rn =
                (two_ip1_r - &d * (np1 * hi)) * (hi - 1) + &d * (np1 * iu * ip1);
            let new_pn =
                (&gap * (2 * ip1) - &d * (np1 * (li + 1))) * li + &pn * (2 * iu * ip1);
            rn = new_rn;
            pn = new_pn;
            d *= 2 * iu * ip1;

            if i % REDUCE_EVERY == 0 {
                let g = rn.gcd(&pn).gcd(&d);
                if !g.is_zero() {
                    rn /= &g;
                    pn /= &g;
                    d /= &g;
                }
            }

            h[i - 1] = hi;
            l[i - 1] = li;
            r_num[i - 1] = rn.clone();
            p_num[i - 1] = pn.clone();
            den[i - 1] = d.clone();
        }

        Ok(Self {
            n,
            h,
            l,
            r_num,
            p_num,
            den,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// High-selection threshold at 1-based step `i`; may exceed `i`, which
    /// encodes "never select here".
    pub fn h(&self, i: usize) -> u64 {
        self.h[i - 1]
    }

    /// Expected final rank of the high selection from step `i` on.
    pub fn r(&self, i: usize) -> Rational {
        Rational::new(self.r_num[i - 1].clone(), self.den[i - 1].clone())
    }

    /// Low-selection threshold at 1-based step `i` (0 means never).
    pub fn l(&self, i: usize) -> u64 {
        self.l[i - 1]
    }

    /// Expected pair profit under optimal play from step `i` on.
    pub fn p(&self, i: usize) -> Rational {
        Rational::new(self.p_num[i - 1].clone(), self.den[i - 1].clone())
    }
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    debug_assert!(!a.is_negative() && b.is_positive());
    let (q, r) = a.div_rem(b);
    if r.is_zero() {
        q
    } else {
        q + 1
    }
}

/// Builds the full table set for horizon `n`.
pub fn build_tables(n: usize) -> Result<ThresholdTables> {
    ThresholdTables::build(n)
}

/// Optimal expected final rank of a single high selection over `n` items.
pub fn secretary_value(n: usize) -> Result<Rational> {
    Ok(ThresholdTables::build(n)?.r(1))
}

/// Optimal expected profit of a single low/high pair over `n` items.
pub fn single_pair_value(n: usize) -> Result<Rational> {
    Ok(ThresholdTables::build(n)?.p(1))
}

/// Gap `(n+1) - r(1)` between a certain last pick of the best item and the
/// optimal on-line high selection; tends to a constant just under 3.87 as
/// `n` grows.
pub fn estimate_c(n: usize) -> Result<Rational> {
    Ok(rat(n as i64 + 1, 1) - secretary_value(n)?)
}
