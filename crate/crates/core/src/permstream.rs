//! Random-permutation input streams and their rank transforms.
//!
//! The input model: a stream of `n` relative ranks `x_1..x_n`, where `x_i`
//! is the rank of the i-th arrival among the first `i` arrivals, each `x_i`
//! independent and uniform on `{1..i}`. Such a stream determines a unique
//! permutation of final ranks `r_1..r_n` (the rank of each arrival among all
//! `n`), and drawing the `x_i` directly makes every final-rank permutation
//! equally likely.
//!
//! Everything here is 1-based to match the domain language; 0-based storage
//! is internal.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::Rational;

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// On-line input stream: entry `i` (1-based) lies in `{1..i}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelativeRankSequence {
    ranks: Vec<usize>,
}

impl RelativeRankSequence {
    /// Validates and wraps a raw rank vector.
    pub fn from_ranks(ranks: Vec<usize>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::InvalidSize(
                "relative-rank sequence must have length >= 1".into(),
            ));
        }
        for (idx, &x) in ranks.iter().enumerate() {
            let i = idx + 1;
            if x < 1 || x > i {
                return Err(Error::InvalidInput(format!(
                    "relative rank at step {i} is {x}, must be in 1..={i}"
                )));
            }
        }
        Ok(Self { ranks })
    }

    /// Length `n` of the stream.
    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        false // length >= 1 by construction
    }

    /// Relative rank at 1-based step `i`.
    pub fn rank(&self, i: usize) -> usize {
        self.ranks[i - 1]
    }

    /// All ranks, index 0 holding step 1.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Parses the one-line comma-separated form, e.g. `"1,1,2"`.
    pub fn parse(s: &str) -> Result<Self> {
        Self::from_ranks(parse_csv_ints(s)?)
    }

    pub(crate) fn from_ranks_unchecked(ranks: Vec<usize>) -> Self {
        debug_assert!(Self::from_ranks(ranks.clone()).is_ok());
        Self { ranks }
    }
}

impl std::fmt::Display for RelativeRankSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write_csv_ints(f, &self.ranks)
    }
}

/// Final ranks `r_1..r_n`: a bijection onto `{1..n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    final_ranks: Vec<usize>,
}

impl Permutation {
    /// Validates that the vector is a bijection onto `{1..n}`.
    pub fn from_final_ranks(final_ranks: Vec<usize>) -> Result<Self> {
        if final_ranks.is_empty() {
            return Err(Error::InvalidSize(
                "permutation must have length >= 1".into(),
            ));
        }
        let n = final_ranks.len();
        let mut seen = vec![false; n + 1];
        for &r in &final_ranks {
            if r < 1 || r > n || seen[r] {
                return Err(Error::InvalidInput(format!(
                    "final ranks are not a bijection onto 1..={n} (offending value {r})"
                )));
            }
            seen[r] = true;
        }
        Ok(Self { final_ranks })
    }

    pub fn len(&self) -> usize {
        self.final_ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Final rank of the item arriving at 1-based step `i`.
    pub fn rank(&self, i: usize) -> usize {
        self.final_ranks[i - 1]
    }

    pub fn final_ranks(&self) -> &[usize] {
        &self.final_ranks
    }

    /// Parses the one-line comma-separated form, e.g. `"3,1,2"`.
    pub fn parse(s: &str) -> Result<Self> {
        Self::from_final_ranks(parse_csv_ints(s)?)
    }

    pub(crate) fn from_final_ranks_unchecked(final_ranks: Vec<usize>) -> Self {
        debug_assert!(Self::from_final_ranks(final_ranks.clone()).is_ok());
        Self { final_ranks }
    }
}

impl std::fmt::Display for Permutation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write_csv_ints(f, &self.final_ranks)
    }
}

fn parse_csv_ints(s: &str) -> Result<Vec<usize>> {
    s.trim()
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("malformed integer `{t}`")))
        })
        .collect()
}

fn write_csv_ints(f: &mut std::fmt::Formatter<'_>, vals: &[usize]) -> std::fmt::Result {
    for (k, v) in vals.iter().enumerate() {
        if k > 0 {
            write!(f, ",")?;
        }
        write!(f, "{v}")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Random source
// ---------------------------------------------------------------------------

/// Seeded, splittable random source.
///
/// Built on ChaCha8 with its 2^64 independent streams: `substream(seed, t)`
/// gives trial `t` of a simulation its own stream, so serial and parallel
/// runs draw identical values no matter how trials are scheduled.
#[derive(Debug, Clone)]
pub struct RandomSource {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RandomSource {
    /// Substream 0 of `seed`.
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Independent substream `stream` of `seed`.
    pub fn substream(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw from `1..=bound`.
    fn draw(&mut self, bound: usize) -> usize {
        self.rng.random_range(1..=bound)
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Draws a stream of `n` relative ranks, each uniform on `{1..i}`.
pub fn draw_relative_ranks(n: usize, rng: &mut RandomSource) -> Result<RelativeRankSequence> {
    if n == 0 {
        return Err(Error::InvalidSize("cannot draw a stream of length 0".into()));
    }
    let ranks = (1..=n).map(|i| rng.draw(i)).collect();
    Ok(RelativeRankSequence::from_ranks_unchecked(ranks))
}

/// Materializes the unique permutation of final ranks consistent with the
/// stream: for every `i`, the rank of item `i` among items `1..=i` is `x_i`.
///
/// Equivalent to the insertion view (item `i` displaces upward every earlier
/// item whose current rank is `>= x_i`): processing arrivals last-to-first,
/// item `i` receives the `x_i`-th smallest final rank not yet assigned.
/// An order-statistics tree makes this O(n log n).
pub fn to_final_ranks(x: &RelativeRankSequence) -> Permutation {
    let n = x.len();
    let mut free = FenwickSet::full(n);
    let mut out = vec![0usize; n];
    for i in (1..=n).rev() {
        let r = free.take_kth(x.rank(i));
        out[i - 1] = r;
    }
    Permutation::from_final_ranks_unchecked(out)
}

/// Recovers the relative-rank stream of a permutation: `x_i` is the number
/// of items among the first `i` whose final rank is `<= r_i`.
/// Exact inverse of [`to_final_ranks`].
pub fn to_relative_ranks(p: &Permutation) -> RelativeRankSequence {
    let n = p.len();
    let mut seen = FenwickSet::empty(n);
    let mut out = Vec::with_capacity(n);
    for i in 1..=n {
        let r = p.rank(i);
        out.push(seen.count_below(r) + 1);
        seen.insert(r);
    }
    RelativeRankSequence::from_ranks_unchecked(out)
}

/// Restriction to the first `n-1` arrivals: drops the last item and
/// recompacts the remaining final ranks into `{1..n-1}`, preserving their
/// relative order. (Plain domain restriction would leave a gap and not form
/// a valid permutation, so every rank above the removed one shifts down.)
pub fn restrict(p: &Permutation) -> Result<Permutation> {
    let n = p.len();
    if n < 2 {
        return Err(Error::InvalidSize(
            "cannot restrict a permutation of length 1".into(),
        ));
    }
    let removed = p.rank(n);
    let out = p.final_ranks()[..n - 1]
        .iter()
        .map(|&r| if r > removed { r - 1 } else { r })
        .collect();
    Ok(Permutation::from_final_ranks_unchecked(out))
}

/// Expected final rank among all `n` items of an item whose relative rank at
/// step `i` is `x`: exactly `(n+1) * x / (i+1)`.
pub fn expected_final_rank(n: usize, i: usize, x: usize) -> Result<Rational> {
    if i < 1 || i > n {
        return Err(Error::InvalidInput(format!(
            "step {i} out of range 1..={n}"
        )));
    }
    if x < 1 || x > i {
        return Err(Error::InvalidInput(format!(
            "relative rank {x} out of range 1..={i}"
        )));
    }
    Ok(crate::rational::rat(
        (n as i64 + 1) * x as i64,
        i as i64 + 1,
    ))
}

// ---------------------------------------------------------------------------
// Fenwick order-statistics set over 1..=n
// ---------------------------------------------------------------------------

struct FenwickSet {
    tree: Vec<u32>,
    n: usize,
    mask: usize, // highest power of two <= n
}

impl FenwickSet {
    fn with_membership(n: usize, full: bool) -> Self {
        let mut s = Self {
            tree: vec![0; n + 1],
            n,
            mask: if n == 0 { 0 } else { usize::pow(2, n.ilog2()) },
        };
        if full {
            for v in 1..=n {
                s.insert(v);
            }
        }
        s
    }

    fn full(n: usize) -> Self {
        Self::with_membership(n, true)
    }

    fn empty(n: usize) -> Self {
        Self::with_membership(n, false)
    }

    fn insert(&mut self, mut v: usize) {
        while v <= self.n {
            self.tree[v] += 1;
            v += v & v.wrapping_neg();
        }
    }

    /// Number of members strictly below `v`.
    fn count_below(&self, v: usize) -> usize {
        let mut idx = v - 1;
        let mut acc = 0usize;
        while idx > 0 {
            acc += self.tree[idx] as usize;
            idx -= idx & idx.wrapping_neg();
        }
        acc
    }

    /// Removes and returns the k-th smallest member (1-based).
    fn take_kth(&mut self, k: usize) -> usize {
        debug_assert!(k >= 1);
        let mut pos = 0usize;
        let mut rem = k;
        let mut step = self.mask;
        while step > 0 {
            let next = pos + step;
            if next <= self.n && (self.tree[next] as usize) < rem {
                rem -= self.tree[next] as usize;
                pos = next;
            }
            step >>= 1;
        }
        let v = pos + 1;
        let mut idx = v;
        while idx <= self.n {
            self.tree[idx] -= 1;
            idx += idx & idx.wrapping_neg();
        }
        v
    }
}
