//! On-line strategies as move functions, plus the off-line optimum.
//!
//! A deterministic strategy is a state machine fed one `(step, relative
//! rank)` observation at a time and answering with a move: take the item as
//! a low selection, take it as a high selection, or wait. Feeding strategies
//! only `(i, x_i)` enforces the on-line information constraint by
//! construction. A valid machine never emits `low` while a pair is open or
//! `high` while none is; violations are hard errors, not silent fixes.
//!
//! Implemented strategies:
//! * [`OpStrategy`] — opportunistic multi-pair: open on `x_i < (i+1)/2`,
//!   close on `x_i > (i+1)/2`.
//! * [`SinglePairStrategy`] — threshold-optimal single pair, driven by
//!   [`ThresholdTables`].
//! * [`HalfSplitStrategy`] — baseline that hunts the minimum in the first
//!   half and the maximum in the second half.
//! * [`offline_select`] — full-information optimum over a known permutation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permstream::{to_final_ranks, Permutation, RelativeRankSequence};
use crate::rational::{rat_int, Rational};
use crate::thresholds::ThresholdTables;

// ---------------------------------------------------------------------------
// Moves and strategy names
// ---------------------------------------------------------------------------

/// Decision for the current item.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Open a pair with this item.
    Low,
    /// Close the open pair with this item.
    High,
    /// Ignore this item.
    Wait,
}

/// The strategies known to the CLI and the oracles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    /// Opportunistic multi-pair strategy.
    Op,
    /// Optimal single-pair strategy (threshold tables).
    SingleOptimal,
    /// Inferior single-pair baseline: min over the first half, max over the
    /// second half.
    HalfSplit,
    /// Off-line optimum (requires the full permutation; not a move function).
    Offline,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 4] = [
        StrategyKind::Op,
        StrategyKind::SingleOptimal,
        StrategyKind::HalfSplit,
        StrategyKind::Offline,
    ];

    /// The on-line strategies, i.e. everything with a move function.
    pub const ONLINE: [StrategyKind; 3] = [
        StrategyKind::Op,
        StrategyKind::SingleOptimal,
        StrategyKind::HalfSplit,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Op => "op",
            StrategyKind::SingleOptimal => "single-optimal",
            StrategyKind::HalfSplit => "half-split",
            StrategyKind::Offline => "offline",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "op" => Ok(StrategyKind::Op),
            "single-optimal" => Ok(StrategyKind::SingleOptimal),
            "half-split" => Ok(StrategyKind::HalfSplit),
            "offline" => Ok(StrategyKind::Offline),
            other => Err(Error::UnknownStrategy(other.to_string())),
        }
    }

    pub fn is_online(&self) -> bool {
        !matches!(self, StrategyKind::Offline)
    }
}

impl std::fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

// ---------------------------------------------------------------------------
// Selection records
// ---------------------------------------------------------------------------

/// Interleaved low/high index pairs `l_1 < h_1 < l_2 < h_2 < ... <= n`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionRecord {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl SelectionRecord {
    /// Validates the interleaving constraint.
    pub fn new(n: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut prev = 0usize;
        for &(l, h) in &pairs {
            if l <= prev || h <= l || h > n {
                return Err(Error::InvalidInput(format!(
                    "selection pairs violate 1 <= l1 < h1 < ... <= n (pair ({l},{h}) after {prev}, n={n})"
                )));
            }
            prev = h;
        }
        Ok(Self { n, pairs })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// True if interval `j` (the gap between arrivals `j` and `j+1`) lies
    /// inside some selected pair, i.e. `l <= j < h`.
    pub fn is_active(&self, j: usize) -> bool {
        self.pairs.iter().any(|&(l, h)| l <= j && j < h)
    }
}

/// Realized profit of a record against the materialized permutation:
/// the sum of `r_high - r_low` over all pairs. May be negative.
pub fn profit(rec: &SelectionRecord, p: &Permutation) -> Result<i64> {
    if rec.n() != p.len() {
        return Err(Error::InvalidInput(format!(
            "record is for n={} but permutation has length {}",
            rec.n(),
            p.len()
        )));
    }
    Ok(rec
        .pairs()
        .iter()
        .map(|&(l, h)| p.rank(h) as i64 - p.rank(l) as i64)
        .sum())
}

/// Per-interval amortized profits `a_1..a_{n-1}`: interval `j` contributes
/// `r_{j+1} - r_j` when active and 0 otherwise. Their sum telescopes to
/// [`profit`].
pub fn amortized_profits(rec: &SelectionRecord, p: &Permutation) -> Result<Vec<i64>> {
    let n = p.len();
    if rec.n() != n {
        return Err(Error::InvalidInput(format!(
            "record is for n={} but permutation has length {n}",
            rec.n()
        )));
    }
    if n < 2 {
        return Err(Error::InvalidSize(
            "amortized profits need n >= 2".into(),
        ));
    }
    let mut out = vec![0i64; n - 1];
    for &(l, h) in rec.pairs() {
        for j in l..h {
            out[j - 1] = p.rank(j + 1) as i64 - p.rank(j) as i64;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Move functions
// ---------------------------------------------------------------------------

/// A deterministic on-line strategy consuming one observation per step.
pub trait MoveFunction {
    /// Decides the move for step `i` with relative rank `x` (1-based, `x <= i`).
    fn next_move(&mut self, i: usize, x: usize) -> Move;

    /// True while a low selection is open awaiting its high.
    fn holding(&self) -> bool;
}

/// Opportunistic multi-pair strategy.
///
/// Free: open iff `x_i < (i+1)/2`. Holding: close iff `x_i > (i+1)/2`.
/// At the last step an open pair is closed regardless of rank (the profit
/// accounting only runs through interval `n-1`, so the close is
/// value-neutral), and no new pair is opened (it could never close).
#[derive(Debug, Clone)]
pub struct OpStrategy {
    n: usize,
    holding: bool,
}

impl OpStrategy {
    pub fn new(n: usize) -> Self {
        Self { n, holding: false }
    }
}

impl MoveFunction for OpStrategy {
    fn next_move(&mut self, i: usize, x: usize) -> Move {
        if i == self.n {
            if self.holding {
                self.holding = false;
                return Move::High;
            }
            return Move::Wait;
        }
        if self.holding {
            if 2 * x > i + 1 {
                self.holding = false;
                return Move::High;
            }
        } else if 2 * x < i + 1 {
            self.holding = true;
            return Move::Low;
        }
        Move::Wait
    }

    fn holding(&self) -> bool {
        self.holding
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairPhase {
    BeforeLow,
    Holding,
    Done,
}

/// Optimal single-pair strategy: low iff `x_i <= l(i)`, then high iff
/// `x_i >= h(i)`. The table boundary values (`l(n) = 0`, `h(n) = 0`) forbid
/// a last-step low and force a last-step high.
#[derive(Debug, Clone)]
pub struct SinglePairStrategy<'a> {
    tables: &'a ThresholdTables,
    phase: PairPhase,
}

impl<'a> SinglePairStrategy<'a> {
    pub fn new(tables: &'a ThresholdTables) -> Self {
        Self {
            tables,
            phase: PairPhase::BeforeLow,
        }
    }
}

impl MoveFunction for SinglePairStrategy<'_> {
    fn next_move(&mut self, i: usize, x: usize) -> Move {
        match self.phase {
            PairPhase::BeforeLow => {
                if x as u64 <= self.tables.l(i) {
                    self.phase = PairPhase::Holding;
                    Move::Low
                } else {
                    Move::Wait
                }
            }
            PairPhase::Holding => {
                if x as u64 >= self.tables.h(i) {
                    self.phase = PairPhase::Done;
                    Move::High
                } else {
                    Move::Wait
                }
            }
            PairPhase::Done => Move::Wait,
        }
    }

    fn holding(&self) -> bool {
        self.phase == PairPhase::Holding
    }
}

/// Half-split single-pair baseline.
///
/// First `m = floor(n/2)` steps: the single-selection threshold strategy for
/// horizon `m`, mirrored to hunt the minimum by flipping ranks (`x -> i+1-x`);
/// the horizon-`m` tables force a low by step `m`. Remaining `n-m` steps: the
/// standard maximum-hunting strategy over the second-half items, using each
/// item's rank among the second-half arrivals seen so far; the horizon-`(n-m)`
/// tables force the high by step `n`.
///
/// Second-half sub-ranks are derived by tracking the evolving relative order
/// of the second-half items, which is computable from the `(i, x_i)` stream
/// alone, so the strategy remains a legal move function.
#[derive(Debug, Clone)]
pub struct HalfSplitStrategy<'a> {
    m: usize,
    low_tables: &'a ThresholdTables,
    high_tables: &'a ThresholdTables,
    phase: PairPhase,
    /// Current relative ranks (among the first `i` arrivals) of the
    /// second-half arrivals seen so far.
    tracked: Vec<usize>,
}

impl<'a> HalfSplitStrategy<'a> {
    /// `low_tables` must have horizon `floor(n/2)` and `high_tables` horizon
    /// `n - floor(n/2)`.
    pub fn new(
        n: usize,
        low_tables: &'a ThresholdTables,
        high_tables: &'a ThresholdTables,
    ) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize("half-split needs n >= 2".into()));
        }
        let m = n / 2;
        if low_tables.n() != m || high_tables.n() != n - m {
            return Err(Error::TablesMismatch {
                tables: low_tables.n(),
                stream: n,
            });
        }
        Ok(Self {
            m,
            low_tables,
            high_tables,
            phase: PairPhase::BeforeLow,
            tracked: Vec::new(),
        })
    }
}

impl MoveFunction for HalfSplitStrategy<'_> {
    fn next_move(&mut self, i: usize, x: usize) -> Move {
        if i <= self.m {
            if self.phase == PairPhase::BeforeLow {
                let flipped = (i + 1 - x) as u64;
                if flipped >= self.low_tables.h(i) {
                    self.phase = PairPhase::Holding;
                    return Move::Low;
                }
            }
            return Move::Wait;
        }

        // Second half: update tracked ranks, then rank the newcomer among them.
        for t in self.tracked.iter_mut() {
            if *t >= x {
                *t += 1;
            }
        }
        let sub_rank = self.tracked.iter().filter(|&&t| t < x).count() + 1;
        self.tracked.push(x);

        if self.phase == PairPhase::Holding {
            let j = i - self.m;
            if sub_rank as u64 >= self.high_tables.h(j) {
                self.phase = PairPhase::Done;
                return Move::High;
            }
        }
        Move::Wait
    }

    fn holding(&self) -> bool {
        self.phase == PairPhase::Holding
    }
}

/// Feeds a stream through a move function, recording the selected pairs.
///
/// Errors with a protocol violation if the machine emits `low` while a pair
/// is open, `high` while none is, or leaves a pair open past the last step.
pub fn run_strategy<M: MoveFunction>(
    machine: &mut M,
    x: &RelativeRankSequence,
) -> Result<SelectionRecord> {
    let n = x.len();
    let mut pairs = Vec::new();
    let mut open: Option<usize> = None;
    for i in 1..=n {
        match machine.next_move(i, x.rank(i)) {
            Move::Low => {
                if open.is_some() {
                    return Err(Error::ProtocolViolation {
                        step: i,
                        what: "low emitted while already holding".into(),
                    });
                }
                open = Some(i);
            }
            Move::High => match open.take() {
                Some(l) => pairs.push((l, i)),
                None => {
                    return Err(Error::ProtocolViolation {
                        step: i,
                        what: "high emitted while not holding".into(),
                    });
                }
            },
            Move::Wait => {}
        }
    }
    if let Some(l) = open {
        return Err(Error::ProtocolViolation {
            step: n,
            what: format!("stream ended with the low selection at step {l} unclosed"),
        });
    }
    SelectionRecord::new(n, pairs)
}

/// Off-line optimum for a fully known permutation: select the endpoints of
/// every maximal increasing run, which activates interval `j` exactly when
/// `r_{j+1} > r_j`.
pub fn offline_select(p: &Permutation) -> SelectionRecord {
    let r = p.final_ranks();
    let n = r.len();
    let mut pairs = Vec::new();
    let mut start: Option<usize> = None;
    for j in 1..n {
        // 1-based interval j compares arrivals j and j+1.
        if r[j] > r[j - 1] {
            if start.is_none() {
                start = Some(j);
            }
        } else if let Some(s) = start.take() {
            pairs.push((s, j));
        }
    }
    if let Some(s) = start {
        pairs.push((s, n));
    }
    SelectionRecord { n, pairs }
}

// ---------------------------------------------------------------------------
// Prebuilt per-horizon context
// ---------------------------------------------------------------------------

/// Immutable per-horizon data for one strategy: whatever threshold tables it
/// needs, built once and shared across trials and threads.
#[derive(Debug, Clone)]
pub struct StrategyContext {
    kind: StrategyKind,
    n: usize,
    single: Option<ThresholdTables>,
    half_low: Option<ThresholdTables>,
    half_high: Option<ThresholdTables>,
}

impl StrategyContext {
    pub fn new(kind: StrategyKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("strategies need n >= 1".into()));
        }
        let mut ctx = Self {
            kind,
            n,
            single: None,
            half_low: None,
            half_high: None,
        };
        match kind {
            StrategyKind::SingleOptimal => ctx.single = Some(ThresholdTables::build(n)?),
            StrategyKind::HalfSplit => {
                if n < 2 {
                    return Err(Error::InvalidSize("half-split needs n >= 2".into()));
                }
                ctx.half_low = Some(ThresholdTables::build(n / 2)?);
                ctx.half_high = Some(ThresholdTables::build(n - n / 2)?);
            }
            StrategyKind::Op | StrategyKind::Offline => {}
        }
        Ok(ctx)
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// A fresh move-function state machine, or `None` for the off-line kind.
    pub fn machine(&self) -> Option<OnlineMachine<'_>> {
        match self.kind {
            StrategyKind::Op => Some(OnlineMachine::Op(OpStrategy::new(self.n))),
            StrategyKind::SingleOptimal => Some(OnlineMachine::Single(SinglePairStrategy::new(
                self.single.as_ref().expect("built in new"),
            ))),
            StrategyKind::HalfSplit => Some(OnlineMachine::Half(
                HalfSplitStrategy::new(
                    self.n,
                    self.half_low.as_ref().expect("built in new"),
                    self.half_high.as_ref().expect("built in new"),
                )
                .expect("validated in new"),
            )),
            StrategyKind::Offline => None,
        }
    }

    /// Runs the strategy over one stream and returns its selections.
    pub fn selections(&self, x: &RelativeRankSequence) -> Result<SelectionRecord> {
        if x.len() != self.n {
            return Err(Error::TablesMismatch {
                tables: self.n,
                stream: x.len(),
            });
        }
        match self.machine() {
            Some(mut m) => run_strategy(&mut m, x),
            None => Ok(offline_select(&to_final_ranks(x))),
        }
    }
}

/// Dispatch enum over the concrete move functions.
#[derive(Debug, Clone)]
pub enum OnlineMachine<'a> {
    Op(OpStrategy),
    Single(SinglePairStrategy<'a>),
    Half(HalfSplitStrategy<'a>),
}

impl MoveFunction for OnlineMachine<'_> {
    fn next_move(&mut self, i: usize, x: usize) -> Move {
        match self {
            OnlineMachine::Op(s) => s.next_move(i, x),
            OnlineMachine::Single(s) => s.next_move(i, x),
            OnlineMachine::Half(s) => s.next_move(i, x),
        }
    }

    fn holding(&self) -> bool {
        match self {
            OnlineMachine::Op(s) => s.holding(),
            OnlineMachine::Single(s) => s.holding(),
            OnlineMachine::Half(s) => s.holding(),
        }
    }
}

/// Exact expected profit of the half-split baseline, by formula rather than
/// enumeration.
///
/// With `m = floor(n/2)` and `q = n - m`: the minimum hunt's expected rank
/// among the first `m` items is `m + 1 - r_m(1)` (rank flipping), the
/// maximum hunt's expected rank among the last `q` items is `r_q(1)`, and
/// conditioning on within-subset rank scales expectations to the full stream
/// by `(n+1)/(m+1)` and `(n+1)/(q+1)`. The difference telescopes to
/// `(n+1) * (r_q(1)/(q+1) + r_m(1)/(m+1) - 1)`.
pub fn half_split_expected_profit(n: usize) -> Result<Rational> {
    if n < 2 {
        return Err(Error::InvalidSize("half-split needs n >= 2".into()));
    }
    let m = n / 2;
    let q = n - m;
    let r_low = ThresholdTables::build(m)?.r(1);
    let r_high = if q == m {
        r_low.clone()
    } else {
        ThresholdTables::build(q)?.r(1)
    };
    let np1 = rat_int(n as i64 + 1);
    Ok(&np1
        * (r_high / rat_int(q as i64 + 1) + r_low / rat_int(m as i64 + 1) - rat_int(1)))
}
