//! The embedded chain of candidate times.
//!
//! From a candidate at time `r` the next candidate arrives at `s > r` with
//! probability `r / (s (s - 1))`; with probability `r / N` none arrives before
//! the horizon. The one-step expectation operators below sum payoffs over that
//! law, lumping "candidate at `N`" and "no candidate" into a single terminal
//! term of weight `r / (N - 1)`.

use crate::error::{index_err, Result};
use crate::model::Problem;
use crate::numeric::Scalar;

/// Time of the last candidate, or the absorbing state after the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordState {
    At(usize),
    Absorbed,
}

impl RecordState {
    pub fn new(r: usize, n: usize) -> Result<Self> {
        if r < 1 || r > n {
            return Err(index_err(format!("record state needs 1 <= r <= N, got r={r}, N={n}")));
        }
        Ok(RecordState::At(r))
    }
}

/// State of the two-dimensional chain: the cost anchor and the current
/// candidate time. Only the fixed-anchor transitions are used by the solver;
/// the anchor-switching move is never needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairState {
    pub anchor: usize,
    pub current: usize,
}

impl PairState {
    pub fn new(anchor: usize, current: usize, n: usize) -> Result<Self> {
        if anchor < 1 || anchor > current || current > n {
            return Err(index_err(format!(
                "pair state needs 1 <= r <= s <= N, got r={anchor}, s={current}, N={n}"
            )));
        }
        Ok(Self { anchor, current })
    }
}

/// `p(r, s) = r / (s (s - 1))` for `1 <= r < s <= N`.
pub fn transition_probability<S: Scalar>(r: usize, s: usize, n: usize) -> Result<S> {
    if r < 1 || s <= r || s > n {
        return Err(index_err(format!(
            "transition_probability needs 1 <= r < s <= N, got r={r}, s={s}, N={n}"
        )));
    }
    Ok(S::ratio(r as u64, (s * (s - 1)) as u64))
}

/// Probability `r / N` that no candidate follows the one at `r`.
pub fn absorb_probability<S: Scalar>(r: usize, n: usize) -> Result<S> {
    if r < 1 || r > n {
        return Err(index_err(format!(
            "absorb_probability needs 1 <= r <= N, got r={r}, N={n}"
        )));
    }
    Ok(S::ratio(r as u64, n as u64))
}

/// Weight `r / (N - 1)` of the terminal lump: a candidate at `N` or none at all.
pub fn horizon_lump_probability<S: Scalar>(r: usize, n: usize) -> Result<S> {
    if r < 1 || r + 1 > n {
        return Err(index_err(format!(
            "horizon_lump_probability needs 1 <= r <= N-1, got r={r}, N={n}"
        )));
    }
    Ok(S::ratio(r as u64, (n - 1) as u64))
}

impl<S: Scalar> Problem<S> {
    /// `Th(r)`: value of "stop at the next candidate after `r`, else at `N`",
    /// with costs seen from `r`. Direct `O(N)` summation.
    pub fn apply_t(&self, r: usize) -> Result<S> {
        let n = self.horizon();
        if r < 1 || r + 1 > n {
            return Err(index_err(format!("apply_T needs 1 <= r <= N-1, got r={r}, N={n}")));
        }
        self.apply_t_pair(r, r, |j| self.conditional_payoff_unchecked(r, j))
    }

    /// One-step expectation from pair state `(r, s)` over the next candidate,
    /// reading payoffs from `continuation` on `s+1..N-1`.
    pub fn apply_t_pair<F>(&self, r: usize, s: usize, continuation: F) -> Result<S>
    where
        F: Fn(usize) -> S,
    {
        let n = self.horizon();
        if r < 1 || r > s || s + 1 > n {
            return Err(index_err(format!(
                "apply_T_pair needs 1 <= r <= s <= N-1, got r={r}, s={s}, N={n}"
            )));
        }
        let mut acc = S::zero();
        for j in s + 1..n {
            acc = acc + S::ratio(s as u64, (j * (j - 1)) as u64) * continuation(j);
        }
        Ok(acc + S::ratio(s as u64, (n - 1) as u64) * self.terminal_value())
    }
}

/// Precomputed suffix sums giving `Th(r)` for every `r` in `O(1)` each.
///
/// With `A(j) = 1 / ((j + 1)(j - 1))` and `B(j) = (N - j + 1) / (j (j - 1))`,
/// `Th(r) = r·ΣA - c·r/(N - r + 1)·ΣB + r/(N - 1)·terminal`, sums over `j = r+1..N-1`.
#[derive(Debug, Clone)]
pub struct ContinuationTable<S> {
    n: usize,
    cost: S,
    terminal: S,
    // Index r holds the sums over j = r+1..N-1; length N.
    suffix_a: Vec<S>,
    suffix_b: Vec<S>,
}

impl<S: Scalar> ContinuationTable<S> {
    pub fn new(problem: &Problem<S>) -> Self {
        let n = problem.horizon();
        let mut suffix_a = vec![S::zero(); n.max(1)];
        let mut suffix_b = vec![S::zero(); n.max(1)];
        if n >= 3 {
            for r in (1..n - 1).rev() {
                let j = (r + 1) as u64;
                let a = S::ratio(1, (j + 1) * (j - 1));
                let b = S::ratio(n as u64 - j + 1, j * (j - 1));
                suffix_a[r] = suffix_a[r + 1].clone() + a;
                suffix_b[r] = suffix_b[r + 1].clone() + b;
            }
        }
        Self {
            n,
            cost: problem.cost().clone(),
            terminal: problem.terminal_value(),
            suffix_a,
            suffix_b,
        }
    }

    pub fn horizon(&self) -> usize {
        self.n
    }

    /// `Th(r)` for `1 <= r <= N - 1`.
    pub fn th(&self, r: usize) -> Result<S> {
        let n = self.n;
        if r < 1 || r + 1 > n {
            return Err(index_err(format!("Th needs 1 <= r <= N-1, got r={r}, N={n}")));
        }
        Ok(self.th_unchecked(r))
    }

    pub(crate) fn th_unchecked(&self, r: usize) -> S {
        let n = self.n as u64;
        let ru = r as u64;
        let value_part = S::from_u64(ru) * self.suffix_a[r].clone();
        let cost_part =
            self.cost.clone() * S::ratio(ru, n - ru + 1) * self.suffix_b[r].clone();
        value_part - cost_part + S::ratio(ru, n - 1) * self.terminal.clone()
    }
}
