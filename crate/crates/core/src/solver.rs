//! Backward induction over candidate times and the one-step-look-ahead
//! threshold.
//!
//! The optimal rule skips items `1..k0-1` and accepts the first candidate at
//! or after `k0`, taking the last item if none shows up. `k0` is the least `k`
//! such that `h(s) >= Th(s)` for every `s` in `k..N-1`, and the value of the
//! problem is `Th(k0 - 1)`. Ties in `h(s) >= Th(s)` favour stopping.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::chain::ContinuationTable;
use crate::error::{index_err, Error, Result};
use crate::model::{Problem, ProblemSpec};
use crate::numeric::{NumericMode, Scalar};

/// Default largest horizon accepted by [`exact_solve`].
pub const DEFAULT_EXACT_BOUND: usize = 1000;

/// Environment variable overriding [`DEFAULT_EXACT_BOUND`].
pub const EXACT_BOUND_ENV: &str = "STOPCOST_EXACT_BOUND";

/// Skip items before `k0`, accept the first candidate from `k0` on, else stop at `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ThresholdRule {
    k0: usize,
}

impl ThresholdRule {
    pub fn new(k0: usize, horizon: usize) -> Result<Self> {
        if k0 < 1 || k0 > horizon {
            return Err(index_err(format!(
                "threshold must lie in 1..=N, got k0={k0}, N={horizon}"
            )));
        }
        Ok(Self { k0 })
    }

    pub fn k0(&self) -> usize {
        self.k0
    }

    /// Whether the rule accepts a candidate observed at time `t`.
    pub fn accepts(&self, t: usize) -> bool {
        t >= self.k0
    }
}

/// Whether the one-step-look-ahead set `{s : h(s) >= Th(s)}` is closed upward.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneReport {
    pub monotone: bool,
    /// Least member of the set, if any.
    pub first_index: Option<usize>,
    /// Members lying below some non-member.
    pub violations: Vec<usize>,
}

/// `w(r, s)` for `s = r..N-1` together with the induced stopping set.
#[derive(Debug, Clone, PartialEq)]
pub struct PairValueTable<S> {
    pub anchor: usize,
    pub values: Vec<S>,
    pub stop: Vec<bool>,
}

impl<S: Clone> PairValueTable<S> {
    pub fn value(&self, s: usize) -> Option<S> {
        s.checked_sub(self.anchor)
            .and_then(|i| self.values.get(i))
            .cloned()
    }

    pub fn stops_at(&self, s: usize) -> Option<bool> {
        s.checked_sub(self.anchor)
            .and_then(|i| self.stop.get(i))
            .copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult<S> {
    pub spec: ProblemSpec,
    pub rule: ThresholdRule,
    pub value: S,
    /// `h(r)` for `r = 1..N-1`.
    pub h_values: Vec<S>,
    /// `Th(r)` for `r = 1..N-1`.
    pub t_values: Vec<S>,
    pub pair_table: Option<PairValueTable<S>>,
    pub monotone_case: bool,
    /// `h(k0) = Th(k0)`: the rule with threshold `k0 + 1` is equally justified
    /// at the boundary, and its value `Th(k0)` differs from `value`.
    pub boundary_tie: bool,
    pub numeric_mode: NumericMode,
}

impl<S: Scalar> SolveResult<S> {
    pub fn k0(&self) -> usize {
        self.rule.k0()
    }

    /// Value of the threshold-`k` rule, from the stored tables.
    pub fn rule_value(&self, k: usize) -> Result<S> {
        let n = self.spec.horizon;
        rule_value_from(n, k, |r| self.t_values[r - 1].clone(), || {
            if n == 1 {
                terminal_for(&self.spec)
            } else {
                Ok(self.h_values[0].clone())
            }
        })
    }
}

fn terminal_for<S: Scalar>(spec: &ProblemSpec) -> Result<S> {
    Problem::<S>::new(spec).map(|p| p.terminal_value())
}

fn rule_value_from<S>(
    n: usize,
    k: usize,
    th: impl Fn(usize) -> S,
    first: impl FnOnce() -> Result<S>,
) -> Result<S> {
    if k < 1 || k > n {
        return Err(index_err(format!("threshold must lie in 1..=N, got k={k}, N={n}")));
    }
    if k == 1 {
        first()
    } else {
        Ok(th(k - 1))
    }
}

/// Value of the threshold-`k` rule: `Th(k - 1)` for `k >= 2`, `h(1)` for `k = 1`
/// (the first item is always a candidate), the terminal value when `N = 1`.
pub fn rule_value<S: Scalar>(problem: &Problem<S>, table: &ContinuationTable<S>, k: usize) -> Result<S> {
    let n = problem.horizon();
    rule_value_from(n, k, |r| table.th_unchecked(r), || {
        Ok(if n == 1 {
            problem.terminal_value()
        } else {
            problem.immediate_payoff_unchecked(1)
        })
    })
}

fn ola_membership<S: Scalar>(problem: &Problem<S>, table: &ContinuationTable<S>) -> Vec<bool> {
    let n = problem.horizon();
    (1..n)
        .map(|s| {
            problem
                .immediate_payoff_unchecked(s)
                .at_least(&table.th_unchecked(s))
        })
        .collect()
}

fn threshold_from_membership(n: usize, member: &[bool]) -> usize {
    let mut k0 = n;
    for s in (1..n).rev() {
        if member[s - 1] {
            k0 = s;
        } else {
            break;
        }
    }
    k0
}

fn monotone_from_membership(member: &[bool]) -> MonotoneReport {
    let first_index = member.iter().position(|&m| m).map(|i| i + 1);
    let last_outside = member.iter().rposition(|&m| !m);
    let violations: Vec<usize> = match last_outside {
        Some(hi) => (0..hi).filter(|&i| member[i]).map(|i| i + 1).collect(),
        None => Vec::new(),
    };
    MonotoneReport {
        monotone: violations.is_empty(),
        first_index,
        violations,
    }
}

/// One-step-look-ahead threshold in a given numeric mode.
pub fn ola_threshold_in<S: Scalar>(problem: &Problem<S>, table: &ContinuationTable<S>) -> ThresholdRule {
    let n = problem.horizon();
    let k0 = threshold_from_membership(n, &ola_membership(problem, table));
    ThresholdRule { k0 }
}

/// One-step-look-ahead threshold (float mode).
pub fn ola_threshold(spec: &ProblemSpec) -> Result<ThresholdRule> {
    let problem = spec.float()?;
    let table = ContinuationTable::new(&problem);
    Ok(ola_threshold_in(&problem, &table))
}

/// Checks that the look-ahead stopping set is an up-set of `1..N-1` (float mode).
pub fn verify_monotone_case(spec: &ProblemSpec) -> Result<MonotoneReport> {
    let problem = spec.float()?;
    let table = ContinuationTable::new(&problem);
    Ok(verify_monotone_case_in(&problem, &table))
}

pub fn verify_monotone_case_in<S: Scalar>(
    problem: &Problem<S>,
    table: &ContinuationTable<S>,
) -> MonotoneReport {
    monotone_from_membership(&ola_membership(problem, table))
}

/// Backward recursion `w(r, s) = max{h~(r, s), Tw(r, s)}` from `s = N-1`
/// down to `s = r`, in `O(N)` using a running weighted suffix sum.
pub fn pair_value_table<S: Scalar>(problem: &Problem<S>, anchor: usize) -> Result<PairValueTable<S>> {
    let n = problem.horizon();
    if anchor < 1 || anchor + 1 > n {
        return Err(index_err(format!(
            "pair table anchor must lie in 1..=N-1, got r={anchor}, N={n}"
        )));
    }
    let len = n - anchor;
    let mut values = vec![S::zero(); len];
    let mut stop = vec![false; len];
    let terminal = problem.terminal_value();
    // Σ_{j=s+1}^{N-1} w(r, j) / (j (j - 1))
    let mut tail = S::zero();
    for s in (anchor..n).rev() {
        let su = s as u64;
        let continuation = S::from_u64(su) * tail.clone() + S::ratio(su, n as u64 - 1) * terminal.clone();
        let immediate = problem.conditional_payoff_unchecked(anchor, s);
        let i = s - anchor;
        if immediate.at_least(&continuation) {
            values[i] = immediate;
            stop[i] = true;
        } else {
            values[i] = continuation;
        }
        if s >= 2 {
            tail = tail + values[i].clone() / S::from_u64(su * (su - 1));
        }
    }
    Ok(PairValueTable {
        anchor,
        values,
        stop,
    })
}

fn solve_in<S: Scalar>(spec: &ProblemSpec, with_pairs: bool) -> Result<SolveResult<S>> {
    let problem = Problem::<S>::new(spec)?;
    let n = problem.horizon();
    let table = ContinuationTable::new(&problem);
    let h_values: Vec<S> = (1..n).map(|r| problem.immediate_payoff_unchecked(r)).collect();
    let t_values: Vec<S> = (1..n).map(|r| table.th_unchecked(r)).collect();
    let member: Vec<bool> = h_values
        .iter()
        .zip(&t_values)
        .map(|(h, t)| h.at_least(t))
        .collect();
    let k0 = threshold_from_membership(n, &member);
    let monotone = monotone_from_membership(&member);
    let rule = ThresholdRule { k0 };
    let value = rule_value(&problem, &table, k0)?;
    let boundary_tie = k0 < n && t_values[k0 - 1].at_least(&h_values[k0 - 1]);
    let pair_table = if with_pairs && n >= 2 {
        Some(pair_value_table(&problem, k0.saturating_sub(1).max(1))?)
    } else {
        None
    };
    Ok(SolveResult {
        spec: spec.clone(),
        rule,
        value,
        h_values,
        t_values,
        pair_table,
        monotone_case: monotone.monotone,
        boundary_tie,
        numeric_mode: S::MODE,
    })
}

/// Float-mode solve; `O(N)` time and memory.
pub fn solve(spec: &ProblemSpec) -> Result<SolveResult<f64>> {
    solve_in(spec, false)
}

/// Float-mode solve that also fills the pair table at anchor `max(k0 - 1, 1)`.
pub fn solve_detailed(spec: &ProblemSpec) -> Result<SolveResult<f64>> {
    solve_in(spec, true)
}

/// Largest horizon for exact mode: `STOPCOST_EXACT_BOUND` or 1000.
pub fn exact_mode_bound() -> usize {
    std::env::var(EXACT_BOUND_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_EXACT_BOUND)
}

/// Exact-arithmetic solve bounded by [`exact_mode_bound`].
pub fn exact_solve(spec: &ProblemSpec) -> Result<SolveResult<BigRational>> {
    exact_solve_with_bound(spec, exact_mode_bound())
}

pub fn exact_solve_with_bound(spec: &ProblemSpec, bound: usize) -> Result<SolveResult<BigRational>> {
    if spec.horizon > bound {
        return Err(Error::ExactModeBound {
            n: spec.horizon,
            bound,
        });
    }
    solve_in(spec, false)
}

pub fn exact_solve_detailed(spec: &ProblemSpec) -> Result<SolveResult<BigRational>> {
    let bound = exact_mode_bound();
    if spec.horizon > bound {
        return Err(Error::ExactModeBound {
            n: spec.horizon,
            bound,
        });
    }
    solve_in(spec, true)
}
