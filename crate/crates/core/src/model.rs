//! Problem instances and the pointwise payoff and cost formulas.
//!
//! Times are 1-based throughout: item `k` is the `k`-th applicant, `1..=N`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{index_err, Error, Result};
use crate::numeric::{format_rational, format_sig12, parse_rational, Scalar};

/// Payoff at the last moment: `X_N - c` or plain `X_N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[default]
    CostAtEnd,
    NoCostAtEnd,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::CostAtEnd => "cost-at-end",
            Variant::NoCostAtEnd => "no-cost-at-end",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cost-at-end" => Ok(Variant::CostAtEnd),
            "no-cost-at-end" => Ok(Variant::NoCostAtEnd),
            other => Err(Error::Parse(format!("unknown variant {other:?}"))),
        }
    }
}

/// Cost of choice `c`, kept exactly whenever it was given as text or a ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct Cost {
    value: f64,
    exact: Option<BigRational>,
}

impl Cost {
    pub fn zero() -> Self {
        Self::ratio(0, 1)
    }

    /// Float-only cost; [`crate::solver::exact_solve`] refuses it.
    pub fn from_f64(value: f64) -> Self {
        Self { value, exact: None }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_rational(q: BigRational) -> Self {
        Self {
            value: crate::numeric::rational_to_f64(&q),
            exact: Some(q),
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0.0
    }

    /// Converts the cost into a numeric mode. Exact mode needs an exact cost.
    pub fn to_scalar<S: Scalar>(&self) -> Result<S> {
        match (&self.exact, S::MODE) {
            (Some(q), _) => Ok(S::from_rational(q)),
            (None, crate::numeric::NumericMode::Float) => {
                // Only reachable with S = f64.
                let q = BigRational::from_float(self.value)
                    .ok_or_else(|| Error::Cost(format!("non-finite cost {}", self.value)))?;
                Ok(S::from_rational(&q))
            }
            (None, crate::numeric::NumericMode::Exact) => Err(Error::InexactCost(self.value)),
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(q) => f.write_str(&format_rational(q)),
            None => f.write_str(&format_sig12(self.value)),
        }
    }
}

impl FromStr for Cost {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_rational(s).map(Cost::from_rational)
    }
}

/// A full problem instance: horizon `N`, cost `c` and terminal-payoff variant.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub horizon: usize,
    pub cost: Cost,
    pub variant: Variant,
}

impl ProblemSpec {
    /// Builds and validates an instance.
    pub fn new(horizon: usize, cost: Cost, variant: Variant) -> Result<Self> {
        Self {
            horizon,
            cost,
            variant,
        }
        .validate()
    }

    pub fn validate(self) -> Result<Self> {
        validate_spec(self)
    }

    /// Float-mode evaluator for this instance.
    pub fn float(&self) -> Result<Problem<f64>> {
        Problem::new(self)
    }

    /// Exact-mode evaluator; requires an exact cost.
    pub fn exact(&self) -> Result<Problem<BigRational>> {
        Problem::new(self)
    }
}

/// Checks `N >= 1`, `c >= 0` and, without terminal cost, `c < 1/2`.
pub fn validate_spec(spec: ProblemSpec) -> Result<ProblemSpec> {
    if spec.horizon < 1 {
        return Err(Error::Horizon(spec.horizon));
    }
    let c = &spec.cost;
    let negative = match c.exact() {
        Some(q) => q < &BigRational::from_integer(0.into()),
        None => !(c.value() >= 0.0),
    };
    if negative {
        return Err(Error::Cost(format!("cost must be nonnegative, got {c}")));
    }
    if spec.variant == Variant::NoCostAtEnd {
        let too_big = match c.exact() {
            Some(q) => q >= &BigRational::new(1.into(), 2.into()),
            None => c.value() >= 0.5,
        };
        if too_big {
            return Err(Error::Cost(format!(
                "without terminal cost the cost must be below 1/2, got {c}"
            )));
        }
    }
    Ok(spec)
}

/// A validated instance bound to a numeric mode.
#[derive(Debug, Clone)]
pub struct Problem<S> {
    n: usize,
    cost: S,
    terminal: S,
    variant: Variant,
}

impl<S: Scalar> Problem<S> {
    pub fn new(spec: &ProblemSpec) -> Result<Self> {
        let spec = validate_spec(spec.clone())?;
        let cost: S = spec.cost.to_scalar()?;
        let half = S::ratio(1, 2);
        let terminal = match spec.variant {
            Variant::CostAtEnd => half - cost.clone(),
            Variant::NoCostAtEnd => half,
        };
        Ok(Self {
            n: spec.horizon,
            cost,
            terminal,
            variant: spec.variant,
        })
    }

    pub fn horizon(&self) -> usize {
        self.n
    }

    pub fn cost(&self) -> &S {
        &self.cost
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// `c(k, t) = c (N - t + 1) / (N - k + 1)`: expected cost at `t` seen from `k`.
    pub fn expected_cost(&self, k: usize, t: usize) -> Result<S> {
        if k < 1 || k > t || t > self.n {
            return Err(index_err(format!(
                "expected_cost needs 1 <= k <= t <= N, got k={k}, t={t}, N={}",
                self.n
            )));
        }
        Ok(self.expected_cost_unchecked(k, t))
    }

    pub(crate) fn expected_cost_unchecked(&self, k: usize, t: usize) -> S {
        self.cost.clone() * S::ratio((self.n - t + 1) as u64, (self.n - k + 1) as u64)
    }

    /// `h(r) = r / (r + 1) - c` for a candidate at `r < N`.
    pub fn immediate_payoff(&self, r: usize) -> Result<S> {
        if r < 1 || r >= self.n {
            return Err(index_err(format!(
                "immediate_payoff needs 1 <= r <= N-1, got r={r}, N={}",
                self.n
            )));
        }
        Ok(self.immediate_payoff_unchecked(r))
    }

    pub(crate) fn immediate_payoff_unchecked(&self, r: usize) -> S {
        S::ratio(r as u64, r as u64 + 1) - self.cost.clone()
    }

    /// Expected payoff of accepting a candidate at `t`, with the cost
    /// conditioned at the earlier time `r`.
    pub fn conditional_payoff(&self, r: usize, t: usize) -> Result<S> {
        if r < 1 || r > t || t >= self.n {
            return Err(index_err(format!(
                "conditional_payoff needs 1 <= r <= t <= N-1, got r={r}, t={t}, N={}",
                self.n
            )));
        }
        Ok(self.conditional_payoff_unchecked(r, t))
    }

    pub(crate) fn conditional_payoff_unchecked(&self, r: usize, t: usize) -> S {
        S::ratio(t as u64, t as u64 + 1) - self.expected_cost_unchecked(r, t)
    }

    /// Expected payoff of the forced stop at `N`.
    pub fn terminal_value(&self) -> S {
        self.terminal.clone()
    }
}

/// Relative ranks `R_k = #{i <= k : X_i <= X_k}`; `R_k = 1` marks a new extreme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankSequence(Vec<usize>);

impl RankSequence {
    pub fn from_ranks(ranks: Vec<usize>) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::Empty("rank sequence"));
        }
        for (i, &r) in ranks.iter().enumerate() {
            if r < 1 || r > i + 1 {
                return Err(index_err(format!(
                    "rank at position {} must lie in 1..={}, got {r}",
                    i + 1,
                    i + 1
                )));
            }
        }
        Ok(Self(ranks))
    }

    pub fn ranks(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Rank at 1-based time `k`.
    pub fn rank(&self, k: usize) -> usize {
        self.0[k - 1]
    }

    pub fn is_candidate(&self, k: usize) -> bool {
        self.rank(k) == 1
    }
}

/// Computes relative ranks in `O(N log N)` with a Fenwick tree over value order.
pub fn relative_rank_sequence(values: &[f64]) -> Result<RankSequence> {
    let mut ranks = Vec::with_capacity(values.len());
    let mut scratch = RankScratch::default();
    scratch.ranks_into(values, &mut ranks)?;
    Ok(RankSequence(ranks))
}

/// Reusable buffers for repeated rank computations.
#[derive(Debug, Default)]
pub(crate) struct RankScratch {
    order: Vec<usize>,
    position: Vec<usize>,
    tree: Vec<usize>,
}

impl RankScratch {
    pub(crate) fn ranks_into(&mut self, values: &[f64], out: &mut Vec<usize>) -> Result<()> {
        let n = values.len();
        if n == 0 {
            return Err(Error::Empty("values"));
        }
        if let Some(i) = values.iter().position(|v| v.is_nan()) {
            return Err(Error::Domain(format!("value at position {} is NaN", i + 1)));
        }
        self.order.clear();
        self.order.extend(0..n);
        self.order
            .sort_unstable_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("no NaN"));
        for w in self.order.windows(2) {
            if values[w[0]] == values[w[1]] {
                let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
                return Err(Error::Tie {
                    first: a + 1,
                    second: b + 1,
                });
            }
        }
        self.position.clear();
        self.position.resize(n, 0);
        for (pos, &idx) in self.order.iter().enumerate() {
            self.position[idx] = pos + 1;
        }
        self.tree.clear();
        self.tree.resize(n + 1, 0);
        out.clear();
        for k in 0..n {
            let p = self.position[k];
            let mut i = p;
            while i <= n {
                self.tree[i] += 1;
                i += i & i.wrapping_neg();
            }
            let mut count = 0;
            let mut i = p;
            while i > 0 {
                count += self.tree[i];
                i -= i & i.wrapping_neg();
            }
            out.push(count);
        }
        Ok(())
    }
}
