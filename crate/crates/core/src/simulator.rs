//! Independent checks of the solver: Monte Carlo runs of the selection
//! process and exhaustive enumeration of rank orders for small `N`.
//!
//! Values are uniform on `[0, 1]` and a candidate is an item better than
//! everything before it. Ranks are computed on `1 - X` so that rank 1 marks
//! the best item so far.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::{absorb_probability, transition_probability};
use crate::error::{Error, Result};
use crate::model::{Problem, ProblemSpec, RankScratch, Variant};
use crate::numeric::Scalar;
use crate::solver::ThresholdRule;

/// Largest horizon the exhaustive oracle accepts.
pub const ORACLE_MAX_N: usize = 10;

/// Largest horizon for [`chain_consistency_check`].
pub const CHAIN_CHECK_MAX_N: usize = 8;

/// Samples per independent RNG stream in [`estimate_value`].
pub const CHUNK_SAMPLES: u64 = 1 << 14;

/// Seeded stream for a given chunk; chunk `i` always draws the same numbers.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub values: Vec<f64>,
    /// Fear time, uniform on `0..=N`.
    pub xi: usize,
    pub stop_time: usize,
    pub realized_value: f64,
    /// `1{ξ >= stop_time}`.
    pub cost_indicator: bool,
}

/// Buffers reused across trajectories.
#[derive(Debug, Default)]
struct Trajectory {
    keys: Vec<f64>,
    ranks: Vec<usize>,
    scratch: RankScratch,
}

impl Trajectory {
    /// Draws one trajectory into `values`, returning `(xi, stop_time)`.
    fn run<R: Rng + ?Sized>(
        &mut self,
        n: usize,
        rule: ThresholdRule,
        rng: &mut R,
        values: &mut Vec<f64>,
    ) -> (usize, usize) {
        values.clear();
        values.extend((0..n).map(|_| rng.gen::<f64>()));
        let xi = rng.gen_range(0..=n);
        self.keys.clear();
        self.keys.extend(values.iter().map(|x| 1.0 - x));
        // A tie between two 53-bit uniforms is negligible; treat it as no candidate.
        let stop = match self.scratch.ranks_into(&self.keys, &mut self.ranks) {
            Ok(()) => (rule.k0()..n)
                .find(|&t| self.ranks[t - 1] == 1)
                .unwrap_or(n),
            Err(_) => n,
        };
        (xi, stop)
    }
}

/// One run of the selection process under `rule`.
pub fn simulate_once<R: Rng + ?Sized>(
    spec: &ProblemSpec,
    rule: ThresholdRule,
    rng: &mut R,
) -> Result<TrajectorySample> {
    let n = spec.horizon;
    let rule = ThresholdRule::new(rule.k0(), n)?;
    let mut t = Trajectory::default();
    let mut values = Vec::with_capacity(n);
    let (xi, stop_time) = t.run(n, rule, rng, &mut values);
    Ok(TrajectorySample {
        realized_value: values[stop_time - 1],
        cost_indicator: xi >= stop_time,
        values,
        xi,
        stop_time,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationEstimate {
    /// Mean of `X_τ`.
    pub mean_value_part: f64,
    /// Fraction of runs with `ξ >= τ`.
    pub mean_cost_prob: f64,
    /// `E[X_τ]` minus the cost conditioned at `max(k0 - 1, 1)`, averaged over
    /// the observed stop times. Comparable with the solver value.
    pub recombined_value: f64,
    pub std_error: f64,
    /// Standard error of `mean_value_part` alone.
    pub value_part_std_error: f64,
    /// Mean of the realised payoff `X_τ - c 1{ξ >= τ}` (flat `c` or none at `N`).
    pub unconditional_value: f64,
    pub unconditional_std_error: f64,
    /// Observed counts of `τ = 1..N`.
    pub stop_counts: Vec<u64>,
    pub samples: u64,
    pub seed: u64,
}

impl SimulationEstimate {
    pub fn stop_distribution(&self) -> Vec<f64> {
        self.stop_counts
            .iter()
            .map(|&k| k as f64 / self.samples as f64)
            .collect()
    }
}

/// Running sums; merging is commutative up to float rounding, and chunks are
/// merged in index order so results do not depend on the thread count.
#[derive(Debug, Clone, Default)]
struct Accumulator {
    count: u64,
    value: f64,
    value_sq: f64,
    cost_hits: u64,
    recombined: f64,
    recombined_sq: f64,
    unconditional: f64,
    unconditional_sq: f64,
    stops: Vec<u64>,
}

impl Accumulator {
    fn new(n: usize) -> Self {
        Self {
            stops: vec![0; n],
            ..Self::default()
        }
    }

    fn merge(mut self, other: &Accumulator) -> Self {
        self.count += other.count;
        self.value += other.value;
        self.value_sq += other.value_sq;
        self.cost_hits += other.cost_hits;
        self.recombined += other.recombined;
        self.recombined_sq += other.recombined_sq;
        self.unconditional += other.unconditional;
        self.unconditional_sq += other.unconditional_sq;
        for (a, b) in self.stops.iter_mut().zip(&other.stops) {
            *a += b;
        }
        self
    }
}

fn std_error(sum: f64, sum_sq: f64, n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    (var / nf).sqrt()
}

/// Anchored cost charged for stopping at `t` under threshold `k0`.
pub(crate) fn anchored_costs(problem: &Problem<f64>, k0: usize) -> Vec<f64> {
    let n = problem.horizon();
    let anchor = k0.saturating_sub(1).max(1);
    (1..=n)
        .map(|t| {
            if t == n {
                match problem.variant() {
                    Variant::CostAtEnd => *problem.cost(),
                    Variant::NoCostAtEnd => 0.0,
                }
            } else if t >= anchor {
                problem.expected_cost_unchecked(anchor, t)
            } else {
                // Unreachable for t < k0 except t = 1 with k0 = 1, where anchor = 1.
                *problem.cost()
            }
        })
        .collect()
}

/// Monte Carlo estimate of a rule's value from `samples` seeded runs.
pub fn estimate_value(
    spec: &ProblemSpec,
    rule: ThresholdRule,
    samples: u64,
    seed: u64,
) -> Result<SimulationEstimate> {
    if samples == 0 {
        return Err(Error::Domain("samples must be at least 1".into()));
    }
    let problem = spec.float()?;
    let n = problem.horizon();
    let rule = ThresholdRule::new(rule.k0(), n)?;
    let c = *problem.cost();
    let costs = anchored_costs(&problem, rule.k0());
    let chunks = samples.div_ceil(CHUNK_SAMPLES);

    let partials: Vec<Accumulator> = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = stream_rng(seed, chunk);
            let size = CHUNK_SAMPLES.min(samples - chunk * CHUNK_SAMPLES);
            let mut acc = Accumulator::new(n);
            let mut traj = Trajectory::default();
            let mut values = Vec::with_capacity(n);
            for _ in 0..size {
                let (xi, stop) = traj.run(n, rule, &mut rng, &mut values);
                let x = values[stop - 1];
                let hit = xi >= stop;
                let realized_cost = if stop == n {
                    match spec.variant {
                        Variant::CostAtEnd => c,
                        Variant::NoCostAtEnd => 0.0,
                    }
                } else if hit {
                    c
                } else {
                    0.0
                };
                let recombined = x - costs[stop - 1];
                let unconditional = x - realized_cost;
                acc.count += 1;
                acc.value += x;
                acc.value_sq += x * x;
                acc.cost_hits += hit as u64;
                acc.recombined += recombined;
                acc.recombined_sq += recombined * recombined;
                acc.unconditional += unconditional;
                acc.unconditional_sq += unconditional * unconditional;
                acc.stops[stop - 1] += 1;
            }
            acc
        })
        .collect();
    let total = partials
        .iter()
        .fold(Accumulator::new(n), |acc, p| acc.merge(p));
    let m = total.count as f64;
    Ok(SimulationEstimate {
        mean_value_part: total.value / m,
        mean_cost_prob: total.cost_hits as f64 / m,
        recombined_value: total.recombined / m,
        std_error: std_error(total.recombined, total.recombined_sq, total.count),
        value_part_std_error: std_error(total.value, total.value_sq, total.count),
        unconditional_value: total.unconditional / m,
        unconditional_std_error: std_error(total.unconditional, total.unconditional_sq, total.count),
        stop_counts: total.stops,
        samples,
        seed,
    })
}

/// Exact value of a rule and its stop-time law over all `N!` rank orders.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub k0: usize,
    pub value: BigRational,
    /// `P(τ = t)` for `t = 1..N`.
    pub stop_distribution: Vec<BigRational>,
    pub permutations: u64,
}

impl OracleResult {
    pub fn stop_probability(&self, t: usize) -> &BigRational {
        &self.stop_distribution[t - 1]
    }
}

/// Visits every rank sequence `R_1..R_N` with `R_k` in `1..=k`. Each sequence
/// corresponds to exactly one ordering of `N` distinct values.
fn for_each_rank_sequence(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut ranks = vec![1usize; n];
    loop {
        visit(&ranks);
        // Odometer increment, position k cycling through 1..=k+1 (0-based k).
        let mut k = n;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            if ranks[k] < k + 1 {
                ranks[k] += 1;
                break;
            }
            ranks[k] = 1;
        }
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Enumerates all rank orders. The value is
/// `Σ_{t<N} P(τ = t) h~(a, t) + P(τ = N) terminal` with anchor
/// `a = max(k0 - 1, 1)`, evaluated exactly.
pub fn exhaustive_oracle(spec: &ProblemSpec, rule: ThresholdRule) -> Result<OracleResult> {
    let n = spec.horizon;
    if n > ORACLE_MAX_N {
        return Err(Error::OracleBound {
            n,
            max: ORACLE_MAX_N,
        });
    }
    let problem = spec.exact()?;
    let rule = ThresholdRule::new(rule.k0(), n)?;
    let k0 = rule.k0();
    let mut counts = vec![0u64; n];
    let mut total = 0u64;
    for_each_rank_sequence(n, |ranks| {
        let stop = (k0..n).find(|&t| ranks[t - 1] == 1).unwrap_or(n);
        counts[stop - 1] += 1;
        total += 1;
    });
    debug_assert_eq!(total, factorial(n));
    let denom = BigInt::from(total);
    let stop_distribution: Vec<BigRational> = counts
        .iter()
        .map(|&k| BigRational::new(BigInt::from(k), denom.clone()))
        .collect();
    let anchor = k0.saturating_sub(1).max(1);
    let mut value = BigRational::zero();
    for t in 1..n {
        let p = &stop_distribution[t - 1];
        if !p.is_zero() {
            value += p * problem.conditional_payoff_unchecked(anchor, t);
        }
    }
    value += &stop_distribution[n - 1] * problem.terminal_value();
    Ok(OracleResult {
        k0,
        value,
        stop_distribution,
        permutations: total,
    })
}

/// One row of the chain check: the law of the next candidate after `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRow {
    pub r: usize,
    /// Enumerated `P(next candidate at s | candidate at r)` for `s = r+1..N`.
    pub enumerated: Vec<BigRational>,
    pub enumerated_absorb: BigRational,
    /// Times `s` (or `N + 1` for absorption) where enumeration and formula differ.
    pub mismatches: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReport {
    pub n: usize,
    pub rows: Vec<ChainRow>,
}

impl ChainReport {
    pub fn all_equal(&self) -> bool {
        self.rows.iter().all(|r| r.mismatches.is_empty())
    }
}

/// Compares the enumerated next-candidate law with `p(r, s)` and `r / N`.
pub fn chain_consistency_check(n: usize) -> Result<ChainReport> {
    if n > CHAIN_CHECK_MAX_N {
        return Err(Error::OracleBound {
            n,
            max: CHAIN_CHECK_MAX_N,
        });
    }
    if n < 1 {
        return Err(Error::Horizon(n));
    }
    // next[r][s]: count of sequences with a candidate at r whose next one is s
    // (s = N + 1 for none); given[r]: count with a candidate at r.
    let mut next = vec![vec![0u64; n + 2]; n + 1];
    let mut given = vec![0u64; n + 1];
    for_each_rank_sequence(n, |ranks| {
        for r in 1..=n {
            if ranks[r - 1] != 1 {
                continue;
            }
            given[r] += 1;
            let s = (r + 1..=n).find(|&s| ranks[s - 1] == 1).unwrap_or(n + 1);
            next[r][s] += 1;
        }
    });
    let mut rows = Vec::new();
    for r in 1..n {
        let denom = BigInt::from(given[r]);
        let frac = |k: u64| BigRational::new(BigInt::from(k), denom.clone());
        let mut mismatches = Vec::new();
        let mut enumerated = Vec::new();
        for s in r + 1..=n {
            let e = frac(next[r][s]);
            if e != transition_probability::<BigRational>(r, s, n)? {
                mismatches.push(s);
            }
            enumerated.push(e);
        }
        let enumerated_absorb = frac(next[r][n + 1]);
        if enumerated_absorb != absorb_probability::<BigRational>(r, n)? {
            mismatches.push(n + 1);
        }
        rows.push(ChainRow {
            r,
            enumerated,
            enumerated_absorb,
            mismatches,
        });
    }
    Ok(ChainReport { n, rows })
}

/// Exact `P(τ = t)` implied by the chain for the threshold-`k0` rule:
/// the first candidate from `k0` on is the next candidate after `k0 - 1`.
pub fn chain_stop_distribution(n: usize, k0: usize) -> Result<Vec<BigRational>> {
    let rule = ThresholdRule::new(k0, n)?;
    let mut dist = vec![BigRational::zero(); n];
    if rule.k0() == 1 {
        dist[0] = BigRational::one();
        return Ok(dist);
    }
    let r = k0 - 1;
    for t in k0..n {
        dist[t - 1] = transition_probability::<BigRational>(r, t, n)?;
    }
    // Candidate at N or none at all.
    dist[n - 1] = if r < n {
        <BigRational as Scalar>::ratio(r as u64, (n - 1).max(1) as u64)
    } else {
        BigRational::one()
    };
    Ok(dist)
}
