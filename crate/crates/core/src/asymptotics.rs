//! Limits as `N -> ∞`.
//!
//! With `k0 / N -> x` the threshold fraction solves `log x = m (x - 1)` on
//! `(0, 1)`, where `m = 1 + 1/(2c)` when the last item carries the cost and
//! `m = 1/(2c)` when it does not. The limiting value is `1 - c` in both cases.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Cost, ProblemSpec, Variant};
use crate::solver::solve;

/// Width of the final bisection interval, in `log x`.
pub const ROOT_TOLERANCE: f64 = 1e-12;

/// Required agreement between the closed-form limit and `1 - c`.
pub const VALUE_IDENTITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSolution {
    pub cost: f64,
    pub variant: Variant,
    /// `α` with terminal cost, `β` without.
    pub root: f64,
    pub limit_value: f64,
    /// `|log(root) - m (root - 1)|`.
    pub residual: f64,
    /// Final bracket width in `log x`.
    pub tolerance_achieved: f64,
}

/// Slope `m` of the threshold equation.
pub fn equation_slope(c: f64, variant: Variant) -> Result<f64> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("cost must be positive, got {c}")));
    }
    let m = match variant {
        Variant::CostAtEnd => 1.0 + 1.0 / (2.0 * c),
        Variant::NoCostAtEnd => 1.0 / (2.0 * c),
    };
    if m <= 1.0 {
        return Err(Error::Domain(format!(
            "no root in (0, 1) for {variant} with c = {c}; need c < 1/2"
        )));
    }
    Ok(m)
}

/// `log(x) - m (x - 1)`.
pub fn equation_residual(x: f64, m: f64) -> f64 {
    x.ln() - m * (x - 1.0)
}

/// Unique root of `log x = m (x - 1)` in `(0, 1)`, by bisection.
///
/// The residual rises to its maximum at `x = 1/m` and vanishes at `x = 1`, so
/// the root lies below `1/m`. Bisection runs on `u = log x` over
/// `[-m - 1, -log m]`: at the left end the residual is
/// `-(m + 1) - m (e^{-m-1} - 1) < 0`.
pub fn threshold_equation_root(c: f64, variant: Variant) -> Result<f64> {
    root_with_width(c, variant).map(|(x, _)| x)
}

fn root_with_width(c: f64, variant: Variant) -> Result<(f64, f64)> {
    let m = equation_slope(c, variant)?;
    let g = |u: f64| u - m * u.exp_m1();
    let mut lo = -m - 1.0;
    let mut hi = -m.ln();
    let (g_lo, g_hi) = (g(lo), g(hi));
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::Convergence(format!(
            "bracket [{lo}, {hi}] has residuals {g_lo}, {g_hi}"
        )));
    }
    while hi - lo > ROOT_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    Ok((u.exp(), hi - lo))
}

/// The limit of the value at threshold fraction `root`, from the closed form.
///
/// With terminal cost: `1 - c - (c + 1/2) α - (c α / (1 - α)) log α`.
/// Without it the `c α` term drops out: `1 - c - α/2 - (c α / (1 - α)) log α`.
pub fn closed_form_value(c: f64, variant: Variant, root: f64) -> f64 {
    let a = root;
    let log_term = c * a / (1.0 - a) * a.ln();
    match variant {
        Variant::CostAtEnd => 1.0 - c - (c + 0.5) * a - log_term,
        Variant::NoCostAtEnd => 1.0 - c - 0.5 * a - log_term,
    }
}

/// Closed-form limiting value, checked against the identity `1 - c`.
pub fn limiting_value(c: f64, variant: Variant) -> Result<f64> {
    let root = threshold_equation_root(c, variant)?;
    let value = closed_form_value(c, variant, root);
    let gap = (value - (1.0 - c)).abs();
    if gap > VALUE_IDENTITY_TOLERANCE {
        return Err(Error::Convergence(format!(
            "closed form {value} differs from 1 - c by {gap}"
        )));
    }
    Ok(value)
}

pub fn asymptotic_solution(c: f64, variant: Variant) -> Result<AsymptoticSolution> {
    let (root, width) = root_with_width(c, variant)?;
    let m = equation_slope(c, variant)?;
    Ok(AsymptoticSolution {
        cost: c,
        variant,
        root,
        limit_value: limiting_value(c, variant)?,
        residual: equation_residual(root, m).abs(),
        tolerance_achieved: width,
    })
}

/// `(h_lower, h_upper)`: continuum limits of stopping now and of waiting for
/// the next candidate, for cost anchor fraction `y` and current fraction `x`.
pub fn limit_functions(y: f64, x: f64, c: f64, variant: Variant) -> Result<(f64, f64)> {
    if !(0.0 < y && y <= x && x < 1.0) {
        return Err(Error::Domain(format!("need 0 < y <= x < 1, got y={y}, x={x}")));
    }
    if !(c >= 0.0) {
        return Err(Error::Domain(format!("cost must be nonnegative, got {c}")));
    }
    let ratio = (1.0 - x) / (1.0 - y);
    let lower = 1.0 - c * ratio;
    let terminal_cost = match variant {
        Variant::CostAtEnd => c * x,
        Variant::NoCostAtEnd => 0.0,
    };
    let upper = 1.0 - x / 2.0 - terminal_cost - c * ratio - x * c / (1.0 - y) * x.ln();
    Ok((lower, upper))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub k0: usize,
    pub fraction: f64,
    pub value: f64,
    pub threshold_gap: f64,
    pub value_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub cost: f64,
    pub variant: Variant,
    pub root: f64,
    pub limit_value: f64,
    pub rows: Vec<ConvergenceRow>,
    /// `|k0/N - root|` strictly decreases down the rows.
    pub threshold_gap_decreasing: bool,
    /// `|v_N - limit|` strictly decreases down the rows.
    pub value_gap_decreasing: bool,
}

/// Solves each horizon and lines the results up against the limits.
///
/// `c = 0` is accepted with the degenerate limits `root = 0`, `value = 1`.
pub fn convergence_report(cost: &Cost, variant: Variant, horizons: &[usize]) -> Result<ConvergenceReport> {
    if horizons.is_empty() {
        return Err(Error::Empty("horizons"));
    }
    if horizons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("horizons must be strictly increasing".into()));
    }
    let c = cost.value();
    let (root, limit_value) = if cost.is_zero() {
        (0.0, 1.0)
    } else {
        (threshold_equation_root(c, variant)?, limiting_value(c, variant)?)
    };
    let mut rows = Vec::with_capacity(horizons.len());
    for &n in horizons {
        let spec = ProblemSpec::new(n, cost.clone(), variant)?;
        let r = solve(&spec)?;
        let fraction = r.k0() as f64 / n as f64;
        rows.push(ConvergenceRow {
            n,
            k0: r.k0(),
            fraction,
            value: r.value,
            threshold_gap: (fraction - root).abs(),
            value_gap: (r.value - limit_value).abs(),
        });
    }
    let decreasing = |f: fn(&ConvergenceRow) -> f64| rows.windows(2).all(|w| f(&w[1]) < f(&w[0]));
    Ok(ConvergenceReport {
        cost: c,
        variant,
        root,
        limit_value,
        threshold_gap_decreasing: decreasing(|r| r.threshold_gap),
        value_gap_decreasing: decreasing(|r| r.value_gap),
        rows,
    })
}

/// `start, 2 start, 4 start, ...` up to and including `max` (and `max` itself).
pub fn doubling_horizons(start: usize, max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = start.max(1);
    while n < max {
        out.push(n);
        n *= 2;
    }
    out.push(max);
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig6(a: f64, b: f64) -> bool {
        (a - b).abs() <= 5e-6 * b.abs()
    }

    #[test]
    fn table_roots() {
        assert!(sig6(threshold_equation_root(0.1, Variant::CostAtEnd).unwrap(), 0.00251646));
        assert!(sig6(threshold_equation_root(0.2, Variant::CostAtEnd).unwrap(), 0.0340152));
        assert!(sig6(threshold_equation_root(0.1, Variant::NoCostAtEnd).unwrap(), 0.00697715));
        assert!(sig6(threshold_equation_root(0.2, Variant::NoCostAtEnd).unwrap(), 0.107355));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(threshold_equation_root(0.0, Variant::CostAtEnd), Err(Error::Domain(_))));
        assert!(matches!(threshold_equation_root(-1.0, Variant::CostAtEnd), Err(Error::Domain(_))));
        assert!(matches!(threshold_equation_root(0.5, Variant::NoCostAtEnd), Err(Error::Domain(_))));
        assert!(matches!(limiting_value(f64::NAN, Variant::CostAtEnd), Err(Error::Domain(_))));
        // Any positive cost works with terminal cost.
        assert!(threshold_equation_root(5.0, Variant::CostAtEnd).is_ok());
    }

    #[test]
    fn residual_and_identity_on_grid() {
        for &c in &[0.01, 0.05, 0.1, 0.2, 0.4] {
            for v in [Variant::CostAtEnd, Variant::NoCostAtEnd] {
                let s = asymptotic_solution(c, v).unwrap();
                assert!(s.residual <= 1e-10, "c={c} {v}: {}", s.residual);
                assert!(s.root > 0.0 && s.root < 1.0);
                assert!((s.limit_value - (1.0 - c)).abs() <= 1e-9);
                assert!(s.tolerance_achieved <= ROOT_TOLERANCE);
            }
        }
    }

    #[test]
    fn single_sign_change() {
        for &c in &[0.01, 0.1, 0.2, 0.4, 2.0] {
            for v in [Variant::CostAtEnd, Variant::NoCostAtEnd] {
                let Ok(m) = equation_slope(c, v) else { continue };
                let root = threshold_equation_root(c, v).unwrap();
                // Log-spaced grid from far below the root up to 1 - 1e-9.
                let lo = (root.ln() - 10.0).min(-30.0);
                let hi = (1.0f64 - 1e-9).ln();
                let signs: Vec<bool> = (0..10_000)
                    .map(|i| lo + (hi - lo) * i as f64 / 9_999.0)
                    .map(|u| equation_residual(u.exp(), m) > 0.0)
                    .collect();
                let changes = signs.windows(2).filter(|w| w[0] != w[1]).count();
                assert_eq!(changes, 1, "c={c} {v}");
            }
        }
    }

    #[test]
    fn cost_at_end_root_below_no_cost_root() {
        for i in 1..50 {
            let c = i as f64 / 100.0;
            let a = threshold_equation_root(c, Variant::CostAtEnd).unwrap();
            let b = threshold_equation_root(c, Variant::NoCostAtEnd).unwrap();
            assert!(a < b, "c={c}");
        }
    }

    #[test]
    fn small_cost_continuity() {
        let a = threshold_equation_root(1e-3, Variant::CostAtEnd).unwrap();
        assert!(a < 1e-100);
        assert!((limiting_value(1e-3, Variant::CostAtEnd).unwrap() - 1.0).abs() < 2e-3);
    }

    #[test]
    fn limit_function_examples() {
        let (lo, _) = limit_functions(0.3, 0.6, 0.0, Variant::CostAtEnd).unwrap();
        assert_eq!(lo, 1.0);
        let (lo, _) = limit_functions(0.5, 0.5, 0.2, Variant::CostAtEnd).unwrap();
        assert!((lo - 0.8).abs() < 1e-15);
        for v in [Variant::CostAtEnd, Variant::NoCostAtEnd] {
            let a = threshold_equation_root(0.1, v).unwrap();
            let (lo, up) = limit_functions(a, a, 0.1, v).unwrap();
            assert!((lo - up).abs() < 1e-9);
        }
        assert!(limit_functions(0.0, 0.5, 0.1, Variant::CostAtEnd).is_err());
        assert!(limit_functions(0.6, 0.5, 0.1, Variant::CostAtEnd).is_err());
        assert!(limit_functions(0.5, 1.0, 0.1, Variant::CostAtEnd).is_err());
    }

    #[test]
    fn waiting_never_pays_past_alpha() {
        let c = 0.1;
        let a = threshold_equation_root(c, Variant::CostAtEnd).unwrap();
        for i in 0..50 {
            let y = a + (0.99 - a) * i as f64 / 50.0;
            for j in 0..50 {
                let x = y + (0.99 - y) * j as f64 / 50.0;
                let (lo, up) = limit_functions(y, x, c, Variant::CostAtEnd).unwrap();
                assert!(up <= lo + 1e-12, "y={y} x={x}");
            }
        }
    }

    #[test]
    fn doubling() {
        assert_eq!(doubling_horizons(10, 100), vec![10, 20, 40, 80, 100]);
        assert_eq!(doubling_horizons(10, 80), vec![10, 20, 40, 80]);
    }

    #[test]
    fn convergence_small() {
        let r = convergence_report(&Cost::ratio(1, 10), Variant::CostAtEnd, &[100]).unwrap();
        assert_eq!(r.rows[0].k0, 12);
        assert!((r.rows[0].fraction - 0.12).abs() < 1e-15);
        let r = convergence_report(&Cost::zero(), Variant::CostAtEnd, &[10_000]).unwrap();
        assert_eq!(r.rows[0].k0, 100);
        assert!(convergence_report(&Cost::zero(), Variant::CostAtEnd, &[]).is_err());
        assert!(convergence_report(&Cost::zero(), Variant::CostAtEnd, &[20, 10]).is_err());
    }
}
