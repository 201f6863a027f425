use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stopcost::numeric::rational_to_f64;
use stopcost::simulator::{estimate_value, exhaustive_oracle, simulate_once};
use stopcost::{relative_rank_sequence, solve, Cost, ProblemSpec, ThresholdRule, Variant};

fn spec(n: usize, num: i64, den: i64, variant: Variant) -> ProblemSpec {
    ProblemSpec::new(n, Cost::ratio(num, den), variant).unwrap()
}

#[test]
fn fear_time_tail_matches_uniform_law() {
    let n = 10;
    let s = spec(n, 1, 10, Variant::CostAtEnd);
    let rule = ThresholdRule::new(4, n).unwrap();
    let draws = 1_000_000;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut tail = vec![0u64; n + 2];
    for _ in 0..draws {
        let xi = simulate_once(&s, rule, &mut rng).unwrap().xi;
        tail[xi] += 1;
    }
    // tail[t] = #{ξ >= t}
    for t in (0..=n).rev() {
        tail[t] += tail[t + 1];
    }
    for t in 1..=n {
        let p = (n - t + 1) as f64 / (n + 1) as f64;
        let sd = (p * (1.0 - p) / draws as f64).sqrt();
        let got = tail[t] as f64 / draws as f64;
        assert!((got - p).abs() <= 4.0 * sd, "t={t}: {got} vs {p}");
    }
}

#[test]
fn stop_law_converges_to_oracle() {
    let n = 6;
    for k0 in 1..=n {
        let s = spec(n, 0, 1, Variant::CostAtEnd);
        let rule = ThresholdRule::new(k0, n).unwrap();
        let est = estimate_value(&s, rule, 1_000_000, 11).unwrap();
        let oracle = exhaustive_oracle(&s, rule).unwrap();
        let tv: f64 = est
            .stop_distribution()
            .iter()
            .zip(&oracle.stop_distribution)
            .map(|(a, b)| (a - rational_to_f64(b)).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.01, "k0={k0}: TV {tv}");
    }
}

#[test]
fn repeated_seeds_cover_the_solver_value() {
    let s = spec(5, 0, 1, Variant::CostAtEnd);
    let solved = solve(&s).unwrap();
    let within = (0..100u64)
        .filter(|&seed| {
            let est = estimate_value(&s, solved.rule, 100_000, seed).unwrap();
            (est.recombined_value - solved.value).abs() <= 3.0 * est.std_error
        })
        .count();
    assert!(within >= 99, "only {within} of 100 seeds within 3 standard errors");
}

#[test]
fn recombined_value_tracks_solver_with_cost() {
    for variant in [Variant::CostAtEnd, Variant::NoCostAtEnd] {
        for (n, num) in [(5, 1), (10, 2), (50, 1)] {
            let s = spec(n, num, 10, variant);
            let solved = solve(&s).unwrap();
            let est = estimate_value(&s, solved.rule, 400_000, 5).unwrap();
            let z = (est.recombined_value - solved.value) / est.std_error;
            assert!(z.abs() < 4.0, "N={n} c={num}/10 {variant}: z={z}");
        }
    }
}

#[test]
fn thread_count_does_not_change_estimates() {
    let s = spec(30, 1, 10, Variant::CostAtEnd);
    let rule = ThresholdRule::new(5, 30).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| estimate_value(&s, rule, 100_000, 99).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(7));
}

/// Upper 0.1% points of chi-square with 1..=5 degrees of freedom.
const CHI2_999: [f64; 5] = [10.828, 13.816, 16.266, 18.467, 20.515];

#[test]
fn relative_ranks_are_uniform_and_independent() {
    let n = 6;
    let samples = 200_000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut marginal = vec![vec![0u64; n + 1]; n + 1];
    let mut joint = vec![0u64; 720];
    let mut values = vec![0.0; n];
    for _ in 0..samples {
        for v in values.iter_mut() {
            *v = rng.gen::<f64>();
        }
        let seq = relative_rank_sequence(&values).unwrap();
        let mut cell = 0;
        for k in 1..=n {
            let r = seq.rank(k);
            marginal[k][r] += 1;
            cell = cell * k + (r - 1);
        }
        joint[cell] += 1;
    }
    for k in 2..=n {
        let expected = samples as f64 / k as f64;
        let chi2: f64 = (1..=k)
            .map(|r| (marginal[k][r] as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < CHI2_999[k - 2], "R_{k}: chi2 {chi2}");
    }
    // 719 degrees of freedom; Wilson-Hilferty upper 0.1% point is about 851.
    let expected = samples as f64 / 720.0;
    let chi2: f64 = joint.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    assert!(chi2 < 851.0, "joint chi2 {chi2}");
}
