//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for usage and validation errors, 3 when a
//! verification comparison (`--against-solver`) fails.

use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::asymptotics::{
    asymptotic_solution, closed_form_value, convergence_report, doubling_horizons,
};
use crate::error::Error;
use crate::model::{Cost, ProblemSpec, Variant};
use crate::numeric::{format_rational, format_sig12};
use crate::report::{
    table_to_json, write_plot_csv, write_table_csv, PlotRow, SolveReport, TableRow,
};
use crate::simulator::{estimate_value, exhaustive_oracle};
use crate::solver::{exact_solve, solve, ThresholdRule};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

/// `|z|` above which `simulate --against-solver` reports a failure.
pub const Z_FAIL: f64 = 5.0;

#[derive(Debug, Parser)]
#[command(
    name = "stopcost",
    version,
    about = "Rank-based selection with cardinal payoffs and a cost of choice"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal threshold and value for one instance.
    Solve(SolveArgs),
    /// Thresholds and values over a grid of horizons and costs.
    Table(TableArgs),
    /// Limiting threshold fraction and value as N grows.
    Asymptotic(AsymptoticArgs),
    /// Monte Carlo estimate of a threshold rule's value.
    Simulate(SimulateArgs),
    /// Exact value of a threshold rule by enumerating all rank orders (N <= 10).
    Oracle(OracleArgs),
    /// CSV sweep of thresholds and values against their limits.
    Plotdata(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    CostAtEnd,
    NoCostAtEnd,
}

#[derive(Debug, Clone, Args)]
pub struct VariantArgs {
    /// The last item carries no cost (requires c < 1/2).
    #[arg(long, conflicts_with = "variant")]
    pub no_terminal_cost: bool,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
}

impl VariantArgs {
    pub fn variant(&self) -> Variant {
        match (self.no_terminal_cost, self.variant) {
            (true, _) | (false, Some(VariantArg::NoCostAtEnd)) => Variant::NoCostAtEnd,
            _ => Variant::CostAtEnd,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Number of applicants N.
    #[arg(long)]
    pub n: usize,
    /// Cost of choice, as a decimal or p/q.
    #[arg(long, allow_hyphen_values = true)]
    pub c: Cost,
    #[command(flatten)]
    pub variant: VariantArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Exact rational arithmetic; values print as reduced fractions.
    #[arg(long)]
    pub exact: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    #[value(name = "paper-table-1")]
    PaperTable1,
    #[value(name = "paper-table-2")]
    PaperTable2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Fixed grid: N in {5,10,15,50,100}, c in {0,1/10,2/10}.
    #[arg(long, value_enum, conflicts_with_all = ["n_list", "c_list", "no_terminal_cost", "variant"])]
    pub preset: Option<Preset>,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub c_list: Vec<Cost>,
    #[command(flatten)]
    pub variant: VariantArgs,
    #[arg(long)]
    pub exact: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Prefix CSV output with `# key=value` metadata lines.
    #[arg(long)]
    pub meta: bool,
}

#[derive(Debug, Args)]
pub struct AsymptoticArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub c: Cost,
    #[command(flatten)]
    pub variant: VariantArgs,
    /// Append a convergence report over doubling horizons.
    #[arg(long)]
    pub check: bool,
    #[arg(long, default_value_t = 100)]
    pub n_min: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub n_max: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Threshold; defaults to the optimal one.
    #[arg(long)]
    pub k0: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Compare with the solver's value of the same rule; exit 3 if |z| > 5.
    #[arg(long)]
    pub against_solver: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long)]
    pub k0: Option<usize>,
    /// Compare with the exact solver's value of the same rule; exit 3 on mismatch.
    #[arg(long)]
    pub against_solver: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.1")]
    pub c_list: Vec<Cost>,
    /// Explicit horizons; otherwise doubling from --n-min to --n-max.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub n_min: usize,
    #[arg(long, default_value_t = 100_000)]
    pub n_max: usize,
    #[command(flatten)]
    pub variant: VariantArgs,
    #[arg(long)]
    pub meta: bool,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

type CmdResult = std::result::Result<i32, Failure>;

fn usage(flag: &str, e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: format!("{flag}: {e}"),
    }
}

fn io_fail(e: impl std::fmt::Display) -> Failure {
    Failure {
        code: EXIT_IO,
        message: e.to_string(),
    }
}

/// The flag most likely responsible for a library error.
fn flag_of(e: &Error) -> &'static str {
    match e {
        Error::Horizon(_) | Error::ExactModeBound { .. } | Error::OracleBound { .. } => "--n",
        Error::Index(_) => "--k0",
        _ => "--c",
    }
}

fn spec_of(args: &InstanceArgs) -> std::result::Result<ProblemSpec, Failure> {
    ProblemSpec::new(args.n, args.c.clone(), args.variant.variant()).map_err(|e| usage(flag_of(&e), e))
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Table(a) => cmd_table(&a, out),
        Command::Asymptotic(a) => cmd_asymptotic(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Oracle(a) => cmd_oracle(&a, out),
        Command::Plotdata(a) => cmd_plotdata(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn solve_row(spec: &ProblemSpec, exact: bool) -> std::result::Result<SolveReport, Failure> {
    let report = if exact {
        exact_solve(spec).and_then(|r| SolveReport::from_result(&r))
    } else {
        solve(spec).and_then(|r| SolveReport::from_result(&r))
    };
    report.map_err(|e| usage(flag_of(&e), e))
}

pub fn cmd_solve_report(args: &SolveArgs) -> std::result::Result<SolveReport, String> {
    let spec = spec_of(&args.instance).map_err(|f| f.message)?;
    solve_row(&spec, args.exact).map_err(|f| f.message)
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> CmdResult {
    let spec = spec_of(&args.instance)?;
    let report = solve_row(&spec, args.exact)?;
    if args.json {
        let text = serde_json::to_string_pretty(&report).map_err(io_fail)?;
        writeln!(out, "{text}").map_err(io_fail)?;
    } else {
        write!(out, "{}", report.to_text()).map_err(io_fail)?;
    }
    Ok(EXIT_OK)
}

/// Grid and variant for a preset.
pub fn preset_grid(preset: Preset) -> (Vec<usize>, Vec<Cost>, Variant) {
    let horizons = vec![5, 10, 15, 50, 100];
    let costs = vec![Cost::zero(), Cost::ratio(1, 10), Cost::ratio(2, 10)];
    let variant = match preset {
        Preset::PaperTable1 => Variant::CostAtEnd,
        Preset::PaperTable2 => Variant::NoCostAtEnd,
    };
    (horizons, costs, variant)
}

/// Solves every `(N, c)` cell, sorted by `N` then `c`.
pub fn table_rows(
    horizons: &[usize],
    costs: &[Cost],
    variant: Variant,
    exact: bool,
) -> std::result::Result<Vec<TableRow>, String> {
    let mut costs = costs.to_vec();
    costs.sort_by(|a, b| a.value().total_cmp(&b.value()));
    let mut horizons = horizons.to_vec();
    horizons.sort_unstable();
    let cells: Vec<(usize, Cost)> = horizons
        .iter()
        .flat_map(|&n| costs.iter().map(move |c| (n, c.clone())))
        .collect();
    cells
        .par_iter()
        .map(|(n, c)| {
            let spec = ProblemSpec::new(*n, c.clone(), variant).map_err(|e| format!("{}: {e}", flag_of(&e)))?;
            let row = if exact {
                exact_solve(&spec).and_then(|r| TableRow::from_result(&r))
            } else {
                solve(&spec).and_then(|r| TableRow::from_result(&r))
            };
            row.map_err(|e| format!("{}: {e}", flag_of(&e)))
        })
        .collect()
}

fn meta_lines(command: &str) -> Vec<(&'static str, String)> {
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    vec![
        ("generator", format!("stopcost {}", env!("CARGO_PKG_VERSION"))),
        ("command", command.to_string()),
        ("created_unix", created.to_string()),
    ]
}

fn cmd_table(args: &TableArgs, out: &mut dyn Write) -> CmdResult {
    let (horizons, costs, variant) = match args.preset {
        Some(p) => preset_grid(p),
        None => (args.n_list.clone(), args.c_list.clone(), args.variant.variant()),
    };
    if horizons.is_empty() {
        return Err(usage("--n-list", "empty grid"));
    }
    if costs.is_empty() {
        return Err(usage("--c-list", "empty grid"));
    }
    let rows = table_rows(&horizons, &costs, variant, args.exact).map_err(|m| Failure {
        code: EXIT_USAGE,
        message: m,
    })?;
    match args.format {
        Format::Csv => {
            let meta = if args.meta { meta_lines("table") } else { Vec::new() };
            write_table_csv(&mut *out, &rows, &meta).map_err(io_fail)?;
        }
        Format::Json => {
            writeln!(out, "{}", table_to_json(&rows).map_err(io_fail)?).map_err(io_fail)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_asymptotic(args: &AsymptoticArgs, out: &mut dyn Write) -> CmdResult {
    let variant = args.variant.variant();
    let c = args.c.value();
    let sol = asymptotic_solution(c, variant).map_err(|e| usage("--c", e))?;
    let closed = closed_form_value(c, variant, sol.root);
    let report = if args.check {
        if args.n_min < 1 || args.n_min > args.n_max {
            return Err(usage("--n-max", "need 1 <= --n-min <= --n-max"));
        }
        let horizons = doubling_horizons(args.n_min, args.n_max);
        Some(convergence_report(&args.c, variant, &horizons).map_err(|e| usage(flag_of(&e), e))?)
    } else {
        None
    };
    if args.json {
        let mut v = serde_json::to_value(sol).map_err(io_fail)?;
        v["closed_form_value"] = serde_json::json!(closed);
        if let Some(r) = &report {
            v["convergence"] = serde_json::to_value(r).map_err(io_fail)?;
        }
        writeln!(out, "{}", serde_json::to_string_pretty(&v).map_err(io_fail)?).map_err(io_fail)?;
        return Ok(EXIT_OK);
    }
    writeln!(out, "c={}", args.c).map_err(io_fail)?;
    writeln!(out, "variant={variant}").map_err(io_fail)?;
    writeln!(out, "root={}", format_sig12(sol.root)).map_err(io_fail)?;
    writeln!(out, "limit_value={}", format_sig12(sol.limit_value)).map_err(io_fail)?;
    writeln!(out, "one_minus_c={}", format_sig12(1.0 - c)).map_err(io_fail)?;
    writeln!(out, "residual={:e}", sol.residual).map_err(io_fail)?;
    if let Some(r) = report {
        writeln!(out, "N,k0,k0_over_N,value,threshold_gap,value_gap").map_err(io_fail)?;
        for row in &r.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                row.n,
                row.k0,
                format_sig12(row.fraction),
                format_sig12(row.value),
                format_sig12(row.threshold_gap),
                format_sig12(row.value_gap)
            )
            .map_err(io_fail)?;
        }
        writeln!(out, "threshold_gap_decreasing={}", r.threshold_gap_decreasing).map_err(io_fail)?;
        writeln!(out, "value_gap_decreasing={}", r.value_gap_decreasing).map_err(io_fail)?;
    }
    Ok(EXIT_OK)
}

fn rule_for(spec: &ProblemSpec, k0: Option<usize>) -> std::result::Result<ThresholdRule, Failure> {
    match k0 {
        Some(k) => ThresholdRule::new(k, spec.horizon).map_err(|e| usage("--k0", e)),
        None => solve(spec).map(|r| r.rule).map_err(|e| usage(flag_of(&e), e)),
    }
}

fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let spec = spec_of(&args.instance)?;
    let rule = rule_for(&spec, args.k0)?;
    if args.samples == 0 {
        return Err(usage("--samples", "must be at least 1"));
    }
    let est = estimate_value(&spec, rule, args.samples, args.seed).map_err(|e| usage(flag_of(&e), e))?;
    let mut json = serde_json::to_value(&est).map_err(io_fail)?;
    json["n"] = spec.horizon.into();
    json["c"] = spec.cost.value().into();
    json["variant"] = spec.variant.as_str().into();
    json["k0"] = rule.k0().into();
    let mut lines = vec![
        format!("n={}", spec.horizon),
        format!("c={}", spec.cost),
        format!("variant={}", spec.variant),
        format!("k0={}", rule.k0()),
        format!("samples={}", est.samples),
        format!("seed={}", est.seed),
        format!("mean_value_part={}", format_sig12(est.mean_value_part)),
        format!("mean_cost_prob={}", format_sig12(est.mean_cost_prob)),
        format!("recombined_value={}", format_sig12(est.recombined_value)),
        format!("std_error={}", format_sig12(est.std_error)),
        format!("unconditional_value={}", format_sig12(est.unconditional_value)),
        format!("unconditional_std_error={}", format_sig12(est.unconditional_std_error)),
    ];
    let mut code = EXIT_OK;
    if args.against_solver {
        let solved = solve(&spec).map_err(|e| usage(flag_of(&e), e))?;
        let dp_value = solved.rule_value(rule.k0()).map_err(|e| usage("--k0", e))?;
        let diff = est.recombined_value - dp_value;
        let z = if est.std_error > 0.0 {
            diff / est.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        lines.push(format!("dp_value={}", format_sig12(dp_value)));
        lines.push(format!("dp_optimal_k0={}", solved.k0()));
        lines.push(format!("z={}", format_sig12(z)));
        json["dp_value"] = dp_value.into();
        json["dp_optimal_k0"] = solved.k0().into();
        json["z"] = if z.is_finite() { z.into() } else { serde_json::Value::Null };
        if !(z.abs() <= Z_FAIL) {
            code = EXIT_VERIFY;
        }
    }
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&json).map_err(io_fail)?).map_err(io_fail)?;
    } else {
        for l in lines {
            writeln!(out, "{l}").map_err(io_fail)?;
        }
    }
    Ok(code)
}

fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> CmdResult {
    let spec = spec_of(&args.instance)?;
    let rule = rule_for(&spec, args.k0)?;
    let o = exhaustive_oracle(&spec, rule).map_err(|e| usage(flag_of(&e), e))?;
    let dist: Vec<String> = o.stop_distribution.iter().map(format_rational).collect();
    let mut json = serde_json::json!({
        "n": spec.horizon,
        "c": spec.cost.value(),
        "variant": spec.variant.as_str(),
        "k0": o.k0,
        "value": format_rational(&o.value),
        "value_float": crate::numeric::rational_to_f64(&o.value),
        "stop_distribution": dist,
        "permutations": o.permutations,
    });
    let mut code = EXIT_OK;
    let mut extra = Vec::new();
    if args.against_solver {
        let solved = exact_solve(&spec).map_err(|e| usage(flag_of(&e), e))?;
        let dp = solved.rule_value(o.k0).map_err(|e| usage("--k0", e))?;
        let matches = dp == o.value;
        extra.push(format!("dp_value={}", format_rational(&dp)));
        extra.push(format!("matches={matches}"));
        json["dp_value"] = format_rational(&dp).into();
        json["matches"] = matches.into();
        if !matches {
            code = EXIT_VERIFY;
        }
    }
    if args.json {
        writeln!(out, "{}", serde_json::to_string_pretty(&json).map_err(io_fail)?).map_err(io_fail)?;
    } else {
        writeln!(out, "n={}", spec.horizon).map_err(io_fail)?;
        writeln!(out, "c={}", spec.cost).map_err(io_fail)?;
        writeln!(out, "variant={}", spec.variant).map_err(io_fail)?;
        writeln!(out, "k0={}", o.k0).map_err(io_fail)?;
        writeln!(out, "value={}", format_rational(&o.value)).map_err(io_fail)?;
        writeln!(out, "value_float={}", format_sig12(crate::numeric::rational_to_f64(&o.value)))
            .map_err(io_fail)?;
        for (i, p) in dist.iter().enumerate() {
            writeln!(out, "P(tau={})={p}", i + 1).map_err(io_fail)?;
        }
        for l in extra {
            writeln!(out, "{l}").map_err(io_fail)?;
        }
    }
    Ok(code)
}

/// Sweep rows sorted by `N` then `c`.
pub fn plot_rows(horizons: &[usize], costs: &[Cost], variant: Variant) -> std::result::Result<Vec<PlotRow>, String> {
    let mut costs = costs.to_vec();
    costs.sort_by(|a, b| a.value().total_cmp(&b.value()));
    let mut horizons = horizons.to_vec();
    horizons.sort_unstable();
    horizons.dedup();
    let cells: Vec<(usize, Cost)> = horizons
        .iter()
        .flat_map(|&n| costs.iter().map(move |c| (n, c.clone())))
        .collect();
    cells
        .par_iter()
        .map(|(n, c)| {
            let spec = ProblemSpec::new(*n, c.clone(), variant).map_err(|e| format!("{}: {e}", flag_of(&e)))?;
            solve(&spec)
                .and_then(|r| PlotRow::new(&r))
                .map_err(|e| format!("{}: {e}", flag_of(&e)))
        })
        .collect()
}

fn cmd_plotdata(args: &PlotArgs, out: &mut dyn Write) -> CmdResult {
    let horizons = if args.n_list.is_empty() {
        if args.n_min < 1 || args.n_min > args.n_max {
            return Err(usage("--n-max", "empty grid: need 1 <= --n-min <= --n-max"));
        }
        doubling_horizons(args.n_min, args.n_max)
    } else {
        args.n_list.clone()
    };
    if args.c_list.is_empty() {
        return Err(usage("--c-list", "empty grid"));
    }
    let rows = plot_rows(&horizons, &args.c_list, args.variant.variant()).map_err(|m| Failure {
        code: EXIT_USAGE,
        message: m,
    })?;
    let meta = if args.meta { meta_lines("plotdata") } else { Vec::new() };
    write_plot_csv(&mut *out, &rows, &meta).map_err(io_fail)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["stopcost"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn solve_text() {
        let (code, out, _) = run_str(&["solve", "--n", "50", "--c", "0.1"]);
        assert_eq!(code, 0);
        assert!(out.contains("k0=8\n"), "{out}");
        assert!(out.contains("value=0.785821773240"), "{out}");
        let (code, out, _) = run_str(&["solve", "--n", "5", "--c", "0", "--exact"]);
        assert_eq!(code, 0);
        assert!(out.contains("value=13/20\n"), "{out}");
    }

    #[test]
    fn solve_validation_errors_name_the_flag() {
        let (code, _, err) = run_str(&["solve", "--n", "0", "--c", "0.1"]);
        assert_eq!(code, 2);
        assert!(err.contains("--n"), "{err}");
        let (code, _, err) = run_str(&["solve", "--n", "5", "--c", "1/2", "--no-terminal-cost"]);
        assert_eq!(code, 2);
        assert!(err.contains("--c"), "{err}");
        let (code, _, err) = run_str(&["solve", "--n", "5", "--c", "zebra"]);
        assert_eq!(code, 2);
        assert!(err.contains("--c"), "{err}");
        let (code, _, _) = run_str(&["solve", "--n", "5"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn table_single_cell() {
        let (code, out, _) = run_str(&["table", "--n-list", "1", "--c-list", "0"]);
        assert_eq!(code, 0);
        assert_eq!(
            out,
            "N,c,variant,k0,value,tie_k0,tie_value\n1,0,cost-at-end,1,0.500000000000,,\n"
        );
        let (code, _, err) = run_str(&["table", "--c-list", "0"]);
        assert_eq!(code, 2);
        assert!(err.contains("empty grid"));
    }

    #[test]
    fn asymptotic_flags() {
        let (code, out, _) = run_str(&["asymptotic", "--c", "0.1"]);
        assert_eq!(code, 0);
        assert!(out.contains("root=0.00251646"), "{out}");
        let (code, out, _) = run_str(&["asymptotic", "--c", "0.2", "--no-terminal-cost"]);
        assert_eq!(code, 0);
        assert!(out.contains("root=0.107355"), "{out}");
        let (code, out, _) = run_str(&["asymptotic", "--c", "0.2", "--variant", "no-cost-at-end"]);
        assert_eq!(code, 0);
        assert!(out.contains("root=0.107355"), "{out}");
        let (code, _, _) = run_str(&["asymptotic", "--c", "-1"]);
        assert_eq!(code, 2);
        let (code, _, _) = run_str(&["asymptotic", "--c", "0"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn oracle_text() {
        let (code, out, _) = run_str(&["oracle", "--n", "5", "--c", "0", "--k0", "2", "--against-solver"]);
        assert_eq!(code, 0, "{out}");
        assert!(out.contains("value=13/20\n"));
        assert!(out.contains("P(tau=2)=1/2\n"));
        assert!(out.contains("matches=true"));
        let (code, _, err) = run_str(&["oracle", "--n", "11", "--c", "0", "--k0", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("--n"));
        let (code, _, err) = run_str(&["oracle", "--n", "5", "--c", "0", "--k0", "6"]);
        assert_eq!(code, 2);
        assert!(err.contains("--k0"));
    }

    #[test]
    fn simulate_small() {
        let (code, out, _) = run_str(&[
            "simulate", "--n", "5", "--c", "0", "--k0", "1", "--samples", "100000", "--seed", "3",
            "--against-solver",
        ]);
        assert_eq!(code, 0, "{out}");
        let mean: f64 = out
            .lines()
            .find_map(|l| l.strip_prefix("mean_value_part="))
            .unwrap()
            .parse()
            .unwrap();
        assert!((mean - 0.5).abs() < 0.005);
    }

    #[test]
    fn plotdata_single_point_matches_solve() {
        let (code, out, _) = run_str(&["plotdata", "--n-list", "50", "--c-list", "0.1"]);
        assert_eq!(code, 0);
        let rows = crate::report::read_plot_csv(out.as_bytes()).unwrap();
        assert_eq!(rows.len(), 1);
        let (_, solved, _) = run_str(&["solve", "--n", "50", "--c", "0.1"]);
        assert!(solved.contains(&format!("value={}", format_sig12(rows[0].value))));
        assert!(solved.contains(&format!("k0={}\n", rows[0].k0)));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_str(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("solve"));
    }
}
