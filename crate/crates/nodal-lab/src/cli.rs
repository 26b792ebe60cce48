//! Command-line front end: solve, sweep, verify, constants, and bubbles
//! commands emitting pretty tables, CSV (with `#` metadata lines and
//! 17-significant-digit numbers), or JSON. Exit codes: 0 pass, 1
//! verification failure, 2 usage error, 3 numeric failure.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::asymptotics::{
    self, accelerate_sequence, default_schedule, quantity_spec, verification_schedule, QuantityId,
    SweepResult, TheoremReport,
};
use crate::bubbles::{self, RemainderReport};
use crate::constants::{constants_via_recurrence, ConstantsTable};
use crate::error::Error;
use crate::params::{Bc, ProblemParams};
use crate::solutions::{
    check_neumann_integral_identity, dirichlet_solution, neumann_solution, NodalSolution,
};

const EXIT_PASS: i32 = 0;
const EXIT_VERIFY_FAIL: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_NUMERIC: i32 = 3;

/// Entry point used by the binary; parses `std::env::args` and returns
/// the process exit code.
pub fn run_from_env() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_PASS,
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    }
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::InvalidParams(_) | Error::IndexError { .. } => EXIT_USAGE,
        _ => EXIT_NUMERIC,
    }
}

#[derive(Parser)]
#[command(
    name = "nodal-lab",
    version,
    about = "Verification laboratory for nodal radial solutions of the slightly subcritical equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct one ball solution and print its feature table.
    Solve(SolveArgs),
    /// Sweep one scaled quantity over an eps schedule.
    Sweep(SweepArgs),
    /// Verify limit theorems, constants routes, or integral identities.
    Verify(VerifyArgs),
    /// Print the limit-constant table for (n, m).
    Constants(ConstantsArgs),
    /// Compare bubble superpositions against numerical solutions.
    Bubbles(BubblesArgs),
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum BcArg {
    Dirichlet,
    Neumann,
    #[value(name = "whole-space")]
    WholeSpace,
}

impl From<BcArg> for Bc {
    fn from(bc: BcArg) -> Bc {
        match bc {
            BcArg::Dirichlet => Bc::Dirichlet,
            BcArg::Neumann => Bc::Neumann,
            BcArg::WholeSpace => Bc::WholeSpace,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Default, ValueEnum)]
enum Format {
    #[default]
    #[value(name = "pretty-table")]
    PrettyTable,
    Csv,
    Json,
}

#[derive(Args)]
struct SolveArgs {
    /// Space dimension (>= 3).
    #[arg(long)]
    n: u32,
    /// Subcriticality parameter in (0, 4/(n-2)).
    #[arg(long)]
    eps: f64,
    /// Number of nodal regions (Neumann needs m >= 2).
    #[arg(long)]
    m: usize,
    /// Boundary condition (solve supports the ball problems).
    #[arg(long, value_enum)]
    bc: BcArg,
    /// Sample-grid size in the JSON/CSV record.
    #[arg(long, default_value_t = 101)]
    samples: usize,
    #[arg(long, value_enum, default_value_t = Format::PrettyTable)]
    format: Format,
    /// Write the artifact here instead of stdout (a summary still prints).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum)]
    bc: BcArg,
    /// Quantity to track, as name:index (e.g. zero_slope:1,
    /// pointwise_value:0.5).
    #[arg(long)]
    quantity: String,
    /// First eps of the geometric schedule (default depends on n, m).
    #[arg(long)]
    eps_start: Option<f64>,
    /// Ratio between consecutive eps values, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    eps_factor: f64,
    /// Number of schedule points.
    #[arg(long)]
    eps_count: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::PrettyTable)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Theorem mode: dimension.
    #[arg(long)]
    n: Option<u32>,
    /// Theorem mode: nodal regions.
    #[arg(long)]
    m: Option<usize>,
    /// Theorem mode: boundary condition.
    #[arg(long, value_enum)]
    bc: Option<BcArg>,
    /// Cross-validate recurrence vs closed-form constants tables.
    #[arg(long)]
    constants: bool,
    /// Check Pohozaev, energy, and Neumann integral identities.
    #[arg(long)]
    identities: bool,
    /// Constants mode: largest dimension.
    #[arg(long, default_value_t = 8)]
    n_max: u32,
    /// Constants mode: largest tower size.
    #[arg(long, default_value_t = 8)]
    m_max: usize,
    /// Pass tolerance override.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    eps_start: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    eps_factor: f64,
    #[arg(long)]
    eps_count: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::PrettyTable)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value_t = Format::PrettyTable)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BubblesArgs {
    #[arg(long)]
    n: u32,
    /// Tower size (ball) or bubble count M (whole space).
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum)]
    bc: BcArg,
    #[arg(long)]
    eps: f64,
    #[arg(long, value_enum, default_value_t = Format::PrettyTable)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn dispatch(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Constants(args) => cmd_constants(args),
        Command::Bubbles(args) => cmd_bubbles(args),
    }
}

/// 17 significant digits: round-trip safe for binary64.
fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn meta_line(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "# {key}: {value}");
}

fn meta_header(command: &str) -> String {
    let mut s = String::new();
    meta_line(&mut s, "generator", concat!("nodal-lab v", env!("CARGO_PKG_VERSION")));
    meta_line(&mut s, "command", command);
    s
}

/// Writes `artifact` to `--out` when given (printing `summary` to
/// stdout), otherwise prints the artifact itself.
fn emit(out: &Option<PathBuf>, artifact: &str, summary: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(path, artifact).map_err(|e| {
                Error::DomainError(format!("writing {}: {e}", path.display()))
            })?;
            print!("{summary}");
            println!("artifact written to {}", path.display());
            Ok(())
        }
        None => {
            print!("{artifact}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Error> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::DomainError(format!("serializing report: {e}")))
}

/// Simple fixed-width table: pads every cell to its column width.
fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut s = String::new();
    let fmt_row = |cells: Vec<&str>, widths: &[usize]| -> String {
        let mut line = String::new();
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            let _ = write!(line, "{cell:<width$}", width = widths[i]);
        }
        line.trim_end().to_string()
    };
    let _ = writeln!(s, "{}", fmt_row(header.to_vec(), &widths));
    let rule_len = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    let _ = writeln!(s, "{}", "-".repeat(rule_len));
    for row in rows {
        let _ = writeln!(s, "{}", fmt_row(row.iter().map(|c| c.as_str()).collect(), &widths));
    }
    s
}

// ---------------------------------------------------------------- solve

fn build_ball_solution(n: u32, eps: f64, m: usize, bc: Bc) -> Result<NodalSolution, Error> {
    match bc {
        Bc::Dirichlet => dirichlet_solution(n, eps, m),
        Bc::Neumann => neumann_solution(n, eps, m),
        Bc::WholeSpace => Err(Error::InvalidParams(
            "solve constructs ball solutions; use sweep/verify for whole-space quantities".into(),
        )),
    }
}

fn solution_feature_table(sol: &NodalSolution) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "solution: n={} eps={} m={} bc={} sign={:+}",
        sol.params().n(),
        sol.params().eps(),
        sol.m(),
        sol.bc(),
        sol.sign()
    );
    let _ = writeln!(
        s,
        "scale radius R = {}   amplitude A = {}",
        g17(sol.scale_radius()),
        g17(sol.amplitude_factor())
    );
    let rows: Vec<Vec<String>> = sol
        .criticals()
        .iter()
        .map(|c| {
            vec![format!("delta_{}", c.k), g17(c.radius), g17(c.value)]
        })
        .collect();
    s.push_str(&render_table(&["critical", "radius", "value"], &rows));
    let rows: Vec<Vec<String>> = sol
        .zeros()
        .iter()
        .map(|z| vec![format!("rho_{}", z.k), g17(z.radius), g17(z.slope)])
        .collect();
    s.push_str(&render_table(&["zero", "radius", "slope"], &rows));
    s
}

fn cmd_solve(args: SolveArgs) -> Result<i32, Error> {
    if args.samples < 2 {
        return Err(Error::InvalidParams(format!(
            "need at least 2 sample points, got {}",
            args.samples
        )));
    }
    let sol = build_ball_solution(args.n, args.eps, args.m, args.bc.into())?;
    let record = sol.record(args.samples)?;
    let table = solution_feature_table(&sol);
    let artifact = match args.format {
        Format::PrettyTable => table.clone(),
        Format::Json => to_json(&record)?,
        Format::Csv => {
            let mut s = meta_header("solve");
            meta_line(&mut s, "n", args.n);
            meta_line(&mut s, "m", args.m);
            meta_line(&mut s, "bc", sol.bc());
            meta_line(&mut s, "eps", g17(args.eps));
            meta_line(&mut s, "sign", sol.sign());
            meta_line(&mut s, "scale_radius", g17(sol.scale_radius()));
            meta_line(&mut s, "amplitude_factor", g17(sol.amplitude_factor()));
            s.push_str("x,u,du\n");
            for p in &record.samples {
                let _ = writeln!(s, "{},{},{}", g17(p.x), g17(p.u), g17(p.du));
            }
            s
        }
    };
    emit(&args.out, &artifact, &table)?;
    Ok(EXIT_PASS)
}

// ---------------------------------------------------------------- sweep

fn build_schedule(
    n: u32,
    m: usize,
    eps_start: Option<f64>,
    eps_factor: f64,
    eps_count: Option<usize>,
) -> Result<Vec<f64>, Error> {
    if eps_start.is_none() && eps_count.is_none() {
        // Default shape depends on the tower size: deep towers need a
        // higher floor (integration range grows like eps^{-(2m-1)/(n-2)}).
        return Ok(if m <= 2 { default_schedule(n) } else { verification_schedule(n, m) });
    }
    if !(eps_factor > 0.0 && eps_factor < 1.0) {
        return Err(Error::InvalidParams(format!(
            "eps factor {eps_factor} outside (0, 1)"
        )));
    }
    let start = eps_start.unwrap_or_else(|| (0.8 * ProblemParams::eps_max(n)).min(0.2));
    let count = eps_count.unwrap_or(8);
    if count == 0 {
        return Err(Error::InvalidParams("eps count must be positive".into()));
    }
    Ok((0..count).map(|j| start * eps_factor.powi(j as i32)).collect())
}

/// Running prefix extrapolants: entry `i` accelerates rows `0..=i`.
fn running_extrapolants(result: &SweepResult) -> Vec<Option<f64>> {
    let scaled: Vec<f64> = result.rows.iter().map(|r| r.scaled).collect();
    (0..scaled.len())
        .map(|i| {
            if i >= 2 {
                accelerate_sequence(&scaled[..=i]).ok().map(|e| e.value)
            } else {
                None
            }
        })
        .collect()
}

fn sweep_csv(result: &SweepResult, schedule: &[f64]) -> String {
    let mut s = meta_header("sweep");
    meta_line(&mut s, "n", result.spec.n());
    meta_line(&mut s, "m", result.spec.m());
    meta_line(&mut s, "bc", result.spec.bc);
    meta_line(&mut s, "quantity", result.spec.id);
    meta_line(&mut s, "theoretical_exponent", g17(result.spec.theoretical_exponent));
    meta_line(&mut s, "theoretical_constant", g17(result.spec.theoretical_constant));
    meta_line(&mut s, "eps_schedule_points", schedule.len());
    if let Some(fit) = &result.fit {
        meta_line(&mut s, "fitted_exponent", g17(fit.exponent));
        meta_line(&mut s, "fitted_constant", g17(fit.constant));
        meta_line(&mut s, "fit_residual", g17(fit.residual));
    }
    if let Some(ex) = &result.extrapolation {
        meta_line(&mut s, "extrapolated", g17(ex.value));
        meta_line(&mut s, "extrapolation_error_estimate", g17(ex.error_estimate));
        meta_line(&mut s, "accelerated", ex.accelerated);
    }
    s.push_str("eps,raw,scaled,extrapolant\n");
    let extrapolants = running_extrapolants(result);
    for (row, ex) in result.rows.iter().zip(extrapolants) {
        let ex_cell = ex.map(g17).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{ex_cell}", g17(row.eps), g17(row.raw), g17(row.scaled));
    }
    s
}

fn sweep_pretty(result: &SweepResult) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "sweep: {} (n={} m={} bc={})",
        result.spec.id,
        result.spec.n(),
        result.spec.m(),
        result.spec.bc
    );
    let _ = writeln!(
        s,
        "scaling (kappa_n eps)^{}  target constant {}",
        result.spec.theoretical_exponent,
        g17(result.spec.theoretical_constant)
    );
    let extrapolants = running_extrapolants(result);
    let rows: Vec<Vec<String>> = result
        .rows
        .iter()
        .zip(extrapolants)
        .map(|(r, ex)| {
            vec![
                g17(r.eps),
                g17(r.raw),
                g17(r.scaled),
                ex.map(g17).unwrap_or_default(),
            ]
        })
        .collect();
    s.push_str(&render_table(&["eps", "raw", "scaled", "extrapolant"], &rows));
    if let Some(fit) = &result.fit {
        let _ = writeln!(
            s,
            "fit: raw ~ {} * eps^{}   (rms log residual {:.2e}, expected rate {})",
            g17(fit.constant),
            fit.exponent,
            fit.residual,
            result.spec.expected_raw_rate()
        );
    }
    if let Some(ex) = &result.extrapolation {
        let rel = (ex.value - result.spec.theoretical_constant).abs()
            / result.spec.theoretical_constant.abs().max(f64::MIN_POSITIVE);
        let _ = writeln!(
            s,
            "extrapolated {}  (error estimate {:.2e}, accelerated {}, rel gap to target {:.3e})",
            g17(ex.value),
            ex.error_estimate,
            ex.accelerated,
            rel
        );
    }
    s
}

fn cmd_sweep(args: SweepArgs) -> Result<i32, Error> {
    let id: QuantityId = args.quantity.parse()?;
    let bc: Bc = args.bc.into();
    let spec = quantity_spec(args.n, args.m, bc, id)?;
    let schedule = build_schedule(args.n, args.m, args.eps_start, args.eps_factor, args.eps_count)?;
    let result = asymptotics::sweep(&spec, args.n, args.m, &schedule)?;
    let artifact = match args.format {
        Format::PrettyTable => sweep_pretty(&result),
        Format::Csv => sweep_csv(&result, &schedule),
        Format::Json => to_json(&result)?,
    };
    emit(&args.out, &artifact, &sweep_pretty(&result))?;
    Ok(EXIT_PASS)
}

// --------------------------------------------------------------- verify

fn theorem_pretty(report: &TheoremReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "theorem verification: n={} m={} bc={} tolerance={}",
        report.n, report.m, report.bc, report.tolerance
    );
    let _ = writeln!(
        s,
        "eps schedule: {}",
        report
            .eps_schedule
            .iter()
            .map(|e| format!("{e}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    let rows: Vec<Vec<String>> = report
        .entries
        .iter()
        .map(|e| {
            vec![
                if e.passed { "PASS".into() } else { "FAIL".into() },
                e.spec.id.to_string(),
                g17(e.spec.theoretical_constant),
                g17(e.extrapolated),
                format!("{:.3e}", e.relative_error),
                e.fitted_exponent.map(|x| format!("{x:.4}")).unwrap_or_default(),
                format!("{:.4}", e.expected_raw_rate),
            ]
        })
        .collect();
    s.push_str(&render_table(
        &["verdict", "quantity", "constant", "extrapolated", "rel_error", "fit_rate", "theory_rate"],
        &rows,
    ));
    let passed = report.entries.iter().filter(|e| e.passed).count();
    let _ = writeln!(s, "{passed}/{} quantities within tolerance", report.entries.len());
    s
}

fn theorem_csv(report: &TheoremReport) -> String {
    let mut s = meta_header("verify");
    meta_line(&mut s, "n", report.n);
    meta_line(&mut s, "m", report.m);
    meta_line(&mut s, "bc", report.bc);
    meta_line(&mut s, "tolerance", g17(report.tolerance));
    meta_line(
        &mut s,
        "eps_schedule",
        report.eps_schedule.iter().map(|e| g17(*e)).collect::<Vec<_>>().join(" "),
    );
    s.push_str(
        "quantity,theoretical_constant,extrapolated,relative_error,fitted_exponent,theory_rate,passed\n",
    );
    for e in &report.entries {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            e.spec.id,
            g17(e.spec.theoretical_constant),
            g17(e.extrapolated),
            g17(e.relative_error),
            e.fitted_exponent.map(g17).unwrap_or_default(),
            g17(e.expected_raw_rate),
            e.passed
        );
    }
    s
}

fn verify_theorem_mode(args: &VerifyArgs) -> Result<i32, Error> {
    let (n, m, bc) = match (args.n, args.m, args.bc) {
        (Some(n), Some(m), Some(bc)) => (n, m, bc),
        _ => {
            return Err(Error::InvalidParams(
                "theorem verification needs --n, --m, and --bc".into(),
            ))
        }
    };
    let schedule = match (args.eps_start, args.eps_count) {
        (None, None) => verification_schedule(n, m),
        _ => build_schedule(n, m, args.eps_start, args.eps_factor, args.eps_count)?,
    };
    let report = asymptotics::verify_theorem(n, m, bc.into(), &schedule, args.tol)?;
    let artifact = match args.format {
        Format::PrettyTable => theorem_pretty(&report),
        Format::Csv => theorem_csv(&report),
        Format::Json => to_json(&report)?,
    };
    emit(&args.out, &artifact, &theorem_pretty(&report))?;
    Ok(if report.all_passed() { EXIT_PASS } else { EXIT_VERIFY_FAIL })
}

#[derive(serde::Serialize)]
struct ConstantsCheckRow {
    n: u32,
    m: usize,
    max_relative_deviation: f64,
    passed: bool,
}

fn verify_constants_mode(args: &VerifyArgs) -> Result<i32, Error> {
    if args.n.is_some() || args.m.is_some() || args.bc.is_some() {
        return Err(Error::InvalidParams(
            "--constants checks all (n, m) up to --n-max/--m-max; drop --n/--m/--bc".into(),
        ));
    }
    if args.n_max < 3 || args.m_max < 1 {
        return Err(Error::InvalidParams("need --n-max >= 3 and --m-max >= 1".into()));
    }
    let tol = args.tol.unwrap_or(1e-12);
    let mut rows = Vec::new();
    let mut all = true;
    for n in 3..=args.n_max {
        let recurrence = constants_via_recurrence(n, args.m_max)?;
        for (idx, rec) in recurrence.iter().enumerate() {
            let m = idx + 1;
            let closed = ConstantsTable::closed_form(n, m)?;
            let dev = closed.max_relative_deviation(rec)?;
            let passed = dev <= tol;
            all &= passed;
            rows.push(ConstantsCheckRow { n, m, max_relative_deviation: dev, passed });
        }
    }
    let pretty = {
        let table_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    if r.passed { "PASS".into() } else { "FAIL".into() },
                    r.n.to_string(),
                    r.m.to_string(),
                    format!("{:.3e}", r.max_relative_deviation),
                ]
            })
            .collect();
        let mut s = format!("constants cross-validation (tolerance {tol:.1e})\n");
        s.push_str(&render_table(&["verdict", "n", "m", "max_rel_deviation"], &table_rows));
        s
    };
    let artifact = match args.format {
        Format::PrettyTable => pretty.clone(),
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = meta_header("verify");
            meta_line(&mut s, "mode", "constants");
            meta_line(&mut s, "tolerance", g17(tol));
            s.push_str("n,m,max_relative_deviation,passed\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{}",
                    r.n,
                    r.m,
                    g17(r.max_relative_deviation),
                    r.passed
                );
            }
            s
        }
    };
    emit(&args.out, &artifact, &pretty)?;
    Ok(if all { EXIT_PASS } else { EXIT_VERIFY_FAIL })
}

#[derive(serde::Serialize)]
struct IdentityCheckRow {
    bc: Bc,
    eps: f64,
    pohozaev_residual: f64,
    energy_relative_gap: f64,
    neumann_integral_residual: Option<f64>,
    passed: bool,
}

fn verify_identities_mode(args: &VerifyArgs) -> Result<i32, Error> {
    let (n, m) = match (args.n, args.m) {
        (Some(n), Some(m)) => (n, m),
        _ => return Err(Error::InvalidParams("identity checks need --n and --m".into())),
    };
    let pohozaev_tol = args.tol.unwrap_or(1e-8);
    let identity_tol = args.tol.unwrap_or(1e-6);
    let eps_max = ProblemParams::eps_max(n);
    let eps_list: Vec<f64> =
        [0.5, 0.1].iter().copied().filter(|&e| e < 0.9 * eps_max).collect();
    let eps_list = if eps_list.is_empty() { vec![0.4 * eps_max] } else { eps_list };
    let bcs: Vec<Bc> = match args.bc {
        Some(bc) => vec![bc.into()],
        None if m >= 2 => vec![Bc::Dirichlet, Bc::Neumann],
        None => vec![Bc::Dirichlet],
    };
    let mut rows = Vec::new();
    let mut all = true;
    for &bc in &bcs {
        for &eps in &eps_list {
            let sol = build_ball_solution(n, eps, m, bc)?;
            let pohozaev = sol.pohozaev_residual()?;
            let energy = sol.energy()?;
            let energy_gap = (energy.grad_sq - energy.lp_integral).abs()
                / energy.lp_integral.abs().max(f64::MIN_POSITIVE);
            let intlem = match bc {
                Bc::Neumann => Some(check_neumann_integral_identity(&sol)?),
                _ => None,
            };
            let passed = pohozaev <= pohozaev_tol
                && energy_gap <= identity_tol
                && intlem.is_none_or(|r| r <= identity_tol);
            all &= passed;
            rows.push(IdentityCheckRow {
                bc,
                eps,
                pohozaev_residual: pohozaev,
                energy_relative_gap: energy_gap,
                neumann_integral_residual: intlem,
                passed,
            });
        }
    }
    let pretty = {
        let table_rows: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                vec![
                    if r.passed { "PASS".into() } else { "FAIL".into() },
                    r.bc.to_string(),
                    format!("{}", r.eps),
                    format!("{:.3e}", r.pohozaev_residual),
                    format!("{:.3e}", r.energy_relative_gap),
                    r.neumann_integral_residual
                        .map(|x| format!("{x:.3e}"))
                        .unwrap_or_default(),
                ]
            })
            .collect();
        let mut s = format!(
            "identity checks: n={n} m={m} (pohozaev tol {pohozaev_tol:.1e}, identity tol {identity_tol:.1e})\n"
        );
        s.push_str(&render_table(
            &["verdict", "bc", "eps", "pohozaev", "energy_gap", "neumann_integral"],
            &table_rows,
        ));
        s
    };
    let artifact = match args.format {
        Format::PrettyTable => pretty.clone(),
        Format::Json => to_json(&rows)?,
        Format::Csv => {
            let mut s = meta_header("verify");
            meta_line(&mut s, "mode", "identities");
            meta_line(&mut s, "n", n);
            meta_line(&mut s, "m", m);
            meta_line(&mut s, "pohozaev_tolerance", g17(pohozaev_tol));
            meta_line(&mut s, "identity_tolerance", g17(identity_tol));
            s.push_str("bc,eps,pohozaev_residual,energy_relative_gap,neumann_integral_residual,passed\n");
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    r.bc,
                    g17(r.eps),
                    g17(r.pohozaev_residual),
                    g17(r.energy_relative_gap),
                    r.neumann_integral_residual.map(g17).unwrap_or_default(),
                    r.passed
                );
            }
            s
        }
    };
    emit(&args.out, &artifact, &pretty)?;
    Ok(if all { EXIT_PASS } else { EXIT_VERIFY_FAIL })
}

fn cmd_verify(args: VerifyArgs) -> Result<i32, Error> {
    match (args.constants, args.identities) {
        (true, true) => Err(Error::InvalidParams(
            "--constants and --identities are separate verification modes".into(),
        )),
        (true, false) => verify_constants_mode(&args),
        (false, true) => verify_identities_mode(&args),
        (false, false) => verify_theorem_mode(&args),
    }
}

// ------------------------------------------------------------ constants

fn constants_rows(table: &ConstantsTable) -> Vec<(String, f64)> {
    let m = table.m();
    let mut rows: Vec<(String, f64)> = vec![
        ("kappa_n".into(), table.kappa()),
        ("gamma_n".into(), table.gamma_n()),
    ];
    let mut push_family =
        |name: &str, lo: usize, hi: usize, get: &dyn Fn(usize) -> Option<f64>| {
            for k in lo..=hi {
                if let Some(v) = get(k) {
                    rows.push((format!("{name}:{k}"), v));
                }
            }
        };
    push_family("dirichlet crit_value", 1, m, &|k| table.dirichlet_crit_value(k).ok());
    if m >= 2 {
        push_family("dirichlet crit_radius", 1, m - 1, &|k| table.dirichlet_crit_radius(k).ok());
    }
    push_family("dirichlet zero_slope", 1, m, &|k| table.dirichlet_zero_slope(k).ok());
    push_family("dirichlet zero_radius", 1, m, &|k| table.dirichlet_zero_radius(k).ok());
    if m >= 2 {
        push_family("neumann crit_value", 1, m, &|k| table.neumann_crit_value(k).ok());
        push_family("neumann crit_radius", 1, m - 1, &|k| table.neumann_crit_radius(k).ok());
        push_family("neumann zero_slope", 1, m - 1, &|k| table.neumann_zero_slope(k).ok());
        push_family("neumann zero_radius", 1, m - 1, &|k| table.neumann_zero_radius(k).ok());
    }
    push_family("alpha", 0, m, &|k| table.alpha(k).ok());
    if m >= 2 {
        push_family("beta", 1, m, &|k| table.beta(k).ok());
    }
    let ws = table.whole_space();
    rows.push(("whole-space zero_radius".into(), ws.zero_radius));
    rows.push(("whole-space zero_slope".into(), ws.zero_slope));
    if let Some(v) = ws.crit_radius {
        rows.push(("whole-space crit_radius".into(), v));
    }
    if let Some(v) = ws.crit_value {
        rows.push(("whole-space crit_value".into(), v));
    }
    rows
}

fn cmd_constants(args: ConstantsArgs) -> Result<i32, Error> {
    let table = ConstantsTable::closed_form(args.n, args.m)?;
    let rows = constants_rows(&table);
    let pretty = {
        let table_rows: Vec<Vec<String>> =
            rows.iter().map(|(name, v)| vec![name.clone(), g17(*v)]).collect();
        let mut s = format!("limit constants for n={} m={}\n", args.n, args.m);
        s.push_str(&render_table(&["constant", "value"], &table_rows));
        s
    };
    let artifact = match args.format {
        Format::PrettyTable => pretty.clone(),
        Format::Json => to_json(&table)?,
        Format::Csv => {
            let mut s = meta_header("constants");
            meta_line(&mut s, "n", args.n);
            meta_line(&mut s, "m", args.m);
            s.push_str("constant,value\n");
            for (name, v) in &rows {
                let _ = writeln!(s, "{name},{}", g17(*v));
            }
            s
        }
    };
    emit(&args.out, &artifact, &pretty)?;
    Ok(EXIT_PASS)
}

// -------------------------------------------------------------- bubbles

fn remainder_csv(report: &RemainderReport) -> String {
    let mut s = meta_header("bubbles");
    meta_line(&mut s, "n", report.n);
    meta_line(&mut s, "m", report.m);
    meta_line(&mut s, "bc", report.bc);
    meta_line(&mut s, "eps", g17(report.eps));
    meta_line(&mut s, "grid_points", report.grid.len());
    meta_line(&mut s, "remainder_sup", g17(report.sup));
    if let Some(t) = report.compact_target {
        meta_line(&mut s, "compact_target", g17(t));
    }
    if let Some(d) = report.compact_deviation {
        meta_line(&mut s, "compact_deviation", g17(d));
    }
    s.push_str("r,u_numeric,tower,remainder\n");
    for i in 0..report.grid.len() {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            g17(report.grid[i]),
            g17(report.solution[i]),
            g17(report.tower[i]),
            g17(report.remainder[i])
        );
    }
    s
}

fn remainder_pretty(report: &RemainderReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "bubble-tower remainder: n={} m={} bc={} eps={}",
        report.n, report.m, report.bc, report.eps
    );
    let _ = writeln!(s, "grid: {} log-spaced points on (1e-3, 1]", report.grid.len());
    let _ = writeln!(s, "sup |remainder| = {}", g17(report.sup));
    if let (Some(t), Some(d)) = (report.compact_target, report.compact_deviation) {
        let _ = writeln!(s, "compact target {}  deviation on [1/4, 1]: {}", g17(t), g17(d));
    }
    s
}

fn cmd_bubbles(args: BubblesArgs) -> Result<i32, Error> {
    match args.bc {
        BcArg::WholeSpace => {
            let report = bubbles::whole_space_ansatz_check(args.n, args.eps, args.m)?;
            let pretty = {
                let rows: Vec<Vec<String>> = report
                    .scaled_differences
                    .iter()
                    .enumerate()
                    .map(|(i, d)| vec![(i + 1).to_string(), g17(*d)])
                    .collect();
                let mut s = format!(
                    "whole-space ansatz: n={} eps={} bubbles={}\n",
                    report.n, report.eps, report.bubbles
                );
                s.push_str(&render_table(&["k", "scaled_difference"], &rows));
                let _ = writeln!(
                    s,
                    "tail sup {} vs bound {}  (window [{}, {}])",
                    g17(report.tail_sup),
                    g17(report.tail_bound),
                    g17(report.probe_window.0),
                    g17(report.probe_window.1)
                );
                s
            };
            let artifact = match args.format {
                Format::PrettyTable => pretty.clone(),
                Format::Json => to_json(&report)?,
                Format::Csv => {
                    let mut s = meta_header("bubbles");
                    meta_line(&mut s, "n", report.n);
                    meta_line(&mut s, "eps", g17(report.eps));
                    meta_line(&mut s, "bubbles", report.bubbles);
                    meta_line(&mut s, "tail_sup", g17(report.tail_sup));
                    meta_line(&mut s, "tail_bound", g17(report.tail_bound));
                    s.push_str("k,scaled_difference\n");
                    for (i, d) in report.scaled_differences.iter().enumerate() {
                        let _ = writeln!(s, "{},{}", i + 1, g17(*d));
                    }
                    s
                }
            };
            emit(&args.out, &artifact, &pretty)?;
            Ok(EXIT_PASS)
        }
        bc => {
            let grid = bubbles::default_remainder_grid();
            let report = match bc {
                BcArg::Dirichlet => bubbles::dirichlet_remainder(args.n, args.eps, args.m, &grid)?,
                BcArg::Neumann => bubbles::neumann_remainder(args.n, args.eps, args.m, &grid)?,
                BcArg::WholeSpace => unreachable!("handled above"),
            };
            let artifact = match args.format {
                Format::PrettyTable => remainder_pretty(&report),
                Format::Csv => remainder_csv(&report),
                Format::Json => to_json(&report)?,
            };
            emit(&args.out, &artifact, &remainder_pretty(&report))?;
            Ok(EXIT_PASS)
        }
    }
}
