//! Command-line front end: compute orthogonal-polynomial tables for the
//! jump-perturbed Laguerre weight, run the verification suites, sweep the
//! jump position and export machine-readable reports.
//!
//! Exit codes: 0 all checks passed, 1 verification failure, 2
//! configuration error, 3 precision ceiling / convergence failure.

use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use luejump::dynamics::{differential_suite, pv_residual_with, sigma_residual_with, Stencil};
use luejump::identities::verify_suite;
use luejump::moments::gamma_complete;
use luejump::oracle::oracle_suite;
use luejump::orthopoly::build_ortho;
use luejump::report::{ResidualRecord, ResidualReport};
use luejump::{auxiliary, CoreError, JumpWeight, Precision};
use rug::Float;
use serde_json::json;

mod config;

use config::{OutputFormat, RunConfig, Spacing, SuiteSelection};

#[derive(Parser)]
#[command(
    name = "luejump",
    about = "Orthogonal polynomials and Painleve V machinery for the Laguerre weight with a jump",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute tables of recurrence coefficients and auxiliary quantities.
    Compute(CommonArgs),
    /// Run verification suites and write a residual report.
    Verify(CommonArgs),
    /// Sweep the jump position t and emit per-n trajectories.
    Sweep(CommonArgs),
    /// Gap-probability preset: compute with A = 0, B = 1.
    Gap(CommonArgs),
    /// Independent quadrature oracle checks (n <= 3).
    Oracle(CommonArgs),
}

/// Flags shared by every subcommand; any flag overrides the value read
/// from `--config`.
#[derive(Args)]
struct CommonArgs {
    /// Configuration file (JSON or key=value lines).
    #[arg(long)]
    config: Option<String>,

    /// Exponent alpha of the Laguerre factor x^alpha e^{-x}.
    #[arg(long)]
    alpha: Option<f64>,

    /// Jump level A below t.
    #[arg(long = "a-level", visible_alias = "A")]
    a: Option<f64>,

    /// Jump increment B at t.
    #[arg(long = "b-level", visible_alias = "B")]
    b: Option<f64>,

    /// Linear-statistics parameter lambda (with --beta, alternative to A/B).
    #[arg(long, requires = "beta", conflicts_with_all = ["a", "b"])]
    lambda: Option<f64>,

    /// Linear-statistics parameter beta, |beta| < 2.
    #[arg(long, requires = "lambda")]
    beta: Option<f64>,

    /// Largest polynomial degree.
    #[arg(long)]
    n_max: Option<usize>,

    /// Explicit t grid, comma-separated decimals.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<String>>,

    /// Range start for a generated t grid.
    #[arg(long)]
    t_min: Option<f64>,

    /// Range end for a generated t grid.
    #[arg(long)]
    t_max: Option<f64>,

    /// Number of points in the generated t grid.
    #[arg(long)]
    t_count: Option<usize>,

    /// Spacing of the generated grid.
    #[arg(long, value_enum)]
    t_spacing: Option<Spacing>,

    /// Working precision in decimal digits.
    #[arg(long)]
    digits: Option<u32>,

    /// Certified output digits (working precision must exceed this by 20).
    #[arg(long)]
    target_digits: Option<u32>,

    /// Residual tolerance for pass/fail classification.
    #[arg(long)]
    tolerance: Option<f64>,

    /// Report format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,

    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<String>,

    /// Which verification suites to run.
    #[arg(long, value_enum)]
    suite: Option<SuiteSelection>,

    /// Disable the worker pool and evaluate grid points sequentially.
    #[arg(long)]
    sequential: bool,

    /// Include the quadrature-backed identities in the algebraic suite.
    #[arg(long)]
    quadrature: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, mode) = match &cli.command {
        Command::Compute(a) => (a, Mode::Compute),
        Command::Verify(a) => (a, Mode::Verify),
        Command::Sweep(a) => (a, Mode::Sweep),
        Command::Gap(a) => (a, Mode::Gap),
        Command::Oracle(a) => (a, Mode::Oracle),
    };
    let cfg = match RunConfig::resolve(args, mode == Mode::Gap) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("configuration error: {msg}");
            return ExitCode::from(2);
        }
    };
    let code = match run(&cfg, mode) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    };
    ExitCode::from(code)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Compute,
    Verify,
    Sweep,
    Gap,
    Oracle,
}

/// Maps core errors onto the exit-code contract: invalid parameters are
/// configuration errors (2); precision, conditioning and budget failures
/// are the precision ceiling (3); anything else is a verification
/// failure (1).
fn exit_code_for(e: &CoreError) -> u8 {
    match e {
        CoreError::InvalidParameter(_) | CoreError::IndexOutOfRange { .. } => 2,
        CoreError::PrecisionFailure(_)
        | CoreError::ConditioningFailure { .. }
        | CoreError::PrecisionCeiling { .. }
        | CoreError::ConsistencyFailure(_)
        | CoreError::DivisionGuard(_)
        | CoreError::QuadratureBudgetExceeded { .. } => 3,
        CoreError::SingularLocus { .. } | CoreError::SingularityEncountered { .. } => 1,
    }
}

fn run(cfg: &RunConfig, mode: Mode) -> Result<u8, CoreError> {
    let prec = Precision::new(cfg.digits, cfg.target_digits)?;
    let grid: Vec<Float> = cfg
        .t_grid
        .iter()
        .map(|s| luejump::precision::parse_decimal(s, &prec))
        .collect::<Result<_, _>>()?;
    let w = cfg.weight(&prec)?;
    match mode {
        Mode::Compute | Mode::Gap => cmd_compute(cfg, &w, &grid, &prec),
        Mode::Sweep => cmd_sweep(cfg, &w, &grid, &prec),
        Mode::Verify => cmd_verify(cfg, &w, &grid, &prec),
        Mode::Oracle => {
            let report = oracle_suite(&w, cfg.n_max, &grid, &prec, cfg.tolerance, cfg.parallel)?;
            finish_verify(cfg, report)
        }
    }
}

/// Classical Laguerre norms `h_j = j! Gamma(j + alpha + 1)` for the
/// generating-function column `G_n = prod_{j<n} h_j / h_j^{classical}`.
fn classical_norms(alpha: &Float, n_max: usize, prec: &Precision) -> Result<Vec<Float>, CoreError> {
    let bits = prec.bits();
    let mut out = Vec::with_capacity(n_max + 1);
    let mut jfact = Float::with_val(bits, 1);
    let mut g = gamma_complete(&(alpha.clone() + 1u32), prec)?;
    for j in 0..=n_max {
        out.push(jfact.clone() * &g);
        jfact *= Float::with_val(bits, j as u32 + 1);
        g *= alpha.clone() + Float::with_val(bits, j as u32 + 1);
    }
    Ok(out)
}

const COMPUTE_COLUMNS: [&str; 10] = [
    "n", "t", "alpha_n", "beta_n", "h_n", "R_n", "r_n", "S_n", "H_n", "G",
];

fn cmd_compute(
    cfg: &RunConfig,
    w: &JumpWeight,
    grid: &[Float],
    prec: &Precision,
) -> Result<u8, CoreError> {
    if grid.is_empty() {
        return Err(CoreError::InvalidParameter("empty t grid".into()));
    }
    let classical = classical_norms(w.alpha(), cfg.n_max, prec)?;
    let mut rows: Vec<Vec<String>> = Vec::new();
    for t in grid {
        let wt = w.with_t(t.clone())?;
        let ortho = build_ortho(&wt, cfg.n_max, prec)?;
        // Auxiliary quantities need t > 0 and B != 0; leave those columns
        // blank on degenerate grid points instead of aborting the table.
        let aux = auxiliary::aux_table(&ortho, &wt, prec).ok();
        let mut g = Float::with_val(prec.bits(), 1);
        for n in 0..=cfg.n_max {
            let fmt = |x: &Float| prec.format(x);
            let opt = |v: Option<&Float>| v.map(fmt).unwrap_or_default();
            rows.push(vec![
                n.to_string(),
                fmt(t),
                fmt(ortho.alpha(n)?),
                if n >= 1 { fmt(ortho.beta(n)?) } else { String::new() },
                fmt(ortho.h(n)?),
                opt(aux.as_ref().and_then(|a| a.r_big(n).ok())),
                opt(aux.as_ref().and_then(|a| a.r_small(n).ok())),
                opt(aux.as_ref().and_then(|a| a.s(n).ok())),
                opt(aux.as_ref().and_then(|a| a.h_aux(n).ok())),
                fmt(&g),
            ]);
            g *= ortho.h(n)?.clone() / &classical[n];
        }
    }
    emit_table(cfg, &COMPUTE_COLUMNS, &rows, prec)?;
    Ok(0)
}

const SWEEP_COLUMNS: [&str; 8] = [
    "n", "t", "S_n", "H_n", "pv_residual", "pv_status", "sigma_residual", "sigma_status",
];

fn cmd_sweep(
    cfg: &RunConfig,
    w: &JumpWeight,
    grid: &[Float],
    prec: &Precision,
) -> Result<u8, CoreError> {
    if grid.len() < 2 {
        return Err(CoreError::InvalidParameter(
            "sweep needs a t grid with at least 2 points".into(),
        ));
    }
    let n_max = cfg.n_max.max(1);
    let points: Vec<Float> = grid.to_vec();
    let per_point = luejump::grid::map_grid(points, cfg.parallel, |t| {
        sweep_point(w, n_max, &t, prec, cfg.tolerance)
    });
    let rows: Vec<Vec<String>> = per_point.into_iter().flatten().collect();
    emit_table(cfg, &SWEEP_COLUMNS, &rows, prec)?;
    Ok(0)
}

fn sweep_point(
    w: &JumpWeight,
    n_max: usize,
    t: &Float,
    prec: &Precision,
    tol: f64,
) -> Vec<Vec<String>> {
    let t_str = prec.format(t);
    let stencil = match w
        .with_t(t.clone())
        .and_then(|wt| Stencil::build(&wt, n_max, t, prec))
    {
        Ok(s) => s,
        Err(e) => {
            // one marker row; the sweep continues on the rest of the grid
            let mut row = vec![String::new(); SWEEP_COLUMNS.len()];
            row[0] = "0".into();
            row[1] = t_str;
            row[5] = format!("build-error: {e}");
            return vec![row];
        }
    };
    let (_, aux) = stencil.center();
    let mut rows = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let s_val = aux.s(n).map(|x| prec.format(x)).unwrap_or_default();
        let h_val = aux.h_aux(n).map(|x| prec.format(x)).unwrap_or_default();
        let (pv_res, pv_status) = match pv_residual_with(&stencil, n, tol) {
            Ok(rec) => (format!("{:.3e}", rec.residual), rec.status.as_str().to_string()),
            Err(e) => (String::new(), format!("error: {e}")),
        };
        let (sg_res, sg_status) = match sigma_residual_with(&stencil, n, tol) {
            Ok(recs) => {
                let sigma = recs.iter().find(|r| r.id == "SIGMA");
                match sigma {
                    Some(rec) => (format!("{:.3e}", rec.residual), rec.status.as_str().to_string()),
                    None => (String::new(), "missing".into()),
                }
            }
            Err(e) => (String::new(), format!("error: {e}")),
        };
        rows.push(vec![
            n.to_string(),
            t_str.clone(),
            s_val,
            h_val,
            pv_res,
            pv_status,
            sg_res,
            sg_status,
        ]);
    }
    rows
}

fn cmd_verify(
    cfg: &RunConfig,
    w: &JumpWeight,
    grid: &[Float],
    prec: &Precision,
) -> Result<u8, CoreError> {
    let mut records: Vec<ResidualRecord> = Vec::new();
    let run_algebraic = matches!(cfg.suite, SuiteSelection::Algebraic | SuiteSelection::All);
    let run_differential =
        matches!(cfg.suite, SuiteSelection::Differential | SuiteSelection::All);
    let run_oracle = matches!(cfg.suite, SuiteSelection::Oracle | SuiteSelection::All);

    if run_algebraic {
        let report = verify_suite(
            w,
            cfg.n_max,
            grid,
            prec,
            cfg.tolerance,
            cfg.include_quadrature,
            cfg.parallel,
        )?;
        records.extend(report.records);
    }
    if run_differential {
        let report = differential_suite(
            w,
            cfg.n_max.max(1),
            grid,
            prec,
            cfg.tolerance,
            cfg.parallel,
        )?;
        records.extend(report.records);
    }
    if run_oracle {
        let report = oracle_suite(w, cfg.n_max, grid, prec, cfg.tolerance, cfg.parallel)?;
        records.extend(report.records);
    }
    let grid_strs = grid.iter().map(|t| prec.format(t)).collect();
    let report = ResidualReport::new(
        w.describe(prec),
        prec.digits(),
        prec.target_digits(),
        grid_strs,
        records,
    );
    finish_verify(cfg, report)
}

/// Prints the summary, lists the worst offenders on failure, writes the
/// full report and maps the outcome onto the exit-code contract.
fn finish_verify(cfg: &RunConfig, report: ResidualReport) -> Result<u8, CoreError> {
    let s = &report.summary;
    println!(
        "verify: {} pass, {} fail, {} skipped, {} config errors",
        s.pass, s.fail, s.skipped, s.config_errors
    );
    if s.fail > 0 {
        let mut failed: Vec<&ResidualRecord> = report
            .records
            .iter()
            .filter(|r| r.status == luejump::report::RecordStatus::Fail)
            .collect();
        failed.sort_by(|a, b| b.residual.partial_cmp(&a.residual).unwrap());
        println!("worst offenders:");
        for r in failed.iter().take(10) {
            println!(
                "  {} n={} t={} residual {:.3e} (tolerance {:.3e})",
                r.id, r.n, r.t, r.residual, r.tolerance
            );
        }
    }
    write_report(cfg, &report)?;
    Ok(if s.config_errors > 0 {
        2
    } else if s.fail > 0 {
        1
    } else {
        0
    })
}

fn write_report(cfg: &RunConfig, report: &ResidualReport) -> Result<(), CoreError> {
    let body = match cfg.format {
        OutputFormat::Json => {
            let mut doc = report.to_json();
            doc["config"] = cfg.to_json();
            let mut s = serde_json::to_string_pretty(&doc).expect("report serialization");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut s = String::new();
            writeln!(s, "{}", ResidualReport::CSV_HEADER.join(",")).unwrap();
            for row in report.to_csv_rows() {
                writeln!(s, "{}", csv_line(&row)).unwrap();
            }
            s
        }
    };
    deliver(cfg, body)
}

fn emit_table(
    cfg: &RunConfig,
    columns: &[&str],
    rows: &[Vec<String>],
    prec: &Precision,
) -> Result<(), CoreError> {
    let body = match cfg.format {
        OutputFormat::Csv => {
            let mut s = String::new();
            writeln!(s, "{}", columns.join(",")).unwrap();
            for row in rows {
                writeln!(s, "{}", csv_line(row)).unwrap();
            }
            s
        }
        OutputFormat::Json => {
            let rows_json: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    let mut obj = serde_json::Map::new();
                    for (c, v) in columns.iter().zip(row) {
                        obj.insert(c.to_string(), json!(v));
                    }
                    serde_json::Value::Object(obj)
                })
                .collect();
            let doc = json!({
                "config": cfg.to_json(),
                "digits": prec.digits(),
                "target_digits": prec.target_digits(),
                "rows": rows_json,
            });
            let mut s = serde_json::to_string_pretty(&doc).expect("table serialization");
            s.push('\n');
            s
        }
    };
    deliver(cfg, body)
}

/// RFC-4180-style quoting: fields containing commas, quotes or newlines
/// are wrapped and inner quotes doubled.
fn csv_line(row: &[String]) -> String {
    row.iter()
        .map(|f| {
            if f.contains(',') || f.contains('"') || f.contains('\n') {
                format!("\"{}\"", f.replace('"', "\"\""))
            } else {
                f.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn deliver(cfg: &RunConfig, body: String) -> Result<(), CoreError> {
    match &cfg.output {
        Some(path) => std::fs::write(path, body)
            .map_err(|e| CoreError::InvalidParameter(format!("cannot write {path}: {e}"))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}
