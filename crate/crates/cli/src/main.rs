use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use robustkit::cases::{median, run_sweep, write_csv, CaseGeometry, CaseKind, CaseSpec, SweepSpec};
use robustkit::io::{emit_result, export_counterpart, parse_model, parse_point, OutputFormat};
use robustkit::model::Model;
use robustkit::solvers::{check_robust_feasibility, solve, SolveError, SolveOptions, SolverKind, Status};
use robustkit::transform::{nominal_substitute, robust_counterpart};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_UNBOUNDED: u8 = 3;
const EXIT_LIMIT: u8 = 4;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;
const EXIT_NO_INPUT: u8 = 66;
const EXIT_SOFTWARE: u8 = 70;
const EXIT_IO: u8 = 74;
/// `check` found a violated constraint.
const EXIT_NOT_ROBUST: u8 = 1;

#[derive(Parser)]
#[command(name = "robustkit", version, about = "Robust linear and mixed-integer optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a model document.
    Solve {
        model: PathBuf,
        #[arg(long, default_value = "reformulate")]
        solver: SolverKind,
        #[arg(long, default_value_t = 1e-6)]
        cut_tol: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 1e-6)]
        conic_tol: f64,
        #[arg(long, default_value_t = 1e-6)]
        mip_gap: f64,
        /// Write the JSON result here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the deterministic counterpart here.
        #[arg(long)]
        export_counterpart: Option<PathBuf>,
        /// Format of the result printed on stdout.
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
    /// Solve a generated case over a grid of set scales and write CSV.
    Sweep {
        case: CaseKind,
        #[arg(long, value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        #[arg(long)]
        geometry: CaseGeometry,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Instance size: `n` for portfolio and knapsack, `m,n` for facility.
        #[arg(long, value_delimiter = ',')]
        size: Option<Vec<usize>>,
        #[arg(long, default_value = "reformulate")]
        solver: SolverKind,
        /// Worker threads; 0 uses all cores.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Report the worst case of every constraint at a candidate point.
    Check {
        model: PathBuf,
        #[arg(long)]
        point: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
}

#[derive(Copy, Clone, clap::ValueEnum)]
enum Format {
    Json,
    Table,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_NO_INPUT, format!("cannot read {}: {e}", path.display())))
}

fn write(path: &Path, text: &[u8]) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    parse_model(&read(path)?).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", path.display())))
}

fn solve_error(e: SolveError) -> Failure {
    let code = match e {
        SolveError::Kernel(_) => EXIT_SOFTWARE,
        _ => EXIT_DATA,
    };
    Failure::new(code, e.to_string())
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::Optimal => 0,
        Status::Infeasible => EXIT_INFEASIBLE,
        Status::Unbounded => EXIT_UNBOUNDED,
        Status::IterLimit | Status::NodeLimit => EXIT_LIMIT,
    }
}

fn run(cmd: Command) -> Result<u8, Failure> {
    match cmd {
        Command::Solve { model, solver, cut_tol, max_iter, conic_tol, mip_gap, out, export_counterpart: cp, format } => {
            let m = load_model(&model)?;
            let opts = SolveOptions { cut_tol, max_iter, conic_tol, mip_gap, ..SolveOptions::default() };
            if let Some(path) = cp {
                let dm = match solver {
                    SolverKind::Nominal => nominal_substitute(&m),
                    _ => robust_counterpart(&m, opts.ldr).map_err(|e| Failure::new(EXIT_DATA, e.to_string()))?.model,
                };
                write(&path, export_counterpart(&dm).as_bytes())?;
            }
            let res = solve(&m, solver, &opts).map_err(solve_error)?;
            log::info!(
                "{solver}: {:?} after {} rounds, {} cuts, {:.1} ms",
                res.status,
                res.stats.iterations,
                res.stats.cuts_added,
                res.stats.solve_ms
            );
            if let Some(path) = out {
                write(&path, emit_result(&res, OutputFormat::Json).as_bytes())?;
            }
            let format = match format {
                Format::Json => OutputFormat::Json,
                Format::Table => OutputFormat::Table,
            };
            print!("{}", emit_result(&res, format));
            Ok(status_code(res.status))
        }
        Command::Sweep { case, alphas, geometry, seed, out, size, solver, jobs } => {
            if alphas.iter().any(|a| !a.is_finite() || *a < 0.0) {
                return Err(Failure::new(EXIT_USAGE, "alphas must be finite and nonnegative"));
            }
            let size = size.unwrap_or_else(|| CaseSpec::default_size(case));
            let expected = if case == CaseKind::Facility { 2 } else { 1 };
            if size.len() != expected || size.contains(&0) {
                return Err(Failure::new(EXIT_USAGE, format!("{case} takes {expected} positive size value(s)")));
            }
            let spec = SweepSpec { case, size, alphas, geometry, seed, solver, options: SolveOptions::default(), jobs };
            let rows = run_sweep(&spec);
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
            write(&out, &buf)?;
            let times: Vec<f64> = rows.iter().map(|r| r.transform_ms).collect();
            let mut stdout = std::io::stdout().lock();
            for r in &rows {
                let norm = r.normalized.map_or("-".to_string(), |v| format!("{v:.6}"));
                let _ = writeln!(stdout, "alpha {:<8} {:<12} normalized {norm}", r.alpha, r.status);
            }
            if let Some(t) = median(&times) {
                let _ = writeln!(stdout, "median transform_ms {t:.3}");
            }
            let failed = rows.iter().any(|r| r.status != "optimal");
            Ok(if failed { EXIT_LIMIT } else { 0 })
        }
        Command::Check { model, point, tol } => {
            let m = load_model(&model)?;
            let p = parse_point(&read(&point)?).map_err(|e| Failure::new(EXIT_DATA, format!("{}: {e}", point.display())))?;
            let report = check_robust_feasibility(&m, &p, tol).map_err(solve_error)?;
            let text = serde_json::to_string_pretty(&report).expect("reports always serialize");
            println!("{text}");
            Ok(if report.feasible { 0 } else { EXIT_NOT_ROBUST })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ROBUSTKIT_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("robustkit: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
