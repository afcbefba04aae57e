use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cyclic_accel::cli::{
    cmd_angle_sweep, cmd_hyperplane_bench, cmd_solve, exit, exit_code_for, parse_problem, write_angle_csv,
    write_bench_csv, write_trace_csv, AngleSweepConfig, BenchConfig, Criterion, Method,
};

#[derive(Parser)]
#[command(name = "cyclic-accel", version, about = "Cyclic projections with Gearhart-Koshy acceleration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the best approximation problem described by a problem file.
    Solve {
        problem: PathBuf,
        #[arg(long, default_value = "gk-affine")]
        method: Method,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        /// `distance` (to the exact solution) or `change` (between iterates).
        #[arg(long, default_value = "distance")]
        criterion: Criterion,
        /// Per-iteration trace CSV destination.
        #[arg(long, alias = "trace-out")]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
    },
    /// Iterations of cyclic projections and their acceleration against the
    /// angle between two lines in the plane.
    AngleSweep {
        #[arg(long, default_value_t = 0.01)]
        theta_min: f64,
        #[arg(long, default_value_t = 1.57)]
        theta_max: f64,
        #[arg(long, default_value_t = 0.01)]
        theta_step: f64,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Best approximation subject to a random consistent linear system.
    HyperplaneBench {
        #[arg(long, default_value_t = 500)]
        m: usize,
        #[arg(long, default_value_t = 250)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Comma-separated methods.
        #[arg(long, value_delimiter = ',', default_value = "cp,gk-affine")]
        methods: Vec<Method>,
        /// Write 0 in the time column so output is reproducible byte for byte.
        #[arg(long)]
        no_timing: bool,
        #[command(flatten)]
        common: Common,
    },
}

fn open_out(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn run_solve(
    problem: &Path,
    method: Method,
    eps: f64,
    criterion: Criterion,
    out: Option<&Path>,
    max_iter: usize,
) -> ExitCode {
    let text = match std::fs::read_to_string(problem) {
        Ok(t) => t,
        Err(e) => return fail(exit::USAGE, format!("{}: {e}", problem.display())),
    };
    let problem = match parse_problem(&text) {
        Ok(p) => p,
        Err(e) => return fail(exit::USAGE, e),
    };
    let outcome = match cmd_solve(&problem, method, eps, max_iter, criterion) {
        Ok(o) => o,
        Err(e) => return fail(exit_code_for(&e), e),
    };
    if let Some(path) = out {
        let written = open_out(Some(path)).and_then(|mut w| {
            write_trace_csv(&mut w, &outcome.trace)?;
            w.flush()
        });
        if let Err(e) = written {
            return fail(exit::USAGE, e);
        }
    }
    let coords: Vec<String> = outcome.solution.iter().map(|v| format!("{v:.17e}")).collect();
    println!("method {method}");
    println!("iterations {}", outcome.trace.iterations());
    println!("converged {}", outcome.trace.converged);
    println!("x {}", coords.join(" "));
    ExitCode::from(outcome.exit_code())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(exit::USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Solve {
            problem,
            method,
            eps,
            criterion,
            out,
            seed: _,
            max_iter,
        } => run_solve(&problem, method, eps, criterion, out.as_deref(), max_iter),
        Command::AngleSweep {
            theta_min,
            theta_max,
            theta_step,
            reps,
            eps,
            common,
        } => {
            let cfg = AngleSweepConfig {
                theta_min,
                theta_max,
                theta_step,
                reps,
                eps,
                seed: common.seed,
                max_iter: common.max_iter,
            };
            let rows = match cmd_angle_sweep(&cfg) {
                Ok(r) => r,
                Err(e) => return fail(exit_code_for(&e), e),
            };
            let unconverged: usize = rows.iter().map(|r| r.unconverged).sum();
            if unconverged > 0 {
                eprintln!("warning: {unconverged} runs stopped at --max-iter {}", common.max_iter);
            }
            match open_out(common.out.as_deref()).and_then(|mut w| {
                write_angle_csv(&mut w, &rows)?;
                w.flush()
            }) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(exit::USAGE, e),
            }
        }
        Command::HyperplaneBench {
            m,
            n,
            reps,
            eps,
            methods,
            no_timing,
            common,
        } => {
            let cfg = BenchConfig {
                m,
                n,
                reps,
                eps,
                seed: common.seed,
                methods,
                max_iter: common.max_iter,
            };
            let rows = match cmd_hyperplane_bench(&cfg) {
                Ok(r) => r,
                Err(e) => return fail(exit_code_for(&e), e),
            };
            let unconverged: usize = rows.iter().map(|r| r.unconverged).sum();
            if unconverged > 0 {
                eprintln!("warning: {unconverged} runs stopped at --max-iter {}", common.max_iter);
            }
            match open_out(common.out.as_deref()).and_then(|mut w| {
                write_bench_csv(&mut w, &rows, !no_timing)?;
                w.flush()
            }) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(exit::USAGE, e),
            }
        }
    }
}
