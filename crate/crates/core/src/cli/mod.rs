//! The machinery behind the `cyclic-accel` binary: problem files, the
//! `solve` command, the angle sweep and the hyperplane benchmark, and their
//! CSV output.

pub mod format;
pub mod problem;

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::acceleration::{solve, IterationTrace, SolveConfig, StepRule, Termination};
use crate::analysis::exact_projection;
use crate::error::{Error, Result};
use crate::geometry::{project, AffineSet};
use crate::instances::{angle_instance, HyperplaneSystem, NormalSampler};
use crate::operators::{fixset_dr, shadow_project, CycleOperator, DouglasRachfordOperator, FixedPointMap};
use crate::Vector;

use format::{fmt_summary, fmt_trace};
pub use problem::{parse_problem, ParseError, Problem};

/// Process exit codes.
pub mod exit {
    pub const CONVERGED: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const MAX_ITER: u8 = 2;
    pub const INFEASIBLE: u8 = 3;
}

/// Radius of the random starting points in both experiments.
pub const START_RADIUS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Cp,
    GkAffine,
    SymCp,
    AccelSymCp,
    Dr,
    AccelDr,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Cp,
        Method::GkAffine,
        Method::SymCp,
        Method::AccelSymCp,
        Method::Dr,
        Method::AccelDr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Cp => "cp",
            Method::GkAffine => "gk-affine",
            Method::SymCp => "sym-cp",
            Method::AccelSymCp => "accel-sym-cp",
            Method::Dr => "dr",
            Method::AccelDr => "accel-dr",
        }
    }

    fn rule(self) -> StepRule {
        match self {
            Method::Cp | Method::SymCp | Method::Dr => StepRule::UnitStep,
            Method::GkAffine => StepRule::GkAffine,
            Method::AccelSymCp => StepRule::Symmetric,
            Method::AccelDr => StepRule::SymmetricDr,
        }
    }

    fn is_dr(self) -> bool {
        matches!(self, Method::Dr | Method::AccelDr)
    }

    fn operator(self, sets: &[AffineSet]) -> Result<Box<dyn FixedPointMap>> {
        Ok(match self {
            Method::Cp | Method::GkAffine => Box::new(CycleOperator::cyclic(sets.to_vec())?),
            Method::SymCp | Method::AccelSymCp => Box::new(CycleOperator::symmetric(sets.to_vec())?),
            Method::Dr | Method::AccelDr => {
                let [c1, c2] = sets else {
                    return Err(Error::InvalidConfig(format!(
                        "{} needs exactly two sets, got {}",
                        self.name(),
                        sets.len()
                    )));
                };
                Box::new(DouglasRachfordOperator::symmetric(c1.clone(), c2.clone())?)
            }
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s == "accel-cp" {
            return Ok(Method::GkAffine);
        }
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                format!("unknown method `{s}` (expected one of {}, accel-cp)", names.join(", "))
            })
    }
}

/// Termination criterion for `solve`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Distance,
    Change,
}

impl FromStr for Criterion {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "distance" => Ok(Criterion::Distance),
            "change" => Ok(Criterion::Change),
            _ => Err(format!("unknown criterion `{s}` (expected distance or change)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub trace: IterationTrace,
    /// The point the method delivers: the last iterate, or its shadow on the
    /// first set for Douglas-Rachford.
    pub solution: Vector,
    /// `P_M(x0)` computed directly.
    pub exact: Vector,
}

impl SolveOutcome {
    pub fn exit_code(&self) -> u8 {
        if self.trace.converged {
            exit::CONVERGED
        } else {
            exit::MAX_ITER
        }
    }
}

/// Runs `method` on a parsed problem.
///
/// Distance-based termination measures against `P_M(x0)` for projection
/// methods and against `P_{Fix T}(x0)` for Douglas-Rachford, whose iterates
/// converge there rather than to the intersection.
pub fn cmd_solve(problem: &Problem, method: Method, eps: f64, max_iter: usize, criterion: Criterion) -> Result<SolveOutcome> {
    let exact = exact_projection(&problem.x0, &problem.sets)?;
    let op = method.operator(&problem.sets)?;
    let termination = match criterion {
        Criterion::Change => Termination::SuccessiveChange,
        Criterion::Distance if method.is_dr() => {
            let fix = fixset_dr(&problem.sets[0], &problem.sets[1])?;
            Termination::DistanceToSolution {
                solution: project(&problem.x0, &fix)?,
            }
        }
        Criterion::Distance => Termination::DistanceToSolution { solution: exact.clone() },
    };
    let cfg = SolveConfig::new(eps, max_iter, termination)?;
    let trace = solve(op.as_ref(), &method.rule(), &problem.x0, &cfg)?;
    let solution = if method.is_dr() {
        shadow_project(&trace.final_x, &problem.sets[0], &problem.sets[1])?
    } else {
        trace.final_x.clone()
    };
    Ok(SolveOutcome { trace, solution, exact })
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_trace).unwrap_or_default()
}

/// Per-iteration CSV: `k,t_k,successive_change,dist_to_solution`.
pub fn write_trace_csv<W: Write>(mut out: W, trace: &IterationTrace) -> io::Result<()> {
    writeln!(out, "k,t_k,successive_change,dist_to_solution")?;
    for r in &trace.records {
        writeln!(
            out,
            "{},{},{},{}",
            r.k,
            opt(r.step),
            opt(r.successive_change),
            opt(r.dist_to_solution)
        )?;
    }
    Ok(())
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone)]
pub struct AngleSweepConfig {
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_step: f64,
    pub reps: usize,
    pub eps: f64,
    pub seed: u64,
    pub max_iter: usize,
}

impl Default for AngleSweepConfig {
    fn default() -> Self {
        Self {
            theta_min: 0.01,
            theta_max: 1.57,
            theta_step: 0.01,
            reps: 10,
            eps: 1e-9,
            seed: 0,
            max_iter: 100_000,
        }
    }
}

impl AngleSweepConfig {
    pub fn thetas(&self) -> Result<Vec<f64>> {
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(self.theta_min > 0.0 && self.theta_min <= self.theta_max && self.theta_max < half_pi) {
            return Err(Error::InvalidConfig("need 0 < theta-min <= theta-max < pi/2".into()));
        }
        if !(self.theta_step > 0.0) {
            return Err(Error::InvalidConfig("theta-step must be positive".into()));
        }
        let count = ((self.theta_max - self.theta_min) / self.theta_step + 1e-9).floor() as usize + 1;
        Ok((0..count)
            .map(|i| self.theta_min + i as f64 * self.theta_step)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AngleRow {
    pub theta: f64,
    pub method: Method,
    pub mean_iterations: f64,
    pub std_iterations: f64,
    /// Replications that hit `max_iter` before converging.
    pub unconverged: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Cyclic projections against their affine acceleration on two lines
/// meeting at angle `theta`, for each `theta` of the grid.
pub fn cmd_angle_sweep(cfg: &AngleSweepConfig) -> Result<Vec<AngleRow>> {
    if cfg.reps < 1 {
        return Err(Error::InvalidConfig("reps must be at least 1".into()));
    }
    let methods = [Method::Cp, Method::GkAffine];
    let mut rows = Vec::new();
    for (i, theta) in cfg.thetas()?.into_iter().enumerate() {
        let x_star = NormalSampler::seeded(cfg.seed, 2 * i as u64).vector(2);
        let sets = angle_instance(theta, &x_star)?;
        let op = CycleOperator::cyclic(sets)?;
        let solve_cfg = SolveConfig::new(
            cfg.eps,
            cfg.max_iter,
            Termination::DistanceToSolution {
                solution: x_star.clone(),
            },
        )?
        .with_store_every(0);
        let starts: Vec<Vector> = (0..cfg.reps)
            .map(|r| NormalSampler::seeded(cfg.seed.wrapping_add(r as u64), 2 * i as u64 + 1).on_sphere(2, START_RADIUS))
            .collect();
        for method in methods {
            let mut iters = Vec::with_capacity(cfg.reps);
            let mut unconverged = 0;
            for x0 in &starts {
                let tr = solve(&op, &method.rule(), x0, &solve_cfg)?;
                iters.push(tr.iterations() as f64);
                unconverged += usize::from(!tr.converged);
            }
            let (mean, std) = mean_std(&iters);
            rows.push(AngleRow {
                theta,
                method,
                mean_iterations: mean,
                std_iterations: std,
                unconverged,
                reps: cfg.reps,
                seed: cfg.seed,
            });
        }
    }
    Ok(rows)
}

pub fn write_angle_csv<W: Write>(mut out: W, rows: &[AngleRow]) -> io::Result<()> {
    writeln!(out, "theta,method,mean_iterations,std_iterations,reps,seed")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_summary(r.theta),
            r.method,
            fmt_summary(r.mean_iterations),
            fmt_summary(r.std_iterations),
            r.reps,
            r.seed
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub m: usize,
    pub n: usize,
    pub reps: usize,
    pub eps: f64,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub max_iter: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            m: 500,
            n: 250,
            reps: 10,
            eps: 1e-6,
            seed: 0,
            methods: vec![Method::Cp, Method::GkAffine],
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub m: usize,
    pub n: usize,
    pub method: Method,
    pub mean_iterations: f64,
    pub mean_residual: f64,
    pub mean_time_s: f64,
    pub unconverged: usize,
    pub reps: usize,
    pub seed: u64,
}

/// Best approximation subject to a random consistent `A x = b` with
/// `A in R^{n x m}`, one hyperplane per row, stopping on successive change.
pub fn cmd_hyperplane_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.n >= cfg.m {
        return Err(Error::InvalidConfig("need n < m".into()));
    }
    if cfg.reps < 1 {
        return Err(Error::InvalidConfig("reps must be at least 1".into()));
    }
    if cfg.methods.iter().any(|m| m.is_dr()) {
        return Err(Error::InvalidConfig("Douglas-Rachford methods need exactly two sets".into()));
    }
    let system = HyperplaneSystem::generate(&mut NormalSampler::seeded(cfg.seed, 0), cfg.m, cfg.n)?;
    let solve_cfg = SolveConfig::new(cfg.eps, cfg.max_iter, Termination::SuccessiveChange)?.with_store_every(0);
    let starts: Vec<Vector> = (0..cfg.reps)
        .map(|r| NormalSampler::seeded(cfg.seed.wrapping_add(r as u64), 1).on_sphere(cfg.m, START_RADIUS))
        .collect();
    let mut rows = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let op = method.operator(&system.sets)?;
        let (mut iters, mut residual, mut time) = (0.0, 0.0, 0.0);
        let mut unconverged = 0;
        for x0 in &starts {
            let tr = solve(op.as_ref(), &method.rule(), x0, &solve_cfg)?;
            iters += tr.iterations() as f64;
            residual += system.residual(&tr.final_x);
            time += tr.elapsed_s;
            unconverged += usize::from(!tr.converged);
        }
        let reps = cfg.reps as f64;
        rows.push(BenchRow {
            m: cfg.m,
            n: cfg.n,
            method,
            mean_iterations: iters / reps,
            mean_residual: residual / reps,
            mean_time_s: time / reps,
            unconverged,
            reps: cfg.reps,
            seed: cfg.seed,
        });
    }
    Ok(rows)
}

/// Writes the benchmark table; with `timing == false` the time column is 0.
pub fn write_bench_csv<W: Write>(mut out: W, rows: &[BenchRow], timing: bool) -> io::Result<()> {
    writeln!(out, "m,n,method,mean_iterations,mean_residual,mean_time_s,reps,seed")?;
    for r in rows {
        let time = if timing { r.mean_time_s } else { 0.0 };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.m,
            r.n,
            r.method,
            fmt_summary(r.mean_iterations),
            fmt_summary(r.mean_residual),
            fmt_summary(time),
            r.reps,
            r.seed
        )?;
    }
    Ok(())
}

/// Maps library errors onto process exit codes.
pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Infeasible { .. } => exit::INFEASIBLE,
        _ => exit::USAGE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert_eq!("accel-cp".parse::<Method>().unwrap(), Method::GkAffine);
        assert!("fast".parse::<Method>().is_err());
    }

    #[test]
    fn default_theta_grid() {
        let t = AngleSweepConfig::default().thetas().unwrap();
        assert_eq!(t.len(), 157);
        assert!((t[0] - 0.01).abs() < 1e-15);
        assert!((t[156] - 1.57).abs() < 1e-12);
    }

    #[test]
    fn theta_range_validation() {
        let bad = AngleSweepConfig {
            theta_max: 1.6,
            ..AngleSweepConfig::default()
        };
        assert!(bad.thetas().is_err());
        let bad = AngleSweepConfig {
            theta_min: 0.0,
            ..AngleSweepConfig::default()
        };
        assert!(bad.thetas().is_err());
    }

    #[test]
    fn mean_and_sample_std() {
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
        let (m, s) = mean_std(&[1.0, 2.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bench_rejects_bad_shapes() {
        let cfg = BenchConfig {
            m: 10,
            n: 10,
            ..BenchConfig::default()
        };
        assert!(cmd_hyperplane_bench(&cfg).is_err());
        let cfg = BenchConfig {
            m: 10,
            n: 5,
            methods: vec![Method::Dr],
            ..BenchConfig::default()
        };
        assert!(cmd_hyperplane_bench(&cfg).is_err());
    }

    #[test]
    fn dr_needs_two_sets() {
        let p = parse_problem("dim 2\nx0 1 1\nhyperplane 1 0 0\nhyperplane 0 1 0\nhyperplane 1 1 0\n").unwrap();
        assert!(matches!(
            cmd_solve(&p, Method::AccelDr, 1e-9, 100, Criterion::Distance),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn infeasible_problem_maps_to_exit_3() {
        let p = parse_problem("dim 2\nx0 1 1\nhyperplane 1 0 0\nhyperplane 1 0 1\n").unwrap();
        let e = cmd_solve(&p, Method::Cp, 1e-9, 100, Criterion::Distance).unwrap_err();
        assert_eq!(exit_code_for(&e), exit::INFEASIBLE);
    }
}
