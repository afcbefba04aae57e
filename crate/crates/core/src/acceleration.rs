//! Line-search step rules and the iteration driver.
//!
//! Every accelerated scheme iterates `x_{k+1} = x_k + t_k (Op(x_k) - x_k)`
//! where `t_k` minimizes the distance to the (unknown) solution along the
//! line through `x_k` and `Op(x_k)`. For affine operators the minimizer can
//! be read off the stage increments of `Op`:
//!
//! ```text
//! t_k = 1/2 + sum_i |stage_{i-1} - stage_i|^2 / (2 |x_k - Op(x_k)|^2)
//! ```
//!
//! which needs no intersection point. When `x_k` is (numerically) fixed the
//! step falls back to `t_k = 1`.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::linalg::{check_dim, check_finite};
use crate::operators::{FixedPointMap, OperatorKind, StageTrace};
use crate::Vector;

/// Default relative threshold below which `|x - Op(x)|` counts as zero.
pub const DEFAULT_FIX_TOL: f64 = 1e-14;

/// Tolerance for accepting an oracle point as a fixed point.
pub const ORACLE_MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub enum StepRule {
    /// Plain fixed-point iteration.
    UnitStep,
    /// Original formula for linear subspaces: `<x - Qx, x> / |x - Qx|^2`.
    GkLinear,
    /// Stage-increment formula, valid for affine subspaces.
    GkAffine,
    /// Stage-increment formula on the symmetric cycle, started at `S(x_0)`.
    Symmetric,
    /// Accelerated symmetric Douglas-Rachford, started at `T(x_0)`.
    SymmetricDr,
    /// Exact line search towards a known fixed point `m`.
    Oracle { m: Vector },
}

impl StepRule {
    /// Builds [`StepRule::Oracle`] after checking `m` is fixed by `op`.
    pub fn oracle(m: Vector, op: &dyn FixedPointMap) -> Result<Self> {
        check_dim(&m, op.dim())?;
        let moved = (op.apply(&m)? - &m).norm();
        if moved > ORACLE_MEMBERSHIP_TOL * (1.0 + m.norm()) {
            return Err(Error::InvalidConfig(format!(
                "oracle point is not fixed by the operator (moved by {moved:.3e})"
            )));
        }
        Ok(StepRule::Oracle { m })
    }

    /// Symmetric schemes start from `Op(x_0)` rather than `x_0`.
    pub fn starts_from_image(&self) -> bool {
        matches!(self, StepRule::Symmetric | StepRule::SymmetricDr)
    }

    fn check_operator(&self, op: &dyn FixedPointMap) -> Result<()> {
        let ok = match self {
            StepRule::UnitStep | StepRule::GkAffine | StepRule::Oracle { .. } => true,
            StepRule::GkLinear => op.is_linear(),
            StepRule::Symmetric => op.kind() == OperatorKind::SymmetricCycle,
            StepRule::SymmetricDr => op.kind() == OperatorKind::SymmetricDouglasRachford,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!(
                "step rule {self:?} does not apply to a {:?} operator",
                op.kind()
            )))
        }
    }
}

fn increment_formula(increments_sq: f64, total_sq: f64) -> Result<f64> {
    if total_sq == 0.0 {
        return Err(Error::DegenerateStep);
    }
    let t = 0.5 + increments_sq / (2.0 * total_sq);
    if !t.is_finite() {
        return Err(Error::DegenerateStep);
    }
    Ok(t)
}

/// `<x - Qx, x> / |x - Qx|^2`; only meaningful when every set is linear.
pub fn step_gk_linear(x: &Vector, qx: &Vector) -> Result<f64> {
    check_dim(qx, x.len())?;
    let d = x - qx;
    let den = d.norm_squared();
    if den == 0.0 {
        return Err(Error::DegenerateStep);
    }
    Ok(d.dot(x) / den)
}

/// Stage-increment step for an affine cycle trace.
pub fn step_gk_affine(trace: &StageTrace) -> Result<f64> {
    let t = increment_formula(trace.stage_increments_sq(), trace.total_displacement().norm_squared())?;
    debug_assert!(t >= 0.5);
    Ok(t)
}

/// Stage-increment step for a symmetric cycle trace (`2n` stages).
pub fn step_symmetric(trace: &StageTrace) -> Result<f64> {
    if !trace.len().is_multiple_of(2) {
        return Err(Error::InvalidConfig(format!(
            "a symmetric cycle trace has an even number of stages, got {}",
            trace.len()
        )));
    }
    step_gk_affine(trace)
}

/// Step for the symmetric Douglas-Rachford operator from
/// `z`, `T_{M1,M2}(z)` and `T(z)`.
pub fn step_dr(z: &Vector, half: &Vector, tz: &Vector) -> Result<f64> {
    check_dim(half, z.len())?;
    check_dim(tz, z.len())?;
    let num = (z - half).norm_squared() + (half - tz).norm_squared();
    increment_formula(num, (z - tz).norm_squared())
}

/// `<x - Qx, x - m> / |x - Qx|^2` for a known fixed point `m`.
pub fn step_oracle(x: &Vector, qx: &Vector, m: &Vector) -> Result<f64> {
    check_dim(qx, x.len())?;
    check_dim(m, x.len())?;
    let d = x - qx;
    let den = d.norm_squared();
    if den == 0.0 {
        return Err(Error::DegenerateStep);
    }
    Ok(d.dot(&(x - m)) / den)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// Stop once `|x_k - solution| < eps`.
    DistanceToSolution { solution: Vector },
    /// Stop once `|x_k - x_{k-1}| < eps`.
    SuccessiveChange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub eps: f64,
    pub max_iter: usize,
    pub termination: Termination,
    /// Relative threshold for the `Op(x_k) = x_k` branch.
    pub fix_tol: f64,
    /// Keep every `store_every`-th iterate in the trace (0 keeps none; the
    /// final iterate is always available).
    pub store_every: usize,
}

impl SolveConfig {
    pub fn new(eps: f64, max_iter: usize, termination: Termination) -> Result<Self> {
        let cfg = Self {
            eps,
            max_iter,
            termination,
            fix_tol: DEFAULT_FIX_TOL,
            store_every: 1,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_fix_tol(mut self, fix_tol: f64) -> Result<Self> {
        self.fix_tol = fix_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_store_every(mut self, store_every: usize) -> Self {
        self.store_every = store_every;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.eps > 0.0) {
            return Err(Error::InvalidConfig("eps must be positive".into()));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidConfig("max_iter must be at least 1".into()));
        }
        if !(self.fix_tol > 0.0) {
            return Err(Error::InvalidConfig("fix_tol must be positive".into()));
        }
        Ok(())
    }

    fn solution(&self) -> Option<&Vector> {
        match &self.termination {
            Termination::DistanceToSolution { solution } => Some(solution),
            Termination::SuccessiveChange => None,
        }
    }
}

/// One iterate of a run. `step` is the `t` that produced this iterate from
/// the previous one.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub x: Option<Vector>,
    pub step: Option<f64>,
    pub dist_to_solution: Option<f64>,
    pub successive_change: Option<f64>,
    /// `|x_k - x*| / |x_{k-1} - x*|` when the solution is known.
    pub observed_factor: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub records: Vec<IterationRecord>,
    pub converged: bool,
    pub final_x: Vector,
    /// Wall time of the iteration loop.
    pub elapsed_s: f64,
}

impl IterationTrace {
    /// Number of operator applications performed after initialization.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.k)
    }

    pub fn steps(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().filter_map(|r| r.step)
    }

    pub fn distances(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.dist_to_solution).collect()
    }
}

/// Runs the fixed-point scheme selected by `rule` on `op` from `x0`.
///
/// Returns the trace even when `max_iter` is exhausted, with
/// `converged == false`.
pub fn solve(op: &dyn FixedPointMap, rule: &StepRule, x0: &Vector, cfg: &SolveConfig) -> Result<IterationTrace> {
    check_dim(x0, op.dim())?;
    check_finite(x0)?;
    cfg.validate()?;
    rule.check_operator(op)?;
    let solution = cfg.solution();
    if let Some(s) = solution {
        check_dim(s, op.dim())?;
    }

    let start = Instant::now();
    let mut x = if rule.starts_from_image() {
        op.apply(x0)?
    } else {
        x0.clone()
    };
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure { iteration: 0 });
    }

    let keep = |k: usize| cfg.store_every != 0 && k.is_multiple_of(cfg.store_every);
    let mut dist = solution.map(|s| (&x - s).norm());
    let mut records = vec![IterationRecord {
        k: 0,
        x: keep(0).then(|| x.clone()),
        step: None,
        dist_to_solution: dist,
        successive_change: None,
        observed_factor: None,
    }];
    let mut converged = dist.is_some_and(|d| d < cfg.eps);

    let mut k = 0;
    while !converged && k < cfg.max_iter {
        let (qx, increments) = match rule {
            StepRule::GkAffine | StepRule::Symmetric | StepRule::SymmetricDr => op.apply_accumulating(&x)?,
            _ => (op.apply(&x)?, 0.0),
        };
        let total_sq = (&x - &qx).norm_squared();
        let fixed = total_sq.sqrt() <= cfg.fix_tol * (1.0 + x.norm());
        let (next, t) = if fixed || matches!(rule, StepRule::UnitStep) {
            (qx, 1.0)
        } else {
            let t = match rule {
                StepRule::UnitStep => unreachable!(),
                StepRule::GkLinear => step_gk_linear(&x, &qx)?,
                StepRule::GkAffine | StepRule::Symmetric | StepRule::SymmetricDr => {
                    increment_formula(increments, total_sq)?
                }
                StepRule::Oracle { m } => step_oracle(&x, &qx, m)?,
            };
            let mut next = x.clone();
            next.axpy(t, &(qx - &x), 1.0);
            (next, t)
        };
        k += 1;
        if !t.is_finite() || next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure { iteration: k });
        }
        let change = (&next - &x).norm();
        let prev_dist = dist;
        dist = solution.map(|s| (&next - s).norm());
        let observed_factor = match (dist, prev_dist) {
            (Some(d), Some(p)) if p > cfg.eps * cfg.eps => Some(d / p),
            _ => None,
        };
        converged = match &cfg.termination {
            Termination::DistanceToSolution { .. } => dist.is_some_and(|d| d < cfg.eps),
            Termination::SuccessiveChange => change < cfg.eps,
        };
        x = next;
        records.push(IterationRecord {
            k,
            x: keep(k).then(|| x.clone()),
            step: Some(t),
            dist_to_solution: dist,
            successive_change: Some(change),
            observed_factor,
        });
    }

    Ok(IterationTrace {
        records,
        converged,
        final_x: x,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::AffineSet;
    use crate::operators::CycleOperator;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn lines(theta: f64, x_star: &Vector) -> Vec<AffineSet> {
        vec![
            AffineSet::span(x_star.clone(), vec![v(&[1.0, 0.0])]).unwrap(),
            AffineSet::span(x_star.clone(), vec![v(&[theta.cos(), theta.sin()])]).unwrap(),
        ]
    }

    /// Dense scan of `t` in `[lo, hi]` minimizing `|x + t d - target|`.
    fn scan_argmin(x: &Vector, d: &Vector, target: &Vector, lo: f64, hi: f64, step: f64) -> f64 {
        let n = ((hi - lo) / step).round() as usize;
        (0..=n)
            .map(|i| lo + i as f64 * step)
            .map(|t| (t, (x + t * d - target).norm_squared()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap()
            .0
    }

    #[test]
    fn linear_step_when_image_is_zero() {
        let x = v(&[1.0, -2.0, 0.5]);
        assert_eq!(step_gk_linear(&x, &Vector::zeros(3)).unwrap(), 1.0);
    }

    #[test]
    fn linear_step_matches_scan() {
        let origin = v(&[0.0, 0.0]);
        let q = CycleOperator::cyclic(lines(std::f64::consts::FRAC_PI_4, &origin)).unwrap();
        let x = v(&[1.0 + 0.013, 1.0 - 0.021]);
        let qx = q.apply(&x).unwrap();
        let t = step_gk_linear(&x, &qx).unwrap();
        let scanned = scan_argmin(&x, &(&qx - &x), &origin, -2.0, 3.0, 1e-6);
        assert!((t - scanned).abs() <= 1e-6, "t = {t}, scan = {scanned}");
        let affine = step_gk_affine(&q.trace(&x).unwrap()).unwrap();
        assert!((t - affine).abs() < 1e-10);
    }

    #[test]
    fn affine_step_matches_oracle_on_two_lines() {
        let x_star = v(&[1.0, 1.0]);
        let q = CycleOperator::cyclic(lines(std::f64::consts::FRAC_PI_4, &x_star)).unwrap();
        let x0 = v(&[3.0, 0.0]);
        let tr = q.trace(&x0).unwrap();
        let t = step_gk_affine(&tr).unwrap();
        let oracle = step_oracle(&x0, tr.output(), &x_star).unwrap();
        assert!((t - oracle).abs() < 1e-12, "{t} vs {oracle}");
    }

    #[test]
    fn degenerate_steps_are_rejected() {
        let x = v(&[1.0, 2.0]);
        assert_eq!(step_gk_linear(&x, &x), Err(Error::DegenerateStep));
        assert_eq!(step_oracle(&x, &x, &x), Err(Error::DegenerateStep));
        let tr = StageTrace::new(vec![x.clone(), x.clone()]).unwrap();
        assert_eq!(step_gk_affine(&tr), Err(Error::DegenerateStep));
        assert_eq!(step_dr(&x, &x, &x), Err(Error::DegenerateStep));
    }

    #[test]
    fn symmetric_step_needs_even_trace() {
        let tr = StageTrace::new(vec![v(&[0.0]), v(&[1.0]), v(&[2.0])]).unwrap();
        assert!(matches!(step_symmetric(&tr), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn feasible_start_converges_immediately() {
        let x_star = v(&[0.5, -0.5]);
        let q = CycleOperator::cyclic(lines(0.4, &x_star)).unwrap();
        let cfg = SolveConfig::new(
            1e-9,
            10,
            Termination::DistanceToSolution {
                solution: x_star.clone(),
            },
        )
        .unwrap();
        for rule in [StepRule::UnitStep, StepRule::GkAffine] {
            let tr = solve(&q, &rule, &x_star, &cfg).unwrap();
            assert!(tr.converged);
            assert_eq!(tr.iterations(), 0);
        }
    }

    #[test]
    fn unit_step_is_plain_iteration() {
        let x_star = v(&[0.5, -0.5]);
        let q = CycleOperator::cyclic(lines(0.4, &x_star)).unwrap();
        let cfg = SolveConfig::new(1e-300, 5, Termination::SuccessiveChange).unwrap();
        let x0 = v(&[3.0, 4.0]);
        let tr = solve(&q, &StepRule::UnitStep, &x0, &cfg).unwrap();
        let mut x = x0.clone();
        for r in &tr.records[1..] {
            x = q.apply(&x).unwrap();
            assert_eq!(r.x.as_ref().unwrap(), &x);
        }
        assert!(!tr.converged);
        assert_eq!(tr.records.len(), 6);
    }

    #[test]
    fn rule_operator_mismatch_is_rejected() {
        let q = CycleOperator::cyclic(lines(0.4, &v(&[1.0, 0.0]))).unwrap();
        let cfg = SolveConfig::new(1e-9, 5, Termination::SuccessiveChange).unwrap();
        let x0 = v(&[3.0, 4.0]);
        assert!(solve(&q, &StepRule::Symmetric, &x0, &cfg).is_err());
        assert!(solve(&q, &StepRule::SymmetricDr, &x0, &cfg).is_err());
        // Lines through (1, 0) are not linear subspaces.
        assert!(solve(&q, &StepRule::GkLinear, &x0, &cfg).is_err());
    }

    #[test]
    fn oracle_rule_checks_membership() {
        let q = CycleOperator::cyclic(lines(0.4, &v(&[1.0, 0.0]))).unwrap();
        assert!(StepRule::oracle(v(&[1.0, 0.0]), &q).is_ok());
        assert!(StepRule::oracle(v(&[2.0, 0.0]), &q).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SolveConfig::new(0.0, 5, Termination::SuccessiveChange).is_err());
        assert!(SolveConfig::new(1e-6, 0, Termination::SuccessiveChange).is_err());
        let cfg = SolveConfig::new(1e-6, 1, Termination::SuccessiveChange).unwrap();
        assert!(cfg.with_fix_tol(0.0).is_err());
    }

    #[test]
    fn non_finite_start_rejected() {
        let q = CycleOperator::cyclic(lines(0.4, &v(&[1.0, 0.0]))).unwrap();
        let cfg = SolveConfig::new(1e-9, 5, Termination::SuccessiveChange).unwrap();
        assert_eq!(
            solve(&q, &StepRule::UnitStep, &v(&[f64::NAN, 0.0]), &cfg),
            Err(Error::NonFinite)
        );
    }

    #[test]
    fn thinning_keeps_every_jth_iterate() {
        let q = CycleOperator::cyclic(lines(0.1, &v(&[1.0, 0.0]))).unwrap();
        let cfg = SolveConfig::new(1e-300, 9, Termination::SuccessiveChange)
            .unwrap()
            .with_store_every(3);
        let tr = solve(&q, &StepRule::UnitStep, &v(&[3.0, 4.0]), &cfg).unwrap();
        let stored: Vec<usize> = tr.records.iter().filter(|r| r.x.is_some()).map(|r| r.k).collect();
        assert_eq!(stored, vec![0, 3, 6, 9]);
    }
}
