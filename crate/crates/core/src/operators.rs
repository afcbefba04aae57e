//! Composite fixed-point operators built from projectors: the cyclic
//! operator `Q = P_n ... P_1`, its symmetrization
//! `S = P_1 ... P_{n-1} P_n P_{n-1} ... P_1`, Douglas-Rachford operators and
//! cycles of generic firmly quasi-nonexpansive maps.
//!
//! Every operator can report its intermediate stages, which is what the
//! line-search step rules consume.

use crate::analysis;
use crate::error::{Error, Result};
use crate::geometry::{project, AffineSet};
use crate::linalg::{self, check_dim};
use crate::Vector;

/// Intermediate results of a composite operator applied to one input.
///
/// `stages[0]` is the input and `stages[i]` is the `i`-th stage operator
/// applied to `stages[i - 1]`; the last entry is the composite's output.
#[derive(Debug, Clone, PartialEq)]
pub struct StageTrace {
    stages: Vec<Vector>,
}

impl StageTrace {
    pub fn new(stages: Vec<Vector>) -> Result<Self> {
        if stages.is_empty() {
            return Err(Error::InvalidConfig("a stage trace needs at least the input".into()));
        }
        Ok(Self { stages })
    }

    pub fn stages(&self) -> &[Vector] {
        &self.stages
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn input(&self) -> &Vector {
        &self.stages[0]
    }

    pub fn output(&self) -> &Vector {
        self.stages.last().expect("non-empty by construction")
    }

    /// `sum_i |stages[i-1] - stages[i]|^2`.
    pub fn stage_increments_sq(&self) -> f64 {
        self.stages
            .windows(2)
            .map(|w| (&w[0] - &w[1]).norm_squared())
            .sum()
    }

    /// `input - output`.
    pub fn total_displacement(&self) -> Vector {
        self.input() - self.output()
    }
}

/// Structural family of a [`FixedPointMap`], used to match step rules to
/// the operators they are valid for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Cyclic,
    SymmetricCycle,
    DouglasRachford,
    SymmetricDouglasRachford,
    Generic,
}

/// A map whose stage-wise evaluation can be traced.
pub trait FixedPointMap: Send + Sync {
    fn dim(&self) -> usize;

    fn kind(&self) -> OperatorKind;

    fn apply(&self, x: &Vector) -> Result<Vector>;

    fn trace(&self, x: &Vector) -> Result<StageTrace>;

    /// The output together with `sum_i |stage_{i-1} - stage_i|^2`, without
    /// keeping the stages around.
    fn apply_accumulating(&self, x: &Vector) -> Result<(Vector, f64)> {
        let t = self.trace(x)?;
        let acc = t.stage_increments_sq();
        Ok((t.stages.last().cloned().expect("non-empty"), acc))
    }

    /// Whether every constituent passes through the origin.
    fn is_linear(&self) -> bool {
        false
    }
}

/// Traces `op` at `x`; the final stage equals `op.apply(x)`.
pub fn apply_with_trace(op: &dyn FixedPointMap, x: &Vector) -> Result<StageTrace> {
    op.trace(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleMode {
    Cyclic,
    Symmetric,
}

/// Cyclic or symmetric composition of projectors onto `M_1, ..., M_n`.
#[derive(Debug, Clone)]
pub struct CycleOperator {
    sets: Vec<AffineSet>,
    mode: CycleMode,
    order: Vec<usize>,
}

impl CycleOperator {
    pub fn new(sets: Vec<AffineSet>, mode: CycleMode) -> Result<Self> {
        let Some(first) = sets.first() else {
            return Err(Error::InvalidConfig("a cycle needs at least one set".into()));
        };
        let d = first.dim();
        for s in &sets {
            if s.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: s.dim(),
                });
            }
        }
        let n = sets.len();
        let order = match mode {
            CycleMode::Cyclic => (0..n).collect(),
            CycleMode::Symmetric => (0..n).chain((0..n - 1).rev()).collect(),
        };
        Ok(Self { sets, mode, order })
    }

    pub fn cyclic(sets: Vec<AffineSet>) -> Result<Self> {
        Self::new(sets, CycleMode::Cyclic)
    }

    pub fn symmetric(sets: Vec<AffineSet>) -> Result<Self> {
        Self::new(sets, CycleMode::Symmetric)
    }

    pub fn sets(&self) -> &[AffineSet] {
        &self.sets
    }

    pub fn mode(&self) -> CycleMode {
        self.mode
    }

    /// Number of projections per application: `n` or `2n - 1`.
    pub fn projections_per_apply(&self) -> usize {
        self.order.len()
    }

    /// The set sequence the composite applies, in application order.
    pub fn unrolled_sets(&self) -> Vec<AffineSet> {
        self.order.iter().map(|&i| self.sets[i].clone()).collect()
    }
}

impl FixedPointMap for CycleOperator {
    fn dim(&self) -> usize {
        self.sets[0].dim()
    }

    fn kind(&self) -> OperatorKind {
        match self.mode {
            CycleMode::Cyclic => OperatorKind::Cyclic,
            CycleMode::Symmetric => OperatorKind::SymmetricCycle,
        }
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        check_dim(x, self.dim())?;
        let mut y = x.clone();
        for &i in &self.order {
            self.sets[i].project_unchecked(&mut y);
        }
        Ok(y)
    }

    fn trace(&self, x: &Vector) -> Result<StageTrace> {
        check_dim(x, self.dim())?;
        let mut stages = Vec::with_capacity(self.order.len() + 1);
        let mut y = x.clone();
        stages.push(y.clone());
        for &i in &self.order {
            self.sets[i].project_unchecked(&mut y);
            stages.push(y.clone());
        }
        Ok(StageTrace { stages })
    }

    fn apply_accumulating(&self, x: &Vector) -> Result<(Vector, f64)> {
        check_dim(x, self.dim())?;
        let mut y = x.clone();
        let mut prev = x.clone();
        let mut acc = 0.0;
        for &i in &self.order {
            self.sets[i].project_unchecked(&mut y);
            prev -= &y;
            acc += prev.norm_squared();
            prev.copy_from(&y);
        }
        Ok((y, acc))
    }

    fn is_linear(&self) -> bool {
        self.sets.iter().all(AffineSet::contains_origin)
    }
}

/// `T_{C1,C2} = (I + R_{C2} R_{C1}) / 2`, or its symmetrization
/// `T_{C2,C1} T_{C1,C2}`.
#[derive(Debug, Clone)]
pub struct DouglasRachfordOperator {
    c1: AffineSet,
    c2: AffineSet,
    symmetric: bool,
}

fn dr_half(x: &Vector, first: &AffineSet, second: &AffineSet) -> Vector {
    let mut p = x.clone();
    first.project_unchecked(&mut p);
    let r1 = 2.0 * p - x;
    let mut q = r1.clone();
    second.project_unchecked(&mut q);
    let r2 = 2.0 * q - r1;
    0.5 * (x + r2)
}

impl DouglasRachfordOperator {
    pub fn new(c1: AffineSet, c2: AffineSet, symmetric: bool) -> Result<Self> {
        if !c1.is_affine() || !c2.is_affine() {
            return Err(Error::Unsupported("Douglas-Rachford needs affine sets"));
        }
        if c1.dim() != c2.dim() {
            return Err(Error::DimensionMismatch {
                expected: c1.dim(),
                found: c2.dim(),
            });
        }
        Ok(Self { c1, c2, symmetric })
    }

    pub fn plain(c1: AffineSet, c2: AffineSet) -> Result<Self> {
        Self::new(c1, c2, false)
    }

    pub fn symmetric(c1: AffineSet, c2: AffineSet) -> Result<Self> {
        Self::new(c1, c2, true)
    }

    pub fn sets(&self) -> (&AffineSet, &AffineSet) {
        (&self.c1, &self.c2)
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// `T_{C1,C2}(x)`.
    pub fn forward(&self, x: &Vector) -> Result<Vector> {
        check_dim(x, self.c1.dim())?;
        Ok(dr_half(x, &self.c1, &self.c2))
    }

    /// `T_{C2,C1}(x)`.
    pub fn backward(&self, x: &Vector) -> Result<Vector> {
        check_dim(x, self.c1.dim())?;
        Ok(dr_half(x, &self.c2, &self.c1))
    }

    /// The parallel (linear) operator `T'`.
    pub fn parallel(&self) -> Result<Self> {
        Self::new(self.c1.parallel()?, self.c2.parallel()?, self.symmetric)
    }
}

impl FixedPointMap for DouglasRachfordOperator {
    fn dim(&self) -> usize {
        self.c1.dim()
    }

    fn kind(&self) -> OperatorKind {
        if self.symmetric {
            OperatorKind::SymmetricDouglasRachford
        } else {
            OperatorKind::DouglasRachford
        }
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        let half = self.forward(x)?;
        if self.symmetric {
            Ok(dr_half(&half, &self.c2, &self.c1))
        } else {
            Ok(half)
        }
    }

    fn trace(&self, x: &Vector) -> Result<StageTrace> {
        let half = self.forward(x)?;
        let mut stages = vec![x.clone(), half];
        if self.symmetric {
            stages.push(dr_half(&stages[1], &self.c2, &self.c1));
        }
        Ok(StageTrace { stages })
    }

    fn is_linear(&self) -> bool {
        self.c1.contains_origin() && self.c2.contains_origin()
    }
}

/// An operator usable as a stage of a [`FqneCycle`], together with a known
/// fixed point when one is available.
pub trait FqneOperator: Send + Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &Vector) -> Result<Vector>;

    fn fixed_point_witness(&self) -> Option<Vector>;
}

impl FqneOperator for AffineSet {
    fn dim(&self) -> usize {
        AffineSet::dim(self)
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        project(x, self)
    }

    fn fixed_point_witness(&self) -> Option<Vector> {
        Some(self.point_in_set())
    }
}

impl FqneOperator for DouglasRachfordOperator {
    fn dim(&self) -> usize {
        self.c1.dim()
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        FixedPointMap::apply(self, x)
    }

    fn fixed_point_witness(&self) -> Option<Vector> {
        analysis::exact_projection(&Vector::zeros(self.c1.dim()), &[self.c1.clone(), self.c2.clone()]).ok()
    }
}

/// `Q = T_n ... T_1` for arbitrary [`FqneOperator`] stages.
pub struct FqneCycle {
    ops: Vec<Box<dyn FqneOperator>>,
}

impl FqneCycle {
    pub fn new(ops: Vec<Box<dyn FqneOperator>>) -> Result<Self> {
        let Some(first) = ops.first() else {
            return Err(Error::InvalidConfig("a cycle needs at least one operator".into()));
        };
        let d = first.dim();
        for op in &ops {
            if op.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: op.dim(),
                });
            }
        }
        Ok(Self { ops })
    }

    pub fn operators(&self) -> &[Box<dyn FqneOperator>] {
        &self.ops
    }
}

impl FixedPointMap for FqneCycle {
    fn dim(&self) -> usize {
        self.ops[0].dim()
    }

    fn kind(&self) -> OperatorKind {
        OperatorKind::Generic
    }

    fn apply(&self, x: &Vector) -> Result<Vector> {
        check_dim(x, self.dim())?;
        let mut y = x.clone();
        for op in &self.ops {
            y = op.apply(&y)?;
        }
        Ok(y)
    }

    fn trace(&self, x: &Vector) -> Result<StageTrace> {
        check_dim(x, self.dim())?;
        let mut stages = Vec::with_capacity(self.ops.len() + 1);
        stages.push(x.clone());
        for op in &self.ops {
            let next = op.apply(stages.last().expect("non-empty"))?;
            stages.push(next);
        }
        Ok(StageTrace { stages })
    }
}

/// `Fix T` for the symmetric Douglas-Rachford operator of two intersecting
/// affine sets: `C1 ∩ C2 + (C1')^perp ∩ (C2')^perp`, in span form.
pub fn fixset_dr(c1: &AffineSet, c2: &AffineSet) -> Result<AffineSet> {
    if !c1.is_affine() || !c2.is_affine() {
        return Err(Error::Unsupported("Douglas-Rachford needs affine sets"));
    }
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch {
            expected: c1.dim(),
            found: c2.dim(),
        });
    }
    let d = c1.dim();
    let anchor = analysis::exact_projection(&Vector::zeros(d), &[c1.clone(), c2.clone()])?;

    let mut normals = c1.normal_basis()?;
    normals.extend(c2.normal_basis()?);
    let mut directions = c1.direction_basis()?;
    directions.extend(c2.direction_basis()?);

    // C1' ∩ C2' and its orthogonal partner (C1' + C2')^perp.
    let mut generators = linalg::null_space(&normals, d, linalg::RANK_CUTOFF, 1.0)?;
    generators.extend(linalg::null_space(&directions, d, linalg::RANK_CUTOFF, 1.0)?);
    let basis = linalg::gram_schmidt(&generators);
    AffineSet::span(anchor, basis)
}

/// The shadow `P_{C1}(z)` of a Douglas-Rachford iterate.
pub fn shadow_project(z: &Vector, c1: &AffineSet, c2: &AffineSet) -> Result<Vector> {
    check_dim(z, c2.dim())?;
    project(z, c1)
}
