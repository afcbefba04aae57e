//! Affine sets in `R^d` and their exact projectors and reflectors.
//!
//! Every set is immutable once built. Hyperplanes and half-spaces keep their
//! normal and offset, spans keep an anchor point plus an orthonormal basis of
//! the parallel linear subspace. Projection is a closed-form `O(d)` (or
//! `O(dk)` for a `k`-dimensional span) operation in both forms.

use crate::error::{Error, Result};
use crate::linalg::{self, check_dim, check_finite};
use crate::Vector;

/// Orthonormality drift accepted as-is by [`AffineSet::span`].
pub const ORTHONORMAL_TOL: f64 = 1e-12;

/// Drift above [`ORTHONORMAL_TOL`] but at most this value is repaired by
/// re-orthonormalizing; anything larger is rejected.
pub const REORTHONORMALIZE_TOL: f64 = 1e-8;

/// `{x : <a, x> = b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    normal: Vector,
    offset: f64,
    norm_sq: f64,
}

impl Hyperplane {
    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Signed violation `<a, x> - b`.
    fn excess(&self, x: &Vector) -> f64 {
        self.normal.dot(x) - self.offset
    }

    fn step_onto(&self, x: &mut Vector, excess: f64) {
        x.axpy(-excess / self.norm_sq, &self.normal, 1.0);
    }

    /// Householder completion of the normal: an orthonormal basis of the
    /// parallel subspace `{x : <a, x> = 0}`.
    fn direction_basis(&self) -> Vec<Vector> {
        let d = self.normal.len();
        let v = &self.normal / self.norm_sq.sqrt();
        let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
        let mut w = v.clone();
        w[0] += sign;
        let w_sq = w.norm_squared();
        (1..d)
            .map(|j| {
                // Column j of I - 2ww^T/|w|^2, then one pass against the normal.
                let mut col = &w * (-2.0 * w[j] / w_sq);
                col[j] += 1.0;
                let c = v.dot(&col);
                col.axpy(-c, &v, 1.0);
                let n = col.norm();
                col / n
            })
            .collect()
    }
}

/// `{anchor + sum_j c_j basis_j}` with an orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanSet {
    anchor: Vector,
    basis: Vec<Vector>,
}

impl SpanSet {
    pub fn anchor(&self) -> &Vector {
        &self.anchor
    }

    pub fn basis(&self) -> &[Vector] {
        &self.basis
    }

    pub fn is_singleton(&self) -> bool {
        self.basis.is_empty()
    }
}

/// `{x : <a, x> <= b}`. Convex but not affine.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    boundary: Hyperplane,
}

impl HalfSpace {
    pub fn normal(&self) -> &Vector {
        &self.boundary.normal
    }

    pub fn offset(&self) -> f64 {
        self.boundary.offset
    }
}

/// A closed affine subspace (or, for inequality experiments, a half-space).
#[derive(Debug, Clone, PartialEq)]
pub enum AffineSet {
    Hyperplane(Hyperplane),
    Span(SpanSet),
    HalfSpace(HalfSpace),
}

fn normal_form(normal: Vector, offset: f64) -> Result<Hyperplane> {
    check_finite(&normal)?;
    if !offset.is_finite() {
        return Err(Error::NonFinite);
    }
    let norm_sq = normal.norm_squared();
    if norm_sq <= 0.0 || !norm_sq.is_finite() {
        return Err(Error::ZeroNormal);
    }
    Ok(Hyperplane {
        normal,
        offset,
        norm_sq,
    })
}

impl AffineSet {
    pub fn hyperplane(normal: Vector, offset: f64) -> Result<Self> {
        normal_form(normal, offset).map(AffineSet::Hyperplane)
    }

    pub fn halfspace(normal: Vector, offset: f64) -> Result<Self> {
        normal_form(normal, offset).map(|boundary| AffineSet::HalfSpace(HalfSpace { boundary }))
    }

    /// Span form from an anchor and an (approximately) orthonormal basis.
    ///
    /// Drift up to [`ORTHONORMAL_TOL`] is accepted unchanged, drift up to
    /// [`REORTHONORMALIZE_TOL`] is repaired, larger drift is an error.
    pub fn span(anchor: Vector, basis: Vec<Vector>) -> Result<Self> {
        check_finite(&anchor)?;
        for b in &basis {
            check_dim(b, anchor.len())?;
            check_finite(b)?;
        }
        let drift = linalg::orthonormality_drift(&basis);
        let basis = if drift <= ORTHONORMAL_TOL {
            basis
        } else if drift <= REORTHONORMALIZE_TOL {
            let repaired = linalg::gram_schmidt(&basis);
            if repaired.len() != basis.len() {
                return Err(Error::NotOrthonormal { drift });
            }
            repaired
        } else {
            return Err(Error::NotOrthonormal { drift });
        };
        Ok(AffineSet::Span(SpanSet { anchor, basis }))
    }

    /// Span form from arbitrary generators of the direction space. Linearly
    /// dependent generators are allowed.
    pub fn span_of(anchor: Vector, generators: &[Vector]) -> Result<Self> {
        check_finite(&anchor)?;
        for g in generators {
            check_dim(g, anchor.len())?;
            check_finite(g)?;
        }
        let basis = linalg::range_basis(generators, anchor.len(), linalg::RANK_CUTOFF, 0.0)?;
        Ok(AffineSet::Span(SpanSet { anchor, basis }))
    }

    /// The singleton `{p}`.
    pub fn point(p: Vector) -> Result<Self> {
        Self::span(p, Vec::new())
    }

    pub fn dim(&self) -> usize {
        match self {
            AffineSet::Hyperplane(h) => h.normal.len(),
            AffineSet::Span(s) => s.anchor.len(),
            AffineSet::HalfSpace(h) => h.boundary.normal.len(),
        }
    }

    pub fn is_affine(&self) -> bool {
        !matches!(self, AffineSet::HalfSpace(_))
    }

    /// A point of the set.
    pub fn point_in_set(&self) -> Vector {
        match self {
            AffineSet::Hyperplane(h) | AffineSet::HalfSpace(HalfSpace { boundary: h }) => {
                &h.normal * (h.offset / h.norm_sq)
            }
            AffineSet::Span(s) => s.anchor.clone(),
        }
    }

    /// Whether the set contains the origin (to within `1e-12` relative).
    pub fn contains_origin(&self) -> bool {
        let p = self.point_in_set();
        let mut q = Vector::zeros(self.dim());
        self.project_unchecked(&mut q);
        q.norm() <= 1e-12 * (1.0 + p.norm())
    }

    /// Distance from `x` to the set.
    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok((x - project(x, self)?).norm())
    }

    /// `x` lies in the set up to `tol * (1 + |x|)`.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol * (1.0 + x.norm()))
    }

    /// The translate `S + shift`.
    pub fn translated(&self, shift: &Vector) -> Result<Self> {
        check_dim(shift, self.dim())?;
        Ok(match self {
            AffineSet::Hyperplane(h) => AffineSet::Hyperplane(Hyperplane {
                offset: h.offset + h.normal.dot(shift),
                ..h.clone()
            }),
            AffineSet::HalfSpace(HalfSpace { boundary: h }) => AffineSet::HalfSpace(HalfSpace {
                boundary: Hyperplane {
                    offset: h.offset + h.normal.dot(shift),
                    ..h.clone()
                },
            }),
            AffineSet::Span(s) => AffineSet::Span(SpanSet {
                anchor: &s.anchor + shift,
                basis: s.basis.clone(),
            }),
        })
    }

    /// The parallel linear subspace `S'`.
    pub fn parallel(&self) -> Result<Self> {
        match self {
            AffineSet::Hyperplane(h) => Ok(AffineSet::Hyperplane(Hyperplane {
                offset: 0.0,
                ..h.clone()
            })),
            AffineSet::Span(s) => Ok(AffineSet::Span(SpanSet {
                anchor: Vector::zeros(s.anchor.len()),
                basis: s.basis.clone(),
            })),
            AffineSet::HalfSpace(_) => Err(Error::Unsupported("half-spaces have no parallel subspace")),
        }
    }

    /// Orthonormal basis of the parallel subspace `S'`.
    pub fn direction_basis(&self) -> Result<Vec<Vector>> {
        match self {
            AffineSet::Hyperplane(h) => Ok(h.direction_basis()),
            AffineSet::Span(s) => Ok(s.basis.clone()),
            AffineSet::HalfSpace(_) => Err(Error::Unsupported("half-spaces have no parallel subspace")),
        }
    }

    /// Orthonormal basis of `(S')^perp`.
    pub fn normal_basis(&self) -> Result<Vec<Vector>> {
        match self {
            AffineSet::Hyperplane(h) => Ok(vec![&h.normal / h.norm_sq.sqrt()]),
            AffineSet::Span(s) => linalg::null_space(&s.basis, s.anchor.len(), linalg::RANK_CUTOFF, 1.0),
            AffineSet::HalfSpace(_) => Err(Error::Unsupported("half-spaces have no constraint form")),
        }
    }

    /// Constraint form `A x = b` with orthonormal rows.
    pub fn constraints(&self) -> Result<(Vec<Vector>, Vec<f64>)> {
        let rows = self.normal_basis()?;
        let p = self.point_in_set();
        let rhs = rows.iter().map(|r| r.dot(&p)).collect();
        Ok((rows, rhs))
    }

    /// Equivalent span form (hyperplane normals are completed to a basis).
    pub fn to_span(&self) -> Result<Self> {
        Ok(AffineSet::Span(SpanSet {
            anchor: self.point_in_set(),
            basis: self.direction_basis()?,
        }))
    }

    /// In-place projection without dimension checks.
    pub(crate) fn project_unchecked(&self, x: &mut Vector) {
        match self {
            AffineSet::Hyperplane(h) => {
                let e = h.excess(x);
                h.step_onto(x, e);
            }
            AffineSet::HalfSpace(HalfSpace { boundary: h }) => {
                let e = h.excess(x);
                if e > 0.0 {
                    h.step_onto(x, e);
                }
            }
            AffineSet::Span(s) => {
                let rel = &*x - &s.anchor;
                x.copy_from(&s.anchor);
                for b in &s.basis {
                    x.axpy(b.dot(&rel), b, 1.0);
                }
            }
        }
    }
}

/// Nearest point of `set` to `x`.
pub fn project(x: &Vector, set: &AffineSet) -> Result<Vector> {
    check_dim(x, set.dim())?;
    let mut p = x.clone();
    set.project_unchecked(&mut p);
    Ok(p)
}

/// Reflector `2 P_S(x) - x`; affine sets only.
pub fn reflect(x: &Vector, set: &AffineSet) -> Result<Vector> {
    if !set.is_affine() {
        return Err(Error::Unsupported("reflection through a half-space"));
    }
    let p = project(x, set)?;
    Ok(2.0 * p - x)
}

/// Projection onto a half-space: `x` itself when feasible, otherwise the
/// projection onto the boundary hyperplane.
pub fn project_halfspace(x: &Vector, h: &HalfSpace) -> Result<Vector> {
    check_dim(x, h.boundary.normal.len())?;
    let mut p = x.clone();
    let e = h.boundary.excess(x);
    if e > 0.0 {
        h.boundary.step_onto(&mut p, e);
    }
    Ok(p)
}

/// `P_{S - y}(x - y) + y`, which must agree with `project(x, set)`.
pub fn translate_check(x: &Vector, set: &AffineSet, y: &Vector) -> Result<Vector> {
    check_dim(x, set.dim())?;
    let shifted = set.translated(&-y)?;
    Ok(project(&(x - y), &shifted)? + y)
}
