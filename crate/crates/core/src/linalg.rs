//! Dense helpers shared by the geometry, operator and analysis layers:
//! right singular vectors of stacked rows, null spaces and minimum-norm
//! corrections onto stacked affine constraints.

use faer::Mat;

use crate::error::{Error, Result};
use crate::Vector;

/// Default relative singular-value cutoff for every rank decision.
pub const RANK_CUTOFF: f64 = 1e-10;

pub(crate) fn check_dim(x: &Vector, dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: x.len(),
        });
    }
    Ok(())
}

pub(crate) fn check_finite(x: &Vector) -> Result<()> {
    if x.is_empty() {
        return Err(Error::EmptyVector);
    }
    if x.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn stack(rows: &[Vector], dim: usize) -> Mat<f64> {
    Mat::from_fn(rows.len(), dim, |i, j| rows[i][j])
}

/// All `dim` right singular vectors of the stacked `rows`, paired with their
/// singular values (zero for directions the rows do not reach).
pub(crate) fn right_singular_pairs(rows: &[Vector], dim: usize) -> Result<Vec<(f64, Vector)>> {
    if rows.is_empty() {
        return Ok((0..dim)
            .map(|j| (0.0, Vector::from_fn(dim, |i, _| if i == j { 1.0 } else { 0.0 })))
            .collect());
    }
    let svd = stack(rows, dim).svd().map_err(|_| Error::SvdFailed)?;
    let (s, v) = (svd.S().column_vector(), svd.V());
    Ok((0..dim)
        .map(|j| {
            let sigma = if j < s.nrows() { s[j] } else { 0.0 };
            (sigma, Vector::from_fn(dim, |i, _| v[(i, j)]))
        })
        .collect())
}

/// Largest singular value of the `nrows x ncols` matrix with entries `f(i, j)`.
pub(crate) fn max_singular_value(nrows: usize, ncols: usize, f: impl Fn(usize, usize) -> f64) -> Result<f64> {
    if nrows == 0 || ncols == 0 {
        return Ok(0.0);
    }
    let m = Mat::from_fn(nrows, ncols, f);
    let s = m.singular_values().map_err(|_| Error::SvdFailed)?;
    Ok(s.into_iter().fold(0.0, f64::max))
}

/// Orthonormal basis of `{x : <r, x> = 0 for every row r}`.
///
/// A singular value counts as zero when it is at most
/// `cutoff * max(sigma_max, floor)`.
pub(crate) fn null_space(rows: &[Vector], dim: usize, cutoff: f64, floor: f64) -> Result<Vec<Vector>> {
    let pairs = right_singular_pairs(rows, dim)?;
    let thr = cutoff * pairs.iter().map(|p| p.0).fold(floor, f64::max);
    Ok(pairs
        .into_iter()
        .filter(|(s, _)| *s <= thr)
        .map(|(_, v)| v)
        .collect())
}

/// Orthonormal basis of the span of `rows`, same threshold convention as
/// [`null_space`].
pub(crate) fn range_basis(rows: &[Vector], dim: usize, cutoff: f64, floor: f64) -> Result<Vec<Vector>> {
    if rows.is_empty() {
        return Ok(Vec::new());
    }
    let pairs = right_singular_pairs(rows, dim)?;
    let thr = cutoff * pairs.iter().map(|p| p.0).fold(floor, f64::max);
    Ok(pairs
        .into_iter()
        .filter(|(s, _)| *s > thr)
        .map(|(_, v)| v)
        .collect())
}

/// Largest deviation of the Gram matrix of `vectors` from the identity.
pub(crate) fn orthonormality_drift(vectors: &[Vector]) -> f64 {
    let mut drift = 0.0_f64;
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            drift = drift.max((u.dot(v) - target).abs());
        }
    }
    drift
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Vectors whose
/// residual falls below `1e-10` of their original norm are dropped.
pub(crate) fn gram_schmidt(vectors: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(vectors.len());
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let n = w.norm();
        if n > 1e-10 * v.norm() {
            out.push(w / n);
        }
    }
    out
}

/// Minimum-norm correction of `x0` onto `{x : A x = b}` where the rows of `A`
/// are `rows`: returns `x0 - A^+ (A x0 - b)` and the feasibility residual
/// `|A x - b|` of the result.
pub(crate) fn min_norm_correction(
    x0: &Vector,
    rows: &[Vector],
    rhs: &[f64],
    cutoff: f64,
) -> Result<(Vector, f64)> {
    if rows.is_empty() {
        return Ok((x0.clone(), 0.0));
    }
    let dim = x0.len();
    let residual_at = |x: &Vector| -> f64 {
        rows.iter()
            .zip(rhs)
            .map(|(a, b)| (a.dot(x) - b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let r: Vec<f64> = rows.iter().zip(rhs).map(|(a, b)| a.dot(x0) - b).collect();
    let svd = stack(rows, dim).thin_svd().map_err(|_| Error::SvdFailed)?;
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let sigma_max = (0..s.nrows()).map(|k| s[k]).fold(0.0, f64::max);
    let thr = cutoff * sigma_max;
    let mut x = x0.clone();
    for k in 0..s.nrows() {
        if s[k] > thr {
            let coeff = (0..rows.len()).map(|i| u[(i, k)] * r[i]).sum::<f64>() / s[k];
            for i in 0..dim {
                x[i] -= coeff * v[(i, k)];
            }
        }
    }
    let residual = residual_at(&x);
    Ok((x, residual))
}
