//! Ground truth and convergence theory made executable: the exact nearest
//! point of an intersection, Friederichs angles, and the rate constant
//! `c = (1 - prod_i (1 - c_i^2))^{1/2}` bounding cyclic projections.

use crate::error::{Error, Result};
use crate::geometry::AffineSet;
use crate::linalg::{self, check_dim, RANK_CUTOFF};
use crate::Vector;

/// Feasibility threshold (relative to `1 + |b|`) for the stacked system.
pub const INFEASIBILITY_TOL: f64 = 1e-6;

/// Bases handed to [`friederichs_cosine`] may drift this far from
/// orthonormal.
const BASIS_DRIFT_TOL: f64 = 1e-8;

/// `P_M(x0)` for `M` the intersection of `sets`, by minimum-norm correction
/// onto the stacked constraint system.
pub fn exact_projection(x0: &Vector, sets: &[AffineSet]) -> Result<Vector> {
    exact_projection_with_cutoff(x0, sets, RANK_CUTOFF)
}

pub fn exact_projection_with_cutoff(x0: &Vector, sets: &[AffineSet], cutoff: f64) -> Result<Vector> {
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for s in sets {
        check_dim(x0, s.dim())?;
        let (r, b) = s.constraints()?;
        rows.extend(r);
        rhs.extend(b);
    }
    let (x, residual) = linalg::min_norm_correction(x0, &rows, &rhs, cutoff)?;
    let scale = 1.0 + rhs.iter().map(|b| b * b).sum::<f64>().sqrt();
    if !(residual <= INFEASIBILITY_TOL * scale) {
        return Err(Error::Infeasible { residual });
    }
    Ok(x)
}

/// Orthonormal basis of `M_1' ∩ ... ∩ M_k'`, computed from the stacked
/// normals.
pub fn parallel_intersection(sets: &[AffineSet], dim: usize, cutoff: f64) -> Result<Vec<Vector>> {
    let mut normals = Vec::new();
    for s in sets {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        normals.extend(s.normal_basis()?);
    }
    linalg::null_space(&normals, dim, cutoff, 1.0)
}

fn check_basis(basis: &[Vector], dim: usize) -> Result<()> {
    for b in basis {
        check_dim(b, dim)?;
    }
    let drift = linalg::orthonormality_drift(basis);
    if drift > BASIS_DRIFT_TOL {
        return Err(Error::NotOrthonormal { drift });
    }
    Ok(())
}

/// Cosine of the Friederichs angle between `span(u)` and `span(v)`, both
/// given by orthonormal bases.
pub fn friederichs_cosine(u: &[Vector], v: &[Vector]) -> Result<f64> {
    friederichs_cosine_with_cutoff(u, v, RANK_CUTOFF)
}

pub fn friederichs_cosine_with_cutoff(u: &[Vector], v: &[Vector], cutoff: f64) -> Result<f64> {
    let (Some(first_u), Some(_)) = (u.first(), v.first()) else {
        return Ok(0.0);
    };
    let d = first_u.len();
    check_basis(u, d)?;
    check_basis(v, d)?;

    // A ∩ B as the null space of both orthogonal complements.
    let mut complements = linalg::null_space(u, d, cutoff, 1.0)?;
    complements.extend(linalg::null_space(v, d, cutoff, 1.0)?);
    let common = linalg::null_space(&complements, d, cutoff, 1.0)?;

    let deflate = |basis: &[Vector]| -> Result<Vec<Vector>> {
        let projected: Vec<Vector> = basis
            .iter()
            .map(|b| {
                let mut r = b.clone();
                for w in &common {
                    r.axpy(-w.dot(b), w, 1.0);
                }
                r
            })
            .collect();
        linalg::range_basis(&projected, d, cutoff, 1.0)
    };
    let ua = deflate(u)?;
    let vb = deflate(v)?;
    if ua.is_empty() || vb.is_empty() {
        return Ok(0.0);
    }
    let top = linalg::max_singular_value(ua.len(), vb.len(), |i, j| ua[i].dot(&vb[j]))?;
    Ok(top.clamp(0.0, 1.0))
}

/// Nested Friederichs cosines and the resulting rate constant.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// `c_i = c(M_i', ∩_{j>i} M_j')` for `i = 1..n-1`.
    pub cosines: Vec<f64>,
    /// `c ∈ [0, 1]`.
    pub constant: f64,
}

impl RateReport {
    fn from_cosines(cosines: Vec<f64>) -> Self {
        let prod: f64 = cosines.iter().map(|c| 1.0 - c * c).product();
        let constant = (1.0 - prod).max(0.0).sqrt().clamp(0.0, 1.0);
        Self { cosines, constant }
    }

    /// `c^k`.
    pub fn bound(&self, k: usize) -> f64 {
        self.constant.powi(k as i32)
    }

    /// `[c^0, c^1, ..., c^k_max]`.
    pub fn bound_table(&self, k_max: usize) -> Vec<f64> {
        (0..=k_max).map(|k| self.bound(k)).collect()
    }
}

pub fn rate_constant(sets: &[AffineSet]) -> Result<RateReport> {
    rate_constant_with_cutoff(sets, RANK_CUTOFF)
}

pub fn rate_constant_with_cutoff(sets: &[AffineSet], cutoff: f64) -> Result<RateReport> {
    if sets.len() < 2 {
        return Err(Error::InvalidConfig("the rate constant needs at least two sets".into()));
    }
    let d = sets[0].dim();
    // Nonempty intersection is a precondition of the bound.
    exact_projection_with_cutoff(&Vector::zeros(d), sets, cutoff)?;
    let cosines = (0..sets.len() - 1)
        .map(|i| {
            let own = sets[i].direction_basis()?;
            let tail = parallel_intersection(&sets[i + 1..], d, cutoff)?;
            friederichs_cosine_with_cutoff(&own, &tail, cutoff)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateReport::from_cosines(cosines))
}

/// First index `k` where `distances[k] > c^k * distances[0] * (1 + rel_slack)`.
pub fn first_bound_violation(distances: &[f64], constant: f64, rel_slack: f64) -> Option<usize> {
    let d0 = *distances.first()?;
    distances
        .iter()
        .enumerate()
        .find(|(k, d)| **d > constant.powi(*k as i32) * d0 * (1.0 + rel_slack))
        .map(|(k, _)| k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::project;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_column_slice(xs)
    }

    fn lines_through(x_star: &Vector, theta: f64) -> Vec<AffineSet> {
        vec![
            AffineSet::span(x_star.clone(), vec![v(&[1.0, 0.0])]).unwrap(),
            AffineSet::span(x_star.clone(), vec![v(&[theta.cos(), theta.sin()])]).unwrap(),
        ]
    }

    #[test]
    fn single_hyperplane_matches_projector() {
        let h = AffineSet::hyperplane(v(&[1.0, -1.0, 2.0]), 3.0).unwrap();
        let x0 = v(&[0.5, 4.0, -1.0]);
        let a = exact_projection(&x0, std::slice::from_ref(&h)).unwrap();
        let b = project(&x0, &h).unwrap();
        assert!((a - b).norm() < 1e-13);
    }

    #[test]
    fn two_lines_meet_at_the_chosen_point() {
        let x_star = v(&[1.5, -0.25]);
        let sets = lines_through(&x_star, 0.3);
        for x0 in [v(&[10.0, 0.0]), v(&[-3.0, 7.0]), v(&[0.0, 0.0])] {
            let p = exact_projection(&x0, &sets).unwrap();
            assert!((p - &x_star).norm() < 1e-13);
        }
    }

    #[test]
    fn parallel_distinct_hyperplanes_are_infeasible() {
        let sets = vec![
            AffineSet::hyperplane(v(&[1.0, 0.0]), 0.0).unwrap(),
            AffineSet::hyperplane(v(&[1.0, 0.0]), 1.0).unwrap(),
        ];
        assert!(matches!(
            exact_projection(&v(&[0.0, 0.0]), &sets),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn cosine_of_lines_at_angle() {
        for theta in [0.01f64, 0.3, 1.0, 1.57] {
            let c = friederichs_cosine(&[v(&[1.0, 0.0])], &[v(&[theta.cos(), theta.sin()])]).unwrap();
            assert!((c - theta.cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn orthogonal_and_nested_subspaces() {
        let e = |i: usize| Vector::from_fn(3, |j, _| if i == j { 1.0 } else { 0.0 });
        assert_eq!(friederichs_cosine(&[e(0)], &[e(1)]).unwrap(), 0.0);
        // A ⊂ B: everything deflates away.
        assert_eq!(friederichs_cosine(&[e(0)], &[e(0), e(1)]).unwrap(), 0.0);
        assert_eq!(friederichs_cosine(&[], &[e(1)]).unwrap(), 0.0);
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let r = friederichs_cosine(&[v(&[1.0, 1.0])], &[v(&[1.0, 0.0])]);
        assert!(matches!(r, Err(Error::NotOrthonormal { .. })));
    }

    #[test]
    fn rate_for_two_sets_is_the_single_cosine() {
        let sets = lines_through(&v(&[0.2, 3.0]), 0.7);
        let r = rate_constant(&sets).unwrap();
        assert_eq!(r.cosines.len(), 1);
        assert!((r.constant - r.cosines[0]).abs() < 1e-15);
        assert!((r.constant - 0.7f64.cos()).abs() < 1e-12);
        assert_eq!(r.bound_table(2)[0], 1.0);
    }

    #[test]
    fn rate_needs_two_sets() {
        let h = AffineSet::hyperplane(v(&[1.0, 0.0]), 0.0).unwrap();
        assert!(rate_constant(&[h]).is_err());
    }

    #[test]
    fn bound_violation_detection() {
        assert_eq!(first_bound_violation(&[1.0, 0.4, 0.2], 0.5, 0.0), None);
        assert_eq!(first_bound_violation(&[1.0, 0.4, 0.3], 0.5, 0.0), Some(2));
        assert_eq!(first_bound_violation(&[], 0.5, 0.0), None);
    }
}
