//! Helpers and independent oracles shared by the integration tests.
#![allow(dead_code)]

use cyclic_accel::geometry::AffineSet;
use cyclic_accel::instances::{random_affine_instance, AffineInstance, NormalSampler, SetMix};
use cyclic_accel::Vector;
use rand_chacha::ChaCha8Rng;

pub type Sampler = NormalSampler<ChaCha8Rng>;

pub fn v(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

/// Minimizer of `t -> |x + t d - m|` found without the closed form: bracket
/// a sign change of the derivative by doubling, then bisect until the
/// bracket stops shrinking.
pub fn line_argmin(x: &Vector, d: &Vector, m: &Vector) -> f64 {
    let slope = |t: f64| {
        let p = x + d * t - m;
        p.dot(d)
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    while slope(lo) > 0.0 {
        lo *= 2.0;
    }
    while slope(hi) < 0.0 {
        hi *= 2.0;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return mid;
        }
        if slope(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Values of `t -> |x + t d - m|` on `n` equally spaced points of `[a, b]`.
pub fn sampled_objective(x: &Vector, d: &Vector, m: &Vector, a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = a + (b - a) * i as f64 / (n - 1) as f64;
            (x + d * t - m).norm()
        })
        .collect()
}

pub fn instance(s: &mut Sampler, dim: usize, n: usize, mix: SetMix, linear: bool) -> AffineInstance {
    random_affine_instance(s, dim, n, mix, linear).expect("random instance")
}

/// A point of `set` drawn around its nearest point to a random vector.
pub fn point_of(s: &mut Sampler, set: &AffineSet) -> Vector {
    let dim = set.dim();
    let base = cyclic_accel::geometry::project(&(s.vector(dim) * 3.0), set).unwrap();
    match set {
        AffineSet::HalfSpace(h) => {
            // Step into the interior along the inward normal.
            let inward = -h.normal() / h.normal().norm();
            base + inward * s.sample().abs()
        }
        _ => {
            let mut p = base;
            for b in set.direction_basis().unwrap() {
                p.axpy(2.0 * s.sample(), &b, 1.0);
            }
            p
        }
    }
}

/// Gram-Schmidt on `vs`, dropping near-dependent and near-zero vectors.
pub fn orthonormalize(vs: &[Vector]) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::new();
    for g in vs {
        let mut r = g.clone();
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&r);
                r.axpy(-c, q, 1.0);
            }
        }
        let n = r.norm();
        if n > 1e-9 * g.norm() && n > 1e-12 {
            out.push(r / n);
        }
    }
    out
}

/// Orthogonal projection onto `span(basis)` for an orthonormal `basis`.
pub fn project_onto(x: &Vector, basis: &[Vector]) -> Vector {
    let mut p = Vector::zeros(x.len());
    for b in basis {
        p.axpy(b.dot(x), b, 1.0);
    }
    p
}
