//! Seeded random problem instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::AffineSet;
use crate::Vector;

/// Standard normal samples by the Box-Muller transform.
#[derive(Debug, Clone)]
pub struct NormalSampler<R> {
    rng: R,
    spare: Option<f64>,
}

impl NormalSampler<ChaCha8Rng> {
    /// Deterministic sampler for `(seed, stream)`.
    pub fn seeded(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self::new(rng)
    }
}

impl<R: Rng> NormalSampler<R> {
    pub fn new(rng: R) -> Self {
        Self { rng, spare: None }
    }

    pub fn rng(&mut self) -> &mut R {
        &mut self.rng
    }

    pub fn sample(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let phi = std::f64::consts::TAU * u2;
        self.spare = Some(r * phi.sin());
        r * phi.cos()
    }

    pub fn vector(&mut self, dim: usize) -> Vector {
        Vector::from_fn(dim, |_, _| self.sample())
    }

    /// Uniformly distributed direction scaled to `radius`.
    pub fn on_sphere(&mut self, dim: usize, radius: f64) -> Vector {
        loop {
            let g = self.vector(dim);
            let n = g.norm();
            if n > 0.0 {
                return g * (radius / n);
            }
        }
    }

    pub fn uniform_usize(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.rng.random_range(lo..=hi_inclusive)
    }
}

/// Which kinds of sets a random instance contains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetMix {
    Hyperplanes,
    Spans,
    Mixed,
}

/// Sets with a known common point.
#[derive(Debug, Clone)]
pub struct AffineInstance {
    pub sets: Vec<AffineSet>,
    pub witness: Vector,
}

/// `n` random affine sets in `R^dim` through a common random point (the
/// origin when `linear`). Span sets get a random dimension in `1..dim` and an
/// anchor displaced along the span.
pub fn random_affine_instance<R: Rng>(
    sampler: &mut NormalSampler<R>,
    dim: usize,
    n: usize,
    mix: SetMix,
    linear: bool,
) -> Result<AffineInstance> {
    if dim < 2 || n < 1 {
        return Err(Error::InvalidConfig("random instances need dim >= 2 and n >= 1".into()));
    }
    let witness = if linear {
        Vector::zeros(dim)
    } else {
        sampler.vector(dim)
    };
    let mut sets = Vec::with_capacity(n);
    for _ in 0..n {
        let hyper = match mix {
            SetMix::Hyperplanes => true,
            SetMix::Spans => false,
            SetMix::Mixed => sampler.rng().random_bool(0.5),
        };
        if hyper {
            let a = sampler.vector(dim);
            let b = a.dot(&witness);
            sets.push(AffineSet::hyperplane(a, b)?);
        } else {
            let k = sampler.uniform_usize(1, dim - 1);
            let gens: Vec<Vector> = (0..k).map(|_| sampler.vector(dim)).collect();
            let mut anchor = witness.clone();
            for g in &gens {
                anchor.axpy(sampler.sample(), g, 1.0);
            }
            sets.push(AffineSet::span_of(anchor, &gens)?);
        }
    }
    Ok(AffineInstance { sets, witness })
}

/// The two lines through `x_star` at angle `theta`: the horizontal one and
/// the one with direction `(cos theta, sin theta)`.
pub fn angle_instance(theta: f64, x_star: &Vector) -> Result<Vec<AffineSet>> {
    if x_star.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: x_star.len(),
        });
    }
    Ok(vec![
        AffineSet::span(x_star.clone(), vec![Vector::from_vec(vec![1.0, 0.0])])?,
        AffineSet::span(x_star.clone(), vec![Vector::from_vec(vec![theta.cos(), theta.sin()])])?,
    ])
}

/// Consistent system `A x = b` with `A` an `n x m` standard normal matrix,
/// one hyperplane per row.
#[derive(Debug, Clone)]
pub struct HyperplaneSystem {
    pub sets: Vec<AffineSet>,
    pub rows: Vec<Vector>,
    pub rhs: Vec<f64>,
    pub x_star: Vector,
}

impl HyperplaneSystem {
    pub fn generate<R: Rng>(sampler: &mut NormalSampler<R>, m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidConfig("m and n must be positive".into()));
        }
        let rows: Vec<Vector> = (0..n).map(|_| sampler.vector(m)).collect();
        let x_star = sampler.vector(m);
        let rhs: Vec<f64> = rows.iter().map(|a| a.dot(&x_star)).collect();
        let sets = rows
            .iter()
            .zip(&rhs)
            .map(|(a, &b)| AffineSet::hyperplane(a.clone(), b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sets,
            rows,
            rhs,
            x_star,
        })
    }

    /// `|A x - b|`.
    pub fn residual(&self, x: &Vector) -> f64 {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(a, b)| (a.dot(x) - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}
