mod common;

use common::{point_of, Sampler};
use cyclic_accel::geometry::{project, project_halfspace, reflect, translate_check, AffineSet};
use cyclic_accel::instances::NormalSampler;
use cyclic_accel::Vector;
use proptest::prelude::*;

#[derive(Debug, Clone, Copy)]
enum Kind {
    Hyperplane,
    AffineSpan,
    LinearSpan,
    HalfSpace,
}

fn kind() -> impl Strategy<Value = Kind> {
    prop_oneof![
        Just(Kind::Hyperplane),
        Just(Kind::AffineSpan),
        Just(Kind::LinearSpan),
        Just(Kind::HalfSpace),
    ]
}

fn make_set(s: &mut Sampler, kind: Kind, d: usize) -> AffineSet {
    match kind {
        Kind::Hyperplane => AffineSet::hyperplane(s.vector(d), 2.0 * s.sample()).unwrap(),
        Kind::AffineSpan => {
            let k = s.uniform_usize(0, d - 1);
            let gens: Vec<Vector> = (0..k).map(|_| s.vector(d)).collect();
            AffineSet::span_of(s.vector(d) * 4.0, &gens).unwrap()
        }
        Kind::LinearSpan => {
            let k = s.uniform_usize(1, d - 1);
            let gens: Vec<Vector> = (0..k).map(|_| s.vector(d)).collect();
            AffineSet::span_of(Vector::zeros(d), &gens).unwrap()
        }
        Kind::HalfSpace => AffineSet::halfspace(s.vector(d), s.sample()).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_is_idempotent(seed in any::<u64>(), k in kind(), d in 2usize..12, scale in 0.1f64..100.0) {
        let mut s = NormalSampler::seeded(seed, 0);
        let set = make_set(&mut s, k, d);
        let x = s.vector(d) * scale;
        let p = project(&x, &set).unwrap();
        let pp = project(&p, &set).unwrap();
        prop_assert!((pp - &p).norm() <= 1e-12 * (1.0 + x.norm()));
    }

    #[test]
    fn residual_is_orthogonal_to_the_set(seed in any::<u64>(), k in kind(), d in 2usize..12) {
        let mut s = NormalSampler::seeded(seed, 1);
        let set = make_set(&mut s, k, d);
        let x = s.vector(d) * 10.0;
        let p = project(&x, &set).unwrap();
        let member = point_of(&mut s, &set);
        let inner = (&x - &p).dot(&(&member - &p));
        let tol = 1e-10 * (1.0 + x.norm()) * (1.0 + member.norm());
        if set.is_affine() {
            prop_assert!(inner.abs() <= tol, "inner {}", inner);
        } else {
            prop_assert!(inner <= tol, "inner {}", inner);
        }
    }

    #[test]
    fn linear_projection_is_self_adjoint(seed in any::<u64>(), d in 2usize..12) {
        let mut s = NormalSampler::seeded(seed, 2);
        let set = make_set(&mut s, Kind::LinearSpan, d);
        let (x, y) = (s.vector(d), s.vector(d));
        let lhs = project(&x, &set).unwrap().dot(&y);
        let rhs = x.dot(&project(&y, &set).unwrap());
        prop_assert!((lhs - rhs).abs() <= 1e-10 * x.norm() * y.norm());
    }

    #[test]
    fn translation_formula(seed in any::<u64>(), k in kind(), d in 2usize..12) {
        let mut s = NormalSampler::seeded(seed, 3);
        let set = make_set(&mut s, k, d);
        let x = s.vector(d) * 5.0;
        let y = s.vector(d) * 5.0;
        let direct = project(&x, &set).unwrap();
        prop_assert!((translate_check(&x, &set, &y).unwrap() - direct).norm() <= 1e-10);
    }

    #[test]
    fn firm_quasi_nonexpansiveness(seed in any::<u64>(), k in kind(), d in 2usize..12) {
        let mut s = NormalSampler::seeded(seed, 4);
        let set = make_set(&mut s, k, d);
        let x = s.vector(d) * 10.0;
        let y = point_of(&mut s, &set);
        let p = project(&x, &set).unwrap();
        let lhs = (&p - &y).norm_squared() + (&x - &p).norm_squared();
        let rhs = (&x - &y).norm_squared();
        if set.is_affine() {
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
        } else {
            prop_assert!(lhs <= rhs * (1.0 + 1e-9));
        }
    }

    #[test]
    fn linear_reflection_is_an_involution(seed in any::<u64>(), k in prop_oneof![Just(Kind::LinearSpan), Just(Kind::Hyperplane)], d in 2usize..12) {
        let mut s = NormalSampler::seeded(seed, 5);
        let set = make_set(&mut s, k, d);
        let x = s.vector(d) * 3.0;
        let back = reflect(&reflect(&x, &set).unwrap(), &set).unwrap();
        prop_assert!((back - &x).norm() <= 1e-12 * (1.0 + x.norm()) * 10.0);
    }

    #[test]
    fn halfspace_projection_is_feasible(seed in any::<u64>(), d in 2usize..12) {
        let mut s = NormalSampler::seeded(seed, 6);
        let set = make_set(&mut s, Kind::HalfSpace, d);
        let AffineSet::HalfSpace(h) = &set else { unreachable!() };
        let x = s.vector(d) * 10.0;
        let p = project_halfspace(&x, h).unwrap();
        prop_assert!(h.normal().dot(&p) <= h.offset() + 1e-12 * (1.0 + x.norm()) * h.normal().norm());
    }
}

#[test]
fn hyperplane_and_its_span_form_agree() {
    let mut s = NormalSampler::seeded(9, 0);
    for d in 2..10 {
        let h = AffineSet::hyperplane(s.vector(d), s.sample()).unwrap();
        let span = h.to_span().unwrap();
        for _ in 0..5 {
            let x = s.vector(d) * 5.0;
            let a = project(&x, &h).unwrap();
            let b = project(&x, &span).unwrap();
            assert!((a - b).norm() < 1e-12 * (1.0 + x.norm()));
        }
    }
}

#[test]
fn singleton_projects_to_its_point() {
    let p = common::v(&[1.0, -2.0, 0.5]);
    let set = AffineSet::point(p.clone()).unwrap();
    assert_eq!(project(&common::v(&[9.0, 9.0, 9.0]), &set).unwrap(), p);
}
