mod common;

use contact_core::calculus::{parse_field, OneFormExpr, Params, ScalarField, VectorFieldExpr};
use contact_core::dynamics::{hamiltonian_vector_field, is_hamiltonian, ContactSystem, IntegratorSpec};
use contact_core::lifts::{
    complete_lift_vector, conformal_jacobi_check, legendrian_image_residual, vertical_lift_form, ExtendedChart,
    ExtendedPoint,
};
use contact_core::linalg;
use contact_core::submanifolds::{
    classify_point, contact_complement, verify_coisotropic_reduction, LevelSetSubmanifold, ParamSubmanifold,
    PointClass, QuotientProjection,
};
use contact_core::symmetry::{reconstruct, reduce, verify_projected_dynamics, GroupAction, Quadrature};
use contact_core::{DarbouxChart, Error};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::random_points;

fn unit(d: usize, k: usize) -> DVector<f64> {
    DVector::from_fn(d, |i, _| if i == k { 1.0 } else { 0.0 })
}

fn worked_system(gamma: f64) -> ContactSystem {
    let c = DarbouxChart::new(2).unwrap();
    let params = Params::from([("gamma".to_string(), gamma)]);
    let h = parse_field("(y1^2 + y2^2)/2 + y1 + cos(x2) + $gamma*z", &c, &params).unwrap();
    ContactSystem::new(c, h).unwrap()
}

#[test]
fn complement_examples() {
    let c1 = DarbouxChart::new(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for p in random_points(&mut rng, &c1, 10, 2.0) {
        let y = p.as_slice()[1];
        let comp = contact_complement(&c1, &p, &[unit(3, 2)]).unwrap();
        let want = linalg::orthonormal_span(3, &[DVector::from_vec(vec![1.0, 0.0, y]), unit(3, 1)], 1e-12);
        assert!(linalg::subspace_distance(&comp, &want) <= 1e-12);
    }
    let c2 = DarbouxChart::new(2).unwrap();
    let comp = contact_complement(&c2, &c2.origin(), &[unit(5, 2), unit(5, 3)]).unwrap();
    assert_eq!(comp.len(), 2);
    let eta = c2.eta_components(c2.origin().as_slice());
    assert!(comp.iter().all(|v| eta.dot(v).abs() <= 1e-14));
}

#[test]
fn classification_at_random_points() {
    let c2 = DarbouxChart::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for p in random_points(&mut rng, &c2, 20, 1.5) {
        let a1 = c2.frame(&p).unwrap().a[0].components().clone();
        assert_eq!(classify_point(&c2, &p, &[unit(5, 2)]).unwrap(), PointClass::Horizontal);
        assert_eq!(classify_point(&c2, &p, std::slice::from_ref(&a1)).unwrap(), PointClass::Horizontal);
        assert_eq!(classify_point(&c2, &p, &[unit(5, 4), unit(5, 2)]).unwrap(), PointClass::Vertical);
        let oblique = &a1 + unit(5, 4);
        assert_eq!(classify_point(&c2, &p, &[oblique]).unwrap(), PointClass::Oblique);
    }
}

#[test]
fn every_hypersurface_of_a_three_manifold_is_coisotropic() {
    let c1 = DarbouxChart::new(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for src in ["x1^2 + y1^2 + z^2 - 1", "z - sin(x1)*y1", "y1 - 0.3"] {
        let n = LevelSetSubmanifold::parse(c1, &[src], &Params::new()).unwrap();
        let samples = n.sample(&mut rng, 20, 1.5);
        assert!(!samples.is_empty());
        let r = n.is_coisotropic(&samples).unwrap();
        assert!(r.coisotropic && r.max_residual <= 1e-12, "{src}: {r:?}");
    }
}

#[test]
fn characteristic_distribution_is_spanned_by_z_fields_and_involutive() {
    let c2 = DarbouxChart::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let n = LevelSetSubmanifold::parse(c2, &["y1 - x2*y2", "z - y2^2"], &Params::new()).unwrap();
    let samples = n.sample(&mut rng, 20, 1.0);
    let rep = n.is_coisotropic(&samples).unwrap();
    if rep.coisotropic {
        for p in &samples {
            assert!(n.characteristic_matches_z(p).unwrap() <= 1e-8);
            assert!(n.involutivity_residual(p).unwrap() <= 1e-8);
        }
    }
    let y = LevelSetSubmanifold::parse(DarbouxChart::new(1).unwrap(), &["y1"], &Params::new()).unwrap();
    let p = y.chart().point(vec![0.4, 0.0, -1.2]).unwrap();
    let chr = y.characteristic_distribution(&p).unwrap();
    assert!(linalg::subspace_distance(&chr, &[unit(3, 0)]) <= 1e-12);
}

#[test]
fn legendrian_projection_corollary() {
    let c2 = DarbouxChart::new(2).unwrap();
    let c = 0.8;
    let params = Params::from([("c".to_string(), c)]);
    // (s, u, 0, 0, c): x¹ = s runs along the leaves.
    let l = ParamSubmanifold::parse(c2, 2, &["s1", "s2", "0", "0", "$c"], &params).unwrap();
    let samples: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64 * 0.3 - 1.0, 0.5 - i as f64 * 0.1]).collect();
    assert!(l.is_legendrian(&samples).unwrap().legendrian);
    let n = LevelSetSubmanifold::parse(c2, &["y1"], &Params::new()).unwrap();
    for s in &samples {
        assert!(n.values(l.point(s).unwrap().as_slice()).unwrap().amax() <= 1e-15);
    }
    let proj = QuotientProjection::dropping_pairs(&c2, &[0]).unwrap();
    let projected = l.project(&proj.kept, proj.quotient).unwrap();
    let curve: Vec<ScalarField> = projected
        .components()
        .iter()
        .map(|f| f.substitute(&|k| if k == 1 { ScalarField::var(0) } else { ScalarField::zero() }).unwrap())
        .collect();
    let l_tilde = ParamSubmanifold::new(proj.quotient, 1, curve).unwrap();
    let rep = l_tilde.is_legendrian(&[vec![-1.0], vec![0.2], vec![1.5]]).unwrap();
    assert!(rep.legendrian && rep.max_eta <= 1e-15);
}

#[test]
fn reduction_rejects_a_leaf_crossing_projection() {
    let c2 = DarbouxChart::new(2).unwrap();
    let n = LevelSetSubmanifold::parse(c2, &["y1"], &Params::new()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    let samples = n.sample(&mut rng, 10, 1.0);
    let good = QuotientProjection::dropping_pairs(&c2, &[0]).unwrap();
    let rep = verify_coisotropic_reduction(&n, &good, &samples).unwrap();
    assert!(rep.passed && rep.pullback_residual <= 1e-9 && rep.min_flat_det > 1e-9);
    let bad = QuotientProjection::new(&c2, vec![0, 3, 4]).unwrap();
    assert!(verify_coisotropic_reduction(&n, &bad, &samples).is_err());
}

#[test]
fn moment_map_identities_for_translations() {
    let c2 = DarbouxChart::new(2).unwrap();
    let act = GroupAction::translations(c2, &[0, 1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    for p in random_points(&mut rng, &c2, 30, 2.0) {
        let j = act.moment_map(&p).unwrap().0;
        assert_eq!(j, vec![p.as_slice()[2], p.as_slice()[3]]);
        for a in 0..2 {
            assert!(act.moment_condition_residual(a, &p).unwrap() <= 1e-10);
            assert!(act.generator_hamiltonian_defect(a, &p).unwrap() <= 1e-14);
        }
        assert!(act.equivariance_drift(&p, 1.0).unwrap() <= 1e-8);
    }
    act.check_contact(&random_points(&mut rng, &c2, 10, 1.0)).unwrap();
    act.check_abelian(&random_points(&mut rng, &c2, 10, 1.0)).unwrap();
}

#[test]
fn broken_generators_are_flagged() {
    let c2 = DarbouxChart::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let samples = random_points(&mut rng, &c2, 10, 1.0);
    let dy1 = GroupAction::new(c2, vec![VectorFieldExpr::coordinate(5, 2)], true).unwrap();
    assert!(matches!(dy1.check_contact(&samples), Err(Error::NotContactomorphism { .. })));
    let random = VectorFieldExpr::parse(&["x2*z", "y1", "0", "x1", "y2"], &c2, &Params::new()).unwrap();
    let act = GroupAction::new(c2, vec![random], true).unwrap();
    let worst = samples.iter().map(|p| act.generator_hamiltonian_defect(0, p).unwrap()).fold(0.0, f64::max);
    assert!(worst > 1e-3);
}

#[test]
fn level_sets_and_orthogonality() {
    let c2 = DarbouxChart::new(2).unwrap();
    let act = GroupAction::translations(c2, &[0]).unwrap();
    assert!(act.level_set_regularity(&[0.0], 3, 20).unwrap().regular);
    assert!(act.level_set_regularity(&[0.5], 3, 20).unwrap().regular);
    let half = act.level_set(&[0.5]).unwrap();
    assert!(half.values(&[0.0, 0.0, 0.5, 0.0, 0.0]).unwrap().amax() <= 1e-15);

    let p = c2.point(vec![0.3, 1.0, 0.5, -0.4, 2.0]).unwrap();
    let rep = act.verify_orbit_orthogonality(&[0.5], &p).unwrap();
    assert!(!rep.mu_is_zero && rep.kernel_residual <= 1e-9 && rep.orbit_deviation > 0.1);
    let comp: Vec<DVector<f64>> = rep.complement.iter().map(|v| DVector::from_vec(v.clone())).collect();
    let want = linalg::orthonormal_span(5, &[DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0, 0.5])], 1e-12);
    assert!(linalg::subspace_distance(&comp, &want) <= 1e-9);

    let torus = GroupAction::translations(c2, &[0, 1]).unwrap();
    let q = c2.point(vec![0.7, -1.1, 0.0, 0.0, 0.4]).unwrap();
    let rep = torus.verify_orbit_orthogonality(&[0.0, 0.0], &q).unwrap();
    assert!(rep.passed && rep.orbit_deviation <= 1e-9 && rep.complement.len() == 2);
}

#[test]
fn conservative_worked_example_projects_and_reconstructs() {
    let s = worked_system(0.0);
    let c2 = *s.chart();
    let act = GroupAction::translations(c2, &[0]).unwrap();
    let red = reduce(&s, &act, &[0.0], 5, 100).unwrap();
    let x0 = c2.point(vec![-0.4, 0.9, 0.0, -0.2, 0.5]).unwrap();
    let spec = IntegratorSpec::rk4(0.0, 5.0, 1e-3).unwrap();
    let pd = verify_projected_dynamics(&s, &act, &red, &x0, &spec).unwrap();
    assert!(pd.on_level_set && pd.max_mismatch <= 1e-6 && pd.max_level_drift <= 1e-8);

    let reduced = red.system.integrate(&red.project(x0.as_slice()).unwrap(), &spec).unwrap();
    let simpson = reconstruct(&s, &red, &reduced, &x0, Quadrature::Simpson).unwrap();
    let trapezoid = reconstruct(&s, &red, &reduced, &x0, Quadrature::Trapezoid).unwrap();
    for ((a, b), t) in simpson.points.iter().zip(&trapezoid.points).zip(&simpson.times) {
        assert!((a.coords() - b.coords()).amax() <= 1e-8);
        // ẋ¹ = ∂H/∂y₁ at y₁ = 0 is 1.
        assert!((a.as_slice()[0] - (-0.4 + t)).abs() <= 1e-9);
    }
}

#[test]
fn identity_lift_when_the_group_velocity_vanishes() {
    let c2 = DarbouxChart::new(2).unwrap();
    let h = parse_field("(y1^2 + y2^2)/2 + cos(x2) + 0.1*z", &c2, &Params::new()).unwrap();
    let s = ContactSystem::new(c2, h).unwrap();
    let act = GroupAction::translations(c2, &[0]).unwrap();
    let red = reduce(&s, &act, &[0.0], 5, 50).unwrap();
    let x0 = c2.point(vec![1.25, 0.3, 0.0, 0.6, -0.1]).unwrap();
    let spec = IntegratorSpec::rk4(0.0, 3.0, 1e-3).unwrap();
    let reduced = red.system.integrate(&red.project(x0.as_slice()).unwrap(), &spec).unwrap();
    let rec = reconstruct(&s, &red, &reduced, &x0, Quadrature::Simpson).unwrap();
    assert!(rec.points.iter().all(|p| (p.as_slice()[0] - 1.25).abs() <= 1e-12));
    let wrong_start = c2.point(vec![1.25, 0.9, 0.0, 0.6, -0.1]).unwrap();
    assert!(matches!(
        reconstruct(&s, &red, &reduced, &wrong_start, Quadrature::Simpson),
        Err(Error::StartMismatch(_))
    ));
}

#[test]
fn off_level_initial_condition_is_flagged() {
    let s = worked_system(0.0);
    let c2 = *s.chart();
    let act = GroupAction::translations(c2, &[0]).unwrap();
    let red = reduce(&s, &act, &[0.0], 5, 50).unwrap();
    let x0 = c2.point(vec![0.0, 0.5, 0.1, 0.3, 0.0]).unwrap();
    let spec = IntegratorSpec::rk4(0.0, 5.0, 1e-3).unwrap();
    let pd = verify_projected_dynamics(&s, &act, &red, &x0, &spec).unwrap();
    assert!(!pd.on_level_set);
    assert!((pd.max_level_drift - 0.1).abs() <= 1e-8);
    assert!(pd.moment_variation <= 1e-8);
    assert!(pd.max_mismatch > 1e-3);
}

#[test]
fn lift_pairings() {
    let c1 = DarbouxChart::new(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(48);
    let alpha = OneFormExpr::new(vec![
        parse_field("x1*y1", &c1, &Params::new()).unwrap(),
        parse_field("sin(z)", &c1, &Params::new()).unwrap(),
        parse_field("1 + x1^2", &c1, &Params::new()).unwrap(),
    ]);
    let x = VectorFieldExpr::parse(&["y1", "z*x1", "cos(x1)"], &c1, &Params::new()).unwrap();
    for p in random_points(&mut rng, &c1, 20, 1.5) {
        let fiber = DVector::from_fn(3, |_, _| rng.random_range(-1.0..1.0));
        let ep = ExtendedPoint::new(p.clone(), fiber, rng.random_range(-2.0..2.0)).unwrap();
        let lhs = vertical_lift_form(&alpha, &ep).unwrap().dot(&complete_lift_vector(&x, &ep).unwrap());
        let rhs = alpha.eval(p.as_slice()).unwrap().dot(&x.eval(p.as_slice()).unwrap());
        assert!((lhs - rhs).abs() <= 1e-12);
    }
    let zero = OneFormExpr::new(vec![ScalarField::zero(); 3]);
    let ep = ExtendedPoint::from_slice(3, &[0.1, 0.2, 0.3, 1.0, 2.0, 3.0, 4.0]).unwrap();
    assert_eq!(vertical_lift_form(&zero, &ep).unwrap().amax(), 0.0);
}

#[test]
fn extended_form_is_contact_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(49);
    for n in 1..=2 {
        let ext = ExtendedChart::new(DarbouxChart::new(n).unwrap());
        for _ in 0..100 {
            let coords: Vec<f64> = (0..ext.dim()).map(|_| rng.random_range(-2.0..2.0)).collect();
            let ep = ExtendedPoint::from_slice(2 * n + 1, &coords).unwrap();
            let id = ext.identities(&ep).unwrap();
            assert!(id.flat_det.abs() > 1e-9 && id.worst_residual() <= 1e-8, "{id:?}");
        }
    }
}

#[test]
fn legendrian_image_examples() {
    let c1 = DarbouxChart::new(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let samples = random_points(&mut rng, &c1, 50, 1.5);
    for src in ["(x1^2 + y1^2)/2 + 0.1*z", "z"] {
        let h = parse_field(src, &c1, &Params::new()).unwrap();
        let xh = hamiltonian_vector_field(&c1, &h);
        let rep = legendrian_image_residual(&c1, &xh, &samples).unwrap();
        assert!(rep.is_legendrian() && rep.max_residual <= 1e-8, "{src}: {rep:?}");
        assert!(is_hamiltonian(&c1, &xh, &samples).unwrap().max_defect <= 1e-9);
    }
    let dy = VectorFieldExpr::coordinate(3, 1);
    let rep = legendrian_image_residual(&c1, &dy, &samples).unwrap();
    assert!(rep.max_residual > 0.1);
    assert!(is_hamiltonian(&c1, &dy, &samples).unwrap().max_defect > 0.0);
}

#[test]
fn conformal_jacobi_equivalence_in_both_directions() {
    let c1 = DarbouxChart::new(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let samples = random_points(&mut rng, &c1, 20, 1.0);
    let h = parse_field("x1*y1 + z^2/2", &c1, &Params::new()).unwrap();
    let xh = hamiltonian_vector_field(&c1, &h);
    // ℒ_{X_H} η = −R(H) η.
    let good = conformal_jacobi_check(&c1, &xh, &-h.partial(c1.z()), &samples).unwrap();
    assert!(good.image_vanishes() && good.is_conformal_with_factor());
    let shifted = -h.partial(c1.z()) + ScalarField::constant(0.5);
    let bad = conformal_jacobi_check(&c1, &xh, &shifted, &samples).unwrap();
    assert!(!bad.image_vanishes() && !bad.is_conformal_with_factor() && bad.consistent());
    let dy = VectorFieldExpr::coordinate(3, 1);
    let never = conformal_jacobi_check(&c1, &dy, &ScalarField::zero(), &samples).unwrap();
    assert!(!never.image_vanishes() && never.consistent());
}
