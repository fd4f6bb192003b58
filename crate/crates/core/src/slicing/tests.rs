use proptest::prelude::*;

use super::*;
use crate::generators::{gen_standard, Shape};
use crate::geometry::{LpNorm, PointCloud};

fn square() -> PointCloud {
    gen_standard(Shape::Square, 2, 0, 0).unwrap()
}

fn disc_cloud(n: usize) -> PointCloud {
    gen_standard(Shape::Ball, 2, n, 11).unwrap()
}

fn tol() -> Tolerances {
    Tolerances::default()
}

#[test]
fn square_profiles() {
    let a = square();
    let u = Functional(vec![1.0, 0.0]);
    let fx = ScoredMap::scalar_fn(a.clone(), |p| p[0]).unwrap();
    let p = ss_profile(&fx, &a.all(), &u, &tol()).unwrap();
    assert!(matches!(p.verdict, Verdict::StronglySlicing { .. }), "{:?}", p.verdict);
    let fy = ScoredMap::scalar_fn(a.clone(), |p| p[1]).unwrap();
    let p = ss_profile(&fy, &a.all(), &u, &tol()).unwrap();
    assert_eq!(p.verdict, Verdict::Refuted { floor: 1.0 });
    assert_eq!(p.face_oscillation, 1.0);
}

#[test]
fn disc_identity_is_strongly_sliced() {
    let a = disc_cloud(300);
    let f = ScoredMap::identity(a.clone(), LpNorm::L2).unwrap();
    let p = ss_profile(&f, &a.all(), &Functional(vec![1.0, 0.0]), &tol()).unwrap();
    assert!(matches!(p.verdict, Verdict::StronglySlicing { .. }));
    // the slice sits in the cap {x > sup - t} of the unit disc
    let sup = a.points().iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max);
    for s in &p.samples {
        let h = sup - s.t;
        let chord = if h > 0.0 { 2.0 * (1.0 - h * h).sqrt() } else { 2.0 };
        assert!(s.oscillation <= (chord * chord + s.t * s.t).sqrt() + 1e-12, "{s:?}");
    }
}

#[test]
fn profile_limit_is_face_oscillation() {
    let pts = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 0.5], vec![0.5, 2.0]];
    let a = PointCloud::from_points(pts).unwrap();
    let f = ScoredMap::scalar_fn(a.clone(), |p| p[1] * p[1]).unwrap();
    for u in [vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0], vec![1.0, 1.0]] {
        let p = ss_profile(&f, &a.all(), &Functional(u), &tol()).unwrap();
        assert_eq!(p.samples.last().unwrap().oscillation, p.face_oscillation);
    }
}

#[test]
fn composition_keeps_strong_slicing() {
    let a = disc_cloud(200);
    let f = ScoredMap::identity(a.clone(), LpNorm::L2).unwrap();
    let u = Functional(vec![0.6, 0.8]);
    assert!(matches!(ss_profile(&f, &a.all(), &u, &tol()).unwrap().verdict, Verdict::StronglySlicing { .. }));
    let norm = ScoredMap::scalar_fn(a.clone(), |p| (p[0] * p[0] + p[1] * p[1]).sqrt()).unwrap();
    let clamp = ScoredMap::vector_fn(a.clone(), |p| p.iter().map(|c| c.clamp(-0.3, 0.3)).collect(), LpNorm::L2).unwrap();
    for g in [norm, clamp] {
        assert!(matches!(ss_profile(&g, &a.all(), &u, &tol()).unwrap().verdict, Verdict::StronglySlicing { .. }));
    }
}

#[test]
fn perturb_keeps_a_good_functional() {
    let a = disc_cloud(100);
    let f = ScoredMap::identity(a.clone(), LpNorm::L2).unwrap();
    let u = Functional(vec![1.0, 0.0]);
    let p = ss_perturb(&f, &a.all(), &u, 0.5, 0.1, &tol()).unwrap();
    assert!(p.unperturbed);
    assert_eq!(p.functional, u);
}

#[test]
fn perturb_tilts_off_a_bad_face() {
    let a = square();
    let f = ScoredMap::scalar_fn(a.clone(), |p| p[1]).unwrap();
    let u = Functional(vec![1.0, 0.0]);
    let p = ss_perturb(&f, &a.all(), &u, 0.9, 0.5, &tol()).unwrap();
    assert!(!p.unperturbed);
    assert!(p.distance < 0.9);
    assert!(p.functional[1] != 0.0);
    assert_eq!(p.slice.members.len(), 1);
    assert!(p.oscillation < 0.5);
    // independent re-check of the certificate
    let c = p.slice.functional.clone();
    let members: Vec<usize> =
        a.all().into_iter().filter(|&i| c.apply(a.point(i)) > c.apply(a.point(p.slice.members[0])) - p.slice.depth).collect();
    assert!(members.contains(&p.slice.members[0]));
    assert!((p.functional.distance(&u) - p.distance).abs() < 1e-15);
}

#[test]
fn perturb_on_the_line_uses_u() {
    let a = gen_standard(Shape::Grid, 1, 21, 0).unwrap();
    let f = ScoredMap::identity(a.clone(), LpNorm::L2).unwrap();
    for u in [1.0, -1.0] {
        let p = ss_perturb(&f, &a.all(), &Functional(vec![u]), 0.5, 0.2, &tol()).unwrap();
        assert!(p.unperturbed);
        assert!(tol().t_schedule.contains(&p.slice.depth));
    }
}

#[test]
fn perturb_validates_input() {
    let a = square();
    let f = ScoredMap::scalar_fn(a.clone(), |p| p[1]).unwrap();
    assert!(ss_perturb(&f, &a.all(), &Functional(vec![2.0, 0.0]), 0.5, 0.5, &tol()).is_err());
    assert!(ss_perturb(&f, &a.all(), &Functional(vec![1.0, 0.0]), 1.5, 0.5, &tol()).is_err());
}

#[test]
fn bour_examples() {
    let u = Functional(vec![1.0, 0.0]);
    let r = bour_bound_check(&u, &[0.5, 0.0], &[0.0, 0.0], 2.0, &[u.clone()], 0).unwrap();
    assert_eq!(r.bound, 0.5);
    assert_eq!(r.admissible, 1);
    assert!(r.violations.is_empty());
    let rot = |t: f64| Functional(vec![t.cos(), t.sin()]);
    let r = bour_bound_check(&u, &[0.5, 0.0], &[0.0, 0.0], 2.0, &[rot(0.1), rot(0.2), rot(-0.24)], 0).unwrap();
    assert_eq!(r.admissible, 3);
    assert!(r.violations.is_empty());
    assert!(r.max_distance <= 0.5);
    let r = bour_bound_check(&u, &[0.5, 0.0], &[0.0, 0.0], 2.0, &[Functional(vec![-1.0, 0.0])], 0).unwrap();
    assert_eq!(r.excluded, 1);
    assert!(bour_bound_check(&u, &[0.0, 0.0], &[0.5, 0.0], 2.0, &[], 0).is_err());
    assert!(bour_bound_check(&u, &[2.0, 0.0], &[0.0, 0.0], 2.0, &[], 0).is_err());
}

#[test]
fn density_on_disc() {
    let a = disc_cloud(150);
    let f = ScoredMap::scalar_fn(a.clone(), |p| p[0] * p[0] + p[1] * p[1]).unwrap();
    let scan = ss_density_scan(&f, &a.all(), 16, 0.25, 0.25, 9, &tol()).unwrap();
    assert_eq!(scan.success_fraction, 1.0);
    assert_eq!(scan.rows.len(), 16);
    let again = ss_density_scan(&f, &a.all(), 16, 0.25, 0.25, 9, &tol()).unwrap();
    assert_eq!(scan, again);
}

#[test]
fn density_on_singleton() {
    let a = PointCloud::from_points(vec![vec![0.3, 0.4]]).unwrap();
    let f = ScoredMap::identity(a.clone(), LpNorm::L2).unwrap();
    let scan = ss_density_scan(&f, &[0], 8, 0.5, 0.1, 1, &tol()).unwrap();
    assert!(scan.rows.iter().all(|r| r.perturbation.as_ref().unwrap().unperturbed));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bour_bound_in_the_plane(
        phi in 0.0f64..std::f64::consts::TAU,
        gx in 0.01f64..1.0,
        gy in -1.0f64..1.0,
        r in 0.1f64..10.0,
        rho in 0.0f64..0.999,
        theta in -std::f64::consts::PI..std::f64::consts::PI,
    ) {
        let u = Functional(vec![phi.cos(), phi.sin()]);
        let w = [-phi.sin(), phi.cos()];
        let y = [0.3, -0.2];
        let scale = rho * (r / 2.0) / (gx * gx + gy * gy).sqrt();
        let x0 = [y[0] + scale * (gx * u[0] + gy * w[0]), y[1] + scale * (gx * u[1] + gy * w[1])];
        let cand = Functional(vec![(phi + theta).cos(), (phi + theta).sin()]);
        let report = bour_bound_check(&u, &x0, &y, r, &[cand], 0).unwrap();
        prop_assert!(report.violations.is_empty(), "{:?}", report);
    }
}
