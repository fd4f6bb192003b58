use dentlab_core::geometry::{covering_number, hull_membership, oscillation, slice, support};
use dentlab_core::{oracle, Functional, HullMembership, LpNorm, PointCloud, ScoredMap, Tolerances};
use proptest::prelude::*;

fn cloud_strategy(max_n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=3).prop_flat_map(move |d| {
        prop::collection::vec(prop::collection::vec((-4i32..=4).prop_map(|v| v as f64), d), 1..=max_n)
    })
}

fn dedup(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    pts.retain(|p| {
        if out.contains(p) {
            false
        } else {
            out.push(p.clone());
            true
        }
    });
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hull_membership_matches_the_rational_oracle(pts in cloud_strategy(12), seed in prop::collection::vec(-5i32..=5, 3)) {
        let d = pts[0].len();
        let x: Vec<f64> = seed[..d].iter().map(|&v| v as f64 * 0.9).collect();
        let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
        let tol = Tolerances::default();
        let exact = oracle::hull_contains(&x, &refs).unwrap();
        match hull_membership(&x, &refs, tol.sep_tol).unwrap() {
            HullMembership::Inside { weights, .. } => {
                prop_assert!(exact);
                prop_assert!((weights.iter().map(|w| w.1).sum::<f64>() - 1.0).abs() < 1e-9);
            }
            HullMembership::Outside { separator, margin } => {
                prop_assert!(!exact);
                let top = refs.iter().map(|p| separator.apply(p)).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(separator.apply(&x) - top > tol.sep_tol);
                prop_assert!((separator.apply(&x) - top - margin).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn slices_grow_with_depth(pts in cloud_strategy(12), u in prop::collection::vec(-1.0f64..1.0, 3), t in 0.01f64..3.0, s in 0.0f64..3.0) {
        let d = pts[0].len();
        let u = Functional(u[..d].to_vec());
        prop_assume!(!u.is_zero());
        let cloud = PointCloud::from_points(pts).unwrap();
        let all = cloud.all();
        let tol = Tolerances::default();
        let small = slice(&cloud, &all, &u, t, &tol).unwrap();
        let big = slice(&cloud, &all, &u, t + s, &tol).unwrap();
        prop_assert!(!small.members.is_empty());
        prop_assert!(small.members.iter().all(|i| big.members.contains(i)));
    }

    #[test]
    fn support_is_sublinear(pts in cloud_strategy(12), u in prop::collection::vec(-2.0f64..2.0, 3), v in prop::collection::vec(-2.0f64..2.0, 3), c in 0.0f64..10.0) {
        let d = pts[0].len();
        let cloud = PointCloud::from_points(pts).unwrap();
        let all = cloud.all();
        let (u, v) = (Functional(u[..d].to_vec()), Functional(v[..d].to_vec()));
        let w = Functional(u.iter().zip(v.iter()).map(|(a, b)| a + b).collect());
        let cu = Functional(u.iter().map(|a| c * a).collect());
        let h = |f: &Functional| support(&cloud, &all, f).unwrap();
        prop_assert!((h(&cu) - c * h(&u)).abs() <= 1e-9 * (1.0 + c * h(&u).abs()));
        prop_assert!(h(&w) <= h(&u) + h(&v) + 1e-9);
    }

    #[test]
    fn oscillation_is_monotone_and_label_free(pts in cloud_strategy(12), vals in prop::collection::vec(-3.0f64..3.0, 12), mask in prop::collection::vec(any::<bool>(), 12), rot in 0usize..12) {
        let pts = dedup(pts);
        let n = pts.len();
        let cloud = PointCloud::from_points(pts.clone()).unwrap();
        let f = ScoredMap::new(cloud, vals[..n].iter().map(|&v| vec![v]).collect(), dentlab_core::Metric::Lp(LpNorm::L2)).unwrap();
        let sub: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
        prop_assert!(oscillation(&f, &sub) <= oscillation(&f, &f.domain().all()));
        prop_assert_eq!(oscillation(&f, &[]), 0.0);
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let moved = PointCloud::from_points(perm.iter().map(|&i| pts[i].clone()).collect()).unwrap();
        let g = ScoredMap::new(moved, perm.iter().map(|&i| vec![vals[i]]).collect(), dentlab_core::Metric::Lp(LpNorm::L2)).unwrap();
        let inv: Vec<usize> = sub.iter().map(|&i| perm.iter().position(|&p| p == i).unwrap()).collect();
        prop_assert_eq!(oscillation(&f, &sub), oscillation(&g, &inv));
    }

    #[test]
    fn covering_is_sandwiched_by_exact_covers(pts in cloud_strategy(10), r in 0.3f64..6.0) {
        let cloud = PointCloud::from_points(dedup(pts)).unwrap();
        let all = cloud.all();
        let greedy = covering_number(&cloud, &all, r).unwrap();
        prop_assert!(oracle::min_cover_at_points(&cloud, &all, 2.0 * r).unwrap() <= greedy);
        prop_assert!(greedy <= oracle::min_cover_at_points(&cloud, &all, r / 2.0).unwrap());
    }
}
