use dentlab_core::dentability::{dz_index, Mode};
use dentlab_core::generators::{coordinate_functionals, gen_norm_one_map, gen_sep_metric, gen_tree, martingale_run, TreeSpec};
use dentlab_core::geometry::{covering_number, oscillation};
use dentlab_core::{LpNorm, ScoredMap, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn tree_nodes_average_and_separate() {
    for depth in 1..=4 {
        let t = gen_tree(&TreeSpec::new(depth, 1.0)).unwrap();
        let n = t.cloud.len();
        for i in 0..n {
            for j in i + 1..n {
                assert!(LpNorm::Linf.dist(t.cloud.point(i), t.cloud.point(j)) >= 1.0 - 1e-12);
            }
            if !t.children[i].is_empty() {
                let k = t.children[i].len() as f64;
                for c in 0..t.cloud.dim() {
                    let mean: f64 = t.children[i].iter().map(|&j| t.cloud.point(j)[c]).sum::<f64>() / k;
                    assert!((mean - t.cloud.point(i)[c]).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn tree_index_grows_with_depth() {
    let tol = Tolerances::default();
    let dz: Vec<usize> = (2..=3)
        .map(|d| {
            let t = gen_tree(&TreeSpec::new(d, 1.0)).unwrap();
            dz_index(&t.map, 0.6, Mode::Exact, &tol).unwrap().dz().unwrap()
        })
        .collect();
    assert!(dz[1] > dz[0], "{dz:?}");
}

#[test]
fn leaf_covering_numbers_grow_with_depth() {
    let counts: Vec<usize> = (1..=4)
        .map(|d| {
            let t = gen_tree(&TreeSpec::new(d, 1.0)).unwrap();
            covering_number(&t.cloud, &t.leaves(), 0.25).unwrap()
        })
        .collect();
    assert!(counts.windows(2).all(|w| w[1] > w[0]), "{counts:?}");
}

#[test]
fn norm_one_map_on_the_tree() {
    let t = gen_tree(&TreeSpec::new(3, 1.0)).unwrap();
    let f = gen_norm_one_map(&t.map).unwrap();
    let factor = 2.0 / t.cloud.diameter();
    for i in 0..f.len() {
        assert!((LpNorm::L1.norm(f.value(i)) - 1.0).abs() <= f64::EPSILON * 2.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let sub: Vec<usize> = (0..f.len()).filter(|_| rng.random_bool(0.4)).collect();
        let lhs = oscillation(&f, &sub);
        let rhs = factor * oscillation(&t.map, &sub);
        assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }
}

#[test]
fn martingale_on_the_depth_three_tree() {
    let t = gen_tree(&TreeSpec::new(3, 1.0)).unwrap();
    let id = ScoredMap::identity(t.cloud.clone(), LpNorm::Linf).unwrap();
    let run = martingale_run(&id, 0.5, 3, None, &Tolerances::default()).unwrap();
    assert!(run.conditions_hold, "{run:?}");
    assert_eq!(run.levels.len(), 3);
    assert!(run.levels.iter().all(|l| l.refines && l.min_separation >= 0.5));
    assert!(run.residual_sum <= run.residual_bound);
}

#[test]
fn separating_metric_trace_terminates_on_the_tree() {
    let t = gen_tree(&TreeSpec::new(3, 1.0)).unwrap();
    let sep = gen_sep_metric(&t.cloud, &coordinate_functionals(t.cloud.dim())).unwrap();
    assert!(sep.separating);
    let f = ScoredMap::identity(t.cloud.clone(), LpNorm::Linf).unwrap().with_metric(sep.metric).unwrap();
    let trace = dz_index(&f, 0.25, Mode::Exact, &Tolerances::default()).unwrap();
    assert!(trace.dz().is_some());
}
