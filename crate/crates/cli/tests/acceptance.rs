//! Acceptance criteria, one line each. Runs without the test harness so the
//! lines are always printed; exits nonzero on any unexpected result.
//!
//! Criteria in `UNATTAINABLE` make claims that finite clouds cannot meet:
//! 4 and 11 ask for a stalled derivation, but every point of a finite cloud
//! with distinct points is removable; 3 is a continuum bound that finite
//! samples exceed by a term of order `Lipschitz * mesh`. They are
//! run as stated and reported as FAIL. Each still carries a part that must
//! hold (`partial`); the run breaks if that part fails or if the criterion
//! unexpectedly passes.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use dentlab_core::dcapprox::{build_renorm, dc_split_check, midpoint_drop_check, moreau_envelope, uniform_error_curve};
use dentlab_core::dentability::{derive_once, dz_index, lancien_check, Capacity, DerivationTrace, Mode};
use dentlab_core::generators::{
    coordinate_functionals, gen_norm_one_map, gen_sep_metric, gen_standard, gen_tree, grid_on, martingale_run, Shape,
    TreeSpec,
};
use dentlab_core::geometry::{oscillation, slice};
use dentlab_core::slicing::{bour_bound_check, ss_density_scan};
use dentlab_core::{Functional, LpNorm, Metric, PointCloud, ScoredMap, Tolerances};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const UNATTAINABLE: &[u32] = &[3, 4, 11];

struct Verdict {
    pass: bool,
    /// For unattainable criteria: the part that must still hold.
    partial: Option<bool>,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, partial: None, detail: detail.into() }
}

fn partial(pass: bool, holds: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, partial: Some(holds), detail: detail.into() }
}

fn tol() -> Tolerances {
    Tolerances::default()
}

fn sandwich() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut violations = 0;
    let mut removals = 0;
    for _ in 0..200 {
        let d = rng.random_range(1..=3);
        let n = rng.random_range(2..=12);
        let m = rng.random_range(1..=2);
        let pts = (0..n).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let vals = (0..n).map(|_| (0..m).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let f = ScoredMap::new(PointCloud::from_points(pts).unwrap(), vals, Metric::Lp(LpNorm::L2)).unwrap();
        let eps = rng.random_range(0.2..1.5);
        let all = f.domain().all();
        let cluster = derive_once(&f, &all, eps, Mode::Cluster, &tol()).unwrap();
        let exact = derive_once(&f, &all, eps, Mode::Exact, &tol()).unwrap();
        let exact_half = derive_once(&f, &all, eps / 2.0, Mode::Exact, &tol()).unwrap();
        removals += cluster.removed.len() + exact_half.removed.len();
        violations += cluster.removed.iter().filter(|r| exact.survivors.contains(&r.point)).count();
        violations += exact_half.removed.iter().filter(|r| cluster.survivors.contains(&r.point)).count();
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(violations == 0 && secs < 60.0, format!("200 instances, {removals} removals checked, {violations} violations, {secs:.2}s"))
}

/// Grid points of `[-1,1]^d` in the closed unit ball.
fn ball_lattice(d: usize, n: usize) -> PointCloud {
    let g = grid_on(-1.0, 1.0, d, n).unwrap();
    let pts = g.points().iter().filter(|p| p.iter().map(|c| c * c).sum::<f64>() <= 1.0 + 1e-12).map(|p| p.to_vec()).collect();
    PointCloud::from_points(pts).unwrap()
}

fn convex_maps(scale: f64) -> Vec<ScoredMap> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    (0..50)
        .map(|i| {
            let d = 1 + i % 3;
            let cloud = match (d, i % 2) {
                (1, _) => grid_on(0.0, 1.0, 1, 21).unwrap(),
                (2, 0) => grid_on(0.0, 1.0, 2, 9).unwrap(),
                (2, _) => ball_lattice(2, 11),
                (_, 0) => grid_on(0.0, 1.0, 3, 5).unwrap(),
                _ => ball_lattice(3, 7),
            };
            let a: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let z: Vec<f64> = (0..d).map(|_| rng.random_range(-0.5..0.5)).collect();
            let (q, c) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            ScoredMap::scalar_fn(cloud, move |x| {
                let lin: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
                let proj: f64 = w.iter().zip(x).map(|(p, q)| p * q).sum();
                let dist = z.iter().zip(x).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
                scale * (lin + q * proj * proj + c * dist)
            })
            .unwrap()
        })
        .collect()
}

fn convex_dentability(traces: &mut Vec<(ScoredMap, DerivationTrace)>) -> Verdict {
    let mut stalls = 0;
    let mut worst = 0;
    for f in convex_maps(1.0) {
        for eps in [0.4, 0.2, 0.1] {
            let t = dz_index(&f, eps, Mode::Exact, &tol()).unwrap();
            match t.dz() {
                Some(k) => worst = worst.max(k),
                None => stalls += 1,
            }
            traces.push((f.clone(), t));
        }
    }
    let id = ScoredMap::identity(grid_on(0.0, 1.0, 1, 21).unwrap(), LpNorm::L2).unwrap();
    let grid_dz = dz_index(&id, 0.4, Mode::Exact, &tol()).unwrap().dz();
    verdict(
        stalls == 0 && grid_dz == Some(2),
        format!("150 traces, {stalls} stalls, largest Dz {worst}; identity on 21-point grid Dz(0.4) = {grid_dz:?}"),
    )
}

/// Violations of the bound over the traces of `maps`, and the worst
/// oscillation-to-eps ratio.
fn lancien_counts(traces: &[(ScoredMap, DerivationTrace)]) -> (usize, usize, f64) {
    let (mut checked, mut violations, mut worst) = (0, 0, 0.0f64);
    for (i, (f, t)) in traces.iter().enumerate() {
        let r = lancien_check(f, t.epsilon, t, 100, i as u64, &tol()).unwrap();
        checked += r.checked;
        violations += r.violations.len();
        worst = worst.max(r.max_oscillation / t.epsilon);
    }
    (checked, violations, worst)
}

fn lancien(traces: &[(ScoredMap, DerivationTrace)]) -> Verdict {
    let (checked, violations, worst) = lancien_counts(traces);
    // the same maps scaled down: the excess must shrink with Lipschitz * mesh
    let mut series = vec![(1.0, violations, worst)];
    for scale in [0.5, 0.25, 0.1] {
        let scaled: Vec<(ScoredMap, DerivationTrace)> = convex_maps(scale)
            .into_iter()
            .flat_map(|f| [0.4, 0.2, 0.1].map(|eps| (f.clone(), dz_index(&f, eps, Mode::Exact, &tol()).unwrap())))
            .collect();
        let (_, v, w) = lancien_counts(&scaled);
        series.push((scale, v, w));
    }
    let shrinking = series.windows(2).all(|w| w[1].1 < w[0].1 && w[1].2 < w[0].2);
    let trail: Vec<String> = series.iter().map(|(s, v, w)| format!("x{s}: {v} ({w:.2})")).collect();
    partial(
        violations == 0 && checked > 0,
        shrinking,
        format!(
            "{} traces, {checked} slices, {violations} above 2 eps + 1e-9, largest osc/eps {worst:.3}; rescaled maps, violations (worst ratio): {}",
            traces.len(),
            trail.join(", ")
        ),
    )
}

fn tree_stall() -> Verdict {
    let mut stalls = Vec::new();
    let mut dz = Vec::new();
    for depth in [2, 3] {
        let t = gen_tree(&TreeSpec::new(depth, 1.0)).unwrap();
        let at_04 = dz_index(&t.map, 0.4, Mode::Exact, &tol()).unwrap();
        stalls.push(at_04.dz().is_none());
        dz.push((at_04.dz(), dz_index(&t.map, 0.6, Mode::Exact, &tol()).unwrap().dz()));
    }
    let grows = matches!((dz[0].1, dz[1].1), (Some(a), Some(b)) if b > a);
    let stalled = stalls.iter().all(|&s| s);
    partial(
        stalled && grows,
        grows,
        format!(
            "stall at 0.4: {stalls:?} (Dz at 0.4: {:?}, {:?}); Dz at 0.6 for D=2,3: {:?}, {:?}, strictly increasing: {grows}",
            dz[0].0, dz[1].0, dz[0].1, dz[1].1
        ),
    )
}

fn moreau() -> Verdict {
    let cloud = grid_on(-1.0, 1.0, 1, 1025).unwrap();
    let mesh = 1.0 / 512.0;
    let f = ScoredMap::scalar_fn(cloud.clone(), |x| x[0].abs()).unwrap();
    let ns = [1, 2, 4, 8, 16];
    let curve = uniform_error_curve(&f, &ns).unwrap();
    let worst = curve.points.iter().map(|p| (p.sup_error - 0.25 / p.n as f64).abs()).fold(0.0, f64::max);
    let mut violations = 0;
    let mut ok = true;
    for &n in &ns {
        let a = moreau_envelope(&f, n, &cloud).unwrap();
        let r = dc_split_check(&a, 2000, n as u64, &tol());
        violations += r.violations.len();
        ok &= r.passed;
    }
    verdict(
        worst <= 2.0 * mesh && ok && violations == 0,
        format!("largest |err - 1/(4n)| = {worst:.3e} (2 mesh = {:.3e}); split checks pass: {ok}, midpoint violations {violations}", 2.0 * mesh),
    )
}

fn renorm() -> Verdict {
    let f = ScoredMap::identity(grid_on(-1.0, 1.0, 1, 81).unwrap(), LpNorm::L2).unwrap();
    let mut r = build_renorm(&f, 3, Mode::Exact, &tol(), &Capacity::default()).unwrap();
    let rep = midpoint_drop_check(&r, &f, 0.5, 1000, 6, &tol()).unwrap();
    r.scale_samples(0.1);
    let fault = midpoint_drop_check(&r, &f, 0.5, 1000, 6, &tol()).unwrap();
    verdict(
        rep.passed && !rep.vacuous && rep.tested == 1000 && !fault.passed,
        format!(
            "{} pairs tested, {} violations, drop {:.3e}, min margin {:.3e}; fault injection: {} violations",
            rep.tested,
            rep.violation_count,
            rep.drop,
            rep.min_margin.unwrap_or(f64::NAN),
            fault.violation_count
        ),
    )
}

fn density() -> Verdict {
    let cloud = gen_standard(Shape::Ball, 2, 500, 7).unwrap();
    let f = ScoredMap::identity(cloud.clone(), LpNorm::L2).unwrap();
    let all = cloud.all();
    let (eps, target) = (0.25, 0.25);
    let scan = ss_density_scan(&f, &all, 64, eps, target, 7, &tol()).unwrap();
    let mut bad = 0;
    for row in &scan.rows {
        let Some(p) = &row.perturbation else {
            bad += 1;
            continue;
        };
        let s = slice(&cloud, &all, &p.functional, p.slice.depth, &tol()).unwrap();
        let osc = oscillation(&f, &s.members);
        if !(p.functional.distance(&row.direction) < eps && osc < target && s.members == p.slice.members) {
            bad += 1;
        }
    }
    verdict(
        scan.success_fraction == 1.0 && bad == 0,
        format!("success fraction {}, {bad} rows failing re-verification, largest |u - y*| {:.3e}", scan.success_fraction, scan.max_perturbation),
    )
}

fn unit(theta: f64) -> Functional {
    Functional(vec![theta.cos(), theta.sin()])
}

fn bour() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut tuples, mut attempts, mut violations) = (0, 0, 0);
    let mut worst = f64::NEG_INFINITY;
    while tuples < 10_000 && attempts < 1_000_000 {
        attempts += 1;
        let phi = rng.random_range(0.0..std::f64::consts::TAU);
        let u = unit(phi);
        let y = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let r = rng.random_range(0.1..5.0);
        let w = phi + rng.random_range(-1.5..1.5);
        let rho = rng.random_range(0.0..0.5) * r;
        let x0 = [y[0] + rho * w.cos(), y[1] + rho * w.sin()];
        if u.apply(&x0) <= u.apply(&y) {
            continue;
        }
        let cand = unit(phi + rng.random_range(-0.6..0.6));
        let rep = bour_bound_check(&u, &x0, &y, r, &[cand], attempts).unwrap();
        if rep.admissible == 1 {
            tuples += 1;
            violations += rep.violations.len();
            worst = worst.max(rep.max_distance - rep.bound);
        }
    }
    verdict(
        tuples == 10_000 && violations == 0,
        format!("{tuples} admissible tuples from {attempts} draws, {violations} violations, largest |u - y*| - bound {worst:.3e}"),
    )
}

fn norm_one() -> Verdict {
    let tree = gen_tree(&TreeSpec::new(3, 1.0)).unwrap();
    let f = gen_norm_one_map(&tree.map).unwrap();
    let norm_err = (0..f.len()).map(|i| (LpNorm::L1.norm(f.value(i)) - 1.0).abs()).fold(0.0, f64::max);
    let factor = 2.0 / tree.cloud.diameter();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let sub: Vec<usize> = (0..f.len()).filter(|_| rng.random_bool(0.5)).collect();
        let (a, b) = (oscillation(&f, &sub), factor * oscillation(&tree.map, &sub));
        worst = worst.max((a - b).abs() / b.max(1.0));
    }
    verdict(
        norm_err <= 2.0 * f64::EPSILON && worst <= 1e-12,
        format!("max | |f(x)|_1 - 1 | = {norm_err:.1e}; oscillation identity relative error {worst:.1e} over 100 subsets"),
    )
}

fn martingale() -> Verdict {
    let tree = gen_tree(&TreeSpec::new(3, 1.0)).unwrap();
    let f = ScoredMap::identity(tree.cloud, LpNorm::Linf).unwrap();
    let run = martingale_run(&f, 0.5, 3, None, &tol()).unwrap();
    let per_level = run.levels.iter().all(|l| l.refines && l.separated && l.averaged && l.l1_separation >= 0.5);
    verdict(
        run.conditions_hold && per_level && run.residual_sum <= run.residual_bound && run.levels.len() == 3,
        format!(
            "{} levels, conditions hold: {}, residual sum {:.3e} <= {:.4}, min separation {}",
            run.levels.len(),
            run.conditions_hold,
            run.residual_sum,
            run.residual_bound,
            run.min_separation
        ),
    )
}

fn separating_metric() -> Verdict {
    let tree = gen_tree(&TreeSpec::new(3, 1.0)).unwrap();
    let eps = 0.4;
    let norm = ScoredMap::identity(tree.cloud.clone(), LpNorm::Linf).unwrap();
    let sep = gen_sep_metric(&tree.cloud, &coordinate_functionals(tree.cloud.dim())).unwrap();
    let sep_map = norm.with_metric(sep.metric).unwrap();
    let norm_dz = dz_index(&norm, eps, Mode::Exact, &tol()).unwrap().dz();
    let sep_dz = dz_index(&sep_map, eps, Mode::Exact, &tol()).unwrap().dz();
    partial(
        norm_dz.is_none() && sep_dz.is_some(),
        sep_dz.is_some(),
        format!("eps {eps}: norm-metric Dz {norm_dz:?} (stall expected), separating-metric Dz {sep_dz:?}"),
    )
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_dentlab");
    let dir = std::env::temp_dir().join(format!("dentlab-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let run = |args: &[&str], threads: &str| {
        let out = Command::new(bin).args(args).env("DENTLAB_THREADS", threads).output().unwrap();
        (out.status.code(), out.stdout)
    };
    let setup: [&[&str]; 4] = [
        &["gen-example", "--shape", "grid", "--n", "21"],
        &["gen-example", "--shape", "ball", "--dim", "2", "--n", "150", "--seed", "3"],
        &["gen-example", "--tree-depth", "3"],
        &["gen-example", "--shape", "grid", "--n", "81"],
    ];
    for (args, name) in setup.iter().zip(["grid.json", "disc.json", "tree.json", "line.json"]) {
        let (code, bytes) = run(args, "1");
        assert_eq!(code, Some(0));
        std::fs::write(path(name), bytes).unwrap();
    }
    let (grid, disc, tree) = (path("grid.json"), path("disc.json"), path("tree.json"));
    let absf = {
        let f = ScoredMap::scalar_fn(grid_on(-1.0, 1.0, 1, 257).unwrap(), |x| x[0].abs()).unwrap();
        std::fs::write(path("abs.json"), dentlab_core::io::map_to_json(&f)).unwrap();
        path("abs.json")
    };
    let cases: Vec<Vec<&str>> = vec![
        vec!["dent-index", "--input", &grid, "--eps", "0.4"],
        vec!["dent-index", "--input", &tree, "--eps", "0.6", "--emit", "csv"],
        vec!["derive", "--input", &disc, "--eps", "0.3", "--seed", "5"],
        vec!["ss-scan", "--input", &disc, "--eps", "0.25", "--dirs", "16", "--seed", "5"],
        vec!["ss-scan", "--input", &disc, "--direction", "1,0", "--emit", "csv"],
        vec!["dc-approx", "--input", &absf, "--n-list", "1,2,4", "--seed", "5"],
        vec!["renorm-check", "--input", &grid, "--k", "2", "--eps", "0.5", "--seed", "5"],
        vec!["gen-example", "--shape", "ball", "--dim", "3", "--n", "50", "--seed", "5"],
        vec!["martingale", "--tree-depth", "3", "--eps", "0.5"],
        vec!["equi-slice", "--input", &grid, "--input", &grid, "--eps", "0.3", "--seed", "5"],
    ];
    let mut differing = Vec::new();
    let mut failing = Vec::new();
    for args in &cases {
        let (c1, a) = run(args, "1");
        let (c2, b) = run(args, "4");
        if c1 != Some(0) || c2 != Some(0) {
            failing.push(args[0]);
        }
        if a != b || a.is_empty() {
            differing.push(args[0]);
        }
    }
    let _ = std::fs::remove_dir_all(Path::new(&dir));
    verdict(
        differing.is_empty() && failing.is_empty(),
        format!("{} runs repeated with 1 and 4 threads; differing: {differing:?}; nonzero exit: {failing:?}", cases.len()),
    )
}

fn main() {
    let mut traces = Vec::new();
    let results: Vec<(u32, &str, Verdict)> = vec![
        (1, "denting sandwich", sandwich()),
        (2, "convex maps are finitely dentable", convex_dentability(&mut traces)),
        (3, "Lancien bound", lancien(&traces)),
        (4, "tree stall", tree_stall()),
        (5, "envelope convergence and split", moreau()),
        (6, "renorm midpoint drop", renorm()),
        (7, "strongly slicing density", density()),
        (8, "perturbation bound in the plane", bour()),
        (9, "norm-one map", norm_one()),
        (10, "martingale conditions", martingale()),
        (11, "separating metric", separating_metric()),
        (12, "CLI determinism", determinism()),
    ];
    let mut unexpected = Vec::new();
    for (k, name, v) in &results {
        let mark = if v.pass { "PASS" } else { "FAIL" };
        let note = if UNATTAINABLE.contains(k) { " [unattainable on finite clouds]" } else { "" };
        println!("criterion {k:>2} {mark} {name}{note}: {}", v.detail);
        let ok = if UNATTAINABLE.contains(k) { !v.pass && v.partial == Some(true) } else { v.pass };
        if !ok {
            unexpected.push(*k);
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected results for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
