use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{euclid, LpNorm, Metric, PointCloud, ScoredMap, Tolerances};
use crate::par;

/// One tested convex combination `z = sum l_i x_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlTrial {
    pub points: Vec<usize>,
    pub weights: Vec<f64>,
    /// Sample standing in for `z`; `None` when `z` was evaluated directly.
    pub snapped_to: Option<usize>,
    pub snap_distance: f64,
    /// `|sum l_i F(x_i) - F(z)|`.
    pub lhs: f64,
    /// `sum l_i f(x_i) - f(z)`.
    pub rhs: f64,
    pub slack: f64,
    /// Allowed negative slack: `osc_tol` plus the snapping error bound.
    pub allowance: f64,
}

/// Samples of `|sum l_i F(x_i) - F(sum l_i x_i)| <= sum l_i f(x_i) - f(sum l_i x_i)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlCertificate {
    pub trials: Vec<ControlTrial>,
    pub min_slack: f64,
    /// Lipschitz estimate of `(F, f)` used to bound snapping errors.
    pub lipschitz: f64,
    pub passed: bool,
}

impl ControlCertificate {
    fn from_trials(trials: Vec<ControlTrial>, lipschitz: f64) -> Self {
        let min_slack = trials.iter().map(|t| t.slack).fold(f64::INFINITY, f64::min);
        let passed = trials.iter().all(|t| t.slack >= -t.allowance);
        ControlCertificate { trials, min_slack, lipschitz, passed }
    }
}

fn random_combination(rng: &mut ChaCha8Rng, n: usize) -> (Vec<usize>, Vec<f64>) {
    let k = rng.random_range(2..=3usize.min(n.max(2)));
    let points: Vec<usize> = (0..k).map(|_| rng.random_range(0..n)).collect();
    let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    (points, raw.into_iter().map(|w| w / total).collect())
}

fn combine(cloud: &PointCloud, points: &[usize], weights: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; cloud.dim()];
    for (&i, &w) in points.iter().zip(weights) {
        for (zc, c) in z.iter_mut().zip(cloud.point(i)) {
            *zc += w * c;
        }
    }
    z
}

fn weighted_sum(rows: impl Iterator<Item = (f64, Vec<f64>)>, m: usize) -> Vec<f64> {
    let mut acc = vec![0.0; m];
    for (w, v) in rows {
        for (a, c) in acc.iter_mut().zip(&v) {
            *a += w * c;
        }
    }
    acc
}

/// Control inequality on sampled maps. Combination points are replaced by
/// the nearest sample; each trial may then fall short by
/// `L * snap_distance`, with `L` the largest Lipschitz ratio of `F` plus that
/// of `f` over sample pairs.
pub fn control_check(big_f: &ScoredMap, f: &ScoredMap, trials: usize, seed: u64, tol: &Tolerances) -> Result<ControlCertificate> {
    let norm = match big_f.metric() {
        Metric::Lp(p) => *p,
        Metric::Table(_) => return Err(Error::domain("the control inequality needs a normed value space")),
    };
    let fv = f.scalar_values().ok_or_else(|| Error::domain("the control function must be real-valued"))?;
    let cloud = big_f.domain();
    if cloud != f.domain() {
        return Err(Error::domain("F and f must share a domain"));
    }
    if cloud.is_empty() {
        return Err(Error::domain("empty domain"));
    }
    let n = cloud.len();
    let lipschitz = par::map_indexed(n, |i| {
        let (mut lf, mut lg) = (0.0f64, 0.0f64);
        for j in 0..n {
            let d = euclid(cloud.point(i), cloud.point(j));
            if d > 0.0 {
                lf = lf.max(norm.dist(big_f.value(i), big_f.value(j)) / d);
                lg = lg.max((fv[i] - fv[j]).abs() / d);
            }
        }
        lf + lg
    })
    .into_iter()
    .fold(0.0, f64::max);
    let m = big_f.value(0).len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let (points, weights) = random_combination(&mut rng, n);
        let z = combine(cloud, &points, &weights);
        let (snap, snap_distance) = (0..n)
            .map(|j| (j, euclid(cloud.point(j), &z)))
            .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
        let mean = weighted_sum(points.iter().zip(&weights).map(|(&i, &w)| (w, big_f.value(i).to_vec())), m);
        let lhs = norm.dist(&mean, big_f.value(snap));
        let rhs = points.iter().zip(&weights).map(|(&i, &w)| w * fv[i]).sum::<f64>() - fv[snap];
        out.push(ControlTrial {
            points,
            weights,
            snapped_to: Some(snap),
            snap_distance,
            lhs,
            rhs,
            slack: rhs - lhs,
            allowance: tol.osc_tol + lipschitz * snap_distance,
        });
    }
    Ok(ControlCertificate::from_trials(out, lipschitz))
}

/// Control inequality for maps given as closures, evaluated at the exact
/// combination points of samples from `cloud`.
pub fn control_check_fn(
    cloud: &PointCloud,
    big_f: impl Fn(&[f64]) -> Vec<f64>,
    norm: LpNorm,
    f: impl Fn(&[f64]) -> f64,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<ControlCertificate> {
    if cloud.is_empty() {
        return Err(Error::domain("empty domain"));
    }
    let n = cloud.len();
    let fx: Vec<Vec<f64>> = cloud.points().iter().map(|p| big_f(p)).collect();
    let gx: Vec<f64> = cloud.points().iter().map(|p| f(p)).collect();
    let m = fx[0].len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let (points, weights) = random_combination(&mut rng, n);
        let z = combine(cloud, &points, &weights);
        let fz = big_f(&z);
        if fz.len() != m {
            return Err(Error::domain("F changed its value dimension"));
        }
        let mean = weighted_sum(points.iter().zip(&weights).map(|(&i, &w)| (w, fx[i].clone())), m);
        let lhs = norm.dist(&mean, &fz);
        let rhs = points.iter().zip(&weights).map(|(&i, &w)| w * gx[i]).sum::<f64>() - f(&z);
        let scale = 1.0 + rhs.abs() + lhs;
        out.push(ControlTrial {
            points,
            weights,
            snapped_to: None,
            snap_distance: 0.0,
            lhs,
            rhs,
            slack: rhs - lhs,
            allowance: tol.osc_tol * scale,
        });
    }
    Ok(ControlCertificate::from_trials(out, 0.0))
}
