use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dentability::{dz_index_with, modulus_delta, Capacity, Mode, Outcome};
use crate::error::{Error, Result};
use crate::geometry::{distance_to_hull, PointCloud, ScoredMap, Tolerances};
use crate::par;

/// The derivation chain at scale `2^-k`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenormLevel {
    pub k: u32,
    pub epsilon: f64,
    /// `N_k = Dz(f, 2^-k)`.
    pub n_k: usize,
    /// `D_0, ..., D_{N_k - 1}`, all nonempty.
    pub stages: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
struct Term {
    weight: f64,
    points: Vec<Vec<f64>>,
    interval: Option<(f64, f64)>,
}

impl Term {
    fn dist(&self, x: &[f64]) -> f64 {
        match self.interval {
            Some((lo, hi)) => (lo - x[0]).max(x[0] - hi).max(0.0),
            None => {
                let refs: Vec<&[f64]> = self.points.iter().map(|p| p.as_slice()).collect();
                distance_to_hull(x, &refs).unwrap_or(f64::NAN)
            }
        }
    }
}

/// `F(x)^2 = sum_{k <= K} sum_{n < N_k} 2^-k / N_k (d(x, conv D_n)^2 + d(x, -conv D_n)^2)`.
#[derive(Clone, Debug)]
pub struct RenormFunction {
    pub levels: Vec<RenormLevel>,
    pub mode: Mode,
    pub capacity: Capacity,
    cloud: PointCloud,
    terms: Vec<Term>,
    samples: Vec<f64>,
}

impl RenormFunction {
    fn half_sq(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.weight * t.dist(x).powi(2)).sum()
    }

    /// `F(x)^2`. Exactly even in `x`.
    pub fn eval_sq(&self, x: &[f64]) -> f64 {
        let neg: Vec<f64> = x.iter().map(|c| -c).collect();
        self.half_sq(x) + self.half_sq(&neg)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_sq(x).sqrt()
    }

    pub fn cloud(&self) -> &PointCloud {
        &self.cloud
    }

    /// Stored `F(x)^2` at each point of the cloud.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Multiplies the stored sample values of `F` (not the evaluator) by `c`.
    pub fn scale_samples(&mut self, c: f64) {
        for s in &mut self.samples {
            *s *= c * c;
        }
    }
}

/// Builds `F` from the derivation chains of `f` at scales `2^-1 .. 2^-K`.
pub fn build_renorm(f: &ScoredMap, k_max: u32, mode: Mode, tol: &Tolerances, cap: &Capacity) -> Result<RenormFunction> {
    if k_max > 60 {
        return Err(Error::domain("K must be at most 60"));
    }
    let cloud = f.domain();
    let all = cloud.all();
    let mut levels = Vec::new();
    let mut terms = Vec::new();
    for k in 1..=k_max {
        let eps = (-(k as f64)).exp2();
        let trace = dz_index_with(f, &all, eps, mode, tol, cap)?;
        let n_k = match trace.outcome {
            Outcome::Dz(n) => n,
            Outcome::StalledAt(stage) => return Err(Error::NotFinitelyDentable { k, stage }),
        };
        let stages: Vec<Vec<usize>> = (0..n_k).map(|n| trace.stage_input(n).to_vec()).collect();
        for s in &stages {
            let points: Vec<Vec<f64>> = s.iter().map(|&i| cloud.point(i).to_vec()).collect();
            let interval = (cloud.dim() == 1).then(|| {
                points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[0]), hi.max(p[0])))
            });
            terms.push(Term { weight: eps / n_k as f64, points, interval });
        }
        levels.push(RenormLevel { k, epsilon: eps, n_k, stages });
    }
    let mut r = RenormFunction { levels, mode, capacity: cap.clone(), cloud: cloud.clone(), terms, samples: Vec::new() };
    r.samples = par::map_indexed(cloud.len(), |i| r.eval_sq(cloud.point(i)));
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DropViolation {
    pub x: usize,
    pub y: usize,
    /// `F((x+y)/2)^2`.
    pub lhs: f64,
    /// `(F(x)^2 + F(y)^2) / 2 - drop`.
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DropReport {
    pub epsilon: f64,
    /// `delta(eps / 4)`; `None` is the no-pair sentinel.
    pub delta: Option<f64>,
    /// `Dz(f, eps / 8)`.
    pub dz_eighth: usize,
    /// `eps delta(eps/4)^2 / (128 Dz(f, eps/8)^3)`.
    pub drop: f64,
    /// Pairs with `d(f(x), f(y)) > eps`.
    pub qualifying_pairs: usize,
    pub tested: usize,
    pub violation_count: usize,
    /// The first 100 violations.
    pub violations: Vec<DropViolation>,
    /// Smallest and mean `rhs - lhs` over tested pairs.
    pub min_margin: Option<f64>,
    pub mean_margin: Option<f64>,
    /// No pair qualified; the check passes without testing anything.
    pub vacuous: bool,
    pub passed: bool,
}

/// Tests `F((x+y)/2)^2 <= (F(x)^2 + F(y)^2)/2 - drop` on sample pairs whose
/// values are more than `eps` apart. All qualifying pairs are tested when
/// there are at most `trials`; otherwise `trials` are drawn with replacement.
/// Endpoint values come from the stored sample table.
pub fn midpoint_drop_check(
    r: &RenormFunction,
    f: &ScoredMap,
    eps: f64,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<DropReport> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    let cloud = f.domain();
    if cloud != r.cloud() {
        return Err(Error::domain("the renorm function was built on a different cloud"));
    }
    let n = f.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if f.dist(i, j) > eps {
                pairs.push((i, j));
            }
        }
    }
    let delta = if n >= 2 { modulus_delta(f, &[eps / 4.0])?.rows[0].delta } else { None };
    let eighth = dz_index_with(f, &cloud.all(), eps / 8.0, r.mode, tol, &r.capacity)?;
    let dz_eighth = eighth.dz().ok_or_else(|| {
        Error::Precondition(format!("Dz(f, eps/8) is infinite: the derivation stalls at stage {}", eighth.stages.len()))
    })?;
    let drop = match delta {
        Some(d) if dz_eighth > 0 => eps * d * d / (128.0 * (dz_eighth as f64).powi(3)),
        _ => 0.0,
    };
    let chosen: Vec<(usize, usize)> = if pairs.len() <= trials {
        pairs.clone()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..trials).map(|_| pairs[rng.random_range(0..pairs.len())]).collect()
    };
    let samples = r.samples();
    let rows = par::map_indexed(chosen.len(), |t| {
        let (i, j) = chosen[t];
        let mid: Vec<f64> = cloud.point(i).iter().zip(cloud.point(j)).map(|(a, b)| 0.5 * (a + b)).collect();
        let lhs = r.eval_sq(&mid);
        let rhs = 0.5 * (samples[i] + samples[j]) - drop;
        (i, j, lhs, rhs)
    });
    let mut violations = Vec::new();
    let mut violation_count = 0;
    let mut min_margin = f64::INFINITY;
    let mut sum = 0.0;
    for &(x, y, lhs, rhs) in &rows {
        let margin = rhs - lhs;
        min_margin = min_margin.min(margin);
        sum += margin;
        if margin < 0.0 {
            violation_count += 1;
            if violations.len() < 100 {
                violations.push(DropViolation { x, y, lhs, rhs });
            }
        }
    }
    let tested = rows.len();
    Ok(DropReport {
        epsilon: eps,
        delta,
        dz_eighth,
        drop,
        qualifying_pairs: pairs.len(),
        tested,
        violation_count,
        violations,
        min_margin: (tested > 0).then_some(min_margin),
        mean_margin: (tested > 0).then(|| sum / tested as f64),
        vacuous: pairs.is_empty(),
        passed: violation_count == 0,
    })
}
