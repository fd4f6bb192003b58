//! Clouds and maps for experiments: standard shapes, quasi-random samples,
//! separated trees, the norm-one map, the separating metric and the
//! martingale run.

mod martingale;
mod tree;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{euclid, Functional, LpNorm, Metric, PointCloud, ScoredMap, Vector};

pub use martingale::{martingale_run, rank_sets, Atom, MartingaleLevel, MartingaleRun};
pub use tree::{gen_tree, TreeCloud, TreeSpec};

const MAX_POINTS: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    /// `n` points per axis on `[0,1]^d`.
    Grid,
    /// Barycentric lattice of resolution `n` on the standard simplex.
    Simplex,
    /// `n` seeded uniform points in the unit ball.
    Ball,
    /// The `2^d` vertices of `[0,1]^d`; `n` is ignored.
    Square,
}

impl std::str::FromStr for Shape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Shape> {
        match s {
            "grid" => Ok(Shape::Grid),
            "simplex" => Ok(Shape::Simplex),
            "ball" => Ok(Shape::Ball),
            "square" => Ok(Shape::Square),
            other => Err(Error::domain(format!("unknown shape {other:?}"))),
        }
    }
}

fn labelled(points: Vec<Vec<f64>>, dim: usize) -> Result<PointCloud> {
    let ids = (0..points.len()).map(|i| format!("p{i}")).collect();
    PointCloud::new(dim, ids, points.into_iter().map(Vector).collect())
}

/// Deterministic clouds of the standard shapes; `seed` only matters for
/// [`Shape::Ball`].
pub fn gen_standard(shape: Shape, d: usize, n: usize, seed: u64) -> Result<PointCloud> {
    if d == 0 {
        return Err(Error::domain("dimension must be at least 1"));
    }
    if n == 0 && shape != Shape::Square {
        return Err(Error::domain("n must be at least 1"));
    }
    match shape {
        Shape::Grid => grid_on(0.0, 1.0, d, n),
        Shape::Simplex => simplex_lattice(d, n),
        Shape::Ball => {
            if n > MAX_POINTS {
                return Err(Error::domain(format!("{n} points is too many")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts = (0..n)
                .map(|_| {
                    let dir: Vec<f64> = loop {
                        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
                        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
                        if norm > 1e-12 {
                            break v.into_iter().map(|c| c / norm).collect();
                        }
                    };
                    let r = rng.random::<f64>().powf(1.0 / d as f64);
                    dir.into_iter().map(|c| r * c).collect()
                })
                .collect();
            labelled(pts, d)
        }
        Shape::Square => {
            if d > 20 {
                return Err(Error::domain("cube vertices are only generated for d <= 20"));
            }
            let pts = (0..1usize << d)
                .map(|m| (0..d).map(|k| (m >> k & 1) as f64).collect())
                .collect();
            labelled(pts, d)
        }
    }
}

/// `n` points per axis on `[lo, hi]^d`, first coordinate varying slowest.
pub fn grid_on(lo: f64, hi: f64, d: usize, n: usize) -> Result<PointCloud> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::domain(format!("bad grid range [{lo}, {hi}]")));
    }
    let total = (n as u128).checked_pow(d as u32).filter(|&t| t <= MAX_POINTS as u128);
    let Some(total) = total else {
        return Err(Error::domain(format!("grid of {n}^{d} points is too large")));
    };
    let coord = |k: usize| if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 };
    let pts = (0..total as usize)
        .map(|mut idx| {
            let mut p = vec![0.0; d];
            for slot in p.iter_mut().rev() {
                *slot = coord(idx % n);
                idx /= n;
            }
            p
        })
        .collect();
    labelled(pts, d)
}

fn simplex_lattice(d: usize, n: usize) -> Result<PointCloud> {
    let mut pts = Vec::new();
    let mut k = vec![0usize; d];
    loop {
        if k.iter().sum::<usize>() <= n {
            pts.push(k.iter().map(|&c| c as f64 / n as f64).collect());
            if pts.len() > MAX_POINTS {
                return Err(Error::domain("simplex lattice is too large"));
            }
        }
        let mut i = 0;
        loop {
            if i == d {
                return labelled(pts, d);
            }
            k[i] += 1;
            if k[i] <= n {
                break;
            }
            k[i] = 0;
            i += 1;
        }
    }
}

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107,
    109, 113, 127, 131,
];

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as f64;
    let mut inv = 1.0 / b;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base as u64) as f64 * inv;
        i /= base as u64;
        inv /= b;
    }
    out
}

/// The first `n` Halton points (skipping the origin) scaled to `[lo, hi]^d`.
pub fn halton(d: usize, n: usize, lo: f64, hi: f64) -> Result<PointCloud> {
    if d == 0 || d > PRIMES.len() {
        return Err(Error::domain(format!("Halton samples need 1 <= d <= {}", PRIMES.len())));
    }
    let pts = (1..=n as u64)
        .map(|i| PRIMES[..d].iter().map(|&b| lo + (hi - lo) * radical_inverse(i, b)).collect())
        .collect();
    labelled(pts, d)
}

/// `f = (g / diam C, 1 - g / diam C)` into `R^2` with the `l1` metric, for a
/// real 1-Lipschitz `g` vanishing somewhere with values in `[0, diam C]`.
pub fn gen_norm_one_map(g: &ScoredMap) -> Result<ScoredMap> {
    let s = g.scalar_values().ok_or_else(|| Error::domain("the norm-one map needs a real-valued g"))?;
    let cloud = g.domain();
    if cloud.is_empty() {
        return Err(Error::domain("empty domain"));
    }
    let diam = cloud.diameter();
    let slack = 1e-12 * (1.0 + diam);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if min.abs() > slack {
        return Err(Error::domain(format!("g must vanish at some sample; its minimum is {min}")));
    }
    if s.iter().any(|&v| v < -slack || v > diam + slack) {
        return Err(Error::domain("g must take values in [0, diam C]"));
    }
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let dx = euclid(cloud.point(i), cloud.point(j));
            if (s[i] - s[j]).abs() > dx * (1.0 + 1e-12) + slack {
                return Err(Error::domain(format!(
                    "g is not 1-Lipschitz between {:?} and {:?}",
                    cloud.id(i),
                    cloud.id(j)
                )));
            }
        }
    }
    let values = s
        .iter()
        .map(|&v| {
            let a = if diam > 0.0 { (v / diam).clamp(0.0, 1.0) } else { 0.0 };
            vec![a, 1.0 - a]
        })
        .collect();
    ScoredMap::new(cloud.clone(), values, Metric::Lp(LpNorm::L1))
}

/// Table metric `d(x,y) = sum_n 2^-n |x_n*(x - y)|` (n from 1).
#[derive(Clone, Debug, PartialEq)]
pub struct SepMetric {
    pub metric: Metric,
    /// No two distinct sample points are at distance 0.
    pub separating: bool,
}

pub fn gen_sep_metric(cloud: &PointCloud, functionals: &[Functional]) -> Result<SepMetric> {
    if functionals.is_empty() {
        return Err(Error::domain("the separating metric needs at least one functional"));
    }
    for (k, u) in functionals.iter().enumerate() {
        if u.len() != cloud.dim() {
            return Err(Error::domain(format!("functional {k} has the wrong length")));
        }
        if u.norm() > 1.0 + 1e-12 {
            return Err(Error::domain(format!("functional {k} has norm {} > 1", u.norm())));
        }
    }
    let n = cloud.len();
    let proj: Vec<Vec<f64>> = cloud.points().iter().map(|p| functionals.iter().map(|u| u.apply(p)).collect()).collect();
    let mut rows = vec![vec![0.0; n]; n];
    let mut separating = true;
    for i in 0..n {
        for j in i + 1..n {
            let mut d = 0.0;
            let mut w = 0.5;
            for (a, b) in proj[i].iter().zip(&proj[j]) {
                d += w * (a - b).abs();
                w *= 0.5;
            }
            if d == 0.0 {
                separating = false;
            }
            rows[i][j] = d;
            rows[j][i] = d;
        }
    }
    Ok(SepMetric { metric: Metric::Table(rows), separating })
}

/// The coordinate functionals `e_1, ..., e_d`.
pub fn coordinate_functionals(d: usize) -> Vec<Functional> {
    (0..d)
        .map(|k| {
            let mut e = vec![0.0; d];
            e[k] = 1.0;
            Functional(e)
        })
        .collect()
}
