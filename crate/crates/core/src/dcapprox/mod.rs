//! Delta-convex approximation: the envelopes
//! `f_n(x) = min_y f(y) + n |x - y|^2` with their convex split
//! `f_n = g - h`, `g = 2n|x|^2`, `h = max_y n|x + y|^2 - 2n|y|^2 - f(y)`,
//! uniform error curves, control-function certificates and the renorming
//! function built from derivation chains.
//!
//! Infima and suprema run over the sample domain of `f`, not over its
//! convex hull.

mod control;
mod renorm;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, euclid, PointCloud, ScoredMap, Tolerances};
use crate::par;

pub use control::{control_check, control_check_fn, ControlCertificate, ControlTrial};
pub use renorm::{build_renorm, midpoint_drop_check, DropReport, DropViolation, RenormFunction, RenormLevel};

/// Envelope `f_n` of a real map and its convex split, tabulated on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DcApproximant {
    pub n: u32,
    pub grid: PointCloud,
    /// `f_n` from the direct minimisation.
    pub envelope: Vec<f64>,
    /// Domain index of a minimiser for each grid point.
    pub argmin: Vec<usize>,
    pub g: Vec<f64>,
    pub h: Vec<f64>,
    /// `max |y|` over the domain of `f`.
    pub domain_radius: f64,
}

fn scalar(f: &ScoredMap) -> Result<&[f64]> {
    f.scalar_values().ok_or_else(|| Error::domain("expected a real-valued map"))
}

/// Tabulates `f_n`, `g` and `h` on `grid`.
pub fn moreau_envelope(f: &ScoredMap, n: u32, grid: &PointCloud) -> Result<DcApproximant> {
    let vals = scalar(f)?;
    if f.is_empty() {
        return Err(Error::domain("envelope of a map on an empty domain"));
    }
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    let dom = f.domain();
    if grid.dim() != dom.dim() {
        return Err(Error::domain("grid and domain dimensions differ"));
    }
    let nf = n as f64;
    let sq: Vec<f64> = dom.points().iter().map(|p| dot(p, p)).collect();
    let rows = par::map_indexed(grid.len(), |i| {
        let x = grid.point(i);
        let mut best = (f64::INFINITY, 0usize);
        let mut top = f64::NEG_INFINITY;
        for (j, y) in dom.points().iter().enumerate() {
            let dxy: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            let v = vals[j] + nf * dxy;
            if v < best.0 {
                best = (v, j);
            }
            let sxy: f64 = x.iter().zip(y.iter()).map(|(a, b)| (a + b) * (a + b)).sum();
            top = top.max(nf * sxy - 2.0 * nf * sq[j] - vals[j]);
        }
        (best.0, best.1, 2.0 * nf * dot(x, x), top)
    });
    Ok(DcApproximant {
        n,
        grid: grid.clone(),
        envelope: rows.iter().map(|r| r.0).collect(),
        argmin: rows.iter().map(|r| r.1).collect(),
        g: rows.iter().map(|r| r.2).collect(),
        h: rows.iter().map(|r| r.3).collect(),
        domain_radius: sq.iter().cloned().fold(0.0, f64::max).sqrt(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MidpointViolation {
    /// `"g"` or `"h"`.
    pub part: String,
    pub x: usize,
    pub y: usize,
    pub mid: usize,
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitReport {
    pub n: u32,
    /// `max |f_n - (g - h)|` over the grid.
    pub identity_error: f64,
    pub midpoint_triples: usize,
    pub violations: Vec<MidpointViolation>,
    pub lipschitz_pairs: usize,
    pub g_lipschitz: f64,
    pub h_lipschitz: f64,
    /// `4 n R` with `R` the grid radius.
    pub g_lipschitz_bound: f64,
    /// `2 n (R + domain radius)`.
    pub h_lipschitz_bound: f64,
    pub passed: bool,
}

/// Index of grid points by coordinates rounded to `1e-9` of the grid scale.
pub(crate) struct GridIndex {
    quantum: f64,
    map: HashMap<Vec<i64>, usize>,
}

impl GridIndex {
    pub(crate) fn new(grid: &PointCloud) -> Self {
        let scale = grid.points().iter().flat_map(|p| p.iter()).fold(1.0f64, |m, c| m.max(c.abs()));
        let quantum = 1e-9 * scale;
        let mut map = HashMap::with_capacity(grid.len());
        for (i, p) in grid.points().iter().enumerate() {
            map.entry(Self::key(quantum, p)).or_insert(i);
        }
        GridIndex { quantum, map }
    }

    fn key(quantum: f64, p: &[f64]) -> Vec<i64> {
        p.iter().map(|c| (c / quantum).round() as i64).collect()
    }

    pub(crate) fn find(&self, p: &[f64]) -> Option<usize> {
        self.map.get(&Self::key(self.quantum, p)).copied()
    }
}

/// Checks `f_n = g - h` on the grid, midpoint convexity of `g` and `h` on
/// grid triples `(x, (x+y)/2, y)`, and their Lipschitz bounds on random
/// pairs. Triples are found by reflecting a random grid point through
/// another; up to `8 trials` attempts are made.
pub fn dc_split_check(approx: &DcApproximant, trials: usize, seed: u64, tol: &Tolerances) -> SplitReport {
    let grid = &approx.grid;
    let m = grid.len();
    let identity_error = (0..m)
        .map(|i| (approx.envelope[i] - (approx.g[i] - approx.h[i])).abs())
        .fold(0.0, f64::max);
    let index = GridIndex::new(grid);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let mut triples = 0;
    if m >= 3 {
        for _ in 0..8 * trials {
            if triples == trials {
                break;
            }
            let mid = rng.random_range(0..m);
            let x = rng.random_range(0..m);
            if x == mid {
                continue;
            }
            let mirror: Vec<f64> = grid.point(mid).iter().zip(grid.point(x)).map(|(c, a)| 2.0 * c - a).collect();
            let Some(y) = index.find(&mirror) else { continue };
            triples += 1;
            for (part, vals) in [("g", &approx.g), ("h", &approx.h)] {
                let excess = vals[mid] - 0.5 * (vals[x] + vals[y]);
                if excess > tol.osc_tol {
                    violations.push(MidpointViolation { part: part.to_string(), x, y, mid, excess });
                }
            }
        }
    }
    let mut g_lip = 0.0f64;
    let mut h_lip = 0.0f64;
    let mut pairs = 0;
    if m >= 2 {
        for _ in 0..trials {
            let a = rng.random_range(0..m);
            let b = rng.random_range(0..m);
            let d = euclid(grid.point(a), grid.point(b));
            if d == 0.0 {
                continue;
            }
            pairs += 1;
            g_lip = g_lip.max((approx.g[a] - approx.g[b]).abs() / d);
            h_lip = h_lip.max((approx.h[a] - approx.h[b]).abs() / d);
        }
    }
    let nf = approx.n as f64;
    let grid_radius = grid.points().iter().map(|p| dot(p, p)).fold(0.0, f64::max).sqrt();
    let g_bound = 4.0 * nf * grid_radius;
    let h_bound = 2.0 * nf * (grid_radius + approx.domain_radius);
    let lip_ok = g_lip <= g_bound * (1.0 + 1e-9) + tol.osc_tol && h_lip <= h_bound * (1.0 + 1e-9) + tol.osc_tol;
    SplitReport {
        n: approx.n,
        identity_error,
        midpoint_triples: triples,
        passed: identity_error <= tol.osc_tol && violations.is_empty() && lip_ok,
        violations,
        lipschitz_pairs: pairs,
        g_lipschitz: g_lip,
        h_lipschitz: h_lip,
        g_lipschitz_bound: g_bound,
        h_lipschitz_bound: h_bound,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorPoint {
    pub n: u32,
    pub sup_error: f64,
    /// `L^2 / (4n) + L mesh`.
    pub theory_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub points: Vec<ErrorPoint>,
    /// Largest observed Lipschitz ratio of `f` over sample pairs.
    pub lipschitz: f64,
    /// Largest nearest-neighbour distance in the domain.
    pub mesh: f64,
    /// Errors do not increase along `n_list`.
    pub monotone: bool,
}

/// `sup |f - f_n|` over the domain of `f`, for each `n`.
pub fn uniform_error_curve(f: &ScoredMap, n_list: &[u32]) -> Result<ErrorCurve> {
    if n_list.is_empty() {
        return Err(Error::domain("n_list is empty"));
    }
    let vals = scalar(f)?;
    let dom = f.domain();
    let rows = par::map_indexed(dom.len(), |i| {
        let mut lip = 0.0f64;
        let mut nearest = f64::INFINITY;
        for j in 0..dom.len() {
            if i == j {
                continue;
            }
            let d = euclid(dom.point(i), dom.point(j));
            if d > 0.0 {
                lip = lip.max((vals[i] - vals[j]).abs() / d);
                nearest = nearest.min(d);
            }
        }
        (lip, if nearest.is_finite() { nearest } else { 0.0 })
    });
    let lipschitz = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let mesh = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let approx = moreau_envelope(f, n, dom)?;
        let sup_error = vals.iter().zip(&approx.envelope).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let theory_bound = lipschitz * lipschitz / (4.0 * n as f64) + lipschitz * mesh;
        points.push(ErrorPoint { n, sup_error, theory_bound });
    }
    let monotone = points.windows(2).all(|w| w[1].sup_error <= w[0].sup_error);
    Ok(ErrorCurve { points, lipschitz, mesh, monotone })
}
