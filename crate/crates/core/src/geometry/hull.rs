//! Nearest points of convex hulls (Wolfe's minimum-norm-point method) and
//! certified hull membership.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{dot, norm2, Functional, PointCloud};
use crate::error::{Error, Result};

const OPT_GAP: f64 = 1e-14;
const POSITIVE: f64 = 1e-12;

/// The point of `conv(points)` nearest to a query point.
#[derive(Clone, Debug, PartialEq)]
pub struct NearestPoint {
    pub point: Vec<f64>,
    /// Barycentric weights, one per input point.
    pub weights: Vec<f64>,
    pub distance: f64,
}

/// Outcome of a hull membership test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HullMembership {
    /// `x` is within the tolerance of the hull: convex weights (index,
    /// weight) reproduce `x` up to `residual`.
    Inside { weights: Vec<(usize, f64)>, residual: f64 },
    /// `separator.x` exceeds `separator.p` by at least `margin` for every
    /// hull point `p`; `separator` has unit norm.
    Outside { separator: Functional, margin: f64 },
}

impl HullMembership {
    pub fn is_inside(&self) -> bool {
        matches!(self, HullMembership::Inside { .. })
    }
}

/// Wolfe's method on points already translated so the query sits at 0.
/// Returns barycentric weights of the minimum-norm point.
fn min_norm_weights(q: &[Vec<f64>]) -> Vec<f64> {
    let n = q.len();
    let sq: Vec<f64> = q.iter().map(|p| dot(p, p)).collect();
    let scale = sq.iter().cloned().fold(0.0, f64::max);
    let start = (0..n).min_by(|&a, &b| sq[a].total_cmp(&sq[b])).unwrap();
    let mut weights = vec![0.0; n];
    if scale == 0.0 {
        weights[start] = 1.0;
        return weights;
    }
    let mut s = vec![start];
    let mut w = vec![1.0];
    let mut x = q[start].clone();

    'major: for _ in 0..(20 * n + 100) {
        let xx = dot(&x, &x);
        let (j, xq) = (0..n)
            .map(|j| (j, dot(&x, &q[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if xx - xq <= OPT_GAP * scale || s.contains(&j) {
            break;
        }
        s.push(j);
        w.push(0.0);
        loop {
            let Some(alpha) = affine_minimizer(q, &s) else {
                s.pop();
                w.pop();
                break 'major;
            };
            if alpha.iter().all(|&a| a > POSITIVE) {
                w = alpha;
                x = combine(q, &s, &w);
                break;
            }
            let mut theta = 1.0f64;
            let mut drop = None;
            for (i, &a) in alpha.iter().enumerate() {
                if a <= POSITIVE {
                    let denom = w[i] - a;
                    if denom > 0.0 && w[i] / denom < theta {
                        theta = w[i] / denom;
                        drop = Some(i);
                    }
                }
            }
            for (wi, &a) in w.iter_mut().zip(&alpha) {
                *wi = theta * a + (1.0 - theta) * *wi;
            }
            if let Some(k) = drop {
                w[k] = 0.0;
            }
            let mut keep_s = Vec::with_capacity(s.len());
            let mut keep_w = Vec::with_capacity(s.len());
            for (&si, &wi) in s.iter().zip(&w) {
                if wi > POSITIVE {
                    keep_s.push(si);
                    keep_w.push(wi);
                }
            }
            if keep_s.is_empty() {
                break 'major;
            }
            let total: f64 = keep_w.iter().sum();
            keep_w.iter_mut().for_each(|v| *v /= total);
            s = keep_s;
            w = keep_w;
            x = combine(q, &s, &w);
            if s.len() == 1 {
                break;
            }
        }
    }
    for (&si, &wi) in s.iter().zip(&w) {
        weights[si] = wi;
    }
    weights
}

fn combine(q: &[Vec<f64>], s: &[usize], w: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; q[0].len()];
    for (&i, &wi) in s.iter().zip(w) {
        for (xk, qk) in x.iter_mut().zip(&q[i]) {
            *xk += wi * qk;
        }
    }
    x
}

/// Minimum-norm point of the affine hull of `q[s]`, as affine weights.
fn affine_minimizer(q: &[Vec<f64>], s: &[usize]) -> Option<Vec<f64>> {
    let k = s.len();
    let m = DMatrix::from_fn(k, k, |a, b| dot(&q[s[a]], &q[s[b]]) + 1.0);
    let beta = m.lu().solve(&DVector::from_element(k, 1.0))?;
    let total: f64 = beta.iter().sum();
    if !total.is_finite() || total.abs() < 1e-300 {
        return None;
    }
    let alpha: Vec<f64> = beta.iter().map(|b| b / total).collect();
    alpha.iter().all(|a| a.is_finite()).then_some(alpha)
}

/// The point of `conv(points)` closest to `x` in the Euclidean norm.
pub fn nearest_in_hull(x: &[f64], points: &[&[f64]]) -> Result<NearestPoint> {
    if points.is_empty() {
        return Err(Error::domain("convex hull of an empty set"));
    }
    if points.iter().any(|p| p.len() != x.len()) {
        return Err(Error::domain("hull points and query differ in dimension"));
    }
    let q: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(x).map(|(a, b)| a - b).collect())
        .collect();
    let weights = min_norm_weights(&q);
    let mut point = vec![0.0; x.len()];
    for (p, &w) in points.iter().zip(&weights) {
        if w != 0.0 {
            for (c, pk) in point.iter_mut().zip(p.iter()) {
                *c += w * pk;
            }
        }
    }
    let offset: Vec<f64> = point.iter().zip(x).map(|(a, b)| a - b).collect();
    Ok(NearestPoint { distance: norm2(&offset), point, weights })
}

/// Euclidean distance from `x` to `conv(points)`.
pub fn distance_to_hull(x: &[f64], points: &[&[f64]]) -> Result<f64> {
    Ok(nearest_in_hull(x, points)?.distance)
}

/// Tests `x in conv(points)` up to `sep_tol`. Weight indices refer to
/// positions in `points`.
pub fn hull_membership(x: &[f64], points: &[&[f64]], sep_tol: f64) -> Result<HullMembership> {
    let near = nearest_in_hull(x, points)?;
    if near.distance > 0.0 {
        let u: Vec<f64> = near.point.iter().zip(x).map(|(p, xi)| (xi - p) / near.distance).collect();
        let ux = dot(&u, x);
        let top = points.iter().map(|p| dot(&u, p)).fold(f64::NEG_INFINITY, f64::max);
        let margin = ux - top;
        if margin > sep_tol {
            return Ok(HullMembership::Outside { separator: Functional(u), margin });
        }
    }
    let weights = near
        .weights
        .iter()
        .enumerate()
        .filter(|(_, &w)| w > 0.0)
        .map(|(i, &w)| (i, w))
        .collect();
    Ok(HullMembership::Inside { weights, residual: near.distance })
}

/// Tests `x in conv(cloud[subset])`; weight indices refer to the cloud.
pub fn hull_membership_in(x: &[f64], cloud: &PointCloud, subset: &[usize], sep_tol: f64) -> Result<HullMembership> {
    let pts: Vec<&[f64]> = subset.iter().map(|&i| cloud.point(i)).collect();
    Ok(match hull_membership(x, &pts, sep_tol)? {
        HullMembership::Inside { weights, residual } => HullMembership::Inside {
            weights: weights.into_iter().map(|(k, w)| (subset[k], w)).collect(),
            residual,
        },
        out => out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn refs(v: &[Vec<f64>]) -> Vec<&[f64]> {
        v.iter().map(Vec::as_slice).collect()
    }

    #[test]
    fn square_center_is_inside() {
        let sq = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]];
        match hull_membership(&[0.5, 0.5], &refs(&sq), 1e-9).unwrap() {
            HullMembership::Inside { weights, residual } => {
                assert!(residual < 1e-12);
                let total: f64 = weights.iter().map(|w| w.1).sum();
                assert!((total - 1.0).abs() < 1e-12);
                let mut y = [0.0; 2];
                for (i, w) in weights {
                    y[0] += w * sq[i][0];
                    y[1] += w * sq[i][1];
                }
                assert!((y[0] - 0.5).abs() < 1e-12 && (y[1] - 0.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn outside_point_gets_certificate() {
        let seg = vec![vec![0.0, 0.0], vec![2.0, 0.0]];
        match hull_membership(&[1.0, 3.0], &refs(&seg), 1e-9).unwrap() {
            HullMembership::Outside { separator, margin } => {
                assert!((margin - 3.0).abs() < 1e-12);
                assert!((separator.0[1] - 1.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        let d = distance_to_hull(&[5.0, 0.0], &refs(&seg)).unwrap();
        assert!((d - 3.0).abs() < 1e-12);
    }

    #[test]
    fn vertex_is_outside_hull_of_the_others() {
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let m = hull_membership(&[1.0, 1.0], &refs(&tri), 1e-9).unwrap();
        assert!(!m.is_inside());
        let d = distance_to_hull(&[1.0, 1.0], &refs(&tri)).unwrap();
        assert!((d - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn repeated_and_collinear_points() {
        let pts = vec![vec![0.0, 0.0, 0.0], vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0], vec![1.0, 1.0, 1.0]];
        assert!(hull_membership(&[0.5, 0.5, 0.5], &refs(&pts), 1e-9).unwrap().is_inside());
        assert!(!hull_membership(&[0.5, 0.5, 0.6], &refs(&pts), 1e-9).unwrap().is_inside());
    }
}
