use super::{euclid, PointCloud};
use crate::error::{Error, Result};

/// Number of closed Euclidean `r`-balls a greedy net needs to cover the
/// listed points.
///
/// Centers are taken among the points themselves, except that a set that
/// fits in one ball around its bounding-box center counts as 1. The result
/// lies between the exact covering numbers at radii `2r` and `r / 2`.
pub fn covering_number(cloud: &PointCloud, subset: &[usize], r: f64) -> Result<usize> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("covering radius must be positive, got {r}")));
    }
    if subset.is_empty() {
        return Ok(0);
    }
    let d = cloud.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for &i in subset {
        for (k, &c) in cloud.point(i).iter().enumerate() {
            lo[k] = lo[k].min(c);
            hi[k] = hi[k].max(c);
        }
    }
    let mid: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect();
    if subset.iter().all(|&i| euclid(cloud.point(i), &mid) <= r) {
        return Ok(1);
    }
    let mut centers: Vec<usize> = Vec::new();
    for &i in subset {
        if !centers.iter().any(|&c| euclid(cloud.point(c), cloud.point(i)) <= r) {
            centers.push(i);
        }
    }
    Ok(centers.len())
}
