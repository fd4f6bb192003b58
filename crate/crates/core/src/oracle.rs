//! Slow reference routines in exact rational arithmetic.
//!
//! Every `f64` input converts exactly to a rational, so these answers carry
//! no rounding at all. They are exponential in the instance size and meant
//! for checking the floating-point paths on small clouds (`n <= 12`,
//! `d <= 3`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::geometry::{euclid, oscillation, PointCloud, ScoredMap};

pub const MAX_POINTS: usize = 16;
pub const MAX_DIM: usize = 3;

fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite coordinate")
}

fn to_rational(p: &[f64]) -> Vec<BigRational> {
    p.iter().map(|&c| rational(c)).collect()
}

/// Solves `[p_j ; 1] lambda = [x ; 1]` when the columns are affinely
/// independent; `None` if the system is inconsistent or the columns are
/// dependent (a smaller subset then covers the same hull).
fn barycentric(x: &[BigRational], cols: &[&Vec<BigRational>]) -> Option<Vec<BigRational>> {
    let rows = x.len() + 1;
    let k = cols.len();
    let mut m: Vec<Vec<BigRational>> = (0..rows)
        .map(|r| {
            let mut row: Vec<BigRational> = cols
                .iter()
                .map(|c| if r < x.len() { c[r].clone() } else { BigRational::one() })
                .collect();
            row.push(if r < x.len() { x[r].clone() } else { BigRational::one() });
            row
        })
        .collect();
    let mut pivot_row = 0;
    for col in 0..k {
        let sel = (pivot_row..rows).find(|&r| !m[r][col].is_zero())?;
        m.swap(pivot_row, sel);
        let piv = m[pivot_row][col].clone();
        for v in m[pivot_row].iter_mut() {
            *v = &*v / &piv;
        }
        for r in 0..rows {
            if r != pivot_row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..=k {
                    let delta = &factor * &m[pivot_row][c];
                    m[r][c] = &m[r][c] - delta;
                }
            }
        }
        pivot_row += 1;
    }
    if m[k..].iter().any(|row| !row[k].is_zero()) {
        return None;
    }
    Some((0..k).map(|i| m[i][k].clone()).collect())
}

fn combinations(n: usize, k: usize, mut visit: impl FnMut(&[usize]) -> bool) -> bool {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return visit(cur);
        }
        for i in start..n {
            cur.push(i);
            if rec(i + 1, n, k, cur, visit) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(0, n, k, &mut Vec::with_capacity(k), &mut visit)
}

fn hull_contains_rational(x: &[BigRational], pts: &[Vec<BigRational>]) -> bool {
    if pts.is_empty() {
        return false;
    }
    let d = x.len();
    (1..=(d + 1).min(pts.len())).any(|k| {
        combinations(pts.len(), k, |idx| {
            let cols: Vec<&Vec<BigRational>> = idx.iter().map(|&i| &pts[i]).collect();
            barycentric(x, &cols).is_some_and(|lam| lam.iter().all(|l| !l.is_negative()))
        })
    })
}

fn check_size(n: usize, d: usize) -> Result<()> {
    if n > MAX_POINTS || d > MAX_DIM {
        return Err(Error::Capacity(format!(
            "exact oracle handles at most {MAX_POINTS} points in dimension {MAX_DIM}, got {n} in {d}"
        )));
    }
    Ok(())
}

/// Exact test of `x in conv(points)` (Caratheodory enumeration).
pub fn hull_contains(x: &[f64], points: &[&[f64]]) -> Result<bool> {
    check_size(points.len(), x.len())?;
    let pts: Vec<Vec<BigRational>> = points.iter().map(|p| to_rational(p)).collect();
    Ok(hull_contains_rational(&to_rational(x), &pts))
}

/// Exact test that `members` is cut from `subset` by an open half-space,
/// i.e. `conv(members)` and `conv(subset \ members)` are disjoint.
pub fn is_cut(cloud: &PointCloud, subset: &[usize], members: &[usize]) -> Result<bool> {
    check_size(subset.len(), cloud.dim())?;
    let rest: Vec<usize> = subset.iter().copied().filter(|i| !members.contains(i)).collect();
    if members.is_empty() || rest.is_empty() {
        return Ok(true);
    }
    // conv(W) meets conv(V) iff 0 lies in conv(W - V).
    let mut diffs = Vec::with_capacity(members.len() * rest.len());
    for &w in members {
        let pw = to_rational(cloud.point(w));
        for &v in &rest {
            let pv = to_rational(cloud.point(v));
            diffs.push(pw.iter().zip(&pv).map(|(a, b)| a - b).collect::<Vec<_>>());
        }
    }
    let zero = vec![BigRational::from_integer(BigInt::zero()); cloud.dim()];
    Ok(!hull_contains_rational(&zero, &diffs))
}

/// Brute-force removal test: point `subset[k]` is removable iff some subset
/// cut off by an open half-space contains it and has oscillation accepted by
/// `fits`. Enumerates all `2^n` subsets.
pub fn removable(f: &ScoredMap, subset: &[usize], fits: impl Fn(f64) -> bool) -> Result<Vec<bool>> {
    let n = subset.len();
    check_size(n, f.domain().dim())?;
    let mut out = vec![false; n];
    for mask in 1u32..(1u32 << n) {
        let members: Vec<usize> = (0..n).filter(|b| mask >> b & 1 == 1).map(|b| subset[b]).collect();
        if !fits(oscillation(f, &members)) {
            continue;
        }
        if (0..n).all(|b| mask >> b & 1 == 0 || out[b]) {
            continue;
        }
        if is_cut(f.domain(), subset, &members)? {
            for b in 0..n {
                if mask >> b & 1 == 1 {
                    out[b] = true;
                }
            }
        }
    }
    Ok(out)
}

/// Least number of closed `r`-balls centred at listed points that cover them.
pub fn min_cover_at_points(cloud: &PointCloud, subset: &[usize], r: f64) -> Result<usize> {
    let n = subset.len();
    if n > 20 {
        return Err(Error::Capacity(format!("exact cover handles at most 20 points, got {n}")));
    }
    if n == 0 {
        return Ok(0);
    }
    let reach: Vec<u32> = subset
        .iter()
        .map(|&c| {
            (0..n)
                .filter(|&b| euclid(cloud.point(c), cloud.point(subset[b])) <= r)
                .fold(0u32, |m, b| m | 1 << b)
        })
        .collect();
    let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    for k in 1..=n {
        if combinations(n, k, |idx| idx.iter().fold(0u32, |m, &i| m | reach[i]) == full) {
            return Ok(k);
        }
    }
    Ok(n)
}
