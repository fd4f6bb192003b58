//! Enumeration of half-space cuts of a finite set.
//!
//! A point `x` of `D` lies in some slice of `D` whose image is small iff
//! some set `W` containing `x` has small image and `x` is outside
//! `conv(D \ W)`; it suffices to try the maximal such `W`. On the line and
//! in the plane all cuts are enumerated directly instead.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{hull_membership_in, oscillation, slice_above, Functional, HullMembership, ScoredMap, Slice};
use crate::par;

/// Size limits for the exact derivation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Capacity {
    /// Largest stage set handled exactly in the plane.
    pub max_points_plane: usize,
    /// Largest stage set for real-valued maps in dimension 3 and up.
    pub max_points_scalar: usize,
    /// Largest stage set for other maps in dimension 3 and up (at most 64).
    pub max_points_general: usize,
    /// Largest number of maximal small-image sets enumerated per stage.
    pub max_cliques: usize,
}

impl Default for Capacity {
    fn default() -> Self {
        Capacity { max_points_plane: 200, max_points_scalar: 512, max_points_general: 32, max_cliques: 100_000 }
    }
}

pub(crate) type Witness = Option<(Slice, f64)>;

pub(crate) trait Fits: Fn(f64) -> bool + Sync {}
impl<T: Fn(f64) -> bool + Sync> Fits for T {}

/// For each position of `d`, a slice of `d` containing it whose oscillation
/// passes `fits`, if one exists.
pub(crate) fn exact_witnesses(f: &ScoredMap, d: &[usize], fits: &dyn Fits, sep_tol: f64, cap: &Capacity) -> Result<Vec<Witness>> {
    let dim = f.domain().dim();
    match dim {
        1 => Ok(sweep(f, d, &[Functional(vec![1.0]), Functional(vec![-1.0])], fits)),
        2 => {
            if d.len() > cap.max_points_plane {
                return Err(Error::Capacity(format!(
                    "exact derivation in the plane handles {} points, stage has {}",
                    cap.max_points_plane,
                    d.len()
                )));
            }
            Ok(sweep(f, d, &plane_directions(f, d), fits))
        }
        _ => by_hull_tests(f, d, fits, sep_tol, cap),
    }
}

/// Directions meeting every cell of the arrangement of lines orthogonal to
/// the pairwise differences.
fn plane_directions(f: &ScoredMap, d: &[usize]) -> Vec<Functional> {
    let cloud = f.domain();
    let mut angles = Vec::with_capacity(d.len() * d.len());
    for (a, &i) in d.iter().enumerate() {
        for &j in &d[a + 1..] {
            let (p, q) = (cloud.point(i), cloud.point(j));
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            if dx == 0.0 && dy == 0.0 {
                continue;
            }
            let theta = dy.atan2(dx);
            angles.push((theta + PI / 2.0).rem_euclid(TAU));
            angles.push((theta - PI / 2.0).rem_euclid(TAU));
        }
    }
    angles.sort_by(f64::total_cmp);
    angles.dedup_by(|b, a| (*b - *a).abs() <= 1e-12);
    if angles.is_empty() {
        return vec![Functional(vec![1.0, 0.0])];
    }
    let k = angles.len();
    (0..k)
        .map(|i| {
            let mid = if i + 1 < k { 0.5 * (angles[i] + angles[i + 1]) } else { 0.5 * (angles[i] + angles[0] + TAU) };
            Functional(vec![mid.cos(), mid.sin()])
        })
        .collect()
}

fn sweep(f: &ScoredMap, d: &[usize], dirs: &[Functional], fits: &dyn Fits) -> Vec<Witness> {
    let n = d.len();
    let mut pos = vec![usize::MAX; f.len()];
    for (p, &i) in d.iter().enumerate() {
        pos[i] = p;
    }
    let mut out: Vec<Witness> = vec![None; n];
    let mut left = n;
    for chunk in dirs.chunks(256) {
        let found = par::map_indexed(chunk.len(), |k| longest_fitting_prefix(f, d, &chunk[k], fits));
        for (slice, osc) in found.into_iter().flatten() {
            for &m in &slice.members {
                let p = pos[m];
                if out[p].is_none() {
                    out[p] = Some((slice.clone(), osc));
                    left -= 1;
                }
            }
        }
        if left == 0 {
            break;
        }
    }
    out
}

/// The deepest slice of `d` in direction `u` whose oscillation fits.
pub(crate) fn longest_fitting_prefix(f: &ScoredMap, d: &[usize], u: &Functional, fits: &dyn Fits) -> Witness {
    let cloud = f.domain();
    let n = d.len();
    if n == 0 {
        return None;
    }
    let mut vals: Vec<(f64, usize)> = d.iter().map(|&i| (u.apply(cloud.point(i)), i)).collect();
    vals.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let scalar = f.scalar_values();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut diam = 0.0f64;
    let mut best = (0, 0.0);
    let mut k = 0;
    while k < n {
        let mut g = k;
        while g < n && vals[g].0 == vals[k].0 {
            g += 1;
        }
        for idx in k..g {
            let q = vals[idx].1;
            match scalar {
                Some(s) => {
                    lo = lo.min(s[q]);
                    hi = hi.max(s[q]);
                    diam = hi - lo;
                }
                None => {
                    for &(_, m) in &vals[..idx] {
                        diam = diam.max(f.dist(q, m));
                    }
                }
            }
        }
        if !fits(diam) {
            break;
        }
        best = (g, diam);
        k = g;
    }
    let (len, osc) = best;
    if len == 0 {
        return None;
    }
    let threshold = if len < n {
        let (top, next) = (vals[len - 1].0, vals[len].0);
        let mid = 0.5 * (top + next);
        if mid > next && mid < top {
            mid
        } else {
            next
        }
    } else {
        vals[n - 1].0 - 1.0
    };
    let mut members: Vec<usize> = vals[..len].iter().map(|v| v.1).collect();
    members.sort_unstable();
    Some((Slice { functional: u.clone(), depth: vals[0].0 - threshold, members }, osc))
}

/// A slice of `d` containing `x` and avoiding `rest`, if `x` is outside
/// `conv(rest)` by more than `sep_tol`.
pub(crate) fn separate(f: &ScoredMap, d: &[usize], x: usize, rest: &[usize], sep_tol: f64) -> Result<Option<Slice>> {
    let cloud = f.domain();
    if rest.is_empty() {
        let u = Functional({
            let mut e = vec![0.0; cloud.dim()];
            e[0] = 1.0;
            e
        });
        let low = d.iter().map(|&i| u.apply(cloud.point(i))).fold(f64::INFINITY, f64::min);
        return Ok(Some(slice_above(cloud, d, &u, low - 1.0)));
    }
    match hull_membership_in(cloud.point(x), cloud, rest, sep_tol)? {
        HullMembership::Outside { separator, .. } => {
            let c = rest.iter().map(|&i| separator.apply(cloud.point(i))).fold(f64::NEG_INFINITY, f64::max);
            Ok(Some(slice_above(cloud, d, &separator, c)))
        }
        HullMembership::Inside { .. } => Ok(None),
    }
}

fn by_hull_tests(f: &ScoredMap, d: &[usize], fits: &dyn Fits, sep_tol: f64, cap: &Capacity) -> Result<Vec<Witness>> {
    let n = d.len();
    let groups = match f.scalar_values() {
        Some(s) => {
            if n > cap.max_points_scalar {
                return Err(Error::Capacity(format!(
                    "exact derivation of a real-valued map handles {} points, stage has {n}",
                    cap.max_points_scalar
                )));
            }
            value_windows(s, d, fits)
        }
        None => {
            if n > cap.max_points_general.min(64) {
                return Err(Error::Capacity(format!(
                    "exact derivation handles {} points in dimension {}, stage has {n}",
                    cap.max_points_general.min(64),
                    f.domain().dim()
                )));
            }
            maximal_cliques(f, d, fits, cap.max_cliques)?
        }
    };
    let mut containing: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (g, members) in groups.iter().enumerate() {
        for &p in members {
            containing[p].push(g);
        }
    }
    let results = par::map_indexed(n, |p| -> Result<Witness> {
        for &g in &containing[p] {
            let mut inside = vec![false; n];
            for &q in &groups[g] {
                inside[q] = true;
            }
            let rest: Vec<usize> = (0..n).filter(|&q| !inside[q]).map(|q| d[q]).collect();
            if let Some(slice) = separate(f, d, d[p], &rest, sep_tol)? {
                let osc = oscillation(f, &slice.members);
                return Ok(Some((slice, osc)));
            }
        }
        Ok(None)
    });
    results.into_iter().collect()
}

/// Maximal sets of consecutive values whose spread fits, as positions of `d`.
fn value_windows(s: &[f64], d: &[usize], fits: &dyn Fits) -> Vec<Vec<usize>> {
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| s[d[a]].total_cmp(&s[d[b]]));
    let mut windows = Vec::new();
    let mut last_end = 0;
    let mut end = 0;
    for start in 0..n {
        if start > 0 && s[d[order[start]]] == s[d[order[start - 1]]] {
            continue;
        }
        end = end.max(start);
        while end + 1 < n && fits(s[d[order[end + 1]]] - s[d[order[start]]]) {
            end += 1;
        }
        if windows.is_empty() || end + 1 > last_end {
            windows.push(order[start..=end].to_vec());
            last_end = end + 1;
        }
    }
    windows
}

/// Maximal cliques of the graph joining points whose images are within
/// `fits` distance (Bron-Kerbosch with pivoting).
fn maximal_cliques(f: &ScoredMap, d: &[usize], fits: &dyn Fits, cap: usize) -> Result<Vec<Vec<usize>>> {
    let n = d.len();
    let mut adj = vec![0u64; n];
    for a in 0..n {
        for b in a + 1..n {
            if fits(f.dist(d[a], d[b])) {
                adj[a] |= 1 << b;
                adj[b] |= 1 << a;
            }
        }
    }
    fn expand(r: u64, mut p: u64, mut x: u64, adj: &[u64], out: &mut Vec<u64>, cap: usize) -> Result<()> {
        if p == 0 {
            if x == 0 {
                out.push(r);
                if out.len() > cap {
                    return Err(Error::Capacity(format!("more than {cap} maximal small-image sets")));
                }
            }
            return Ok(());
        }
        let mut px = p | x;
        let mut pivot = 0;
        let mut best = -1i32;
        while px != 0 {
            let v = px.trailing_zeros() as usize;
            px &= px - 1;
            let c = (p & adj[v]).count_ones() as i32;
            if c > best {
                best = c;
                pivot = v;
            }
        }
        let mut cand = p & !adj[pivot];
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            let bit = 1u64 << v;
            expand(r | bit, p & adj[v], x & adj[v], adj, out, cap)?;
            p &= !bit;
            x |= bit;
            cand &= !bit;
        }
        Ok(())
    }
    let mut masks = Vec::new();
    if fits(0.0) && n > 0 {
        let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        expand(0, all, 0, &adj, &mut masks, cap)?;
    }
    Ok(masks
        .into_iter()
        .map(|m| (0..n).filter(|&b| m >> b & 1 == 1).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointCloud;

    #[test]
    fn windows_are_maximal() {
        let s = [0.0, 0.1, 0.2, 0.5, 0.55, 1.0];
        let d: Vec<usize> = (0..6).collect();
        let w = value_windows(&s, &d, &|a: f64| a <= 0.25);
        assert_eq!(w, vec![vec![0, 1, 2], vec![3, 4], vec![5]]);
    }

    #[test]
    fn cliques_of_a_path() {
        let cloud = PointCloud::from_points((0..4).map(|i| vec![i as f64, 0.0, 0.0]).collect()).unwrap();
        let f = ScoredMap::identity(cloud, crate::LpNorm::L2).unwrap();
        let mut c = maximal_cliques(&f, &[0, 1, 2, 3], &|a: f64| a <= 1.0, 100).unwrap();
        c.sort();
        assert_eq!(c, vec![vec![0, 1], vec![1, 2], vec![2, 3]]);
    }
}
