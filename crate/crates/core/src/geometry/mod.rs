//! Finite-dimensional convex geometry on point clouds.
//!
//! Subsets of a cloud are passed around as index lists into the cloud; every
//! routine that takes `(cloud, subset)` reads only the listed points. Domain
//! distances (diameters, moduli, covering radii) are Euclidean.

mod cover;
mod hull;

use std::collections::HashSet;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use cover::covering_number;
pub use hull::{
    distance_to_hull, hull_membership, hull_membership_in, nearest_in_hull, HullMembership, NearestPoint,
};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A point of `R^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(pub Vec<f64>);

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

/// A linear functional on `R^d`, acting by the dot product.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Functional(pub Vec<f64>);

impl Deref for Functional {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Functional {
    fn from(v: Vec<f64>) -> Self {
        Functional(v)
    }
}

impl Functional {
    pub fn apply(&self, x: &[f64]) -> f64 {
        dot(&self.0, x)
    }

    pub fn norm(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0.0)
    }

    /// Unit functional in the same direction; `None` for the zero functional.
    pub fn normalized(&self) -> Option<Functional> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| Functional(self.0.iter().map(|c| c / n).collect()))
    }

    pub fn distance(&self, other: &Functional) -> f64 {
        euclid(&self.0, &other.0)
    }
}

/// A finite labelled set of points in `R^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    ids: Vec<String>,
    points: Vec<Vector>,
}

impl PointCloud {
    pub fn new(dim: usize, ids: Vec<String>, points: Vec<Vector>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::domain("cloud dimension must be at least 1"));
        }
        if ids.len() != points.len() {
            return Err(Error::domain(format!(
                "{} labels for {} points",
                ids.len(),
                points.len()
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for (id, p) in ids.iter().zip(&points) {
            if !seen.insert(id.as_str()) {
                return Err(Error::domain(format!("duplicate label {id:?}")));
            }
            if p.len() != dim {
                return Err(Error::domain(format!(
                    "point {id:?} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::domain(format!("point {id:?} has a non-finite coordinate")));
            }
        }
        Ok(PointCloud { dim, ids, points })
    }

    /// Builds a cloud labelled `p0, p1, ...`.
    pub fn from_points(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map_or(1, Vec::len);
        let ids = (0..points.len()).map(|i| format!("p{i}")).collect();
        Self::new(dim, ids, points.into_iter().map(Vector).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == id)
    }

    /// Every index of the cloud, in order.
    pub fn all(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    /// Euclidean diameter of the listed points.
    pub fn diameter_of(&self, subset: &[usize]) -> f64 {
        let mut best = 0.0f64;
        for (a, &i) in subset.iter().enumerate() {
            for &j in &subset[a + 1..] {
                best = best.max(euclid(self.point(i), self.point(j)));
            }
        }
        best
    }

    pub fn diameter(&self) -> f64 {
        self.diameter_of(&self.all())
    }
}

/// The `l_p` norms available on a vector value space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpNorm {
    L1,
    L2,
    Linf,
}

impl LpNorm {
    pub fn norm(self, v: &[f64]) -> f64 {
        match self {
            LpNorm::L1 => v.iter().map(|c| c.abs()).sum(),
            LpNorm::L2 => norm2(v),
            LpNorm::Linf => v.iter().fold(0.0, |m, c| m.max(c.abs())),
        }
    }

    pub fn dist(self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            LpNorm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            LpNorm::L2 => euclid(a, b),
            LpNorm::Linf => a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
        }
    }
}

/// Metric on the value space of a [`ScoredMap`].
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    /// Norm-induced metric on `R^m`.
    Lp(LpNorm),
    /// Explicit distance table indexed by domain points.
    Table(Vec<Vec<f64>>),
}

impl Metric {
    /// A table metric, checked for symmetry, zero diagonal, nonnegativity and
    /// the triangle inequality.
    pub fn table(rows: Vec<Vec<f64>>) -> Result<Metric> {
        check_table_shape(&rows)?;
        let n = rows.len();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (a, b, c) = (rows[i][k], rows[i][j], rows[j][k]);
                    if a > b + c + 1e-12 * (1.0 + b + c) {
                        return Err(Error::domain(format!(
                            "table metric violates the triangle inequality at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        Ok(Metric::Table(rows))
    }
}

fn check_table_shape(rows: &[Vec<f64>]) -> Result<()> {
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(Error::domain(format!("table row {i} has {} entries, expected {n}", row.len())));
        }
        for (j, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::domain(format!("table entry ({i},{j}) = {v} is not a finite nonnegative number")));
            }
            if i == j && v != 0.0 {
                return Err(Error::domain(format!("table diagonal entry {i} is {v}, expected 0")));
            }
            if v != rows[j][i] {
                return Err(Error::domain(format!("table is not symmetric at ({i},{j})")));
            }
        }
    }
    Ok(())
}

/// A map sampled on a point cloud, with values in a metric space.
///
/// With an `Lp` metric every point carries a value vector of a common length
/// `m >= 1`. With a table metric the value of point `i` is `i` itself and the
/// per-point value vectors are optional (kept only for reporting).
#[derive(Clone, Debug)]
pub struct ScoredMap {
    domain: PointCloud,
    values: Vec<Vec<f64>>,
    metric: Metric,
    scalar: Option<Vec<f64>>,
}

impl ScoredMap {
    pub fn new(domain: PointCloud, values: Vec<Vec<f64>>, metric: Metric) -> Result<Self> {
        let n = domain.len();
        match &metric {
            Metric::Lp(_) => {
                if values.len() != n {
                    return Err(Error::domain(format!("{} values for {n} domain points", values.len())));
                }
                let m = values.first().map_or(1, Vec::len);
                if m == 0 {
                    return Err(Error::domain("value vectors must be nonempty"));
                }
                for (i, v) in values.iter().enumerate() {
                    if v.len() != m {
                        return Err(Error::domain(format!("value of {:?} has length {}, expected {m}", domain.id(i), v.len())));
                    }
                    if v.iter().any(|c| !c.is_finite()) {
                        return Err(Error::domain(format!("value of {:?} is not finite", domain.id(i))));
                    }
                }
            }
            Metric::Table(rows) => {
                if rows.len() != n {
                    return Err(Error::domain(format!("table has {} rows for {n} domain points", rows.len())));
                }
                check_table_shape(rows)?;
                if !values.is_empty() && values.len() != n {
                    return Err(Error::domain(format!("{} values for {n} domain points", values.len())));
                }
            }
        }
        let scalar = match metric {
            Metric::Lp(_) if values.first().is_some_and(|v| v.len() == 1) => {
                Some(values.iter().map(|v| v[0]).collect())
            }
            _ => None,
        };
        Ok(ScoredMap { domain, values, metric, scalar })
    }

    /// A real-valued map `x -> g(x)`.
    pub fn scalar_fn(domain: PointCloud, g: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = domain.points().iter().map(|p| vec![g(p)]).collect();
        Self::new(domain, values, Metric::Lp(LpNorm::L2))
    }

    /// A vector-valued map with the given norm on the value space.
    pub fn vector_fn(domain: PointCloud, g: impl Fn(&[f64]) -> Vec<f64>, norm: LpNorm) -> Result<Self> {
        let values = domain.points().iter().map(|p| g(p)).collect();
        Self::new(domain, values, Metric::Lp(norm))
    }

    /// The identity map into `(R^d, norm)`.
    pub fn identity(domain: PointCloud, norm: LpNorm) -> Result<Self> {
        Self::vector_fn(domain, |p| p.to_vec(), norm)
    }

    pub fn domain(&self) -> &PointCloud {
        &self.domain
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn len(&self) -> usize {
        self.domain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domain.is_empty()
    }

    /// The real values when the map is scalar (`Lp` metric, `m = 1`).
    pub fn scalar_values(&self) -> Option<&[f64]> {
        self.scalar.as_deref()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        match &self.metric {
            Metric::Lp(_) if self.scalar.is_some() => {
                let s = self.scalar.as_ref().unwrap();
                (s[i] - s[j]).abs()
            }
            Metric::Lp(norm) => norm.dist(&self.values[i], &self.values[j]),
            Metric::Table(rows) => rows[i][j],
        }
    }

    /// Same domain and values, different metric.
    pub fn with_metric(&self, metric: Metric) -> Result<Self> {
        let values = match (&metric, &self.metric) {
            (Metric::Lp(_), Metric::Table(_)) => {
                return Err(Error::domain("a table-metric map has no value vectors to re-measure"))
            }
            _ => self.values.clone(),
        };
        Self::new(self.domain.clone(), values, metric)
    }

    /// The product map `(f_1, ..., f_k)` with the max-combined metric.
    pub fn product(maps: &[ScoredMap]) -> Result<Self> {
        let first = maps.first().ok_or_else(|| Error::domain("product of zero maps"))?;
        for m in &maps[1..] {
            if m.domain != first.domain {
                return Err(Error::domain("product maps must share one domain"));
            }
        }
        let n = first.len();
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let d = maps.iter().map(|m| m.dist(i, j)).fold(0.0, f64::max);
                rows[i][j] = d;
                rows[j][i] = d;
            }
        }
        // A max of pseudometrics is a pseudometric; no triangle re-check needed.
        Self::new(first.domain.clone(), Vec::new(), Metric::Table(rows))
    }
}

/// Diameter of `f(subset)` in the value metric; 0 for empty sets and singletons.
pub fn oscillation(f: &ScoredMap, subset: &[usize]) -> f64 {
    if subset.len() < 2 {
        return 0.0;
    }
    if let Some(s) = f.scalar_values() {
        let (lo, hi) = subset
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(s[i]), hi.max(s[i])));
        return hi - lo;
    }
    let mut best = 0.0f64;
    for (a, &i) in subset.iter().enumerate() {
        for &j in &subset[a + 1..] {
            best = best.max(f.dist(i, j));
        }
    }
    best
}

/// A slice `S(A, u, t) = { x in A : u.x > sup_A u - t }`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub functional: Functional,
    pub depth: f64,
    /// Indices into the domain cloud.
    pub members: Vec<usize>,
}

impl Slice {
    pub fn contains(&self, i: usize) -> bool {
        self.members.contains(&i)
    }
}

/// Numerical tolerances shared by every routine.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Slack for hull membership and slice-boundary ties.
    pub sep_tol: f64,
    /// Slack for diameter comparisons.
    pub osc_tol: f64,
    /// Slice depths for slicing profiles, strictly decreasing to 0.
    pub t_schedule: Vec<f64>,
    /// Maximum number of candidate directions in budgeted searches.
    pub budget: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sep_tol: 1e-9,
            osc_tol: 1e-9,
            t_schedule: (1..=40).map(|k| 0.5f64.powi(k)).collect(),
            budget: 256,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.sep_tol > 0.0 && self.sep_tol.is_finite()) {
            return Err(Error::domain("sep_tol must be positive"));
        }
        if !(self.osc_tol > 0.0 && self.osc_tol.is_finite()) {
            return Err(Error::domain("osc_tol must be positive"));
        }
        if self.t_schedule.is_empty() {
            return Err(Error::domain("t_schedule is empty"));
        }
        if self.t_schedule.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return Err(Error::domain("t_schedule entries must be positive"));
        }
        if self.t_schedule.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::domain("t_schedule must be strictly decreasing"));
        }
        if self.budget == 0 {
            return Err(Error::domain("budget must be positive"));
        }
        Ok(())
    }

    /// Diameter comparison at scale `eps`: `a <= eps (1 + osc_tol)`.
    ///
    /// The slack is relative so that halving the scale halves it too; the
    /// two-sided denting sandwich relies on that.
    pub fn within_scale(&self, a: f64, eps: f64) -> bool {
        a <= eps * (1.0 + self.osc_tol)
    }
}

/// `sup { u.x : x in subset }`.
pub fn support(cloud: &PointCloud, subset: &[usize], u: &Functional) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::domain("support of an empty set"));
    }
    check_functional(cloud, u)?;
    Ok(subset.iter().map(|&i| u.apply(cloud.point(i))).fold(f64::NEG_INFINITY, f64::max))
}

fn check_functional(cloud: &PointCloud, u: &Functional) -> Result<()> {
    if u.len() != cloud.dim() {
        return Err(Error::domain(format!(
            "functional has {} coefficients, cloud dimension is {}",
            u.len(),
            cloud.dim()
        )));
    }
    if u.iter().any(|c| !c.is_finite()) {
        return Err(Error::domain("functional has a non-finite coefficient"));
    }
    Ok(())
}

/// The slice of `subset` cut by `u` at depth `t`.
///
/// Points whose value `u.x` lies within `min(sep_tol, t/2)` of the threshold
/// are excluded, so the argmax always belongs.
pub fn slice(cloud: &PointCloud, subset: &[usize], u: &Functional, t: f64, tol: &Tolerances) -> Result<Slice> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::domain(format!("slice depth must be positive, got {t}")));
    }
    if u.is_zero() {
        return Err(Error::domain("the zero functional defines no half-space"));
    }
    let sup = support(cloud, subset, u)?;
    let cut = sup - t + tol.sep_tol.min(t / 2.0);
    let members = subset.iter().copied().filter(|&i| u.apply(cloud.point(i)) > cut).collect();
    Ok(Slice { functional: u.clone(), depth: t, members })
}

/// The slice `{ x in subset : u.x > threshold }`, with its depth measured
/// from the support of `subset`. No tie band: callers choose `threshold`
/// strictly between attained values.
pub(crate) fn slice_above(cloud: &PointCloud, subset: &[usize], u: &Functional, threshold: f64) -> Slice {
    let mut sup = f64::NEG_INFINITY;
    let mut members = Vec::new();
    for &i in subset {
        let v = u.apply(cloud.point(i));
        sup = sup.max(v);
        if v > threshold {
            members.push(i);
        }
    }
    Slice { functional: u.clone(), depth: sup - threshold, members }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::from_points(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    fn square() -> PointCloud {
        PointCloud::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap()
    }

    #[test]
    fn support_examples() {
        let tri = PointCloud::from_points(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(support(&tri, &tri.all(), &Functional(vec![1.0, 1.0])).unwrap(), 1.0);
        let a = line(&[0.0, 0.5, 1.0]);
        assert_eq!(support(&a, &a.all(), &Functional(vec![1.0])).unwrap(), 1.0);
        assert!(matches!(support(&a, &[], &Functional(vec![1.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn slice_examples() {
        let tol = Tolerances::default();
        let a = line(&[0.0, 0.5, 1.0]);
        let u = Functional(vec![1.0]);
        assert_eq!(slice(&a, &a.all(), &u, 0.6, &tol).unwrap().members, vec![1, 2]);
        assert_eq!(slice(&a, &a.all(), &u, 1.5, &tol).unwrap().members, vec![0, 1, 2]);
        let sq = square();
        let s = slice(&sq, &sq.all(), &Functional(vec![1.0, 0.0]), 0.5, &tol).unwrap();
        assert_eq!(s.members, vec![1, 3]);
        assert!(matches!(slice(&a, &a.all(), &u, 0.0, &tol), Err(Error::Domain(_))));
        assert!(matches!(slice(&a, &a.all(), &u, -1.0, &tol), Err(Error::Domain(_))));
    }

    #[test]
    fn boundary_ties_are_excluded_but_argmax_kept() {
        let tol = Tolerances::default();
        let a = line(&[0.0, 0.4, 1.0]);
        // threshold 0.4 exactly: the point at 0.4 is a tie and stays out
        let s = slice(&a, &a.all(), &Functional(vec![1.0]), 0.6, &tol).unwrap();
        assert_eq!(s.members, vec![2]);
        // depth far below sep_tol still keeps the maximiser
        let s = slice(&a, &a.all(), &Functional(vec![1.0]), 1e-15, &tol).unwrap();
        assert_eq!(s.members, vec![2]);
    }

    #[test]
    fn oscillation_examples() {
        let a = line(&[0.0, 0.5, 1.0]);
        let constant = ScoredMap::scalar_fn(a.clone(), |_| 3.0).unwrap();
        assert_eq!(oscillation(&constant, &a.all()), 0.0);
        let id = ScoredMap::identity(a.clone(), LpNorm::L2).unwrap();
        assert_eq!(oscillation(&id, &[1, 2]), 0.5);
        assert_eq!(oscillation(&id, &[]), 0.0);
        assert_eq!(oscillation(&id, &[2]), 0.0);
        let sq = square();
        let first = ScoredMap::scalar_fn(sq.clone(), |p| p[0]).unwrap();
        assert_eq!(oscillation(&first, &sq.all()), 1.0);
    }

    #[test]
    fn cloud_validation() {
        let dup = PointCloud::new(1, vec!["a".into(), "a".into()], vec![Vector(vec![0.0]), Vector(vec![0.0])]);
        assert!(dup.is_err());
        // duplicate coordinates with distinct labels are fine
        let ok = PointCloud::new(1, vec!["a".into(), "b".into()], vec![Vector(vec![0.0]), Vector(vec![0.0])]);
        assert!(ok.is_ok());
        assert!(PointCloud::from_points(vec![vec![0.0], vec![f64::NAN]]).is_err());
        assert!(PointCloud::from_points(vec![vec![0.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn table_metric_validation() {
        assert!(Metric::table(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).is_ok());
        assert!(Metric::table(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(Metric::table(vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        let broken = vec![vec![0.0, 1.0, 5.0], vec![1.0, 0.0, 1.0], vec![5.0, 1.0, 0.0]];
        assert!(Metric::table(broken).is_err());
    }

    #[test]
    fn product_map_uses_max_metric() {
        let sq = square();
        let fx = ScoredMap::scalar_fn(sq.clone(), |p| p[0]).unwrap();
        let fy = ScoredMap::scalar_fn(sq.clone(), |p| 2.0 * p[1]).unwrap();
        let prod = ScoredMap::product(&[fx, fy]).unwrap();
        assert_eq!(prod.dist(0, 3), 2.0);
        assert_eq!(prod.dist(0, 1), 1.0);
    }

    #[test]
    fn tolerances_validate() {
        assert!(Tolerances::default().validate().is_ok());
        let mut t = Tolerances::default();
        t.t_schedule = vec![0.5, 0.5];
        assert!(t.validate().is_err());
    }
}
