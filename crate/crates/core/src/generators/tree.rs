use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LpNorm, PointCloud, ScoredMap, Vector};

/// A finite `b`-ary tree of points, each node (up to a slack) the average of
/// its children, any two nodes `eps` apart in the sup-norm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub depth: usize,
    pub eps: f64,
    pub branching: usize,
    /// Averaging defect as a fraction of `eps 2^(-|s|-2)`; 0 gives exact averages.
    pub slack: f64,
    /// Ambient dimension; at least `branching^depth` when given.
    pub dim: Option<usize>,
}

impl TreeSpec {
    pub fn new(depth: usize, eps: f64) -> Self {
        TreeSpec { depth, eps, branching: 2, slack: 0.0, dim: None }
    }

    pub fn required_dim(&self) -> Option<usize> {
        self.branching.checked_pow(self.depth as u32)
    }
}

#[derive(Clone, Debug)]
pub struct TreeCloud {
    pub spec: TreeSpec,
    pub cloud: PointCloud,
    /// `f(x)`: sup-distance from `x` to the odd-level nodes.
    pub map: ScoredMap,
    pub level: Vec<usize>,
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
}

impl TreeCloud {
    pub fn odd_nodes(&self) -> Vec<usize> {
        (0..self.level.len()).filter(|&i| self.level[i] % 2 == 1).collect()
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.level.len()).filter(|&i| self.children[i].is_empty()).collect()
    }
}

/// Builds the tree in `R^m`, `m = branching^depth`.
///
/// Internal node `s` owns a block of `branching - 1` coordinates; its
/// children sit at `x_s + eps v_i` with `v_i = e_i` for the first
/// `branching - 1` and `v = -(e_1 + ... )` for the last, so the children
/// average to `x_s` exactly. The last coordinate is unused by the blocks and
/// carries the optional averaging defect `slack eps 2^(-|s|-2)`.
pub fn gen_tree(spec: &TreeSpec) -> Result<TreeCloud> {
    if spec.depth == 0 {
        return Err(Error::domain("tree depth must be at least 1"));
    }
    if spec.branching < 2 {
        return Err(Error::domain("tree branching must be at least 2"));
    }
    if !(spec.eps > 0.0 && spec.eps.is_finite()) {
        return Err(Error::domain("tree separation must be positive"));
    }
    if !(0.0..1.0).contains(&spec.slack) {
        return Err(Error::domain("tree slack must lie in [0, 1)"));
    }
    let b = spec.branching;
    let needed = spec
        .required_dim()
        .filter(|&m| m <= 1 << 16)
        .ok_or_else(|| Error::domain("tree is too large"))?;
    let m = match spec.dim {
        Some(m) if m < needed => {
            return Err(Error::Dimension(format!(
                "a depth-{} tree with branching {b} needs dimension {needed}, got {m}",
                spec.depth
            )))
        }
        Some(m) => m,
        None => needed,
    };
    let mut points: Vec<Vec<f64>> = vec![vec![0.0; m]];
    let mut ids = vec!["r".to_string()];
    let mut level = vec![0];
    let mut parent = vec![None];
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut next_block = 0;
    let mut frontier = vec![0usize];
    for depth in 0..spec.depth {
        let mut next = Vec::new();
        for &s in &frontier {
            let block = next_block;
            next_block += b - 1;
            let shift = spec.slack * spec.eps * 0.5f64.powi(depth as i32 + 2);
            for i in 0..b {
                let mut x = points[s].clone();
                x[needed - 1] += shift;
                if i + 1 < b {
                    x[block + i] += spec.eps;
                } else {
                    for k in 0..b - 1 {
                        x[block + k] -= spec.eps;
                    }
                }
                let id = points.len();
                points.push(x);
                ids.push(format!("{}.{i}", ids[s]));
                level.push(depth + 1);
                parent.push(Some(s));
                children.push(Vec::new());
                children[s].push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    let cloud = PointCloud::new(m, ids, points.into_iter().map(Vector).collect())?;
    let odd: Vec<usize> = (0..level.len()).filter(|&i| level[i] % 2 == 1).collect();
    let values = (0..cloud.len())
        .map(|i| {
            let d = odd
                .iter()
                .map(|&o| LpNorm::Linf.dist(cloud.point(i), cloud.point(o)))
                .fold(f64::INFINITY, f64::min);
            vec![d]
        })
        .collect();
    let map = ScoredMap::new(cloud.clone(), values, crate::geometry::Metric::Lp(LpNorm::L2))?;
    Ok(TreeCloud { spec: spec.clone(), cloud, map, level, parent, children })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_step() {
        let t = gen_tree(&TreeSpec::new(1, 1.0)).unwrap();
        assert_eq!(t.cloud.dim(), 2);
        assert_eq!(t.cloud.point(0), &[0.0, 0.0]);
        assert_eq!(t.cloud.point(1), &[1.0, 0.0]);
        assert_eq!(t.cloud.point(2), &[-1.0, 0.0]);
    }

    #[test]
    fn separation_and_averaging() {
        for depth in 1..=4 {
            for b in [2, 3] {
                let spec = TreeSpec { branching: b, ..TreeSpec::new(depth, 0.7) };
                let t = gen_tree(&spec).unwrap();
                let n = t.cloud.len();
                assert_eq!(n, (0..=depth).map(|k| b.pow(k as u32)).sum::<usize>());
                for i in 0..n {
                    for j in i + 1..n {
                        assert!(LpNorm::Linf.dist(t.cloud.point(i), t.cloud.point(j)) >= 0.7 - 1e-12);
                    }
                    if !t.children[i].is_empty() {
                        for k in 0..t.cloud.dim() {
                            let mean: f64 =
                                t.children[i].iter().map(|&c| t.cloud.point(c)[k]).sum::<f64>() / b as f64;
                            assert!((mean - t.cloud.point(i)[k]).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn map_takes_two_values_and_odd_even_gap() {
        let t = gen_tree(&TreeSpec::new(3, 1.0)).unwrap();
        let s = t.map.scalar_values().unwrap();
        for (i, &v) in s.iter().enumerate() {
            let expect = if t.level[i] % 2 == 1 { 0.0 } else { 1.0 };
            assert_eq!(v, expect);
        }
    }

    #[test]
    fn slack_shifts_the_averages() {
        let spec = TreeSpec { slack: 0.5, ..TreeSpec::new(2, 1.0) };
        let t = gen_tree(&spec).unwrap();
        let last = t.cloud.dim() - 1;
        let mean: f64 = t.children[0].iter().map(|&c| t.cloud.point(c)[last]).sum::<f64>() / 2.0;
        assert!((mean - 0.5 * 0.25).abs() < 1e-15);
    }

    #[test]
    fn rejects_small_dimension() {
        let spec = TreeSpec { dim: Some(3), ..TreeSpec::new(2, 1.0) };
        assert!(matches!(gen_tree(&spec), Err(Error::Dimension(_))));
        assert!(gen_tree(&TreeSpec { dim: Some(6), ..TreeSpec::new(2, 1.0) }).is_ok());
    }
}
