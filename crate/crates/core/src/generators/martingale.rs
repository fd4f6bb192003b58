//! Step maps on `[0,1]` whose consecutive values are `eps` apart in the
//! image while each step averages (up to a tracked residual) to the previous
//! one.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{hull_membership_in, HullMembership, Metric, ScoredMap, Tolerances};

const WEIGHT_BITS: u32 = 20;
const MAX_ATOMS: usize = 1_000_000;

fn as_string<S: Serializer>(q: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

/// A subinterval `[start, start + length)` of `[0,1]` where the step map
/// takes the value of `point`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Atom {
    #[serde(serialize_with = "as_string")]
    pub start: BigRational,
    #[serde(serialize_with = "as_string")]
    pub length: BigRational,
    pub point: usize,
    /// Index of the atom of the previous level containing this one.
    pub parent: Option<usize>,
}

/// The passage from `g_n` to `g_{n+1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleLevel {
    pub n: usize,
    /// Atoms of the partition of `g_{n+1}`.
    pub atoms: Vec<Atom>,
    /// Each new atom lies inside its parent and the children tile it.
    pub refines: bool,
    /// `min_t |F(g_n(t)) - F(g_{n+1}(t))|`.
    pub min_separation: f64,
    /// `|F o g_n - F o g_{n+1}|_1`.
    pub l1_separation: f64,
    /// `|F o g_n - E(F o g_{n+1} | F_n)|_1`.
    pub residual: f64,
    /// `int f o g_{n+1} - int f o g_n`.
    pub control_gain: f64,
    /// `eps 2^-(n+3)`.
    pub allowance: f64,
    pub separated: bool,
    pub averaged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MartingaleRun {
    pub epsilon: f64,
    pub depth: usize,
    pub start: usize,
    pub levels: Vec<MartingaleLevel>,
    pub residual_sum: f64,
    /// `eps/16 + eps/8`.
    pub residual_bound: f64,
    pub min_separation: f64,
    /// Separation of the corrected martingale implied by the residual bound.
    pub implied_separation: f64,
    pub conditions_hold: bool,
}

fn far(f: &ScoredMap, x: usize, within: &[usize], eps: f64) -> Vec<usize> {
    within.iter().copied().filter(|&p| f.dist(x, p) >= eps).collect()
}

/// `S_0 = all`, `S_{k+1} = { x in S_k : x in conv(S_k ∩ far(x)) }` where
/// `far(x)` collects the points with values at least `eps` from `f(x)`.
/// Stops after `depth + 1` sets or at the first empty one.
pub fn rank_sets(f: &ScoredMap, eps: f64, depth: usize, tol: &Tolerances) -> Result<Vec<Vec<usize>>> {
    let mut sets = vec![f.domain().all()];
    for _ in 0..depth {
        let cur = sets.last().unwrap();
        if cur.is_empty() {
            break;
        }
        let mut next = Vec::new();
        for &x in cur {
            let fx = far(f, x, cur, eps);
            if !fx.is_empty() && hull_membership_in(f.domain().point(x), f.domain(), &fx, tol.sep_tol)?.is_inside() {
                next.push(x);
            }
        }
        sets.push(next);
    }
    Ok(sets)
}

/// Rounds convex weights to multiples of `2^-20` summing to 1.
fn dyadic_weights(weights: &[(usize, f64)]) -> Vec<(usize, u64)> {
    let scale = (1u64 << WEIGHT_BITS) as f64;
    let mut out: Vec<(usize, u64)> = weights.iter().map(|&(i, w)| (i, (w * scale).round().max(0.0) as u64)).collect();
    let total: i64 = out.iter().map(|w| w.1 as i64).sum();
    let diff = (1i64 << WEIGHT_BITS) - total;
    if let Some(big) = out.iter_mut().max_by_key(|w| w.1) {
        big.1 = (big.1 as i64 + diff).max(0) as u64;
    }
    out.retain(|w| w.1 > 0);
    out
}

fn value_dist(f: &ScoredMap, a: &[f64], b: &[f64]) -> f64 {
    match f.metric() {
        Metric::Lp(norm) => norm.dist(a, b),
        Metric::Table(_) => unreachable!("checked by the caller"),
    }
}

/// Runs `depth` refinement steps from a point of the deepest rank set.
///
/// `control` gives the real control function `f` (defaults to 0); the start
/// point maximises it over that rank set. Split weights come from the hull
/// certificate and are rounded to dyadic rationals; the rounding shows up in
/// the residuals.
pub fn martingale_run(
    f: &ScoredMap,
    eps: f64,
    depth: usize,
    control: Option<&[f64]>,
    tol: &Tolerances,
) -> Result<MartingaleRun> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain("eps must be positive"));
    }
    if matches!(f.metric(), Metric::Table(_)) {
        return Err(Error::domain("the martingale run needs vector values with a norm"));
    }
    if f.is_empty() {
        return Err(Error::domain("empty domain"));
    }
    let zero = vec![0.0; f.len()];
    let control = control.unwrap_or(&zero);
    if control.len() != f.len() {
        return Err(Error::domain("control has the wrong number of values"));
    }
    let sets = rank_sets(f, eps, depth, tol)?;
    let deepest = sets.last().unwrap();
    if sets.len() <= depth || deepest.is_empty() {
        let reached = sets.iter().rposition(|s| !s.is_empty()).unwrap_or(0);
        return Err(Error::Precondition(format!(
            "no point survives {depth} rounds of averaging at eps = {eps} (only {reached})"
        )));
    }
    let start = *deepest
        .iter()
        .max_by(|&&a, &&b| control[a].total_cmp(&control[b]).then(b.cmp(&a)))
        .unwrap();
    let cloud = f.domain();
    let denom = BigRational::from_integer(BigInt::from(1u64 << WEIGHT_BITS));
    let mut atoms = vec![Atom { start: BigRational::zero(), length: BigRational::one(), point: start, parent: None }];
    let mut levels = Vec::with_capacity(depth);
    for n in 0..depth {
        let pool = &sets[depth - n - 1];
        let mut next = Vec::new();
        let mut residual = 0.0;
        let mut gain = 0.0;
        let mut l1 = 0.0;
        let mut min_sep = f64::INFINITY;
        let mut refines = true;
        for (a_idx, atom) in atoms.iter().enumerate() {
            let x = atom.point;
            let fx = far(f, x, pool, eps);
            let weights = match hull_membership_in(cloud.point(x), cloud, &fx, tol.sep_tol)? {
                HullMembership::Inside { weights, .. } => dyadic_weights(&weights),
                HullMembership::Outside { margin, .. } => {
                    return Err(Error::Precondition(format!(
                        "point {:?} left the hull of its far set (margin {margin})",
                        cloud.id(x)
                    )))
                }
            };
            let m = atom.length.to_f64().unwrap_or(0.0);
            let mut cursor = atom.start.clone();
            let mut mean = vec![0.0; f.value(x).len()];
            let mut ctl = 0.0;
            for &(p, k) in &weights {
                let lam = BigRational::from_integer(BigInt::from(k)) / &denom;
                let length = &atom.length * &lam;
                let lam = lam.to_f64().unwrap_or(0.0);
                for (c, v) in mean.iter_mut().zip(f.value(p)) {
                    *c += lam * v;
                }
                ctl += lam * control[p];
                let sep = f.dist(x, p);
                min_sep = min_sep.min(sep);
                l1 += m * lam * sep;
                next.push(Atom { start: cursor.clone(), length: length.clone(), point: p, parent: Some(a_idx) });
                cursor += length;
            }
            refines &= cursor == &atom.start + &atom.length;
            residual += m * value_dist(f, f.value(x), &mean);
            gain += m * (ctl - control[x]);
            if next.len() > MAX_ATOMS {
                return Err(Error::Capacity(format!("more than {MAX_ATOMS} atoms")));
            }
        }
        let allowance = eps * 0.5f64.powi(n as i32 + 3);
        levels.push(MartingaleLevel {
            n,
            refines,
            min_separation: min_sep,
            l1_separation: l1,
            residual,
            control_gain: gain,
            allowance,
            separated: min_sep >= eps,
            averaged: residual <= gain + allowance,
            atoms: next.clone(),
        });
        atoms = next;
    }
    let residual_sum: f64 = levels.iter().map(|l| l.residual).sum();
    let residual_bound = eps / 16.0 + eps / 8.0;
    let min_separation = levels.iter().map(|l| l.min_separation).fold(f64::INFINITY, f64::min);
    let conditions_hold = levels.iter().all(|l| l.refines && l.separated && l.averaged) && residual_sum <= residual_bound;
    Ok(MartingaleRun {
        epsilon: eps,
        depth,
        start,
        levels,
        residual_sum,
        residual_bound,
        min_separation,
        implied_separation: eps / 2.0,
        conditions_hold,
    })
}
