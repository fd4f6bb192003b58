//! Strongly slicing functionals: slicing profiles, the perturbation search
//! for a nearby functional with a small slice, the perturbation bound for
//! separating functionals, and sampled density scans.

mod disc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dentability::random_unit;
use crate::error::{Error, Result};
use crate::geometry::{
    dot, euclid, hull_membership, oscillation, slice, slice_above, support, Functional, HullMembership,
    ScoredMap, Slice, Tolerances,
};
use crate::par;

pub use disc::{kernel_disc, KernelDisc};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// Oscillation reaches `osc_tol`; `rate` is the fitted exponent `a` in
    /// `osc ~ t^a` over the samples above tolerance, when there are enough.
    StronglySlicing { rate: Option<f64> },
    /// Oscillation levels off at `floor > osc_tol`.
    Refuted { floor: f64 },
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub t: f64,
    pub oscillation: f64,
    pub members: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicingProfile {
    pub functional: Functional,
    pub samples: Vec<ProfileSample>,
    /// Oscillation over the points where `u` attains its maximum.
    pub face_oscillation: f64,
    pub verdict: Verdict,
}

fn check_subset(f: &ScoredMap, subset: &[usize]) -> Result<()> {
    if subset.is_empty() {
        return Err(Error::domain("empty set"));
    }
    if subset.iter().any(|&i| i >= f.len()) {
        return Err(Error::domain("index outside the domain"));
    }
    Ok(())
}

/// Oscillation of `S(A, u, t)` along `tol.t_schedule`.
pub fn ss_profile(f: &ScoredMap, subset: &[usize], u: &Functional, tol: &Tolerances) -> Result<SlicingProfile> {
    tol.validate()?;
    check_subset(f, subset)?;
    let cloud = f.domain();
    let mut samples = Vec::with_capacity(tol.t_schedule.len());
    for &t in &tol.t_schedule {
        let s = slice(cloud, subset, u, t, tol)?;
        samples.push(ProfileSample { t, oscillation: oscillation(f, &s.members), members: s.members.len() });
    }
    let sup = support(cloud, subset, u)?;
    let face: Vec<usize> = subset.iter().copied().filter(|&i| u.apply(cloud.point(i)) == sup).collect();
    let face_oscillation = oscillation(f, &face);

    let last = samples.last().unwrap().oscillation;
    let monotone = samples.windows(2).all(|w| w[1].oscillation <= w[0].oscillation + tol.osc_tol);
    let tail = &samples[samples.len().saturating_sub(3)..];
    let level = tail.len() == 3 && tail.iter().all(|s| (s.oscillation - last).abs() <= tol.osc_tol);
    let verdict = if last <= tol.osc_tol && monotone {
        Verdict::StronglySlicing { rate: fit_rate(&samples, tol.osc_tol) }
    } else if level && last > tol.osc_tol {
        Verdict::Refuted { floor: last }
    } else {
        Verdict::Inconclusive
    };
    Ok(SlicingProfile { functional: u.clone(), samples, face_oscillation, verdict })
}

/// Least-squares slope of `log osc` against `log t`.
fn fit_rate(samples: &[ProfileSample], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> =
        samples.iter().filter(|s| s.oscillation > floor).map(|s| (s.t.ln(), s.oscillation.ln())).collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// A functional near `u` together with a slice certifying small oscillation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub functional: Functional,
    pub distance: f64,
    pub slice: Slice,
    pub oscillation: f64,
    /// `u` itself already had a small slice.
    pub unperturbed: bool,
}

/// Searches for `y*` with `|u - y*| < eps` and a slice of `A` under `y*`
/// whose oscillation is below `target`.
///
/// If a slice of `u` from the depth schedule already qualifies, `u` is
/// returned. Otherwise, with `x0` the first maximiser of `u`, `y` the
/// barycenter of `A` (moved below `x0` if needed), `a` halfway between them
/// and `r = 2 sup|x - y| / eps`, the obstacle is
/// `conv(A ∪ (y + V_r)) ∩ {u <= a}` where `V_r` is the radius-`r` disc of
/// `ker u`. Each point `x` of `A` above `a` (highest first, at most
/// `tol.budget` of them) is separated from the obstacle together with the
/// points whose values are `target/2` or more from `f(x)`; the separating
/// functional is accepted when it is within `eps` of `u`.
pub fn ss_perturb(
    f: &ScoredMap,
    subset: &[usize],
    u: &Functional,
    eps: f64,
    target: f64,
    tol: &Tolerances,
) -> Result<Perturbation> {
    ss_perturb_seeded(f, subset, u, eps, target, tol, 0)
}

pub fn ss_perturb_seeded(
    f: &ScoredMap,
    subset: &[usize],
    u: &Functional,
    eps: f64,
    target: f64,
    tol: &Tolerances,
    seed: u64,
) -> Result<Perturbation> {
    tol.validate()?;
    check_subset(f, subset)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::domain(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::domain("target oscillation must be positive"));
    }
    if (u.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::domain("u must have unit norm"));
    }
    let cloud = f.domain();
    if u.len() != cloud.dim() {
        return Err(Error::domain("u has the wrong dimension"));
    }
    for &t in &tol.t_schedule {
        let s = slice(cloud, subset, u, t, tol)?;
        let osc = oscillation(f, &s.members);
        if osc < target {
            return Ok(Perturbation { functional: u.clone(), distance: 0.0, slice: s, oscillation: osc, unperturbed: true });
        }
    }

    let dim = cloud.dim();
    let vals: Vec<f64> = subset.iter().map(|&i| u.apply(cloud.point(i))).collect();
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut y = vec![0.0; dim];
    for &i in subset {
        for (c, p) in y.iter_mut().zip(cloud.point(i)) {
            *c += p / subset.len() as f64;
        }
    }
    let spread = cloud.diameter_of(subset).max(1.0);
    if u.apply(&y) >= top - 1e-9 * spread {
        for (c, uk) in y.iter_mut().zip(u.iter()) {
            *c -= 0.5 * spread * uk;
        }
    }
    let a = 0.5 * (top + u.apply(&y));
    let r = 2.0 * subset.iter().map(|&i| euclid(cloud.point(i), &y)).fold(0.0, f64::max) / eps;

    let disc = kernel_disc(u, r, seed);
    let mut generators: Vec<Vec<f64>> = subset.iter().map(|&i| cloud.point(i).to_vec()).collect();
    generators.extend(disc.points.iter().map(|v| y.iter().zip(v).map(|(a, b)| a + b).collect()));
    let obstacle = cut_hull(generators, u, a)?;

    let mut candidates: Vec<usize> = subset.iter().copied().filter(|&i| u.apply(cloud.point(i)) > a).collect();
    candidates.sort_by(|&p, &q| u.apply(cloud.point(q)).total_cmp(&u.apply(cloud.point(p))).then(p.cmp(&q)));
    let mut best: Option<(Functional, f64)> = None;
    let mut evaluated = 0;
    for &x in candidates.iter().take(tol.budget) {
        evaluated += 1;
        let mut blockers: Vec<&[f64]> = obstacle.iter().map(Vec::as_slice).collect();
        blockers.extend(subset.iter().filter(|&&p| f.dist(x, p) >= 0.5 * target).map(|&p| cloud.point(p)));
        let HullMembership::Outside { separator, .. } = hull_membership(cloud.point(x), &blockers, tol.sep_tol)? else {
            continue;
        };
        let c = blockers.iter().map(|p| separator.apply(p)).fold(f64::NEG_INFINITY, f64::max);
        let s = slice_above(cloud, subset, &separator, c);
        let osc = oscillation(f, &s.members);
        let distance = separator.distance(u);
        if distance < eps && osc < target && s.contains(x) {
            return Ok(Perturbation { functional: separator, distance, slice: s, oscillation: osc, unperturbed: false });
        }
        if best.as_ref().is_none_or(|b| osc < b.1) {
            best = Some((separator, osc));
        }
    }
    Err(Error::Inconclusive { evaluated, best })
}

/// Generators of `conv(points) ∩ {u <= a}`: the points below `a` and the
/// crossings of `u = a` by segments joining points on either side.
fn cut_hull(points: Vec<Vec<f64>>, u: &Functional, a: f64) -> Result<Vec<Vec<f64>>> {
    let points = if u.len() == 2 { disc::plane_hull(points) } else { points };
    let (below, above): (Vec<_>, Vec<_>) = points.into_iter().partition(|p| u.apply(p) <= a);
    if below.len().saturating_mul(above.len()) > 250_000 {
        return Err(Error::Capacity(format!(
            "obstacle has {} x {} segment crossings",
            below.len(),
            above.len()
        )));
    }
    let mut out = below.clone();
    for p in &above {
        let up = u.apply(p);
        for q in &below {
            let uq = u.apply(q);
            if uq < a {
                let s = (a - uq) / (up - uq);
                out.push(q.iter().zip(p).map(|(qk, pk)| qk + s * (pk - qk)).collect());
            }
        }
    }
    Ok(out)
}

/// One candidate that broke the bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BourViolation {
    pub candidate: Functional,
    pub distance: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BourReport {
    /// `(2/r) |x0 - y|`.
    pub bound: f64,
    pub slack: f64,
    /// Candidates that separate `x0` from `y + V_r`.
    pub admissible: usize,
    pub excluded: usize,
    pub max_distance: f64,
    pub violations: Vec<BourViolation>,
}

/// Checks `|u - y*| <= (2/r) |x0 - y| + slack` for every candidate `y*` with
/// `y*(x0) > sup y*(y + V_r)`, `V_r` the radius-`r` disc of `ker u` (exact in
/// the plane, sampled above it; the slack covers the sampling mesh).
pub fn bour_bound_check(
    u: &Functional,
    x0: &[f64],
    y: &[f64],
    r: f64,
    candidates: &[Functional],
    seed: u64,
) -> Result<BourReport> {
    if (u.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::domain("u must have unit norm"));
    }
    if x0.len() != u.len() || y.len() != u.len() {
        return Err(Error::domain("dimension mismatch"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain("r must be positive"));
    }
    if u.apply(x0) <= u.apply(y) {
        return Err(Error::domain("need u(x0) > u(y)"));
    }
    let gap = euclid(x0, y);
    if gap > r / 2.0 {
        return Err(Error::domain("need |x0 - y| <= r/2"));
    }
    let disc = kernel_disc(u, r, seed);
    let bound = 2.0 / r * gap;
    let slack = 4.0 * disc.mesh / r + 64.0 * f64::EPSILON;
    let mut report = BourReport { bound, slack, admissible: 0, excluded: 0, max_distance: 0.0, violations: Vec::new() };
    for cand in candidates {
        let c = cand.normalized().ok_or_else(|| Error::domain("zero candidate functional"))?;
        let reach = disc.points.iter().map(|v| dot(&c, v)).fold(f64::NEG_INFINITY, f64::max) + c.apply(y);
        if c.apply(x0) <= reach {
            report.excluded += 1;
            continue;
        }
        report.admissible += 1;
        let distance = c.distance(u);
        report.max_distance = report.max_distance.max(distance);
        if distance > bound + slack {
            report.violations.push(BourViolation { candidate: c, distance, bound });
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub direction_index: usize,
    pub direction: Functional,
    pub success: bool,
    pub distance: Option<f64>,
    pub oscillation: Option<f64>,
    pub depth: Option<f64>,
    pub perturbation: Option<Perturbation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityScan {
    pub rows: Vec<DensityRow>,
    pub success_fraction: f64,
    /// Largest `|u - y*|` among successes.
    pub max_perturbation: f64,
}

/// Runs [`ss_perturb`] from `n_dirs` uniformly random unit directions.
/// Direction `k` is drawn from stream `k` of the seeded generator, so rows do
/// not depend on scheduling.
pub fn ss_density_scan(
    f: &ScoredMap,
    subset: &[usize],
    n_dirs: usize,
    eps: f64,
    target: f64,
    seed: u64,
    tol: &Tolerances,
) -> Result<DensityScan> {
    if n_dirs == 0 {
        return Err(Error::domain("need at least one direction"));
    }
    check_subset(f, subset)?;
    let dim = f.domain().dim();
    let rows = par::map_indexed(n_dirs, |k| -> Result<DensityRow> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let u = random_unit(&mut rng, dim);
        match ss_perturb_seeded(f, subset, &u, eps, target, tol, seed ^ (k as u64).wrapping_mul(0x9e37_79b9)) {
            Ok(p) => Ok(DensityRow {
                direction_index: k,
                direction: u,
                success: true,
                distance: Some(p.distance),
                oscillation: Some(p.oscillation),
                depth: Some(p.slice.depth),
                perturbation: Some(p),
            }),
            Err(Error::Inconclusive { .. }) => Ok(DensityRow {
                direction_index: k,
                direction: u,
                success: false,
                distance: None,
                oscillation: None,
                depth: None,
                perturbation: None,
            }),
            Err(e) => Err(e),
        }
    });
    let rows: Vec<DensityRow> = rows.into_iter().collect::<Result<_>>()?;
    let wins = rows.iter().filter(|r| r.success).count();
    let max_perturbation = rows.iter().filter_map(|r| r.distance).fold(0.0, f64::max);
    Ok(DensityScan { success_fraction: wins as f64 / n_dirs as f64, max_perturbation, rows })
}

#[cfg(test)]
mod tests;
