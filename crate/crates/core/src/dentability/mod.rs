//! Denting tests, the epsilon-derivation and the dentability index.
//!
//! The derivation `[D]'_eps` keeps the points of `D` that lie in no slice of
//! `D` with `f`-oscillation at most `eps`. Two modes compute it:
//!
//! - `Exact` enumerates cuts (directly on the line and in the plane, through
//!   maximal small-image sets and hull tests in higher dimension);
//! - `Cluster` removes `x` when it separates from the points whose values
//!   are more than `eps/2` away from `f(x)`.
//!
//! Cluster removals at `eps` are exact removals at `eps`, and exact removals
//! at `eps/2` are cluster removals at `eps`.

mod cuts;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

pub use cuts::Capacity;

use crate::error::{Error, Result};
use crate::geometry::{euclid, oscillation, Functional, ScoredMap, Slice, Tolerances};
use crate::par;
use cuts::{exact_witnesses, longest_fitting_prefix, separate, Witness};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Cluster,
}

/// Result of [`denting_test`].
#[derive(Clone, Debug, PartialEq)]
pub enum Denting {
    Denting { slice: Slice, oscillation: f64 },
    NotDenting,
}

/// Result of a slice search.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SliceSearch {
    Found { slice: Slice, oscillation: f64 },
    /// No slice of the set has oscillation below the target; certified by
    /// exhaustive enumeration.
    None,
    /// The search budget ran out without a slice or a certificate.
    Unknown { evaluated: usize, best: Option<(Slice, f64)> },
}

impl SliceSearch {
    pub fn found(&self) -> Option<(&Slice, f64)> {
        match self {
            SliceSearch::Found { slice, oscillation } => Some((slice, *oscillation)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub point: usize,
    pub slice: Slice,
    pub oscillation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivationStage {
    pub survivors: Vec<usize>,
    /// One witness slice per removed point, ordered by point index.
    pub removed: Vec<Removal>,
}

impl DerivationStage {
    pub fn max_removal_oscillation(&self) -> f64 {
        self.removed.iter().map(|r| r.oscillation).fold(0.0, f64::max)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// Number of derivation steps needed to reach the empty set.
    Dz(usize),
    /// The given stage removed nothing.
    StalledAt(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DerivationTrace {
    pub epsilon: f64,
    pub mode: Mode,
    /// The starting set.
    pub initial: Vec<usize>,
    pub stages: Vec<DerivationStage>,
    pub outcome: Outcome,
}

impl DerivationTrace {
    pub fn dz(&self) -> Option<usize> {
        match self.outcome {
            Outcome::Dz(k) => Some(k),
            Outcome::StalledAt(_) => None,
        }
    }

    /// The set fed into stage `k` (0-based).
    pub fn stage_input(&self, k: usize) -> &[usize] {
        if k == 0 {
            &self.initial
        } else {
            &self.stages[k - 1].survivors
        }
    }

    /// The nonempty sets `D_0 = initial, D_1, ...` of the chain.
    pub fn chain(&self) -> Vec<&[usize]> {
        let mut out = vec![self.initial.as_slice()];
        out.extend(self.stages.iter().map(|s| s.survivors.as_slice()).filter(|s| !s.is_empty()));
        out.dedup();
        out
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::domain(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

fn check_subset(f: &ScoredMap, subset: &[usize]) -> Result<()> {
    if let Some(&bad) = subset.iter().find(|&&i| i >= f.len()) {
        return Err(Error::domain(format!("index {bad} outside a domain of {} points", f.len())));
    }
    Ok(())
}

fn cluster_witness(f: &ScoredMap, d: &[usize], x: usize, eps: f64, tol: &Tolerances) -> Result<Witness> {
    let radius = 0.5 * eps * (1.0 + tol.osc_tol);
    let far: Vec<usize> = d.iter().copied().filter(|&p| f.dist(x, p) > radius).collect();
    Ok(separate(f, d, x, &far, tol.sep_tol)?.map(|s| {
        let osc = oscillation(f, &s.members);
        (s, osc)
    }))
}

/// Tests whether `x` separates from the points of `subset` whose values lie
/// more than `eps/2` from `f(x)`. A returned slice contains `x` and has
/// oscillation at most `eps` (up to `osc_tol`). Separation from an empty far
/// set always succeeds.
pub fn denting_test(f: &ScoredMap, subset: &[usize], x: usize, eps: f64, tol: &Tolerances) -> Result<Denting> {
    check_eps(eps)?;
    check_subset(f, subset)?;
    if !subset.contains(&x) {
        return Err(Error::domain(format!("point {x} is not in the tested set")));
    }
    Ok(match cluster_witness(f, subset, x, eps, tol)? {
        Some((slice, oscillation)) => Denting::Denting { slice, oscillation },
        None => Denting::NotDenting,
    })
}

fn witnesses(f: &ScoredMap, d: &[usize], eps: f64, mode: Mode, tol: &Tolerances, cap: &Capacity) -> Result<Vec<Witness>> {
    match mode {
        Mode::Exact => {
            let fits = |a: f64| tol.within_scale(a, eps);
            exact_witnesses(f, d, &fits, tol.sep_tol, cap)
        }
        Mode::Cluster => par::map_indexed(d.len(), |p| cluster_witness(f, d, d[p], eps, tol)).into_iter().collect(),
    }
}

/// One derivation step with the default [`Capacity`].
pub fn derive_once(f: &ScoredMap, d: &[usize], eps: f64, mode: Mode, tol: &Tolerances) -> Result<DerivationStage> {
    derive_once_with(f, d, eps, mode, tol, &Capacity::default())
}

pub fn derive_once_with(
    f: &ScoredMap,
    d: &[usize],
    eps: f64,
    mode: Mode,
    tol: &Tolerances,
    cap: &Capacity,
) -> Result<DerivationStage> {
    check_eps(eps)?;
    check_subset(f, d)?;
    let mut d = d.to_vec();
    d.sort_unstable();
    d.dedup();
    let found = witnesses(f, &d, eps, mode, tol, cap)?;
    let mut survivors = Vec::new();
    let mut removed = Vec::new();
    for (&point, w) in d.iter().zip(found) {
        match w {
            Some((slice, oscillation)) => removed.push(Removal { point, slice, oscillation }),
            None => survivors.push(point),
        }
    }
    Ok(DerivationStage { survivors, removed })
}

/// Iterates the derivation from the whole domain until it empties or stalls.
pub fn dz_index(f: &ScoredMap, eps: f64, mode: Mode, tol: &Tolerances) -> Result<DerivationTrace> {
    dz_index_with(f, &f.domain().all(), eps, mode, tol, &Capacity::default())
}

pub fn dz_index_with(
    f: &ScoredMap,
    initial: &[usize],
    eps: f64,
    mode: Mode,
    tol: &Tolerances,
    cap: &Capacity,
) -> Result<DerivationTrace> {
    check_eps(eps)?;
    check_subset(f, initial)?;
    let mut current = initial.to_vec();
    current.sort_unstable();
    current.dedup();
    let initial = current.clone();
    let mut stages = Vec::new();
    let outcome = loop {
        if current.is_empty() {
            break Outcome::Dz(stages.len());
        }
        let stage = derive_once_with(f, &current, eps, mode, tol, cap)?;
        let stalled = stage.removed.is_empty();
        current = stage.survivors.clone();
        stages.push(stage);
        if stalled {
            break Outcome::StalledAt(stages.len());
        }
    };
    Ok(DerivationTrace { epsilon: eps, mode, initial, stages, outcome })
}

/// Finds a nonempty slice of `subset` with oscillation strictly below `eps`.
pub fn find_small_slice(f: &ScoredMap, subset: &[usize], eps: f64, tol: &Tolerances) -> Result<SliceSearch> {
    find_small_slice_with(f, subset, eps, tol, &Capacity::default(), 0)
}

/// As [`find_small_slice`]: exhaustive search within `cap`, then the denting
/// test, then `tol.budget` random directions drawn from `seed`.
pub fn find_small_slice_with(
    f: &ScoredMap,
    subset: &[usize],
    eps: f64,
    tol: &Tolerances,
    cap: &Capacity,
    seed: u64,
) -> Result<SliceSearch> {
    check_eps(eps)?;
    check_subset(f, subset)?;
    if subset.is_empty() {
        return Err(Error::domain("slice search in an empty set"));
    }
    let mut d = subset.to_vec();
    d.sort_unstable();
    d.dedup();
    let below = |a: f64| a < eps;
    match exact_witnesses(f, &d, &below, tol.sep_tol, cap) {
        Ok(found) => {
            return Ok(match found.into_iter().flatten().next() {
                Some((slice, oscillation)) => SliceSearch::Found { slice, oscillation },
                None => SliceSearch::None,
            })
        }
        Err(Error::Capacity(_)) => {}
        Err(e) => return Err(e),
    }
    let shrunk = eps / (1.0 + 4.0 * tol.osc_tol);
    for &x in &d {
        if let Some((slice, oscillation)) = cluster_witness(f, &d, x, shrunk, tol)? {
            if oscillation < eps {
                return Ok(SliceSearch::Found { slice, oscillation });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = f.domain().dim();
    let mut best: Option<(Slice, f64)> = None;
    for _ in 0..tol.budget {
        let u = random_unit(&mut rng, dim);
        if let Some((slice, oscillation)) = longest_fitting_prefix(f, &d, &u, &below) {
            return Ok(SliceSearch::Found { slice, oscillation });
        }
        let face = face_slice(f, &d, &u);
        if best.as_ref().is_none_or(|b| face.1 < b.1) {
            best = Some(face);
        }
    }
    Ok(SliceSearch::Unknown { evaluated: tol.budget, best })
}

/// The thinnest slice in direction `u`: the argmax face.
fn face_slice(f: &ScoredMap, d: &[usize], u: &Functional) -> (Slice, f64) {
    let cloud = f.domain();
    let vals: Vec<f64> = d.iter().map(|&i| u.apply(cloud.point(i))).collect();
    let top = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let next = vals.iter().cloned().filter(|&v| v < top).fold(f64::NEG_INFINITY, f64::max);
    let c = if next.is_finite() { next } else { top - 1.0 };
    let members: Vec<usize> = d.iter().zip(&vals).filter(|(_, &v)| v > c).map(|(&i, _)| i).collect();
    let osc = oscillation(f, &members);
    (Slice { functional: u.clone(), depth: top - c, members }, osc)
}

pub(crate) fn random_unit(rng: &mut impl Rng, dim: usize) -> Functional {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Some(u) = Functional(v).normalized() {
            return u;
        }
    }
}

/// Simultaneous small slice for several maps on one domain, through the
/// product map with the max-combined metric.
pub fn equi_slice(fs: &[ScoredMap], subset: &[usize], eps: f64, tol: &Tolerances) -> Result<SliceSearch> {
    let product = ScoredMap::product(fs)?;
    find_small_slice(&product, subset, eps, tol)
}

/// One sampled slice that broke the midpoint bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LancienViolation {
    pub stage: usize,
    pub functional: Functional,
    pub threshold: f64,
    pub members: Vec<usize>,
    pub oscillation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LancienReport {
    pub epsilon: f64,
    /// Slices actually evaluated.
    pub checked: usize,
    /// Draws with no admissible slice (stalled stages, or directions where
    /// the next stage reaches the support).
    pub vacuous: usize,
    pub max_oscillation: f64,
    pub violations: Vec<LancienViolation>,
}

impl LancienReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples slices of each stage set that miss the next stage and checks
/// their oscillation against `2 eps + osc_tol`.
///
/// Directions are uniform on the sphere; the threshold is uniform between
/// the top of the next stage (or the bottom of the stage set when the next
/// stage is empty) and the support.
pub fn lancien_check(
    f: &ScoredMap,
    eps: f64,
    trace: &DerivationTrace,
    trials: usize,
    seed: u64,
    tol: &Tolerances,
) -> Result<LancienReport> {
    check_eps(eps)?;
    let cloud = f.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report =
        LancienReport { epsilon: eps, checked: 0, vacuous: 0, max_oscillation: 0.0, violations: Vec::new() };
    let stages: Vec<usize> = (0..trace.stages.len()).filter(|&k| !trace.stage_input(k).is_empty()).collect();
    if stages.is_empty() {
        return Ok(report);
    }
    for t in 0..trials {
        let k = stages[t % stages.len()];
        let d = trace.stage_input(k);
        let next = &trace.stages[k].survivors;
        let u = random_unit(&mut rng, cloud.dim());
        let vals: Vec<f64> = d.iter().map(|&i| u.apply(cloud.point(i))).collect();
        let sup = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let low = if next.is_empty() {
            vals.iter().cloned().fold(f64::INFINITY, f64::min)
        } else {
            next.iter().map(|&i| u.apply(cloud.point(i))).fold(f64::NEG_INFINITY, f64::max)
        };
        if low >= sup {
            report.vacuous += 1;
            continue;
        }
        let c = rng.random_range(low..sup);
        let members: Vec<usize> = d.iter().zip(&vals).filter(|(_, &v)| v > c).map(|(&i, _)| i).collect();
        let osc = oscillation(f, &members);
        report.checked += 1;
        report.max_oscillation = report.max_oscillation.max(osc);
        if osc > 2.0 * eps + tol.osc_tol {
            report.violations.push(LancienViolation { stage: k, functional: u, threshold: c, members, oscillation: osc });
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusRow {
    pub epsilon: f64,
    /// `None` when no pair of points has values `epsilon` apart.
    pub delta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusTable {
    pub rows: Vec<ModulusRow>,
}

impl ModulusTable {
    /// `delta(eps)` for a grid value; `+inf` stands for the sentinel.
    pub fn delta(&self, eps: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.epsilon == eps).map(|r| r.delta.unwrap_or(f64::INFINITY))
    }
}

/// `delta(eps) = min |x - y|` over sample pairs with `d(f(x), f(y)) >= eps`.
pub fn modulus_delta(f: &ScoredMap, eps_grid: &[f64]) -> Result<ModulusTable> {
    let n = f.len();
    if n < 2 {
        return Err(Error::domain("the continuity modulus needs at least two points"));
    }
    let cloud = f.domain();
    let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((f.dist(i, j), euclid(cloud.point(i), cloud.point(j))));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut running = Vec::with_capacity(pairs.len());
    let mut m = f64::INFINITY;
    for p in &pairs {
        m = m.min(p.1);
        running.push(m);
    }
    let rows = eps_grid
        .iter()
        .map(|&eps| {
            let k = pairs.partition_point(|p| p.0 >= eps);
            ModulusRow { epsilon: eps, delta: (k > 0).then(|| running[k - 1]) }
        })
        .collect();
    Ok(ModulusTable { rows })
}
