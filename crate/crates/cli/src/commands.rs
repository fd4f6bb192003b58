use std::path::Path;

use anyhow::{bail, Context, Result};
use dentlab_core::dcapprox::{build_renorm, dc_split_check, midpoint_drop_check, moreau_envelope, uniform_error_curve};
use dentlab_core::dentability::{derive_once_with, dz_index_with, equi_slice, find_small_slice_with, Mode, SliceSearch};
use dentlab_core::generators::{gen_norm_one_map, gen_standard, gen_tree, grid_on, halton, martingale_run, Shape, TreeSpec};
use dentlab_core::slicing::{ss_density_scan, ss_profile};
use dentlab_core::{io, Functional, LpNorm, PointCloud, ScoredMap, Slice};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{ModeArg, Resolver};
use crate::emit::{num, opt, Output, Table};
use crate::{DcApproxArgs, DentArgs, DeriveArgs, EquiArgs, GenArgs, MartingaleArgs, RenormArgs, ScanArgs};

fn load(r: &mut Resolver, flag: Option<String>) -> Result<ScoredMap> {
    let path: String = r.required(flag, "input")?;
    io::read_map(Path::new(&path)).with_context(|| format!("input {path}"))
}

fn subset(f: &ScoredMap, ids: Option<Vec<String>>) -> Result<Vec<usize>> {
    match ids {
        None => Ok(f.domain().all()),
        Some(ids) => ids
            .iter()
            .map(|id| f.domain().index_of(id).with_context(|| format!("unknown point id {id:?}")))
            .collect(),
    }
}

fn ids(f: &ScoredMap, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| f.domain().id(i).to_string()).collect()
}

#[derive(Serialize)]
struct SliceOut {
    functional: Functional,
    depth: f64,
    members: Vec<String>,
}

fn slice_out(f: &ScoredMap, s: &Slice) -> SliceOut {
    SliceOut { functional: s.functional.clone(), depth: s.depth, members: ids(f, &s.members) }
}

#[derive(Serialize)]
struct RemovalOut {
    point: String,
    oscillation: f64,
    slice: SliceOut,
}

#[derive(Serialize)]
struct StageOut {
    stage: usize,
    survivors: Vec<String>,
    removed: Vec<RemovalOut>,
    max_witness_osc: f64,
}

fn stage_out(f: &ScoredMap, k: usize, st: &dentlab_core::dentability::DerivationStage) -> StageOut {
    StageOut {
        stage: k,
        survivors: ids(f, &st.survivors),
        removed: st
            .removed
            .iter()
            .map(|r| RemovalOut {
                point: f.domain().id(r.point).to_string(),
                oscillation: r.oscillation,
                slice: slice_out(f, &r.slice),
            })
            .collect(),
        max_witness_osc: st.max_removal_oscillation(),
    }
}

pub fn dent_index(a: DentArgs, r: &mut Resolver) -> Result<Output> {
    let f = load(r, a.input)?;
    let eps: f64 = r.required(a.eps, "eps")?;
    let mode: Mode = r.or(a.mode, "mode", ModeArg::Exact)?.into();
    let initial = subset(&f, r.opt(a.subset, "subset")?)?;
    let (tol, cap) = (r.config.tolerances.clone(), r.config.capacity.clone());
    let trace = dz_index_with(&f, &initial, eps, mode, &tol, &cap)?;
    let stages: Vec<StageOut> = trace.stages.iter().enumerate().map(|(k, s)| stage_out(&f, k + 1, s)).collect();
    let mut table = Table::new(&["stage", "survivors", "max_witness_osc"]);
    for s in &stages {
        table.push(vec![s.stage.to_string(), s.survivors.len().to_string(), num(s.max_witness_osc)]);
    }
    Output::new(
        json!({
            "epsilon": eps,
            "mode": mode,
            "dz": trace.dz(),
            "stalled_at": match trace.outcome { dentlab_core::dentability::Outcome::StalledAt(k) => Some(k), _ => None },
            "initial": ids(&f, &trace.initial),
            "stages": stages,
        }),
        table,
    )
}

pub fn derive(a: DeriveArgs, r: &mut Resolver) -> Result<Output> {
    let f = load(r, a.input)?;
    let eps: f64 = r.required(a.eps, "eps")?;
    let mode: Mode = r.or(a.mode, "mode", ModeArg::Exact)?.into();
    let d = subset(&f, r.opt(a.subset, "subset")?)?;
    let (tol, cap) = (r.config.tolerances.clone(), r.config.capacity.clone());
    let stage = derive_once_with(&f, &d, eps, mode, &tol, &cap)?;
    let out = stage_out(&f, 1, &stage);
    let mut table = Table::new(&["id", "removed", "witness_osc"]);
    for &i in &d {
        let w = stage.removed.iter().find(|x| x.point == i);
        table.push(vec![
            f.domain().id(i).to_string(),
            w.is_some().to_string(),
            opt(w.map(|x| x.oscillation)),
        ]);
    }
    let search = find_small_slice_with(&f, &d, eps, &tol, &cap, r.config.seed)?;
    Output::new(json!({ "epsilon": eps, "mode": mode, "stage": out, "small_slice": search_out(&f, &search) }), table)
}

fn search_out(f: &ScoredMap, s: &SliceSearch) -> Value {
    match s {
        SliceSearch::Found { slice, oscillation } => {
            json!({ "kind": "found", "oscillation": oscillation, "slice": slice_out(f, slice) })
        }
        SliceSearch::None => json!({ "kind": "none" }),
        SliceSearch::Unknown { evaluated, best } => json!({ "kind": "unknown", "evaluated": evaluated, "best": best }),
    }
}

pub fn ss_scan(a: ScanArgs, r: &mut Resolver) -> Result<Output> {
    let f = load(r, a.input)?;
    let all = f.domain().all();
    let tol = r.config.tolerances.clone();
    if let Some(u) = r.opt(a.direction, "direction")? {
        let profile = ss_profile(&f, &all, &Functional(u), &tol)?;
        let mut table = Table::new(&["t", "oscillation"]);
        for s in &profile.samples {
            table.push(vec![num(s.t), num(s.oscillation)]);
        }
        return Output::new(json!({ "profile": profile }), table);
    }
    let eps: f64 = r.required(a.eps, "eps")?;
    let target: f64 = r.or(a.target, "target", eps)?;
    let dirs: usize = r.or(a.dirs, "dirs", 64)?;
    let scan = ss_density_scan(&f, &all, dirs, eps, target, r.config.seed, &tol)?;
    let mut table = Table::new(&["direction_index", "success", "distance", "oscillation", "depth"]);
    for row in &scan.rows {
        table.push(vec![
            row.direction_index.to_string(),
            row.success.to_string(),
            opt(row.distance),
            opt(row.oscillation),
            opt(row.depth),
        ]);
    }
    Output::new(json!({ "scan": scan }), table)
}

fn eval_grid(f: &ScoredMap, mesh: Option<f64>) -> Result<PointCloud> {
    let cloud = f.domain();
    let d = cloud.dim();
    let lo = (0..d).map(|k| cloud.points().iter().map(|p| p[k]).fold(f64::INFINITY, f64::min)).fold(f64::INFINITY, f64::min);
    let hi = (0..d).map(|k| cloud.points().iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max)).fold(f64::NEG_INFINITY, f64::max);
    if d >= 3 && mesh.is_none() {
        return Ok(halton(d, 4096, lo, hi)?);
    }
    let h = mesh.unwrap_or(cloud.diameter() / 64.0);
    if !(h > 0.0) {
        bail!("grid mesh must be positive");
    }
    let n = ((hi - lo) / h).round() as usize + 1;
    if n.saturating_pow(d as u32) > 1 << 22 {
        bail!("grid mesh {h} gives too many points");
    }
    Ok(grid_on(lo, hi, d, n.max(2))?)
}

pub fn dc_approx(a: DcApproxArgs, r: &mut Resolver) -> Result<Output> {
    let f = load(r, a.input)?;
    let n_list: Vec<u32> = r.or(a.n_list, "n_list", vec![1, 2, 4, 8, 16])?;
    let mesh = r.opt(a.grid_mesh, "grid_mesh")?;
    let trials: usize = r.or(a.trials, "trials", 1000)?;
    let curve = uniform_error_curve(&f, &n_list)?;
    let grid = eval_grid(&f, mesh)?;
    let mut splits = Vec::new();
    for &n in &n_list {
        let approx = moreau_envelope(&f, n, &grid)?;
        splits.push(dc_split_check(&approx, trials, r.config.seed, &r.config.tolerances));
    }
    let mut table = Table::new(&["n", "sup_error", "theory_bound"]);
    for p in &curve.points {
        table.push(vec![p.n.to_string(), num(p.sup_error), num(p.theory_bound)]);
    }
    Output::new(json!({ "grid_points": grid.len(), "error_curve": curve, "splits": splits }), table)
}

pub fn renorm_check(a: RenormArgs, r: &mut Resolver) -> Result<Output> {
    let f = load(r, a.input)?;
    let k: u32 = r.or(a.k, "k", 3)?;
    let eps: f64 = r.required(a.eps, "eps")?;
    let trials: usize = r.or(a.trials, "trials", 1000)?;
    let mode: Mode = r.or(a.mode, "mode", ModeArg::Exact)?.into();
    let fault = r.opt(a.fault_scale, "fault_scale")?;
    let (tol, cap) = (r.config.tolerances.clone(), r.config.capacity.clone());
    let mut renorm = build_renorm(&f, k, mode, &tol, &cap)?;
    if let Some(c) = fault {
        renorm.scale_samples(c);
    }
    let report = midpoint_drop_check(&renorm, &f, eps, trials, r.config.seed, &tol)?;
    let levels: Vec<Value> = renorm
        .levels
        .iter()
        .map(|l| json!({ "k": l.k, "epsilon": l.epsilon, "n_k": l.n_k, "stage_sizes": l.stages.iter().map(|s| s.len()).collect::<Vec<_>>() }))
        .collect();
    let mut table = Table::new(&[
        "epsilon", "delta", "dz_eighth", "drop", "qualifying_pairs", "tested", "violations", "min_margin", "passed",
    ]);
    table.push(vec![
        num(report.epsilon),
        opt(report.delta),
        report.dz_eighth.to_string(),
        num(report.drop),
        report.qualifying_pairs.to_string(),
        report.tested.to_string(),
        report.violation_count.to_string(),
        opt(report.min_margin),
        report.passed.to_string(),
    ]);
    Output::new(json!({ "levels": levels, "report": report }), table)
}

pub fn gen_example(a: GenArgs, r: &mut Resolver) -> Result<Output> {
    let map_kind: String = r.or(a.map, "map", "default".to_string())?;
    let f = match r.opt(a.tree_depth, "tree_depth")? {
        Some(depth) => {
            let spec = TreeSpec {
                branching: r.or(a.branching, "branching", 2)?,
                ..TreeSpec::new(depth, r.or(a.tree_eps, "tree_eps", 1.0)?)
            };
            let tree = gen_tree(&spec)?;
            match map_kind.as_str() {
                "default" => tree.map,
                "identity" => ScoredMap::identity(tree.cloud, LpNorm::Linf)?,
                "norm-one" => gen_norm_one_map(&tree.map)?,
                other => bail!("unknown map {other:?}; use default, identity or norm-one"),
            }
        }
        None => {
            let shape: String = r.or(a.shape, "shape", "grid".to_string())?;
            let shape: Shape = shape.parse()?;
            let cloud = gen_standard(shape, r.or(a.dim, "dim", 1)?, r.or(a.n, "n", 21)?, r.config.seed)?;
            match map_kind.as_str() {
                "default" | "identity" => ScoredMap::identity(cloud, LpNorm::L2)?,
                other => bail!("map {other:?} needs --tree-depth"),
            }
        }
    };
    let mut table = Table::new(&["id", "x", "f"]);
    let join = |v: &[f64]| v.iter().map(|c| num(*c)).collect::<Vec<_>>().join(" ");
    for i in 0..f.len() {
        table.push(vec![f.domain().id(i).to_string(), join(f.domain().point(i)), join(f.value(i))]);
    }
    let json: Value = serde_json::from_str(&io::map_to_json(&f))?;
    Ok(Output { json, table })
}

pub fn martingale(a: MartingaleArgs, r: &mut Resolver) -> Result<Output> {
    let f = match r.opt(a.tree_depth, "tree_depth")? {
        Some(depth) => {
            let tree = gen_tree(&TreeSpec::new(depth, r.or(a.tree_eps, "tree_eps", 1.0)?))?;
            ScoredMap::identity(tree.cloud, LpNorm::Linf)?
        }
        None => load(r, a.input)?,
    };
    let eps: f64 = r.required(a.eps, "eps")?;
    let depth: usize = r.or(a.depth, "depth", 3)?;
    let run = martingale_run(&f, eps, depth, None, &r.config.tolerances)?;
    let mut table = Table::new(&[
        "n", "atoms", "min_separation", "l1_separation", "residual", "control_gain", "allowance", "refines", "separated", "averaged",
    ]);
    for l in &run.levels {
        table.push(vec![
            l.n.to_string(),
            l.atoms.len().to_string(),
            num(l.min_separation),
            num(l.l1_separation),
            num(l.residual),
            num(l.control_gain),
            num(l.allowance),
            l.refines.to_string(),
            l.separated.to_string(),
            l.averaged.to_string(),
        ]);
    }
    Output::new(json!({ "run": run, "start_id": f.domain().id(run.start) }), table)
}

pub fn equi(a: EquiArgs, r: &mut Resolver) -> Result<Output> {
    let paths: Vec<String> = r.required(a.input, "input")?;
    if paths.is_empty() {
        bail!("equi-slice needs at least one --input");
    }
    let maps = paths
        .iter()
        .map(|p| io::read_map(Path::new(p)).with_context(|| format!("input {p}")))
        .collect::<Result<Vec<_>>>()?;
    let eps: f64 = r.required(a.eps, "eps")?;
    let sub = subset(&maps[0], r.opt(a.subset, "subset")?)?;
    let search = equi_slice(&maps, &sub, eps, &r.config.tolerances)?;
    let mut table = Table::new(&["kind", "depth", "oscillation", "members"]);
    let result = search_out(&maps[0], &search);
    match &search {
        SliceSearch::Found { slice, oscillation } => table.push(vec![
            "found".into(),
            num(slice.depth),
            num(*oscillation),
            ids(&maps[0], &slice.members).join(" "),
        ]),
        SliceSearch::None => table.push(vec!["none".into(), String::new(), String::new(), String::new()]),
        SliceSearch::Unknown { .. } => table.push(vec!["unknown".into(), String::new(), String::new(), String::new()]),
    }
    Output::new(json!({ "epsilon": eps, "maps": paths.len(), "search": result }), table)
}
