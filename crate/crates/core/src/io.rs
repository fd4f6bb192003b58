//! JSON file format for point clouds and maps:
//!
//! ```json
//! {"dim": 2,
//!  "points": [{"id": "a", "x": [0.0, 1.0], "f": [0.5]}],
//!  "metric": {"kind": "lp", "p": 2}}
//! ```
//!
//! `p` is `1`, `2` or `"inf"`; `{"kind": "table", "rows": [[...]]}` gives an
//! explicit value metric. Missing `f` on every point means the identity map;
//! a missing metric means `p = 2`. An optional `"config"` object is
//! accepted and ignored.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{LpNorm, Metric, PointCloud, ScoredMap, Vector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum PValue {
    Num(f64),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum MetricSpec {
    Lp { p: PValue },
    Table { rows: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct PointEntry {
    id: String,
    x: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CloudFile {
    dim: usize,
    points: Vec<PointEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metric: Option<MetricSpec>,
    /// Free-form provenance written by tools; ignored on read.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<serde_json::Value>,
}

fn norm_of(p: &PValue) -> Result<LpNorm> {
    match p {
        PValue::Num(v) if *v == 1.0 => Ok(LpNorm::L1),
        PValue::Num(v) if *v == 2.0 => Ok(LpNorm::L2),
        PValue::Name(s) if s == "inf" => Ok(LpNorm::Linf),
        other => Err(Error::domain(format!("unsupported metric exponent {other:?}; use 1, 2 or \"inf\""))),
    }
}

/// Parses a map from JSON text. Syntax errors carry line and column.
pub fn parse_map(text: &str) -> Result<ScoredMap> {
    let file: CloudFile = serde_json::from_str(text)?;
    let with_f = file.points.iter().filter(|p| p.f.is_some()).count();
    if with_f != 0 && with_f != file.points.len() {
        return Err(Error::domain("either every point or no point carries an \"f\" value"));
    }
    let ids = file.points.iter().map(|p| p.id.clone()).collect();
    let xs = file.points.iter().map(|p| Vector(p.x.clone())).collect();
    let cloud = PointCloud::new(file.dim, ids, xs)?;
    let values: Vec<Vec<f64>> = if with_f == 0 {
        file.points.iter().map(|p| p.x.clone()).collect()
    } else {
        file.points.into_iter().filter_map(|p| p.f).collect()
    };
    let metric = match &file.metric {
        None => Metric::Lp(LpNorm::L2),
        Some(MetricSpec::Lp { p }) => Metric::Lp(norm_of(p)?),
        Some(MetricSpec::Table { rows }) => Metric::table(rows.clone())?,
    };
    ScoredMap::new(cloud, values, metric)
}

/// Parses a bare cloud; any `f` values and metric are ignored.
pub fn parse_cloud(text: &str) -> Result<PointCloud> {
    Ok(parse_map(text)?.domain().clone())
}

pub fn read_map(path: &Path) -> Result<ScoredMap> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::domain(format!("cannot read {}: {e}", path.display())))?;
    parse_map(&text)
}

/// Pretty JSON for a map.
pub fn map_to_json(f: &ScoredMap) -> String {
    let cloud = f.domain();
    let points = (0..cloud.len())
        .map(|i| PointEntry { id: cloud.id(i).to_string(), x: cloud.point(i).to_vec(), f: Some(f.value(i).to_vec()) })
        .collect();
    let metric = Some(match f.metric() {
        Metric::Lp(LpNorm::L1) => MetricSpec::Lp { p: PValue::Num(1.0) },
        Metric::Lp(LpNorm::L2) => MetricSpec::Lp { p: PValue::Num(2.0) },
        Metric::Lp(LpNorm::Linf) => MetricSpec::Lp { p: PValue::Name("inf".into()) },
        Metric::Table(rows) => MetricSpec::Table { rows: rows.clone() },
    });
    let file = CloudFile { dim: cloud.dim(), points, metric, config: None };
    serde_json::to_string_pretty(&file).expect("finite values serialize")
}

/// Pretty JSON for a cloud with no values.
pub fn cloud_to_json(cloud: &PointCloud) -> String {
    let points = (0..cloud.len())
        .map(|i| PointEntry { id: cloud.id(i).to_string(), x: cloud.point(i).to_vec(), f: None })
        .collect();
    serde_json::to_string_pretty(&CloudFile { dim: cloud.dim(), points, metric: None, config: None }).expect("finite values serialize")
}
