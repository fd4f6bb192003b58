use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use dentlab_core::dentability::{Capacity, Mode};
use dentlab_core::Tolerances;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::Common;

const COMMON_KEYS: &[&str] = &[
    "out",
    "emit",
    "seed",
    "sep_tol",
    "osc_tol",
    "budget",
    "max_points_plane",
    "max_points_scalar",
    "max_points_general",
    "max_cliques",
];

const COMMAND_KEYS: &[&str] = &[
    "input",
    "eps",
    "mode",
    "subset",
    "target",
    "dirs",
    "direction",
    "n_list",
    "grid_mesh",
    "trials",
    "k",
    "fault_scale",
    "shape",
    "dim",
    "n",
    "tree_depth",
    "tree_eps",
    "branching",
    "map",
    "depth",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Exact,
    Cluster,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Cluster => Mode::Cluster,
        }
    }
}

/// Everything that determines a run; written into every report.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub emit: Emit,
    pub capacity: Capacity,
    /// Resolved command parameters, including the input path.
    pub params: BTreeMap<String, Value>,
    #[serde(skip)]
    pub out: Option<String>,
}

/// Flag values layered over an optional JSON config file.
pub struct Resolver {
    file: Map<String, Value>,
    pub config: RunConfig,
}

impl Resolver {
    pub fn new(command: &str, common: &Common) -> Result<Resolver> {
        let file = match &common.config {
            None => Map::new(),
            Some(path) => load(path)?,
        };
        for key in file.keys() {
            if !COMMON_KEYS.contains(&key.as_str()) && !COMMAND_KEYS.contains(&key.as_str()) {
                bail!("unknown config key {key:?}");
            }
        }
        let mut r = Resolver {
            file,
            config: RunConfig {
                command: command.to_string(),
                tolerances: Tolerances::default(),
                seed: 0,
                emit: Emit::Json,
                capacity: Capacity::default(),
                params: BTreeMap::new(),
                out: None,
            },
        };
        let mut tol = Tolerances::default();
        if let Some(v) = r.layer(common.sep_tol, "sep_tol")? {
            tol.sep_tol = v;
        }
        if let Some(v) = r.layer(common.osc_tol, "osc_tol")? {
            tol.osc_tol = v;
        }
        if let Some(v) = r.layer(common.budget, "budget")? {
            tol.budget = v;
        }
        tol.validate()?;
        let mut cap = Capacity::default();
        if let Some(v) = r.layer(common.max_points_plane, "max_points_plane")? {
            cap.max_points_plane = v;
        }
        if let Some(v) = r.layer(common.max_points_scalar, "max_points_scalar")? {
            cap.max_points_scalar = v;
        }
        if let Some(v) = r.layer(common.max_points_general, "max_points_general")? {
            cap.max_points_general = v;
        }
        if let Some(v) = r.layer(common.max_cliques, "max_cliques")? {
            cap.max_cliques = v;
        }
        r.config.tolerances = tol;
        r.config.capacity = cap;
        r.config.seed = r.layer(common.seed, "seed")?.unwrap_or(0);
        r.config.emit = r.layer(common.emit, "emit")?.unwrap_or(Emit::Json);
        r.config.out = r.layer(common.out.clone(), "out")?;
        Ok(r)
    }

    fn layer<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => serde_json::from_value(v.clone()).map(Some).with_context(|| format!("config key {key:?}")),
        }
    }

    /// Optional command parameter; recorded when present.
    pub fn opt<T: DeserializeOwned + Serialize>(&mut self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        let v = self.layer(flag, key)?;
        if let Some(x) = &v {
            self.config.params.insert(key.to_string(), serde_json::to_value(x)?);
        }
        Ok(v)
    }

    /// Command parameter with a default; always recorded.
    pub fn or<T: DeserializeOwned + Serialize>(&mut self, flag: Option<T>, key: &str, default: T) -> Result<T> {
        let v = self.layer(flag, key)?.unwrap_or(default);
        self.config.params.insert(key.to_string(), serde_json::to_value(&v)?);
        Ok(v)
    }

    pub fn required<T: DeserializeOwned + Serialize>(&mut self, flag: Option<T>, key: &str) -> Result<T> {
        match self.opt(flag, key)? {
            Some(v) => Ok(v),
            None => bail!("missing required parameter --{}", key.replace('_', "-")),
        }
    }
}

fn load(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
    let v: Value = serde_json::from_str(&text).with_context(|| format!("config {}", path.display()))?;
    match v {
        Value::Object(m) => Ok(m),
        _ => bail!("config {} must hold a JSON object", path.display()),
    }
}
