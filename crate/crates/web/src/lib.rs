//! Browser bindings for the dentlab demo page (`www/`). Every export takes
//! plain numbers or strings and returns a JSON string.

use dentlab_core::dcapprox::moreau_envelope;
use dentlab_core::dentability::{dz_index, Mode, Outcome};
use dentlab_core::generators::{gen_standard, grid_on, Shape};
use dentlab_core::slicing::ss_profile;
use dentlab_core::{Functional, LpNorm, ScoredMap, Tolerances};
use serde_json::json;
use wasm_bindgen::prelude::*;

fn js(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn plane_cloud(shape: &str, n: usize, seed: u64) -> Result<ScoredMap, JsError> {
    let shape: Shape = shape.parse().map_err(js)?;
    let cloud = gen_standard(shape, 2, n, seed).map_err(js)?;
    ScoredMap::identity(cloud, LpNorm::L2).map_err(js)
}

/// Derivation of the identity map on a planar cloud. Returns the points and,
/// for each point, the stage at which it is removed (`null` if never).
#[wasm_bindgen]
pub fn derivation_stages(shape: &str, n: usize, seed: u64, eps: f64, cluster: bool) -> Result<String, JsError> {
    let f = plane_cloud(shape, n, seed)?;
    let mode = if cluster { Mode::Cluster } else { Mode::Exact };
    let trace = dz_index(&f, eps, mode, &Tolerances::default()).map_err(js)?;
    let mut stage = vec![None; f.len()];
    for (k, s) in trace.stages.iter().enumerate() {
        for r in &s.removed {
            stage[r.point] = Some(k + 1);
        }
    }
    let stalled = match trace.outcome {
        Outcome::StalledAt(k) => Some(k),
        Outcome::Dz(_) => None,
    };
    Ok(json!({ "points": f.domain().points(), "stage": stage, "dz": trace.dz(), "stalled_at": stalled }).to_string())
}

/// Envelope `f_n` of a one-dimensional map on `[-1, 1]`, with its split
/// `g - h`. `kind` is `abs`, `square`, `zigzag` or `step`.
#[wasm_bindgen]
pub fn envelope_curve(kind: &str, n: u32, points: usize) -> Result<String, JsError> {
    let g: fn(f64) -> f64 = match kind {
        "abs" => |x| x.abs(),
        "square" => |x| x * x,
        "zigzag" => |x| ((4.0 * x).rem_euclid(2.0) - 1.0).abs(),
        "step" => |x| if x < 0.0 { 0.0 } else { 1.0 },
        other => return Err(JsError::new(&format!("unknown function {other:?}"))),
    };
    let cloud = grid_on(-1.0, 1.0, 1, points.clamp(3, 4001)).map_err(js)?;
    let f = ScoredMap::scalar_fn(cloud.clone(), |x| g(x[0])).map_err(js)?;
    let a = moreau_envelope(&f, n, &cloud).map_err(js)?;
    let xs: Vec<f64> = cloud.points().iter().map(|p| p[0]).collect();
    let sup_error = f.scalar_values().unwrap().iter().zip(&a.envelope).map(|(u, v)| u - v).fold(0.0, f64::max);
    Ok(json!({ "x": xs, "f": f.scalar_values(), "fn": a.envelope, "g": a.g, "h": a.h, "sup_error": sup_error }).to_string())
}

/// Oscillation of the slices `{x : u(x) > sup u - t}` of a planar cloud for
/// `u = (cos angle, sin angle)` along the default depth schedule.
#[wasm_bindgen]
pub fn slice_profile(shape: &str, n: usize, seed: u64, angle: f64) -> Result<String, JsError> {
    let f = plane_cloud(shape, n, seed)?;
    let u = Functional(vec![angle.cos(), angle.sin()]);
    let p = ss_profile(&f, &f.domain().all(), &u, &Tolerances::default()).map_err(js)?;
    Ok(json!({ "points": f.domain().points(), "profile": p }).to_string())
}
