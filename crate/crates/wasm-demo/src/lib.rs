//! Browser bindings: reachable-set boundaries and the noise/gain trade-off.
//!
//! Every export takes the dataset as JSON text in the trajectory file format
//! and returns a JSON string; failures come back as `{"error": "..."}`.

use ddinterp::inference::{self, PriorBounds};
use ddinterp::interp::Ellipsoid;
use ddinterp::lmi::SoftMinSolver;
use ddinterp::predict::{self, PredictionInstance, SetKind};
use ddinterp::sysio;
use nalgebra::DVector;
use serde::Serialize;
use wasm_bindgen::prelude::*;

const BOUNDARY_POINTS: usize = 128;

#[derive(Serialize)]
struct SetView {
    tag: &'static str,
    boundaries: Vec<Vec<[f64; 2]>>,
    data_free: Vec<[f64; 2]>,
    least_squares: [f64; 2],
    anchored: bool,
    skipped: usize,
}

#[derive(Serialize)]
struct CurveView {
    l: f64,
    alpha_star: Option<f64>,
}

fn respond<T: Serialize>(r: Result<T, String>) -> String {
    let out = match r {
        Ok(v) => sysio::to_json(&v).map_err(|e| e.to_string()),
        Err(e) => Err(e),
    };
    out.unwrap_or_else(|e| format!("{{\"error\": {:?}}}", e))
}

fn instance(
    data_json: &str,
    l: f64,
    alpha: f64,
    x: &[f64],
    u: &[f64],
) -> Result<PredictionInstance, String> {
    let data = sysio::parse_json(data_json).map_err(|e| e.to_string())?;
    if data.batch.n() != 2 {
        return Err(format!(
            "the demo plots two-dimensional states (n = {})",
            data.batch.n()
        ));
    }
    let x = DVector::from_column_slice(x);
    let u = if u.is_empty() {
        DVector::zeros(data.batch.m())
    } else {
        DVector::from_column_slice(u)
    };
    let bounds = PriorBounds::new(l, alpha).map_err(|e| e.to_string())?;
    PredictionInstance::new(data.batch, x, u, bounds).map_err(|e| e.to_string())
}

fn view(
    inst: &PredictionInstance,
    alpha: f64,
    samples: usize,
    seed: u64,
) -> Result<SetView, String> {
    let (set, anchored, skipped) = if alpha == 0.0 {
        (
            predict::reachable_noisefree(inst).map_err(|e| e.to_string())?,
            false,
            0,
        )
    } else {
        let r = predict::reachable_union(inst, samples, seed, &SoftMinSolver::default())
            .map_err(|e| e.to_string())?;
        (r.set, r.anchored, r.skipped.len())
    };
    let tag = match set.kind {
        SetKind::Empty => "Empty",
        SetKind::Degenerate => "Degenerate",
        SetKind::ExactEllipsoid(_) => "ExactEllipsoid",
        SetKind::InnerUnion(_) => "InnerUnion",
    };
    let boundaries = set
        .members_absolute()
        .iter()
        .map(|e| e.boundary_2d(BOUNDARY_POINTS))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let r = (inst.bounds.l * inst.x.norm() + inst.bounds.alpha).max(1e-12);
    let data_free = Ellipsoid::ball(inst.offset(), r)
        .and_then(|b| b.boundary_2d(BOUNDARY_POINTS))
        .map_err(|e| e.to_string())?;
    let ls = inst.least_squares_prediction();
    Ok(SetView {
        tag,
        boundaries,
        data_free,
        least_squares: [ls[0], ls[1]],
        anchored,
        skipped,
    })
}

/// Exact next-state ellipse for noise-free data.
#[wasm_bindgen]
pub fn noisefree_set(data_json: &str, l: f64, x: &[f64], u: &[f64]) -> String {
    respond(instance(data_json, l, 0.0, x, u).and_then(|inst| view(&inst, 0.0, 1, 0)))
}

/// Sampled inner union of next-state ellipses under bounded noise.
#[wasm_bindgen]
pub fn union_set(
    data_json: &str,
    l: f64,
    alpha: f64,
    x: &[f64],
    u: &[f64],
    samples: usize,
    seed: u64,
) -> String {
    respond(instance(data_json, l, alpha, x, u).and_then(|inst| view(&inst, alpha, samples, seed)))
}

/// Minimal noise level over an ascending grid of gain bounds.
#[wasm_bindgen]
pub fn tradeoff(data_json: &str, grid: &[f64]) -> String {
    let run = || -> Result<Vec<CurveView>, String> {
        let data = sysio::parse_json(data_json).map_err(|e| e.to_string())?;
        let pts = inference::tradeoff_curve(&data.batch, grid, &SoftMinSolver::default())
            .map_err(|e| e.to_string())?;
        Ok(pts
            .into_iter()
            .map(|p| CurveView {
                l: p.l,
                alpha_star: p.alpha_star,
            })
            .collect())
    };
    respond(run())
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_POINT: &str = include_str!("../../../data/two_point.json");

    #[test]
    fn noisefree_view_has_boundary() {
        let out = noisefree_set(TWO_POINT, 1.0, &[0.5, 0.5], &[]);
        assert!(out.contains("ExactEllipsoid"), "{out}");
    }

    #[test]
    fn errors_are_json() {
        let out = tradeoff("{", &[1.0]);
        assert!(out.starts_with("{\"error\""), "{out}");
    }
}
