//! Browser bindings. Each export takes plain numbers and returns a JSON string.
//!
//! The `*_json` functions hold the logic so they can be tested natively; the exported
//! wrappers only turn errors into JS exceptions.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use repro_core::engine::Axis;
use repro_core::mixture::{tau_confidence_set, MbicConfig, MixtureParams, TauHatConfig, TauSetConfig};
use repro_core::models::binomial::{binomial_bounds, binomial_set};
use repro_core::models::uniform::{lrt_interval, order_stat_set, uniform_irwin_hall_set};
use repro_core::region::Interval;
use repro_core::rng;

type Result<T> = std::result::Result<T, String>;

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

/// Endpoints of an interval; None when it is empty.
fn endpoints(iv: &Interval) -> Option<(f64, f64)> {
    (!iv.is_empty()).then_some((iv.lo, iv.hi))
}

#[derive(Serialize)]
struct BinomialView {
    r: usize,
    y: usize,
    alpha: f64,
    runs: Vec<(f64, f64)>,
    /// Acceptance band: theta with the shortest region [lower, upper] of counts.
    theta: Vec<f64>,
    lower: Vec<usize>,
    upper: Vec<usize>,
}

pub fn binomial_explorer_json(r: usize, y: usize, alpha: f64) -> Result<String> {
    if y > r {
        return Err(format!("count {y} exceeds {r} trials"));
    }
    let axis = Axis::new(0.001, 0.999, 0.001).map_err(|e| e.to_string())?;
    let set = binomial_set(y, r, alpha, axis).map_err(|e| e.to_string())?;
    let theta: Vec<f64> = (1..200).map(|i| i as f64 * 0.005).collect();
    let bounds = theta.iter().map(|t| binomial_bounds(r, *t, alpha)).collect::<std::result::Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
    to_json(&BinomialView {
        r,
        y,
        alpha,
        runs: set.runs().unwrap_or_default(),
        theta,
        lower: bounds.iter().map(|b| b.0).collect(),
        upper: bounds.iter().map(|b| b.1).collect(),
    })
}

#[derive(Serialize)]
struct UniformView {
    n: usize,
    alpha: f64,
    q: f64,
    feasible: Option<(f64, f64)>,
    test: Option<(f64, f64)>,
    irwin_hall: Option<(f64, f64)>,
    order_stat: Option<(f64, f64)>,
    lrt: Option<(f64, f64)>,
}

pub fn uniform_intervals_json(y: &[f64], alpha: f64) -> Result<String> {
    let ih = uniform_irwin_hall_set(y, alpha).map_err(|e| e.to_string())?;
    let os = order_stat_set(y, alpha).map_err(|e| e.to_string())?;
    let lrt = lrt_interval(y, alpha).map_err(|e| e.to_string())?;
    to_json(&UniformView {
        n: y.len(),
        alpha,
        q: ih.q,
        feasible: endpoints(&ih.feasible),
        test: endpoints(&ih.test),
        irwin_hall: endpoints(&ih.repro),
        order_stat: endpoints(&os),
        lrt: endpoints(&lrt),
    })
}

pub fn mixture_sample_json(tau: usize, n: usize, seed: u64) -> Result<String> {
    let p = MixtureParams::reference(tau).ok_or_else(|| format!("no reference mixture with {tau} components (use 2, 3 or 4)"))?;
    let d = p.sample(n, &mut rng::stream(seed, 0)).map_err(|e| e.to_string())?;
    to_json(&d.y)
}

pub fn mixture_tau_set_json(y: &[f64], alpha: f64, lambda: f64, tau_max: usize, v_size: usize, vc_size: usize, seed: u64) -> Result<String> {
    let cfg = TauSetConfig {
        alpha,
        v_size,
        vc_size,
        fit: TauHatConfig { tau_max, ..Default::default() },
        mbic: MbicConfig { lambda, tau_max, ..Default::default() },
        seed,
        exhaustive: false,
        only: None,
    };
    let report = tau_confidence_set(y, &cfg).map_err(|e| e.to_string())?;
    to_json(&report)
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e))
}

/// Binomial(r, theta) confidence set for an observed count, with the acceptance band.
#[wasm_bindgen]
pub fn binomial_explorer(r: usize, y: usize, alpha: f64) -> std::result::Result<String, JsError> {
    js(binomial_explorer_json(r, y, alpha))
}

/// Uniform location intervals: Irwin-Hall mean, order-statistic box and likelihood ratio.
#[wasm_bindgen]
pub fn uniform_intervals(y: &[f64], alpha: f64) -> std::result::Result<String, JsError> {
    js(uniform_intervals_json(y, alpha))
}

/// Draw n points from a reference normal mixture with tau components.
#[wasm_bindgen]
pub fn mixture_sample(tau: usize, n: usize, seed: u64) -> std::result::Result<String, JsError> {
    js(mixture_sample_json(tau, n, seed))
}

/// Confidence set for the number of mixture components.
#[wasm_bindgen]
pub fn mixture_tau_set(y: &[f64], alpha: f64, lambda: f64, tau_max: usize, v_size: usize, vc_size: usize, seed: u64) -> std::result::Result<String, JsError> {
    js(mixture_tau_set_json(y, alpha, lambda, tau_max, v_size, vc_size, seed))
}
