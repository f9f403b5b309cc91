//! Browser bindings for three small operations: cohort hazard curves, a
//! simulated path of cohort aging rates, and the minimum detectable drift.
//!
//! The plain functions return `Result<_, String>` so they test natively; the
//! `#[wasm_bindgen]` wrappers only convert errors.

use aging_rate::gg_model::{cohort_hazard, GompertzCohortParams};
use aging_rate::simulate::draw_walk;
use aging_rate::summary::mdd_plugin;
use aging_rate::TruthScenario;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

const MAX_POINTS: usize = 10_000;

/// Gamma-Gompertz cohort hazard at `n` ages from `x0` in steps of `step`
/// (ages counted from the start of the window).
pub fn hazard_curve(a: f64, b: f64, gamma: f64, x0: f64, step: f64, n: usize) -> Result<Vec<f64>, String> {
    if n == 0 || n > MAX_POINTS {
        return Err(format!("number of points must be in 1..={MAX_POINTS}, got {n}"));
    }
    if !(step > 0.0) {
        return Err(format!("step must be positive, got {step}"));
    }
    let p = GompertzCohortParams::new(a, b, gamma).map_err(|e| e.to_string())?;
    (0..n).map(|i| cohort_hazard(&p, x0 + step * i as f64).map_err(|e| e.to_string())).collect()
}

/// Cohort rates of aging `b_t` from one draw of the random walk with
/// Laplace innovations.
pub fn slope_path(b: f64, beta: f64, sigma_rw: f64, n_cohorts: usize, seed: u64) -> Result<Vec<f64>, String> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(format!("b must be positive, got {b}"));
    }
    let sc = TruthScenario { n_cohorts, log_b: b.ln(), beta, sigma_rw, seed, ..TruthScenario::default() };
    sc.validate()?;
    if n_cohorts > MAX_POINTS {
        return Err(format!("at most {MAX_POINTS} cohorts"));
    }
    let walk = draw_walk(&sc, &mut ChaCha8Rng::seed_from_u64(seed));
    Ok(walk.log_slopes().into_iter().map(f64::exp).collect())
}

/// Minimum detectable drift in percent for each T in `t_min..=t_max`.
pub fn mdd_curve(sigma_rw: f64, t_min: usize, t_max: usize) -> Result<Vec<f64>, String> {
    if t_min < 2 || t_max < t_min || t_max - t_min >= MAX_POINTS {
        return Err(format!("need 2 <= t_min <= t_max with fewer than {MAX_POINTS} points, got {t_min}..{t_max}"));
    }
    (t_min..=t_max).map(|t| mdd_plugin(sigma_rw, t).map_err(|e| e.to_string())).collect()
}

#[wasm_bindgen(js_name = hazardCurve)]
pub fn hazard_curve_js(a: f64, b: f64, gamma: f64, x0: f64, step: f64, n: usize) -> Result<Vec<f64>, JsError> {
    hazard_curve(a, b, gamma, x0, step, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = slopePath)]
pub fn slope_path_js(b: f64, beta: f64, sigma_rw: f64, n_cohorts: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    slope_path(b, beta, sigma_rw, n_cohorts, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = mddCurve)]
pub fn mdd_curve_js(sigma_rw: f64, t_min: usize, t_max: usize) -> Result<Vec<f64>, JsError> {
    mdd_curve(sigma_rw, t_min, t_max).map_err(|e| JsError::new(&e))
}
