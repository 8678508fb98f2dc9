//! Browser bindings. Every export takes plain numbers and returns a JSON
//! string; errors come back as a string with the error code and message.

use serde::Serialize;
use stirap_core::spin::simulate_spin;
use stirap_core::{run_sweep, simulate_spring, Method, SystemParams};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Solution {
    method: String,
    signal: stirap_core::ControlSignal,
    sequence: Option<stirap_core::PulseSequence>,
    efficiency: f64,
    spring_cost: f64,
}

#[derive(Serialize)]
struct Trajectory {
    t: Vec<f64>,
    theta: Vec<f64>,
    pop1: Vec<f64>,
    pop2: Vec<f64>,
    pop3: Vec<f64>,
    spring_y: Vec<f64>,
    efficiency: f64,
}

fn parse_method(name: &str) -> Result<Method, String> {
    name.parse().map_err(|e: stirap_core::Error| describe(&e))
}

fn describe(e: &stirap_core::Error) -> String {
    format!("{}: {e}", e.code())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

pub fn solve_json(method: &str, gamma: f64, duration: f64, steps: usize) -> Result<String, String> {
    let method = parse_method(method)?;
    let run = || -> stirap_core::Result<Solution> {
        let params = SystemParams::new(gamma, duration)?;
        let signal = method.signal(&params)?;
        let sequence = method.sequence(&params).transpose()?;
        let efficiency = simulate_spin(&signal, &params, steps)?.efficiency;
        let spring_cost = simulate_spring(&signal, &params, steps)?.cost;
        Ok(Solution {
            method: method.to_string(),
            signal,
            sequence,
            efficiency,
            spring_cost,
        })
    };
    to_json(&run().map_err(|e| describe(&e))?)
}

/// Spin and spring trajectories thinned to at most `samples` points.
pub fn trajectory_json(
    method: &str,
    gamma: f64,
    duration: f64,
    steps: usize,
    samples: usize,
) -> Result<String, String> {
    let method = parse_method(method)?;
    let run = || -> stirap_core::Result<Trajectory> {
        let params = SystemParams::new(gamma, duration)?;
        let signal = method.signal(&params)?;
        let spin = simulate_spin(&signal, &params, steps)?;
        let spring = simulate_spring(&signal, &params, steps)?;
        let stride = (spin.times.len() / samples.max(2)).max(1);
        let keep: Vec<usize> = (0..spin.times.len())
            .filter(|i| i % stride == 0 || *i + 1 == spin.times.len())
            .collect();
        let spring_y = keep
            .iter()
            .map(|&i| {
                let t = spin.times[i];
                let j = spring
                    .times
                    .partition_point(|&s| s < t)
                    .min(spring.times.len() - 1);
                spring.states[j].y
            })
            .collect();
        Ok(Trajectory {
            t: keep.iter().map(|&i| spin.times[i]).collect(),
            theta: keep.iter().map(|&i| spin.theta[i]).collect(),
            pop1: keep.iter().map(|&i| spin.populations[i][0]).collect(),
            pop2: keep.iter().map(|&i| spin.populations[i][1]).collect(),
            pop3: keep.iter().map(|&i| spin.populations[i][2]).collect(),
            spring_y,
            efficiency: spin.efficiency,
        })
    };
    to_json(&run().map_err(|e| describe(&e))?)
}

/// Sweep records for the five standard methods.
pub fn efficiency_curve_json(
    gamma: f64,
    t_min: f64,
    t_max: f64,
    t_step: f64,
    steps: usize,
) -> Result<String, String> {
    let records = run_sweep(&[gamma], t_min, t_max, t_step, &Method::SWEEP_SET, steps)
        .map_err(|e| describe(&e))?;
    to_json(&records)
}

#[wasm_bindgen]
pub fn solve(method: &str, gamma: f64, duration: f64, steps: usize) -> Result<String, JsValue> {
    solve_json(method, gamma, duration, steps).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn trajectory(
    method: &str,
    gamma: f64,
    duration: f64,
    steps: usize,
    samples: usize,
) -> Result<String, JsValue> {
    trajectory_json(method, gamma, duration, steps, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn efficiency_curve(
    gamma: f64,
    t_min: f64,
    t_max: f64,
    t_step: f64,
    steps: usize,
) -> Result<String, JsValue> {
    efficiency_curve_json(gamma, t_min, t_max, t_step, steps).map_err(|e| JsValue::from_str(&e))
}
