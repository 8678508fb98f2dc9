//! The mapped oscillator `ÿ = −(Γ/2)ẏ − y/4 − u/2`: exact propagation on
//! zero and constant-force segments, RK4 on polynomial segments, and the
//! dissipation cost `Γ∫y²dt`.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::sig15;
use crate::integrate::{rk4_step, simpson};
use crate::model::{
    check_gamma, root_factor, ControlSignal, SegmentShape, SpringState, SystemParams,
};

/// Minimum number of uniform samples per control interval used for the cost.
pub const MIN_SAMPLES_PER_SEGMENT: usize = 2000;

#[derive(Debug, Clone, Serialize)]
pub struct SpringTrajectory {
    pub params: SystemParams,
    pub times: Vec<f64>,
    pub states: Vec<SpringState>,
    pub cost: f64,
    pub endpoint_residual: f64,
}

impl SpringTrajectory {
    pub fn final_state(&self) -> SpringState {
        *self.states.last().expect("trajectory is never empty")
    }

    /// Writes `t,y,v` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,y,v")?;
        for (t, s) in self.times.iter().zip(&self.states) {
            writeln!(w, "{},{},{}", sig15(*t), sig15(s.y), sig15(s.v))?;
        }
        Ok(())
    }
}

/// Exact unforced evolution over `dt` from `(y0, v0)`.
///
/// With `α = Γ/4` and `ω = √(4−Γ²)/4` the solution is
/// `y = e^{−αt}[y0 cos ωt + (v0 + α y0)/ω · sin ωt]`.
pub fn free_evolution(y0: f64, v0: f64, gamma: f64, dt: f64) -> Result<SpringState> {
    check_gamma(gamma)?;
    if dt.is_nan() || dt < 0.0 {
        return Err(Error::InvalidParameter(format!("negative interval {dt}")));
    }
    Ok(free_evolution_unchecked(y0, v0, gamma, dt))
}

pub(crate) fn free_evolution_unchecked(y0: f64, v0: f64, gamma: f64, dt: f64) -> SpringState {
    let alpha = gamma / 4.0;
    let omega = root_factor(gamma) / 4.0;
    let decay = (-alpha * dt).exp();
    let (s, c) = (omega * dt).sin_cos();
    SpringState {
        y: decay * (y0 * c + (v0 + alpha * y0) / omega * s),
        v: decay * (v0 * c - (alpha * v0 + 0.25 * y0) / omega * s),
    }
}

/// Exact evolution under a constant control `level` (equilibrium at `−2·level`).
pub(crate) fn constant_force_evolution(
    start: SpringState,
    gamma: f64,
    level: f64,
    dt: f64,
) -> SpringState {
    let y_eq = -2.0 * level;
    let s = free_evolution_unchecked(start.y - y_eq, start.v, gamma, dt);
    SpringState {
        y: s.y + y_eq,
        v: s.v,
    }
}

/// Lower bound `π²Γ/T` obtained by ignoring the dynamics.
pub fn reference_cost(params: &SystemParams) -> f64 {
    PI * PI * params.gamma() / params.duration()
}

fn spring_rhs(gamma: f64, u: f64, x: &[f64; 2]) -> [f64; 2] {
    [x[1], -0.25 * x[0] - 0.5 * gamma * x[1] - 0.5 * u]
}

/// Propagates the oscillator through `signal` interval by interval.
///
/// Impulses act as `v ← v − m/2` at their instant; samples at breakpoints
/// hold the post-impulse state. `steps` sets the overall resolution; every
/// interval gets at least [`MIN_SAMPLES_PER_SEGMENT`] samples.
pub fn simulate_spring(
    signal: &ControlSignal,
    params: &SystemParams,
    steps: usize,
) -> Result<SpringTrajectory> {
    if steps < 100 {
        return Err(Error::TooFewSteps {
            steps,
            minimum: 100,
        });
    }
    let duration = params.duration();
    check_same_duration(signal, duration)?;
    let gamma = params.gamma();

    let breaks = signal.breakpoints();
    let mut state = SpringState::EQUILIBRIUM;
    state.v -= 0.5 * signal.impulse_total_at(0.0);
    let mut times = vec![0.0];
    let mut states = vec![state];
    let mut cost_integral = 0.0;

    for window in breaks.windows(2) {
        let (a, b) = (window[0], window[1]);
        let len = b - a;
        let mut n = ((steps as f64 * len / duration).ceil() as usize).max(MIN_SAMPLES_PER_SEGMENT);
        n += n % 2;
        let h = len / n as f64;
        let start = state;
        let mid = 0.5 * (a + b);
        let segment = signal.segment_at(mid);
        let shape = segment.map(|s| &s.shape);

        let mut ys = Vec::with_capacity(n + 1);
        ys.push(start.y);
        let mut current = start;
        for k in 1..=n {
            let t = if k == n { b } else { a + k as f64 * h };
            current = match shape {
                None | Some(SegmentShape::Zero) => {
                    free_evolution_unchecked(start.y, start.v, gamma, t - a)
                }
                Some(SegmentShape::Constant { level }) => {
                    constant_force_evolution(start, gamma, *level, t - a)
                }
                Some(SegmentShape::Polynomial { .. }) => {
                    let t_prev = a + (k - 1) as f64 * h;
                    let seg = segment.expect("polynomial shape comes from a segment");
                    let f = |tt: f64, x: &[f64; 2]| spring_rhs(gamma, seg.value(tt), x);
                    let x = rk4_step(&f, t_prev, &[current.y, current.v], t - t_prev);
                    SpringState { y: x[0], v: x[1] }
                }
            };
            ys.push(current.y);
            times.push(t);
            states.push(current);
        }
        cost_integral += simpson(&ys.iter().map(|y| y * y).collect::<Vec<_>>(), h);

        current.v -= 0.5 * signal.impulse_total_at(b);
        *states.last_mut().expect("non-empty") = current;
        state = current;
    }

    let end = state;
    Ok(SpringTrajectory {
        params: *params,
        times,
        states,
        cost: gamma * cost_integral,
        endpoint_residual: end.y.abs().max(end.v.abs()),
    })
}

pub(crate) fn check_same_duration(signal: &ControlSignal, duration: f64) -> Result<()> {
    if (signal.duration() - duration).abs() > 1e-12 * duration {
        return Err(Error::InvalidParameter(format!(
            "signal duration {} does not match system duration {duration}",
            signal.duration()
        )));
    }
    Ok(())
}
