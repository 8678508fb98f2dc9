//! Validation on the original three-level system: the real Bloch equations
//! driven by the mixing angle `θ(t) = ∫u`, with impulses as angle jumps.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::sig15;
use crate::integrate::rk4_step;
use crate::model::{
    control_area, ControlSignal, SpinStateXYZ, SystemParams, AREA_TOLERANCE, TARGET_AREA,
};
use crate::spring::check_same_duration;

pub const DEFAULT_STEPS: usize = 20_000;
pub const MIN_STEPS: usize = 1000;

/// Piecewise mixing angle reconstructed from a control signal.
/// Right-continuous at impulse instants.
#[derive(Debug, Clone)]
pub struct ThetaProfile {
    signal: ControlSignal,
    breaks: Vec<f64>,
    /// θ just after the jumps at each breakpoint.
    after_jump: Vec<f64>,
}

impl ThetaProfile {
    /// Builds the profile without checking the area condition.
    pub fn unchecked(signal: &ControlSignal) -> Self {
        let breaks = signal.breakpoints();
        let mut after_jump = Vec::with_capacity(breaks.len());
        let mut theta = 0.0;
        let mut prev = 0.0;
        for &b in &breaks {
            theta += signal.smooth_integral(prev, b) + signal.impulse_total_at(b);
            after_jump.push(theta);
            prev = b;
        }
        Self {
            signal: signal.clone(),
            breaks,
            after_jump,
        }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// θ inside interval `i` (between breakpoints `i` and `i+1`), continuous
    /// up to and including the closing breakpoint.
    pub fn in_interval(&self, i: usize, t: f64) -> f64 {
        let start = self.breaks[i];
        self.after_jump[i] + self.signal.smooth_integral(start, t)
    }

    pub fn at(&self, t: f64) -> f64 {
        let i = match self.breaks.iter().rposition(|&b| b <= t) {
            Some(i) => i,
            None => return 0.0,
        };
        self.in_interval(i, t)
    }

    pub fn final_angle(&self) -> f64 {
        *self.after_jump.last().expect("at least two breakpoints")
    }
}

pub fn theta_trajectory(signal: &ControlSignal) -> Result<ThetaProfile> {
    check_area(signal)?;
    Ok(ThetaProfile::unchecked(signal))
}

fn check_area(signal: &ControlSignal) -> Result<()> {
    let area = control_area(signal);
    if (area - TARGET_AREA).abs() > AREA_TOLERANCE {
        return Err(Error::AreaMismatch {
            area,
            tolerance: AREA_TOLERANCE,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinOptions {
    pub steps: usize,
    /// Extra free evolution after `T` at the final angle, reported separately.
    pub settle: Option<f64>,
    /// Enforce the π/2 area precondition; off only for diagnostics.
    pub check_area: bool,
}

impl Default for SpinOptions {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            settle: None,
            check_area: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpinTrajectory {
    pub params: SystemParams,
    pub times: Vec<f64>,
    pub states: Vec<SpinStateXYZ>,
    pub theta: Vec<f64>,
    pub populations: Vec<[f64; 3]>,
    /// `X(T)²`.
    pub efficiency: f64,
    /// `Γ∫₀ᵀ Y² dt`, integrated alongside the state.
    pub loss: f64,
    /// `|r²(T) − 1 + Γ∫Y²dt|`.
    pub norm_decay_residual: f64,
    pub settled_efficiency: Option<f64>,
}

impl SpinTrajectory {
    pub fn final_state(&self) -> SpinStateXYZ {
        *self.states.last().expect("trajectory is never empty")
    }

    /// Writes `t,theta,X,Y,Z,pop1,pop2,pop3` rows with a header.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "t,theta,X,Y,Z,pop1,pop2,pop3")?;
        for i in 0..self.times.len() {
            let s = &self.states[i];
            let p = &self.populations[i];
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                sig15(self.times[i]),
                sig15(self.theta[i]),
                sig15(s.x),
                sig15(s.y),
                sig15(s.z),
                sig15(p[0]),
                sig15(p[1]),
                sig15(p[2])
            )?;
        }
        Ok(())
    }
}

/// Bloch equations in the order (Z, Y, X) plus the loss integrand `Y²`.
fn bloch_rhs(gamma: f64, theta: f64, x: &[f64; 4]) -> [f64; 4] {
    let (s, c) = theta.sin_cos();
    let [z, y, xx, _] = *x;
    [
        0.5 * s * y,
        0.5 * (-s * z - gamma * y + c * xx),
        -0.5 * c * y,
        y * y,
    ]
}

pub fn simulate_spin(
    signal: &ControlSignal,
    params: &SystemParams,
    steps: usize,
) -> Result<SpinTrajectory> {
    simulate_spin_with(
        signal,
        params,
        &SpinOptions {
            steps,
            ..SpinOptions::default()
        },
    )
}

/// Fixed-step RK4 from the north pole. Every control breakpoint is a grid
/// point; θ jumps are applied between steps while the state stays continuous.
pub fn simulate_spin_with(
    signal: &ControlSignal,
    params: &SystemParams,
    opts: &SpinOptions,
) -> Result<SpinTrajectory> {
    if opts.steps < MIN_STEPS {
        return Err(Error::TooFewSteps {
            steps: opts.steps,
            minimum: MIN_STEPS,
        });
    }
    check_same_duration(signal, params.duration())?;
    let profile = if opts.check_area {
        theta_trajectory(signal)?
    } else {
        ThetaProfile::unchecked(signal)
    };
    let gamma = params.gamma();
    let duration = params.duration();
    let breaks = profile.breakpoints().to_vec();

    let mut x = [1.0, 0.0, 0.0, 0.0];
    let mut times = Vec::with_capacity(opts.steps + breaks.len());
    let mut raw: Vec<[f64; 4]> = Vec::with_capacity(opts.steps + breaks.len());
    let mut theta = Vec::with_capacity(opts.steps + breaks.len());
    times.push(0.0);
    raw.push(x);
    theta.push(profile.at(0.0));

    for (i, window) in breaks.windows(2).enumerate() {
        let (a, b) = (window[0], window[1]);
        let n = ((opts.steps as f64 * (b - a) / duration).round() as usize).max(1);
        let h = (b - a) / n as f64;
        let f = |t: f64, s: &[f64; 4]| bloch_rhs(gamma, profile.in_interval(i, t), s);
        for k in 0..n {
            let t = a + k as f64 * h;
            let t_next = if k + 1 == n { b } else { t + h };
            x = rk4_step(&f, t, &x, t_next - t);
            times.push(t_next);
            raw.push(x);
            theta.push(if k + 1 == n {
                profile.after_jump[i + 1]
            } else {
                profile.in_interval(i, t_next)
            });
        }
    }

    let end = x;
    let settled_efficiency = opts.settle.filter(|s| *s > 0.0).map(|settle| {
        let final_theta = profile.final_angle();
        let n = ((opts.steps as f64 * settle / duration).ceil() as usize).max(1);
        let h = settle / n as f64;
        let f = |_t: f64, s: &[f64; 4]| bloch_rhs(gamma, final_theta, s);
        let s = (0..n).fold(end, |s, k| rk4_step(&f, duration + k as f64 * h, &s, h));
        s[2] * s[2]
    });

    let states: Vec<SpinStateXYZ> = raw
        .iter()
        .map(|r| SpinStateXYZ {
            z: r[0],
            y: r[1],
            x: r[2],
        })
        .collect();
    let populations = states.iter().map(SpinStateXYZ::populations).collect();
    let final_state = *states.last().expect("non-empty");
    let loss = gamma * end[3];
    Ok(SpinTrajectory {
        params: *params,
        times,
        theta,
        populations,
        efficiency: final_state.x * final_state.x,
        loss,
        norm_decay_residual: (final_state.norm_sqr() - 1.0 + loss).abs(),
        settled_efficiency,
        states,
    })
}
