//! Optimal bang-singular sequence: four impulses around a singular plateau,
//! with switching times fixed by the vanishing of the switching function.
//!
//! The normalized multipliers obey
//! `λ̃_y' = λ̃_v/4 − y/(2 y_s)`, `λ̃_v' = −λ̃_y + (Γ/2) λ̃_v`
//! and sit at `(Γ, 2)` on the singular arc. Requiring `λ̃_v = 2` again right
//! after the first impulse (and right before the last) gives one
//! transcendental equation for each switching time.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::rk4_step;
use crate::model::{
    check_gamma, root_factor, PulseSequence, SequenceKind, SpringState, SystemParams,
};
use crate::roots::{brent, sign_changes};
use crate::spring::{constant_force_evolution, free_evolution_unchecked};
use crate::suboptimal::{release_time, turning_time};

const SCAN_SAMPLES: usize = 2000;
const ROOT_X_TOL: f64 = 1e-10;
const ROOT_F_TOL: f64 = 1e-12;
/// A root of the quadratic form is kept only if the first-order form also
/// vanishes there; this discards pole crossings and the spurious branch.
const BRANCH_TOL: f64 = 1e-8;
const ADJOINT_STEPS: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdjointState {
    pub lam_y: f64,
    pub lam_v: f64,
}

impl AdjointState {
    /// Multiplier values on the singular arc.
    pub fn singular(gamma: f64) -> Self {
        Self {
            lam_y: gamma,
            lam_v: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularVerificationReport {
    pub lam_v_at_0: f64,
    #[serde(rename = "lam_v_at_T")]
    pub lam_v_at_end: f64,
    pub max_phi_violation: f64,
    pub singular_y_deviation: f64,
}

/// Which residual located the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualForm {
    /// `cosh(Γτ/4) − (2A − √(B⁴ + 4B² − A²B²))/(A² − B²)`.
    Quadratic,
    /// `A cosh(Γτ/4) + B sinh(Γτ/4) − 2`, used where the quadratic form has no
    /// admissible root (its denominator changes sign for larger Γ).
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SwitchRoot {
    pub time: f64,
    /// Residual of `form` at the root.
    pub residual: f64,
    pub form: ResidualForm,
    /// More than one admissible root was found; the smallest was kept.
    pub multiple_roots: bool,
}

/// Side of the singular arc an off-interval is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcSide {
    /// `[0, t1]`, propagated backward from `t1`.
    Entry,
    /// `[t2, T]`, propagated forward from `t2`.
    Exit,
}

/// `(A, B)` coefficients of the closed-form multiplier for an off-interval of
/// length `interval`.
pub fn adjoint_coefficients(gamma: f64, interval: f64, side: ArcSide) -> Result<(f64, f64)> {
    let w = root_factor(gamma);
    let phase = w * interval / 4.0;
    let (s, c) = phase.sin_cos();
    if s.abs() < 1e-12 || gamma == 0.0 {
        return Err(Error::SingularCoefficient(match side {
            ArcSide::Entry => "B1",
            ArcSide::Exit => "B2",
        }));
    }
    let (s2, c2) = (2.0 * phase).sin_cos();
    let g2 = gamma * gamma;
    let (a, cross) = match side {
        ArcSide::Entry => (gamma * s / w + c, -w * gamma * s2),
        ArcSide::Exit => (c - gamma * s / w, w * gamma * s2),
    };
    let b = (cross + g2 * c2 - 3.0 * g2 + 8.0) / (2.0 * s * gamma * w);
    Ok((a, b))
}

/// Closed-form `λ̃_v` at the far end of an off-interval of length `interval`.
pub fn multiplier_at_far_end(gamma: f64, interval: f64, side: ArcSide) -> Result<f64> {
    let (a, b) = adjoint_coefficients(gamma, interval, side)?;
    let x = gamma * interval / 4.0;
    Ok(a * x.cosh() + b * x.sinh())
}

/// Residual of the transcendental switching equation in its solved-for-cosh form.
pub fn quadratic_residual(gamma: f64, interval: f64, side: ArcSide) -> f64 {
    match adjoint_coefficients(gamma, interval, side) {
        Ok((a, b)) => {
            let disc = -a * a * b * b + b.powi(4) + 4.0 * b * b;
            (gamma * interval / 4.0).cosh() - (2.0 * a - disc.sqrt()) / (a * a - b * b)
        }
        Err(_) => f64::NAN,
    }
}

/// `λ̃_v(far end) − 2`.
pub fn linear_residual(gamma: f64, interval: f64, side: ArcSide) -> f64 {
    multiplier_at_far_end(gamma, interval, side).map_or(f64::NAN, |l| l - 2.0)
}

fn check_open_gamma(gamma: f64) -> Result<()> {
    check_gamma(gamma)?;
    if gamma == 0.0 {
        return Err(Error::InvalidParameter(
            "the switching equations need a positive decay rate".into(),
        ));
    }
    Ok(())
}

/// Smallest root of the switching equation for an off-interval inside the
/// open bracket `(lo, hi)`.
fn solve_interval(
    gamma: f64,
    lo: f64,
    hi: f64,
    side: ArcSide,
    what: &'static str,
) -> Result<SwitchRoot> {
    let pad = 1e-9 * hi;
    let (a, b) = (lo + pad, hi - pad);
    for form in [ResidualForm::Quadratic, ResidualForm::Linear] {
        let residual = |x: f64| match form {
            ResidualForm::Quadratic => quadratic_residual(gamma, x, side),
            ResidualForm::Linear => linear_residual(gamma, x, side),
        };
        let roots: Vec<f64> = sign_changes(&residual, a, b, SCAN_SAMPLES)
            .into_iter()
            .filter_map(|(l, h)| brent(residual, l, h, ROOT_X_TOL, ROOT_F_TOL))
            .filter(|&x| linear_residual(gamma, x, side).abs() < BRANCH_TOL)
            .collect();
        if let Some(&time) = roots.first() {
            return Ok(SwitchRoot {
                time,
                residual: residual(time),
                form,
                multiple_roots: roots.len() > 1,
            });
        }
    }
    Err(Error::NoSignChange { what, lo, hi })
}

/// Entry time of the singular arc.
///
/// Searched between the velocity turning point and `4π/√(4−Γ²)`, where the
/// coefficient `B1` blows up.
pub fn solve_switch_time_t1(gamma: f64) -> Result<SwitchRoot> {
    check_open_gamma(gamma)?;
    let hi = 4.0 * std::f64::consts::PI / root_factor(gamma);
    solve_interval(gamma, turning_time(gamma), hi, ArcSide::Entry, "t1")
}

/// Exit time of the singular arc, found through the interval `T − t2`.
pub fn solve_switch_time_t2(gamma: f64, duration: f64) -> Result<SwitchRoot> {
    check_open_gamma(gamma)?;
    let hi = 4.0 * std::f64::consts::PI / root_factor(gamma);
    let tail = solve_interval(gamma, release_time(gamma), hi, ArcSide::Exit, "t2")?;
    let t1 = solve_switch_time_t1(gamma)?.time;
    let t2 = duration - tail.time;
    if t2 <= t1 {
        return Err(Error::SwitchOrdering { t1, t2 });
    }
    Ok(SwitchRoot { time: t2, ..tail })
}

/// Closed-form `(λ̃_v(0), λ̃_v(T))` for given switching times.
pub fn adjoint_boundary_values(gamma: f64, t1: f64, t2: f64, duration: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    Ok((
        multiplier_at_far_end(gamma, t1, ArcSide::Entry)?,
        multiplier_at_far_end(gamma, duration - t2, ArcSide::Exit)?,
    ))
}

/// Builds the five-element sequence for arbitrary switching times: impulses
/// and singular level as multiples of `v1`, then `v1` from the area condition.
pub fn optimal_from_switch_times(params: &SystemParams, t1: f64, t2: f64) -> Result<PulseSequence> {
    let gamma = params.gamma();
    let duration = params.duration();
    if !(0.0 < t1 && t1 < t2 && t2 < duration) {
        return Err(Error::SwitchOrdering { t1, t2 });
    }
    let w = root_factor(gamma);
    let phase1 = w * t1 / 4.0;
    let tail = w * (duration - t2) / 4.0;
    let sin_tail = tail.sin();
    if sin_tail.abs() < 1e-12 {
        return Err(Error::SingularCoefficient("v3"));
    }
    let (s1, c1) = phase1.sin_cos();
    let entry_decay = (-gamma * phase1 / w).exp();
    let exit_decay = (-gamma * tail / w).exp();

    let v2 = entry_decay * (gamma * s1 / w - c1);
    let u_s = entry_decay * s1 / w;
    let v3 = -u_s * (w * tail.cos() / sin_tail + gamma);
    let v4 = w * u_s * exit_decay / sin_tail;
    let v1 = FRAC_PI_2 / (1.0 + v2 + v3 + v4 + (t2 - t1) * u_s);

    let seq = PulseSequence {
        params: *params,
        kind: SequenceKind::Optimal,
        v1,
        v2: v1 * v2,
        v3: Some(v1 * v3),
        v4: Some(v1 * v4),
        u_s: v1 * u_s,
        t1,
        t2,
    };
    for (name, value) in [
        ("v1", seq.v1),
        ("v2", seq.v2),
        ("v3", v1 * v3),
        ("v4", v1 * v4),
        ("u_s", seq.u_s),
    ] {
        if value.is_nan() || value <= 0.0 {
            return Err(Error::NegativeElement { name, value });
        }
    }
    Ok(seq)
}

pub fn solve_optimal(params: &SystemParams) -> Result<PulseSequence> {
    let t1 = solve_switch_time_t1(params.gamma())?.time;
    let t2 = solve_switch_time_t2(params.gamma(), params.duration())?.time;
    optimal_from_switch_times(params, t1, t2)
}

fn adjoint_rhs(gamma: f64, ratio: f64, x: &[f64; 2]) -> [f64; 2] {
    [0.25 * x[1] - 0.5 * ratio, -x[0] + 0.5 * gamma * x[1]]
}

/// Integrates the multipliers with RK4 from `(Γ, 2)` at `from` to `to`, with
/// the displacement `y(t)` supplied by `y_of`. Returns the end value and the
/// smallest `λ̃_v` seen along the way.
pub fn integrate_adjoint<F: Fn(f64) -> f64>(
    gamma: f64,
    y_of: F,
    y_s: f64,
    from: f64,
    to: f64,
    steps: usize,
) -> (AdjointState, f64) {
    let start = AdjointState::singular(gamma);
    let f = |t: f64, x: &[f64; 2]| adjoint_rhs(gamma, y_of(t) / y_s, x);
    let h = (to - from) / steps as f64;
    let mut x = [start.lam_y, start.lam_v];
    let mut min_lam_v = x[1];
    for k in 0..steps {
        x = rk4_step(&f, from + k as f64 * h, &x, h);
        min_lam_v = min_lam_v.min(x[1]);
    }
    (
        AdjointState {
            lam_y: x[0],
            lam_v: x[1],
        },
        min_lam_v,
    )
}

/// Checks the necessary conditions along a bang-singular sequence by direct
/// integration of the multipliers against the exact spring motion.
pub fn verify_singular_conditions(seq: &PulseSequence) -> SingularVerificationReport {
    let gamma = seq.params.gamma();
    let duration = seq.params.duration();
    let y_s = seq.singular_displacement();
    let (v2_at_t1, v3_at_t2) = match seq.kind {
        SequenceKind::Optimal => (seq.v2, seq.v3.unwrap_or(0.0)),
        SequenceKind::Suboptimal => (0.0, 0.0),
    };

    let launch = SpringState {
        y: 0.0,
        v: -0.5 * seq.v1,
    };
    let before_arc = free_evolution_unchecked(launch.y, launch.v, gamma, seq.t1);
    let on_arc = SpringState {
        y: before_arc.y,
        v: before_arc.v - 0.5 * v2_at_t1,
    };
    let arc_len = seq.t2 - seq.t1;
    let after_arc = constant_force_evolution(on_arc, gamma, seq.u_s, arc_len.max(0.0));
    let release = SpringState {
        y: after_arc.y,
        v: after_arc.v - 0.5 * v3_at_t2,
    };

    let y_entry = |t: f64| free_evolution_unchecked(launch.y, launch.v, gamma, t).y;
    let y_exit = |t: f64| free_evolution_unchecked(release.y, release.v, gamma, t - seq.t2).y;

    let (at_0, min_entry) = integrate_adjoint(gamma, y_entry, y_s, seq.t1, 0.0, ADJOINT_STEPS);
    let (at_end, min_exit) = integrate_adjoint(gamma, y_exit, y_s, seq.t2, duration, ADJOINT_STEPS);

    let singular_y_deviation = if arc_len > 0.0 {
        (0..=ADJOINT_STEPS)
            .map(|k| {
                let dt = arc_len * k as f64 / ADJOINT_STEPS as f64;
                (constant_force_evolution(on_arc, gamma, seq.u_s, dt).y - y_s).abs()
            })
            .fold(0.0, f64::max)
    } else {
        0.0
    };

    SingularVerificationReport {
        lam_v_at_0: at_0.lam_v,
        lam_v_at_end: at_end.lam_v,
        max_phi_violation: (2.0 - min_entry.min(min_exit)).max(0.0),
        singular_y_deviation,
    }
}
