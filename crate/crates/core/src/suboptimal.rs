//! Impulse / off / singular / off / impulse sequence where the oscillator
//! enters and leaves the singular arc with zero velocity.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::model::{check_gamma, root_factor, PulseSequence, SequenceKind, SystemParams};

/// Shortest duration for which a singular arc fits: `4π/√(4−Γ²)`.
pub fn min_singular_duration(gamma: f64) -> f64 {
    4.0 * PI / root_factor(gamma)
}

/// `arctan(√(4−Γ²)/Γ)`, continuous down to `Γ = 0` where it equals π/2.
fn turning_phase(gamma: f64) -> f64 {
    root_factor(gamma).atan2(gamma)
}

/// Time of the first velocity zero after a kick from rest.
pub fn turning_time(gamma: f64) -> f64 {
    4.0 * turning_phase(gamma) / root_factor(gamma)
}

/// Free-flight time from rest at `y_s` back to `y = 0`.
pub fn release_time(gamma: f64) -> f64 {
    4.0 * (PI - turning_phase(gamma)) / root_factor(gamma)
}

pub fn solve_suboptimal(params: &SystemParams) -> Result<PulseSequence> {
    let gamma = params.gamma();
    let duration = params.duration();
    check_gamma(gamma)?;
    let minimum = min_singular_duration(gamma);
    if duration <= minimum {
        return Err(Error::DurationTooShort { duration, minimum });
    }
    let w = root_factor(gamma);
    let phase = turning_phase(gamma);
    let t1 = 4.0 * phase / w;
    let t2 = duration - release_time(gamma);

    // u_s and v2 are proportional to v1, so the area condition is linear in v1.
    let us_per_v1 = 0.5 * (-gamma * phase / w).exp();
    let v2_per_v1 = (-PI * gamma / w).exp();
    let v1 = FRAC_PI_2 / (1.0 + (t2 - t1) * us_per_v1 + v2_per_v1);

    Ok(PulseSequence {
        params: *params,
        kind: SequenceKind::Suboptimal,
        v1,
        v2: v1 * v2_per_v1,
        v3: None,
        v4: None,
        u_s: v1 * us_per_v1,
        t1,
        t2,
    })
}
