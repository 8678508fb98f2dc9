#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use stirap_core::integrate::rk4_step;
use stirap_core::polynomial::{kkt_system, DEPENDENT};
use stirap_core::{to_dark_bright, ControlSignal, DarkBrightState, SpinTrajectory, SystemParams};

/// Float LU solve of the KKT system; returns `a0..aN` in units of `π/T`.
pub fn float_kkt_coefficients(degree: usize) -> Vec<f64> {
    let (k, rhs) = kkt_system(degree).unwrap();
    let size = k.len();
    let m = DMatrix::from_fn(size, size, |i, j| k[i][j].to_f64().unwrap());
    let b = DVector::from_iterator(size, rhs.iter().map(|r| r.to_f64().unwrap()));
    let lu = m.clone().full_piv_lu();
    let mut x = lu.solve(&b).expect("KKT matrix is nonsingular");
    for _ in 0..3 {
        let r = &b - &m * &x;
        x += lu.solve(&r).expect("KKT matrix is nonsingular");
    }
    x.iter().take(size - DEPENDENT).copied().collect()
}

fn dark_bright_rhs(gamma: f64, u: f64, s: &[f64; 3]) -> [f64; 3] {
    let [z, y, x] = *s;
    [-u * x, -0.5 * gamma * y - 0.5 * x, u * z + 0.5 * y]
}

/// Integrates the dark/bright-frame equations directly on the same grid as
/// `traj` and returns the largest deviation from the transformed XYZ states.
pub fn frame_discrepancy(
    signal: &ControlSignal,
    params: &SystemParams,
    traj: &SpinTrajectory,
) -> f64 {
    let gamma = params.gamma();
    let rotate = |s: [f64; 3], m: f64| {
        let (sn, cs) = m.sin_cos();
        [s[0] * cs - s[2] * sn, s[1], s[0] * sn + s[2] * cs]
    };
    // dark = 1 at the north pole with θ = 0
    let mut s = rotate([1.0, 0.0, 0.0], signal.impulse_total_at(0.0));
    let mut worst = 0.0f64;
    let mut compare = |i: usize, s: &[f64; 3]| {
        let db: DarkBrightState = to_dark_bright(traj.states[i], traj.theta[i]);
        let d = (db.dark - s[0])
            .abs()
            .max((db.mid - s[1]).abs())
            .max((db.bright - s[2]).abs());
        worst = worst.max(d);
    };
    compare(0, &s);
    let mut idx = 0;
    let breaks = signal.breakpoints();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut t = a;
        let seg = signal.segment_at(0.5 * (a + b));
        let f =
            |tt: f64, x: &[f64; 3]| dark_bright_rhs(gamma, seg.map_or(0.0, |sg| sg.value(tt)), x);
        while idx + 1 < traj.times.len() && traj.times[idx + 1] <= b {
            let t_next = traj.times[idx + 1];
            s = rk4_step(&f, t, &s, t_next - t);
            t = t_next;
            idx += 1;
            if t_next == b {
                s = rotate(s, signal.impulse_total_at(b));
            }
            compare(idx, &s);
        }
    }
    worst
}
