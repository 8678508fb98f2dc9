//! Fixed-step integration helpers shared by the simulators.

/// One classical RK4 step for a small dense system.
pub fn rk4_step<const N: usize, F>(f: &F, t: f64, x: &[f64; N], h: f64) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k1 = f(t, x);
    let k2 = f(t + 0.5 * h, &axpy(x, 0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(x, 0.5 * h, &k2));
    let k4 = f(t + h, &axpy(x, h, &k3));
    let mut out = *x;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(x: &[f64; N], a: f64, y: &[f64; N]) -> [f64; N] {
    let mut out = *x;
    for i in 0..N {
        out[i] += a * y[i];
    }
    out
}

/// Integrates from `t0` to `t1` with `steps` equal RK4 steps (negative spans
/// integrate backward).
pub fn rk4_integrate<const N: usize, F>(
    f: &F,
    t0: f64,
    t1: f64,
    x0: [f64; N],
    steps: usize,
) -> [f64; N]
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let h = (t1 - t0) / steps as f64;
    (0..steps).fold(x0, |x, k| rk4_step(f, t0 + k as f64 * h, &x, h))
}

/// Composite Simpson rule on uniform samples; `values.len()` must be odd.
pub fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    debug_assert!(n >= 3 && n % 2 == 1);
    let inner: f64 = values[1..n - 1]
        .iter()
        .enumerate()
        .map(|(i, v)| if i % 2 == 0 { 4.0 * v } else { 2.0 * v })
        .sum();
    h / 3.0 * (values[0] + inner + values[n - 1])
}
