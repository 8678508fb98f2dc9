//! Bracketed scalar root finding for the switching-time equations.

/// Brent's method on `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign.
///
/// Stops once `|f| < f_tol` and the bracket is narrower than `x_tol`, or the
/// bracket cannot shrink further in floating point.
pub fn brent<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, x_tol: f64, f_tol: f64) -> Option<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
        return None;
    }
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.25 * x_tol;
        let half = 0.5 * (c - b);
        let width = (c - b).abs();
        if fb == 0.0
            || (width < x_tol && fb.abs() < f_tol)
            || half.abs() <= 2.0 * f64::EPSILON * b.abs()
        {
            return Some(b);
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * half * q - (tol * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(half) };
        fb = f(b);
        if !fb.is_finite() {
            return None;
        }
    }
    Some(b)
}

/// Subintervals of `[lo, hi]` (split into `samples` pieces) across which `f`
/// changes sign. Non-finite samples break the scan.
pub fn sign_changes<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, samples: usize) -> Vec<(f64, f64)> {
    let h = (hi - lo) / samples as f64;
    let mut out = Vec::new();
    let mut prev = (lo, f(lo));
    for k in 1..=samples {
        let x = if k == samples { hi } else { lo + k as f64 * h };
        let fx = f(x);
        if prev.1.is_finite() && fx.is_finite() && (prev.1 == 0.0 || prev.1 * fx < 0.0) {
            out.push((prev.0, x));
        }
        prev = (x, fx);
    }
    out
}
