//! Shared domain types: system parameters, Bloch-vector frames and the
//! control-signal representation consumed by every solver and simulator.
//!
//! All times are in units of `1/Ω₀` and the decay rate in units of `Ω₀`.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Area every valid control must carry, so that the mixing angle ends at π/2.
pub const TARGET_AREA: f64 = FRAC_PI_2;

/// Tolerance for the area condition on a finished signal.
pub const AREA_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct SystemParams {
    gamma: f64,
    duration: f64,
}

#[derive(Deserialize)]
struct RawParams {
    gamma: f64,
    duration: f64,
}

impl TryFrom<RawParams> for SystemParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        SystemParams::new(raw.gamma, raw.duration)
    }
}

impl SystemParams {
    pub fn new(gamma: f64, duration: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidDuration(duration));
        }
        Ok(Self { gamma, duration })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }
}

/// Rejects decay rates outside the underdamped regime `0 <= gamma < 2`.
pub fn check_gamma(gamma: f64) -> Result<()> {
    if gamma.is_finite() && (0.0..2.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::GammaOutOfRange(gamma))
    }
}

/// `√(4 − Γ²)`, the factor that sets the oscillation frequency of the spring.
pub(crate) fn root_factor(gamma: f64) -> f64 {
    (4.0 - gamma * gamma).sqrt()
}

/// Real Bloch vector of the three-level system. `Z`, `Y` and `X` are the
/// amplitudes of the initial, intermediate and target states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinStateXYZ {
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Y")]
    pub y: f64,
    #[serde(rename = "Z")]
    pub z: f64,
}

impl SpinStateXYZ {
    pub const NORTH_POLE: SpinStateXYZ = SpinStateXYZ {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Populations of states |1⟩, |2⟩, |3⟩.
    pub fn populations(&self) -> [f64; 3] {
        [self.z * self.z, self.y * self.y, self.x * self.x]
    }
}

/// Bloch vector in the rotated frame: `bright` and `dark` superpositions of the
/// outer states plus the untouched intermediate component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarkBrightState {
    pub bright: f64,
    pub mid: f64,
    pub dark: f64,
}

impl DarkBrightState {
    pub fn norm_sqr(&self) -> f64 {
        self.bright * self.bright + self.mid * self.mid + self.dark * self.dark
    }
}

pub fn to_dark_bright(state: SpinStateXYZ, theta: f64) -> DarkBrightState {
    let (s, c) = theta.sin_cos();
    DarkBrightState {
        dark: state.z * c + state.x * s,
        mid: state.y,
        bright: state.z * s - state.x * c,
    }
}

/// Inverse of [`to_dark_bright`]. The (Z, X) block is a reflection, so it is
/// its own inverse.
pub fn from_dark_bright(state: DarkBrightState, theta: f64) -> SpinStateXYZ {
    let (s, c) = theta.sin_cos();
    SpinStateXYZ {
        z: state.dark * c + state.bright * s,
        y: state.mid,
        x: state.dark * s - state.bright * c,
    }
}

/// Displacement and velocity of the mapped oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SpringState {
    pub y: f64,
    pub v: f64,
}

impl SpringState {
    pub const EQUILIBRIUM: SpringState = SpringState { y: 0.0, v: 0.0 };
}

/// A δ-function component of the control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Impulse {
    pub time: f64,
    pub magnitude: f64,
}

impl Impulse {
    pub fn new(time: f64, magnitude: f64) -> Self {
        Self { time, magnitude }
    }
}

/// Smooth part of the control on one interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum SegmentShape {
    Zero,
    Constant {
        level: f64,
    },
    /// `u(t) = Σ coeffs[k] · ((t − center) / scale)^k`.
    Polynomial {
        coeffs: Vec<f64>,
        scale: f64,
        #[serde(default)]
        center: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    #[serde(flatten)]
    pub shape: SegmentShape,
}

impl Segment {
    pub fn zero(start: f64, end: f64) -> Self {
        Self {
            start,
            end,
            shape: SegmentShape::Zero,
        }
    }

    pub fn constant(start: f64, end: f64, level: f64) -> Self {
        Self {
            start,
            end,
            shape: SegmentShape::Constant { level },
        }
    }

    pub fn polynomial(start: f64, end: f64, coeffs: Vec<f64>, scale: f64) -> Self {
        Self::centered_polynomial(start, end, coeffs, 0.0, scale)
    }

    pub fn centered_polynomial(
        start: f64,
        end: f64,
        coeffs: Vec<f64>,
        center: f64,
        scale: f64,
    ) -> Self {
        Self {
            start,
            end,
            shape: SegmentShape::Polynomial {
                coeffs,
                scale,
                center,
            },
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        match &self.shape {
            SegmentShape::Zero => 0.0,
            SegmentShape::Constant { level } => *level,
            SegmentShape::Polynomial {
                coeffs,
                scale,
                center,
            } => horner(coeffs, (t - center) / scale),
        }
    }

    /// Exact `∫_a^b u dt` for `start <= a <= b <= end`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match &self.shape {
            SegmentShape::Zero => 0.0,
            SegmentShape::Constant { level } => level * (b - a),
            SegmentShape::Polynomial {
                coeffs,
                scale,
                center,
            } => {
                let antiderivative = |x: f64| {
                    x * coeffs
                        .iter()
                        .enumerate()
                        .rev()
                        .fold(0.0, |acc, (k, c)| acc * x + c / (k + 1) as f64)
                };
                scale
                    * (antiderivative((b - center) / scale) - antiderivative((a - center) / scale))
            }
        }
    }

    pub fn is_smooth_nonnegative(&self) -> bool {
        match &self.shape {
            SegmentShape::Zero => true,
            SegmentShape::Constant { level } => *level >= 0.0,
            SegmentShape::Polynomial { .. } => false,
        }
    }
}

pub(crate) fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Control `u(t)` on `[0, duration]`: impulses plus a piecewise smooth part.
/// Time not covered by a segment carries `u = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSignal")]
pub struct ControlSignal {
    duration: f64,
    impulses: Vec<Impulse>,
    segments: Vec<Segment>,
}

#[derive(Deserialize)]
struct RawSignal {
    duration: f64,
    #[serde(default)]
    impulses: Vec<Impulse>,
    #[serde(default)]
    segments: Vec<Segment>,
}

impl TryFrom<RawSignal> for ControlSignal {
    type Error = Error;

    fn try_from(raw: RawSignal) -> Result<Self> {
        ControlSignal::new(raw.duration, raw.impulses, raw.segments)
    }
}

impl ControlSignal {
    /// Builds a signal, merging coincident impulses and rejecting overlapping
    /// or out-of-range segments. Empty segments are dropped.
    pub fn new(
        duration: f64,
        mut impulses: Vec<Impulse>,
        mut segments: Vec<Segment>,
    ) -> Result<Self> {
        if !(duration.is_finite() && duration > 0.0) {
            return Err(Error::InvalidDuration(duration));
        }
        let eps = 1e-12 * duration;
        for imp in &impulses {
            if !imp.time.is_finite() || !imp.magnitude.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite impulse {imp:?}"
                )));
            }
            if imp.time < -eps || imp.time > duration + eps {
                return Err(Error::InvalidParameter(format!(
                    "impulse at t = {} outside [0, {duration}]",
                    imp.time
                )));
            }
        }
        impulses.sort_by(|a, b| a.time.total_cmp(&b.time));
        let mut merged: Vec<Impulse> = Vec::with_capacity(impulses.len());
        for imp in impulses {
            let time = imp.time.clamp(0.0, duration);
            match merged.last_mut() {
                Some(last) if (last.time - time).abs() <= eps => last.magnitude += imp.magnitude,
                _ => merged.push(Impulse { time, ..imp }),
            }
        }

        segments.retain(|s| s.end > s.start);
        segments.sort_by(|a, b| a.start.total_cmp(&b.start));
        for s in &segments {
            if !(s.start.is_finite() && s.end.is_finite()) {
                return Err(Error::MalformedSegment("non-finite boundary".into()));
            }
            if s.start < -eps || s.end > duration + eps {
                return Err(Error::MalformedSegment(format!(
                    "segment [{}, {}] outside [0, {duration}]",
                    s.start, s.end
                )));
            }
            if let SegmentShape::Polynomial {
                coeffs,
                scale,
                center,
            } = &s.shape
            {
                if !(scale.is_finite() && *scale > 0.0 && center.is_finite())
                    || coeffs.iter().any(|c| !c.is_finite())
                {
                    return Err(Error::MalformedSegment("bad polynomial segment".into()));
                }
            }
            if let SegmentShape::Constant { level } = &s.shape {
                if !level.is_finite() {
                    return Err(Error::MalformedSegment("non-finite level".into()));
                }
            }
        }
        for pair in segments.windows(2) {
            if pair[1].start < pair[0].end - eps {
                return Err(Error::MalformedSegment(format!(
                    "segments [{}, {}] and [{}, {}] overlap",
                    pair[0].start, pair[0].end, pair[1].start, pair[1].end
                )));
            }
        }
        for s in &mut segments {
            s.start = s.start.max(0.0);
            s.end = s.end.min(duration);
        }
        Ok(Self {
            duration,
            impulses: merged,
            segments,
        })
    }

    /// A signal with no control at all.
    pub fn zero(duration: f64) -> Result<Self> {
        Self::new(duration, Vec::new(), Vec::new())
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn impulses(&self) -> &[Impulse] {
        &self.impulses
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn segment_at(&self, t: f64) -> Option<&Segment> {
        self.segments.iter().find(|s| s.start <= t && t < s.end)
    }

    /// Smooth part of `u` at `t` (impulses excluded).
    pub fn smooth_value(&self, t: f64) -> f64 {
        self.segment_at(t).map_or(0.0, |s| s.value(t))
    }

    /// Exact `∫_a^b u_smooth dt`.
    pub fn smooth_integral(&self, a: f64, b: f64) -> f64 {
        self.segments
            .iter()
            .map(|s| {
                let lo = s.start.max(a);
                let hi = s.end.min(b);
                if hi > lo {
                    s.integral(lo, hi)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Sorted, de-duplicated list of every time where the control changes
    /// form: 0, T, impulse instants and segment boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0, self.duration];
        pts.extend(self.impulses.iter().map(|i| i.time));
        for s in &self.segments {
            pts.push(s.start);
            pts.push(s.end);
        }
        pts.sort_by(f64::total_cmp);
        let eps = 1e-12 * self.duration;
        pts.dedup_by(|a, b| (*a - *b).abs() <= eps);
        pts
    }

    pub fn impulse_total_at(&self, t: f64) -> f64 {
        let eps = 1e-12 * self.duration;
        self.impulses
            .iter()
            .filter(|i| (i.time - t).abs() <= eps)
            .map(|i| i.magnitude)
            .sum()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.impulses.iter().all(|i| i.magnitude >= 0.0)
            && self.segments.iter().all(Segment::is_smooth_nonnegative)
    }
}

/// `Σ impulses + ∫₀ᵀ u_smooth dt`.
pub fn control_area(signal: &ControlSignal) -> f64 {
    let impulses: f64 = signal.impulses.iter().map(|i| i.magnitude).sum();
    impulses + signal.smooth_integral(0.0, signal.duration)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    Suboptimal,
    Optimal,
}

/// Impulse/singular sequence produced by the bang-singular solvers.
///
/// Suboptimal: `v1` at 0, constant `u_s` on `[t1, t2]`, `v2` at `T`.
/// Optimal: `v1` at 0, `v2` at `t1`, `u_s` on `[t1, t2]`, `v3` at `t2`, `v4` at `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "SequenceRepr", try_from = "SequenceRepr")]
pub struct PulseSequence {
    pub params: SystemParams,
    pub kind: SequenceKind,
    pub v1: f64,
    pub v2: f64,
    pub v3: Option<f64>,
    pub v4: Option<f64>,
    pub u_s: f64,
    pub t1: f64,
    pub t2: f64,
}

#[derive(Serialize, Deserialize)]
struct SequenceRepr {
    gamma: f64,
    duration: f64,
    kind: SequenceKind,
    v1: f64,
    v2: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    v3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    v4: Option<f64>,
    u_s: f64,
    t1: f64,
    t2: f64,
}

impl From<PulseSequence> for SequenceRepr {
    fn from(s: PulseSequence) -> Self {
        SequenceRepr {
            gamma: s.params.gamma(),
            duration: s.params.duration(),
            kind: s.kind,
            v1: s.v1,
            v2: s.v2,
            v3: s.v3,
            v4: s.v4,
            u_s: s.u_s,
            t1: s.t1,
            t2: s.t2,
        }
    }
}

impl TryFrom<SequenceRepr> for PulseSequence {
    type Error = Error;

    fn try_from(r: SequenceRepr) -> Result<Self> {
        Ok(PulseSequence {
            params: SystemParams::new(r.gamma, r.duration)?,
            kind: r.kind,
            v1: r.v1,
            v2: r.v2,
            v3: r.v3,
            v4: r.v4,
            u_s: r.u_s,
            t1: r.t1,
            t2: r.t2,
        })
    }
}

impl PulseSequence {
    /// Impulses in time order, with their instants.
    pub fn impulses(&self) -> Vec<Impulse> {
        let t_end = self.params.duration();
        match self.kind {
            SequenceKind::Suboptimal => {
                vec![Impulse::new(0.0, self.v1), Impulse::new(t_end, self.v2)]
            }
            SequenceKind::Optimal => {
                let mut out = vec![Impulse::new(0.0, self.v1), Impulse::new(self.t1, self.v2)];
                out.extend(self.v3.map(|v| Impulse::new(self.t2, v)));
                out.extend(self.v4.map(|v| Impulse::new(t_end, v)));
                out
            }
        }
    }

    pub fn to_signal(&self) -> Result<ControlSignal> {
        ControlSignal::new(
            self.params.duration(),
            self.impulses(),
            vec![Segment::constant(self.t1, self.t2, self.u_s)],
        )
    }

    /// `Σ v_i + (t2 − t1)·u_s`.
    pub fn area(&self) -> f64 {
        self.v1
            + self.v2
            + self.v3.unwrap_or(0.0)
            + self.v4.unwrap_or(0.0)
            + (self.t2 - self.t1) * self.u_s
    }

    /// Singular-arc displacement `y_s = −2 u_s`.
    pub fn singular_displacement(&self) -> f64 {
        -2.0 * self.u_s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dark_bright_identity_at_zero_angle() {
        let s = to_dark_bright(SpinStateXYZ::NORTH_POLE, 0.0);
        assert_eq!((s.bright, s.mid, s.dark), (0.0, 0.0, 1.0));
    }

    #[test]
    fn target_maps_to_dark_state_at_final_angle() {
        let s = to_dark_bright(
            SpinStateXYZ {
                x: 1.0,
                y: 0.0,
                z: 0.0,
            },
            FRAC_PI_2,
        );
        assert_abs_diff_eq!(s.bright, 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(s.mid, 0.0);
        assert_abs_diff_eq!(s.dark, 1.0, epsilon = 1e-16);
    }

    #[test]
    fn dark_bright_matches_rotation_matrix() {
        let src = SpinStateXYZ {
            x: 0.3,
            y: 0.1,
            z: 0.9,
        };
        let th: f64 = 0.7;
        // rows act on (Z, Y, X) and produce (dark, mid, bright)
        let m = [
            [th.cos(), 0.0, th.sin()],
            [0.0, 1.0, 0.0],
            [th.sin(), 0.0, -th.cos()],
        ];
        let v = [src.z, src.y, src.x];
        let out: Vec<f64> = m
            .iter()
            .map(|r| r.iter().zip(&v).map(|(a, b)| a * b).sum())
            .collect();
        let s = to_dark_bright(src, th);
        assert_abs_diff_eq!(s.dark, out[0], epsilon = 1e-15);
        assert_abs_diff_eq!(s.mid, out[1], epsilon = 1e-15);
        assert_abs_diff_eq!(s.bright, out[2], epsilon = 1e-15);
        assert_abs_diff_eq!(s.norm_sqr(), src.norm_sqr(), epsilon = 1e-15);
    }

    #[test]
    fn empty_signal_has_zero_area() {
        assert_eq!(control_area(&ControlSignal::zero(5.0).unwrap()), 0.0);
    }

    #[test]
    fn single_impulse_area() {
        let s = ControlSignal::new(3.0, vec![Impulse::new(0.0, FRAC_PI_2)], vec![]).unwrap();
        assert_eq!(control_area(&s), FRAC_PI_2);
    }

    #[test]
    fn coincident_impulses_merge() {
        let s = ControlSignal::new(
            10.0,
            vec![
                Impulse::new(4.0, 0.1),
                Impulse::new(0.0, 0.2),
                Impulse::new(4.0, 0.3),
            ],
            vec![],
        )
        .unwrap();
        assert_eq!(s.impulses().len(), 2);
        assert_abs_diff_eq!(s.impulses()[1].magnitude, 0.4, epsilon = 1e-15);
    }

    #[test]
    fn overlapping_segments_rejected() {
        let err = ControlSignal::new(
            10.0,
            vec![],
            vec![Segment::constant(1.0, 5.0, 0.1), Segment::zero(4.0, 6.0)],
        )
        .unwrap_err();
        assert!(matches!(err, Error::MalformedSegment(_)));
    }

    #[test]
    fn polynomial_segment_integral_is_exact() {
        // u = 1 + 2 (t/2) + 3 (t/2)^2 on [0, 2]: ∫ = 2 + 2 + 2
        let seg = Segment::polynomial(0.0, 2.0, vec![1.0, 2.0, 3.0], 2.0);
        assert_abs_diff_eq!(seg.integral(0.0, 2.0), 6.0, epsilon = 1e-14);
    }

    #[test]
    fn params_validation() {
        assert!(SystemParams::new(2.0, 1.0).is_err());
        assert!(SystemParams::new(-0.1, 1.0).is_err());
        assert!(SystemParams::new(0.1, 0.0).is_err());
        assert!(SystemParams::new(0.0, 1.0).is_ok());
    }

    #[test]
    fn sequence_json_omits_absent_impulses() {
        let seq = PulseSequence {
            params: SystemParams::new(0.1, 20.0).unwrap(),
            kind: SequenceKind::Suboptimal,
            v1: 0.2,
            v2: 0.1,
            v3: None,
            v4: None,
            u_s: 0.05,
            t1: 3.0,
            t2: 17.0,
        };
        let json = serde_json::to_value(seq).unwrap();
        let obj = json.as_object().unwrap();
        let mut keys: Vec<_> = obj.keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            ["duration", "gamma", "kind", "t1", "t2", "u_s", "v1", "v2"]
        );
        assert_eq!(obj["kind"], "suboptimal");
        let back: PulseSequence = serde_json::from_value(json).unwrap();
        assert_eq!(back, seq);
    }
}
