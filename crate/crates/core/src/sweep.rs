//! Duration sweeps and switching-time contour grids.
//!
//! Jobs are evaluated independently (in parallel with the `parallel`
//! feature) and collected in job order, so output never depends on the
//! worker count.

use std::io::{self, Write};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::sig15;
use crate::method::Method;
use crate::model::SystemParams;
use crate::optimal::optimal_from_switch_times;
use crate::spin::simulate_spin;
use crate::spring::simulate_spring;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub method: String,
    pub gamma: f64,
    pub duration: f64,
    pub efficiency: Option<f64>,
    pub spring_cost: Option<f64>,
    /// `None` when valid, otherwise the error code.
    pub error: Option<String>,
}

impl SweepRecord {
    pub fn valid(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourRecord {
    pub t1: f64,
    pub t2: f64,
    pub efficiency: Option<f64>,
    pub error: Option<String>,
}

impl ContourRecord {
    pub fn valid(&self) -> bool {
        self.error.is_none()
    }
}

/// Uniform grid `start:end:count`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl Grid {
    pub fn new(start: f64, end: f64, count: usize) -> Self {
        Self { start, end, count }
    }

    /// Grid centred on `center` spanning `±half_width`.
    pub fn around(center: f64, half_width: f64, count: usize) -> Self {
        Self::new(center - half_width, center + half_width, count)
    }

    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => Vec::new(),
            1 => vec![self.start],
            n => (0..n)
                .map(|k| self.start + (self.end - self.start) * k as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("grid '{s}' is not of the form a:b:n"));
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(bad());
        };
        let start: f64 = a.trim().parse().map_err(|_| bad())?;
        let end: f64 = b.trim().parse().map_err(|_| bad())?;
        let count: usize = n.trim().parse().map_err(|_| bad())?;
        if !(start.is_finite() && end.is_finite()) || count == 0 {
            return Err(bad());
        }
        Ok(Grid { start, end, count })
    }
}

/// Durations `t_min, t_min + t_step, …` up to `t_max` inclusive.
pub fn duration_grid(t_min: f64, t_max: f64, t_step: f64) -> Result<Vec<f64>> {
    if !(t_min > 0.0
        && t_step > 0.0
        && t_min.is_finite()
        && t_max.is_finite()
        && t_step.is_finite())
    {
        return Err(Error::InvalidParameter(format!(
            "need t_min > 0 and t_step > 0, got t_min = {t_min}, t_step = {t_step}"
        )));
    }
    let count = ((t_max - t_min) / t_step + 1e-9).floor();
    if count < 0.0 {
        return Ok(Vec::new());
    }
    Ok((0..=count as usize)
        .map(|k| t_min + k as f64 * t_step)
        .collect())
}

#[cfg(feature = "parallel")]
fn map_jobs<J: Sync, R: Send>(jobs: &[J], f: impl Fn(&J) -> R + Sync + Send) -> Vec<R> {
    use rayon::prelude::*;
    jobs.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_jobs<J: Sync, R: Send>(jobs: &[J], f: impl Fn(&J) -> R + Sync + Send) -> Vec<R> {
    jobs.iter().map(f).collect()
}

/// Efficiency and spring cost of one (method, Γ, T) combination.
pub fn evaluate(method: Method, gamma: f64, duration: f64, steps: usize) -> SweepRecord {
    let outcome = (|| -> Result<(f64, f64)> {
        let params = SystemParams::new(gamma, duration)?;
        let signal = method.signal(&params)?;
        let spin = simulate_spin(&signal, &params, steps)?;
        let spring = simulate_spring(&signal, &params, steps)?;
        Ok((spin.efficiency, spring.cost))
    })();
    let (efficiency, spring_cost, error) = match outcome {
        Ok((e, c)) => (Some(e), Some(c), None),
        Err(e) => (None, None, Some(e.code().to_string())),
    };
    SweepRecord {
        method: method.to_string(),
        gamma,
        duration,
        efficiency,
        spring_cost,
        error,
    }
}

/// Every (method, Γ, T) combination, ordered by method (as listed), then Γ,
/// then T. Structurally invalid combinations are kept with an error code.
pub fn run_sweep(
    gammas: &[f64],
    t_min: f64,
    t_max: f64,
    t_step: f64,
    methods: &[Method],
    steps: usize,
) -> Result<Vec<SweepRecord>> {
    let durations = duration_grid(t_min, t_max, t_step)?;
    let mut sorted_gammas = gammas.to_vec();
    sorted_gammas.sort_by(f64::total_cmp);
    sorted_gammas.dedup();
    let jobs: Vec<(Method, f64, f64)> = methods
        .iter()
        .flat_map(|&m| {
            let durations = &durations;
            sorted_gammas
                .iter()
                .flat_map(move |&g| durations.iter().map(move |&t| (m, g, t)))
        })
        .collect();
    Ok(map_jobs(&jobs, |&(m, g, t)| evaluate(m, g, t, steps)))
}

/// Spin efficiency of the optimal-structure sequence built from each
/// `(t1, t2)` grid point. Rows run over `t1` first, then `t2`.
pub fn run_contour(
    gamma: f64,
    duration: f64,
    t1_grid: &Grid,
    t2_grid: &Grid,
    steps: usize,
) -> Result<Vec<ContourRecord>> {
    let params = SystemParams::new(gamma, duration)?;
    let t2s = t2_grid.points();
    let jobs: Vec<(f64, f64)> = t1_grid
        .points()
        .into_iter()
        .flat_map(|t1| t2s.iter().map(move |&t2| (t1, t2)))
        .collect();
    Ok(map_jobs(&jobs, |&(t1, t2)| {
        contour_point(&params, t1, t2, steps)
    }))
}

pub fn contour_point(params: &SystemParams, t1: f64, t2: f64, steps: usize) -> ContourRecord {
    let outcome = optimal_from_switch_times(params, t1, t2)
        .and_then(|seq| seq.to_signal())
        .and_then(|sig| simulate_spin(&sig, params, steps));
    match outcome {
        Ok(traj) => ContourRecord {
            t1,
            t2,
            efficiency: Some(traj.efficiency),
            error: None,
        },
        Err(e) => ContourRecord {
            t1,
            t2,
            efficiency: None,
            error: Some(e.code().to_string()),
        },
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(sig15).unwrap_or_default()
}

fn validity(error: &Option<String>) -> &str {
    error.as_deref().unwrap_or("true")
}

pub const SWEEP_HEADER: &str = "method,gamma,duration,efficiency,spring_cost,valid";
pub const CONTOUR_HEADER: &str = "t1,t2,efficiency,valid";

/// Writes sweep rows. The `valid` column holds `true` or the error code;
/// numeric cells of invalid rows are left empty.
pub fn write_sweep_csv<W: Write>(records: &[SweepRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.method,
            sig15(r.gamma),
            sig15(r.duration),
            opt(r.efficiency),
            opt(r.spring_cost),
            validity(&r.error)
        )?;
    }
    Ok(())
}

pub fn write_contour_csv<W: Write>(records: &[ContourRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "{CONTOUR_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{}",
            sig15(r.t1),
            sig15(r.t2),
            opt(r.efficiency),
            validity(&r.error)
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        let g: Grid = "1:2:3".parse().unwrap();
        assert_eq!(g.points(), vec![1.0, 1.5, 2.0]);
        assert!("1:2".parse::<Grid>().is_err());
        assert!("1:2:0".parse::<Grid>().is_err());
    }

    #[test]
    fn duration_grid_is_inclusive() {
        let d = duration_grid(10.0, 30.0, 1.0).unwrap();
        assert_eq!(d.len(), 21);
        assert_eq!(d[20], 30.0);
        assert!(duration_grid(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn empty_method_list() {
        let recs = run_sweep(&[0.1], 10.0, 30.0, 1.0, &[], 1000).unwrap();
        assert!(recs.is_empty());
    }

    #[test]
    fn equal_switch_times_are_invalid() {
        let p = SystemParams::new(0.1, 20.0).unwrap();
        let r = contour_point(&p, 5.0, 5.0, 1000);
        assert!(!r.valid());
        assert_eq!(r.error.as_deref(), Some("switch_ordering"));
    }

    #[test]
    fn invalid_rows_have_empty_numbers() {
        let r = evaluate(Method::Suboptimal, 0.1, 5.0, 1000);
        let mut buf = Vec::new();
        write_sweep_csv(&[r], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().nth(1).unwrap(),
            "suboptimal,0.1,5,,,duration_too_short"
        );
    }
}
