//! Named control strategies and the solver + simulator composition used by
//! sweeps.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{ControlSignal, PulseSequence, SystemParams};
use crate::optimal::solve_optimal;
use crate::polynomial::{polynomial_control_signal, solve_polynomial, MAX_DEGREE, MIN_DEGREE};
use crate::spin::{simulate_spin, DEFAULT_STEPS};
use crate::suboptimal::solve_suboptimal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Suboptimal,
    Optimal,
    /// Reverse-engineered polynomial of the given degree.
    Polynomial(usize),
}

impl Method {
    /// The five strategies compared in duration sweeps.
    pub const SWEEP_SET: [Method; 5] = [
        Method::Suboptimal,
        Method::Optimal,
        Method::Polynomial(8),
        Method::Polynomial(10),
        Method::Polynomial(12),
    ];

    pub fn sequence(&self, params: &SystemParams) -> Option<Result<PulseSequence>> {
        match self {
            Method::Suboptimal => Some(solve_suboptimal(params)),
            Method::Optimal => Some(solve_optimal(params)),
            Method::Polynomial(_) => None,
        }
    }

    pub fn signal(&self, params: &SystemParams) -> Result<ControlSignal> {
        match self {
            Method::Polynomial(degree) => {
                let poly = solve_polynomial(*degree, params.duration())?;
                polynomial_control_signal(&poly, params.gamma())
            }
            _ => self
                .sequence(params)
                .expect("impulsive method")?
                .to_signal(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::Suboptimal => f.write_str("suboptimal"),
            Method::Optimal => f.write_str("optimal"),
            Method::Polynomial(n) => write!(f, "poly{n}"),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "suboptimal" => Ok(Method::Suboptimal),
            "optimal" => Ok(Method::Optimal),
            _ => {
                let degree: usize = s
                    .strip_prefix("poly")
                    .and_then(|d| d.parse().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))?;
                if !(MIN_DEGREE..=MAX_DEGREE).contains(&degree) {
                    return Err(Error::DegreeOutOfRange(degree));
                }
                Ok(Method::Polynomial(degree))
            }
        }
    }
}

impl Serialize for Method {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Final target population `X(T)²` at the default resolution.
pub fn efficiency_of(method: Method, params: &SystemParams) -> Result<f64> {
    let signal = method.signal(params)?;
    Ok(simulate_spin(&signal, params, DEFAULT_STEPS)?.efficiency)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Method::SWEEP_SET {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("poly13".parse::<Method>().is_err());
        assert!("bangbang".parse::<Method>().is_err());
    }
}
