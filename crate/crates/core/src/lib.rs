//! Shortcut-to-adiabaticity pulse design for lossy three-level transfer,
//! via the damped-spring analogue of the dark/bright spin dynamics.
//!
//! Solvers produce [`ControlSignal`]s; [`simulate_spring`] evaluates the
//! spring cost and [`simulate_spin`] validates the transfer on the original
//! Bloch equations.

pub mod error;
pub mod format;
pub mod integrate;
pub mod method;
pub mod model;
pub mod optimal;
pub mod polynomial;
pub mod roots;
pub mod spin;
pub mod spring;
pub mod suboptimal;
pub mod sweep;

pub use error::{Error, Result};
pub use method::{efficiency_of, Method};
pub use model::{
    control_area, from_dark_bright, to_dark_bright, ControlSignal, DarkBrightState, Impulse,
    PulseSequence, Segment, SegmentShape, SequenceKind, SpinStateXYZ, SpringState, SystemParams,
    TARGET_AREA,
};
pub use optimal::{solve_optimal, verify_singular_conditions, SingularVerificationReport};
pub use polynomial::{
    build_equality_constraints, polynomial_control_signal, solve_polynomial, PolynomialControl,
};
pub use spin::{simulate_spin, simulate_spin_with, theta_trajectory, SpinOptions, SpinTrajectory};
pub use spring::{free_evolution, reference_cost, simulate_spring, SpringTrajectory};
pub use suboptimal::solve_suboptimal;
pub use sweep::{run_contour, run_sweep, ContourRecord, Grid, SweepRecord};
