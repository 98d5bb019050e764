//! Numerical experiments on the reduced and full maps.
//!
//! Grid experiments run their cells in parallel with rayon and collect in
//! grid order, so parallel and serial runs produce identical tables.

mod basin;
mod bifurcation;
mod correspondence;
mod orbit;

pub use basin::{basin_grid, basin_grid_with, BasinGrid, BasinOptions, GridBounds};
pub use bifurcation::{
    bifurcation_scan, locate_transitions, Axis, BifurcationScan, DemographicParam, Transition,
};
pub use correspondence::{correspondence_check, simulate_full, CorrespondenceReport, FullOrbit};
pub use orbit::{
    match_equilibrium, orbit_census, sample_box_states, simulate_orbit, simulate_orbit_full,
    OrbitCensus, OrbitResult, OrbitSample,
};

use thiserror::Error;

use crate::model::ModelError;
use crate::reduction::ReductionError;

/// Default step-norm threshold for declaring an orbit converged.
pub const CONVERGENCE_TOL: f64 = 1e-12;
/// Consecutive sub-threshold steps required before stopping.
pub const CONFIRMATION_STEPS: usize = 10;
pub const MAX_ITER: usize = 1_000_000;
/// Distance within which an orbit limit is attributed to an equilibrium.
pub const MATCH_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("grid resolution must be positive in both directions (got {0}x{1})")]
    ZeroResolution(usize, usize),
    #[error("invalid grid bounds: {0}")]
    InvalidBounds(String),
    #[error("unknown demographic parameter {0:?} (expected bS1, bS2, bI1, bI2 or c_AB_ij)")]
    UnknownParameter(String),
    #[error("invalid axis: {0}")]
    InvalidAxis(String),
    #[error("initial state must be non-negative and finite")]
    InvalidInitialState,
    #[error("initial state must lie in Omega (some infected individual)")]
    NotInOmega,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}
