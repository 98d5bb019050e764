//! Two competing species sharing an SIS parasite.
//!
//! [`model`] holds the four-variable map (demography after `k` disease
//! episodes), [`reduction`] aggregates it to a planar map on species totals
//! once the fast disease dynamics have equilibrated, [`analysis`] classifies
//! the asymptotic behaviour of that planar map, and [`experiments`] runs
//! orbits, basin rasters, bifurcation scans and full-versus-reduced
//! comparisons. [`cli`] is the `parcomp` front end.
//!
//! Numerical code is generic over [`Scalar`] (`f32` or `f64`); the `*F64`
//! aliases below are what the CLI and the tolerance-bearing checks use.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod experiments;
pub mod model;
pub mod reduction;
mod scalar;

pub use scalar::Scalar;

pub type DemographyParamsF64 = model::DemographyParams<f64>;
pub type DiseaseParamsF64 = model::DiseaseParams<f64>;
pub type FullStateF64 = model::FullState<f64>;
pub type ReducedParamsF64 = reduction::ReducedParams<f64>;
pub type ConvergenceReportF64 = reduction::ConvergenceReport<f64>;
pub type ReducedStateF64 = analysis::ReducedState<f64>;
pub type IsoclineBranchF64 = analysis::IsoclineBranch<f64>;
pub type EquilibriumF64 = analysis::Equilibrium<f64>;
pub type EquilibriumSetF64 = analysis::EquilibriumSet<f64>;
pub type ClassificationF64 = analysis::Classification<f64>;
pub type OutcomeCoefficientsF64 = analysis::OutcomeCoefficients<f64>;
pub type OrbitResultF64 = experiments::OrbitResult<f64>;
pub type BasinGridF64 = experiments::BasinGrid<f64>;
pub type BifurcationScanF64 = experiments::BifurcationScan<f64>;
pub type CorrespondenceReportF64 = experiments::CorrespondenceReport<f64>;
