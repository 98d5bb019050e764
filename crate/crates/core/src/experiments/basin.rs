use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::orbit::{match_equilibrium, simulate_orbit};
use super::{ExperimentError, CONVERGENCE_TOL, MATCH_TOL, MAX_ITER};
use crate::analysis::{find_equilibria, Equilibrium, ReducedState};
use crate::reduction::ReducedParams;
use crate::scalar::Scalar;

/// Axis-aligned rectangle `[lo₁, hi₁] × [lo₂, hi₂]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridBounds<T> {
    pub lo: [T; 2],
    pub hi: [T; 2],
}

impl<T: Scalar> GridBounds<T> {
    /// `[0, trapping box]`: one step of the map lands every orbit inside.
    pub fn trapping(rp: &ReducedParams<T>) -> Self {
        Self {
            lo: [T::zero(); 2],
            hi: rp.trapping_box(),
        }
    }

    fn validate(&self) -> Result<(), ExperimentError> {
        for k in 0..2 {
            let (lo, hi) = (self.lo[k], self.hi[k]);
            if !(lo >= T::zero() && hi > lo && hi.is_finite()) {
                return Err(ExperimentError::InvalidBounds(format!(
                    "axis {} is [{lo}, {hi}]",
                    k + 1
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasinOptions<T> {
    /// Defaults to the trapping box.
    pub bounds: Option<GridBounds<T>>,
    pub max_iter: usize,
    pub tol: T,
    pub match_tol: T,
}

impl<T: Scalar> Default for BasinOptions<T> {
    fn default() -> Self {
        Self {
            bounds: None,
            max_iter: MAX_ITER,
            tol: T::of(CONVERGENCE_TOL),
            match_tol: T::of(MATCH_TOL),
        }
    }
}

/// Raster of orbit limits over cell centres.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasinGrid<T> {
    pub bounds: GridBounds<T>,
    /// `(n₁, n₂)` cells along `x₁` and `x₂`.
    pub resolution: (usize, usize),
    /// Row-major in `x₂` then `x₁`: cell `(a, b)` is `labels[b * n₁ + a]`.
    /// `None` marks an unresolved cell.
    pub labels: Vec<Option<usize>>,
    pub equilibria: Vec<Equilibrium<T>>,
}

impl<T: Scalar> BasinGrid<T> {
    pub fn cell_center(&self, a: usize, b: usize) -> ReducedState<T> {
        cell_center(&self.bounds, self.resolution, a, b)
    }

    pub fn label(&self, a: usize, b: usize) -> Option<usize> {
        self.labels[b * self.resolution.0 + a]
    }

    /// Number of cells per equilibrium index.
    pub fn counts(&self) -> BTreeMap<usize, usize> {
        let mut m = BTreeMap::new();
        for l in self.labels.iter().flatten() {
            *m.entry(*l).or_default() += 1;
        }
        m
    }

    pub fn unresolved(&self) -> usize {
        self.labels.iter().filter(|l| l.is_none()).count()
    }
}

fn cell_center<T: Scalar>(
    bounds: &GridBounds<T>,
    (n1, n2): (usize, usize),
    a: usize,
    b: usize,
) -> ReducedState<T> {
    let at = |k: usize, idx: usize, n: usize| {
        let frac = T::of((idx as f64 + 0.5) / n as f64);
        bounds.lo[k] + (bounds.hi[k] - bounds.lo[k]) * frac
    };
    ReducedState::new(at(0, a, n1), at(1, b, n2))
}

/// Basin raster over the trapping box with the default convergence
/// settings.
pub fn basin_grid<T: Scalar>(
    rp: &ReducedParams<T>,
    resolution: (usize, usize),
) -> Result<BasinGrid<T>, ExperimentError> {
    basin_grid_with(rp, resolution, &BasinOptions::default())
}

pub fn basin_grid_with<T: Scalar>(
    rp: &ReducedParams<T>,
    resolution: (usize, usize),
    opts: &BasinOptions<T>,
) -> Result<BasinGrid<T>, ExperimentError> {
    let (n1, n2) = resolution;
    if n1 == 0 || n2 == 0 {
        return Err(ExperimentError::ZeroResolution(n1, n2));
    }
    let bounds = opts.bounds.unwrap_or_else(|| GridBounds::trapping(rp));
    bounds.validate()?;
    let equilibria = find_equilibria(rp).equilibria;
    let labels = (0..n1 * n2)
        .into_par_iter()
        .map(|cell| {
            let x0 = cell_center(&bounds, resolution, cell % n1, cell / n1);
            simulate_orbit(rp, x0, opts.max_iter, opts.tol)
                .limit
                .and_then(|l| match_equilibrium(&l, &equilibria, opts.match_tol))
        })
        .collect();
    Ok(BasinGrid {
        bounds,
        resolution,
        labels,
        equilibria,
    })
}
