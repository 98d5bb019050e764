//! Asymptotic analysis of the reduced planar map
//! `H(x₁, x₂) = (φ₁(x) x₁, φ₂(x) x₂)`.
//!
//! Species indices are zero-based: `0` is species 1, `1` is species 2.

mod cases;
mod equilibria;
mod isocline;
mod outcome;

pub use cases::{classify, classify_case, CaseLabel, Classification, ExpectedPattern};
pub use equilibria::{
    eigenvalues, find_equilibria, Equilibrium, EquilibriumKind, EquilibriumSet, Stability,
    HYPERBOLICITY_MARGIN,
};
pub use isocline::{isocline, isocline_height, IsoclineBranch};
pub use outcome::{
    leslie_gower_d, outcome_coefficients, outcome_coefficients_at, LvScenario, OutcomeCoefficients,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::reduction::{ReducedParams, ReductionError};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("isocline of species {} does not reach the open quadrant (phi(0,0) <= 1)", .species + 1)]
    NoIsocline { species: usize },
    #[error("x1 = {x1} outside the isocline domain [0, {max}]")]
    OutOfDomain { x1: f64, max: f64 },
    #[error("parasite-modified setting: D-coefficients undefined (competition coefficients depend on infection status)")]
    StatusDependent,
    #[error(transparent)]
    Reduction(#[from] ReductionError),
}

/// Species totals `(N¹, N²)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReducedState<T> {
    pub n1: T,
    pub n2: T,
}

impl<T: Scalar> ReducedState<T> {
    pub fn new(n1: T, n2: T) -> Self {
        Self { n1, n2 }
    }

    #[inline]
    pub fn get(&self, i: usize) -> T {
        if i == 0 {
            self.n1
        } else {
            self.n2
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.n1 - other.n1).abs().max((self.n2 - other.n2).abs())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.n1 >= T::zero() && self.n2 >= T::zero()
    }

    /// `self ≤_K other`: `x₁ ≤ x₁'` and `x₂ ≥ x₂'`.
    pub fn k_le(&self, other: &Self) -> bool {
        self.n1 <= other.n1 && self.n2 >= other.n2
    }

    /// `self <_K other`: `x₁ < x₁'` and `x₂ > x₂'`.
    pub fn k_lt(&self, other: &Self) -> bool {
        self.n1 < other.n1 && self.n2 > other.n2
    }
}

/// The two Beverton-Holt denominators `1 + c_S^i·x` and `1 + c_I^i·x`.
#[inline]
fn denominators<T: Scalar>(rp: &ReducedParams<T>, i: usize, x: &ReducedState<T>) -> (T, T) {
    (
        T::one() + rp.c_s[i][0] * x.n1 + rp.c_s[i][1] * x.n2,
        T::one() + rp.c_i[i][0] * x.n1 + rp.c_i[i][1] * x.n2,
    )
}

/// Per-capita growth factor of species `i`.
#[inline]
pub fn phi<T: Scalar>(rp: &ReducedParams<T>, i: usize, x: &ReducedState<T>) -> T {
    let (ds, di) = denominators(rp, i, x);
    rp.r_s[i] / ds + rp.r_i[i] / di
}

/// `(∂φ_i/∂x₁, ∂φ_i/∂x₂)`.
pub fn phi_gradient<T: Scalar>(rp: &ReducedParams<T>, i: usize, x: &ReducedState<T>) -> [T; 2] {
    let (ds, di) = denominators(rp, i, x);
    let ws = rp.r_s[i] / (ds * ds);
    let wi = rp.r_i[i] / (di * di);
    std::array::from_fn(|j| -(ws * rp.c_s[i][j] + wi * rp.c_i[i][j]))
}

/// One step of the reduced map.
#[inline]
pub fn reduced_step<T: Scalar>(rp: &ReducedParams<T>, x: &ReducedState<T>) -> ReducedState<T> {
    ReducedState::new(phi(rp, 0, x) * x.n1, phi(rp, 1, x) * x.n2)
}

/// `DH(x)`, row `i` holding the partials of `H_i`.
pub fn jacobian<T: Scalar>(rp: &ReducedParams<T>, x: &ReducedState<T>) -> [[T; 2]; 2] {
    std::array::from_fn(|i| {
        let g = phi_gradient(rp, i, x);
        let xi = x.get(i);
        std::array::from_fn(|j| {
            if i == j {
                phi(rp, i, x) + xi * g[j]
            } else {
                xi * g[j]
            }
        })
    })
}
